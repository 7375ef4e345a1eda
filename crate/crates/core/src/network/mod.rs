//! Road networks: configuration, junction coupling and time stepping.

pub mod config;
pub mod sim;

pub use config::{
    BoundaryConfig, EndKind, InitialCondition, NetworkConfig, RoadConfig, RoadEnd, SolverConfig,
    DEFAULT_CFL,
};
pub use sim::{
    open_boundary_flux, run, MassAudit, Network, NetworkState, Road, RunResult, Simulation,
    Snapshot,
};
