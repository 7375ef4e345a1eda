//! Time stepping on a road network: junction coupling, open boundaries,
//! the three-stage strong-stability-preserving Runge-Kutta scheme and the
//! conservation audit.

use serde::Serialize;

use crate::dg::{project_initial, DgOperator, Mesh1D, RoadState};
use crate::error::{Error, Result};
use crate::flux::{FluxModel, FundamentalDiagram, NumericalFlux};
use crate::junction::JunctionFluxes;
use crate::limiters::{apply_bp, apply_tvb, lobatto_extrema, BpConfig, TvbConfig};
use crate::network::config::{
    EndKind, NetworkConfig, ResolvedJunction, RoadEnd, SolverConfig,
};
use crate::quadrature::GaussLobatto;

/// Traces may leave `[0, ρ_max]` by this much before coupling fails.
pub const TRACE_TOL: f64 = 1e-10;

/// Static description of one road inside a [`Network`].
#[derive(Debug, Clone)]
pub struct Road {
    pub id: String,
    pub model: FluxModel,
    pub ends: [EndKind; 2],
    op: DgOperator,
}

impl Road {
    pub fn degree(&self) -> usize {
        self.op.degree()
    }

    pub fn is_periodic(&self) -> bool {
        self.ends[0] == EndKind::Periodic
    }
}

/// A validated network with solver settings.
#[derive(Debug, Clone)]
pub struct Network {
    roads: Vec<Road>,
    junctions: Vec<ResolvedJunction>,
    solver: SolverConfig,
}

/// Solution on every road at a common time.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    pub roads: Vec<RoadState>,
    pub time: f64,
    pub steps: usize,
}

impl NetworkState {
    pub fn mass(&self) -> f64 {
        self.roads.iter().map(RoadState::mass).sum()
    }
}

/// Numerical fluxes at the `[left, right]` ends of every road.
pub type EndFluxes = Vec<[f64; 2]>;

impl Network {
    /// Validates `cfg` and returns the network with its projected initial
    /// state.
    pub fn new(cfg: &NetworkConfig) -> Result<(Network, NetworkState)> {
        let topo = cfg.resolve()?;
        let mut roads = Vec::with_capacity(cfg.roads.len());
        let mut states = Vec::with_capacity(cfg.roads.len());
        for (i, rc) in cfg.roads.iter().enumerate() {
            let degree = topo.degrees[i];
            let mesh = Mesh1D::uniform(rc.x_min, rc.x_max, rc.cells)?;
            states.push(project_initial(mesh, degree, |x| rc.initial.eval(x))?);
            roads.push(Road {
                id: rc.id.clone(),
                model: rc.flux,
                ends: topo.ends[i],
                op: DgOperator::new(degree)?,
            });
        }
        let net = Network {
            roads,
            junctions: topo.junctions,
            solver: cfg.solver.clone(),
        };
        let mut state = NetworkState {
            roads: states,
            time: 0.0,
            steps: 0,
        };
        net.limit(&mut state.roads, 0.0)?;
        Ok((net, state))
    }

    pub fn roads(&self) -> &[Road] {
        &self.roads
    }

    pub fn junctions(&self) -> &[ResolvedJunction] {
        &self.junctions
    }

    pub fn solver(&self) -> &SolverConfig {
        &self.solver
    }

    /// Largest stable step over all roads, before clipping to output
    /// times.
    pub fn compute_dt(&self, state: &NetworkState) -> f64 {
        self.roads
            .iter()
            .zip(&state.roads)
            .map(|(road, rs)| {
                let k = road.degree();
                let dx = rs.mesh().min_width();
                let alpha = road.model.lf_alpha();
                let h = if k == 3 { dx.powf(4.0 / 3.0) } else { dx };
                let mut dt = self.solver.cfl[k] * h / alpha;
                if self.solver.bp {
                    dt = dt.min(GaussLobatto::for_degree(k).min_weight() * dx / alpha);
                }
                dt
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Numerical fluxes at every road end for the given stage state.
    pub fn end_fluxes(&self, roads: &[RoadState], time: f64) -> Result<EndFluxes> {
        let mut out = vec![[0.0; 2]; self.roads.len()];
        for (i, (road, rs)) in self.roads.iter().zip(roads).enumerate() {
            let n = rs.n_cells();
            let left = rs.left_unchecked(0);
            let right = rs.right_unchecked(n - 1);
            let nf = self.solver.flux;
            for (e, side) in [RoadEnd::Left, RoadEnd::Right].into_iter().enumerate() {
                let trace = if side == RoadEnd::Left { left } else { right };
                out[i][e] = match road.ends[e] {
                    EndKind::Junction { .. } => continue,
                    EndKind::Periodic => nf.eval(&road.model, right, left),
                    kind => open_boundary_flux(&road.model, nf, side, kind, trace),
                };
            }
        }
        for j in &self.junctions {
            let fluxes = self.junction_fluxes(j, roads, time)?;
            for (slot, &r) in j.incoming.iter().enumerate() {
                out[r][1] = fluxes.incoming()[slot];
            }
            for (slot, &r) in j.outgoing.iter().enumerate() {
                out[r][0] = fluxes.outgoing()[slot];
            }
        }
        Ok(out)
    }

    fn checked_trace(&self, road: usize, cell: usize, value: f64, time: f64) -> Result<f64> {
        let rho_max = self.roads[road].model.rho_max();
        if value >= -TRACE_TOL && value <= rho_max + TRACE_TOL {
            Ok(value.clamp(0.0, rho_max))
        } else {
            Err(Error::Integrity {
                road: self.roads[road].id.clone(),
                cell,
                time,
                message: format!(
                    "junction trace {value} outside [0, {rho_max}]; enable the bound-preserving limiter"
                ),
            })
        }
    }

    /// Resolves one junction from the current traces.
    pub fn junction_fluxes(
        &self,
        j: &ResolvedJunction,
        roads: &[RoadState],
        time: f64,
    ) -> Result<JunctionFluxes> {
        let mut demands = [0.0; 2];
        let mut supplies = [0.0; 2];
        for (slot, &r) in j.incoming.iter().enumerate() {
            let rs = &roads[r];
            let last = rs.n_cells() - 1;
            let t = self.checked_trace(r, last, rs.right_unchecked(last), time)?;
            demands[slot] = self.roads[r].model.demand_of(t);
        }
        for (slot, &r) in j.outgoing.iter().enumerate() {
            let rs = &roads[r];
            let t = self.checked_trace(r, 0, rs.left_unchecked(0), time)?;
            supplies[slot] = self.roads[r].model.supply_of(t);
        }
        j.rule
            .solve(&demands[..j.incoming.len()], &supplies[..j.outgoing.len()])
    }

    /// Net flux into the network through open boundaries.
    pub fn boundary_inflow(&self, fluxes: &EndFluxes) -> f64 {
        self.roads
            .iter()
            .zip(fluxes)
            .map(|(road, f)| {
                let mut b = 0.0;
                if is_open(road.ends[0]) {
                    b += f[0];
                }
                if is_open(road.ends[1]) {
                    b -= f[1];
                }
                b
            })
            .sum()
    }

    fn residuals(&self, roads: &[RoadState], fluxes: &EndFluxes, out: &mut [Vec<f64>]) {
        for (((road, rs), f), r) in self.roads.iter().zip(roads).zip(fluxes).zip(out) {
            road.op
                .residual_into(rs, &road.model, self.solver.flux, f[0], f[1], r);
        }
    }

    fn limit(&self, roads: &mut [RoadState], time: f64) -> Result<()> {
        let tvb = TvbConfig {
            m: self.solver.tvb_m,
            enabled: self.solver.tvb,
        };
        for (road, rs) in self.roads.iter().zip(roads.iter_mut()) {
            if let Some(pos) = rs.coeffs().iter().position(|c| !c.is_finite()) {
                return Err(Error::Integrity {
                    road: road.id.clone(),
                    cell: pos / (rs.degree() + 1),
                    time,
                    message: "non-finite coefficient".into(),
                });
            }
            apply_tvb(rs, &tvb, road.is_periodic());
            let bp = BpConfig {
                rho_min: 0.0,
                rho_max: road.model.rho_max(),
                enabled: self.solver.bp,
            };
            apply_bp(rs, &bp).map_err(|v| v.into_error(&road.id, time))?;
        }
        Ok(())
    }
}

fn is_open(kind: EndKind) -> bool {
    matches!(kind, EndKind::Inflow { .. } | EndKind::Outflow)
}

/// Flux through an open road end. The ghost density is the inflow value
/// or, for outflow, the interior trace itself.
pub fn open_boundary_flux<M: FundamentalDiagram + ?Sized>(
    model: &M,
    numflux: NumericalFlux,
    side: RoadEnd,
    kind: EndKind,
    trace: f64,
) -> f64 {
    let ghost = match kind {
        EndKind::Inflow { density } => density,
        EndKind::Outflow => trace,
        EndKind::Junction { .. } | EndKind::Periodic => {
            panic!("open_boundary_flux called for a coupled road end")
        }
    };
    match side {
        RoadEnd::Left => numflux.eval(model, ghost, trace),
        RoadEnd::Right => numflux.eval(model, trace, ghost),
    }
}

/// Mass bookkeeping of a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct MassAudit {
    pub initial_mass: f64,
    pub final_mass: f64,
    /// Time integral of the net open-boundary inflow, with the Runge-Kutta
    /// stage weights.
    pub boundary_flux_integral: f64,
    /// Time integral of the absolute boundary fluxes; part of the scale.
    pub boundary_flux_magnitude: f64,
}

impl MassAudit {
    pub fn drift(&self) -> f64 {
        self.final_mass - self.initial_mass
    }

    /// `|drift − boundary integral|`.
    pub fn mismatch(&self) -> f64 {
        (self.drift() - self.boundary_flux_integral).abs()
    }

    /// Mismatch relative to the mass that entered, left or sat in the
    /// network.
    pub fn relative_mismatch(&self) -> f64 {
        let scale = self
            .initial_mass
            .abs()
            .max(self.final_mass.abs())
            .max(self.boundary_flux_magnitude)
            .max(f64::MIN_POSITIVE);
        self.mismatch() / scale
    }
}

/// Stepper holding the network, its state and work buffers.
#[derive(Debug, Clone)]
pub struct Simulation {
    net: Network,
    state: NetworkState,
    audit: MassAudit,
    dt_history: Vec<f64>,
    min_density: f64,
    max_density: f64,
    u0: Vec<Vec<f64>>,
    rhs: Vec<Vec<f64>>,
}

/// Road states at one output time.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub roads: Vec<RoadState>,
}

/// Everything a finished run reports.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub road_ids: Vec<String>,
    pub snapshots: Vec<Snapshot>,
    pub final_state: NetworkState,
    pub audit: MassAudit,
    pub dt_history: Vec<f64>,
    /// Extremes over Gauss-Lobatto nodes of all cells after every step.
    pub min_density: f64,
    pub max_density: f64,
}

impl RunResult {
    pub fn snapshot_at(&self, time: f64) -> Option<&Snapshot> {
        self.snapshots.iter().find(|s| s.time == time)
    }

    pub fn road_index(&self, id: &str) -> Option<usize> {
        self.road_ids.iter().position(|r| r == id)
    }
}

fn extrema(roads: &[RoadState]) -> (f64, f64) {
    roads.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |acc, rs| {
        (0..rs.n_cells()).fold(acc, |(lo, hi), j| {
            let (a, b) = lobatto_extrema(rs, j);
            (lo.min(a), hi.max(b))
        })
    })
}

impl Simulation {
    pub fn new(cfg: &NetworkConfig) -> Result<Self> {
        let (net, state) = Network::new(cfg)?;
        let buffers: Vec<Vec<f64>> = state.roads.iter().map(|r| vec![0.0; r.coeffs().len()]).collect();
        let mass = state.mass();
        let (lo, hi) = extrema(&state.roads);
        Ok(Simulation {
            net,
            state,
            audit: MassAudit {
                initial_mass: mass,
                final_mass: mass,
                ..MassAudit::default()
            },
            dt_history: Vec::new(),
            min_density: lo,
            max_density: hi,
            u0: buffers.clone(),
            rhs: buffers,
        })
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn state(&self) -> &NetworkState {
        &self.state
    }

    pub fn audit(&self) -> &MassAudit {
        &self.audit
    }

    /// One Runge-Kutta step of size `dt`. Limiters run after every stage.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        let t = self.state.time;
        let net = &self.net;
        let roads = &mut self.state.roads;
        for (u0, rs) in self.u0.iter_mut().zip(roads.iter()) {
            u0.copy_from_slice(rs.coeffs());
        }
        // Stage update a·u0 + (1 − a)·(u + dt L(u)) evaluated at `at`,
        // producing a state at `next`; `w` is the weight of the stage in
        // the step's mass balance.
        let stages = [
            (0.0, t, t + dt, 1.0 / 6.0),
            (0.75, t + dt, t + 0.5 * dt, 1.0 / 6.0),
            (1.0 / 3.0, t + 0.5 * dt, t + dt, 2.0 / 3.0),
        ];
        let mut inflow = 0.0;
        let mut magnitude = 0.0;
        for (a, at, next, w) in stages {
            let fluxes = net.end_fluxes(roads, at)?;
            inflow += w * net.boundary_inflow(&fluxes);
            magnitude += w * net
                .roads
                .iter()
                .zip(&fluxes)
                .map(|(r, f)| {
                    (if is_open(r.ends[0]) { f[0].abs() } else { 0.0 })
                        + (if is_open(r.ends[1]) { f[1].abs() } else { 0.0 })
                })
                .sum::<f64>();
            net.residuals(roads, &fluxes, &mut self.rhs);
            for ((rs, u0), r) in roads.iter_mut().zip(&self.u0).zip(&self.rhs) {
                for ((c, u0), r) in rs.coeffs_mut().iter_mut().zip(u0).zip(r) {
                    *c = a * u0 + (1.0 - a) * (*c + dt * r);
                }
            }
            net.limit(roads, next)?;
        }
        self.state.time = t + dt;
        self.state.steps += 1;
        self.audit.boundary_flux_integral += dt * inflow;
        self.audit.boundary_flux_magnitude += dt * magnitude;
        self.audit.final_mass = self.state.mass();
        self.dt_history.push(dt);
        let (lo, hi) = extrema(&self.state.roads);
        self.min_density = self.min_density.min(lo);
        self.max_density = self.max_density.max(hi);
        Ok(())
    }

    /// Steps until `target`, landing on it exactly.
    pub fn advance_to(&mut self, target: f64) -> Result<()> {
        while self.state.time < target {
            let dt_max = self.net.compute_dt(&self.state);
            let remaining = target - self.state.time;
            if remaining <= dt_max {
                self.step(remaining)?;
                self.state.time = target;
            } else {
                self.step(dt_max)?;
            }
        }
        Ok(())
    }

    /// Runs to `t_end`, keeping snapshots at the configured output times.
    pub fn run(mut self) -> Result<RunResult> {
        let mut outputs = self.net.solver.output_times.clone();
        outputs.sort_by(f64::total_cmp);
        outputs.dedup();
        let mut snapshots = Vec::with_capacity(outputs.len());
        for &t in &outputs {
            self.advance_to(t)?;
            snapshots.push(Snapshot {
                time: t,
                roads: self.state.roads.clone(),
            });
        }
        let t_end = self.net.solver.t_end;
        self.advance_to(t_end)?;
        Ok(RunResult {
            road_ids: self.net.roads.iter().map(|r| r.id.clone()).collect(),
            snapshots,
            final_state: self.state,
            audit: self.audit,
            dt_history: self.dt_history,
            min_density: self.min_density,
            max_density: self.max_density,
        })
    }
}

/// Builds and runs the network described by `cfg`.
pub fn run(cfg: &NetworkConfig) -> Result<RunResult> {
    Simulation::new(cfg)?.run()
}
