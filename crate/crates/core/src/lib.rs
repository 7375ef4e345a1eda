//! Runge-Kutta discontinuous Galerkin solver for the LWR traffic model on
//! road networks, with bound-preserving limiting.

pub mod error;
pub mod flux;
pub mod dg;
pub mod junction;
pub mod limiters;
pub mod network;
pub mod output;
pub mod presets;
pub mod quadrature;
pub mod verification;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/junctions.md")]
    mod junctions {}
    #[doc = include_str!("../../../book/src/dg.md")]
    mod dg {}
    #[doc = include_str!("../../../book/src/limiters.md")]
    mod limiters {}
    #[doc = include_str!("../../../book/src/networks.md")]
    mod networks {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
