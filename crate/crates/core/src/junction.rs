//! Junction Riemann solvers.
//!
//! At a junction the incoming roads offer their demands and the outgoing
//! roads their supplies. The solvers below pick the junction fluxes that
//! respect the turning fractions, maximize the total throughput and, when
//! several incoming roads compete for one outgoing road, split the capacity
//! by the right-of-way parameter.
//!
//! All solvers work on fluxes only. Converting trace densities into demands
//! and supplies is the caller's job (see [`crate::flux::demand`] and
//! [`crate::flux::supply`]), which keeps these functions independent of the
//! flux models on the incident roads.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flux::FundamentalDiagram;

/// Tolerance used for feasibility and conservation checks.
pub const FEASIBILITY_TOL: f64 = 1e-13;

/// Junction topology by number of incoming and outgoing roads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum JunctionKind {
    OneOne,
    OneTwo,
    TwoOne,
    TwoTwo,
}

impl JunctionKind {
    pub fn from_counts(incoming: usize, outgoing: usize) -> Option<Self> {
        match (incoming, outgoing) {
            (1, 1) => Some(JunctionKind::OneOne),
            (1, 2) => Some(JunctionKind::OneTwo),
            (2, 1) => Some(JunctionKind::TwoOne),
            (2, 2) => Some(JunctionKind::TwoTwo),
            _ => None,
        }
    }

    pub fn counts(self) -> (usize, usize) {
        match self {
            JunctionKind::OneOne => (1, 1),
            JunctionKind::OneTwo => (1, 2),
            JunctionKind::TwoOne => (2, 1),
            JunctionKind::TwoTwo => (2, 2),
        }
    }

    pub const ALL: [JunctionKind; 4] = [
        JunctionKind::OneOne,
        JunctionKind::OneTwo,
        JunctionKind::TwoOne,
        JunctionKind::TwoTwo,
    ];
}

impl std::fmt::Display for JunctionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (n, m) = self.counts();
        write!(f, "{n}x{m}")
    }
}

/// A junction as declared in a network configuration.
///
/// Incoming roads attach by their right end, outgoing roads by their left
/// end. `alpha` is the share of the first incoming road that turns into the
/// first outgoing road (1×2 and 2×2), `beta` the same share for the second
/// incoming road (2×2 only), `q` the right-of-way share of the first
/// incoming road (2×1 only).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JunctionSpec {
    pub incoming: Vec<String>,
    pub outgoing: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
}

/// Validated junction parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JunctionRule {
    OneOne,
    OneTwo { alpha: f64 },
    TwoOne { q: f64 },
    TwoTwo { alpha: f64, beta: f64 },
}

impl JunctionRule {
    pub fn kind(&self) -> JunctionKind {
        match self {
            JunctionRule::OneOne => JunctionKind::OneOne,
            JunctionRule::OneTwo { .. } => JunctionKind::OneTwo,
            JunctionRule::TwoOne { .. } => JunctionKind::TwoOne,
            JunctionRule::TwoTwo { .. } => JunctionKind::TwoTwo,
        }
    }

    /// Resolves the junction for the given demands (incoming roads, in
    /// declaration order) and supplies (outgoing roads).
    pub fn solve(&self, demands: &[f64], supplies: &[f64]) -> Result<JunctionFluxes> {
        let (n, m) = self.kind().counts();
        if demands.len() != n || supplies.len() != m {
            return Err(Error::Domain(format!(
                "{} junction needs {n} demands and {m} supplies, got {} and {}",
                self.kind(),
                demands.len(),
                supplies.len()
            )));
        }
        match *self {
            JunctionRule::OneOne => solve_one_one(demands[0], supplies[0]),
            JunctionRule::OneTwo { alpha } => {
                solve_one_two(demands[0], supplies[0], supplies[1], alpha)
            }
            JunctionRule::TwoOne { q } => solve_two_one(demands[0], demands[1], supplies[0], q),
            JunctionRule::TwoTwo { alpha, beta } => solve_two_two(
                demands[0],
                demands[1],
                supplies[0],
                supplies[1],
                alpha,
                beta,
            ),
        }
    }
}

fn open_unit(key: String, name: &str, v: Option<f64>) -> Result<f64> {
    match v {
        Some(v) if v > 0.0 && v < 1.0 => Ok(v),
        Some(v) => Err(Error::config(key, format!("{name} must lie in (0, 1), got {v}"))),
        None => Err(Error::config(key, format!("missing `{name}`"))),
    }
}

impl JunctionSpec {
    pub fn kind(&self) -> Option<JunctionKind> {
        JunctionKind::from_counts(self.incoming.len(), self.outgoing.len())
    }

    /// Checks counts and parameters. `key` names this junction in messages.
    pub fn rule(&self, key: &str) -> Result<JunctionRule> {
        let kind = self.kind().ok_or_else(|| {
            Error::config(
                key,
                format!(
                    "unsupported junction with {} incoming and {} outgoing roads (1 or 2 each)",
                    self.incoming.len(),
                    self.outgoing.len()
                ),
            )
        })?;
        let unexpected = |name: &str, v: Option<f64>| -> Result<()> {
            match v {
                Some(_) => Err(Error::config(
                    format!("{key}.{name}"),
                    format!("not used by a {kind} junction"),
                )),
                None => Ok(()),
            }
        };
        match kind {
            JunctionKind::OneOne => {
                unexpected("alpha", self.alpha)?;
                unexpected("beta", self.beta)?;
                unexpected("q", self.q)?;
                Ok(JunctionRule::OneOne)
            }
            JunctionKind::OneTwo => {
                unexpected("beta", self.beta)?;
                unexpected("q", self.q)?;
                let alpha = open_unit(format!("{key}.alpha"), "alpha", self.alpha)?;
                Ok(JunctionRule::OneTwo { alpha })
            }
            JunctionKind::TwoOne => {
                unexpected("alpha", self.alpha)?;
                unexpected("beta", self.beta)?;
                let q = open_unit(format!("{key}.q"), "q", self.q)?;
                Ok(JunctionRule::TwoOne { q })
            }
            JunctionKind::TwoTwo => {
                unexpected("q", self.q)?;
                let alpha = open_unit(format!("{key}.alpha"), "alpha", self.alpha)?;
                let beta = open_unit(format!("{key}.beta"), "beta", self.beta)?;
                if alpha == beta {
                    return Err(Error::config(
                        format!("{key}.beta"),
                        "alpha and beta must differ, otherwise the junction flux is not unique",
                    ));
                }
                Ok(JunctionRule::TwoTwo { alpha, beta })
            }
        }
    }
}

/// Fluxes assigned to the road ends incident to one junction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JunctionFluxes {
    gamma_in: [f64; 2],
    gamma_out: [f64; 2],
    n_in: usize,
    n_out: usize,
}

impl JunctionFluxes {
    /// Fluxes from explicit values; at most two per side.
    pub fn new(gamma_in: &[f64], gamma_out: &[f64]) -> Self {
        assert!(gamma_in.len() <= 2 && gamma_out.len() <= 2, "at most two roads per side");
        let mut out = JunctionFluxes {
            gamma_in: [0.0; 2],
            gamma_out: [0.0; 2],
            n_in: gamma_in.len(),
            n_out: gamma_out.len(),
        };
        out.gamma_in[..gamma_in.len()].copy_from_slice(gamma_in);
        out.gamma_out[..gamma_out.len()].copy_from_slice(gamma_out);
        out
    }

    /// Fluxes leaving the incoming roads, in declaration order.
    pub fn incoming(&self) -> &[f64] {
        &self.gamma_in[..self.n_in]
    }

    /// Fluxes entering the outgoing roads, in declaration order.
    pub fn outgoing(&self) -> &[f64] {
        &self.gamma_out[..self.n_out]
    }

    pub fn total_in(&self) -> f64 {
        self.incoming().iter().sum()
    }

    pub fn total_out(&self) -> f64 {
        self.outgoing().iter().sum()
    }
}

fn check_nonnegative(values: &[(&str, f64)]) -> Result<()> {
    for &(name, v) in values {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::Domain(format!(
                "{name} must be a nonnegative flux, got {v}"
            )));
        }
    }
    Ok(())
}

fn check_fraction(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::config(name, format!("must lie in (0, 1), got {v}")))
    }
}

/// One incoming road `a`, one outgoing road `b`.
pub fn solve_one_one(d_a: f64, s_b: f64) -> Result<JunctionFluxes> {
    check_nonnegative(&[("d_a", d_a), ("s_b", s_b)])?;
    let g = d_a.min(s_b);
    Ok(JunctionFluxes::new(&[g], &[g]))
}

/// One incoming road `a` split into `b` (share `alpha`) and `c`.
pub fn solve_one_two(d_a: f64, s_b: f64, s_c: f64, alpha: f64) -> Result<JunctionFluxes> {
    check_nonnegative(&[("d_a", d_a), ("s_b", s_b), ("s_c", s_c)])?;
    check_fraction("alpha", alpha)?;
    let g_a = d_a.min(s_b / alpha).min(s_c / (1.0 - alpha));
    Ok(JunctionFluxes::new(
        &[g_a],
        &[alpha * g_a, (1.0 - alpha) * g_a],
    ))
}

/// Two incoming roads `a`, `b` merging into `c`; `q` is the share of the
/// outgoing capacity granted to `a` when not everybody can pass.
pub fn solve_two_one(d_a: f64, d_b: f64, s_c: f64, q: f64) -> Result<JunctionFluxes> {
    check_nonnegative(&[("d_a", d_a), ("d_b", d_b), ("s_c", s_c)])?;
    check_fraction("q", q)?;
    let (g_a, g_b) = if d_a + d_b <= s_c {
        (d_a, d_b)
    } else {
        let (p_a, p_b) = (q * s_c, (1.0 - q) * s_c);
        if d_a >= p_a && d_b >= p_b {
            (p_a, p_b)
        } else if d_a < p_a {
            // priority share of `a` unused; `b` takes the rest
            (d_a, s_c - d_a)
        } else {
            debug_assert!(d_b < p_b, "both demands below their shares contradicts d_a + d_b > s_c");
            (s_c - d_b, d_b)
        }
    };
    Ok(JunctionFluxes::new(&[g_a, g_b], &[g_a + g_b]))
}

/// Region of the incoming-flux plane that selected a 2×2 solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwoTwoCase {
    /// Intersection point `P` within both demands.
    A,
    /// `P` beyond both demands.
    B,
    /// `P` beyond the demand of `a` only.
    C,
    /// `P` beyond the demand of `b` only.
    D,
}

/// Intersection `P` of the two outgoing capacity lines.
pub fn two_two_intersection(s_c: f64, s_d: f64, alpha: f64, beta: f64) -> (f64, f64) {
    let det = alpha - beta;
    (
        ((1.0 - beta) * s_c - beta * s_d) / det,
        (alpha * s_d - (1.0 - alpha) * s_c) / det,
    )
}

/// Case selection and case formula for the 2×2 junction, without the
/// feasibility repair done by [`solve_two_two`].
pub fn two_two_case(
    d_a: f64,
    d_b: f64,
    s_c: f64,
    s_d: f64,
    alpha: f64,
    beta: f64,
) -> (TwoTwoCase, f64, f64) {
    let (p1, p2) = two_two_intersection(s_c, s_d, alpha, beta);
    let via_c_for_b = |g_a: f64| ((s_c - alpha * g_a) / beta).min(d_b);
    let via_d_for_b = |g_a: f64| ((s_d - (1.0 - alpha) * g_a) / (1.0 - beta)).min(d_b);
    let via_c_for_a = |g_b: f64| ((s_c - beta * g_b) / alpha).min(d_a);
    let via_d_for_a = |g_b: f64| ((s_d - (1.0 - beta) * g_b) / (1.0 - alpha)).min(d_a);
    match (p1 <= d_a, p2 <= d_b) {
        (true, true) => (TwoTwoCase::A, p1, p2),
        (false, false) => (TwoTwoCase::B, d_a, d_b),
        (false, true) => {
            let g_b = if alpha < beta {
                via_c_for_b(d_a)
            } else {
                via_d_for_b(d_a)
            };
            (TwoTwoCase::C, d_a, g_b)
        }
        (true, false) => {
            let g_a = if alpha > beta {
                via_c_for_a(d_b)
            } else {
                via_d_for_a(d_b)
            };
            (TwoTwoCase::D, g_a, d_b)
        }
    }
}

fn two_two_feasible(
    (g_a, g_b): (f64, f64),
    d_a: f64,
    d_b: f64,
    s_c: f64,
    s_d: f64,
    alpha: f64,
    beta: f64,
) -> bool {
    let tol = FEASIBILITY_TOL;
    g_a >= -tol
        && g_b >= -tol
        && g_a <= d_a + tol
        && g_b <= d_b + tol
        && alpha * g_a + beta * g_b <= s_c + tol
        && (1.0 - alpha) * g_a + (1.0 - beta) * g_b <= s_d + tol
}

/// Throughput-maximizing incoming fluxes for the 2×2 junction computed on
/// the concave profile `γ_a ↦ γ_a + max feasible γ_b`.
///
/// The profile is piecewise linear with slopes `1` (demand of `b` active),
/// `1 − α/β` (capacity of `c` active) and `1 − (1−α)/(1−β)` (capacity of
/// `d` active); its maximum sits where the slope turns negative. This agrees
/// with the four-case formula whenever the latter is feasible and also
/// covers intersection points outside the nonnegative quadrant.
fn two_two_envelope(
    d_a: f64,
    d_b: f64,
    s_c: f64,
    s_d: f64,
    alpha: f64,
    beta: f64,
) -> (f64, f64) {
    let (p1, _) = two_two_intersection(s_c, s_d, alpha, beta);
    let g_a_max = d_a.min(s_c / alpha).min(s_d / (1.0 - alpha));
    let knee = if alpha > beta {
        p1.max((s_c - beta * d_b) / alpha)
    } else {
        p1.max((s_d - (1.0 - beta) * d_b) / (1.0 - alpha))
    };
    let g_a = knee.clamp(0.0, g_a_max);
    let g_b = d_b
        .min((s_c - alpha * g_a) / beta)
        .min((s_d - (1.0 - alpha) * g_a) / (1.0 - beta))
        .max(0.0);
    (g_a, g_b)
}

/// Two incoming roads `a`, `b`, two outgoing roads `c`, `d` with
/// distribution matrix `[[α, β], [1−α, 1−β]]`.
pub fn solve_two_two(
    d_a: f64,
    d_b: f64,
    s_c: f64,
    s_d: f64,
    alpha: f64,
    beta: f64,
) -> Result<JunctionFluxes> {
    check_nonnegative(&[("d_a", d_a), ("d_b", d_b), ("s_c", s_c), ("s_d", s_d)])?;
    check_fraction("alpha", alpha)?;
    check_fraction("beta", beta)?;
    if alpha == beta {
        return Err(Error::config(
            "beta",
            "alpha and beta must differ, otherwise the junction flux is not unique",
        ));
    }
    let (_, g_a, g_b) = two_two_case(d_a, d_b, s_c, s_d, alpha, beta);
    let (g_a, g_b) = if two_two_feasible((g_a, g_b), d_a, d_b, s_c, s_d, alpha, beta) {
        (g_a.max(0.0), g_b.max(0.0))
    } else {
        // the case formulas assume P in the nonnegative quadrant
        two_two_envelope(d_a, d_b, s_c, s_d, alpha, beta)
    };
    Ok(JunctionFluxes::new(
        &[g_a, g_b],
        &[
            alpha * g_a + beta * g_b,
            (1.0 - alpha) * g_a + (1.0 - beta) * g_b,
        ],
    ))
}

/// Which end of a road meets the junction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoadSide {
    /// The road ends at the junction.
    Incoming,
    /// The road starts at the junction.
    Outgoing,
}

/// Recovers the trace density `ρ̂` at the junction from the assigned flux.
///
/// On an incoming road the wave `(ρ₀, ρ̂)` must leave the junction, so `ρ̂`
/// is `ρ₀` itself when the full free-flow flux passes and otherwise the
/// congested root of `f(ρ) = γ̂`. Outgoing roads mirror this with the
/// free-flow root.
pub fn reconstruct_trace_density<M: FundamentalDiagram + ?Sized>(
    model: &M,
    rho0: f64,
    gamma_hat: f64,
    side: RoadSide,
) -> Result<f64> {
    let sigma = model.sigma();
    let cap = match side {
        RoadSide::Incoming => crate::flux::demand(model, rho0)?,
        RoadSide::Outgoing => crate::flux::supply(model, rho0)?,
    };
    let tol = 1e-13 * model.max_flux().max(1.0);
    if !(gamma_hat >= 0.0 && gamma_hat <= cap + tol) {
        return Err(Error::Domain(format!(
            "flux {gamma_hat} outside [0, {cap}] for a {side:?} road in state {rho0}"
        )));
    }
    let gamma_hat = gamma_hat.min(model.max_flux());
    let unchanged = (gamma_hat - model.flux(rho0)).abs() <= tol;
    Ok(match side {
        RoadSide::Incoming if rho0 <= sigma && unchanged => rho0,
        RoadSide::Incoming => model.congested_inverse(gamma_hat),
        RoadSide::Outgoing if rho0 >= sigma && unchanged => rho0,
        RoadSide::Outgoing => model.free_inverse(gamma_hat),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::{tau, Quadratic};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn assert_fluxes(f: JunctionFluxes, gin: &[f64], gout: &[f64]) {
        for (a, b) in f.incoming().iter().zip(gin) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-12);
        }
        for (a, b) in f.outgoing().iter().zip(gout) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-12);
        }
    }

    #[test]
    fn one_one_examples() {
        assert_fluxes(solve_one_one(0.25, 1.0 / 6.0).unwrap(), &[1.0 / 6.0], &[1.0 / 6.0]);
        assert_fluxes(solve_one_one(0.0, 0.25).unwrap(), &[0.0], &[0.0]);
        assert_fluxes(solve_one_one(0.1875, 0.25).unwrap(), &[0.1875], &[0.1875]);
        assert!(solve_one_one(-0.1, 0.25).is_err());
    }

    #[test]
    fn one_two_examples() {
        assert_fluxes(
            solve_one_two(0.25, 0.25, 0.25, 0.4).unwrap(),
            &[0.25],
            &[0.10, 0.15],
        );
        assert_fluxes(
            solve_one_two(0.25, 0.02, 0.25, 0.4).unwrap(),
            &[0.05],
            &[0.02, 0.03],
        );
        assert_fluxes(
            solve_one_two(0.2, 0.1, 0.08, 0.5).unwrap(),
            &[0.16],
            &[0.08, 0.08],
        );
        assert!(matches!(
            solve_one_two(0.2, 0.1, 0.08, 1.0),
            Err(Error::Config { .. })
        ));
    }

    #[test]
    fn two_one_examples() {
        assert_fluxes(
            solve_two_one(0.2, 0.1, 0.25, 0.5).unwrap(),
            &[0.15, 0.1],
            &[0.25],
        );
        assert_fluxes(
            solve_two_one(0.1, 0.05, 0.25, 0.5).unwrap(),
            &[0.1, 0.05],
            &[0.15],
        );
        assert_fluxes(
            solve_two_one(0.25, 0.25, 0.25, 0.25).unwrap(),
            &[0.0625, 0.1875],
            &[0.25],
        );
        assert!(solve_two_one(0.1, 0.1, 0.1, 0.0).is_err());
    }

    #[test]
    fn two_one_tie_takes_demands() {
        let f = solve_two_one(0.1, 0.15, 0.25, 0.9).unwrap();
        assert_fluxes(f, &[0.1, 0.15], &[0.25]);
    }

    #[test]
    fn two_two_examples() {
        let (p1, p2) = two_two_intersection(0.25, 0.25, 0.4, 0.3);
        assert_abs_diff_eq!(p1, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p2, -0.5, epsilon = 1e-14);
        assert_eq!(two_two_case(0.25, 0.25, 0.25, 0.25, 0.4, 0.3).0, TwoTwoCase::C);
        let f = solve_two_two(0.25, 0.25, 0.25, 0.25, 0.4, 0.3).unwrap();
        assert_fluxes(f, &[0.25, 1.0 / 7.0], &[0.1 + 0.3 / 7.0, 0.15 + 0.7 / 7.0]);

        let f = solve_two_two(0.05, 0.05, 0.25, 0.25, 0.4, 0.3).unwrap();
        assert_fluxes(f, &[0.05, 0.05], &[0.035, 0.065]);

        let f = solve_two_two(0.0, 0.0, 0.2, 0.1, 0.4, 0.3).unwrap();
        assert_fluxes(f, &[0.0, 0.0], &[0.0, 0.0]);

        assert!(matches!(
            solve_two_two(0.1, 0.1, 0.1, 0.1, 0.4, 0.4),
            Err(Error::Config { .. })
        ));
    }

    #[test]
    fn two_two_repairs_intersection_outside_quadrant() {
        // P = (0.14, -0.02) lies below the axis; the case-a formula would
        // return a negative flux for road b.
        let (p1, p2) = two_two_intersection(0.05, 0.07, 0.4, 0.3);
        assert_abs_diff_eq!(p1, 0.14, epsilon = 1e-12);
        assert_abs_diff_eq!(p2, -0.02, epsilon = 1e-12);
        let f = solve_two_two(0.2, 0.2, 0.05, 0.07, 0.4, 0.3).unwrap();
        assert_fluxes(f, &[0.07 / 0.6, 0.0], &[0.4 * 0.07 / 0.6, 0.07]);

        // Case c with the capacity of d exhausted before reaching d_a
        let f = solve_two_two(0.25, 0.2, 0.25, 0.001, 0.9, 0.1).unwrap();
        assert_fluxes(f, &[0.01, 0.0], &[0.009, 0.001]);
    }

    #[test]
    fn two_two_cases_agree_with_envelope_when_feasible() {
        let mut checked = 0;
        for i in 1..12 {
            for j in 1..12 {
                for (alpha, beta) in [(0.4, 0.3), (0.2, 0.7), (0.9, 0.1), (0.35, 0.6)] {
                    let (d_a, d_b) = (0.02 * i as f64, 0.021 * j as f64);
                    for (s_c, s_d) in [(0.25, 0.25), (0.1, 0.2), (0.2, 0.05), (0.06, 0.07)] {
                        let (_, a, b) = two_two_case(d_a, d_b, s_c, s_d, alpha, beta);
                        if two_two_feasible((a, b), d_a, d_b, s_c, s_d, alpha, beta) {
                            let (ea, eb) = two_two_envelope(d_a, d_b, s_c, s_d, alpha, beta);
                            assert_abs_diff_eq!(a, ea, epsilon = 1e-12);
                            assert_abs_diff_eq!(b, eb, epsilon = 1e-12);
                            checked += 1;
                        }
                    }
                }
            }
        }
        assert!(checked > 1000);
    }

    #[test]
    fn rule_validation() {
        let spec = |inc: &[&str], out: &[&str], alpha, beta, q| JunctionSpec {
            incoming: inc.iter().map(|s| s.to_string()).collect(),
            outgoing: out.iter().map(|s| s.to_string()).collect(),
            alpha,
            beta,
            q,
        };
        assert_eq!(
            spec(&["1"], &["2"], None, None, None).rule("j").unwrap(),
            JunctionRule::OneOne
        );
        assert!(spec(&["1", "2"], &["3"], None, None, Some(1.5)).rule("j").is_err());
        let err = spec(&["1", "2"], &["3", "4"], Some(0.4), Some(0.4), None)
            .rule("junctions[0]")
            .unwrap_err();
        assert!(err.to_string().contains("junctions[0].beta"), "{err}");
        assert!(spec(&["1"], &["2", "3"], None, None, None).rule("j").is_err());
        assert!(spec(&["1", "2", "3"], &["4"], None, None, None).rule("j").is_err());
        assert!(spec(&["1"], &["2"], Some(0.5), None, None).rule("j").is_err());
    }

    #[test]
    fn reconstruct_examples() {
        let m = Quadratic::unit();
        let r = reconstruct_trace_density(&m, 0.25, 0.1875, RoadSide::Incoming).unwrap();
        assert_abs_diff_eq!(r, 0.25, epsilon = 1e-14);
        // larger root of ρ(1−ρ) = 0.1, by the quadratic formula
        let big = 0.5 + 0.5 * (1.0f64 - 0.4).sqrt();
        assert_abs_diff_eq!(big, 0.887_298_334_620_741_7, epsilon = 1e-15);
        let r = reconstruct_trace_density(&m, 0.25, 0.1, RoadSide::Incoming).unwrap();
        assert_abs_diff_eq!(r, big, epsilon = 1e-12);
        let r = reconstruct_trace_density(&m, 0.66, 0.1, RoadSide::Outgoing).unwrap();
        assert_abs_diff_eq!(r, 1.0 - big, epsilon = 1e-12);
        assert!(reconstruct_trace_density(&m, 0.25, 0.2, RoadSide::Incoming).is_err());
        assert!(reconstruct_trace_density(&m, 0.66, 0.23, RoadSide::Outgoing).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        fn reconstruct_round_trip(rho0 in 0.0f64..=1.0, frac in 0.0f64..=1.0, incoming: bool) {
            let m = Quadratic::unit();
            let side = if incoming { RoadSide::Incoming } else { RoadSide::Outgoing };
            let cap = if incoming { m.demand_of(rho0) } else { m.supply_of(rho0) };
            let g = frac * cap;
            let r = reconstruct_trace_density(&m, rho0, g, side).unwrap();
            prop_assert!((m.flux(r) - g).abs() <= 1e-12);
            let sigma = m.sigma();
            let t = tau(&m, rho0).unwrap();
            let admissible = match side {
                RoadSide::Incoming if rho0 <= sigma => r == rho0 || r > t - 1e-12,
                RoadSide::Incoming => r >= sigma - 1e-12,
                RoadSide::Outgoing if rho0 >= sigma => r == rho0 || r < t + 1e-12,
                RoadSide::Outgoing => r <= sigma + 1e-12,
            };
            prop_assert!(admissible, "rho0={rho0} g={g} r={r}");
        }

        #[test]
        fn solvers_conserve_and_stay_feasible(
            d in prop::array::uniform2(0.0f64..0.25),
            s in prop::array::uniform2(0.0f64..0.25),
            alpha in 0.01f64..0.99,
            beta in 0.01f64..0.99,
            q in 0.01f64..0.99,
        ) {
            prop_assume!((alpha - beta).abs() > 1e-6);
            let cases = [
                (solve_one_one(d[0], s[0]).unwrap(), &d[..1], &s[..1]),
                (solve_one_two(d[0], s[0], s[1], alpha).unwrap(), &d[..1], &s[..]),
                (solve_two_one(d[0], d[1], s[0], q).unwrap(), &d[..], &s[..1]),
                (solve_two_two(d[0], d[1], s[0], s[1], alpha, beta).unwrap(), &d[..], &s[..]),
            ];
            for (f, dem, sup) in cases {
                prop_assert!((f.total_in() - f.total_out()).abs() <= 1e-13);
                for (g, cap) in f.incoming().iter().zip(dem) {
                    prop_assert!(*g >= 0.0 && *g <= cap + 1e-13);
                }
                for (g, cap) in f.outgoing().iter().zip(sup) {
                    prop_assert!(*g >= 0.0 && *g <= cap + 1e-13);
                }
            }
        }
    }
}
