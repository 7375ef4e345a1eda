//! TVB minmod slope limiter and the bound-preserving scaling limiter.

use serde::{Deserialize, Serialize};

use crate::dg::{psi, RoadState, PSI_LEFT, PSI_RIGHT};
use crate::error::Error;
use crate::quadrature::GaussLobatto;

/// Relative change below which the TVB limiter leaves a cell alone.
const TVB_CHANGE_TOL: f64 = 1e-14;

/// How far a cell average may sit outside the bounds before the
/// bound-preserving limiter reports an integrity error.
pub const AVERAGE_BOUND_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TvbConfig {
    /// TVB constant; `0` gives the plain minmod limiter.
    #[serde(rename = "M")]
    pub m: f64,
    pub enabled: bool,
}

impl Default for TvbConfig {
    fn default() -> Self {
        TvbConfig {
            m: 0.0,
            enabled: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BpConfig {
    pub rho_min: f64,
    pub rho_max: f64,
    pub enabled: bool,
}

impl BpConfig {
    pub fn new(rho_min: f64, rho_max: f64) -> Self {
        assert!(rho_min < rho_max, "empty bound interval [{rho_min}, {rho_max}]");
        BpConfig {
            rho_min,
            rho_max,
            enabled: true,
        }
    }
}

/// Modified minmod: `a1` itself when `|a1| ≤ threshold`, otherwise the
/// smallest magnitude with the common sign, or zero on a sign mismatch.
pub fn minmod_bar(a1: f64, a2: f64, a3: f64, threshold: f64) -> f64 {
    if a1.abs() <= threshold {
        return a1;
    }
    if a1 > 0.0 && a2 > 0.0 && a3 > 0.0 {
        a1.min(a2).min(a3)
    } else if a1 < 0.0 && a2 < 0.0 && a3 < 0.0 {
        a1.max(a2).max(a3)
    } else {
        0.0
    }
}

/// Applies the TVB limiter to every cell and returns the number of cells
/// whose polynomial was replaced.
///
/// On a `periodic` road the first and last cells are neighbors; otherwise
/// the end cells use their single available average difference twice.
pub fn apply_tvb(state: &mut RoadState, cfg: &TvbConfig, periodic: bool) -> usize {
    let k = state.degree();
    let n = state.n_cells();
    if !cfg.enabled || k == 0 || n < 2 {
        return 0;
    }
    let avg: Vec<f64> = state.averages().collect();
    let mut modified = 0;
    for j in 0..n {
        let fwd = if j + 1 < n {
            Some(avg[j + 1] - avg[j])
        } else if periodic {
            Some(avg[0] - avg[j])
        } else {
            None
        };
        let bwd = if j > 0 {
            Some(avg[j] - avg[j - 1])
        } else if periodic {
            Some(avg[j] - avg[n - 1])
        } else {
            None
        };
        let (fwd, bwd) = match (fwd, bwd) {
            (Some(f), Some(b)) => (f, b),
            (Some(f), None) => (f, f),
            (None, Some(b)) => (b, b),
            (None, None) => unreachable!("road with at least two cells"),
        };
        let threshold = cfg.m * state.mesh().width(j).powi(2);
        let cell = state.cell_mut(j);
        let right: f64 = cell.iter().zip(PSI_RIGHT).map(|(c, p)| c * p).sum();
        let left: f64 = cell.iter().zip(PSI_LEFT).map(|(c, p)| c * p).sum();
        let a = right - cell[0];
        let b = cell[0] - left;
        let a_mod = minmod_bar(a, fwd, bwd, threshold);
        let b_mod = minmod_bar(b, fwd, bwd, threshold);
        let scale = TVB_CHANGE_TOL * (1.0 + cell[0].abs());
        if (a_mod - a).abs() <= scale && (b_mod - b).abs() <= scale {
            continue;
        }
        modified += 1;
        cell[1] = 0.5 * (a_mod + b_mod);
        if k >= 2 {
            cell[2] = 0.75 * (a_mod - b_mod);
        }
        if k == 3 {
            cell[3] = 0.0;
        }
    }
    modified
}

/// A cell average outside the admissible interval, found by
/// [`apply_bp`]. Points at a time step that is too large upstream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BpViolation {
    pub cell: usize,
    pub average: f64,
    pub rho_min: f64,
    pub rho_max: f64,
}

impl BpViolation {
    pub fn into_error(self, road: &str, time: f64) -> Error {
        Error::Integrity {
            road: road.to_string(),
            cell: self.cell,
            time,
            message: format!(
                "cell average {} outside [{}, {}]; check the CFL number",
                self.average, self.rho_min, self.rho_max
            ),
        }
    }
}

/// Smallest and largest value of the cell-`j` polynomial on the
/// Gauss-Lobatto nodes matching its degree.
pub fn lobatto_extrema(state: &RoadState, j: usize) -> (f64, f64) {
    let rule = GaussLobatto::for_degree(state.degree());
    let cell = state.cell(j);
    rule.nodes().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &xi| {
        let v: f64 = cell.iter().enumerate().map(|(l, c)| c * psi(l, xi)).sum();
        (lo.min(v), hi.max(v))
    })
}

/// Scales the non-constant modes of every cell so the values on the
/// Gauss-Lobatto nodes lie within the bounds. Returns the number of cells
/// scaled.
pub fn apply_bp(state: &mut RoadState, cfg: &BpConfig) -> Result<usize, BpViolation> {
    if !cfg.enabled {
        return Ok(0);
    }
    let mut scaled = 0;
    for j in 0..state.n_cells() {
        let avg = state.average(j);
        if !(avg >= cfg.rho_min - AVERAGE_BOUND_TOL && avg <= cfg.rho_max + AVERAGE_BOUND_TOL) {
            return Err(BpViolation {
                cell: j,
                average: avg,
                rho_min: cfg.rho_min,
                rho_max: cfg.rho_max,
            });
        }
        if state.degree() == 0 {
            continue;
        }
        let (lo, hi) = lobatto_extrema(state, j);
        let mut theta: f64 = 1.0;
        if hi > cfg.rho_max {
            theta = theta.min(((cfg.rho_max - avg) / (hi - avg)).abs());
        }
        if lo < cfg.rho_min {
            theta = theta.min(((avg - cfg.rho_min) / (avg - lo)).abs());
        }
        if theta < 1.0 {
            scaled += 1;
            for c in &mut state.cell_mut(j)[1..] {
                *c *= theta;
            }
        }
    }
    Ok(scaled)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dg::{project_initial, Mesh1D};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn minmod_examples() {
        assert_eq!(minmod_bar(0.1, 0.2, 0.3, 0.0), 0.1);
        assert_eq!(minmod_bar(0.3, 0.2, -0.1, 0.0), 0.0);
        assert_eq!(minmod_bar(0.05, -0.2, -0.3, 0.1), 0.05);
        assert_eq!(minmod_bar(-0.3, -0.2, -0.25, 0.0), -0.2);
    }

    fn state(k: usize, coeffs: Vec<f64>) -> RoadState {
        let n = coeffs.len() / (k + 1);
        RoadState::from_coeffs(Mesh1D::uniform(0.0, 1.0, n).unwrap(), k, coeffs).unwrap()
    }

    #[test]
    fn tvb_spike_is_flattened() {
        let mut s = state(1, vec![0.1, 0.0, 0.9, 0.3, 0.1, 0.0]);
        let n = apply_tvb(&mut s, &TvbConfig::default(), false);
        assert_eq!(n, 1);
        assert_eq!(s.cell(1), &[0.9, 0.0]);
    }

    #[test]
    fn tvb_large_m_is_identity_on_smooth_data() {
        let mesh = Mesh1D::uniform(0.0, 1.0, 40).unwrap();
        let s0 = project_initial(mesh, 2, |x| 0.5 + 0.5 * (2.0 * std::f64::consts::PI * x).sin())
            .unwrap();
        let mut s = s0.clone();
        let cfg = TvbConfig {
            m: 1e4,
            enabled: true,
        };
        assert_eq!(apply_tvb(&mut s, &cfg, true), 0);
        assert_eq!(s, s0);
    }

    #[test]
    fn tvb_step_traces_between_neighbor_averages() {
        let mesh = Mesh1D::uniform(0.0, 1.0, 40).unwrap();
        let step = |x: f64| if x <= 0.3 || x >= 0.6 { 1.0 } else { 0.0 };
        for k in 1..=3 {
            let mut s = project_initial(mesh.clone(), k, step).unwrap();
            let before: Vec<f64> = s.averages().collect();
            apply_tvb(&mut s, &TvbConfig::default(), true);
            let avg: Vec<f64> = s.averages().collect();
            assert_eq!(avg, before);
            let n = avg.len();
            for j in 0..n {
                let (p, q) = (avg[(j + n - 1) % n], avg[(j + 1) % n]);
                let (lo, hi) = (p.min(q).min(avg[j]), p.max(q).max(avg[j]));
                for t in [s.trace_left(j).unwrap(), s.trace_right(j).unwrap()] {
                    assert!(t >= lo - 1e-14 && t <= hi + 1e-14, "k={k} cell {j}: {t}");
                }
            }
        }
    }

    #[test]
    fn tvb_rebuild_matches_modified_traces() {
        // averages 0.2, 0.5, 0.6 with a P2 polynomial overshooting on the
        // right: limited traces become avg ± min differences
        let mut s = state(2, vec![0.2, 0.0, 0.0, 0.5, 0.2, 0.15, 0.6, 0.0, 0.0]);
        apply_tvb(&mut s, &TvbConfig::default(), false);
        let right = s.trace_right(1).unwrap();
        let left = s.trace_left(1).unwrap();
        // a = 0.3 limited to 0.1, b = 0.1 kept
        assert_abs_diff_eq!(right, 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(left, 0.4, epsilon = 1e-15);
        assert_eq!(s.average(1), 0.5);
    }

    #[test]
    fn tvb_k3_drops_cubic_mode() {
        let mut s = state(3, vec![0.2, 0.0, 0.0, 0.0, 0.5, 0.3, 0.0, 0.1, 0.6, 0.0, 0.0, 0.0]);
        assert_eq!(apply_tvb(&mut s, &TvbConfig::default(), false), 1);
        assert_eq!(s.cell(1)[3], 0.0);
    }

    #[test]
    fn bp_theta_example() {
        // average 0.5, Lobatto values 1.2 and -0.1 require
        // θ = min(0.5/0.7, 0.5/0.6)
        // P2 with c1 = 0.65, c2 such that ends are 1.2 and -0.1 plus center
        // value: ψ2(±1) = 2/3, ψ2(0) = -1/3
        let c2 = 0.075;
        let c1 = 0.65;
        let mut s = state(2, vec![0.5, c1, c2]);
        let (lo, hi) = lobatto_extrema(&s, 0);
        assert_abs_diff_eq!(hi, 1.2, epsilon = 1e-15);
        assert_abs_diff_eq!(lo, -0.1, epsilon = 1e-15);
        apply_bp(&mut s, &BpConfig::new(0.0, 1.0)).unwrap();
        let theta = (0.5f64 / 0.7).min(0.5 / 0.6);
        assert_abs_diff_eq!(theta, 0.714_285_714_285_714_3, epsilon = 1e-15);
        assert_abs_diff_eq!(s.cell(0)[1], c1 * theta, epsilon = 1e-15);
        assert_abs_diff_eq!(s.cell(0)[2], c2 * theta, epsilon = 1e-15);
    }

    #[test]
    fn bp_identity_within_bounds_and_rejects_bad_average() {
        let mut s = state(1, vec![0.5, 0.4, 0.3, -0.2]);
        let s0 = s.clone();
        assert_eq!(apply_bp(&mut s, &BpConfig::new(0.0, 1.0)).unwrap(), 0);
        assert_eq!(s, s0);
        let mut bad = state(1, vec![0.5, 0.0, 1.1, 0.0]);
        let err = apply_bp(&mut bad, &BpConfig::new(0.0, 1.0)).unwrap_err();
        assert_eq!(err.cell, 1);
        assert!(err.into_error("2", 0.5).to_string().contains("road `2`"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn limiters_keep_averages_and_bp_is_idempotent(
            k in 1usize..=3,
            raw in prop::collection::vec(-1.0f64..1.0, 32),
        ) {
            let n = 8;
            let mut coeffs = vec![0.0; n * (k + 1)];
            for j in 0..n {
                coeffs[j * (k + 1)] = 0.5 + 0.5 * raw[j];
                for l in 1..=k {
                    coeffs[j * (k + 1) + l] = 0.6 * raw[(8 + 3 * j + l) % 32] / l as f64;
                }
            }
            let mut s = state(k, coeffs);
            let before: Vec<f64> = s.averages().collect();
            apply_tvb(&mut s, &TvbConfig::default(), false);
            let cfg = BpConfig::new(0.0, 1.0);
            apply_bp(&mut s, &cfg).unwrap();
            let after: Vec<f64> = s.averages().collect();
            prop_assert_eq!(before, after);
            for j in 0..n {
                let (lo, hi) = lobatto_extrema(&s, j);
                prop_assert!(lo >= -1e-12 && hi <= 1.0 + 1e-12);
            }
            let once = s.clone();
            apply_bp(&mut s, &cfg).unwrap();
            for (a, b) in s.coeffs().iter().zip(once.coeffs()) {
                prop_assert!((a - b).abs() <= 1e-14);
            }
        }

        #[test]
        fn limiters_are_identity_for_p0(raw in prop::collection::vec(0.0f64..1.0, 6)) {
            let mut s = state(0, raw);
            let s0 = s.clone();
            apply_tvb(&mut s, &TvbConfig::default(), false);
            apply_bp(&mut s, &BpConfig::new(0.0, 1.0)).unwrap();
            prop_assert_eq!(s, s0);
        }
    }
}
