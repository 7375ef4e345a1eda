//! Oracles and metrology: the exact solution of the smooth accuracy
//! problem, error norms and convergence tables, a brute-force junction
//! oracle, fine-mesh reference runs and randomized property checks.

mod junction_oracle;
mod reference;

pub use junction_oracle::{
    junction_fuzz, lp_junction_oracle, random_junction_instance, FuzzReport, JunctionInstance,
    KindFuzzStats, ORACLE_BASE_STEP,
};
pub use reference::{
    compare_to_reference, jam_threshold, random_network_config, random_network_bounds,
    reference_config, BoundsReport, RoadComparison, REFERENCE_CELLS_PER_UNIT,
};

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::dg::RoadState;
use crate::error::{Error, Result};
use crate::limiters::lobatto_extrema;
use crate::network::{run, NetworkConfig};
use crate::presets::ScenarioPreset;
use crate::quadrature::GaussLegendre;

/// Mesh sizes of the accuracy tables.
pub const ACCURACY_MESHES: [usize; 6] = [10, 20, 40, 80, 160, 320];

/// End time of the accuracy problem, before shock formation.
pub const ACCURACY_T_END: f64 = 0.1;

/// CFL number for degrees 2 and 3 when the bound-preserving limiter is on.
pub const BP_HIGH_ORDER_CFL: f64 = 0.05;

/// Exact solution of `ρ_t + (ρ(1 − ρ))_x = 0` with periodic data
/// `0.5 + 0.5 sin(2πx)`, valid before the first shock (`t < 1/(2π)`).
///
/// Solves `ρ = 0.5 + 0.5 sin(2π(x − (1 − 2ρ)t))` by Newton's method.
pub fn exact_smooth_solution(x: f64, t: f64) -> Result<f64> {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut rho = 0.5 + 0.5 * (two_pi * x).sin();
    for _ in 0..100 {
        let phase = two_pi * (x - (1.0 - 2.0 * rho) * t);
        let g = rho - 0.5 - 0.5 * phase.sin();
        let dg = 1.0 - two_pi * t * phase.cos();
        let step = g / dg;
        rho -= step;
        if step.abs() <= 1e-14 {
            return Ok(rho);
        }
    }
    Err(Error::NoConvergence(format!(
        "characteristic equation at x = {x}, t = {t}; is t past the shock time?"
    )))
}

/// `L¹` and `L∞` distance between `ρ_h` and `exact`.
///
/// `L¹` uses the `(k+2)`-point Gauss-Legendre rule per cell; `L∞` is the
/// maximum over the same nodes and both cell ends.
pub fn error_norms(state: &RoadState, mut exact: impl FnMut(f64) -> f64) -> (f64, f64) {
    let rule = GaussLegendre::new(state.degree() + 2);
    let mesh = state.mesh();
    let mut l1 = 0.0;
    let mut linf: f64 = 0.0;
    for j in 0..state.n_cells() {
        let mut cell = 0.0;
        for (&xi, &w) in rule.nodes.iter().zip(&rule.weights) {
            let e = (state.eval(j, xi) - exact(mesh.to_physical(j, xi))).abs();
            cell += w * e;
            linf = linf.max(e);
        }
        l1 += 0.5 * mesh.width(j) * cell;
        for xi in [-1.0, 1.0] {
            linf = linf.max((state.eval(j, xi) - exact(mesh.to_physical(j, xi))).abs());
        }
    }
    (l1, linf)
}

/// `log₂(e_coarse / e_fine)` for a halved mesh.
pub fn convergence_order(e_coarse: f64, e_fine: f64) -> f64 {
    (e_coarse / e_fine).log2()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorRow {
    pub n: usize,
    pub l1_error: f64,
    pub l1_order: Option<f64>,
    pub linf_error: f64,
    pub linf_order: Option<f64>,
    /// Extremes of `ρ_h` over the Gauss-Lobatto nodes at the final time.
    pub min_val: f64,
    pub max_val: f64,
}

/// One convergence table: a degree and a sequence of meshes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub degree: usize,
    pub bp: bool,
    pub rows: Vec<ErrorRow>,
}

impl ErrorReport {
    /// Builds rows from `(n, l1, linf, min, max)` in mesh order; orders are
    /// filled in for successive pairs.
    pub fn from_measurements(degree: usize, bp: bool, data: &[(usize, f64, f64, f64, f64)]) -> Self {
        let rows = data
            .iter()
            .enumerate()
            .map(|(i, &(n, l1, linf, min_val, max_val))| {
                let prev = i.checked_sub(1).map(|p| data[p]);
                ErrorRow {
                    n,
                    l1_error: l1,
                    l1_order: prev.map(|p| convergence_order(p.1, l1) / (n as f64 / p.0 as f64).log2()),
                    linf_error: linf,
                    linf_order: prev.map(|p| convergence_order(p.2, linf) / (n as f64 / p.0 as f64).log2()),
                    min_val,
                    max_val,
                }
            })
            .collect();
        ErrorReport { degree, bp, rows }
    }

    pub fn finest(&self) -> Option<&ErrorRow> {
        self.rows.last()
    }

    pub fn row(&self, n: usize) -> Option<&ErrorRow> {
        self.rows.iter().find(|r| r.n == n)
    }
}

fn fmt_order(o: Option<f64>) -> String {
    o.map_or_else(|| "--".to_string(), |o| format!("{o:.2}"))
}

/// Aligned text table with one block per report, columns as in the
/// accuracy tables: `N, L1 error, order, Linf error, order, min, max`.
pub fn format_table(reports: &[ErrorReport]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<4} {:>5} {:>11} {:>6} {:>11} {:>6} {:>10} {:>10}",
        "", "N", "L1 error", "order", "Linf error", "order", "min", "max"
    );
    for r in reports {
        for (i, row) in r.rows.iter().enumerate() {
            let label = if i == 0 {
                format!("P{}", r.degree)
            } else {
                String::new()
            };
            let _ = writeln!(
                s,
                "{:<4} {:>5} {:>11.2E} {:>6} {:>11.2E} {:>6} {:>10.6} {:>10.6}",
                label,
                row.n,
                row.l1_error,
                fmt_order(row.l1_order),
                row.linf_error,
                fmt_order(row.linf_order),
                row.min_val,
                row.max_val
            );
        }
    }
    s
}

/// CSV with header `degree,bp,n,l1_error,l1_order,linf_error,linf_order,min,max`.
pub fn format_csv(reports: &[ErrorReport]) -> String {
    let mut s = String::from("degree,bp,n,l1_error,l1_order,linf_error,linf_order,min,max\n");
    let opt = |o: Option<f64>| o.map_or_else(String::new, |o| format!("{o:.17e}"));
    for r in reports {
        for row in &r.rows {
            let _ = writeln!(
                s,
                "{},{},{},{:.17e},{},{:.17e},{},{:.17e},{:.17e}",
                r.degree,
                r.bp,
                row.n,
                row.l1_error,
                opt(row.l1_order),
                row.linf_error,
                opt(row.linf_order),
                row.min_val,
                row.max_val
            );
        }
    }
    s
}

/// Accuracy problem at `degree` on `n` cells with the limiter settings of
/// the accuracy tables: TVB off, BP as requested, CFL 0.05 for degrees 2
/// and 3 when BP is on.
pub fn accuracy_config(degree: usize, n: usize, bp: bool) -> NetworkConfig {
    let mut cfg = ScenarioPreset::Accuracy.config();
    cfg.set_degree(degree);
    cfg.roads[0].cells = n;
    cfg.solver.tvb = false;
    cfg.solver.bp = bp;
    cfg.solver.output_times.clear();
    cfg.solver.t_end = ACCURACY_T_END;
    if bp {
        cfg.solver.cfl[2] = BP_HIGH_ORDER_CFL;
        cfg.solver.cfl[3] = BP_HIGH_ORDER_CFL;
    }
    cfg
}

/// Runs the accuracy problem for every degree and mesh and measures the
/// error against [`exact_smooth_solution`]. Runs execute in parallel.
pub fn convergence_study(degrees: &[usize], meshes: &[usize], bp: bool) -> Result<Vec<ErrorReport>> {
    let jobs: Vec<(usize, usize)> = degrees
        .iter()
        .flat_map(|&k| meshes.iter().map(move |&n| (k, n)))
        .collect();
    let measured: Vec<(usize, usize, f64, f64, f64, f64)> = jobs
        .par_iter()
        .map(|&(k, n)| {
            let result = run(&accuracy_config(k, n, bp))?;
            let state = &result.final_state.roads[0];
            let t = result.final_state.time;
            let mut failure = None;
            let (l1, linf) = error_norms(state, |x| {
                exact_smooth_solution(x, t).unwrap_or_else(|e| {
                    failure = Some(e.to_string());
                    f64::NAN
                })
            });
            if let Some(e) = failure {
                return Err(Error::NoConvergence(e));
            }
            let (lo, hi) = (0..state.n_cells()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), j| {
                let (l, h) = lobatto_extrema(state, j);
                (a.min(l), b.max(h))
            });
            Ok((k, n, l1, linf, lo, hi))
        })
        .collect::<Result<_>>()?;
    Ok(degrees
        .iter()
        .map(|&k| {
            let data: Vec<_> = measured
                .iter()
                .filter(|m| m.0 == k)
                .map(|&(_, n, l1, linf, lo, hi)| (n, l1, linf, lo, hi))
                .collect();
            ErrorReport::from_measurements(k, bp, &data)
        })
        .collect())
}
