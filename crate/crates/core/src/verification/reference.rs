//! Fine-mesh reference runs, randomized bound checks on small networks and
//! the bottleneck jam threshold.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dg::RoadState;
use crate::flux::{FluxModel, FundamentalDiagram, NumericalFlux};
use crate::junction::JunctionSpec;
use crate::network::config::{
    BoundaryConfig, InitialCondition, NetworkConfig, RoadConfig, RoadEnd, SolverConfig,
};
use crate::network::{RunResult, Simulation};

/// Resolution of the first-order reference runs.
pub const REFERENCE_CELLS_PER_UNIT: usize = 1600;

/// Density `ρ̄ ≤ σ_wide` at which the wide road carries exactly the narrow
/// road's capacity. Inflows above it jam a bottleneck.
pub fn jam_threshold<A, B>(wide: &A, narrow: &B) -> f64
where
    A: FundamentalDiagram + ?Sized,
    B: FundamentalDiagram + ?Sized,
{
    let target = narrow.max_flux();
    let (mut lo, mut hi) = (0.0, wide.sigma());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if wide.flux(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// First-order Godunov finite volumes at [`REFERENCE_CELLS_PER_UNIT`]
/// cells per unit length, CFL 1, limiters off.
pub fn reference_config(cfg: &NetworkConfig) -> NetworkConfig {
    let mut r = cfg.clone();
    r.set_degree(0);
    r.set_cells_per_unit(REFERENCE_CELLS_PER_UNIT);
    r.solver.flux = NumericalFlux::Godunov;
    r.solver.cfl[0] = 1.0;
    r.solver.bp = false;
    r.solver.tvb = false;
    r
}

/// `L¹` distance of cell averages on one road at one output time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoadComparison {
    pub time: f64,
    pub road: String,
    pub l1: f64,
}

/// Averages of `fine` over the cells of `coarse`, by overlap length.
fn restrict(fine: &RoadState, coarse: &RoadState) -> Vec<f64> {
    let (fm, cm) = (fine.mesh(), coarse.mesh());
    let mut out = Vec::with_capacity(cm.n_cells());
    let mut i = 0;
    for j in 0..cm.n_cells() {
        let (a, b) = (cm.left(j), cm.right(j));
        let mut acc = 0.0;
        while i < fm.n_cells() && fm.right(i) <= a {
            i += 1;
        }
        let mut k = i;
        while k < fm.n_cells() && fm.left(k) < b {
            let overlap = fm.right(k).min(b) - fm.left(k).max(a);
            if overlap > 0.0 {
                acc += overlap * fine.average(k);
            }
            k += 1;
        }
        out.push(acc / (b - a));
    }
    out
}

/// `Σ Δx_j |ρ̄_j − ρ̄_j^ref|` on every road at every output time present in
/// both runs; the reference is averaged onto the coarse cells.
pub fn compare_to_reference(coarse: &RunResult, reference: &RunResult) -> Vec<RoadComparison> {
    let mut out = Vec::new();
    for snap in &coarse.snapshots {
        let Some(rsnap) = reference.snapshot_at(snap.time) else {
            continue;
        };
        for (id, state) in coarse.road_ids.iter().zip(&snap.roads) {
            let Some(ri) = reference.road_index(id) else {
                continue;
            };
            let fine = restrict(&rsnap.roads[ri], state);
            let l1 = state
                .averages()
                .zip(&fine)
                .zip(state.mesh().widths())
                .map(|((a, b), w)| w * (a - b).abs())
                .sum();
            out.push(RoadComparison {
                time: snap.time,
                road: id.clone(),
                l1,
            });
        }
    }
    out
}

fn random_model(rng: &mut impl Rng) -> FluxModel {
    match rng.gen_range(0..4) {
        0 => FluxModel::unit(),
        1 => FluxModel::BottleneckNarrow,
        2 => FluxModel::Quadratic {
            rho_max: rng.gen_range(0.5..2.0),
            v_free: rng.gen_range(0.5..2.0),
        },
        _ => FluxModel::Power {
            rho_max: rng.gen_range(0.5..2.0),
            v_free: rng.gen_range(0.5..2.0),
            exponent: rng.gen_range(1.0..3.0),
        },
    }
}

fn random_density(rng: &mut impl Rng, rho_max: f64) -> f64 {
    match rng.gen_range(0..8) {
        0 => 0.0,
        1 => rho_max,
        _ => rng.gen_range(0.0..=rho_max),
    }
}

/// A random network of two to four roads with one or two junctions,
/// random flux models, piecewise constant data and random open ends,
/// set up for first-order Godunov with CFL 0.5 and no limiters.
pub fn random_network_config(rng: &mut impl Rng) -> NetworkConfig {
    // (incoming, outgoing) road indices per junction
    let layouts: [&[(&[usize], &[usize])]; 8] = [
        &[(&[0], &[1])],
        &[(&[0], &[1, 2])],
        &[(&[0, 1], &[2])],
        &[(&[0, 1], &[2, 3])],
        &[(&[0], &[1]), (&[1], &[2])],
        &[(&[0], &[1, 2]), (&[2], &[3])],
        &[(&[0, 1], &[2]), (&[2], &[3])],
        &[(&[0], &[1]), (&[1], &[2]), (&[2], &[3])],
    ];
    let layout = layouts[rng.gen_range(0..layouts.len())];
    let n_roads = layout
        .iter()
        .flat_map(|(i, o)| i.iter().chain(o.iter()))
        .max()
        .map_or(0, |m| m + 1);
    let ids: Vec<String> = (0..n_roads).map(|i| format!("r{i}")).collect();
    let roads: Vec<RoadConfig> = ids
        .iter()
        .map(|id| {
            let flux = random_model(rng);
            let rho_max = flux.rho_max();
            let length = rng.gen_range(0.5..2.0);
            let mut breaks: Vec<f64> = (0..2).map(|_| rng.gen_range(0.0..length)).collect();
            breaks.sort_by(f64::total_cmp);
            breaks.dedup();
            let values = (0..=breaks.len()).map(|_| random_density(rng, rho_max)).collect();
            RoadConfig {
                id: id.clone(),
                x_min: 0.0,
                x_max: length,
                flux,
                cells: rng.gen_range(3..=12),
                degree: None,
                initial: InitialCondition::Piecewise { breaks, values },
            }
        })
        .collect();
    let mut attached = vec![[false; 2]; n_roads];
    let junctions = layout
        .iter()
        .map(|(inc, out)| {
            for &r in inc.iter() {
                attached[r][1] = true;
            }
            for &r in out.iter() {
                attached[r][0] = true;
            }
            let frac = |rng: &mut ChaCha8Rng| -> f64 { rng.gen_range(0.05..0.95) };
            let mut local = ChaCha8Rng::seed_from_u64(rng.gen());
            let (alpha, beta, q) = match (inc.len(), out.len()) {
                (1, 2) => (Some(frac(&mut local)), None, None),
                (2, 1) => (None, None, Some(frac(&mut local))),
                (2, 2) => {
                    let a = frac(&mut local);
                    let mut b = frac(&mut local);
                    while (a - b).abs() < 0.05 {
                        b = frac(&mut local);
                    }
                    (Some(a), Some(b), None)
                }
                _ => (None, None, None),
            };
            JunctionSpec {
                incoming: inc.iter().map(|&r| ids[r].clone()).collect(),
                outgoing: out.iter().map(|&r| ids[r].clone()).collect(),
                alpha,
                beta,
                q,
            }
        })
        .collect();
    let mut boundaries = Vec::new();
    for (r, ends) in attached.iter().enumerate() {
        for (e, end) in [RoadEnd::Left, RoadEnd::Right].into_iter().enumerate() {
            if ends[e] {
                continue;
            }
            let road = ids[r].clone();
            // mostly inflow upstream and outflow downstream, sometimes the
            // other way round
            let inflow = (end == RoadEnd::Left) != rng.gen_bool(0.2);
            boundaries.push(if inflow {
                BoundaryConfig::Inflow {
                    road,
                    end,
                    density: random_density(rng, roads[r].flux.rho_max()),
                }
            } else {
                BoundaryConfig::Outflow { road, end }
            });
        }
    }
    let mut solver = SolverConfig::new(rng.gen_range(0.2..1.0));
    solver.degree = 0;
    solver.flux = NumericalFlux::Godunov;
    solver.cfl[0] = 0.5;
    solver.bp = false;
    solver.tvb = false;
    NetworkConfig {
        description: None,
        roads,
        junctions,
        boundaries,
        solver,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub trials: usize,
    pub steps: usize,
    /// Networks where some cell average left `[0, ρ_max]` by more than the
    /// tolerance, or the run failed.
    pub violations: usize,
    /// Largest excursion outside `[0, ρ_max]` seen in any cell.
    pub worst_excess: f64,
    pub first_failure: Option<String>,
}

/// Runs `trials` random networks from [`random_network_config`] and checks
/// every cell average after every step.
pub fn random_network_bounds(trials: usize, seed: u64, tolerance: f64) -> BoundsReport {
    let results: Vec<(usize, f64, Option<String>)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let cfg = random_network_config(&mut rng);
            let mut sim = match Simulation::new(&cfg) {
                Ok(s) => s,
                Err(e) => return (0, f64::INFINITY, Some(format!("trial {i}: {e}"))),
            };
            let models: Vec<f64> = cfg.roads.iter().map(|r| r.flux.rho_max()).collect();
            let mut worst: f64 = 0.0;
            let t_end = cfg.solver.t_end;
            while sim.state().time < t_end {
                let dt = sim.network().compute_dt(sim.state()).min(t_end - sim.state().time);
                if let Err(e) = sim.step(dt) {
                    return (sim.state().steps, f64::INFINITY, Some(format!("trial {i}: {e}")));
                }
                for (rs, &rho_max) in sim.state().roads.iter().zip(&models) {
                    for a in rs.averages() {
                        worst = worst.max(-a).max(a - rho_max);
                    }
                }
            }
            let failure = (worst > tolerance).then(|| format!("trial {i}: excess {worst:e}"));
            (sim.state().steps, worst, failure)
        })
        .collect();
    BoundsReport {
        trials,
        steps: results.iter().map(|r| r.0).sum(),
        violations: results.iter().filter(|r| r.2.is_some()).count(),
        worst_excess: results.iter().map(|r| r.1).fold(0.0, f64::max),
        first_failure: results.iter().find_map(|r| r.2.clone()),
    }
}
