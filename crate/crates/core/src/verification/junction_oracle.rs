//! Brute-force junction oracle and randomized comparison against the
//! closed-form solvers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::flux::{FluxModel, FundamentalDiagram};
use crate::junction::{JunctionFluxes, JunctionKind, JunctionRule};

/// Grid step of the oracle before it is refined for steep constraints.
pub const ORACLE_BASE_STEP: f64 = 1e-3;

/// Ties in total throughput closer than this count as equal.
const TIE_TOL: f64 = 1e-12;

/// Slack on capacity constraints so grid points landing on a constraint
/// up to roundoff stay feasible.
const SLACK: f64 = 1e-14;

/// Maximizes the incoming throughput over a grid in `γ_a`.
///
/// For each grid value of `γ_a` the largest feasible `γ_b` is computed
/// exactly. Among maximizers of a 2×1 junction the one closest to the
/// right-of-way line `γ_a = q (γ_a + γ_b)` wins. For 2×2 junctions the step
/// shrinks by the steepest capacity slope so that `γ_b` also stays within
/// `step` of the optimum.
pub fn lp_junction_oracle(rule: &JunctionRule, demands: &[f64], supplies: &[f64], step: f64) -> JunctionFluxes {
    let d_a = demands[0];
    let mut step = step;
    if let JunctionRule::TwoTwo { alpha, beta } = *rule {
        step /= 1f64.max(alpha / beta).max((1.0 - alpha) / (1.0 - beta));
    }
    // best total, tie-break score, γ_a, γ_b
    let mut best: Option<(f64, f64, f64, f64)> = None;
    let n = (d_a / step).ceil() as usize;
    for i in 0..=n {
        let g_a = (i as f64 * step).min(d_a);
        let Some((g_b, score)) = inner_max(rule, g_a, demands, supplies) else {
            continue;
        };
        let total = g_a + g_b;
        let better = match best {
            None => true,
            Some((bt, bs, _, _)) => total > bt + TIE_TOL || (total >= bt - TIE_TOL && score < bs),
        };
        if better {
            best = Some((total, score, g_a, g_b));
        }
    }
    let (_, _, g_a, g_b) = best.unwrap_or((0.0, 0.0, 0.0, 0.0));
    match *rule {
        JunctionRule::OneOne => JunctionFluxes::new(&[g_a], &[g_a]),
        JunctionRule::OneTwo { alpha } => {
            JunctionFluxes::new(&[g_a], &[alpha * g_a, (1.0 - alpha) * g_a])
        }
        JunctionRule::TwoOne { .. } => JunctionFluxes::new(&[g_a, g_b], &[g_a + g_b]),
        JunctionRule::TwoTwo { alpha, beta } => JunctionFluxes::new(
            &[g_a, g_b],
            &[
                alpha * g_a + beta * g_b,
                (1.0 - alpha) * g_a + (1.0 - beta) * g_b,
            ],
        ),
    }
}

/// Largest feasible `γ_b` (zero for single-input junctions) and the
/// tie-break score, or `None` if `γ_a` is infeasible.
fn inner_max(rule: &JunctionRule, g_a: f64, d: &[f64], s: &[f64]) -> Option<(f64, f64)> {
    match *rule {
        JunctionRule::OneOne => (g_a <= s[0] + SLACK).then_some((0.0, 0.0)),
        JunctionRule::OneTwo { alpha } => (alpha * g_a <= s[0] + SLACK
            && (1.0 - alpha) * g_a <= s[1] + SLACK)
            .then_some((0.0, 0.0)),
        JunctionRule::TwoOne { q } => {
            let g_b = d[1].min(s[0] - g_a);
            (g_b >= -SLACK).then(|| (g_b.max(0.0), (g_a - q * (g_a + g_b)).abs()))
        }
        JunctionRule::TwoTwo { alpha, beta } => {
            let g_b = d[1]
                .min((s[0] - alpha * g_a) / beta)
                .min((s[1] - (1.0 - alpha) * g_a) / (1.0 - beta));
            (g_b >= -SLACK).then_some((g_b.max(0.0), 0.0))
        }
    }
}

/// Demands, supplies and parameters of one random junction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JunctionInstance {
    pub rule: JunctionRule,
    pub demands: [f64; 2],
    pub supplies: [f64; 2],
}

impl JunctionInstance {
    pub fn demands(&self) -> &[f64] {
        &self.demands[..self.rule.kind().counts().0]
    }

    pub fn supplies(&self) -> &[f64] {
        &self.supplies[..self.rule.kind().counts().1]
    }
}

/// Draws a junction of the given kind. Demands and supplies come either
/// from random trace densities of `ρ(1 − ρ)` (so capacities saturate as on
/// a real network) or uniformly from `[0, 1/4]`. Turning fractions stay at
/// least 0.05 apart to keep the 2×2 problem well posed.
pub fn random_junction_instance(kind: JunctionKind, rng: &mut impl Rng) -> JunctionInstance {
    let model = FluxModel::unit();
    let from_traces = rng.gen_bool(0.5);
    let mut draw = |demand: bool| {
        if from_traces {
            let rho: f64 = rng.gen_range(0.0..=1.0);
            if demand {
                model.demand_of(rho)
            } else {
                model.supply_of(rho)
            }
        } else {
            rng.gen_range(0.0..=0.25)
        }
    };
    let demands = [draw(true), draw(true)];
    let supplies = [draw(false), draw(false)];
    let frac = |rng: &mut dyn rand::RngCore| rng.gen_range(0.05..0.95);
    let rule = match kind {
        JunctionKind::OneOne => JunctionRule::OneOne,
        JunctionKind::OneTwo => JunctionRule::OneTwo { alpha: frac(rng) },
        JunctionKind::TwoOne => JunctionRule::TwoOne { q: frac(rng) },
        JunctionKind::TwoTwo => loop {
            let (alpha, beta) = (frac(rng), frac(rng));
            if (alpha - beta).abs() >= 0.05 {
                break JunctionRule::TwoTwo { alpha, beta };
            }
        },
    };
    JunctionInstance {
        rule,
        demands,
        supplies,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KindFuzzStats {
    pub kind: &'static str,
    pub trials: usize,
    /// Trials where some flux differs from the oracle by more than the
    /// tolerance.
    pub mismatches: usize,
    pub max_error: f64,
    /// Trials with `|Σγ_in − Σγ_out|` above 1e-13.
    pub conservation_violations: usize,
    pub max_conservation_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuzzReport {
    pub seed: u64,
    pub tolerance: f64,
    pub kinds: Vec<KindFuzzStats>,
}

impl FuzzReport {
    pub fn passed(&self) -> bool {
        self.kinds
            .iter()
            .all(|k| k.mismatches == 0 && k.conservation_violations == 0)
    }
}

fn kind_name(kind: JunctionKind) -> &'static str {
    match kind {
        JunctionKind::OneOne => "1x1",
        JunctionKind::OneTwo => "1x2",
        JunctionKind::TwoOne => "2x1",
        JunctionKind::TwoTwo => "2x2",
    }
}

/// Compares the closed-form solvers with [`lp_junction_oracle`] on
/// `trials` random instances of every junction kind. Trial `i` of a kind
/// uses its own ChaCha stream, so reports do not depend on thread count.
pub fn junction_fuzz(trials: usize, seed: u64, tolerance: f64) -> FuzzReport {
    let kinds = JunctionKind::ALL
        .iter()
        .enumerate()
        .map(|(ki, &kind)| {
            let results: Vec<(f64, f64)> = (0..trials)
                .into_par_iter()
                .map(|i| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream((ki as u64) << 40 | i as u64);
                    let inst = random_junction_instance(kind, &mut rng);
                    let got = inst
                        .rule
                        .solve(inst.demands(), inst.supplies())
                        .expect("random instance is valid");
                    let want = lp_junction_oracle(&inst.rule, inst.demands(), inst.supplies(), ORACLE_BASE_STEP);
                    let err = got
                        .incoming()
                        .iter()
                        .zip(want.incoming())
                        .chain(got.outgoing().iter().zip(want.outgoing()))
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max);
                    (err, (got.total_in() - got.total_out()).abs())
                })
                .collect();
            KindFuzzStats {
                kind: kind_name(kind),
                trials,
                mismatches: results.iter().filter(|r| r.0 > tolerance).count(),
                max_error: results.iter().map(|r| r.0).fold(0.0, f64::max),
                conservation_violations: results.iter().filter(|r| r.1 > 1e-13).count(),
                max_conservation_error: results.iter().map(|r| r.1).fold(0.0, f64::max),
            }
        })
        .collect();
    FuzzReport {
        seed,
        tolerance,
        kinds,
    }
}
