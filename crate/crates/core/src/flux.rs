//! Fundamental diagrams and pointwise numerical fluxes.
//!
//! A fundamental diagram is a strictly concave flux `f(ρ)` on `[0, ρ_max]`
//! with `f(0) = f(ρ_max) = 0`. Its maximizer `σ` (the critical density)
//! separates free flow (`ρ < σ`, `f` increasing) from congestion
//! (`ρ > σ`, `f` decreasing).
//!
//! [`FundamentalDiagram`] is the extension point. The built-in models in
//! [`FluxModel`] provide closed forms where available; anything that only
//! implements `rho_max`, `flux` and `flux_prime` gets bisection-based
//! defaults for the critical density, the `τ` map and the branch inverses.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const BISECTION_TOL: f64 = 1e-13;
const BISECTION_MAX_ITER: usize = 200;

/// A strictly concave density-flux relation.
pub trait FundamentalDiagram: fmt::Debug + Send + Sync {
    /// Upper bound of the admissible densities.
    fn rho_max(&self) -> f64;

    /// Flux `f(ρ)`.
    fn flux(&self, rho: f64) -> f64;

    /// Wave speed `f'(ρ)`.
    fn flux_prime(&self, rho: f64) -> f64;

    /// Critical density, the unique maximizer of `f` on `[0, ρ_max]`.
    ///
    /// Defaults to bisection on the decreasing derivative.
    fn sigma(&self) -> f64 {
        let (mut lo, mut hi) = (0.0, self.rho_max());
        for _ in 0..BISECTION_MAX_ITER {
            if hi - lo <= 1e-15 * self.rho_max() {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.flux_prime(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Capacity `f(σ)`.
    fn max_flux(&self) -> f64 {
        self.flux(self.sigma())
    }

    /// Global Lax-Friedrichs viscosity `max |f'|` over `[0, ρ_max]`.
    ///
    /// `f'` is decreasing, so the maximum sits at an endpoint.
    fn lf_alpha(&self) -> f64 {
        self.flux_prime(0.0)
            .abs()
            .max(self.flux_prime(self.rho_max()).abs())
    }

    /// The density `ρ ≤ σ` with `f(ρ) = q`, for `q ∈ [0, f(σ)]`.
    fn free_inverse(&self, q: f64) -> f64 {
        bisect(|r| self.flux(r) - q, 0.0, self.sigma())
    }

    /// The density `ρ ≥ σ` with `f(ρ) = q`, for `q ∈ [0, f(σ)]`.
    fn congested_inverse(&self, q: f64) -> f64 {
        bisect(|r| q - self.flux(r), self.sigma(), self.rho_max())
    }

    /// Demand (maximal flux an incoming road can send), no domain check.
    fn demand_of(&self, rho: f64) -> f64 {
        if rho <= self.sigma() {
            self.flux(rho)
        } else {
            self.max_flux()
        }
    }

    /// Supply (maximal flux an outgoing road can absorb), no domain check.
    fn supply_of(&self, rho: f64) -> f64 {
        if rho <= self.sigma() {
            self.max_flux()
        } else {
            self.flux(rho)
        }
    }
}

/// Root of an increasing function `g` on `[lo, hi]` by bisection.
fn bisect(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    if g(lo) >= 0.0 {
        return lo;
    }
    if g(hi) <= 0.0 {
        return hi;
    }
    for _ in 0..BISECTION_MAX_ITER {
        if hi - lo <= BISECTION_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Greenshields diagram `f(ρ) = v ρ (1 − ρ/ρ_max)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadratic {
    pub rho_max: f64,
    pub v_free: f64,
}

impl Quadratic {
    pub fn new(rho_max: f64, v_free: f64) -> Self {
        Self { rho_max, v_free }
    }

    /// `f₁(ρ) = ρ(1 − ρ)` on `[0, 1]`.
    pub fn unit() -> Self {
        Self::new(1.0, 1.0)
    }

    /// `f₂(ρ) = ρ(1 − 3ρ/2)` on `[0, 2/3]`.
    pub fn narrow() -> Self {
        Self::new(2.0 / 3.0, 1.0)
    }

    // sqrt(1 - q/f(σ)), clamped against roundoff above capacity
    fn discriminant(&self, q: f64) -> f64 {
        (1.0 - q / self.max_flux()).max(0.0).sqrt()
    }
}

impl FundamentalDiagram for Quadratic {
    fn rho_max(&self) -> f64 {
        self.rho_max
    }

    fn flux(&self, rho: f64) -> f64 {
        self.v_free * rho * (1.0 - rho / self.rho_max)
    }

    fn flux_prime(&self, rho: f64) -> f64 {
        self.v_free * (1.0 - 2.0 * rho / self.rho_max)
    }

    fn sigma(&self) -> f64 {
        0.5 * self.rho_max
    }

    fn max_flux(&self) -> f64 {
        0.25 * self.v_free * self.rho_max
    }

    fn lf_alpha(&self) -> f64 {
        self.v_free.abs()
    }

    fn free_inverse(&self, q: f64) -> f64 {
        // 2q / (v (1 + s)) avoids cancellation for small q
        2.0 * q / (self.v_free * (1.0 + self.discriminant(q)))
    }

    fn congested_inverse(&self, q: f64) -> f64 {
        0.5 * self.rho_max * (1.0 + self.discriminant(q))
    }
}

/// `f(ρ) = v ρ (1 − (ρ/ρ_max)^n)` with `n ≥ 1`.
///
/// Strictly concave but not symmetric about its critical density. This model
/// deliberately relies on the trait's bisection defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLaw {
    pub rho_max: f64,
    pub v_free: f64,
    pub exponent: f64,
}

impl FundamentalDiagram for PowerLaw {
    fn rho_max(&self) -> f64 {
        self.rho_max
    }

    fn flux(&self, rho: f64) -> f64 {
        let s = rho / self.rho_max;
        self.v_free * rho * (1.0 - s.abs().powf(self.exponent))
    }

    fn flux_prime(&self, rho: f64) -> f64 {
        let s = rho / self.rho_max;
        self.v_free * (1.0 - (self.exponent + 1.0) * s.abs().powf(self.exponent))
    }
}

/// Flux models addressable by string key in configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FluxModel {
    /// `v_free · ρ (1 − ρ/rho_max)`.
    Quadratic { rho_max: f64, v_free: f64 },
    /// The narrow-road diagram `ρ(1 − 3ρ/2)` on `[0, 2/3]`.
    BottleneckNarrow,
    /// `v_free · ρ (1 − (ρ/rho_max)^exponent)`.
    Power {
        rho_max: f64,
        v_free: f64,
        exponent: f64,
    },
}

impl FluxModel {
    /// `f₁(ρ) = ρ(1 − ρ)`.
    pub fn unit() -> Self {
        FluxModel::Quadratic {
            rho_max: 1.0,
            v_free: 1.0,
        }
    }

    /// Checks parameters; `key` prefixes error messages.
    pub fn validate(&self, key: &str) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::config(
                    format!("{key}.{name}"),
                    format!("must be a positive finite number, got {v}"),
                ))
            }
        };
        match *self {
            FluxModel::Quadratic { rho_max, v_free } => {
                positive("rho_max", rho_max)?;
                positive("v_free", v_free)
            }
            FluxModel::BottleneckNarrow => Ok(()),
            FluxModel::Power {
                rho_max,
                v_free,
                exponent,
            } => {
                positive("rho_max", rho_max)?;
                positive("v_free", v_free)?;
                if exponent.is_finite() && exponent >= 1.0 {
                    Ok(())
                } else {
                    Err(Error::config(
                        format!("{key}.exponent"),
                        format!("must be at least 1, got {exponent}"),
                    ))
                }
            }
        }
    }

    fn resolved(&self) -> Resolved {
        match *self {
            FluxModel::Quadratic { rho_max, v_free } => {
                Resolved::Quadratic(Quadratic::new(rho_max, v_free))
            }
            FluxModel::BottleneckNarrow => Resolved::Quadratic(Quadratic::narrow()),
            FluxModel::Power {
                rho_max,
                v_free,
                exponent,
            } => Resolved::Power(PowerLaw {
                rho_max,
                v_free,
                exponent,
            }),
        }
    }
}

enum Resolved {
    Quadratic(Quadratic),
    Power(PowerLaw),
}

macro_rules! delegate {
    ($self:ident, $m:ident $(, $arg:expr)*) => {
        match $self.resolved() {
            Resolved::Quadratic(q) => q.$m($($arg),*),
            Resolved::Power(p) => p.$m($($arg),*),
        }
    };
}

impl FundamentalDiagram for FluxModel {
    fn rho_max(&self) -> f64 {
        delegate!(self, rho_max)
    }
    fn flux(&self, rho: f64) -> f64 {
        delegate!(self, flux, rho)
    }
    fn flux_prime(&self, rho: f64) -> f64 {
        delegate!(self, flux_prime, rho)
    }
    fn sigma(&self) -> f64 {
        delegate!(self, sigma)
    }
    fn max_flux(&self) -> f64 {
        delegate!(self, max_flux)
    }
    fn lf_alpha(&self) -> f64 {
        delegate!(self, lf_alpha)
    }
    fn free_inverse(&self, q: f64) -> f64 {
        delegate!(self, free_inverse, q)
    }
    fn congested_inverse(&self, q: f64) -> f64 {
        delegate!(self, congested_inverse, q)
    }
}

fn check_density<M: FundamentalDiagram + ?Sized>(model: &M, rho: f64) -> Result<()> {
    if rho.is_finite() && (0.0..=model.rho_max()).contains(&rho) {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "density {rho} outside [0, {}]",
            model.rho_max()
        )))
    }
}

/// The companion density with the same flux on the other side of `σ`.
pub fn tau<M: FundamentalDiagram + ?Sized>(model: &M, rho: f64) -> Result<f64> {
    check_density(model, rho)?;
    let q = model.flux(rho);
    let sigma = model.sigma();
    Ok(if rho < sigma {
        model.congested_inverse(q)
    } else if rho > sigma {
        model.free_inverse(q)
    } else {
        sigma
    })
}

/// Maximal flux an incoming road in state `rho` can send into a junction.
pub fn demand<M: FundamentalDiagram + ?Sized>(model: &M, rho: f64) -> Result<f64> {
    check_density(model, rho)?;
    Ok(model.demand_of(rho))
}

/// Maximal flux an outgoing road in state `rho` can absorb from a junction.
pub fn supply<M: FundamentalDiagram + ?Sized>(model: &M, rho: f64) -> Result<f64> {
    check_density(model, rho)?;
    Ok(model.supply_of(rho))
}

/// Global Lax-Friedrichs flux with viscosity `model.lf_alpha()`.
pub fn lax_friedrichs<M: FundamentalDiagram + ?Sized>(
    model: &M,
    rho_left: f64,
    rho_right: f64,
) -> Result<f64> {
    check_density(model, rho_left)?;
    check_density(model, rho_right)?;
    Ok(NumericalFlux::LaxFriedrichs.eval(model, rho_left, rho_right))
}

/// Godunov flux: `min f` over `[ρ_l, ρ_r]` if `ρ_l ≤ ρ_r`, else `max f` over `[ρ_r, ρ_l]`.
pub fn godunov<M: FundamentalDiagram + ?Sized>(
    model: &M,
    rho_left: f64,
    rho_right: f64,
) -> Result<f64> {
    check_density(model, rho_left)?;
    check_density(model, rho_right)?;
    Ok(NumericalFlux::Godunov.eval(model, rho_left, rho_right))
}

/// Interface flux used between cells of one road.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NumericalFlux {
    #[default]
    LaxFriedrichs,
    Godunov,
}

impl NumericalFlux {
    /// Evaluates the flux without domain checks. High-order traces may
    /// overshoot the admissible interval when no bound-preserving limiter
    /// runs, and both formulas remain well defined there.
    #[inline]
    pub fn eval<M: FundamentalDiagram + ?Sized>(self, model: &M, left: f64, right: f64) -> f64 {
        match self {
            NumericalFlux::LaxFriedrichs => {
                0.5 * (model.flux(left) + model.flux(right))
                    + 0.5 * model.lf_alpha() * (left - right)
            }
            NumericalFlux::Godunov => {
                let (fl, fr) = (model.flux(left), model.flux(right));
                if left <= right {
                    fl.min(fr)
                } else {
                    let sigma = model.sigma();
                    if right <= sigma && sigma <= left {
                        model.max_flux()
                    } else {
                        fl.max(fr)
                    }
                }
            }
        }
    }
}

impl fmt::Display for NumericalFlux {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NumericalFlux::LaxFriedrichs => f.write_str("lax-friedrichs"),
            NumericalFlux::Godunov => f.write_str("godunov"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn f1() -> Quadratic {
        Quadratic::unit()
    }
    fn f2() -> Quadratic {
        Quadratic::narrow()
    }
    fn power() -> PowerLaw {
        PowerLaw {
            rho_max: 1.2,
            v_free: 1.5,
            exponent: 2.5,
        }
    }

    // Independent root finder: scan for a sign change, then refine.
    fn scan_root(g: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
        let n = 20_000;
        let h = (hi - lo) / n as f64;
        let mut a = lo;
        for i in 1..=n {
            let b = lo + i as f64 * h;
            if g(a) * g(b) <= 0.0 {
                let (mut a, mut b) = (a, b);
                for _ in 0..100 {
                    let m = 0.5 * (a + b);
                    if g(a) * g(m) <= 0.0 {
                        b = m
                    } else {
                        a = m
                    }
                }
                return 0.5 * (a + b);
            }
            a = b;
        }
        panic!("no root in [{lo}, {hi}]")
    }

    #[test]
    fn builtin_endpoints_and_sigma() {
        for m in [f1(), f2()] {
            assert_abs_diff_eq!(m.flux(0.0), 0.0, epsilon = 1e-14);
            assert_abs_diff_eq!(m.flux(m.rho_max()), 0.0, epsilon = 1e-14);
        }
        assert_eq!(f1().sigma(), 0.5);
        assert_abs_diff_eq!(f2().sigma(), 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f1().max_flux(), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(f2().max_flux(), 1.0 / 6.0, epsilon = 1e-15);
        assert_eq!(f2().lf_alpha(), 1.0);
    }

    #[test]
    fn generic_defaults_match_closed_forms() {
        #[derive(Debug)]
        struct Plain(Quadratic);
        impl FundamentalDiagram for Plain {
            fn rho_max(&self) -> f64 {
                self.0.rho_max
            }
            fn flux(&self, r: f64) -> f64 {
                self.0.flux(r)
            }
            fn flux_prime(&self, r: f64) -> f64 {
                self.0.flux_prime(r)
            }
        }
        let q = Quadratic::new(0.8, 1.7);
        let p = Plain(q);
        assert_abs_diff_eq!(p.sigma(), q.sigma(), epsilon = 1e-13);
        assert_abs_diff_eq!(p.lf_alpha(), q.lf_alpha(), epsilon = 1e-14);
        for flux in [0.0, 0.05, 0.2, q.max_flux() * 0.999] {
            assert_abs_diff_eq!(p.free_inverse(flux), q.free_inverse(flux), epsilon = 1e-7);
            assert_abs_diff_eq!(
                p.congested_inverse(flux),
                q.congested_inverse(flux),
                epsilon = 1e-7
            );
        }
    }

    #[test]
    fn power_law_sigma_matches_stationary_point() {
        let m = power();
        // f'(σ) = 0  ⇔  (σ/ρ_max)^n = 1/(n+1)
        let exact = m.rho_max * (1.0 / (m.exponent + 1.0)).powf(1.0 / m.exponent);
        assert_abs_diff_eq!(m.sigma(), exact, epsilon = 1e-12);
    }

    #[test]
    fn tau_examples() {
        assert_abs_diff_eq!(tau(&f1(), 0.25).unwrap(), 0.75, epsilon = 1e-14);
        assert_abs_diff_eq!(tau(&f1(), 0.5).unwrap(), 0.5, epsilon = 1e-14);
        // oracle: root of f2(r) = f2(0.1) = 0.085 on the congested branch
        let target = f2().flux(0.1);
        assert_abs_diff_eq!(target, 0.085, epsilon = 1e-15);
        let oracle = scan_root(|r| f2().flux(r) - target, f2().sigma(), f2().rho_max);
        assert_abs_diff_eq!(oracle, 0.566_666_666_666_666_7, epsilon = 1e-10);
        assert_abs_diff_eq!(tau(&f2(), 0.1).unwrap(), oracle, epsilon = 1e-10);
    }

    #[test]
    fn tau_general_model_uses_bisection() {
        let m = power();
        for rho in [0.05, 0.3, 0.7, 1.1] {
            let t = tau(&m, rho).unwrap();
            assert_abs_diff_eq!(m.flux(t), m.flux(rho), epsilon = 1e-12);
            assert!((t - m.sigma()) * (rho - m.sigma()) < 0.0);
        }
    }

    #[test]
    fn demand_supply_examples() {
        assert_abs_diff_eq!(demand(&f1(), 0.25).unwrap(), 0.1875, epsilon = 1e-15);
        assert_abs_diff_eq!(demand(&f1(), 0.66).unwrap(), 0.25, epsilon = 1e-15);
        // oracle: max of f2 over [0, 0.66] by dense scan
        let scan_max = (0..=66_000)
            .map(|i| f2().flux(i as f64 * 1e-5))
            .fold(f64::MIN, f64::max);
        assert_abs_diff_eq!(scan_max, 1.0 / 6.0, epsilon = 1e-9);
        assert_abs_diff_eq!(demand(&f2(), 0.66).unwrap(), 1.0 / 6.0, epsilon = 1e-15);

        assert_abs_diff_eq!(supply(&f1(), 0.25).unwrap(), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(supply(&f1(), 0.66).unwrap(), 0.2244, epsilon = 1e-15);
        assert_abs_diff_eq!(supply(&f2(), 0.0).unwrap(), 1.0 / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn numerical_flux_examples() {
        let m = f1();
        assert_abs_diff_eq!(lax_friedrichs(&m, 0.5, 0.5).unwrap(), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(lax_friedrichs(&m, 0.2, 0.6).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(lax_friedrichs(&m, 0.6, 0.2).unwrap(), 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(godunov(&m, 0.2, 0.6).unwrap(), 0.16, epsilon = 1e-15);
        assert_abs_diff_eq!(godunov(&m, 0.6, 0.2).unwrap(), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(godunov(&m, 0.3, 0.3).unwrap(), 0.21, epsilon = 1e-15);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(tau(&f1(), -0.1), Err(Error::Domain(_))));
        assert!(matches!(demand(&f2(), 0.7), Err(Error::Domain(_))));
        assert!(matches!(supply(&f1(), f64::NAN), Err(Error::Domain(_))));
        assert!(matches!(godunov(&f1(), 0.2, 1.5), Err(Error::Domain(_))));
        assert!(matches!(lax_friedrichs(&f1(), -1.0, 0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn godunov_matches_dense_extremum() {
        let m = power();
        let n = 40;
        for i in 0..=n {
            for j in 0..=n {
                let (l, r) = (m.rho_max * i as f64 / n as f64, m.rho_max * j as f64 / n as f64);
                let (a, b) = (l.min(r), l.max(r));
                let samples = (0..=2000).map(|s| m.flux(a + (b - a) * s as f64 / 2000.0));
                let oracle = if l <= r {
                    samples.fold(f64::MAX, f64::min)
                } else {
                    samples.fold(f64::MIN, f64::max)
                };
                let g = godunov(&m, l, r).unwrap();
                // scan can miss the interior max by O(h²)
                assert!((g - oracle).abs() < 1e-6, "({l}, {r}): {g} vs {oracle}");
            }
        }
    }

    #[test]
    fn godunov_is_monotone_on_grid() {
        for m in [f1(), f2()] {
            let n = 100;
            let h = m.rho_max / n as f64;
            for i in 0..n {
                for j in 0..=n {
                    let (a, b) = (i as f64 * h, j as f64 * h);
                    let g = NumericalFlux::Godunov;
                    // nondecreasing in the left state
                    assert!(g.eval(&m, a + h, b) >= g.eval(&m, a, b) - 1e-15);
                    // nonincreasing in the right state
                    assert!(g.eval(&m, b, a + h) <= g.eval(&m, b, a) + 1e-15);
                }
            }
        }
    }

    #[test]
    fn flux_model_keys_round_trip() {
        let json = r#"[{"model":"quadratic","rho_max":1.0,"v_free":1.0},{"model":"bottleneck-narrow"}]"#;
        let models: Vec<FluxModel> = serde_json::from_str(json).unwrap();
        assert_eq!(models[0], FluxModel::unit());
        assert_abs_diff_eq!(models[1].flux(0.5), f2().flux(0.5));
        assert!(FluxModel::Quadratic {
            rho_max: -1.0,
            v_free: 1.0
        }
        .validate("roads[0].flux")
        .is_err());
    }

    fn models() -> Vec<FluxModel> {
        vec![
            FluxModel::unit(),
            FluxModel::BottleneckNarrow,
            FluxModel::Quadratic {
                rho_max: 0.9,
                v_free: 2.0,
            },
            FluxModel::Power {
                rho_max: 1.2,
                v_free: 1.5,
                exponent: 2.5,
            },
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn numerical_fluxes_are_consistent(idx in 0usize..4, s in 0.0f64..=1.0) {
            let m = models()[idx];
            let rho = s * m.rho_max();
            let f = m.flux(rho);
            prop_assert!((lax_friedrichs(&m, rho, rho).unwrap() - f).abs() <= 1e-14);
            prop_assert!((godunov(&m, rho, rho).unwrap() - f).abs() <= 1e-14);
        }

        #[test]
        fn tau_preserves_flux(idx in 0usize..4, s in 0.0f64..=1.0) {
            let m = models()[idx];
            let rho = s * m.rho_max();
            let t = tau(&m, rho).unwrap();
            prop_assert!((m.flux(t) - m.flux(rho)).abs() <= 1e-12);
            prop_assert!((0.0..=m.rho_max()).contains(&t));
        }

        #[test]
        fn demand_supply_bounds(idx in 0usize..4, s in 0.0f64..=1.0) {
            let m = models()[idx];
            let rho = s * m.rho_max();
            let (d, su) = (demand(&m, rho).unwrap(), supply(&m, rho).unwrap());
            let cap = m.max_flux();
            prop_assert!(d >= 0.0 && d <= cap + 1e-15);
            prop_assert!(su >= 0.0 && su <= cap + 1e-15);
            prop_assert!(d + su >= cap - 1e-15);
        }

        #[test]
        fn concavity_and_alpha(idx in 0usize..4, a in 0.0f64..1.0, b in 0.0f64..1.0, c in 0.0f64..1.0) {
            let m = models()[idx];
            let mut v = [a, b, c];
            v.sort_by(f64::total_cmp);
            let [r1, r2, r3] = v.map(|s| s * m.rho_max());
            prop_assume!(r3 - r1 > 1e-6 && r2 - r1 > 1e-7 && r3 - r2 > 1e-7);
            let lin = m.flux(r1) + (m.flux(r3) - m.flux(r1)) * (r2 - r1) / (r3 - r1);
            prop_assert!(m.flux(r2) > lin);
            prop_assert!(m.max_flux() >= m.flux(r2));
            prop_assert!(m.lf_alpha() >= m.flux_prime(r2).abs());
        }
    }
}
