//! Single-road discontinuous Galerkin machinery.
//!
//! The solution on a cell `I_j` with center `x_j` and width `Δx_j` is
//! expanded in the unnormalized Legendre basis of the local coordinate
//! `ξ = (x − x_j)/(Δx_j/2)`:
//!
//! ```text
//! ψ⁰ = 1,  ψ¹ = ξ,  ψ² = ξ² − 1/3,  ψ³ = ξ³ − 3ξ/5
//! ```
//!
//! The modes are orthogonal, so the mass matrix is diagonal and the zeroth
//! coefficient is the cell average.

use crate::error::{Error, Result};
use crate::flux::{FundamentalDiagram, NumericalFlux};
use crate::quadrature::GaussLegendre;

/// Highest supported polynomial degree.
pub const MAX_DEGREE: usize = 3;

/// Points of the rule used to project initial data.
pub const PROJECTION_POINTS: usize = 8;

/// `ψ^l(1)`.
pub const PSI_RIGHT: [f64; 4] = [1.0, 1.0, 2.0 / 3.0, 2.0 / 5.0];
/// `ψ^l(−1)`.
pub const PSI_LEFT: [f64; 4] = [1.0, -1.0, 2.0 / 3.0, -2.0 / 5.0];
/// `∫_{-1}^{1} (ψ^l)² dξ`.
pub const REFERENCE_MASS: [f64; 4] = [2.0, 2.0 / 3.0, 8.0 / 45.0, 8.0 / 175.0];

/// Basis function `ψ^l(ξ)`.
#[inline]
pub fn psi(l: usize, xi: f64) -> f64 {
    match l {
        0 => 1.0,
        1 => xi,
        2 => xi * xi - 1.0 / 3.0,
        3 => xi * (xi * xi - 0.6),
        _ => panic!("basis degree {l} not supported"),
    }
}

/// Derivative `dψ^l/dξ`.
#[inline]
pub fn dpsi(l: usize, xi: f64) -> f64 {
    match l {
        0 => 0.0,
        1 => 1.0,
        2 => 2.0 * xi,
        3 => 3.0 * xi * xi - 0.6,
        _ => panic!("basis degree {l} not supported"),
    }
}

/// Partition of `[x_min, x_max]` into cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    x_min: f64,
    x_max: f64,
    edges: Vec<f64>,
    widths: Vec<f64>,
}

impl Mesh1D {
    /// `n_cells` cells of equal width.
    pub fn uniform(x_min: f64, x_max: f64, n_cells: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) {
            return Err(Error::Domain(format!(
                "mesh interval [{x_min}, {x_max}] is empty or not finite"
            )));
        }
        if n_cells == 0 {
            return Err(Error::Domain("mesh needs at least one cell".into()));
        }
        let dx = (x_max - x_min) / n_cells as f64;
        let mut edges: Vec<f64> = (0..=n_cells).map(|j| x_min + j as f64 * dx).collect();
        edges[n_cells] = x_max;
        Ok(Mesh1D {
            x_min,
            x_max,
            edges,
            widths: vec![dx; n_cells],
        })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn n_cells(&self) -> usize {
        self.widths.len()
    }

    pub fn width(&self, j: usize) -> f64 {
        self.widths[j]
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    pub fn min_width(&self) -> f64 {
        self.widths.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn left(&self, j: usize) -> f64 {
        self.edges[j]
    }

    pub fn right(&self, j: usize) -> f64 {
        self.edges[j + 1]
    }

    pub fn center(&self, j: usize) -> f64 {
        0.5 * (self.edges[j] + self.edges[j + 1])
    }

    /// Physical coordinate of local coordinate `xi` in cell `j`.
    pub fn to_physical(&self, j: usize, xi: f64) -> f64 {
        self.center(j) + 0.5 * self.widths[j] * xi
    }

    /// Cell containing `x` and the local coordinate there. Points on an
    /// interior edge belong to the cell on their right.
    pub fn locate(&self, x: f64) -> Option<(usize, f64)> {
        if !(x >= self.x_min && x <= self.x_max) {
            return None;
        }
        let n = self.n_cells();
        let j = self.edges.partition_point(|&e| e <= x).saturating_sub(1).min(n - 1);
        let xi = ((x - self.center(j)) / (0.5 * self.widths[j])).clamp(-1.0, 1.0);
        Some((j, xi))
    }
}

/// Modal DG solution on one road.
#[derive(Debug, Clone, PartialEq)]
pub struct RoadState {
    mesh: Mesh1D,
    degree: usize,
    coeffs: Vec<f64>,
}

impl RoadState {
    /// State with all coefficients zero.
    pub fn zeros(mesh: Mesh1D, degree: usize) -> Result<Self> {
        check_degree(degree)?;
        let len = mesh.n_cells() * (degree + 1);
        Ok(RoadState {
            mesh,
            degree,
            coeffs: vec![0.0; len],
        })
    }

    /// State from explicit coefficients, cell-major with `degree + 1` modes
    /// per cell.
    pub fn from_coeffs(mesh: Mesh1D, degree: usize, coeffs: Vec<f64>) -> Result<Self> {
        check_degree(degree)?;
        if coeffs.len() != mesh.n_cells() * (degree + 1) {
            return Err(Error::Domain(format!(
                "expected {} coefficients, got {}",
                mesh.n_cells() * (degree + 1),
                coeffs.len()
            )));
        }
        Ok(RoadState {
            mesh,
            degree,
            coeffs,
        })
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_cells(&self) -> usize {
        self.mesh.n_cells()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn cell(&self, j: usize) -> &[f64] {
        let m = self.degree + 1;
        &self.coeffs[j * m..(j + 1) * m]
    }

    pub fn cell_mut(&mut self, j: usize) -> &mut [f64] {
        let m = self.degree + 1;
        &mut self.coeffs[j * m..(j + 1) * m]
    }

    pub fn average(&self, j: usize) -> f64 {
        self.coeffs[j * (self.degree + 1)]
    }

    pub fn averages(&self) -> impl Iterator<Item = f64> + '_ {
        self.coeffs.iter().step_by(self.degree + 1).copied()
    }

    /// `∫ ρ_h dx` over the road.
    pub fn mass(&self) -> f64 {
        self.averages()
            .zip(self.mesh.widths())
            .map(|(a, w)| a * w)
            .sum()
    }

    /// Value of the cell-`j` polynomial at local coordinate `xi`.
    #[inline]
    pub fn eval(&self, j: usize, xi: f64) -> f64 {
        self.cell(j)
            .iter()
            .enumerate()
            .map(|(l, c)| c * psi(l, xi))
            .sum()
    }

    #[inline]
    pub(crate) fn left_unchecked(&self, j: usize) -> f64 {
        self.cell(j).iter().zip(PSI_LEFT).map(|(c, p)| c * p).sum()
    }

    #[inline]
    pub(crate) fn right_unchecked(&self, j: usize) -> f64 {
        self.cell(j).iter().zip(PSI_RIGHT).map(|(c, p)| c * p).sum()
    }

    /// Limit at the left edge of cell `j` from inside the cell.
    pub fn trace_left(&self, j: usize) -> Result<f64> {
        self.check_cell(j)?;
        Ok(self.left_unchecked(j))
    }

    /// Limit at the right edge of cell `j` from inside the cell.
    pub fn trace_right(&self, j: usize) -> Result<f64> {
        self.check_cell(j)?;
        Ok(self.right_unchecked(j))
    }

    /// Value of `ρ_h` at the road coordinate `x`.
    pub fn sample(&self, x: f64) -> Result<f64> {
        let (j, xi) = self.mesh.locate(x).ok_or_else(|| {
            Error::Domain(format!(
                "x = {x} outside road [{}, {}]",
                self.mesh.x_min(),
                self.mesh.x_max()
            ))
        })?;
        Ok(self.eval(j, xi))
    }

    /// `m` equally spaced sample points per cell at the centers of `m`
    /// equal sub-intervals, with the value of `ρ_h` and the cell average.
    pub fn sample_cells(&self, m: usize) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::with_capacity(self.n_cells() * m);
        for j in 0..self.n_cells() {
            for i in 0..m {
                let xi = -1.0 + (2.0 * i as f64 + 1.0) / m as f64;
                out.push((self.mesh.to_physical(j, xi), self.eval(j, xi), self.average(j)));
            }
        }
        out
    }

    fn check_cell(&self, j: usize) -> Result<()> {
        if j < self.n_cells() {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "cell index {j} out of range for {} cells",
                self.n_cells()
            )))
        }
    }
}

fn check_degree(degree: usize) -> Result<()> {
    if degree <= MAX_DEGREE {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "polynomial degree {degree} not supported (0..={MAX_DEGREE})"
        )))
    }
}

/// L² projection of `rho0` onto piecewise polynomials of degree `degree`.
pub fn project_initial(
    mesh: Mesh1D,
    degree: usize,
    rho0: impl Fn(f64) -> f64,
) -> Result<RoadState> {
    let mut state = RoadState::zeros(mesh, degree)?;
    let rule = GaussLegendre::new(PROJECTION_POINTS);
    for j in 0..state.n_cells() {
        let values: Vec<f64> = rule
            .nodes
            .iter()
            .map(|&xi| rho0(state.mesh.to_physical(j, xi)))
            .collect();
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "initial density {bad} is not finite in cell {j}"
            )));
        }
        let cell = state.cell_mut(j);
        for (l, c) in cell.iter_mut().enumerate() {
            let moment: f64 = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .zip(&values)
                .map(|((&xi, &w), &v)| w * v * psi(l, xi))
                .sum();
            *c = moment / REFERENCE_MASS[l];
        }
    }
    Ok(state)
}

/// Precomputed volume quadrature for one polynomial degree.
#[derive(Debug, Clone)]
pub struct DgOperator {
    degree: usize,
    rule: GaussLegendre,
    // psi[q][l] and w_q * dpsi_l(xi_q)
    psi: Vec<[f64; 4]>,
    wdpsi: Vec<[f64; 4]>,
}

impl DgOperator {
    /// Operator with a `(degree + 2)`-point Gauss-Legendre volume rule.
    pub fn new(degree: usize) -> Result<Self> {
        check_degree(degree)?;
        let rule = GaussLegendre::new(degree + 2);
        let mut psi_t = Vec::with_capacity(rule.len());
        let mut wdpsi_t = Vec::with_capacity(rule.len());
        for (&xi, &w) in rule.nodes.iter().zip(&rule.weights) {
            let mut p = [0.0; 4];
            let mut d = [0.0; 4];
            for l in 0..=degree {
                p[l] = psi(l, xi);
                d[l] = w * dpsi(l, xi);
            }
            psi_t.push(p);
            wdpsi_t.push(d);
        }
        Ok(DgOperator {
            degree,
            rule,
            psi: psi_t,
            wdpsi: wdpsi_t,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn rule(&self) -> &GaussLegendre {
        &self.rule
    }

    /// Writes `dρ_j^l/dt` for every cell and mode into `out`.
    ///
    /// Interior interfaces use `numflux` with the road's own model;
    /// `flux_left` and `flux_right` are the numerical fluxes at the two ends
    /// of the road, supplied by the caller.
    pub fn residual_into<M: FundamentalDiagram + ?Sized>(
        &self,
        state: &RoadState,
        model: &M,
        numflux: NumericalFlux,
        flux_left: f64,
        flux_right: f64,
        out: &mut [f64],
    ) {
        let k = self.degree;
        assert_eq!(state.degree(), k, "operator and state degree differ");
        assert_eq!(out.len(), state.coeffs().len());
        let n = state.n_cells();
        let m = k + 1;
        let mut f_left = flux_left;
        for j in 0..n {
            let f_right = if j + 1 == n {
                flux_right
            } else {
                numflux.eval(model, state.right_unchecked(j), state.left_unchecked(j + 1))
            };
            let cell = state.cell(j);
            let r = &mut out[j * m..(j + 1) * m];
            r.fill(0.0);
            // Both terms are taken relative to f at the cell average; the
            // shift cancels exactly since the rule integrates ψ' exactly.
            let f_ref = model.flux(cell[0]);
            if k > 0 {
                for (p, wd) in self.psi.iter().zip(&self.wdpsi) {
                    let rho: f64 = cell.iter().zip(p).map(|(c, b)| c * b).sum();
                    let f = model.flux(rho) - f_ref;
                    for l in 1..=k {
                        r[l] += f * wd[l];
                    }
                }
            }
            let half = 0.5 * state.mesh().width(j);
            r[0] = -(f_right - f_left) / (half * REFERENCE_MASS[0]);
            for l in 1..=k {
                r[l] -= (f_right - f_ref) * PSI_RIGHT[l] - (f_left - f_ref) * PSI_LEFT[l];
                r[l] /= half * REFERENCE_MASS[l];
            }
            f_left = f_right;
        }
    }

    /// Allocating variant of [`DgOperator::residual_into`].
    pub fn residual<M: FundamentalDiagram + ?Sized>(
        &self,
        state: &RoadState,
        model: &M,
        numflux: NumericalFlux,
        flux_left: f64,
        flux_right: f64,
    ) -> Vec<f64> {
        let mut out = vec![0.0; state.coeffs().len()];
        self.residual_into(state, model, numflux, flux_left, flux_right, &mut out);
        out
    }
}

/// Semi-discrete right-hand side for one road.
pub fn dg_residual<M: FundamentalDiagram + ?Sized>(
    state: &RoadState,
    model: &M,
    numflux: NumericalFlux,
    flux_left: f64,
    flux_right: f64,
) -> Result<Vec<f64>> {
    let op = DgOperator::new(state.degree())?;
    Ok(op.residual(state, model, numflux, flux_left, flux_right))
}
