//! Quadrature rules on the reference interval `[-1, 1]`.

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// `n`-point rule, exact for polynomials of degree `2n - 1`.
    ///
    /// Nodes are the roots of `P_n`, found by Newton iteration from the
    /// usual cosine initial guesses. Returned in increasing order.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫_{-1}^{1} g(ξ) dξ` approximated by the rule.
    pub fn integrate(&self, mut g: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * g(x))
            .sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Lobatto rule with `n` points (2 or 3) on `[-1, 1]`, weights
/// normalized to sum to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussLobatto {
    n: usize,
}

const LOBATTO2_NODES: [f64; 2] = [-1.0, 1.0];
const LOBATTO2_WEIGHTS: [f64; 2] = [0.5, 0.5];
const LOBATTO3_NODES: [f64; 3] = [-1.0, 0.0, 1.0];
const LOBATTO3_WEIGHTS: [f64; 3] = [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0];

impl GaussLobatto {
    /// Smallest rule whose exactness degree `2n - 3` covers polynomial
    /// degree `k`, with at least two points.
    pub fn for_degree(k: usize) -> Self {
        assert!(k <= 3, "degree {k} not supported");
        GaussLobatto {
            n: if k <= 1 { 2 } else { 3 },
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes(&self) -> &'static [f64] {
        if self.n == 2 {
            &LOBATTO2_NODES
        } else {
            &LOBATTO3_NODES
        }
    }

    pub fn weights(&self) -> &'static [f64] {
        if self.n == 2 {
            &LOBATTO2_WEIGHTS
        } else {
            &LOBATTO3_WEIGHTS
        }
    }

    /// Smallest normalized weight, the factor in the bound-preserving time
    /// step restriction.
    pub fn min_weight(&self) -> f64 {
        self.weights().iter().copied().fold(f64::INFINITY, f64::min)
    }
}
