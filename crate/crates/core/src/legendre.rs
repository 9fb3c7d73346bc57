//! Legendre polynomials and the Gauss / Lobatto-Legendre quadrature rules
//! on the reference interval `[-1, 1]`.

use crate::error::{Error, Result};

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;

/// Evaluates the Legendre polynomial of degree `n` at `x` by the three-term
/// recurrence `(k+1) P_{k+1} = (2k+1) x P_k - k P_{k-1}`.
pub fn legendre_eval(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * x * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Values `P_0(x), ..., P_n(x)`.
pub fn legendre_values(n: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n >= 1 {
        out.push(x);
    }
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * x * out[k] - kf * out[k - 1]) / (kf + 1.0);
        out.push(next);
    }
    out
}

/// Derivative `P_n'(x)` from `P_{k+1}' = (2k+1) P_k + P_{k-1}'`, seeded with
/// `P_0' = 0` and `P_1' = 1`.
pub fn legendre_deriv(n: usize, x: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let values = legendre_values(n, x);
    let (mut prev, mut cur) = (0.0, 1.0);
    for k in 1..n {
        let next = (2 * k + 1) as f64 * values[k] + prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Second derivative via Legendre's equation,
/// `(1-x^2) P_n'' = 2x P_n' - n(n+1) P_n`. Only used away from `x = ±1`.
fn legendre_second_deriv(n: usize, x: f64) -> f64 {
    let nf = n as f64;
    (2.0 * x * legendre_deriv(n, x) - nf * (nf + 1.0) * legendre_eval(n, x)) / (1.0 - x * x)
}

/// Coefficients of `P_{p-1}` and `P_{p+1}` in the Legendre expansion of
/// `(1 - x^2) P_p'(x)`.
pub fn a_phi_deriv_expansion(p: usize) -> Result<(f64, f64)> {
    if p == 0 {
        return Err(Error::InvalidDegree {
            degree: p,
            reason: "the expansion of (1-x^2) P_p' needs p >= 1",
        });
    }
    let pf = p as f64;
    let c = pf * (pf + 1.0) / (2.0 * pf + 1.0);
    Ok((c, -c))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuadratureKind {
    GaussLegendre,
    LobattoLegendre,
}

/// A `p + 1` point quadrature rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    kind: QuadratureKind,
    degree: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn kind(&self) -> QuadratureKind {
        self.kind
    }

    /// Polynomial degree `p` of the associated nodal basis (`p + 1` nodes).
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Highest polynomial degree integrated exactly.
    pub fn exactness(&self) -> usize {
        match self.kind {
            QuadratureKind::GaussLegendre => 2 * self.degree + 1,
            QuadratureKind::LobattoLegendre => 2 * self.degree - 1,
        }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

fn newton<F>(mut x: f64, f: F, root: usize) -> Result<f64>
where
    F: Fn(f64) -> (f64, f64),
{
    for _ in 0..NEWTON_MAX_ITER {
        let (value, slope) = f(x);
        let dx = value / slope;
        x -= dx;
        if dx.abs() <= NEWTON_TOL {
            return Ok(x);
        }
    }
    Err(Error::NoConvergence {
        root,
        iterations: NEWTON_MAX_ITER,
    })
}

/// Mirror-average the nodes so that `x_i = -x_{n-1-i}` holds exactly.
fn symmetrize(nodes: &mut [f64]) {
    let n = nodes.len();
    for i in 0..n / 2 {
        let half = 0.5 * (nodes[n - 1 - i] - nodes[i]);
        nodes[i] = -half;
        nodes[n - 1 - i] = half;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
}

/// Gauss-Legendre rule with `p + 1` nodes, the roots of `P_{p+1}`.
pub fn gauss_rule(p: usize) -> Result<QuadratureRule> {
    let n = p + 1;
    let mut nodes = Vec::with_capacity(n);
    for i in 0..n {
        let guess = -(std::f64::consts::PI * (2 * i + 1) as f64 / (2 * n) as f64).cos();
        let root = newton(guess, |x| (legendre_eval(n, x), legendre_deriv(n, x)), i)?;
        nodes.push(root);
    }
    symmetrize(&mut nodes);
    let weights = nodes
        .iter()
        .map(|&x| {
            let d = legendre_deriv(n, x);
            2.0 / ((1.0 - x * x) * d * d)
        })
        .collect();
    Ok(QuadratureRule {
        kind: QuadratureKind::GaussLegendre,
        degree: p,
        nodes,
        weights,
    })
}

/// Lobatto-Legendre rule with `p + 1` nodes: `±1` and the roots of `P_p'`.
pub fn lobatto_rule(p: usize) -> Result<QuadratureRule> {
    if p == 0 {
        return Err(Error::InvalidDegree {
            degree: p,
            reason: "a Lobatto rule needs at least the two boundary nodes (p >= 1)",
        });
    }
    let mut nodes = Vec::with_capacity(p + 1);
    nodes.push(-1.0);
    for i in 1..p {
        let guess = -(std::f64::consts::PI * i as f64 / p as f64).cos();
        let root = newton(
            guess,
            |x| (legendre_deriv(p, x), legendre_second_deriv(p, x)),
            i,
        )?;
        nodes.push(root);
    }
    nodes.push(1.0);
    symmetrize(&mut nodes);
    let scale = (p * (p + 1)) as f64;
    let weights = nodes
        .iter()
        .map(|&x| {
            let v = legendre_eval(p, x);
            2.0 / (scale * v * v)
        })
        .collect();
    Ok(QuadratureRule {
        kind: QuadratureKind::LobattoLegendre,
        degree: p,
        nodes,
        weights,
    })
}
