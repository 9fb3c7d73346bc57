//! Summation-by-parts operator sets for nodal (Gauss, Lobatto) and modal
//! Legendre bases, together with multiplication operators and the
//! artificial dissipation operator built from them.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::legendre::{gauss_rule, legendre_eval, legendre_values, lobatto_rule, QuadratureRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BasisKind {
    GaussNodal,
    LobattoNodal,
    ModalLegendre,
}

impl BasisKind {
    pub const ALL: [BasisKind; 3] = [
        BasisKind::GaussNodal,
        BasisKind::LobattoNodal,
        BasisKind::ModalLegendre,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BasisKind::GaussNodal => "gauss",
            BasisKind::LobattoNodal => "lobatto",
            BasisKind::ModalLegendre => "modal",
        }
    }

    pub fn is_nodal(self) -> bool {
        !matches!(self, BasisKind::ModalLegendre)
    }
}

impl fmt::Display for BasisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BasisKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gauss" => Ok(BasisKind::GaussNodal),
            "lobatto" => Ok(BasisKind::LobattoNodal),
            "modal" => Ok(BasisKind::ModalLegendre),
            other => Err(format!(
                "unknown basis `{other}` (expected gauss, lobatto or modal)"
            )),
        }
    }
}

/// Quadrature data for exact L2 projections in the modal basis: nodes,
/// weights, and the Legendre table `phi[q][n] = P_n(x_q)`.
#[derive(Debug, Clone)]
struct ProjectionQuadrature {
    rule: QuadratureRule,
    phi: Vec<Vec<f64>>,
}

/// The matrices `M, D, R, B, C` of one basis on the reference element.
#[derive(Debug, Clone)]
pub struct OperatorSet {
    basis: BasisKind,
    p: usize,
    nodes: Option<QuadratureRule>,
    mass: DMatrix<f64>,
    mass_diag: DVector<f64>,
    derivative: DMatrix<f64>,
    restriction: DMatrix<f64>,
    boundary: DMatrix<f64>,
    correction: DMatrix<f64>,
    projection: Option<ProjectionQuadrature>,
}

fn barycentric_weights(x: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|j| {
            let prod: f64 = (0..x.len())
                .filter(|&k| k != j)
                .map(|k| x[j] - x[k])
                .product();
            1.0 / prod
        })
        .collect()
}

/// Lagrange basis functions through `nodes` evaluated at `x`.
fn lagrange_at(nodes: &[f64], bary: &[f64], x: f64) -> Vec<f64> {
    if let Some(j) = nodes.iter().position(|&xj| xj == x) {
        let mut out = vec![0.0; nodes.len()];
        out[j] = 1.0;
        return out;
    }
    let terms: Vec<f64> = nodes
        .iter()
        .zip(bary)
        .map(|(&xj, &wj)| wj / (x - xj))
        .collect();
    let denom: f64 = terms.iter().sum();
    terms.into_iter().map(|t| t / denom).collect()
}

fn lagrange_derivative_matrix(nodes: &[f64]) -> DMatrix<f64> {
    let n = nodes.len();
    let bary = barycentric_weights(nodes);
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = (bary[j] / bary[i]) / (nodes[i] - nodes[j]);
                d[(i, j)] = v;
                diag -= v;
            }
        }
        d[(i, i)] = diag;
    }
    d
}

/// `max |M D + D^T M - R^T B R|` for arbitrary matrices.
pub fn sbp_residual(
    mass: &DMatrix<f64>,
    derivative: &DMatrix<f64>,
    restriction: &DMatrix<f64>,
    boundary: &DMatrix<f64>,
) -> f64 {
    let md = mass * derivative;
    let lhs = &md + md.transpose();
    let rhs = restriction.transpose() * boundary * restriction;
    (lhs - rhs).amax()
}

impl OperatorSet {
    pub fn new(basis: BasisKind, p: usize) -> Result<Self> {
        build_operators(basis, p)
    }

    pub fn basis(&self) -> BasisKind {
        self.basis
    }

    pub fn degree(&self) -> usize {
        self.p
    }

    /// Number of coefficients per element, `p + 1`.
    pub fn size(&self) -> usize {
        self.p + 1
    }

    /// Quadrature rule backing a nodal basis; `None` for the modal basis.
    pub fn nodes(&self) -> Option<&QuadratureRule> {
        self.nodes.as_ref()
    }

    pub fn mass(&self) -> &DMatrix<f64> {
        &self.mass
    }

    pub fn mass_diagonal(&self) -> &DVector<f64> {
        &self.mass_diag
    }

    pub fn derivative(&self) -> &DMatrix<f64> {
        &self.derivative
    }

    pub fn restriction(&self) -> &DMatrix<f64> {
        &self.restriction
    }

    pub fn boundary(&self) -> &DMatrix<f64> {
        &self.boundary
    }

    pub fn correction(&self) -> &DMatrix<f64> {
        &self.correction
    }

    /// `M^{-1} v`. All supported bases have a diagonal `M`.
    pub fn apply_mass_inverse(&self, v: &DVector<f64>) -> DVector<f64> {
        v.component_div(&self.mass_diag)
    }

    /// `M^{-1} X` for a matrix.
    pub fn mass_inverse_mul(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = x.clone();
        for (i, mut row) in out.row_iter_mut().enumerate() {
            row /= self.mass_diag[i];
        }
        out
    }

    /// `<u, v>_M = u^T M v` on the reference element.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        u.iter()
            .zip(v)
            .zip(self.mass_diag.iter())
            .map(|((a, b), w)| a * w * b)
            .sum()
    }

    pub fn norm_sq(&self, u: &[f64]) -> f64 {
        self.inner(u, u)
    }

    /// `1^T M u`, the reference-element integral. In the modal basis the
    /// constant `1` is the first unit vector.
    pub fn integral(&self, u: &[f64]) -> f64 {
        match self.nodes {
            Some(_) => u.iter().zip(self.mass_diag.iter()).map(|(a, w)| a * w).sum(),
            None => self.mass_diag[0] * u[0],
        }
    }

    /// Coefficient vector representing `P_n` in this basis.
    pub fn legendre_vector(&self, n: usize) -> DVector<f64> {
        match &self.nodes {
            Some(rule) => DVector::from_iterator(
                self.size(),
                rule.nodes().iter().map(|&x| legendre_eval(n, x)),
            ),
            None => {
                let mut v = DVector::zeros(self.size());
                if n <= self.p {
                    v[n] = 1.0;
                }
                v
            }
        }
    }

    /// Vandermonde matrix `V[i][j] = P_j(xi_i)` mapping modal coefficients to
    /// nodal values. The identity for the modal basis.
    pub fn vandermonde(&self) -> DMatrix<f64> {
        match &self.nodes {
            Some(rule) => {
                let n = self.size();
                let mut v = DMatrix::zeros(n, n);
                for (i, &x) in rule.nodes().iter().enumerate() {
                    for (j, value) in legendre_values(self.p, x).into_iter().enumerate() {
                        v[(i, j)] = value;
                    }
                }
                v
            }
            None => DMatrix::identity(self.size(), self.size()),
        }
    }

    /// Evaluates the polynomial with coefficients `coeffs` at reference
    /// coordinate `x`.
    pub fn evaluate(&self, coeffs: &[f64], x: f64) -> f64 {
        match &self.nodes {
            Some(rule) => {
                let bary = barycentric_weights(rule.nodes());
                lagrange_at(rule.nodes(), &bary, x)
                    .iter()
                    .zip(coeffs)
                    .map(|(l, c)| l * c)
                    .sum()
            }
            None => legendre_values(self.p, x)
                .iter()
                .zip(coeffs)
                .map(|(phi, c)| phi * c)
                .sum(),
        }
    }

    /// Matrix of `v -> proj(f v)`, where `f` is evaluated pointwise: diagonal
    /// collocation for nodal bases, exact L2 projection in the modal basis
    /// (exact as long as `f` has degree at most `p`).
    pub(crate) fn multiplication_matrix<F: Fn(f64) -> f64>(&self, f: F) -> DMatrix<f64> {
        match &self.nodes {
            Some(rule) => DMatrix::from_diagonal(&DVector::from_iterator(
                self.size(),
                rule.nodes().iter().map(|&x| f(x)),
            )),
            None => {
                let values: Vec<f64> = self
                    .projection_quadrature()
                    .rule
                    .nodes()
                    .iter()
                    .map(|&x| f(x))
                    .collect();
                self.modal_product(&values)
            }
        }
    }

    /// Matrix of `v -> proj(u v)` where `u` is given by its own coefficients
    /// in this basis.
    pub fn field_multiplication(&self, coeffs: &[f64]) -> DMatrix<f64> {
        match &self.nodes {
            Some(_) => DMatrix::from_diagonal(&DVector::from_column_slice(coeffs)),
            None => {
                let proj = self.projection_quadrature();
                let values: Vec<f64> = proj
                    .phi
                    .iter()
                    .map(|row| row.iter().zip(coeffs).map(|(a, b)| a * b).sum())
                    .collect();
                self.modal_product(&values)
            }
        }
    }

    fn projection_quadrature(&self) -> &ProjectionQuadrature {
        self.projection
            .as_ref()
            .expect("modal operator sets carry projection data")
    }

    /// `U[k][j] = (1/||P_k||^2) sum_q w_q P_k(x_q) f(x_q) P_j(x_q)`.
    fn modal_product(&self, f_values: &[f64]) -> DMatrix<f64> {
        let proj = self.projection_quadrature();
        let n = self.size();
        let mut out = DMatrix::zeros(n, n);
        for (q, (&w, phi)) in proj.rule.weights().iter().zip(&proj.phi).enumerate() {
            let wf = w * f_values[q];
            for j in 0..n {
                let wfj = wf * phi[j];
                for k in 0..n {
                    out[(k, j)] += wfj * phi[k];
                }
            }
        }
        for k in 0..n {
            let scale = 1.0 / self.mass_diag[k];
            for j in 0..n {
                out[(k, j)] *= scale;
            }
        }
        out
    }
}

/// Constructs the SBP operator set of `basis` at degree `p`.
pub fn build_operators(basis: BasisKind, p: usize) -> Result<OperatorSet> {
    let n = p + 1;
    let boundary = DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, 1.0]));
    let (nodes, mass_diag, derivative, restriction, projection) = match basis {
        BasisKind::GaussNodal | BasisKind::LobattoNodal => {
            let rule = if basis == BasisKind::GaussNodal {
                gauss_rule(p)?
            } else {
                lobatto_rule(p)?
            };
            let mass_diag = DVector::from_column_slice(rule.weights());
            let derivative = lagrange_derivative_matrix(rule.nodes());
            let bary = barycentric_weights(rule.nodes());
            let mut restriction = DMatrix::zeros(2, n);
            for (row, x) in [(0, -1.0), (1, 1.0)] {
                for (j, l) in lagrange_at(rule.nodes(), &bary, x).into_iter().enumerate() {
                    restriction[(row, j)] = l;
                }
            }
            (Some(rule), mass_diag, derivative, restriction, None)
        }
        BasisKind::ModalLegendre => {
            let mass_diag =
                DVector::from_iterator(n, (0..n).map(|k| 2.0 / (2 * k + 1) as f64));
            let mut derivative = DMatrix::zeros(n, n);
            for j in 0..n {
                for i in (0..j).rev().step_by(2) {
                    derivative[(i, j)] = (2 * i + 1) as f64;
                }
            }
            let mut restriction = DMatrix::zeros(2, n);
            for j in 0..n {
                restriction[(0, j)] = if j % 2 == 0 { 1.0 } else { -1.0 };
                restriction[(1, j)] = 1.0;
            }
            // products of degree <= 3p + 2 integrate exactly
            let points = (3 * p + 3).div_ceil(2).max(1);
            let rule = gauss_rule(points - 1)?;
            let phi = rule.nodes().iter().map(|&x| legendre_values(p, x)).collect();
            let projection = ProjectionQuadrature { rule, phi };
            (None, mass_diag, derivative, restriction, Some(projection))
        }
    };
    let mass = DMatrix::from_diagonal(&mass_diag);
    let mut correction = restriction.transpose() * &boundary;
    for (i, mut row) in correction.row_iter_mut().enumerate() {
        row /= mass_diag[i];
    }
    Ok(OperatorSet {
        basis,
        p,
        nodes,
        mass,
        mass_diag,
        derivative,
        restriction,
        boundary,
        correction,
        projection,
    })
}

/// `max |M D + D^T M - R^T B R|`.
pub fn check_sbp(ops: &OperatorSet) -> f64 {
    sbp_residual(&ops.mass, &ops.derivative, &ops.restriction, &ops.boundary)
}

/// Representation of multiplication by a polynomial `a`, followed by the
/// basis' projection back onto degree `p`.
#[derive(Debug, Clone)]
pub struct MultiplicationOperator {
    matrix: DMatrix<f64>,
    coefficients: Vec<f64>,
}

impl MultiplicationOperator {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Monomial coefficients `[a_0, a_1, a_2]` of the represented function.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn is_legendre_weight(&self) -> bool {
        let c = &self.coefficients;
        c.len() == 3 && c[0] == 1.0 && c[1] == 0.0 && c[2] == -1.0
    }
}

/// Monomial coefficients of `a(x) = 1 - x^2`.
pub const LEGENDRE_WEIGHT: [f64; 3] = [1.0, 0.0, -1.0];

/// Builds the multiplication operator of `a(x) = sum_k a_k x^k`, degree <= 2.
pub fn multiplication_operator(
    ops: &OperatorSet,
    coefficients: &[f64],
) -> Result<MultiplicationOperator> {
    let degree = coefficients.iter().rposition(|&c| c != 0.0).unwrap_or(0);
    if degree > 2 {
        return Err(Error::UnsupportedCoefficient { degree });
    }
    let mut padded = [0.0; 3];
    padded[..=degree].copy_from_slice(&coefficients[..=degree]);
    let a = |x: f64| padded[0] + x * (padded[1] + x * padded[2]);
    Ok(MultiplicationOperator {
        matrix: ops.multiplication_matrix(a),
        coefficients: padded.to_vec(),
    })
}

/// `M^{-1} X^T M`.
pub fn m_adjoint(ops: &OperatorSet, x: &DMatrix<f64>) -> DMatrix<f64> {
    let xt_m = x.transpose() * &ops.mass;
    ops.mass_inverse_mul(&xt_m)
}

fn check_order(s: usize) -> Result<()> {
    if s == 0 {
        return Err(Error::InvalidParameter(
            "dissipation order s must be at least 1".into(),
        ));
    }
    Ok(())
}

/// `M^{-1} D^T M a D`, the order-one dissipation operator.
fn dissipation_base(ops: &OperatorSet, amul: &MultiplicationOperator) -> DMatrix<f64> {
    let inner = ops.derivative.transpose() * &ops.mass * &amul.matrix * &ops.derivative;
    ops.mass_inverse_mul(&inner)
}

/// `A^s = (M^{-1} D^T M a D)^s`. The dissipative term is `-eps A^s u`.
pub fn dissipation_operator(
    ops: &OperatorSet,
    amul: &MultiplicationOperator,
    s: usize,
) -> Result<DMatrix<f64>> {
    check_order(s)?;
    Ok(dissipation_base(ops, amul).pow(s as u32))
}

/// The direct discretisation `(-1)^{s+1} (D a D)^s`. Not conservative unless
/// the projection in `a` preserves boundary values (Lobatto nodes).
pub fn naive_dissipation_operator(
    ops: &OperatorSet,
    amul: &MultiplicationOperator,
    s: usize,
) -> Result<DMatrix<f64>> {
    check_order(s)?;
    let base = &ops.derivative * &amul.matrix * &ops.derivative;
    let sign = if s % 2 == 1 { 1.0 } else { -1.0 };
    Ok(base.pow(s as u32) * sign)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenEntry {
    pub n: usize,
    /// Rayleigh quotient `<P_n, -A P_n>_M / ||P_n||_M^2`.
    pub eigenvalue: f64,
    /// `||-A P_n - lambda P_n||_inf / (||P_n||_inf max(1, |lambda|))`.
    pub residual: f64,
}

/// Rayleigh quotients of the order-one dissipation operator on the Legendre
/// polynomials `P_0, ..., P_p`.
pub fn eigen_check(ops: &OperatorSet, amul: &MultiplicationOperator) -> Result<Vec<EigenEntry>> {
    if !amul.is_legendre_weight() {
        return Err(Error::NotLegendreWeight {
            coefficients: amul.coefficients.clone(),
        });
    }
    let op = dissipation_base(ops, amul);
    Ok((0..=ops.p)
        .map(|n| {
            let phi = ops.legendre_vector(n);
            let w = -(&op * &phi);
            let lambda = ops.inner(phi.as_slice(), w.as_slice()) / ops.norm_sq(phi.as_slice());
            let residual = (&w - &phi * lambda).amax() / (phi.amax() * lambda.abs().max(1.0));
            EigenEntry {
                n,
                eigenvalue: lambda,
                residual,
            }
        })
        .collect())
}
