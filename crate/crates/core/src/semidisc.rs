//! Periodic 1D meshes, solution fields, numerical fluxes and the SBP-CPR
//! right-hand sides for linear advection and Burgers' equation.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::legendre::gauss_rule;
use crate::sbp::{m_adjoint, BasisKind, OperatorSet};

/// Uniform periodic mesh of `[x_min, x_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh1D {
    x_min: f64,
    x_max: f64,
    elements: usize,
}

impl Mesh1D {
    pub fn new(x_min: f64, x_max: f64, elements: usize) -> Result<Self> {
        if elements == 0 {
            return Err(Error::InvalidParameter("a mesh needs at least one element".into()));
        }
        if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) {
            return Err(Error::InvalidParameter(format!(
                "domain [{x_min}, {x_max}] is empty or not finite"
            )));
        }
        Ok(Self {
            x_min,
            x_max,
            elements,
        })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn elements(&self) -> usize {
        self.elements
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.elements as f64
    }

    /// `dx / 2`, the derivative of the affine map from `[-1, 1]`.
    pub fn jacobian(&self) -> f64 {
        0.5 * self.dx()
    }

    /// Left edge of element `i`; `edge(N)` is `x_max`.
    pub fn edge(&self, i: usize) -> f64 {
        if i == self.elements {
            self.x_max
        } else {
            self.x_min + i as f64 * self.dx()
        }
    }

    pub fn edges(&self) -> Vec<f64> {
        (0..=self.elements).map(|i| self.edge(i)).collect()
    }

    /// Physical coordinate of reference point `xi` in element `i`.
    pub fn to_physical(&self, element: usize, xi: f64) -> f64 {
        self.edge(element) + (xi + 1.0) * self.jacobian()
    }
}

/// Coefficients of a piecewise polynomial on a mesh, one column per element.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionField {
    mesh: Mesh1D,
    basis: BasisKind,
    p: usize,
    coeffs: DMatrix<f64>,
}

impl SolutionField {
    pub fn zeros(mesh: Mesh1D, basis: BasisKind, p: usize) -> Self {
        Self {
            mesh,
            basis,
            p,
            coeffs: DMatrix::zeros(p + 1, mesh.elements()),
        }
    }

    /// `coeffs` must be `(p + 1) x N` with one column per element.
    pub fn from_coefficients(
        mesh: Mesh1D,
        basis: BasisKind,
        p: usize,
        coeffs: DMatrix<f64>,
    ) -> Result<Self> {
        if coeffs.nrows() != p + 1 || coeffs.ncols() != mesh.elements() {
            return Err(Error::ShapeMismatch {
                rows: coeffs.nrows(),
                cols: coeffs.ncols(),
                p,
                elements: mesh.elements(),
            });
        }
        Ok(Self {
            mesh,
            basis,
            p,
            coeffs,
        })
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    pub fn basis(&self) -> BasisKind {
        self.basis
    }

    pub fn degree(&self) -> usize {
        self.p
    }

    pub fn coefficients(&self) -> &DMatrix<f64> {
        &self.coeffs
    }

    pub fn coefficients_mut(&mut self) -> &mut DMatrix<f64> {
        &mut self.coeffs
    }

    pub fn into_coefficients(self) -> DMatrix<f64> {
        self.coeffs
    }

    pub fn element(&self, i: usize) -> &[f64] {
        let n = self.p + 1;
        &self.coeffs.as_slice()[i * n..(i + 1) * n]
    }

    pub fn element_mut(&mut self, i: usize) -> &mut [f64] {
        let n = self.p + 1;
        &mut self.coeffs.as_mut_slice()[i * n..(i + 1) * n]
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|v| v.is_finite())
    }

    /// Same mesh and basis, new coefficients.
    pub fn with_coefficients(&self, coeffs: DMatrix<f64>) -> Self {
        debug_assert_eq!(coeffs.shape(), self.coeffs.shape());
        Self {
            mesh: self.mesh,
            basis: self.basis,
            p: self.p,
            coeffs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FluxKind {
    Central,
    Upwind,
    LocalLaxFriedrichs,
}

impl FluxKind {
    pub fn name(self) -> &'static str {
        match self {
            FluxKind::Central => "central",
            FluxKind::Upwind => "upwind",
            FluxKind::LocalLaxFriedrichs => "llf",
        }
    }
}

impl fmt::Display for FluxKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FluxKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "central" => Ok(FluxKind::Central),
            "upwind" => Ok(FluxKind::Upwind),
            "llf" => Ok(FluxKind::LocalLaxFriedrichs),
            other => Err(format!(
                "unknown flux `{other}` (expected central, upwind or llf)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Problem {
    LinearAdvection,
    Burgers,
}

impl Problem {
    pub fn name(self) -> &'static str {
        match self {
            Problem::LinearAdvection => "advection",
            Problem::Burgers => "burgers",
        }
    }

    /// Physical flux `f(u)`.
    pub fn flux(self, u: f64) -> f64 {
        match self {
            Problem::LinearAdvection => u,
            Problem::Burgers => 0.5 * u * u,
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Problem {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "advection" => Ok(Problem::LinearAdvection),
            "burgers" => Ok(Problem::Burgers),
            other => Err(format!(
                "unknown problem `{other}` (expected advection or burgers)"
            )),
        }
    }
}

/// Central and upwind fluxes go with advection, local Lax-Friedrichs with
/// Burgers.
pub fn check_pairing(kind: FluxKind, problem: Problem) -> Result<()> {
    let ok = matches!(
        (kind, problem),
        (FluxKind::Central | FluxKind::Upwind, Problem::LinearAdvection)
            | (FluxKind::LocalLaxFriedrichs, Problem::Burgers)
    );
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidPairing {
            flux: kind.name(),
            problem: problem.name(),
        })
    }
}

fn flux_value(kind: FluxKind, u_minus: f64, u_plus: f64) -> f64 {
    match kind {
        FluxKind::Central => 0.5 * (u_minus + u_plus),
        FluxKind::Upwind => u_minus,
        FluxKind::LocalLaxFriedrichs => {
            let speed = u_minus.abs().max(u_plus.abs());
            0.25 * (u_minus * u_minus + u_plus * u_plus) - 0.5 * speed * (u_plus - u_minus)
        }
    }
}

/// `f^num(u_-, u_+)` at an interface with left state `u_minus`.
pub fn numerical_flux(kind: FluxKind, problem: Problem, u_minus: f64, u_plus: f64) -> Result<f64> {
    check_pairing(kind, problem)?;
    Ok(flux_value(kind, u_minus, u_plus))
}

/// Left (`x = -1`) and right (`x = +1`) traces of every element.
pub fn element_traces(field: &SolutionField, ops: &OperatorSet) -> DMatrix<f64> {
    ops.restriction() * field.coefficients()
}

/// `(u_-, u_+)` at interface `k`, the left edge of element `k`. Interface 0
/// couples the last element to the first.
pub fn interface_states(field: &SolutionField, ops: &OperatorSet) -> Vec<(f64, f64)> {
    let traces = element_traces(field, ops);
    let n = field.mesh().elements();
    (0..n)
        .map(|k| {
            let left = if k == 0 { n - 1 } else { k - 1 };
            (traces[(1, left)], traces[(0, k)])
        })
        .collect()
}

/// Interface fluxes, indexed like [`interface_states`].
fn interface_fluxes(
    field: &SolutionField,
    ops: &OperatorSet,
    kind: FluxKind,
    problem: Problem,
) -> Result<Vec<f64>> {
    check_pairing(kind, problem)?;
    Ok(interface_states(field, ops)
        .into_iter()
        .map(|(um, up)| flux_value(kind, um, up))
        .collect())
}

fn check_field(field: &SolutionField, ops: &OperatorSet) -> Result<()> {
    if field.basis() != ops.basis() || field.degree() != ops.degree() {
        return Err(Error::InvalidParameter(format!(
            "field ({}, p = {}) does not match operators ({}, p = {})",
            field.basis(),
            field.degree(),
            ops.basis(),
            ops.degree()
        )));
    }
    Ok(())
}

/// `du/dt = -D u - C (f^num - R u)`, mapped to the physical element.
pub fn advection_rhs(field: &SolutionField, ops: &OperatorSet, flux: FluxKind) -> Result<SolutionField> {
    check_field(field, ops)?;
    let fnum = interface_fluxes(field, ops, flux, Problem::LinearAdvection)?;
    let n = field.mesh().elements();
    let inv_jac = 1.0 / field.mesh().jacobian();
    let traces = element_traces(field, ops);
    let mut rhs = -(ops.derivative() * field.coefficients());
    let c = ops.correction();
    for i in 0..n {
        let right = fnum[(i + 1) % n];
        let gl = fnum[i] - traces[(0, i)];
        let gr = right - traces[(1, i)];
        let mut col = rhs.column_mut(i);
        col -= c.column(0) * gl + c.column(1) * gr;
        col *= inv_jac;
    }
    Ok(field.with_coefficients(rhs))
}

/// Split-form Burgers right-hand side
/// `-1/3 D U u - 1/3 U* D u - C (f^num - 1/3 R U u - 1/6 (R u)^2)`, where
/// `U` is multiplication by `u` and `U*` its `M`-adjoint.
pub fn burgers_rhs(field: &SolutionField, ops: &OperatorSet, flux: FluxKind) -> Result<SolutionField> {
    check_field(field, ops)?;
    let fnum = interface_fluxes(field, ops, flux, Problem::Burgers)?;
    let n = field.mesh().elements();
    let inv_jac = 1.0 / field.mesh().jacobian();
    let d = ops.derivative();
    let r = ops.restriction();
    let c = ops.correction();
    let mut rhs = DMatrix::zeros(ops.size(), n);
    for i in 0..n {
        let u = DVector::from_column_slice(field.element(i));
        let du = d * &u;
        let (uu, adjoint_term) = if ops.basis().is_nodal() {
            (u.component_mul(&u), u.component_mul(&du))
        } else {
            let umul = ops.field_multiplication(u.as_slice());
            let uu = &umul * &u;
            (uu, m_adjoint(ops, &umul) * &du)
        };
        let r_uu = r * &uu;
        let r_u = r * &u;
        let right = fnum[(i + 1) % n];
        let gl = fnum[i] - r_uu[0] / 3.0 - r_u[0] * r_u[0] / 6.0;
        let gr = right - r_uu[1] / 3.0 - r_u[1] * r_u[1] / 6.0;
        let mut col = rhs.column_mut(i);
        col.copy_from(&((d * &uu + adjoint_term) * (-1.0 / 3.0)));
        col -= c.column(0) * gl + c.column(1) * gr;
        col *= inv_jac;
    }
    Ok(field.with_coefficients(rhs))
}

/// Right-hand side of `problem` without artificial dissipation.
pub fn rhs(problem: Problem, field: &SolutionField, ops: &OperatorSet, flux: FluxKind) -> Result<SolutionField> {
    match problem {
        Problem::LinearAdvection => advection_rhs(field, ops, flux),
        Problem::Burgers => burgers_rhs(field, ops, flux),
    }
}

/// `sum_i J_i u_i^T M u_i`.
pub fn energy(field: &SolutionField, ops: &OperatorSet) -> f64 {
    let jac = field.mesh().jacobian();
    (0..field.mesh().elements())
        .map(|i| jac * ops.norm_sq(field.element(i)))
        .sum()
}

/// `sum_i J_i 1^T M u_i`.
pub fn mass(field: &SolutionField, ops: &OperatorSet) -> f64 {
    let jac = field.mesh().jacobian();
    (0..field.mesh().elements())
        .map(|i| jac * ops.integral(field.element(i)))
        .sum()
}

/// `sum_i J_i <u_i, v_i>_M`.
pub fn global_inner(u: &SolutionField, v: &SolutionField, ops: &OperatorSet) -> f64 {
    let jac = u.mesh().jacobian();
    (0..u.mesh().elements())
        .map(|i| jac * ops.inner(u.element(i), v.element(i)))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialCondition {
    /// `exp(-coefficient (x - center)^2)`
    Gaussian { center: f64, coefficient: f64 },
    /// 1 on `[lo, hi]`, 0 elsewhere.
    Step { lo: f64, hi: f64 },
    /// `sin(pi x) + offset`
    SinePlus { offset: f64 },
    Constant { value: f64 },
}

impl InitialCondition {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            InitialCondition::Gaussian {
                center,
                coefficient,
            } => (-coefficient * (x - center).powi(2)).exp(),
            InitialCondition::Step { lo, hi } => {
                if (lo..=hi).contains(&x) {
                    1.0
                } else {
                    0.0
                }
            }
            InitialCondition::SinePlus { offset } => (std::f64::consts::PI * x).sin() + offset,
            InitialCondition::Constant { value } => value,
        }
    }
}

/// Discretises `u0`: point values at the mapped nodes for nodal bases, an L2
/// projection for the modal basis.
pub fn init_field<F: Fn(f64) -> f64>(mesh: Mesh1D, ops: &OperatorSet, u0: F) -> Result<SolutionField> {
    let n = ops.size();
    let mut coeffs = DMatrix::zeros(n, mesh.elements());
    match ops.nodes() {
        Some(rule) => {
            for i in 0..mesh.elements() {
                for (k, &xi) in rule.nodes().iter().enumerate() {
                    coeffs[(k, i)] = u0(mesh.to_physical(i, xi));
                }
            }
        }
        None => {
            let quad = gauss_rule((4 * n).max(32))?;
            let phi: Vec<Vec<f64>> = quad
                .nodes()
                .iter()
                .map(|&x| crate::legendre::legendre_values(ops.degree(), x))
                .collect();
            for i in 0..mesh.elements() {
                for (q, (&xi, &w)) in quad.nodes().iter().zip(quad.weights()).enumerate() {
                    let value = w * u0(mesh.to_physical(i, xi));
                    for k in 0..n {
                        coeffs[(k, i)] += value * phi[q][k];
                    }
                }
                for k in 0..n {
                    coeffs[(k, i)] /= ops.mass_diagonal()[k];
                }
            }
        }
    }
    SolutionField::from_coefficients(mesh, ops.basis(), ops.degree(), coeffs)
}
