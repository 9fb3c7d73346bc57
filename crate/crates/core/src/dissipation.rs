//! Artificial dissipation `-eps A^s u` with `A = M^{-1} D^T M a D` and
//! `a(x) = 1 - x^2`, and the per-element choice of `eps` that cancels the
//! `dt^2` energy production of an explicit Euler step.
//!
//! For one element the norm after an Euler step with dissipation is
//!
//! ```text
//! |u+|^2 = |u|^2 + 2 dt <u, du> + dt (A eps^2 + B eps + C)
//! A = dt |A^s u|^2
//! B = -2 <u, A^s u> - 2 dt <du, A^s u>
//! C = dt |du|^2
//! ```
//!
//! so choosing `eps` as the smaller root of the quadratic leaves exactly the
//! semidiscrete energy rate. All inner products are taken with the reference
//! element mass matrix and the undissipated `du/dt` as assembled by the
//! right-hand side (already divided by the Jacobian). `A^s` acts in physical
//! coordinates, i.e. the reference operator times `J^{-2s}`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sbp::{dissipation_operator, multiplication_operator, OperatorSet, LEGENDRE_WEIGHT};
use crate::semidisc::SolutionField;

/// Below this `A` is treated as zero.
const TINY_QUADRATIC: f64 = 1e-300;
/// Negative discriminants within this fraction of `B^2` are rounding noise.
const DISCRIMINANT_SNAP: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DissipationMode {
    Off,
    Fixed(f64),
    Adaptive,
}

impl DissipationMode {
    pub fn name(&self) -> &'static str {
        match self {
            DissipationMode::Off => "off",
            DissipationMode::Fixed(_) => "fixed",
            DissipationMode::Adaptive => "adaptive",
        }
    }
}

/// Order `s` and strength mode. The weight is always `a(x) = 1 - x^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipationConfig {
    order: usize,
    mode: DissipationMode,
}

impl DissipationConfig {
    pub fn new(order: usize, mode: DissipationMode) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidParameter(
                "dissipation order must be at least 1".into(),
            ));
        }
        if let DissipationMode::Fixed(eps) = mode {
            if !(eps >= 0.0 && eps.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "fixed dissipation strength must be finite and >= 0, got {eps}"
                )));
            }
        }
        Ok(Self { order, mode })
    }

    pub fn off() -> Self {
        Self {
            order: 1,
            mode: DissipationMode::Off,
        }
    }

    pub fn adaptive(order: usize) -> Result<Self> {
        Self::new(order, DissipationMode::Adaptive)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn mode(&self) -> DissipationMode {
        self.mode
    }
}

/// Coefficients of `A eps^2 + B eps + C = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quadratic {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Quadratic {
    pub fn discriminant(&self) -> f64 {
        self.b * self.b - 4.0 * self.a * self.c
    }

    pub fn eval(&self, eps: f64) -> f64 {
        (self.a * eps + self.b) * eps + self.c
    }
}

/// Per-element quadratic coefficients from the element state `u`, its
/// undissipated time derivative `dudt` and `asu = A^s u`.
pub fn compute_abc(u: &[f64], dudt: &[f64], asu: &[f64], dt: f64, ops: &OperatorSet) -> Quadratic {
    Quadratic {
        a: dt * ops.norm_sq(asu),
        b: -2.0 * ops.inner(u, asu) - 2.0 * dt * ops.inner(dudt, asu),
        c: dt * ops.norm_sq(dudt),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonChoice {
    pub epsilon: f64,
    pub clamped: bool,
    pub discriminant: f64,
    /// The larger root, reported but never applied.
    pub larger_root: Option<f64>,
}

/// Smaller non-negative root of the energy quadratic, or zero (clamped) when
/// no such root exists.
pub fn adaptive_epsilon(q: Quadratic) -> EpsilonChoice {
    let Quadratic { a, b, c } = q;
    let mut disc = q.discriminant();
    if disc < 0.0 && disc >= -DISCRIMINANT_SNAP * b * b {
        disc = 0.0;
    }
    let clamp = |discriminant| EpsilonChoice {
        epsilon: 0.0,
        clamped: true,
        discriminant,
        larger_root: None,
    };
    if a < TINY_QUADRATIC {
        // A^s u vanishes, so B does too and only C remains
        return EpsilonChoice {
            epsilon: 0.0,
            clamped: c != 0.0,
            discriminant: disc,
            larger_root: None,
        };
    }
    if disc < 0.0 || -b < 0.0 {
        return clamp(disc);
    }
    let sq = disc.sqrt();
    // 2C / (-B + sqrt) avoids the cancellation in (-B - sqrt) / 2A
    let epsilon = if c == 0.0 { 0.0 } else { 2.0 * c / (-b + sq) };
    EpsilonChoice {
        epsilon,
        clamped: false,
        discriminant: disc,
        larger_root: Some((-b + sq) / (2.0 * a)),
    }
}

/// `2 <u, A^s u> / (eps |A^s u|^2)`, the largest step for which an Euler step
/// of the pure dissipation does not increase the norm.
pub fn max_stable_dt(u: &[f64], asu: &[f64], epsilon: f64, ops: &OperatorSet) -> f64 {
    let norm = ops.norm_sq(asu);
    if epsilon == 0.0 || norm == 0.0 {
        return f64::INFINITY;
    }
    2.0 * ops.inner(u, asu) / (epsilon * norm)
}

/// `du/dt - eps_i A^s u_i` element by element.
pub fn apply_dissipation(
    dudt: &SolutionField,
    u: &SolutionField,
    a_s: &DMatrix<f64>,
    eps_per_element: &[f64],
) -> SolutionField {
    let correction = a_s * u.coefficients();
    let mut out = dudt.coefficients().clone();
    for (i, &eps) in eps_per_element.iter().enumerate() {
        if eps != 0.0 {
            let mut col = out.column_mut(i);
            col.axpy(-eps, &correction.column(i), 1.0);
        }
    }
    dudt.with_coefficients(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsilonReport {
    pub element: usize,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub discriminant: f64,
    pub epsilon: f64,
    pub larger_root: Option<f64>,
    pub clamped: bool,
    pub dt_bound: f64,
}

/// Dissipation configuration with its operator `A^s` materialised once.
#[derive(Debug, Clone)]
pub struct Dissipation {
    config: DissipationConfig,
    operator: Option<DMatrix<f64>>,
}

impl Dissipation {
    pub fn new(ops: &OperatorSet, config: DissipationConfig) -> Result<Self> {
        let operator = match config.mode {
            DissipationMode::Off => None,
            _ => {
                let amul = multiplication_operator(ops, &LEGENDRE_WEIGHT)?;
                Some(dissipation_operator(ops, &amul, config.order)?)
            }
        };
        Ok(Self { config, operator })
    }

    pub fn config(&self) -> DissipationConfig {
        self.config
    }

    /// `A^s`, or `None` when dissipation is off.
    pub fn operator(&self) -> Option<&DMatrix<f64>> {
        self.operator.as_ref()
    }

    /// Dissipated time derivative for an Euler step of size `dt`, with one
    /// report per element (empty when dissipation is off).
    pub fn apply(
        &self,
        ops: &OperatorSet,
        u: &SolutionField,
        dudt: &SolutionField,
        dt: f64,
    ) -> (SolutionField, Vec<EpsilonReport>) {
        let Some(a_s) = &self.operator else {
            return (dudt.clone(), Vec::new());
        };
        let asu = a_s * u.coefficients() * physical_scale(u.mesh().jacobian(), self.config.order);
        let n = ops.size();
        let reports: Vec<EpsilonReport> = (0..u.mesh().elements())
            .map(|i| {
                let ue = u.element(i);
                let asu_e = &asu.as_slice()[i * n..(i + 1) * n];
                let q = compute_abc(ue, dudt.element(i), asu_e, dt, ops);
                let choice = match self.config.mode {
                    DissipationMode::Adaptive => adaptive_epsilon(q),
                    DissipationMode::Fixed(eps) => EpsilonChoice {
                        epsilon: eps,
                        clamped: false,
                        discriminant: q.discriminant(),
                        larger_root: None,
                    },
                    DissipationMode::Off => unreachable!("no operator when off"),
                };
                EpsilonReport {
                    element: i,
                    a: q.a,
                    b: q.b,
                    c: q.c,
                    discriminant: choice.discriminant,
                    epsilon: choice.epsilon,
                    larger_root: choice.larger_root,
                    clamped: choice.clamped,
                    dt_bound: max_stable_dt(ue, asu_e, choice.epsilon, ops),
                }
            })
            .collect();
        let mut out = dudt.coefficients().clone();
        for r in &reports {
            if r.epsilon != 0.0 {
                let mut col = out.column_mut(r.element);
                col.axpy(-r.epsilon, &asu.column(r.element), 1.0);
            }
        }
        (dudt.with_coefficients(out), reports)
    }
}

/// Factor `J^{-2s}` turning the reference `A^s` into its physical form, where
/// each derivative is `D / J`. Fixed strengths are therefore physical
/// viscosities; the adaptive strength is invariant under this rescaling up to
/// its reciprocal.
pub fn physical_scale(jacobian: f64, order: usize) -> f64 {
    jacobian.powi(-2 * order as i32)
}

/// `A^s u` for a single element vector.
pub fn element_dissipation(a_s: &DMatrix<f64>, u: &[f64]) -> DVector<f64> {
    a_s * DVector::from_column_slice(u)
}
