//! Explicit Euler and SSP-RK(3,3) time stepping with artificial dissipation,
//! and the monitored simulation loop.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::config::ExperimentConfig;
use crate::dissipation::{Dissipation, DissipationConfig, EpsilonReport};
use crate::error::{Error, Result};
use crate::sbp::{build_operators, BasisKind, OperatorSet};
use crate::semidisc::{check_pairing, energy, init_field, mass, rhs, FluxKind, Mesh1D, Problem, SolutionField};

/// Energy growth factor over the initial energy that counts as a blow-up.
pub const BLOW_UP_FACTOR: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_final: f64,
    num_steps: usize,
}

impl TimeGrid {
    pub fn new(t_final: f64, num_steps: usize) -> Result<Self> {
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "final time must be positive, got {t_final}"
            )));
        }
        if num_steps == 0 {
            return Err(Error::InvalidParameter("number of steps must be positive".into()));
        }
        Ok(Self { t_final, num_steps })
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn num_steps(&self) -> usize {
        self.num_steps
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.num_steps as f64
    }

    /// Time after `step` steps.
    pub fn time(&self, step: usize) -> f64 {
        if step == self.num_steps {
            self.t_final
        } else {
            step as f64 * self.dt()
        }
    }

    /// Step index closest to time `t`, clamped to the grid.
    pub fn nearest_step(&self, t: f64) -> usize {
        let k = (t / self.dt()).round();
        if k <= 0.0 {
            0
        } else {
            (k as usize).min(self.num_steps)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Integrator {
    Euler,
    SspRk33,
}

impl Integrator {
    pub fn name(self) -> &'static str {
        match self {
            Integrator::Euler => "euler",
            Integrator::SspRk33 => "ssprk33",
        }
    }
}

impl fmt::Display for Integrator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Integrator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "euler" => Ok(Integrator::Euler),
            "ssprk33" => Ok(Integrator::SspRk33),
            other => Err(format!("unknown integrator `{other}` (expected euler or ssprk33)")),
        }
    }
}

/// Everything needed to evaluate the dissipated time derivative.
#[derive(Debug, Clone)]
pub struct Scheme {
    problem: Problem,
    flux: FluxKind,
    ops: OperatorSet,
    dissipation: Dissipation,
}

impl Scheme {
    pub fn new(
        problem: Problem,
        flux: FluxKind,
        basis: BasisKind,
        p: usize,
        dissipation: DissipationConfig,
    ) -> Result<Self> {
        check_pairing(flux, problem)?;
        let ops = build_operators(basis, p)?;
        let dissipation = Dissipation::new(&ops, dissipation)?;
        Ok(Self {
            problem,
            flux,
            ops,
            dissipation,
        })
    }

    pub fn problem(&self) -> Problem {
        self.problem
    }

    pub fn flux(&self) -> FluxKind {
        self.flux
    }

    pub fn ops(&self) -> &OperatorSet {
        &self.ops
    }

    pub fn dissipation(&self) -> &Dissipation {
        &self.dissipation
    }

    /// Semidiscrete right-hand side without dissipation.
    pub fn rhs(&self, field: &SolutionField) -> Result<SolutionField> {
        rhs(self.problem, field, &self.ops, self.flux)
    }
}

/// Strength statistics of one step (all stages for SSP-RK).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepStats {
    pub eps_min: f64,
    pub eps_max: f64,
    pub clamped_elements: usize,
    /// Reports of every stage, in stage order.
    pub reports: Vec<Vec<EpsilonReport>>,
}

impl StepStats {
    fn absorb(&mut self, reports: Vec<EpsilonReport>) {
        if !reports.is_empty() {
            let first = self.reports.iter().all(|r| r.is_empty());
            for r in &reports {
                if first && r.element == 0 {
                    self.eps_min = r.epsilon;
                    self.eps_max = r.epsilon;
                }
                self.eps_min = self.eps_min.min(r.epsilon);
                self.eps_max = self.eps_max.max(r.epsilon);
                self.clamped_elements += usize::from(r.clamped);
            }
        }
        self.reports.push(reports);
    }
}

/// `u + dt (du/dt - eps A^s u)`, with `eps` from the dissipation pipeline.
pub fn euler_step(scheme: &Scheme, field: &SolutionField, dt: f64) -> Result<(SolutionField, StepStats)> {
    let mut stats = StepStats::default();
    let next = euler_stage(scheme, field, dt, &mut stats)?;
    Ok((next, stats))
}

fn euler_stage(scheme: &Scheme, field: &SolutionField, dt: f64, stats: &mut StepStats) -> Result<SolutionField> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("time step must be positive, got {dt}")));
    }
    let dudt = scheme.rhs(field)?;
    let (dudt, reports) = scheme.dissipation.apply(&scheme.ops, field, &dudt, dt);
    stats.absorb(reports);
    let mut next = field.coefficients().clone();
    next += dudt.coefficients() * dt;
    if next.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(field.with_coefficients(next))
}

/// Shu-Osher SSP-RK(3,3) as convex combinations of Euler stages, each with
/// its own dissipation strength.
pub fn ssprk33_step(scheme: &Scheme, field: &SolutionField, dt: f64) -> Result<(SolutionField, StepStats)> {
    let mut stats = StepStats::default();
    let u0 = field.coefficients();
    let u1 = euler_stage(scheme, field, dt, &mut stats)?;
    let e1 = euler_stage(scheme, &u1, dt, &mut stats)?;
    let u2 = field.with_coefficients(u0 * 0.75 + e1.coefficients() * 0.25);
    let e2 = euler_stage(scheme, &u2, dt, &mut stats)?;
    let next = field.with_coefficients(u0 * (1.0 / 3.0) + e2.coefficients() * (2.0 / 3.0));
    Ok((next, stats))
}

pub fn step(integrator: Integrator, scheme: &Scheme, field: &SolutionField, dt: f64) -> Result<(SolutionField, StepStats)> {
    match integrator {
        Integrator::Euler => euler_step(scheme, field, dt),
        Integrator::SspRk33 => ssprk33_step(scheme, field, dt),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepRecord {
    pub step: usize,
    pub time: f64,
    pub energy: f64,
    pub mass: f64,
    pub eps_min: f64,
    pub eps_max: f64,
    pub clamped_elements: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub time: f64,
    pub field: SolutionField,
}

/// One row of the per-element strength diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticRow {
    pub step: usize,
    /// Time at the start of the step.
    pub time: f64,
    pub report: EpsilonReport,
}

#[derive(Clone)]
pub struct SimulationOutput {
    pub final_field: SolutionField,
    /// Record 0 is the initial state.
    pub records: Vec<StepRecord>,
    pub snapshots: Vec<Snapshot>,
    pub diagnostics: Vec<DiagnosticRow>,
    pub ops: OperatorSet,
}

impl fmt::Debug for SimulationOutput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SimulationOutput")
            .field("records", &self.records.len())
            .field("last", &self.records.last())
            .field("snapshots", &self.snapshots.iter().map(|s| s.step).collect::<Vec<_>>())
            .field("diagnostics", &self.diagnostics.len())
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Error)]
pub enum SimulationError {
    #[error(transparent)]
    Setup(#[from] Error),

    #[error("blow-up at step {step} (t = {time}): {reason}")]
    BlowUp {
        step: usize,
        time: f64,
        reason: String,
        partial: Box<SimulationOutput>,
    },
}

fn record(step: usize, time: f64, field: &SolutionField, ops: &OperatorSet, stats: &StepStats) -> StepRecord {
    StepRecord {
        step,
        time,
        energy: energy(field, ops),
        mass: mass(field, ops),
        eps_min: stats.eps_min,
        eps_max: stats.eps_max,
        clamped_elements: stats.clamped_elements,
    }
}

/// Runs `config` to its final time, monitoring every step.
pub fn run_simulation(config: &ExperimentConfig) -> Result<SimulationOutput, SimulationError> {
    let scheme = Scheme::new(
        config.problem,
        config.flux,
        config.basis,
        config.p,
        config.dissipation,
    )?;
    let mesh = Mesh1D::new(config.domain.0, config.domain.1, config.elements)?;
    let initial = config.initial_condition;
    let field = init_field(mesh, scheme.ops(), |x| initial.eval(x))?;
    run_scheme(&scheme, field, config.time, config.integrator, &config.output.snapshot_times, config.output.diagnostics)
}

/// The time loop for an already discretised initial state.
pub fn run_scheme(
    scheme: &Scheme,
    initial: SolutionField,
    time: TimeGrid,
    integrator: Integrator,
    snapshot_times: &[f64],
    diagnostics: bool,
) -> Result<SimulationOutput, SimulationError> {
    let ops = scheme.ops();
    let dt = time.dt();
    let mut snapshot_steps: Vec<usize> = snapshot_times.iter().map(|&t| time.nearest_step(t)).collect();
    snapshot_steps.sort_unstable();
    snapshot_steps.dedup();

    let mut out = SimulationOutput {
        final_field: initial.clone(),
        records: vec![record(0, 0.0, &initial, ops, &StepStats::default())],
        snapshots: Vec::new(),
        diagnostics: Vec::new(),
        ops: ops.clone(),
    };
    if snapshot_steps.first() == Some(&0) {
        out.snapshots.push(Snapshot {
            step: 0,
            time: 0.0,
            field: initial.clone(),
        });
    }
    let energy_limit = BLOW_UP_FACTOR * out.records[0].energy.max(f64::MIN_POSITIVE);
    let mut field = initial;
    for k in 1..=time.num_steps() {
        let t_start = time.time(k - 1);
        let t = time.time(k);
        let (next, stats) = match step(integrator, scheme, &field, dt) {
            Ok(v) => v,
            Err(Error::NonFinite) => {
                out.final_field = field;
                return Err(SimulationError::BlowUp {
                    step: k,
                    time: t,
                    reason: "non-finite coefficients".into(),
                    partial: Box::new(out),
                });
            }
            Err(e) => return Err(e.into()),
        };
        if diagnostics {
            for stage in &stats.reports {
                out.diagnostics.extend(stage.iter().map(|&report| DiagnosticRow {
                    step: k,
                    time: t_start,
                    report,
                }));
            }
        }
        let rec = record(k, t, &next, ops, &stats);
        out.records.push(rec);
        field = next;
        if snapshot_steps.binary_search(&k).is_ok() {
            out.snapshots.push(Snapshot {
                step: k,
                time: t,
                field: field.clone(),
            });
        }
        if !(rec.energy <= energy_limit) {
            out.final_field = field;
            return Err(SimulationError::BlowUp {
                step: k,
                time: t,
                reason: format!("energy {:e} exceeds {BLOW_UP_FACTOR:e} times the initial energy", rec.energy),
                partial: Box::new(out),
            });
        }
    }
    out.final_field = field;
    Ok(out)
}
