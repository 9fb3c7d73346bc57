//! Acceptance gate. Each test prints one `criterion N: PASS|FAIL` line
//! (visible with `--nocapture`) and fails when its criterion is not met.

use std::fs;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{rngs::StdRng, Rng, SeedableRng};

use sbp_cpr::config::{preset, ExperimentConfig, PRESET_NAMES};
use sbp_cpr::dissipation::{DissipationConfig, DissipationMode};
use sbp_cpr::io::write_outputs;
use sbp_cpr::legendre::{a_phi_deriv_expansion, legendre_deriv, legendre_eval, lobatto_rule};
use sbp_cpr::sbp::{
    build_operators, check_sbp, eigen_check, multiplication_operator, naive_dissipation_operator, BasisKind,
    LEGENDRE_WEIGHT,
};
use sbp_cpr::semidisc::{advection_rhs, init_field, FluxKind, Mesh1D, Problem, SolutionField};
use sbp_cpr::time::{euler_step, run_scheme, run_simulation, Integrator, Scheme, SimulationError, TimeGrid};

fn report(n: usize, ok: bool, detail: &str) {
    println!("criterion {n}: {} ({detail})", if ok { "PASS" } else { "FAIL" });
}

fn gate(n: usize, checks: &[(&str, bool, String)], seconds: f64, budget: f64) {
    let mut all = true;
    for (name, ok, detail) in checks {
        println!("  {n} {name}: {} {detail}", if *ok { "ok" } else { "FAILED" });
        all &= ok;
    }
    let in_time = seconds <= budget;
    report(n, all && in_time, &format!("{seconds:.2}s of {budget}s"));
    assert!(all, "criterion {n} failed");
    assert!(in_time, "criterion {n} exceeded its runtime budget");
}

#[test]
fn criterion_01_sbp_identity() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for basis in BasisKind::ALL {
        for p in 1..=16 {
            worst = worst.max(check_sbp(&build_operators(basis, p).unwrap()));
        }
    }
    gate(1, &[("", worst <= 1e-12, format!("max residual {worst:e}"))], start.elapsed().as_secs_f64(), 1.0);
}

#[test]
fn criterion_02_dissipation_eigenvalues() {
    let start = Instant::now();
    let rel = |got: f64, expected: f64| (got - expected).abs() / expected.abs().max(1.0);
    let mut full = 0.0f64;
    let mut lobatto_low = 0.0f64;
    let mut closed_form = 0.0f64;
    let mut closed_form_failures = Vec::new();
    let mut p1_zero = false;
    for p in 1..=16 {
        for basis in BasisKind::ALL {
            let ops = build_operators(basis, p).unwrap();
            let table = eigen_check(&ops, &multiplication_operator(&ops, &LEGENDRE_WEIGHT).unwrap()).unwrap();
            let top = if basis == BasisKind::LobattoNodal { p - 1 } else { p };
            for e in &table[..=top] {
                let err = rel(e.eigenvalue, -((e.n * (e.n + 1)) as f64));
                if basis == BasisKind::LobattoNodal {
                    lobatto_low = lobatto_low.max(err);
                } else {
                    full = full.max(err);
                }
            }
            if basis == BasisKind::LobattoNodal {
                let pf = p as f64;
                let expected = -pf * (pf * pf - 1.0) / (2.0 * pf + 1.0);
                let err = rel(table[p].eigenvalue, expected);
                closed_form = closed_form.max(err);
                if err > 1e-10 {
                    closed_form_failures.push(format!("p={p}: {:.6} vs {expected:.6}", table[p].eigenvalue));
                }
                if p == 1 {
                    p1_zero = table[1].eigenvalue == 0.0;
                }
            }
        }
    }
    gate(
        2,
        &[
            ("a gauss/modal n<=p", full <= 1e-10, format!("max rel error {full:e}")),
            ("b lobatto n<=p-1", lobatto_low <= 1e-10, format!("max rel error {lobatto_low:e}")),
            ("c lobatto p=1 zero", p1_zero, String::new()),
            (
                "d lobatto closed form",
                closed_form <= 1e-10,
                format!("max rel error {closed_form:e}; {}", closed_form_failures.join(", ")),
            ),
        ],
        start.elapsed().as_secs_f64(),
        5.0,
    );
}

#[test]
fn criterion_03_lobatto_quadrature_identities() {
    let start = Instant::now();
    let (mut norm, mut cross, mut pointwise) = (0.0f64, 0.0f64, 0.0f64);
    for p in 1..=16 {
        let rule = lobatto_rule(p).unwrap();
        norm = norm.max((rule.integrate(|x| legendre_eval(p, x).powi(2)) - 2.0 / p as f64).abs());
        let c = rule.integrate(|x| legendre_eval(p - 1, x) * legendre_eval(p + 1, x));
        cross = cross.max((c - 2.0 / (2.0 * p as f64 - 1.0)).abs());
        let (cm, cp) = a_phi_deriv_expansion(p).unwrap();
        for i in 0..20 {
            let x = -1.0 + (2 * i + 1) as f64 / 20.0;
            let lhs = (1.0 - x * x) * legendre_deriv(p, x);
            let rhs = cm * legendre_eval(p - 1, x) + cp * legendre_eval(p + 1, x);
            pointwise = pointwise.max((lhs - rhs).abs());
        }
    }
    gate(
        3,
        &[
            ("a norm 2/p", norm <= 1e-12, format!("{norm:e}")),
            ("b cross product 2/(2p-1)", cross <= 1e-12, format!("{cross:e}")),
            ("c pointwise expansion", pointwise <= 1e-12, format!("{pointwise:e}")),
        ],
        start.elapsed().as_secs_f64(),
        f64::INFINITY,
    );
}

fn random_field(mesh: Mesh1D, basis: BasisKind, p: usize, seed: u64) -> SolutionField {
    let mut rng = StdRng::seed_from_u64(seed);
    let coeffs = DMatrix::from_fn(p + 1, mesh.elements(), |_, _| 1.0 + 0.5 * rng.gen_range(-1.0..1.0));
    SolutionField::from_coefficients(mesh, basis, p, coeffs).unwrap()
}

#[test]
fn criterion_04_conservation() {
    let start = Instant::now();
    let cases = [
        (Problem::LinearAdvection, FluxKind::Central),
        (Problem::LinearAdvection, FluxKind::Upwind),
        (Problem::Burgers, FluxKind::LocalLaxFriedrichs),
    ];
    let modes = [DissipationMode::Off, DissipationMode::Fixed(1e-3), DissipationMode::Adaptive];
    let mut per_step = 0.0f64;
    let mut accumulated = 0.0f64;
    let mut incomplete = Vec::new();
    let mesh = Mesh1D::new(0.0, 2.0, 8).unwrap();
    let grid = TimeGrid::new(1.0, 10_000).unwrap();
    for (k, basis) in BasisKind::ALL.into_iter().enumerate() {
        for (problem, flux) in cases {
            for mode in modes {
                let scheme = Scheme::new(problem, flux, basis, 5, DissipationConfig::new(1, mode).unwrap()).unwrap();
                let u = random_field(mesh, basis, 5, 17 + k as u64);
                let records = match run_scheme(&scheme, u, grid, Integrator::Euler, &[], false) {
                    Ok(out) => out.records,
                    Err(SimulationError::BlowUp { partial, .. }) => {
                        incomplete.push(format!("{basis}/{problem}/{}", mode.name()));
                        partial.records
                    }
                    Err(e) => panic!("{e}"),
                };
                let m0 = records[0].mass.abs();
                for w in records.windows(2) {
                    per_step = per_step.max((w[1].mass - w[0].mass).abs() / m0);
                }
                accumulated = accumulated.max((records.last().unwrap().mass - records[0].mass).abs() / m0);
            }
        }
    }
    gate(
        4,
        &[
            ("a per step", per_step <= 1e-12, format!("max relative drift {per_step:e}")),
            ("b over 1e4 steps", accumulated <= 1e-10, format!("max relative drift {accumulated:e}")),
            ("c all runs complete", incomplete.is_empty(), incomplete.join(", ")),
        ],
        start.elapsed().as_secs_f64(),
        f64::INFINITY,
    );
}

#[test]
fn criterion_05_fully_discrete_energy_identity() {
    let start = Instant::now();
    let mesh = Mesh1D::new(0.0, 2.0, 6).unwrap();
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    for basis in BasisKind::ALL {
        for (problem, flux) in [
            (Problem::LinearAdvection, FluxKind::Central),
            (Problem::LinearAdvection, FluxKind::Upwind),
            (Problem::Burgers, FluxKind::LocalLaxFriedrichs),
        ] {
            for s in 1..=3 {
                let scheme = Scheme::new(problem, flux, basis, 6, DissipationConfig::adaptive(s).unwrap()).unwrap();
                let ops = scheme.ops();
                let u = init_field(mesh, ops, |x| (-20.0 * (x - 1.0f64).powi(2)).exp() + 0.3 * (3.0 * x).sin()).unwrap();
                let dt = 1e-4;
                let du = scheme.rhs(&u).unwrap();
                let (next, stats) = euler_step(&scheme, &u, dt).unwrap();
                for r in stats.reports[0].iter().filter(|r| !r.clamped) {
                    let i = r.element;
                    let n0 = ops.norm_sq(u.element(i));
                    let gap = ops.norm_sq(next.element(i)) - n0 - 2.0 * dt * ops.inner(u.element(i), du.element(i));
                    worst = worst.max(gap.abs() / n0);
                    checked += 1;
                }
            }
        }
    }
    gate(
        5,
        &[
            ("", worst <= 1e-11, format!("max relative gap {worst:e}")),
            ("b unclamped elements checked", checked > 0, format!("{checked}")),
        ],
        start.elapsed().as_secs_f64(),
        f64::INFINITY,
    );
}

fn smooth_reduced() -> ExperimentConfig {
    let mut c = preset("advection-smooth").unwrap();
    c.time = TimeGrid::new(1.0, 12_000).unwrap();
    c
}

#[test]
fn criterion_06_smooth_advection_trend() {
    let start = Instant::now();
    let off = run_simulation(&smooth_reduced()).unwrap();
    let e0 = off.records[0].energy;
    let e_off = off.records.last().unwrap().energy;
    let mut checks = vec![("a off grows", e_off > e0, format!("{e0:e} -> {e_off:e}"))];
    for (name, s) in [("b adaptive s=1", 1), ("c adaptive s=2", 2), ("d adaptive s=3", 3)] {
        let mut c = smooth_reduced();
        c.dissipation = DissipationConfig::adaptive(s).unwrap();
        let out = run_simulation(&c).unwrap();
        let e = out.records.last().unwrap().energy;
        checks.push((name, e <= e0 * (1.0 + 1e-9), format!("{e0:e} -> {e:e}")));
    }
    gate(6, &checks, start.elapsed().as_secs_f64(), 120.0);
}

#[test]
fn criterion_07_burgers_trend() {
    let start = Instant::now();
    let run = |mode| {
        let mut c = preset("burgers-sine").unwrap();
        c.time = TimeGrid::new(1.0, 5_000).unwrap();
        c.dissipation = DissipationConfig::new(1, mode).unwrap();
        run_simulation(&c)
    };
    let shock = (5_000.0 / std::f64::consts::PI).round() as usize;
    let off = run(DissipationMode::Off);
    let mut checks = Vec::new();
    let e_off = match &off {
        Ok(out) => {
            let (es, ef) = (out.records[shock].energy, out.records.last().unwrap().energy);
            checks.push(("a off decays after the shock", ef < es, format!("{es:e} -> {ef:e}")));
            ef
        }
        Err(e) => {
            checks.push(("a off completes", false, e.to_string()));
            f64::NAN
        }
    };
    for (name, mode) in [("b fixed 5e-3", DissipationMode::Fixed(5e-3)), ("c adaptive", DissipationMode::Adaptive)] {
        match run(mode) {
            Ok(out) => {
                let e = out.records.last().unwrap().energy;
                checks.push((name, e <= e_off + 1e-8, format!("{e:e} vs off {e_off:e}")));
            }
            Err(e) => checks.push((name, false, e.to_string())),
        }
    }
    gate(7, &checks, start.elapsed().as_secs_f64(), f64::INFINITY);
}

#[test]
fn criterion_08_naive_operator_defect() {
    let start = Instant::now();
    let lob = build_operators(BasisKind::LobattoNodal, 4).unwrap();
    let naive = naive_dissipation_operator(&lob, &multiplication_operator(&lob, &LEGENDRE_WEIGHT).unwrap(), 1).unwrap();
    let mut rng = StdRng::seed_from_u64(8);
    let mut lobatto = 0.0f64;
    for _ in 0..100 {
        let u = DVector::from_fn(5, |_, _| rng.gen_range(-1.0..1.0));
        lobatto = lobatto.max(lob.integral((&naive * u).as_slice()).abs());
    }
    let gauss = build_operators(BasisKind::GaussNodal, 4).unwrap();
    let naive = naive_dissipation_operator(&gauss, &multiplication_operator(&gauss, &LEGENDRE_WEIGHT).unwrap(), 1).unwrap();
    let defect = gauss.integral((&naive * gauss.legendre_vector(4)).as_slice()).abs();
    gate(
        8,
        &[
            ("a lobatto conservative", lobatto <= 1e-12, format!("{lobatto:e}")),
            ("b gauss defect", defect > 1e-6, format!("{defect:e}")),
        ],
        start.elapsed().as_secs_f64(),
        f64::INFINITY,
    );
}

#[test]
fn criterion_09_modal_nodal_equivalence() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mesh = Mesh1D::new(0.0, 2.0, 5).unwrap();
    for p in 1..=10 {
        let modal = build_operators(BasisKind::ModalLegendre, p).unwrap();
        let nodal = build_operators(BasisKind::GaussNodal, p).unwrap();
        let v = nodal.vandermonde();
        for seed in 0..4 {
            let mut rng = StdRng::seed_from_u64(seed * 31 + p as u64);
            let um = DMatrix::from_fn(p + 1, 5, |_, _| rng.gen_range(-1.0..1.0));
            let un = &v * &um;
            let um = SolutionField::from_coefficients(mesh, BasisKind::ModalLegendre, p, um).unwrap();
            let un = SolutionField::from_coefficients(mesh, BasisKind::GaussNodal, p, un).unwrap();
            for flux in [FluxKind::Central, FluxKind::Upwind] {
                let dm = advection_rhs(&um, &modal, flux).unwrap();
                let dn = advection_rhs(&un, &nodal, flux).unwrap();
                let conj = &v * dm.coefficients();
                let err = (conj - dn.coefficients()).amax() / dn.coefficients().amax().max(1.0);
                worst = worst.max(err);
            }
        }
    }
    gate(9, &[("", worst <= 1e-11, format!("max rel error {worst:e}"))], start.elapsed().as_secs_f64(), f64::INFINITY);
}

fn csv_bytes(config: &ExperimentConfig) -> Vec<(String, Vec<u8>)> {
    let output = match run_simulation(config) {
        Ok(o) => o,
        Err(SimulationError::BlowUp { partial, .. }) => *partial,
        Err(e) => panic!("{e}"),
    };
    let mut files: Vec<(String, Vec<u8>)> = write_outputs(config, &output)
        .unwrap()
        .into_iter()
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn criterion_10_golden_determinism() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let mut checks = Vec::new();
    for name in PRESET_NAMES {
        let base = preset(name).unwrap();
        let mut runs = Vec::new();
        for (k, mode) in [DissipationMode::Off, DissipationMode::Adaptive].into_iter().enumerate() {
            for attempt in 0..2 {
                let mut c = base.clone();
                c.time = TimeGrid::new(base.time.t_final(), base.time.num_steps() / 10).unwrap();
                c.dissipation = DissipationConfig::new(1, mode).unwrap();
                c.output.diagnostics = mode == DissipationMode::Adaptive;
                c.output.dir = dir.path().join(format!("{name}-{k}-{attempt}"));
                runs.push(csv_bytes(&c));
            }
        }
        let same = runs[0] == runs[1] && runs[2] == runs[3] && !runs[0].is_empty();
        checks.push((name, same, format!("{} + {} csv files", runs[0].len(), runs[2].len())));
    }
    gate(10, &checks, start.elapsed().as_secs_f64(), f64::INFINITY);
}
