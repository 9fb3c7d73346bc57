use sbp_cpr::config::preset;
use sbp_cpr::dissipation::{DissipationConfig, DissipationMode};
use sbp_cpr::sbp::BasisKind;
use sbp_cpr::semidisc::{init_field, FluxKind, InitialCondition, Mesh1D, Problem};
use sbp_cpr::time::{run_scheme, run_simulation, Integrator, Scheme, SimulationError, TimeGrid};

#[test]
fn constant_state_is_preserved() {
    for basis in BasisKind::ALL {
        for integrator in [Integrator::Euler, Integrator::SspRk33] {
            let mut c = preset("advection-smooth").unwrap();
            c.basis = basis;
            c.p = 4;
            c.initial_condition = InitialCondition::Constant { value: 0.3 };
            c.time = TimeGrid::new(0.5, 200).unwrap();
            c.integrator = integrator;
            c.dissipation = DissipationConfig::adaptive(2).unwrap();
            let out = run_simulation(&c).unwrap();
            let first = out.records[0];
            for r in &out.records {
                assert!((r.energy - first.energy).abs() <= 1e-12 * first.energy);
            }
            let u0 = init_field(out.final_field.mesh().to_owned(), &out.ops, |_| 0.3).unwrap();
            assert!((out.final_field.coefficients() - u0.coefficients()).amax() <= 1e-12);
        }
    }
}

#[test]
fn records_and_snapshots() {
    let mut c = preset("burgers-sine").unwrap();
    c.time = TimeGrid::new(0.5, 2500).unwrap();
    c.output.snapshot_times = vec![0.0, 0.31, 0.5];
    c.output.diagnostics = true;
    c.dissipation = DissipationConfig::adaptive(1).unwrap();
    let out = run_simulation(&c).unwrap();
    assert_eq!(out.records.len(), 2501);
    assert_eq!(out.records[2500].time, 0.5);
    let steps: Vec<usize> = out.snapshots.iter().map(|s| s.step).collect();
    assert_eq!(steps, vec![0, 1550, 2500]);
    assert_eq!(out.diagnostics.len(), 2500 * 16);
    assert!(out.records.iter().all(|r| r.energy.is_finite() && r.mass.is_finite()));
}

#[test]
fn burgers_mass_drift_over_full_preset() {
    for mode in [DissipationMode::Off, DissipationMode::Fixed(5e-3), DissipationMode::Adaptive] {
        let mut c = preset("burgers-sine").unwrap();
        c.dissipation = DissipationConfig::new(1, mode).unwrap();
        let out = run_simulation(&c).unwrap();
        let m0 = out.records[0].mass;
        let drift = out.records.iter().map(|r| (r.mass - m0).abs()).fold(0.0, f64::max);
        assert!(drift <= 1e-10 * (1.0 + m0.abs()), "{mode:?}: {drift:e}");
    }
}

#[test]
fn reduced_smooth_advection() {
    let mut c = preset("advection-smooth").unwrap();
    c.time = TimeGrid::new(1.0, 12_000).unwrap();
    let off = run_simulation(&c).unwrap();
    assert!(off.records.last().unwrap().energy > off.records[0].energy);
    c.dissipation = DissipationConfig::adaptive(1).unwrap();
    let ad = run_simulation(&c).unwrap();
    let e0 = ad.records[0].energy;
    assert!(ad.records.last().unwrap().energy <= e0 * (1.0 + 1e-10));
    for w in ad.records.windows(2) {
        if w[1].clamped_elements == 0 {
            assert!(w[1].energy <= w[0].energy * (1.0 + 1e-10), "step {}", w[1].step);
        }
    }
}

#[test]
fn ssprk_upwind_energy_non_increasing() {
    let scheme = Scheme::new(
        Problem::LinearAdvection,
        FluxKind::Upwind,
        BasisKind::ModalLegendre,
        6,
        DissipationConfig::adaptive(1).unwrap(),
    )
    .unwrap();
    let mesh = Mesh1D::new(0.0, 2.0, 8).unwrap();
    let u = init_field(mesh, scheme.ops(), |x| if (0.5..=1.0).contains(&x) { 1.0 } else { 0.0 }).unwrap();
    let out = run_scheme(&scheme, u, TimeGrid::new(0.2, 100).unwrap(), Integrator::SspRk33, &[], false).unwrap();
    for w in out.records.windows(2) {
        assert!(w[1].energy <= w[0].energy * (1.0 + 1e-12));
    }
}

#[test]
fn invalid_pairing_is_a_setup_error() {
    let mut c = preset("advection-step").unwrap();
    c.flux = FluxKind::LocalLaxFriedrichs;
    assert!(matches!(run_simulation(&c), Err(SimulationError::Setup(_))));
}

#[test]
fn blow_up_keeps_partial_output() {
    let mut c = preset("advection-step").unwrap();
    c.time = TimeGrid::new(8.0, 400).unwrap();
    match run_simulation(&c) {
        Err(SimulationError::BlowUp { step, partial, .. }) => {
            assert_eq!(partial.records.len(), step + 1);
            assert_eq!(partial.snapshots[0].step, 0);
        }
        other => panic!("expected a blow-up, got {:?}", other.map(|o| o.records.len())),
    }
}
