use gpkink::dynamics::{evolve, propagate, EvolveConfig, Stepper};
use gpkink::lab::{make_perturbed, make_perturbed_kink, PerturbationSpec};
use gpkink::{Complex64, Field, GridSpec, SolitonParams};

fn grid() -> GridSpec {
    GridSpec::new(30.0, 512).unwrap()
}

fn max_diff(a: &Field, b: &Field) -> f64 {
    a.perturbation().iter().zip(b.perturbation()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn run(f: &Field, dt: f64, t: f64) -> Field {
    let stepper = Stepper::new(f.grid(), f.background(), dt).unwrap();
    propagate(f, &stepper, (t / dt.abs()).round() as usize).unwrap()
}

#[test]
fn forward_then_backward_returns() {
    let spec = PerturbationSpec { epsilon: 0.05, seed: 4, ..Default::default() };
    let f = make_perturbed_kink(&spec, &grid()).unwrap();
    let there = run(&f, 5e-3, 2.0);
    let back = run(&there, -5e-3, 2.0);
    let err = max_diff(&f, &back);
    assert!(err <= 1e-8, "round trip error {err}");
    assert!(max_diff(&f, &there) > 1e-3);
}

#[test]
fn second_order_in_time() {
    let g = grid();
    let f = make_perturbed(
        &PerturbationSpec { epsilon: 0.05, seed: 2, ..Default::default() },
        &g,
        SolitonParams::new(0.5, 0.0, 0.0).unwrap(),
    )
    .unwrap();
    let t = 1.0;
    let dt = 0.004;
    let reference = run(&f, dt / 8.0, t);
    let coarse = max_diff(&run(&f, dt, t), &reference);
    let fine = max_diff(&run(&f, dt / 2.0, t), &reference);
    assert!(coarse / fine >= 3.5, "ratio {}", coarse / fine);
}

#[test]
fn invariants_conserved_on_short_run() {
    let g = grid();
    let f = make_perturbed_kink(&PerturbationSpec { epsilon: 0.05, seed: 9, ..Default::default() }, &g).unwrap();
    let cfg = EvolveConfig { dt: 5e-3, t_final: 5.0, log_every: 100, com_cutoff_r: 10.0 };
    let (_, log) = evolve(&f, &cfg).unwrap();
    assert_eq!(log.len(), 11);
    assert!(log.energy_drift() <= 1e-6, "{}", log.energy_drift());
    assert!(log.momentum_drift() <= 1e-6, "{}", log.momentum_drift());
    assert!(log.mass_drift() <= 1e-5, "{}", log.mass_drift());
}

#[test]
fn traveling_wave_translates() {
    let g = grid();
    let c = 0.7;
    let wave = SolitonParams::new(c, 0.0, 0.0).unwrap();
    let f = Field::background_only(g, gpkink::Background::Soliton(wave)).unwrap();
    let end = run(&f, 2e-3, 2.0);
    let moved = SolitonParams::new(c, 2.0 * c, 0.0).unwrap();
    let err = g
        .nodes()
        .zip(end.values())
        .filter(|(x, _)| x.abs() < 10.0)
        .map(|(x, v)| (v - moved.value(x)).norm())
        .fold(0.0, f64::max);
    assert!(err < 1e-5, "sup error {err}");
}

#[test]
fn blow_up_is_reported() {
    let g = grid();
    // RK4 on the stiff pointwise rotation is unstable for this amplitude
    let bump: Vec<Complex64> = g.nodes().map(|x| Complex64::new(40.0 * (-(x * x)).exp(), 0.0)).collect();
    let f = Field::new(g, gpkink::Background::one(), bump).unwrap();
    let cfg = EvolveConfig { dt: 5e-3, t_final: 5.0, log_every: 10, com_cutoff_r: 10.0 };
    let res = evolve(&f, &cfg);
    assert!(matches!(res, Err(gpkink::Error::BlowUp { .. })), "{res:?}");
}
