use std::f64::consts::SQRT_2;

use gpkink::functionals::{
    distance_da, energy, mod_pi_distance, perturbation_momentum, untwisted_momentum, winding_insert,
};
use gpkink::profiles::{eval_soliton, soliton_momentum};
use gpkink::spectral::Spectral;
use gpkink::{Background, Complex64, Field, GridSpec, SolitonParams};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid() -> GridSpec {
    GridSpec::new(40.0, 1024).unwrap()
}

/// Sum of Gaussian bumps centred in `[-10, 10]`, scaled to `amp`.
fn random_bumps(rng: &mut ChaCha8Rng, g: &GridSpec, amp: f64) -> Vec<Complex64> {
    let bumps: Vec<(f64, f64, Complex64)> = (0..3)
        .map(|_| {
            let c = rng.gen_range(-10.0..10.0);
            let s = rng.gen_range(0.7..2.0);
            let a = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            (c, s, a)
        })
        .collect();
    g.nodes()
        .map(|x| bumps.iter().map(|&(c, s, a)| amp * a * (-((x - c) / s).powi(2)).exp()).sum())
        .collect()
}

#[test]
fn momentum_strictly_decreasing() {
    let n = 1000;
    let ps: Vec<f64> =
        (1..n).map(|k| soliton_momentum(SQRT_2 * k as f64 / n as f64).unwrap()).collect();
    assert!(ps.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn kink_solves_stationary_equation() {
    let g = GridSpec::new(40.0, 2048).unwrap();
    let kink = SolitonParams::kink();
    let u: Vec<Complex64> = g.nodes().map(|x| kink.value(x)).collect();
    // the samples are periodic up to a sign; use the twisted transform
    let d2 = Spectral::twisted(&g, std::f64::consts::PI).second_derivative(&u);
    let res = u
        .iter()
        .zip(&d2)
        .map(|(u, d2)| (d2 + u * (1.0 - u.norm_sqr())).norm_sqr())
        .sum::<f64>()
        .sqrt()
        * g.dx().sqrt();
    assert!(res <= 1e-8, "residual {res}");
}

proptest! {
    #[test]
    fn soliton_modulus_bounded(c in -SQRT_2..SQRT_2, x in -200.0f64..200.0) {
        let v = eval_soliton(SolitonParams::new(c, 0.0, 0.0).unwrap(), x).unwrap();
        prop_assert!(v.norm() <= 1.0 + 1e-15);
    }

    #[test]
    fn soliton_modulus_tends_to_one(c in -1.4f64..1.4) {
        let p = SolitonParams::new(c, 0.0, 0.0).unwrap();
        prop_assert!((p.value(400.0).norm() - 1.0).abs() < 1e-12);
        prop_assert!((p.value(-400.0).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn energy_phase_invariant(seed in 0u64..1000, theta in 0.0f64..6.28) {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = random_bumps(&mut rng, &g, 0.1);
        let f = Field::new(g, Background::kink(), w.clone()).unwrap();
        let rot = Complex64::from_polar(1.0, theta);
        let bg = Background::Soliton(SolitonParams::new(0.0, 0.0, theta).unwrap());
        let h = Field::new(g, bg, w.iter().map(|w| rot * w).collect()).unwrap();
        prop_assert!((energy(&f).unwrap() - energy(&h).unwrap()).abs() < 1e-10);
        let (pf, ph) = (untwisted_momentum(&f).unwrap(), untwisted_momentum(&h).unwrap());
        prop_assert!(mod_pi_distance(pf.untwisted, ph.untwisted) < 1e-10);
    }

    #[test]
    fn distance_symmetric_and_triangle(seed in 0u64..1000) {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fields: Vec<Field> = (0..3)
            .map(|_| Field::new(g, Background::kink(), random_bumps(&mut rng, &g, 0.05)).unwrap())
            .collect();
        let d = |i: usize, j: usize| distance_da(&fields[i], &fields[j], 10.0).unwrap();
        prop_assert!((d(0, 1) - d(1, 0)).abs() < 1e-14);
        prop_assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-12);
        prop_assert!(d(0, 0) == 0.0);
    }
}

#[test]
fn momentum_additive_over_decomposition() {
    let g = grid();
    let spectral = Spectral::twisted(&g, Background::kink().twist());
    let base = Field::background_only(g, Background::kink()).unwrap();
    let dv0 = base.background_derivative_samples();
    let p0 = untwisted_momentum(&base).unwrap().untwisted;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let w1 = random_bumps(&mut rng, &g, 0.05);
        let w2 = random_bumps(&mut rng, &g, 0.05);
        let sum: Vec<Complex64> = w1.iter().zip(&w2).map(|(a, b)| a + b).collect();
        let direct = untwisted_momentum(&Field::new(g, Background::kink(), sum).unwrap()).unwrap().untwisted;
        // first w1 on top of 𝔳₀, then w2 on top of 𝔳₀ + w1
        let dw1 = spectral.derivative(&w1);
        let dw2 = spectral.derivative(&w2);
        let step1 = perturbation_momentum(&w1, &dw1, &dv0, g.dx());
        let dv1: Vec<Complex64> = dv0.iter().zip(&dw1).map(|(a, b)| a + b).collect();
        let step2 = perturbation_momentum(&w2, &dw2, &dv1, g.dx());
        let twice = p0 + step1 + step2;
        assert!(mod_pi_distance(direct, twice) < 1e-9, "{direct} vs {twice}");
    }
}

#[test]
fn untwisted_momentum_locally_lipschitz() {
    let g = grid();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut constant = 0.0_f64;
    let mut checked = 0;
    while checked < 100 {
        let u = Field::new(g, Background::kink(), random_bumps(&mut rng, &g, 0.02)).unwrap();
        let v = Field::new(g, Background::kink(), random_bumps(&mut rng, &g, 0.02)).unwrap();
        let d = distance_da(&u, &v, 10.0).unwrap();
        if d > 0.1 {
            continue;
        }
        let dp = mod_pi_distance(untwisted_momentum(&u).unwrap().untwisted, untwisted_momentum(&v).unwrap().untwisted);
        constant = constant.max(dp / d);
        checked += 1;
    }
    println!("measured Lipschitz constant near the kink: {constant:.4}");
    assert!(constant.is_finite() && constant < 10.0);

    // shrinking a fixed perturbation drives the difference monotonically to 0
    let w = random_bumps(&mut rng, &g, 0.05);
    let kink = Field::background_only(g, Background::kink()).unwrap();
    let p0 = untwisted_momentum(&kink).unwrap().untwisted;
    let diffs: Vec<f64> = (0..12)
        .map(|k| {
            let s = 0.5_f64.powi(k);
            let f = Field::new(g, Background::kink(), w.iter().map(|w| s * w).collect()).unwrap();
            mod_pi_distance(untwisted_momentum(&f).unwrap().untwisted, p0)
        })
        .collect();
    assert!(diffs.windows(2).all(|d| d[1] < d[0]), "{diffs:?}");
    // first order in the perturbation size
    assert!(diffs[11] < 1e-3 * diffs[0]);
}

#[test]
fn winding_error_shrinks_fourfold() {
    for (q, mu) in [(1.0 / 32.0, 0.25), (-0.01, 0.1), (0.003, 0.0)] {
        let err = |r: usize| (winding_insert(q, mu, r).unwrap().momentum() - q).abs();
        let ratio = err(512) / err(1024);
        assert!(ratio >= 3.99, "q = {q}, μ = {mu}: ratio {ratio}");
    }
}
