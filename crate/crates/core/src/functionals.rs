//! Energy, mass, momenta and distances on [`Field`]s, plus the dip locator
//! and the phase-winding insertion.
//!
//! Integrals are rectangle sums over the periodic grid (spectrally accurate
//! for the decaying integrands involved) plus the closed-form contribution of
//! the background on `|x| ≥ L` where one is available.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::field::{Background, Field};
use crate::profiles::signed_momentum;
use crate::spectral::Spectral;

/// Real inner product `⟨a, b⟩ = Re(a b̄)` on ℂ ≅ ℝ².
#[inline]
pub fn dot(a: Complex64, b: Complex64) -> f64 {
    a.re * b.re + a.im * b.im
}

/// `⟨i a, b⟩`.
#[inline]
pub fn twist(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

/// Representative of `x mod π` in `(−π/2, π/2]`.
pub fn canonical_mod_pi(x: f64) -> f64 {
    let mut r = x - PI * (x / PI).round();
    if r <= -FRAC_PI_2 {
        r += PI;
    } else if r > FRAC_PI_2 {
        r -= PI;
    }
    r
}

/// Distance between two classes of ℝ/πℤ.
pub fn mod_pi_distance(a: f64, b: f64) -> f64 {
    canonical_mod_pi(a - b).abs()
}

/// The representative of `value mod π` closest to `previous`.
pub fn lift_mod_pi(previous: f64, value: f64) -> f64 {
    previous + canonical_mod_pi(value - previous)
}

/// Energy density `½|v′|² + ¼(1 − |v|²)²`.
#[inline]
pub fn energy_density(v: Complex64, dv: Complex64) -> f64 {
    let m = 1.0 - v.norm_sqr();
    0.5 * dv.norm_sqr() + 0.25 * m * m
}

/// Ginzburg-Landau energy `½∫|v′|² + ¼∫(1 − |v|²)²`.
pub fn energy(f: &Field) -> Result<f64> {
    f.validate()?;
    Ok(energy_with(f, &f.spectral()))
}

/// Energy without the decay check, for trajectories whose radiation has
/// reached the periodic boundary.
pub fn energy_with(f: &Field, spectral: &Spectral) -> f64 {
    let v = f.values();
    let dv = f.derivative_with(spectral);
    let interior: f64 = v.iter().zip(&dv).map(|(&a, &b)| energy_density(a, b)).sum();
    interior * f.grid().dx() + f.background().tail_energy(f.grid().half_length())
}

/// Mass `½∫(|v|² − 1)`.
pub fn mass(f: &Field) -> Result<f64> {
    f.validate()?;
    Ok(mass_unchecked(f))
}

pub fn mass_unchecked(f: &Field) -> f64 {
    let interior: f64 = f.values().iter().map(|z| z.norm_sqr() - 1.0).sum();
    0.5 * interior * f.grid().dx() + f.background().tail_mass(f.grid().half_length())
}

/// Untwisted momentum of a field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumValue {
    /// Representative of `[p]` in `(−π/2, π/2]`.
    pub untwisted: f64,
    /// `½∫⟨iw, w′⟩ + ∫⟨iw, V₀′⟩`, equal to `𝒫(V₀ + w) − 𝒫(V₀)`.
    pub relative_p: f64,
}

/// `[p]` of the background alone: `p(v_c) mod π` for a soliton, 0 for a constant.
pub fn background_momentum(bg: &Background) -> f64 {
    match bg {
        Background::Constant(_) => 0.0,
        Background::Soliton(p) => canonical_mod_pi(signed_momentum(p.c).unwrap_or(0.0)),
    }
}

/// `½Σ⟨iw, w′⟩ + Σ⟨iw, V₀′⟩`, the momentum carried by a decaying perturbation
/// on top of a base with derivative samples `base_derivative`.
pub fn perturbation_momentum(
    w: &[Complex64],
    dw: &[Complex64],
    base_derivative: &[Complex64],
    dx: f64,
) -> f64 {
    let sum: f64 = w
        .iter()
        .zip(dw)
        .zip(base_derivative)
        .map(|((&w, &dw), &db)| 0.5 * twist(w, dw) + twist(w, db))
        .sum();
    sum * dx
}

pub fn untwisted_momentum(f: &Field) -> Result<MomentumValue> {
    f.validate()?;
    Ok(untwisted_momentum_with(f, &f.spectral()))
}

pub fn untwisted_momentum_with(f: &Field, spectral: &Spectral) -> MomentumValue {
    let w = f.perturbation();
    let dw = spectral.derivative(w);
    let relative_p =
        perturbation_momentum(w, &dw, &f.background_derivative_samples(), f.grid().dx());
    MomentumValue {
        untwisted: canonical_mod_pi(background_momentum(f.background()) + relative_p),
        relative_p,
    }
}

/// `[p]` from the truncated limit `½∫_{−L}^{L}⟨iv, v′⟩ − ½(arg v(L) − arg v(−L))`
/// mod π, with the integral and the end values taken over the grid nodes.
/// Needs `v ≠ 0` at both ends.
pub fn truncated_untwisted_momentum(f: &Field, spectral: &Spectral) -> f64 {
    let v = f.values();
    let dv = f.derivative_with(spectral);
    let integral: f64 = v.iter().zip(&dv).map(|(&a, &b)| twist(a, b)).sum::<f64>() * f.grid().dx();
    let winding = (v[v.len() - 1] * v[0].conj()).arg();
    canonical_mod_pi(0.5 * integral - 0.5 * winding)
}

/// Renormalized momentum `p(v) = ½∫(ϱ² − 1)φ′` of a non-vanishing field, with
/// `ϱ²φ′ = ⟨iv, v′⟩`.  `None` when `v` vanishes at some node.
///
/// Only the grid interior is summed; for soliton backgrounds the density
/// decays like `e^{−4β|x|}`.
pub fn renormalized_momentum(f: &Field, spectral: &Spectral) -> Option<f64> {
    let v = f.values();
    let dv = f.derivative_with(spectral);
    renormalized_momentum_of(&v, &dv, f.grid().dx())
}

pub(crate) fn renormalized_momentum_of(v: &[Complex64], dv: &[Complex64], dx: f64) -> Option<f64> {
    let mut sum = 0.0;
    for (&v, &d) in v.iter().zip(dv) {
        let rho2 = v.norm_sqr();
        if rho2 <= 0.0 {
            return None;
        }
        sum += (1.0 - 1.0 / rho2) * twist(v, d);
    }
    Some(0.5 * sum * dx)
}

/// `d_A(f, g) = ‖f − g‖_{L∞[−A,A]} + ‖f′ − g′‖_{L²} + ‖|f| − |g|‖_{L²}`.
pub fn distance_da(f: &Field, g: &Field, a: f64) -> Result<f64> {
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch);
    }
    let (vf, vg) = (f.values(), g.values());
    let (df, dg) = (f.derivative(), g.derivative());
    distance_of_samples(f.grid(), &vf, &df, &vg, &dg, a)
}

pub(crate) fn distance_of_samples(
    grid: &crate::grid::GridSpec,
    vf: &[Complex64],
    df: &[Complex64],
    vg: &[Complex64],
    dg: &[Complex64],
    a: f64,
) -> Result<f64> {
    if !(a > 0.0) || a > grid.half_length() {
        return domain(format!("window A = {a} must lie in (0, L = {}]", grid.half_length()));
    }
    let mut sup = 0.0_f64;
    let mut deriv = 0.0;
    let mut modulus = 0.0;
    for (j, x) in grid.nodes().enumerate() {
        if x.abs() <= a {
            sup = sup.max((vf[j] - vg[j]).norm());
        }
        deriv += (df[j] - dg[j]).norm_sqr();
        modulus += (vf[j].norm() - vg[j].norm()).powi(2);
    }
    let dx = grid.dx();
    Ok(sup + (deriv * dx).sqrt() + (modulus * dx).sqrt())
}

/// Constants of the dip-counting argument for energy `E` and threshold `δ₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipConstants {
    pub r0: f64,
    pub mu0: f64,
    /// `2E/μ₀`, an upper bound on the number of unit cells containing a dip.
    pub ell0: f64,
}

impl DipConstants {
    pub fn new(energy_bound: f64, delta0: f64) -> Self {
        let r0 = (delta0 * delta0 / (8.0 * energy_bound)).min(0.5);
        let mu0 = r0 * delta0 * delta0 / 8.0;
        Self { r0, mu0, ell0: 2.0 * energy_bound / mu0 }
    }

    pub fn max_clusters(&self) -> usize {
        self.ell0.ceil() as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DipCluster {
    /// Grid nodes with `|1 − |v|| ≥ δ₀`, in increasing order.
    pub points: Vec<f64>,
    /// `[first − 1, last + 1]`.
    pub interval: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DipReport {
    pub clusters: Vec<DipCluster>,
    pub constants: DipConstants,
}

/// Finds the nodes where `|v|` departs from 1 by at least `delta0` and groups
/// nodes closer than 2 into clusters.
pub fn locate_dips(f: &Field, delta0: f64, energy_bound: f64) -> Result<DipReport> {
    if !(delta0 > 0.0 && delta0 < 1.0) {
        return domain(format!("δ₀ = {delta0} must lie in (0, 1)"));
    }
    let e = energy(f)?;
    if !(energy_bound > 0.0) || e > energy_bound * (1.0 + 1e-12) {
        return domain(format!("energy {e} exceeds the bound {energy_bound}"));
    }
    let mut clusters: Vec<DipCluster> = Vec::new();
    for (x, v) in f.grid().nodes().zip(f.values()) {
        if (1.0 - v.norm()).abs() < delta0 {
            continue;
        }
        match clusters.last_mut() {
            Some(c) if x - c.points.last().unwrap() < 2.0 => c.points.push(x),
            _ => clusters.push(DipCluster { points: vec![x], interval: (0.0, 0.0) }),
        }
    }
    for c in &mut clusters {
        c.interval = (c.points[0] - 1.0, c.points[c.points.len() - 1] + 1.0);
    }
    Ok(DipReport { clusters, constants: DipConstants::new(energy_bound, delta0) })
}

/// Largest value of `|(ϱ² − 1)φ′| − √2 e(v)/ϱ` over the nodes; the pointwise
/// bound asserts it is non-positive.  `None` if `v` vanishes at a node.
pub fn phase_bound_excess(f: &Field, spectral: &Spectral) -> Option<f64> {
    let v = f.values();
    let dv = f.derivative_with(spectral);
    let mut worst = f64::NEG_INFINITY;
    for (&v, &d) in v.iter().zip(&dv) {
        let rho = v.norm();
        if rho == 0.0 {
            return None;
        }
        let phase_rate = twist(v, d) / (rho * rho);
        let lhs = ((rho * rho - 1.0) * phase_rate).abs();
        let rhs = SQRT_2 * energy_density(v, d) / rho;
        worst = worst.max(lhs - rhs);
    }
    Some(worst)
}

/// A map on `[0, ℓ]` with equal endpoint values carrying momentum `q` at
/// energy at most `14|q|`, sampled on `M + 1` nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct WindingInsert {
    pub q: f64,
    pub mu: f64,
    pub lambda: f64,
    pub ell: f64,
    pub delta: f64,
    pub s: Vec<f64>,
    pub w: Vec<Complex64>,
}

fn tent_half(u: f64) -> f64 {
    if u <= 0.5 {
        u
    } else if u <= 1.0 {
        1.0 - u
    } else {
        0.0
    }
}

fn tent_full(u: f64) -> f64 {
    if u <= 1.0 {
        u
    } else {
        2.0 - u
    }
}

/// Builds the winding insertion for momentum `q` and modulus defect `mu`.
///
/// With `λ = 1/(8|q|)`, `δ = min(μ², 1/λ)`:
/// `w = √(1 − δ − f_λ) e^{∓iψ_λ}` on `[0, 2λ]`, where `f_λ(s) = f(s/λ)/λ` and
/// `ψ_λ(s) = ψ(s/λ)` are rescaled tents.  The phase turns clockwise for `q > 0`.
pub fn winding_insert(q: f64, mu: f64, resolution: usize) -> Result<WindingInsert> {
    if !(q != 0.0 && q.abs() <= 1.0 / 32.0) {
        return domain(format!("momentum q = {q} must satisfy 0 < |q| ≤ 1/32"));
    }
    if !(0.0..=0.25).contains(&mu) {
        return domain(format!("μ = {mu} must lie in [0, 1/4]"));
    }
    if resolution < 4 || resolution % 4 != 0 {
        return domain(format!("resolution {resolution} must be a positive multiple of 4"));
    }
    let lambda = 1.0 / (8.0 * q.abs());
    let ell = 2.0 * lambda;
    let delta = (mu * mu).min(1.0 / lambda);
    let sign = if q > 0.0 { -1.0 } else { 1.0 };
    let m = resolution as f64;
    let (s, w) = (0..=resolution)
        .map(|k| {
            let u = 2.0 * k as f64 / m;
            let f = tent_half(u) / lambda;
            let rho = (1.0 - delta - f).sqrt();
            (u * lambda, Complex64::from_polar(rho, sign * tent_full(u)))
        })
        .unzip();
    Ok(WindingInsert { q, mu, lambda, ell, delta, s, w })
}

impl WindingInsert {
    fn step(&self) -> f64 {
        self.ell / (self.w.len() - 1) as f64
    }

    /// `½∫⟨iw, w′⟩` by the chord rule `½Σ⟨i w_k, w_{k+1}⟩`, second order.
    pub fn momentum(&self) -> f64 {
        0.5 * self.w.windows(2).map(|p| twist(p[0], p[1])).sum::<f64>()
    }

    /// `½∫|w′|² + ¼∫(1 − |w|²)²` with forward differences and the trapezoid rule.
    pub fn energy(&self) -> f64 {
        let h = self.step();
        self.w
            .windows(2)
            .map(|p| {
                let kinetic = 0.5 * (p[1] - p[0]).norm_sqr() / h;
                let pa = (1.0 - p[0].norm_sqr()).powi(2);
                let pb = (1.0 - p[1].norm_sqr()).powi(2);
                kinetic + 0.125 * (pa + pb) * h
            })
            .sum()
    }

    pub fn endpoints(&self) -> (Complex64, Complex64) {
        (self.w[0], self.w[self.w.len() - 1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::profiles::{soliton_energy, soliton_mass, soliton_momentum, SolitonParams, KINK_ENERGY};

    fn soliton_field(grid: GridSpec, c: f64) -> Field {
        Field::background_only(grid, Background::Soliton(SolitonParams::new(c, 0.0, 0.0).unwrap()))
            .unwrap()
    }

    #[test]
    fn mod_pi_canonical_range() {
        assert_eq!(canonical_mod_pi(FRAC_PI_2), FRAC_PI_2);
        assert!((canonical_mod_pi(-FRAC_PI_2) - FRAC_PI_2).abs() < 1e-15);
        assert!((canonical_mod_pi(FRAC_PI_2 + PI) - FRAC_PI_2).abs() < 1e-14);
        assert!((canonical_mod_pi(0.3 + 5.0 * PI) - 0.3).abs() < 1e-13);
        assert!(mod_pi_distance(FRAC_PI_2 - 1e-9, -FRAC_PI_2 + 1e-9) < 3e-9);
        assert!((lift_mod_pi(1.5, -1.6) - (PI - 1.6)).abs() < 1e-15);
    }

    #[test]
    fn kink_energy_and_mass() {
        let g = GridSpec::new(40.0, 4096).unwrap();
        let f = soliton_field(g, 0.0);
        assert!((energy(&f).unwrap() - 0.9428090416).abs() < 1e-8);
        assert!((mass(&f).unwrap() + SQRT_2).abs() < 1e-8);
    }

    #[test]
    fn constant_has_no_energy() {
        let g = GridSpec::new(10.0, 64).unwrap();
        let f = Field::background_only(g, Background::one()).unwrap();
        assert_eq!(energy(&f).unwrap(), 0.0);
        assert_eq!(mass(&f).unwrap(), 0.0);
        assert_eq!(untwisted_momentum(&f).unwrap().untwisted, 0.0);
    }

    #[test]
    fn gray_soliton_invariants() {
        let g = GridSpec::new(40.0, 4096).unwrap();
        let f = soliton_field(g, 1.0);
        assert!((mass(&f).unwrap() + 1.0).abs() < 1e-8);
        assert!((energy(&f).unwrap() - soliton_energy(1.0).unwrap()).abs() < 1e-8);
        let p = untwisted_momentum(&soliton_field(g, 0.5)).unwrap();
        assert!((p.untwisted - soliton_momentum(0.5).unwrap()).abs() < 1e-10);
        assert_eq!(untwisted_momentum(&soliton_field(g, 0.0)).unwrap().untwisted, FRAC_PI_2);
        for c in [0.0, 0.5, 1.0, 1.3] {
            let f = soliton_field(g, c);
            let p = truncated_untwisted_momentum(&f, &f.spectral());
            let exact = canonical_mod_pi(signed_momentum(c).unwrap());
            assert!(mod_pi_distance(p, exact) < 1e-8, "c = {c}: {p} vs {exact}");
        }
        assert!((soliton_mass(1.0).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn energy_converges_under_refinement() {
        let bump = |x: f64| Complex64::new(1.0 + 0.1 * (-x * x).exp(), 0.0);
        let coarse = Field::from_fn(GridSpec::new(20.0, 512).unwrap(), Background::one(), bump).unwrap();
        let fine = Field::from_fn(GridSpec::new(20.0, 2048).unwrap(), Background::one(), bump).unwrap();
        assert!((energy(&coarse).unwrap() - energy(&fine).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn non_decayed_field_is_rejected() {
        let g = GridSpec::new(10.0, 256).unwrap();
        let f = Field::from_fn(g, Background::one(), |x| Complex64::new(1.0, 0.01 * x)).unwrap();
        assert!(matches!(energy(&f), Err(Error::InvalidField(_))));
        assert!(mass(&f).is_err());
        assert!(untwisted_momentum(&f).is_err());
    }

    #[test]
    fn distance_identity_and_sign_flip() {
        let g = GridSpec::new(40.0, 4096).unwrap();
        let f = soliton_field(g, 0.0);
        assert_eq!(distance_da(&f, &f, 10.0).unwrap(), 0.0);
        let minus = Field::background_only(
            g,
            Background::Soliton(SolitonParams::new(0.0, 0.0, PI).unwrap()),
        )
        .unwrap();
        let expected = 2.0 * (10.0 / SQRT_2).tanh() + 2.0 * KINK_ENERGY.sqrt();
        let d = distance_da(&f, &minus, 10.0).unwrap();
        assert!((d - expected).abs() < 1e-4, "{d} vs {expected}");
        assert!((d - 3.9420).abs() < 1e-4);
    }

    #[test]
    fn distance_errors() {
        let f = soliton_field(GridSpec::new(40.0, 256).unwrap(), 0.0);
        let g = soliton_field(GridSpec::new(40.0, 512).unwrap(), 0.0);
        assert!(matches!(distance_da(&f, &g, 1.0), Err(Error::GridMismatch)));
        assert!(distance_da(&f, &f, 41.0).is_err());
        assert!(distance_da(&f, &f, 0.0).is_err());
    }

    #[test]
    fn distance_to_grid_shift_is_first_order() {
        let mut previous = f64::INFINITY;
        for n in [1024, 2048, 4096] {
            let g = GridSpec::new(40.0, n).unwrap();
            let f = soliton_field(g, 0.0);
            let shifted = Field::background_only(
                g,
                Background::Soliton(SolitonParams::new(0.0, g.dx(), 0.0).unwrap()),
            )
            .unwrap();
            let d = distance_da(&f, &shifted, 10.0).unwrap();
            // sup|v₀′| + ‖v₀″‖ + ‖v₀′‖ ≈ 0.71 + 0.56 + 0.97
            assert!(d <= 2.5 * g.dx());
            assert!(d < 0.55 * previous);
            previous = d;
        }
    }

    #[test]
    fn kink_dip() {
        let g = GridSpec::new(40.0, 4096).unwrap();
        let report = locate_dips(&soliton_field(g, 0.0), 0.5, 1.0).unwrap();
        assert_eq!(report.clusters.len(), 1);
        let edge = SQRT_2 * 0.5f64.atanh();
        let expected: Vec<f64> = g.nodes().filter(|x| x.abs() <= edge).collect();
        assert_eq!(report.clusters[0].points, expected);
        assert!(report.clusters[0].interval.0 < 0.0 && report.clusters[0].interval.1 > 0.0);
        assert!(report.clusters.len() <= report.constants.max_clusters());
    }

    #[test]
    fn constant_has_no_dips() {
        let g = GridSpec::new(10.0, 64).unwrap();
        let f = Field::background_only(g, Background::one()).unwrap();
        assert!(locate_dips(&f, 0.5, 1.0).unwrap().clusters.is_empty());
    }

    #[test]
    fn two_dips() {
        let g = GridSpec::new(40.0, 4096).unwrap();
        let f = Field::from_fn(g, Background::kink(), |x| {
            Complex64::new((x / SQRT_2).tanh() - (-(x - 20.0).powi(2)).exp(), 0.0)
        })
        .unwrap();
        let e = energy(&f).unwrap();
        let report = locate_dips(&f, 0.5, e).unwrap();
        assert_eq!(report.clusters.len(), 2);
        let second = &report.clusters[1];
        assert!(second.interval.0 < 20.0 && second.interval.1 > 20.0);
    }

    #[test]
    fn dip_locator_errors() {
        let g = GridSpec::new(40.0, 1024).unwrap();
        let f = soliton_field(g, 0.0);
        assert!(locate_dips(&f, 0.0, 1.0).is_err());
        assert!(locate_dips(&f, 1.0, 1.0).is_err());
        assert!(locate_dips(&f, 0.5, 0.5).is_err());
    }

    #[test]
    fn winding_at_largest_momentum() {
        let wi = winding_insert(1.0 / 32.0, 0.25, 1 << 15).unwrap();
        assert_eq!(wi.lambda, 4.0);
        assert_eq!(wi.ell, 8.0);
        assert_eq!(wi.delta, 1.0 / 16.0);
        assert!((wi.momentum() - 1.0 / 32.0).abs() < 1e-8);
        assert!(wi.energy() <= 14.0 / 32.0);
        let (a, b) = wi.endpoints();
        assert_eq!(a, b);
    }

    #[test]
    fn winding_without_modulus_defect() {
        let wi = winding_insert(0.01, 0.0, 1 << 12).unwrap();
        assert_eq!(wi.delta, 0.0);
        assert_eq!(wi.w[0].norm(), 1.0);
    }

    #[test]
    fn winding_sign_symmetry() {
        let plus = winding_insert(1.0 / 64.0, 0.1, 1 << 15).unwrap();
        let minus = winding_insert(-1.0 / 64.0, 0.1, 1 << 15).unwrap();
        for (a, b) in plus.w.iter().zip(&minus.w) {
            assert_eq!(a.norm(), b.norm());
            assert_eq!(*a, b.conj());
        }
        assert!((minus.momentum() + 1.0 / 64.0).abs() < 1e-8);
    }

    #[test]
    fn winding_momentum_converges_at_second_order() {
        for (q, mu) in [(1.0 / 32.0, 0.25), (-0.01, 0.1), (0.003, 0.0)] {
            let e1 = (winding_insert(q, mu, 256).unwrap().momentum() - q).abs();
            let e2 = (winding_insert(q, mu, 512).unwrap().momentum() - q).abs();
            assert!(e1 / e2 >= 3.99, "q = {q}: ratio {}", e1 / e2);
        }
    }

    #[test]
    fn winding_rejects_bad_arguments() {
        assert!(winding_insert(0.0, 0.1, 64).is_err());
        assert!(winding_insert(0.04, 0.1, 64).is_err());
        assert!(winding_insert(0.01, 0.3, 64).is_err());
        assert!(winding_insert(0.01, -0.1, 64).is_err());
        assert!(winding_insert(0.01, 0.1, 30).is_err());
    }
}
