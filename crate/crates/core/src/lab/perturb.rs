//! Seeded perturbations of a traveling wave at a prescribed distance.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Error, Result};
use crate::field::{Background, Field};
use crate::functionals::distance_da;
use crate::grid::GridSpec;
use crate::profiles::SolitonParams;

/// Relative accuracy of the rescaling to the target distance.
const DISTANCE_RTOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerturbationSpec {
    /// Target `d_A` distance from the unperturbed wave.
    pub epsilon: f64,
    /// Window half-width `A`; bump centers lie in `[−A, A]`.
    pub window_a: f64,
    pub seed: u64,
    pub n_bumps: usize,
    /// Range of Gaussian widths.
    pub bump_width_range: (f64, f64),
}

impl Default for PerturbationSpec {
    fn default() -> Self {
        Self { epsilon: 0.05, window_a: 10.0, seed: 1, n_bumps: 3, bump_width_range: (0.5, 2.0) }
    }
}

impl PerturbationSpec {
    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        let (lo, hi) = self.bump_width_range;
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return domain(format!("ε = {} must be non-negative", self.epsilon));
        }
        if !(self.window_a > 0.0) || self.window_a > grid.half_length() {
            return domain(format!("window A = {} must lie in (0, L]", self.window_a));
        }
        if self.n_bumps == 0 {
            return domain("at least one bump is required");
        }
        if !(lo > 0.0 && lo <= hi) {
            return domain(format!("invalid bump width range ({lo}, {hi})"));
        }
        Ok(())
    }

    /// The unscaled sum of bumps drawn from the seed.
    fn bumps(&self, grid: &GridSpec) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let (lo, hi) = self.bump_width_range;
        let mut w = vec![Complex64::default(); grid.len()];
        for _ in 0..self.n_bumps {
            let width = if lo < hi { rng.gen_range(lo..hi) } else { lo };
            let reach = (self.window_a - 3.0 * width).max(0.0);
            let center = if reach > 0.0 { rng.gen_range(-reach..reach) } else { 0.0 };
            let amp = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            for (z, x) in w.iter_mut().zip(grid.nodes()) {
                *z += amp * (-((x - center) / width).powi(2)).exp();
            }
        }
        w
    }
}

/// `V₀ + s·b` where `b` is the seeded bump sum and `s` is chosen by
/// bisection so that `d_A(V₀ + s·b, V₀) = ε` to within 0.1%.
pub fn make_perturbed(spec: &PerturbationSpec, grid: &GridSpec, params: SolitonParams) -> Result<Field> {
    spec.validate(grid)?;
    let base = Field::background_only(*grid, Background::Soliton(params))?;
    if spec.epsilon == 0.0 {
        return Ok(base);
    }
    let bumps = spec.bumps(grid);
    let at = |s: f64| -> Result<(Field, f64)> {
        let f = base.with_perturbation(bumps.iter().map(|b| s * b).collect())?;
        f.validate()?;
        let d = distance_da(&f, &base, spec.window_a)?;
        Ok((f, d))
    };
    let unreachable = || Error::Domain(format!(
        "distance ε = {} is not reachable with bump widths {:?}",
        spec.epsilon, spec.bump_width_range
    ));
    let (mut lo, mut hi) = (0.0, spec.epsilon);
    let mut grown = 0;
    while at(hi)?.1 < spec.epsilon {
        lo = hi;
        hi *= 2.0;
        grown += 1;
        if grown > 60 {
            return Err(unreachable());
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let (f, d) = at(mid)?;
        if (d - spec.epsilon).abs() <= DISTANCE_RTOL * spec.epsilon {
            return Ok(f);
        }
        if d < spec.epsilon {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(unreachable())
}

/// A perturbation of the black soliton `𝔳₀`.
pub fn make_perturbed_kink(spec: &PerturbationSpec, grid: &GridSpec) -> Result<Field> {
    make_perturbed(spec, grid, SolitonParams::kink())
}
