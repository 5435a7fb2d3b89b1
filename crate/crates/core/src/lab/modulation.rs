//! Fitting the modulation parameters `(a, θ)` that place a map closest to
//! the orbit `{e^{iθ}𝔳₀(· − a)}` in the distance `d_A`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::functionals::distance_of_samples;
use crate::grid::GridSpec;
use crate::profiles::SolitonParams;
use crate::spectral::Spectral;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ModulationFit {
    pub a: f64,
    pub theta: f64,
    /// `d_A(v(· + a), e^{iθ}𝔳₀)`.
    pub residual: f64,
}

const GOLDEN: f64 = 0.618_033_988_749_894_8;

struct Fitter<'a> {
    f: &'a Field,
    grid: GridSpec,
    window: f64,
    spectral: Spectral,
    twist: Complex64,
    w: Vec<Complex64>,
    dw: Vec<Complex64>,
    kink: Vec<Complex64>,
    dkink: Vec<Complex64>,
}

impl<'a> Fitter<'a> {
    fn new(f: &'a Field, window: f64) -> Self {
        let grid = *f.grid();
        let spectral = f.spectral();
        let kink = SolitonParams::kink();
        Self {
            f,
            window,
            twist: Complex64::from_polar(1.0, f.background().twist()),
            w: f.perturbation().to_vec(),
            dw: spectral.derivative(f.perturbation()),
            kink: grid.nodes().map(|x| kink.value(x)).collect(),
            dkink: grid.nodes().map(|x| kink.derivative(x)).collect(),
            spectral,
            grid,
        }
    }

    /// `w(x_j + k·dx)`, continued past the grid ends with the twist.
    fn index_shift(&self, w: &[Complex64], k: isize) -> Vec<Complex64> {
        let n = w.len() as isize;
        (0..n)
            .map(|j| {
                let m = j + k;
                if m >= n {
                    w[(m - n) as usize] * self.twist
                } else if m < 0 {
                    w[(m + n) as usize] * self.twist.conj()
                } else {
                    w[m as usize]
                }
            })
            .collect()
    }

    /// Samples of `v(· + a)` and its derivative.
    fn shifted(&self, a: f64, w: Vec<Complex64>, dw: Vec<Complex64>) -> (Vec<Complex64>, Vec<Complex64>) {
        let bg = self.f.background();
        let v = self.grid.nodes().zip(w).map(|(x, w)| bg.value(x + a) + w).collect();
        let dv = self.grid.nodes().zip(dw).map(|(x, d)| bg.derivative(x + a) + d).collect();
        (v, dv)
    }

    fn at_index(&self, k: isize) -> (Vec<Complex64>, Vec<Complex64>) {
        let a = k as f64 * self.grid.dx();
        self.shifted(a, self.index_shift(&self.w, k), self.index_shift(&self.dw, k))
    }

    fn at(&self, a: f64) -> (Vec<Complex64>, Vec<Complex64>) {
        self.shifted(a, self.spectral.shift(&self.w, a), self.spectral.shift(&self.dw, a))
    }

    /// Best phase for the shifted samples, and the resulting residual.
    fn score(&self, v: &[Complex64], dv: &[Complex64]) -> Result<(f64, f64)> {
        let mut corr = Complex64::default();
        let mut norm = 0.0;
        for ((x, v), k) in self.grid.nodes().zip(v).zip(&self.kink) {
            if x.abs() <= self.window {
                corr += v * k.conj();
                norm += k.norm_sqr();
            }
        }
        if corr.norm() <= 1e-12 * norm.max(1.0) {
            return Err(Error::Fit(format!(
                "correlation with the kink vanishes on [−A, A]; window A = {} is too small",
                self.window
            )));
        }
        let theta = corr.arg();
        let rot = Complex64::from_polar(1.0, theta);
        let reference: Vec<_> = self.kink.iter().map(|k| rot * k).collect();
        let dreference: Vec<_> = self.dkink.iter().map(|k| rot * k).collect();
        let residual = distance_of_samples(&self.grid, v, dv, &reference, &dreference, self.window)?;
        Ok((theta, residual))
    }
}

/// Coarse search over shifts `a = 4k·dx`, `|a| ≤ L/2`, with the phase from
/// the correlation `arg ∫_{−A}^{A} v(x + a) 𝔳₀(x) dx`, followed by a
/// golden-section refinement of `a` to `dx/100`.
pub fn fit_modulation(f: &Field, window_a: f64) -> Result<ModulationFit> {
    let grid = *f.grid();
    if !(window_a > 0.0) || window_a > grid.half_length() {
        return Err(Error::Domain(format!("window A = {window_a} must lie in (0, L]")));
    }
    let fitter = Fitter::new(f, window_a);
    let dx = grid.dx();
    let reach = (0.5 * grid.half_length() / (4.0 * dx)).floor() as isize;
    let mut best: Option<ModulationFit> = None;
    let mut degenerate = None;
    for k in -reach..=reach {
        let (v, dv) = fitter.at_index(4 * k);
        match fitter.score(&v, &dv) {
            Ok((theta, residual)) => {
                if best.map_or(true, |b| residual < b.residual) {
                    best = Some(ModulationFit { a: 4.0 * k as f64 * dx, theta, residual });
                }
            }
            Err(e) => degenerate = Some(e),
        }
    }
    let Some(mut best) = best else {
        return Err(degenerate.unwrap_or_else(|| Error::Fit("empty search lattice".into())));
    };
    let eval = |a: f64| -> Result<ModulationFit> {
        let (v, dv) = fitter.at(a);
        let (theta, residual) = fitter.score(&v, &dv)?;
        Ok(ModulationFit { a, theta, residual })
    };
    let (mut lo, mut hi) = (best.a - 4.0 * dx, best.a + 4.0 * dx);
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let mut f1 = eval(x1)?;
    let mut f2 = eval(x2)?;
    while hi - lo > dx / 100.0 {
        if f1.residual < f2.residual {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = eval(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = eval(x2)?;
        }
    }
    for cand in [f1, f2] {
        if cand.residual < best.residual {
            best = cand;
        }
    }
    Ok(best)
}
