//! FFT-based operators on periodic and twisted-periodic samples.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::GridSpec;

/// Spectral differentiation, shifts and Fourier multipliers on one grid.
///
/// Samples are read as a map with `w(x + 2L) = e^{iΔ} w(x)` for a fixed
/// twist `Δ` (`Δ = 0` is the plain periodic case).  Such a map is
/// `e^{iκx} u(x)` with `u` periodic and `κ = Δ/2L`, so every multiplier is
/// applied to `u` at the shifted wavenumbers `k + κ`.
///
/// Plans are built once; every call allocates its own scratch so a
/// `Spectral` can be shared between threads.
#[derive(Clone)]
pub struct Spectral {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    k: Vec<f64>,
    bloch: Option<Vec<Complex64>>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral")
            .field("n", &self.n)
            .field("twisted", &self.bloch.is_some())
            .finish()
    }
}

impl Spectral {
    pub fn new(grid: &GridSpec) -> Self {
        Self::twisted(grid, 0.0)
    }

    /// Operators for maps with `w(x + 2L) = e^{iΔ} w(x)`.
    pub fn twisted(grid: &GridSpec, twist: f64) -> Self {
        let n = grid.len();
        let kappa = twist / (2.0 * grid.half_length());
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            k: (0..n).map(|m| grid.wavenumber(m) + kappa).collect(),
            bloch: (twist != 0.0)
                .then(|| grid.nodes().map(|x| Complex64::from_polar(1.0, kappa * x)).collect()),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn is_twisted(&self) -> bool {
        self.bloch.is_some()
    }

    /// Wavenumbers `k_m + κ` of the Fourier modes.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.k
    }

    /// Plain DFT of the samples, ignoring the twist.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.forward.process(data);
    }

    /// Inverse DFT including the `1/N` normalization, ignoring the twist.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.inverse.process(data);
        let scale = 1.0 / self.n as f64;
        data.iter_mut().for_each(|z| *z *= scale);
    }

    /// Applies `f(m, k_m + κ)` to every Fourier mode.
    pub fn apply<F>(&self, data: &mut [Complex64], mut multiplier: F)
    where
        F: FnMut(usize, f64) -> Complex64,
    {
        if let Some(b) = &self.bloch {
            data.iter_mut().zip(b).for_each(|(z, b)| *z *= b.conj());
        }
        self.forward(data);
        for (m, (z, &k)) in data.iter_mut().zip(&self.k).enumerate() {
            *z *= multiplier(m, k);
        }
        self.inverse(data);
        if let Some(b) = &self.bloch {
            data.iter_mut().zip(b).for_each(|(z, b)| *z *= b);
        }
    }

    /// First derivative; the Nyquist mode is dropped.
    pub fn derivative(&self, w: &[Complex64]) -> Vec<Complex64> {
        let nyquist = self.n / 2;
        let mut out = w.to_vec();
        self.apply(&mut out, |m, k| {
            if m == nyquist {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, k)
            }
        });
        out
    }

    pub fn second_derivative(&self, w: &[Complex64]) -> Vec<Complex64> {
        let mut out = w.to_vec();
        self.apply(&mut out, |_, k| Complex64::new(-k * k, 0.0));
        out
    }

    /// Samples of `w(· + a)` for the band-limited interpolant of `w`.
    pub fn shift(&self, w: &[Complex64], a: f64) -> Vec<Complex64> {
        let nyquist = self.n / 2;
        let twisted = self.is_twisted();
        let mut out = w.to_vec();
        self.apply(&mut out, |m, k| {
            if m == nyquist && !twisted {
                Complex64::new((k * a).cos(), 0.0)
            } else {
                Complex64::from_polar(1.0, k * a)
            }
        });
        out
    }

    /// `w` with its Nyquist mode removed.
    pub fn resolved(&self, w: &[Complex64]) -> Vec<Complex64> {
        let nyquist = self.n / 2;
        let mut out = w.to_vec();
        self.apply(&mut out, |m, _| Complex64::new(if m == nyquist { 0.0 } else { 1.0 }, 0.0));
        out
    }

    /// `(1 − ∂²)^{-1}`, the H¹ Riesz map used to precondition gradient flows.
    ///
    /// The Nyquist mode is removed as well: [`Spectral::derivative`] does not
    /// see it, so the discrete energy barely controls it and a flow left free
    /// to move along it drifts there.
    pub fn smooth(&self, w: &[Complex64]) -> Vec<Complex64> {
        let nyquist = self.n / 2;
        let mut out = w.to_vec();
        self.apply(&mut out, |m, k| {
            if m == nyquist {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(1.0 / (1.0 + k * k), 0.0)
            }
        });
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(grid: &GridSpec, x0: f64) -> Vec<Complex64> {
        grid.nodes()
            .map(|x| Complex64::new((-(x - x0).powi(2)).exp(), 0.5 * (-(x - x0).powi(2)).exp()))
            .collect()
    }

    #[test]
    fn derivatives_of_gaussian() {
        let g = GridSpec::new(20.0, 512).unwrap();
        let s = Spectral::new(&g);
        let w = gaussian(&g, 1.0);
        let d = s.derivative(&w);
        let d2 = s.second_derivative(&w);
        for (j, x) in g.nodes().enumerate() {
            let e = (-(x - 1.0).powi(2)).exp();
            let exact = Complex64::new(1.0, 0.5) * (-2.0 * (x - 1.0) * e);
            let exact2 = Complex64::new(1.0, 0.5) * ((4.0 * (x - 1.0).powi(2) - 2.0) * e);
            assert!((d[j] - exact).norm() < 1e-11);
            assert!((d2[j] - exact2).norm() < 1e-10);
        }
    }

    #[test]
    fn shift_moves_profile() {
        let g = GridSpec::new(20.0, 512).unwrap();
        let s = Spectral::new(&g);
        let w = gaussian(&g, 0.0);
        let shifted = s.shift(&w, 0.37);
        let exact = gaussian(&g, -0.37);
        for (a, b) in shifted.iter().zip(&exact) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn twisted_derivative_and_shift() {
        // e^{ix/2} on [−π, π) picks up e^{iπ} over one period
        let g = GridSpec::new(std::f64::consts::PI, 64).unwrap();
        let s = Spectral::twisted(&g, std::f64::consts::PI);
        let w: Vec<_> = g.nodes().map(|x| Complex64::from_polar(1.0, 0.5 * x)).collect();
        let d = s.derivative(&w);
        for (a, b) in d.iter().zip(&w) {
            assert!((a - Complex64::new(0.0, 0.5) * b).norm() < 1e-12);
        }
        let shifted = s.shift(&w, 0.3);
        for (x, z) in g.nodes().zip(&shifted) {
            assert!((z - Complex64::from_polar(1.0, 0.5 * (x + 0.3))).norm() < 1e-12);
        }
    }
}
