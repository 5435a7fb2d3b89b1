use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Uniform periodic grid on `[−L, L)` with `N` nodes `x_j = −L + j·dx`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GridSpec {
    half_length: f64,
    n_points: usize,
}

impl GridSpec {
    pub fn new(half_length: f64, n_points: usize) -> Result<Self> {
        if !(half_length > 0.0) || !half_length.is_finite() {
            return Err(Error::Grid(format!("half length must be positive, got {half_length}")));
        }
        if n_points < 8 || !n_points.is_power_of_two() {
            return Err(Error::Grid(format!(
                "point count must be a power of two ≥ 8, got {n_points}"
            )));
        }
        Ok(Self { half_length, n_points })
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_length / self.n_points as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        -self.half_length + j as f64 * self.dx()
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n_points).map(move |j| self.x(j))
    }

    /// Index of the node at `x = 0`.
    pub fn center(&self) -> usize {
        self.n_points / 2
    }

    /// Angular wavenumber of FFT bin `m`, in `[−π/dx, π/dx)`.
    pub fn wavenumber(&self, m: usize) -> f64 {
        let n = self.n_points as isize;
        let m = m as isize;
        let signed = if m < n / 2 { m } else { m - n };
        PI / self.half_length * signed as f64
    }

    /// Same grid with `N` multiplied by `factor` (a power of two).
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(self.half_length, self.n_points * factor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(GridSpec::new(10.0, 4).is_err());
        assert!(GridSpec::new(10.0, 100).is_err());
        assert!(GridSpec::new(0.0, 64).is_err());
        assert!(GridSpec::new(-1.0, 64).is_err());
        assert!(GridSpec::new(f64::NAN, 64).is_err());
    }

    #[test]
    fn nodes_and_spacing() {
        let g = GridSpec::new(40.0, 4096).unwrap();
        assert_eq!(g.dx(), 80.0 / 4096.0);
        assert_eq!(g.x(0), -40.0);
        assert_eq!(g.x(g.center()), 0.0);
        assert_eq!(g.x(2560), 10.0);
        assert_eq!(g.nodes().len(), 4096);
        assert_eq!(g.wavenumber(1), PI / 40.0);
        assert_eq!(g.wavenumber(4095), -PI / 40.0);
        assert_eq!(g.wavenumber(2048), -PI / 40.0 * 2048.0);
    }
}
