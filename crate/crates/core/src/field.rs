//! Maps of the energy space as `v = V₀ + w`: an analytic background `V₀`
//! plus a perturbation `w` sampled on the grid and treated as periodic.
//!
//! # Binary encoding
//!
//! [`Field::to_bytes`] writes a little-endian record:
//!
//! | bytes | content |
//! |-------|---------|
//! | 4     | magic `GPFD` |
//! | 4     | format version, `u32` = 1 |
//! | 8     | half length `L`, `f64` |
//! | 8     | point count `N`, `u64` |
//! | 1     | background tag: 0 = constant, 1 = soliton |
//! | 24    | constant: `re, im, 0.0`; soliton: `c, a, θ` (three `f64`) |
//! | 16·N  | perturbation samples, interleaved `re, im` (`f64`) |

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::profiles::SolitonParams;
use crate::spectral::Spectral;

const MAGIC: &[u8; 4] = b"GPFD";
const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 8 + 8 + 1 + 24;

/// Relative size of `|w|` at the grid ends above which a field is rejected.
pub const DECAY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum Background {
    /// A constant of modulus one.
    Constant(Complex64),
    Soliton(SolitonParams),
}

impl Background {
    pub fn one() -> Self {
        Background::Constant(Complex64::new(1.0, 0.0))
    }

    pub fn kink() -> Self {
        Background::Soliton(SolitonParams::kink())
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Background::Constant(z) if (z.norm() - 1.0).abs() > 1e-12 => Err(Error::InvalidField(
                format!("constant background must have modulus one, got |{z}|"),
            )),
            Background::Soliton(p) => SolitonParams::new(p.c, p.a, p.theta).map(|_| ()),
            _ => Ok(()),
        }
    }

    pub fn value(&self, x: f64) -> Complex64 {
        match self {
            Background::Constant(z) => *z,
            Background::Soliton(p) => p.value(x),
        }
    }

    pub fn derivative(&self, x: f64) -> Complex64 {
        match self {
            Background::Constant(_) => Complex64::new(0.0, 0.0),
            Background::Soliton(p) => p.derivative(x),
        }
    }

    pub fn second_derivative(&self, x: f64) -> Complex64 {
        match self {
            Background::Constant(_) => Complex64::new(0.0, 0.0),
            Background::Soliton(p) => p.second_derivative(x),
        }
    }

    /// Limits at `−∞` and `+∞`.
    pub fn limits(&self) -> (Complex64, Complex64) {
        match self {
            Background::Constant(z) => (*z, *z),
            Background::Soliton(p) => p.limits(),
        }
    }

    /// Phase jump `Δ ∈ (−π, π]` between the limits, `V₀(+∞) = e^{iΔ}V₀(−∞)`.
    pub fn twist(&self) -> f64 {
        let (left, right) = self.limits();
        let d = (right * left.conj()).arg();
        if d <= -std::f64::consts::PI + 1e-15 {
            std::f64::consts::PI
        } else {
            d
        }
    }

    /// Energy of the background on `|x| ≥ L`.
    pub fn tail_energy(&self, half_length: f64) -> f64 {
        match self {
            Background::Constant(_) => 0.0,
            Background::Soliton(p) => {
                // e(v_c) = ½ α⁴ sech⁴(β(x − a))
                let (alpha, beta) = (p.amplitude(), p.inverse_width());
                if beta == 0.0 {
                    return 0.0;
                }
                let right = sech4_tail(beta * (half_length - p.a));
                let left = sech4_tail(beta * (half_length + p.a));
                0.5 * alpha.powi(4) * (right + left) / beta
            }
        }
    }

    /// `½∫(|V₀|² − 1)` over `|x| ≥ L`.
    pub fn tail_mass(&self, half_length: f64) -> f64 {
        match self {
            Background::Constant(_) => 0.0,
            Background::Soliton(p) => {
                // ½(|v_c|² − 1) = −½ α² sech²(β(x − a))
                let (alpha, beta) = (p.amplitude(), p.inverse_width());
                if beta == 0.0 {
                    return 0.0;
                }
                let right = one_minus_tanh(beta * (half_length - p.a));
                let left = one_minus_tanh(beta * (half_length + p.a));
                -0.5 * alpha * alpha * (right + left) / beta
            }
        }
    }
}

/// `1 − tanh y` without cancellation for large `y`.
pub(crate) fn one_minus_tanh(y: f64) -> f64 {
    if y > 0.0 {
        let e = (-2.0 * y).exp();
        2.0 * e / (1.0 + e)
    } else {
        1.0 - y.tanh()
    }
}

/// `∫_{y₀}^∞ sech⁴ = (1 − t)²(2 + t)/3` with `t = tanh y₀`.
fn sech4_tail(y0: f64) -> f64 {
    let d = one_minus_tanh(y0);
    let t = 1.0 - d;
    d * d * (2.0 + t) / 3.0
}

/// A map `v = V₀ + w` of the energy space on a truncated line.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: GridSpec,
    background: Background,
    w: Vec<Complex64>,
}

impl Field {
    pub fn new(grid: GridSpec, background: Background, w: Vec<Complex64>) -> Result<Self> {
        background.validate()?;
        if w.len() != grid.len() {
            return Err(Error::InvalidField(format!(
                "perturbation has {} samples, grid has {}",
                w.len(),
                grid.len()
            )));
        }
        if w.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidField("non-finite perturbation sample".into()));
        }
        Ok(Self { grid, background, w })
    }

    /// The background alone, `w ≡ 0`.
    pub fn background_only(grid: GridSpec, background: Background) -> Result<Self> {
        Self::new(grid, background, vec![Complex64::new(0.0, 0.0); grid.len()])
    }

    /// Builds the field whose full samples are `v`, measured against `background`.
    pub fn from_samples(grid: GridSpec, background: Background, v: &[Complex64]) -> Result<Self> {
        let w = grid.nodes().zip(v).map(|(x, &z)| z - background.value(x)).collect();
        Self::new(grid, background, w)
    }

    /// Field of `f(x)` for every node.
    pub fn from_fn<F: Fn(f64) -> Complex64>(
        grid: GridSpec,
        background: Background,
        f: F,
    ) -> Result<Self> {
        let v: Vec<_> = grid.nodes().map(f).collect();
        Self::from_samples(grid, background, &v)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn background(&self) -> &Background {
        &self.background
    }

    pub fn perturbation(&self) -> &[Complex64] {
        &self.w
    }

    pub(crate) fn perturbation_mut(&mut self) -> &mut Vec<Complex64> {
        &mut self.w
    }

    pub fn into_perturbation(self) -> Vec<Complex64> {
        self.w
    }

    pub fn with_perturbation(&self, w: Vec<Complex64>) -> Result<Self> {
        Self::new(self.grid, self.background, w)
    }

    pub fn max_perturbation(&self) -> f64 {
        self.w.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest `|w|` at the two grid ends.
    pub fn boundary_perturbation(&self) -> f64 {
        self.w[0].norm().max(self.w[self.w.len() - 1].norm())
    }

    pub fn is_decayed(&self) -> bool {
        self.boundary_perturbation() <= DECAY_TOLERANCE * self.max_perturbation().max(1.0)
    }

    /// Fails unless the perturbation has decayed before the grid ends.
    pub fn validate(&self) -> Result<()> {
        if self.is_decayed() {
            Ok(())
        } else {
            Err(Error::InvalidField(format!(
                "perturbation has not decayed at the boundary: |w| = {:.3e} at x = ±L",
                self.boundary_perturbation()
            )))
        }
    }

    pub fn background_samples(&self) -> Vec<Complex64> {
        self.grid.nodes().map(|x| self.background.value(x)).collect()
    }

    pub fn background_derivative_samples(&self) -> Vec<Complex64> {
        self.grid.nodes().map(|x| self.background.derivative(x)).collect()
    }

    /// Full samples `v(x_j) = V₀(x_j) + w_j`.
    pub fn values(&self) -> Vec<Complex64> {
        self.grid.nodes().zip(&self.w).map(|(x, w)| self.background.value(x) + w).collect()
    }

    /// Spectral operators for perturbations continued past `±L` with the
    /// background's twist, `w(x + 2L) = e^{iΔ}w(x)`.
    pub fn spectral(&self) -> Spectral {
        Spectral::twisted(&self.grid, self.background.twist())
    }

    /// `v′ = V₀′ + ∂ₓw`, analytic for the background and spectral for `w`.
    pub fn derivative_with(&self, spectral: &Spectral) -> Vec<Complex64> {
        let dw = spectral.derivative(&self.w);
        self.grid.nodes().zip(dw).map(|(x, d)| self.background.derivative(x) + d).collect()
    }

    pub fn derivative(&self) -> Vec<Complex64> {
        self.derivative_with(&self.spectral())
    }

    pub fn min_modulus(&self) -> f64 {
        self.values().iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 16 * self.w.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&self.grid.half_length().to_le_bytes());
        out.extend_from_slice(&(self.grid.len() as u64).to_le_bytes());
        let (tag, params) = match self.background {
            Background::Constant(z) => (0u8, [z.re, z.im, 0.0]),
            Background::Soliton(p) => (1u8, [p.c, p.a, p.theta]),
        };
        out.push(tag);
        for v in params {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for z in &self.w {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |msg: &str| Error::Encoding(msg.to_string());
        if bytes.len() < HEADER_LEN {
            return Err(bad("truncated header"));
        }
        if &bytes[..4] != MAGIC {
            return Err(bad("bad magic"));
        }
        let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
        let u64_at = |i: usize| u64::from_le_bytes(bytes[i..i + 8].try_into().unwrap());
        let f64_at = |i: usize| f64::from_le_bytes(bytes[i..i + 8].try_into().unwrap());
        if u32_at(4) != FORMAT_VERSION {
            return Err(bad("unsupported format version"));
        }
        let half_length = f64_at(8);
        let n = usize::try_from(u64_at(16)).map_err(|_| bad("point count overflow"))?;
        let grid = GridSpec::new(half_length, n)?;
        let params = [f64_at(25), f64_at(33), f64_at(41)];
        let background = match bytes[24] {
            0 => Background::Constant(Complex64::new(params[0], params[1])),
            1 => Background::Soliton(SolitonParams { c: params[0], a: params[1], theta: params[2] }),
            _ => return Err(bad("unknown background tag")),
        };
        if bytes.len() != HEADER_LEN + 16 * n {
            return Err(bad("sample count does not match header"));
        }
        let w = bytes[HEADER_LEN..]
            .chunks_exact(16)
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[..8].try_into().unwrap()),
                    f64::from_le_bytes(c[8..].try_into().unwrap()),
                )
            })
            .collect();
        Field::new(grid, background, w)
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}
