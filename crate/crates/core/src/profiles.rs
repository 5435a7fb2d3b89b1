//! The traveling-wave family of the Gross-Pitaevskii equation.
//!
//! For `|c| < √2` the non-constant profiles of speed `c` are, up to a phase and
//! a translation,
//!
//! ```text
//! v_c(x) = √((2 − c²)/2) · tanh(√(2 − c²)/2 · x) + i c/√2
//! ```
//!
//! `v_0(x) = tanh(x/√2)` is the black soliton (kink).  All closed forms here are
//! pure functions without caching.

use std::f64::consts::{FRAC_PI_2, SQRT_2};

use num_complex::Complex64;

use crate::error::{domain, Result};

/// Sound speed; no non-constant traveling wave exists at or above it.
pub const SOUND_SPEED: f64 = SQRT_2;

/// Energy of the black soliton, `2√2/3`.
pub const KINK_ENERGY: f64 = 2.0 * SQRT_2 / 3.0;

/// Speed, shift and phase of a member `e^{iθ} v_c(· − a)` of the family.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SolitonParams {
    pub c: f64,
    pub a: f64,
    pub theta: f64,
}

impl SolitonParams {
    pub fn new(c: f64, a: f64, theta: f64) -> Result<Self> {
        check_speed(c)?;
        if !a.is_finite() || !theta.is_finite() {
            return domain("shift and phase must be finite");
        }
        Ok(Self { c, a, theta })
    }

    /// The black soliton `tanh(x/√2)`.
    pub fn kink() -> Self {
        Self { c: 0.0, a: 0.0, theta: 0.0 }
    }

    pub(crate) fn amplitude(&self) -> f64 {
        ((2.0 - self.c * self.c).max(0.0) / 2.0).sqrt()
    }

    pub(crate) fn inverse_width(&self) -> f64 {
        (2.0 - self.c * self.c).max(0.0).sqrt() / 2.0
    }

    fn rotation(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.theta)
    }

    /// `e^{iθ} v_c(x − a)`.
    pub fn value(&self, x: f64) -> Complex64 {
        let t = (self.inverse_width() * (x - self.a)).tanh();
        self.rotation() * Complex64::new(self.amplitude() * t, self.c / SQRT_2)
    }

    pub fn derivative(&self, x: f64) -> Complex64 {
        let beta = self.inverse_width();
        let s = sech2(beta * (x - self.a));
        self.rotation() * (self.amplitude() * beta * s)
    }

    pub fn second_derivative(&self, x: f64) -> Complex64 {
        let beta = self.inverse_width();
        let y = beta * (x - self.a);
        self.rotation() * (-2.0 * self.amplitude() * beta * beta * sech2(y) * y.tanh())
    }

    /// Limits at `−∞` and `+∞`, both of modulus one.
    pub fn limits(&self) -> (Complex64, Complex64) {
        let im = self.c / SQRT_2;
        let re = self.amplitude();
        (
            self.rotation() * Complex64::new(-re, im),
            self.rotation() * Complex64::new(re, im),
        )
    }
}

fn sech2(y: f64) -> f64 {
    let ch = y.abs().min(350.0).cosh();
    1.0 / (ch * ch)
}

fn check_speed(c: f64) -> Result<()> {
    if !c.is_finite() || c.abs() > SOUND_SPEED {
        return domain(format!(
            "speed {c} exceeds the sound speed √2: no sonic or supersonic non-constant traveling waves"
        ));
    }
    Ok(())
}

/// Evaluates `e^{iθ} v_c(x − a)`.  At `|c| = √2` this is the constant `e^{iθ} i c/√2`.
pub fn eval_soliton(params: SolitonParams, x: f64) -> Result<Complex64> {
    check_speed(params.c)?;
    Ok(params.value(x))
}

/// `E(v_c) = (2 − c²)^{3/2} / 3`.
pub fn soliton_energy(c: f64) -> Result<f64> {
    check_speed(c)?;
    Ok((2.0 - c * c).max(0.0).powf(1.5) / 3.0)
}

/// Renormalized momentum `p(v_c) = π/2 − arctan(c/√(2 − c²)) − (c/2)√(2 − c²)`
/// on `0 < c ≤ √2`.  The limit as `c → 0⁺` is [`momentum_at_rest`].
pub fn soliton_momentum(c: f64) -> Result<f64> {
    if !(c > 0.0) {
        return domain(format!("momentum closed form needs c > 0, got {c}"));
    }
    check_speed(c)?;
    Ok(momentum_formula(c))
}

/// `lim_{c→0⁺} p(v_c) = π/2`.
pub const fn momentum_at_rest() -> f64 {
    FRAC_PI_2
}

fn momentum_formula(c: f64) -> f64 {
    let s = (2.0 - c * c).max(0.0).sqrt();
    FRAC_PI_2 - c.atan2(s) - 0.5 * c * s
}

/// `p(v_c)` for any `|c| ≤ √2`, extended by `p(v̄) = −p(v)` to negative speeds.
/// At `c = 0` returns `π/2`, the representative used for the kink.
pub fn signed_momentum(c: f64) -> Result<f64> {
    check_speed(c)?;
    Ok(if c == 0.0 {
        FRAC_PI_2
    } else {
        c.signum() * momentum_formula(c.abs())
    })
}

/// `dp(v_c)/dc = −√(2 − c²)`.
pub fn momentum_derivative(c: f64) -> Result<f64> {
    check_speed(c)?;
    Ok(-(2.0 - c * c).max(0.0).sqrt())
}

/// `m(v_c) = ½∫(|v_c|² − 1) = −√(2 − c²)`.
pub fn soliton_mass(c: f64) -> Result<f64> {
    check_speed(c)?;
    Ok(-(2.0 - c * c).max(0.0).sqrt())
}

/// Inverts `c ↦ p(v_c)` on `[0, √2]`.
///
/// Newton iteration with the analytic derivative, safeguarded by bisection:
/// the derivative vanishes at `c = √2`, where plain Newton stalls.
pub fn speed_from_momentum(p: f64) -> Result<f64> {
    if !(0.0..FRAC_PI_2).contains(&p) {
        return domain(format!("momentum {p} outside [0, π/2)"));
    }
    if p == 0.0 {
        return Ok(SOUND_SPEED);
    }
    let residual = |c: f64| if c == 0.0 { FRAC_PI_2 - p } else { momentum_formula(c) - p };

    // residual is decreasing: positive at 0, non-positive at √2
    let (mut lo, mut hi) = (0.0_f64, SOUND_SPEED);
    let mut c = 0.5 * (lo + hi);
    for _ in 0..200 {
        let f = residual(c);
        if f.abs() <= 1e-14 {
            break;
        }
        if f > 0.0 {
            lo = c;
        } else {
            hi = c;
        }
        let slope = -(2.0 - c * c).max(0.0).sqrt();
        let newton = if slope < -1e-300 { c - f / slope } else { f64::NAN };
        c = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= f64::EPSILON * SOUND_SPEED {
            break;
        }
    }
    Ok(c)
}

/// Closed-form invariants of `v_c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolitonClosedForms {
    pub energy: f64,
    pub momentum_p: f64,
    pub momentum_derivative: f64,
    pub mass: f64,
    pub limits: (Complex64, Complex64),
}

pub fn closed_forms(c: f64) -> Result<SolitonClosedForms> {
    Ok(SolitonClosedForms {
        energy: soliton_energy(c)?,
        momentum_p: signed_momentum(c)?,
        momentum_derivative: momentum_derivative(c)?,
        mass: soliton_mass(c)?,
        limits: SolitonParams::new(c, 0.0, 0.0)?.limits(),
    })
}

/// `ℰ(p) = E(v_{c(p)})`, the minimal energy at renormalized momentum `p`.
pub fn minimal_energy_curve(p: f64) -> Result<f64> {
    soliton_energy(speed_from_momentum(p)?)
}
