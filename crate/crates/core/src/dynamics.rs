//! Time integration of the perturbation equation
//!
//! ```text
//! i w_t + w_xx = −V₀″ + v(|v|² − 1),    v = V₀ + w,
//! ```
//!
//! with the background `V₀` held fixed.  One step is a Strang splitting:
//! half a step of the pointwise part `w_t = i(V₀″ − v(|v|² − 1))` (one RK4
//! step per node), a full step of `i w_t + w_xx = 0` through the Fourier
//! multiplier `e^{−ik²dt}`, and another pointwise half step.
//!
//! Past `±L` the perturbation is continued with the twist of the background,
//! `w(x + 2L) = e^{iΔ}w(x)` where `V₀(+∞) = e^{iΔ}V₀(−∞)`.  Since the equation
//! is invariant under constant phases, radiation leaving at `+L` re-enters at
//! `−L` as a solution of the same problem, and mass and momentum stay
//! conserved after it reaches the ends of the grid.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{Background, Field};
use crate::functionals::{
    energy_with, lift_mod_pi, mass_unchecked, mod_pi_distance, twist, untwisted_momentum_with,
};
use crate::grid::GridSpec;
use crate::spectral::Spectral;

/// `‖w‖_∞` above which a run is aborted.
pub const BLOW_UP_THRESHOLD: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EvolveConfig {
    pub dt: f64,
    pub t_final: f64,
    pub log_every: usize,
    /// Radius `R` of the cutoff `χ_R = χ(·/R)`.
    pub com_cutoff_r: f64,
}

impl EvolveConfig {
    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !(self.dt > 0.0) || self.dt > 0.1 * grid.dx() * (1.0 + 1e-12) {
            return fail(format!("dt = {} must lie in (0, 0.1·dx = {}]", self.dt, 0.1 * grid.dx()));
        }
        if !(self.t_final > 0.0) || !self.t_final.is_finite() {
            return fail(format!("T = {} must be positive", self.t_final));
        }
        if self.log_every == 0 {
            return fail("log_every must be positive".into());
        }
        if !(self.com_cutoff_r > 1.0) || self.com_cutoff_r > 0.5 * grid.half_length() {
            return fail(format!(
                "cutoff radius R = {} must lie in (1, L/2 = {}]",
                self.com_cutoff_r,
                0.5 * grid.half_length()
            ));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_final / self.dt).round().max(1.0) as usize
    }
}

/// A reusable integrator for one grid, background and step size.
#[derive(Debug, Clone)]
pub struct Stepper {
    spectral: Spectral,
    v0: Vec<Complex64>,
    source: Vec<Complex64>,
    propagator: Vec<Complex64>,
    dt: f64,
}

impl Stepper {
    pub fn new(grid: &GridSpec, background: &Background, dt: f64) -> Result<Self> {
        if dt == 0.0 || !dt.is_finite() {
            return Err(Error::Config(format!("time step must be finite and nonzero, got {dt}")));
        }
        let spectral = Spectral::twisted(grid, background.twist());
        let propagator =
            spectral.wavenumbers().iter().map(|&k| Complex64::from_polar(1.0, -k * k * dt)).collect();
        Ok(Self {
            v0: grid.nodes().map(|x| background.value(x)).collect(),
            source: grid.nodes().map(|x| background.second_derivative(x)).collect(),
            spectral,
            propagator,
            dt,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    fn pointwise(&self, w: &mut [Complex64], h: f64) {
        let i = Complex64::i();
        for ((w, &v0), &s) in w.iter_mut().zip(&self.v0).zip(&self.source) {
            let rhs = |w: Complex64| {
                let v = v0 + w;
                i * (s - v * (v.norm_sqr() - 1.0))
            };
            let k1 = rhs(*w);
            let k2 = rhs(*w + 0.5 * h * k1);
            let k3 = rhs(*w + 0.5 * h * k2);
            let k4 = rhs(*w + h * k3);
            *w += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
    }

    /// One Strang step in place.
    pub fn advance(&self, w: &mut [Complex64]) {
        self.pointwise(w, 0.5 * self.dt);
        self.spectral.apply(w, |m, _| self.propagator[m]);
        self.pointwise(w, 0.5 * self.dt);
    }

    fn guard(&self, w: &[Complex64], time: f64) -> Result<()> {
        let max_abs = w.iter().map(|z| z.norm()).fold(0.0, |m, a| if a.is_nan() { a } else { m.max(a) });
        if !(max_abs <= BLOW_UP_THRESHOLD) {
            return Err(Error::BlowUp { time, max_abs });
        }
        Ok(())
    }
}

/// One step of size `dt`; negative `dt` runs the flow backwards.
pub fn step(f: &Field, dt: f64) -> Result<Field> {
    f.validate()?;
    let stepper = Stepper::new(f.grid(), f.background(), dt)?;
    let mut w = f.perturbation().to_vec();
    stepper.advance(&mut w);
    stepper.guard(&w, dt)?;
    f.with_perturbation(w)
}

/// Runs `n` steps of `stepper` from `f` without logging.
pub fn propagate(f: &Field, stepper: &Stepper, n: usize) -> Result<Field> {
    let mut w = f.perturbation().to_vec();
    for k in 1..=n {
        stepper.advance(&mut w);
        if k % 64 == 0 || k == n {
            stepper.guard(&w, k as f64 * stepper.dt)?;
        }
    }
    f.with_perturbation(w)
}

/// The smooth cutoff: `χ = 1` on `[−1, 1]`, `χ = 0` outside `[−2, 2]`,
/// `χ(x) = g(2 − |x|)/(g(2 − |x|) + g(|x| − 1))` in between, `g(t) = e^{−1/t}`.
pub fn cutoff(x: f64) -> f64 {
    let s = x.abs();
    if s <= 1.0 {
        1.0
    } else if s >= 2.0 {
        0.0
    } else {
        let (a, b) = (bump(2.0 - s), bump(s - 1.0));
        a / (a + b)
    }
}

pub fn cutoff_derivative(x: f64) -> f64 {
    let s = x.abs();
    if s <= 1.0 || s >= 2.0 {
        return 0.0;
    }
    let (u, t) = (2.0 - s, s - 1.0);
    let (a, b) = (bump(u), bump(t));
    let (da, db) = (a / (u * u), b / (t * t));
    let d = a + b;
    -(da * b + a * db) / (d * d) * x.signum()
}

fn bump(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// `∫x(|v|² − 1)χ_R` and `2∫⟨iv, v′⟩(xχ_R)′`.
pub fn center_of_mass(
    grid: &GridSpec,
    v: &[Complex64],
    dv: &[Complex64],
    radius: f64,
) -> (f64, f64) {
    let (mut com, mut rate) = (0.0, 0.0);
    for ((x, v), dv) in grid.nodes().zip(v).zip(dv) {
        let y = x / radius;
        let chi = cutoff(y);
        if chi == 0.0 {
            continue;
        }
        com += x * (v.norm_sqr() - 1.0) * chi;
        rate += twist(*v, *dv) * (chi + y * cutoff_derivative(y));
    }
    (com * grid.dx(), 2.0 * rate * grid.dx())
}

/// Time series of the conserved quantities along a trajectory.
#[derive(Debug, Clone, Default, PartialEq, serde::Serialize)]
pub struct ConservedLog {
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    /// Canonical representatives in `(−π/2, π/2]`.
    pub untwisted: Vec<f64>,
    /// Continuous real lift of `untwisted`, starting from its first value.
    pub untwisted_lift: Vec<f64>,
    pub relative_p: Vec<f64>,
    pub mass: Vec<f64>,
    pub com: Vec<f64>,
    pub com_rate: Vec<f64>,
}

pub const LOG_HEADER: &str = "t,energy,untwisted_p,relative_P,mass,com,com_rate";

impl ConservedLog {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn record(&mut self, t: f64, f: &Field, spectral: &Spectral, radius: f64) {
        let v = f.values();
        let dv = f.derivative_with(spectral);
        let p = untwisted_momentum_with(f, spectral);
        let lift = match self.untwisted_lift.last() {
            Some(&prev) => lift_mod_pi(prev, p.untwisted),
            None => p.untwisted,
        };
        let (com, rate) = center_of_mass(f.grid(), &v, &dv, radius);
        self.times.push(t);
        self.energy.push(energy_with(f, spectral));
        self.untwisted.push(p.untwisted);
        self.untwisted_lift.push(lift);
        self.relative_p.push(p.relative_p);
        self.mass.push(mass_unchecked(f));
        self.com.push(com);
        self.com_rate.push(rate);
    }

    pub fn truncate(&mut self, n: usize) {
        for series in [
            &mut self.times,
            &mut self.energy,
            &mut self.untwisted,
            &mut self.untwisted_lift,
            &mut self.relative_p,
            &mut self.mass,
            &mut self.com,
            &mut self.com_rate,
        ] {
            series.truncate(n);
        }
    }

    /// `max_t |E(t) − E(0)| / |E(0)|`, absolute when `E(0) = 0`.
    pub fn energy_drift(&self) -> f64 {
        relative_drift(&self.energy)
    }

    pub fn mass_drift(&self) -> f64 {
        relative_drift(&self.mass)
    }

    /// Largest ℝ/πℤ distance between `[p](t)` and `[p](0)`.
    pub fn momentum_drift(&self) -> f64 {
        let first = self.untwisted.first().copied().unwrap_or(0.0);
        self.untwisted.iter().map(|&p| mod_pi_distance(p, first)).fold(0.0, f64::max)
    }

    /// CSV with header [`LOG_HEADER`]; the `untwisted_p` column holds the lift.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(LOG_HEADER);
        out.push('\n');
        for i in 0..self.len() {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                self.times[i],
                self.energy[i],
                self.untwisted_lift[i],
                self.relative_p[i],
                self.mass[i],
                self.com[i],
                self.com_rate[i]
            ));
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut file = std::fs::File::create(path)?;
        file.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }
}

fn relative_drift(series: &[f64]) -> f64 {
    let Some(&first) = series.first() else { return 0.0 };
    let scale = if first == 0.0 { 1.0 } else { first.abs() };
    series.iter().map(|&e| (e - first).abs() / scale).fold(0.0, f64::max)
}

/// A run that may have stopped early: the log up to the last recorded time,
/// and the final state or the error that ended the run.
#[derive(Debug)]
pub struct Trajectory {
    pub log: ConservedLog,
    pub end: Result<Field>,
}

/// Evolves to `cfg.t_final`, logging every `cfg.log_every` steps and at the
/// final time.  `observer` sees the state at every logged time; an error
/// from it or from the solver ends the run.  Invalid inputs are rejected
/// up front.
pub fn run_trajectory<F>(f: &Field, cfg: &EvolveConfig, mut observer: F) -> Result<Trajectory>
where
    F: FnMut(f64, &Field) -> Result<()>,
{
    f.validate()?;
    cfg.validate(f.grid())?;
    let stepper = Stepper::new(f.grid(), f.background(), cfg.dt)?;
    let mut log = ConservedLog::default();
    let mut state = f.clone();
    let n = cfg.n_steps();
    let mut run = || -> Result<()> {
        log.record(0.0, &state, stepper.spectral(), cfg.com_cutoff_r);
        observer(0.0, &state)?;
        for k in 1..=n {
            stepper.advance(state.perturbation_mut());
            let t = k as f64 * cfg.dt;
            if k % cfg.log_every == 0 || k == n {
                stepper.guard(state.perturbation(), t)?;
                log.record(t, &state, stepper.spectral(), cfg.com_cutoff_r);
                observer(t, &state)?;
            } else if k % 64 == 0 {
                stepper.guard(state.perturbation(), t)?;
            }
        }
        Ok(())
    };
    let end = run().map(|_| state);
    Ok(Trajectory { log, end })
}

pub fn evolve_observed<F>(f: &Field, cfg: &EvolveConfig, observer: F) -> Result<(Field, ConservedLog)>
where
    F: FnMut(f64, &Field) -> Result<()>,
{
    let Trajectory { log, end } = run_trajectory(f, cfg, observer)?;
    Ok((end?, log))
}

pub fn evolve(f: &Field, cfg: &EvolveConfig) -> Result<(Field, ConservedLog)> {
    evolve_observed(f, cfg, |_, _| Ok(()))
}

/// Largest gap between the centered difference quotient of the localized
/// first moment and `2∫⟨iv, v′⟩(xχ_R)′` over the logged times of a run.
pub fn com_law_residual(f: &Field, cfg: &EvolveConfig) -> Result<f64> {
    let (_, log) = evolve(f, cfg)?;
    com_residual_of(&log)
}

pub fn com_residual_of(log: &ConservedLog) -> Result<f64> {
    if log.len() < 3 {
        return Err(Error::Config("need at least three logged times for a centered difference".into()));
    }
    let mut worst: f64 = 0.0;
    for i in 1..log.len() - 1 {
        let (t0, t1) = (log.times[i - 1], log.times[i + 1]);
        // a shorter final interval would break the centered stencil
        if ((t1 - log.times[i]) - (log.times[i] - t0)).abs() > 1e-9 * (t1 - t0) {
            continue;
        }
        let fd = (log.com[i + 1] - log.com[i - 1]) / (t1 - t0);
        worst = worst.max((fd - log.com_rate[i]).abs());
    }
    Ok(worst)
}
