//! Energy minimization at fixed renormalized momentum, and with a zero
//! pinned at the origin.
//!
//! Both flows act on the perturbation `w` of a fixed background and are
//! preconditioned by `(1 − ∂²)^{-1}`.  Gradients are exact derivatives of
//! the discrete functionals:
//!
//! ```text
//! ∇E = −D(V₀′ + Dw) − v(1 − |v|²)
//! ∇p = ½[−i q v′ − D(i q v) + 2⟨iv, v′⟩ v/|v|⁴],    q = 1 − 1/|v|²
//! ```
//!
//! so `∇p → −iv′` in the continuum limit and the multiplier of a
//! traveling wave `v_c` is `+c`.

use std::f64::consts::{FRAC_PI_2, SQRT_2};
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::field::{Background, Field};
use crate::functionals::{dot, energy_density, renormalized_momentum_of, twist, untwisted_momentum_with};
use crate::grid::GridSpec;
use crate::profiles::SolitonParams;
use crate::spectral::Spectral;

/// Number of times [`emin_minimize`] may re-center the background on the
/// traveling wave selected by the multiplier.
pub const MAX_REANCHORS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowConfig {
    pub step_size: f64,
    pub max_iters: usize,
    /// Threshold on the L² norm of the projected gradient.
    pub grad_tol: f64,
    pub constraint_tol: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self { step_size: 0.5, max_iters: 200_000, grad_tol: 1e-6, constraint_tol: 1e-10 }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0) || self.max_iters == 0 {
            return Err(Error::Config("step size and iteration budget must be positive".into()));
        }
        if !(self.grad_tol >= 1e-12) || !(self.constraint_tol >= 1e-12) {
            return Err(Error::Config("tolerances must be at least 1e-12".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizationResult {
    pub field: Field,
    pub energy: f64,
    /// Renormalized momentum for the constrained flow, `[p]` for the pinned one.
    pub momentum: f64,
    /// Lagrange multiplier of the momentum constraint (0 for the pinned flow).
    pub multiplier: f64,
    pub iterations: usize,
    pub converged: bool,
    pub grad_norm: f64,
    /// Energy after each accepted iterate of the last run.
    pub energy_trace: Vec<f64>,
}

struct Objective {
    spectral: Spectral,
    v0: Vec<Complex64>,
    dv0: Vec<Complex64>,
    tail: f64,
    dx: f64,
}

struct Eval {
    v: Vec<Complex64>,
    dv: Vec<Complex64>,
    energy: f64,
}

impl Objective {
    fn new(grid: &GridSpec, background: &Background) -> Self {
        Self {
            spectral: Spectral::twisted(grid, background.twist()),
            v0: grid.nodes().map(|x| background.value(x)).collect(),
            dv0: grid.nodes().map(|x| background.derivative(x)).collect(),
            tail: background.tail_energy(grid.half_length()),
            dx: grid.dx(),
        }
    }

    fn eval(&self, w: &[Complex64]) -> Eval {
        let v: Vec<_> = self.v0.iter().zip(w).map(|(a, b)| a + b).collect();
        let dw = self.spectral.derivative(w);
        let dv: Vec<_> = self.dv0.iter().zip(dw).map(|(a, b)| a + b).collect();
        let energy =
            v.iter().zip(&dv).map(|(&a, &b)| energy_density(a, b)).sum::<f64>() * self.dx + self.tail;
        Eval { v, dv, energy }
    }

    fn momentum(&self, e: &Eval) -> Option<f64> {
        renormalized_momentum_of(&e.v, &e.dv, self.dx)
    }

    fn energy_gradient(&self, e: &Eval) -> Vec<Complex64> {
        let ddv = self.spectral.derivative(&e.dv);
        ddv.iter().zip(&e.v).map(|(d, v)| -d - v * (1.0 - v.norm_sqr())).collect()
    }

    fn momentum_gradient(&self, e: &Eval) -> Vec<Complex64> {
        let i = Complex64::i();
        let q: Vec<f64> = e.v.iter().map(|v| 1.0 - 1.0 / v.norm_sqr()).collect();
        let iqv: Vec<_> = e.v.iter().zip(&q).map(|(v, q)| i * q * v).collect();
        let d_iqv = self.spectral.derivative(&iqv);
        (0..e.v.len())
            .map(|j| {
                let (v, dv) = (e.v[j], e.dv[j]);
                let r2 = v.norm_sqr();
                0.5 * (-i * q[j] * dv - d_iqv[j] + 2.0 * twist(v, dv) * v / (r2 * r2))
            })
            .collect()
    }

    fn inner(&self, a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter().zip(b).map(|(&a, &b)| dot(a, b)).sum::<f64>() * self.dx
    }
}

fn axpy(w: &[Complex64], s: f64, d: &[Complex64]) -> Vec<Complex64> {
    w.iter().zip(d).map(|(a, b)| a + s * b).collect()
}

/// Moves `w` along `dir` until `p(w) = target`, using the fixed slope `slope`.
fn restore(
    obj: &Objective,
    w: &mut Vec<Complex64>,
    dir: &[Complex64],
    slope: f64,
    target: f64,
    tol: f64,
) -> Option<(Eval, f64)> {
    let mut e = obj.eval(w);
    let mut p = obj.momentum(&e)?;
    for _ in 0..50 {
        if (p - target).abs() <= tol {
            return Some((e, p));
        }
        let mut s = (target - p) / slope;
        loop {
            let trial = axpy(w, s, dir);
            let te = obj.eval(&trial);
            match obj.momentum(&te) {
                Some(tp) if (tp - target).abs() < (p - target).abs() => {
                    *w = trial;
                    e = te;
                    p = tp;
                    break;
                }
                _ if s.abs() > 1e-14 => s *= 0.5,
                _ => return None,
            }
        }
    }
    ((p - target).abs() <= tol).then_some((e, p))
}

struct FlowOutcome {
    w: Vec<Complex64>,
    energy: f64,
    momentum: f64,
    multiplier: f64,
    iterations: usize,
    converged: bool,
    grad_norm: f64,
    trace: Vec<f64>,
}

fn constrained_flow(
    obj: &Objective,
    mut w: Vec<Complex64>,
    target: f64,
    cfg: &FlowConfig,
) -> Result<FlowOutcome> {
    let fail = || Error::Domain("momentum constraint could not be restored on a non-vanishing map".into());
    let e0 = obj.eval(&w);
    let gp0 = obj.momentum_gradient(&e0);
    let pgp0 = obj.spectral.smooth(&gp0);
    let slope0 = obj.inner(&gp0, &pgp0);
    let (mut e, mut p) = restore(obj, &mut w, &pgp0, slope0, target, cfg.constraint_tol).ok_or_else(fail)?;
    let mut tau = cfg.step_size;
    let mut trace = vec![e.energy];
    let (mut multiplier, mut grad_norm) = (0.0, f64::INFINITY);
    for iter in 0..=cfg.max_iters {
        let ge = obj.energy_gradient(&e);
        let gp = obj.momentum_gradient(&e);
        let pge = obj.spectral.smooth(&ge);
        let pgp = obj.spectral.smooth(&gp);
        let slope = obj.inner(&gp, &pgp);
        multiplier = obj.inner(&ge, &pgp) / slope;
        // measured on the modes the flow can move
        let r: Vec<_> = ge.iter().zip(&gp).map(|(a, b)| a - multiplier * b).collect();
        let r = obj.spectral.resolved(&r);
        grad_norm = obj.inner(&r, &r).sqrt();
        if grad_norm <= cfg.grad_tol && (p - target).abs() <= cfg.constraint_tol {
            return Ok(FlowOutcome {
                w,
                energy: e.energy,
                momentum: p,
                multiplier,
                iterations: iter,
                converged: true,
                grad_norm,
                trace,
            });
        }
        if iter == cfg.max_iters {
            break;
        }
        let d: Vec<_> = pge.iter().zip(&pgp).map(|(a, b)| a - multiplier * b).collect();
        let mut accepted = false;
        while tau > 1e-12 {
            let mut trial = axpy(&w, -tau, &d);
            if let Some((te, tp)) = restore(obj, &mut trial, &pgp, slope, target, cfg.constraint_tol) {
                if te.energy <= e.energy + 1e-12 {
                    w = trial;
                    e = te;
                    p = tp;
                    accepted = true;
                    break;
                }
            }
            tau *= 0.5;
        }
        if !accepted {
            break;
        }
        trace.push(e.energy);
        tau = (tau * 1.25).min(cfg.step_size);
    }
    Ok(FlowOutcome {
        w,
        energy: e.energy,
        momentum: p,
        multiplier,
        iterations: trace.len() - 1,
        converged: false,
        grad_norm,
        trace,
    })
}

/// Minimizes the energy at renormalized momentum `target_p`, starting from
/// the traveling wave of speed `init_c`.
///
/// The background is held fixed during a run, which pins the phase jump
/// between the two ends of the grid.  A minimizer of a different speed then
/// carries a phase ramp of energy `≈ (ΔΦ)²/4L`.  After a converged run the
/// background is therefore replaced by the traveling wave whose speed is the
/// multiplier and the flow is restarted, at most [`MAX_REANCHORS`] times.
pub fn emin_minimize(
    target_p: f64,
    init_c: f64,
    grid: &GridSpec,
    cfg: &FlowConfig,
) -> Result<MinimizationResult> {
    if !(0.0..FRAC_PI_2).contains(&target_p) {
        return domain(format!("target momentum {target_p} must lie in [0, π/2)"));
    }
    if !(init_c > 0.0 && init_c < SQRT_2) {
        return domain(format!("initial speed {init_c} must lie in (0, √2)"));
    }
    cfg.validate()?;
    let mut c = init_c;
    let mut total = 0;
    let mut anchors = 0;
    loop {
        let background = Background::Soliton(SolitonParams::new(c, 0.0, 0.0)?);
        let obj = Objective::new(grid, &background);
        let out = constrained_flow(&obj, vec![Complex64::default(); grid.len()], target_p, cfg)?;
        total += out.iterations;
        let next = out.multiplier;
        let reanchor = target_p > 0.0
            && out.converged
            && anchors < MAX_REANCHORS
            && next > 0.0
            && next < SQRT_2
            && (next - c).abs() > 1e-6;
        if !reanchor {
            return Ok(MinimizationResult {
                field: Field::new(*grid, background, out.w)?,
                energy: out.energy,
                momentum: out.momentum,
                multiplier: out.multiplier,
                iterations: total,
                converged: out.converged,
                grad_norm: out.grad_norm,
                energy_trace: out.trace,
            });
        }
        c = next;
        anchors += 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CurvePoint {
    pub p: f64,
    pub energy: f64,
    pub multiplier: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `min |v|` of the minimizer; not exported to CSV.
    pub min_modulus: f64,
}

pub const CURVE_HEADER: &str = "p,E,multiplier,iters,converged";

/// Sweeps [`emin_minimize`] over `p_values` in increasing order.  The first
/// run starts from `c = 1`, later ones from the previous multiplier.
pub fn emin_curve(p_values: &[f64], grid: &GridSpec, cfg: &FlowConfig) -> Result<Vec<CurvePoint>> {
    let mut ps = p_values.to_vec();
    if let Some(&bad) = ps.iter().find(|p| !(0.0..FRAC_PI_2).contains(*p)) {
        return domain(format!("momentum {bad} must lie in [0, π/2)"));
    }
    ps.sort_by(f64::total_cmp);
    let mut c = 1.0;
    let mut out = Vec::with_capacity(ps.len());
    for p in ps {
        let r = emin_minimize(p, c, grid, cfg)?;
        if r.converged && r.multiplier > 0.0 && r.multiplier < SQRT_2 {
            c = r.multiplier;
        }
        out.push(CurvePoint {
            p,
            energy: r.energy,
            multiplier: r.multiplier,
            iterations: r.iterations,
            converged: r.converged,
            min_modulus: r.field.min_modulus(),
        });
    }
    Ok(out)
}

pub fn curve_csv(points: &[CurvePoint]) -> String {
    let mut out = String::from(CURVE_HEADER);
    out.push('\n');
    for pt in points {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            pt.p, pt.energy, pt.multiplier, pt.iterations, pt.converged
        ));
    }
    out
}

pub fn write_curve_csv(points: &[CurvePoint], path: impl AsRef<Path>) -> Result<()> {
    std::fs::File::create(path)?.write_all(curve_csv(points).as_bytes())?;
    Ok(())
}

/// Energy gradient flow with `v` held at 0 on the central node.
pub fn pinned_zero_minimize(grid: &GridSpec, cfg: &FlowConfig, init: &Field) -> Result<MinimizationResult> {
    cfg.validate()?;
    if init.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let c = grid.center();
    let v_center = init.background().value(grid.x(c)) + init.perturbation()[c];
    if v_center.norm() > 1e-12 {
        return domain(format!("initial map must vanish at x = 0, |v(0)| = {:.3e}", v_center.norm()));
    }
    let obj = Objective::new(grid, init.background());
    let mut w = init.perturbation().to_vec();
    w[c] = -obj.v0[c];
    let mut delta = vec![Complex64::default(); grid.len()];
    delta[c] = Complex64::new(1.0, 0.0);
    let h = obj.spectral.smooth(&delta);
    let mut e = obj.eval(&w);
    let mut trace = vec![e.energy];
    let mut tau = cfg.step_size;
    let mut grad_norm = f64::INFINITY;
    let mut converged = false;
    for iter in 0..=cfg.max_iters {
        let mut g = obj.energy_gradient(&e);
        g[c] = Complex64::default();
        grad_norm = obj.inner(&g, &g).sqrt();
        if grad_norm <= cfg.grad_tol {
            converged = true;
            break;
        }
        if iter == cfg.max_iters {
            break;
        }
        let pg = obj.spectral.smooth(&g);
        let alpha = pg[c] / h[c];
        let mut d: Vec<_> = pg.iter().zip(&h).map(|(a, b)| a - alpha * b).collect();
        d[c] = Complex64::default();
        let mut accepted = false;
        while tau > 1e-12 {
            let trial = axpy(&w, -tau, &d);
            let te = obj.eval(&trial);
            if te.energy <= e.energy + 1e-12 {
                w = trial;
                e = te;
                accepted = true;
                break;
            }
            tau *= 0.5;
        }
        if !accepted {
            break;
        }
        trace.push(e.energy);
        tau = (tau * 1.25).min(cfg.step_size);
    }
    let field = Field::new(*grid, *init.background(), w)?;
    let momentum = untwisted_momentum_with(&field, &obj.spectral).untwisted;
    Ok(MinimizationResult {
        field,
        energy: e.energy,
        momentum,
        multiplier: 0.0,
        iterations: trace.len() - 1,
        converged,
        grad_norm,
        energy_trace: trace,
    })
}
