//! Browser bindings: traveling-wave profiles, the energy-momentum curve and
//! a live perturbed-kink simulation.  Arrays cross the boundary as flat
//! `Float64Array`s.

use wasm_bindgen::prelude::*;

use gpkink::dynamics::Stepper;
use gpkink::functionals::{energy, mass, untwisted_momentum};
use gpkink::lab::{make_perturbed_kink, PerturbationSpec};
use gpkink::profiles::{signed_momentum, soliton_energy};
use gpkink::{Background, Complex64, Field, GridSpec, SolitonParams};

fn js_err(e: gpkink::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// `[x₀, re₀, im₀, |v|₀, x₁, …]` for the wave of speed `c` on `n` nodes of
/// `[−half_length, half_length)`.
#[wasm_bindgen]
pub fn soliton_profile(c: f64, half_length: f64, n: usize) -> Result<Vec<f64>, JsError> {
    let wave = SolitonParams::new(c, 0.0, 0.0).map_err(js_err)?;
    let grid = GridSpec::new(half_length, n).map_err(js_err)?;
    Ok(grid
        .nodes()
        .flat_map(|x| {
            let v = wave.value(x);
            [x, v.re, v.im, v.norm()]
        })
        .collect())
}

/// `[p₀, E₀, c₀, p₁, …]` along the traveling-wave family, `samples` speeds
/// from the sound speed down to 0.
#[wasm_bindgen]
pub fn energy_momentum_curve(samples: usize) -> Result<Vec<f64>, JsError> {
    let top = std::f64::consts::SQRT_2;
    let mut out = Vec::with_capacity(3 * samples);
    for i in 0..samples {
        let c = top * (1.0 - i as f64 / (samples.max(2) - 1) as f64);
        let p = signed_momentum(c).map_err(js_err)?;
        let e = soliton_energy(c).map_err(js_err)?;
        out.extend([p, e, c]);
    }
    Ok(out)
}

/// A perturbed kink advanced by the split-step solver.
#[wasm_bindgen]
pub struct KinkSimulation {
    field: Field,
    stepper: Stepper,
    time: f64,
}

#[wasm_bindgen]
impl KinkSimulation {
    #[wasm_bindgen(constructor)]
    pub fn new(half_length: f64, n: usize, epsilon: f64, seed: u64, dt: f64) -> Result<KinkSimulation, JsError> {
        let grid = GridSpec::new(half_length, n).map_err(js_err)?;
        let spec = PerturbationSpec { epsilon, seed, ..Default::default() };
        let field = make_perturbed_kink(&spec, &grid).map_err(js_err)?;
        let stepper = Stepper::new(&grid, &Background::kink(), dt).map_err(js_err)?;
        Ok(Self { field, stepper, time: 0.0 })
    }

    /// Advances `steps` time steps.
    pub fn step(&mut self, steps: usize) -> Result<(), JsError> {
        let mut w = self.field.perturbation().to_vec();
        for _ in 0..steps {
            self.stepper.advance(&mut w);
        }
        self.field = self.field.with_perturbation(w).map_err(js_err)?;
        self.field.validate().map_err(js_err)?;
        self.time += steps as f64 * self.stepper.dt();
        Ok(())
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn nodes(&self) -> Vec<f64> {
        self.field.grid().nodes().collect()
    }

    pub fn modulus(&self) -> Vec<f64> {
        self.field.values().iter().map(|v| v.norm()).collect()
    }

    /// Phase of `v`, unwrapped across the grid.
    pub fn phase(&self) -> Vec<f64> {
        let values = self.field.values();
        let mut out = Vec::with_capacity(values.len());
        let mut prev = Complex64::new(1.0, 0.0);
        let mut acc = values.first().map_or(0.0, |v| v.arg());
        for v in values {
            if !out.is_empty() {
                acc += (v * prev.conj()).arg();
            }
            out.push(acc);
            prev = v;
        }
        out
    }

    /// `[energy, untwisted momentum, mass]`.
    pub fn invariants(&self) -> Result<Vec<f64>, JsError> {
        Ok(vec![
            energy(&self.field).map_err(js_err)?,
            untwisted_momentum(&self.field).map_err(js_err)?.untwisted,
            mass(&self.field).map_err(js_err)?,
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_layout() {
        let p = soliton_profile(0.0, 10.0, 64).unwrap();
        assert_eq!(p.len(), 256);
        assert_eq!(p[0], -10.0);
        assert!((p[3] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn curve_starts_at_sound_speed() {
        let c = energy_momentum_curve(5).unwrap();
        assert_eq!(c.len(), 15);
        assert!(c[0].abs() < 1e-12 && c[1].abs() < 1e-12);
        assert_eq!(c[14], 0.0);
    }

    #[test]
    fn simulation_conserves_energy() {
        let mut sim = KinkSimulation::new(30.0, 512, 0.05, 3, 0.005).unwrap();
        let before = sim.invariants().unwrap();
        sim.step(200).unwrap();
        let after = sim.invariants().unwrap();
        assert!((sim.time() - 1.0).abs() < 1e-12);
        assert!((before[0] - after[0]).abs() < 1e-6 * before[0]);
        assert_eq!(sim.modulus().len(), 512);
        assert_eq!(sim.phase().len(), 512);
    }
}
