//! Experiment orchestration: seeded perturbations, modulation fits, the
//! orbital stability experiment and the configurable suite.

pub mod experiments;
pub mod modulation;
pub mod perturb;
pub mod stability;
pub mod suite;

pub use modulation::{fit_modulation, ModulationFit};
pub use perturb::{make_perturbed, make_perturbed_kink, PerturbationSpec};
pub use stability::{stability_experiment, StabilityReport};
pub use suite::{run_suite, Assertion, SuiteConfig, SuiteReport};
