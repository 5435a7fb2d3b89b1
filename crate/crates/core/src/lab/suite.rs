//! Configurable experiment suite.
//!
//! The configuration is a TOML document: a top-level `experiments` list
//! naming what to run, an optional `out` directory, and one optional table
//! per experiment overriding its defaults.
//!
//! ```toml
//! experiments = ["identities", "winding"]
//! out = "results"
//!
//! [winding]
//! samples = 40
//! ```
//!
//! Known experiments: `identities`, `conservation`, `transport`,
//! `stability`, `emin`, `comlaw`, `winding`, `dips`.  Defaults are those of
//! the `*Params` types in [`crate::lab::experiments`].

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lab::experiments::{
    ComlawParams, ConservationParams, DipsParams, EminParams, IdentitiesParams, StabilityParams,
    TransportParams, WindingParams,
};

pub const EXPERIMENTS: [&str; 8] =
    ["identities", "conservation", "transport", "stability", "emin", "comlaw", "winding", "dips"];

/// One checked property of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub experiments: Vec<String>,
    pub out: Option<PathBuf>,
    pub identities: IdentitiesParams,
    pub conservation: ConservationParams,
    pub transport: TransportParams,
    pub stability: StabilityParams,
    pub emin: EminParams,
    pub comlaw: ComlawParams,
    pub winding: WindingParams,
    pub dips: DipsParams,
}

impl SuiteConfig {
    /// Every experiment with default parameters.
    pub fn full() -> Self {
        Self { experiments: EXPERIMENTS.iter().map(|s| s.to_string()).collect(), ..Default::default() }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.check_names()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn check_names(&self) -> Result<()> {
        match self.experiments.iter().find(|name| !EXPERIMENTS.contains(&name.as_str())) {
            Some(name) => Err(Error::Config(format!(
                "unknown experiment `{name}`; expected one of {}",
                EXPERIMENTS.join(", ")
            ))),
            None => Ok(()),
        }
    }

    fn run_one(&self, name: &str, out: &Path) -> Result<Vec<Assertion>> {
        match name {
            "identities" => self.identities.run(out),
            "conservation" => self.conservation.run(out),
            "transport" => self.transport.run(out),
            "stability" => self.stability.run(out),
            "emin" => self.emin.run(out),
            "comlaw" => self.comlaw.run(out),
            "winding" => self.winding.run(out),
            "dips" => self.dips.run(out),
            other => Err(Error::Config(format!("unknown experiment `{other}`"))),
        }
    }

    /// Runs the listed experiments concurrently and writes `summary.json`
    /// into `out`.
    ///
    /// An experiment that stops with a solver or domain error contributes a
    /// failed `<name>.completed` assertion.  Invalid parameters (a bad grid,
    /// an inconsistent time step) are configuration errors and fail the
    /// whole run once every experiment has finished.
    pub fn run(&self, out: &Path) -> Result<SuiteReport> {
        self.check_names()?;
        std::fs::create_dir_all(out)?;
        let results: Vec<(&String, Result<Vec<Assertion>>)> = std::thread::scope(|s| {
            let handles: Vec<_> = self
                .experiments
                .iter()
                .map(|name| s.spawn(move || (name, self.run_one(name, out))))
                .collect();
            handles.into_iter().map(|h| h.join().expect("experiment thread panicked")).collect()
        });
        let mut assertions = Vec::new();
        for (name, result) in results {
            match result {
                Ok(items) => assertions.extend(items),
                Err(e @ (Error::Config(_) | Error::Grid(_))) => {
                    return Err(Error::Config(format!("{name}: {e}")));
                }
                Err(e) => {
                    eprintln!("{name}: {e}");
                    assertions.push(Assertion {
                        name: format!("{name}.completed"),
                        passed: false,
                        measured: 0.0,
                        threshold: 1.0,
                    });
                }
            }
        }
        let report = SuiteReport { assertions };
        report.write_summary(out)?;
        Ok(report)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SuiteReport {
    pub assertions: Vec<Assertion>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    /// 0 when every assertion holds, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    /// `summary.json`: an array of `{name, passed, measured, threshold}`.
    pub fn write_summary(&self, out: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(&self.assertions).expect("assertions serialize");
        std::fs::write(out.join("summary.json"), json + "\n")?;
        Ok(())
    }
}

/// Loads `config_file`, runs it into `out` (or the configured directory, or
/// `results`), and returns the report.  Configuration problems are
/// [`Error::Config`].
pub fn run_suite(config_file: impl AsRef<Path>, out: Option<&Path>) -> Result<SuiteReport> {
    let cfg = SuiteConfig::load(config_file)?;
    let dir = out.map(Path::to_path_buf).or_else(|| cfg.out.clone()).unwrap_or_else(|| "results".into());
    cfg.run(&dir)
}

/// Process exit status for a suite outcome: 0 pass, 1 failed assertion,
/// 2 configuration or I/O error.
pub fn exit_status(outcome: &Result<SuiteReport>) -> i32 {
    match outcome {
        Ok(report) => report.exit_code(),
        Err(_) => 2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_list_passes() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SuiteConfig::parse("experiments = []").unwrap();
        let report = cfg.run(dir.path()).unwrap();
        assert!(report.assertions.is_empty());
        assert_eq!(report.exit_code(), 0);
        let summary = std::fs::read_to_string(dir.path().join("summary.json")).unwrap();
        assert_eq!(summary.trim(), "[]");
    }

    #[test]
    fn unknown_experiment_is_a_config_error() {
        let err = SuiteConfig::parse("experiments = [\"warp\"]").unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert_eq!(exit_status(&Err(err)), 2);
    }

    #[test]
    fn malformed_config() {
        assert!(SuiteConfig::parse("experiments = 3").is_err());
        assert!(SuiteConfig::parse("[winding]\nsampels = 3").is_err());
        assert!(SuiteConfig::parse("experiments = [").is_err());
    }

    #[test]
    fn partial_sections_keep_defaults() {
        let cfg = SuiteConfig::parse("experiments = [\"winding\"]\n[winding]\nsamples = 3\n").unwrap();
        assert_eq!(cfg.winding.samples, 3);
        assert_eq!(cfg.winding.resolution, WindingParams::default().resolution);
        let cfg = SuiteConfig::parse("[conservation.perturbation]\nepsilon = 0.02\n").unwrap();
        assert_eq!(cfg.conservation.perturbation.epsilon, 0.02);
        assert_eq!(cfg.conservation.perturbation.n_bumps, 3);
    }

    #[test]
    fn winding_experiment_writes_summary() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SuiteConfig::parse("experiments = [\"winding\"]\n[winding]\nsamples = 3\n").unwrap();
        let report = cfg.run(dir.path()).unwrap();
        assert!(report.passed(), "{report:?}");
        let parsed: Vec<Assertion> =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
        assert_eq!(parsed, report.assertions);
        assert!(dir.path().join("winding.csv").exists());
    }
}
