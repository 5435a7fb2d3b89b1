//! `gpkink`: command-line driver for the kink experiments.
//!
//! Every subcommand writes its artifacts and a `summary.json` into `--out`
//! and exits 0 when all assertions hold, 1 when one fails and 2 on a
//! malformed configuration or a solver error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gpkink::lab::experiments::{
    ComlawParams, ConservationParams, DipsParams, EminParams, IdentitiesParams, StabilityParams,
    TransportParams, WindingParams,
};
use gpkink::lab::{Assertion, SuiteConfig, SuiteReport};
use gpkink::{Background, Error, Field, GridSpec, Result, SolitonParams};

#[derive(Parser)]
#[command(name = "gpkink", version, about = "Kink and traveling-wave experiments for the defocusing cubic NLS")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a traveling wave and check its closed-form invariants.
    Soliton(Common),
    /// Closed-form energy, mass and momentum identities plus the slope identity.
    Identities(Common),
    /// Evolve a perturbed kink (or `--field`) and log the conserved quantities.
    Evolve {
        #[command(flatten)]
        common: Common,
        /// Initial field file in the binary field format.
        #[arg(long)]
        field: Option<PathBuf>,
    },
    /// Transport of a gray soliton against the exact traveling wave.
    Transport(Common),
    /// Orbital stability runs over a list of perturbation sizes.
    Stability(Common),
    /// Minimal energy curve and the pinned-zero minimization.
    Emin {
        #[command(flatten)]
        common: Common,
        /// Target momenta, comma separated.
        #[arg(long, value_delimiter = ',')]
        p: Option<Vec<f64>>,
    },
    /// Center-of-mass law for the traveling wave and a perturbed kink.
    Comlaw(Common),
    /// Winding insertions for random charges.
    Winding {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        samples: Option<usize>,
        /// Quadrature resolution, a multiple of 4.
        #[arg(long)]
        resolution: Option<usize>,
    },
    /// Dip locator and pointwise bounds.
    Dips {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        delta0: Option<f64>,
    },
    /// Run the experiments listed in a TOML configuration.
    Suite {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `out` in the configuration.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Default)]
struct Common {
    /// Half-length of the domain [−L, L).
    #[arg(long = "L")]
    l: Option<f64>,
    /// Number of grid nodes (power of two).
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    /// Final time.
    #[arg(long = "T")]
    t: Option<f64>,
    /// Wave speed.
    #[arg(long)]
    c: Option<f64>,
    /// Perturbation size.
    #[arg(long)]
    eps: Option<f64>,
    /// Window half-width of the local distance.
    #[arg(long = "A")]
    a: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "results")]
    out: PathBuf,
}

/// Hands out the common flags; any flag left unclaimed is an error.
struct Flags {
    common: Common,
    command: &'static str,
}

impl Flags {
    fn new(common: Common, command: &'static str) -> Self {
        Self { common, command }
    }

    fn grid(&mut self, l: &mut f64, n: &mut usize) {
        if let Some(v) = self.common.l.take() {
            *l = v;
        }
        if let Some(v) = self.common.n.take() {
            *n = v;
        }
    }

    fn set<T>(slot: &mut Option<T>, target: &mut T) {
        if let Some(v) = slot.take() {
            *target = v;
        }
    }

    fn finish(self) -> Result<PathBuf> {
        let c = &self.common;
        let unused: Vec<&str> = [
            ("--L", c.l.is_some()),
            ("--N", c.n.is_some()),
            ("--dt", c.dt.is_some()),
            ("--T", c.t.is_some()),
            ("--c", c.c.is_some()),
            ("--eps", c.eps.is_some()),
            ("--A", c.a.is_some()),
            ("--seed", c.seed.is_some()),
        ]
        .into_iter()
        .filter_map(|(name, given)| given.then_some(name))
        .collect();
        if !unused.is_empty() {
            return Err(Error::Config(format!("`{}` does not take {}", self.command, unused.join(", "))));
        }
        Ok(self.common.out)
    }
}

fn soliton(common: Common) -> Result<(PathBuf, Vec<Assertion>)> {
    let mut flags = Flags::new(common, "soliton");
    let mut params = IdentitiesParams { slope_speeds: Vec::new(), ..Default::default() };
    flags.grid(&mut params.half_length, &mut params.n_points);
    let mut c = 0.0;
    Flags::set(&mut flags.common.c, &mut c);
    params.speeds = vec![c];
    let out = prepare(flags.finish()?)?;
    let grid = GridSpec::new(params.half_length, params.n_points)?;
    let wave = SolitonParams::new(c, 0.0, 0.0)?;
    let f = Field::background_only(grid, Background::Soliton(wave))?;
    let mut csv = String::from("x,re,im,modulus\n");
    for x in grid.nodes() {
        let v = wave.value(x);
        csv.push_str(&format!("{x},{},{},{}\n", v.re, v.im, v.norm()));
    }
    std::fs::write(out.join("soliton.csv"), csv)?;
    f.save(out.join("soliton.gpfd"))?;
    let assertions = params.run(&out)?;
    Ok((out, assertions))
}

fn dispatch(command: Command) -> Result<(PathBuf, Vec<Assertion>)> {
    macro_rules! run {
        ($flags:expr, $params:expr) => {{
            let out = prepare($flags.finish()?)?;
            let assertions = $params.run(&out)?;
            Ok((out, assertions))
        }};
    }
    match command {
        Command::Soliton(common) => soliton(common),
        Command::Identities(common) => {
            let mut flags = Flags::new(common, "identities");
            let mut p = IdentitiesParams::default();
            flags.grid(&mut p.half_length, &mut p.n_points);
            if let Some(c) = flags.common.c.take() {
                p.speeds = vec![c];
            }
            run!(flags, p)
        }
        Command::Evolve { common, field } => {
            let mut flags = Flags::new(common, "evolve");
            let mut p = ConservationParams { initial: field, ..Default::default() };
            flags.grid(&mut p.half_length, &mut p.n_points);
            Flags::set(&mut flags.common.dt, &mut p.dt);
            Flags::set(&mut flags.common.t, &mut p.t_final);
            Flags::set(&mut flags.common.eps, &mut p.perturbation.epsilon);
            Flags::set(&mut flags.common.a, &mut p.perturbation.window_a);
            Flags::set(&mut flags.common.seed, &mut p.perturbation.seed);
            run!(flags, p)
        }
        Command::Transport(common) => {
            let mut flags = Flags::new(common, "transport");
            let mut p = TransportParams::default();
            flags.grid(&mut p.half_length, &mut p.n_points);
            Flags::set(&mut flags.common.dt, &mut p.dt);
            Flags::set(&mut flags.common.t, &mut p.t_final);
            Flags::set(&mut flags.common.c, &mut p.c);
            Flags::set(&mut flags.common.a, &mut p.window_a);
            run!(flags, p)
        }
        Command::Stability(common) => {
            let mut flags = Flags::new(common, "stability");
            let mut p = StabilityParams::default();
            flags.grid(&mut p.half_length, &mut p.n_points);
            Flags::set(&mut flags.common.dt, &mut p.dt);
            Flags::set(&mut flags.common.t, &mut p.t_final);
            Flags::set(&mut flags.common.a, &mut p.window_a);
            Flags::set(&mut flags.common.seed, &mut p.seed);
            if let Some(eps) = flags.common.eps.take() {
                p.epsilons = vec![0.0, eps];
            }
            run!(flags, p)
        }
        Command::Emin { common, p: momenta } => {
            let mut flags = Flags::new(common, "emin");
            let mut p = EminParams::default();
            flags.grid(&mut p.half_length, &mut p.n_points);
            Flags::set(&mut flags.common.a, &mut p.window_a);
            if let Some(momenta) = momenta {
                p.momenta = momenta;
            }
            run!(flags, p)
        }
        Command::Comlaw(common) => {
            let mut flags = Flags::new(common, "comlaw");
            let mut p = ComlawParams::default();
            flags.grid(&mut p.half_length, &mut p.n_points);
            Flags::set(&mut flags.common.dt, &mut p.dt);
            Flags::set(&mut flags.common.t, &mut p.t_final);
            Flags::set(&mut flags.common.c, &mut p.c);
            Flags::set(&mut flags.common.eps, &mut p.perturbation.epsilon);
            Flags::set(&mut flags.common.a, &mut p.perturbation.window_a);
            Flags::set(&mut flags.common.seed, &mut p.perturbation.seed);
            run!(flags, p)
        }
        Command::Winding { common, samples, resolution } => {
            let mut flags = Flags::new(common, "winding");
            let mut p = WindingParams::default();
            Flags::set(&mut flags.common.seed, &mut p.seed);
            if let Some(s) = samples {
                p.samples = s;
            }
            if let Some(r) = resolution {
                p.resolution = r;
            }
            run!(flags, p)
        }
        Command::Dips { common, delta0 } => {
            let mut flags = Flags::new(common, "dips");
            let mut p = DipsParams::default();
            flags.grid(&mut p.half_length, &mut p.n_points);
            Flags::set(&mut flags.common.seed, &mut p.seed);
            if let Some(d) = delta0 {
                p.delta0 = d;
            }
            run!(flags, p)
        }
        Command::Suite { .. } => unreachable!("handled by the suite runner"),
    }
}

fn prepare(out: PathBuf) -> Result<PathBuf> {
    std::fs::create_dir_all(&out)?;
    Ok(out)
}

fn report(out: &Path, report: &SuiteReport) -> ExitCode {
    if let Err(e) = report.write_summary(out) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let mut stdout = std::io::stdout().lock();
    for a in &report.assertions {
        let mark = if a.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(stdout, "{mark} {} measured={:e} threshold={:e}", a.name, a.measured, a.threshold);
    }
    ExitCode::from(report.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Command::Suite { config, out } = cli.command {
        let outcome = SuiteConfig::load(&config).and_then(|cfg| {
            let dir = out.or_else(|| cfg.out.clone()).unwrap_or_else(|| "results".into());
            cfg.run(&dir).map(|r| (dir, r))
        });
        return match outcome {
            Ok((dir, r)) => report(&dir, &r),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        };
    }
    match dispatch(cli.command) {
        Ok((out, assertions)) => report(&out, &SuiteReport { assertions }),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
