//! `billiard`: build and analyse periodic-orbit length spectra of open
//! disk billiards. Every subcommand writes a CSV file under the output
//! directory and prints a short summary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use billiard_core::correlations::{self, AutocorrelationBump, EpsRule, PlateauBump, TestFunction};
use billiard_core::geometry::validate_no_eclipse;
use billiard_core::separation::{self, SpectrumSets};
use billiard_core::store::{self, SpectrumDb};
use billiard_core::symbolic::{cycle_count_check, enumerate_necklaces};
use billiard_core::thermo;
use billiard_core::{Error, ObstacleSystem, SolverOptions};

#[derive(Parser, Debug)]
#[command(name = "billiard", version, about = "Length spectra and pair correlations of open disk billiards")]
struct Cli {
    /// Geometry JSON (`{"disks":[{"center":[x,y],"radius":r},...]}`).
    #[arg(long, global = true, conflicts_with = "preset")]
    config: Option<PathBuf>,

    /// Built-in geometry used when no config file is given.
    #[arg(long, global = true, value_enum, default_value_t = Preset::Default)]
    preset: Preset,

    /// Output directory for CSV reports and the spectrum file.
    #[arg(long, global = true, env = "BILLIARD_OUT", default_value = "billiard-out")]
    out: PathBuf,

    /// Worker threads for spectrum builds.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    /// Seed for the solver's restart jitter.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Gradient tolerance of the orbit solver.
    #[arg(long, global = true, default_value_t = 1e-12)]
    tol: f64,

    /// Spectrum file; defaults to `<out>/spectrum.csv`.
    #[arg(long, global = true)]
    spectrum: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Preset {
    Default,
    Symmetric,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the no-eclipse condition.
    Validate,
    /// List primitive necklaces and check the cycle counts.
    Enumerate {
        #[arg(long)]
        n: usize,
    },
    /// Solve every primitive orbit up to word length n.
    Spectrum {
        #[arg(long)]
        n: usize,
    },
    /// Pressure, entropy, variance and spectral-gap estimates.
    #[command(subcommand)]
    Thermo(ThermoCmd),
    /// Pair counts of length differences and their predicted asymptotics.
    #[command(subcommand)]
    Correlate(CorrelateCmd),
    /// Separation of the length spectrum and the weighted sum over windows.
    #[command(subcommand)]
    Separation(SeparationCmd),
}

#[derive(Args, Debug, Clone, Copy)]
struct NArg {
    /// Word length used; defaults to the spectrum's n_max.
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum ThermoCmd {
    /// Pressure curve P(s) on a grid.
    Pressure {
        #[command(flatten)]
        n: NArg,
        #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
        s_min: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        s_max: f64,
        #[arg(long, default_value_t = 21)]
        s_steps: usize,
    },
    /// Flow entropy and the orbit-counting check.
    Entropy {
        #[command(flatten)]
        n: NArg,
    },
    /// The two variance estimates.
    Beta2 {
        #[command(flatten)]
        n: NArg,
        #[arg(long, default_value_t = 1e-2)]
        ds: f64,
    },
    /// Gaps of the (2,1)^{2k}(3,1) family.
    Lattice {
        #[arg(long, default_value_t = 6)]
        k_max: usize,
    },
    /// Spectral radius of the complex-weight transfer matrix.
    Gapscan {
        #[arg(long, value_delimiter = ',', default_value = "0,2,5,10,20,50")]
        t: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "2,3,4,5,6")]
        k: Vec<usize>,
    },
}

#[derive(Args, Debug, Clone, Copy)]
struct Interval {
    #[arg(long, allow_hyphen_values = true)]
    a: f64,
    #[arg(long, allow_hyphen_values = true)]
    b: f64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Chi {
    Plateau,
    Autocorrelation,
}

#[derive(Subcommand, Debug)]
enum CorrelateCmd {
    /// π(n, [a, b]).
    Pi {
        #[command(flatten)]
        n: NArg,
        #[command(flatten)]
        interval: Interval,
    },
    /// ω(n, [z + εa, z + εb]).
    Omega {
        #[command(flatten)]
        n: NArg,
        #[command(flatten)]
        interval: Interval,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        z: f64,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
    },
    /// ρ_N(χ).
    Rho {
        #[command(flatten)]
        n: NArg,
        #[arg(long, value_enum, default_value_t = Chi::Plateau)]
        chi: Chi,
        /// Support half-width.
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        /// Plateau fraction of the plateau bump.
        #[arg(long, default_value_t = 0.25)]
        eps0: f64,
    },
    /// Counts against the fixed-window asymptotic, n from 8 to n_max.
    Theorem1 {
        #[command(flatten)]
        interval: Interval,
        #[arg(long, default_value_t = 8)]
        n_min: usize,
        #[arg(long)]
        n_max: Option<usize>,
        /// β; estimated from the spectrum when omitted.
        #[arg(long)]
        beta: Option<f64>,
    },
    /// Shrinking windows on a z grid.
    Theorem2 {
        #[command(flatten)]
        n: NArg,
        #[command(flatten)]
        interval: Interval,
        /// `const:C`, `pow:C:P` or `exp:C:RATE`.
        #[arg(long, default_value = "pow:1:1")]
        eps: String,
        #[arg(long, default_value_t = 61)]
        z_points: usize,
        /// Grid half-width in units of β√n.
        #[arg(long, default_value_t = 3.0)]
        z_width: f64,
        #[arg(long)]
        beta: Option<f64>,
    },
}

#[derive(Args, Debug, Clone, Copy)]
struct DeltaArg {
    /// δ; defaults to 1.5 h.
    #[arg(long)]
    delta: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum SeparationCmd {
    /// Fraction of isolated lengths over a δ grid.
    S {
        #[arg(long, value_delimiter = ',')]
        delta: Option<Vec<f64>>,
    },
    /// Isolated-length counts against e^{hx/2}.
    S2 {
        #[command(flatten)]
        delta: DeltaArg,
        #[arg(long, default_value_t = 20)]
        x_points: usize,
    },
    /// Even-parity isolation from odd lengths, with the parity census.
    S3 {
        #[command(flatten)]
        delta: DeltaArg,
        #[arg(long, default_value_t = 20)]
        x_points: usize,
    },
    /// The weighted sum over rays near each census length.
    Mlpc {
        #[command(flatten)]
        delta: DeltaArg,
    },
    /// Pairs of lengths with a near-rational ratio.
    Ratios {
        #[arg(long, default_value_t = 50)]
        q_max: u64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
}

struct RunConfig {
    system: ObstacleSystem,
    out: PathBuf,
    spectrum_path: PathBuf,
    threads: usize,
    solver: SolverOptions,
}

impl RunConfig {
    fn from_cli(cli: &Cli) -> Result<Self> {
        if cli.threads < 1 {
            bail!("thread count must be at least 1");
        }
        if !(cli.tol > 0.0) {
            bail!("tolerance must be positive");
        }
        let system = match &cli.config {
            Some(p) => ObstacleSystem::from_json_file(p)
                .with_context(|| format!("loading geometry {}", p.display()))?,
            None => match cli.preset {
                Preset::Default => ObstacleSystem::default_asymmetric(),
                Preset::Symmetric => ObstacleSystem::symmetric(),
            },
        };
        let solver = SolverOptions {
            tol: cli.tol,
            seed: cli.seed,
            ..SolverOptions::default()
        };
        Ok(Self {
            system,
            spectrum_path: cli
                .spectrum
                .clone()
                .unwrap_or_else(|| cli.out.join("spectrum.csv")),
            out: cli.out.clone(),
            threads: cli.threads,
            solver,
        })
    }

    fn load(&self) -> Result<SpectrumDb> {
        if !self.spectrum_path.exists() {
            bail!(
                "no spectrum at {}; run `billiard spectrum --n N` first",
                self.spectrum_path.display()
            );
        }
        Ok(store::load_spectrum(&self.spectrum_path, &self.system)?)
    }

    fn writer(&self, name: &str) -> Result<Report> {
        std::fs::create_dir_all(&self.out)
            .with_context(|| format!("creating {}", self.out.display()))?;
        Report::create(&self.out.join(name))
    }
}

/// CSV report file; floats are written with 17 significant digits.
struct Report {
    inner: csv::Writer<std::fs::File>,
    path: PathBuf,
}

impl Report {
    fn create(path: &Path) -> Result<Self> {
        Ok(Self {
            inner: csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?,
            path: path.to_path_buf(),
        })
    }

    fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.inner.write_record(fields)?;
        Ok(())
    }

    fn finish(mut self) -> Result<()> {
        self.inner.flush()?;
        println!("wrote {}", self.path.display());
        Ok(())
    }
}

fn f(x: f64) -> String {
    format!("{x:.16e}")
}

fn n_or_max(n: NArg, db: &SpectrumDb) -> usize {
    n.n.unwrap_or(db.n_max())
}

fn beta_of(db: &SpectrumDb, given: Option<f64>) -> Result<f64> {
    match given {
        Some(b) => Ok(b),
        None => {
            let v = thermo::variance_beta2(db, db.n_max(), 1e-2)?;
            Ok(v.beta2_pressure.sqrt())
        }
    }
}

fn entropy_of(db: &SpectrumDb) -> Result<f64> {
    Ok(thermo::flow_entropy(db, db.n_max())?)
}

fn default_delta(db: &SpectrumDb, delta: DeltaArg) -> Result<f64> {
    match delta.delta {
        Some(d) => Ok(d),
        None => Ok(1.5 * entropy_of(db)?),
    }
}

fn x_grid(sets: &SpectrumSets, points: usize) -> Vec<f64> {
    let max = sets.pi.last().map(|e| e.length).unwrap_or(0.0);
    (1..=points.max(1))
        .map(|i| max * i as f64 / points.max(1) as f64)
        .collect()
}

fn run(cli: Cli) -> Result<()> {
    let cfg = RunConfig::from_cli(&cli)?;
    match cli.command {
        Command::Validate => {
            let report = validate_no_eclipse(cfg.system.disks())?;
            let mut w = cfg.writer("validate.csv")?;
            w.row(["i", "j", "l"])?;
            for (i, j, l) in &report.violations {
                w.row([i.to_string(), j.to_string(), l.to_string()])?;
            }
            w.finish()?;
            println!("disks: {}", cfg.system.len());
            println!("min gap: {:.6}", cfg.system.min_gap());
            println!("worst margin: {:.6}", report.worst_margin);
            println!("(H): pass");
        }
        Command::Enumerate { n } => {
            if n < 2 {
                bail!("n must be at least 2");
            }
            let kappa = cfg.system.len();
            let mut w = cfg.writer("necklaces.csv")?;
            w.row(["m", "word"])?;
            for m in 2..=n {
                for nk in enumerate_necklaces(kappa, m) {
                    w.row([m.to_string(), nk.to_string()])?;
                }
            }
            w.finish()?;
            println!("{:>4} {:>12} {:>14} {:>8}", "m", "c_m", "tr(A^m)", "check");
            for r in cycle_count_check(kappa, n)? {
                let ok = if r.identity_holds { "ok" } else { "MISMATCH" };
                println!("{:>4} {:>12} {:>14} {:>8}", r.n, r.primitive, r.trace, ok);
            }
        }
        Command::Spectrum { n } => {
            let existing = if cfg.spectrum_path.exists() {
                match store::load_spectrum(&cfg.spectrum_path, &cfg.system) {
                    Ok(db) => Some(db),
                    Err(e) => {
                        log::warn!("ignoring cached spectrum: {e}");
                        None
                    }
                }
            } else {
                None
            };
            let db = match existing {
                Some(db) if db.n_max() >= n => db,
                Some(db) => store::extend_spectrum(db, &cfg.system, n, cfg.threads, &cfg.solver)?,
                None => store::build_spectrum(&cfg.system, n, cfg.threads, &cfg.solver)?,
            };
            if let Some(parent) = cfg.spectrum_path.parent() {
                std::fs::create_dir_all(parent)?;
            }
            db.save(&cfg.spectrum_path)?;
            println!("wrote {}", cfg.spectrum_path.display());
            println!("{:>4} {:>8} {:>14} {:>14}", "m", "orbits", "min T", "max T");
            for m in 2..=db.n_max() {
                let ls: Vec<f64> = db.with_period(m).map(|r| r.length).collect();
                let lo = ls.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = ls.iter().copied().fold(0.0, f64::max);
                println!("{m:>4} {:>8} {lo:>14.6} {hi:>14.6}", ls.len());
            }
        }
        Command::Thermo(cmd) => thermo_cmd(&cfg, cmd)?,
        Command::Correlate(cmd) => correlate_cmd(&cfg, cmd)?,
        Command::Separation(cmd) => separation_cmd(&cfg, cmd)?,
    }
    Ok(())
}

fn thermo_cmd(cfg: &RunConfig, cmd: ThermoCmd) -> Result<()> {
    match cmd {
        ThermoCmd::Pressure { n, s_min, s_max, s_steps } => {
            let db = cfg.load()?;
            if !(s_min < s_max) || s_steps < 2 {
                bail!("need s-min < s-max and at least two steps");
            }
            let grid: Vec<f64> = (0..s_steps)
                .map(|i| s_min + (s_max - s_min) * i as f64 / (s_steps - 1) as f64)
                .collect();
            let n = n_or_max(n, &db);
            let mut w = cfg.writer("pressure.csv")?;
            w.row(["s", "P", "err"])?;
            println!("{:>10} {:>14} {:>12}", "s", "P", "err");
            for &s in &grid {
                let p = thermo::pressure(&db, s, n)?;
                w.row([f(s), f(p.value), f(p.error)])?;
                println!("{s:>10.4} {:>14.8} {:>12.3e}", p.value, p.error);
            }
            w.finish()?;
            let curve = thermo::pressure_curve(&db, &grid, n)?;
            println!("convex: {}", curve.is_convex());
        }
        ThermoCmd::Entropy { n } => {
            let db = cfg.load()?;
            let n = n_or_max(n, &db);
            let h = thermo::flow_entropy(&db, n)?;
            let c = thermo::counting_check(&db, &cfg.system, h)?;
            let mut w = cfg.writer("entropy.csv")?;
            w.row(["n", "h", "x", "count", "reference", "ratio"])?;
            w.row([n.to_string(), f(h), f(c.x), c.count.to_string(), f(c.reference), f(c.ratio)])?;
            w.finish()?;
            println!("h = {h:.10}");
            println!("census horizon x = {:.6}: {} orbits, e^(hx)/(hx) = {:.3}, ratio {:.4}", c.x, c.count, c.reference, c.ratio);
        }
        ThermoCmd::Beta2 { n, ds } => {
            let db = cfg.load()?;
            let n = n_or_max(n, &db);
            let v = thermo::variance_beta2(&db, n, ds)?;
            let mut w = cfg.writer("beta2.csv")?;
            w.row(["n", "beta2_pressure", "beta2_orbit", "agreement", "linear_coefficient"])?;
            w.row([n.to_string(), f(v.beta2_pressure), f(v.beta2_orbit), f(v.agreement), f(v.linear_coefficient)])?;
            w.finish()?;
            println!("beta2 (pressure) = {:.8}", v.beta2_pressure);
            println!("beta2 (orbits)   = {:.8}", v.beta2_orbit);
            println!("relative difference {:.4}", v.agreement);
        }
        ThermoCmd::Lattice { k_max } => {
            let rep = thermo::lattice_diagnostic(&cfg.system, k_max, &cfg.solver)?;
            let mut w = cfg.writer("lattice.csv")?;
            w.row(["k", "T", "gap"])?;
            println!("d = {:.10}", rep.d);
            println!("{:>3} {:>20} {:>14}", "k", "T_k", "gap");
            for e in &rep.entries {
                let g = e.gap.map(f).unwrap_or_default();
                w.row([e.k.to_string(), f(e.length), g])?;
                println!("{:>3} {:>20.12} {:>14}", e.k, e.length, e.gap.map(|g| format!("{g:.4e}")).unwrap_or_else(|| "-".into()));
            }
            w.finish()?;
            if let (Some(d), Some(r2)) = (rep.delta, rep.fit_r2) {
                println!("fitted delta = {d:.6}, R^2 = {r2:.6}");
            }
            if let Some(fail) = rep.failure {
                println!("stopped early: {fail}");
            }
        }
        ThermoCmd::Gapscan { t, k } => {
            let mut w = cfg.writer("gapscan.csv")?;
            w.row(["t", "k", "radius"])?;
            println!("{:>8} {:>4} {:>14}", "t", "k", "radius");
            for &kk in &k {
                let weights = thermo::block_weights(&cfg.system, kk)?;
                let h0 = billiard_core::symbolic::map_entropy(cfg.system.len())?;
                for &tt in &t {
                    let r = thermo::spectral_radius_of(&weights, tt, h0)?;
                    w.row([f(tt), kk.to_string(), f(r.radius)])?;
                    println!("{tt:>8.3} {kk:>4} {:>14.10}", r.radius);
                }
            }
            w.finish()?;
        }
    }
    Ok(())
}

fn correlate_cmd(cfg: &RunConfig, cmd: CorrelateCmd) -> Result<()> {
    let db = cfg.load()?;
    match cmd {
        CorrelateCmd::Pi { n, interval } => {
            let n = n_or_max(n, &db);
            let c = correlations::pair_count_pi(&db, n, interval.a, interval.b)?;
            let mut w = cfg.writer("pi.csv")?;
            w.row(["n", "a", "b", "count"])?;
            w.row([n.to_string(), f(interval.a), f(interval.b), c.to_string()])?;
            w.finish()?;
            println!("pi({n}, [{}, {}]) = {c}", interval.a, interval.b);
        }
        CorrelateCmd::Omega { n, interval, z, eps } => {
            let n = n_or_max(n, &db);
            let c = correlations::window_count_omega(&db, n, z, eps, interval.a, interval.b)?;
            let mut w = cfg.writer("omega.csv")?;
            w.row(["n", "z", "eps", "a", "b", "count"])?;
            w.row([n.to_string(), f(z), f(eps), f(interval.a), f(interval.b), c.to_string()])?;
            w.finish()?;
            println!("omega({n}, z = {z}) = {c}");
        }
        CorrelateCmd::Rho { n, chi, c, eps0 } => {
            let n = n_or_max(n, &db);
            let test: Box<dyn TestFunction> = match chi {
                Chi::Plateau => Box::new(PlateauBump::new(c, eps0)?),
                Chi::Autocorrelation => Box::new(AutocorrelationBump::new(c)?),
            };
            let rho = correlations::smoothed_correlation_rho(&db, n, test.as_ref())?;
            let mut w = cfg.writer("rho.csv")?;
            w.row(["n", "support", "rho"])?;
            w.row([n.to_string(), f(c), f(rho)])?;
            w.finish()?;
            println!("rho_{n} = {rho:.6}");
        }
        CorrelateCmd::Theorem1 { interval, n_min, n_max, beta } => {
            let beta = beta_of(&db, beta)?;
            let n_max = n_max.unwrap_or(db.n_max());
            if n_min > n_max {
                bail!("n-min {n_min} exceeds n-max {n_max}");
            }
            let rows = correlations::theorem1_report(&db, interval.a, interval.b, beta, n_min..=n_max)?;
            let mut w = cfg.writer("theorem1.csv")?;
            w.row(["n", "a", "b", "count", "predicted", "ratio"])?;
            println!("beta = {beta:.8}");
            println!("{:>4} {:>12} {:>16} {:>10}", "n", "count", "predicted", "ratio");
            for r in &rows {
                w.row([r.n.to_string(), f(r.a), f(r.b), r.count.to_string(), f(r.predicted), f(r.ratio)])?;
                println!("{:>4} {:>12} {:>16.3} {:>10.4}", r.n, r.count, r.predicted, r.ratio);
            }
            w.finish()?;
        }
        CorrelateCmd::Theorem2 { n, interval, eps, z_points, z_width, beta } => {
            let beta = beta_of(&db, beta)?;
            let n = n_or_max(n, &db);
            let rule: EpsRule = eps.parse()?;
            if z_points < 2 {
                bail!("need at least two z points");
            }
            let sd = beta * (n as f64).sqrt();
            let grid: Vec<f64> = (0..z_points)
                .map(|i| -z_width * sd + 2.0 * z_width * sd * i as f64 / (z_points - 1) as f64)
                .collect();
            let rep = correlations::theorem2_report(&db, interval.a, interval.b, beta, &rule, &grid, n)?;
            let ks = correlations::difference_ks(&db, n, beta)?;
            let mut w = cfg.writer("theorem2.csv")?;
            w.row(["z", "pi_count", "deviation", "omega_count", "omega_scaled", "profile"])?;
            for r in &rep.rows {
                w.row([f(r.z), r.pi_count.to_string(), f(r.deviation), r.omega_count.to_string(), f(r.omega_scaled), f(r.profile)])?;
            }
            w.finish()?;
            println!("n = {n}, eps_n = {:.6e}, beta = {beta:.8}", rep.eps_n);
            println!("sup deviation = {:.6}", rep.sup_deviation);
            println!("profile R^2 = {:.6}", rep.profile_r2);
            println!("KS distance of same-length differences = {ks:.6}");
        }
    }
    Ok(())
}

fn separation_cmd(cfg: &RunConfig, cmd: SeparationCmd) -> Result<()> {
    let db = cfg.load()?;
    let sets = SpectrumSets::from_db(&db, None)?;
    match cmd {
        SeparationCmd::S { delta } => {
            let deltas = match delta {
                Some(d) => d,
                None => {
                    let h = entropy_of(&db)?;
                    vec![0.0, 0.5 * h, h, 1.5 * h, 2.0 * h, 5.0 * h, 10.0 * h]
                }
            };
            let mut w = cfg.writer("s.csv")?;
            w.row(["delta", "fraction"])?;
            println!("{:>12} {:>10} {:>8}", "delta", "fraction", "rays");
            for d in deltas {
                let r = separation::check_s(&sets, d);
                w.row([f(d), f(r.fraction)])?;
                println!("{d:>12.6} {:>10.6} {:>8}", r.fraction, r.total);
            }
            w.finish()?;
        }
        SeparationCmd::S2 { delta, x_points } => {
            let h = entropy_of(&db)?;
            let d = default_delta(&db, delta)?;
            let pts = separation::check_s2(&sets, d, h, &x_grid(&sets, x_points));
            let mut w = cfg.writer("s2.csv")?;
            w.row(["x", "count", "reference"])?;
            println!("delta = {d:.6}");
            println!("{:>10} {:>8} {:>14}", "x", "count", "e^(hx/2)");
            for p in &pts {
                w.row([f(p.x), p.count.to_string(), f(p.reference)])?;
                println!("{:>10.4} {:>8} {:>14.4}", p.x, p.count, p.reference);
            }
            w.finish()?;
        }
        SeparationCmd::S3 { delta, x_points } => {
            let h = entropy_of(&db)?;
            let d = default_delta(&db, delta)?;
            let pts = separation::check_s3(&sets, d, h, &x_grid(&sets, x_points));
            let mut w = cfg.writer("s3.csv")?;
            w.row(["x", "count", "reference", "even", "odd", "parity_reference"])?;
            println!("delta = {d:.6}");
            println!("{:>10} {:>8} {:>12} {:>8} {:>8}", "x", "count", "e^(hx/3)", "even", "odd");
            for p in &pts {
                w.row([f(p.x), p.separated.count.to_string(), f(p.separated.reference), p.even.to_string(), p.odd.to_string(), f(p.parity_reference)])?;
                println!("{:>10.4} {:>8} {:>12.4} {:>8} {:>8}", p.x, p.separated.count, p.separated.reference, p.even, p.odd);
            }
            w.finish()?;
        }
        SeparationCmd::Mlpc { delta } => {
            let d = default_delta(&db, delta)?;
            let chi = AutocorrelationBump::new(1.0)?;
            let results = separation::mlpc_scan(&sets, d, &chi)?;
            let mut w = cfg.writer("mlpc.csv")?;
            w.row(["j", "sum", "contributors"])?;
            for r in &results {
                let names: Vec<String> = r
                    .contributors
                    .iter()
                    .map(|c| if c.k == 1 { c.necklace.to_string() } else { format!("{}^{}", c.necklace, c.k) })
                    .collect();
                w.row([r.j.to_string(), f(r.value), names.join(" ")])?;
            }
            w.finish()?;
            let lone = results.iter().filter(|r| r.lone()).count();
            println!("delta = {d:.6}");
            println!("{} of {} centres have a single contributing ray", lone, results.len());
        }
        SeparationCmd::Ratios { q_max, tol } => {
            let flags = separation::rational_independence_scan(&sets, q_max, tol)?;
            let mut w = cfg.writer("ratios.csv")?;
            w.row(["first", "second", "p", "q", "ratio"])?;
            for fl in &flags {
                w.row([fl.first.to_string(), fl.second.to_string(), fl.p.to_string(), fl.q.to_string(), f(fl.ratio)])?;
            }
            w.finish()?;
            println!("{} near-rational pairs (q <= {q_max}, tol {tol:e})", flags.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match e.downcast_ref::<Error>() {
                Some(Error::InvalidArgument(msg)) => eprintln!("error: {msg}"),
                _ => eprintln!("error: {e:#}"),
            }
            ExitCode::from(1)
        }
    }
}
