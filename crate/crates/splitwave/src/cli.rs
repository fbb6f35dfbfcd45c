//! Config parsing and the experiment driver behind the command-line
//! front end. Config text is plain `key=value` lines with `#` comments;
//! every key can also be set via the `SPLITWAVE_<KEY>` environment
//! variable or a flag, with flags taking precedence over the environment,
//! which takes precedence over the file.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::analysis::{
    convergence_study, local_error_order, run_inequality_trials, InequalityKind,
};
use crate::error::{Error, Result};
use crate::reference::reference_solve;
use crate::spectral::{Grid, RealField};
use crate::splitting::{evolve, Scheme, SchemeConfig, StepOrder, Trajectory};
use crate::substeps::BurgersConfig;
use crate::symbols::{verify_conditions, Symbol, SymbolParams};

/// What the top-level `run` subcommand integrates with.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunScheme {
    Godunov,
    Strang,
    Reference,
}

impl RunScheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunScheme::Godunov => "godunov",
            RunScheme::Strang => "strang",
            RunScheme::Reference => "reference",
        }
    }

    fn splitting(&self) -> Result<Scheme> {
        match self {
            RunScheme::Godunov => Ok(Scheme::Godunov),
            RunScheme::Strang => Ok(Scheme::Strang),
            RunScheme::Reference => Err(Error::Config(
                "scheme `reference` is only valid for the `run` subcommand".into(),
            )),
        }
    }
}

/// Initial-data choice: a named preset or a snapshot path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum U0Spec {
    /// `0.5 sin x`
    Sine,
    /// `0.5 sin x + 0.25 cos 2x`
    TwoMode,
    Snapshot(PathBuf),
}

/// Fully resolved experiment configuration with defaults applied.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub scheme: RunScheme,
    pub order: StepOrder,
    pub symbol: String,
    pub beta: f64,
    pub a: f64,
    pub n: usize,
    pub length: f64,
    pub dt: f64,
    pub horizon: f64,
    pub dts: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub u0: U0Spec,
    pub outdir: PathBuf,
    pub seed: u64,
    pub ximax: f64,
    pub samples: usize,
    pub trials: usize,
    pub ineq_s: f64,
    pub ineq_sigma: f64,
    pub cfl_safety: f64,
    pub min_internal_steps: usize,
    pub dealias: bool,
    pub blowup_threshold: f64,
    pub dt_ref: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scheme: RunScheme::Godunov,
            order: StepOrder::NonlinearFirst,
            symbol: "kdv".into(),
            beta: 1.0,
            a: 1.5,
            n: 256,
            length: 2.0 * std::f64::consts::PI,
            dt: 0.05,
            horizon: 1.0,
            dts: vec![0.1, 0.05, 0.025, 0.0125, 0.00625],
            sigmas: vec![0.0, 1.0],
            u0: U0Spec::TwoMode,
            outdir: PathBuf::from("out"),
            seed: 0,
            ximax: 100.0,
            samples: 2048,
            trials: 200,
            ineq_s: 2.0,
            ineq_sigma: 1.6,
            cfl_safety: 0.5,
            min_internal_steps: 4,
            dealias: true,
            blowup_threshold: 10.0,
            dt_ref: None,
        }
    }
}

const KEYS: &[&str] = &[
    "scheme",
    "order",
    "symbol",
    "beta",
    "a",
    "n",
    "length",
    "dt",
    "horizon",
    "dts",
    "sigmas",
    "u0",
    "outdir",
    "seed",
    "ximax",
    "samples",
    "trials",
    "s",
    "sigma",
    "cfl_safety",
    "min_internal_steps",
    "dealias",
    "blowup_threshold",
    "dt_ref",
];

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("key `{key}`: cannot parse value `{value}`")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|v| parse_num(key, v))
        .collect::<Result<Vec<f64>>>()
        .and_then(|v| {
            if v.is_empty() {
                Err(Error::Config(format!("key `{key}`: empty list")))
            } else {
                Ok(v)
            }
        })
}

impl RunConfig {
    /// Apply one `key=value` pair. Unknown keys and malformed values are
    /// rejected with a message naming the key and the accepted values.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "scheme" => {
                self.scheme = match value {
                    "godunov" => RunScheme::Godunov,
                    "strang" => RunScheme::Strang,
                    "reference" => RunScheme::Reference,
                    other => {
                        return Err(Error::Config(format!(
                            "key `scheme`: unknown value `{other}`; accepted: godunov, strang, reference"
                        )))
                    }
                }
            }
            "order" => {
                self.order = match value {
                    "nonlinear_first" => StepOrder::NonlinearFirst,
                    "linear_first" => StepOrder::LinearFirst,
                    other => {
                        return Err(Error::Config(format!(
                            "key `order`: unknown value `{other}`; accepted: nonlinear_first, linear_first"
                        )))
                    }
                }
            }
            "symbol" => self.symbol = value.to_string(),
            "beta" => self.beta = parse_num(key, value)?,
            "a" => self.a = parse_num(key, value)?,
            "n" => self.n = parse_num(key, value)?,
            "length" => self.length = parse_num(key, value)?,
            "dt" => self.dt = parse_num(key, value)?,
            "horizon" => self.horizon = parse_num(key, value)?,
            "dts" => self.dts = parse_list(key, value)?,
            "sigmas" => self.sigmas = parse_list(key, value)?,
            "u0" => {
                self.u0 = match value {
                    "sine" => U0Spec::Sine,
                    "two_mode" => U0Spec::TwoMode,
                    path => U0Spec::Snapshot(PathBuf::from(path)),
                }
            }
            "outdir" => self.outdir = PathBuf::from(value),
            "seed" => self.seed = parse_num(key, value)?,
            "ximax" => self.ximax = parse_num(key, value)?,
            "samples" => self.samples = parse_num(key, value)?,
            "trials" => self.trials = parse_num(key, value)?,
            "s" => self.ineq_s = parse_num(key, value)?,
            "sigma" => self.ineq_sigma = parse_num(key, value)?,
            "cfl_safety" => self.cfl_safety = parse_num(key, value)?,
            "min_internal_steps" => self.min_internal_steps = parse_num(key, value)?,
            "dealias" => {
                self.dealias = match value {
                    "true" | "1" | "on" => true,
                    "false" | "0" | "off" => false,
                    other => {
                        return Err(Error::Config(format!(
                            "key `dealias`: unknown value `{other}`; accepted: true, false"
                        )))
                    }
                }
            }
            "blowup_threshold" => self.blowup_threshold = parse_num(key, value)?,
            "dt_ref" => self.dt_ref = Some(parse_num(key, value)?),
            other => {
                return Err(Error::Config(format!(
                    "unknown key `{other}`; accepted keys: {}",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path)?;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key=value", lineno + 1))
            })?;
            self.apply(key.trim(), value)?;
        }
        Ok(())
    }

    fn apply_env(&mut self) -> Result<()> {
        for key in KEYS {
            let var = format!("SPLITWAVE_{}", key.to_uppercase());
            if let Ok(value) = std::env::var(&var) {
                self.apply(key, &value)?;
            }
        }
        Ok(())
    }

    pub fn symbol_object(&self) -> Result<Symbol> {
        Symbol::from_name(
            &self.symbol,
            SymbolParams {
                beta: Some(self.beta),
                a: Some(self.a),
            },
        )
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.n, self.length)
    }

    pub fn initial_data(&self) -> Result<RealField> {
        let grid = self.grid()?;
        Ok(match &self.u0 {
            U0Spec::Sine => RealField::from_fn(grid, |x| 0.5 * x.sin()),
            U0Spec::TwoMode => {
                RealField::from_fn(grid, |x| 0.5 * x.sin() + 0.25 * (2.0 * x).cos())
            }
            U0Spec::Snapshot(path) => RealField::read_csv(grid, path)?,
        })
    }

    pub fn burgers(&self) -> BurgersConfig {
        BurgersConfig {
            cfl_safety: self.cfl_safety,
            min_internal_steps: self.min_internal_steps,
            dealias_on: self.dealias,
            blowup_threshold: self.blowup_threshold,
        }
    }

    pub fn scheme_config(&self) -> Result<SchemeConfig> {
        let cfg = SchemeConfig {
            scheme: self.scheme.splitting()?,
            order: self.order,
            dt: self.dt,
            horizon: self.horizon,
            symbol: self.symbol_object()?,
            burgers: self.burgers(),
            nonlinear_identity: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Resolve a full config from (optional) file, environment, then explicit
/// overrides, in that precedence order.
pub fn parse_config(path: Option<&Path>, overrides: &[(String, String)]) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = path {
        cfg.apply_file(path)?;
    }
    cfg.apply_env()?;
    for (key, value) in overrides {
        cfg.apply(key, value)?;
    }
    Ok(cfg)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Run,
    Converge,
    LocalOrder,
    VerifySymbol,
    VerifyLemmas,
}

/// Slope acceptance bands pinned per scheme.
fn global_slope_band(scheme: Scheme) -> (f64, f64) {
    match scheme {
        Scheme::Godunov => (0.8, 1.2),
        Scheme::Strang => (1.75, 2.25),
    }
}

fn local_slope_band(scheme: Scheme) -> (f64, f64) {
    match scheme {
        Scheme::Godunov => (1.7, 2.3),
        Scheme::Strang => (2.7, 3.3),
    }
}

const MIN_R2: f64 = 0.99;
const MAX_RATIO_STABILITY: f64 = 0.05;

/// Execute a subcommand, write its output files under `cfg.outdir`, print a
/// short summary to stdout, and return the process exit code (0 iff every
/// embedded assertion passed).
pub fn run_command(cmd: Command, cfg: &RunConfig) -> Result<i32> {
    fs::create_dir_all(&cfg.outdir)?;
    match cmd {
        Command::Run => cmd_run(cfg),
        Command::Converge => cmd_converge(cfg),
        Command::LocalOrder => cmd_local_order(cfg),
        Command::VerifySymbol => cmd_verify_symbol(cfg),
        Command::VerifyLemmas => cmd_verify_lemmas(cfg),
    }
}

fn cmd_run(cfg: &RunConfig) -> Result<i32> {
    let u0 = cfg.initial_data()?;
    let sym = cfg.symbol_object()?;
    let traj: Trajectory = match cfg.scheme {
        RunScheme::Reference => {
            let dt_ref = cfg.dt_ref.unwrap_or(cfg.dt);
            let end = reference_solve(&u0, &sym, cfg.horizon, dt_ref, true)?;
            let n_steps = ((cfg.horizon / dt_ref) * (1.0 + 1e-12)).floor();
            Trajectory {
                times: vec![0.0, n_steps * dt_ref],
                diagnostics: vec![
                    crate::splitting::StepDiagnostics {
                        l2: u0.sobolev_norm(0.0),
                        mean: u0.mean(),
                        hs: u0.sobolev_norm(crate::splitting::DIAGNOSTIC_SIGMA),
                    },
                    crate::splitting::StepDiagnostics {
                        l2: end.sobolev_norm(0.0),
                        mean: end.mean(),
                        hs: end.sobolev_norm(crate::splitting::DIAGNOSTIC_SIGMA),
                    },
                ],
                states: vec![u0.clone(), end],
            }
        }
        _ => evolve(&u0, &cfg.scheme_config()?)?,
    };
    traj.write_csv(&cfg.outdir.join("trajectory.csv"))?;
    traj.final_state()
        .write_csv(&cfg.outdir.join("final_state.csv"))?;
    println!(
        "run complete: scheme={} symbol={} t_end={:.6} l2={:.12e}",
        cfg.scheme.as_str(),
        cfg.symbol,
        traj.final_time(),
        traj.diagnostics.last().unwrap().l2
    );
    Ok(0)
}

fn cmd_converge(cfg: &RunConfig) -> Result<i32> {
    let u0 = cfg.initial_data()?;
    let mut base = cfg.scheme_config()?;
    base.dt = *cfg.dts.last().ok_or_else(|| Error::Config("dts empty".into()))?;
    let report = convergence_study(&base, &u0, &cfg.dts, &cfg.sigmas)?;

    let csv_name = format!("converge_{}_{}.csv", cfg.scheme.as_str(), cfg.symbol);
    report.write_csv(&cfg.outdir.join(&csv_name))?;

    let mut summary = report.summary();
    let band = global_slope_band(base.scheme);
    let mut pass = true;
    for fit in &report.fits {
        match (fit.slope, fit.r2) {
            (Some(slope), Some(r2)) => {
                if slope < band.0 || slope > band.1 || r2 < MIN_R2 {
                    pass = false;
                    let _ = writeln!(
                        summary,
                        "fail: sigma={} slope={slope:.4} r2={r2:.4} outside [{}, {}] / r2 >= {MIN_R2}",
                        fit.sigma, band.0, band.1
                    );
                }
            }
            _ => {
                pass = false;
                let _ = writeln!(summary, "fail: sigma={} degenerate fit", fit.sigma);
            }
        }
    }
    let _ = writeln!(summary, "pass={pass}");
    fs::write(cfg.outdir.join("report.txt"), &summary)?;

    for (i, &sigma) in report.sigmas.iter().enumerate() {
        let mut data = String::new();
        for sample in &report.samples {
            let _ = writeln!(data, "{:.16e} {:.16e}", sample.dt, sample.errors[i]);
        }
        let name = format!("loglog_sigma{}.dat", sigma_tag(sigma));
        fs::write(cfg.outdir.join(name), data)?;
    }
    write_plot_script(cfg, &report.sigmas)?;

    print!("{summary}");
    Ok(if pass { 0 } else { 1 })
}

fn sigma_tag(sigma: f64) -> String {
    if sigma.fract() == 0.0 {
        format!("{}", sigma as i64)
    } else {
        format!("{sigma}").replace('.', "p")
    }
}

fn write_plot_script(cfg: &RunConfig, sigmas: &[f64]) -> Result<()> {
    let mut script = String::from(
        "# gnuplot order plot\nset logscale xy\nset xlabel 'dt'\nset ylabel 'error'\nset key left top\nplot \\\n",
    );
    let mut parts = Vec::new();
    for &sigma in sigmas {
        parts.push(format!(
            "  'loglog_sigma{}.dat' using 1:2 with linespoints title 'H^{}'",
            sigma_tag(sigma),
            sigma
        ));
    }
    script.push_str(&parts.join(", \\\n"));
    script.push('\n');
    fs::write(cfg.outdir.join("plot.gp"), script)?;
    Ok(())
}

fn cmd_local_order(cfg: &RunConfig) -> Result<i32> {
    let u0 = cfg.initial_data()?;
    let base = cfg.scheme_config()?;
    let sigma = *cfg.sigmas.first().unwrap_or(&0.0);
    let report = local_error_order(&base, &u0, &cfg.dts, sigma)?;

    let csv_name = format!("local_order_{}_{}.csv", cfg.scheme.as_str(), cfg.symbol);
    report.write_csv(&cfg.outdir.join(csv_name))?;

    let band = local_slope_band(base.scheme);
    let pass = report.slope >= band.0 && report.slope <= band.1;
    let mut summary = format!(
        "scheme={}\nsymbol={}\nsigma={}\nslope={:.6}\nr2={:.6}\npass={pass}\n",
        report.scheme, report.symbol, report.sigma, report.slope, report.r2
    );
    if !pass {
        let _ = writeln!(
            summary,
            "fail: slope {:.4} outside [{}, {}]",
            report.slope, band.0, band.1
        );
    }
    fs::write(cfg.outdir.join("report.txt"), &summary)?;
    print!("{summary}");
    Ok(if pass { 0 } else { 1 })
}

fn cmd_verify_symbol(cfg: &RunConfig) -> Result<i32> {
    let sym = cfg.symbol_object()?;
    let report = verify_conditions(&sym, cfg.ximax, cfg.samples)?;
    let text = format!("symbol={}\np={}\n{}\n", sym.name(), sym.growth_order(), report);
    fs::write(cfg.outdir.join("report.txt"), &text)?;
    print!("{text}");
    Ok(if report.passed() { 0 } else { 1 })
}

fn cmd_verify_lemmas(cfg: &RunConfig) -> Result<i32> {
    let mut pass = true;
    let mut text = String::from("inequality,trials,max_ratio,ratio_stability\n");
    for kind in InequalityKind::ALL {
        let rep = run_inequality_trials(
            kind,
            cfg.trials,
            cfg.seed,
            64,
            cfg.ineq_s,
            cfg.ineq_sigma,
        )?;
        if !rep.max_ratio.is_finite() || rep.ratio_stability >= MAX_RATIO_STABILITY {
            pass = false;
        }
        let _ = writeln!(
            text,
            "{},{},{:.16e},{:.16e}",
            rep.kind.as_str(),
            rep.trials,
            rep.max_ratio,
            rep.ratio_stability
        );
    }
    let _ = writeln!(text, "pass={pass}");
    fs::write(cfg.outdir.join("report.txt"), &text)?;
    print!("{text}");
    Ok(if pass { 0 } else { 1 })
}
