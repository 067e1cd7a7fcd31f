//! Command-line front end. Every run resolves a [`RunConfig`] from defaults,
//! an optional JSON file and flags (in that order of precedence, flags last),
//! and echoes it into each output file.

use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::estimate::{fit_spectrum, read_records_csv, simulate_measurements, FitModel, FitOptions, NoiseModel};
use crate::eyd::{eyd_distribution, trap_energy};
use crate::meanfield::{derive_couplings, meanfield_signal, PhysicalParams, SolverOptions};
use crate::oracle::full_hilbert_signal;
use crate::ramsey::{asymptotic_signal, exact_signal, tau_grid, truncated_signal, RamseyParams, SignalCurve, SignalMethod};
use crate::spectrum::Spectrum;
use crate::validate;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SIZE: i32 = 3;
pub const EXIT_NO_CONVERGENCE: i32 = 4;

/// Fully resolved parameters for one invocation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    pub n: usize,
    /// Spectrum: signal input, truth for simulated estimation.
    pub p: Vec<f64>,
    /// Fit dimension; defaults to `p.len()`.
    pub d: Option<usize>,
    pub beta: f64,
    pub delta: f64,
    #[serde(rename = "U")]
    pub interaction: f64,
    /// `start:step:count`.
    pub tau_grid: String,
    pub methods: Vec<String>,
    pub k_sigma: f64,
    pub seed: u64,
    pub shots: usize,
    pub noise: NoiseModel,
    pub fit_model: FitModel,
    pub starts: usize,
    pub records: Option<PathBuf>,
    pub energies: bool,
    pub quick: bool,
    pub out_dir: PathBuf,
    pub prefix: Option<String>,
    pub solver: SolverOptions,
    pub physical: PhysicalParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: String::new(),
            n: 30,
            p: vec![0.7, 0.2, 0.1],
            d: None,
            beta: PI / 2.0,
            delta: 0.0,
            interaction: 1.0,
            tau_grid: "0:2e-3:200".into(),
            methods: vec!["exact".into()],
            k_sigma: crate::ramsey::DEFAULT_K_SIGMA,
            seed: 0,
            shots: 100,
            noise: NoiseModel::Binomial,
            fit_model: FitModel::Exact,
            starts: 16,
            records: None,
            energies: false,
            quick: false,
            out_dir: PathBuf::from("."),
            prefix: None,
            solver: SolverOptions::default(),
            physical: PhysicalParams::default(),
        }
    }
}

impl RunConfig {
    pub fn spectrum(&self) -> Result<Spectrum> {
        Spectrum::new(self.p.clone())
    }

    pub fn taus(&self) -> Result<Vec<f64>> {
        parse_tau_grid(&self.tau_grid)
    }

    pub fn ramsey_params(&self) -> Result<RamseyParams> {
        RamseyParams::new(self.n, self.beta, self.delta, self.interaction, self.taus()?)
    }

    fn prefix(&self) -> &str {
        self.prefix.as_deref().unwrap_or(&self.command)
    }

    fn path(&self, suffix: &str) -> PathBuf {
        self.out_dir.join(format!("{}{suffix}", self.prefix()))
    }
}

/// `start:step:count` to the list of dark times.
pub fn parse_tau_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, step, count] = parts.as_slice() else {
        return Err(Error::Parse(format!("tau grid `{spec}` is not start:step:count")));
    };
    let start: f64 = start.trim().parse().map_err(|_| Error::Parse(format!("bad tau start `{start}`")))?;
    let step: f64 = step.trim().parse().map_err(|_| Error::Parse(format!("bad tau step `{step}`")))?;
    let count: usize = count.trim().parse().map_err(|_| Error::Parse(format!("bad tau count `{count}`")))?;
    if count == 0 || !(step > 0.0 || count == 1) {
        return Err(Error::Parse(format!("tau grid `{spec}` needs count ≥ 1 and a positive step")));
    }
    Ok(tau_grid(start, step, count))
}

#[derive(Parser, Debug)]
#[command(name = "ramsey-spectrum", version, about = "Ramsey-signal spectrum estimation toolkit")]
pub struct Cli {
    /// JSON config; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Print the resolved config as JSON and exit.
    #[arg(long, global = true)]
    pub print_config: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Signal curves by one or more methods.
    Signal(SignalArgs),
    /// Outcome distribution over Young diagrams.
    Eyd(EydArgs),
    /// Simulate or read shot records and fit the spectrum.
    Estimate(EstimateArgs),
    /// Run the oracle and invariant checks.
    Validate(ValidateArgs),
    /// Couplings from scattering lengths and trap geometry.
    Physical(PhysicalArgs),
}

#[derive(Args, Debug, Default)]
pub struct CommonArgs {
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated spectrum.
    #[arg(long, value_delimiter = ',')]
    pub p: Option<Vec<f64>>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Output file stem; defaults to the subcommand name.
    #[arg(long)]
    pub prefix: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug, Default)]
pub struct RamseyArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    #[arg(long = "U", alias = "u", allow_negative_numbers = true)]
    pub interaction: Option<f64>,
    /// `start:step:count`.
    #[arg(long)]
    pub tau_grid: Option<String>,
}

#[derive(Args, Debug)]
pub struct SignalArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub ramsey: RamseyArgs,
    /// exact, truncated, asymptotic, meanfield, oracle or all; comma-separated.
    #[arg(long = "method", value_delimiter = ',')]
    pub methods: Option<Vec<String>>,
    #[arg(long)]
    pub k_sigma: Option<f64>,
}

#[derive(Args, Debug)]
pub struct EydArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Add an `E/U` column.
    #[arg(long)]
    pub energies: bool,
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub ramsey: RamseyArgs,
    /// Shot records (`tau,shot_index,n_e`); simulate from `--p` when absent.
    #[arg(long)]
    pub records: Option<PathBuf>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub shots: Option<usize>,
    #[arg(long)]
    pub noise: Option<String>,
    #[arg(long)]
    pub fit_model: Option<String>,
    #[arg(long)]
    pub starts: Option<usize>,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Small sizes only; skips the slow checks.
    #[arg(long)]
    pub quick: bool,
}

#[derive(Args, Debug)]
pub struct PhysicalArgs {
    /// Atom count for the `1/(nU)` timescale.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub a_gg: Option<f64>,
    #[arg(long)]
    pub a_ee: Option<f64>,
    #[arg(long)]
    pub a_eg_plus: Option<f64>,
    #[arg(long)]
    pub a_eg_minus: Option<f64>,
    /// rad/s.
    #[arg(long)]
    pub omega_perp: Option<f64>,
    /// Well length in metres.
    #[arg(long = "L", alias = "length")]
    pub length: Option<f64>,
    /// Two-body loss rate in rad/s.
    #[arg(long)]
    pub gamma: Option<f64>,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl CommonArgs {
    fn apply(&self, c: &mut RunConfig) {
        set(&mut c.n, self.n);
        set(&mut c.p, self.p.clone());
        set(&mut c.out_dir, self.out_dir.clone());
        if self.prefix.is_some() {
            c.prefix = self.prefix.clone();
        }
        set(&mut c.seed, self.seed);
    }
}

impl RamseyArgs {
    fn apply(&self, c: &mut RunConfig) {
        set(&mut c.beta, self.beta);
        set(&mut c.delta, self.delta);
        set(&mut c.interaction, self.interaction);
        set(&mut c.tau_grid, self.tau_grid.clone());
    }
}

/// Defaults, then `cli.config`, then flags.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut c = match &cli.config {
        Some(path) => serde_json::from_str(&fs::read_to_string(path)?)?,
        None => RunConfig::default(),
    };
    match &cli.command {
        Command::Signal(a) => {
            c.command = "signal".into();
            a.common.apply(&mut c);
            a.ramsey.apply(&mut c);
            set(&mut c.methods, a.methods.clone());
            set(&mut c.k_sigma, a.k_sigma);
        }
        Command::Eyd(a) => {
            c.command = "eyd".into();
            a.common.apply(&mut c);
            c.energies |= a.energies;
        }
        Command::Estimate(a) => {
            c.command = "estimate".into();
            a.common.apply(&mut c);
            a.ramsey.apply(&mut c);
            if a.records.is_some() {
                c.records = a.records.clone();
            }
            if a.d.is_some() {
                c.d = a.d;
            }
            set(&mut c.shots, a.shots);
            set(&mut c.noise, a.noise.as_deref().map(NoiseModel::from_str).transpose()?);
            set(&mut c.fit_model, a.fit_model.as_deref().map(FitModel::from_str).transpose()?);
            set(&mut c.starts, a.starts);
        }
        Command::Validate(a) => {
            c.command = "validate".into();
            a.common.apply(&mut c);
            c.quick |= a.quick;
        }
        Command::Physical(a) => {
            c.command = "physical".into();
            set(&mut c.n, a.n);
            let ph = &mut c.physical;
            set(&mut ph.a_gg, a.a_gg);
            set(&mut ph.a_ee, a.a_ee);
            set(&mut ph.a_eg_plus, a.a_eg_plus);
            set(&mut ph.a_eg_minus, a.a_eg_minus);
            set(&mut ph.omega_perp, a.omega_perp);
            set(&mut ph.length, a.length);
            set(&mut ph.gamma, a.gamma);
        }
    }
    Ok(c)
}

/// Exit code for a library error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::SizeLimit { .. } => EXIT_SIZE,
        Error::Solver(_) => EXIT_VALIDATION,
        _ => EXIT_CONFIG,
    }
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(cli: &Cli) -> Result<i32> {
    let config = resolve_config(cli)?;
    if cli.print_config {
        say(format_args!("{}", serde_json::to_string_pretty(&config)?));
        return Ok(EXIT_OK);
    }
    match config.command.as_str() {
        "signal" => cmd_signal(&config),
        "eyd" => cmd_eyd(&config),
        "estimate" => cmd_estimate(&config),
        "validate" => cmd_validate(&config),
        "physical" => cmd_physical(&config),
        other => Err(Error::Parse(format!("unknown command `{other}`"))),
    }
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// CSV whose first line is `# config: {…}`.
fn write_csv(path: &Path, config: &RunConfig, header: &str, rows: impl IntoIterator<Item = String>) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(out, "# config: {}", serde_json::to_string(config)?)?;
    writeln!(out, "{header}")?;
    for row in rows {
        writeln!(out, "{row}")?;
    }
    out.flush()?;
    Ok(())
}

fn compute_curve(method: SignalMethod, config: &RunConfig, params: &RamseyParams, p: &Spectrum) -> Result<SignalCurve> {
    match method {
        SignalMethod::Exact => exact_signal(params, p),
        SignalMethod::Truncated => truncated_signal(params, p, config.k_sigma),
        SignalMethod::Asymptotic => asymptotic_signal(params, p),
        SignalMethod::MeanfieldOde => meanfield_signal(params, p, &config.solver),
        SignalMethod::Oracle => full_hilbert_signal(params, p, None),
    }
}

pub fn cmd_signal(config: &RunConfig) -> Result<i32> {
    let params = config.ramsey_params()?;
    let p = config.spectrum()?;
    let all = config.methods.iter().any(|m| m == "all");
    let methods: Vec<SignalMethod> = if all {
        vec![SignalMethod::Exact, SignalMethod::Truncated, SignalMethod::Asymptotic, SignalMethod::MeanfieldOde, SignalMethod::Oracle]
    } else {
        config.methods.iter().map(|m| m.parse()).collect::<Result<_>>()?
    };
    if methods.is_empty() {
        return Err(Error::InvalidParameter("no signal method given".into()));
    }
    let mut curves = Vec::new();
    let mut skipped = serde_json::Map::new();
    for method in methods {
        let curve = match compute_curve(method, config, &params, &p) {
            Ok(c) => c,
            Err(e @ Error::SizeLimit { .. }) if all => {
                skipped.insert(method.as_str().into(), json!(e.to_string()));
                continue;
            }
            Err(e) => return Err(e),
        };
        let stem = format!("_{}", method.as_str());
        write_csv(
            &config.path(&format!("{stem}.csv")),
            config,
            "tau,ne_over_n",
            curve.params.taus.iter().zip(&curve.values).map(|(t, v)| format!("{},{}", fmt(*t), fmt(*v))),
        )?;
        write_json(&config.path(&format!("{stem}.json")), &json!({ "config": config, "curve": curve }))?;
        curves.push(curve);
    }
    if all {
        let reference = curves.iter().find(|c| c.method == SignalMethod::Exact).expect("exact always runs");
        let deviations: serde_json::Map<String, serde_json::Value> =
            curves.iter().map(|c| (c.method.as_str().to_string(), json!(c.max_abs_deviation(reference)))).collect();
        write_json(
            &config.path("_deviations.json"),
            &json!({ "config": config, "reference": "exact", "max_abs_deviation": deviations, "skipped": skipped }),
        )?;
    }
    for c in &curves {
        say(format_args!("{}: {} points", c.method.as_str(), c.values.len()));
    }
    Ok(EXIT_OK)
}

pub fn cmd_eyd(config: &RunConfig) -> Result<i32> {
    let p = config.spectrum()?;
    if config.n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let dist = eyd_distribution(config.n, &p)?;
    let d = dist.d;
    write_json(&config.path(".json"), &json!({ "config": config, "distribution": dist }))?;
    let mut header = String::from("lambda,prob");
    if d == 2 {
        header.push_str(",S,p_estimate");
    }
    if config.energies {
        header.push_str(",energy_over_U");
    }
    let n = config.n as f64;
    let rows = dist.entries.iter().map(|e| {
        let rows = e.lambda.padded(d);
        let label = rows.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
        let mut row = format!("{label},{}", fmt(e.prob));
        if d == 2 {
            let s = (rows[0] as f64 - rows[1] as f64) / 2.0;
            row.push_str(&format!(",{},{}", fmt(s), fmt(0.5 + s / n)));
        }
        if config.energies {
            row.push_str(&format!(",{}", fmt(trap_energy(&e.lambda, 1.0))));
        }
        row
    });
    write_csv(&config.path(".csv"), config, &header, rows)?;
    let mode = dist.mode();
    say(format_args!("{} diagrams; mode {:?} with probability {:.6}", dist.entries.len(), mode.lambda.rows(), mode.prob));
    Ok(EXIT_OK)
}

pub fn cmd_estimate(config: &RunConfig) -> Result<i32> {
    let d = config.d.unwrap_or(config.p.len());
    let params = config.ramsey_params()?;
    let records = match &config.records {
        Some(path) => read_records_csv(fs::File::open(path)?)?,
        None => {
            let truth = config.spectrum()?;
            if truth.dim() != d {
                return Err(Error::SizeMismatch { expected: d, got: truth.dim() });
            }
            let recs = simulate_measurements(&params, &truth, config.shots, config.seed, config.noise)?;
            let rows: Vec<String> =
                recs.iter().flat_map(|r| r.counts.iter().enumerate().map(move |(i, c)| format!("{},{i},{c}", fmt(r.tau)))).collect();
            write_csv(&config.path("_records.csv"), config, "tau,shot_index,n_e", rows)?;
            recs
        }
    };
    let opts = FitOptions { model: config.fit_model, starts: config.starts, seed: config.seed, ..Default::default() };
    let result = fit_spectrum(&records, &params, d, &opts)?;
    write_json(&config.path(".json"), &json!({ "config": config, "result": result }))?;
    let rows = result
        .params
        .taus
        .iter()
        .zip(result.observed.iter().zip(&result.fitted))
        .map(|(t, (y, s))| format!("{},{},{},{}", fmt(*t), fmt(*y), fmt(*s), fmt(y - s)));
    write_csv(&config.path("_residuals.csv"), config, "tau,observed,fitted,residual", rows)?;
    say(format_args!("p_hat = {:?}, converged = {}", result.p_hat.as_slice(), result.converged));
    Ok(if result.converged { EXIT_OK } else { EXIT_NO_CONVERGENCE })
}

pub fn cmd_validate(config: &RunConfig) -> Result<i32> {
    let reports = validate::run_all(config.quick);
    for r in &reports {
        say(format_args!("{}", r.summary_line()));
    }
    let all_pass = reports.iter().all(|r| r.passed());
    write_json(&config.path("_report.json"), &json!({ "config": config, "all_pass": all_pass, "checks": reports }))?;
    Ok(if all_pass { EXIT_OK } else { EXIT_VALIDATION })
}

pub fn cmd_physical(config: &RunConfig) -> Result<i32> {
    let c = derive_couplings(&config.physical)?;
    if config.n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let out = json!({
        "config": config,
        "couplings": c,
        "U_gg_hz": c.u_gg / (2.0 * PI),
        "timescale_1_over_nU": if c.u_gg != 0.0 { json!(1.0 / (config.n as f64 * c.u_gg)) } else { json!(null) },
        "gamma_over_U": if c.u_gg != 0.0 { json!(config.physical.gamma / c.u_gg) } else { json!(null) },
    });
    say(format_args!("{}", serde_json::to_string_pretty(&out)?));
    Ok(EXIT_OK)
}

// Stdout may be a closed pipe (`| head`); that is not an error.
fn say(line: std::fmt::Arguments) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout(), "{line}");
}
