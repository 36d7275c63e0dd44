use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sobolev_growth::harness::{
    emit_report, evaluate_constants, report_json, report_text, resonance_check, run_experiment, sweep,
    write_monitor_csv, ExperimentConfig, ReportFormat, ResonanceCheck, SweepConfig, ThresholdConstants,
    TimePolicy, DEFAULT_NLS_GAMMA,
};
use sobolev_growth::model::{integrate_channel, ChannelSpec, ChannelSummary};
use sobolev_growth::pde::{ConservedColumn, EquationKind};
use sobolev_growth::resonance::{
    find_q_vector, min_divisor, MomentumRule, MonomialClass,
};
use sobolev_growth::spectral::{frequencies_nls, frequencies_wave, FrequencyTable, ModeSet};
use sobolev_growth::{Error, Result};

#[derive(Parser)]
#[command(name = "sobolev-growth", version, about = "Resonant energy transfer experiments for wave and NLS equations on the circle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Resonant monomials and the smallest divisor with one normal mode.
    Analyze(AnalyzeArgs),
    /// Integrates a diffusion channel of the resonant model.
    Channel(ChannelArgs),
    /// Full run: channel, lift and Galerkin evolution.
    Simulate(SimulateArgs),
    /// Threshold constants in log space.
    Constants(ConstantsArgs),
    /// Runs a TOML list of configs in parallel.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Equation {
    Wave,
    Nls,
}

impl From<Equation> for EquationKind {
    fn from(e: Equation) -> Self {
        match e {
            Equation::Wave => EquationKind::Wave,
            Equation::Nls => EquationKind::Nls,
        }
    }
}

#[derive(Args, Clone)]
struct ModelArgs {
    #[arg(long, value_enum, default_value = "wave")]
    equation: Equation,
    /// Wave degree.
    #[arg(long, default_value_t = 2)]
    p: u32,
    /// NLS potential wavenumber.
    #[arg(long = "N", alias = "n", default_value_t = 8)]
    n: i64,
    /// NLS tangential modes k1,k2,k3.
    #[arg(long, value_delimiter = ',', default_values_t = [1, -1, 2], allow_negative_numbers = true)]
    k: Vec<i64>,
    /// NLS frequency vector q1,q2,q3; searched for when absent.
    #[arg(long, value_delimiter = ',')]
    q: Option<Vec<f64>>,
    #[arg(long)]
    jmax: Option<usize>,
    /// Smallest acceptable Diophantine constant.
    #[arg(long)]
    gamma_bound: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl ModelArgs {
    fn k3(&self) -> Result<[i64; 3]> {
        self.k
            .as_slice()
            .try_into()
            .map_err(|_| Error::Config(format!("--k needs three values (got {:?})", self.k)))
    }

    fn q3(&self) -> Result<Option<[f64; 3]>> {
        self.q
            .as_deref()
            .map(|q| {
                q.try_into()
                    .map_err(|_| Error::Config(format!("--q needs three values (got {q:?})")))
            })
            .transpose()
    }

    fn table(&self) -> Result<(ModeSet, FrequencyTable)> {
        match self.equation {
            Equation::Wave => {
                let modes = ModeSet::wave(self.p, self.jmax)?;
                let freq = frequencies_wave(self.p, modes.j_max())?;
                Ok((modes, freq))
            }
            Equation::Nls => {
                let modes = ModeSet::nls(self.k3()?, self.n, self.jmax)?;
                let bound = self.gamma_bound.unwrap_or(DEFAULT_NLS_GAMMA);
                let q = match self.q3()? {
                    Some(q) => q,
                    None => find_q_vector(bound, 2.0, 10_000, self.seed)?.0,
                };
                let (freq, _) = frequencies_nls(&modes, q)?;
                Ok((modes, freq))
            }
        }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ChannelArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    /// CSV of the orbit.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON summary; stdout when absent.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// TOML config; explicit flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    equation: Option<Equation>,
    #[arg(long)]
    p: Option<u32>,
    #[arg(long = "N", alias = "n")]
    n: Option<i64>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    jmax: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    gamma_bound: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    apply_gamma_correction: bool,
    /// Runs to 1.2 T.
    #[arg(long)]
    extend: bool,
    /// CSV of the monitors.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report file; stdout when absent.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => ReportFormat::Json,
            Format::Text => ReportFormat::Text,
        }
    }
}

#[derive(Args)]
struct ConstantsArgs {
    /// Even degrees to tabulate.
    #[arg(long, num_args = 1.., default_values_t = [4u32, 12, 20, 40])]
    p: Vec<u32>,
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    #[arg(long)]
    c_minus: Option<f64>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// TOML file with `[[run]]` tables.
    config: PathBuf,
    /// Directory for per-run reports and CSVs.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Serialize)]
struct Analysis {
    j_max: usize,
    gamma: f64,
    resonance: ResonanceCheck,
    min_divisor_one_normal: f64,
    min_divisor_monomial: String,
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => Ok(std::fs::write(p, text)?),
        None => stdout(&format!("{text}\n")),
    }
}

/// Writes to stdout; a closed pipe ends output quietly.
fn stdout(text: &str) -> Result<()> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn analyze(args: AnalyzeArgs) -> Result<()> {
    let (modes, freq) = args.model.table()?;
    let resonance = resonance_check(&modes, &freq)?;
    let degree = match args.model.equation {
        Equation::Wave => args.model.p + 1,
        Equation::Nls => 4,
    };
    let (d, m) = min_divisor(
        &MonomialClass::exactly(degree, 1),
        &modes,
        &freq,
        MomentumRule::for_table(&freq),
    )?;
    let out = Analysis {
        j_max: modes.j_max(),
        gamma: freq.gamma,
        resonance,
        min_divisor_one_normal: d,
        min_divisor_monomial: m.to_string(),
    };
    write_or_print(args.out.as_deref(), &serde_json::to_string_pretty(&out)?)
}

fn channel(args: ChannelArgs) -> Result<()> {
    let spec = match args.model.equation {
        Equation::Wave => ChannelSpec::wave(args.model.p, args.c, args.eps),
        Equation::Nls => {
            let [k1, k2, k3] = args.model.k3()?;
            ChannelSpec::nls([k1, k2, k3, k1 - k2 + k3 + args.model.n], args.c, args.eps)
        }
    };
    let orbit = integrate_channel(&spec)?;
    if let Some(path) = &args.out {
        orbit.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?))?;
    }
    let summary: ChannelSummary = orbit.summary();
    write_or_print(args.report.as_deref(), &serde_json::to_string_pretty(&summary)?)
}

fn simulate_config(args: &SimulateArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => {
            let equation = args.equation.unwrap_or(Equation::Wave);
            let s = args.s.unwrap_or(match equation {
                Equation::Wave => 3.0,
                Equation::Nls => 1.0,
            });
            match equation {
                Equation::Wave => ExperimentConfig::wave(args.p.unwrap_or(2), s),
                Equation::Nls => ExperimentConfig::nls(args.n.unwrap_or(8), s),
            }
        }
    };
    if let Some(e) = args.equation {
        cfg.equation = e.into();
    }
    macro_rules! set {
        ($($field:ident = $value:expr),*) => {$(if let Some(v) = $value { cfg.$field = v; })*};
    }
    set!(s = args.s, c = args.c, dt = args.dt, seed = args.seed);
    if args.p.is_some() {
        cfg.p = args.p;
    }
    if args.n.is_some() {
        cfg.n = args.n;
    }
    if args.mu.is_some() {
        cfg.mu = args.mu;
    }
    if args.eps.is_some() {
        cfg.epsilon = args.eps;
    }
    if args.jmax.is_some() {
        cfg.j_max = args.jmax;
    }
    if args.gamma_bound.is_some() {
        cfg.gamma_bound = args.gamma_bound;
    }
    if args.apply_gamma_correction {
        cfg.apply_gamma_correction = true;
    }
    if args.extend {
        cfg.t_policy = TimePolicy::Extended;
    }
    if cfg.mu.is_none() {
        cfg.mu = Some(10.0);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let cfg = simulate_config(&args)?;
    let run = match run_experiment(&cfg) {
        Ok(run) => run,
        Err(e) => {
            if let (Some(path), Some(monitors)) = (&args.out, partial_monitors(&e)) {
                let column = match cfg.equation {
                    EquationKind::Wave => ConservedColumn::Momentum,
                    EquationKind::Nls => ConservedColumn::Mass,
                };
                monitors.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?), column)?;
                eprintln!("partial monitors written to {}", path.display());
            }
            return Err(e);
        }
    };
    if let Some(path) = &args.out {
        write_monitor_csv(&run, path)?;
    }
    match &args.report {
        Some(path) => emit_report(&run.report, args.format.into(), path),
        None => {
            let text = match args.format {
                Format::Json => report_json(&run.report)?,
                Format::Text => report_text(&run.report),
            };
            stdout(&format!("{text}\n"))
        }
    }
}

fn partial_monitors(e: &Error) -> Option<&sobolev_growth::pde::MonitorSeries> {
    match e {
        Error::BlowUp { monitors, .. } => Some(monitors),
        Error::Stage { source, .. } => partial_monitors(source),
        _ => None,
    }
}

fn log10(ln: f64) -> String {
    let v = ln / std::f64::consts::LN_10;
    if v.abs() < 1e6 {
        format!("{v:.6}")
    } else {
        format!("{v:.9e}")
    }
}

fn constants_table(rows: &[ThresholdConstants]) -> String {
    let mut s = String::new();
    for k in rows {
        let opt = |v: Option<f64>| v.map(log10).unwrap_or_else(|| "undefined".into());
        s += &format!("p = {}, gamma = {}\n", k.p, k.gamma);
        s += &format!("  a              {}\n", k.a_exact);
        s += &format!(
            "  b              {}\n",
            k.b.map(|b| format!("{b:.6}")).unwrap_or_else(|| "undefined".into())
        );
        s += &format!("  log10 mu0      {}\n", opt(k.log_mu0));
        s += &format!("  log10 C0       {}\n", log10(k.log_c0));
        s += &format!("  C1             {}\n", k.c1_exact);
        s += &format!("  log10 C1~      {}\n", log10(k.log_c1_tilde));
        s += &format!("  log10 Xi       {}\n", log10(k.log_xi));
        s += &format!("  sigma1, sigma2 {}, {}\n", k.sigma1, k.sigma2);
        s += &format!("  log10 c+, c-   {}, {}\n", log10(k.log_c_plus), log10(k.log_c_minus));
        s += &format!("  log10 F_gamma  {}\n", opt(k.log_f_gamma));
        for c in &k.checks {
            s += &format!("  [{}] {} (margin {:.3e})\n", if c.holds { "ok" } else { "FAIL" }, c.name, c.margin);
        }
    }
    s
}

fn constants(args: ConstantsArgs) -> Result<()> {
    let rows = args
        .p
        .iter()
        .map(|&p| evaluate_constants(p, args.gamma, args.c_minus))
        .collect::<Result<Vec<_>>>()?;
    if args.json {
        stdout(&format!("{}\n", serde_json::to_string_pretty(&rows)?))?;
    } else {
        stdout(&constants_table(&rows))?;
    }
    Ok(())
}

fn run_sweep(args: SweepArgs) -> Result<()> {
    let list = SweepConfig::load(&args.config)?;
    std::fs::create_dir_all(&args.out_dir)?;
    let results = sweep(&list.run);
    let mut merged = Vec::with_capacity(results.len());
    let mut failures = 0;
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(run) => {
                emit_report(&run.report, ReportFormat::Json, &args.out_dir.join(format!("run_{i:03}.json")))?;
                write_monitor_csv(&run, &args.out_dir.join(format!("run_{i:03}.csv")))?;
                merged.push(serde_json::to_value(&run.report)?);
            }
            Err(e) => {
                failures += 1;
                eprintln!("run {i}: {e}");
                merged.push(serde_json::json!({ "error": e.to_string() }));
            }
        }
    }
    std::fs::write(args.out_dir.join("sweep.json"), serde_json::to_string_pretty(&merged)?)?;
    if failures > 0 {
        return Err(Error::Config(format!("{failures} of {} runs failed", merged.len())));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Channel(a) => channel(a),
        Command::Simulate(a) => simulate(a),
        Command::Constants(a) => constants(a),
        Command::Sweep(a) => run_sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
