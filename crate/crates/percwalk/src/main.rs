//! Command-line front end: configure runs, execute sweeps, and emit CSV/JSON
//! artifacts with full provenance metadata.
//!
//! Every data file is accompanied by (or embeds) the complete run
//! configuration including the master seed; re-running from that metadata
//! reproduces the numbers bit for bit.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use percwalk::estimation::{
    self, EstimationReport, EstimationRequest, EventInput, EventKind, EventSpec,
};
use percwalk::evolution::{self, PositionDistribution};
use percwalk::lattice::{LatticeSequence, Regime};
use percwalk::montecarlo::{self, EnsembleSpec};
use percwalk::observables::{self, Quantity};
use percwalk::oracle;
use percwalk::state::{Coin, CoinSpec, WalkerState};
use percwalk::twowalker::{self, CanonicalInput, InputKind, InputSpec, PlaneGrid, TwoWalkerInput};

const EXIT_CONFIG: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Parser)]
#[command(
    name = "percwalk",
    version,
    about = "Discrete-time quantum walks of one and two walkers on a 1D percolation lattice"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Averaged single-walker output distribution.
    Single(SingleArgs),
    /// Averaged two-walker joint distribution, optionally as a difference grid.
    Two(TwoArgs),
    /// Observable sweep over the percolation parameter.
    Sweep(SweepArgs),
    /// Percolation-parameter estimation pipeline with run-count bounds.
    Estimate(EstimateArgs),
    /// Run the built-in oracle and identity checks.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RegimeArg {
    Perfect,
    Static,
    Dynamic,
}

impl RegimeArg {
    fn regime(self) -> Regime {
        match self {
            RegimeArg::Perfect => Regime::Perfect,
            RegimeArg::Static => Regime::Statical,
            RegimeArg::Dynamic => Regime::Dynamical,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum QuantityArg {
    #[value(name = "D", alias = "d")]
    D,
    #[value(name = "M", alias = "m")]
    M,
    #[value(name = "C", alias = "c")]
    C,
    #[value(name = "V", alias = "v")]
    V,
}

impl QuantityArg {
    fn quantity(self) -> Quantity {
        match self {
            QuantityArg::D => Quantity::Distance,
            QuantityArg::M => Quantity::Meeting,
            QuantityArg::C => Quantity::Origin,
            QuantityArg::V => Quantity::Spread,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DiffArg {
    /// Input joint minus the classical joint of the same coin pair.
    Classical,
    /// Classical joint minus the product of its averaged marginals.
    Product,
}

#[derive(Args)]
struct CommonArgs {
    /// Number of walk steps.
    #[arg(long)]
    steps: usize,
    /// Percolation regime.
    #[arg(long, value_enum, default_value = "dynamic")]
    regime: RegimeArg,
    /// Realizations to average over.
    #[arg(long)]
    averages: usize,
    /// Master seed; all randomness derives from it reproducibly.
    #[arg(long, env = "PERCWALK_SEED", default_value_t = 0)]
    seed: u64,
    /// Output path for the data file.
    #[arg(long)]
    out: PathBuf,
    /// Output format: CSV with a JSON metadata sidecar, or one JSON file.
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Cap on parallel workers (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct SingleArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Percolation parameter.
    #[arg(long)]
    p: f64,
    /// Input coin: single:up|down|phi+|phi- or single:custom:re,im,re,im.
    #[arg(long, default_value = "single:phi+")]
    input: String,
}

#[derive(Args)]
struct TwoArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Percolation parameter.
    #[arg(long)]
    p: f64,
    /// Input pair: phi_plus|psi_minus|psi_s or custom:<kind>:8 floats.
    #[arg(long, default_value = "psi_s")]
    input: String,
    /// Emit a difference grid instead of the plain joint distribution.
    #[arg(long, value_enum)]
    diff: Option<DiffArg>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Grid as lo:hi:count.
    #[arg(long = "p-grid", default_value = "0:1:41")]
    p_grid: String,
    /// Quantity to sweep.
    #[arg(long, value_enum)]
    quantity: QuantityArg,
    /// Comma-separated input pairs.
    #[arg(long, default_value = "phi_plus,psi_minus,psi_s")]
    input: String,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Grid as lo:hi:count.
    #[arg(long = "p-grid", default_value = "0:1:41")]
    p_grid: String,
    /// Comma-separated strategies; pairs use the both-at-origin event,
    /// single:* coins the single-at-origin event.
    #[arg(long, default_value = "phi_plus,psi_minus,psi_s,single:phi+")]
    input: String,
    /// Target precision for the estimate of p.
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    /// Degree of the least squares fit.
    #[arg(long = "fit-degree", default_value_t = 5)]
    fit_degree: usize,
}

#[derive(Args)]
struct VerifyArgs {
    /// Cap on parallel workers (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
}

/// Prints a line to stdout, tolerating a closed pipe (e.g. piping into
/// `head`).
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let mut out = std::io::stdout();
        let _ = writeln!(out, $($arg)*);
    }};
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(error.exit_code)
        }
    }
}

struct CliError {
    exit_code: u8,
    message: String,
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

fn config_error(message: impl Into<String>) -> CliError {
    CliError {
        exit_code: EXIT_CONFIG,
        message: message.into(),
    }
}

fn runtime_error(message: impl Into<String>) -> CliError {
    CliError {
        exit_code: 1,
        message: message.into(),
    }
}

impl From<percwalk::Error> for CliError {
    fn from(e: percwalk::Error) -> CliError {
        config_error(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> CliError {
        runtime_error(format!("i/o failure: {e}"))
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Single(args) => {
            init_workers(args.common.workers)?;
            cmd_single(args)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Two(args) => {
            init_workers(args.common.workers)?;
            cmd_two(args)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep(args) => {
            init_workers(args.common.workers)?;
            cmd_sweep(args)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Estimate(args) => {
            init_workers(args.common.workers)?;
            cmd_estimate(args)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify(args) => {
            init_workers(args.workers)?;
            if cmd_verify() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(EXIT_VERIFY))
            }
        }
    }
}

fn init_workers(workers: Option<usize>) -> Result<(), CliError> {
    if let Some(count) = workers {
        if count == 0 {
            return Err(config_error("--workers must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(count)
            .build_global()
            .map_err(|e| runtime_error(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn validate_p(p: f64) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(config_error(format!("--p {p} outside [0, 1]")));
    }
    Ok(())
}

fn validate_averages(averages: usize, minimum: usize) -> Result<(), CliError> {
    if averages < minimum {
        return Err(config_error(format!(
            "--averages {averages} below the minimum of {minimum}"
        )));
    }
    Ok(())
}

/// Parses `lo:hi:count` into an evenly spaced grid.
fn parse_p_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(config_error(format!(
            "--p-grid '{text}' is not lo:hi:count"
        )));
    }
    let lo: f64 = parts[0]
        .parse()
        .map_err(|_| config_error(format!("bad grid bound '{}'", parts[0])))?;
    let hi: f64 = parts[1]
        .parse()
        .map_err(|_| config_error(format!("bad grid bound '{}'", parts[1])))?;
    let count: usize = parts[2]
        .parse()
        .map_err(|_| config_error(format!("bad grid count '{}'", parts[2])))?;
    if count == 0 {
        return Err(config_error("--p-grid count must be at least 1"));
    }
    if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || hi < lo {
        return Err(config_error(format!("--p-grid '{text}' outside [0, 1]")));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..count)
        .map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64)
        .collect())
}

fn parse_floats(text: &str, expected: usize) -> Result<Vec<f64>, CliError> {
    let values: Result<Vec<f64>, _> = text.split(',').map(|v| v.trim().parse()).collect();
    let values = values.map_err(|_| config_error(format!("bad number list '{text}'")))?;
    if values.len() != expected {
        return Err(config_error(format!(
            "expected {expected} comma-separated numbers, got {}",
            values.len()
        )));
    }
    Ok(values)
}

/// Accepts single:up|down|phi+|phi- and single:custom:re,im,re,im.
fn parse_single_input(text: &str) -> Result<CoinSpec, CliError> {
    let rest = text
        .strip_prefix("single:")
        .ok_or_else(|| config_error(format!("'{text}' is not a single-walker input")))?;
    match rest {
        "up" => Ok(CoinSpec::Up),
        "down" => Ok(CoinSpec::Down),
        "phi+" => Ok(CoinSpec::PhiPlus),
        "phi-" => Ok(CoinSpec::PhiMinus),
        other => {
            let components = other
                .strip_prefix("custom:")
                .ok_or_else(|| config_error(format!("unknown single-walker coin '{other}'")))?;
            let v = parse_floats(components, 4)?;
            let spec = CoinSpec::Custom {
                up: (v[0], v[1]),
                down: (v[2], v[3]),
            };
            spec.coin().validate_input()?;
            Ok(spec)
        }
    }
}

/// Accepts phi_plus|psi_minus|psi_s and
/// custom:boson|fermion|classical:re,im,re,im,re,im,re,im (first coin, then
/// second coin).
fn parse_pair_input(text: &str) -> Result<InputSpec, CliError> {
    match text {
        "phi_plus" => Ok(InputSpec::Canonical(CanonicalInput::PhiPlus)),
        "psi_minus" => Ok(InputSpec::Canonical(CanonicalInput::PsiMinus)),
        "psi_s" => Ok(InputSpec::Canonical(CanonicalInput::PsiS)),
        custom => {
            let rest = custom.strip_prefix("custom:").ok_or_else(|| {
                config_error(format!(
                    "unknown input '{custom}' (expected phi_plus, psi_minus, psi_s, or custom:...)"
                ))
            })?;
            let (kind_text, numbers) = rest
                .split_once(':')
                .ok_or_else(|| config_error("custom input needs custom:<kind>:<8 numbers>"))?;
            let kind = match kind_text {
                "boson" => InputKind::Boson,
                "fermion" => InputKind::Fermion,
                "classical" => InputKind::Classical,
                other => return Err(config_error(format!("unknown statistics '{other}'"))),
            };
            let v = parse_floats(numbers, 8)?;
            let spec = InputSpec::Custom {
                kind,
                coin1: (v[0], v[1], v[2], v[3]),
                coin2: (v[4], v[5], v[6], v[7]),
            };
            spec.build(1)?;
            Ok(spec)
        }
    }
}

/// 17 significant digits; round-trips f64 exactly.
fn fmt17(value: f64) -> String {
    format!("{value:.16e}")
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, contents)?;
    Ok(())
}

fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("meta.json")
}

fn sibling_path(out: &Path, label: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".to_string());
    let ext = out
        .extension()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "csv".to_string());
    out.with_file_name(format!("{stem}.{label}.{ext}"))
}

/// Writes data plus provenance. CSV format: data file and a .meta.json
/// sidecar. JSON format: one file with both.
fn emit(
    out: &Path,
    format: FormatArg,
    header: &str,
    rows: Vec<String>,
    metadata: serde_json::Value,
    data_json: serde_json::Value,
) -> Result<(), CliError> {
    match format {
        FormatArg::Csv => {
            let mut csv = String::with_capacity(rows.len() * 32 + header.len() + 1);
            csv.push_str(header);
            csv.push('\n');
            for row in rows {
                csv.push_str(&row);
                csv.push('\n');
            }
            write_file(out, &csv)?;
            let sidecar = sidecar_path(out);
            write_file(
                &sidecar,
                &serde_json::to_string_pretty(&metadata).expect("metadata serializes"),
            )?;
            say!("wrote {} and {}", out.display(), sidecar.display());
        }
        FormatArg::Json => {
            let document = json!({ "metadata": metadata, "data": data_json });
            write_file(
                out,
                &serde_json::to_string_pretty(&document).expect("document serializes"),
            )?;
            say!("wrote {}", out.display());
        }
    }
    Ok(())
}

fn base_metadata(command: &str, common: &CommonArgs, started: Instant) -> serde_json::Value {
    json!({
        "tool": "percwalk",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "steps": common.steps,
        "regime": common.regime.regime().to_string(),
        "averages": common.averages,
        "master_seed": common.seed,
        "wall_time_seconds": started.elapsed().as_secs_f64(),
    })
}

fn merge(mut base: serde_json::Value, extra: serde_json::Value) -> serde_json::Value {
    if let (Some(base_map), Some(extra_map)) = (base.as_object_mut(), extra.as_object()) {
        for (k, v) in extra_map {
            base_map.insert(k.clone(), v.clone());
        }
    }
    base
}

fn cmd_single(args: SingleArgs) -> Result<(), CliError> {
    let started = Instant::now();
    validate_p(args.p)?;
    validate_averages(args.common.averages, 1)?;
    if args.common.steps == 0 {
        return Err(config_error("--steps must be at least 1"));
    }
    let coin_spec = parse_single_input(&args.input)?;
    let mean = montecarlo::run_single_ensemble(
        &coin_spec.coin(),
        args.common.steps,
        args.common.regime.regime(),
        args.p,
        args.common.averages,
        args.common.seed,
    )?;

    let rows: Vec<String> = mean
        .positions()
        .map(|pos| format!("{pos},{}", fmt17(mean.prob(pos))))
        .collect();
    let metadata = merge(
        base_metadata("single", &args.common, started),
        json!({ "p": args.p, "input": coin_spec.label() }),
    );
    let data = json!({
        "positions": mean.positions().collect::<Vec<i32>>(),
        "probabilities": mean.probs(),
    });
    emit(
        &args.common.out,
        args.common.format,
        "position,probability",
        rows,
        metadata,
        data,
    )
}

fn grid_rows(grid: &PlaneGrid) -> Vec<String> {
    let mut rows = Vec::with_capacity(grid.side() * grid.side());
    for i in grid.positions() {
        for j in grid.positions() {
            rows.push(format!("{i},{j},{}", fmt17(grid.get(i, j))));
        }
    }
    rows
}

fn cmd_two(args: TwoArgs) -> Result<(), CliError> {
    let started = Instant::now();
    validate_p(args.p)?;
    validate_averages(args.common.averages, 1)?;
    let input = parse_pair_input(&args.input)?;

    let ensemble = |spec: InputSpec, retain: bool| -> Result<montecarlo::AveragedJoint, CliError> {
        Ok(montecarlo::run_ensemble(&EnsembleSpec {
            averages: args.common.averages,
            steps: args.common.steps,
            regime: args.common.regime.regime(),
            p: args.p,
            input: spec,
            master_seed: args.common.seed,
            retain_marginals: retain,
        })?)
    };

    let (grid, value_column, diff_label) = match args.diff {
        None => {
            let averaged = ensemble(input.clone(), false)?;
            (averaged.mean.grid().clone(), "probability", None)
        }
        Some(DiffArg::Classical) => {
            let averaged = ensemble(input.clone(), false)?;
            let classical = ensemble(classical_counterpart(&input), false)?;
            (
                averaged.mean.grid().difference(classical.mean.grid()),
                "difference",
                Some("input_minus_classical"),
            )
        }
        Some(DiffArg::Product) => {
            let classical = ensemble(classical_counterpart(&input), true)?;
            let marginals = classical.marginals.expect("retention requested");
            let (s1, s2): (Vec<PositionDistribution>, Vec<PositionDistribution>) =
                marginals.into_iter().unzip();
            let decomposition = twowalker::fluctuation_identity(&s1, &s2)?;
            (
                decomposition.fluctuation_term,
                "difference",
                Some("classical_minus_marginal_product"),
            )
        }
    };

    let rows = grid_rows(&grid);
    let metadata = merge(
        base_metadata("two", &args.common, started),
        json!({
            "p": args.p,
            "input": input.label(),
            "difference": diff_label,
        }),
    );
    let data = json!({
        "window_radius": grid.window_radius(),
        "values": grid.values(),
    });
    emit(
        &args.common.out,
        args.common.format,
        &format!("i,j,{value_column}"),
        rows,
        metadata,
        data,
    )
}

/// The classically-indistinguishable input with the same coin pair.
fn classical_counterpart(input: &InputSpec) -> InputSpec {
    match input {
        InputSpec::Canonical(_) => InputSpec::Canonical(CanonicalInput::PsiS),
        InputSpec::Custom { coin1, coin2, .. } => InputSpec::Custom {
            kind: InputKind::Classical,
            coin1: *coin1,
            coin2: *coin2,
        },
    }
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let started = Instant::now();
    validate_averages(args.common.averages, 2)?;
    let p_grid = parse_p_grid(&args.p_grid)?;
    let inputs: Vec<InputSpec> = args
        .input
        .split(',')
        .map(|text| parse_pair_input(text.trim()))
        .collect::<Result<_, _>>()?;
    if inputs.is_empty() {
        return Err(config_error("--input must name at least one pair"));
    }
    let quantity = args.quantity.quantity();

    let mut curves = Vec::with_capacity(inputs.len());
    for input in &inputs {
        curves.push(observables::sweep(
            quantity,
            input,
            args.common.regime.regime(),
            &p_grid,
            args.common.steps,
            args.common.averages,
            args.common.seed,
        )?);
    }

    let metadata = merge(
        base_metadata("sweep", &args.common, started),
        json!({
            "quantity": quantity.label(),
            "p_grid": { "lo": p_grid.first(), "hi": p_grid.last(), "count": p_grid.len() },
            "inputs": inputs.iter().map(|i| i.label()).collect::<Vec<_>>(),
        }),
    );

    match args.common.format {
        FormatArg::Csv => {
            for curve in &curves {
                let path = if curves.len() == 1 {
                    args.common.out.clone()
                } else {
                    sibling_path(&args.common.out, &curve.input)
                };
                let rows: Vec<String> = curve
                    .p_grid
                    .iter()
                    .zip(curve.means.iter().zip(&curve.stderrs))
                    .map(|(p, (m, s))| format!("{},{},{}", fmt17(*p), fmt17(*m), fmt17(*s)))
                    .collect();
                emit(
                    &path,
                    FormatArg::Csv,
                    "p,mean,stderr",
                    rows,
                    merge(metadata.clone(), json!({ "input": curve.input })),
                    serde_json::Value::Null,
                )?;
            }
        }
        FormatArg::Json => {
            emit(
                &args.common.out,
                FormatArg::Json,
                "",
                Vec::new(),
                metadata,
                serde_json::to_value(&curves).expect("curves serialize"),
            )?;
        }
    }
    Ok(())
}

fn cmd_estimate(args: EstimateArgs) -> Result<(), CliError> {
    let started = Instant::now();
    validate_averages(args.common.averages, 2)?;
    if args.epsilon <= 0.0 {
        return Err(config_error("--epsilon must be positive"));
    }
    let p_grid = parse_p_grid(&args.p_grid)?;
    let regime = args.common.regime.regime();
    let mut events = Vec::new();
    for text in args.input.split(',') {
        let text = text.trim();
        let event = if text.starts_with("single:") {
            EventSpec {
                kind: EventKind::SingleAtOrigin,
                input: EventInput::Single(parse_single_input(text)?),
                steps: args.common.steps,
                regime,
            }
        } else {
            EventSpec {
                kind: EventKind::BothAtOrigin,
                input: EventInput::Pair(parse_pair_input(text)?),
                steps: args.common.steps,
                regime,
            }
        };
        for warning in event.validate()? {
            eprintln!("warning: {warning}");
        }
        events.push(event);
    }

    let report = estimation::run_estimation(&EstimationRequest {
        p_grid,
        averages: args.common.averages,
        master_seed: args.common.seed,
        epsilon: args.epsilon,
        fit_degree: args.fit_degree,
        events,
    })?;

    print_windows(&report);

    let metadata = merge(
        base_metadata("estimate", &args.common, started),
        json!({
            "epsilon": args.epsilon,
            "fit_degree": args.fit_degree,
            "p_grid": { "lo": report.p_grid.first(), "hi": report.p_grid.last(), "count": report.p_grid.len() },
            "strategies": report.strategies.iter().map(|s| s.label.clone()).collect::<Vec<_>>(),
        }),
    );

    match args.common.format {
        FormatArg::Json => {
            emit(
                &args.common.out,
                FormatArg::Json,
                "",
                Vec::new(),
                metadata,
                serde_json::to_value(&report).expect("report serializes"),
            )?;
        }
        FormatArg::Csv => {
            // Per-strategy curve CSVs plus the full JSON report alongside.
            for strategy in &report.strategies {
                let path = sibling_path(&args.common.out, &strategy.label);
                let rows: Vec<String> = report
                    .p_grid
                    .iter()
                    .enumerate()
                    .map(|(idx, p)| {
                        let bound = &strategy.n_min[idx];
                        format!(
                            "{},{},{},{},{},{},{}",
                            fmt17(*p),
                            fmt17(strategy.curve.means[idx]),
                            fmt17(strategy.curve.stderrs[idx]),
                            fmt17(strategy.fit.eval(*p)),
                            fmt17(strategy.derivative[idx]),
                            fmt17(bound.value),
                            bound.reliable,
                        )
                    })
                    .collect();
                emit(
                    &path,
                    FormatArg::Csv,
                    "p,pe_mean,pe_stderr,pe_fit,dpe_dp,n_min,reliable",
                    rows,
                    merge(metadata.clone(), json!({ "strategy": strategy.label })),
                    serde_json::Value::Null,
                )?;
            }
            let report_path = args.common.out.with_extension("report.json");
            write_file(
                &report_path,
                &serde_json::to_string_pretty(&json!({
                    "metadata": metadata,
                    "report": report,
                }))
                .expect("report serializes"),
            )?;
            say!("wrote {}", report_path.display());
        }
    }
    Ok(())
}

fn print_windows(report: &EstimationReport) {
    say!("optimality windows (strategy with the smallest run-count bound):");
    for window in &report.windows {
        say!(
            "  {:<14} p in [{:.3}, {:.3}]",
            window.label,
            window.p_lo,
            window.p_hi
        );
    }
}

struct VerifyOutcome {
    passed: bool,
}

fn check(name: &str, passed: bool, detail: String, all: &mut VerifyOutcome) {
    if passed {
        say!("[ PASS ] {name}: {detail}");
    } else {
        say!("[ FAIL ] {name}: {detail}");
        all.passed = false;
    }
}

/// Built-in verification suite: oracle comparisons and exact identities.
fn cmd_verify() -> bool {
    let mut outcome = VerifyOutcome { passed: true };

    // Unitarity across regimes and percolation parameters.
    {
        let mut worst: f64 = 0.0;
        for (index, &p) in [0.0, 0.25, 0.5, 0.75, 1.0].iter().enumerate() {
            for (r_index, regime) in [Regime::Statical, Regime::Dynamical].iter().enumerate() {
                for a in 0..20 {
                    let steps = 5 + (a % 27);
                    let seq = LatticeSequence::sample(
                        *regime,
                        p,
                        steps,
                        1000 + index as u64,
                        (r_index * 100 + a) as u64,
                    )
                    .expect("valid parameters");
                    let state =
                        WalkerState::localized(0, &Coin::PHI_PLUS, steps).expect("origin fits");
                    let out = evolution::evolve(&state, &seq).expect("window sized");
                    worst = worst.max((out.norm_sq() - 1.0).abs());
                }
            }
        }
        check(
            "unitarity",
            worst <= 1e-12,
            format!("max |norm-1| = {worst:.3e} over 200 random sequences"),
            &mut outcome,
        );
    }

    // Dense-matrix oracle, single walker.
    {
        let mut worst: f64 = 0.0;
        for a in 0..60 {
            let steps = 2 + (a as usize % 7);
            let seq = LatticeSequence::sample(Regime::Dynamical, 0.6, steps, 2000, a)
                .expect("valid parameters");
            let state = WalkerState::localized(0, &Coin::PHI_PLUS, steps).expect("origin fits");
            let fast = evolution::evolve(&state, &seq).expect("window sized");
            let slow = oracle::dense_evolve(&state, &seq);
            worst = worst.max(oracle::max_amplitude_diff(&fast, &slow));
        }
        check(
            "dense-oracle",
            worst <= 1e-12,
            format!("max amplitude deviation = {worst:.3e} over 60 sequences"),
            &mut outcome,
        );
    }

    // Full-tensor oracle, two walkers, all input kinds.
    {
        let mut worst: f64 = 0.0;
        for name in [
            CanonicalInput::PhiPlus,
            CanonicalInput::PsiMinus,
            CanonicalInput::PsiS,
        ] {
            for a in 0..10 {
                let seq = LatticeSequence::sample(Regime::Dynamical, 0.7, 6, 3000, a)
                    .expect("valid parameters");
                let input = TwoWalkerInput::canonical(name, 6);
                let fast = twowalker::joint_distribution(&input, &seq).expect("windows match");
                let slow = oracle::tensor_joint_distribution(&input, &seq).expect("windows match");
                worst = worst.max(fast.grid().max_abs_diff(slow.grid()));
            }
        }
        check(
            "tensor-oracle",
            worst <= 1e-12,
            format!("max joint deviation = {worst:.3e} over 30 runs"),
            &mut outcome,
        );
    }

    // Spread identities.
    {
        let mut worst: f64 = 0.0;
        for a in 0..50 {
            let seq = LatticeSequence::sample(Regime::Statical, 0.5, 9, 4000, a)
                .expect("valid parameters");
            for name in [
                CanonicalInput::PhiPlus,
                CanonicalInput::PsiMinus,
                CanonicalInput::PsiS,
            ] {
                let input = TwoWalkerInput::canonical(name, 9);
                let report = observables::marginal_spread_identity_check(&input, &seq)
                    .expect("origin-localized input");
                worst = worst.max(report.abs_error);
            }
        }
        check(
            "spread-identity",
            worst <= 1e-10,
            format!("max |V2 - eigen mix| = {worst:.3e} over 150 checks"),
            &mut outcome,
        );
    }

    // Fluctuation identity on a dynamical ensemble.
    {
        let input = TwoWalkerInput::canonical(CanonicalInput::PsiS, 10);
        let mut s1 = Vec::new();
        let mut s2 = Vec::new();
        for a in 0..200 {
            let seq = LatticeSequence::sample(Regime::Dynamical, 0.75, 10, 5000, a)
                .expect("valid parameters");
            let (ea, eb) = input.evolve_factors(&seq).expect("window sized");
            s1.push(evolution::position_distribution(&ea));
            s2.push(evolution::position_distribution(&eb));
        }
        let decomposition = twowalker::fluctuation_identity(&s1, &s2).expect("enough realizations");
        let error = decomposition.reconstruction_error();
        check(
            "fluctuation-identity",
            error <= 1e-12,
            format!("reconstruction error = {error:.3e} over 200 realizations"),
            &mut outcome,
        );
    }

    // Corrupted-bond regression fixture: flipping one mid-walk bond must
    // change the output, otherwise the oracle comparisons above have no
    // teeth.
    {
        let seq =
            LatticeSequence::sample(Regime::Statical, 0.8, 9, 6000, 1).expect("valid parameters");
        let mut bonds = seq.config_at(0).bonds().to_vec();
        bonds[9] = !bonds[9];
        let corrupted = LatticeSequence::from_configs(
            Regime::Statical,
            0.8,
            9,
            vec![percwalk::lattice::BondConfig::from_bonds(9, bonds).expect("length matches")],
        )
        .expect("one config");
        let state = WalkerState::localized(0, &Coin::PHI_PLUS, 9).expect("origin fits");
        let reference = evolution::evolve(&state, &seq).expect("window sized");
        let altered = evolution::evolve(&state, &corrupted).expect("window sized");
        let difference = oracle::max_amplitude_diff(&reference, &altered);
        check(
            "corruption-detection",
            difference > 1e-6,
            format!("single flipped bond moves amplitudes by {difference:.3e}"),
            &mut outcome,
        );
    }

    if outcome.passed {
        say!("verification passed");
    } else {
        say!("verification FAILED");
    }
    outcome.passed
}
