use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};
use toepquant::experiment::{run_experiment, ExperimentConfig};
use toepquant::output::{print_record, write_experiment};
use toepquant::sim::{
    estimate_batch, ruler_for, run_trial, Generator, PostProcess, TrialSpec, Truth,
};
use toepquant::{CliError, Result};
use toepquant_core::bounds::{BoundsInput, BoundsReport};
use toepquant_core::rng::seeded;
use toepquant_core::ruler::phi_bound;
use toepquant_core::sampling::{observe, SampleMatrix};
use toepquant_core::{
    op_norm, relative_error, toep, CorrectionKind, Dither, EstimateResult, NormKind,
    QuantizerConfig, SymToeplitz,
};

#[derive(Parser)]
#[command(
    name = "toepquant",
    version,
    about = "Quantized Toeplitz covariance estimation from ruler observations"
)]
struct Cli {
    /// Master seed.
    #[arg(long, global = true, env = "TOEPQUANT_SEED", default_value_t = 1)]
    seed: u64,
    /// Output directory for experiment files.
    #[arg(long, global = true, default_value = "results")]
    out: PathBuf,
    /// Trials per grid point.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Record per-trial wall time in the `seconds` column.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Draw a covariance and print its generating vector.
    Gen(GenArgs),
    /// Print a ruler with its coverage coefficient.
    Ruler {
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
    },
    /// Estimate a covariance from a sample file or a simulated trial.
    Estimate(EstimateArgs),
    /// Evaluate the theoretical constants and sample-complexity predictions.
    Bounds(BoundsArgs),
    /// Run one of the five experiments.
    Exp(ExpArgs),
}

#[derive(Args)]
#[command(group(ArgGroup::new("model").required(true).args(["k", "m"])))]
struct GenArgs {
    #[arg(long)]
    d: usize,
    /// Number of random frequencies (rank `min(d, 2k)`).
    #[arg(long)]
    k: Option<usize>,
    /// Bandwidth of a banded covariance.
    #[arg(long)]
    m: Option<usize>,
}

impl GenArgs {
    fn generator(&self) -> Generator {
        match (self.k, self.m) {
            (Some(freqs), _) => Generator::Vandermonde { freqs },
            (None, Some(m)) => Generator::Banded { m },
            (None, None) => unreachable!("clap requires one of --k, --m"),
        }
    }
}

#[derive(Args)]
#[command(group(ArgGroup::new("source").required(true).args(["input", "simulate"])))]
struct EstimateArgs {
    /// CSV of raw samples, one full `d`-vector per row.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Simulate one trial instead of reading samples.
    #[arg(long)]
    simulate: bool,
    /// Ruler exponent in [0.5, 1]; `full` or 1 selects the full ruler.
    #[arg(long, default_value = "0.5", value_parser = parse_ruler)]
    ruler: f64,
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    #[arg(long, default_value = "triangular", value_parser = parse_core::<Dither>)]
    dither: Dither,
    /// quarter, sixth or none; defaults to match the dither.
    #[arg(long, value_parser = parse_core::<CorrectionKind>)]
    correction: Option<CorrectionKind>,
    /// Hard threshold `ζ` applied to every offset.
    #[arg(long, conflicts_with_all = ["bandwidth", "threshold_c"])]
    threshold: Option<f64>,
    /// Threshold at `ζ = C K √((ln|R| + 4p ln d)/n)` using the true norm.
    #[arg(long, requires = "simulate", conflicts_with = "bandwidth")]
    threshold_c: Option<f64>,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Keep offsets `s < bandwidth`.
    #[arg(long)]
    bandwidth: Option<usize>,
    /// Generating vector of the true covariance (output of `gen`), for error metrics.
    #[arg(long, conflicts_with = "simulate")]
    truth: Option<PathBuf>,
    #[arg(long, default_value_t = 16)]
    d: usize,
    /// Vandermonde frequency count for `--simulate` (default `d`).
    #[arg(long, conflicts_with = "m")]
    k: Option<usize>,
    /// Banded covariance of this bandwidth for `--simulate`.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Covariance seed for `--simulate` (default: the master seed).
    #[arg(long)]
    truth_seed: Option<u64>,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, value_delimiter = ',', default_value = "16")]
    d: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    alpha: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    delta: Vec<f64>,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long, default_value_t = 0.1)]
    prob_delta: f64,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    m: usize,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Operator norm of the true covariance.
    #[arg(long, default_value_t = 1.0)]
    norm: f64,
}

#[derive(Args)]
struct ExpArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5))]
    id: u8,
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    n_grid: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    deltas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    alphas: Option<Vec<f64>>,
    /// Vandermonde frequency count (default `d`; 2 for experiment 1).
    #[arg(long)]
    freqs: Option<usize>,
    /// Accuracy target for experiment 4.
    #[arg(long)]
    eps: Option<f64>,
    /// Fixed threshold constant for experiment 5 (calibrated otherwise).
    #[arg(long)]
    threshold_c: Option<f64>,
    #[arg(long)]
    calibration_trials: Option<usize>,
}

fn parse_core<T: std::str::FromStr<Err = toepquant_core::Error>>(
    s: &str,
) -> std::result::Result<T, String> {
    s.parse().map_err(|e: toepquant_core::Error| e.to_string())
}

fn parse_ruler(s: &str) -> std::result::Result<f64, String> {
    if s == "full" {
        return Ok(1.0);
    }
    let a: f64 = s
        .parse()
        .map_err(|_| format!("ruler must be `full` or a number, got {s:?}"))?;
    if (0.5..=1.0).contains(&a) {
        Ok(a)
    } else {
        Err(format!("ruler exponent must lie in [0.5, 1], got {a}"))
    }
}

fn default_correction(dither: Dither) -> CorrectionKind {
    match dither {
        Dither::Triangular => CorrectionKind::TriangularQuarter,
        Dither::Uniform => CorrectionKind::UniformSixth,
        Dither::None => CorrectionKind::NoCorrection,
    }
}

fn stdout() -> io::StdoutLock<'static> {
    io::stdout().lock()
}

fn cmd_gen(seed: u64, args: &GenArgs) -> Result<()> {
    let truth = Truth::draw(args.d, args.generator(), seed)?;
    write_generator(stdout(), &["s", "a"], &[truth.toeplitz.generator()])
}

fn write_generator<W: Write>(out: W, header: &[&str], cols: &[&[f64]]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for s in 0..cols[0].len() {
        let mut rec = vec![s.to_string()];
        rec.extend(cols.iter().map(|c| c[s].to_string()));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| CliError::io("<stdout>", e))
}

fn cmd_ruler(d: usize, alpha: f64) -> Result<()> {
    let ruler = ruler_for(d, alpha)?;
    let indices: Vec<String> = ruler.one_based().iter().map(|i| i.to_string()).collect();
    print_record(
        stdout(),
        &["d", "alpha", "indices", "size", "phi", "phi_bound"],
        &[
            d.to_string(),
            alpha.to_string(),
            indices.join(" "),
            ruler.len().to_string(),
            ruler.coverage_coefficient().to_string(),
            phi_bound(d, alpha).to_string(),
        ],
    )
}

/// Parses a numeric CSV, skipping one non-numeric header row.
fn read_numeric_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)?;
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parsed: std::result::Result<Vec<f64>, _> =
            rec.iter().map(|f| f.trim().parse::<f64>()).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if i == 0 => continue,
            Err(_) => {
                return Err(CliError::Config(format!(
                    "{}: non-numeric row {}",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    if rows.is_empty() {
        return Err(CliError::EmptyInput(path.to_path_buf()));
    }
    Ok(rows)
}

fn read_truth(path: &Path) -> Result<SymToeplitz> {
    let rows = read_numeric_csv(path)?;
    let a = rows
        .iter()
        .map(|r| {
            r.last()
                .copied()
                .ok_or_else(|| CliError::Config(format!("{}: empty row", path.display())))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(toep(a)?)
}

fn post_process(args: &EstimateArgs) -> PostProcess {
    match (args.threshold, args.threshold_c, args.bandwidth) {
        (Some(z), _, _) => PostProcess::Threshold(z),
        (_, Some(c), _) => PostProcess::CalibratedThreshold { c, p: args.p },
        (_, _, Some(m)) => PostProcess::Band(m),
        _ => PostProcess::None,
    }
}

fn print_estimate(
    est: &EstimateResult,
    truth: Option<&SymToeplitz>,
    zeta: Option<f64>,
    extra: &[(&str, String)],
) -> Result<()> {
    let mut out = stdout();
    match truth {
        Some(t) => write_generator(
            &mut out,
            &["s", "a_hat", "a"],
            &[est.a_hat(), t.generator()],
        )?,
        None => write_generator(&mut out, &["s", "a_hat"], &[est.a_hat()])?,
    }
    writeln!(out).map_err(|e| CliError::io("<stdout>", e))?;
    let mut header = vec!["n", "ruler_size", "delta", "correction", "zeta"];
    let mut row = vec![
        est.n().to_string(),
        est.ruler().len().to_string(),
        est.delta().to_string(),
        est.correction().to_string(),
        zeta.map_or(String::new(), |z| z.to_string()),
    ];
    if let Some(t) = truth {
        header.extend(["rel_error", "rel_error_fro", "rel_error_max"]);
        for kind in [NormKind::Operator, NormKind::Frobenius, NormKind::Max] {
            row.push(relative_error(t, est, kind)?.to_string());
        }
    }
    for (k, v) in extra {
        header.push(k);
        row.push(v.clone());
    }
    print_record(out, &header, &row)
}

fn cmd_estimate(seed: u64, args: &EstimateArgs) -> Result<()> {
    let correction = args
        .correction
        .unwrap_or_else(|| default_correction(args.dither));
    let dither = if args.delta == 0.0 {
        Dither::None
    } else {
        args.dither
    };
    let post = post_process(args);
    if args.simulate {
        let generator = match args.m {
            Some(m) => Generator::Banded { m },
            None => Generator::Vandermonde {
                freqs: args.k.unwrap_or(args.d),
            },
        };
        let spec = TrialSpec {
            d: args.d,
            generator,
            alpha: args.ruler,
            delta: args.delta,
            dither,
            correction,
            n: args.n,
            post,
        };
        let truth_seed = args.truth_seed.unwrap_or(seed);
        let truth = Truth::draw(args.d, generator, truth_seed)?;
        let out = run_trial(&truth, &spec, seed)?;
        let extra = [
            ("seed", seed.to_string()),
            ("truth_seed", truth_seed.to_string()),
        ];
        return print_estimate(&out.estimate, Some(&truth.toeplitz), out.zeta, &extra);
    }
    let path = args
        .input
        .as_deref()
        .expect("clap requires --input or --simulate");
    let samples = SampleMatrix::from_rows(&read_numeric_csv(path)?)?;
    let d = samples.width();
    let ruler = ruler_for(d, args.ruler)?;
    let q = QuantizerConfig::new(args.delta, dither)?;
    let batch = observe(&samples, &ruler, q, &mut seeded(seed))?;
    let truth = args.truth.as_deref().map(read_truth).transpose()?;
    if let Some(t) = &truth {
        if t.generator().len() != d {
            return Err(CliError::Config(format!(
                "truth has dimension {}, samples have {d}",
                t.generator().len()
            )));
        }
    }
    let norm = truth.as_ref().map(op_norm).transpose()?;
    let (est, zeta) = estimate_batch(&batch, correction, post, norm)?;
    print_estimate(&est, truth.as_ref(), zeta, &[("seed", seed.to_string())])
}

fn cmd_bounds(args: &BoundsArgs) -> Result<()> {
    let header = [
        "d",
        "alpha",
        "delta",
        "eps",
        "prob_delta",
        "k",
        "m",
        "p",
        "c",
        "n",
        "norm",
        "ruler_size",
        "phi",
        "K",
        "kappa",
        "L",
        "L_prime",
        "lambda",
        "zeta",
        "script_K",
        "vsc_pred",
        "vsc_pred_low_rank",
        "up_to_constant",
    ];
    let mut w = csv::Writer::from_writer(stdout());
    w.write_record(header)?;
    for &d in &args.d {
        for &alpha in &args.alpha {
            for &delta in &args.delta {
                let r = BoundsReport::evaluate(BoundsInput {
                    d,
                    alpha,
                    delta,
                    eps: args.eps,
                    delta_prob: args.prob_delta,
                    k: args.k,
                    m: args.m,
                    p: args.p,
                    c: args.c,
                    n: args.n,
                    op_norm_t: args.norm,
                })?;
                let i = r.input;
                w.write_record([
                    i.d.to_string(),
                    i.alpha.to_string(),
                    i.delta.to_string(),
                    i.eps.to_string(),
                    i.delta_prob.to_string(),
                    i.k.to_string(),
                    i.m.to_string(),
                    i.p.to_string(),
                    i.c.to_string(),
                    i.n.to_string(),
                    i.op_norm_t.to_string(),
                    r.ruler_size.to_string(),
                    r.phi.to_string(),
                    r.big_k.to_string(),
                    r.kappa.to_string(),
                    r.script_l.to_string(),
                    r.script_l_prime.to_string(),
                    r.lambda.to_string(),
                    r.zeta.to_string(),
                    r.script_k.to_string(),
                    r.vsc_pred.to_string(),
                    r.vsc_pred_low_rank.to_string(),
                    r.up_to_constant.to_string(),
                ])?;
            }
        }
    }
    w.flush().map_err(|e| CliError::io("<stdout>", e))
}

fn cmd_exp(cli: &Cli, args: &ExpArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::defaults(args.id, cli.seed)?;
    cfg.timing = cli.timing;
    if let Some(t) = cli.trials {
        cfg.trials = t;
    }
    if let Some(v) = &args.dims {
        cfg.dims = v.clone();
    }
    if let Some(v) = &args.n_grid {
        cfg.n_grid = v.clone();
    }
    if let Some(v) = &args.deltas {
        cfg.deltas = v.clone();
    }
    if let Some(v) = &args.alphas {
        cfg.alphas = v.clone();
    }
    if args.freqs.is_some() {
        cfg.freqs = args.freqs;
        cfg.low_rank_freqs = args.freqs.unwrap_or(cfg.low_rank_freqs);
    }
    if let Some(e) = args.eps {
        cfg.eps = e;
    }
    if args.threshold_c.is_some() {
        cfg.threshold_c = args.threshold_c;
    }
    if let Some(t) = args.calibration_trials {
        cfg.calibration_trials = t;
    }
    let out = run_experiment(&cfg)?;
    let mut so = stdout();
    for p in write_experiment(&cli.out, cfg.id, &out)? {
        writeln!(so, "{}", p.display()).map_err(|e| CliError::io("<stdout>", e))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    match &cli.cmd {
        Cmd::Gen(a) => cmd_gen(cli.seed, a),
        Cmd::Ruler { d, alpha } => cmd_ruler(*d, *alpha),
        Cmd::Estimate(a) => cmd_estimate(cli.seed, a),
        Cmd::Bounds(a) => cmd_bounds(a),
        Cmd::Exp(a) => cmd_exp(cli, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
