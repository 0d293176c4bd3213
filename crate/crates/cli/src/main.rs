//! `ustat`: ensemble estimates, variance components, intervals, bounds and experiments.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use ustat_core::design::DEFAULT_ENUMERATION_CAP;
use ustat_core::ensemble::EnsembleOptions;
use ustat_core::inference::{
    be_bound_complete, be_bound_convolution, be_bound_incomplete_linear, be_bound_subgaussian, build_ci,
};
use ustat_core::simlab::{self, emit_report, ExperimentConfig, ExperimentReport};
use ustat_core::variance::{
    discrete_law, estimate_components, h_decomposition_exact, u_variance_from_components, variance_ratio, McPlan,
};
use ustat_core::{
    draw_incomplete_design, generalized_incomplete_u, BeInputs, Dataset, EnsembleConfig, Error, GeneratorSpec,
    KernelSpec, Scheme,
};

#[derive(Parser)]
#[command(name = "ustat", version, about = "Subsampled ensembles as generalized U-statistics")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Master seed (overrides the seed in experiment configs).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file; stdout when absent. Experiments also write a `.meta.json` sidecar.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Ensemble estimate on a CSV dataset.
    Predict(PredictArgs),
    /// Monte-Carlo variance components and the variance ratio.
    Zeta(ZetaArgs),
    /// The kNN ratio limit c(k) for k = 1..k_max.
    Ck(CkArgs),
    /// Normal-limit confidence interval.
    Ci(CiArgs),
    /// Berry-Esseen bound with per-term breakdown.
    Bound(BoundArgs),
    /// CLT experiment from a JSON config.
    Clt(ExperimentArgs),
    /// Interval coverage experiment from a JSON config.
    Coverage(ExperimentArgs),
    /// Variance-ratio experiment from a JSON config.
    Ratio(ExperimentArgs),
    /// Exact H-decomposition for a finite distribution.
    Hdecomp(HdecompArgs),
}

#[derive(Args)]
struct PredictArgs {
    /// CSV with header x1..xp,y.
    #[arg(long)]
    data: PathBuf,
    /// Kernel as JSON, or @path to a JSON file.
    #[arg(long)]
    kernel: String,
    #[arg(long)]
    s: usize,
    #[arg(long = "N", default_value_t = 1)]
    n_sub: u64,
    #[arg(long, default_value = "bernoulli")]
    scheme: Scheme,
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    enumeration_cap: u128,
    /// Write the drawn design as JSON lines {ordinal, indices, omega_seed}.
    #[arg(long)]
    dump_design: Option<PathBuf>,
}

#[derive(Args)]
struct ZetaArgs {
    #[arg(long)]
    kernel: String,
    /// Generator as JSON, or @path.
    #[arg(long)]
    generator: String,
    #[arg(long)]
    s: usize,
    #[arg(long, default_value_t = McPlan::default().m_outer)]
    m_outer: usize,
    #[arg(long, default_value_t = McPlan::default().m_inner)]
    m_inner: usize,
    #[arg(long, default_value_t = McPlan::default().m_s)]
    m_s: usize,
}

#[derive(Args)]
struct CkArgs {
    #[arg(long, default_value_t = 50)]
    k_max: usize,
    #[arg(long, default_value_t = 2000)]
    s_approx: usize,
}

#[derive(Args)]
struct CiArgs {
    #[arg(long, allow_hyphen_values = true)]
    theta: f64,
    #[arg(long)]
    zeta1: f64,
    #[arg(long)]
    zetas: f64,
    #[arg(long)]
    n: u64,
    #[arg(long)]
    s: u64,
    #[arg(long = "N")]
    n_sub: u64,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundForm {
    Complete,
    Incomplete,
    Convolution,
    Subgaussian,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long, value_enum)]
    form: BoundForm,
    /// JSON file with the moment inputs.
    #[arg(long)]
    inputs: PathBuf,
    /// Universal constant for the convolution and sub-Gaussian forms.
    #[arg(long = "C", default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 0.4)]
    eta: f64,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment config (JSON file).
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args)]
struct HdecompArgs {
    #[arg(long)]
    kernel: String,
    /// A two_point or discrete generator.
    #[arg(long)]
    generator: String,
    #[arg(long)]
    s: usize,
    /// Also report Var(U_{n,s}) from the components.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    cap: u128,
}

fn parse_json<T: serde::de::DeserializeOwned>(arg: &str) -> anyhow::Result<T> {
    let text = match arg.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).map_err(Error::from).with_context(|| format!("reading {path}"))?,
        None => arg.to_string(),
    };
    Ok(serde_json::from_str(&text).map_err(Error::from)?)
}

fn read_json_file<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path).map_err(Error::from).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).map_err(Error::from).with_context(|| format!("parsing {}", path.display()))
}

fn write_json<T: Serialize>(out: Option<&Path>, value: &T) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    match out {
        Some(path) => std::fs::write(path, text + "\n").map_err(Error::from)?,
        None => println!("{text}"),
    }
    Ok(())
}

fn write_report(out: Option<&Path>, report: &ExperimentReport) -> anyhow::Result<()> {
    match out {
        Some(path) => emit_report(report, path)?,
        None => {
            let stdout = io::stdout();
            let mut lock = BufWriter::new(stdout.lock());
            report.write_csv(&mut lock)?;
            lock.flush().map_err(Error::from)?;
        }
    }
    Ok(())
}

fn predict(g: &Global, a: &PredictArgs) -> anyhow::Result<()> {
    let started = Instant::now();
    let data = Dataset::from_csv_path(&a.data)?;
    let kernel: KernelSpec = parse_json(&a.kernel)?;
    let seed = g.seed.unwrap_or(0);
    let config = EnsembleConfig { enumeration_cap: a.enumeration_cap, ..EnsembleConfig::new(a.s, a.n_sub, a.scheme, seed) };
    let result = generalized_incomplete_u(&data, &kernel, &config, EnsembleOptions::default())?;
    if let Some(path) = &a.dump_design {
        let design = draw_incomplete_design(data.n(), a.s, a.n_sub, a.scheme, seed, a.enumeration_cap)?;
        let file = BufWriter::new(File::create(path).map_err(Error::from)?);
        design.dump_jsonl(seed, file)?;
    }
    write_json(
        g.out.as_deref(),
        &json!({
            "theta_hat": result.theta_hat,
            "realized_N": result.realized_n,
            "target_N": result.target_n,
            "s": result.s,
            "scheme": result.scheme,
            "seed": seed,
            "flagged": result.flagged,
            "timing": { "wall_secs": started.elapsed().as_secs_f64() },
        }),
    )
}

fn zeta(g: &Global, a: &ZetaArgs) -> anyhow::Result<()> {
    let kernel: KernelSpec = parse_json(&a.kernel)?;
    let generator: GeneratorSpec = parse_json(&a.generator)?;
    let plan = McPlan { m_outer: a.m_outer, m_inner: a.m_inner, m_s: a.m_s };
    let vc = estimate_components(&kernel, &generator, a.s, plan, g.seed.unwrap_or(0))?;
    let ratio = match variance_ratio(&vc, a.s) {
        Ok(r) => json!(r),
        Err(Error::DegenerateProjection { .. }) => serde_json::Value::Null,
        Err(e) => return Err(e.into()),
    };
    write_json(
        g.out.as_deref(),
        &json!({
            "s": a.s,
            "zeta1_omega": vc.zeta1_omega,
            "zeta_s_omega": vc.zeta_s_omega,
            "zeta_s": vc.zeta_s,
            "variance_ratio": ratio,
            "chain_holds_3se": vc.chain_holds(3.0),
            "mc": plan,
        }),
    )
}

fn bound(g: &Global, a: &BoundArgs) -> anyhow::Result<()> {
    let inputs: BeInputs = read_json_file(&a.inputs)?;
    let report = match a.form {
        BoundForm::Complete => be_bound_complete(&inputs)?,
        BoundForm::Incomplete => be_bound_incomplete_linear(&inputs)?,
        BoundForm::Convolution => be_bound_convolution(&inputs, a.c)?,
        BoundForm::Subgaussian => be_bound_subgaussian(&inputs, a.c, a.eta)?,
    };
    write_json(g.out.as_deref(), &report)
}

fn experiment(g: &Global, a: &ExperimentArgs, run: fn(&ExperimentConfig) -> ustat_core::Result<ExperimentReport>) -> anyhow::Result<()> {
    let mut config: ExperimentConfig = read_json_file(&a.config)?;
    if let Some(seed) = g.seed {
        config.seed = seed;
    }
    let report = run(&config)?;
    write_report(g.out.as_deref(), &report)
}

fn hdecomp(g: &Global, a: &HdecompArgs) -> anyhow::Result<()> {
    let kernel: KernelSpec = parse_json(&a.kernel)?;
    let generator: GeneratorSpec = parse_json(&a.generator)?;
    let (support, probs) = discrete_law(&generator)?;
    let hd = h_decomposition_exact(&kernel, &support, &probs, a.s, a.cap)?;
    let u_var = a.n.map(|n| u_variance_from_components(&hd, n)).transpose()?;
    write_json(
        g.out.as_deref(),
        &json!({
            "s": hd.s,
            "theta": hd.theta,
            "var_h": hd.var_h,
            "V": hd.v,
            "zeta": hd.zeta,
            "sum_binom_V": hd.variance_from_components(),
            "n": a.n,
            "u_variance": u_var,
        }),
    )
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(t) = cli.global.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::InvalidArgs(format!("thread pool: {e}")))?;
    }
    let g = &cli.global;
    match &cli.command {
        Command::Predict(a) => predict(g, a),
        Command::Zeta(a) => zeta(g, a),
        Command::Ck(a) => write_report(g.out.as_deref(), &simlab::run_ck_experiment(a.k_max, a.s_approx)?),
        Command::Ci(a) => {
            let ci = build_ci(a.theta, a.zeta1, a.zetas, a.n, a.s, a.n_sub, a.level)?;
            write_json(
                g.out.as_deref(),
                &json!({
                    "center": ci.center,
                    "half_width": ci.half_width,
                    "lower": ci.lower(),
                    "upper": ci.upper(),
                    "level": ci.level,
                    "variance_used": ci.variance_used,
                }),
            )
        }
        Command::Bound(a) => bound(g, a),
        Command::Clt(a) => experiment(g, a, simlab::run_clt_experiment),
        Command::Coverage(a) => experiment(g, a, simlab::run_coverage_experiment),
        Command::Ratio(a) => experiment(g, a, simlab::run_ratio_experiment),
        Command::Hdecomp(a) => hdecomp(g, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = err.downcast_ref::<Error>().map_or(1, Error::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
