//! `gmcrm`: fit GM-dependent mixtures and evaluate partition laws.

mod config;
mod error;
mod fit;
mod io;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gmcrm::crm::{CrmFamily, GmDependenceParams};
use gmcrm::oracle::{simulate_partition_frequencies, StickBreakingTruncation};
use gmcrm::partition::{enumerate_partitions, ENUMERATION_LIMIT};
use gmcrm::peppf::{dependence_report, ln_peppf, FrequencyData, PartitionModel, Precision};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use config::{parse_override, ModelName, RunConfig};
use error::CliError;
use io::{fmt_real, CsvOut};

#[derive(Parser)]
#[command(
    name = "gmcrm",
    version,
    about = "GM-dependent Dirichlet and stable mixtures for two samples"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the Gibbs sampler and write trace, densities, cluster counts and a summary.
    Fit(FitArgs),
    /// Evaluate the partition probability of explicit cluster frequencies.
    Peppf(PeppfArgs),
    /// Dependence functional, correlation and mixed moment as JSON.
    Dependence(DependenceArgs),
    /// Empirical partition table from forward simulation of a GM-Dirichlet pair.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct FitArgs {
    /// Flat TOML config file (or a summary.json from an earlier run).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, value_enum)]
    model: Option<ModelName>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    iters: Option<u64>,
    #[arg(long)]
    burnin: Option<u64>,
    #[arg(long)]
    chains: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override any config field, e.g. `--set z_fixed=true --set S=2`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct PeppfArgs {
    #[arg(long, value_enum, default_value = "gm_dirichlet")]
    model: ModelName,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long)]
    z: f64,
    #[arg(long, default_value_t = 0.5)]
    sigma: f64,
    /// Sizes of the clusters seen only in sample 1, comma separated.
    #[arg(long, value_delimiter = ',')]
    freq1: Vec<u64>,
    /// Sizes of the clusters seen only in sample 2.
    #[arg(long, value_delimiter = ',')]
    freq2: Vec<u64>,
    /// Sample-1 counts of the shared clusters.
    #[arg(long, value_delimiter = ',')]
    shared1: Vec<u64>,
    /// Sample-2 counts of the shared clusters, same order as --shared1.
    #[arg(long, value_delimiter = ',')]
    shared2: Vec<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyName {
    Gamma,
    Stable,
}

#[derive(Args)]
struct DependenceArgs {
    #[arg(long, value_enum)]
    family: FamilyName,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long)]
    z: f64,
    #[arg(long, default_value_t = 0.5)]
    sigma: f64,
    #[arg(long, default_value_t = 0.5)]
    p0a: f64,
    #[arg(long, default_value_t = 0.5)]
    p0b: f64,
    #[arg(long, default_value_t = 0.5)]
    p0ab: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum SimFamily {
    GmDirichlet,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum, default_value = "gm-dirichlet")]
    family: SimFamily,
    #[arg(long)]
    c: f64,
    #[arg(long)]
    z: f64,
    #[arg(long)]
    n1: usize,
    #[arg(long)]
    n2: usize,
    #[arg(long, default_value_t = 100_000)]
    reps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    truncation: usize,
    /// Write the table here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Pretty JSON to stdout; a closed pipe is not an error.
fn print_json(v: &serde_json::Value) {
    let mut out = std::io::stdout().lock();
    if serde_json::to_writer_pretty(&mut out, v).is_ok() {
        let _ = writeln!(out);
    }
}

fn cmd_fit(a: FitArgs) -> Result<(), CliError> {
    let mut overrides = Vec::new();
    let named: [(&str, Option<toml::Value>); 7] = [
        (
            "data",
            a.data.map(|p| toml::Value::String(p.display().to_string())),
        ),
        (
            "model",
            a.model.map(|m| toml::Value::String(m.as_str().into())),
        ),
        ("seed", a.seed.map(|v| toml::Value::Integer(v as i64))),
        ("iters", a.iters.map(|v| toml::Value::Integer(v as i64))),
        ("burnin", a.burnin.map(|v| toml::Value::Integer(v as i64))),
        ("chains", a.chains.map(|v| toml::Value::Integer(v as i64))),
        (
            "out",
            a.out.map(|p| toml::Value::String(p.display().to_string())),
        ),
    ];
    for (k, v) in named {
        if let Some(v) = v {
            overrides.push((k.to_string(), v));
        }
    }
    for s in &a.set {
        overrides.push(parse_override(s)?);
    }
    let cfg = RunConfig::load(a.config.as_deref(), &overrides)?;
    let summary = fit::run(cfg)?;
    print_json(&summary["posterior"]);
    Ok(())
}

fn cmd_peppf(a: PeppfArgs) -> Result<(), CliError> {
    if a.shared1.len() != a.shared2.len() {
        return Err(CliError::Usage(
            "--shared1 and --shared2 must have the same length".into(),
        ));
    }
    let f = FrequencyData::from_split(a.freq1, a.freq2, &a.shared1, &a.shared2)?;
    let model = match a.model {
        ModelName::GmDirichlet => PartitionModel::Dirichlet { c: a.c, z: a.z },
        ModelName::GmStable => PartitionModel::Stable {
            sigma: a.sigma,
            z: a.z,
        },
    };
    let ln = ln_peppf(&model, &f, &Precision::high())?;
    let out = json!({
        "model": a.model.as_str(),
        "n1": f.n1,
        "n2": f.n2,
        "value": ln.exp(),
        "log_value": ln,
    });
    print_json(&out);
    Ok(())
}

fn cmd_dependence(a: DependenceArgs) -> Result<(), CliError> {
    let family = match a.family {
        FamilyName::Gamma => CrmFamily::Gamma,
        FamilyName::Stable => CrmFamily::stable(a.sigma)?,
    };
    let params = GmDependenceParams::new(a.c, a.z)?;
    let r = dependence_report(family, params, a.p0a, a.p0b, a.p0ab)?;
    let out = json!({
        "family": match a.family { FamilyName::Gamma => "gamma", FamilyName::Stable => "stable" },
        "c": a.c,
        "z": a.z,
        "sigma": matches!(a.family, FamilyName::Stable).then_some(a.sigma),
        "p0a": a.p0a,
        "p0b": a.p0b,
        "p0ab": a.p0ab,
        "correlation": r.correlation,
        "I": r.i_cz,
        "mixed_moment": r.mixed_moment,
    });
    print_json(&out);
    Ok(())
}

fn cmd_simulate(a: SimulateArgs) -> Result<(), CliError> {
    let SimFamily::GmDirichlet = a.family;
    if a.n1 + a.n2 == 0 || a.reps == 0 {
        return Err(CliError::Usage("need n1 + n2 > 0 and reps > 0".into()));
    }
    let params = GmDependenceParams::new(a.c, a.z)?;
    let trunc = StickBreakingTruncation::new(a.truncation)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let table = simulate_partition_frequencies(params, a.n1, a.n2, a.reps, trunc, &mut rng)?;
    let exact = a.n1 + a.n2 <= ENUMERATION_LIMIT;
    let mut rows: Vec<(Vec<usize>, u64, Option<f64>)> = if exact {
        enumerate_partitions(a.n1, a.n2)?
            .map(|p| {
                let key = p.canonical();
                let seen = table.get(&key).copied().unwrap_or(0);
                let model = PartitionModel::Dirichlet { c: a.c, z: a.z };
                let pr = ln_peppf(&model, &p.frequency_data(), &Precision::high()).map(f64::exp);
                pr.map(|v| (key, seen, Some(v)))
            })
            .collect::<gmcrm::Result<_>>()?
    } else {
        table.into_iter().map(|(k, n)| (k, n, None)).collect()
    };
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    let label = |k: &[usize]| {
        let side = |s: &[usize]| {
            s.iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        format!("{}|{}", side(&k[..a.n1]), side(&k[a.n1..]))
    };
    let reps = a.reps as f64;
    let emit = |w: &mut dyn FnMut(Vec<String>) -> Result<(), CliError>| -> Result<(), CliError> {
        w(["partition", "count", "empirical", "std_err", "peppf"]
            .map(String::from)
            .to_vec())?;
        for (k, n, pr) in &rows {
            let p = *n as f64 / reps;
            w(vec![
                label(k),
                n.to_string(),
                fmt_real(p),
                fmt_real((p * (1.0 - p) / reps).sqrt()),
                pr.map(fmt_real).unwrap_or_default(),
            ])?;
        }
        Ok(())
    };
    match a.out {
        Some(path) => {
            let mut w = CsvOut::create(&path, &[])?;
            emit(&mut |r| w.row(r))?;
            w.finish()
        }
        None => {
            let mut w = csv::Writer::from_writer(std::io::stdout());
            let res = emit(&mut |r| w.write_record(r).map_err(|e| CliError::Data(e.to_string())))
                .and_then(|_| w.flush().map_err(|e| CliError::Data(e.to_string())));
            match res {
                Err(CliError::Data(m)) if m.contains("Broken pipe") => Ok(()),
                r => r,
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.cmd {
        Command::Fit(a) => cmd_fit(a),
        Command::Peppf(a) => cmd_peppf(a),
        Command::Dependence(a) => cmd_dependence(a),
        Command::Simulate(a) => cmd_simulate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
