use std::collections::BTreeMap;

use gmcrm::partition::Sample;
use gmcrm::sampler::{run_chains, trapezoid, ModelKind, RunOutput};
use serde_json::{json, Map, Value};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::io::{fmt_real, read_two_sample_csv, write_density, write_json, CsvOut};

pub fn run(mut cfg: RunConfig) -> Result<Value, CliError> {
    let path = cfg.data.clone().ok_or_else(|| {
        CliError::Usage("config field `data`: a data file is required for fit".into())
    })?;
    let data = read_two_sample_csv(&path)?;
    cfg.resolve(&data)?;
    let sampler = cfg.sampler_config();
    let settings = cfg.run_settings()?;
    std::fs::create_dir_all(&cfg.out)
        .map_err(|e| CliError::Data(format!("cannot create {}: {e}", cfg.out.display())))?;

    let out = run_chains(&data, &sampler, &settings)?;
    let two = data.n(Sample::Two) > 0;
    write_trace(&cfg, &out, two)?;
    write_clusters(&cfg, &out, two)?;
    let grid = settings.grid.expect("fit always estimates densities");
    let mut integrals = Vec::new();
    for (s, name) in [(0, "density_1.csv"), (1, "density_2.csv")] {
        if let Some(values) = &out.densities[s] {
            write_density(&cfg.out.join(name), &grid, values)?;
            integrals.push(trapezoid(values, grid.step()));
        }
    }
    let summary = summary_json(&cfg, &out, two, &integrals);
    write_json(&cfg.out.join("summary.json"), &summary)?;
    Ok(summary)
}

fn param_name(model: ModelKind) -> &'static str {
    match model {
        ModelKind::Dirichlet => "c",
        ModelKind::Stable => "sigma",
    }
}

fn write_trace(cfg: &RunConfig, out: &RunOutput, two: bool) -> Result<(), CliError> {
    let p = param_name(cfg.model.kind());
    let header: Vec<&str> = if two {
        vec![
            "chain",
            "iter",
            "K_X",
            "K_Y",
            "K_shared",
            "z",
            p,
            "m",
            "tau",
            "log_joint",
        ]
    } else {
        vec!["chain", "iter", "K_X", "z", p, "m", "tau", "log_joint"]
    };
    let mut w = CsvOut::create(&cfg.out.join("trace.csv"), &header)?;
    for (i, ch) in out.chains.iter().enumerate() {
        for r in &ch.trace {
            let mut row = vec![i.to_string(), r.iter.to_string(), r.k_x.to_string()];
            if two {
                row.push(r.k_y.to_string());
                row.push(r.k_shared.to_string());
            }
            row.extend([r.z, r.family_param, r.m, r.tau, r.log_joint].map(fmt_real));
            w.row(row)?;
        }
    }
    w.finish()
}

fn write_clusters(cfg: &RunConfig, out: &RunOutput, two: bool) -> Result<(), CliError> {
    let s = &out.summary;
    let px: BTreeMap<usize, f64> = s.k_x_dist.iter().copied().collect();
    let py: BTreeMap<usize, f64> = s.k_y_dist.iter().copied().collect();
    let kmax = px
        .keys()
        .chain(if two { py.keys() } else { Default::default() })
        .max()
        .copied()
        .unwrap_or(0);
    let header: &[&str] = if two {
        &["K", "p_X", "p_Y"]
    } else {
        &["K", "p_X"]
    };
    let mut w = CsvOut::create(&cfg.out.join("clusters.csv"), header)?;
    for k in 1..=kmax {
        let mut row = vec![k.to_string(), fmt_real(px.get(&k).copied().unwrap_or(0.0))];
        if two {
            row.push(fmt_real(py.get(&k).copied().unwrap_or(0.0)));
        }
        w.row(row)?;
    }
    w.finish()
}

fn summary_json(cfg: &RunConfig, out: &RunOutput, two: bool, integrals: &[f64]) -> Value {
    let s = &out.summary;
    let p = param_name(cfg.model.kind());
    let mut post = Map::new();
    post.insert("mean_K_X".into(), json!(s.mean_k_x));
    post.insert("mode_K_X".into(), json!(s.mode_k_x));
    post.insert("P_K_X_ge_4".into(), json!(s.p_k_x_ge4));
    if two {
        post.insert("mean_K_Y".into(), json!(s.mean_k_y));
        post.insert("mode_K_Y".into(), json!(s.mode_k_y));
        post.insert("P_K_Y_ge_4".into(), json!(s.p_k_y_ge4));
        post.insert("mean_K_shared".into(), json!(s.mean_k_shared));
        post.insert(
            "joint_mode_K".into(),
            json!([s.joint_mode.0, s.joint_mode.1]),
        );
    }
    post.insert("mean_z".into(), json!(s.mean_z));
    post.insert(format!("mean_{p}"), json!(s.mean_family_param));
    post.insert("mean_m".into(), json!(s.mean_m));
    post.insert("mean_tau".into(), json!(s.mean_tau));
    json!({
        "model": cfg.model.as_str(),
        "seed": cfg.seed,
        "chains": cfg.chains,
        "draws": s.draws,
        "runtime_secs": out.runtime_secs,
        "posterior": post,
        "c_acceptance_rate": s.c_acceptance,
        "numeric_rejections": s.numeric_rejections,
        "density_trapezoid_integrals": integrals,
        "config": serde_json::to_value(cfg).expect("config serializes"),
    })
}
