//! Run configuration: a flat TOML table merged with command-line overrides.

use std::path::{Path, PathBuf};

use gmcrm::model::Hyperpriors;
use gmcrm::sampler::{
    DensityGrid, FixedParams, InitialValues, ModelKind, RunSettings, SamplerConfig, TwoSampleData,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ModelName {
    GmDirichlet,
    GmStable,
}

impl ModelName {
    pub fn kind(self) -> ModelKind {
        match self {
            ModelName::GmDirichlet => ModelKind::Dirichlet,
            ModelName::GmStable => ModelKind::Stable,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelName::GmDirichlet => "gm_dirichlet",
            ModelName::GmStable => "gm_stable",
        }
    }
}

/// Everything `fit` needs. Optional fields are filled from the data by
/// [`RunConfig::resolve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelName,
    pub data: Option<PathBuf>,
    pub out: PathBuf,

    pub w: f64,
    #[serde(rename = "W")]
    pub big_w: f64,
    pub s: f64,
    #[serde(rename = "S")]
    pub big_s: f64,
    pub a: Option<f64>,
    #[serde(rename = "A")]
    pub big_a: f64,
    pub a0: f64,
    pub b0: f64,

    pub z_init: f64,
    pub c_init: f64,
    pub sigma_init: f64,
    pub m_init: Option<f64>,
    pub tau_init: f64,
    pub z_fixed: bool,
    pub c_fixed: bool,
    pub sigma_fixed: bool,

    pub iters: u64,
    pub burnin: u64,
    pub thin: u64,
    pub seed: u64,
    pub chains: usize,

    pub grid_min: Option<f64>,
    pub grid_max: Option<f64>,
    pub grid_points: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let init = InitialValues::default();
        Self {
            model: ModelName::GmDirichlet,
            data: None,
            out: PathBuf::from("out"),
            w: 1.0,
            big_w: 100.0,
            s: 1.0,
            big_s: 1.0,
            a: None,
            big_a: 2.0,
            a0: 2.0,
            b0: 1.0,
            z_init: init.z,
            c_init: init.c,
            sigma_init: init.sigma,
            m_init: None,
            tau_init: init.tau,
            z_fixed: false,
            c_fixed: false,
            sigma_fixed: false,
            iters: 100_000,
            burnin: 20_000,
            thin: 1,
            seed: 1,
            chains: 1,
            grid_min: None,
            grid_max: None,
            grid_points: 1000,
        }
    }
}

/// Parse `key=value`; the value is read as a TOML value and falls back to a
/// bare string.
pub fn parse_override(s: &str) -> Result<(String, toml::Value), CliError> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("override `{s}` is not of the form key=value")))?;
    let key = k.trim().to_string();
    let value = toml::from_str::<toml::Table>(&format!("v = {}", v.trim()))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(v.trim().to_string()));
    Ok((key, value))
}

/// Config table from a JSON object, or from the `config` member of a
/// summary written by `fit`. Nulls mean "unset".
fn table_from_json(text: &str) -> Result<toml::Table, String> {
    let v: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let mut obj = match v.get("config").unwrap_or(&v) {
        serde_json::Value::Object(o) => o.clone(),
        _ => return Err("expected a JSON object".into()),
    };
    obj.retain(|_, v| !v.is_null());
    toml::Table::try_from(obj).map_err(|e| e.to_string())
}

impl RunConfig {
    /// Defaults, then the file, then the overrides in order.
    pub fn load(
        path: Option<&Path>,
        overrides: &[(String, toml::Value)],
    ) -> Result<Self, CliError> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    CliError::Usage(format!("cannot read config {}: {e}", p.display()))
                })?;
                if p.extension().is_some_and(|e| e == "json") {
                    table_from_json(&text)
                        .map_err(|e| CliError::Usage(format!("config {}: {e}", p.display())))?
                } else {
                    toml::from_str::<toml::Table>(&text)
                        .map_err(|e| CliError::Usage(format!("config {}: {e}", p.display())))?
                }
            }
            None => toml::Table::new(),
        };
        for (k, v) in overrides {
            table.insert(k.clone(), v.clone());
        }
        let cfg: RunConfig =
            toml::Value::Table(table.clone())
                .try_into()
                .map_err(|e: toml::de::Error| {
                    // point at the first key that fails on its own
                    let field = table.iter().find(|(k, v)| {
                        let one = toml::Table::from_iter([((*k).clone(), (*v).clone())]);
                        toml::Value::Table(one).try_into::<RunConfig>().is_err()
                    });
                    match field {
                        Some((k, _)) => {
                            CliError::Usage(format!("config field `{k}`: {}", e.message()))
                        }
                        None => CliError::Usage(format!("config: {}", e.message())),
                    }
                })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad =
            |field: &str, why: &str| Err(CliError::Usage(format!("config field `{field}`: {why}")));
        for (field, v) in [
            ("w", self.w),
            ("W", self.big_w),
            ("s", self.s),
            ("S", self.big_s),
            ("A", self.big_a),
            ("a0", self.a0),
            ("b0", self.b0),
            ("c_init", self.c_init),
            ("tau_init", self.tau_init),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(field, "must be positive and finite");
            }
        }
        if let Some(a) = self.a {
            if !a.is_finite() {
                return bad("a", "must be finite");
            }
        }
        if !(0.0..=1.0).contains(&self.z_init)
            || (!self.z_fixed && !(self.z_init > 0.0 && self.z_init < 1.0))
        {
            return bad("z_init", "must lie in (0,1), or in [0,1] when z_fixed");
        }
        if !(self.sigma_init > 0.0 && self.sigma_init < 1.0) {
            return bad("sigma_init", "must lie in (0,1)");
        }
        if self.iters <= self.burnin {
            return bad("iters", "must exceed burnin");
        }
        if self.thin == 0 {
            return bad("thin", "must be at least 1");
        }
        if self.chains == 0 {
            return bad("chains", "must be at least 1");
        }
        if self.grid_points < 2 {
            return bad("grid_points", "must be at least 2");
        }
        if let (Some(lo), Some(hi)) = (self.grid_min, self.grid_max) {
            if !(lo < hi) {
                return bad("grid_min", "must be below grid_max");
            }
        }
        Ok(())
    }

    /// Fill `a` with the pooled mean and the grid bounds with the data range
    /// padded by three times its width on both sides (the base predictive
    /// has heavy tails).
    pub fn resolve(&mut self, data: &TwoSampleData) -> Result<(), CliError> {
        if self.a.is_none() {
            self.a = Some(data.pooled_mean());
        }
        let all = data.x.iter().flatten();
        let lo = all.clone().copied().fold(f64::INFINITY, f64::min);
        let hi = all.copied().fold(f64::NEG_INFINITY, f64::max);
        let pad = 3.0 * (hi - lo).max(1.0);
        let min = *self.grid_min.get_or_insert(lo - pad);
        let max = *self.grid_max.get_or_insert(hi + pad);
        if !(min < max) {
            return Err(CliError::Usage(
                "config field `grid_min`: must be below grid_max".into(),
            ));
        }
        Ok(())
    }

    pub fn hyperpriors(&self) -> Hyperpriors {
        Hyperpriors {
            w: self.w,
            big_w: self.big_w,
            s: self.s,
            big_s: self.big_s,
            a: self.a.expect("resolved config"),
            big_a: self.big_a,
            a0: self.a0,
            b0: self.b0,
        }
    }

    pub fn sampler_config(&self) -> SamplerConfig {
        let mut cfg = SamplerConfig::new(self.model.kind(), self.hyperpriors());
        cfg.init = InitialValues {
            z: self.z_init,
            c: self.c_init,
            sigma: self.sigma_init,
            m: self.m_init,
            tau: self.tau_init,
        };
        cfg.fixed = FixedParams {
            z: self.z_fixed,
            c: self.c_fixed,
            sigma: self.sigma_fixed,
            m: false,
            tau: false,
        };
        cfg
    }

    pub fn run_settings(&self) -> Result<RunSettings, CliError> {
        let grid = DensityGrid::new(
            self.grid_min.expect("resolved config"),
            self.grid_max.expect("resolved config"),
            self.grid_points,
        )
        .map_err(|e| CliError::Usage(format!("config field `grid_points`: {e}")))?;
        Ok(RunSettings {
            iters: self.iters,
            burnin: self.burnin,
            thin: self.thin,
            chains: self.chains,
            seed: self.seed,
            grid: Some(grid),
        })
    }
}
