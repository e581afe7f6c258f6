//! WebAssembly bindings behind `www/index.html`.
//!
//! Each export has a plain Rust twin so the logic is testable natively.

use gmcrm::crm::{CrmFamily, GmDependenceParams};
use gmcrm::oracle::olkin_liu_density;
use gmcrm::peppf::{correlation, ln_peppf, FrequencyData, PartitionModel, Precision};
use wasm_bindgen::prelude::*;

/// Correlation of `p̃1(A)` and `p̃2(A)` for `P0(A) = 1/2` at `points` evenly
/// spaced values of `z` in [0, 1]. `family` is `"dirichlet"` (uses `c`) or
/// `"stable"` (uses `sigma`).
pub fn correlation_curve_impl(
    family: &str,
    c: f64,
    sigma: f64,
    points: usize,
) -> gmcrm::Result<Vec<f64>> {
    let fam = match family {
        "dirichlet" => CrmFamily::Gamma,
        "stable" => CrmFamily::stable(sigma)?,
        other => return Err(gmcrm::Error::Domain(format!("unknown family `{other}`"))),
    };
    let c = if matches!(fam, CrmFamily::Gamma) {
        c
    } else {
        1.0
    };
    if points < 2 {
        return Err(gmcrm::Error::Domain("need at least two points".into()));
    }
    (0..points)
        .map(|i| {
            let z = i as f64 / (points - 1) as f64;
            correlation(fam, GmDependenceParams::new(c, z)?, 0.5, 0.5, 0.5)
        })
        .collect()
}

fn parse_counts(s: &str) -> gmcrm::Result<Vec<u64>> {
    s.split([',', ' '])
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse()
                .map_err(|_| gmcrm::Error::Domain(format!("`{t}` is not a count")))
        })
        .collect()
}

/// Log pEPPF from comma-separated cluster sizes: clusters only in sample 1,
/// only in sample 2, and the per-sample counts of shared clusters.
pub fn ln_peppf_impl(
    family: &str,
    c: f64,
    sigma: f64,
    z: f64,
    freq1: &str,
    freq2: &str,
    shared1: &str,
    shared2: &str,
) -> gmcrm::Result<f64> {
    let model = match family {
        "dirichlet" => PartitionModel::Dirichlet { c, z },
        "stable" => PartitionModel::Stable { sigma, z },
        other => return Err(gmcrm::Error::Domain(format!("unknown family `{other}`"))),
    };
    let (q1, q2) = (parse_counts(shared1)?, parse_counts(shared2)?);
    if q1.len() != q2.len() {
        return Err(gmcrm::Error::Domain(
            "shared counts must have the same length in both samples".into(),
        ));
    }
    let f = FrequencyData::from_split(parse_counts(freq1)?, parse_counts(freq2)?, &q1, &q2)?;
    if f.n1 + f.n2 > 60 {
        return Err(gmcrm::Error::Refused(
            "at most 60 observations in the demo".into(),
        ));
    }
    ln_peppf(&model, &f, &Precision::high())
}

/// Bivariate beta density of the mixture weights on the midpoints of an
/// `m × m` grid, row-major in `w1`.
pub fn weight_density_grid_impl(c: f64, z: f64, m: usize) -> gmcrm::Result<Vec<f64>> {
    if !(1..=200).contains(&m) {
        return Err(gmcrm::Error::Domain("grid size must be 1..=200".into()));
    }
    let mid = |i: usize| (i as f64 + 0.5) / m as f64;
    let mut out = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            out.push(olkin_liu_density(c, z, mid(i), mid(j))?);
        }
    }
    Ok(out)
}

fn js(e: gmcrm::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub fn correlation_curve(
    family: &str,
    c: f64,
    sigma: f64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    correlation_curve_impl(family, c, sigma, points).map_err(js)
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn log_peppf(
    family: &str,
    c: f64,
    sigma: f64,
    z: f64,
    freq1: &str,
    freq2: &str,
    shared1: &str,
    shared2: &str,
) -> Result<f64, JsError> {
    ln_peppf_impl(family, c, sigma, z, freq1, freq2, shared1, shared2).map_err(js)
}

#[wasm_bindgen]
pub fn weight_density_grid(c: f64, z: f64, m: usize) -> Result<Vec<f64>, JsError> {
    weight_density_grid_impl(c, z, m).map_err(js)
}
