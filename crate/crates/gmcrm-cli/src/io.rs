//! Data ingestion and artifact writers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use gmcrm::sampler::{DensityGrid, TwoSampleData};

use crate::error::CliError;

/// Shortest decimal that parses back to the same `f64` (at most 17
/// significant digits); exponent form outside [1e-4, 1e16).
pub fn fmt_real(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e16).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Two-sample CSV with header `value,sample` and `sample` in {1, 2}.
pub fn read_two_sample_csv(path: &Path) -> Result<TwoSampleData, CliError> {
    let where_ = path.display();
    let file =
        File::open(path).map_err(|e| CliError::Data(format!("cannot open {where_}: {e}")))?;
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers = rdr
        .headers()
        .map_err(|e| CliError::Data(format!("{where_}: {e}")))?
        .clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Data(format!("{where_} line 1: missing column `{name}`")))
    };
    let (vi, si) = (col("value")?, col("sample")?);
    let mut x = [Vec::new(), Vec::new()];
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            CliError::Data(format!("{where_} line {line}: {e}"))
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let value: f64 = rec[vi]
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| {
                CliError::Data(format!(
                    "{where_} line {line}: value `{}` is not a finite number",
                    &rec[vi]
                ))
            })?;
        match &rec[si] {
            "1" => x[0].push(value),
            "2" => x[1].push(value),
            other => {
                return Err(CliError::Data(format!(
                    "{where_} line {line}: sample must be 1 or 2, got `{other}`"
                )));
            }
        }
    }
    let [x1, x2] = x;
    if x1.is_empty() {
        return Err(CliError::Data(format!(
            "{where_}: sample 1 has no observations"
        )));
    }
    TwoSampleData::new(x1, x2).map_err(|e| CliError::Data(format!("{where_}: {e}")))
}

pub struct CsvOut {
    w: csv::Writer<BufWriter<File>>,
    path: String,
}

impl CsvOut {
    pub fn create(path: &Path, header: &[&str]) -> Result<Self, CliError> {
        let file = File::create(path)
            .map_err(|e| CliError::Data(format!("cannot create {}: {e}", path.display())))?;
        let mut out = Self {
            w: csv::Writer::from_writer(BufWriter::new(file)),
            path: path.display().to_string(),
        };
        if !header.is_empty() {
            out.row(header.iter().map(|s| s.to_string()))?;
        }
        Ok(out)
    }

    pub fn row(&mut self, fields: impl IntoIterator<Item = String>) -> Result<(), CliError> {
        self.w
            .write_record(fields)
            .map_err(|e| CliError::Data(format!("writing {}: {e}", self.path)))
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.w
            .flush()
            .map_err(|e| CliError::Data(format!("writing {}: {e}", self.path)))
    }
}

pub fn write_density(path: &Path, grid: &DensityGrid, values: &[f64]) -> Result<(), CliError> {
    let mut out = CsvOut::create(path, &["x", "f_hat"])?;
    for (x, f) in grid.xs().into_iter().zip(values) {
        out.row([fmt_real(x), fmt_real(*f)])?;
    }
    out.finish()
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    let file = File::create(path)
        .map_err(|e| CliError::Data(format!("cannot create {}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|e| CliError::Data(format!("writing {}: {e}", path.display())))?;
    writeln!(w)
        .and_then(|_| w.flush())
        .map_err(|e| CliError::Data(format!("writing {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_round_trip() {
        for v in [
            0.1,
            1.0 / 3.0,
            2.5e-300,
            123456789.123456789,
            -7.0,
            0.0,
            1e20,
            f64::MIN_POSITIVE,
            0.30000000000000004,
        ] {
            let s = fmt_real(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
            let digits = s
                .trim_start_matches('-')
                .split('e')
                .next()
                .unwrap()
                .chars()
                .filter(char::is_ascii_digit)
                .count();
            assert!(digits <= 17 + 1, "{s}");
        }
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        std::fs::write(&p, "value,sample\n1.0,1\n2.0,3\n").unwrap();
        let e = read_two_sample_csv(&p).unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
        std::fs::write(&p, "value,sample\n1.0,1\nabc,2\n").unwrap();
        assert!(read_two_sample_csv(&p)
            .unwrap_err()
            .to_string()
            .contains("line 3"));
        std::fs::write(&p, "value,sample\n1.0,1\n2.0\n").unwrap();
        assert!(read_two_sample_csv(&p)
            .unwrap_err()
            .to_string()
            .contains("line 3"));
        std::fs::write(&p, "v,sample\n1.0,1\n").unwrap();
        assert!(read_two_sample_csv(&p)
            .unwrap_err()
            .to_string()
            .contains("`value`"));
    }

    #[test]
    fn reads_both_samples() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        std::fs::write(&p, "sample,value\n2,3.5\n1,1.25\n1,2\n").unwrap();
        let d = read_two_sample_csv(&p).unwrap();
        assert_eq!(d.x, [vec![1.25, 2.0], vec![3.5]]);
    }
}
