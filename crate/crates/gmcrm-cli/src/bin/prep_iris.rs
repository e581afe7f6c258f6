//! Build the two-sample petal-width file from the standard Iris table.
//!
//! Input columns: sepal_length, sepal_width, petal_length, petal_width
//! (cm), species. Output `value,sample` in millimetres: sample 1 is all
//! Setosa plus the first 40 Versicolor in file order, sample 2 is all
//! Virginica plus the last 10 Versicolor.
//!
//! Usage: prep-iris [INPUT] [OUTPUT]  (defaults data/iris.csv, data/iris_petal_width.csv)

use std::process::ExitCode;

fn run(input: &str, output: &str) -> Result<(usize, usize), String> {
    let mut rdr = csv::Reader::from_path(input).map_err(|e| format!("{input}: {e}"))?;
    let mut by_species: [Vec<f64>; 3] = Default::default();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| format!("{input} line {}: {e}", i + 2))?;
        let cm: f64 = rec
            .get(3)
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| format!("{input} line {}: bad petal width", i + 2))?;
        // round away the binary noise of cm × 10
        let mm = (cm * 10.0 * 1e6).round() / 1e6;
        let idx = match rec.get(4).map(str::trim) {
            Some("setosa" | "Iris-setosa") => 0,
            Some("versicolor" | "Iris-versicolor") => 1,
            Some("virginica" | "Iris-virginica") => 2,
            other => return Err(format!("{input} line {}: unknown species {other:?}", i + 2)),
        };
        by_species[idx].push(mm);
    }
    let [setosa, versicolor, virginica] = by_species;
    if versicolor.len() != 50 {
        return Err(format!(
            "expected 50 Versicolor rows, found {}",
            versicolor.len()
        ));
    }
    let err = |e: csv::Error| format!("{output}: {e}");
    let mut w = csv::Writer::from_path(output).map_err(err)?;
    w.write_record(["value", "sample"]).map_err(err)?;
    for v in setosa.iter().chain(&versicolor[..40]) {
        w.write_record([v.to_string(), "1".into()]).map_err(err)?;
    }
    for v in virginica.iter().chain(&versicolor[40..]) {
        w.write_record([v.to_string(), "2".into()]).map_err(err)?;
    }
    w.flush().map_err(|e| format!("{output}: {e}"))?;
    Ok((setosa.len() + 40, virginica.len() + 10))
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let input = args.first().map_or("data/iris.csv", String::as_str);
    let output = args
        .get(1)
        .map_or("data/iris_petal_width.csv", String::as_str);
    match run(input, output) {
        Ok((n1, n2)) => {
            eprintln!("wrote {output}: n1 = {n1}, n2 = {n2}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
