//! Gnuplot scripts for experiment CSVs. Data are inlined as medians so the
//! script runs on its own.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};
use crate::fit::median;
use crate::output::RESULT_HEADER;

struct Layout {
    log: bool,
    xlabel: &'static str,
    ylabel: &'static str,
}

fn layout(id: u8, from_complexity: bool) -> Layout {
    match id {
        3 => Layout {
            log: false,
            xlabel: "Delta",
            ylabel: "median relative error",
        },
        4 if from_complexity => Layout {
            log: true,
            xlabel: "d",
            ylabel: "total complexity",
        },
        5 => Layout {
            log: false,
            xlabel: "d",
            ylabel: "median relative error",
        },
        _ => Layout {
            log: true,
            xlabel: "n",
            ylabel: "median relative error",
        },
    }
}

type Series = BTreeMap<String, BTreeMap<u64, Vec<f64>>>;

fn push(series: &mut Series, name: String, x: f64, y: f64) {
    series
        .entry(name)
        .or_default()
        .entry(x.to_bits())
        .or_default()
        .push(y);
}

fn parse<T: std::str::FromStr>(field: &str, path: &Path) -> Result<T> {
    field
        .parse()
        .map_err(|_| CliError::Config(format!("{}: bad field {field:?}", path.display())))
}

fn read_results(path: &Path) -> Result<(u8, Series)> {
    let mut rdr = csv::Reader::from_path(path)?;
    if rdr.headers()?.iter().ne(RESULT_HEADER) {
        return Err(CliError::Config(format!(
            "{}: unexpected header",
            path.display()
        )));
    }
    let mut id = None;
    let mut series = Series::new();
    for rec in rdr.records() {
        let rec = rec?;
        let exp: u8 = parse(&rec[0], path)?;
        id.get_or_insert(exp);
        let (d, alpha, delta, n, tag) = (&rec[1], &rec[2], &rec[3], &rec[4], &rec[5]);
        let y: f64 = parse(&rec[7], path)?;
        let (name, x) = match exp {
            1 => (tag.to_string(), parse::<f64>(n, path)?),
            2 => (format!("alpha={alpha} Delta={delta}"), parse(n, path)?),
            3 => (format!("alpha={alpha}"), parse(delta, path)?),
            5 => (tag.to_string(), parse(d, path)?),
            _ => (format!("{tag} alpha={alpha} d={d}"), parse(n, path)?),
        };
        push(&mut series, name, x, y);
    }
    match id {
        Some(id) => Ok((id, series)),
        None => Err(CliError::EmptyInput(path.to_path_buf())),
    }
}

fn read_complexity(path: &Path) -> Result<Series> {
    let mut rdr = csv::Reader::from_path(path)?;
    let mut series = Series::new();
    for rec in rdr.records() {
        let rec = rec?;
        let name = format!("{} alpha={}", &rec[2], &rec[1]);
        push(
            &mut series,
            name,
            parse(&rec[0], path)?,
            parse(&rec[5], path)?,
        );
    }
    Ok(series)
}

/// Writes `<csv stem>.gp` beside the CSV and returns its path.
pub fn emit_plot_script(csv_path: &Path) -> Result<PathBuf> {
    let (id, mut series) = read_results(csv_path)?;
    let mut from_complexity = false;
    if id == 4 {
        let sibling = csv_path.with_file_name("exp4_complexity.csv");
        if sibling.exists() {
            series = read_complexity(&sibling)?;
            from_complexity = true;
        }
    }
    let lay = layout(id, from_complexity);
    let stem = csv_path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("plot");

    let mut gp = String::new();
    let _ = writeln!(gp, "set terminal svg size 800,600");
    let _ = writeln!(gp, "set output '{stem}.svg'");
    let _ = writeln!(gp, "set title 'Experiment {id}'");
    let _ = writeln!(gp, "set xlabel '{}'", lay.xlabel);
    let _ = writeln!(gp, "set ylabel '{}'", lay.ylabel);
    let _ = writeln!(gp, "set key outside right");
    if lay.log {
        let _ = writeln!(gp, "set logscale xy");
    } else {
        let _ = writeln!(gp, "unset logscale");
    }
    let mut plots = Vec::new();
    for (i, (name, points)) in series.iter().enumerate() {
        let _ = writeln!(gp, "$s{i} << EOD");
        let mut pts: Vec<(f64, f64)> = points
            .iter()
            .map(|(x, ys)| (f64::from_bits(*x), median(ys).expect("non-empty")))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (x, y) in pts {
            let _ = writeln!(gp, "{x} {y}");
        }
        let _ = writeln!(gp, "EOD");
        plots.push(format!("$s{i} using 1:2 with linespoints title '{name}'"));
    }
    let _ = writeln!(gp, "plot {}", plots.join(", \\\n     "));

    let out = csv_path.with_extension("gp");
    fs::write(&out, gp).map_err(|e| CliError::io(&out, e))?;
    Ok(out)
}
