//! CSV files written by `exp`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};
use crate::experiment::{ExperimentOutput, ResultRow};
use crate::plot::emit_plot_script;

pub const RESULT_HEADER: [&str; 10] = [
    "experiment",
    "d",
    "alpha",
    "delta",
    "n",
    "tag",
    "trial",
    "rel_error",
    "seconds",
    "seed",
];

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn finish(mut w: csv::Writer<fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| CliError::io(path, e))
}

fn write_table(
    path: &Path,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    finish(w, path)
}

pub fn result_record(r: &ResultRow) -> Vec<String> {
    vec![
        r.experiment.to_string(),
        r.d.to_string(),
        r.alpha.to_string(),
        r.delta.to_string(),
        r.n.to_string(),
        r.tag.clone(),
        r.trial.to_string(),
        r.rel_error.to_string(),
        r.seconds.to_string(),
        r.seed.to_string(),
    ]
}

pub fn write_results(path: &Path, rows: &[ResultRow]) -> Result<()> {
    write_table(path, &RESULT_HEADER, rows.iter().map(result_record))
}

/// Writes every table for the run into `dir` and returns the paths, main
/// CSV first.
pub fn write_experiment(dir: &Path, id: u8, out: &ExperimentOutput) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let file = |suffix: &str| dir.join(format!("exp{id}{suffix}.csv"));
    let mut paths = Vec::new();

    let main = file("");
    write_results(&main, &out.rows)?;
    paths.push(main.clone());

    let p = file("_median");
    write_table(
        &p,
        &[
            "experiment",
            "d",
            "alpha",
            "delta",
            "n",
            "tag",
            "median_rel_error",
            "trials",
        ],
        out.medians.iter().map(|m| {
            vec![
                m.experiment.to_string(),
                m.d.to_string(),
                m.alpha.to_string(),
                m.delta.to_string(),
                m.n.to_string(),
                m.tag.clone(),
                m.median.to_string(),
                m.trials.to_string(),
            ]
        }),
    )?;
    paths.push(p);

    if !out.fits.is_empty() {
        let p = file("_fit");
        write_table(
            &p,
            &[
                "experiment",
                "d",
                "alpha",
                "delta",
                "tag",
                "slope",
                "intercept",
                "r2",
                "points",
            ],
            out.fits.iter().map(|f| {
                vec![
                    f.experiment.to_string(),
                    f.d.to_string(),
                    f.alpha.to_string(),
                    f.delta.to_string(),
                    f.tag.clone(),
                    f.fit.slope.to_string(),
                    f.fit.intercept.to_string(),
                    f.fit.r2.to_string(),
                    f.points.to_string(),
                ]
            }),
        )?;
        paths.push(p);
    }

    if !out.complexity.is_empty() {
        let p = file("_complexity");
        write_table(
            &p,
            &[
                "d",
                "alpha",
                "tag",
                "vsc",
                "esc",
                "total",
                "median_rel_error",
            ],
            out.complexity.iter().map(|c| {
                vec![
                    c.d.to_string(),
                    c.alpha.to_string(),
                    c.tag.clone(),
                    c.vsc.to_string(),
                    c.esc.to_string(),
                    c.total.to_string(),
                    c.median_error.to_string(),
                ]
            }),
        )?;
        paths.push(p);
    }

    if !out.banded.is_empty() {
        let p = file("_summary");
        write_table(
            &p,
            &[
                "d",
                "c",
                "zeta_median",
                "median_thresh",
                "median_hatT",
                "zero_rate",
                "keep_rate",
            ],
            out.banded.iter().map(|b| {
                vec![
                    b.d.to_string(),
                    b.c.to_string(),
                    b.zeta_median.to_string(),
                    b.median_thresholded.to_string(),
                    b.median_plain.to_string(),
                    b.zero_rate.to_string(),
                    b.keep_rate.to_string(),
                ]
            }),
        )?;
        paths.push(p);
    }

    let p = file("_truth");
    write_table(
        &p,
        &["variant", "truth_seed"],
        out.truth_seeds
            .iter()
            .map(|(v, s)| vec![v.clone(), s.to_string()]),
    )?;
    paths.push(p);

    if !out.rows.is_empty() {
        paths.push(emit_plot_script(&main)?);
    }
    Ok(paths)
}

/// Single CSV record to stdout.
pub fn print_record<W: Write>(out: W, header: &[&str], row: &[String]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    w.write_record(row)?;
    w.flush().map_err(|e| CliError::io("<stdout>", e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_is_fixed() {
        assert_eq!(
            RESULT_HEADER.join(","),
            "experiment,d,alpha,delta,n,tag,trial,rel_error,seconds,seed"
        );
    }

    #[test]
    fn unwritable_dir_is_io_error() {
        let blocker =
            std::env::temp_dir().join(format!("toepquant-blocker-{}", std::process::id()));
        fs::write(&blocker, "x").unwrap();
        let err =
            write_experiment(&blocker.join("sub"), 1, &ExperimentOutput::default()).unwrap_err();
        assert!(matches!(err, CliError::Io { .. }));
        fs::remove_file(blocker).unwrap();
    }
}
