use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Ordinary least squares of `log₁₀ error` on `log₁₀ n`.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<LineFit> {
    if points.len() < 3 {
        return Err(CliError::Config(format!(
            "slope fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|&(x, y)| !(x > 0.0) || !(y > 0.0)) {
        return Err(CliError::Config("log-log fit needs positive values".into()));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.log10()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.log10()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(CliError::Config(
            "slope fit needs distinct sample counts".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Ok(LineFit {
        slope,
        intercept,
        r2,
    })
}

/// Median, averaging the middle pair for even lengths.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[h]
    } else {
        0.5 * (v[h - 1] + v[h])
    })
}

/// Samples times entries per sample.
pub fn total_complexity(vsc: u64, esc: u64) -> Result<u64> {
    if vsc == 0 || esc == 0 {
        return Err(CliError::Config("complexities must be >= 1".into()));
    }
    vsc.checked_mul(esc)
        .ok_or_else(|| CliError::Numeric("total complexity overflows".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let f = fit_loglog_slope(&[(10.0, 1.0), (100.0, 10f64.powf(-0.5)), (1000.0, 0.1)]).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn flat_line() {
        let f = fit_loglog_slope(&[(10.0, 0.3), (100.0, 0.3), (1000.0, 0.3)]).unwrap();
        assert_eq!(f.slope, 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fit_loglog_slope(&[(10.0, 1.0), (100.0, 0.5)]).is_err());
        assert!(fit_loglog_slope(&[(10.0, 1.0), (100.0, 0.0), (1000.0, 0.1)]).is_err());
    }

    #[test]
    fn complexity_and_median() {
        assert_eq!(total_complexity(100, 7).unwrap(), 700);
        assert_eq!(total_complexity(100, 16).unwrap(), 1600);
        assert!(total_complexity(0, 3).is_err());
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }
}
