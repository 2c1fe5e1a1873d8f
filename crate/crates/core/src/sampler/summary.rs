//! Posterior summaries in the mean (SD) / 95% interval layout.

use std::io::Write;

use crate::error::{Error, Result};
use crate::sampler::chain::ChainDraws;
use crate::sampler::diagnostics::{ess, geweke_z};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct ParamSummary<T> {
    pub name: String,
    pub mean: T,
    pub sd: T,
    pub q025: T,
    pub q975: T,
    /// The 95% interval excludes zero.
    pub significant: bool,
    pub geweke_z: Option<T>,
    pub ess: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitSummary<T> {
    pub rows: Vec<ParamSummary<T>>,
}

impl<T: Real> FitSummary<T> {
    pub fn get(&self, name: &str) -> Option<&ParamSummary<T>> {
        self.rows.iter().find(|r| r.name == name)
    }
}

/// Sorted-order linear interpolation at 1-based rank h = (n − 1)q + 1.
pub fn quantile_sorted<T: Real>(sorted: &[T], q: f64) -> T {
    let n = sorted.len();
    let h = (n - 1) as f64 * q;
    let lo = h.floor() as usize;
    let frac = T::lit(h - lo as f64);
    if lo + 1 >= n {
        sorted[n - 1]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

pub fn summarize_column<T: Real>(name: &str, column: &[T]) -> Result<ParamSummary<T>> {
    let n = column.len();
    if n < 2 {
        return Err(Error::Summary(format!("`{name}` has {n} draws; need at least 2")));
    }
    let nt = T::from_usize(n).unwrap();
    let mean = column.iter().copied().sum::<T>() / nt;
    let sd = (column.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / (nt - T::one())).sqrt();
    let mut sorted = column.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let q025 = quantile_sorted(&sorted, 0.025);
    let q975 = quantile_sorted(&sorted, 0.975);
    Ok(ParamSummary {
        name: name.to_string(),
        mean,
        sd,
        q025,
        q975,
        significant: q025 > T::zero() || q975 < T::zero(),
        geweke_z: geweke_z(column).ok(),
        ess: ess(column).ok(),
    })
}

/// Summarises every column of `draws`.
pub fn summarize<T: Real>(draws: &ChainDraws<T>) -> Result<FitSummary<T>> {
    if draws.len() < 2 {
        return Err(Error::Summary(format!("{} stored draws; need at least 2", draws.len())));
    }
    let rows = draws
        .names
        .iter()
        .enumerate()
        .map(|(j, name)| summarize_column(name, &draws.column(j)))
        .collect::<Result<_>>()?;
    Ok(FitSummary { rows })
}

/// Columns reported in the summary file: everything except the per-zone effects.
pub fn is_reported(name: &str) -> bool {
    !name.starts_with("phi[")
}

pub fn write_summary<T: Real, W: Write>(mut out: W, summary: &FitSummary<T>, header: &[String]) -> Result<()> {
    let io = |e| Error::io("<summary>", e);
    for line in header {
        writeln!(out, "# {line}").map_err(io)?;
    }
    writeln!(out, "parameter,mean,sd,q025,q975,significant").map_err(io)?;
    for r in &summary.rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.name,
            r.mean.to_f64_lossy(),
            r.sd.to_f64_lossy(),
            r.q025.to_f64_lossy(),
            r.q975.to_f64_lossy(),
            r.significant
        )
        .map_err(io)?;
    }
    Ok(())
}

/// Human-readable table: `Mean (SD)` and `95% BCI`, significant rows starred.
pub fn format_table<T: Real>(summary: &FitSummary<T>) -> String {
    let width = summary.rows.iter().map(|r| r.name.len()).max().unwrap_or(8).max(9);
    let mut s = format!("{:<width$}  {:>18}  {:>20}\n", "Variable", "Mean (SD)", "95% BCI");
    for r in &summary.rows {
        let label = if r.name == "sd_phi" { "CAR effects (sd_phi)" } else { r.name.as_str() };
        let ms = format!("{:.3} ({:.3})", r.mean.to_f64_lossy(), r.sd.to_f64_lossy());
        let ci = format!("({:.3}, {:.3})", r.q025.to_f64_lossy(), r.q975.to_f64_lossy());
        let star = if r.significant { " *" } else { "" };
        s.push_str(&format!("{label:<width$}  {ms:>18}  {ci:>20}{star}\n"));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_chain() {
        let s = summarize_column("c", &[1.5; 50]).unwrap();
        assert_eq!((s.mean, s.sd, s.q025, s.q975), (1.5, 0.0, 1.5, 1.5));
        assert!(s.significant);
        assert!(!summarize_column("z", &[0.0; 50]).unwrap().significant);
        assert!(s.geweke_z.is_none());
    }

    #[test]
    fn arithmetic_series() {
        let x: Vec<f64> = (1..=100).map(f64::from).collect();
        let s = summarize_column("x", &x).unwrap();
        assert_eq!(s.mean, 50.5);
        assert!((s.q025 - 3.475).abs() < 1e-12);
        assert!((s.q975 - 97.525).abs() < 1e-12);
    }

    // independent check: R type-7 quantiles computed by hand on a short vector
    #[test]
    fn quantile_interpolation() {
        let v = [10.0f64, 20.0, 40.0, 80.0];
        assert_eq!(quantile_sorted(&v, 0.0), 10.0);
        assert_eq!(quantile_sorted(&v, 1.0), 80.0);
        assert!((quantile_sorted(&v, 0.5) - 30.0).abs() < 1e-12);
        assert!((quantile_sorted(&v, 0.9) - 68.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_draws() {
        assert!(matches!(summarize_column("x", &[1.0]), Err(Error::Summary(_))));
    }

    #[test]
    fn interval_off_zero_is_significant() {
        // mean 0.108 with interval (0.068, 0.146)
        let n = 1001;
        let x: Vec<f64> = (0..n)
            .map(|i| {
                let u = i as f64 / (n - 1) as f64;
                if u < 0.5 {
                    0.068 + (0.108 - 0.068) * (u / 0.5)
                } else {
                    0.108 + (0.146 - 0.108) * ((u - 0.5) / 0.5)
                }
            })
            .collect();
        let s = summarize_column("access_density", &x).unwrap();
        assert!(s.significant);
    }

    #[test]
    fn file_layout() {
        let x: Vec<f64> = (1..=10).map(f64::from).collect();
        let summary = FitSummary { rows: vec![summarize_column("a", &x).unwrap()] };
        let mut buf = Vec::new();
        write_summary(&mut buf, &summary, &["h".into()]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().nth(1), Some("parameter,mean,sd,q025,q975,significant"));
        assert!(text.lines().nth(2).unwrap().starts_with("a,5.5,"));
        assert!(format_table(&summary).contains("5.500"));
    }
}
