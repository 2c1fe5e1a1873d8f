//! Descriptive statistics of a zone table.

use std::io::Write;

use crate::data::zones::{ZoneTable, LANDUSE_CLASSES, LANDUSE_NAMES};
use crate::error::{Error, Result};

/// Variables reported, in schema order.
pub const STATS_VARIABLES: [&str; 7] = [
    "area_km2",
    "crash",
    "arterial_length_km",
    "access_density",
    "signal_density",
    "road_density",
    "betweenness",
];

#[derive(Debug, Clone, PartialEq)]
pub struct VariableStats {
    pub variable: String,
    pub n: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// Sample SD (n − 1 denominator); reported as 0 when `n == 1`.
    pub sd: f64,
}

impl VariableStats {
    pub fn sd_undefined(&self) -> bool {
        self.n < 2
    }
}

fn stats_of(variable: &str, values: &[f64]) -> VariableStats {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sd = if n < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    };
    VariableStats {
        variable: variable.to_string(),
        n,
        mean,
        min,
        max,
        sd,
    }
}

pub fn descriptive_stats(table: &ZoneTable) -> Result<Vec<VariableStats>> {
    if table.is_empty() {
        return Err(Error::Summary("descriptive statistics need at least one zone".into()));
    }
    Ok(STATS_VARIABLES
        .iter()
        .map(|&name| {
            let values: Vec<f64> = table
                .records()
                .iter()
                .map(|r| match name {
                    "crash" => r.crash_count as f64,
                    other => r.numeric(other).expect("schema variable"),
                })
                .collect();
            stats_of(name, &values)
        })
        .collect())
}

/// Share of zones in each land-use class.
pub fn landuse_proportions(table: &ZoneTable) -> Vec<(&'static str, f64)> {
    let mut counts = [0usize; LANDUSE_CLASSES as usize];
    for r in table.records() {
        counts[r.land_use_class as usize] += 1;
    }
    let n = table.len().max(1) as f64;
    LANDUSE_NAMES
        .iter()
        .zip(counts)
        .map(|(&name, c)| (name, c as f64 / n))
        .collect()
}

pub fn write_stats<W: Write>(mut out: W, stats: &[VariableStats], header_comment: &[String]) -> Result<()> {
    let io = |e| Error::io("<stats>", e);
    for line in header_comment {
        writeln!(out, "# {line}").map_err(io)?;
    }
    if stats.first().is_some_and(|s| s.sd_undefined()) {
        writeln!(out, "# n=1: sd reported as 0").map_err(io)?;
    }
    writeln!(out, "variable,mean,min,max,sd").map_err(io)?;
    for s in stats {
        writeln!(out, "{},{},{},{},{}", s.variable, s.mean, s.min, s.max, s.sd).map_err(io)?;
    }
    Ok(())
}
