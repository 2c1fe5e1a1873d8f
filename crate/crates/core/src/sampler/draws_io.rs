//! Draws files: `#` header comments, a row of parameter names, one draw per row.
//! Values carry 17 significant digits so an `f64` survives the round trip exactly.

use std::io::{BufRead, BufReader, Read, Write};

use crate::error::{Error, Result};
use crate::sampler::chain::ChainDraws;
use crate::scalar::Real;

pub fn write_draws<T: Real, W: Write>(mut out: W, draws: &ChainDraws<T>, header: &[String]) -> Result<()> {
    let io = |e| Error::io("<draws>", e);
    for line in header {
        writeln!(out, "# {line}").map_err(io)?;
    }
    writeln!(out, "{}", draws.names.join(",")).map_err(io)?;
    let mut line = String::new();
    for row in &draws.rows {
        line.clear();
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&format!("{:.16e}", v.to_f64_lossy()));
        }
        writeln!(out, "{line}").map_err(io)?;
    }
    Ok(())
}

/// Parses a draws file; returns the draws and the header comment lines (without `# `).
pub fn read_draws<T: Real, R: Read>(source: R) -> Result<(ChainDraws<T>, Vec<String>)> {
    let reader = BufReader::new(source);
    let mut header = Vec::new();
    let mut names: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<draws>", e))?;
        let row = k + 1;
        if let Some(comment) = line.strip_prefix('#') {
            header.push(comment.strip_prefix(' ').unwrap_or(comment).to_string());
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        match &names {
            None => names = Some(line.split(',').map(|s| s.trim().to_string()).collect()),
            Some(cols) => {
                let values = line
                    .split(',')
                    .map(|cell| {
                        cell.trim()
                            .parse::<f64>()
                            .ok()
                            .and_then(T::from_f64)
                            .ok_or_else(|| Error::Validation {
                                row,
                                message: format!("`{cell}` is not a number"),
                            })
                    })
                    .collect::<Result<Vec<T>>>()?;
                if values.len() != cols.len() {
                    return Err(Error::Validation {
                        row,
                        message: format!("{} values for {} columns", values.len(), cols.len()),
                    });
                }
                rows.push(values);
            }
        }
    }
    let names = names.ok_or_else(|| Error::Schema("draws file has no header row".into()))?;
    Ok((
        ChainDraws {
            names,
            rows,
            chains: Vec::new(),
        },
        header,
    ))
}
