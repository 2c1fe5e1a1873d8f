//! Flat `key = value` run and truth configuration files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::data::{CovariateSpec, LANDUSE_NAMES};
use crate::error::{Error, Result};
use crate::model::PriorSpec;
use crate::sampler::SamplerSpec;
use crate::synth::truth::{CovariateRange, TruthSpec};

/// Parses `key = value` lines; `#` starts a comment. Duplicate keys are an error.
pub fn parse_key_values(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out: Vec<(usize, String, String)> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`, got `{line}`", k + 1)))?;
        let (key, value) = (key.trim().to_string(), value.trim().to_string());
        if key.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", k + 1)));
        }
        if let Some((first, ..)) = out.iter().find(|(_, seen, _)| *seen == key) {
            return Err(Error::Config(format!("line {}: `{key}` already set on line {first}", k + 1)));
        }
        out.push((k + 1, key, value));
    }
    Ok(out)
}

fn read_config_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn parse<V: std::str::FromStr>(key: &str, value: &str) -> Result<V> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{value}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("`{key}`: expected true or false, got `{value}`"))),
    }
}

fn parse_list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

/// Accepts a class name, its code, or `none`.
fn parse_landuse_base(value: &str) -> Result<Option<u8>> {
    if value.eq_ignore_ascii_case("none") {
        return Ok(None);
    }
    if let Some(i) = LANDUSE_NAMES.iter().position(|n| n.eq_ignore_ascii_case(value)) {
        return Ok(Some(i as u8));
    }
    value
        .parse::<u8>()
        .ok()
        .filter(|&c| (c as usize) < LANDUSE_NAMES.len())
        .map(Some)
        .ok_or_else(|| Error::Config(format!("`landuse_base`: unknown class `{value}`")))
}

/// Everything a `fit` run depends on.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub sampler: SamplerSpec,
    pub priors: PriorSpec<f64>,
    pub covariates: CovariateSpec,
    pub chains: usize,
    pub summary_out: PathBuf,
    pub draws_out: PathBuf,
    pub diagnostics_out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            sampler: SamplerSpec::default(),
            priors: PriorSpec::default(),
            covariates: CovariateSpec::default(),
            chains: 1,
            summary_out: "summary.csv".into(),
            draws_out: "draws.csv".into(),
            diagnostics_out: "diagnostics.csv".into(),
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_text(&read_config_text(path)?)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut c = Self::default();
        for (line, key, value) in parse_key_values(text)? {
            c.set(&key, &value)
                .map_err(|e| Error::Config(format!("line {line}: {}", strip_config_prefix(e))))?;
        }
        Ok(c)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let s = &mut self.sampler;
        let p = &mut self.priors;
        match key {
            "iterations" => s.iterations = parse(key, value)?,
            "burn_in" => s.burn_in = parse(key, value)?,
            "thin" => s.thin = parse(key, value)?,
            "seed" => s.seed = parse(key, value)?,
            "target_acceptance" => s.target_acceptance = parse(key, value)?,
            "adapt" => s.adapt = parse_bool(key, value)?,
            "initial_scale" => s.initial_scale = parse(key, value)?,
            "fix_phi_at_zero" => s.fix_phi_at_zero = parse_bool(key, value)?,
            "fix_k_at" => {
                s.fix_k_at = if value.eq_ignore_ascii_case("none") { None } else { Some(parse(key, value)?) }
            }
            "chains" => self.chains = parse(key, value)?,
            "beta_precision" => p.beta_precision = parse(key, value)?,
            "k_shape" => p.k_shape = parse(key, value)?,
            "k_rate" => p.k_rate = parse(key, value)?,
            "tau_shape" => p.tau_shape = parse(key, value)?,
            "tau_rate" => p.tau_rate = parse(key, value)?,
            "covariates" => self.covariates.covariates = parse_list(value),
            "include_intercept" => self.covariates.include_intercept = parse_bool(key, value)?,
            "landuse_base" => self.covariates.landuse_base = parse_landuse_base(value)?,
            "summary_out" => self.summary_out = value.into(),
            "draws_out" => self.draws_out = value.into(),
            "diagnostics_out" => self.diagnostics_out = value.into(),
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.sampler.validate()?;
        self.priors.validate()?;
        self.covariates.validate()?;
        if self.chains == 0 {
            return Err(Error::Config("chains must be at least 1".into()));
        }
        Ok(())
    }

    /// Canonical `key=value` rendering; output paths are excluded so the digest
    /// identifies the statistical run, not where it was written.
    pub fn canonical(&self) -> String {
        let s = &self.sampler;
        let p = &self.priors;
        let mut m = BTreeMap::new();
        m.insert("iterations", s.iterations.to_string());
        m.insert("burn_in", s.burn_in.to_string());
        m.insert("thin", s.thin.to_string());
        m.insert("seed", s.seed.to_string());
        m.insert("target_acceptance", s.target_acceptance.to_string());
        m.insert("adapt", s.adapt.to_string());
        m.insert("initial_scale", s.initial_scale.to_string());
        m.insert("fix_phi_at_zero", s.fix_phi_at_zero.to_string());
        m.insert("fix_k_at", s.fix_k_at.map_or("none".into(), |k| k.to_string()));
        m.insert("chains", self.chains.to_string());
        m.insert("beta_precision", p.beta_precision.to_string());
        m.insert("k_shape", p.k_shape.to_string());
        m.insert("k_rate", p.k_rate.to_string());
        m.insert("tau_shape", p.tau_shape.to_string());
        m.insert("tau_rate", p.tau_rate.to_string());
        m.insert("covariates", self.covariates.covariates.join(","));
        m.insert("include_intercept", self.covariates.include_intercept.to_string());
        m.insert(
            "landuse_base",
            self.covariates
                .landuse_base
                .map_or("none".into(), |b| LANDUSE_NAMES[b as usize].to_string()),
        );
        render(&m)
    }

    pub fn digest(&self) -> String {
        digest(&self.canonical())
    }
}

fn render(m: &BTreeMap<&str, String>) -> String {
    let mut out = String::new();
    for (k, v) in m {
        let _ = writeln!(out, "{k}={v}");
    }
    out
}

/// First 16 hex digits of the SHA-256 of `canonical`.
pub fn digest(canonical: &str) -> String {
    let full = hex::encode(Sha256::digest(canonical.as_bytes()));
    full[..16].to_string()
}

fn strip_config_prefix(e: Error) -> String {
    match e {
        Error::Config(m) => m,
        other => other.to_string(),
    }
}

/// Ground truth for `simulate`. Keys: `k`, `tau`, `sd_phi`, `rows`, `cols`, `trim`,
/// `zero_arterial`, `lanes_min`, `lanes_max`, `landuse_shares`, `seed`,
/// `beta.<column>` and `range.<variable> = lo, hi`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthConfig {
    pub truth: TruthSpec,
    pub seed: u64,
    /// Which lattice keys were set explicitly (so flag defaults do not clobber them).
    pub explicit: Vec<String>,
}

impl Default for TruthConfig {
    fn default() -> Self {
        Self { truth: TruthSpec::default(), seed: 1, explicit: Vec::new() }
    }
}

impl TruthConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_text(&read_config_text(path)?)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut c = Self::default();
        for (line, key, value) in parse_key_values(text)? {
            c.set(&key, &value)
                .map_err(|e| Error::Config(format!("line {line}: {}", strip_config_prefix(e))))?;
        }
        Ok(c)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let t = &mut self.truth;
        match key {
            "k" => t.k = parse(key, value)?,
            "tau" => t.tau = if value.eq_ignore_ascii_case("auto") { None } else { Some(parse(key, value)?) },
            "sd_phi" => t.target_sd_phi = parse(key, value)?,
            "rows" => t.rows = parse(key, value)?,
            "cols" => t.cols = parse(key, value)?,
            "trim" => t.trim = parse(key, value)?,
            "zero_arterial" => t.zero_arterial = parse(key, value)?,
            "lanes_min" => t.lanes = parse(key, value)?..=*t.lanes.end(),
            "lanes_max" => t.lanes = *t.lanes.start()..=parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "landuse_shares" => {
                let v = parse_list(value)
                    .iter()
                    .map(|s| parse::<f64>(key, s))
                    .collect::<Result<Vec<_>>>()?;
                t.landuse_shares = v
                    .try_into()
                    .map_err(|_| Error::Config("`landuse_shares` needs 7 values".into()))?;
            }
            _ => {
                if let Some(col) = key.strip_prefix("beta.") {
                    let v: f64 = parse(key, value)?;
                    match t.beta.iter_mut().find(|(n, _)| n == col) {
                        Some(slot) => slot.1 = v,
                        None => return Err(Error::Config(format!("unknown key `{key}`"))),
                    }
                } else if let Some(var) = key.strip_prefix("range.") {
                    let bounds = parse_list(value);
                    let [lo, hi] = bounds.as_slice() else {
                        return Err(Error::Config(format!("`{key}`: expected `lo, hi`")));
                    };
                    let r = CovariateRange { name: var.to_string(), lo: parse(key, lo)?, hi: parse(key, hi)? };
                    match t.ranges.iter_mut().find(|r| r.name == var) {
                        Some(slot) => *slot = r,
                        None => return Err(Error::Config(format!("unknown key `{key}`"))),
                    }
                } else {
                    return Err(Error::Config(format!("unknown key `{key}`")));
                }
            }
        }
        if !self.explicit.iter().any(|k| k == key) {
            self.explicit.push(key.to_string());
        }
        Ok(())
    }

    pub fn is_explicit(&self, key: &str) -> bool {
        self.explicit.iter().any(|k| k == key)
    }

    pub fn canonical(&self) -> String {
        let t = &self.truth;
        let mut m = BTreeMap::new();
        for (name, v) in &t.beta {
            m.insert(name.as_str(), v.to_string());
        }
        let mut out = render(&m);
        let _ = writeln!(out, "k={}", t.k);
        let _ = writeln!(out, "tau={}", t.tau.map_or("auto".into(), |v| v.to_string()));
        let _ = writeln!(out, "sd_phi={}", t.target_sd_phi);
        for r in &t.ranges {
            let _ = writeln!(out, "range.{}={},{}", r.name, r.lo, r.hi);
        }
        let shares: Vec<String> = t.landuse_shares.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "landuse_shares={}", shares.join(","));
        let _ = writeln!(
            out,
            "lattice={}x{} trim={} zero_arterial={} lanes={}..={}",
            t.rows,
            t.cols,
            t.trim,
            t.zero_arterial,
            t.lanes.start(),
            t.lanes.end()
        );
        let _ = writeln!(out, "seed={}", self.seed);
        out
    }

    pub fn digest(&self) -> String {
        digest(&self.canonical())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_blank_lines_and_spacing() {
        let c = RunConfig::from_text("# run\n\niterations = 500  # short\nburn_in=100\nlanduse_base = none\n")
            .unwrap();
        assert_eq!(c.sampler.iterations, 500);
        assert_eq!(c.sampler.burn_in, 100);
        assert_eq!(c.covariates.landuse_base, None);
    }

    #[test]
    fn unknown_and_repeated_keys_rejected() {
        let e = RunConfig::from_text("iteration = 5\n").unwrap_err().to_string();
        assert!(e.contains("line 1") && e.contains("unknown key `iteration`"), "{e}");
        let e = RunConfig::from_text("seed = 1\nseed = 2\n").unwrap_err().to_string();
        assert!(e.contains("line 2"), "{e}");
        assert!(RunConfig::from_text("seed\n").is_err());
    }

    #[test]
    fn landuse_base_by_name_or_code() {
        assert_eq!(parse_landuse_base("Residential").unwrap(), Some(4));
        assert_eq!(parse_landuse_base("6").unwrap(), Some(6));
        assert!(parse_landuse_base("7").is_err());
        assert!(parse_landuse_base("forest").is_err());
    }

    #[test]
    fn digest_tracks_statistical_settings_only() {
        let a = RunConfig::default();
        let mut b = a.clone();
        b.summary_out = "elsewhere.csv".into();
        assert_eq!(a.digest(), b.digest());
        b.sampler.seed = 2;
        assert_ne!(a.digest(), b.digest());
        assert_eq!(a.digest().len(), 16);
    }

    #[test]
    fn truth_keys() {
        let t = TruthConfig::from_text("k = 3\nbeta.access_density = 0.5\nrange.betweenness = 0, 1\nrows = 4\n")
            .unwrap();
        assert_eq!(t.truth.k, 3.0);
        assert!(t.truth.beta.contains(&("access_density".to_string(), 0.5)));
        assert!(t.is_explicit("rows") && !t.is_explicit("cols"));
        assert!(TruthConfig::from_text("beta.nope = 1\n").is_err());
        assert!(TruthConfig::from_text("range.area_km2 = 1\n").is_err());
        assert!(TruthConfig::from_text("landuse_shares = 1,2\n").is_err());
    }
}
