//! Ground-truth configurations and full synthetic datasets.

use std::io::Write;
use std::ops::RangeInclusive;

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::Distribution;

use crate::data::{
    build_weight_matrix, design_matrix, AdjacencyRecord, CovariateSpec, DesignMatrix, WeightMatrix,
    ZoneRecord, ZoneTable,
};
use crate::error::{Error, Result};
use crate::model::{population_sd, FitData};
use crate::synth::crashes::simulate_crashes;
use crate::synth::icar_draw::{tau_for_target_sd, IcarSampler};
use crate::synth::lattice::{lattice_zone_id, make_lattice, trimmed_cells};

/// Default true coefficients, keyed by design-matrix column.
pub const DEFAULT_BETA: [(&str, f64); 12] = [
    ("intercept", 2.352),
    ("arterial_length_km", 0.193),
    ("access_density", 0.108),
    ("signal_density", 0.359),
    ("betweenness", 1.705),
    ("road_density", -0.031),
    ("landuse_commercial", 0.136),
    ("landuse_educational", -0.001),
    ("landuse_technical", -0.119),
    ("landuse_residential", 0.184),
    ("landuse_greenspace", 0.022),
    ("landuse_agricultural", 0.075),
];

/// Target population SD of the spatial effects at the default truth.
pub const DEFAULT_SD_PHI: f64 = 0.205;

/// Land-use shares by class, in percent.
pub const DEFAULT_LANDUSE_SHARES: [f64; 7] = [18.3, 22.3, 7.43, 8.42, 20.8, 8.42, 14.4];

#[derive(Debug, Clone, PartialEq)]
pub struct CovariateRange {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
}

impl CovariateRange {
    fn new(name: &str, lo: f64, hi: f64) -> Self {
        Self { name: name.into(), lo, hi }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruthSpec {
    /// True coefficient per design column; must match the default covariate spec.
    pub beta: Vec<(String, f64)>,
    /// CAR precision; `None` picks the τ whose expected sd(φ) is `target_sd_phi`.
    pub tau: Option<f64>,
    pub target_sd_phi: f64,
    pub k: f64,
    /// Uniform ranges for `area_km2` and every numeric covariate.
    pub ranges: Vec<CovariateRange>,
    pub landuse_shares: [f64; 7],
    pub rows: usize,
    pub cols: usize,
    /// Cells removed from the lattice corners.
    pub trim: usize,
    /// Cells kept in the files but given zero arterial length.
    pub zero_arterial: usize,
    pub lanes: RangeInclusive<u32>,
}

impl Default for TruthSpec {
    /// 14×15 lattice minus 8 corner cells = 202 zones, 4 of them without arterials.
    fn default() -> Self {
        Self {
            beta: DEFAULT_BETA.iter().map(|&(n, v)| (n.to_string(), v)).collect(),
            tau: None,
            target_sd_phi: DEFAULT_SD_PHI,
            k: 8.0,
            ranges: vec![
                CovariateRange::new("area_km2", 0.75, 13.42),
                CovariateRange::new("arterial_length_km", 0.34, 7.51),
                CovariateRange::new("access_density", 0.47, 7.73),
                CovariateRange::new("signal_density", 0.543, 4.052),
                CovariateRange::new("road_density", 0.287, 12.627),
                CovariateRange::new("betweenness", 0.0, 0.5),
            ],
            landuse_shares: DEFAULT_LANDUSE_SHARES,
            rows: 14,
            cols: 15,
            trim: 8,
            zero_arterial: 4,
            lanes: 2..=6,
        }
    }
}

impl TruthSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.k.is_finite() && self.k > 0.0) {
            return Err(Error::Config(format!("k must be positive, got {}", self.k)));
        }
        if let Some(t) = self.tau {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::Config(format!("tau must be positive, got {t}")));
            }
        }
        if !(self.target_sd_phi > 0.0) {
            return Err(Error::Config("sd_phi target must be positive".into()));
        }
        for r in &self.ranges {
            if !(r.lo <= r.hi && r.lo >= 0.0) {
                return Err(Error::Config(format!("range for {} is empty or negative", r.name)));
            }
        }
        let cells = self.rows * self.cols;
        if cells < 2 || self.trim + self.zero_arterial + 2 > cells {
            return Err(Error::Config(format!(
                "{}x{} lattice too small for {} trimmed and {} zero-arterial cells",
                self.rows, self.cols, self.trim, self.zero_arterial
            )));
        }
        if self.trim > 0 && (self.rows < 2 || 4 * self.cols.div_ceil(2) < self.trim) {
            return Err(Error::Config("too many trimmed cells for the lattice width".into()));
        }
        if self.lanes.is_empty() || *self.lanes.start() == 0 {
            return Err(Error::Config("lane range must be positive and non-empty".into()));
        }
        Ok(())
    }

    fn range(&self, name: &str) -> Result<(f64, f64)> {
        self.ranges
            .iter()
            .find(|r| r.name == name)
            .map(|r| (r.lo, r.hi))
            .ok_or_else(|| Error::Config(format!("no generator range for `{name}`")))
    }
}

/// A simulated region: every written zone (including zero-arterial ones) plus truth.
#[derive(Debug, Clone)]
pub struct SimulatedDataset {
    pub zones: Vec<ZoneRecord>,
    pub adjacency: Vec<AdjacencyRecord>,
    pub beta: Vec<(String, f64)>,
    pub k: f64,
    pub tau: f64,
    /// Spatial effects of the retained zones, in their file order.
    pub phi: Vec<(String, f64)>,
    pub sd_phi: f64,
    pub warnings: Vec<String>,
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

fn connected_without(
    kept: &[(usize, usize)],
    removed: &[usize],
    edges: &[(usize, usize)],
) -> bool {
    let n = kept.len();
    let live: Vec<bool> = (0..n).map(|i| !removed.contains(&i)).collect();
    let edges: Vec<(usize, usize, f64)> = edges
        .iter()
        .filter(|&&(a, b)| live[a] && live[b])
        .map(|&(a, b)| (a, b, 1.0))
        .collect();
    let w = match WeightMatrix::from_edges(n, edges) {
        Ok(w) => w,
        Err(_) => return false,
    };
    let c = w.components();
    c.count == 1 && (0..n).all(|i| !live[i] || c.labels[i].is_some())
}

pub fn simulate_dataset<R: Rng + ?Sized>(truth: &TruthSpec, rng: &mut R) -> Result<SimulatedDataset> {
    truth.validate()?;
    let (rows, cols) = (truth.rows, truth.cols);
    let trimmed = trimmed_cells(rows, cols, truth.trim);
    let kept: Vec<(usize, usize)> = (0..rows)
        .flat_map(|r| (0..cols).map(move |c| (r, c)))
        .filter(|cell| !trimmed.contains(cell))
        .collect();
    let ids: Vec<String> = kept.iter().map(|&(r, c)| lattice_zone_id(r, c, cols)).collect();
    let adjacency: Vec<AdjacencyRecord> = make_lattice(rows, cols, truth.lanes.clone(), rng)?
        .into_iter()
        .filter(|e| ids.contains(&e.zone_i) && ids.contains(&e.zone_j))
        .collect();
    let pos = |id: &str| ids.iter().position(|x| x == id).unwrap();
    let index_edges: Vec<(usize, usize)> =
        adjacency.iter().map(|e| (pos(&e.zone_i), pos(&e.zone_j))).collect();
    if !connected_without(&kept, &[], &index_edges) {
        return Err(Error::Config("trimmed lattice is disconnected".into()));
    }

    let mut zero = Vec::new();
    for attempt in 0.. {
        if attempt == 1000 {
            return Err(Error::Config("could not place zero-arterial cells without disconnecting the lattice".into()));
        }
        zero = rand::seq::index::sample(rng, kept.len(), truth.zero_arterial).into_vec();
        zero.sort_unstable();
        if connected_without(&kept, &zero, &index_edges) {
            break;
        }
    }

    let landuse = WeightedIndex::new(truth.landuse_shares).map_err(|e| Error::Config(e.to_string()))?;
    let mut zones = Vec::with_capacity(kept.len());
    for (i, id) in ids.iter().enumerate() {
        let mut rec = ZoneRecord {
            zone_id: id.clone(),
            area_km2: uniform(rng, truth.range("area_km2")?),
            crash_count: 0,
            arterial_length_km: uniform(rng, truth.range("arterial_length_km")?),
            access_density: uniform(rng, truth.range("access_density")?),
            signal_density: uniform(rng, truth.range("signal_density")?),
            road_density: uniform(rng, truth.range("road_density")?),
            betweenness: uniform(rng, truth.range("betweenness")?),
            land_use_class: landuse.sample(rng) as u8,
        };
        if zero.binary_search(&i).is_ok() {
            rec.arterial_length_km = 0.0;
            rec.access_density = 0.0;
            rec.signal_density = 0.0;
        }
        zones.push(rec);
    }

    let (table, mut warnings) = ZoneTable::from_records(zones.clone())?;
    let (w, w_warn) = build_weight_matrix::<f64>(&adjacency, &table)?;
    warnings.extend(w_warn);
    let tau = match truth.tau {
        Some(t) => t,
        None => tau_for_target_sd(&w, truth.target_sd_phi)?,
    };
    let (sampler, s_warn) = IcarSampler::new(&w)?;
    warnings.extend(s_warn);
    let phi = sampler.draw(tau, rng)?;

    let x: DesignMatrix<f64> = design_matrix(&table, &CovariateSpec::default())?;
    let beta = aligned_beta(&truth.beta, x.names())?;
    let y = simulate_crashes(&x, &beta, &phi, truth.k, rng)?;
    for (rec, &count) in table.records().iter().zip(&y) {
        let slot = zones.iter_mut().find(|z| z.zone_id == rec.zone_id).unwrap();
        slot.crash_count = count;
    }

    Ok(SimulatedDataset {
        zones,
        adjacency,
        beta: x.names().iter().cloned().zip(beta).collect(),
        k: truth.k,
        tau,
        sd_phi: population_sd(&phi),
        phi: table.ids().map(String::from).zip(phi).collect(),
        warnings,
    })
}

fn aligned_beta(beta: &[(String, f64)], columns: &[String]) -> Result<Vec<f64>> {
    if beta.len() != columns.len() {
        return Err(Error::Config(format!(
            "{} true coefficients for {} design columns",
            beta.len(),
            columns.len()
        )));
    }
    columns
        .iter()
        .map(|c| {
            beta.iter()
                .find(|(n, _)| n == c)
                .map(|&(_, v)| v)
                .ok_or_else(|| Error::Config(format!("no true coefficient for `{c}`")))
        })
        .collect()
}

/// Writes the `parameter,value` truth file.
pub fn write_truth<W: Write>(mut out: W, data: &SimulatedDataset, header: &[String]) -> Result<()> {
    let io = |e| Error::io("<truth>", e);
    for line in header {
        writeln!(out, "# {line}").map_err(io)?;
    }
    writeln!(out, "parameter,value").map_err(io)?;
    for (name, v) in &data.beta {
        writeln!(out, "{name},{v}").map_err(io)?;
    }
    writeln!(out, "k,{}", data.k).map_err(io)?;
    writeln!(out, "tau,{}", data.tau).map_err(io)?;
    for (id, v) in &data.phi {
        writeln!(out, "phi[{id}],{v}").map_err(io)?;
    }
    writeln!(out, "sd_phi,{}", data.sd_phi).map_err(io)?;
    Ok(())
}

/// Fixed 12-zone instance on a 3×4 lattice used to check the sampler against quadrature.
pub fn reference_zones() -> (Vec<ZoneRecord>, Vec<AdjacencyRecord>) {
    const ACCESS: [f64; 12] = [0.5, 1.2, 2.0, 2.8, 3.5, 4.1, 4.9, 5.6, 6.3, 7.0, 1.7, 3.0];
    const CRASHES: [u64; 12] = [5, 14, 9, 30, 12, 41, 20, 55, 38, 88, 7, 16];
    const LANES: [u32; 17] = [4, 6, 2, 4, 6, 4, 8, 2, 4, 6, 4, 2, 6, 4, 4, 2, 6];
    let (rows, cols) = (3, 4);
    let zones = (0..12)
        .map(|i| ZoneRecord {
            zone_id: lattice_zone_id(i / cols, i % cols, cols),
            area_km2: 1.0 + 0.5 * i as f64,
            crash_count: CRASHES[i],
            arterial_length_km: 1.0 + 0.25 * (i % 5) as f64,
            access_density: ACCESS[i],
            signal_density: 0.6 + 0.3 * (i % 4) as f64,
            road_density: 2.0 + 0.7 * (i % 3) as f64,
            betweenness: 0.05 * (i % 6) as f64,
            land_use_class: (i % 7) as u8,
        })
        .collect();
    let mut lanes = LANES.iter();
    let mut adjacency = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let here = lattice_zone_id(r, c, cols);
            if c + 1 < cols {
                adjacency.push(AdjacencyRecord::new(here.clone(), lattice_zone_id(r, c + 1, cols), *lanes.next().unwrap()));
            }
            if r + 1 < rows {
                adjacency.push(AdjacencyRecord::new(here, lattice_zone_id(r + 1, c, cols), *lanes.next().unwrap()));
            }
        }
    }
    (zones, adjacency)
}

/// The reference instance as model input: intercept plus access density.
pub fn reference_fit_data() -> Result<FitData<f64>> {
    let (zones, adjacency) = reference_zones();
    let (table, _) = ZoneTable::from_records(zones)?;
    let (w, _) = build_weight_matrix(&adjacency, &table)?;
    let spec = CovariateSpec {
        covariates: vec!["access_density".into()],
        include_intercept: true,
        landuse_base: None,
    };
    let x = design_matrix(&table, &spec)?;
    FitData::new(table.crash_counts(), x, w, table.ids().map(String::from).collect())
}
