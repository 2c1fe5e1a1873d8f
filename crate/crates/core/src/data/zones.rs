//! Zone table ingestion and validation.

use std::collections::HashMap;
use std::io::{Read, Write};

use crate::error::{Error, Result};

/// Land-use classes, in the coding used by the zone file.
pub const LANDUSE_NAMES: [&str; 7] = [
    "industrial",
    "commercial",
    "educational",
    "technical",
    "residential",
    "greenspace",
    "agricultural",
];

pub const LANDUSE_CLASSES: u8 = 7;

/// Zone file columns, in canonical order.
pub const ZONE_COLUMNS: [&str; 9] = [
    "zone_id",
    "area_km2",
    "crash",
    "arterial_length_km",
    "access_density",
    "signal_density",
    "road_density",
    "betweenness",
    "landuse",
];

/// One traffic analysis zone.
#[derive(Debug, Clone, PartialEq)]
pub struct ZoneRecord {
    pub zone_id: String,
    pub area_km2: f64,
    /// Crashes per year on arterials inside the zone.
    pub crash_count: u64,
    pub arterial_length_km: f64,
    /// Accesses per km of arterial.
    pub access_density: f64,
    /// Signalised intersections per km of arterial.
    pub signal_density: f64,
    /// km of road per km².
    pub road_density: f64,
    pub betweenness: f64,
    pub land_use_class: u8,
}

impl ZoneRecord {
    /// Numeric field by its column name. `crash` is not a covariate and is excluded.
    pub fn numeric(&self, name: &str) -> Option<f64> {
        Some(match name {
            "area_km2" => self.area_km2,
            "arterial_length_km" => self.arterial_length_km,
            "access_density" => self.access_density,
            "signal_density" => self.signal_density,
            "road_density" => self.road_density,
            "betweenness" => self.betweenness,
            _ => return None,
        })
    }
}

impl ZoneRecord {
    pub fn is_numeric_name(name: &str) -> bool {
        matches!(
            name,
            "area_km2"
                | "arterial_length_km"
                | "access_density"
                | "signal_density"
                | "road_density"
                | "betweenness"
        )
    }
}

/// Validated zones with unique ids. Every retained zone has a positive arterial length.
#[derive(Debug, Clone, Default)]
pub struct ZoneTable {
    records: Vec<ZoneRecord>,
    index: HashMap<String, usize>,
    excluded: Vec<String>,
}

impl ZoneTable {
    /// Builds a table from already-typed records, applying the same
    /// zero-arterial exclusion and uniqueness rules as the file reader.
    pub fn from_records(records: Vec<ZoneRecord>) -> Result<(Self, Vec<String>)> {
        let mut table = ZoneTable::default();
        for (i, rec) in records.into_iter().enumerate() {
            validate_record(&rec, i + 1)?;
            table.push(rec, i + 1)?;
        }
        let warnings = table.exclusion_warnings();
        Ok((table, warnings))
    }

    fn push(&mut self, rec: ZoneRecord, row: usize) -> Result<()> {
        if self.index.contains_key(&rec.zone_id) || self.excluded.contains(&rec.zone_id) {
            return Err(Error::Validation {
                row,
                message: format!("duplicate zone_id `{}`", rec.zone_id),
            });
        }
        if rec.arterial_length_km == 0.0 {
            self.excluded.push(rec.zone_id);
            return Ok(());
        }
        self.index.insert(rec.zone_id.clone(), self.records.len());
        self.records.push(rec);
        Ok(())
    }

    fn exclusion_warnings(&self) -> Vec<String> {
        if self.excluded.is_empty() {
            Vec::new()
        } else {
            vec![format!(
                "{} zones excluded (no arterial length): {}",
                self.excluded.len(),
                self.excluded.join(", ")
            )]
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[ZoneRecord] {
        &self.records
    }

    pub fn get(&self, i: usize) -> &ZoneRecord {
        &self.records[i]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Ids dropped at load time because the zone has no arterial.
    pub fn excluded(&self) -> &[String] {
        &self.excluded
    }

    pub fn is_excluded(&self, id: &str) -> bool {
        self.excluded.iter().any(|e| e == id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.records.iter().map(|r| r.zone_id.as_str())
    }

    pub fn crash_counts(&self) -> Vec<u64> {
        self.records.iter().map(|r| r.crash_count).collect()
    }
}

fn validate_record(rec: &ZoneRecord, row: usize) -> Result<()> {
    let bad = |message: String| Err(Error::Validation { row, message });
    if rec.zone_id.is_empty() {
        return bad("empty zone_id".into());
    }
    for (name, v) in [
        ("area_km2", rec.area_km2),
        ("arterial_length_km", rec.arterial_length_km),
        ("access_density", rec.access_density),
        ("signal_density", rec.signal_density),
        ("road_density", rec.road_density),
        ("betweenness", rec.betweenness),
    ] {
        if !v.is_finite() || v < 0.0 {
            return bad(format!("{name} must be a finite non-negative number, got {v}"));
        }
    }
    if rec.land_use_class >= LANDUSE_CLASSES {
        return bad(format!("landuse must be in 0..=6, got {}", rec.land_use_class));
    }
    Ok(())
}

/// Reads a comma-delimited zone file.
///
/// Columns may appear in any order but must be exactly [`ZONE_COLUMNS`].
/// Lines starting with `#` are comments. Zones with zero arterial length are
/// dropped and reported in the returned warnings.
pub fn read_zone_table<R: Read>(source: R) -> Result<(ZoneTable, Vec<String>)> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(source);
    let header = reader.headers()?.clone();
    let mut position = [usize::MAX; 9];
    for (col, name) in header.iter().enumerate() {
        match ZONE_COLUMNS.iter().position(|c| *c == name) {
            Some(k) if position[k] != usize::MAX => {
                return Err(Error::Schema(format!("duplicate column `{name}`")))
            }
            Some(k) => position[k] = col,
            None => return Err(Error::Schema(format!("unknown column `{name}`"))),
        }
    }
    if let Some(k) = position.iter().position(|&p| p == usize::MAX) {
        return Err(Error::Schema(format!("missing column `{}`", ZONE_COLUMNS[k])));
    }

    let mut table = ZoneTable::default();
    for result in reader.records() {
        let record = result?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        let cell = |k: usize| record.get(position[k]).unwrap_or("");
        let real = |k: usize| -> Result<f64> {
            let s = cell(k);
            match s.parse::<f64>() {
                Ok(v) if v.is_finite() && v >= 0.0 => Ok(v),
                Ok(v) => Err(Error::Validation {
                    row,
                    message: format!("{} must be non-negative and finite, got {v}", ZONE_COLUMNS[k]),
                }),
                Err(_) => Err(Error::Validation {
                    row,
                    message: format!("{}: `{s}` is not a number", ZONE_COLUMNS[k]),
                }),
            }
        };
        let crash = cell(2);
        let crash_count = if !crash.is_empty() && crash.bytes().all(|b| b.is_ascii_digit()) {
            crash.parse::<u64>().map_err(|_| Error::Validation {
                row,
                message: format!("crash `{crash}` out of range"),
            })?
        } else {
            return Err(Error::Validation {
                row,
                message: format!("crash must be a non-negative integer, got `{crash}`"),
            });
        };
        let landuse = cell(8);
        let land_use_class = match landuse.parse::<u8>() {
            Ok(c) if c < LANDUSE_CLASSES => c,
            _ => {
                return Err(Error::Validation {
                    row,
                    message: format!("landuse must be an integer in 0..=6, got `{landuse}`"),
                })
            }
        };
        let rec = ZoneRecord {
            zone_id: cell(0).to_string(),
            area_km2: real(1)?,
            crash_count,
            arterial_length_km: real(3)?,
            access_density: real(4)?,
            signal_density: real(5)?,
            road_density: real(6)?,
            betweenness: real(7)?,
            land_use_class,
        };
        validate_record(&rec, row)?;
        table.push(rec, row)?;
    }
    let warnings = table.exclusion_warnings();
    Ok((table, warnings))
}

/// Writes zones in canonical column order. Values use the shortest
/// representation that parses back to the identical `f64`.
pub fn write_zone_table<W: Write>(
    out: W,
    records: &[ZoneRecord],
    header_comment: &[String],
) -> Result<()> {
    let mut out = out;
    for line in header_comment {
        writeln!(out, "# {line}").map_err(|e| Error::io("<zones>", e))?;
    }
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(ZONE_COLUMNS)?;
    for r in records {
        writer.write_record([
            r.zone_id.clone(),
            r.area_km2.to_string(),
            r.crash_count.to_string(),
            r.arterial_length_km.to_string(),
            r.access_density.to_string(),
            r.signal_density.to_string(),
            r.road_density.to_string(),
            r.betweenness.to_string(),
            r.land_use_class.to_string(),
        ])?;
    }
    writer.flush().map_err(|e| Error::io("<zones>", e))?;
    Ok(())
}
