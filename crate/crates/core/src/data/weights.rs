//! Lane-count spatial weights between adjacent zones.

use std::collections::{BTreeMap, VecDeque};
use std::io::{Read, Write};

use crate::data::zones::ZoneTable;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// One line of the adjacency file: zones `a` and `b` share arterials with `lanes` lanes in total.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyRecord {
    pub zone_i: String,
    pub zone_j: String,
    pub lanes: u32,
}

impl AdjacencyRecord {
    pub fn new(zone_i: impl Into<String>, zone_j: impl Into<String>, lanes: u32) -> Self {
        Self {
            zone_i: zone_i.into(),
            zone_j: zone_j.into(),
            lanes,
        }
    }
}

/// Sparse symmetric weight matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix<T> {
    n: usize,
    neighbors: Vec<Vec<(usize, T)>>,
    row_sums: Vec<T>,
    edges: Vec<(usize, usize, T)>,
}

/// Connected components of the non-island subgraph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    /// Component label of each zone, `None` for islands.
    pub labels: Vec<Option<usize>>,
    pub count: usize,
}

impl<T: Real> WeightMatrix<T> {
    /// Builds from undirected edges `(i, j, w)`. Repeated pairs must agree on the weight.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize, T)>) -> Result<Self> {
        let mut unique: BTreeMap<(usize, usize), T> = BTreeMap::new();
        for (i, j, w) in edges {
            if i >= n || j >= n {
                return Err(Error::Shape(format!("edge ({i}, {j}) outside dimension {n}")));
            }
            if i == j {
                return Err(Error::Domain(format!("self-loop at zone {i}")));
            }
            if !(w.is_finite() && w > T::zero()) {
                return Err(Error::Domain(format!("weight on ({i}, {j}) must be positive, got {w}")));
            }
            let key = (i.min(j), i.max(j));
            match unique.get(&key) {
                Some(&prev) if prev != w => {
                    return Err(Error::Domain(format!(
                        "edge ({i}, {j}) given twice with weights {prev} and {w}"
                    )))
                }
                _ => {
                    unique.insert(key, w);
                }
            }
        }
        let mut neighbors = vec![Vec::new(); n];
        let mut row_sums = vec![T::zero(); n];
        let mut list = Vec::with_capacity(unique.len());
        for ((i, j), w) in unique {
            neighbors[i].push((j, w));
            neighbors[j].push((i, w));
            list.push((i, j, w));
        }
        for (i, nb) in neighbors.iter_mut().enumerate() {
            nb.sort_by_key(|&(j, _)| j);
            row_sums[i] = nb.iter().map(|&(_, w)| w).sum();
        }
        Ok(Self {
            n,
            neighbors,
            row_sums,
            edges: list,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Neighbours of zone `i` with their weights, sorted by index.
    pub fn neighbors(&self, i: usize) -> &[(usize, T)] {
        &self.neighbors[i]
    }

    /// w_i+ for zone `i`.
    pub fn row_sum(&self, i: usize) -> T {
        self.row_sums[i]
    }

    pub fn row_sums(&self) -> &[T] {
        &self.row_sums
    }

    /// Each undirected edge once, with `i < j`.
    pub fn edges(&self) -> &[(usize, usize, T)] {
        &self.edges
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.neighbors[i]
            .binary_search_by_key(&j, |&(k, _)| k)
            .map_or(T::zero(), |pos| self.neighbors[i][pos].1)
    }

    pub fn is_island(&self, i: usize) -> bool {
        self.row_sums[i] == T::zero()
    }

    pub fn islands(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| self.is_island(i)).collect()
    }

    pub fn components(&self) -> Components {
        let mut labels = vec![None; self.n];
        let mut count = 0;
        let mut queue = VecDeque::new();
        for start in 0..self.n {
            if labels[start].is_some() || self.is_island(start) {
                continue;
            }
            labels[start] = Some(count);
            queue.push_back(start);
            while let Some(i) = queue.pop_front() {
                for &(j, _) in &self.neighbors[i] {
                    if labels[j].is_none() {
                        labels[j] = Some(count);
                        queue.push_back(j);
                    }
                }
            }
            count += 1;
        }
        Components { labels, count }
    }

    /// Dense row-major copy, mostly for tests and small oracles.
    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut m = vec![vec![T::zero(); self.n]; self.n];
        for &(i, j, w) in &self.edges {
            m[i][j] = w;
            m[j][i] = w;
        }
        m
    }

    /// Relabels zones: zone `i` of the result is zone `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let mut inverse = vec![usize::MAX; self.n];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        Self::from_edges(
            self.n,
            self.edges.iter().map(|&(i, j, w)| (inverse[i], inverse[j], w)),
        )
    }
}

/// Builds W from adjacency records against a zone table.
///
/// Records that touch zones excluded at load time (no arterial) are skipped
/// with a warning; ids that were never in the table are a reference error.
/// Returns warnings for skipped records and for islands.
pub fn build_weight_matrix<T: Real>(
    records: &[AdjacencyRecord],
    table: &ZoneTable,
) -> Result<(WeightMatrix<T>, Vec<String>)> {
    let mut warnings = Vec::new();
    let mut seen: BTreeMap<(usize, usize), (usize, u32)> = BTreeMap::new();
    let mut skipped = 0usize;
    for (k, rec) in records.iter().enumerate() {
        let row = k + 2; // header is line 1
        if rec.zone_i == rec.zone_j {
            return Err(Error::Validation {
                row,
                message: format!("self-pair ({}, {})", rec.zone_i, rec.zone_j),
            });
        }
        if rec.lanes == 0 {
            return Err(Error::Validation {
                row,
                message: "lanes must be a positive integer".into(),
            });
        }
        let resolve = |id: &str| -> Result<Option<usize>> {
            match table.index_of(id) {
                Some(i) => Ok(Some(i)),
                None if table.is_excluded(id) => Ok(None),
                None => Err(Error::Reference {
                    row,
                    id: id.to_string(),
                }),
            }
        };
        let (a, b) = match (resolve(&rec.zone_i)?, resolve(&rec.zone_j)?) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                skipped += 1;
                continue;
            }
        };
        let key = (a.min(b), a.max(b));
        match seen.get(&key) {
            Some(&(first_row, first_lanes)) if first_lanes != rec.lanes => {
                return Err(Error::Conflict {
                    a: rec.zone_i.clone(),
                    b: rec.zone_j.clone(),
                    first_row,
                    first_lanes,
                    second_row: row,
                    second_lanes: rec.lanes,
                })
            }
            Some(_) => {}
            None => {
                seen.insert(key, (row, rec.lanes));
            }
        }
    }
    if skipped > 0 {
        warnings.push(format!(
            "{skipped} adjacency records skipped (they reference excluded zones)"
        ));
    }
    let w = WeightMatrix::from_edges(
        table.len(),
        seen.iter()
            .map(|(&(i, j), &(_, lanes))| (i, j, T::from_u32(lanes).unwrap())),
    )?;
    for i in w.islands() {
        warnings.push(format!(
            "zone `{}` has no neighbours (island); its spatial effect is fixed at 0",
            table.get(i).zone_id
        ));
    }
    Ok((w, warnings))
}

/// Reads `zone_i,zone_j,lanes` records. `#` lines are comments.
pub fn read_adjacency<R: Read>(source: R) -> Result<Vec<AdjacencyRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(source);
    let header = reader.headers()?.clone();
    let expected = ["zone_i", "zone_j", "lanes"];
    let mut position = [usize::MAX; 3];
    for (col, name) in header.iter().enumerate() {
        match expected.iter().position(|c| *c == name) {
            Some(k) => position[k] = col,
            None => return Err(Error::Schema(format!("unknown adjacency column `{name}`"))),
        }
    }
    if let Some(k) = position.iter().position(|&p| p == usize::MAX) {
        return Err(Error::Schema(format!("missing adjacency column `{}`", expected[k])));
    }
    let mut out = Vec::new();
    for result in reader.records() {
        let record = result?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        let cell = |k: usize| record.get(position[k]).unwrap_or("");
        let lanes = cell(2);
        let lanes = match lanes.parse::<u32>() {
            Ok(l) if l > 0 => l,
            _ => {
                return Err(Error::Validation {
                    row,
                    message: format!("lanes must be a positive integer, got `{lanes}`"),
                })
            }
        };
        out.push(AdjacencyRecord::new(cell(0), cell(1), lanes));
    }
    Ok(out)
}

pub fn write_adjacency<W: Write>(
    out: W,
    records: &[AdjacencyRecord],
    header_comment: &[String],
) -> Result<()> {
    let mut out = out;
    for line in header_comment {
        writeln!(out, "# {line}").map_err(|e| Error::io("<adjacency>", e))?;
    }
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["zone_i", "zone_j", "lanes"])?;
    for r in records {
        writer.write_record([r.zone_i.as_str(), r.zone_j.as_str(), &r.lanes.to_string()])?;
    }
    writer.flush().map_err(|e| Error::io("<adjacency>", e))?;
    Ok(())
}
