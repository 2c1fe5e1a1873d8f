use std::ops::RangeInclusive;

use rand::Rng;

use crate::data::AdjacencyRecord;
use crate::error::{Error, Result};

pub fn lattice_zone_id(row: usize, col: usize, cols: usize) -> String {
    format!("TAZ{:04}", row * cols + col + 1)
}

/// Rook-adjacency grid; every edge gets a lane count drawn uniformly from `lanes`.
pub fn make_lattice<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    lanes: RangeInclusive<u32>,
    rng: &mut R,
) -> Result<Vec<AdjacencyRecord>> {
    if rows * cols < 2 {
        return Err(Error::Config(format!("a {rows}x{cols} lattice has fewer than 2 cells")));
    }
    if lanes.is_empty() || *lanes.start() == 0 {
        return Err(Error::Config(format!("lane range {lanes:?} must be non-empty and positive")));
    }
    let mut edges = Vec::with_capacity(2 * rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let here = lattice_zone_id(r, c, cols);
            if c + 1 < cols {
                edges.push(AdjacencyRecord::new(
                    here.clone(),
                    lattice_zone_id(r, c + 1, cols),
                    rng.random_range(lanes.clone()),
                ));
            }
            if r + 1 < rows {
                edges.push(AdjacencyRecord::new(
                    here,
                    lattice_zone_id(r + 1, c, cols),
                    rng.random_range(lanes.clone()),
                ));
            }
        }
    }
    Ok(edges)
}

/// Cells removed from the corners, walking inward along the first and last rows.
pub fn trimmed_cells(rows: usize, cols: usize, trim: usize) -> Vec<(usize, usize)> {
    (0..trim)
        .map(|t| {
            let depth = t / 4;
            match t % 4 {
                0 => (0, depth),
                1 => (0, cols - 1 - depth),
                2 => (rows - 1, depth),
                _ => (rows - 1, cols - 1 - depth),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn smallest_lattice() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let e = make_lattice(1, 2, 2..=2, &mut rng).unwrap();
        assert_eq!(e, vec![AdjacencyRecord::new("TAZ0001", "TAZ0002", 2)]);
        assert!(make_lattice(1, 1, 2..=2, &mut rng).is_err());
    }

    #[test]
    fn grid_edge_count_and_lane_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let e = make_lattice(3, 3, 2..=6, &mut rng).unwrap();
        assert_eq!(e.len(), 12);
        let e = make_lattice(14, 15, 2..=6, &mut rng).unwrap();
        assert_eq!(e.len(), 2 * 14 * 15 - 14 - 15);
        assert!(e.iter().all(|r| (2..=6).contains(&r.lanes)));
    }

    #[test]
    fn trimming_walks_corners() {
        let cells = trimmed_cells(4, 5, 6);
        assert_eq!(cells, vec![(0, 0), (0, 4), (3, 0), (3, 4), (0, 1), (0, 3)]);
    }
}
