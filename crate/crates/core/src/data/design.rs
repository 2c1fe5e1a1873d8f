//! Covariate selection and design-matrix encoding.

use crate::data::zones::{ZoneRecord, ZoneTable, LANDUSE_CLASSES, LANDUSE_NAMES};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Numeric covariates in the order they are reported.
pub const DEFAULT_COVARIATES: [&str; 5] = [
    "arterial_length_km",
    "access_density",
    "signal_density",
    "betweenness",
    "road_density",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CovariateSpec {
    pub covariates: Vec<String>,
    pub include_intercept: bool,
    /// Reference land-use class; `None` leaves land use out of the model.
    pub landuse_base: Option<u8>,
}

impl Default for CovariateSpec {
    fn default() -> Self {
        Self {
            covariates: DEFAULT_COVARIATES.iter().map(|s| s.to_string()).collect(),
            include_intercept: true,
            landuse_base: Some(0),
        }
    }
}

impl CovariateSpec {
    pub fn validate(&self) -> Result<()> {
        for (i, name) in self.covariates.iter().enumerate() {
            if self.covariates[..i].contains(name) {
                return Err(Error::Spec(format!("covariate `{name}` listed twice")));
            }
            if !ZoneRecord::is_numeric_name(name) {
                return Err(Error::Spec(format!("unknown covariate `{name}`")));
            }
        }
        if let Some(base) = self.landuse_base {
            if base >= LANDUSE_CLASSES {
                return Err(Error::Spec(format!("land-use base class {base} outside 0..=6")));
            }
        }
        Ok(())
    }

    /// Column names the design matrix will carry.
    pub fn column_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        if self.include_intercept {
            names.push("intercept".to_string());
        }
        names.extend(self.covariates.iter().cloned());
        if let Some(base) = self.landuse_base {
            names.extend(
                (0..LANDUSE_CLASSES)
                    .filter(|&c| c != base)
                    .map(|c| format!("landuse_{}", LANDUSE_NAMES[c as usize])),
            );
        }
        names
    }
}

/// Dense row-major n×p design matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
    names: Vec<String>,
    intercept: bool,
}

impl<T: Real> DesignMatrix<T> {
    /// Builds from rows; `intercept` declares that column 0 is the constant.
    pub fn from_rows(rows: Vec<Vec<T>>, names: Vec<String>, intercept: bool) -> Result<Self> {
        let cols = names.len();
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for (i, r) in rows.into_iter().enumerate() {
            if r.len() != cols {
                return Err(Error::Shape(format!(
                    "row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            data.extend(r);
        }
        if intercept && (cols == 0 || (0..n).any(|i| data[i * cols] != T::one())) {
            return Err(Error::Shape("intercept column must be all ones".into()));
        }
        Ok(Self {
            rows: n,
            cols,
            data,
            names,
            intercept,
        })
    }

    /// Convenience constructor for an intercept plus the given columns.
    pub fn with_intercept(columns: &[(&str, Vec<T>)]) -> Result<Self> {
        let n = columns.first().map_or(0, |(_, c)| c.len());
        let mut names = vec!["intercept".to_string()];
        names.extend(columns.iter().map(|(n, _)| n.to_string()));
        let rows = (0..n)
            .map(|i| {
                std::iter::once(T::one())
                    .chain(columns.iter().map(|(_, c)| c[i]))
                    .collect()
            })
            .collect();
        Self::from_rows(rows, names, true)
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn has_intercept(&self) -> bool {
        self.intercept
    }
}

/// Indicator vector over the six non-base land-use classes, in class order.
pub fn encode_landuse<T: Real>(class: u8, base: u8) -> Result<Vec<T>> {
    if class >= LANDUSE_CLASSES || base >= LANDUSE_CLASSES {
        return Err(Error::Domain(format!(
            "land-use class {class} / base {base} outside 0..=6"
        )));
    }
    Ok((0..LANDUSE_CLASSES)
        .filter(|&c| c != base)
        .map(|c| if c == class { T::one() } else { T::zero() })
        .collect())
}

/// Intercept, named numeric covariates, then land-use dummies; rows follow table order.
pub fn design_matrix<T: Real>(table: &ZoneTable, spec: &CovariateSpec) -> Result<DesignMatrix<T>> {
    spec.validate()?;
    let names = spec.column_names();
    let mut rows = Vec::with_capacity(table.len());
    for rec in table.records() {
        let mut row = Vec::with_capacity(names.len());
        if spec.include_intercept {
            row.push(T::one());
        }
        for name in &spec.covariates {
            let v = rec
                .numeric(name)
                .ok_or_else(|| Error::Spec(format!("unknown covariate `{name}`")))?;
            row.push(T::from_f64(v).unwrap());
        }
        if let Some(base) = spec.landuse_base {
            row.extend(encode_landuse::<T>(rec.land_use_class, base)?);
        }
        rows.push(row);
    }
    DesignMatrix::from_rows(rows, names, spec.include_intercept)
}
