//! Observation sets and evaluation grids.

use std::cmp::Ordering;

use crate::error::{Error, Result};

/// `n` observations in `R^d`, stored row-major in lexicographic order so that
/// every estimate is invariant under permutation of the input.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    data: Vec<f64>,
    dim: usize,
}

impl Sample {
    pub fn new(data: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::arg("sample dimension must be positive"));
        }
        if data.is_empty() {
            return Err(Error::arg("sample is empty"));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::arg(format!(
                "{} values do not form rows of dimension {dim}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::arg(format!(
                "non-finite value {} in observation {}",
                data[pos],
                pos / dim
            )));
        }
        let data = if dim == 1 {
            let mut d = data;
            d.sort_unstable_by(f64::total_cmp);
            d
        } else {
            let mut rows: Vec<&[f64]> = data.chunks_exact(dim).collect();
            rows.sort_by(|a, b| lex_cmp(a, b));
            rows.concat()
        };
        Ok(Self { data, dim })
    }

    pub fn from_1d(data: Vec<f64>) -> Result<Self> {
        Self::new(data, 1)
    }

    pub fn n(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Observation `i` in sorted order.
    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// First coordinate of observation `i`.
    #[inline]
    pub fn first(&self, i: usize) -> f64 {
        self.data[i * self.dim]
    }

    /// All values, row-major; for `d = 1` the sorted observations.
    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    /// Per-axis `(min, max)`.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        (0..self.dim)
            .map(|j| {
                self.rows().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                    (lo.min(r[j]), hi.max(r[j]))
                })
            })
            .collect()
    }
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| *o != Ordering::Equal)
        .unwrap_or(Ordering::Equal)
}

/// Evaluation points, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
    dim: usize,
}

impl Grid {
    pub fn new(points: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 || !points.len().is_multiple_of(dim) {
            return Err(Error::arg("grid points do not match the dimension"));
        }
        Ok(Self { points, dim })
    }

    pub fn from_1d(points: Vec<f64>) -> Self {
        Self { points, dim: 1 }
    }

    /// `m` equispaced points on `[lo, hi]`.
    pub fn linspace(lo: f64, hi: f64, m: usize) -> Self {
        let points = match m {
            0 => Vec::new(),
            1 => vec![0.5 * (lo + hi)],
            _ => (0..m)
                .map(|i| lo + (hi - lo) * i as f64 / (m - 1) as f64)
                .collect(),
        };
        Self { points, dim: 1 }
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn values(&self) -> &[f64] {
        &self.points
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorts_and_validates() {
        let s = Sample::from_1d(vec![3.0, 1.0, 2.0]).unwrap();
        assert_eq!(s.values(), &[1.0, 2.0, 3.0]);
        assert_eq!(s.n(), 3);
        assert!(Sample::from_1d(vec![]).is_err());
        assert!(Sample::from_1d(vec![1.0, f64::NAN]).is_err());
        assert!(Sample::new(vec![1.0, 2.0, 3.0], 2).is_err());
    }

    #[test]
    fn two_dim_rows_sorted_lexicographically() {
        let s = Sample::new(vec![1.0, 5.0, 0.0, 2.0, 1.0, 4.0], 2).unwrap();
        assert_eq!(s.values(), &[0.0, 2.0, 1.0, 4.0, 1.0, 5.0]);
        assert_eq!(s.bounds(), vec![(0.0, 1.0), (2.0, 5.0)]);
    }

    #[test]
    fn linspace_endpoints() {
        let g = Grid::linspace(-1.0, 1.0, 5);
        assert_eq!(g.values(), &[-1.0, -0.5, 0.0, 0.5, 1.0]);
    }
}
