//! Rectangular chart grids and the finite-difference stencils shared by every
//! differentiated quantity in the pipeline.
//!
//! Nodes are stored row-major: the last axis varies fastest. First
//! derivatives use second-order central differences in the interior and
//! second-order one-sided differences on the boundary.

use serde::{Deserialize, Serialize};

use crate::GridError;

/// Smallest accepted number of samples per axis.
pub const MIN_EXTENT: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartGrid {
    extents: Vec<usize>,
    spacing: Vec<f64>,
    origin: Vec<f64>,
}

impl ChartGrid {
    pub fn new(extents: Vec<usize>, spacing: Vec<f64>, origin: Vec<f64>) -> Result<Self, GridError> {
        let grid = Self { extents, spacing, origin };
        grid.validate()?;
        Ok(grid)
    }

    /// `extents[k]` nodes spanning `[lo_k, hi_k]` on each axis.
    pub fn spanning(bounds: &[(f64, f64)], extents: &[usize]) -> Result<Self, GridError> {
        if bounds.len() != extents.len() {
            return Err(GridError::AxisCount {
                expected: bounds.len(),
                found: extents.len(),
            });
        }
        let spacing = bounds
            .iter()
            .zip(extents)
            .map(|(&(lo, hi), &n)| (hi - lo) / (n.max(2) - 1) as f64)
            .collect();
        let origin = bounds.iter().map(|b| b.0).collect();
        Self::new(extents.to_vec(), spacing, origin)
    }

    pub fn validate(&self) -> Result<(), GridError> {
        let n = self.extents.len();
        if n == 0 || self.spacing.len() != n || self.origin.len() != n {
            return Err(GridError::AxisCount {
                expected: n,
                found: self.spacing.len().min(self.origin.len()),
            });
        }
        for (axis, &extent) in self.extents.iter().enumerate() {
            if extent < MIN_EXTENT {
                return Err(GridError::TooFewSamples { axis, extent });
            }
        }
        for (axis, &h) in self.spacing.iter().enumerate() {
            if !(h > 0.0 && h.is_finite()) {
                return Err(GridError::BadSpacing { axis, spacing: h });
            }
        }
        if self.origin.iter().any(|x| !x.is_finite()) {
            return Err(GridError::BadOrigin);
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.extents.len()
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn node_count(&self) -> usize {
        self.extents.iter().product()
    }

    /// Largest spacing over all axes.
    pub fn max_spacing(&self) -> f64 {
        self.spacing.iter().copied().fold(0.0, f64::max)
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.extents[axis + 1..].iter().product()
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        coords
            .iter()
            .zip(&self.extents)
            .fold(0, |acc, (&c, &n)| acc * n + c)
    }

    pub fn coords(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        for axis in (0..self.dim()).rev() {
            out[axis] = index % self.extents[axis];
            index /= self.extents[axis];
        }
        out
    }

    /// Chart coordinates of a node.
    pub fn point(&self, index: usize) -> Vec<f64> {
        self.coords(index)
            .iter()
            .enumerate()
            .map(|(k, &c)| self.origin[k] + c as f64 * self.spacing[k])
            .collect()
    }

    /// Chart bounds `[origin, origin + (N-1) h]` per axis.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        (0..self.dim())
            .map(|k| {
                let lo = self.origin[k];
                (lo, lo + (self.extents[k] - 1) as f64 * self.spacing[k])
            })
            .collect()
    }

    /// Node processed just before `index` in a lexicographic sweep that stays
    /// adjacent: step back along the last axis with a nonzero coordinate.
    pub fn sweep_predecessor(&self, index: usize) -> Option<usize> {
        let coords = self.coords(index);
        (0..self.dim())
            .rev()
            .find(|&k| coords[k] > 0)
            .map(|k| index - self.stride(k))
    }

    /// Central node (used as the default integration basepoint).
    pub fn center(&self) -> usize {
        let coords: Vec<usize> = self.extents.iter().map(|&n| n / 2).collect();
        self.index(&coords)
    }

    pub fn check_same(&self, other: &ChartGrid) -> Result<(), GridError> {
        if self != other {
            return Err(GridError::Mismatch);
        }
        Ok(())
    }

    /// First-derivative stencil along `axis` at `index`: `(node, weight)` pairs
    /// with the `1/h` factor included.
    pub fn first_stencil(&self, index: usize, axis: usize) -> [(usize, f64); 3] {
        let n = self.extents[axis];
        let c = (index / self.stride(axis)) % n;
        let s = self.stride(axis);
        let h = self.spacing[axis];
        if c == 0 {
            [(index, -1.5 / h), (index + s, 2.0 / h), (index + 2 * s, -0.5 / h)]
        } else if c == n - 1 {
            [(index, 1.5 / h), (index - s, -2.0 / h), (index - 2 * s, 0.5 / h)]
        } else {
            [(index - s, -0.5 / h), (index + s, 0.5 / h), (index, 0.0)]
        }
    }

    /// Second-derivative stencil along `axis`; one-sided four-point form on the boundary.
    pub fn second_stencil(&self, index: usize, axis: usize) -> [(usize, f64); 4] {
        let n = self.extents[axis];
        let c = (index / self.stride(axis)) % n;
        let s = self.stride(axis);
        let h2 = self.spacing[axis] * self.spacing[axis];
        if c == 0 {
            [
                (index, 2.0 / h2),
                (index + s, -5.0 / h2),
                (index + 2 * s, 4.0 / h2),
                (index + 3 * s, -1.0 / h2),
            ]
        } else if c == n - 1 {
            [
                (index, 2.0 / h2),
                (index - s, -5.0 / h2),
                (index - 2 * s, 4.0 / h2),
                (index - 3 * s, -1.0 / h2),
            ]
        } else {
            [(index - s, 1.0 / h2), (index, -2.0 / h2), (index + s, 1.0 / h2), (index, 0.0)]
        }
    }

    /// Derivative of a scalar field. Weights sum to zero, so differences
    /// against the centre are taken first; constants differentiate to exactly 0.
    pub fn derivative(&self, values: &[f64], index: usize, axis: usize) -> f64 {
        let centre = values[index];
        self.first_stencil(index, axis)
            .iter()
            .map(|&(node, w)| w * (values[node] - centre))
            .sum()
    }

    /// Derivative of a field with `width` components stored contiguously per node.
    pub fn derivative_block(&self, values: &[f64], width: usize, index: usize, axis: usize) -> Vec<f64> {
        let mut out = vec![0.0; width];
        let centre = &values[index * width..(index + 1) * width];
        for (node, w) in self.first_stencil(index, axis) {
            for ((o, v), c) in out.iter_mut().zip(&values[node * width..(node + 1) * width]).zip(centre) {
                *o += w * (v - c);
            }
        }
        out
    }

    /// Second (pure or mixed) derivative of a block field.
    pub fn second_derivative_block(
        &self,
        values: &[f64],
        width: usize,
        index: usize,
        k: usize,
        l: usize,
    ) -> Vec<f64> {
        let mut out = vec![0.0; width];
        let mut accumulate = |node: usize, w: f64| {
            for (o, v) in out.iter_mut().zip(&values[node * width..(node + 1) * width]) {
                *o += w * v;
            }
        };
        if k == l {
            for (node, w) in self.second_stencil(index, k) {
                accumulate(node, w);
            }
        } else {
            for (outer, wo) in self.first_stencil(index, k) {
                for (inner, wi) in self.first_stencil(outer, l) {
                    accumulate(inner, wo * wi);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        let g = ChartGrid::new(vec![5, 6, 7], vec![0.1; 3], vec![0.0; 3]).unwrap();
        for i in 0..g.node_count() {
            assert_eq!(g.index(&g.coords(i)), i);
        }
        assert_eq!(g.stride(0), 42);
        assert_eq!(g.stride(2), 1);
    }

    #[test]
    fn validation() {
        assert!(matches!(
            ChartGrid::new(vec![4, 5], vec![0.1, 0.1], vec![0.0, 0.0]),
            Err(GridError::TooFewSamples { axis: 0, extent: 4 })
        ));
        assert!(ChartGrid::new(vec![5, 5], vec![0.1, 0.0], vec![0.0, 0.0]).is_err());
        assert!(ChartGrid::new(vec![5, 5], vec![0.1], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn stencils_are_exact_on_quadratics() {
        let g = ChartGrid::spanning(&[(-1.0, 1.0), (0.0, 2.0)], &[7, 9]).unwrap();
        let f: Vec<f64> = (0..g.node_count())
            .map(|i| {
                let p = g.point(i);
                3.0 * p[0] * p[0] - p[0] * p[1] + 2.0 * p[1] * p[1] + p[1]
            })
            .collect();
        for i in 0..g.node_count() {
            let p = g.point(i);
            assert!((g.derivative(&f, i, 0) - (6.0 * p[0] - p[1])).abs() < 1e-12);
            assert!((g.derivative(&f, i, 1) - (-p[0] + 4.0 * p[1] + 1.0)).abs() < 1e-12);
            let uu = g.second_derivative_block(&f, 1, i, 0, 0)[0];
            let uv = g.second_derivative_block(&f, 1, i, 0, 1)[0];
            let vv = g.second_derivative_block(&f, 1, i, 1, 1)[0];
            assert!((uu - 6.0).abs() < 1e-9 && (uv + 1.0).abs() < 1e-9 && (vv - 4.0).abs() < 1e-9);
        }
    }

    #[test]
    fn sweep_predecessor_is_adjacent() {
        let g = ChartGrid::new(vec![5, 5], vec![1.0; 2], vec![0.0; 2]).unwrap();
        assert_eq!(g.sweep_predecessor(0), None);
        assert_eq!(g.sweep_predecessor(g.index(&[2, 3])), Some(g.index(&[2, 2])));
        assert_eq!(g.sweep_predecessor(g.index(&[2, 0])), Some(g.index(&[1, 0])));
    }
}
