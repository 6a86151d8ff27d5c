//! Discrete geometry of an immersed chart patch: adapted orthonormal frames,
//! the induced metric, the second fundamental form, and the `so(d)`-valued
//! connection coefficients of the adapted frame.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clifford::{dot, AlgebraSignature};
use crate::grid::ChartGrid;
use crate::{FrameError, GridError};

const RANK_THRESHOLD: f64 = 1e-8;

/// Sampled immersion `F: U -> R^d`, optionally with exact first and second
/// derivatives at every node.
#[derive(Clone, Debug)]
pub struct ImmersionPatch {
    grid: ChartGrid,
    ambient_dim: usize,
    positions: Vec<f64>,
    first: Option<Vec<f64>>,
    second: Option<Vec<f64>>,
}

impl ImmersionPatch {
    /// Positions only; derivatives come from finite differences.
    pub fn sampled(grid: ChartGrid, ambient_dim: usize, positions: Vec<f64>) -> Result<Self, FrameError> {
        if ambient_dim < grid.dim() {
            return Err(FrameError::Dimension {
                ambient: ambient_dim,
                chart: grid.dim(),
            });
        }
        let expected = grid.node_count() * ambient_dim;
        if positions.len() != expected {
            return Err(GridError::FieldLength {
                expected,
                found: positions.len(),
            }
            .into());
        }
        Ok(Self {
            grid,
            ambient_dim,
            positions,
            first: None,
            second: None,
        })
    }

    /// Attaches exact jets: `first[node][k][c]` and `second[node][k][l][c]`, flattened.
    pub fn with_jets(mut self, first: Vec<f64>, second: Option<Vec<f64>>) -> Result<Self, FrameError> {
        let (nodes, n, d) = (self.grid.node_count(), self.grid.dim(), self.ambient_dim);
        if first.len() != nodes * n * d {
            return Err(GridError::FieldLength {
                expected: nodes * n * d,
                found: first.len(),
            }
            .into());
        }
        if let Some(second) = &second {
            if second.len() != nodes * n * n * d {
                return Err(GridError::FieldLength {
                    expected: nodes * n * n * d,
                    found: second.len(),
                }
                .into());
            }
        }
        self.first = Some(first);
        self.second = second;
        Ok(self)
    }

    /// Samples `f` at every node, without jets.
    pub fn from_fn(grid: ChartGrid, ambient_dim: usize, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Self, FrameError> {
        let positions = (0..grid.node_count()).flat_map(|i| f(&grid.point(i))).collect();
        Self::sampled(grid, ambient_dim, positions)
    }

    pub fn grid(&self) -> &ChartGrid {
        &self.grid
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn chart_dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn position(&self, node: usize) -> &[f64] {
        &self.positions[node * self.ambient_dim..(node + 1) * self.ambient_dim]
    }

    pub fn has_exact_jets(&self) -> bool {
        self.first.is_some()
    }

    /// `dF(d/dx_k)` at `node`.
    pub fn tangent(&self, node: usize, k: usize) -> Vec<f64> {
        let (n, d) = (self.chart_dim(), self.ambient_dim);
        match &self.first {
            Some(first) => first[(node * n + k) * d..(node * n + k + 1) * d].to_vec(),
            None => self.grid.derivative_block(&self.positions, d, node, k),
        }
    }

    /// `d^2 F / dx_k dx_l` at `node`.
    pub fn hessian(&self, node: usize, k: usize, l: usize) -> Vec<f64> {
        let (n, d) = (self.chart_dim(), self.ambient_dim);
        match &self.second {
            Some(second) => second[((node * n + k) * n + l) * d..((node * n + k) * n + l + 1) * d].to_vec(),
            None => self.grid.second_derivative_block(&self.positions, d, node, k, l),
        }
    }
}

/// Orthonormal ambient frame per node: `E_1..E_n` tangent, `E_{n+1}..E_d` normal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaptedFrame {
    grid: ChartGrid,
    signature: AlgebraSignature,
    vectors: Vec<f64>,
}

impl AdaptedFrame {
    pub fn grid(&self) -> &ChartGrid {
        &self.grid
    }

    pub fn signature(&self) -> AlgebraSignature {
        self.signature
    }

    /// `E_{a+1}` at `node` in ambient coordinates.
    pub fn vector(&self, node: usize, a: usize) -> &[f64] {
        let d = self.signature.dim();
        let start = (node * d + a) * d;
        &self.vectors[start..start + d]
    }

    pub fn node_block(&self, node: usize) -> &[f64] {
        let d = self.signature.dim();
        &self.vectors[node * d * d..(node + 1) * d * d]
    }

    pub fn raw(&self) -> &[f64] {
        &self.vectors
    }

    /// Rotation whose columns are the frame vectors.
    pub fn rotation(&self, node: usize) -> DMatrix<f64> {
        let d = self.signature.dim();
        DMatrix::from_fn(d, d, |i, a| self.vector(node, a)[i])
    }

    /// Same frame with `E_{n+1}, E_{n+2}` turned by `angles[node]` inside the
    /// normal plane they span. Used to exercise a nontrivial normal connection.
    pub fn rotate_normal_pair(&self, angles: &[f64]) -> Result<Self, FrameError> {
        let (n, m, d) = (self.signature.n(), self.signature.m(), self.signature.dim());
        if m < 2 {
            return Err(FrameError::NormalPair { codim: m });
        }
        if angles.len() != self.grid.node_count() {
            return Err(GridError::FieldLength {
                expected: self.grid.node_count(),
                found: angles.len(),
            }
            .into());
        }
        let mut out = self.clone();
        for (node, &t) in angles.iter().enumerate() {
            let (s, c) = t.sin_cos();
            let (p, q) = (self.vector(node, n).to_vec(), self.vector(node, n + 1).to_vec());
            for i in 0..d {
                out.vectors[(node * d + n) * d + i] = c * p[i] + s * q[i];
                out.vectors[(node * d + n + 1) * d + i] = -s * p[i] + c * q[i];
            }
        }
        Ok(out)
    }

    /// Largest `|<E_a, E_b> - delta_ab|` over the grid.
    pub fn orthonormality_error(&self) -> f64 {
        let d = self.signature.dim();
        let mut worst = 0.0f64;
        for node in 0..self.grid.node_count() {
            for a in 0..d {
                for b in 0..d {
                    let target = if a == b { 1.0 } else { 0.0 };
                    worst = worst.max((dot(self.vector(node, a), self.vector(node, b)) - target).abs());
                }
            }
        }
        worst
    }
}

/// Subtracts the projections onto `basis` and normalizes; returns the norm before normalization.
fn orthonormalize_against(v: &mut [f64], basis: &[Vec<f64>]) -> f64 {
    for _ in 0..2 {
        for b in basis {
            let p = dot(v, b);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= p * y;
            }
        }
    }
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

fn smallest_singular_value(tangents: &[Vec<f64>], d: usize) -> f64 {
    let n = tangents.len();
    let jac = DMatrix::from_fn(d, n, |i, k| tangents[k][i]);
    jac.singular_values().iter().copied().fold(f64::INFINITY, f64::min)
}

/// Gram-Schmidt on `dF` for the tangent block, then a normal block that
/// completes it to a positively oriented basis. Nodes are visited in
/// row-major order and each normal block starts from the sweep predecessor's
/// normals, so the frame varies continuously over the chart.
pub fn build_adapted_frame(patch: &ImmersionPatch) -> Result<AdaptedFrame, FrameError> {
    let grid = patch.grid().clone();
    let (n, d) = (patch.chart_dim(), patch.ambient_dim());
    let signature = AlgebraSignature::new(n, d - n)?;
    let m = d - n;
    let mut vectors = vec![0.0; grid.node_count() * d * d];

    for node in 0..grid.node_count() {
        let tangents: Vec<Vec<f64>> = (0..n).map(|k| patch.tangent(node, k)).collect();
        let sigma = smallest_singular_value(&tangents, d);
        if sigma.is_nan() || sigma <= RANK_THRESHOLD {
            return Err(FrameError::RankDeficient {
                node,
                singular_value: sigma,
            });
        }
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d);
        for mut t in tangents {
            orthonormalize_against(&mut t, &basis);
            basis.push(t);
        }

        match grid.sweep_predecessor(node) {
            Some(prev) => {
                for a in n..d {
                    let start = (prev * d + a) * d;
                    let mut v = vectors[start..start + d].to_vec();
                    if orthonormalize_against(&mut v, &basis) < 1e-6 {
                        // Neighbour's normal fell into the new tangent space; the
                        // frame cannot be continued continuously.
                        return Err(FrameError::RankDeficient {
                            node,
                            singular_value: sigma,
                        });
                    }
                    basis.push(v);
                }
            }
            None => {
                for _ in 0..m {
                    let best = (0..d)
                        .map(|i| {
                            let mut v = vec![0.0; d];
                            v[i] = 1.0;
                            let norm = orthonormalize_against(&mut v, &basis);
                            (norm, v)
                        })
                        .max_by(|a, b| a.0.total_cmp(&b.0))
                        .map(|(_, v)| v)
                        .unwrap_or_default();
                    basis.push(best);
                }
            }
        }

        let det = DMatrix::from_fn(d, d, |i, a| basis[a][i]).determinant();
        if det < 0.0 {
            basis[d - 1].iter_mut().for_each(|x| *x = -*x);
        }
        for (a, v) in basis.iter().enumerate() {
            vectors[(node * d + a) * d..(node * d + a + 1) * d].copy_from_slice(v);
        }
    }

    Ok(AdaptedFrame {
        grid,
        signature,
        vectors,
    })
}

/// Pullback metric `g_kl = <dF_k, dF_l>` per node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricField {
    grid: ChartGrid,
    values: Vec<f64>,
}

impl MetricField {
    pub fn new(grid: ChartGrid, values: Vec<f64>) -> Result<Self, GridError> {
        let n = grid.dim();
        if values.len() != grid.node_count() * n * n {
            return Err(GridError::FieldLength {
                expected: grid.node_count() * n * n,
                found: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &ChartGrid {
        &self.grid
    }

    pub fn at(&self, node: usize, k: usize, l: usize) -> f64 {
        let n = self.grid.dim();
        self.values[(node * n + k) * n + l]
    }

    pub fn node_block(&self, node: usize) -> &[f64] {
        let n = self.grid.dim();
        &self.values[node * n * n..(node + 1) * n * n]
    }
}

pub fn induced_metric(patch: &ImmersionPatch) -> MetricField {
    let grid = patch.grid().clone();
    let n = grid.dim();
    let values = (0..grid.node_count())
        .into_par_iter()
        .flat_map_iter(|node| {
            let t: Vec<Vec<f64>> = (0..n).map(|k| patch.tangent(node, k)).collect();
            let mut block = vec![0.0; n * n];
            for k in 0..n {
                for l in 0..n {
                    block[k * n + l] = dot(&t[k], &t[l]);
                }
            }
            block
        })
        .collect();
    MetricField { grid, values }
}

/// Components of each chart direction in the tangent frame:
/// `d/dx_k = sum_i coeff(node, k, i) E_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartCoframe {
    grid: ChartGrid,
    values: Vec<f64>,
}

impl ChartCoframe {
    pub fn new(grid: ChartGrid, values: Vec<f64>) -> Result<Self, GridError> {
        let n = grid.dim();
        if values.len() != grid.node_count() * n * n {
            return Err(GridError::FieldLength {
                expected: grid.node_count() * n * n,
                found: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    /// Orthonormal chart: `d/dx_k = E_k` everywhere.
    pub fn identity(grid: ChartGrid) -> Self {
        let n = grid.dim();
        let mut values = vec![0.0; grid.node_count() * n * n];
        for node in 0..grid.node_count() {
            for k in 0..n {
                values[(node * n + k) * n + k] = 1.0;
            }
        }
        Self { grid, values }
    }

    pub fn grid(&self) -> &ChartGrid {
        &self.grid
    }

    pub fn coeff(&self, node: usize, k: usize, i: usize) -> f64 {
        let n = self.grid.dim();
        self.values[(node * n + k) * n + i]
    }

    /// Row `k`: the tangent-frame components of `d/dx_k`.
    pub fn direction(&self, node: usize, k: usize) -> &[f64] {
        let n = self.grid.dim();
        &self.values[(node * n + k) * n..(node * n + k + 1) * n]
    }

    pub fn raw(&self) -> &[f64] {
        &self.values
    }
}

pub fn chart_coframe(patch: &ImmersionPatch, frame: &AdaptedFrame) -> Result<ChartCoframe, FrameError> {
    patch.grid().check_same(frame.grid())?;
    let grid = patch.grid().clone();
    let n = grid.dim();
    let values = (0..grid.node_count())
        .into_par_iter()
        .flat_map_iter(|node| {
            let mut block = vec![0.0; n * n];
            for k in 0..n {
                let t = patch.tangent(node, k);
                for i in 0..n {
                    block[k * n + i] = dot(&t, frame.vector(node, i));
                }
            }
            block
        })
        .collect();
    Ok(ChartCoframe { grid, values })
}

/// `B^a_{ij}` in tangent-frame indices `i, j` and normal-frame index `a`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecondFundamentalFormField {
    grid: ChartGrid,
    signature: AlgebraSignature,
    values: Vec<f64>,
}

impl SecondFundamentalFormField {
    /// Builds a field from `values[node][a][i][j]`, symmetrizing in `i, j`.
    pub fn new(grid: ChartGrid, signature: AlgebraSignature, mut values: Vec<f64>) -> Result<Self, GridError> {
        let (n, m) = (signature.n(), signature.m());
        if grid.dim() != n {
            return Err(GridError::AxisCount {
                expected: n,
                found: grid.dim(),
            });
        }
        if values.len() != grid.node_count() * m * n * n {
            return Err(GridError::FieldLength {
                expected: grid.node_count() * m * n * n,
                found: values.len(),
            });
        }
        for block in values.chunks_mut(n * n) {
            for i in 0..n {
                for j in (i + 1)..n {
                    let s = 0.5 * (block[i * n + j] + block[j * n + i]);
                    block[i * n + j] = s;
                    block[j * n + i] = s;
                }
            }
        }
        Ok(Self { grid, signature, values })
    }

    pub fn grid(&self) -> &ChartGrid {
        &self.grid
    }

    pub fn signature(&self) -> AlgebraSignature {
        self.signature
    }

    pub fn at(&self, node: usize, a: usize, i: usize, j: usize) -> f64 {
        let (n, m) = (self.signature.n(), self.signature.m());
        self.values[((node * m + a) * n + i) * n + j]
    }

    /// Normal-frame components of `B(d/dx_k, E_i)`.
    pub fn along(&self, coframe: &ChartCoframe, node: usize, k: usize, i: usize) -> Vec<f64> {
        let (n, m) = (self.signature.n(), self.signature.m());
        let dir = coframe.direction(node, k);
        (0..m)
            .map(|a| (0..n).map(|j| dir[j] * self.at(node, a, j, i)).sum())
            .collect()
    }

    /// Normal-frame components of `B(d/dx_k, d/dx_l)`.
    pub fn on_chart(&self, coframe: &ChartCoframe, node: usize, k: usize, l: usize) -> Vec<f64> {
        let m = self.signature.m();
        let dk = coframe.direction(node, k);
        let dl = coframe.direction(node, l);
        (0..m)
            .map(|a| {
                dk.iter()
                    .enumerate()
                    .flat_map(|(i, &x)| dl.iter().enumerate().map(move |(j, &y)| (i, j, x * y)))
                    .map(|(i, j, w)| w * self.at(node, a, i, j))
                    .sum()
            })
            .collect()
    }
}

/// `B^a_{ij} = <d^2F(X_i, X_j), E_{n+a}>` where `X_i` is `E_i` written in chart coordinates.
pub fn second_fundamental_form(
    patch: &ImmersionPatch,
    frame: &AdaptedFrame,
) -> Result<SecondFundamentalFormField, FrameError> {
    patch.grid().check_same(frame.grid())?;
    let grid = patch.grid().clone();
    let signature = frame.signature();
    let (n, m) = (signature.n(), signature.m());
    let blocks: Result<Vec<Vec<f64>>, FrameError> = (0..grid.node_count())
        .into_par_iter()
        .map(|node| {
            // M[k][i] = <dF_k, E_i>; chart components of E_i are the rows of M^{-1}.
            let tangents: Vec<Vec<f64>> = (0..n).map(|k| patch.tangent(node, k)).collect();
            let coframe = DMatrix::from_fn(n, n, |k, i| dot(&tangents[k], frame.vector(node, i)));
            let inverse = coframe.try_inverse().ok_or(FrameError::RankDeficient {
                node,
                singular_value: 0.0,
            })?;
            let mut hess_normal = vec![0.0; m * n * n];
            for k in 0..n {
                for l in k..n {
                    let h = patch.hessian(node, k, l);
                    for a in 0..m {
                        let v = dot(&h, frame.vector(node, n + a));
                        hess_normal[(a * n + k) * n + l] = v;
                        hess_normal[(a * n + l) * n + k] = v;
                    }
                }
            }
            let mut block = vec![0.0; m * n * n];
            for a in 0..m {
                let hn = DMatrix::from_fn(n, n, |k, l| hess_normal[(a * n + k) * n + l]);
                let b = inverse.transpose() * hn * &inverse;
                for i in 0..n {
                    for j in 0..n {
                        block[(a * n + i) * n + j] = b[(i, j)];
                    }
                }
            }
            Ok(block)
        })
        .collect();
    let values = blocks?.concat();
    Ok(SecondFundamentalFormField::new(grid, signature, values)?)
}

/// Antisymmetric `omega_ab(d/dx_k) = <d_k E_a, E_b>` per node and chart direction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectionFormField {
    grid: ChartGrid,
    signature: AlgebraSignature,
    values: Vec<f64>,
}

impl ConnectionFormField {
    /// Builds a field from `values[node][k][a][b]`, projecting onto antisymmetric matrices.
    pub fn new(grid: ChartGrid, signature: AlgebraSignature, mut values: Vec<f64>) -> Result<Self, GridError> {
        let d = signature.dim();
        let n = grid.dim();
        if values.len() != grid.node_count() * n * d * d {
            return Err(GridError::FieldLength {
                expected: grid.node_count() * n * d * d,
                found: values.len(),
            });
        }
        for block in values.chunks_mut(d * d) {
            for a in 0..d {
                block[a * d + a] = 0.0;
                for b in (a + 1)..d {
                    let s = 0.5 * (block[a * d + b] - block[b * d + a]);
                    block[a * d + b] = s;
                    block[b * d + a] = -s;
                }
            }
        }
        Ok(Self { grid, signature, values })
    }

    pub fn zero(grid: ChartGrid, signature: AlgebraSignature) -> Self {
        let d = signature.dim();
        let len = grid.node_count() * grid.dim() * d * d;
        Self {
            grid,
            signature,
            values: vec![0.0; len],
        }
    }

    pub fn grid(&self) -> &ChartGrid {
        &self.grid
    }

    pub fn signature(&self) -> AlgebraSignature {
        self.signature
    }

    pub fn at(&self, node: usize, k: usize, a: usize, b: usize) -> f64 {
        let d = self.signature.dim();
        let n = self.grid.dim();
        self.values[((node * n + k) * d + a) * d + b]
    }
}

pub fn connection_forms(frame: &AdaptedFrame) -> Result<ConnectionFormField, FrameError> {
    let grid = frame.grid().clone();
    let signature = frame.signature();
    let d = signature.dim();
    let n = grid.dim();
    let raw = frame.raw();
    let values: Vec<f64> = (0..grid.node_count())
        .into_par_iter()
        .flat_map_iter(|node| {
            let mut block = vec![0.0; n * d * d];
            for k in 0..n {
                let derivative = grid.derivative_block(raw, d * d, node, k);
                for a in 0..d {
                    for b in 0..d {
                        block[(k * d + a) * d + b] = dot(&derivative[a * d..(a + 1) * d], frame.vector(node, b));
                    }
                }
            }
            block
        })
        .collect();
    Ok(ConnectionFormField::new(grid, signature, values)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid2(lo: f64, hi: f64, n: usize) -> ChartGrid {
        ChartGrid::spanning(&[(lo, hi), (lo, hi)], &[n, n]).unwrap()
    }

    fn sphere(p: &[f64]) -> Vec<f64> {
        let (u, v) = (p[0], p[1]);
        vec![u.cos() * v.cos(), u.sin() * v.cos(), v.sin()]
    }

    #[test]
    fn plane_frame_is_standard_basis() {
        let patch = ImmersionPatch::from_fn(grid2(-1.0, 1.0, 7), 3, |p| vec![p[0], p[1], 0.0]).unwrap();
        let frame = build_adapted_frame(&patch).unwrap();
        for node in 0..patch.grid().node_count() {
            for a in 0..3 {
                let mut e = vec![0.0; 3];
                e[a] = 1.0;
                for (x, y) in frame.vector(node, a).iter().zip(&e) {
                    assert!((x - y).abs() < 1e-14);
                }
            }
        }
        let sff = second_fundamental_form(&patch, &frame).unwrap();
        assert!(sff.values.iter().all(|x| x.abs() < 1e-12));
        let omega = connection_forms(&frame).unwrap();
        assert!(omega.values.iter().all(|x| x.abs() < 1e-12));
        let g = induced_metric(&patch);
        for node in 0..patch.grid().node_count() {
            assert!((g.at(node, 0, 0) - 1.0).abs() < 1e-12 && g.at(node, 0, 1).abs() < 1e-12);
        }
    }

    #[test]
    fn graph_frame_is_orthonormal() {
        let patch =
            ImmersionPatch::from_fn(grid2(-1.0, 1.0, 11), 3, |p| vec![p[0], p[1], (p[0] * p[1]).sin() + p[0] * p[0]])
                .unwrap();
        let frame = build_adapted_frame(&patch).unwrap();
        assert!(frame.orthonormality_error() < 1e-10);
        for node in 0..patch.grid().node_count() {
            assert!(frame.rotation(node).determinant() > 0.0);
            for k in 0..2 {
                assert!(dot(&patch.tangent(node, k), frame.vector(node, 2)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn sphere_normal_is_radial_and_b_is_minus_identity() {
        let grid = grid2(-1.0, 1.0, 41);
        let patch = crate::scenarios::sample(&crate::scenarios::Scenario::sphere(), &grid).unwrap();
        let frame = build_adapted_frame(&patch).unwrap();
        let sff = second_fundamental_form(&patch, &frame).unwrap();
        for node in 0..grid.node_count() {
            let f = patch.position(node);
            let e3 = frame.vector(node, 2);
            let err: f64 = f.iter().zip(e3).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 1e-10, "node {node}: {err}");
            assert!((sff.at(node, 0, 0, 0) + 1.0).abs() < 1e-12);
            assert!((sff.at(node, 0, 1, 1) + 1.0).abs() < 1e-12);
            assert!(sff.at(node, 0, 0, 1).abs() < 1e-12);
        }
    }

    #[test]
    fn sampled_sphere_converges_to_exact_geometry() {
        let patch = ImmersionPatch::from_fn(grid2(-1.0, 1.0, 41), 3, sphere).unwrap();
        let frame = build_adapted_frame(&patch).unwrap();
        let h = patch.grid().max_spacing();
        for node in 0..patch.grid().node_count() {
            let f = patch.position(node);
            let err: f64 = f.iter().zip(frame.vector(node, 2)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 2.0 * h * h, "node {node}: {err}");
        }
        let g = induced_metric(&patch);
        let sff = second_fundamental_form(&patch, &frame).unwrap();
        let interior = patch.grid().index(&[20, 20]);
        let v = patch.grid().point(interior)[1];
        assert!((g.at(interior, 0, 0) - v.cos().powi(2)).abs() < h * h);
        assert!((sff.at(interior, 0, 0, 0) + 1.0).abs() < 5.0 * h * h);
        assert!((sff.at(interior, 0, 1, 1) + 1.0).abs() < 5.0 * h * h);
        assert!(sff.at(interior, 0, 0, 1).abs() < 5.0 * h * h);
        assert_eq!(sff.at(interior, 0, 0, 1), sff.at(interior, 0, 1, 0));
    }

    #[test]
    fn connection_forms_are_antisymmetric() {
        let patch = ImmersionPatch::from_fn(grid2(-0.5, 0.5, 9), 3, sphere).unwrap();
        let frame = build_adapted_frame(&patch).unwrap();
        let omega = connection_forms(&frame).unwrap();
        for node in 0..patch.grid().node_count() {
            for k in 0..2 {
                for a in 0..3 {
                    assert_eq!(omega.at(node, k, a, a), 0.0);
                    for b in 0..3 {
                        assert_eq!(omega.at(node, k, a, b), -omega.at(node, k, b, a));
                    }
                }
            }
        }
    }

    #[test]
    fn rank_deficiency_is_reported() {
        let patch = ImmersionPatch::from_fn(grid2(-1.0, 1.0, 7), 3, |p| vec![p[0], p[0], 0.0 * p[1]]).unwrap();
        assert!(matches!(build_adapted_frame(&patch), Err(FrameError::RankDeficient { node: 0, .. })));
    }

    #[test]
    fn field_length_is_checked() {
        let g = grid2(0.0, 1.0, 5);
        assert!(ImmersionPatch::sampled(g.clone(), 3, vec![0.0; 10]).is_err());
        assert!(ImmersionPatch::sampled(g, 1, vec![0.0; 25]).is_err());
    }
}
