//! The `R^{n+m}`-valued 1-form `xi(X) = <<X phi, phi>>` built from a spinor
//! field, its closedness, integration back to an immersion, and validators
//! comparing the reconstruction with the intrinsic data it was built from.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clifford::{dot, extract_real_vector, Multivector};
use crate::frames::{
    ChartCoframe, ConnectionFormField, ImmersionPatch, MetricField, SecondFundamentalFormField,
};
use crate::grid::ChartGrid;
use crate::spinfield::{SpinorField, FIELD_UNIT_TOLERANCE};
use crate::{GridError, SpinFieldError, WeierstrassError};

/// Realness tolerance for every `tau(phi) X phi`.
pub const REALNESS_TOLERANCE: f64 = 1e-9;

/// Default bound on `max |d xi|` accepted by [`integrate_one_form`].
pub const DEFAULT_CLOSEDNESS_THRESHOLD: f64 = 1e-2;

/// `xi(d/dx_k)` per node, plus the transported adapted frame `xi(e_a)` when
/// the form was built from a spinor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OneFormField {
    grid: ChartGrid,
    ambient_dim: usize,
    values: Vec<f64>,
    transport: Option<Vec<f64>>,
}

impl OneFormField {
    /// `values[(node * n + k) * d + c]` is component `c` of `xi(d/dx_k)`.
    pub fn new(grid: ChartGrid, ambient_dim: usize, values: Vec<f64>) -> Result<Self, GridError> {
        let expected = grid.node_count() * grid.dim() * ambient_dim;
        if values.len() != expected {
            return Err(GridError::FieldLength {
                expected,
                found: values.len(),
            });
        }
        Ok(Self {
            grid,
            ambient_dim,
            values,
            transport: None,
        })
    }

    /// Exact differential of an immersion, for tests and oracles.
    pub fn from_patch(patch: &ImmersionPatch) -> Self {
        let grid = patch.grid().clone();
        let values = (0..grid.node_count())
            .flat_map(|node| (0..grid.dim()).flat_map(move |k| patch.tangent(node, k)))
            .collect();
        Self {
            grid,
            ambient_dim: patch.ambient_dim(),
            values,
            transport: None,
        }
    }

    pub fn grid(&self) -> &ChartGrid {
        &self.grid
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn at(&self, node: usize, k: usize) -> &[f64] {
        let (n, d) = (self.grid.dim(), self.ambient_dim);
        &self.values[(node * n + k) * d..(node * n + k + 1) * d]
    }

    /// `xi(e_{a+1})` at `node`, if available.
    pub fn transported(&self, node: usize, a: usize) -> Option<&[f64]> {
        let d = self.ambient_dim;
        self.transport
            .as_ref()
            .map(|t| &t[(node * d + a) * d..(node * d + a + 1) * d])
    }

    fn transport_raw(&self) -> Result<&[f64], WeierstrassError> {
        self.transport.as_deref().ok_or(WeierstrassError::NoTransport)
    }
}

/// Per-node `xi(d/dx_k)` values and transported frame.
type NodeBlock = (Vec<f64>, Vec<f64>);

/// `xi(d/dx_k) = tau([phi]) [d/dx_k] [phi]`, with `d/dx_k` written in the
/// tangent generators through `coframe`.
pub fn build_one_form(phi: &SpinorField, coframe: &ChartCoframe) -> Result<OneFormField, WeierstrassError> {
    phi.grid().check_same(coframe.grid())?;
    phi.check_unit(FIELD_UNIT_TOLERANCE).map_err(|e| match e {
        SpinFieldError::UnitInvariant { node, defect } => WeierstrassError::UnitInvariant { node, defect },
        other => WeierstrassError::Input(other.to_string()),
    })?;
    let grid = phi.grid().clone();
    let sig = phi.signature();
    let (n, d) = (sig.n(), sig.dim());
    let generators: Vec<Multivector> = (0..d).map(|a| Multivector::generator(sig, a)).collect();
    let blocks: Result<Vec<NodeBlock>, WeierstrassError> = (0..grid.node_count())
        .into_par_iter()
        .map(|node| {
            let value = phi.at(node);
            let left = value.tau();
            let mut transport = Vec::with_capacity(d * d);
            for e in &generators {
                let image = &(&left * e) * value;
                transport.extend_from_slice(&extract_real_vector(&image, REALNESS_TOLERANCE)?);
            }
            let mut chart = vec![0.0; n * d];
            for k in 0..n {
                let dir = coframe.direction(node, k);
                for (i, &c) in dir.iter().enumerate() {
                    for comp in 0..d {
                        chart[k * d + comp] += c * transport[i * d + comp];
                    }
                }
            }
            Ok((chart, transport))
        })
        .collect();
    let (values, transport): (Vec<Vec<f64>>, Vec<Vec<f64>>) = blocks?.into_iter().unzip();
    Ok(OneFormField {
        grid,
        ambient_dim: d,
        values: values.concat(),
        transport: Some(transport.concat()),
    })
}

/// Per node, `max_{k<l} |d_k xi(d/dx_l) - d_l xi(d/dx_k)|`; zeros when `n = 1`.
pub fn closedness_residual(xi: &OneFormField) -> Vec<f64> {
    let grid = &xi.grid;
    let (n, d) = (grid.dim(), xi.ambient_dim);
    (0..grid.node_count())
        .into_par_iter()
        .map(|node| {
            let mut worst = 0.0f64;
            for k in 0..n {
                for l in (k + 1)..n {
                    let mut diff = vec![0.0; d];
                    for (other, w) in grid.first_stencil(node, k) {
                        for (x, y) in diff.iter_mut().zip(xi.at(other, l)) {
                            *x += w * y;
                        }
                    }
                    for (other, w) in grid.first_stencil(node, l) {
                        for (x, y) in diff.iter_mut().zip(xi.at(other, k)) {
                            *x -= w * y;
                        }
                    }
                    worst = worst.max(dot(&diff, &diff).sqrt());
                }
            }
            worst
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegrationOptions {
    pub closedness_threshold: f64,
    /// Error out above the threshold; otherwise integrate and flag the result.
    pub strict: bool,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        Self {
            closedness_threshold: DEFAULT_CLOSEDNESS_THRESHOLD,
            strict: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructedImmersion {
    pub grid: ChartGrid,
    pub ambient_dim: usize,
    pub positions: Vec<f64>,
    pub basepoint: usize,
    pub origin: Vec<f64>,
    pub path_scheme: String,
    /// Largest difference between the two staircase orders before averaging.
    pub path_discrepancy: f64,
    pub closedness_max: f64,
    /// Set when the closedness pre-check failed in non-strict mode.
    pub closedness_warning: bool,
}

impl ReconstructedImmersion {
    pub fn position(&self, node: usize) -> &[f64] {
        &self.positions[node * self.ambient_dim..(node + 1) * self.ambient_dim]
    }

    pub fn as_patch(&self) -> ImmersionPatch {
        ImmersionPatch::sampled(self.grid.clone(), self.ambient_dim, self.positions.clone())
            .expect("reconstruction has consistent sizes")
    }
}

/// Trapezoidal integration along axis-aligned staircase paths from the
/// basepoint, taking the axes in `order`.
fn staircase(xi: &OneFormField, basepoint: usize, origin: &[f64], order: &[usize]) -> Vec<f64> {
    let grid = &xi.grid;
    let d = xi.ambient_dim;
    let base = grid.coords(basepoint);
    let mut f = vec![0.0; grid.node_count() * d];
    f[basepoint * d..(basepoint + 1) * d].copy_from_slice(origin);
    for (step, &axis) in order.iter().enumerate() {
        let pending = &order[step..];
        let h = grid.spacing()[axis];
        let stride = grid.stride(axis);
        let extent = grid.extents()[axis];
        for start in 0..grid.node_count() {
            let c = grid.coords(start);
            if pending.iter().any(|&p| c[p] != base[p]) {
                continue;
            }
            let b = base[axis];
            for j in (b + 1)..extent {
                let (prev, cur) = (start + (j - 1 - b) * stride, start + (j - b) * stride);
                for comp in 0..d {
                    f[cur * d + comp] =
                        f[prev * d + comp] + 0.5 * h * (xi.at(prev, axis)[comp] + xi.at(cur, axis)[comp]);
                }
            }
            for j in (0..b).rev() {
                let (next, cur) = (start - (b - j - 1) * stride, start - (b - j) * stride);
                for comp in 0..d {
                    f[cur * d + comp] =
                        f[next * d + comp] - 0.5 * h * (xi.at(next, axis)[comp] + xi.at(cur, axis)[comp]);
                }
            }
        }
    }
    f
}

/// Integrates `xi` from `basepoint` (where the result equals `origin`).
/// Both the forward and the reversed axis order are integrated and averaged;
/// their largest difference is kept as a diagnostic.
pub fn integrate_one_form(
    xi: &OneFormField,
    basepoint: usize,
    origin: &[f64],
    options: IntegrationOptions,
) -> Result<ReconstructedImmersion, WeierstrassError> {
    let grid = &xi.grid;
    let d = xi.ambient_dim;
    if origin.len() != d {
        return Err(crate::clifford::CliffordError::DimensionMismatch {
            expected: d,
            found: origin.len(),
        }
        .into());
    }
    if basepoint >= grid.node_count() {
        return Err(WeierstrassError::Input(format!("basepoint {basepoint} is not a grid node")));
    }
    let closedness_max = closedness_residual(xi).into_iter().fold(0.0, f64::max);
    let closedness_warning = closedness_max.is_nan() || closedness_max > options.closedness_threshold;
    if closedness_warning && options.strict {
        return Err(WeierstrassError::NotClosedEnough {
            max_residual: closedness_max,
            threshold: options.closedness_threshold,
        });
    }
    let forward: Vec<usize> = (0..grid.dim()).collect();
    let backward: Vec<usize> = forward.iter().rev().copied().collect();
    let a = staircase(xi, basepoint, origin, &forward);
    let b = staircase(xi, basepoint, origin, &backward);
    let path_discrepancy = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let positions = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
    Ok(ReconstructedImmersion {
        grid: grid.clone(),
        ambient_dim: d,
        positions,
        basepoint,
        origin: origin.to_vec(),
        path_scheme: "staircase-trapezoid, forward and reversed axis order averaged".into(),
        path_discrepancy,
        closedness_max,
        closedness_warning,
    })
}

/// Per-node deviation of a validator plus its maximum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldReport {
    pub max_error: f64,
    pub max_node: usize,
    pub per_node: Vec<f64>,
}

impl FieldReport {
    fn from_per_node(per_node: Vec<f64>) -> Self {
        let (max_node, max_error) = per_node
            .iter()
            .enumerate()
            .fold((0, 0.0), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        Self {
            max_error,
            max_node,
            per_node,
        }
    }

    pub fn to_csv(&self, column: &str) -> String {
        let mut out = format!("node,{column}\n");
        for (i, v) in self.per_node.iter().enumerate() {
            out.push_str(&format!("{i},{v:.17e}\n"));
        }
        out
    }
}

/// Finite-difference pullback metric of the reconstruction against `metric`.
pub fn verify_isometry(rec: &ReconstructedImmersion, metric: &MetricField) -> Result<FieldReport, WeierstrassError> {
    rec.grid.check_same(metric.grid())?;
    let patch = rec.as_patch();
    let pulled = crate::frames::induced_metric(&patch);
    let per_node = (0..rec.grid.node_count())
        .map(|node| {
            pulled
                .node_block(node)
                .iter()
                .zip(metric.node_block(node))
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(FieldReport::from_per_node(per_node))
}

/// Orthonormal basis of the reconstruction's tangent space at `node`.
fn tangent_basis(patch: &ImmersionPatch, node: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(patch.chart_dim());
    for k in 0..patch.chart_dim() {
        let mut t = patch.tangent(node, k);
        for _ in 0..2 {
            for b in &basis {
                let p = dot(&t, b);
                t.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
            }
        }
        let norm = dot(&t, &t).sqrt();
        t.iter_mut().for_each(|x| *x /= norm);
        basis.push(t);
    }
    basis
}

fn normal_part(mut v: Vec<f64>, basis: &[Vec<f64>]) -> Vec<f64> {
    for b in basis {
        let p = dot(&v, b);
        v.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
    }
    v
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Compares the normal part of `d^2 F_rec(d/dx_k, d/dx_l)` with
/// `xi(B(d/dx_k, d/dx_l))`, the second fundamental form transported by `xi`.
pub fn verify_second_fundamental_form(
    rec: &ReconstructedImmersion,
    xi: &OneFormField,
    sff: &SecondFundamentalFormField,
    coframe: &ChartCoframe,
) -> Result<FieldReport, WeierstrassError> {
    rec.grid.check_same(&xi.grid)?;
    rec.grid.check_same(sff.grid())?;
    rec.grid.check_same(coframe.grid())?;
    let transport = xi.transport_raw()?;
    let sig = sff.signature();
    let (n, m, d) = (sig.n(), sig.m(), sig.dim());
    let patch = rec.as_patch();
    let per_node = (0..rec.grid.node_count())
        .into_par_iter()
        .map(|node| {
            let basis = tangent_basis(&patch, node);
            let mut worst = 0.0f64;
            for k in 0..n {
                for l in k..n {
                    let lhs = normal_part(patch.hessian(node, k, l), &basis);
                    let b = sff.on_chart(coframe, node, k, l);
                    let mut rhs = vec![0.0; d];
                    for a in 0..m {
                        let e = &transport[(node * d + n + a) * d..(node * d + n + a + 1) * d];
                        rhs.iter_mut().zip(e).for_each(|(x, y)| *x += b[a] * y);
                    }
                    worst = worst.max(distance(&lhs, &rhs));
                }
            }
            worst
        })
        .collect();
    Ok(FieldReport::from_per_node(per_node))
}

/// Compares `xi(nabla'_X eta)`, from the normal-normal block of `omega`, with
/// the normal part of the chart derivative of `xi(eta)` along the
/// reconstruction, for every normal frame field `eta = E_{n+a}`.
pub fn verify_normal_connection(
    rec: &ReconstructedImmersion,
    xi: &OneFormField,
    omega: &ConnectionFormField,
) -> Result<FieldReport, WeierstrassError> {
    rec.grid.check_same(&xi.grid)?;
    rec.grid.check_same(omega.grid())?;
    let sig = omega.signature();
    let (n, m, d) = (sig.n(), sig.m(), sig.dim());
    if m == 0 {
        return Err(WeierstrassError::NoNormalBundle);
    }
    let transport = xi.transport_raw()?;
    let patch = rec.as_patch();
    let grid = &rec.grid;
    let per_node = (0..grid.node_count())
        .into_par_iter()
        .map(|node| {
            let basis = tangent_basis(&patch, node);
            let derivs: Vec<Vec<f64>> = (0..n).map(|k| grid.derivative_block(transport, d * d, node, k)).collect();
            let mut worst = 0.0f64;
            for (k, deriv) in derivs.iter().enumerate() {
                for a in 0..m {
                    let row = n + a;
                    let rhs = normal_part(deriv[row * d..(row + 1) * d].to_vec(), &basis);
                    let mut lhs = vec![0.0; d];
                    for b in 0..m {
                        let w = omega.at(node, k, row, n + b);
                        let e = &transport[(node * d + n + b) * d..(node * d + n + b + 1) * d];
                        lhs.iter_mut().zip(e).for_each(|(x, y)| *x += w * y);
                    }
                    worst = worst.max(distance(&lhs, &rhs));
                }
            }
            worst
        })
        .collect();
    Ok(FieldReport::from_per_node(per_node))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RigidAlignment {
    pub rotation: DMatrix<f64>,
    pub translation: DVector<f64>,
    /// RMS distance between `rotation * p + translation` and the reference.
    pub rms: f64,
}

/// Least-squares proper rigid motion taking `reconstructed` onto `reference`
/// (both flattened `count x dim`).
pub fn rigid_align(reconstructed: &[f64], reference: &[f64], dim: usize) -> Result<RigidAlignment, WeierstrassError> {
    if reconstructed.len() != reference.len() || !reconstructed.len().is_multiple_of(dim) {
        return Err(WeierstrassError::CountMismatch {
            reconstructed: reconstructed.len() / dim.max(1),
            reference: reference.len() / dim.max(1),
        });
    }
    let count = reconstructed.len() / dim;
    if count < dim {
        return Err(WeierstrassError::DegenerateConfiguration { rank: count, dim });
    }
    let p = DMatrix::from_row_slice(count, dim, reconstructed);
    let q = DMatrix::from_row_slice(count, dim, reference);
    let cp = p.row_mean();
    let cq = q.row_mean();
    let mut h = DMatrix::zeros(dim, dim);
    for r in 0..count {
        let a = (p.row(r) - &cp).transpose();
        let b = q.row(r) - &cq;
        h += a * b;
    }
    let svd = h.clone().svd(true, true);
    let (u, v_t) = (svd.u.expect("requested U"), svd.v_t.expect("requested V^T"));
    let sigma = &svd.singular_values;
    let sigma_max = sigma.max();
    let rank = sigma.iter().filter(|&&s| s > 1e-12 * sigma_max.max(f64::MIN_POSITIVE)).count();
    // A proper rotation is unique as long as at most one direction is degenerate.
    if sigma_max == 0.0 || rank + 1 < dim {
        return Err(WeierstrassError::DegenerateConfiguration { rank, dim });
    }
    let v = v_t.transpose();
    let mut correction = DMatrix::identity(dim, dim);
    if (&v * u.transpose()).determinant() < 0.0 {
        let weakest = sigma.imin();
        correction[(weakest, weakest)] = -1.0;
    }
    let rotation = &v * correction * u.transpose();
    let translation = cq.transpose() - &rotation * cp.transpose();
    let mut sq = 0.0;
    for r in 0..count {
        let moved = &rotation * p.row(r).transpose() + &translation;
        sq += (moved - q.row(r).transpose()).norm_squared();
    }
    Ok(RigidAlignment {
        rotation,
        translation,
        rms: (sq / count as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid2() -> ChartGrid {
        ChartGrid::spanning(&[(0.5, 1.5), (-0.5, 0.5)], &[21, 21]).unwrap()
    }

    #[test]
    fn constant_form_integrates_to_linear_map() {
        let g = grid2();
        let c = [[1.0, 2.0, -1.0], [0.5, 0.0, 3.0]];
        let values: Vec<f64> = (0..g.node_count()).flat_map(|_| c.iter().flatten().copied()).collect();
        let xi = OneFormField::new(g.clone(), 3, values).unwrap();
        assert!(closedness_residual(&xi).iter().all(|&r| r == 0.0));
        let base = g.center();
        let origin = [0.1, 0.2, 0.3];
        let rec = integrate_one_form(&xi, base, &origin, IntegrationOptions::default()).unwrap();
        let p0 = g.point(base);
        for node in 0..g.node_count() {
            let p = g.point(node);
            for comp in 0..3 {
                let expected = origin[comp] + c[0][comp] * (p[0] - p0[0]) + c[1][comp] * (p[1] - p0[1]);
                assert!((rec.position(node)[comp] - expected).abs() < 1e-12);
            }
        }
        assert_eq!(rec.position(base), &origin);
        assert!(rec.path_discrepancy < 1e-12);
    }

    #[test]
    fn non_closed_form_is_rejected() {
        let g = grid2();
        // xi = (du, dv, u^2 dv) has d xi = 2u du ^ dv in the last component.
        let values: Vec<f64> = (0..g.node_count())
            .flat_map(|node| {
                let u = g.point(node)[0];
                vec![1.0, 0.0, 0.0, 0.0, 1.0, u * u]
            })
            .collect();
        let xi = OneFormField::new(g.clone(), 3, values).unwrap();
        let residual = closedness_residual(&xi);
        for (node, r) in residual.iter().enumerate() {
            let u = g.point(node)[0];
            assert!((r - 2.0 * u).abs() < 1e-9, "node {node}: {r} vs {}", 2.0 * u);
        }
        assert!(matches!(
            integrate_one_form(&xi, 0, &[0.0; 3], IntegrationOptions::default()),
            Err(WeierstrassError::NotClosedEnough { .. })
        ));
        let lenient = IntegrationOptions {
            strict: false,
            ..Default::default()
        };
        assert!(integrate_one_form(&xi, 0, &[0.0; 3], lenient).unwrap().closedness_warning);
    }

    #[test]
    fn rigid_align_recovers_motion() {
        let pts: Vec<f64> = (0..30)
            .flat_map(|i| {
                let t = i as f64 * 0.37;
                vec![t.sin(), (2.0 * t).cos(), t * 0.1]
            })
            .collect();
        let r = nalgebra::Rotation3::from_euler_angles(0.3, -1.2, 2.0);
        let t = nalgebra::Vector3::new(1.0, -2.0, 0.5);
        let moved: Vec<f64> = pts
            .chunks(3)
            .flat_map(|p| {
                let v = r * nalgebra::Vector3::new(p[0], p[1], p[2]) + t;
                vec![v.x, v.y, v.z]
            })
            .collect();
        let fit = rigid_align(&pts, &moved, 3).unwrap();
        assert!(fit.rms < 1e-10);
        assert!((fit.rotation.determinant() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rigid_align_errors() {
        assert!(matches!(
            rigid_align(&[0.0; 9], &[0.0; 6], 3),
            Err(WeierstrassError::CountMismatch { .. })
        ));
        let line: Vec<f64> = (0..10).flat_map(|i| vec![i as f64, 0.0, 0.0]).collect();
        assert!(matches!(
            rigid_align(&line, &line, 3),
            Err(WeierstrassError::DegenerateConfiguration { .. })
        ));
    }

    #[test]
    fn planar_point_sets_still_align() {
        let pts: Vec<f64> = (0..25).flat_map(|i| vec![(i % 5) as f64, (i / 5) as f64, 0.0]).collect();
        let fit = rigid_align(&pts, &pts, 3).unwrap();
        assert!(fit.rms < 1e-12);
        assert!((fit.rotation - DMatrix::identity(3, 3)).amax() < 1e-12);
    }
}
