//! Spinor fields in the adapted trivialization, the U(1) connection of the
//! determinant bundle, covariant derivatives, and the generalized Killing
//! residual.
//!
//! A spinor value at a node is a multivector `[phi]` of `Cl_{n+m}` expressed
//! relative to the adapted frame; `e_1..e_n` act as the tangent frame and
//! `e_{n+1}..e_{n+m}` as the normal frame. The U(1) connection is stored as
//! the real coefficient `A(d/dx_k)`; the connection form itself is `i A`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clifford::{spin_lift, unit_defect, AlgebraSignature, Multivector, SpinCElement};
use crate::frames::{AdaptedFrame, ChartCoframe, ConnectionFormField, SecondFundamentalFormField};
use crate::grid::ChartGrid;
use crate::{GridError, SpinFieldError};

/// Default tolerance for the unit-fiber invariant on spinor fields.
pub const FIELD_UNIT_TOLERANCE: f64 = 1e-10;

/// Largest neighbour distance accepted when choosing between `+-g`. Unit lifts
/// satisfy `|g - h|^2 + |g + h|^2 = 4`, so the ambiguous midpoint is `sqrt(2)`.
const LIFT_CONTINUITY_LIMIT: f64 = 1.0;

/// Relative gap under which residual maxima count as tied.
pub const ARGMAX_TIE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct U1ConnectionField {
    grid: ChartGrid,
    values: Vec<f64>,
    split: Option<(Vec<f64>, Vec<f64>)>,
}

impl U1ConnectionField {
    pub fn zero(grid: ChartGrid) -> Self {
        let len = grid.node_count() * grid.dim();
        Self {
            grid,
            values: vec![0.0; len],
            split: None,
        }
    }

    /// `values[node * n + k] = A(d/dx_k)` at `node`.
    pub fn new(grid: ChartGrid, values: Vec<f64>) -> Result<Self, GridError> {
        let expected = grid.node_count() * grid.dim();
        if values.len() != expected {
            return Err(GridError::FieldLength {
                expected,
                found: values.len(),
            });
        }
        Ok(Self {
            grid,
            values,
            split: None,
        })
    }

    pub fn from_fn(grid: ChartGrid, f: impl Fn(&[f64], usize) -> f64) -> Self {
        let n = grid.dim();
        let values = (0..grid.node_count())
            .flat_map(|node| {
                let p = grid.point(node);
                (0..n).map(|k| f(&p, k)).collect::<Vec<_>>()
            })
            .collect();
        Self {
            grid,
            values,
            split: None,
        }
    }

    pub fn grid(&self) -> &ChartGrid {
        &self.grid
    }

    pub fn at(&self, node: usize, k: usize) -> f64 {
        self.values[node * self.grid.dim() + k]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Tangent-structure and normal-structure parts, when known.
    pub fn split(&self) -> Option<(&[f64], &[f64])> {
        self.split.as_ref().map(|(a, b)| (a.as_slice(), b.as_slice()))
    }
}

/// Connection on the product circle bundle: `A = A1 + A2` pointwise.
pub fn combine_connections(
    a1: &U1ConnectionField,
    a2: &U1ConnectionField,
) -> Result<U1ConnectionField, SpinFieldError> {
    a1.grid.check_same(&a2.grid)?;
    let values = a1.values.iter().zip(&a2.values).map(|(x, y)| x + y).collect();
    Ok(U1ConnectionField {
        grid: a1.grid.clone(),
        values,
        split: Some((a1.values.clone(), a2.values.clone())),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinorField {
    grid: ChartGrid,
    signature: AlgebraSignature,
    values: Vec<Multivector>,
}

impl SpinorField {
    pub fn new(grid: ChartGrid, signature: AlgebraSignature, values: Vec<Multivector>) -> Result<Self, SpinFieldError> {
        if values.len() != grid.node_count() {
            return Err(GridError::FieldLength {
                expected: grid.node_count(),
                found: values.len(),
            }
            .into());
        }
        if grid.dim() != signature.n() {
            return Err(GridError::AxisCount {
                expected: signature.n(),
                found: grid.dim(),
            }
            .into());
        }
        if let Some(bad) = values.iter().find(|v| v.signature() != signature) {
            return Err(crate::clifford::CliffordError::SignatureMismatch {
                left: signature,
                right: bad.signature(),
            }
            .into());
        }
        Ok(Self { grid, signature, values })
    }

    pub fn constant(grid: ChartGrid, value: Multivector) -> Result<Self, SpinFieldError> {
        let signature = value.signature();
        let values = vec![value; grid.node_count()];
        Self::new(grid, signature, values)
    }

    pub fn grid(&self) -> &ChartGrid {
        &self.grid
    }

    pub fn signature(&self) -> AlgebraSignature {
        self.signature
    }

    pub fn values(&self) -> &[Multivector] {
        &self.values
    }

    pub fn at(&self, node: usize) -> &Multivector {
        &self.values[node]
    }

    pub fn values_mut(&mut self) -> &mut [Multivector] {
        &mut self.values
    }

    /// Largest `|tau(phi) phi - 1|` over the grid with the node where it occurs.
    pub fn max_unit_defect(&self) -> (usize, f64) {
        self.values
            .iter()
            .map(unit_defect)
            .enumerate()
            .fold((0, 0.0), |acc, (i, e)| if e > acc.1 { (i, e) } else { acc })
    }

    /// Fails when some node leaves the unit `Spin^C` fiber.
    pub fn check_unit(&self, tol: f64) -> Result<(), SpinFieldError> {
        let (node, defect) = self.max_unit_defect();
        if defect.is_nan() || defect > tol {
            return Err(SpinFieldError::UnitInvariant { node, defect });
        }
        Ok(())
    }

    /// `d/dx_k [phi]` at `node` by the grid stencil.
    pub fn derivative(&self, node: usize, k: usize) -> Multivector {
        let mut out = Multivector::zero(self.signature);
        for (other, w) in self.grid.first_stencil(node, k) {
            if w != 0.0 {
                out.add_scaled(Complex64::new(w, 0.0), &self.values[other]);
            }
        }
        out
    }
}

/// Which blocks of `omega` enter a covariant derivative.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Blocks {
    /// Full `so(n+m)`: the flat ambient connection restricted to the patch.
    Ambient,
    /// Tangent-tangent and normal-normal blocks only.
    Adapted,
}

/// Unit bivectors `e_a e_b` for `a < b`, cached per call site.
struct Bivectors {
    d: usize,
    n: usize,
    table: Vec<Multivector>,
}

impl Bivectors {
    fn new(sig: AlgebraSignature) -> Self {
        let d = sig.dim();
        let mut table = Vec::with_capacity(d * d);
        for a in 0..d {
            for b in 0..d {
                table.push(&Multivector::generator(sig, a) * &Multivector::generator(sig, b));
            }
        }
        Self { d, n: sig.n(), table }
    }

    fn get(&self, a: usize, b: usize) -> &Multivector {
        &self.table[a * self.d + b]
    }

    /// `1/2 sum_{a<b} omega_ab(d/dx_k) e_a e_b` over the selected blocks.
    fn spin_connection(&self, omega: &ConnectionFormField, node: usize, k: usize, blocks: Blocks) -> Multivector {
        let mut out = Multivector::zero(self.table[0].signature());
        for a in 0..self.d {
            for b in (a + 1)..self.d {
                let mixed = (a < self.n) != (b < self.n);
                if mixed && blocks == Blocks::Adapted {
                    continue;
                }
                let w = omega.at(node, k, a, b);
                if w != 0.0 {
                    out.add_scaled(Complex64::new(0.5 * w, 0.0), self.get(a, b));
                }
            }
        }
        out
    }
}

fn check_inputs(
    phi: &SpinorField,
    omega: &ConnectionFormField,
    a: &U1ConnectionField,
    k: usize,
) -> Result<(), SpinFieldError> {
    phi.grid.check_same(omega.grid())?;
    phi.grid.check_same(&a.grid)?;
    if omega.signature() != phi.signature {
        return Err(crate::clifford::CliffordError::SignatureMismatch {
            left: phi.signature,
            right: omega.signature(),
        }
        .into());
    }
    if k >= phi.grid.dim() {
        return Err(SpinFieldError::Direction {
            axis: k,
            dim: phi.grid.dim(),
        });
    }
    Ok(())
}

fn covariant_derivative(
    phi: &SpinorField,
    omega: &ConnectionFormField,
    a: &U1ConnectionField,
    k: usize,
    blocks: Blocks,
) -> Result<Vec<Multivector>, SpinFieldError> {
    check_inputs(phi, omega, a, k)?;
    let bivectors = Bivectors::new(phi.signature);
    Ok((0..phi.grid.node_count())
        .into_par_iter()
        .map(|node| {
            let value = phi.at(node);
            let mut out = phi.derivative(node, k);
            let connection = bivectors.spin_connection(omega, node, k, blocks);
            out.add_scaled(Complex64::new(1.0, 0.0), &(&connection * value));
            out.add_scaled(Complex64::new(0.0, 0.5 * a.at(node, k)), value);
            out
        })
        .collect())
}

/// `d_k[phi] + 1/2 sum_{a<b} omega_ab e_a e_b [phi] + 1/2 i A [phi]` with the full `omega`.
pub fn ambient_covariant_derivative(
    phi: &SpinorField,
    omega: &ConnectionFormField,
    a: &U1ConnectionField,
    k: usize,
) -> Result<Vec<Multivector>, SpinFieldError> {
    covariant_derivative(phi, omega, a, k, Blocks::Ambient)
}

/// As [`ambient_covariant_derivative`] with only the tangent-tangent and normal-normal blocks.
pub fn adapted_covariant_derivative(
    phi: &SpinorField,
    omega: &ConnectionFormField,
    a: &U1ConnectionField,
    k: usize,
) -> Result<Vec<Multivector>, SpinFieldError> {
    covariant_derivative(phi, omega, a, k, Blocks::Adapted)
}

/// `1/2 sum_i e_i . B(d/dx_k, e_i) . [phi]` at `node`, with `B` valued in the normal generators.
pub fn gauss_term(
    phi: &Multivector,
    sff: &SecondFundamentalFormField,
    coframe: &ChartCoframe,
    node: usize,
    k: usize,
) -> Multivector {
    let sig = phi.signature();
    let (n, m) = (sig.n(), sig.m());
    let mut op = Multivector::zero(sig);
    for i in 0..n {
        let b = sff.along(coframe, node, k, i);
        for (alpha, &coef) in b.iter().enumerate().take(m) {
            if coef != 0.0 {
                let term = &Multivector::generator(sig, i) * &Multivector::generator(sig, n + alpha);
                op.add_scaled(Complex64::new(0.5 * coef, 0.0), &term);
            }
        }
    }
    &op * phi
}

/// Per-node, per-direction residual of the generalized Killing equation.
#[derive(Clone, Debug)]
pub struct KillingResidual {
    grid: ChartGrid,
    values: Vec<Multivector>,
    node_norms: Vec<f64>,
}

impl KillingResidual {
    pub fn grid(&self) -> &ChartGrid {
        &self.grid
    }

    pub fn at(&self, node: usize, k: usize) -> &Multivector {
        &self.values[node * self.grid.dim() + k]
    }

    /// Max over directions of the residual coefficient norm, per node.
    pub fn node_norms(&self) -> &[f64] {
        &self.node_norms
    }

    /// Global maximum and the first node, in node order, within a relative
    /// `1e-9` of it; symmetric ties then resolve the same way under rounding noise.
    pub fn max(&self) -> (usize, f64) {
        let peak = self.node_norms.iter().copied().fold(0.0, f64::max);
        let node = self
            .node_norms
            .iter()
            .position(|&v| v >= peak * (1.0 - ARGMAX_TIE))
            .unwrap_or(0);
        (node, peak)
    }

    /// `node,direction,norm` rows.
    pub fn to_csv(&self) -> String {
        let n = self.grid.dim();
        let mut out = String::from("node,direction,residual_norm\n");
        for node in 0..self.grid.node_count() {
            for k in 0..n {
                out.push_str(&format!("{node},{k},{:.17e}\n", self.at(node, k).norm()));
            }
        }
        out
    }
}

/// Trapezoid integral of `A(d/dx_k)` along axis `k` between two nodes of one grid line.
fn line_integral(a: &U1ConnectionField, from: usize, to: usize, k: usize) -> f64 {
    let stride = a.grid.stride(k);
    let (lo, hi, sign) = if to >= from { (from, to, 1.0) } else { (to, from, -1.0) };
    let sum: f64 = (lo..hi)
        .step_by(stride)
        .map(|node| 0.5 * (a.at(node, k) + a.at(node + stride, k)))
        .sum();
    sign * a.grid.spacing()[k] * sum
}

/// `d_k phi - 1/2 i A phi` with neighbours carried to `node` by the phase
/// `exp(-1/2 i int A)` before differencing, so the stencil commutes with
/// gauge transformations up to the quadrature error of `int A`.
fn transported_derivative(phi: &SpinorField, a: &U1ConnectionField, node: usize, k: usize) -> Multivector {
    let centre = phi.at(node);
    let mut out = Multivector::zero(phi.signature);
    for (other, w) in phi.grid.first_stencil(node, k) {
        if w == 0.0 || other == node {
            continue;
        }
        let link = Complex64::from_polar(1.0, -0.5 * line_integral(a, node, other, k));
        out.add_scaled(link * w, &phi.values[other]);
        out.add_scaled(Complex64::new(-w, 0.0), centre);
    }
    out
}

/// Residual of
/// `nabla^ad_X phi = -1/2 sum_i e_i B(X, e_i) phi + 1/2 i A(X) phi`
/// where `nabla^ad` is the spin connection lifted from the tangent and normal
/// Levi-Civita connections (the tangent-tangent and normal-normal blocks of
/// `omega`). The `d - 1/2 i A` part is differenced covariantly, so the
/// residual picks up the phase `e^{i theta}` under
/// `phi -> e^{i theta} phi, A -> A + 2 d theta`.
pub fn killing_residual(
    phi: &SpinorField,
    sff: &SecondFundamentalFormField,
    omega: &ConnectionFormField,
    a: &U1ConnectionField,
    coframe: &ChartCoframe,
) -> Result<KillingResidual, SpinFieldError> {
    check_inputs(phi, omega, a, 0)?;
    phi.grid.check_same(sff.grid())?;
    phi.grid.check_same(coframe.grid())?;
    let n = phi.grid.dim();
    let bivectors = Bivectors::new(phi.signature);
    let per_node: Vec<Vec<Multivector>> = (0..phi.grid.node_count())
        .into_par_iter()
        .map(|node| {
            let value = phi.at(node);
            (0..n)
                .map(|k| {
                    let mut r = transported_derivative(phi, a, node, k);
                    let connection = bivectors.spin_connection(omega, node, k, Blocks::Adapted);
                    r.add_scaled(Complex64::new(1.0, 0.0), &(&connection * value));
                    r.add_scaled(Complex64::new(1.0, 0.0), &gauss_term(value, sff, coframe, node, k));
                    r
                })
                .collect()
        })
        .collect();
    let node_norms = per_node
        .iter()
        .map(|dirs| dirs.iter().map(Multivector::norm).fold(0.0, f64::max))
        .collect();
    Ok(KillingResidual {
        grid: phi.grid.clone(),
        values: per_node.into_iter().flatten().collect(),
        node_norms,
    })
}

/// Spinor that is constant (`phi0`) in the ambient frame, written in the
/// adapted frame: `[phi](x) = g(x)^{-1} phi0` with `g(x)` the spin lift of the
/// frame rotation, chosen continuously along the row-major sweep. The
/// accompanying U(1) connection is the trivial one of the constant gauge.
pub fn restricted_parallel_spinor(
    frame: &AdaptedFrame,
    phi0: &SpinCElement,
) -> Result<(SpinorField, U1ConnectionField), SpinFieldError> {
    let grid = frame.grid().clone();
    let sig = frame.signature();
    if phi0.signature() != sig {
        return Err(crate::clifford::CliffordError::SignatureMismatch {
            left: sig,
            right: phi0.signature(),
        }
        .into());
    }
    let mut lifts: Vec<SpinCElement> = Vec::with_capacity(grid.node_count());
    for node in 0..grid.node_count() {
        let hint = grid.sweep_predecessor(node).map(|p| &lifts[p]);
        let lift = spin_lift(sig, &frame.rotation(node), hint)?;
        if let Some(h) = hint {
            let distance = lift.value().distance(h.value());
            if distance > LIFT_CONTINUITY_LIMIT {
                return Err(SpinFieldError::LiftDiscontinuity { node, distance });
            }
        }
        lifts.push(lift);
    }
    let values = lifts
        .par_iter()
        .map(|g| g.inverse().compose(phi0).into_value())
        .collect();
    let field = SpinorField::new(grid.clone(), sig, values)?;
    Ok((field, U1ConnectionField::zero(grid)))
}

/// `[phi] -> e^{i theta}[phi]`, `A -> A + 2 d theta` with the grid stencil.
/// When `A` carries a split, the shift is booked on the tangent part.
pub fn gauge_transform(
    phi: &SpinorField,
    a: &U1ConnectionField,
    theta: &[f64],
) -> Result<(SpinorField, U1ConnectionField), SpinFieldError> {
    phi.grid.check_same(&a.grid)?;
    let grid = &phi.grid;
    if theta.len() != grid.node_count() {
        return Err(GridError::FieldLength {
            expected: grid.node_count(),
            found: theta.len(),
        }
        .into());
    }
    let n = grid.dim();
    let values = phi
        .values
        .iter()
        .zip(theta)
        .map(|(v, &t)| v.scale(Complex64::from_polar(1.0, t)))
        .collect();
    let shift: Vec<f64> = (0..grid.node_count())
        .flat_map(|node| (0..n).map(move |k| 2.0 * grid.derivative(theta, node, k)))
        .collect();
    let new_values = a.values.iter().zip(&shift).map(|(x, s)| x + s).collect();
    let split = a.split.as_ref().map(|(a1, a2)| {
        let a1 = a1.iter().zip(&shift).map(|(x, s)| x + s).collect();
        (a1, a2.clone())
    });
    Ok((
        SpinorField {
            grid: grid.clone(),
            signature: phi.signature,
            values,
        },
        U1ConnectionField {
            grid: grid.clone(),
            values: new_values,
            split,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane_grid() -> ChartGrid {
        ChartGrid::spanning(&[(-1.0, 1.0), (-1.0, 1.0)], &[7, 7]).unwrap()
    }

    fn sig() -> AlgebraSignature {
        AlgebraSignature::new(2, 1).unwrap()
    }

    #[test]
    fn combine_examples() {
        let g = plane_grid();
        let zero = U1ConnectionField::zero(g.clone());
        assert!(combine_connections(&zero, &zero).unwrap().values().iter().all(|&x| x == 0.0));
        let c = U1ConnectionField::from_fn(g.clone(), |_, _| 0.75);
        let minus_c = U1ConnectionField::from_fn(g.clone(), |_, _| -0.75);
        let sum = combine_connections(&c, &minus_c).unwrap();
        assert!(sum.values().iter().all(|&x| x == 0.0));
        let (s1, s2) = sum.split().unwrap();
        assert_eq!(s1, c.values());
        assert_eq!(s2, minus_c.values());
        let other = U1ConnectionField::zero(ChartGrid::spanning(&[(0.0, 1.0), (0.0, 1.0)], &[5, 5]).unwrap());
        assert!(matches!(combine_connections(&c, &other), Err(SpinFieldError::Grid(GridError::Mismatch))));
    }

    #[test]
    fn constant_spinor_has_zero_derivative() {
        let g = plane_grid();
        let phi = SpinorField::constant(g.clone(), Multivector::one(sig())).unwrap();
        let omega = ConnectionFormField::zero(g.clone(), sig());
        let a = U1ConnectionField::zero(g);
        for k in 0..2 {
            let d = ambient_covariant_derivative(&phi, &omega, &a, k).unwrap();
            assert!(d.iter().all(|v| v.max_abs() < 1e-14));
        }
    }

    #[test]
    fn u1_term_is_half_i_a() {
        let g = plane_grid();
        let phi = SpinorField::constant(g.clone(), Multivector::one(sig())).unwrap();
        let omega = ConnectionFormField::zero(g.clone(), sig());
        let a = U1ConnectionField::from_fn(g, |_, _| 2.0);
        let d = ambient_covariant_derivative(&phi, &omega, &a, 1).unwrap();
        let i = Multivector::scalar(sig(), Complex64::new(0.0, 1.0));
        assert!(d.iter().all(|v| v.distance(&i) < 1e-14));
    }

    #[test]
    fn direction_out_of_range() {
        let g = plane_grid();
        let phi = SpinorField::constant(g.clone(), Multivector::one(sig())).unwrap();
        let omega = ConnectionFormField::zero(g.clone(), sig());
        let a = U1ConnectionField::zero(g);
        assert!(matches!(
            ambient_covariant_derivative(&phi, &omega, &a, 2),
            Err(SpinFieldError::Direction { axis: 2, dim: 2 })
        ));
    }

    #[test]
    fn gauge_with_zero_and_constant_theta() {
        let g = plane_grid();
        let phi = SpinorField::constant(g.clone(), Multivector::one(sig())).unwrap();
        let a = U1ConnectionField::from_fn(g.clone(), |p, k| p[k] * 0.3);
        let zeros = vec![0.0; g.node_count()];
        let (phi0, a0) = gauge_transform(&phi, &a, &zeros).unwrap();
        assert_eq!(phi0, phi);
        assert_eq!(a0, a);
        let constant = vec![0.4; g.node_count()];
        let (phi1, a1) = gauge_transform(&phi, &a, &constant).unwrap();
        assert_eq!(a1.values(), a.values());
        let expected = Multivector::scalar(sig(), Complex64::from_polar(1.0, 0.4));
        assert!(phi1.values().iter().all(|v| v.distance(&expected) < 1e-15));
    }

    #[test]
    fn residual_is_gauge_covariant_for_bilinear_theta() {
        use crate::frames::{build_adapted_frame, chart_coframe, connection_forms, second_fundamental_form};
        let scenario = crate::scenarios::Scenario::sphere();
        let grid = ChartGrid::spanning(&[(-1.0, 1.0), (-1.0, 1.0)], &[17, 13]).unwrap();
        let patch = crate::scenarios::sample(&scenario, &grid).unwrap();
        let frame = build_adapted_frame(&patch).unwrap();
        let coframe = chart_coframe(&patch, &frame).unwrap();
        let sff = second_fundamental_form(&patch, &frame).unwrap();
        let omega = connection_forms(&frame).unwrap();
        let (phi, _) = restricted_parallel_spinor(&frame, &SpinCElement::identity(frame.signature())).unwrap();
        let a = U1ConnectionField::from_fn(grid.clone(), |p, k| 0.3 * p[1 - k] + 0.1 * p[k] * p[k]);
        let theta: Vec<f64> = (0..grid.node_count()).map(|i| grid.point(i).iter().product()).collect();
        let (phi2, a2) = gauge_transform(&phi, &a, &theta).unwrap();
        let before = killing_residual(&phi, &sff, &omega, &a, &coframe).unwrap();
        let after = killing_residual(&phi2, &sff, &omega, &a2, &coframe).unwrap();
        for (node, &t) in theta.iter().enumerate() {
            let phase = Complex64::from_polar(1.0, t);
            for k in 0..2 {
                assert!(after.at(node, k).distance(&before.at(node, k).scale(phase)) < 1e-12);
            }
        }
        assert_eq!(before.max().0, after.max().0);
    }

    #[test]
    fn unit_check_flags_bad_nodes() {
        let g = plane_grid();
        let mut phi = SpinorField::constant(g, Multivector::one(sig())).unwrap();
        assert!(phi.check_unit(1e-10).is_ok());
        phi.values_mut()[5] = Multivector::scalar(sig(), Complex64::new(1.01, 0.0));
        assert!(matches!(phi.check_unit(1e-10), Err(SpinFieldError::UnitInvariant { node: 5, .. })));
    }
}
