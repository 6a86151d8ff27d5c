//! The group `Spin^C(d)` inside the complexified Clifford algebra: unit even
//! elements `g s` with `g` in `Spin(d)` and `s` a unit complex phase.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, RngExt};

use super::{extract_real_vector, AlgebraSignature, CliffordError, Multivector, RealVector};

/// Default tolerance for the unit invariant `tau(x) x = 1`.
pub const UNIT_TOLERANCE: f64 = 1e-12;

/// Realness tolerance used when reading vectors back out of `g v g^{-1}`.
pub const ADJOINT_TOLERANCE: f64 = 1e-9;

const ROTATION_TOLERANCE: f64 = 1e-10;
const LIFT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct SpinCElement {
    value: Multivector,
}

/// Largest coefficient of `tau(x) x - 1`.
pub fn unit_defect(x: &Multivector) -> f64 {
    let mut p = &x.tau() * x;
    p.set_coeff(0, p.coeff(0) - 1.0);
    p.max_abs()
}

impl SpinCElement {
    pub fn new(value: Multivector) -> Result<Self, CliffordError> {
        Self::with_tolerance(value, UNIT_TOLERANCE)
    }

    /// Validates evenness, the unit invariant, and that conjugation maps
    /// every generator to a real vector.
    pub fn with_tolerance(value: Multivector, tol: f64) -> Result<Self, CliffordError> {
        let odd = value.odd_magnitude();
        if odd > tol {
            return Err(CliffordError::NotSpinC(format!("odd-grade part of magnitude {odd:.3e}")));
        }
        let defect = unit_defect(&value);
        if defect > tol {
            return Err(CliffordError::NotSpinC(format!("tau(x)x - 1 has magnitude {defect:.3e}")));
        }
        let sig = value.signature();
        let inverse = value.tau();
        for i in 0..sig.dim() {
            let image = &(&value * &Multivector::generator(sig, i)) * &inverse;
            if let Err(err) = extract_real_vector(&image, tol.max(ADJOINT_TOLERANCE)) {
                return Err(CliffordError::NotSpinC(format!("conjugating e{} fails: {err}", i + 1)));
            }
        }
        Ok(Self { value })
    }

    pub(crate) fn from_unchecked(value: Multivector) -> Self {
        Self { value }
    }

    pub fn identity(sig: AlgebraSignature) -> Self {
        Self { value: Multivector::one(sig) }
    }

    /// `cos(angle/2) + sin(angle/2) e_i e_j`: rotates `e_i` towards `e_j` by `angle`.
    pub fn rotor(sig: AlgebraSignature, i: usize, j: usize, angle: f64) -> Self {
        assert!(i != j && i < sig.dim() && j < sig.dim(), "invalid rotation plane");
        let plane = &Multivector::generator(sig, i) * &Multivector::generator(sig, j);
        let mut value = plane.scale_real((angle / 2.0).sin());
        value.set_coeff(0, Complex64::new((angle / 2.0).cos(), 0.0));
        Self { value }
    }

    /// Unit complex scalar `e^{i theta}`.
    pub fn phase(sig: AlgebraSignature, theta: f64) -> Self {
        Self {
            value: Multivector::scalar(sig, Complex64::from_polar(1.0, theta)),
        }
    }

    /// Product of rotors in every coordinate plane with uniform random angles,
    /// times a random phase.
    pub fn random<R: Rng + ?Sized>(sig: AlgebraSignature, rng: &mut R) -> Self {
        let d = sig.dim();
        let mut g = Self::identity(sig);
        for i in 0..d {
            for j in (i + 1)..d {
                let angle = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
                g = g.compose(&Self::rotor(sig, i, j, angle));
            }
        }
        let theta = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        g.compose(&Self::phase(sig, theta))
    }

    pub fn value(&self) -> &Multivector {
        &self.value
    }

    pub fn into_value(self) -> Multivector {
        self.value
    }

    pub fn signature(&self) -> AlgebraSignature {
        self.value.signature()
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self {
            value: &self.value * &other.value,
        }
    }

    /// `tau(g)`, which is the group inverse.
    pub fn inverse(&self) -> Self {
        Self { value: self.value.tau() }
    }

    pub fn negate(&self) -> Self {
        Self { value: -&self.value }
    }

    /// Matrix of `v -> g v g^{-1}`; column `j` is the image of `e_{j+1}`.
    pub fn rotation_matrix(&self) -> Result<DMatrix<f64>, CliffordError> {
        let d = self.signature().dim();
        let mut out = DMatrix::zeros(d, d);
        for j in 0..d {
            let image = adjoint_action(self, &RealVector::basis(d, j))?;
            for i in 0..d {
                out[(i, j)] = image[i];
            }
        }
        Ok(out)
    }
}

/// `g v g^{-1}` read back as a real vector. The phase of `g` cancels.
pub fn adjoint_action(g: &SpinCElement, v: &RealVector) -> Result<RealVector, CliffordError> {
    let sig = g.signature();
    let embedded = super::vector_embed(sig, v)?;
    let image = &(&g.value * &embedded) * &g.value.tau();
    extract_real_vector(&image, ADJOINT_TOLERANCE)
}

/// Lifts a rotation matrix to `Spin(d)`.
///
/// `rotation` is eliminated to the identity by Givens rotations; each one
/// lifts to a planar rotor and the product of the rotors is the lift. Of
/// the two lifts `+-g` the one closer to `hint` is returned; without a hint
/// the scalar part is made nonnegative (ties resolved by making the
/// lowest nonzero blade positive).
pub fn spin_lift(
    sig: AlgebraSignature,
    rotation: &DMatrix<f64>,
    hint: Option<&SpinCElement>,
) -> Result<SpinCElement, CliffordError> {
    let d = sig.dim();
    if rotation.nrows() != d || rotation.ncols() != d {
        return Err(CliffordError::DimensionMismatch {
            expected: d,
            found: rotation.nrows(),
        });
    }
    let orthogonality = (rotation.transpose() * rotation - DMatrix::identity(d, d)).amax();
    let determinant = rotation.determinant();
    let off = (determinant - 1.0).abs();
    if orthogonality.is_nan() || off.is_nan() || orthogonality > ROTATION_TOLERANCE || off > ROTATION_TOLERANCE {
        return Err(CliffordError::NotARotation {
            orthogonality_error: orthogonality,
            determinant,
        });
    }

    let mut work = rotation.clone();
    let mut lift = Multivector::one(sig);
    for col in 0..d {
        for row in ((col + 1)..d).rev() {
            let a = work[(col, col)];
            let b = work[(row, col)];
            if b == 0.0 {
                continue;
            }
            let rho = a.hypot(b);
            let (cs, sn) = (a / rho, b / rho);
            for k in 0..d {
                let top = work[(col, k)];
                let bottom = work[(row, k)];
                work[(col, k)] = cs * top + sn * bottom;
                work[(row, k)] = -sn * top + cs * bottom;
            }
            // The transpose of this Givens step rotates e_col towards e_row.
            let angle = sn.atan2(cs);
            lift = &lift * SpinCElement::rotor(sig, col, row, angle).value();
        }
    }
    // What remains is diagonal with an even number of -1 entries.
    let flipped: Vec<usize> = (0..d).filter(|&i| work[(i, i)] < 0.0).collect();
    for pair in flipped.chunks(2) {
        if let [i, j] = *pair {
            lift = &lift * &(&Multivector::generator(sig, i) * &Multivector::generator(sig, j));
        }
    }

    let mut lift = SpinCElement::from_unchecked(lift);
    let flip = match hint {
        Some(h) => lift.value.distance(&h.value) > lift.value.distance(&(-&h.value)),
        None => {
            let s = lift.value.scalar_part().re;
            if s.abs() > 1e-12 {
                s < 0.0
            } else {
                lift.value
                    .coeffs()
                    .iter()
                    .find(|c| c.norm() > 1e-12)
                    .is_some_and(|c| c.re < 0.0)
            }
        }
    };
    if flip {
        lift = lift.negate();
    }

    let reproduced = lift.rotation_matrix()?;
    let error = (&reproduced - rotation).amax();
    if error.is_nan() || error > LIFT_TOLERANCE {
        return Err(CliffordError::NotARotation {
            orthogonality_error: error,
            determinant,
        });
    }
    Ok(lift)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sig(n: usize, m: usize) -> AlgebraSignature {
        AlgebraSignature::new(n, m).unwrap()
    }

    /// 2x2 rotation embedded in the (i, j) plane.
    fn plane_rotation(d: usize, i: usize, j: usize, angle: f64) -> DMatrix<f64> {
        let mut r = DMatrix::identity(d, d);
        r[(i, i)] = angle.cos();
        r[(j, j)] = angle.cos();
        r[(j, i)] = angle.sin();
        r[(i, j)] = -angle.sin();
        r
    }

    #[test]
    fn identity_acts_trivially() {
        let s = sig(2, 1);
        let v = RealVector::new(vec![0.3, -1.0, 2.0]);
        let out = adjoint_action(&SpinCElement::identity(s), &v).unwrap();
        assert_eq!(out, v);
    }

    #[test]
    fn planar_rotor_matches_rotation_matrix() {
        let s = sig(2, 2);
        let theta = 0.7;
        let g = SpinCElement::rotor(s, 0, 1, theta);
        let out = adjoint_action(&g, &RealVector::basis(4, 0)).unwrap();
        assert!((out[0] - theta.cos()).abs() < 1e-15);
        assert!((out[1] - theta.sin()).abs() < 1e-15);
        assert!(out[2].abs() < 1e-15 && out[3].abs() < 1e-15);
    }

    #[test]
    fn phase_cancels_in_adjoint_action() {
        let s = sig(3, 1);
        let g = SpinCElement::rotor(s, 1, 3, -1.1);
        let gs = g.compose(&SpinCElement::phase(s, 0.4));
        let v = RealVector::new(vec![1.0, 2.0, 3.0, 4.0]);
        let a = adjoint_action(&g, &v).unwrap();
        let b = adjoint_action(&gs, &v).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn random_elements_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in 1..=6 {
            let s = sig(d, 0);
            let g = SpinCElement::random(s, &mut rng);
            assert!(SpinCElement::new(g.value().clone()).is_ok(), "d = {d}");
        }
    }

    #[test]
    fn validation_rejects_non_members() {
        let s = sig(2, 1);
        let e1 = Multivector::generator(s, 0);
        assert!(SpinCElement::new(e1).is_err());
        let two = Multivector::scalar(s, Complex64::new(2.0, 0.0));
        assert!(SpinCElement::new(two).is_err());
    }

    #[test]
    fn lift_of_identity_is_one() {
        let s = sig(2, 1);
        let g = spin_lift(s, &DMatrix::identity(3, 3), None).unwrap();
        assert_eq!(g, SpinCElement::identity(s));
    }

    #[test]
    fn lift_of_planar_rotation() {
        let s = sig(2, 1);
        let theta = 1.3;
        let g = spin_lift(s, &plane_rotation(3, 0, 1, theta), None).unwrap();
        let expected = SpinCElement::rotor(s, 0, 1, theta);
        assert!(g.value().distance(expected.value()) < 1e-14);
        // The hint selects the other sheet.
        let g = spin_lift(s, &plane_rotation(3, 0, 1, theta), Some(&expected.negate())).unwrap();
        assert!(g.value().distance(&-expected.value()) < 1e-14);
    }

    #[test]
    fn lift_of_half_turns() {
        let s = sig(4, 0);
        let r = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, 1.0, -1.0, 1.0]));
        let g = spin_lift(s, &r, None).unwrap();
        assert!((g.rotation_matrix().unwrap() - r).amax() < 1e-14);
    }

    #[test]
    fn lift_rejects_reflections() {
        let s = sig(2, 1);
        let r = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, 1.0, 1.0]));
        assert!(matches!(spin_lift(s, &r, None), Err(CliffordError::NotARotation { .. })));
        let skew = DMatrix::from_row_slice(3, 3, &[1.0, 0.1, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert!(spin_lift(s, &skew, None).is_err());
    }
}
