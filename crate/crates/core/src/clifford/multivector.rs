//! Dense multivectors of the complexified Clifford algebra `Cl_{n+m}`.
//!
//! Blades are addressed by a `d`-bit mask: bit `i` set means generator
//! `e_{i+1}` is present, and the blade is the product of its generators in
//! increasing index order. Generators square to `-1`, so for a real vector
//! `v` the product `v v` equals `-|v|^2`.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{AlgebraSignature, CliffordError, RealVector};

/// Dimensions up to this bound use a precomputed sign table.
const SIGN_TABLE_MAX_DIM: usize = 8;

static SIGN_TABLES: [OnceLock<Vec<i8>>; SIGN_TABLE_MAX_DIM + 1] =
    [const { OnceLock::new() }; SIGN_TABLE_MAX_DIM + 1];

/// Sign of `e_A e_B = sign * e_{A xor B}` under `e_i e_i = -1`.
#[inline]
pub fn blade_product_sign(a: usize, b: usize) -> f64 {
    let mut swaps = 0u32;
    let mut shifted = a >> 1;
    while shifted != 0 {
        swaps += (shifted & b).count_ones();
        shifted >>= 1;
    }
    swaps += (a & b).count_ones();
    if swaps & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn sign_table(dim: usize) -> Option<&'static [i8]> {
    if dim > SIGN_TABLE_MAX_DIM {
        return None;
    }
    let table = SIGN_TABLES[dim].get_or_init(|| {
        let count = 1usize << dim;
        let mut table = Vec::with_capacity(count * count);
        for a in 0..count {
            for b in 0..count {
                table.push(blade_product_sign(a, b) as i8);
            }
        }
        table
    });
    Some(table.as_slice())
}

/// Grade of a blade mask.
#[inline]
pub fn grade(blade: usize) -> u32 {
    blade.count_ones()
}

/// Sign applied by `tau` to a grade-`k` blade: `(-1)^k` times the reversal sign.
#[inline]
fn tau_sign(k: u32) -> f64 {
    // (-1)^{k(k+1)/2}
    if (k * (k + 1) / 2).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Multivector {
    sig: AlgebraSignature,
    coeffs: Vec<Complex64>,
}

impl Multivector {
    pub fn zero(sig: AlgebraSignature) -> Self {
        Self {
            sig,
            coeffs: vec![Complex64::new(0.0, 0.0); sig.blade_count()],
        }
    }

    pub fn scalar(sig: AlgebraSignature, value: Complex64) -> Self {
        let mut mv = Self::zero(sig);
        mv.coeffs[0] = value;
        mv
    }

    pub fn one(sig: AlgebraSignature) -> Self {
        Self::scalar(sig, Complex64::new(1.0, 0.0))
    }

    /// Single blade `value * e_A`.
    pub fn blade(sig: AlgebraSignature, mask: usize, value: Complex64) -> Self {
        assert!(mask < sig.blade_count(), "blade mask out of range");
        let mut mv = Self::zero(sig);
        mv.coeffs[mask] = value;
        mv
    }

    /// Generator `e_{index+1}` (zero-based `index`).
    pub fn generator(sig: AlgebraSignature, index: usize) -> Self {
        Self::blade(sig, 1 << index, Complex64::new(1.0, 0.0))
    }

    pub fn from_coeffs(sig: AlgebraSignature, coeffs: Vec<Complex64>) -> Result<Self, CliffordError> {
        if coeffs.len() != sig.blade_count() {
            return Err(CliffordError::DimensionMismatch {
                expected: sig.blade_count(),
                found: coeffs.len(),
            });
        }
        if let Some(i) = coeffs.iter().position(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(CliffordError::NonFinite { blade: i });
        }
        Ok(Self { sig, coeffs })
    }

    pub fn signature(&self) -> AlgebraSignature {
        self.sig
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, mask: usize) -> Complex64 {
        self.coeffs[mask]
    }

    pub fn set_coeff(&mut self, mask: usize, value: Complex64) {
        self.coeffs[mask] = value;
    }

    pub fn scalar_part(&self) -> Complex64 {
        self.coeffs[0]
    }

    fn check_signature(&self, other: &Self) -> Result<(), CliffordError> {
        if self.sig != other.sig {
            return Err(CliffordError::SignatureMismatch {
                left: self.sig,
                right: other.sig,
            });
        }
        Ok(())
    }

    /// Clifford product `self * other`.
    pub fn product(&self, other: &Self) -> Result<Self, CliffordError> {
        self.check_signature(other)?;
        let mut out = Self::zero(self.sig);
        self.product_into(other, &mut out.coeffs);
        Ok(out)
    }

    fn product_into(&self, other: &Self, out: &mut [Complex64]) {
        let count = self.coeffs.len();
        match sign_table(self.sig.dim()) {
            Some(table) => {
                for (a, &ca) in self.coeffs.iter().enumerate() {
                    if ca.re == 0.0 && ca.im == 0.0 {
                        continue;
                    }
                    let row = &table[a * count..(a + 1) * count];
                    for (b, &cb) in other.coeffs.iter().enumerate() {
                        out[a ^ b] += ca * cb * f64::from(row[b]);
                    }
                }
            }
            None => {
                for (a, &ca) in self.coeffs.iter().enumerate() {
                    if ca.re == 0.0 && ca.im == 0.0 {
                        continue;
                    }
                    for (b, &cb) in other.coeffs.iter().enumerate() {
                        out[a ^ b] += ca * cb * blade_product_sign(a, b);
                    }
                }
            }
        }
    }

    /// Conjugate-linear anti-automorphism: on `a e_{i1}..e_{ik}` returns
    /// `(-1)^k conj(a) e_{ik}..e_{i1}`.
    pub fn tau(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(mask, c)| c.conj() * tau_sign(grade(mask)))
            .collect();
        Self { sig: self.sig, coeffs }
    }

    /// Plain complex conjugation of every coefficient.
    pub fn conj(&self) -> Self {
        Self {
            sig: self.sig,
            coeffs: self.coeffs.iter().map(|c| c.conj()).collect(),
        }
    }

    /// Grade-`k` projection.
    pub fn grade_part(&self, k: u32) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(mask, &c)| if grade(mask) == k { c } else { Complex64::new(0.0, 0.0) })
            .collect();
        Self { sig: self.sig, coeffs }
    }

    /// Largest odd-grade coefficient magnitude; zero for even elements.
    pub fn odd_magnitude(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(mask, _)| grade(*mask) % 2 == 1)
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            sig: self.sig,
            coeffs: self.coeffs.iter().map(|&c| c * factor).collect(),
        }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        Self {
            sig: self.sig,
            coeffs: self.coeffs.iter().map(|&c| c * factor).collect(),
        }
    }

    /// `self += factor * other`.
    pub fn add_scaled(&mut self, factor: Complex64, other: &Self) {
        assert_eq!(self.sig, other.sig, "signature mismatch");
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += factor * b;
        }
    }

    /// Euclidean norm of the coefficient vector.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// Clifford product; errors on signature mismatch.
pub fn mv_product(a: &Multivector, b: &Multivector) -> Result<Multivector, CliffordError> {
    a.product(b)
}

pub fn tau(a: &Multivector) -> Multivector {
    a.tau()
}

/// Clifford-valued pairing `<<x1, x2>> = tau(x2) x1`.
pub fn cl_inner(x1: &Multivector, x2: &Multivector) -> Result<Multivector, CliffordError> {
    x2.tau().product(x1)
}

/// Grade-1 injection of a real vector.
pub fn vector_embed(sig: AlgebraSignature, v: &RealVector) -> Result<Multivector, CliffordError> {
    if v.len() != sig.dim() {
        return Err(CliffordError::DimensionMismatch {
            expected: sig.dim(),
            found: v.len(),
        });
    }
    let mut mv = Multivector::zero(sig);
    for (i, &x) in v.iter().enumerate() {
        mv.coeffs[1 << i] = Complex64::new(x, 0.0);
    }
    Ok(mv)
}

/// Grade-1 real part, provided everything else is below `tol`.
pub fn extract_real_vector(a: &Multivector, tol: f64) -> Result<RealVector, CliffordError> {
    let mut worst = (0usize, 0.0f64);
    let mut out = Vec::with_capacity(a.sig.dim());
    for (mask, c) in a.coeffs.iter().enumerate() {
        let offending = if grade(mask) == 1 {
            out.push(c.re);
            c.im.abs()
        } else {
            c.norm()
        };
        if offending > worst.1 {
            worst = (mask, offending);
        }
    }
    if worst.1 > tol {
        return Err(CliffordError::NotARealVector {
            blade: worst.0,
            magnitude: worst.1,
        });
    }
    Ok(RealVector::new(out))
}

impl Mul for &Multivector {
    type Output = Multivector;

    /// Panics on signature mismatch; use [`Multivector::product`] for the fallible form.
    fn mul(self, rhs: &Multivector) -> Multivector {
        self.product(rhs).expect("multivector signature mismatch")
    }
}

impl Add for &Multivector {
    type Output = Multivector;

    fn add(self, rhs: &Multivector) -> Multivector {
        assert_eq!(self.sig, rhs.sig, "multivector signature mismatch");
        Multivector {
            sig: self.sig,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Multivector {
    type Output = Multivector;

    fn sub(self, rhs: &Multivector) -> Multivector {
        assert_eq!(self.sig, rhs.sig, "multivector signature mismatch");
        Multivector {
            sig: self.sig,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &Multivector {
    type Output = Multivector;

    fn neg(self) -> Multivector {
        self.scale_real(-1.0)
    }
}

/// Wire form: `{"n":..,"m":..,"coeffs":[[re,im],..]}` in blade-mask order.
#[derive(Serialize, Deserialize)]
struct MultivectorRepr {
    n: usize,
    m: usize,
    coeffs: Vec<[f64; 2]>,
}

impl Serialize for Multivector {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        MultivectorRepr {
            n: self.sig.n(),
            m: self.sig.m(),
            coeffs: self.coeffs.iter().map(|c| [c.re, c.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Multivector {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = MultivectorRepr::deserialize(deserializer)?;
        let sig = AlgebraSignature::new(repr.n, repr.m).map_err(serde::de::Error::custom)?;
        let coeffs = repr.coeffs.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        Multivector::from_coeffs(sig, coeffs).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(n: usize, m: usize) -> AlgebraSignature {
        AlgebraSignature::new(n, m).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn generator_squares_to_minus_one() {
        let s = sig(2, 1);
        let e1 = Multivector::generator(s, 0);
        assert_eq!(&e1 * &e1, Multivector::scalar(s, c(-1.0)));
    }

    #[test]
    fn e1_e2_is_e12() {
        let s = sig(2, 1);
        let p = &Multivector::generator(s, 0) * &Multivector::generator(s, 1);
        assert_eq!(p, Multivector::blade(s, 0b011, c(1.0)));
    }

    #[test]
    fn one_plus_e1_times_one_minus_e1() {
        let s = sig(3, 0);
        let one = Multivector::one(s);
        let e1 = Multivector::generator(s, 0);
        let p = &(&one + &e1) * &(&one - &e1);
        // (1 + e1)(1 - e1) = 1 - e1 e1 = 2
        assert_eq!(p, Multivector::scalar(s, c(2.0)));
    }

    #[test]
    fn tau_examples() {
        let s = sig(2, 1);
        let e1 = Multivector::generator(s, 0);
        assert_eq!(e1.tau(), -&e1);
        let e12 = Multivector::blade(s, 0b011, c(1.0));
        assert_eq!(e12.tau(), -&e12);
        let i = Multivector::scalar(s, Complex64::new(0.0, 1.0));
        assert_eq!(i.tau(), Multivector::scalar(s, Complex64::new(0.0, -1.0)));
    }

    #[test]
    fn cl_inner_examples() {
        let s = sig(2, 2);
        let one = Multivector::one(s);
        assert_eq!(cl_inner(&one, &one).unwrap(), one);
        let e1 = Multivector::generator(s, 0);
        assert_eq!(cl_inner(&e1, &e1).unwrap(), one);
    }

    #[test]
    fn embed_and_square() {
        let s = sig(3, 1);
        let v = vector_embed(s, &RealVector::new(vec![3.0, 4.0, 0.0, 0.0])).unwrap();
        assert_eq!(v.coeff(0b0001), c(3.0));
        assert_eq!(v.coeff(0b0010), c(4.0));
        assert_eq!(&v * &v, Multivector::scalar(s, c(-25.0)));
        let zero = vector_embed(s, &RealVector::zeros(4)).unwrap();
        assert_eq!(zero, Multivector::zero(s));
        assert!(matches!(
            vector_embed(s, &RealVector::zeros(3)),
            Err(CliffordError::DimensionMismatch { expected: 4, found: 3 })
        ));
    }

    #[test]
    fn extract_rejects_contamination() {
        let s = sig(2, 1);
        let e1 = Multivector::generator(s, 0);
        let v = extract_real_vector(&e1, 1e-12).unwrap();
        assert_eq!(v.as_slice(), &[1.0, 0.0, 0.0]);
        let bad = &Multivector::one(s) + &e1;
        match extract_real_vector(&bad, 1e-9) {
            Err(CliffordError::NotARealVector { blade, magnitude }) => {
                assert_eq!(blade, 0);
                assert_eq!(magnitude, 1.0);
            }
            other => panic!("unexpected {other:?}"),
        }
        let imag = Multivector::blade(s, 0b001, Complex64::new(1.0, 0.5));
        assert!(extract_real_vector(&imag, 1e-9).is_err());
    }

    #[test]
    fn signature_mismatch_is_an_error() {
        let a = Multivector::one(sig(2, 1));
        let b = Multivector::one(sig(3, 0));
        assert!(matches!(a.product(&b), Err(CliffordError::SignatureMismatch { .. })));
        assert!(cl_inner(&a, &b).is_err());
    }

    #[test]
    fn large_dimension_uses_on_the_fly_signs() {
        let s = sig(6, 4);
        let e10 = Multivector::generator(s, 9);
        let e1 = Multivector::generator(s, 0);
        assert_eq!(&e10 * &e10, Multivector::scalar(s, c(-1.0)));
        let ab = &e1 * &e10;
        let ba = &e10 * &e1;
        assert_eq!(ab, -&ba);
    }

    #[test]
    fn json_wire_format() {
        let s = sig(1, 1);
        let mv = Multivector::blade(s, 0b10, Complex64::new(2.0, -1.0));
        let text = serde_json::to_string(&mv).unwrap();
        assert_eq!(text, r#"{"n":1,"m":1,"coeffs":[[0.0,0.0],[0.0,0.0],[2.0,-1.0],[0.0,0.0]]}"#);
        let back: Multivector = serde_json::from_str(&text).unwrap();
        assert_eq!(back, mv);
        assert!(serde_json::from_str::<Multivector>(r#"{"n":1,"m":1,"coeffs":[[0,0]]}"#).is_err());
    }
}
