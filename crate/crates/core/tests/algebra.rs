use num_complex::Complex64;
use proptest::prelude::*;

use spinc::clifford::{
    blade_product_sign, cl_inner, extract_real_vector, vector_embed, AlgebraSignature, Multivector, RealVector,
    SpinCElement,
};

/// Reduces the word `e_A e_B` by adjacent swaps and `e_i e_i = -1`.
fn word_sign(a: usize, b: usize) -> f64 {
    let mut word: Vec<usize> = (0..8).filter(|i| a >> i & 1 == 1).collect();
    word.extend((0..8).filter(|i| b >> i & 1 == 1));
    let mut sign = 1.0;
    loop {
        let mut changed = false;
        let mut i = 0;
        while i + 1 < word.len() {
            if word[i] > word[i + 1] {
                word.swap(i, i + 1);
                sign = -sign;
                changed = true;
            } else if word[i] == word[i + 1] {
                word.drain(i..i + 2);
                sign = -sign;
                changed = true;
                continue;
            }
            i += 1;
        }
        if !changed {
            return sign;
        }
    }
}

#[test]
fn sign_table_matches_word_reduction() {
    for a in 0..64 {
        for b in 0..64 {
            assert_eq!(blade_product_sign(a, b), word_sign(a, b), "e{a:b} e{b:b}");
        }
    }
}

#[test]
fn blade_products_match_word_reduction() {
    let sig = AlgebraSignature::new(3, 2).unwrap();
    let one = Complex64::new(1.0, 0.0);
    for a in 0..32 {
        for b in 0..32 {
            let p = &Multivector::blade(sig, a, one) * &Multivector::blade(sig, b, one);
            let expected = Multivector::blade(sig, a ^ b, Complex64::new(word_sign(a, b), 0.0));
            assert_eq!(p, expected);
        }
    }
}

fn multivector(dim: usize) -> impl Strategy<Value = Multivector> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1 << dim).prop_map(move |c| {
        let sig = AlgebraSignature::new(1, dim - 1).unwrap();
        Multivector::from_coeffs(sig, c.into_iter().map(|(re, im)| Complex64::new(re, im)).collect()).unwrap()
    })
}

fn triple() -> impl Strategy<Value = (Multivector, Multivector, Multivector)> {
    (2usize..=5).prop_flat_map(|d| (multivector(d), multivector(d), multivector(d)))
}

/// Spin^C element built from rotors in random planes and a phase.
fn spinc_element(dim: usize) -> impl Strategy<Value = SpinCElement> {
    (
        prop::collection::vec((0..dim, 0..dim, -3.2..3.2f64), 1..6),
        -3.2..3.2f64,
    )
        .prop_map(move |(planes, phase)| {
            let sig = AlgebraSignature::new(1, dim - 1).unwrap();
            let mut g = SpinCElement::phase(sig, phase);
            for (i, j, angle) in planes {
                if i != j {
                    g = g.compose(&SpinCElement::rotor(sig, i, j, angle));
                }
            }
            g
        })
}

fn vector(dim: usize) -> impl Strategy<Value = RealVector> {
    prop::collection::vec(-2.0..2.0f64, dim).prop_map(RealVector::new)
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 64,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn product_is_associative((x, y, z) in triple()) {
        let left = &(&x * &y) * &z;
        let right = &x * &(&y * &z);
        prop_assert!(left.distance(&right) < 1e-12);
    }

    #[test]
    fn tau_reverses_products((x, y, _) in triple()) {
        let lhs = (&x * &y).tau();
        let rhs = &y.tau() * &x.tau();
        prop_assert!(lhs.distance(&rhs) < 1e-12);
        prop_assert_eq!(x.tau().tau(), x);
    }

    #[test]
    fn vectors_are_skew_adjoint((psi, phi, v) in (2usize..=5).prop_flat_map(|d| (multivector(d), multivector(d), vector(d)))) {
        let x = vector_embed(psi.signature(), &v).unwrap();
        let lhs = cl_inner(&(&x * &psi), &phi).unwrap();
        let rhs = cl_inner(&psi, &(&x * &phi)).unwrap();
        prop_assert!((&lhs + &rhs).max_abs() < 1e-12);
    }

    #[test]
    fn spinc_elements_stay_unit_and_rotate(
        (g, v) in (2usize..=6).prop_flat_map(|d| (spinc_element(d), vector(d)))
    ) {
        let sig = g.signature();
        let checked = SpinCElement::new(g.value().clone());
        prop_assert!(checked.is_ok());
        let image = &(g.value() * &vector_embed(sig, &v).unwrap()) * &g.value().tau();
        let w = extract_real_vector(&image, 1e-9).unwrap();
        let (nv, nw): (f64, f64) = (v.iter().map(|a| a * a).sum(), w.iter().map(|a| a * a).sum());
        prop_assert!((nv - nw).abs() < 1e-9);
    }

    /// The one-form map `X -> tau(phi) X phi` preserves inner products.
    #[test]
    fn one_form_map_is_isometric(
        (g, x, y) in (2usize..=6).prop_flat_map(|d| (spinc_element(d), vector(d), vector(d)))
    ) {
        let sig = g.signature();
        let phi = g.value();
        let map = |v: &RealVector| {
            let image = &(&phi.tau() * &vector_embed(sig, v).unwrap()) * phi;
            extract_real_vector(&image, 1e-9).unwrap()
        };
        let (fx, fy) = (map(&x), map(&y));
        let dot = |a: &RealVector, b: &RealVector| a.iter().zip(b.iter()).map(|(p, q)| p * q).sum::<f64>();
        prop_assert!((dot(&fx, &fy) - dot(&x, &y)).abs() < 1e-9);
    }
}
