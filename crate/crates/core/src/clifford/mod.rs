//! Complexified Clifford algebra `Cl_{n+m}` with dense coefficients, the
//! `tau` anti-automorphism, the Clifford-valued pairing, and `Spin^C`.

mod multivector;
mod signature;
mod spinc;
mod vector;

pub use multivector::{
    blade_product_sign, cl_inner, extract_real_vector, grade, mv_product, tau, vector_embed, Multivector,
};
pub use signature::{AlgebraSignature, MAX_DIM};
pub use spinc::{adjoint_action, spin_lift, unit_defect, SpinCElement, ADJOINT_TOLERANCE, UNIT_TOLERANCE};
pub use vector::RealVector;
pub(crate) use vector::dot;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum CliffordError {
    #[error("invalid signature n = {n}, m = {m} (need n >= 1 and n + m <= {MAX_DIM})")]
    InvalidSignature { n: usize, m: usize },
    #[error("signature mismatch: {left} vs {right}")]
    SignatureMismatch { left: AlgebraSignature, right: AlgebraSignature },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite coefficient on blade {blade:#b}")]
    NonFinite { blade: usize },
    #[error("not a real vector: blade {blade:#b} carries magnitude {magnitude:.3e}")]
    NotARealVector { blade: usize, magnitude: f64 },
    #[error("not a Spin^C element: {0}")]
    NotSpinC(String),
    #[error("not a rotation: orthogonality error {orthogonality_error:.3e}, determinant {determinant}")]
    NotARotation { orthogonality_error: f64, determinant: f64 },
}
