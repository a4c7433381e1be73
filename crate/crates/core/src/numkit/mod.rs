//! Dense numeric kernel for the small matrices used throughout the crate:
//! matrix exponential, eigen-decomposition, fixed-step RK4 and central
//! differences.

mod deriv;
mod eig;
mod expm;
mod matrix;
mod ode;
mod scalar;

pub use deriv::{numeric_derivative, try_numeric_derivative};
pub use eig::{eig, EigenPair};
pub use expm::mat_exp;
pub use matrix::{ComplexMatrix, Matrix, RealMatrix};
pub use ode::{ode_evolve, rk4_evolve, step_count, Trajectory};
pub use scalar::Scalar;

/// Largest dimension accepted by [`mat_exp`].
pub const MAX_EXP_DIM: usize = 16;
/// Largest dimension accepted by [`eig`].
pub const MAX_EIG_DIM: usize = 8;

/// Euclidean inner product `Σ conj(a_k)·b_k`.
pub fn inner<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (x, y)| acc + x.conj() * *y)
}

/// Euclidean norm.
pub fn norm2<T: Scalar>(v: &[T]) -> f64 {
    num_traits::Float::sqrt(v.iter().map(|x| x.modulus_sqr()).sum::<f64>())
}

/// Largest absolute component.
pub fn norm_inf<T: Scalar>(v: &[T]) -> f64 {
    v.iter().map(|x| x.modulus()).fold(0.0, f64::max)
}

/// `max_k |a_k − b_k|`; panics if the lengths differ.
pub fn max_abs_diff<T: Scalar>(a: &[T], b: &[T]) -> f64 {
    assert_eq!(a.len(), b.len(), "length mismatch");
    a.iter()
        .zip(b)
        .map(|(x, y)| (*x - *y).modulus())
        .fold(0.0, f64::max)
}
