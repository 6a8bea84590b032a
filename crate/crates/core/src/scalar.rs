//! Scalar abstraction shared by every numerical module.
//!
//! The physics code is written against [`Real`], which bundles the
//! `num-traits` float traits with the two dense Hermitian eigensolvers and
//! the one special function the crate needs. Implementations are provided
//! for `f32` and `f64`; the eigensolvers are delegated to `nalgebra`.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point type the lab can compute with.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Eigenvalues (ascending) of a real symmetric matrix.
    fn eigvals_symmetric(m: DMatrix<Self>) -> Vec<Self>;
    /// Eigenvalues (ascending) and matching eigenvector columns.
    fn eigh_symmetric(m: DMatrix<Self>) -> (Vec<Self>, DMatrix<Self>);
    /// Eigenvalues (ascending) of a complex Hermitian matrix.
    fn eigvals_hermitian(m: DMatrix<Complex<Self>>) -> Vec<Self>;
    /// Eigenvalues (ascending) and matching eigenvector columns.
    fn eigh_hermitian(m: DMatrix<Complex<Self>>) -> (Vec<Self>, DMatrix<Complex<Self>>);
    /// Complementary error function.
    fn erfc(self) -> Self;
}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

/// Converts a count into `T`.
#[inline]
pub fn cnt<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("count representable in scalar type")
}

fn sort_pairs<T: PartialOrd + Copy, V: nalgebra::Scalar>(
    values: Vec<T>,
    vectors: DMatrix<V>,
) -> (Vec<T>, DMatrix<V>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite eigenvalue"));
    let sorted: Vec<T> = order.iter().map(|&i| values[i]).collect();
    let columns: Vec<_> = order.iter().map(|&i| vectors.column(i).into_owned()).collect();
    let mat = if columns.is_empty() {
        vectors
    } else {
        DMatrix::from_columns(&columns)
    };
    (sorted, mat)
}

fn sorted<T: PartialOrd>(mut v: Vec<T>) -> Vec<T> {
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalue"));
    v
}

macro_rules! impl_real {
    ($t:ty, $erfc:path) => {
        impl Real for $t {
            fn eigvals_symmetric(m: DMatrix<Self>) -> Vec<Self> {
                if m.nrows() == 0 {
                    return Vec::new();
                }
                sorted(m.symmetric_eigenvalues().iter().copied().collect())
            }

            fn eigh_symmetric(m: DMatrix<Self>) -> (Vec<Self>, DMatrix<Self>) {
                if m.nrows() == 0 {
                    return (Vec::new(), m);
                }
                let eig = SymmetricEigen::new(m);
                sort_pairs(eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
            }

            fn eigvals_hermitian(m: DMatrix<Complex<Self>>) -> Vec<Self> {
                if m.nrows() == 0 {
                    return Vec::new();
                }
                sorted(m.symmetric_eigenvalues().iter().copied().collect())
            }

            fn eigh_hermitian(
                m: DMatrix<Complex<Self>>,
            ) -> (Vec<Self>, DMatrix<Complex<Self>>) {
                if m.nrows() == 0 {
                    return (Vec::new(), m);
                }
                let eig = SymmetricEigen::new(m);
                sort_pairs(eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
            }

            fn erfc(self) -> Self {
                $erfc(self)
            }
        }
    };
}

impl_real!(f64, libm::erfc);
impl_real!(f32, libm::erfcf);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_eigenvalues_sorted() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0_f64, 1.0, 1.0, 2.0]);
        let (vals, vecs) = f64::eigh_symmetric(m.clone());
        assert!((vals[0] - 1.0).abs() < 1e-14 && (vals[1] - 3.0).abs() < 1e-14);
        let v0 = vecs.column(0);
        let r = &m * v0 - v0 * vals[0];
        assert!(r.norm() < 1e-13);
    }

    #[test]
    fn hermitian_matches_real_embedding() {
        let i = Complex::new(0.0_f64, 1.0);
        let one = Complex::new(1.0, 0.0);
        let m = DMatrix::from_row_slice(2, 2, &[one, i, -i, one]);
        let vals = f64::eigvals_hermitian(m);
        assert!((vals[0] - 0.0).abs() < 1e-14 && (vals[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn f32_backend_works() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0_f32, 1.0, 1.0, 0.0]);
        let vals = f32::eigvals_symmetric(m);
        assert!((vals[0] + 1.0).abs() < 1e-6);
        assert!((Real::erfc(1.0_f32) - 0.157_299_2).abs() < 1e-6);
    }
}
