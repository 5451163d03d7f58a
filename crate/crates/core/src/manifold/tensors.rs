//! Half-vectorisation, duplication matrices and the explicit metric tensors.
//!
//! Coordinates follow the column-wise stacking
//! `(V11, V21, …, Vd1, V22, …, Vd2, …, Vdd)`. Over the complex field each
//! off-diagonal entry carries two real coordinates (real part, then imaginary
//! part) and each diagonal entry one, giving `d^2` real coordinates.
//!
//! These dense tensors cost `O(d^6)` and are limited to `d <= 8`.

use nalgebra::{DMatrix, DVector};

use super::{PdMatrix, TangentVelocity};
use crate::error::{Error, Result};
use crate::field::{Field, Scalar};

pub const MAX_EXPLICIT_DIM: usize = 8;

/// `vech(V)` in column-wise lower-triangular order.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfVector<T: Scalar> {
    pub coords: Vec<T>,
}

fn vech_len(d: usize) -> usize {
    d * (d + 1) / 2
}

fn triangular_root(n: usize) -> Option<usize> {
    let d = (((8 * n + 1) as f64).sqrt() as usize).saturating_sub(1) / 2;
    (d..=d + 1).find(|&k| vech_len(k) == n)
}

/// Index of `(i, j)`, `i >= j`, in the half-vector. Column `j` starts at
/// `sum_{c<j} (d - c) = j·d - j(j-1)/2`.
fn vech_index(d: usize, i: usize, j: usize) -> usize {
    debug_assert!(i >= j);
    j * d - j * j.saturating_sub(1) / 2 + (i - j)
}

fn vec_index(d: usize, i: usize, j: usize) -> usize {
    i + j * d
}

impl<T: Scalar> HalfVector<T> {
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> Result<usize> {
        triangular_root(self.coords.len()).ok_or_else(|| {
            Error::structural(format!("half-vector length {} is not a triangular number", self.coords.len()))
        })
    }

    /// Real coordinates: one per diagonal entry, one (real) or two (complex)
    /// per strictly-lower entry, in half-vector order.
    pub fn real_coords(&self) -> Result<DVector<f64>> {
        let d = self.dim()?;
        let mut out = Vec::with_capacity(T::FIELD.real_coordinate_dim(d));
        for j in 0..d {
            for i in j..d {
                let x = self.coords[vech_index(d, i, j)];
                out.push(x.real());
                if i != j && T::FIELD == Field::Complex {
                    out.push(x.imaginary());
                }
            }
        }
        Ok(DVector::from_vec(out))
    }

    pub fn from_real_coords(d: usize, x: &DVector<f64>) -> Result<Self> {
        if x.len() != T::FIELD.real_coordinate_dim(d) {
            return Err(Error::structural(format!(
                "expected {} real coordinates for d = {d}, got {}",
                T::FIELD.real_coordinate_dim(d),
                x.len()
            )));
        }
        let mut coords = Vec::with_capacity(vech_len(d));
        let mut k = 0;
        for j in 0..d {
            for i in j..d {
                if i != j && T::FIELD == Field::Complex {
                    coords.push(T::from_parts(x[k], x[k + 1]));
                    k += 2;
                } else {
                    coords.push(T::from_real(x[k]));
                    k += 1;
                }
            }
        }
        Ok(HalfVector { coords })
    }
}

pub fn vech<T: Scalar>(v: &TangentVelocity<T>) -> HalfVector<T> {
    let d = v.dim();
    let m = v.matrix();
    let mut coords = Vec::with_capacity(vech_len(d));
    for j in 0..d {
        for i in j..d {
            coords.push(m[(i, j)]);
        }
    }
    HalfVector { coords }
}

/// Rebuilds the Hermitian matrix, mirroring the lower triangle by conjugation.
pub fn unvech<T: Scalar>(h: &HalfVector<T>) -> Result<TangentVelocity<T>> {
    let d = h.dim()?;
    let mut m = DMatrix::<T>::zeros(d, d);
    for j in 0..d {
        for i in j..d {
            let x = h.coords[vech_index(d, i, j)];
            if i == j {
                m[(i, i)] = T::from_real(x.real());
            } else {
                m[(i, j)] = x;
                m[(j, i)] = x.conjugate();
            }
        }
    }
    Ok(TangentVelocity::from_hermitian_part(&m))
}

/// Column-stacking `vec(M)`.
pub fn vec_matrix<T: Scalar>(m: &DMatrix<T>) -> DVector<T> {
    DVector::from_column_slice(m.as_slice())
}

/// The duplication matrix `D_d` (`vec = D_d vech`) and its Moore–Penrose
/// inverse `D_d^+ = (D_d^T D_d)^{-1} D_d^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct DuplicationPair {
    pub dup: DMatrix<f64>,
    pub pinv: DMatrix<f64>,
}

/// Built from the index map; entries of `pinv` are exactly `1`, `1/2` or `0`.
pub fn duplication_pair(d: usize) -> DuplicationPair {
    let m = vech_len(d);
    let mut dup = DMatrix::zeros(d * d, m);
    let mut pinv = DMatrix::zeros(m, d * d);
    for j in 0..d {
        for i in j..d {
            let r = vech_index(d, i, j);
            dup[(vec_index(d, i, j), r)] = 1.0;
            dup[(vec_index(d, j, i), r)] = 1.0;
            if i == j {
                pinv[(r, vec_index(d, i, i))] = 1.0;
            } else {
                pinv[(r, vec_index(d, i, j))] = 0.5;
                pinv[(r, vec_index(d, j, i))] = 0.5;
            }
        }
    }
    DuplicationPair { dup, pinv }
}

/// The field-aware duplication matrix mapping real coordinates to `vec(V)`.
/// Over the reals this is `D_d`; over the complex field the imaginary
/// coordinate of entry `(i, j)` maps to `+i` at `(i, j)` and `-i` at `(j, i)`.
pub fn coordinate_duplication<T: Scalar>(d: usize) -> DMatrix<T> {
    let mut out = DMatrix::<T>::zeros(d * d, T::FIELD.real_coordinate_dim(d));
    let mut c = 0;
    for j in 0..d {
        for i in j..d {
            out[(vec_index(d, i, j), c)] = T::one();
            out[(vec_index(d, j, i), c)] = T::one();
            c += 1;
            if i != j && T::FIELD == Field::Complex {
                out[(vec_index(d, i, j), c)] = T::from_parts(0.0, 1.0);
                out[(vec_index(d, j, i), c)] = T::from_parts(0.0, -1.0);
                c += 1;
            }
        }
    }
    out
}

fn check_explicit_dim(d: usize) -> Result<()> {
    if d > MAX_EXPLICIT_DIM {
        return Err(Error::config(format!(
            "explicit metric tensors are only built for d <= {MAX_EXPLICIT_DIM} (got {d})"
        )));
    }
    Ok(())
}

/// `G(Σ) = D^H (Σ^{-T} ⊗ Σ^{-1}) D` in real coordinates, so that
/// `x^T G x = tr(Σ^{-1} V Σ^{-1} V)`.
pub fn metric_tensor<T: Scalar>(sigma: &PdMatrix<T>) -> Result<DMatrix<f64>> {
    let d = sigma.dim();
    check_explicit_dim(d)?;
    let dup = coordinate_duplication::<T>(d);
    let inv = sigma.inverse();
    let kron = inv.transpose().kronecker(&inv);
    Ok((dup.adjoint() * kron * dup).map(|x| x.real()))
}

/// `G^{-1}(Σ) = D^+ (Σ^T ⊗ Σ) D^{+H}` in real coordinates.
pub fn inverse_metric_tensor<T: Scalar>(sigma: &PdMatrix<T>) -> Result<DMatrix<f64>> {
    let d = sigma.dim();
    check_explicit_dim(d)?;
    let dup = coordinate_duplication::<T>(d);
    let gram = (dup.adjoint() * &dup).map(|x| x.real());
    let mut pinv = dup.adjoint();
    for r in 0..pinv.nrows() {
        let mut row = pinv.row_mut(r);
        row *= T::from_real(1.0 / gram[(r, r)]);
    }
    let s = sigma.matrix();
    let kron = s.transpose().kronecker(s);
    Ok((&pinv * kron * pinv.adjoint()).map(|x| x.real()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_hermitian, random_pd};
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_by_two_vech() {
        let v = TangentVelocity::new(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 3.0])).unwrap();
        assert_eq!(vech(&v).coords, vec![1.0, 2.0, 3.0]);
        assert_eq!(vech(&TangentVelocity::<f64>::zeros(3)).coords, vec![0.0; 6]);
    }

    #[test]
    fn column_order_at_three() {
        let m = DMatrix::from_fn(3, 3, |i, j| (10 * i.max(j) + i.min(j)) as f64);
        let v = TangentVelocity::new(m).unwrap();
        // (V11, V21, V31, V22, V32, V33)
        assert_eq!(vech(&v).coords, vec![0.0, 10.0, 20.0, 11.0, 21.0, 22.0]);
    }

    #[test]
    fn complex_round_trip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let v = random_hermitian::<Complex64, _>(3, &mut rng);
        assert_eq!(unvech(&vech(&v)).unwrap(), v);
        let h = vech(&v);
        let x = h.real_coords().unwrap();
        assert_eq!(x.len(), 9);
        assert_eq!(HalfVector::<Complex64>::from_real_coords(3, &x).unwrap(), h);
    }

    #[test]
    fn bad_length_is_structural() {
        let h = HalfVector { coords: vec![1.0; 4] };
        assert!(matches!(unvech(&h), Err(Error::Structural(_))));
    }

    #[test]
    fn duplication_small_cases() {
        let p1 = duplication_pair(1);
        assert_eq!(p1.dup, DMatrix::from_element(1, 1, 1.0));
        assert_eq!(p1.pinv, DMatrix::from_element(1, 1, 1.0));

        let p2 = duplication_pair(2);
        let x = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        assert_eq!((&p2.dup * x).as_slice(), &[1.0, 2.0, 2.0, 3.0]);

        let p3 = duplication_pair(3);
        assert_eq!(&p3.pinv * &p3.dup, DMatrix::identity(6, 6));
        let normal = p3.dup.transpose() * &p3.dup;
        let explicit = normal.try_inverse().unwrap() * p3.dup.transpose();
        assert_eq!(explicit, p3.pinv);
    }

    #[test]
    fn real_coordinate_duplication_is_classical() {
        for d in 1..=5 {
            assert_eq!(coordinate_duplication::<f64>(d), duplication_pair(d).dup);
        }
    }

    #[test]
    fn metric_at_identity_two() {
        let g = metric_tensor(&PdMatrix::<f64>::identity(2)).unwrap();
        assert_eq!(g, DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 1.0])));
    }

    #[test]
    fn metric_times_inverse_is_identity() {
        for d in 1..=4 {
            let gi = metric_tensor(&PdMatrix::<f64>::identity(d)).unwrap()
                * inverse_metric_tensor(&PdMatrix::<f64>::identity(d)).unwrap();
            assert!((gi - DMatrix::identity(d * (d + 1) / 2, d * (d + 1) / 2)).norm() < 1e-12);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let s = random_pd::<Complex64, _>(3, &mut rng);
        let gi = metric_tensor(&s).unwrap() * inverse_metric_tensor(&s).unwrap();
        assert!((gi - DMatrix::identity(9, 9)).norm() < 1e-8);
    }

    #[test]
    fn too_large_for_explicit_tensors() {
        assert!(matches!(metric_tensor(&PdMatrix::<f64>::identity(9)), Err(Error::Config(_))));
    }
}
