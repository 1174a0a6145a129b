//! Small dense complex matrices, a Hermitian eigensolver and the SVD built on it.
//!
//! Everything here targets dimensions of a handful of levels. Matrices are
//! stored row-major in a flat buffer.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_traits::{One, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{c, Real, C};

#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<C<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C::one();
        }
        m
    }

    pub fn from_diag(diag: &[C<T>]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn from_real_diag(diag: &[T]) -> Self {
        let d: Vec<_> = diag.iter().map(|&x| c(x)).collect();
        Self::from_diag(&d)
    }

    /// Builds a matrix from row vectors; all rows must share a length.
    pub fn from_rows(rows: &[Vec<C<T>>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Ok(Self {
            rows: n,
            cols: m,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Outer product `|a⟩⟨b|`.
    pub fn outer(a: &[C<T>], b: &[C<T>]) -> Self {
        Self::from_fn(a.len(), b.len(), |i, j| a[i] * b[j].conj())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: C<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn scale_real(&self, s: T) -> Self {
        self.scale(c(s))
    }

    pub fn trace(&self) -> C<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn diagonal(&self) -> Vec<C<T>> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn column(&self, j: usize) -> Vec<C<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[C<T>]) {
        for (i, &x) in v.iter().enumerate() {
            self[(i, j)] = x;
        }
    }

    pub fn row(&self, i: usize) -> &[C<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn apply(&self, v: &[C<T>]) -> Vec<C<T>> {
        debug_assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    /// `⟨a|M|b⟩`.
    pub fn sandwich(&self, a: &[C<T>], b: &[C<T>]) -> C<T> {
        inner(a, &self.apply(b))
    }

    pub fn max_abs(&self) -> T {
        self.data
            .iter()
            .map(|z| z.norm())
            .fold(T::zero(), T::max)
    }

    pub fn frobenius(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// True if every off-diagonal entry is at most `tol` in modulus.
    pub fn is_diagonal(&self, tol: T) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self[(i, j)].norm() <= tol))
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.is_square()
            && (0..self.rows)
                .all(|i| (i..self.cols).all(|j| (self[(i, j)] - self[(j, i)].conj()).norm() <= tol))
    }

    pub fn as_slice(&self) -> &[C<T>] {
        &self.data
    }

    pub fn map<U: Real>(&self, f: impl Fn(C<T>) -> C<U>) -> CMatrix<U> {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = C<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<T> {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> Mul for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn mul(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl<T: Real> Add for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn add(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }
}

impl<T: Real> Sub for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn sub(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }
}

/// `⟨a|b⟩`, conjugate-linear in the first argument.
pub fn inner<T: Real>(a: &[C<T>], b: &[C<T>]) -> C<T> {
    a.iter().zip(b).map(|(x, &y)| x.conj() * y).sum()
}

pub fn norm<T: Real>(v: &[C<T>]) -> T {
    v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen<T> {
    /// Eigenvalues sorted in descending order.
    pub values: Vec<T>,
    /// Unitary whose columns are the matching eigenvectors.
    pub vectors: CMatrix<T>,
}

const MAX_SWEEPS: usize = 64;

/// Cyclic complex Jacobi eigensolver.
///
/// Each rotation first removes the phase of the pivot `h_pq`, then applies a
/// real Jacobi rotation to the resulting real-symmetric 2x2 block.
pub fn hermitian_eigen<T: Real>(h: &CMatrix<T>) -> Result<HermitianEigen<T>> {
    if !h.is_square() {
        return Err(Error::Shape(format!(
            "eigen-decomposition needs a square matrix, got {}x{}",
            h.rows(),
            h.cols()
        )));
    }
    let n = h.rows();
    // Hermitize so that rounding in the caller cannot bias the diagonal.
    let mut a = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            c(h[(i, i)].re)
        } else {
            (h[(i, j)] + h[(j, i)].conj()).scale(T::lit(0.5))
        }
    });
    let mut v = CMatrix::identity(n);
    let scale = a.frobenius().max(T::min_positive_value());
    let eps = T::epsilon();

    for _ in 0..MAX_SWEEPS {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<T>()
            .sqrt();
        if off <= eps * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let hpq = a[(p, q)];
                let g = hpq.norm();
                if g <= eps * eps * scale {
                    continue;
                }
                let phase = hpq / c(g);
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (T::lit(2.0) * g);
                let t = if tau >= T::zero() {
                    T::one() / (tau + (T::one() + tau * tau).sqrt())
                } else {
                    -T::one() / (-tau + (T::one() + tau * tau).sqrt())
                };
                let cs = T::one() / (T::one() + t * t).sqrt();
                let sn = t * cs;
                // G = diag(1, e^{-iφ}) · [[c, s], [-s, c]] embedded at (p, q).
                let gpp = c(cs);
                let gpq = c(sn);
                let gqp = phase.conj().scale(-sn);
                let gqq = phase.conj().scale(cs);

                // A <- A G
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * gpp + akq * gqp;
                    a[(k, q)] = akp * gpq + akq * gqq;
                }
                // A <- G† A
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = gpp.conj() * apk + gqp.conj() * aqk;
                    a[(q, k)] = gpq.conj() * apk + gqq.conj() * aqk;
                }
                a[(p, q)] = C::zero();
                a[(q, p)] = C::zero();
                a[(p, p)] = c(a[(p, p)].re);
                a[(q, q)] = c(a[(q, q)].re);
                // V <- V G
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * gpp + vkq * gqp;
                    v[(k, q)] = vkp * gpq + vkq * gqq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort keeps the deterministic basis order among ties.
    order.sort_by(|&i, &j| {
        a[(j, j)]
            .re
            .partial_cmp(&a[(i, i)].re)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |r, k| v[(r, order[k])]);
    Ok(HermitianEigen { values, vectors })
}

/// `M = left · diag(singulars) · right` with `left`, `right` unitary.
#[derive(Debug, Clone)]
pub struct Svd<T> {
    pub left: CMatrix<T>,
    /// Non-increasing, non-negative.
    pub singulars: Vec<T>,
    pub right: CMatrix<T>,
}

impl<T: Real> Svd<T> {
    pub fn max(&self) -> T {
        self.singulars.first().copied().unwrap_or_else(T::zero)
    }

    pub fn min(&self) -> T {
        self.singulars.last().copied().unwrap_or_else(T::zero)
    }

    pub fn reconstruct(&self) -> CMatrix<T> {
        let d = CMatrix::from_real_diag(&self.singulars);
        &(&self.left * &d) * &self.right
    }

    /// Right singular vector for the `k`-th singular value, as a ket.
    pub fn right_vector(&self, k: usize) -> Vec<C<T>> {
        self.right.row(k).iter().map(|z| z.conj()).collect()
    }
}

/// SVD of a square matrix through the eigen-decomposition of `M†M`.
///
/// The eigenvectors `w_k` of `M†M` are the right singular vectors. Singular
/// values are taken as `‖M w_k‖`, which stays accurate to `ε‖M‖` for
/// (near-)null directions where `√eigenvalue` would only reach `√ε‖M‖`.
/// Left singular vectors are `M w_k / σ_k` for nonzero `σ_k`; the rest of the
/// left factor is completed to a unitary by Gram-Schmidt.
pub fn svd<T: Real>(m: &CMatrix<T>) -> Result<Svd<T>> {
    if !m.is_square() {
        return Err(Error::Shape(format!(
            "SVD needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if !m.is_finite() {
        return Err(Error::Shape("matrix has non-finite entries".into()));
    }
    let n = m.rows();
    let gram = &m.adjoint() * m;
    let eig = hermitian_eigen(&gram)?;
    let mw = m * &eig.vectors;
    let norms: Vec<T> = (0..n).map(|k| norm(&mw.column(k))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).unwrap_or(std::cmp::Ordering::Equal));
    let singulars: Vec<T> = order.iter().map(|&k| norms[k]).collect();
    let w = CMatrix::from_fn(n, n, |i, k| eig.vectors[(i, order[k])]);

    let smax = singulars.first().copied().unwrap_or_else(T::zero);
    let cutoff = T::epsilon() * T::from_usize_lossy(n) * smax;
    let mut columns: Vec<Option<Vec<C<T>>>> = order
        .iter()
        .zip(&singulars)
        .map(|(&k, &s)| {
            (s > cutoff && s > T::zero())
                .then(|| mw.column(k).into_iter().map(|z| z.unscale(s)).collect())
        })
        .collect();
    let left = orthonormal_completion(n, &mut columns);
    Ok(Svd {
        left,
        singulars,
        right: w.adjoint(),
    })
}

/// Gram-Schmidt over the given columns in order, filling missing columns from
/// the standard basis.
fn orthonormal_completion<T: Real>(n: usize, columns: &mut [Option<Vec<C<T>>>]) -> CMatrix<T> {
    let mut basis: Vec<Vec<C<T>>> = Vec::with_capacity(n);
    let mut out = CMatrix::zeros(n, n);
    let mut candidate = 0usize;
    for (k, col) in columns.iter_mut().enumerate() {
        let v = match col.take().and_then(|v| project_out(&basis, v)) {
            Some(v) => v,
            None => loop {
                let mut e = vec![C::zero(); n];
                e[candidate % n] = C::one();
                candidate += 1;
                if let Some(v) = project_out(&basis, e) {
                    break v;
                }
                assert!(candidate <= 2 * n, "failed to complete orthonormal basis");
            },
        };
        out.set_column(k, &v);
        basis.push(v);
    }
    out
}

fn project_out<T: Real>(basis: &[Vec<C<T>>], mut v: Vec<C<T>>) -> Option<Vec<C<T>>> {
    let before = norm(&v);
    // Two passes of modified Gram-Schmidt.
    for _ in 0..2 {
        for b in basis {
            let proj = inner(b, &v);
            for (x, &y) in v.iter_mut().zip(b) {
                *x -= proj * y;
            }
        }
    }
    let after = norm(&v);
    if after <= T::lit(1e-3) * before || after <= T::min_positive_value() {
        return None;
    }
    Some(v.into_iter().map(|z| z.unscale(after)).collect())
}

/// Hermitian square root `(M†M)^{1/2}`, the positive part of the polar decomposition.
pub fn positive_part<T: Real>(svd: &Svd<T>) -> CMatrix<T> {
    let d = CMatrix::from_real_diag(&svd.singulars);
    &(&svd.right.adjoint() * &d) * &svd.right
}

/// Serialize as nested `[[[re, im], ...], ...]`, row-major.
impl<T: Real + Serialize> Serialize for CMatrix<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[T; 2]>> = (0..self.rows)
            .map(|i| self.row(i).iter().map(|z| [z.re, z.im]).collect())
            .collect();
        rows.serialize(serializer)
    }
}

impl<'de, T: Real + Deserialize<'de>> Deserialize<'de> for CMatrix<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<[T; 2]>> = Vec::deserialize(deserializer)?;
        let rows: Vec<Vec<C<T>>> = rows
            .into_iter()
            .map(|r| r.into_iter().map(|[re, im]| C::new(re, im)).collect())
            .collect();
        CMatrix::from_rows(&rows).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx_eq(a: &CMatrix<f64>, b: &CMatrix<f64>, tol: f64) -> bool {
        (a - b).max_abs() <= tol
    }

    #[test]
    fn identity_singulars() {
        let s = svd(&CMatrix::<f64>::identity(3)).unwrap();
        assert_eq!(s.singulars, vec![1.0, 1.0, 1.0]);
        assert!(approx_eq(&s.reconstruct(), &CMatrix::identity(3), 1e-14));
    }

    #[test]
    fn diagonal_rank_deficient() {
        let m = CMatrix::from_real_diag(&[1.0, 0.5f64.sqrt(), 0.0]);
        let s = svd(&m).unwrap();
        assert!((s.singulars[0] - 1.0).abs() < 1e-15);
        assert!((s.singulars[1] - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(s.singulars[2], 0.0);
        assert!(approx_eq(&s.reconstruct(), &m, 1e-14));
        let uu = &s.left.adjoint() * &s.left;
        assert!(approx_eq(&uu, &CMatrix::identity(3), 1e-14));
    }

    #[test]
    fn zero_matrix_has_unitary_factors() {
        let s = svd(&CMatrix::<f64>::zeros(3, 3)).unwrap();
        assert_eq!(s.singulars, vec![0.0; 3]);
        assert!(approx_eq(&(&s.left.adjoint() * &s.left), &CMatrix::identity(3), 1e-15));
    }

    #[test]
    fn non_square_rejected() {
        let m = CMatrix::<f64>::zeros(2, 3);
        assert!(matches!(svd(&m), Err(Error::Shape(_))));
    }

    #[test]
    fn eigen_of_hermitian_2x2() {
        // [[2, i], [-i, 2]] has eigenvalues 3 and 1.
        let m: CMatrix<f64> = CMatrix::from_rows(&[
            vec![C::new(2.0, 0.0), C::new(0.0, 1.0)],
            vec![C::new(0.0, -1.0), C::new(2.0, 0.0)],
        ])
        .unwrap();
        let e = hermitian_eigen(&m).unwrap();
        assert!((e.values[0] - 3.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        let v0 = e.vectors.column(0);
        let mv = m.apply(&v0);
        for (a, b) in mv.iter().zip(&v0) {
            assert!((a - b.scale(3.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn json_round_trip() {
        let m = CMatrix::from_rows(&[
            vec![C::new(1.0, 0.5), C::new(0.0, -2.0)],
            vec![C::new(3.0, 0.0), C::new(-0.25, 0.125)],
        ])
        .unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, "[[[1.0,0.5],[0.0,-2.0]],[[3.0,0.0],[-0.25,0.125]]]");
        let back: CMatrix<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<CMatrix<f64>>("[[[1,0]],[[1,0],[2,0]]]").is_err());
    }

    #[test]
    fn single_precision_svd() {
        let m = CMatrix::<f32>::from_real_diag(&[0.25, 1.0, 0.5]);
        let s = svd(&m).unwrap();
        assert_eq!(s.singulars, vec![1.0, 0.5, 0.25]);
    }
}
