//! Pure and mixed qudit states.

use num_traits::{One, Zero};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, inner, norm, CMatrix};
use crate::scalar::{c, Real, C};

/// Unit vector in `C^d`, `d >= 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState<T> {
    amplitudes: Vec<C<T>>,
}

impl<T: Real> PureState<T> {
    /// Normalizes the given amplitudes.
    pub fn new(amplitudes: Vec<C<T>>) -> Result<Self> {
        if amplitudes.len() < 2 {
            return Err(Error::InvalidDimension(amplitudes.len()));
        }
        let n = norm(&amplitudes);
        if !(n > T::zero()) || !n.is_finite() {
            return Err(Error::InvalidParameter("state vector has zero or non-finite norm".into()));
        }
        Ok(Self {
            amplitudes: amplitudes.into_iter().map(|z| z.unscale(n)).collect(),
        })
    }

    pub fn from_real(amplitudes: &[T]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&x| c(x)).collect())
    }

    /// Computational basis state `|k⟩`.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        if k >= dim {
            return Err(Error::OutcomeOutOfRange { outcome: k, count: dim });
        }
        let mut v = vec![C::zero(); dim];
        v[k] = C::one();
        Ok(Self { amplitudes: v })
    }

    /// Haar-random state: `d` complex standard normals, normalized.
    pub fn haar_random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        let v = (0..dim).map(|_| gaussian_complex(rng)).collect();
        Self::new(v)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    #[inline]
    pub fn amplitudes(&self) -> &[C<T>] {
        &self.amplitudes
    }

    pub fn overlap(&self, other: &Self) -> C<T> {
        inner(&self.amplitudes, &other.amplitudes)
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &Self) -> T {
        self.overlap(other).norm_sqr()
    }

    pub fn projector(&self) -> CMatrix<T> {
        CMatrix::outer(&self.amplitudes, &self.amplitudes)
    }

    pub fn to_density(&self) -> DensityMatrix<T> {
        DensityMatrix {
            entries: self.projector(),
        }
    }
}

pub(crate) fn gaussian_complex<T: Real, R: Rng + ?Sized>(rng: &mut R) -> C<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C::new(T::lit(re), T::lit(im))
}

/// Hermitian, unit-trace, positive-semidefinite `d x d` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T> {
    entries: CMatrix<T>,
}

impl<T: Real> DensityMatrix<T> {
    /// Validates Hermiticity, unit trace and positivity within `tol`.
    pub fn new(entries: CMatrix<T>, tol: T) -> Result<Self> {
        if !entries.is_square() || entries.rows() < 2 {
            return Err(Error::Shape(format!(
                "density matrix must be square with d >= 2, got {}x{}",
                entries.rows(),
                entries.cols()
            )));
        }
        if !entries.is_hermitian(tol) {
            return Err(Error::InvalidParameter("density matrix is not Hermitian".into()));
        }
        let tr = entries.trace();
        if (tr.re - T::one()).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvalidParameter(format!("density matrix trace {tr} != 1")));
        }
        let eig = hermitian_eigen(&entries)?;
        if eig.values.iter().any(|&l| l < -tol.max(T::lit(1e-10))) {
            return Err(Error::InvalidParameter("density matrix has a negative eigenvalue".into()));
        }
        Ok(Self { entries })
    }

    pub(crate) fn new_unchecked(entries: CMatrix<T>) -> Self {
        Self { entries }
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        Ok(Self {
            entries: CMatrix::identity(dim).scale_real(T::one() / T::from_usize_lossy(dim)),
        })
    }

    /// `e|ψ⟩⟨ψ| + (1 − e) I/d`.
    pub fn depolarized(psi: &PureState<T>, e: T) -> Result<Self> {
        if !(T::zero()..=T::one()).contains(&e) {
            return Err(Error::InvalidParameter(format!("noise parameter e = {e} outside [0, 1]")));
        }
        let d = psi.dim();
        let mixed = CMatrix::identity(d).scale_real((T::one() - e) / T::from_usize_lossy(d));
        Ok(Self {
            entries: &psi.projector().scale_real(e) + &mixed,
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.entries.rows()
    }

    #[inline]
    pub fn matrix(&self) -> &CMatrix<T> {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.entries
    }
}

/// `⟨ψ|ρ|ψ⟩`.
pub fn fidelity_pure<T: Real>(psi: &PureState<T>, rho: &DensityMatrix<T>) -> Result<T> {
    if psi.dim() != rho.dim() {
        return Err(Error::Shape(format!(
            "state of dimension {} against density matrix of dimension {}",
            psi.dim(),
            rho.dim()
        )));
    }
    Ok(rho.matrix().sandwich(psi.amplitudes(), psi.amplitudes()).re)
}
