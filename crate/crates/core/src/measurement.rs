//! Kraus-operator measurements and their three information contents.
//!
//! For a measurement `{M_r}` with singular values `λ^r_i` (sorted descending):
//!
//! * information gain `G = (d + Σ_r (λ^r_max)²) / (d(d+1))`
//! * operation fidelity `F = (d + Σ_r (Σ_i λ^r_i)²) / (d(d+1))`
//! * reversibility `R = Σ_r (λ^r_min)²`
//!
//! `G` assumes the observer guesses the top right-singular vector of the
//! observed operator, and `F` assumes the post-measurement state is corrected
//! by the unitary part of the polar decomposition of `M_r`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{inner, norm, positive_part, svd, CMatrix, Svd};
use crate::scalar::{Real, C};
use crate::state::{gaussian_complex, PureState};

/// `(G, F, R)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfoTriple<T> {
    #[serde(rename = "G")]
    pub g: T,
    #[serde(rename = "F")]
    pub f: T,
    #[serde(rename = "R")]
    pub r: T,
}

impl<T: Real> InfoTriple<T> {
    pub fn new(g: T, f: T, r: T) -> Self {
        Self { g, f, r }
    }

    /// Checks `1/d ≤ G ≤ 2/(d+1)`, `2/(d+1) ≤ F ≤ 1`, `0 ≤ R ≤ 1`, each widened by `tol`.
    pub fn is_admissible(&self, dim: usize, tol: T) -> bool {
        let d = T::from_usize_lossy(dim);
        let two = T::lit(2.0);
        let hi_g = two / (d + T::one());
        self.g >= T::one() / d - tol
            && self.g <= hi_g + tol
            && self.f >= hi_g - tol
            && self.f <= T::one() + tol
            && self.r >= -tol
            && self.r <= T::one() + tol
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        (self.g - other.g)
            .abs()
            .max((self.f - other.f).abs())
            .max((self.r - other.r).abs())
    }
}

/// Result of a completeness check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Completeness<T> {
    pub complete: bool,
    /// `‖Σ_r M_r†M_r − I‖_max`.
    pub deviation: T,
}

/// An ordered set of square Kraus operators with their SVDs.
///
/// Completeness is not enforced by [`Measurement::new`]; use
/// [`Measurement::checked`] or [`Measurement::validate`].
#[derive(Debug, Clone)]
pub struct Measurement<T> {
    dim: usize,
    kraus: Vec<CMatrix<T>>,
    svds: Vec<Svd<T>>,
}

/// On-disk form: `{ "dim": d, "kraus": [matrix, ...] }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Real + Serialize",
    deserialize = "T: Real + Deserialize<'de>"
))]
pub struct MeasurementFile<T> {
    pub dim: usize,
    pub kraus: Vec<CMatrix<T>>,
}

impl<T: Real> Measurement<T> {
    pub fn new(kraus: Vec<CMatrix<T>>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidMeasurement("no Kraus operators".into()))?;
        let dim = first.rows();
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        for (i, k) in kraus.iter().enumerate() {
            if k.rows() != dim || k.cols() != dim {
                return Err(Error::Shape(format!(
                    "operator {i} is {}x{}, expected {dim}x{dim}",
                    k.rows(),
                    k.cols()
                )));
            }
            if !k.is_finite() {
                return Err(Error::InvalidMeasurement(format!("operator {i} has non-finite entries")));
            }
        }
        let svds = kraus.iter().map(svd).collect::<Result<Vec<_>>>()?;
        Ok(Self { dim, kraus, svds })
    }

    /// Builds the measurement and rejects it unless complete within `tol`.
    pub fn checked(kraus: Vec<CMatrix<T>>, tol: T) -> Result<Self> {
        let m = Self::new(kraus)?;
        let check = m.validate(tol);
        if !check.complete {
            return Err(Error::Incomplete {
                deviation: check.deviation.to_f64().unwrap_or(f64::NAN),
                tol: tol.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(m)
    }

    pub fn from_file(file: MeasurementFile<T>) -> Result<Self> {
        let m = Self::new(file.kraus)?;
        if m.dim != file.dim {
            return Err(Error::Shape(format!(
                "declared dim {} but operators are {}x{}",
                file.dim, m.dim, m.dim
            )));
        }
        Ok(m)
    }

    pub fn to_file(&self) -> MeasurementFile<T> {
        MeasurementFile {
            dim: self.dim,
            kraus: self.kraus.clone(),
        }
    }

    /// Single-outcome measurement given by a unitary.
    pub fn unitary(u: CMatrix<T>) -> Result<Self> {
        Self::new(vec![u])
    }

    /// Rank-one projectors onto the computational basis.
    pub fn von_neumann(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        Self::new(
            (0..dim)
                .map(|r| {
                    let mut diag = vec![T::zero(); dim];
                    diag[r] = T::one();
                    CMatrix::from_real_diag(&diag)
                })
                .collect(),
        )
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn outcomes(&self) -> usize {
        self.kraus.len()
    }

    #[inline]
    pub fn kraus(&self) -> &[CMatrix<T>] {
        &self.kraus
    }

    #[inline]
    pub fn svds(&self) -> &[Svd<T>] {
        &self.svds
    }

    pub fn operator(&self, r: usize) -> Result<&CMatrix<T>> {
        self.kraus.get(r).ok_or(Error::OutcomeOutOfRange {
            outcome: r,
            count: self.kraus.len(),
        })
    }

    fn svd_of(&self, r: usize) -> Result<&Svd<T>> {
        self.svds.get(r).ok_or(Error::OutcomeOutOfRange {
            outcome: r,
            count: self.svds.len(),
        })
    }

    pub fn validate(&self, tol: T) -> Completeness<T> {
        let sum = self
            .kraus
            .iter()
            .fold(CMatrix::zeros(self.dim, self.dim), |acc, m| &acc + &(&m.adjoint() * m));
        let deviation = (&sum - &CMatrix::identity(self.dim)).max_abs();
        Completeness {
            complete: deviation <= tol,
            deviation,
        }
    }

    fn dd1(&self) -> T {
        let d = T::from_usize_lossy(self.dim);
        d * (d + T::one())
    }

    pub fn info_gain(&self) -> T {
        let d = T::from_usize_lossy(self.dim);
        let top: T = self.svds.iter().map(|s| s.max().powi(2)).sum();
        (d + top) / self.dd1()
    }

    pub fn operation_fidelity(&self) -> T {
        let d = T::from_usize_lossy(self.dim);
        let sums: T = self
            .svds
            .iter()
            .map(|s| s.singulars.iter().copied().sum::<T>().powi(2))
            .sum();
        (d + sums) / self.dd1()
    }

    pub fn reversibility(&self) -> T {
        self.svds.iter().map(|s| s.min().powi(2)).sum()
    }

    pub fn triple(&self) -> InfoTriple<T> {
        InfoTriple::new(self.info_gain(), self.operation_fidelity(), self.reversibility())
    }

    /// Born probability `⟨ψ|M_r†M_r|ψ⟩`.
    pub fn probability(&self, r: usize, psi: &PureState<T>) -> Result<T> {
        self.check_state(psi)?;
        let m = self.operator(r)?;
        Ok(norm(&m.apply(psi.amplitudes())).powi(2))
    }

    /// Normalized post-measurement state for outcome `r`, with its probability.
    pub fn post_measurement(&self, r: usize, psi: &PureState<T>) -> Result<(PureState<T>, T)> {
        self.check_state(psi)?;
        let out = self.operator(r)?.apply(psi.amplitudes());
        let p = norm(&out).powi(2);
        if p <= T::lit(1e-14).max(T::zero_tol() * T::zero_tol()) {
            return Err(Error::ImpossibleOutcome { outcome: r });
        }
        Ok((PureState::new(out)?, p))
    }

    /// The observer's guess after outcome `r`: the right singular vector of
    /// `M_r` belonging to its largest singular value.
    pub fn optimal_estimate(&self, r: usize) -> Result<PureState<T>> {
        PureState::new(self.svd_of(r)?.right_vector(0))
    }

    /// Uniform mixture over the top right-singular subspace of `M_r`.
    ///
    /// Any vector of that subspace is an optimal guess; averaging over them
    /// gives the same mean estimation fidelity as [`Self::optimal_estimate`]
    /// with no dependence on the arbitrary basis inside a degenerate subspace.
    pub fn estimate_projector(&self, r: usize) -> Result<CMatrix<T>> {
        let s = self.svd_of(r)?;
        let top = s.max();
        let tol = T::completeness_tol() * top.max(T::one());
        let k: Vec<usize> = (0..self.dim).filter(|&i| top - s.singulars[i] <= tol).collect();
        let weight = T::one() / T::from_usize_lossy(k.len());
        Ok(k.iter().fold(CMatrix::zeros(self.dim, self.dim), |acc, &i| {
            let v = s.right_vector(i);
            &acc + &CMatrix::outer(&v, &v).scale_real(weight)
        }))
    }

    /// `R^r = λ_min U_r† D_r⁻¹ V_r†`, or the null operation when `λ_min = 0`.
    pub fn optimal_reversal(&self, r: usize) -> Result<ReversalOperation<T>> {
        let s = self.svd_of(r)?;
        let lmin = s.min();
        if lmin <= T::zero_tol() * s.max().max(T::one()) {
            return Ok(ReversalOperation {
                operator: CMatrix::zeros(self.dim, self.dim),
                success_scale: T::zero(),
            });
        }
        let inv: Vec<T> = s.singulars.iter().map(|&l| lmin / l).collect();
        let operator = &(&s.right.adjoint() * &CMatrix::from_real_diag(&inv)) * &s.left.adjoint();
        Ok(ReversalOperation {
            operator,
            success_scale: lmin,
        })
    }

    /// The measurement `{|M_r|}` with each operator replaced by `(M_r†M_r)^{1/2}`.
    ///
    /// Same statistics and the same `(G, F, R)`; the post-measurement states
    /// are the ones used by the operation fidelity.
    pub fn positive_part(&self) -> Self {
        let kraus: Vec<_> = self.svds.iter().map(positive_part).collect();
        Self::new(kraus).expect("positive part of a valid measurement is valid")
    }

    fn check_state(&self, psi: &PureState<T>) -> Result<()> {
        if psi.dim() != self.dim {
            return Err(Error::Shape(format!(
                "state of dimension {} for a measurement of dimension {}",
                psi.dim(),
                self.dim
            )));
        }
        Ok(())
    }

    /// Per-state integrands of the Haar averages defining `G` and `F`.
    pub(crate) fn state_scores(&self, psi: &PureState<T>, estimates: &[CMatrix<T>]) -> (T, T) {
        let a = psi.amplitudes();
        let mut g = T::zero();
        let mut f = T::zero();
        for (s, (m, est)) in self.svds.iter().zip(self.kraus.iter().zip(estimates)) {
            let p = norm(&m.apply(a)).powi(2);
            g += p * est.sandwich(a, a).re;
            // ⟨ψ|M_r|ψ⟩ after the optimal unitary correction is ⟨ψ||M_r||ψ⟩.
            let u = s.right.apply(a);
            let proj: T = u
                .iter()
                .zip(&s.singulars)
                .map(|(z, &l)| z.norm_sqr() * l)
                .sum();
            f += proj * proj;
        }
        (g, f)
    }

    pub(crate) fn estimate_projectors(&self) -> Vec<CMatrix<T>> {
        (0..self.outcomes())
            .map(|r| self.estimate_projector(r).expect("index in range"))
            .collect()
    }

    /// Monte-Carlo estimate of `(G, F, R)` from their Haar-average definitions.
    ///
    /// Probabilities are exact per sampled state; only the state average is
    /// sampled. `R` is the exact total reversal success probability per state.
    pub fn empirical_triple<R: Rng + ?Sized>(
        &self,
        samples: usize,
        rng: &mut R,
    ) -> Result<EmpiricalTriple<T>> {
        if samples == 0 {
            return Err(Error::InvalidParameter("need at least one sample".into()));
        }
        let estimates = self.estimate_projectors();
        let reversals = (0..self.outcomes())
            .map(|r| self.optimal_reversal(r))
            .collect::<Result<Vec<_>>>()?;
        let mut acc = [Welford::default(), Welford::default(), Welford::default()];
        for _ in 0..samples {
            let psi = PureState::haar_random(self.dim, rng)?;
            let (g, f) = self.state_scores(&psi, &estimates);
            let rev: T = reversals
                .iter()
                .zip(&self.kraus)
                .map(|(rv, m)| norm(&rv.operator.apply(&m.apply(psi.amplitudes()))).powi(2))
                .sum();
            for (w, x) in acc.iter_mut().zip([g, f, rev]) {
                w.push(x.to_f64().unwrap_or(f64::NAN));
            }
        }
        let mean = |i: usize| T::lit(acc[i].mean);
        let se = |i: usize| T::lit(acc[i].std_error());
        Ok(EmpiricalTriple {
            mean: InfoTriple::new(mean(0), mean(1), mean(2)),
            std_error: InfoTriple::new(se(0), se(1), se(2)),
            samples,
        })
    }
}

/// Probabilistic reversal for one outcome.
#[derive(Debug, Clone)]
pub struct ReversalOperation<T> {
    pub operator: CMatrix<T>,
    /// `λ_min`; the reversal succeeds with probability `λ_min²` for any input.
    pub success_scale: T,
}

impl<T: Real> ReversalOperation<T> {
    pub fn is_null(&self) -> bool {
        self.success_scale.is_zero()
    }

    pub fn success_probability(&self) -> T {
        self.success_scale * self.success_scale
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EmpiricalTriple<T> {
    pub mean: InfoTriple<T>,
    pub std_error: InfoTriple<T>,
    pub samples: usize,
}

/// Running mean and variance.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Welford {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub(crate) fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub(crate) fn count(&self) -> usize {
        self.n
    }

    pub(crate) fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample standard deviation; zero for fewer than two points.
    pub(crate) fn std_dev(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n - 1) as f64).sqrt()
        }
    }

    pub(crate) fn std_error(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.std_dev() / (self.n as f64).sqrt()
        }
    }
}

/// Haar-random `n x n` unitary (Gram-Schmidt on a complex Ginibre matrix).
pub fn random_unitary<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix<T> {
    random_isometry(n, n, rng)
}

/// Random `rows x cols` isometry (`W†W = I`), `rows >= cols`.
pub fn random_isometry<T: Real, R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix<T> {
    assert!(rows >= cols);
    let mut basis: Vec<Vec<C<T>>> = Vec::with_capacity(cols);
    while basis.len() < cols {
        let mut v: Vec<C<T>> = (0..rows).map(|_| gaussian_complex(rng)).collect();
        for _ in 0..2 {
            for b in &basis {
                let p = inner(b, &v);
                for (x, &y) in v.iter_mut().zip(b) {
                    *x -= p * y;
                }
            }
        }
        let n = norm(&v);
        if n > T::lit(1e-6) {
            basis.push(v.into_iter().map(|z| z.unscale(n)).collect());
        }
    }
    CMatrix::from_fn(rows, cols, |i, j| basis[j][i])
}

/// Random complete measurement with `outcomes` operators, obtained by cutting
/// a random `(outcomes·d) x d` isometry into `d x d` blocks.
pub fn random_measurement<T: Real, R: Rng + ?Sized>(
    dim: usize,
    outcomes: usize,
    rng: &mut R,
) -> Result<Measurement<T>> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    if outcomes == 0 {
        return Err(Error::InvalidMeasurement("no outcomes requested".into()));
    }
    let w = random_isometry::<T, R>(outcomes * dim, dim, rng);
    let kraus = (0..outcomes)
        .map(|r| CMatrix::from_fn(dim, dim, |i, j| w[(r * dim + i, j)]))
        .collect();
    Measurement::new(kraus)
}

#[cfg(test)]
pub(crate) fn real_diag_measurement<T: Real>(ops: &[Vec<T>]) -> Result<Measurement<T>> {
    Measurement::new(ops.iter().map(|d| CMatrix::from_real_diag(d)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn m4(p: f64) -> Measurement<f64> {
        real_diag_measurement(&[vec![1.0, (1.0 - p).sqrt(), 1.0], vec![0.0, p.sqrt(), 0.0]]).unwrap()
    }

    #[test]
    fn validate_examples() {
        let id = Measurement::unitary(CMatrix::<f64>::identity(3)).unwrap();
        let v = id.validate(1e-10);
        assert!(v.complete);
        assert_eq!(v.deviation, 0.0);

        assert!(m4(0.36).validate(1e-10).complete);

        let over: Measurement<f64> = real_diag_measurement(&[vec![1.0, 1.0, 1.0], vec![0.1, 0.0, 0.0]]).unwrap();
        let v = over.validate(1e-10);
        assert!(!v.complete);
        assert!((v.deviation - 0.01).abs() < 1e-15);
    }

    #[test]
    fn empty_measurement_rejected() {
        assert!(matches!(
            Measurement::<f64>::new(vec![]),
            Err(Error::InvalidMeasurement(_))
        ));
    }

    #[test]
    fn mixed_dimensions_rejected() {
        let r = Measurement::<f64>::new(vec![CMatrix::identity(3), CMatrix::identity(2)]);
        assert!(matches!(r, Err(Error::Shape(_))));
    }

    #[test]
    fn extremal_triples() {
        let u = Measurement::unitary(CMatrix::<f64>::identity(3)).unwrap();
        let t = u.triple();
        assert!((t.g - 1.0 / 3.0).abs() < 1e-12);
        assert!((t.f - 1.0).abs() < 1e-12);
        assert!((t.r - 1.0).abs() < 1e-12);

        let vn = Measurement::<f64>::von_neumann(3).unwrap();
        let t = vn.triple();
        assert!((t.g - 0.5).abs() < 1e-12);
        assert!((t.f - 0.5).abs() < 1e-12);
        assert!(t.r.abs() < 1e-12);
    }

    #[test]
    fn weak_measurement_triple() {
        let t = m4(0.36).triple();
        assert!((t.g - 4.36 / 12.0).abs() < 1e-12);
        assert!((t.f - (2.0 + 0.8) / 3.0).abs() < 1e-12);
        assert!((t.r - 0.64).abs() < 1e-12);
    }

    #[test]
    fn post_measurement_examples() {
        let id = Measurement::unitary(CMatrix::<f64>::identity(3)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let psi = PureState::haar_random(3, &mut rng).unwrap();
        let (out, p) = id.post_measurement(0, &psi).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
        assert!((out.fidelity(&psi) - 1.0).abs() < 1e-12);

        let vn = Measurement::<f64>::von_neumann(3).unwrap();
        let plus = PureState::from_real(&[1.0, 1.0, 0.0]).unwrap();
        let (out, p) = vn.post_measurement(1, &plus).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
        assert!((out.fidelity(&PureState::basis(3, 1).unwrap()) - 1.0).abs() < 1e-12);
        assert_eq!(
            vn.post_measurement(2, &plus).unwrap_err(),
            Error::ImpossibleOutcome { outcome: 2 }
        );

        let uniform = PureState::from_real(&[1.0, 1.0, 1.0]).unwrap();
        let (out, p) = m4(0.36).post_measurement(1, &uniform).unwrap();
        assert!((p - 0.12).abs() < 1e-12);
        assert!((out.fidelity(&PureState::basis(3, 1).unwrap()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn estimate_examples() {
        let vn = Measurement::<f64>::von_neumann(3).unwrap();
        let e = vn.optimal_estimate(2).unwrap();
        assert!((e.fidelity(&PureState::basis(3, 2).unwrap()) - 1.0).abs() < 1e-12);
        let e = m4(0.36).optimal_estimate(1).unwrap();
        assert!((e.fidelity(&PureState::basis(3, 1).unwrap()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reversal_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u = random_unitary::<f64, _>(3, &mut rng);
        let m = Measurement::unitary(u.clone()).unwrap();
        let rev = m.optimal_reversal(0).unwrap();
        assert!((rev.success_probability() - 1.0).abs() < 1e-12);
        assert!((&rev.operator - &u.adjoint()).max_abs() < 1e-10);

        let rev = m4(0.36).optimal_reversal(0).unwrap();
        let expect = CMatrix::from_real_diag(&[0.8, 1.0, 0.8]);
        assert!((&rev.operator - &expect).max_abs() < 1e-12);
        assert!((rev.success_probability() - 0.64).abs() < 1e-12);
        let prod = &rev.operator * &m4(0.36).kraus()[0];
        assert!((&prod - &CMatrix::identity(3).scale_real(0.8)).max_abs() < 1e-12);

        let vn = Measurement::<f64>::von_neumann(3).unwrap();
        for r in 0..3 {
            let rev = vn.optimal_reversal(r).unwrap();
            assert!(rev.is_null());
            assert_eq!(rev.operator.max_abs(), 0.0);
        }
    }

    #[test]
    fn unitary_empirical_has_zero_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = random_unitary::<f64, _>(3, &mut rng);
        let m = Measurement::unitary(u).unwrap();
        let e = m.empirical_triple(10_000, &mut rng).unwrap();
        assert!((e.mean.g - 1.0 / 3.0).abs() < 1e-12);
        assert!((e.mean.f - 1.0).abs() < 1e-12);
        assert!((e.mean.r - 1.0).abs() < 1e-12);
        assert!(e.std_error.g < 1e-12 && e.std_error.f < 1e-12 && e.std_error.r < 1e-12);
    }

    #[test]
    fn outcome_out_of_range() {
        let vn = Measurement::<f64>::von_neumann(3).unwrap();
        assert_eq!(
            vn.optimal_reversal(3).unwrap_err(),
            Error::OutcomeOutOfRange { outcome: 3, count: 3 }
        );
    }

    #[test]
    fn file_round_trip() {
        let m = m4(0.5);
        let s = serde_json::to_string(&m.to_file()).unwrap();
        let back: MeasurementFile<f64> = serde_json::from_str(&s).unwrap();
        let m2 = Measurement::from_file(back).unwrap();
        assert!(m.triple().max_abs_diff(&m2.triple()) < 1e-15);
    }
}
