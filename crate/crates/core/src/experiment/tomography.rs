//! SIC-based state and process tomography for qutrits.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::experiment::sic::{SicSet, SIC_DIM, SIC_SIZE};
use crate::linalg::{hermitian_eigen, CMatrix};
use crate::scalar::{c, Real, C};
use crate::state::DensityMatrix;

/// Linear inversion from SIC outcome frequencies, `ρ = Σ_a q_a (4Π_a − I)`.
///
/// The result has unit trace but may be slightly non-positive.
pub fn linear_inversion<T: Real>(sic: &SicSet<T>, freqs: &[T]) -> Result<CMatrix<T>> {
    if freqs.len() != SIC_SIZE {
        return Err(Error::Shape(format!(
            "expected {SIC_SIZE} SIC frequencies, got {}",
            freqs.len()
        )));
    }
    let total: T = freqs.iter().copied().sum();
    if !(total > T::zero()) {
        return Err(Error::EmptyData);
    }
    let id = CMatrix::identity(SIC_DIM);
    let dual_scale = T::from_usize_lossy(SIC_DIM + 1);
    Ok(sic
        .projectors()
        .iter()
        .zip(freqs)
        .fold(CMatrix::zeros(SIC_DIM, SIC_DIM), |acc, (proj, &q)| {
            let dual = &proj.scale_real(dual_scale) - &id;
            &acc + &dual.scale_real(q / total)
        }))
}

/// Closest positive-semidefinite unit-trace matrix in Frobenius norm: the
/// eigenvalues are projected onto the probability simplex.
pub fn project_to_density<T: Real>(m: &CMatrix<T>) -> Result<DensityMatrix<T>> {
    let eig = hermitian_eigen(m)?;
    if eig.values.iter().all(|&l| l >= T::zero()) {
        // Already physical; keep the input bit-for-bit apart from Hermitization.
        let h = CMatrix::from_fn(m.rows(), m.cols(), |i, j| {
            (m[(i, j)] + m[(j, i)].conj()).scale(T::lit(0.5))
        });
        let tr = h.trace().re;
        if !(tr > T::zero()) {
            return Err(Error::EmptyData);
        }
        return Ok(DensityMatrix::new_unchecked(h.scale_real(T::one() / tr)));
    }
    let projected = simplex_projection(&eig.values);
    let v = &eig.vectors;
    let d = CMatrix::from_real_diag(&projected);
    Ok(DensityMatrix::new_unchecked(&(v * &d) * &v.adjoint()))
}

/// Euclidean projection onto `{x ≥ 0, Σx = 1}`; `values` sorted descending.
fn simplex_projection<T: Real>(values: &[T]) -> Vec<T> {
    let mut shift = T::zero();
    let mut partial = T::zero();
    for (k, &v) in values.iter().enumerate() {
        partial += v;
        let candidate = (partial - T::one()) / T::from_usize_lossy(k + 1);
        if v - candidate > T::zero() {
            shift = candidate;
        }
    }
    values.iter().map(|&v| (v - shift).max(T::zero())).collect()
}

/// Reconstructs a qutrit state from SIC analysis counts.
pub fn qst_reconstruct<T: Real>(sic: &SicSet<T>, counts: &[u64]) -> Result<DensityMatrix<T>> {
    if counts.iter().all(|&n| n == 0) {
        return Err(Error::EmptyData);
    }
    let freqs: Vec<T> = counts.iter().map(|&n| T::lit(n as f64)).collect();
    project_to_density(&linear_inversion(sic, &freqs)?)
}

/// Reconstruction from exact (or any non-negative) outcome weights.
pub fn qst_from_probabilities<T: Real>(sic: &SicSet<T>, probs: &[T]) -> Result<DensityMatrix<T>> {
    project_to_density(&linear_inversion(sic, probs)?)
}

/// Reconstructed channel with its figures of merit.
#[derive(Debug, Clone)]
pub struct ProcessEstimate<T> {
    /// Unnormalized Choi matrix `Σ_ij |i⟩⟨j| ⊗ E(|i⟩⟨j|)`, `d² x d²`.
    pub choi: CMatrix<T>,
    /// `⟨Φ|J|Φ⟩ / Tr J` with `|Φ⟩` maximally entangled.
    pub process_fidelity: T,
    /// `(d·F_pro + 1)/(d + 1)` of the trace-normalized channel.
    pub average_gate_fidelity: T,
    /// `Tr J / d`, the input-averaged success probability.
    pub mean_trace: T,
}

/// Process tomography from the (unnormalized) outputs `E(Π_a)` of the nine
/// SIC probe states.
///
/// Uses `X = Σ_a c_a(X) Π_a` with `c_a = (4 Tr(XΠ_a) − Tr X)/3`.
pub fn process_tomography<T: Real>(
    sic: &SicSet<T>,
    outputs: &[CMatrix<T>],
) -> Result<ProcessEstimate<T>> {
    if outputs.len() != SIC_SIZE {
        return Err(Error::UnderDetermined(format!(
            "{} probe outputs, need {SIC_SIZE}",
            outputs.len()
        )));
    }
    if outputs.iter().any(|o| o.rows() != SIC_DIM || o.cols() != SIC_DIM) {
        return Err(Error::Shape("probe outputs must be 3x3".into()));
    }
    let d = SIC_DIM;
    let three = T::lit(3.0);
    let four = T::lit(4.0);
    let states = sic.states();
    let mut choi = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            let trace_x = if i == j { T::one() } else { T::zero() };
            let image = states.iter().zip(outputs).fold(
                CMatrix::zeros(d, d),
                |acc, (s, out)| {
                    let a = s.amplitudes();
                    // Tr(|i⟩⟨j| Π_a) = ⟨j|ψ_a⟩⟨ψ_a|i⟩
                    let tr = a[j] * a[i].conj();
                    let coef = (tr.scale(four) - c(trace_x)).unscale(three);
                    &acc + &out.scale(coef)
                },
            );
            for k in 0..d {
                for l in 0..d {
                    choi[(i * d + k, j * d + l)] = image[(k, l)];
                }
            }
        }
    }
    let trace = choi.trace().re;
    if !(trace > T::zero_tol()) {
        return Err(Error::UnderDetermined("channel output has zero trace".into()));
    }
    let mut overlap: C<T> = C::zero();
    for i in 0..d {
        for j in 0..d {
            overlap += choi[(i * d + i, j * d + j)];
        }
    }
    let df = T::from_usize_lossy(d);
    let process_fidelity = overlap.re / (df * trace);
    Ok(ProcessEstimate {
        choi,
        process_fidelity,
        average_gate_fidelity: (df * process_fidelity + T::one()) / (df + T::one()),
        mean_trace: trace / df,
    })
}

/// `E(Π_a) = K Π_a K†` for every SIC probe.
pub fn probe_outputs_exact<T: Real>(sic: &SicSet<T>, kraus: &CMatrix<T>) -> Vec<CMatrix<T>> {
    let kd = kraus.adjoint();
    sic.projectors()
        .iter()
        .map(|p| &(kraus * p) * &kd)
        .collect()
}
