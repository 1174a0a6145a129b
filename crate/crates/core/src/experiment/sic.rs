use crate::error::Result;
use crate::linalg::CMatrix;
use crate::scalar::{Real, C};
use crate::state::PureState;

/// Qutrit dimension the SIC set lives in.
pub const SIC_DIM: usize = 3;
pub const SIC_SIZE: usize = SIC_DIM * SIC_DIM;

/// The nine qutrit SIC states, the Weyl-Heisenberg orbit of `(|1⟩ − |2⟩)/√2`.
///
/// State `3j + k` is `X^j Z^k` applied to the fiducial, with `X|i⟩ = |i+1⟩` and
/// `Z|i⟩ = ω^i|i⟩`, `ω = e^{2πi/3}`.
#[derive(Debug, Clone)]
pub struct SicSet<T> {
    states: Vec<PureState<T>>,
    projectors: Vec<CMatrix<T>>,
}

impl<T: Real> SicSet<T> {
    pub fn new() -> Self {
        let h = T::one() / T::lit(2.0).sqrt();
        let fiducial = [C::new(T::zero(), T::zero()), C::new(h, T::zero()), C::new(-h, T::zero())];
        let omega = |n: usize| {
            let angle = T::lit(2.0) * T::PI() * T::from_usize_lossy(n % SIC_DIM) / T::lit(3.0);
            C::from_polar(T::one(), angle)
        };
        let mut states = Vec::with_capacity(SIC_SIZE);
        for j in 0..SIC_DIM {
            for k in 0..SIC_DIM {
                let mut v = vec![C::new(T::zero(), T::zero()); SIC_DIM];
                for (i, &amp) in fiducial.iter().enumerate() {
                    v[(i + j) % SIC_DIM] = amp * omega(i * k);
                }
                states.push(PureState::new(v).expect("fiducial is normalized"));
            }
        }
        let projectors = states.iter().map(PureState::projector).collect();
        Self { states, projectors }
    }

    pub fn states(&self) -> &[PureState<T>] {
        &self.states
    }

    /// `|ψ_a⟩⟨ψ_a|`; the analysis POVM elements are these divided by 3.
    pub fn projectors(&self) -> &[CMatrix<T>] {
        &self.projectors
    }

    /// Outcome probabilities `Tr(ρ Π_a)/3` of the SIC analysis POVM for an
    /// unnormalized state `sigma`.
    pub fn povm_probabilities(&self, sigma: &CMatrix<T>) -> Vec<T> {
        let third = T::one() / T::lit(3.0);
        self.states
            .iter()
            .map(|s| sigma.sandwich(s.amplitudes(), s.amplitudes()).re.max(T::zero()) * third)
            .collect()
    }
}

impl<T: Real> Default for SicSet<T> {
    fn default() -> Self {
        Self::new()
    }
}

/// Convenience for callers that only need the states.
pub fn sic_states<T: Real>() -> Result<SicSet<T>> {
    Ok(SicSet::new())
}
