//! Simulated photon-counting run of the measurement/reversal experiment.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiment::sic::{SicSet, SIC_DIM, SIC_SIZE};
use crate::experiment::tomography::{qst_from_probabilities, qst_reconstruct};
use crate::families::{family, FamilyId};
use crate::linalg::CMatrix;
use crate::measurement::{InfoTriple, Measurement, Welford};
use crate::scalar::Real;
use crate::state::{fidelity_pure, DensityMatrix, PureState};

pub const DEFAULT_SHOTS: u64 = 10_000;
pub const DEFAULT_RUNS: usize = 100;

/// Prepared input `ρ(e) = e|ψ⟩⟨ψ| + (1 − e) I/3`.
#[derive(Debug, Clone)]
pub struct NoisyInput<T> {
    pub pure: PureState<T>,
    pub e: T,
    pub rho: DensityMatrix<T>,
}

impl<T: Real> NoisyInput<T> {
    pub fn new(pure: PureState<T>, e: T) -> Result<Self> {
        let rho = DensityMatrix::depolarized(&pure, e)?;
        Ok(Self { pure, e, rho })
    }
}

/// Counts for one prepared input, indexed `[outcome r][analysis outcome a]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountsSlice {
    pub counts: Vec<Vec<u64>>,
}

impl CountsSlice {
    pub fn outcome_total(&self, r: usize) -> u64 {
        self.counts[r].iter().sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }
}

/// Counts for every SIC input, indexed `[input k][outcome r][analysis a]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountsTable {
    pub counts: Vec<CountsSlice>,
    pub shots_per_setting: u64,
}

/// Expected detection probabilities `Tr[(Π_a/3) M_r ρ M_r†]`, `[r][a]`.
pub fn detection_probabilities<T: Real>(
    m: &Measurement<T>,
    input: &NoisyInput<T>,
    sic: &SicSet<T>,
) -> Vec<Vec<T>> {
    m.kraus()
        .iter()
        .map(|k| {
            let out = &(k * input.rho.matrix()) * &k.adjoint();
            sic.povm_probabilities(&out)
        })
        .collect()
}

pub(crate) fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 || !mean.is_finite() {
        return 0;
    }
    let dist = Poisson::new(mean).expect("positive finite Poisson mean");
    dist.sample(rng) as u64
}

fn binomial<R: Rng + ?Sized>(n: u64, p: f64, rng: &mut R) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p).expect("valid binomial").sample(rng)
}

/// Poisson-sampled counts for one input; the mean of each cell is
/// `shots · Tr[(Π_a/3) M_r ρ M_r†]`.
pub fn simulate_counts<T: Real, R: Rng + ?Sized>(
    m: &Measurement<T>,
    input: &NoisyInput<T>,
    sic: &SicSet<T>,
    shots: u64,
    rng: &mut R,
) -> Result<CountsSlice> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be at least 1".into()));
    }
    check_qutrit(m)?;
    let probs = detection_probabilities(m, input, sic);
    let counts = probs
        .iter()
        .map(|row| {
            row.iter()
                .map(|&q| poisson(shots as f64 * q.to_f64().unwrap_or(0.0), rng))
                .collect()
        })
        .collect();
    Ok(CountsSlice { counts })
}

/// Counts for all nine SIC inputs prepared with noise `e`.
pub fn simulate_table<T: Real, R: Rng + ?Sized>(
    m: &Measurement<T>,
    e: T,
    sic: &SicSet<T>,
    shots: u64,
    rng: &mut R,
) -> Result<CountsTable> {
    let counts = sic
        .states()
        .iter()
        .map(|psi| simulate_counts(m, &NoisyInput::new(psi.clone(), e)?, sic, shots, rng))
        .collect::<Result<Vec<_>>>()?;
    Ok(CountsTable {
        counts,
        shots_per_setting: shots,
    })
}

fn check_qutrit<T: Real>(m: &Measurement<T>) -> Result<()> {
    if m.dim() != SIC_DIM {
        return Err(Error::Shape(format!(
            "the SIC pipeline needs qutrit measurements, got d = {}",
            m.dim()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Infinite statistics: exact probabilities everywhere.
    Exact,
    /// Poissonian photon counts.
    Sampled,
}

#[derive(Debug, Clone, Copy)]
pub struct ExperimentConfig {
    pub shots: u64,
    pub runs: usize,
    pub seed: u64,
    pub mode: Mode,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            shots: DEFAULT_SHOTS,
            runs: DEFAULT_RUNS,
            seed: 0,
            mode: Mode::Sampled,
        }
    }
}

/// One simulated pass over all nine inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOutcome<T> {
    pub triple: InfoTriple<T>,
    /// Mean fidelity of the reconstructed post-reversal state with the input.
    pub recovery_fidelity: Option<T>,
    /// Per-input reversal success frequencies.
    pub success: [T; SIC_SIZE],
    /// Per-input `[detected, survived]` photon counts of the reversal setting;
    /// zero in exact mode.
    pub reversal_counts: [[u64; 2]; SIC_SIZE],
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentResult<T> {
    pub t: Option<FamilyId>,
    pub p: Option<T>,
    pub e_injected: T,
    pub shots: u64,
    pub runs: usize,
    #[serde(rename = "G")]
    pub g: T,
    #[serde(rename = "F")]
    pub f: T,
    #[serde(rename = "R")]
    pub r: T,
    pub sigma_G: T,
    pub sigma_F: T,
    pub sigma_R: T,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_fitted: Option<T>,
    #[serde(skip)]
    pub recovery_fidelity: Option<T>,
    #[serde(skip)]
    pub per_run: Vec<RunOutcome<T>>,
}

impl<T: Real> ExperimentResult<T> {
    pub fn triple(&self) -> InfoTriple<T> {
        InfoTriple::new(self.g, self.f, self.r)
    }

    pub fn sigma(&self) -> InfoTriple<T> {
        InfoTriple::new(self.sigma_G, self.sigma_F, self.sigma_R)
    }
}

/// Everything about a measurement the pipeline needs, computed once.
struct Prepared<T> {
    m: Measurement<T>,
    estimates: Vec<CMatrix<T>>,
    success: Vec<T>,
}

impl<T: Real> Prepared<T> {
    fn new(m: &Measurement<T>) -> Result<Self> {
        check_qutrit(m)?;
        // Post-measurement states are scored after the optimal unitary
        // correction, i.e. with the positive part of each operator.
        let m = if is_positive(m) { m.clone() } else { m.positive_part() };
        let estimates = (0..m.outcomes())
            .map(|r| m.estimate_projector(r))
            .collect::<Result<Vec<_>>>()?;
        let success = (0..m.outcomes())
            .map(|r| m.optimal_reversal(r).map(|rv| rv.success_probability()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { m, estimates, success })
    }
}

fn is_positive<T: Real>(m: &Measurement<T>) -> bool {
    let tol = T::zero_tol();
    m.kraus().iter().zip(m.svds()).all(|(k, s)| {
        k.is_hermitian(tol) && (&crate::linalg::positive_part(s) - k).max_abs() <= T::completeness_tol()
    })
}

fn exact_run<T: Real>(prep: &Prepared<T>, e: T, sic: &SicSet<T>) -> Result<RunOutcome<T>> {
    let nine = T::from_usize_lossy(SIC_SIZE);
    let (mut g, mut f) = (T::zero(), T::zero());
    for psi in sic.states() {
        let input = NoisyInput::new(psi.clone(), e)?;
        let probs = detection_probabilities(&prep.m, &input, sic);
        for (r, row) in probs.iter().enumerate() {
            let p_r: T = row.iter().copied().sum();
            if p_r <= T::zero_tol() * T::zero_tol() {
                continue;
            }
            g += p_r * prep.estimates[r].sandwich(psi.amplitudes(), psi.amplitudes()).re;
            let rho = qst_from_probabilities(sic, row)?;
            f += p_r * fidelity_pure(psi, &rho)?;
        }
    }
    let r: T = prep.success.iter().copied().sum();
    Ok(RunOutcome {
        triple: InfoTriple::new(g / nine, f / nine, r),
        recovery_fidelity: None,
        success: [r; SIC_SIZE],
        reversal_counts: [[0; 2]; SIC_SIZE],
    })
}

fn sampled_run<T: Real, R: Rng + ?Sized>(
    prep: &Prepared<T>,
    e: T,
    sic: &SicSet<T>,
    shots: u64,
    rng: &mut R,
) -> Result<RunOutcome<T>> {
    let nine = T::from_usize_lossy(SIC_SIZE);
    let (mut g, mut f, mut r_total) = (T::zero(), T::zero(), T::zero());
    let mut success = [T::zero(); SIC_SIZE];
    let mut reversal_counts = [[0u64; 2]; SIC_SIZE];
    let mut recovery = Welford::default();
    for (k, psi) in sic.states().iter().enumerate() {
        let input = NoisyInput::new(psi.clone(), e)?;

        // Measurement-only setting: outcome statistics and output tomography.
        let slice = simulate_counts(&prep.m, &input, sic, shots, rng)?;
        let total = slice.total();
        if total > 0 {
            let total_f = T::lit(total as f64);
            for r in 0..prep.m.outcomes() {
                let n_r = slice.outcome_total(r);
                if n_r == 0 {
                    continue;
                }
                let p_hat = T::lit(n_r as f64) / total_f;
                g += p_hat * prep.estimates[r].sandwich(psi.amplitudes(), psi.amplitudes()).re;
                let rho = qst_reconstruct(sic, &slice.counts[r])?;
                f += p_hat * fidelity_pure(psi, &rho)?;
            }
        }

        // Measurement + reversal setting: each photon of outcome r passes the
        // reversal with probability λ_min² / p(r).
        let mut detected = 0u64;
        let mut survived = 0u64;
        let mut analysis = [0u64; SIC_SIZE];
        let out_probs = sic.povm_probabilities(input.rho.matrix());
        for (r, kraus) in prep.m.kraus().iter().enumerate() {
            let gram = &kraus.adjoint() * kraus;
            let p_r = (&gram * input.rho.matrix()).trace().re.to_f64().unwrap_or(0.0);
            let n_r = poisson(shots as f64 * p_r, rng);
            detected += n_r;
            let pass = if p_r > 0.0 {
                (prep.success[r].to_f64().unwrap_or(0.0) / p_r).min(1.0)
            } else {
                0.0
            };
            let s_r = binomial(n_r, pass, rng);
            survived += s_r;
            // R^r M_r ∝ I, so survivors carry ρ; split them over the SIC outcomes.
            let mut remaining = s_r;
            let mut mass = 1.0;
            for (a, q) in out_probs.iter().enumerate() {
                let q = q.to_f64().unwrap_or(0.0);
                let n_a = if a + 1 == SIC_SIZE {
                    remaining
                } else {
                    binomial(remaining, (q / mass).clamp(0.0, 1.0), rng)
                };
                analysis[a] += n_a;
                remaining -= n_a;
                mass -= q;
            }
        }
        let freq = if detected > 0 {
            T::lit(survived as f64 / detected as f64)
        } else {
            T::zero()
        };
        success[k] = freq;
        reversal_counts[k] = [detected, survived];
        r_total += freq;
        if survived > 0 {
            let rho = qst_reconstruct(sic, &analysis)?;
            recovery.push(fidelity_pure(psi, &rho)?.to_f64().unwrap_or(f64::NAN));
        }
    }
    Ok(RunOutcome {
        triple: InfoTriple::new(g / nine, f / nine, r_total / nine),
        recovery_fidelity: (recovery.count() > 0).then(|| T::lit(recovery.mean())),
        success,
        reversal_counts,
    })
}

/// Runs the full pipeline for an arbitrary qutrit measurement.
pub fn run_measurement<T: Real>(
    m: &Measurement<T>,
    e: T,
    config: &ExperimentConfig,
) -> Result<ExperimentResult<T>> {
    if config.runs == 0 {
        return Err(Error::InvalidParameter("runs must be at least 1".into()));
    }
    if config.shots == 0 {
        return Err(Error::InvalidParameter("shots must be at least 1".into()));
    }
    if !(T::zero()..=T::one()).contains(&e) {
        return Err(Error::InvalidParameter(format!("noise parameter e = {e} outside [0, 1]")));
    }
    let prep = Prepared::new(m)?;
    let sic = SicSet::new();
    let per_run: Vec<RunOutcome<T>> = match config.mode {
        Mode::Exact => vec![exact_run(&prep, e, &sic)?],
        Mode::Sampled => (0..config.runs)
            .into_par_iter()
            .map(|run| {
                let mut rng = run_rng(config.seed, run);
                sampled_run(&prep, e, &sic, config.shots, &mut rng)
            })
            .collect::<Result<Vec<_>>>()?,
    };
    let mut acc = [Welford::default(), Welford::default(), Welford::default()];
    let mut rec = Welford::default();
    for run in &per_run {
        let t = run.triple;
        for (w, x) in acc.iter_mut().zip([t.g, t.f, t.r]) {
            w.push(x.to_f64().unwrap_or(f64::NAN));
        }
        if let Some(x) = run.recovery_fidelity {
            rec.push(x.to_f64().unwrap_or(f64::NAN));
        }
    }
    Ok(ExperimentResult {
        t: None,
        p: None,
        e_injected: e,
        shots: config.shots,
        runs: per_run.len(),
        g: T::lit(acc[0].mean()),
        f: T::lit(acc[1].mean()),
        r: T::lit(acc[2].mean()),
        sigma_G: T::lit(acc[0].std_dev()),
        sigma_F: T::lit(acc[1].std_dev()),
        sigma_R: T::lit(acc[2].std_dev()),
        e_fitted: None,
        recovery_fidelity: (rec.count() > 0).then(|| T::lit(rec.mean())),
        per_run,
    })
}

/// Runs the pipeline for the family measurement `M^(t)` at strength `p`.
pub fn run_experiment<T: Real>(
    t: FamilyId,
    p: T,
    e: T,
    config: &ExperimentConfig,
) -> Result<ExperimentResult<T>> {
    let m = family(t, p)?;
    let mut res = run_measurement(&m, e, config)?;
    res.t = Some(t);
    res.p = Some(p);
    Ok(res)
}

/// RNG for Monte-Carlo run `run`: one ChaCha stream per run under a shared seed.
pub fn run_rng(seed: u64, run: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run as u64);
    rng
}

/// Master seed for the `index`-th point of a sweep, so points do not share
/// Monte-Carlo streams.
pub fn point_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Exact-statistics triple with inputs `ρ(e)`, evaluated directly from the
/// outcome probabilities and output states (no tomography).
pub fn model_triple<T: Real>(m: &Measurement<T>, e: T) -> Result<InfoTriple<T>> {
    let prep = Prepared::new(m)?;
    let sic = SicSet::new();
    let nine = T::from_usize_lossy(SIC_SIZE);
    let (mut g, mut f) = (T::zero(), T::zero());
    for psi in sic.states() {
        let input = NoisyInput::new(psi.clone(), e)?;
        let a = psi.amplitudes();
        for (k, est) in prep.m.kraus().iter().zip(&prep.estimates) {
            let out = &(k * input.rho.matrix()) * &k.adjoint();
            let p_r = out.trace().re;
            g += p_r * est.sandwich(a, a).re;
            f += out.sandwich(a, a).re;
        }
    }
    let r = prep.success.iter().copied().sum();
    Ok(InfoTriple::new(g / nine, f / nine, r))
}
