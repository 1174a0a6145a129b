//! Digital re-run of the qutrit experiment: SIC inputs with depolarizing
//! noise, Poissonian counts, tomography, Monte-Carlo error bars and a fit of
//! the noise parameter.

pub mod fit;
pub mod pipeline;
pub mod sic;
pub mod tomography;

pub use fit::{fit_noise, fit_noise_measurements};
pub use pipeline::{
    detection_probabilities, model_triple, point_seed, run_experiment, run_measurement, run_rng,
    simulate_counts, simulate_table, CountsSlice, CountsTable, ExperimentConfig, ExperimentResult, Mode,
    NoisyInput, RunOutcome,
};
pub use sic::{sic_states, SicSet};
pub use tomography::{
    linear_inversion, probe_outputs_exact, process_tomography, qst_from_probabilities,
    qst_reconstruct, ProcessEstimate,
};
