//! Exact desk-scale simulation of the random-coding construction behind the
//! square-root law.

mod codebook;
mod decode;
mod diagnostics;
mod sweep;

pub use codebook::{
    alpha_n, build_input_distribution, codebook_rng, sample_codebook, sample_symbol, Codebook,
    SimParams,
};
pub use decode::{pgm_error_probability, pgm_povm, Pgm};
pub use diagnostics::{
    a_hat, covertness_divergence, ensemble_average_divergence, pinched_test_statistic,
    pinched_test_statistic_blockwise, psi_n, type_set_membership,
};
pub use sweep::{
    simulate_cell, sqrt_law_sweep, write_csv, SimulationReport, SkippedCell, SweepConfig,
    SweepReport, CSV_HEADER,
};
