//! Covert communication over classical-quantum wiretap channels.
//!
//! A channel maps each classical input `x ∈ {0, …, k−1}` to a receiver state
//! `σ(x)` and an eavesdropper state `ρ(x)`; symbol 0 is "no transmission".
//! The crate decides which covert regime a channel is in, computes the covert
//! capacity when it is positive and the square-root-law constant `L` when it is
//! not, and simulates the random-coding construction exactly at small
//! blocklength.
//!
//! All information quantities are in nats.
//!
//! ```
//! use cq_covert::{CqWiretapChannel, DensityOperator, scaling_constant};
//!
//! let d = |p: &[f64]| DensityOperator::diagonal(p).unwrap();
//! let ch = CqWiretapChannel::new(
//!     vec![d(&[0.5, 0.5]), d(&[0.75, 0.25])],
//!     vec![d(&[0.5, 0.5]), d(&[0.75, 0.25])],
//! ).unwrap();
//! let l = scaling_constant(&ch).unwrap().l;
//! assert!((l - 0.3699923).abs() < 1e-6);
//! ```

pub mod channel;
pub mod converse;
pub mod density;
pub mod divergence;
pub mod error;
pub mod expansion;
pub mod format;
pub mod lp;
pub mod operator;
pub mod qp;
pub mod random;
pub mod rate;
pub mod regime;
pub mod scaling;
pub mod sim;

pub use channel::{
    average_output_state, product_output_state, sanitize, ChannelMatrices, Codeword,
    CqWiretapChannel, Diagnostic, DiagnosticKind, Diagnostics, InputDistribution, Sanitized, Side,
};
pub use converse::{converse_chain, fano_throughput_bound, ChainLink, ChainReport, Ensemble};
pub use density::DensityOperator;
pub use divergence::{
    chi_squared, holevo_information, kubo_mori_chi_squared, relative_entropy, von_neumann_entropy,
    Nats,
};
pub use error::{Error, Result};
pub use expansion::{
    chi_sq_expansion_check, holevo_expansion_check, ChiSqExpansionReport, HolevoExpansionReport,
};
pub use format::ChannelFile;
pub use operator::{CMatrix, DimCap, HermitianOperator};
pub use rate::{covert_rate, RateResult};
pub use regime::{classify, FeasibilityTolerances, Regime, RegimeReport};
pub use scaling::{
    chi_sq_gram, divergence_vector, scaling_constant, scaling_constant_grid_oracle, scaling_ratio,
    GridOracleResult, ScalingConstantResult,
};
