//! JSON envelopes and the nats-to-bits presentation conversion.

use cq_covert::converse::{ChainReport, CHAIN_TOL};
use cq_covert::operator::{
    DEFAULT_GROUP_TOL, HERMITICITY_TOL, PSD_TOL, SUPPORT_INCLUSION_TOL, SUPPORT_TOL, TRACE_TOL,
};
use cq_covert::rate::{GAP_TOL, MAX_ITERATIONS};
use cq_covert::scaling::IDENTITY_TOL;
use cq_covert::{format::SCHEMA_VERSION, DimCap, FeasibilityTolerances, Sanitized};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InfoUnit {
    Nats,
    Bits,
}

impl InfoUnit {
    pub fn convert(self, nats: f64) -> f64 {
        match self {
            InfoUnit::Nats => nats,
            InfoUnit::Bits => nats / std::f64::consts::LN_2,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Units {
    pub information: InfoUnit,
    /// Result fields expressed in `information` units; every other field is unitless.
    pub fields: Vec<&'static str>,
}

#[derive(Debug, Serialize)]
pub struct Tolerances {
    pub support: f64,
    pub hermiticity: f64,
    pub psd: f64,
    pub trace: f64,
    pub eigen_group: f64,
    pub support_inclusion: f64,
    pub feasibility: FeasibilityTolerances,
    pub dim_cap: usize,
    pub rate_gap: f64,
    pub rate_max_iterations: usize,
    pub gram_identity: f64,
    pub converse_chain: f64,
}

impl Tolerances {
    pub fn new(feasibility: FeasibilityTolerances, cap: DimCap) -> Self {
        Self {
            support: SUPPORT_TOL,
            hermiticity: HERMITICITY_TOL,
            psd: PSD_TOL,
            trace: TRACE_TOL,
            eigen_group: DEFAULT_GROUP_TOL,
            support_inclusion: SUPPORT_INCLUSION_TOL,
            feasibility,
            dim_cap: cap.0,
            rate_gap: GAP_TOL,
            rate_max_iterations: MAX_ITERATIONS,
            gram_identity: IDENTITY_TOL,
            converse_chain: CHAIN_TOL,
        }
    }
}

/// Symbol indices inside `result` refer to the sanitized channel; `retained[i]`
/// is the original label of sanitized symbol `i`.
#[derive(Debug, Serialize)]
pub struct Sanitization {
    pub removed: Vec<usize>,
    pub retained: Vec<usize>,
    pub original_dz: usize,
    pub sanitized_dz: usize,
}

impl From<&Sanitized> for Sanitization {
    fn from(s: &Sanitized) -> Self {
        Self {
            removed: s.removed.clone(),
            retained: s.retained.clone(),
            original_dz: s.original_dz,
            sanitized_dz: s.channel.dz(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Envelope<T: Serialize> {
    pub schema_version: &'static str,
    pub command: &'static str,
    pub units: Units,
    pub tolerances: Tolerances,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sanitization: Option<Sanitization>,
    pub result: T,
}

#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub exit_code: i32,
    pub kind: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<cq_covert::Diagnostics>,
}

#[derive(Debug, Serialize)]
pub struct ErrorEnvelope {
    pub schema_version: &'static str,
    pub command: &'static str,
    pub error: ErrorBody,
}

impl ErrorEnvelope {
    pub fn new(command: &'static str, error: ErrorBody) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command,
            error,
        }
    }
}

pub fn chain_to(unit: InfoUnit, c: &mut ChainReport) {
    for v in [
        &mut c.holevo_n_letter,
        &mut c.holevo_sum_marginals,
        &mut c.holevo_average,
        &mut c.divergence_n_letter,
        &mut c.divergence_sum_marginals,
        &mut c.divergence_average,
    ] {
        *v = unit.convert(*v);
    }
    for l in &mut c.links {
        l.lhs = unit.convert(l.lhs);
        l.rhs = unit.convert(l.rhs);
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports always serialize")
}
