//! Shared fixtures for the pipeline benchmarks.

use hsf_core::scenario::ScenarioConfig;
use hsf_core::{CaseId, TraceMeta};

/// Resolved default scenario for `case`.
pub fn default_meta(case: CaseId) -> TraceMeta {
    ScenarioConfig::for_case(case)
        .build()
        .expect("built-in defaults are valid")
}
