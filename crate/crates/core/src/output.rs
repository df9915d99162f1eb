//! JSON and CSV output helpers.

use serde::Serialize;

use crate::contacts::GraspCandidate;
use crate::pipeline::{GraspReport, StageCounts, StageTimings};

/// Version of the grasp report layout described by
/// `schema/grasp_report.schema.json`.
pub const SCHEMA_VERSION: &str = "1.0.0";

/// The shipped JSON schema for [`GraspJson`].
pub const GRASP_REPORT_SCHEMA: &str = include_str!("../schema/grasp_report.schema.json");

/// Rounds to 9 significant digits.
pub fn sig9(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{v:.8e}").parse().unwrap_or(v)
}

fn sig9_3(v: &[f64]) -> [f64; 3] {
    [sig9(v[0]), sig9(v[1]), sig9(v[2])]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContactJson {
    pub p: [f64; 3],
    pub n: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WristJson {
    /// Rows of the hand-to-world rotation.
    pub rotation: [[f64; 3]; 3],
    pub translation: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateJson {
    pub contacts: Vec<ContactJson>,
    pub wrist: WristJson,
    pub width: f64,
    pub correlation: f64,
    pub score: f64,
}

impl From<&GraspCandidate> for CandidateJson {
    fn from(c: &GraspCandidate) -> Self {
        let r = c.wrist_pose.rotation.to_rotation_matrix();
        let m = r.matrix();
        Self {
            contacts: c
                .contacts
                .points
                .iter()
                .zip(&c.contacts.normals)
                .map(|(p, n)| ContactJson {
                    p: sig9_3(p.coords.as_slice()),
                    n: sig9_3(n.as_slice()),
                })
                .collect(),
            wrist: WristJson {
                rotation: [0, 1, 2].map(|i| [sig9(m[(i, 0)]), sig9(m[(i, 1)]), sig9(m[(i, 2)])]),
                translation: sig9_3(c.wrist_pose.translation.vector.as_slice()),
            },
            width: sig9(c.width),
            correlation: sig9(c.contacts.correlation),
            score: sig9(c.score),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingsJson {
    pub begi_ms: f64,
    pub spectra_ms: f64,
    pub correlation_ms: f64,
    pub extraction_ms: f64,
    pub sampling_ms: f64,
    pub filtering_ms: f64,
    pub ranking_ms: f64,
    pub total_ms: f64,
}

impl From<&StageTimings> for TimingsJson {
    fn from(t: &StageTimings) -> Self {
        Self {
            begi_ms: sig9(t.begi_ms),
            spectra_ms: sig9(t.spectra_ms),
            correlation_ms: sig9(t.correlation_ms),
            extraction_ms: sig9(t.extraction_ms),
            sampling_ms: sig9(t.sampling_ms),
            filtering_ms: sig9(t.filtering_ms),
            ranking_ms: sig9(t.ranking_ms),
            total_ms: sig9(t.total_ms),
        }
    }
}

/// Serialized grasp report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraspJson {
    pub schema_version: String,
    pub feasible: bool,
    pub candidates: Vec<CandidateJson>,
    pub counts: StageCounts,
    pub timings: TimingsJson,
}

impl From<&GraspReport> for GraspJson {
    fn from(r: &GraspReport) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            feasible: !r.is_infeasible(),
            candidates: r.candidates.iter().map(CandidateJson::from).collect(),
            counts: r.counts,
            timings: TimingsJson::from(&r.timings),
        }
    }
}

impl GraspJson {
    pub fn to_pretty_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable")
    }
}
