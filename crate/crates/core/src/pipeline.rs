//! End-to-end grasp generation: cloud → BEGIs → spectra → correlation →
//! contacts → filters → ranking.

use std::time::Instant;

use nalgebra::Point3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::begi::{begi_signal, build_begi, Begi};
use crate::cloud::PointCloud;
use crate::contacts::{
    antipodal_filter, finger_begi, sample_contact_sets, width_filter, wrist_poses,
    CollisionChecker, GraspCandidate,
};
use crate::error::{Error, Result};
use crate::gripper::GripperModel;
use crate::locomo::{rank_grasps, LocomoParams};
use crate::normals::estimate_normals;
use crate::sht::ShtPlan;
use crate::so3::{correlate, extract_rotations_with, normalize, CorrelationGrid};

pub const MIN_BANDWIDTH: usize = 2;
pub const MAX_BANDWIDTH: usize = 64;

/// Normal estimation for clouds that arrive without normals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalEstimation {
    pub k: usize,
    /// Normals are flipped to face this point.
    pub viewpoint: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub bandwidth: usize,
    /// Rotations with normalized correlation strictly above this are sampled.
    pub t_corr: f64,
    /// Per-cell cap on contact candidates.
    pub k_max: usize,
    /// Friction coefficient.
    pub mu: f64,
    /// Approach rolls per contact set.
    pub n_approach: usize,
    /// Collision inflation, meters.
    pub clearance: f64,
    pub locomo: LocomoParams,
    pub top_k: usize,
    /// Keep only rotations that are local maxima of the correlation grid.
    pub local_max_only: bool,
    /// Used only when the cloud has no normals.
    pub normal_estimation: Option<NormalEstimation>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            bandwidth: 16,
            t_corr: 0.1,
            k_max: 8,
            mu: 0.5,
            n_approach: 8,
            clearance: 0.005,
            locomo: LocomoParams::default(),
            top_k: 10,
            local_max_only: false,
            normal_estimation: None,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(MIN_BANDWIDTH..=MAX_BANDWIDTH).contains(&self.bandwidth) {
            return bad(format!(
                "bandwidth {} outside [{MIN_BANDWIDTH}, {MAX_BANDWIDTH}]",
                self.bandwidth
            ));
        }
        if !(0.0..=1.0).contains(&self.t_corr) {
            return bad(format!("t_corr {} outside [0, 1]", self.t_corr));
        }
        if self.top_k < 1 {
            return bad("top_k must be at least 1".into());
        }
        if self.k_max < 1 {
            return bad("k_max must be at least 1".into());
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return bad(format!("mu must be positive, got {}", self.mu));
        }
        if self.n_approach < 1 {
            return bad("n_approach must be at least 1".into());
        }
        if !(self.clearance >= 0.0 && self.clearance.is_finite()) {
            return bad(format!("clearance must be non-negative, got {}", self.clearance));
        }
        if let Some(est) = &self.normal_estimation {
            if est.k < 3 {
                return bad("normal estimation needs k >= 3".into());
            }
        }
        self.locomo.validate()
    }
}

/// Survivors after each stage. Filter counts are numbers of contact sets;
/// `candidates` counts collision-free wrist poses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct StageCounts {
    pub sampled_rotations: usize,
    pub contact_sets: usize,
    pub antipodal: usize,
    pub width: usize,
    pub collision_free: usize,
    pub candidates: usize,
}

/// Wall time per stage in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct StageTimings {
    pub begi_ms: f64,
    pub spectra_ms: f64,
    pub correlation_ms: f64,
    pub extraction_ms: f64,
    pub sampling_ms: f64,
    pub filtering_ms: f64,
    pub ranking_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraspReport {
    /// Best first, at most `top_k`.
    pub candidates: Vec<GraspCandidate>,
    pub counts: StageCounts,
    pub timings: StageTimings,
    pub top_k: usize,
}

impl GraspReport {
    /// No candidate survived the filters. This is an outcome, not an error.
    pub fn is_infeasible(&self) -> bool {
        self.candidates.is_empty()
    }
}

/// True iff filter survivors never increase from stage to stage and the
/// ranked list respects both `top_k` and the number of survivors.
pub fn stage_counts_consistent(report: &GraspReport) -> bool {
    let c = &report.counts;
    c.antipodal <= c.contact_sets
        && c.width <= c.antipodal
        && c.collision_free <= c.width
        && c.collision_free <= c.candidates
        && report.candidates.len() <= report.top_k.min(c.candidates)
}

fn millis(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Spectra of both BEGIs, correlated and normalized to [-1, 1].
pub fn correlation_density(object: &Begi, finger: &Begi) -> Result<CorrelationGrid> {
    if object.bandwidth() != finger.bandwidth() {
        return Err(Error::BandwidthMismatch(object.bandwidth(), finger.bandwidth()));
    }
    let plan = ShtPlan::new(object.bandwidth());
    let f = plan.forward(&begi_signal(object))?;
    let g = plan.forward(&begi_signal(finger))?;
    normalize(&correlate(&f, &g)?, &f, &g)
}

/// Returns `cloud` if it has normals, else estimates them when configured.
pub fn ensure_normals(cloud: &PointCloud, cfg: &PipelineConfig) -> Result<PointCloud> {
    if cloud.has_normals() {
        return Ok(cloud.clone());
    }
    match cfg.normal_estimation {
        Some(est) => estimate_normals(cloud, est.k, Point3::from(est.viewpoint)),
        None => Err(Error::MissingNormals),
    }
}

pub fn generate(obj: &PointCloud, g: &GripperModel, cfg: &PipelineConfig) -> Result<GraspReport> {
    cfg.validate()?;
    if g.n_fingers() != 2 {
        return Err(Error::InvalidGripper(format!(
            "wrist synthesis supports two fingers, got {}",
            g.n_fingers()
        )));
    }
    let start = Instant::now();
    let mut timings = StageTimings::default();
    let mut counts = StageCounts::default();
    let cloud = ensure_normals(obj, cfg)?;

    let t = Instant::now();
    let obj_begi = build_begi(&cloud, cfg.bandwidth)?;
    let hand_begi = finger_begi(g, cfg.bandwidth)?;
    timings.begi_ms = millis(t);

    let t = Instant::now();
    let plan = ShtPlan::new(cfg.bandwidth);
    let f = plan.forward(&begi_signal(&obj_begi))?;
    let h = plan.forward(&begi_signal(&hand_begi))?;
    timings.spectra_ms = millis(t);

    let t = Instant::now();
    let density = normalize(&correlate(&f, &h)?, &f, &h)?;
    timings.correlation_ms = millis(t);

    let t = Instant::now();
    let rotations = extract_rotations_with(&density, cfg.t_corr, cfg.local_max_only);
    counts.sampled_rotations = rotations.len();
    timings.extraction_ms = millis(t);

    let t = Instant::now();
    let sets = sample_contact_sets(&obj_begi, &cloud, g, &rotations, cfg.k_max);
    counts.contact_sets = sets.len();
    timings.sampling_ms = millis(t);

    let t = Instant::now();
    let checker = CollisionChecker::new(cloud.points());
    let outcomes: Vec<(bool, bool, Vec<GraspCandidate>)> = sets
        .into_par_iter()
        .map(|cs| {
            let antipodal = antipodal_filter(&cs, cfg.mu).unwrap_or(false);
            if !antipodal {
                return (false, false, Vec::new());
            }
            if !width_filter(&cs, g) {
                return (true, false, Vec::new());
            }
            let width = cs.width();
            let free: Vec<GraspCandidate> = wrist_poses(&cs, g, cfg.n_approach)
                .into_iter()
                .filter(|pose| checker.is_free(pose, width, g, cfg.clearance))
                .map(|wrist_pose| GraspCandidate {
                    contacts: cs.clone(),
                    wrist_pose,
                    width,
                    score: 0.0,
                })
                .collect();
            (true, true, free)
        })
        .collect();
    let mut candidates = Vec::new();
    for (antipodal, width, free) in outcomes {
        counts.antipodal += antipodal as usize;
        counts.width += width as usize;
        counts.collision_free += !free.is_empty() as usize;
        candidates.extend(free);
    }
    counts.candidates = candidates.len();
    timings.filtering_ms = millis(t);

    let t = Instant::now();
    let mut ranked = rank_grasps(candidates, &cloud, g, &cfg.locomo);
    ranked.truncate(cfg.top_k);
    timings.ranking_ms = millis(t);
    timings.total_ms = millis(start);

    log::info!(
        "{} rotations, {} contact sets, {} antipodal, {} in stroke, {} collision-free, {} poses",
        counts.sampled_rotations,
        counts.contact_sets,
        counts.antipodal,
        counts.width,
        counts.collision_free,
        counts.candidates
    );
    Ok(GraspReport {
        candidates: ranked,
        counts,
        timings,
        top_k: cfg.top_k,
    })
}
