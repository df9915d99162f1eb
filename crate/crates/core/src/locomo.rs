//! Local contact moment (LoCoMo) ranking.
//!
//! Around each contact, patches of increasing radius are cut from the
//! object cloud. A patch's zero-moment shift is the offset of its centroid
//! from the contact, in a frame whose z axis is the contact normal. Each
//! finger's similarity compares the object shifts with the pad's own shifts
//! through a peak-normalized isotropic Gaussian; a grasp's score is the
//! weighted product over fingers.

use std::collections::HashMap;

use nalgebra::{Matrix3, Point3, Rotation3, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::contacts::GraspCandidate;
use crate::error::{Error, Result};
use crate::gripper::GripperModel;
use crate::spatial::SpatialIndex;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LocomoParams {
    /// Number of nested patches per contact.
    pub kappa: usize,
    /// Patch radii in meters, strictly increasing, one per patch.
    pub radii: Vec<f64>,
    /// Standard deviation of the isotropic Gaussian, meters.
    pub sigma: f64,
    /// Per-finger exponents.
    pub omega: Vec<f64>,
    /// Global weight.
    pub rho: f64,
    pub min_patch_points: usize,
}

impl Default for LocomoParams {
    fn default() -> Self {
        Self {
            kappa: 3,
            radii: vec![0.005, 0.01, 0.015],
            sigma: 0.01,
            omega: vec![1.0, 1.0],
            rho: 1.0,
            min_patch_points: 5,
        }
    }
}

impl LocomoParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(format!("locomo: {msg}")));
        if self.kappa < 1 {
            return bad("kappa must be at least 1");
        }
        if self.radii.len() != self.kappa {
            return bad("need exactly kappa radii");
        }
        if !(self.radii[0] > 0.0 && self.radii.windows(2).all(|w| w[0] < w[1]))
            || !self.radii.iter().all(|r| r.is_finite())
        {
            return bad("radii must be positive and strictly increasing");
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad("sigma must be positive");
        }
        if self.omega.is_empty() || !self.omega.iter().all(|w| *w > 0.0 && w.is_finite()) {
            return bad("omega entries must be positive");
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return bad("rho must be positive");
        }
        Ok(())
    }

    /// Exponent for finger `i`; a short list repeats its last entry.
    fn omega_for(&self, i: usize) -> f64 {
        self.omega.get(i).or(self.omega.last()).copied().unwrap_or(1.0)
    }
}

/// Object points around a contact with a local frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pub center: Point3<f64>,
    /// Cloud indices within the radius, ascending.
    pub members: Vec<usize>,
    /// Columns are the local x, y, z axes; z is the contact normal.
    pub frame: Rotation3<f64>,
    pub centroid: Point3<f64>,
}

/// Patch-frame offset of a patch centroid from its center, meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ShiftVector(pub Vector3<f64>);

/// Frame with z = `normal`; x is the coordinate axis with the smallest
/// normal component (lowest index on ties) projected onto the tangent
/// plane, and y = z × x.
pub fn tangent_frame(normal: &Vector3<f64>) -> Rotation3<f64> {
    let z = normal.normalize();
    let axis = (0..3)
        .min_by(|&a, &b| z[a].abs().total_cmp(&z[b].abs()))
        .unwrap();
    let e = Vector3::ith(axis, 1.0);
    let x = (e - z * z.dot(&e)).normalize();
    let y = z.cross(&x);
    Rotation3::from_matrix_unchecked(Matrix3::from_columns(&[x, y, z]))
}

fn make_patch(
    cloud: &PointCloud,
    center: Point3<f64>,
    normal: &Vector3<f64>,
    members: Vec<usize>,
    min_points: usize,
) -> Result<Patch> {
    if members.len() < min_points || members.is_empty() {
        return Err(Error::InsufficientPatch {
            found: members.len(),
            required: min_points,
        });
    }
    let sum = members
        .iter()
        .fold(Vector3::zeros(), |acc, &i| acc + (cloud.points()[i] - center));
    Ok(Patch {
        center,
        centroid: center + sum / members.len() as f64,
        members,
        frame: tangent_frame(normal),
    })
}

/// All cloud points within `radius` of `center`, by linear scan.
pub fn extract_patch(
    cloud: &PointCloud,
    center: Point3<f64>,
    normal: &Vector3<f64>,
    radius: f64,
    min_points: usize,
) -> Result<Patch> {
    assert!(radius > 0.0, "patch radius must be positive");
    let r2 = radius * radius;
    let members = (0..cloud.len())
        .filter(|&i| (cloud.points()[i] - center).norm_squared() <= r2)
        .collect();
    make_patch(cloud, center, normal, members, min_points)
}

pub fn zero_moment_shift(p: &Patch) -> ShiftVector {
    ShiftVector(p.frame.inverse() * (p.centroid - p.center))
}

/// Peak-normalized Gaussian similarity averaged over the patch radii.
fn moment_from_shifts(obj: &[ShiftVector], pad: &[ShiftVector], sigma: f64) -> f64 {
    let two_s2 = 2.0 * sigma * sigma;
    let total: f64 = obj
        .iter()
        .enumerate()
        .map(|(j, s)| {
            let pad_shift = pad.get(j).copied().unwrap_or_default();
            (-(s.0 - pad_shift.0).norm_squared() / two_s2).exp()
        })
        .sum();
    total / obj.len() as f64
}

/// Contact moment `M ∈ [0, 1]` of one contact; 0 if any patch is too small.
pub fn contact_moment(
    cloud: &PointCloud,
    contact: (Point3<f64>, Vector3<f64>),
    pad_shifts: &[ShiftVector],
    params: &LocomoParams,
) -> f64 {
    let shifts: Result<Vec<ShiftVector>> = params
        .radii
        .iter()
        .map(|&r| {
            extract_patch(cloud, contact.0, &contact.1, r, params.min_patch_points)
                .map(|p| zero_moment_shift(&p))
        })
        .collect();
    match shifts {
        Ok(s) => moment_from_shifts(&s, pad_shifts, params.sigma),
        Err(_) => 0.0,
    }
}

/// Patch extraction through a spatial index over a fixed cloud.
pub struct PatchSampler<'a> {
    cloud: &'a PointCloud,
    index: SpatialIndex,
}

impl<'a> PatchSampler<'a> {
    pub fn new(cloud: &'a PointCloud) -> Self {
        Self {
            cloud,
            index: SpatialIndex::new(cloud.points()),
        }
    }

    pub fn extract(
        &self,
        center: Point3<f64>,
        normal: &Vector3<f64>,
        radius: f64,
        min_points: usize,
    ) -> Result<Patch> {
        assert!(radius > 0.0, "patch radius must be positive");
        let members = self.index.within(&center, radius);
        make_patch(self.cloud, center, normal, members, min_points)
    }

    /// Same value as [`contact_moment`].
    pub fn contact_moment(
        &self,
        contact: (Point3<f64>, Vector3<f64>),
        pad_shifts: &[ShiftVector],
        params: &LocomoParams,
    ) -> f64 {
        let shifts: Result<Vec<ShiftVector>> = params
            .radii
            .iter()
            .map(|&r| {
                self.extract(contact.0, &contact.1, r, params.min_patch_points)
                    .map(|p| zero_moment_shift(&p))
            })
            .collect();
        match shifts {
            Ok(s) => moment_from_shifts(&s, pad_shifts, params.sigma),
            Err(_) => 0.0,
        }
    }
}

/// Per-finger pad shifts at each radius, in a frame whose z axis is the
/// reverse of the pad normal (the object normal at a mating contact).
///
/// Flat pads have zero shift at every radius by symmetry of the plane, so
/// they are not sampled. Curved pads are sampled around the pad point
/// nearest the pad centroid; radii with too few pad points get zero shift.
pub fn pad_shifts(g: &GripperModel, params: &LocomoParams) -> Vec<Vec<ShiftVector>> {
    g.pads()
        .iter()
        .zip(g.pad_normals())
        .map(|(pad, n)| {
            if is_flat(pad, &n) {
                return vec![ShiftVector::default(); params.kappa];
            }
            let centroid = pad.centroid();
            let center = *pad
                .points()
                .iter()
                .min_by(|a, b| (*a - centroid).norm().total_cmp(&(*b - centroid).norm()))
                .unwrap();
            params
                .radii
                .iter()
                .map(|&r| {
                    extract_patch(pad, center, &-n, r, params.min_patch_points)
                        .map(|p| zero_moment_shift(&p))
                        .unwrap_or_default()
                })
                .collect()
        })
        .collect()
}

fn is_flat(pad: &PointCloud, mean: &Vector3<f64>) -> bool {
    let origin = pad.points()[0];
    let normals_agree = (0..pad.len()).all(|i| pad.normal(i).is_none_or(|n| (n - mean).norm() < 1e-9));
    let coplanar = pad.points().iter().all(|p| (p - origin).dot(mean).abs() < 1e-9);
    normals_agree && coplanar
}

/// `Q = ρ·Π M_i^{ω_i}` for one candidate.
pub fn grasp_quality(moments: &[f64], params: &LocomoParams) -> f64 {
    params.rho
        * moments
            .iter()
            .enumerate()
            .map(|(i, m)| m.powf(params.omega_for(i)))
            .product::<f64>()
}

/// Scores every candidate and sorts descending by score, then by
/// correlation, then by input order.
pub fn rank_grasps(
    candidates: Vec<GraspCandidate>,
    cloud: &PointCloud,
    g: &GripperModel,
    params: &LocomoParams,
) -> Vec<GraspCandidate> {
    let sampler = PatchSampler::new(cloud);
    let pads = pad_shifts(g, params);
    // candidates sharing a contact set (different approach rolls) share a score
    let mut keys: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut unique = Vec::new();
    let slot: Vec<usize> = candidates
        .iter()
        .map(|c| {
            let key: Vec<u64> = c
                .contacts
                .points
                .iter()
                .map(|p| p.coords)
                .chain(c.contacts.normals.iter().copied())
                .flat_map(|v| [v.x.to_bits(), v.y.to_bits(), v.z.to_bits()])
                .collect();
            *keys.entry(key).or_insert_with(|| {
                unique.push(c);
                unique.len() - 1
            })
        })
        .collect();
    let scores: Vec<f64> = unique
        .par_iter()
        .map(|c| {
            let moments: Vec<f64> = c
                .contacts
                .points
                .iter()
                .zip(&c.contacts.normals)
                .enumerate()
                .map(|(i, (&p, &n))| {
                    let empty = Vec::new();
                    sampler.contact_moment((p, n), pads.get(i).unwrap_or(&empty), params)
                })
                .collect();
            grasp_quality(&moments, params)
        })
        .collect();
    let mut out: Vec<GraspCandidate> = candidates
        .into_iter()
        .zip(slot)
        .map(|(mut c, s)| {
            c.score = scores[s];
            c
        })
        .collect();
    out.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then(b.contacts.correlation.total_cmp(&a.contacts.correlation))
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tangent_frame_is_proper() {
        for n in [Vector3::z(), Vector3::new(1.0, 2.0, -0.5), -Vector3::x()] {
            let f = tangent_frame(&n);
            let m = f.matrix();
            assert!((m.determinant() - 1.0).abs() < 1e-12);
            assert!((m.column(2) - n.normalize()).norm() < 1e-12);
        }
    }

    #[test]
    fn params_validation() {
        assert!(LocomoParams::default().validate().is_ok());
        let p = LocomoParams {
            radii: vec![0.01, 0.005, 0.02],
            ..Default::default()
        };
        assert!(p.validate().is_err());
        let p = LocomoParams {
            sigma: 0.0,
            ..Default::default()
        };
        assert!(p.validate().is_err());
    }
}
