//! Contact sampling at high-correlation rotations and the feasibility
//! filters that turn contact sets into grasp candidates.
//!
//! Contacts are ordered like the fingers: contact `i` is touched by finger
//! `i`. For a parallel jaw the closing direction runs from contact 0 to
//! contact 1, so finger 0's pad (inward normal along the hand closing axis)
//! always faces the object.

use std::collections::{HashMap, HashSet};

use nalgebra::{Isometry3, Matrix3, Point3, Rotation3, Translation3, UnitQuaternion, Vector3};

use crate::begi::{build_begi, Begi};
use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::gripper::{Aabb, GripperModel};
use crate::so3::{RotationZYZ, SampledRotation};
use crate::spatial::SpatialIndex;
use crate::sphere::{cart_to_sph, grid_index};

/// Minimum contact separation below which the grasp line is undefined.
pub const COINCIDENT_DISTANCE: f64 = 1e-6;

/// One contact per finger on the object surface.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactSet {
    pub points: Vec<Point3<f64>>,
    /// Object surface normals at the contacts (outward, unit).
    pub normals: Vec<Vector3<f64>>,
    /// Cloud indices of the contacts; empty for hand-built sets.
    pub indices: Vec<usize>,
    pub rotation: RotationZYZ,
    pub correlation: f64,
}

impl ContactSet {
    /// A set not tied to any cloud or rotation.
    pub fn from_contacts(points: Vec<Point3<f64>>, normals: Vec<Vector3<f64>>) -> Self {
        assert_eq!(points.len(), normals.len());
        Self {
            points,
            normals: normals.into_iter().map(|n| n.normalize()).collect(),
            indices: Vec::new(),
            rotation: RotationZYZ::IDENTITY,
            correlation: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Distance between the two contacts of a parallel-jaw set.
    pub fn width(&self) -> f64 {
        (self.points[1] - self.points[0]).norm()
    }

    /// The same contacts after moving the object by `iso`.
    pub fn transformed(&self, iso: &Isometry3<f64>) -> Self {
        Self {
            points: self.points.iter().map(|p| iso * p).collect(),
            normals: self.normals.iter().map(|n| iso.rotation * n).collect(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraspCandidate {
    pub contacts: ContactSet,
    /// Hand frame to world frame.
    pub wrist_pose: Isometry3<f64>,
    pub width: f64,
    pub score: f64,
}

/// BEGI of the union of all pad normals, in the hand frame.
pub fn finger_begi(g: &GripperModel, bandwidth: usize) -> Result<Begi> {
    let mut pads = g.pads().iter();
    let first = pads.next().expect("gripper has pads").clone();
    let union = pads.fold(first, |acc, p| acc.merged(p));
    build_begi(&union, bandwidth)
}

/// Contact sets for every sampled rotation whose rotated finger normals all
/// land in occupied object cells.
///
/// Each cell contributes at most `k_max` points chosen by farthest-point
/// subsampling; sets are the cross product of the per-finger cells, finger
/// 0 varying slowest. A rotation that maps the fingers onto the same cells
/// as an earlier rotation adds nothing, since it would repeat the same
/// contact sets. Sets that reuse a single point for two fingers are skipped.
pub fn sample_contact_sets(
    obj: &Begi,
    cloud: &PointCloud,
    g: &GripperModel,
    rotations: &[SampledRotation],
    k_max: usize,
) -> Vec<ContactSet> {
    let bandwidth = obj.bandwidth();
    let normals = match cloud.normals() {
        Some(n) => n,
        None => return Vec::new(),
    };
    let finger_normals = g.pad_normals();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut subsets: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut out = Vec::new();
    for sample in rotations {
        let rot = sample.rotation.matrix();
        let cells: Vec<_> = finger_normals
            .iter()
            .map(|n| grid_index(cart_to_sph(&(rot * n)), bandwidth))
            .collect();
        if !cells.iter().all(|&c| obj.is_occupied(c)) {
            continue;
        }
        let key: Vec<usize> = cells.iter().map(|c| c.flat(bandwidth)).collect();
        if !seen.insert(key.clone()) {
            continue;
        }
        for (&flat, &cell) in key.iter().zip(&cells) {
            subsets
                .entry(flat)
                .or_insert_with(|| farthest_point_subset(cloud.points(), obj.points_in(cell), k_max));
        }
        let per_finger: Vec<&Vec<usize>> = key.iter().map(|f| &subsets[f]).collect();
        if per_finger.iter().any(|s| s.is_empty()) {
            continue;
        }
        // cross product, finger 0 slowest
        let mut counters = vec![0usize; per_finger.len()];
        'product: loop {
            let indices: Vec<usize> = counters.iter().zip(&per_finger).map(|(&c, s)| s[c]).collect();
            let distinct = indices.iter().collect::<HashSet<_>>().len() == indices.len();
            if distinct {
                out.push(ContactSet {
                    points: indices.iter().map(|&i| cloud.points()[i]).collect(),
                    normals: indices.iter().map(|&i| normals[i]).collect(),
                    indices,
                    rotation: sample.rotation,
                    correlation: sample.value,
                });
            }
            for f in (0..counters.len()).rev() {
                counters[f] += 1;
                if counters[f] < per_finger[f].len() {
                    continue 'product;
                }
                counters[f] = 0;
            }
            break;
        }
    }
    out
}

/// Up to `k` of `members`, spread out: start at the member nearest their
/// centroid, then repeatedly add the member farthest from those chosen.
/// Ties go to the lower index; the result is sorted ascending.
pub fn farthest_point_subset(points: &[Point3<f64>], members: &[usize], k: usize) -> Vec<usize> {
    if members.len() <= k {
        return members.to_vec();
    }
    if k == 0 {
        return Vec::new();
    }
    let centroid = members
        .iter()
        .fold(Vector3::zeros(), |acc, &i| acc + points[i].coords)
        / members.len() as f64;
    let argmin = |d: &dyn Fn(usize) -> f64| {
        let mut best = 0;
        for m in 1..members.len() {
            if d(m) < d(best) {
                best = m;
            }
        }
        best
    };
    let first = argmin(&|m| (points[members[m]].coords - centroid).norm_squared());
    let mut chosen = vec![first];
    let mut dist: Vec<f64> = members
        .iter()
        .map(|&i| (points[i] - points[members[first]]).norm_squared())
        .collect();
    while chosen.len() < k {
        let next = argmin(&|m| -dist[m]);
        chosen.push(next);
        for (m, d) in dist.iter_mut().enumerate() {
            *d = d.min((points[members[m]] - points[members[next]]).norm_squared());
        }
    }
    let mut out: Vec<usize> = chosen.into_iter().map(|m| members[m]).collect();
    out.sort_unstable();
    out
}

/// Force closure for two contacts: the grasp line lies inside both
/// friction cones of half-angle `atan(mu)`.
pub fn antipodal_filter(cs: &ContactSet, mu: f64) -> Result<bool> {
    assert_eq!(cs.len(), 2, "antipodal filter needs two contacts");
    let d = cs.points[1] - cs.points[0];
    let dist = d.norm();
    if dist <= COINCIDENT_DISTANCE {
        return Err(Error::CoincidentContacts);
    }
    let u = d / dist;
    let half_angle = mu.atan();
    let in_cone = |a: Vector3<f64>, b: Vector3<f64>| angle_between(&a, &b) <= half_angle;
    Ok(in_cone(u, -cs.normals[0]) && in_cone(-u, -cs.normals[1]))
}

fn angle_between(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    // atan2 form stays accurate near 0 and π
    a.cross(b).norm().atan2(a.dot(b))
}

/// Opening width within the stroke, both ends inclusive.
pub fn width_filter(cs: &ContactSet, g: &GripperModel) -> bool {
    let w = cs.width();
    let [lo, hi] = g.stroke();
    lo <= w && w <= hi
}

/// Threshold on the in-plane part of the summed contact normals below which
/// it gives no usable approach direction.
const APPROACH_TILT_MIN: f64 = 0.05;

/// `n_approach` wrist poses placing the pad centers on the contacts.
///
/// The closing axis runs from contact 0 to contact 1. Approach directions
/// are rolls about it, evenly spaced and starting opposite the in-plane
/// component of the summed contact normals; when the normals are (nearly)
/// opposed, the first roll approaches along world −z, or −y if the closing
/// axis is vertical.
pub fn wrist_poses(cs: &ContactSet, g: &GripperModel, n_approach: usize) -> Vec<Isometry3<f64>> {
    let (p1, p2) = (cs.points[0], cs.points[1]);
    let x = match (p2 - p1).try_normalize(COINCIDENT_DISTANCE) {
        Some(x) => x,
        None => return Vec::new(),
    };
    let mid = Point3::from((p1.coords + p2.coords) / 2.0);
    let perp = |v: Vector3<f64>| v - x * x.dot(&v);
    let m = perp(cs.normals[0] + cs.normals[1]);
    let z0 = if m.norm() > APPROACH_TILT_MIN {
        -m.normalize()
    } else {
        perp(-Vector3::z())
            .try_normalize(1e-6)
            .unwrap_or_else(|| perp(-Vector3::y()).normalize())
    };
    let (c_h, a_h) = (g.closing_axis(), g.approach_axis());
    let hand = Matrix3::from_columns(&[c_h, a_h.cross(&c_h), a_h]);
    (0..n_approach)
        .map(|k| {
            let roll = 2.0 * std::f64::consts::PI * k as f64 / n_approach as f64;
            let z = Rotation3::from_axis_angle(&nalgebra::Unit::new_unchecked(x), roll) * z0;
            let world = Matrix3::from_columns(&[x, z.cross(&x), z]);
            let rot = Rotation3::from_matrix_unchecked(world * hand.transpose());
            let t = mid - rot * (a_h * g.palm_standoff());
            Isometry3::from_parts(
                Translation3::from(t.coords),
                UnitQuaternion::from_rotation_matrix(&rot),
            )
        })
        .collect()
}

/// True iff no scene point lies in the palm box or a finger box (inflated by
/// `clearance`), ignoring finger-box hits inside the closing volume between
/// the pads. `width` is the opening at which the gripper is placed.
pub fn collision_filter(
    pose: &Isometry3<f64>,
    width: f64,
    g: &GripperModel,
    scene: &[Point3<f64>],
    clearance: f64,
) -> bool {
    let boxes = HandBoxes::new(g, width, clearance);
    let inv = pose.inverse();
    !scene.iter().any(|p| boxes.collides(&(inv * p)))
}

/// Hand-frame collision geometry at one opening width.
struct HandBoxes {
    palm: Aabb,
    fingers: Vec<Aabb>,
    closing_volume: Aabb,
    clearance: f64,
}

impl HandBoxes {
    fn new(g: &GripperModel, width: f64, clearance: f64) -> Self {
        let centers = g.pad_centers(width);
        let fingers: Vec<Aabb> = g
            .finger_boxes()
            .iter()
            .zip(&centers)
            .map(|(b, c)| b.translated(&c.coords))
            .collect();
        let cx = g.closing_index();
        let mut min = [0.0; 3];
        let mut max = [0.0; 3];
        for d in 0..3 {
            let (lo, hi) = if d == cx {
                (centers[0][d].min(centers[1][d]), centers[0][d].max(centers[1][d]))
            } else {
                fingers.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), b| {
                    (lo.min(b.min[d]), hi.max(b.max[d]))
                })
            };
            min[d] = lo - clearance;
            max[d] = hi + clearance;
        }
        Self {
            palm: *g.palm_box(),
            fingers,
            closing_volume: Aabb::new(min, max),
            clearance,
        }
    }

    fn collides(&self, q: &Point3<f64>) -> bool {
        if self.palm.contains(q, self.clearance) {
            return true;
        }
        !self.closing_volume.contains(q, 0.0)
            && self.fingers.iter().any(|b| b.contains(q, self.clearance))
    }

    /// Center and radius of a sphere enclosing every inflated box.
    fn bounding_sphere(&self) -> (Point3<f64>, f64) {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for b in std::iter::once(&self.palm).chain(&self.fingers) {
            for d in 0..3 {
                lo[d] = lo[d].min(b.min[d] - self.clearance);
                hi[d] = hi[d].max(b.max[d] + self.clearance);
            }
        }
        let bounds = Aabb::new(lo, hi);
        let c = bounds.center();
        (c, (Point3::from(hi) - c).norm())
    }
}

/// [`collision_filter`] against a fixed scene, using a spatial index to
/// test only points near the gripper.
pub struct CollisionChecker<'a> {
    scene: &'a [Point3<f64>],
    index: SpatialIndex,
}

impl<'a> CollisionChecker<'a> {
    pub fn new(scene: &'a [Point3<f64>]) -> Self {
        Self {
            scene,
            index: SpatialIndex::new(scene),
        }
    }

    pub fn is_free(&self, pose: &Isometry3<f64>, width: f64, g: &GripperModel, clearance: f64) -> bool {
        let boxes = HandBoxes::new(g, width, clearance);
        let (center, radius) = boxes.bounding_sphere();
        let inv = pose.inverse();
        // small slack so rounding never drops a boundary point
        !self
            .index
            .within(&(pose * center), radius * (1.0 + 1e-9) + 1e-12)
            .into_iter()
            .any(|i| boxes.collides(&(inv * self.scene[i])))
    }
}
