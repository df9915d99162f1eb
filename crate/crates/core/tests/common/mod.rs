#![allow(dead_code)]

use nalgebra::{Point3, Vector3};
use spectral_grasp::cloud::PointCloud;
use spectral_grasp::contacts::GraspCandidate;
use spectral_grasp::gripper::GripperModel;
use spectral_grasp::pipeline::{GraspReport, PipelineConfig};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spectral_grasp::sht::{eval_ylm, HarmonicCoeffs};
use spectral_grasp::sphere::{cart_to_sph, SphereGrid};
use spectral_grasp::sht::QuadratureWeights;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random coefficients of a real band-limited signal.
pub fn random_real_coeffs(bandwidth: usize, rng: &mut impl Rng) -> HarmonicCoeffs {
    let mut c = HarmonicCoeffs::zeros(bandwidth);
    for l in 0..bandwidth {
        c.set(l, 0, Complex64::new(rng.gen_range(-1.0..1.0), 0.0));
        for m in 1..=l as i64 {
            let v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            c.set(l, m, v);
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            c.set(l, -m, v.conj() * sign);
        }
    }
    c
}

/// Direct synthesis `Σ f̂_l^m Y_l^m(v)` at an arbitrary direction.
pub fn synthesize_at(c: &HarmonicCoeffs, v: &Vector3<f64>) -> Complex64 {
    let d = cart_to_sph(&v.normalize());
    c.iter()
        .map(|(l, m, coef)| coef * eval_ylm(l, m, d).unwrap())
        .sum()
}

/// Quadrature inner product `∫ f conj(g)` of real grids.
pub fn grid_inner(w: &QuadratureWeights, f: &SphereGrid, g: &SphereGrid) -> f64 {
    let n = 2 * w.bandwidth();
    let mut acc = 0.0;
    for j in 0..n {
        let cw = w.cell_weight(j);
        for k in 0..n {
            acc += cw * f.get(j, k) * g.get(j, k);
        }
    }
    acc
}

pub fn jaw() -> spectral_grasp::gripper::GripperModel {
    spectral_grasp::gripper::GripperModel::parallel_jaw(Default::default()).unwrap()
}

/// Angle between two vectors via the clamped dot product.
pub fn angle(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    (a.dot(b) / (a.norm() * b.norm())).clamp(-1.0, 1.0).acos()
}

/// Friction-cone test in cosine form: the closing line must lie inside
/// both cones of half-angle atan(μ) around the inward normals.
pub fn antipodal_oracle(c: &GraspCandidate, mu: f64) -> bool {
    let [p1, p2] = [c.contacts.points[0], c.contacts.points[1]];
    let [n1, n2] = [c.contacts.normals[0].normalize(), c.contacts.normals[1].normalize()];
    let u = (p2 - p1).normalize();
    let cos_cone = 1.0 / (1.0 + mu * mu).sqrt();
    u.dot(&-n1) >= cos_cone - 1e-12 && (-u).dot(&-n2) >= cos_cone - 1e-12
}

/// Point-by-point hand-frame test against the palm and finger boxes. Finger
/// hits count only outside the slab between the two pad centers.
pub fn collision_free_oracle(c: &GraspCandidate, g: &GripperModel, scene: &[Point3<f64>], clearance: f64) -> bool {
    let inside = |lo: [f64; 3], hi: [f64; 3], q: &Point3<f64>| {
        (0..3).all(|d| q[d] >= lo[d] - clearance && q[d] <= hi[d] + clearance)
    };
    let centers = g.pad_centers(c.width);
    let axis = c.wrist_pose.inverse_transform_vector(&(c.contacts.points[1] - c.contacts.points[0])).normalize();
    let along = |q: &Point3<f64>| q.coords.dot(&axis);
    let (s0, s1) = (along(&centers[0]), along(&centers[1]));
    let fingers: Vec<([f64; 3], [f64; 3])> = g
        .finger_boxes()
        .iter()
        .zip(&centers)
        .map(|(b, p)| ([0, 1, 2].map(|d| b.min[d] + p[d]), [0, 1, 2].map(|d| b.max[d] + p[d])))
        .collect();
    let in_gap = |q: &Point3<f64>| {
        let s = along(q);
        let lateral_ok = (0..3).filter(|&d| axis[d].abs() < 0.5).all(|d| {
            let lo = fingers.iter().map(|f| f.0[d]).fold(f64::INFINITY, f64::min);
            let hi = fingers.iter().map(|f| f.1[d]).fold(f64::NEG_INFINITY, f64::max);
            q[d] >= lo - clearance && q[d] <= hi + clearance
        });
        s >= s0.min(s1) - clearance && s <= s0.max(s1) + clearance && lateral_ok
    };
    scene.iter().all(|p| {
        let q = c.wrist_pose.inverse_transform_point(p);
        let palm = g.palm_box();
        !inside(palm.min, palm.max, &q)
            && (in_gap(&q) || !fingers.iter().any(|f| inside(f.0, f.1, &q)))
    })
}

/// Re-checks every candidate with the independent oracles above.
pub fn recheck(report: &GraspReport, g: &GripperModel, scene: &PointCloud, cfg: &PipelineConfig) {
    let [w_min, w_max] = g.stroke();
    for c in &report.candidates {
        assert!(antipodal_oracle(c, cfg.mu));
        let w = (c.contacts.points[1] - c.contacts.points[0]).norm();
        assert!((w - c.width).abs() < 1e-12);
        assert!(w >= w_min && w <= w_max);
        assert!(collision_free_oracle(c, g, scene.points(), cfg.clearance));
        // the fingers reach the contacts
        let [a, b] = g.pad_centers(c.width);
        assert!((c.wrist_pose * a - c.contacts.points[0]).norm() < 1e-9);
        assert!((c.wrist_pose * b - c.contacts.points[1]).norm() < 1e-9);
    }
}
