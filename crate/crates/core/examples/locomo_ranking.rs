//! Contact moments on a flat face, a rounded edge and a sharp edge.

use nalgebra::{Point3, Vector3};
use spectral_grasp::cloud::PointCloud;
use spectral_grasp::gripper::GripperModel;
use spectral_grasp::locomo::{pad_shifts, LocomoParams, PatchSampler};

/// Surface `z = f(x)` extruded along y, with exact normals.
fn profile(f: impl Fn(f64) -> (f64, f64)) -> PointCloud {
    let h = 0.0005;
    let mut pts = Vec::new();
    let mut normals = Vec::new();
    for i in -60..=60 {
        for j in -60..=60 {
            let x = i as f64 * h;
            let (z, slope) = f(x);
            pts.push(Point3::new(x, j as f64 * h, z));
            normals.push(Vector3::new(-slope, 0.0, 1.0).normalize());
        }
    }
    PointCloud::new(pts, Some(normals)).expect("finite samples")
}

fn main() -> spectral_grasp::Result<()> {
    let params = LocomoParams::default();
    let gripper = GripperModel::parallel_jaw(Default::default())?;
    let pad = &pad_shifts(&gripper, &params)[0];
    let surfaces = [
        ("flat face", profile(|_| (0.0, 0.0))),
        ("rounded edge, R = 2 cm", profile(|x| (-x * x / 0.04, -x / 0.02))),
        ("sharp 90° edge", profile(|x| (-x.abs(), -x.signum()))),
    ];
    for (name, cloud) in &surfaces {
        let sampler = PatchSampler::new(cloud);
        let m = sampler.contact_moment((Point3::origin(), Vector3::z()), pad, &params);
        println!("{name:<24} M = {m:.4}");
    }
    Ok(())
}
