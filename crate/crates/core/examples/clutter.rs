//! A scene of several objects goes through the same pipeline as a single
//! object; grasps land on whichever object offers them.
//!
//! Correlation is normalized by the norm of the scene's BEGI, so a scene
//! whose normals cover the whole sphere (a large ball, say) scores every
//! rotation low and may fall below `t_corr`.

use nalgebra::{Isometry3, Point3, Vector3};
use spectral_grasp::gripper::GripperModel;
use spectral_grasp::pipeline::{generate, PipelineConfig};
use spectral_grasp::shapes::{box_cloud, cube_cloud};

fn main() -> spectral_grasp::Result<()> {
    let turned = Isometry3::new(Vector3::new(0.12, 0.0, 0.0), Vector3::z() * 0.6);
    let scene = cube_cloud(0.04, 6000)
        .merged(&box_cloud([0.03, 0.06, 0.05], 25).transformed(&turned))
        .merged(&box_cloud([0.02, 0.02, 0.08], 20).transformed(&Isometry3::translation(0.0, 0.12, 0.0)));
    let gripper = GripperModel::parallel_jaw(Default::default())?;
    let cfg = PipelineConfig { top_k: 20, ..PipelineConfig::default() };
    let report = generate(&scene, &gripper, &cfg)?;

    println!("{} scene points, {:?}", scene.len(), report.counts);
    for c in &report.candidates {
        let mid = Point3::from((c.contacts.points[0].coords + c.contacts.points[1].coords) / 2.0);
        let object = if mid.y > 0.08 { "post" } else if mid.x > 0.06 { "box" } else { "cube" };
        println!("{object:<6} score {:.3} width {:.4} m", c.score, c.width);
    }
    Ok(())
}
