//! Grasp a 4 cm cube with the default parallel jaw and print the ranking.

use spectral_grasp::gripper::{GripperModel, JawDimensions};
use spectral_grasp::pipeline::{generate, PipelineConfig};
use spectral_grasp::shapes::cube_cloud;

fn main() -> spectral_grasp::Result<()> {
    let cloud = cube_cloud(0.04, 10_000);
    let gripper = GripperModel::parallel_jaw(JawDimensions::default())?;
    let report = generate(&cloud, &gripper, &PipelineConfig::default())?;

    println!("{:#?}", report.counts);
    println!("{:#?}", report.timings);
    for (rank, c) in report.candidates.iter().enumerate() {
        let n = &c.contacts.normals;
        println!(
            "#{rank}: score {:.4}, correlation {:.3}, width {:.4} m, n1·n2 = {:.3}, approach {:?}",
            c.score,
            c.contacts.correlation,
            c.width,
            n[0].dot(&n[1]),
            (c.wrist_pose.rotation * nalgebra::Vector3::z()).as_slice(),
        );
    }
    Ok(())
}
