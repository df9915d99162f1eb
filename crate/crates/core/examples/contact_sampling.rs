//! Contact sampling and the three geometric filters, step by step.

use spectral_grasp::begi::{begi_signal, build_begi};
use spectral_grasp::contacts::{
    antipodal_filter, finger_begi, sample_contact_sets, width_filter, wrist_poses, CollisionChecker,
};
use spectral_grasp::gripper::GripperModel;
use spectral_grasp::sht::ShtPlan;
use spectral_grasp::shapes::box_cloud;
use spectral_grasp::so3::{correlate, extract_rotations, normalize};

fn main() -> spectral_grasp::Result<()> {
    let b = 16;
    let cloud = box_cloud([0.03, 0.05, 0.09], 30);
    let gripper = GripperModel::parallel_jaw(Default::default())?;

    let object = build_begi(&cloud, b)?;
    let plan = ShtPlan::new(b);
    let f = plan.forward(&begi_signal(&object))?;
    let g = plan.forward(&begi_signal(&finger_begi(&gripper, b)?))?;
    let rotations = extract_rotations(&normalize(&correlate(&f, &g)?, &f, &g)?, 0.1);

    let sets = sample_contact_sets(&object, &cloud, &gripper, &rotations, 8);
    let antipodal: Vec<_> = sets.iter().filter(|cs| antipodal_filter(cs, 0.5).unwrap_or(false)).collect();
    let in_stroke: Vec<_> = antipodal.iter().filter(|cs| width_filter(cs, &gripper)).collect();
    let checker = CollisionChecker::new(cloud.points());
    let mut poses = 0;
    for cs in &in_stroke {
        poses += wrist_poses(cs, &gripper, 8)
            .iter()
            .filter(|p| checker.is_free(p, cs.width(), &gripper, 0.005))
            .count();
    }
    println!("{} rotations above threshold", rotations.len());
    println!("{} contact sets, {} antipodal, {} within stroke", sets.len(), antipodal.len(), in_stroke.len());
    println!("{poses} collision-free wrist poses");
    // the 9 cm height exceeds the 7 cm stroke, so only pairs across the 3 and
    // 5 cm sides remain; slanted pairs inside the friction cone are a bit wider
    let mut widths: Vec<i64> = in_stroke.iter().map(|cs| (cs.width() * 1000.0).round() as i64).collect();
    widths.sort();
    widths.dedup();
    println!("grasp widths in mm: {widths:?}");
    Ok(())
}
