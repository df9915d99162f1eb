//! Rotate a BEGI spectrum by a known grid rotation and find it again as
//! the peak of the SO(3) correlation.

use spectral_grasp::begi::{begi_signal, build_begi};
use spectral_grasp::sht::ShtPlan;
use spectral_grasp::shapes::box_cloud;
use spectral_grasp::so3::{correlate, extract_rotations, normalize, rotate_coeffs};

fn main() -> spectral_grasp::Result<()> {
    let b = 8;
    let cloud = box_cloud([0.02, 0.05, 0.03], 20);
    let plan = ShtPlan::new(b);
    let g = plan.forward(&begi_signal(&build_begi(&cloud, b)?))?;

    let template = correlate(&g, &g)?;
    let node = [3, 5, 9];
    let applied = template.node(node[0], node[1], node[2]);
    let f = rotate_coeffs(&g, &applied);

    let grid = normalize(&correlate(&f, &g)?, &f, &g)?;
    let found = grid.argmax();
    println!("applied node {node:?} = {applied:?}");
    println!("peak node    {found:?} value {:.6}", grid.get(found[0], found[1], found[2]));
    println!("top sampled rotations (a box has several symmetric matches):");
    for s in extract_rotations(&grid, 0.9).iter().take(5) {
        println!("  {:?} {:.4}", s.node, s.value);
    }
    Ok(())
}
