//! Occupied cells of a cube's binary extended Gaussian image at several
//! bandwidths. Coarse grids merge nearby normals; fine grids keep the six
//! face normals apart.

use spectral_grasp::begi::build_begi;
use spectral_grasp::shapes::{cube_cloud, sphere_cloud};

fn main() -> spectral_grasp::Result<()> {
    let cube = cube_cloud(0.04, 6000);
    let ball = sphere_cloud(nalgebra::Point3::origin(), 0.03, 6000);
    println!("{:>3} {:>6} {:>12} {:>12}", "B", "cells", "cube occ.", "sphere occ.");
    for b in [4, 8, 16, 32] {
        let c = build_begi(&cube, b)?;
        let s = build_begi(&ball, b)?;
        println!("{b:>3} {:>6} {:>12} {:>12}", 4 * b * b, c.occupied_count(), s.occupied_count());
    }
    Ok(())
}
