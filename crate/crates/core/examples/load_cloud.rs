//! Load a point cloud from disk, estimating normals if the file has none.
//!
//! Usage: `cargo run --example load_cloud -- <cloud.ply|cloud.xyz> [k]`

use std::path::PathBuf;

use nalgebra::Point3;
use spectral_grasp::io::{load_cloud, CloudFormat};
use spectral_grasp::normals::estimate_normals;

fn main() -> spectral_grasp::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = PathBuf::from(args.next().unwrap_or_else(|| "crates/core/data/box.ply".into()));
    let k: usize = args.next().map_or(12, |s| s.parse().expect("k is an integer"));
    let format = CloudFormat::from_path(&path).expect("extension .ply or .xyz");

    let mut cloud = load_cloud(&path, format)?;
    println!("{}: {} points, centroid {:?}", path.display(), cloud.len(), cloud.centroid().coords.as_slice());
    if !cloud.has_normals() {
        // orient normals away from the centroid, which suits closed objects
        let inside = cloud.centroid();
        let far = Point3::from(inside.coords * 2.0 + nalgebra::Vector3::repeat(10.0));
        cloud = estimate_normals(&cloud, k, far)?;
        println!("estimated normals from {k} neighbors");
    }
    println!("{} valid normals", cloud.valid_normal_count());
    Ok(())
}
