//! Writes the sample inputs used by the README: a gripper description,
//! two object clouds and a config file.
//!
//! Usage: `cargo run --example write_sample_data -- [out_dir]`

use std::fs;
use std::path::PathBuf;

use nalgebra::Point3;
use spectral_grasp::gripper::GripperModel;
use spectral_grasp::io::{save_cloud, CloudFormat};
use spectral_grasp::shapes::{cube_cloud, sphere_cloud};

const CONFIG: &str = r#"# Relative paths resolve against this file's directory.
cloud = "box.ply"
gripper = "jaw.json"
bandwidth = 16
t_corr = 0.1
k_max = 8
mu = 0.5
n_approach = 8
clearance = 0.005
top_k = 10

[locomo]
kappa = 3
radii = [0.005, 0.01, 0.015]
sigma = 0.01
omega = [1.0, 1.0]
rho = 1.0
min_patch_points = 5
"#;

fn main() -> spectral_grasp::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "crates/core/data".into()));
    fs::create_dir_all(&dir).expect("output directory");
    let jaw = GripperModel::parallel_jaw(Default::default())?;
    let json = serde_json::to_string_pretty(&jaw.to_json()).expect("gripper JSON");
    fs::write(dir.join("jaw.json"), json + "\n").expect("write gripper");
    save_cloud(&cube_cloud(0.04, 10_000), dir.join("box.ply"), CloudFormat::PlyAscii)?;
    save_cloud(&sphere_cloud(Point3::origin(), 0.06, 10_000), dir.join("sphere.ply"), CloudFormat::PlyAscii)?;
    fs::write(dir.join("grasp.toml"), CONFIG).expect("write config");
    println!("wrote jaw.json, box.ply, sphere.ply and grasp.toml to {}", dir.display());
    Ok(())
}
