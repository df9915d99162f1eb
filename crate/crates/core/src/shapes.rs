//! Synthetic clouds with exact outward normals, for tests and demos.

use std::f64::consts::PI;

use nalgebra::{Point3, Vector3};

use crate::cloud::PointCloud;

/// Surface of an axis-aligned box centered at the origin.
///
/// Each face gets an `n × n` grid of cell-centered samples, so no point
/// lies on an edge and every normal is a face normal.
pub fn box_cloud(size: [f64; 3], n: usize) -> PointCloud {
    assert!(n >= 1);
    let half = size.map(|s| s / 2.0);
    let mut points = Vec::with_capacity(6 * n * n);
    let mut normals = Vec::with_capacity(6 * n * n);
    for axis in 0..3 {
        let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
        for sign in [1.0, -1.0] {
            for i in 0..n {
                for j in 0..n {
                    let mut p = [0.0; 3];
                    p[axis] = sign * half[axis];
                    p[u] = -half[u] + size[u] * (i as f64 + 0.5) / n as f64;
                    p[v] = -half[v] + size[v] * (j as f64 + 0.5) / n as f64;
                    points.push(Point3::from(p));
                    normals.push(Vector3::ith(axis, sign));
                }
            }
        }
    }
    PointCloud::new(points, Some(normals)).expect("box samples are finite")
}

/// Cube with about `target` points.
pub fn cube_cloud(side: f64, target: usize) -> PointCloud {
    let n = ((target as f64 / 6.0).sqrt().round() as usize).max(1);
    box_cloud([side; 3], n)
}

/// `n` nearly uniform points on a sphere (Fibonacci lattice).
pub fn sphere_cloud(center: Point3<f64>, radius: f64, n: usize) -> PointCloud {
    assert!(n >= 1);
    let golden = PI * (3.0 - 5f64.sqrt());
    let mut points = Vec::with_capacity(n);
    let mut normals = Vec::with_capacity(n);
    for i in 0..n {
        let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
        let r = (1.0 - z * z).sqrt();
        let phi = golden * i as f64;
        let dir = Vector3::new(r * phi.cos(), r * phi.sin(), z);
        points.push(center + dir * radius);
        normals.push(dir);
    }
    PointCloud::new(points, Some(normals)).expect("sphere samples are finite")
}

/// Square patch of the plane `z = 0` with normal +z, `n × n` samples
/// spaced `spacing` apart and centered at the origin.
pub fn plane_cloud(n: usize, spacing: f64) -> PointCloud {
    assert!(n >= 1);
    let offset = spacing * (n as f64 - 1.0) / 2.0;
    let points = (0..n * n)
        .map(|i| Point3::new((i / n) as f64 * spacing - offset, (i % n) as f64 * spacing - offset, 0.0))
        .collect();
    PointCloud::new(points, Some(vec![Vector3::z(); n * n])).expect("plane samples are finite")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_and_normals() {
        let c = cube_cloud(0.04, 10_000);
        assert_eq!(c.len(), 6 * 41 * 41);
        assert!(c.points().iter().all(|p| p.coords.amax() <= 0.02 + 1e-15));
        let s = sphere_cloud(Point3::origin(), 0.06, 500);
        assert!(s.points().iter().all(|p| (p.coords.norm() - 0.06).abs() < 1e-12));
        assert_eq!(plane_cloud(5, 0.01).len(), 25);
    }
}
