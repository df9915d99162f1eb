//! Surface normal estimation from k-nearest-neighbor patches.

use nalgebra::{Matrix3, Point3, SymmetricEigen, Vector3};
use rayon::prelude::*;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::spatial::SpatialIndex;

pub const DEFAULT_K: usize = 16;

/// Relative eigenvalue floor below which a patch counts as rank-deficient.
const RANK_EPS: f64 = 1e-10;

/// Estimates a normal per point as the least-variance direction of its
/// `k`-nearest-neighbor patch, oriented toward `viewpoint`.
///
/// Points whose patch spans fewer than two dimensions get the zero normal,
/// which downstream stages treat as invalid.
pub fn estimate_normals(cloud: &PointCloud, k: usize, viewpoint: Point3<f64>) -> Result<PointCloud> {
    if k < 3 {
        return Err(Error::InvalidConfig(format!("normal estimation needs k >= 3, got {k}")));
    }
    if cloud.len() < k {
        return Err(Error::TooFewPoints { n: cloud.len(), k });
    }
    let points = cloud.points();
    let index = SpatialIndex::new(points);
    let normals: Vec<Vector3<f64>> = points
        .par_iter()
        .map(|p| {
            let nbrs = index.knn(p, k);
            patch_normal(points, &nbrs)
                .map(|n| orient_toward(n, p, &viewpoint))
                .unwrap_or_else(Vector3::zeros)
        })
        .collect();
    let degenerate = normals.iter().filter(|n| n.norm_squared() == 0.0).count();
    if degenerate > 0 {
        log::warn!("{degenerate} points have rank-deficient neighborhoods; normals left invalid");
    }
    cloud.clone().with_normals(normals)
}

/// Smallest-eigenvalue eigenvector of the patch covariance, or `None` when
/// the patch is rank-deficient below two.
fn patch_normal(points: &[Point3<f64>], idx: &[usize]) -> Option<Vector3<f64>> {
    let n = idx.len() as f64;
    let mean = idx.iter().fold(Vector3::zeros(), |a, &i| a + points[i].coords) / n;
    let cov = idx.iter().fold(Matrix3::zeros(), |a, &i| {
        let d = points[i].coords - mean;
        a + d * d.transpose()
    }) / n;
    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let largest = eig.eigenvalues[order[2]];
    if largest <= 0.0 || eig.eigenvalues[order[1]] <= RANK_EPS * largest {
        return None;
    }
    Some(eig.eigenvectors.column(order[0]).normalize())
}

fn orient_toward(n: Vector3<f64>, p: &Point3<f64>, viewpoint: &Point3<f64>) -> Vector3<f64> {
    if n.dot(&(viewpoint - p)) < 0.0 {
        -n
    } else {
        n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane(n: usize) -> PointCloud {
        let side = (n as f64).sqrt().ceil() as usize;
        let pts = (0..n)
            .map(|i| Point3::new((i % side) as f64 * 0.01, (i / side) as f64 * 0.013, 0.0))
            .collect();
        PointCloud::new(pts, None).unwrap()
    }

    #[test]
    fn plane_normals_follow_viewpoint() {
        let cloud = plane(100);
        let up = estimate_normals(&cloud, DEFAULT_K, Point3::new(0.0, 0.0, 1.0)).unwrap();
        let down = estimate_normals(&cloud, DEFAULT_K, Point3::new(0.0, 0.0, -1.0)).unwrap();
        for i in 0..cloud.len() {
            assert!((up.normal(i).unwrap() - Vector3::z()).norm() < 1e-3);
            assert!((down.normal(i).unwrap() + Vector3::z()).norm() < 1e-3);
        }
    }

    #[test]
    fn too_few_points() {
        let cloud = plane(2);
        assert!(matches!(
            estimate_normals(&cloud, 3, Point3::origin()),
            Err(Error::TooFewPoints { n: 2, k: 3 })
        ));
    }

    #[test]
    fn collinear_patch_is_flagged() {
        let pts = (0..10).map(|i| Point3::new(i as f64, 0.0, 0.0)).collect();
        let cloud = PointCloud::new(pts, None).unwrap();
        let out = estimate_normals(&cloud, 4, Point3::new(0.0, 0.0, 5.0)).unwrap();
        assert_eq!(out.valid_normal_count(), 0);
    }
}
