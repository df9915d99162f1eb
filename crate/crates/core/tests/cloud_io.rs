mod common;

use std::path::Path;

use common::rng;
use nalgebra::{Matrix3, Point3, Rotation3, Vector3};
use proptest::prelude::*;
use rand::Rng;
use spectral_grasp::cloud::PointCloud;
use spectral_grasp::io::{load_cloud, parse_ply, parse_xyz, save_cloud, CloudFormat};
use spectral_grasp::normals::estimate_normals;
use spectral_grasp::Error;

const PLY_WITH_NORMALS: &str = "ply
format ascii 1.0
element vertex 3
property float x
property float y
property float z
property float nx
property float ny
property float nz
end_header
0 0 0 0 0 2
1 0 0 0 3 0
0 1 0 0.6 0.8 0
";

#[test]
fn ply_normals_are_copied_and_unit() {
    let c = parse_ply(PLY_WITH_NORMALS, Path::new("t.ply")).unwrap();
    assert_eq!(c.len(), 3);
    let want = [Vector3::z(), Vector3::y(), Vector3::new(0.6, 0.8, 0.0)];
    for (i, w) in want.iter().enumerate() {
        let n = c.normal(i).unwrap();
        assert!((n.norm() - 1.0).abs() <= 1e-6);
        assert!((n - w).norm() < 1e-7);
    }
}

#[test]
fn ply_without_normal_properties_is_flagged() {
    let text = "ply\nformat ascii 1.0\nelement vertex 2\nproperty double x\nproperty double y\nproperty double z\nend_header\n0 0 0\n1 2 3\n";
    let c = parse_ply(text, Path::new("t.ply")).unwrap();
    assert_eq!(c.len(), 2);
    assert!(!c.has_normals());
}

#[test]
fn short_body_is_a_parse_error() {
    let text = PLY_WITH_NORMALS.replace("element vertex 3", "element vertex 4");
    assert!(matches!(parse_ply(&text, Path::new("t.ply")), Err(Error::Parse { .. })));
}

#[test]
fn xyz_load_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.xyz");
    std::fs::write(&path, "# comment\n0 0 0 0 0 1\n\n1 1 1 0 0 -5\n").unwrap();
    let c = load_cloud(&path, CloudFormat::Xyz).unwrap();
    assert_eq!(c.len(), 2);
    assert_eq!(c.normal(1), Some(-Vector3::z()));
    assert!(matches!(
        load_cloud(dir.path().join("missing.xyz"), CloudFormat::Xyz),
        Err(Error::Io { .. })
    ));
}

/// Least-squares plane `z = ax + by + c` through the points; unit normal
/// `(-a, -b, 1)` normalized. Independent of the eigen solver.
fn lsq_plane_normal(pts: &[Point3<f64>]) -> Vector3<f64> {
    let mut ata = Matrix3::zeros();
    let mut atz = Vector3::zeros();
    for p in pts {
        let row = Vector3::new(p.x, p.y, 1.0);
        ata += row * row.transpose();
        atz += row * p.z;
    }
    let sol = ata.lu().solve(&atz).unwrap();
    Vector3::new(-sol.x, -sol.y, 1.0).normalize()
}

fn noisy_plane(n: usize, seed: u64) -> PointCloud {
    let mut r = rng(seed);
    let pts = (0..n)
        .map(|_| Point3::new(r.gen_range(-0.05..0.05), r.gen_range(-0.05..0.05), r.gen_range(-1e-5..1e-5)))
        .collect();
    PointCloud::new(pts, None).unwrap()
}

#[test]
fn plane_normals_face_the_viewpoint() {
    let cloud = noisy_plane(100, 1);
    let oracle = lsq_plane_normal(cloud.points());
    assert!((oracle - Vector3::z()).norm() < 1e-3);
    let up = estimate_normals(&cloud, 16, Point3::new(0.0, 0.0, 1.0)).unwrap();
    let down = estimate_normals(&cloud, 16, Point3::new(0.0, 0.0, -1.0)).unwrap();
    for i in 0..cloud.len() {
        let n = up.normal(i).unwrap();
        assert!((n - Vector3::z()).amax() < 1e-3, "{n}");
        assert!((n.norm() - 1.0).abs() <= 1e-6);
        assert!((down.normal(i).unwrap() + Vector3::z()).amax() < 1e-3);
    }
}

#[test]
fn local_normals_match_least_squares_oracle() {
    // curved surface z = 0.5 (x² + y²): each kNN patch is nearly planar
    let mut r = rng(4);
    let pts: Vec<Point3<f64>> = (0..400)
        .map(|_| {
            let (x, y) = (r.gen_range(-0.1..0.1), r.gen_range(-0.1..0.1));
            Point3::new(x, y, 0.5 * (x * x + y * y))
        })
        .collect();
    let cloud = PointCloud::new(pts.clone(), None).unwrap();
    let est = estimate_normals(&cloud, 12, Point3::new(0.0, 0.0, 10.0)).unwrap();
    let index = spectral_grasp::spatial::SpatialIndex::new(&pts);
    for i in (0..pts.len()).step_by(7) {
        let nb: Vec<Point3<f64>> = index.knn(&pts[i], 12).into_iter().map(|j| pts[j]).collect();
        let oracle = lsq_plane_normal(&nb);
        let got = est.normal(i).unwrap();
        assert!((got - oracle).norm() < 5e-3, "point {i}: {got} vs {oracle}");
    }
}

#[test]
fn too_few_points() {
    let cloud = PointCloud::new(vec![Point3::origin(), Point3::new(1.0, 0.0, 0.0)], None).unwrap();
    assert!(matches!(
        estimate_normals(&cloud, 3, Point3::origin()),
        Err(Error::TooFewPoints { .. })
    ));
}

fn arb_rotation() -> impl Strategy<Value = Rotation3<f64>> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, 0.0f64..std::f64::consts::TAU).prop_filter_map(
        "degenerate axis",
        |(x, y, z, angle)| {
            Vector3::new(x, y, z)
                .try_normalize(1e-3)
                .map(|axis| Rotation3::from_axis_angle(&nalgebra::Unit::new_unchecked(axis), angle))
        },
    )
}

fn arb_cloud() -> impl Strategy<Value = PointCloud> {
    (1usize..40, any::<u64>(), any::<bool>()).prop_map(|(n, seed, with_normals)| {
        let mut r = rng(seed);
        let pts = (0..n)
            .map(|_| Point3::new(r.gen_range(-10.0..10.0), r.gen_range(-1e-3..1e-3), r.gen_range(-1e6..1e6)))
            .collect();
        let normals = with_normals.then(|| {
            (0..n)
                .map(|_| Vector3::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), r.gen_range(0.1..1.0)))
                .collect()
        });
        PointCloud::new(pts, normals).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn estimation_is_rigidly_invariant(rot in arb_rotation(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let pts: Vec<Point3<f64>> = (0..150)
            .map(|_| {
                let (x, y) = (r.gen_range(-0.1..0.1), r.gen_range(-0.1..0.1));
                Point3::new(x, y, 0.3 * x * x - 0.2 * y * y)
            })
            .collect();
        let view = Point3::new(0.0, 0.0, 5.0);
        let cloud = PointCloud::new(pts, None).unwrap();
        let a = estimate_normals(&cloud, 16, view).unwrap();
        let moved = PointCloud::new(cloud.points().iter().map(|p| rot * p).collect(), None).unwrap();
        let b = estimate_normals(&moved, 16, rot * view).unwrap();
        for i in 0..cloud.len() {
            let want = rot * a.normal(i).unwrap();
            let got = b.normal(i).unwrap();
            prop_assert!((want - got).amax() <= 1e-3, "{} vs {}", want, got);
        }
    }

    #[test]
    fn save_then_load_is_identity(cloud in arb_cloud(), ply in any::<bool>()) {
        let dir = tempfile::tempdir().unwrap();
        let (format, name) = if ply { (CloudFormat::PlyAscii, "c.ply") } else { (CloudFormat::Xyz, "c.xyz") };
        let path = dir.path().join(name);
        save_cloud(&cloud, &path, format).unwrap();
        let back = load_cloud(&path, format).unwrap();
        prop_assert_eq!(back.points(), cloud.points());
        match (back.normals(), cloud.normals()) {
            (Some(a), Some(b)) => {
                for (x, y) in a.iter().zip(b) {
                    prop_assert!((x - y).amax() <= 1e-12);
                    prop_assert!((x.norm() - 1.0).abs() <= 1e-6);
                }
            }
            (None, None) => {}
            _ => prop_assert!(false, "normal presence changed"),
        }
    }

    #[test]
    fn xyz_tokens_round_trip(vals in proptest::collection::vec(-1e3f64..1e3, 3..60)) {
        let n = vals.len() / 3;
        let text: String = vals[..3 * n].chunks(3).map(|c| format!("{} {} {}\n", c[0], c[1], c[2])).collect();
        let c = parse_xyz(&text, Path::new("t.xyz")).unwrap();
        prop_assert_eq!(c.len(), n);
        for (p, v) in c.points().iter().zip(vals.chunks(3)) {
            prop_assert_eq!([p.x, p.y, p.z], [v[0], v[1], v[2]]);
        }
    }
}
