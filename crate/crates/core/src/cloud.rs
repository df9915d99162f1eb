//! Point clouds with optional per-point surface normals.

use nalgebra::{Isometry3, Point3, Vector3};

use crate::error::{Error, Result};

/// Normals whose length deviates from one by more than this are renormalized.
pub const UNIT_TOLERANCE: f64 = 1e-6;

/// Points in meters plus unit surface normals.
///
/// A cloud either carries a normal for every point or is flagged as
/// normals-missing (`normals() == None`). Individual normals may hold the
/// zero vector, which marks a point whose normal could not be determined;
/// such points are skipped by every consumer of normals.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<Point3<f64>>,
    normals: Option<Vec<Vector3<f64>>>,
    frame_id: String,
}

impl PointCloud {
    /// Builds a cloud, renormalizing normals to unit length.
    ///
    /// A normal of (near) zero length is stored as the zero vector and
    /// treated as invalid.
    pub fn new(points: Vec<Point3<f64>>, normals: Option<Vec<Vector3<f64>>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyCloud);
        }
        if let Some(ns) = &normals {
            if ns.len() != points.len() {
                return Err(Error::DimensionMismatch {
                    expected: points.len(),
                    got: ns.len(),
                });
            }
        }
        for (i, p) in points.iter().enumerate() {
            if !p.coords.iter().all(|c| c.is_finite()) {
                return Err(Error::NonFiniteValue { line: i });
            }
        }
        let normals = match normals {
            Some(ns) => {
                let mut out = Vec::with_capacity(ns.len());
                for (i, n) in ns.into_iter().enumerate() {
                    if !n.iter().all(|c| c.is_finite()) {
                        return Err(Error::NonFiniteValue { line: i });
                    }
                    out.push(unit_or_zero(n));
                }
                Some(out)
            }
            None => None,
        };
        Ok(Self {
            points,
            normals,
            frame_id: String::new(),
        })
    }

    pub fn with_frame_id(mut self, frame_id: impl Into<String>) -> Self {
        self.frame_id = frame_id.into();
        self
    }

    pub fn frame_id(&self) -> &str {
        &self.frame_id
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point3<f64>] {
        &self.points
    }

    /// `None` when the cloud is flagged normals-missing.
    pub fn normals(&self) -> Option<&[Vector3<f64>]> {
        self.normals.as_deref()
    }

    pub fn has_normals(&self) -> bool {
        self.normals.is_some()
    }

    /// The normal of point `i`, if present and valid.
    pub fn normal(&self, i: usize) -> Option<Vector3<f64>> {
        let n = self.normals.as_ref()?[i];
        is_valid_normal(&n).then_some(n)
    }

    /// Number of points carrying a valid normal.
    pub fn valid_normal_count(&self) -> usize {
        self.normals
            .as_ref()
            .map_or(0, |ns| ns.iter().filter(|n| is_valid_normal(n)).count())
    }

    /// Replaces all normals. Same validation as [`PointCloud::new`].
    pub fn with_normals(self, normals: Vec<Vector3<f64>>) -> Result<Self> {
        let frame_id = self.frame_id;
        Ok(Self::new(self.points, Some(normals))?.with_frame_id(frame_id))
    }

    /// Applies a rigid transform to points and normals.
    pub fn transformed(&self, iso: &Isometry3<f64>) -> Self {
        Self {
            points: self.points.iter().map(|p| iso * p).collect(),
            normals: self
                .normals
                .as_ref()
                .map(|ns| ns.iter().map(|n| iso.rotation * n).collect()),
            frame_id: self.frame_id.clone(),
        }
    }

    /// Concatenates two clouds. The result has normals only if both do.
    pub fn merged(&self, other: &PointCloud) -> Self {
        let mut points = self.points.clone();
        points.extend_from_slice(&other.points);
        let normals = match (&self.normals, &other.normals) {
            (Some(a), Some(b)) => Some(a.iter().chain(b).copied().collect()),
            _ => None,
        };
        Self {
            points,
            normals,
            frame_id: self.frame_id.clone(),
        }
    }

    pub fn centroid(&self) -> Point3<f64> {
        let sum = self
            .points
            .iter()
            .fold(Vector3::zeros(), |acc, p| acc + p.coords);
        Point3::from(sum / self.points.len() as f64)
    }
}

pub(crate) fn is_valid_normal(n: &Vector3<f64>) -> bool {
    n.norm_squared() > 0.25
}

fn unit_or_zero(n: Vector3<f64>) -> Vector3<f64> {
    let norm = n.norm();
    if norm < 1e-12 {
        Vector3::zeros()
    } else if (norm - 1.0).abs() > UNIT_TOLERANCE * 0.1 {
        n / norm
    } else {
        n
    }
}
