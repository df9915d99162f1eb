//! Gripper description: finger pads, stroke and collision boxes.
//!
//! Everything is expressed in the hand frame, in meters. The closing axis
//! points from finger 0 toward finger 1: it is finger 0's mean inward pad
//! normal with any component along the approach axis removed. With opening
//! width `w`, pad centers sit at `standoff·approach ∓ (w/2)·closing`. The
//! approach axis must be a coordinate axis and the closing axis within 5°
//! of one, so that collision boxes stay axis-aligned.

use std::fs;
use std::path::Path;

use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::io::{load_cloud, CloudFormat};

/// Axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Aabb {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Aabb {
    pub fn new(min: [f64; 3], max: [f64; 3]) -> Self {
        Self { min, max }
    }

    pub fn contains(&self, p: &Point3<f64>, inflate: f64) -> bool {
        (0..3).all(|d| p[d] >= self.min[d] - inflate && p[d] <= self.max[d] + inflate)
    }

    pub fn translated(&self, t: &Vector3<f64>) -> Self {
        Self {
            min: [self.min[0] + t.x, self.min[1] + t.y, self.min[2] + t.z],
            max: [self.max[0] + t.x, self.max[1] + t.y, self.max[2] + t.z],
        }
    }

    pub fn center(&self) -> Point3<f64> {
        Point3::new(
            0.5 * (self.min[0] + self.max[0]),
            0.5 * (self.min[1] + self.max[1]),
            0.5 * (self.min[2] + self.max[2]),
        )
    }

    fn is_valid(&self) -> bool {
        (0..3).all(|d| self.min[d].is_finite() && self.max[d].is_finite() && self.min[d] <= self.max[d])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GripperModel {
    /// Pad surfaces with inward (object-facing) unit normals.
    pads: Vec<PointCloud>,
    stroke: [f64; 2],
    approach_axis: Vector3<f64>,
    palm_box: Aabb,
    /// One per finger, relative to that finger's pad center.
    finger_boxes: Vec<Aabb>,
    palm_standoff: f64,
    /// Current opening width, the joint configuration `q`.
    opening: f64,
    closing_axis: Vector3<f64>,
}

/// Dimensions of a two-finger parallel jaw with flat square pads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JawDimensions {
    pub stroke: [f64; 2],
    /// Side length of the square pads.
    pub pad_size: f64,
    /// Pad points per side.
    pub pad_resolution: usize,
    /// Fingers run from the palm face to the top edge of the pads.
    pub finger_thickness: f64,
    pub palm_standoff: f64,
    pub palm_size: [f64; 3],
}

impl Default for JawDimensions {
    fn default() -> Self {
        Self {
            stroke: [0.0, 0.07],
            pad_size: 0.02,
            pad_resolution: 5,
            finger_thickness: 0.01,
            palm_standoff: 0.07,
            palm_size: [0.12, 0.05, 0.04],
        }
    }
}

impl GripperModel {
    pub fn new(
        pads: Vec<PointCloud>,
        stroke: [f64; 2],
        approach_axis: Vector3<f64>,
        palm_box: Aabb,
        finger_boxes: Vec<Aabb>,
        palm_standoff: f64,
    ) -> Result<Self> {
        let bad = |msg: &str| Err(Error::InvalidGripper(msg.to_string()));
        if pads.len() < 2 {
            return bad("need at least two fingers");
        }
        if finger_boxes.len() != pads.len() {
            return bad("one finger box per finger required");
        }
        if !(stroke[0] >= 0.0 && stroke[0] < stroke[1] && stroke[1].is_finite()) {
            return bad("stroke must satisfy 0 <= w_min < w_max");
        }
        if !palm_box.is_valid() || !finger_boxes.iter().all(Aabb::is_valid) {
            return bad("box with min > max or non-finite bounds");
        }
        if !(palm_standoff.is_finite() && palm_standoff >= 0.0) {
            return bad("palm_standoff must be non-negative");
        }
        let mut means = Vec::with_capacity(pads.len());
        for pad in &pads {
            if pad.valid_normal_count() == 0 {
                return Err(Error::MissingNormals);
            }
            means.push(mean_normal(pad).ok_or_else(|| {
                Error::InvalidGripper("pad normals cancel out".to_string())
            })?);
        }
        if pads.len() == 2 && (means[0] + means[1]).norm() > 1e-6 {
            return bad("pad mean normals of a parallel jaw must be antiparallel");
        }
        let approach_axis = approach_axis
            .try_normalize(1e-12)
            .ok_or_else(|| Error::InvalidGripper("zero approach axis".to_string()))?;
        if axis_index(&approach_axis, 1e-9).is_none() {
            return bad("approach axis must be a coordinate axis of the hand frame");
        }
        // the part of finger 0's normal across the approach axis
        let closing_axis = (means[0] - approach_axis * approach_axis.dot(&means[0]))
            .try_normalize(1e-9)
            .ok_or_else(|| Error::InvalidGripper("pad normals parallel to the approach axis".to_string()))?;
        if means[0].dot(&closing_axis) < AXIS_TOLERANCE.cos()
            || axis_index(&closing_axis, 1.0 - AXIS_TOLERANCE.cos()).is_none()
        {
            return bad("pad normals must lie within 5° of a hand axis perpendicular to the approach axis");
        }
        Ok(Self {
            pads,
            stroke,
            approach_axis,
            palm_box,
            finger_boxes,
            palm_standoff,
            opening: stroke[1],
            closing_axis,
        })
    }

    /// Flat square pads facing each other along x, approach along +z.
    pub fn parallel_jaw(dims: JawDimensions) -> Result<Self> {
        let n = dims.pad_resolution.max(2);
        let half = dims.pad_size / 2.0;
        let w = dims.stroke[1];
        let pad = |x: f64, normal: Vector3<f64>| {
            let mut pts = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    let y = -half + dims.pad_size * i as f64 / (n - 1) as f64;
                    let z = dims.palm_standoff - half + dims.pad_size * j as f64 / (n - 1) as f64;
                    pts.push(Point3::new(x, y, z));
                }
            }
            PointCloud::new(pts, Some(vec![normal; n * n]))
        };
        let pads = vec![pad(-w / 2.0, Vector3::x())?, pad(w / 2.0, -Vector3::x())?];
        let t = dims.finger_thickness;
        let palm = Aabb::new(
            [-dims.palm_size[0] / 2.0, -dims.palm_size[1] / 2.0, 0.0],
            [dims.palm_size[0] / 2.0, dims.palm_size[1] / 2.0, dims.palm_size[2]],
        );
        let finger_reach = dims.palm_standoff + half - dims.palm_size[2];
        let finger_box = |sign: f64| {
            let (x0, x1) = if sign < 0.0 { (-t, 0.0) } else { (0.0, t) };
            Aabb::new([x0, -half, -(finger_reach - half)], [x1, half, half])
        };
        Self::new(
            pads,
            dims.stroke,
            Vector3::z(),
            palm,
            vec![finger_box(-1.0), finger_box(1.0)],
            dims.palm_standoff,
        )
    }

    pub fn n_fingers(&self) -> usize {
        self.pads.len()
    }

    pub fn pads(&self) -> &[PointCloud] {
        &self.pads
    }

    pub fn stroke(&self) -> [f64; 2] {
        self.stroke
    }

    pub fn approach_axis(&self) -> Vector3<f64> {
        self.approach_axis
    }

    pub fn closing_axis(&self) -> Vector3<f64> {
        self.closing_axis
    }

    pub fn palm_box(&self) -> &Aabb {
        &self.palm_box
    }

    pub fn finger_boxes(&self) -> &[Aabb] {
        &self.finger_boxes
    }

    pub fn palm_standoff(&self) -> f64 {
        self.palm_standoff
    }

    pub fn opening(&self) -> f64 {
        self.opening
    }

    /// Sets the joint configuration, clamped to the stroke.
    pub fn with_opening(mut self, width: f64) -> Self {
        self.opening = width.clamp(self.stroke[0], self.stroke[1]);
        self
    }

    /// Mean inward normal of each pad.
    pub fn pad_normals(&self) -> Vec<Vector3<f64>> {
        self.pads.iter().map(|p| mean_normal(p).expect("validated")).collect()
    }

    /// Hand-frame pad centers of a two-finger gripper opened to `width`.
    pub fn pad_centers(&self, width: f64) -> [Point3<f64>; 2] {
        let mid = self.approach_axis * self.palm_standoff;
        let half = self.closing_axis * (width / 2.0);
        [Point3::from(mid - half), Point3::from(mid + half)]
    }

    pub(crate) fn closing_index(&self) -> usize {
        axis_index(&self.closing_axis, 1.0 - AXIS_TOLERANCE.cos()).expect("validated")
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json_str(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Parses the gripper JSON; pad `file` entries resolve against `base_dir`.
    pub fn from_json_str(text: &str, base_dir: &Path) -> Result<Self> {
        let spec: GripperJson = serde_json::from_str(text)
            .map_err(|e| Error::InvalidGripper(format!("gripper JSON: {e}")))?;
        if spec.n_fingers != spec.pads.len() {
            return Err(Error::InvalidGripper(format!(
                "n_fingers = {} but {} pads given",
                spec.n_fingers,
                spec.pads.len()
            )));
        }
        let mut pads = Vec::with_capacity(spec.pads.len());
        for pad in spec.pads {
            pads.push(match pad {
                PadJson::Inline { points, normals } => PointCloud::new(
                    points.into_iter().map(Point3::from).collect(),
                    Some(normals.into_iter().map(Vector3::from).collect()),
                )?,
                PadJson::File { file } => {
                    let path = base_dir.join(&file);
                    let format = CloudFormat::from_path(&path).unwrap_or(CloudFormat::PlyAscii);
                    load_cloud(&path, format)?
                }
            });
        }
        let model = Self::new(
            pads,
            spec.stroke,
            Vector3::from(spec.approach_axis),
            spec.palm_box,
            spec.finger_boxes,
            spec.palm_standoff,
        )?;
        Ok(match spec.opening {
            Some(w) => model.with_opening(w),
            None => model,
        })
    }

    /// Self-contained JSON with inline pads.
    pub fn to_json(&self) -> serde_json::Value {
        let spec = GripperJson {
            n_fingers: self.n_fingers(),
            stroke: self.stroke,
            approach_axis: self.approach_axis.into(),
            palm_standoff: self.palm_standoff,
            opening: Some(self.opening),
            pads: self
                .pads
                .iter()
                .map(|p| PadJson::Inline {
                    points: p.points().iter().map(|q| q.coords.into()).collect(),
                    normals: p.normals().unwrap().iter().map(|&n| n.into()).collect(),
                })
                .collect(),
            palm_box: self.palm_box,
            finger_boxes: self.finger_boxes.clone(),
        };
        serde_json::to_value(spec).expect("gripper JSON is serializable")
    }
}

fn mean_normal(pad: &PointCloud) -> Option<Vector3<f64>> {
    let sum = (0..pad.len())
        .filter_map(|i| pad.normal(i))
        .fold(Vector3::zeros(), |a, n| a + n);
    sum.try_normalize(1e-9)
}

/// Largest angle between the closing axis and the hand axis it is
/// treated as for collision boxes.
const AXIS_TOLERANCE: f64 = 5.0 * std::f64::consts::PI / 180.0;

/// Index `d` if the unit vector `v` is `±e_d` within `tol` in `|v_d|`.
fn axis_index(v: &Vector3<f64>, tol: f64) -> Option<usize> {
    (0..3).find(|&d| v[d].abs() >= 1.0 - tol)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GripperJson {
    n_fingers: usize,
    stroke: [f64; 2],
    approach_axis: [f64; 3],
    palm_standoff: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    opening: Option<f64>,
    pads: Vec<PadJson>,
    palm_box: Aabb,
    finger_boxes: Vec<Aabb>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
enum PadJson {
    Inline {
        points: Vec<[f64; 3]>,
        normals: Vec<[f64; 3]>,
    },
    File {
        file: String,
    },
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_jaw_is_valid() {
        let g = GripperModel::parallel_jaw(JawDimensions::default()).unwrap();
        assert_eq!(g.n_fingers(), 2);
        assert_eq!(g.closing_axis(), Vector3::x());
        let [a, b] = g.pad_centers(0.05);
        assert!((a - Point3::new(-0.025, 0.0, 0.07)).norm() < 1e-12);
        assert!((b - Point3::new(0.025, 0.0, 0.07)).norm() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let g = GripperModel::parallel_jaw(JawDimensions::default()).unwrap();
        let text = g.to_json().to_string();
        let back = GripperModel::from_json_str(&text, Path::new(".")).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn rejects_bad_models() {
        let g = GripperModel::parallel_jaw(JawDimensions::default()).unwrap();
        let mut v = g.to_json();
        v["stroke"] = serde_json::json!([0.07, 0.01]);
        assert!(GripperModel::from_json_str(&v.to_string(), Path::new(".")).is_err());

        let mut v = g.to_json();
        v["extra"] = serde_json::json!(1);
        assert!(GripperModel::from_json_str(&v.to_string(), Path::new(".")).is_err());

        let mut v = g.to_json();
        v["pads"][1]["normals"] = v["pads"][0]["normals"].clone();
        assert!(matches!(
            GripperModel::from_json_str(&v.to_string(), Path::new(".")),
            Err(Error::InvalidGripper(_))
        ));
    }
}
