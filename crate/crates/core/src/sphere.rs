//! The equiangular 2B×2B sampling grid on the unit sphere.

use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;

/// Colatitude `theta` in [0, π] and longitude `phi` in [0, 2π), radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalDirection {
    pub theta: f64,
    pub phi: f64,
}

impl SphericalDirection {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }

    pub fn to_cartesian(self) -> Vector3<f64> {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        Vector3::new(st * cp, st * sp, ct)
    }
}

/// Cell of the equiangular grid: `j` indexes colatitude, `k` longitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GridIndex {
    pub j: usize,
    pub k: usize,
}

impl GridIndex {
    pub fn new(j: usize, k: usize) -> Self {
        Self { j, k }
    }

    /// Row-major offset into a 2B×2B array.
    pub fn flat(self, bandwidth: usize) -> usize {
        self.j * 2 * bandwidth + self.k
    }

    pub fn from_flat(i: usize, bandwidth: usize) -> Self {
        Self::new(i / (2 * bandwidth), i % (2 * bandwidth))
    }

    pub fn direction(self, bandwidth: usize) -> SphericalDirection {
        SphericalDirection::new(theta_node(self.j, bandwidth), phi_node(self.k, bandwidth))
    }
}

/// θ_j = π(2j+1)/4B.
pub fn theta_node(j: usize, bandwidth: usize) -> f64 {
    PI * (2 * j + 1) as f64 / (4 * bandwidth) as f64
}

/// φ_k = πk/B.
pub fn phi_node(k: usize, bandwidth: usize) -> f64 {
    PI * k as f64 / bandwidth as f64
}

/// Spherical coordinates of a unit vector.
///
/// Both angles use two-argument arctangents so every octant maps correctly.
/// At the poles the longitude is degenerate and is reported as 0.
pub fn cart_to_sph(n: &Vector3<f64>) -> SphericalDirection {
    let rho = n.x.hypot(n.y);
    let theta = rho.atan2(n.z);
    if rho == 0.0 {
        return SphericalDirection::new(theta, 0.0);
    }
    let mut phi = n.y.atan2(n.x);
    if phi < 0.0 {
        phi += TAU;
    }
    if phi >= TAU {
        phi = 0.0;
    }
    SphericalDirection::new(theta, phi.max(0.0))
}

/// The grid node nearest to `d`, rounding half up, with the colatitude index
/// clamped into range and the longitude index wrapped.
pub fn grid_index(d: SphericalDirection, bandwidth: usize) -> GridIndex {
    let b = bandwidth as f64;
    let n = 2 * bandwidth;
    let j = ((4.0 * b * d.theta / PI - 1.0) / 2.0 + 0.5).floor();
    let j = j.clamp(0.0, (n - 1) as f64) as usize;
    let k = (b * d.phi / PI + 0.5).floor() as i64;
    let k = k.rem_euclid(n as i64) as usize;
    GridIndex::new(j, k)
}

/// Real samples on the 2B×2B grid, row-major in (j, k).
#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid {
    bandwidth: usize,
    values: Vec<f64>,
}

impl SphereGrid {
    pub fn zeros(bandwidth: usize) -> Self {
        Self {
            bandwidth,
            values: vec![0.0; 4 * bandwidth * bandwidth],
        }
    }

    /// Wraps row-major samples. Fails when `values.len() != 4B²`.
    pub fn from_values(bandwidth: usize, values: Vec<f64>) -> crate::Result<Self> {
        let expected = 4 * bandwidth * bandwidth;
        if values.len() != expected {
            return Err(crate::Error::DimensionMismatch {
                expected,
                got: values.len(),
            });
        }
        Ok(Self { bandwidth, values })
    }

    /// Samples `f(θ_j, φ_k)` at every node.
    pub fn from_fn(bandwidth: usize, mut f: impl FnMut(SphericalDirection) -> f64) -> Self {
        let n = 2 * bandwidth;
        let mut values = Vec::with_capacity(n * n);
        for j in 0..n {
            for k in 0..n {
                values.push(f(GridIndex::new(j, k).direction(bandwidth)));
            }
        }
        Self { bandwidth, values }
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.values[j * 2 * self.bandwidth + k]
    }

    pub fn set(&mut self, j: usize, k: usize, v: f64) {
        let n = 2 * self.bandwidth;
        self.values[j * n + k] = v;
    }

    pub fn ring(&self, j: usize) -> &[f64] {
        let n = 2 * self.bandwidth;
        &self.values[j * n..(j + 1) * n]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: SphericalDirection, theta: f64, phi: f64) {
        assert!((a.theta - theta).abs() < 1e-12, "{a:?}");
        assert!((a.phi - phi).abs() < 1e-12, "{a:?}");
    }

    #[test]
    fn cartesian_to_spherical() {
        close(cart_to_sph(&Vector3::z()), 0.0, 0.0);
        close(cart_to_sph(&-Vector3::z()), PI, 0.0);
        close(cart_to_sph(&Vector3::x()), PI / 2.0, 0.0);
        close(cart_to_sph(&-Vector3::y()), PI / 2.0, 1.5 * PI);
        close(cart_to_sph(&Vector3::new(-1.0, 0.0, -1.0).normalize()), 0.75 * PI, PI);
        // tiny negative y must not produce phi == 2π
        let d = cart_to_sph(&Vector3::new(1.0, -1e-300, 0.0));
        assert!(d.phi >= 0.0 && d.phi < TAU);
    }

    #[test]
    fn nearest_node() {
        assert_eq!(
            grid_index(SphericalDirection::new(PI / 16.0, 0.0), 4),
            GridIndex::new(0, 0)
        );
        let equator = grid_index(SphericalDirection::new(PI / 2.0, TAU - 1e-9), 4);
        assert_eq!(equator.k, 0);
        assert_eq!(equator.j, 4);
        // (32 - 1)/2 = 15.5 rounds to 16, clamped to 15; k = 8
        assert_eq!(
            grid_index(SphericalDirection::new(PI, PI), 8),
            GridIndex::new(15, 8)
        );
        assert_eq!(
            grid_index(SphericalDirection::new(0.0, 0.0), 8),
            GridIndex::new(0, 0)
        );
    }

    #[test]
    fn every_node_bins_to_itself() {
        for b in [1, 2, 4, 8, 16] {
            for j in 0..2 * b {
                for k in 0..2 * b {
                    let g = GridIndex::new(j, k);
                    assert_eq!(grid_index(g.direction(b), b), g);
                }
            }
        }
    }
}
