//! Binary Extended Gaussian Images.
//!
//! A BEGI marks which cells of the equiangular sphere grid contain at least
//! one surface normal of a cloud, and remembers which points fell in each
//! cell. Occupancy is binary: the point multiplicity of a cell is kept only
//! in its point set.

use serde::Serialize;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::sphere::{cart_to_sph, grid_index, GridIndex, SphereGrid};

#[derive(Debug, Clone, PartialEq)]
pub struct Begi {
    bandwidth: usize,
    cells: Vec<Vec<usize>>,
}

impl Begi {
    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn is_occupied(&self, idx: GridIndex) -> bool {
        !self.cells[idx.flat(self.bandwidth)].is_empty()
    }

    /// Indices into the source cloud of points whose normal binned to `idx`,
    /// ascending.
    pub fn points_in(&self, idx: GridIndex) -> &[usize] {
        &self.cells[idx.flat(self.bandwidth)]
    }

    /// Occupancy `v_jk` as a row-major 2B×2B array.
    pub fn occupancy(&self) -> Vec<bool> {
        self.cells.iter().map(|c| !c.is_empty()).collect()
    }

    /// Occupied cells in row-major order.
    pub fn occupied(&self) -> impl Iterator<Item = GridIndex> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_empty())
            .map(|(i, _)| GridIndex::from_flat(i, self.bandwidth))
    }

    pub fn occupied_count(&self) -> usize {
        self.cells.iter().filter(|c| !c.is_empty()).count()
    }

    /// Total number of binned points.
    pub fn point_count(&self) -> usize {
        self.cells.iter().map(Vec::len).sum()
    }

    pub fn to_json(&self, with_point_sets: bool) -> serde_json::Value {
        #[derive(Serialize)]
        struct BegiJson {
            bandwidth: usize,
            occupied: Vec<[usize; 3]>,
            #[serde(skip_serializing_if = "Option::is_none")]
            point_sets: Option<Vec<(usize, usize, Vec<usize>)>>,
        }
        let occupied = self
            .occupied()
            .map(|g| [g.j, g.k, self.points_in(g).len()])
            .collect();
        let point_sets = with_point_sets.then(|| {
            self.occupied()
                .map(|g| (g.j, g.k, self.points_in(g).to_vec()))
                .collect()
        });
        serde_json::to_value(BegiJson {
            bandwidth: self.bandwidth,
            occupied,
            point_sets,
        })
        .expect("BEGI JSON is always serializable")
    }
}

/// Bins every valid normal of `cloud` to its nearest grid node.
pub fn build_begi(cloud: &PointCloud, bandwidth: usize) -> Result<Begi> {
    assert!(bandwidth >= 1, "bandwidth must be positive");
    let normals = cloud.normals().ok_or(Error::MissingNormals)?;
    let mut cells = vec![Vec::new(); 4 * bandwidth * bandwidth];
    for (i, n) in normals.iter().enumerate() {
        if !crate::cloud::is_valid_normal(n) {
            continue;
        }
        let idx = grid_index(cart_to_sph(n), bandwidth);
        cells[idx.flat(bandwidth)].push(i);
    }
    Ok(Begi { bandwidth, cells })
}

/// Occupancy cast to {0.0, 1.0} samples, the input of the forward transform.
pub fn begi_signal(begi: &Begi) -> SphereGrid {
    let values = begi
        .cells
        .iter()
        .map(|c| if c.is_empty() { 0.0 } else { 1.0 })
        .collect();
    SphereGrid::from_values(begi.bandwidth, values).expect("BEGI grid is 2B x 2B")
}
