//! Nearest-neighbor and radius queries over a fixed point set.
//!
//! A static k-d tree: median splits on the widest axis, small leaf buckets.
//! Duplicate and coplanar points need no special handling.

use std::collections::BinaryHeap;

use nalgebra::Point3;
use ordered_float::OrderedFloat;

const LEAF_SIZE: usize = 16;

enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

pub struct SpatialIndex {
    points: Vec<[f64; 3]>,
    /// Point indices permuted so every leaf owns a contiguous range.
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl SpatialIndex {
    pub fn new(points: &[Point3<f64>]) -> Self {
        let mut index = Self {
            points: points.iter().map(|p| [p.x, p.y, p.z]).collect(),
            order: (0..points.len()).collect(),
            nodes: Vec::new(),
        };
        if !points.is_empty() {
            index.build(0, points.len());
        }
        index
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for &i in &self.order[start..end] {
            for d in 0..3 {
                lo[d] = lo[d].min(self.points[i][d]);
                hi[d] = hi[d].max(self.points[i][d]);
            }
        }
        let axis = (0..3)
            .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
            .unwrap();
        if hi[axis] - lo[axis] == 0.0 {
            // all points identical
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let mid = start + (end - start) / 2;
        let pts = &self.points;
        self.order[start..end]
            .select_nth_unstable_by(mid - start, |&a, &b| pts[a][axis].total_cmp(&pts[b][axis]));
        let value = self.points[self.order[mid]][axis];
        self.nodes.push(Node::Split {
            axis,
            value,
            left: 0,
            right: 0,
        });
        let left = self.build(start, mid);
        let right = self.build(mid, end);
        if let Node::Split {
            left: l, right: r, ..
        } = &mut self.nodes[id]
        {
            *l = left;
            *r = right;
        }
        id
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn dist2(&self, i: usize, q: &[f64; 3]) -> f64 {
        let p = &self.points[i];
        (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)
    }

    /// Indices of the `k` nearest points, closest first, equal distances by
    /// index.
    pub fn knn(&self, query: &Point3<f64>, k: usize) -> Vec<usize> {
        if k == 0 || self.is_empty() {
            return Vec::new();
        }
        let q = [query.x, query.y, query.z];
        let mut heap: BinaryHeap<(OrderedFloat<f64>, usize)> = BinaryHeap::with_capacity(k + 1);
        self.knn_rec(0, &q, k, &mut heap);
        let mut out = heap.into_sorted_vec();
        out.truncate(k);
        out.into_iter().map(|(_, i)| i).collect()
    }

    fn knn_rec(
        &self,
        node: usize,
        q: &[f64; 3],
        k: usize,
        heap: &mut BinaryHeap<(OrderedFloat<f64>, usize)>,
    ) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let item = (OrderedFloat(self.dist2(i, q)), i);
                    if heap.len() < k {
                        heap.push(item);
                    } else if item < *heap.peek().unwrap() {
                        heap.pop();
                        heap.push(item);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[axis] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.knn_rec(near, q, k, heap);
                if heap.len() < k || diff * diff <= heap.peek().unwrap().0 .0 {
                    self.knn_rec(far, q, k, heap);
                }
            }
        }
    }

    /// Indices of all points within `radius` (inclusive), ascending.
    pub fn within(&self, query: &Point3<f64>, radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        if !self.is_empty() {
            let q = [query.x, query.y, query.z];
            self.within_rec(0, &q, radius * radius, radius, &mut out);
        }
        out.sort_unstable();
        out
    }

    fn within_rec(&self, node: usize, q: &[f64; 3], r2: f64, r: f64, out: &mut Vec<usize>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                out.extend(
                    self.order[start..end]
                        .iter()
                        .copied()
                        .filter(|&i| self.dist2(i, q) <= r2),
                );
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                // points equal to the split value may sit on either side
                if q[axis] - r <= value {
                    self.within_rec(left, q, r2, r, out);
                }
                if q[axis] + r >= value {
                    self.within_rec(right, q, r2, r, out);
                }
            }
        }
    }
}
