//! Exact nearest-neighbor search.
//!
//! A static kd-tree with median splits. Results match a linear scan bit for bit,
//! including the tie rule (lowest index wins), because subtrees are only pruned
//! when they are strictly farther than the current best.

use super::cloud::PointCloud;
use super::pose::Vec3;
use crate::error::{Error, Result};

const LEAF_SIZE: usize = 8;

#[derive(Debug, Clone)]
enum Node {
    Leaf { start: usize, end: usize },
    Split { axis: usize, value: f64, left: Box<Node>, right: Box<Node> },
}

#[derive(Debug, Clone)]
pub struct KdTree {
    points: Vec<Vec3>,
    order: Vec<usize>,
    root: Node,
}

impl KdTree {
    pub fn new(points: &[Vec3]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyCloud);
        }
        let mut order: Vec<usize> = (0..points.len()).collect();
        let root = build(points, &mut order, 0, points.len());
        Ok(KdTree { points: points.to_vec(), order, root })
    }

    pub fn from_cloud(cloud: &PointCloud) -> Result<Self> {
        Self::new(&cloud.points)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index and Euclidean distance of the nearest point.
    pub fn nearest(&self, query: &Vec3) -> (usize, f64) {
        let mut best = (usize::MAX, f64::INFINITY);
        self.search(&self.root, query, &mut best);
        (best.0, best.1.sqrt())
    }

    fn search(&self, node: &Node, q: &Vec3, best: &mut (usize, f64)) {
        match node {
            Node::Leaf { start, end } => {
                for &i in &self.order[*start..*end] {
                    let d2 = (q - self.points[i]).norm_squared();
                    if d2 < best.1 || (d2 == best.1 && i < best.0) {
                        *best = (i, d2);
                    }
                }
            }
            Node::Split { axis, value, left, right } => {
                let diff = q[*axis] - value;
                let (near, far) = if diff <= 0.0 { (left, right) } else { (right, left) };
                self.search(near, q, best);
                if diff * diff <= best.1 {
                    self.search(far, q, best);
                }
            }
        }
    }
}

fn build(points: &[Vec3], order: &mut [usize], start: usize, end: usize) -> Node {
    if end - start <= LEAF_SIZE {
        return Node::Leaf { start, end };
    }
    let slice = &mut order[start..end];
    let (lo, hi) = slice.iter().fold(
        (Vec3::repeat(f64::INFINITY), Vec3::repeat(f64::NEG_INFINITY)),
        |(lo, hi), &i| (lo.inf(&points[i]), hi.sup(&points[i])),
    );
    let axis = (hi - lo).imax();
    let mid = slice.len() / 2;
    slice.select_nth_unstable_by(mid, |&a, &b| points[a][axis].total_cmp(&points[b][axis]));
    let value = points[slice[mid]][axis];
    // Left holds coordinates <= value, right holds >= value.
    let left = build(points, order, start, start + mid);
    let right = build(points, order, start + mid, end);
    Node::Split { axis, value, left: Box::new(left), right: Box::new(right) }
}

/// Exact nearest neighbor of `query` in `cloud`: `(index, distance)`.
pub fn nearest_neighbor(query: &Vec3, cloud: &PointCloud) -> Result<(usize, f64)> {
    if cloud.len() <= 64 {
        return brute_force_nearest(query, &cloud.points);
    }
    Ok(KdTree::from_cloud(cloud)?.nearest(query))
}

/// Linear scan with the same tie rule as [`KdTree::nearest`].
pub fn brute_force_nearest(query: &Vec3, points: &[Vec3]) -> Result<(usize, f64)> {
    let mut best = (usize::MAX, f64::INFINITY);
    for (i, p) in points.iter().enumerate() {
        let d2 = (query - p).norm_squared();
        if d2 < best.1 {
            best = (i, d2);
        }
    }
    if best.0 == usize::MAX {
        return Err(Error::EmptyCloud);
    }
    Ok((best.0, best.1.sqrt()))
}
