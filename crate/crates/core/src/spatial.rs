//! Static 2D KD-tree for fixed-radius neighbor queries.
//!
//! The tree is an implicit median-split layout over an index permutation,
//! rebuilt from scratch whenever positions change.

use alloc::vec::Vec;

use crate::geom::Vec2;

#[derive(Debug, Clone)]
pub struct KdTree {
    points: Vec<Vec2>,
    order: Vec<usize>,
}

#[inline]
fn coord(p: Vec2, axis: usize) -> f64 {
    if axis == 0 {
        p.x
    } else {
        p.y
    }
}

fn build(points: &[Vec2], order: &mut [usize], axis: usize) {
    if order.len() <= 1 {
        return;
    }
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |&a, &b| {
        coord(points[a], axis)
            .total_cmp(&coord(points[b], axis))
            .then(a.cmp(&b))
    });
    let (left, right) = order.split_at_mut(mid);
    build(points, left, 1 - axis);
    build(points, &mut right[1..], 1 - axis);
}

impl KdTree {
    pub fn new(points: Vec<Vec2>) -> Self {
        let mut order: Vec<usize> = (0..points.len()).collect();
        build(&points, &mut order, 0);
        KdTree { points, order }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Indices of all points within distance `radius` of `center`
    /// (closed ball), in ascending index order.
    pub fn within(&self, center: Vec2, radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.visit(&self.order, 0, center, radius, &mut out);
        out.sort_unstable();
        out
    }

    fn visit(&self, order: &[usize], axis: usize, center: Vec2, radius: f64, out: &mut Vec<usize>) {
        if order.is_empty() {
            return;
        }
        let mid = order.len() / 2;
        let node = order[mid];
        let p = self.points[node];
        if (p - center).norm() <= radius {
            out.push(node);
        }
        let diff = coord(center, axis) - coord(p, axis);
        let (near, far) = if diff < 0.0 {
            (&order[..mid], &order[mid + 1..])
        } else {
            (&order[mid + 1..], &order[..mid])
        };
        self.visit(near, 1 - axis, center, radius, out);
        if diff.abs() <= radius {
            self.visit(far, 1 - axis, center, radius, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(points: &[Vec2], c: Vec2, r: f64) -> Vec<usize> {
        (0..points.len()).filter(|&i| (points[i] - c).norm() <= r).collect()
    }

    #[test]
    fn empty_and_single() {
        let t = KdTree::new(Vec::new());
        assert!(t.within(Vec2::ZERO, 10.0).is_empty());
        let t = KdTree::new(alloc::vec![Vec2::new(1.0, 1.0)]);
        assert_eq!(t.within(Vec2::ZERO, 10.0), alloc::vec![0]);
    }

    #[test]
    fn boundary_is_closed() {
        let pts = alloc::vec![Vec2::ZERO, Vec2::new(25.0, 0.0), Vec2::new(0.0, 25.000001)];
        let t = KdTree::new(pts);
        assert_eq!(t.within(Vec2::ZERO, 25.0), alloc::vec![0, 1]);
    }

    #[test]
    fn three_in_two_out() {
        let pts = alloc::vec![
            Vec2::ZERO,
            Vec2::new(10.0, 0.0),
            Vec2::new(-5.0, 20.0),
            Vec2::new(0.0, -24.0),
            Vec2::new(30.0, 0.0),
            Vec2::new(-20.0, -20.0),
        ];
        let t = KdTree::new(pts.clone());
        let got = t.within(Vec2::ZERO, 25.0);
        assert_eq!(got, brute(&pts, Vec2::ZERO, 25.0));
        assert_eq!(got.len(), 4); // the querier itself plus three
    }

    proptest! {
        #[test]
        fn matches_brute_force(
            raw in proptest::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 0..80),
            cx in -100.0f64..100.0, cy in -100.0f64..100.0, r in 0.0f64..60.0,
        ) {
            let pts: Vec<Vec2> = raw.into_iter().map(|(x, y)| Vec2::new(x, y)).collect();
            let t = KdTree::new(pts.clone());
            let c = Vec2::new(cx, cy);
            prop_assert_eq!(t.within(c, r), brute(&pts, c, r));
        }
    }
}
