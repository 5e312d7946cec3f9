//! Merge-sort tree over weighted points on a grid: rectangle enumeration,
//! weighted sums and minima.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Point {
    pub x: usize,
    pub y: usize,
    pub w: i64,
}

#[derive(Clone, Debug)]
struct Node {
    /// Point indices sorted by y.
    ids: Vec<u32>,
    ys: Vec<usize>,
    prefix: Vec<i64>,
    /// Sparse table of minima, level t covers windows of 2^t.
    mins: Vec<Vec<i64>>,
}

impl Node {
    fn new(ids: Vec<u32>, points: &[Point]) -> Node {
        let ys = ids.iter().map(|&i| points[i as usize].y).collect();
        let ws: Vec<i64> = ids.iter().map(|&i| points[i as usize].w).collect();
        let mut prefix = Vec::with_capacity(ws.len() + 1);
        prefix.push(0);
        for &w in &ws {
            prefix.push(prefix.last().unwrap() + w);
        }
        let mut mins = vec![ws];
        let mut span = 1;
        while 2 * span <= mins[0].len() {
            let prev = mins.last().unwrap();
            let next = (0..prev.len() - span).map(|i| prev[i].min(prev[i + span])).collect();
            mins.push(next);
            span *= 2;
        }
        Node { ids, ys, prefix, mins }
    }

    fn y_range(&self, y_lo: usize, y_hi: usize) -> (usize, usize) {
        (self.ys.partition_point(|&y| y < y_lo), self.ys.partition_point(|&y| y < y_hi))
    }

    fn min(&self, lo: usize, hi: usize) -> i64 {
        let t = (hi - lo).ilog2() as usize;
        self.mins[t][lo].min(self.mins[t][hi - (1 << t)])
    }
}

/// Static structure over points with x-coordinates in `[0..width)`.
#[derive(Clone, Debug)]
pub struct MergeSortTree {
    points: Vec<Point>,
    width: usize,
    nodes: Vec<Node>,
}

impl MergeSortTree {
    pub fn new(points: Vec<Point>) -> MergeSortTree {
        let width = points.iter().map(|p| p.x + 1).max().unwrap_or(0).next_power_of_two();
        let mut buckets = vec![Vec::new(); width];
        for (i, p) in points.iter().enumerate() {
            buckets[p.x].push(i as u32);
        }
        let mut lists: Vec<Vec<u32>> = vec![Vec::new(); 2 * width];
        for (x, mut b) in buckets.into_iter().enumerate() {
            b.sort_by_key(|&i| points[i as usize].y);
            lists[width + x] = b;
        }
        for v in (1..width).rev() {
            let (l, r) = (&lists[2 * v], &lists[2 * v + 1]);
            let mut merged = Vec::with_capacity(l.len() + r.len());
            let (mut i, mut j) = (0, 0);
            while i < l.len() || j < r.len() {
                let take_left = j == r.len() || (i < l.len() && points[l[i] as usize].y <= points[r[j] as usize].y);
                if take_left {
                    merged.push(l[i]);
                    i += 1;
                } else {
                    merged.push(r[j]);
                    j += 1;
                }
            }
            lists[v] = merged;
        }
        let nodes = lists.into_iter().map(|ids| Node::new(ids, &points)).collect();
        MergeSortTree { points, width, nodes }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Canonical nodes covering `[x_lo..x_hi)`.
    fn cover(&self, x_lo: usize, x_hi: usize) -> Vec<usize> {
        let mut out = Vec::new();
        if self.width == 0 {
            return out;
        }
        let (mut lo, mut hi) = (x_lo.min(self.width) + self.width, x_hi.min(self.width) + self.width);
        while lo < hi {
            if lo & 1 == 1 {
                out.push(lo);
                lo += 1;
            }
            if hi & 1 == 1 {
                hi -= 1;
                out.push(hi);
            }
            lo >>= 1;
            hi >>= 1;
        }
        out
    }

    /// Indices of points in `[x_lo..x_hi) × [y_lo..y_hi)`.
    pub fn enumerate(&self, x_lo: usize, x_hi: usize, y_lo: usize, y_hi: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for v in self.cover(x_lo, x_hi) {
            let node = &self.nodes[v];
            let (a, b) = node.y_range(y_lo, y_hi);
            out.extend(node.ids[a..b].iter().map(|&i| i as usize));
        }
        out
    }

    pub fn sum(&self, x_lo: usize, x_hi: usize, y_lo: usize, y_hi: usize) -> i64 {
        self.cover(x_lo, x_hi)
            .into_iter()
            .map(|v| {
                let node = &self.nodes[v];
                let (a, b) = node.y_range(y_lo, y_hi);
                node.prefix[b] - node.prefix[a]
            })
            .sum()
    }

    pub fn count(&self, x_lo: usize, x_hi: usize, y_lo: usize, y_hi: usize) -> usize {
        self.cover(x_lo, x_hi)
            .into_iter()
            .map(|v| {
                let (a, b) = self.nodes[v].y_range(y_lo, y_hi);
                b - a
            })
            .sum()
    }

    pub fn min(&self, x_lo: usize, x_hi: usize, y_lo: usize, y_hi: usize) -> Option<i64> {
        self.cover(x_lo, x_hi)
            .into_iter()
            .filter_map(|v| {
                let node = &self.nodes[v];
                let (a, b) = node.y_range(y_lo, y_hi);
                (a < b).then(|| node.min(a, b))
            })
            .min()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_tree() {
        let t = MergeSortTree::new(vec![]);
        assert!(t.enumerate(0, 10, 0, 10).is_empty());
        assert_eq!(t.sum(0, 10, 0, 10), 0);
        assert_eq!(t.min(0, 10, 0, 10), None);
    }

    proptest! {
        #[test]
        fn matches_brute_force(
            pts in proptest::collection::vec((0usize..40, 0usize..40, -50i64..50), 0..120),
            q in (0usize..45, 0usize..45, 0usize..45, 0usize..45),
        ) {
            let points: Vec<Point> = pts.iter().map(|&(x, y, w)| Point { x, y, w }).collect();
            let t = MergeSortTree::new(points.clone());
            let (x_lo, x_hi) = (q.0.min(q.1), q.0.max(q.1));
            let (y_lo, y_hi) = (q.2.min(q.3), q.2.max(q.3));
            let inside: Vec<usize> = (0..points.len())
                .filter(|&i| (x_lo..x_hi).contains(&points[i].x) && (y_lo..y_hi).contains(&points[i].y))
                .collect();
            let mut got = t.enumerate(x_lo, x_hi, y_lo, y_hi);
            got.sort_unstable();
            prop_assert_eq!(&got, &inside);
            prop_assert_eq!(t.sum(x_lo, x_hi, y_lo, y_hi), inside.iter().map(|&i| points[i].w).sum::<i64>());
            prop_assert_eq!(t.min(x_lo, x_hi, y_lo, y_hi), inside.iter().map(|&i| points[i].w).min());
            prop_assert_eq!(t.count(x_lo, x_hi, y_lo, y_hi), inside.len());
        }
    }
}
