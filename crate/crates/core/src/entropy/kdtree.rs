//! Exact k-nearest-neighbour queries over a fixed point set.

use std::collections::BinaryHeap;

use ordered::Candidate;

const BUCKET_SIZE: usize = 16;

mod ordered {
    use std::cmp::Ordering;

    /// Heap entry ordered by `(squared distance, index)`.
    #[derive(Debug, Clone, Copy, PartialEq)]
    pub struct Candidate {
        pub dist2: f64,
        pub index: usize,
    }

    impl Eq for Candidate {}

    impl Ord for Candidate {
        fn cmp(&self, other: &Self) -> Ordering {
            self.dist2
                .total_cmp(&other.dist2)
                .then(self.index.cmp(&other.index))
        }
    }

    impl PartialOrd for Candidate {
        fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
            Some(self.cmp(other))
        }
    }
}

#[derive(Debug)]
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

/// Median-split kd-tree over row-major points.
#[derive(Debug)]
pub struct KdTree<'a> {
    points: &'a [f64],
    dim: usize,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl<'a> KdTree<'a> {
    /// `points` holds `n` rows of length `dim`.
    pub fn new(points: &'a [f64], dim: usize) -> Self {
        assert!(dim > 0 && points.len().is_multiple_of(dim));
        let n = points.len() / dim;
        let mut tree = Self {
            points,
            dim,
            order: (0..n).collect(),
            nodes: Vec::with_capacity(2 * n / BUCKET_SIZE + 1),
        };
        if n > 0 {
            tree.build(0, n);
        }
        tree
    }

    fn coord(&self, i: usize, axis: usize) -> f64 {
        self.points[i * self.dim + axis]
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= BUCKET_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        // Split on the axis of widest spread.
        let mut axis = 0;
        let mut widest = -1.0;
        for a in 0..self.dim {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &i in &self.order[start..end] {
                let x = self.coord(i, a);
                lo = lo.min(x);
                hi = hi.max(x);
            }
            if hi - lo > widest {
                widest = hi - lo;
                axis = a;
            }
        }
        if widest <= 0.0 {
            // All points coincide; no split can separate them.
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let mid = start + (end - start) / 2;
        let (points, dim) = (self.points, self.dim);
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            points[a * dim + axis].total_cmp(&points[b * dim + axis])
        });
        let value = self.coord(self.order[mid], axis);
        self.nodes.push(Node::Leaf { start: 0, end: 0 });
        let left = self.build(start, mid);
        let right = self.build(mid, end);
        self.nodes[id] = Node::Split {
            axis,
            value,
            left,
            right,
        };
        id
    }

    fn dist2(&self, a: usize, b: usize) -> f64 {
        let (pa, pb) = (
            &self.points[a * self.dim..(a + 1) * self.dim],
            &self.points[b * self.dim..(b + 1) * self.dim],
        );
        pa.iter().zip(pb).map(|(x, y)| (x - y) * (x - y)).sum()
    }

    /// The `k` nearest neighbours of point `query` (itself excluded), as
    /// `(distance, index)` sorted by distance then index.
    pub fn neighbours(&self, query: usize, k: usize) -> Vec<(f64, usize)> {
        let mut heap: BinaryHeap<Candidate> = BinaryHeap::with_capacity(k + 1);
        if !self.nodes.is_empty() && k > 0 {
            self.search(0, query, k, &mut heap);
        }
        let mut out: Vec<(f64, usize)> = heap
            .into_sorted_vec()
            .into_iter()
            .map(|c| (c.dist2.sqrt(), c.index))
            .collect();
        out.truncate(k);
        out
    }

    fn search(&self, node: usize, query: usize, k: usize, heap: &mut BinaryHeap<Candidate>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    if i == query {
                        continue;
                    }
                    let c = Candidate {
                        dist2: self.dist2(query, i),
                        index: i,
                    };
                    if heap.len() < k {
                        heap.push(c);
                    } else if c < *heap.peek().unwrap() {
                        heap.pop();
                        heap.push(c);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = self.coord(query, axis) - value;
                let (near, far) = if diff < 0.0 {
                    (left, right)
                } else {
                    (right, left)
                };
                self.search(near, query, k, heap);
                // Points equal to the split value may sit on either side.
                if heap.len() < k || diff * diff <= heap.peek().unwrap().dist2 {
                    self.search(far, query, k, heap);
                }
            }
        }
    }

    /// Distance to the k-th nearest neighbour of `query`.
    pub fn kth_distance(&self, query: usize, k: usize) -> f64 {
        self.neighbours(query, k)
            .last()
            .map_or(f64::INFINITY, |c| c.0)
    }
}

/// Exhaustive scan with the same ordering rules as [`KdTree::neighbours`].
pub fn brute_force_neighbours(
    points: &[f64],
    dim: usize,
    query: usize,
    k: usize,
) -> Vec<(f64, usize)> {
    let n = points.len() / dim;
    let q = &points[query * dim..(query + 1) * dim];
    let mut all: Vec<Candidate> = (0..n)
        .filter(|&i| i != query)
        .map(|i| Candidate {
            dist2: points[i * dim..(i + 1) * dim]
                .iter()
                .zip(q)
                .map(|(x, y)| (x - y) * (x - y))
                .sum(),
            index: i,
        })
        .collect();
    all.sort();
    all.truncate(k);
    all.into_iter().map(|c| (c.dist2.sqrt(), c.index)).collect()
}
