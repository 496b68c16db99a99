//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use dendrite_core::dendrite::{DPoint, Dendrite, VertexId};
use dendrite_core::MetricSpace;
use rand::Rng;

/// Random Euclidean space from i.i.d. coordinates in `[0, 1)^dim`.
pub fn random_euclidean<R: Rng>(rng: &mut R, n: usize, dim: usize) -> MetricSpace {
    let pts: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| rng.random::<f64>()).collect()).collect();
    let labels = (0..n).map(|i| format!("x{i}")).collect();
    MetricSpace::from_fn(labels, |i, j| {
        pts[i].iter().zip(&pts[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    })
    .expect("euclidean distances form a metric")
}

/// Connected components of the graph `{d ≤ θ}` by flood fill.
pub fn threshold_components(space: &MetricSpace, theta: f64) -> Vec<Vec<usize>> {
    let n = space.len();
    let mut seen = vec![false; n];
    let mut blocks = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut block = vec![start];
        let mut k = 0;
        while k < block.len() {
            let u = block[k];
            for v in 0..n {
                if !seen[v] && space.distance(u, v) <= theta {
                    seen[v] = true;
                    block.push(v);
                }
            }
            k += 1;
        }
        block.sort_unstable();
        blocks.push(block);
    }
    blocks
}

/// Every set that is a θ-cell for θ ∈ {0} ∪ {pairwise distances}.
pub fn oracle_cells(space: &MetricSpace) -> BTreeSet<Vec<usize>> {
    let n = space.len();
    let mut thetas = vec![0.0];
    for i in 0..n {
        for j in i + 1..n {
            thetas.push(space.distance(i, j));
        }
    }
    thetas.sort_by(f64::total_cmp);
    thetas.dedup();
    thetas.into_iter().flat_map(|t| threshold_components(space, t)).collect()
}

/// Hausdorff distance written as two explicit sup-inf loops.
pub fn oracle_hausdorff(space: &MetricSpace, a: &[usize], b: &[usize]) -> f64 {
    let mut h: f64 = 0.0;
    for &x in a {
        let mut m = f64::INFINITY;
        for &y in b {
            m = m.min(space.distance(x, y));
        }
        h = h.max(m);
    }
    for &y in b {
        let mut m = f64::INFINITY;
        for &x in a {
            m = m.min(space.distance(x, y));
        }
        h = h.max(m);
    }
    h
}

/// `T_n` by direct summation.
pub fn oracle_top(n: u32) -> u64 {
    (1..=n as u64).map(|i| i + 10u64.pow(i as u32)).sum::<u64>() - 1
}

/// Tree-path length between two vertices, by Dijkstra over the edge list.
pub fn tree_path_length(d: &Dendrite, u: VertexId, v: VertexId) -> f64 {
    let n = d.vertex_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    dist[u] = 0.0;
    for _ in 0..n {
        let Some(x) = (0..n).filter(|&x| !done[x]).min_by(|&a, &b| dist[a].total_cmp(&dist[b])) else {
            break;
        };
        done[x] = true;
        for e in d.edges() {
            let other = if e.parent == x {
                e.child
            } else if e.child == x {
                e.parent
            } else {
                continue;
            };
            dist[other] = dist[other].min(dist[x] + e.length);
        }
    }
    dist[v]
}

/// Tree-path length from a vertex to any point of the dendrite.
pub fn tree_distance_to_point(d: &Dendrite, u: VertexId, p: DPoint) -> f64 {
    match d.normalize(p) {
        DPoint::Vertex(v) => tree_path_length(d, u, v),
        DPoint::Edge { edge, t } => {
            let e = d.edge(edge);
            (tree_path_length(d, u, e.parent) + t * e.length).min(tree_path_length(d, u, e.child) + (1.0 - t) * e.length)
        }
    }
}

/// Points of the hull of the interior vertices (no leaf edges).
pub fn sample_interior_point<R: Rng>(d: &Dendrite, rng: &mut R) -> DPoint {
    let interior_edges: Vec<usize> = (0..d.edge_count()).filter(|&e| !d.is_leaf(d.edge(e).child)).collect();
    let interior_vertices: Vec<usize> = (0..d.vertex_count()).filter(|&v| !d.is_leaf(v)).collect();
    if interior_edges.is_empty() || rng.random_range(0..4) == 0 {
        DPoint::Vertex(interior_vertices[rng.random_range(0..interior_vertices.len())])
    } else {
        let e = interior_edges[rng.random_range(0..interior_edges.len())];
        d.point_on_edge(e, rng.random::<f64>())
    }
}

/// `d_Ω` on plain integers, bit `i` of the integer being symbol `i`.
pub fn oracle_d_omega(a: u128, b: u128) -> f64 {
    if a == b {
        0.0
    } else {
        0.5f64.powi((a ^ b).trailing_zeros() as i32)
    }
}
