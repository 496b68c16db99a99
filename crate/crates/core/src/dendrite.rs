//! The dendrite `Y` over a cell hierarchy and its metric ρ.
//!
//! Vertices are cells, and each parent/child pair is joined by an edge that
//! is an isometric copy of `[0, H(parent, child)]`. Distances between
//! vertices are Hausdorff distances of the underlying cells, *not* tree-path
//! lengths; points inside edges reach the rest of the space through the
//! nearer of the two edge endpoints.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::Rng;

use crate::cells::{CellHierarchy, CellId};
use crate::spaces::{self, MetricSpace};

pub type VertexId = CellId;
pub type EdgeId = usize;

/// Absolute tolerance used by [`verify_dendrite`] for the triangle inequality
/// and the endpoint isometry.
pub const VERIFY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DendriteError {
    #[error("cannot build a dendrite over an empty space")]
    DegenerateSpace,
    #[error("hierarchy has {hierarchy} points but the space has {space}")]
    HierarchyMismatch { hierarchy: usize, space: usize },
    #[error("vertex {0} is malformed: {1}")]
    BadVertex(VertexId, String),
    #[error("edge {0} is malformed: {1}")]
    BadEdge(EdgeId, String),
    #[error("skeleton is not a tree rooted at {0}")]
    NotATree(VertexId),
    #[error("edge {edge} has length {stored} but the cells are at Hausdorff distance {computed}")]
    EdgeLength { edge: EdgeId, stored: f64, computed: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub parent: VertexId,
    pub child: VertexId,
    pub length: f64,
}

/// A point of the dendrite.
///
/// `Edge { edge, t }` is the point `(parent, child, t)`; `t` runs from the
/// parent (0) to the child (1). Use [`Dendrite::point_on_edge`] or
/// [`Dendrite::normalize`] to fold the boundary values into vertices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DPoint {
    Vertex(VertexId),
    Edge { edge: EdgeId, t: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dendrite {
    space: MetricSpace,
    members: Vec<Vec<usize>>,
    parent: Vec<Option<VertexId>>,
    children: Vec<Vec<VertexId>>,
    parent_edge: Vec<Option<EdgeId>>,
    depth: Vec<usize>,
    edges: Vec<Edge>,
    root: VertexId,
    leaf_of_point: Vec<VertexId>,
}

/// Builds the dendrite: one vertex per cell, one edge per parent/child pair
/// with length `H(parent, child)`. Edge ids follow child cell ids.
pub fn build_dendrite(hierarchy: &CellHierarchy, space: &MetricSpace) -> Result<Dendrite, DendriteError> {
    if space.is_empty() {
        return Err(DendriteError::DegenerateSpace);
    }
    if hierarchy.point_count() != space.len() {
        return Err(DendriteError::HierarchyMismatch {
            hierarchy: hierarchy.point_count(),
            space: space.len(),
        });
    }
    let members: Vec<Vec<usize>> = hierarchy.cells().iter().map(|c| c.members.clone()).collect();
    let edges = hierarchy
        .cells()
        .iter()
        .enumerate()
        .filter_map(|(id, c)| {
            c.parent.map(|p| Edge {
                parent: p,
                child: id,
                length: spaces::hausdorff(space, &members[p], &members[id]),
            })
        })
        .collect();
    Dendrite::assemble(space.clone(), members, edges, hierarchy.root())
}

impl Dendrite {
    /// Rebuilds a dendrite from its serialized parts, checking the tree
    /// structure and that each stored length matches the Hausdorff distance of
    /// its cells (relative tolerance `1e-9`).
    pub fn from_parts(
        space: MetricSpace,
        members: Vec<Vec<usize>>,
        edges: Vec<Edge>,
        root: VertexId,
    ) -> Result<Dendrite, DendriteError> {
        let d = Self::assemble(space, members, edges, root)?;
        for (id, e) in d.edges.iter().enumerate() {
            let computed = d.vertex_distance(e.parent, e.child);
            if (computed - e.length).abs() > spaces::REL_TOL * computed.max(e.length) {
                return Err(DendriteError::EdgeLength {
                    edge: id,
                    stored: e.length,
                    computed,
                });
            }
        }
        Ok(d)
    }

    fn assemble(
        space: MetricSpace,
        mut members: Vec<Vec<usize>>,
        edges: Vec<Edge>,
        root: VertexId,
    ) -> Result<Dendrite, DendriteError> {
        let n = space.len();
        let v = members.len();
        if n == 0 {
            return Err(DendriteError::DegenerateSpace);
        }
        if root >= v {
            return Err(DendriteError::NotATree(root));
        }
        for (id, m) in members.iter_mut().enumerate() {
            m.sort_unstable();
            m.dedup();
            if m.is_empty() || m.iter().any(|&p| p >= n) {
                return Err(DendriteError::BadVertex(id, String::from("empty or out-of-range members")));
            }
        }
        let mut parent = alloc::vec![None; v];
        let mut parent_edge = alloc::vec![None; v];
        let mut children = alloc::vec![Vec::new(); v];
        for (id, e) in edges.iter().enumerate() {
            if e.parent >= v || e.child >= v || e.parent == e.child {
                return Err(DendriteError::BadEdge(id, String::from("endpoint out of range")));
            }
            if !e.length.is_finite() || e.length <= 0.0 {
                return Err(DendriteError::BadEdge(id, String::from("length must be positive")));
            }
            if parent[e.child].is_some() || e.child == root {
                return Err(DendriteError::NotATree(root));
            }
            let (pm, cm) = (&members[e.parent], &members[e.child]);
            if cm.len() >= pm.len() || cm.iter().any(|x| pm.binary_search(x).is_err()) {
                return Err(DendriteError::BadEdge(id, String::from("child is not a proper subcell")));
            }
            parent[e.child] = Some(e.parent);
            parent_edge[e.child] = Some(id);
            children[e.parent].push(e.child);
        }
        if edges.len() + 1 != v {
            return Err(DendriteError::NotATree(root));
        }
        // depth via BFS from the root also proves connectivity
        let mut depth = alloc::vec![usize::MAX; v];
        depth[root] = 0;
        let mut queue = alloc::collections::VecDeque::from([root]);
        let mut seen = 1;
        while let Some(u) = queue.pop_front() {
            for &c in &children[u] {
                if depth[c] == usize::MAX {
                    depth[c] = depth[u] + 1;
                    seen += 1;
                    queue.push_back(c);
                }
            }
        }
        if seen != v {
            return Err(DendriteError::NotATree(root));
        }
        let mut leaf_of_point = alloc::vec![usize::MAX; n];
        for id in 0..v {
            let is_leaf = children[id].is_empty();
            if is_leaf != (members[id].len() == 1) {
                return Err(DendriteError::BadVertex(
                    id,
                    String::from("leaves must be exactly the singleton cells"),
                ));
            }
            if is_leaf {
                let p = members[id][0];
                if leaf_of_point[p] != usize::MAX {
                    return Err(DendriteError::BadVertex(id, String::from("duplicate singleton")));
                }
                leaf_of_point[p] = id;
            } else if children[id].len() < 2 {
                return Err(DendriteError::BadVertex(id, String::from("fewer than two children")));
            }
        }
        if leaf_of_point.contains(&usize::MAX) {
            return Err(DendriteError::BadVertex(root, String::from("some point has no leaf")));
        }
        Ok(Dendrite {
            space,
            members,
            parent,
            children,
            parent_edge,
            depth,
            edges,
            root,
            leaf_of_point,
        })
    }

    pub fn space(&self) -> &MetricSpace {
        &self.space
    }

    pub fn vertex_count(&self) -> usize {
        self.members.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e]
    }

    pub fn members(&self, v: VertexId) -> &[usize] {
        &self.members[v]
    }

    pub fn root(&self) -> VertexId {
        self.root
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        self.parent[v]
    }

    pub fn children(&self, v: VertexId) -> &[VertexId] {
        &self.children[v]
    }

    /// Edge joining `v` to its parent.
    pub fn parent_edge(&self, v: VertexId) -> Option<EdgeId> {
        self.parent_edge[v]
    }

    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.parent[v].into_iter().chain(self.children[v].iter().copied())
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.children[v].len() + usize::from(self.parent[v].is_some())
    }

    /// Leaves are exactly the singleton cells.
    pub fn is_leaf(&self, v: VertexId) -> bool {
        self.children[v].is_empty()
    }

    pub fn leaves(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.vertex_count()).filter(move |&v| self.is_leaf(v))
    }

    /// The endpoint embedding `x ↦ {x}`.
    pub fn leaf_of_point(&self, x: usize) -> VertexId {
        self.leaf_of_point[x]
    }

    pub fn point_of_leaf(&self, v: VertexId) -> Option<usize> {
        self.is_leaf(v).then(|| self.members[v][0])
    }

    /// `(A, B, t)` with boundary values folded into the endpoint vertices.
    pub fn point_on_edge(&self, edge: EdgeId, t: f64) -> DPoint {
        let e = &self.edges[edge];
        if t <= 0.0 {
            DPoint::Vertex(e.parent)
        } else if t >= 1.0 {
            DPoint::Vertex(e.child)
        } else {
            DPoint::Edge { edge, t }
        }
    }

    pub fn normalize(&self, p: DPoint) -> DPoint {
        match p {
            DPoint::Edge { edge, t } => self.point_on_edge(edge, t),
            v => v,
        }
    }

    /// `ρ` between two skeleton vertices: the Hausdorff distance of the cells.
    pub fn vertex_distance(&self, u: VertexId, v: VertexId) -> f64 {
        if u == v {
            return 0.0;
        }
        spaces::hausdorff(&self.space, &self.members[u], &self.members[v])
    }

    fn legs(&self, edge: EdgeId, t: f64) -> [(VertexId, f64); 2] {
        let e = &self.edges[edge];
        [(e.parent, t * e.length), (e.child, (1.0 - t) * e.length)]
    }

    /// The metric ρ on `Y`.
    pub fn rho(&self, a: DPoint, b: DPoint) -> f64 {
        let (a, b) = (self.normalize(a), self.normalize(b));
        // evaluate in a canonical argument order so ρ is exactly symmetric
        let (a, b) = if point_order(&a, &b) == Ordering::Greater { (b, a) } else { (a, b) };
        match (a, b) {
            (DPoint::Vertex(u), DPoint::Vertex(v)) => self.vertex_distance(u, v),
            (DPoint::Vertex(v), DPoint::Edge { edge, t }) | (DPoint::Edge { edge, t }, DPoint::Vertex(v)) => self
                .legs(edge, t)
                .iter()
                .map(|&(end, leg)| leg + self.vertex_distance(end, v))
                .fold(f64::INFINITY, f64::min),
            (DPoint::Edge { edge: e, t: s }, DPoint::Edge { edge: f, t }) if e == f => {
                (s - t).abs() * self.edges[e].length
            }
            (DPoint::Edge { edge: e, t: s }, DPoint::Edge { edge: f, t }) => {
                let mut best = f64::INFINITY;
                for (a_end, a_leg) in self.legs(e, s) {
                    for (b_end, b_leg) in self.legs(f, t) {
                        best = best.min(a_leg + self.vertex_distance(a_end, b_end) + b_leg);
                    }
                }
                best
            }
        }
    }

    /// Edges walked from `u` to `v` along the tree, as `(edge, towards_child)`.
    pub fn path(&self, u: VertexId, v: VertexId) -> Vec<(EdgeId, bool)> {
        let (mut a, mut b) = (u, v);
        let mut up = Vec::new();
        let mut down = Vec::new();
        while a != b {
            if self.depth[a] >= self.depth[b] {
                up.push((self.parent_edge[a].expect("non-root"), false));
                a = self.parent[a].expect("non-root");
            } else {
                down.push((self.parent_edge[b].expect("non-root"), true));
                b = self.parent[b].expect("non-root");
            }
        }
        up.extend(down.into_iter().rev());
        up
    }

    /// Total edge length of [`Dendrite::path`].
    pub fn path_length(&self, u: VertexId, v: VertexId) -> f64 {
        self.path(u, v).iter().map(|&(e, _)| self.edges[e].length).sum()
    }

    /// A random point: a vertex with probability 1/4, otherwise a uniform
    /// parameter on a uniformly chosen edge.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> DPoint {
        if self.edges.is_empty() || rng.random_range(0..4) == 0 {
            DPoint::Vertex(rng.random_range(0..self.vertex_count()))
        } else {
            let edge = rng.random_range(0..self.edges.len());
            self.point_on_edge(edge, rng.random::<f64>())
        }
    }
}

fn point_order(a: &DPoint, b: &DPoint) -> Ordering {
    let key = |p: &DPoint| match *p {
        DPoint::Vertex(v) => (0usize, v, 0.0),
        DPoint::Edge { edge, t } => (1, edge, t),
    };
    let (ka, kb) = (key(a), key(b));
    ka.0.cmp(&kb.0)
        .then(ka.1.cmp(&kb.1))
        .then(ka.2.total_cmp(&kb.2))
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    /// `max |ρ(i(x), i(x')) − d(x, x')|` over all point pairs.
    pub isometry_error: f64,
    pub triples_checked: usize,
    pub triangle_violations: usize,
    /// Sampled pairs where `ρ(a, b)` and `ρ(b, a)` differ in any bit.
    pub symmetry_violations: usize,
    pub leaves_are_singletons: bool,
    /// Connected, acyclic, `|E| = |V| − 1`, root degree ≥ 2 (when it has
    /// children), other internal vertices degree ≥ 3, positive lengths.
    pub is_tree: bool,
    pub space_matches: bool,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.space_matches
            && self.isometry_error <= VERIFY_TOL
            && self.triangle_violations == 0
            && self.symmetry_violations == 0
            && self.leaves_are_singletons
            && self.is_tree
    }
}

/// Checks the endpoint isometry, sampled metric axioms and the tree shape.
pub fn verify_dendrite<R: Rng + ?Sized>(
    dendrite: &Dendrite,
    space: &MetricSpace,
    triple_samples: usize,
    rng: &mut R,
) -> VerifyReport {
    let space_matches = space.labels() == dendrite.space.labels();
    let n = space.len().min(dendrite.space.len());
    let mut isometry_error = if space_matches { 0.0f64 } else { f64::INFINITY };
    for x in 0..n {
        for y in x + 1..n {
            let r = dendrite.rho(
                DPoint::Vertex(dendrite.leaf_of_point(x)),
                DPoint::Vertex(dendrite.leaf_of_point(y)),
            );
            isometry_error = isometry_error.max((r - space.distance(x, y)).abs());
        }
    }

    let mut triangle_violations = 0;
    let mut symmetry_violations = 0;
    for _ in 0..triple_samples {
        let [a, b, c] = [(); 3].map(|_| dendrite.sample_point(rng));
        let (ab, bc, ac) = (dendrite.rho(a, b), dendrite.rho(b, c), dendrite.rho(a, c));
        if ac > ab + bc + VERIFY_TOL {
            triangle_violations += 1;
        }
        if dendrite.rho(b, a).to_bits() != ab.to_bits() {
            symmetry_violations += 1;
        }
    }

    let leaves_are_singletons = (0..dendrite.vertex_count())
        .all(|v| dendrite.is_leaf(v) == (dendrite.members(v).len() == 1))
        && dendrite.leaves().count() == dendrite.space.len();

    let v = dendrite.vertex_count();
    let mut seen = alloc::vec![false; v];
    let mut stack = alloc::vec![dendrite.root];
    let mut visited = 0;
    let mut acyclic = true;
    while let Some(u) = stack.pop() {
        if seen[u] {
            acyclic = false;
            continue;
        }
        seen[u] = true;
        visited += 1;
        stack.extend(dendrite.children(u));
    }
    let degrees_ok = (0..v).all(|u| {
        if dendrite.is_leaf(u) {
            true
        } else if u == dendrite.root {
            dendrite.degree(u) >= 2
        } else {
            dendrite.degree(u) >= 3
        }
    });
    let lengths_ok = dendrite.edges.iter().all(|e| e.length > 0.0);
    let is_tree = acyclic && visited == v && dendrite.edge_count() + 1 == v && degrees_ok && lengths_ok;

    VerifyReport {
        isometry_error,
        triples_checked: triple_samples,
        triangle_violations,
        symmetry_violations,
        leaves_are_singletons,
        is_tree,
        space_matches,
    }
}
