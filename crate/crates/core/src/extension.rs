//! Filtrations of the skeleton and the extension of endpoint maps.
//!
//! The interior vertices are enumerated breadth-first from a chosen root
//! `p₀`, so `T_i` (the subtree on `p₀..p_i`) grows by one arc `α_i` at a
//! time. An endpoint map `f` extends to `F` with `F(p_i) = q_i ∈ T_{i−1}`,
//! which makes every interior point eventually fixed at `p₀`.
//!
//! Leaf edges lie outside every `T_i`. Each one is cut at the ladder
//! `t = 1 − 2^{−k}`: the half nearest the tree maps onto the path from
//! `F(parent)` to the vertex next to `f(e)`, and the outer half is stretched
//! over `f(e)`'s own leaf edge. Points there climb one rung toward the tree
//! per step and then fall into it.

use alloc::vec::Vec;

use crate::cells::build_cell_hierarchy;
use crate::dendrite::{build_dendrite, DPoint, Dendrite, DendriteError, EdgeId, VertexId};
use crate::spaces::{MetricSpace, SpaceError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExtensionError {
    #[error("filtration root {0} is a leaf")]
    RootIsLeaf(VertexId),
    #[error("vertex {0} does not exist")]
    BadVertex(VertexId),
    #[error("a dendrite with {0} vertices has no interior to extend over")]
    TooFewVertices(usize),
    #[error("f({point}) = {image} is not an endpoint")]
    NotEndpointMap { point: usize, image: usize },
    #[error("endpoint map has {got} entries, expected {expected}")]
    MapLength { got: usize, expected: usize },
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Dendrite(#[from] DendriteError),
}

/// The smallest piece of the filtration containing a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Endpoint,
    /// Lies in `T_i` but not in `T_{i−1}`.
    Tree(usize),
    /// On a leaf edge between rungs `1 − 2^{−level}` and `1 − 2^{−level−1}`.
    Ladder { level: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Filtration {
    root: VertexId,
    order: Vec<VertexId>,
    position: Vec<Option<usize>>,
    link: Vec<usize>,
    arcs: Vec<Option<EdgeId>>,
    tree_parent: Vec<Option<VertexId>>,
}

pub fn build_filtration(dendrite: &Dendrite, root: VertexId) -> Result<Filtration, ExtensionError> {
    let v = dendrite.vertex_count();
    if v < 2 {
        return Err(ExtensionError::TooFewVertices(v));
    }
    if root >= v {
        return Err(ExtensionError::BadVertex(root));
    }
    if dendrite.is_leaf(root) {
        return Err(ExtensionError::RootIsLeaf(root));
    }
    let mut position = alloc::vec![None; v];
    let mut tree_parent = alloc::vec![None; v];
    let mut order = alloc::vec![root];
    let mut link = alloc::vec![0];
    let mut arcs = alloc::vec![None];
    position[root] = Some(0);
    let mut head = 0;
    while head < order.len() {
        let u = order[head];
        for w in dendrite.neighbors(u) {
            if position[w].is_some() || Some(w) == tree_parent[u] {
                continue;
            }
            tree_parent[w] = Some(u);
            if dendrite.is_leaf(w) {
                continue;
            }
            position[w] = Some(order.len());
            order.push(w);
            link.push(head);
            let edge = if dendrite.parent(w) == Some(u) {
                dendrite.parent_edge(w)
            } else {
                dendrite.parent_edge(u)
            };
            arcs.push(edge);
        }
        head += 1;
    }
    Ok(Filtration {
        root,
        order,
        position,
        link,
        arcs,
        tree_parent,
    })
}

impl Filtration {
    pub fn root(&self) -> VertexId {
        self.root
    }

    /// `p₀, p₁, …` in enumeration order.
    pub fn order(&self) -> &[VertexId] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Index `i` with `p_i = v`, or `None` for leaves.
    pub fn position(&self, v: VertexId) -> Option<usize> {
        self.position[v]
    }

    /// `j(i)`: the index of the vertex `α_i` attaches to. `link(0) = 0`.
    pub fn link(&self, i: usize) -> usize {
        self.link[i]
    }

    /// The skeleton edge forming `α_i` (`None` for `i = 0`).
    pub fn arc(&self, i: usize) -> Option<EdgeId> {
        self.arcs[i]
    }

    /// Neighbor one step closer to the root.
    pub fn tree_parent(&self, v: VertexId) -> Option<VertexId> {
        self.tree_parent[v]
    }

    /// `r_{i}(v)` for a skeleton vertex: the first vertex of `T_i` met on the
    /// way from `v` to the root.
    pub fn retract(&self, v: VertexId, i: usize) -> VertexId {
        let mut u = v;
        while !matches!(self.position[u], Some(p) if p <= i) {
            u = self.tree_parent[u].expect("walk reaches the root");
        }
        u
    }

    pub fn stage_of(&self, dendrite: &Dendrite, x: DPoint) -> Stage {
        match dendrite.normalize(x) {
            DPoint::Vertex(v) => match self.position[v] {
                Some(i) => Stage::Tree(i),
                None => Stage::Endpoint,
            },
            DPoint::Edge { edge, t } => {
                let e = dendrite.edge(edge);
                match (self.position[e.parent], self.position[e.child]) {
                    (Some(a), Some(b)) => Stage::Tree(a.max(b)),
                    _ => Stage::Ladder { level: ladder_level(t) },
                }
            }
        }
    }
}

fn ladder_level(t: f64) -> u32 {
    let mut level = 0;
    let mut s = t;
    while (0.5..1.0).contains(&s) {
        s = 2.0 * s - 1.0;
        level += 1;
    }
    level
}

/// A tree path with cumulative arc lengths, parameterized from `start`.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetPath {
    pub start: VertexId,
    pub end: VertexId,
    /// `(edge, walked parent→child)` steps from `start` to `end`.
    pub steps: Vec<(EdgeId, bool)>,
    offsets: Vec<f64>,
}

impl TargetPath {
    fn new(dendrite: &Dendrite, start: VertexId, end: VertexId) -> Self {
        let steps = dendrite.path(start, end);
        let mut offsets = Vec::with_capacity(steps.len() + 1);
        let mut acc = 0.0;
        offsets.push(acc);
        for &(e, _) in &steps {
            acc += dendrite.edge(e).length;
            offsets.push(acc);
        }
        TargetPath {
            start,
            end,
            steps,
            offsets,
        }
    }

    pub fn length(&self) -> f64 {
        *self.offsets.last().expect("offsets start at 0")
    }

    /// The point at arc length `s` from `start`, clamped to the path.
    pub fn point_at(&self, dendrite: &Dendrite, s: f64) -> DPoint {
        if self.steps.is_empty() || s <= 0.0 {
            return DPoint::Vertex(self.start);
        }
        if s >= self.length() {
            return DPoint::Vertex(self.end);
        }
        let k = self.offsets.partition_point(|&o| o <= s) - 1;
        let (edge, forward) = self.steps[k];
        let frac = (s - self.offsets[k]) / dendrite.edge(edge).length;
        dendrite.point_on_edge(edge, if forward { frac } else { 1.0 - frac })
    }
}

/// How `F` acts on one skeleton edge.
#[derive(Debug, Clone, PartialEq)]
pub enum EdgeRule {
    /// An arc `α_i` mapped linearly onto `target`. `from_child` says whether
    /// the arc is traversed from the edge's child end to its parent end.
    Arc { arc: usize, target: TargetPath, from_child: bool },
    /// A leaf edge: `[0, 1/2]` onto `target`, `[1/2, 1]` onto `image_edge`.
    Leaf { target: TargetPath, image_edge: EdgeId },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DendriteMap {
    endpoint_images: Vec<usize>,
    vertex_images: Vec<VertexId>,
    rules: Vec<EdgeRule>,
    fixed_point: VertexId,
}

/// Extends the point map `f` (`f[x]` is the image of point `x`) to the
/// whole dendrite.
pub fn extend_map(dendrite: &Dendrite, filtration: &Filtration, f: &[usize]) -> Result<DendriteMap, ExtensionError> {
    let n = dendrite.space().len();
    if f.len() != n {
        return Err(ExtensionError::MapLength {
            got: f.len(),
            expected: n,
        });
    }
    if let Some((point, &image)) = f.iter().enumerate().find(|&(_, &y)| y >= n) {
        return Err(ExtensionError::NotEndpointMap { point, image });
    }
    let leaf_image = |leaf: VertexId| dendrite.leaf_of_point(f[dendrite.point_of_leaf(leaf).expect("leaf")]);

    let mut vertex_images: Vec<VertexId> = (0..dendrite.vertex_count()).collect();
    for v in dendrite.leaves() {
        vertex_images[v] = leaf_image(v);
    }
    for (i, &p) in filtration.order().iter().enumerate().skip(1) {
        let e_i = nearest_leaf(dendrite, p);
        vertex_images[p] = filtration.retract(leaf_image(e_i), i - 1);
    }
    vertex_images[filtration.root()] = filtration.root();

    let rules = (0..dendrite.edge_count())
        .map(|id| {
            let e = dendrite.edge(id);
            if dendrite.is_leaf(e.child) {
                let image_leaf = vertex_images[e.child];
                let anchor = filtration.tree_parent(image_leaf).expect("leaf has a neighbor");
                EdgeRule::Leaf {
                    target: TargetPath::new(dendrite, vertex_images[e.parent], anchor),
                    image_edge: dendrite.parent_edge(image_leaf).expect("leaf has an edge"),
                }
            } else {
                let (pa, pc) = (
                    filtration.position(e.parent).expect("interior"),
                    filtration.position(e.child).expect("interior"),
                );
                let (inner, outer, from_child) = if pa < pc { (e.parent, e.child, false) } else { (e.child, e.parent, true) };
                EdgeRule::Arc {
                    arc: pa.max(pc),
                    target: TargetPath::new(dendrite, vertex_images[inner], vertex_images[outer]),
                    from_child,
                }
            }
        })
        .collect();

    Ok(DendriteMap {
        endpoint_images: f.to_vec(),
        vertex_images,
        rules,
        fixed_point: filtration.root(),
    })
}

/// The leaf whose singleton is ρ-nearest to `v`; ties go to the smaller
/// point index.
fn nearest_leaf(dendrite: &Dendrite, v: VertexId) -> VertexId {
    let mut best = (f64::INFINITY, usize::MAX);
    for x in 0..dendrite.space().len() {
        let r = dendrite.vertex_distance(v, dendrite.leaf_of_point(x));
        if r < best.0 {
            best = (r, x);
        }
    }
    dendrite.leaf_of_point(best.1)
}

impl DendriteMap {
    /// `f` on point indices.
    pub fn endpoint_images(&self) -> &[usize] {
        &self.endpoint_images
    }

    pub fn vertex_image(&self, v: VertexId) -> VertexId {
        self.vertex_images[v]
    }

    pub fn vertex_images(&self) -> &[VertexId] {
        &self.vertex_images
    }

    pub fn rule(&self, edge: EdgeId) -> &EdgeRule {
        &self.rules[edge]
    }

    pub fn rules(&self) -> &[EdgeRule] {
        &self.rules
    }

    /// `p₀`.
    pub fn fixed_point(&self) -> VertexId {
        self.fixed_point
    }

    pub fn evaluate(&self, dendrite: &Dendrite, x: DPoint) -> DPoint {
        match dendrite.normalize(x) {
            DPoint::Vertex(v) => DPoint::Vertex(self.vertex_images[v]),
            DPoint::Edge { edge, t } => self.edge_action(dendrite, edge, t),
        }
    }

    /// The edge's own formula at parameter `t ∈ [0, 1]`, endpoints included.
    pub fn edge_action(&self, dendrite: &Dendrite, edge: EdgeId, t: f64) -> DPoint {
        match &self.rules[edge] {
            EdgeRule::Arc { target, .. } => target.point_at(dendrite, self.image_offset(dendrite, edge, t)),
            EdgeRule::Leaf { target, image_edge } => {
                if t <= 0.5 {
                    target.point_at(dendrite, 2.0 * t * target.length())
                } else {
                    dendrite.point_on_edge(*image_edge, 2.0 * t - 1.0)
                }
            }
        }
    }

    /// Arc length of `F(edge, t)` along the edge's image path (for leaf edges
    /// the path continues over the image leaf edge).
    pub fn image_offset(&self, dendrite: &Dendrite, edge: EdgeId, t: f64) -> f64 {
        match &self.rules[edge] {
            EdgeRule::Arc { target, from_child, .. } => {
                let s = if *from_child { 1.0 - t } else { t };
                s * target.length()
            }
            EdgeRule::Leaf { target, image_edge } => {
                if t <= 0.5 {
                    2.0 * t * target.length()
                } else {
                    target.length() + (2.0 * t - 1.0) * dendrite.edge(*image_edge).length
                }
            }
        }
    }

    pub fn iterate(&self, dendrite: &Dendrite, x: DPoint, times: usize) -> DPoint {
        (0..times).fold(dendrite.normalize(x), |y, _| self.evaluate(dendrite, y))
    }

    /// Number of steps until `x` first hits `p₀`, if within `budget`.
    pub fn steps_to_fixed_point(&self, dendrite: &Dendrite, x: DPoint, budget: usize) -> Option<usize> {
        let target = DPoint::Vertex(self.fixed_point);
        let mut y = dendrite.normalize(x);
        for step in 0..=budget {
            if y == target {
                return Some(step);
            }
            y = self.evaluate(dendrite, y);
        }
        None
    }
}

/// A finite system `(X, f)` realized as endpoint dynamics on a dendrite.
#[derive(Debug, Clone)]
pub struct Embedding {
    pub dendrite: Dendrite,
    pub filtration: Filtration,
    pub map: DendriteMap,
    /// `i`: point index ↦ its singleton leaf.
    pub correspondence: Vec<VertexId>,
}

/// Hierarchy, dendrite, filtration at the whole-space cell, and extension
/// of `f`, in one go.
pub fn embed_system(space: &MetricSpace, f: &[usize]) -> Result<Embedding, ExtensionError> {
    let hierarchy = build_cell_hierarchy(space)?;
    let dendrite = build_dendrite(&hierarchy, space)?;
    let filtration = build_filtration(&dendrite, dendrite.root())?;
    let map = extend_map(&dendrite, &filtration, f)?;
    let correspondence = (0..space.len()).map(|x| dendrite.leaf_of_point(x)).collect();
    Ok(Embedding {
        dendrite,
        filtration,
        map,
        correspondence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::harmonic;
    use alloc::string::ToString;
    use alloc::vec;

    fn star(legs: usize) -> MetricSpace {
        let labels = (0..legs).map(|i| i.to_string()).collect();
        MetricSpace::from_fn(labels, |_, _| 1.0).unwrap()
    }

    #[test]
    fn single_interior_vertex() {
        let s = star(3);
        let emb = embed_system(&s, &[0, 1, 2]).unwrap();
        assert_eq!(emb.filtration.order(), &[emb.dendrite.root()]);
        assert_eq!(emb.filtration.arc(0), None);
        let c = DPoint::Vertex(emb.dendrite.root());
        assert_eq!(emb.map.evaluate(&emb.dendrite, c), c);
        for x in 0..3 {
            let leaf = DPoint::Vertex(emb.correspondence[x]);
            assert_eq!(emb.map.evaluate(&emb.dendrite, leaf), leaf);
        }
        // a leaf-edge point near the center falls into it
        let near = DPoint::Edge { edge: 0, t: 0.25 };
        assert_eq!(emb.map.evaluate(&emb.dendrite, near), c);
    }

    #[test]
    fn harmonic_filtration() {
        let h = harmonic(4).unwrap();
        let emb = embed_system(&h, &[4, 1, 2, 3, 0]).unwrap();
        let d = &emb.dendrite;
        let sizes: Vec<usize> = emb.filtration.order().iter().map(|&v| d.members(v).len()).collect();
        assert_eq!(sizes, vec![5, 4, 3, 2]);
        assert_eq!((1..4).filter_map(|i| emb.filtration.arc(i)).count(), 3);
        for x in 0..5 {
            let img = emb.map.evaluate(d, DPoint::Vertex(emb.correspondence[x]));
            assert_eq!(img, DPoint::Vertex(emb.correspondence[[4, 1, 2, 3, 0][x]]));
        }
        let p0 = DPoint::Vertex(emb.filtration.root());
        assert_eq!(emb.map.evaluate(d, p0), p0);
    }

    #[test]
    fn rejects_bad_maps_and_roots() {
        let h = harmonic(3).unwrap();
        assert_eq!(
            embed_system(&h, &[0, 1, 2]).unwrap_err(),
            ExtensionError::MapLength { got: 3, expected: 4 }
        );
        assert_eq!(
            embed_system(&h, &[0, 1, 2, 7]).unwrap_err(),
            ExtensionError::NotEndpointMap { point: 3, image: 7 }
        );
        let emb = embed_system(&h, &[0, 1, 2, 3]).unwrap();
        let leaf = emb.correspondence[0];
        assert_eq!(
            build_filtration(&emb.dendrite, leaf).unwrap_err(),
            ExtensionError::RootIsLeaf(leaf)
        );
        let one = MetricSpace::new(vec!["x".to_string()], vec![vec![0.0]]).unwrap();
        assert_eq!(embed_system(&one, &[0]).unwrap_err(), ExtensionError::TooFewVertices(1));
    }

    #[test]
    fn retraction_lands_in_earlier_tree() {
        let h = harmonic(6).unwrap();
        let emb = embed_system(&h, &[6, 5, 4, 3, 2, 1, 0]).unwrap();
        let filt = &emb.filtration;
        for (i, &p) in filt.order().iter().enumerate().skip(1) {
            let q = emb.map.vertex_image(p);
            assert!(filt.position(q).unwrap() < i);
        }
    }

    #[test]
    fn ladder_levels() {
        assert_eq!(ladder_level(0.0), 0);
        assert_eq!(ladder_level(0.49), 0);
        assert_eq!(ladder_level(0.5), 1);
        assert_eq!(ladder_level(0.75), 2);
        assert_eq!(ladder_level(0.874), 2);
    }

    #[test]
    fn non_hierarchy_root() {
        let h = harmonic(5).unwrap();
        let emb = embed_system(&h, &[1, 2, 3, 4, 5, 0]).unwrap();
        let d = &emb.dendrite;
        let other = emb.filtration.order()[2];
        let filt = build_filtration(d, other).unwrap();
        assert_eq!(filt.len(), emb.filtration.len());
        let map = extend_map(d, &filt, &[1, 2, 3, 4, 5, 0]).unwrap();
        assert_eq!(map.evaluate(d, DPoint::Vertex(other)), DPoint::Vertex(other));
        for &p in filt.order() {
            assert!(map.steps_to_fixed_point(d, DPoint::Vertex(p), filt.len()).is_some());
        }
    }
}
