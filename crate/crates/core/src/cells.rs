//! θ-chains, θ-cells and the hierarchy of all cells.
//!
//! Two points are θ-chain connected when a finite chain joins them with
//! consecutive gaps `≤ θ`. The equivalence classes are the θ-cells; over a
//! finite space they are exactly the single-linkage clusters, so the whole
//! hierarchy comes out of one minimum spanning tree.

use alloc::collections::BTreeMap;
use alloc::collections::VecDeque;
use alloc::vec::Vec;

use crate::spaces::{MetricSpace, SpaceError};

pub type CellId = usize;

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    /// Sorted point indices.
    pub members: Vec<usize>,
    /// Smallest θ for which this set is a θ-cell (0 for singletons).
    pub birth_threshold: f64,
    pub parent: Option<CellId>,
    pub children: Vec<CellId>,
}

impl Cell {
    pub fn is_singleton(&self) -> bool {
        self.members.len() == 1
    }
}

/// Every distinct cell of a space with its parent/child links.
///
/// Ids `0..n` are the singletons in point order; merged cells follow in order
/// of birth, so the root is always the last cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellHierarchy {
    cells: Vec<Cell>,
    root: CellId,
    singleton_index: Vec<CellId>,
}

impl CellHierarchy {
    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, id: CellId) -> &Cell {
        &self.cells[id]
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn root(&self) -> CellId {
        self.root
    }

    pub fn point_count(&self) -> usize {
        self.singleton_index.len()
    }

    /// The singleton cell `{point}`.
    pub fn singleton(&self, point: usize) -> CellId {
        self.singleton_index[point]
    }

    pub fn is_leaf(&self, id: CellId) -> bool {
        self.cells[id].children.is_empty()
    }

    /// Ancestors of `id` from its parent up to the root.
    pub fn ancestors(&self, id: CellId) -> impl Iterator<Item = CellId> + '_ {
        core::iter::successors(self.cells[id].parent, move |&c| self.cells[c].parent)
    }
}

struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
            rank: alloc::vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[x] != root {
            let next = self.parent[x];
            self.parent[x] = root;
            x = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) -> usize {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return a;
        }
        if self.rank[a] < self.rank[b] {
            core::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        if self.rank[a] == self.rank[b] {
            self.rank[a] += 1;
        }
        a
    }
}

/// Whether `x ∼_θ y`. The chain condition is non-strict: gaps equal to θ count.
pub fn chain_connected(space: &MetricSpace, x: usize, y: usize, theta: f64) -> Result<bool, SpaceError> {
    space.check_index(x)?;
    space.check_index(y)?;
    if x == y {
        return Ok(true);
    }
    let mut seen = alloc::vec![false; space.len()];
    let mut queue = VecDeque::from([x]);
    seen[x] = true;
    while let Some(u) = queue.pop_front() {
        for (v, &d) in space.row(u).iter().enumerate() {
            if !seen[v] && d <= theta {
                if v == y {
                    return Ok(true);
                }
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    Ok(false)
}

/// Partition into θ-cells. Blocks are sorted and ordered by smallest member.
pub fn cells_at_threshold(space: &MetricSpace, theta: f64) -> Vec<Vec<usize>> {
    let n = space.len();
    let mut dsu = DisjointSet::new(n);
    for i in 0..n {
        for (j, &d) in space.row(i).iter().enumerate().skip(i + 1) {
            if d <= theta {
                dsu.union(i, j);
            }
        }
    }
    let mut blocks: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        blocks.entry(dsu.find(i)).or_default().push(i);
    }
    let mut out: Vec<Vec<usize>> = blocks.into_values().collect();
    out.sort_by_key(|b| b[0]);
    out
}

/// Dense Prim: edges of a minimum spanning tree of the complete graph.
fn minimum_spanning_tree(space: &MetricSpace) -> Vec<(usize, usize, f64)> {
    let n = space.len();
    let mut in_tree = alloc::vec![false; n];
    let mut best = alloc::vec![f64::INFINITY; n];
    let mut link = alloc::vec![0usize; n];
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    if n == 0 {
        return edges;
    }
    in_tree[0] = true;
    for (v, &d) in space.row(0).iter().enumerate() {
        best[v] = d;
    }
    for _ in 1..n {
        let mut next = usize::MAX;
        for v in 0..n {
            if !in_tree[v] && (next == usize::MAX || best[v] < best[next]) {
                next = v;
            }
        }
        in_tree[next] = true;
        edges.push((link[next], next, best[next]));
        for (v, &d) in space.row(next).iter().enumerate() {
            if !in_tree[v] && d < best[v] {
                best[v] = d;
                link[v] = next;
            }
        }
    }
    edges
}

/// Builds [`CellHierarchy`] by merging MST edges in ascending order.
///
/// All edges of equal weight are applied together, and every component they
/// produce becomes one cell whose children are the components it absorbed.
/// Intermediate binary groupings at a tied weight are not cells and never
/// appear.
pub fn build_cell_hierarchy(space: &MetricSpace) -> Result<CellHierarchy, SpaceError> {
    let n = space.len();
    if n == 0 {
        return Err(SpaceError::Empty);
    }
    let mut cells: Vec<Cell> = (0..n)
        .map(|i| Cell {
            members: alloc::vec![i],
            birth_threshold: 0.0,
            parent: None,
            children: Vec::new(),
        })
        .collect();
    let mut edges = minimum_spanning_tree(space);
    edges.sort_by(|a, b| a.2.total_cmp(&b.2));

    let mut dsu = DisjointSet::new(n);
    // cell currently representing each DSU root
    let mut component_cell: Vec<CellId> = (0..n).collect();
    let mut start = 0;
    while start < edges.len() {
        let weight = edges[start].2;
        let end = start + edges[start..].iter().take_while(|e| e.2 == weight).count();
        let group = &edges[start..end];
        let absorbed: Vec<(usize, usize)> = group
            .iter()
            .map(|&(u, v, _)| (dsu.find(u), dsu.find(v)))
            .collect();
        for &(u, v, _) in group {
            dsu.union(u, v);
        }
        let mut merged: BTreeMap<usize, Vec<CellId>> = BTreeMap::new();
        for (ru, rv) in absorbed {
            let root = dsu.find(ru);
            let entry = merged.entry(root).or_default();
            entry.push(component_cell[ru]);
            entry.push(component_cell[rv]);
        }
        for (root, mut children) in merged {
            children.sort_unstable();
            children.dedup();
            let id = cells.len();
            let mut members: Vec<usize> = children
                .iter()
                .flat_map(|&c| cells[c].members.iter().copied())
                .collect();
            members.sort_unstable();
            for &c in &children {
                cells[c].parent = Some(id);
            }
            cells.push(Cell {
                members,
                birth_threshold: weight,
                parent: None,
                children,
            });
            component_cell[root] = id;
        }
        start = end;
    }
    let root = cells.len() - 1;
    Ok(CellHierarchy {
        cells,
        root,
        singleton_index: (0..n).collect(),
    })
}
