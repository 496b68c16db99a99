//! Finite metric spaces and set-level geometry.
//!
//! A [`MetricSpace`] is a list of labels plus a dense, validated distance
//! matrix. Finite spaces are automatically compact and totally disconnected,
//! which is what the rest of the crate relies on.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::odometer::{self, SequenceParams};

/// Relative tolerance used when checking symmetry and the triangle inequality.
pub const REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpaceError {
    #[error("{labels} labels supplied for a {size}x{size} matrix")]
    LabelCount { labels: usize, size: usize },
    #[error("row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("entry ({0}, {1}) is not finite")]
    NonFinite(usize, usize),
    #[error("entry ({0}, {1}) is negative")]
    Negative(usize, usize),
    #[error("label {0:?} appears more than once")]
    DuplicateLabel(String),
    #[error("d({0}, {1}) != d({1}, {0})")]
    Asymmetry(usize, usize),
    #[error("d({0}, {0}) is not zero")]
    NonzeroDiagonal(usize),
    #[error("distinct points {0} and {1} are at distance zero")]
    ZeroOffDiagonal(usize, usize),
    #[error("d({0}, {1}) > d({0}, {2}) + d({2}, {1})")]
    TriangleViolation(usize, usize, usize),
    #[error("subset is empty")]
    EmptySubset,
    #[error("point index {index} out of range for a space of {len} points")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("space has no points")]
    Empty,
    #[error("bad parameters: {0}")]
    BadParams(String),
}

/// Labeled finite point set with a validated distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpace {
    labels: Vec<String>,
    dist: Vec<f64>,
}

impl MetricSpace {
    /// Builds a space from a row-major square matrix, see [`validate_metric`].
    pub fn new(labels: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self, SpaceError> {
        validate_metric(labels, rows)
    }

    /// Builds a space from a flat row-major matrix of `labels.len()²` entries.
    pub fn from_flat(labels: Vec<String>, flat: Vec<f64>) -> Result<Self, SpaceError> {
        let n = labels.len();
        if flat.len() != n * n {
            return Err(SpaceError::NotSquare {
                row: 0,
                len: flat.len(),
                expected: n * n,
            });
        }
        check_axioms(&labels, &flat)?;
        Ok(MetricSpace { labels, dist: flat })
    }

    /// Builds a space by evaluating `metric` on every ordered pair.
    pub fn from_fn(
        labels: Vec<String>,
        metric: impl Fn(usize, usize) -> f64,
    ) -> Result<Self, SpaceError> {
        let n = labels.len();
        let mut flat = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                flat.push(if i == j { 0.0 } else { metric(i, j) });
            }
        }
        Self::from_flat(labels, flat)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    #[inline]
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.len();
        &self.dist[i * n..(i + 1) * n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.len()).map(move |i| self.row(i))
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    pub fn check_index(&self, index: usize) -> Result<(), SpaceError> {
        if index < self.len() {
            Ok(())
        } else {
            Err(SpaceError::IndexOutOfRange {
                index,
                len: self.len(),
            })
        }
    }
}

/// Validates `rows` as a metric on `labels`.
///
/// Checks run in a fixed order (shape, entries, labels, diagonal, symmetry,
/// positivity, triangle inequality) and the first failure is reported with
/// the indices that witness it. Symmetry and the triangle inequality are
/// checked with relative tolerance [`REL_TOL`]; stored values are kept as
/// supplied.
pub fn validate_metric(labels: Vec<String>, rows: Vec<Vec<f64>>) -> Result<MetricSpace, SpaceError> {
    let n = rows.len();
    if labels.len() != n {
        return Err(SpaceError::LabelCount {
            labels: labels.len(),
            size: n,
        });
    }
    let mut flat = Vec::with_capacity(n * n);
    for (row, r) in rows.into_iter().enumerate() {
        if r.len() != n {
            return Err(SpaceError::NotSquare {
                row,
                len: r.len(),
                expected: n,
            });
        }
        flat.extend(r);
    }
    check_axioms(&labels, &flat)?;
    Ok(MetricSpace { labels, dist: flat })
}

fn exceeds(a: f64, b: f64) -> bool {
    a - b > REL_TOL * a.abs().max(b.abs())
}

fn check_axioms(labels: &[String], m: &[f64]) -> Result<(), SpaceError> {
    let n = labels.len();
    for i in 0..n {
        for j in 0..n {
            let v = m[i * n + j];
            if !v.is_finite() {
                return Err(SpaceError::NonFinite(i, j));
            }
            if v < 0.0 {
                return Err(SpaceError::Negative(i, j));
            }
        }
    }
    let mut sorted: Vec<&String> = labels.iter().collect();
    sorted.sort();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(SpaceError::DuplicateLabel(w[0].clone()));
    }
    for i in 0..n {
        if m[i * n + i] != 0.0 {
            return Err(SpaceError::NonzeroDiagonal(i));
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (m[i * n + j], m[j * n + i]);
            if exceeds(a, b) || exceeds(b, a) {
                return Err(SpaceError::Asymmetry(i, j));
            }
            if a == 0.0 || b == 0.0 {
                return Err(SpaceError::ZeroOffDiagonal(i, j));
            }
        }
    }
    for i in 0..n {
        let row_i = &m[i * n..(i + 1) * n];
        for j in i + 1..n {
            let dij = row_i[j];
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                if exceeds(dij, row_i[k] + m[k * n + j]) {
                    return Err(SpaceError::TriangleViolation(i, j, k));
                }
            }
        }
    }
    Ok(())
}

/// A nonempty-when-used set of point indices, kept sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Subset(Vec<usize>);

impl Subset {
    pub fn new(space: &MetricSpace, mut members: Vec<usize>) -> Result<Self, SpaceError> {
        for &m in &members {
            space.check_index(m)?;
        }
        members.sort_unstable();
        members.dedup();
        Ok(Subset(members))
    }

    pub fn all(space: &MetricSpace) -> Self {
        Subset((0..space.len()).collect())
    }

    pub fn singleton(point: usize) -> Self {
        Subset(alloc::vec![point])
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, point: usize) -> bool {
        self.0.binary_search(&point).is_ok()
    }

    pub fn is_subset_of(&self, other: &Subset) -> bool {
        self.0.iter().all(|&p| other.contains(p))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubsetGeometry {
    pub diameter: f64,
    /// sup over `a` of inf over `b`.
    pub dist_ab: f64,
    pub dist_ba: f64,
    pub hausdorff: f64,
}

pub fn subset_geometry(
    space: &MetricSpace,
    a: &Subset,
    b: &Subset,
) -> Result<SubsetGeometry, SpaceError> {
    if a.is_empty() || b.is_empty() {
        return Err(SpaceError::EmptySubset);
    }
    let (a, b) = (a.members(), b.members());
    let dist_ab = directed_distance(space, a, b);
    let dist_ba = directed_distance(space, b, a);
    Ok(SubsetGeometry {
        diameter: diameter(space, a),
        dist_ab,
        dist_ba,
        hausdorff: dist_ab.max(dist_ba),
    })
}

/// `max` pairwise distance inside `a` (0 for an empty or singleton slice).
pub fn diameter(space: &MetricSpace, a: &[usize]) -> f64 {
    let mut best = 0.0f64;
    for (k, &x) in a.iter().enumerate() {
        let row = space.row(x);
        for &y in &a[k + 1..] {
            best = best.max(row[y]);
        }
    }
    best
}

/// One-sided distance of `a` from `b`. Both slices must be nonempty.
pub fn directed_distance(space: &MetricSpace, a: &[usize], b: &[usize]) -> f64 {
    a.iter()
        .map(|&x| {
            let row = space.row(x);
            b.iter().map(|&y| row[y]).fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// Hausdorff distance between two nonempty index slices.
///
/// For singletons this is exactly the stored point distance.
pub fn hausdorff(space: &MetricSpace, a: &[usize], b: &[usize]) -> f64 {
    directed_distance(space, a, b).max(directed_distance(space, b, a))
}

/// Spaces the crate knows how to generate.
#[derive(Debug, Clone)]
pub enum SpaceKind {
    /// Depth-`depth` approximation of the middle-thirds Cantor set.
    Cantor { depth: u32 },
    /// `{1, 1/2, ..., 1/k, 0}` on the line.
    Harmonic { k: u32 },
    /// The `P ∪ Q` points of columns `1..=n_max` of the fiber space.
    FiberC { n_max: u32, params: SequenceParams },
    /// Max-combined product of the given factors.
    Product(Vec<MetricSpace>),
}

pub const MAX_CANTOR_DEPTH: u32 = 12;
pub const MAX_HARMONIC_K: u32 = 5000;
pub const MAX_FIBER_COLUMNS: u32 = 3;
pub const MAX_GENERATED_POINTS: usize = 5000;

pub fn generate_space(kind: &SpaceKind) -> Result<MetricSpace, SpaceError> {
    match kind {
        SpaceKind::Cantor { depth } => cantor(*depth),
        SpaceKind::Harmonic { k } => harmonic(*k),
        SpaceKind::FiberC { n_max, params } => fiber_c(*n_max, params),
        SpaceKind::Product(factors) => product(factors),
    }
}

/// Points `Σ bᵢ·2/3ⁱ` for all `b ∈ {0,1}^depth`, labeled by their digits.
///
/// Coordinates are held as integer numerators over `3^depth` so equal gaps
/// produce bitwise-equal distances.
pub fn cantor(depth: u32) -> Result<MetricSpace, SpaceError> {
    if depth > MAX_CANTOR_DEPTH {
        return Err(SpaceError::BadParams(format!(
            "cantor depth {depth} exceeds {MAX_CANTOR_DEPTH}"
        )));
    }
    let denom = 3u64.pow(depth) as f64;
    let count = 1usize << depth;
    let mut labels = Vec::with_capacity(count);
    let mut numer = Vec::with_capacity(count);
    for code in 0..count {
        let mut label = String::from("c");
        let mut m = 0u64;
        for i in 1..=depth {
            // digit b_i is the i-th most significant bit of `code`
            let bit = (code >> (depth - i)) & 1;
            label.push(if bit == 1 { '1' } else { '0' });
            m += bit as u64 * 2 * 3u64.pow(depth - i);
        }
        labels.push(label);
        numer.push(m as i64);
    }
    MetricSpace::from_fn(labels, |i, j| (numer[i] - numer[j]).unsigned_abs() as f64 / denom)
}

/// `{1, 1/2, ..., 1/k} ∪ {0}` with the Euclidean distance, in that order.
pub fn harmonic(k: u32) -> Result<MetricSpace, SpaceError> {
    if k == 0 || k > MAX_HARMONIC_K {
        return Err(SpaceError::BadParams(format!(
            "harmonic k must be in 1..={MAX_HARMONIC_K}, got {k}"
        )));
    }
    let mut labels = Vec::with_capacity(k as usize + 1);
    let mut values = Vec::with_capacity(k as usize + 1);
    for i in 1..=k {
        labels.push(if i == 1 {
            String::from("1")
        } else {
            format!("1/{i}")
        });
        values.push(1.0 / i as f64);
    }
    labels.push(String::from("0"));
    values.push(0.0);
    MetricSpace::from_fn(labels, |i, j| (values[i] - values[j]).abs())
}

/// All `p_t, q_t` with `t ≤ T_{n_max}` under the max-coordinate metric.
///
/// Points are ordered `p_0..p_T` then `q_0..q_T`.
pub fn fiber_c(n_max: u32, params: &SequenceParams) -> Result<MetricSpace, SpaceError> {
    if n_max == 0 || n_max > MAX_FIBER_COLUMNS {
        return Err(SpaceError::BadParams(format!(
            "fiber_c n_max must be in 1..={MAX_FIBER_COLUMNS}, got {n_max}"
        )));
    }
    let top = odometer::top_index(n_max).expect("column within range");
    let mut labels = Vec::new();
    let mut coords = Vec::new();
    for (prefix, sign) in [("p", 1.0), ("q", -1.0)] {
        for t in 0..=top {
            let site = odometer::fiber_point(t, params)
                .map_err(|e| SpaceError::BadParams(format!("{e}")))?;
            labels.push(format!("{prefix}{t}"));
            coords.push((site.coords.0, sign * site.coords.1));
        }
    }
    MetricSpace::from_fn(labels, |i, j| {
        let (a, b) = (coords[i], coords[j]);
        (a.0 - b.0).abs().max((a.1 - b.1).abs())
    })
}

/// Cartesian product with `d = max` over factors; the last factor varies
/// fastest and labels read `(a,b,...)`.
pub fn product(factors: &[MetricSpace]) -> Result<MetricSpace, SpaceError> {
    if factors.is_empty() {
        return Err(SpaceError::BadParams(String::from("product needs at least one factor")));
    }
    let mut total = 1usize;
    for f in factors {
        total = total
            .checked_mul(f.len())
            .filter(|&t| t <= MAX_GENERATED_POINTS)
            .ok_or_else(|| {
                SpaceError::BadParams(format!("product exceeds {MAX_GENERATED_POINTS} points"))
            })?;
    }
    let decode = |mut idx: usize| -> Vec<usize> {
        let mut out = alloc::vec![0; factors.len()];
        for (slot, f) in out.iter_mut().zip(factors).rev() {
            *slot = idx % f.len();
            idx /= f.len();
        }
        out
    };
    let tuples: Vec<Vec<usize>> = (0..total).map(decode).collect();
    let labels = tuples
        .iter()
        .map(|t| {
            let parts: Vec<&str> = t.iter().zip(factors).map(|(&i, f)| f.label(i)).collect();
            format!("({})", parts.join(","))
        })
        .collect();
    MetricSpace::from_fn(labels, |i, j| {
        tuples[i]
            .iter()
            .zip(&tuples[j])
            .zip(factors)
            .map(|((&a, &b), f)| f.distance(a, b))
            .fold(0.0, f64::max)
    })
}
