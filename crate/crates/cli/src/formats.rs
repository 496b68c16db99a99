//! On-disk representations: space/dendrite/map/extension JSON, DOT, CSV.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use dendrite_core::chaos::{Dc3Evidence, DistributionProfile, FamilyCheck, PairVerdict};
use dendrite_core::dendrite::{Dendrite, Edge};
use dendrite_core::extension::{EdgeRule, Embedding};
use dendrite_core::{MetricSpace, VerifyReport};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoordMetric {
    Euclidean,
    Max,
}

/// A space as a distance matrix, or as coordinates plus a metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceFile {
    pub labels: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<CoordMetric>,
}

impl SpaceFile {
    pub fn from_space(space: &MetricSpace) -> Self {
        SpaceFile {
            labels: space.labels().to_vec(),
            matrix: Some(space.rows().map(<[f64]>::to_vec).collect()),
            coords: None,
            metric: None,
        }
    }

    pub fn into_space(self) -> Result<MetricSpace> {
        match (self.matrix, self.coords) {
            (Some(m), None) => Ok(MetricSpace::new(self.labels, m)?),
            (None, Some(c)) => {
                let dim = c.first().map_or(0, Vec::len);
                if c.iter().any(|p| p.len() != dim) {
                    return Err(CliError::Invalid("all coordinate rows need the same length".into()));
                }
                if c.len() != self.labels.len() {
                    return Err(CliError::Invalid(format!(
                        "{} labels for {} coordinate rows",
                        self.labels.len(),
                        c.len()
                    )));
                }
                let metric = self.metric.unwrap_or(CoordMetric::Euclidean);
                Ok(MetricSpace::from_fn(self.labels, |i, j| {
                    let diffs = c[i].iter().zip(&c[j]).map(|(a, b)| (a - b).abs());
                    match metric {
                        CoordMetric::Euclidean => diffs.map(|x| x * x).sum::<f64>().sqrt(),
                        CoordMetric::Max => diffs.fold(0.0, f64::max),
                    }
                })?)
            }
            _ => Err(CliError::Invalid("a space needs exactly one of `matrix` or `coords`".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexEntry {
    pub id: usize,
    /// Point indices into `space.labels`.
    pub members: Vec<usize>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeEntry {
    /// Parent cell.
    pub u: usize,
    /// Child cell.
    pub v: usize,
    pub length: f64,
}

/// Self-contained dendrite file: skeleton plus the space it was built on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DendriteFile {
    pub vertices: Vec<VertexEntry>,
    pub edges: Vec<EdgeEntry>,
    pub root: usize,
    pub space: SpaceFile,
}

pub fn cell_label(space: &MetricSpace, members: &[usize]) -> String {
    let names: Vec<&str> = members.iter().map(|&m| space.label(m)).collect();
    format!("{{{}}}", names.join(","))
}

impl DendriteFile {
    pub fn from_dendrite(d: &Dendrite) -> Self {
        DendriteFile {
            vertices: (0..d.vertex_count())
                .map(|v| VertexEntry {
                    id: v,
                    members: d.members(v).to_vec(),
                    label: cell_label(d.space(), d.members(v)),
                })
                .collect(),
            edges: d
                .edges()
                .iter()
                .map(|e| EdgeEntry {
                    u: e.parent,
                    v: e.child,
                    length: e.length,
                })
                .collect(),
            root: d.root(),
            space: SpaceFile::from_space(d.space()),
        }
    }

    pub fn into_dendrite(self) -> Result<Dendrite> {
        let space = self.space.into_space()?;
        let mut vertices = self.vertices;
        vertices.sort_by_key(|v| v.id);
        if vertices.iter().enumerate().any(|(i, v)| v.id != i) {
            return Err(CliError::Invalid("vertex ids must be 0..n without gaps".into()));
        }
        let members = vertices.into_iter().map(|v| v.members).collect();
        let edges = self
            .edges
            .iter()
            .map(|e| Edge {
                parent: e.u,
                child: e.v,
                length: e.length,
            })
            .collect();
        Ok(Dendrite::from_parts(space, members, edges, self.root)?)
    }
}

/// Renders the skeleton as `dot` or `json`.
pub fn export_skeleton(d: &Dendrite, format: &str) -> Result<String> {
    match format {
        "dot" => Ok(to_dot(d)),
        "json" => Ok(crate::io::to_json(&DendriteFile::from_dendrite(d))),
        other => Err(CliError::UnknownFormat(other.to_string())),
    }
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

pub fn to_dot(d: &Dendrite) -> String {
    let mut out = String::from("graph skeleton {\n  node [shape=box];\n");
    for v in 0..d.vertex_count() {
        let _ = writeln!(out, "  v{v} [label=\"{}\"];", dot_escape(&cell_label(d.space(), d.members(v))));
    }
    for e in d.edges() {
        let _ = writeln!(
            out,
            "  v{} -- v{} [length={}, label=\"{}\"];",
            e.parent, e.child, e.length, e.length
        );
    }
    out.push_str("}\n");
    out
}

/// Endpoint map file: every label mapped to a label.
pub type MapFile = BTreeMap<String, String>;

pub fn map_from_file(space: &MetricSpace, file: &MapFile) -> Result<Vec<usize>> {
    let mut f = vec![None; space.len()];
    for (from, to) in file {
        let x = space
            .index_of(from)
            .ok_or_else(|| CliError::Invalid(format!("map source {from:?} is not a point of the space")))?;
        let y = space
            .index_of(to)
            .ok_or_else(|| CliError::Invalid(format!("f({from}) = {to:?} is not an endpoint")))?;
        f[x] = Some(y);
    }
    f.into_iter()
        .enumerate()
        .map(|(x, y)| y.ok_or_else(|| CliError::Invalid(format!("map has no image for {:?}", space.label(x)))))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexImage {
    pub vertex: usize,
    pub image: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRuleEntry {
    pub edge: usize,
    /// `arc` for an edge of the interior tree, `leaf` for a leaf edge.
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arc: Option<usize>,
    /// Target path from `from` to `to` as edge ids.
    pub from: usize,
    pub to: usize,
    pub path: Vec<usize>,
    pub path_length: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from_child: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_edge: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionFile {
    pub root: usize,
    pub order: Vec<usize>,
    pub links: Vec<usize>,
    pub endpoint_images: BTreeMap<String, String>,
    pub vertex_images: Vec<VertexImage>,
    pub edge_rules: Vec<EdgeRuleEntry>,
}

impl ExtensionFile {
    pub fn from_embedding(emb: &Embedding) -> Self {
        let (d, filt, map) = (&emb.dendrite, &emb.filtration, &emb.map);
        let space = d.space();
        let edge_rules = map
            .rules()
            .iter()
            .enumerate()
            .map(|(edge, rule)| {
                let (kind, arc, target, from_child, image_edge) = match rule {
                    EdgeRule::Arc { arc, target, from_child } => ("arc", Some(*arc), target, Some(*from_child), None),
                    EdgeRule::Leaf { target, image_edge } => ("leaf", None, target, None, Some(*image_edge)),
                };
                EdgeRuleEntry {
                    edge,
                    kind: kind.to_string(),
                    arc,
                    from: target.start,
                    to: target.end,
                    path: target.steps.iter().map(|s| s.0).collect(),
                    path_length: target.length(),
                    from_child,
                    image_edge,
                }
            })
            .collect();
        ExtensionFile {
            root: filt.root(),
            order: filt.order().to_vec(),
            links: (0..filt.len()).map(|i| filt.link(i)).collect(),
            endpoint_images: map
                .endpoint_images()
                .iter()
                .enumerate()
                .map(|(x, &y)| (space.label(x).to_string(), space.label(y).to_string()))
                .collect(),
            vertex_images: map
                .vertex_images()
                .iter()
                .enumerate()
                .map(|(vertex, &image)| VertexImage { vertex, image })
                .collect(),
            edge_rules,
        }
    }
}

pub fn orbit_csv(distances: &[f64]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t", "dist"]).map_err(csv_err)?;
    for (t, d) in distances.iter().enumerate() {
        w.write_record([t.to_string(), d.to_string()]).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| CliError::Invalid(e.to_string()))
}

pub fn read_orbit_csv(path: &std::path::Path, text: &str) -> Result<Vec<f64>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers = r.headers().map_err(|e| CliError::parse(path, e))?.clone();
    let col = headers
        .iter()
        .position(|h| h == "dist")
        .ok_or_else(|| CliError::parse(path, "missing `dist` column"))?;
    r.records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec.map_err(|e| CliError::parse(path, e))?;
            rec.get(col)
                .and_then(|v| v.trim().parse::<f64>().ok())
                .ok_or_else(|| CliError::parse(path, format!("row {}: bad distance", i + 1)))
        })
        .collect()
}

pub fn profile_csv(p: &DistributionProfile) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["s", "N", "freq"]).map_err(csv_err)?;
    for (k, &n) in p.checkpoints.iter().enumerate() {
        for (j, &s) in p.thresholds.iter().enumerate() {
            w.write_record([s.to_string(), n.to_string(), p.freq[k][j].to_string()])
                .map_err(csv_err)?;
        }
    }
    w.into_inner().map_err(|e| CliError::Invalid(e.to_string()))
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Invalid(e.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dc3Json {
    pub s_lo: f64,
    pub s_hi: f64,
    pub gap: f64,
    pub checkpoints: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictJson {
    pub proximal_lower_bound: f64,
    pub li_yorke_possible: bool,
    pub dc3: Option<Dc3Json>,
}

impl From<&PairVerdict> for VerdictJson {
    fn from(v: &PairVerdict) -> Self {
        VerdictJson {
            proximal_lower_bound: v.proximal_lower_bound,
            li_yorke_possible: v.li_yorke_possible,
            dc3: v.dc3.as_ref().map(|e: &Dc3Evidence| Dc3Json {
                s_lo: e.s_lo,
                s_hi: e.s_hi,
                gap: e.gap,
                checkpoints: e.checkpoints.clone(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyJson {
    pub passed: bool,
    pub isometry_error: f64,
    pub triples_checked: usize,
    pub triangle_violations: usize,
    pub symmetry_violations: usize,
    pub leaves_are_singletons: bool,
    pub is_tree: bool,
    pub space_matches: bool,
}

impl From<&VerifyReport> for VerifyJson {
    fn from(r: &VerifyReport) -> Self {
        VerifyJson {
            passed: r.passed(),
            isometry_error: r.isometry_error,
            triples_checked: r.triples_checked,
            triangle_violations: r.triangle_violations,
            symmetry_violations: r.symmetry_violations,
            leaves_are_singletons: r.leaves_are_singletons,
            is_tree: r.is_tree,
            space_matches: r.space_matches,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyJson {
    pub pattern: String,
    pub count: usize,
    pub depth: u64,
    /// Bit strings, position 0 first, over positions `0..depth`.
    pub words: Vec<String>,
    pub distinct: bool,
    pub min_agreements: u64,
    pub min_disagreements: u64,
    pub longest_without_agreement: u64,
    pub longest_without_disagreement: u64,
}

impl FamilyJson {
    pub fn new(pattern: &str, depth: u64, words: &[dendrite_core::OmegaWord], check: &FamilyCheck) -> Self {
        FamilyJson {
            pattern: pattern.to_string(),
            count: words.len(),
            depth,
            words: words
                .iter()
                .map(|w| (0..depth).map(|p| if w.bit(p) { '1' } else { '0' }).collect())
                .collect(),
            distinct: check.distinct,
            min_agreements: check.min_agreements,
            min_disagreements: check.min_disagreements,
            longest_without_agreement: check.longest_without_agreement,
            longest_without_disagreement: check.longest_without_disagreement,
        }
    }
}
