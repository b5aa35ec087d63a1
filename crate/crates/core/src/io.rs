//! JSON formats: `octa-dev/1` developments, `octa-geom/1` geometry, and the
//! reconstruction and `decision/1` reports.

use std::collections::BTreeMap;
use std::fmt;

use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

use crate::cm::Point3;
use crate::decision::{AffineMap, Decision, Verdict};
use crate::error::{Error, Result};
use crate::model::{DiagonalSet, FaceTriangle, NaturalDevelopment, Octahedron3};
use crate::reconstruct::{ReconstructionResult, Status};

pub const DEV_FORMAT: &str = "octa-dev/1";
pub const GEOM_FORMAT: &str = "octa-geom/1";
pub const DECISION_FORMAT: &str = "decision/1";

/// Edge entries in file order, duplicates kept so validation can name them.
#[derive(Debug, Default)]
struct EdgeEntries(Vec<(String, f64)>);

impl<'de> Deserialize<'de> for EdgeEntries {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = EdgeEntries;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object mapping edge keys to lengths")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> std::result::Result<EdgeEntries, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = map.next_entry::<String, f64>()? {
                    out.push((k, v));
                }
                Ok(EdgeEntries(out))
            }
        }
        d.deserialize_map(V)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DevIn {
    format: String,
    edges: Option<EdgeEntries>,
    faces: Option<Vec<FaceTriangle>>,
}

#[derive(Serialize)]
struct DevOut<'a> {
    format: &'a str,
    edges: BTreeMap<String, f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeomJson {
    format: String,
    vertices: [Point3; 6],
}

fn check_format(found: &str, want: &str) -> Result<()> {
    if found == want {
        Ok(())
    } else {
        Err(Error::Parse(format!("expected format \"{want}\", found \"{found}\"")))
    }
}

fn parse_err(e: serde_json::Error) -> Error {
    Error::Parse(e.to_string())
}

/// Reads an `octa-dev/1` document. Besides the 12-key `edges` object, the
/// eight-triangle form (`faces`: list of `{vertices, sides}`) is accepted.
pub fn parse_development(text: &str) -> Result<NaturalDevelopment> {
    let raw: DevIn = serde_json::from_str(text).map_err(parse_err)?;
    check_format(&raw.format, DEV_FORMAT)?;
    match (raw.edges, raw.faces) {
        (Some(edges), None) => NaturalDevelopment::validate(edges.0.iter().map(|(k, v)| (k.as_str(), *v))),
        (None, Some(faces)) => NaturalDevelopment::from_face_triangles(&faces),
        (Some(_), Some(_)) => Err(Error::Parse("give either \"edges\" or \"faces\", not both".into())),
        (None, None) => Err(Error::Parse("missing field `edges`".into())),
    }
}

pub fn development_to_json(dev: &NaturalDevelopment) -> serde_json::Value {
    serde_json::to_value(DevOut { format: DEV_FORMAT, edges: dev.to_map() }).expect("plain data serializes")
}

pub fn parse_geometry(text: &str) -> Result<Octahedron3> {
    let raw: GeomJson = serde_json::from_str(text).map_err(parse_err)?;
    check_format(&raw.format, GEOM_FORMAT)?;
    Octahedron3::new(raw.vertices)
}

pub fn geometry_to_json(oct: &Octahedron3) -> serde_json::Value {
    serde_json::to_value(GeomJson { format: GEOM_FORMAT.into(), vertices: *oct.vertices() })
        .expect("plain data serializes")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagonalsJson {
    #[serde(rename = "05")]
    pub d05: f64,
    #[serde(rename = "14")]
    pub d14: f64,
    #[serde(rename = "23")]
    pub d23: f64,
}

impl From<&DiagonalSet> for DiagonalsJson {
    fn from(d: &DiagonalSet) -> Self {
        Self { d05: d.d05, d14: d.d14, d23: d.d23 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualsJson {
    pub eq8: f64,
    pub eq9: f64,
    pub eq10: f64,
    pub eq7_margin: f64,
    pub min_group2_margin: f64,
    pub embedding: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionJson {
    pub status: Status,
    pub diagonals: Option<DiagonalsJson>,
    pub vertices: Option<[Point3; 6]>,
    pub residuals: Option<ResidualsJson>,
    pub candidates_found: usize,
    pub raw_candidates: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alternatives: Vec<DiagonalsJson>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
}

impl From<&ReconstructionResult> for ReconstructionJson {
    fn from(r: &ReconstructionResult) -> Self {
        let residuals = r.report.as_ref().map(|rep| ResidualsJson {
            eq8: rep.group1.eq8_res,
            eq9: rep.group1.eq9_res,
            eq10: rep.group1.eq10_res,
            eq7_margin: rep.group1.eq7_margin,
            min_group2_margin: rep.group2.min_margin(),
            embedding: r.embedding.as_ref().map_or(f64::NAN, |e| e.max_distance_error),
        });
        Self {
            status: r.status,
            diagonals: r.diagonals.as_ref().map(Into::into),
            vertices: r.embedding.as_ref().map(|e| e.points),
            residuals,
            candidates_found: r.candidates_found,
            raw_candidates: r.raw_candidates,
            alternatives: r.alternatives.iter().map(Into::into).collect(),
            diagnostics: r.diagnostics.clone(),
        }
    }
}

pub fn reconstruction_to_json(r: &ReconstructionResult) -> serde_json::Value {
    serde_json::to_value(ReconstructionJson::from(r)).expect("plain data serializes")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionDetails {
    pub spread: Option<f64>,
    pub group5_satisfied: Option<bool>,
    pub map: Option<AffineMap>,
    pub reconstructions: [ReconstructionJson; 2],
    #[serde(default)]
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionJson {
    pub format: String,
    pub verdict: Verdict,
    pub alpha: Option<f64>,
    pub ratios: Option<[f64; 12]>,
    pub map_residual: Option<f64>,
    pub details: DecisionDetails,
}

impl From<&Decision> for DecisionJson {
    fn from(d: &Decision) -> Self {
        Self {
            format: DECISION_FORMAT.into(),
            verdict: d.verdict,
            alpha: d.alpha_hat,
            ratios: d.ratios,
            map_residual: d.map_residual,
            details: DecisionDetails {
                spread: d.spread,
                group5_satisfied: d.group5.as_ref().map(|g| g.satisfied),
                map: d.map,
                reconstructions: [(&d.reconstructions[0]).into(), (&d.reconstructions[1]).into()],
                diagnostics: d.diagnostics.clone(),
            },
        }
    }
}

pub fn decision_to_json(d: &Decision) -> serde_json::Value {
    serde_json::to_value(DecisionJson::from(d)).expect("plain data serializes")
}

pub fn parse_decision(text: &str) -> Result<DecisionJson> {
    let d: DecisionJson = serde_json::from_str(text).map_err(parse_err)?;
    check_format(&d.format, DECISION_FORMAT)?;
    Ok(d)
}
