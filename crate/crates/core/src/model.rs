//! Octahedron combinatorics, natural developments, and coordinate octahedra.
//!
//! Vertices are labeled so that the antipodal (non-adjacent) pairs are
//! `(0,5)`, `(1,4)` and `(2,3)`. Under this labeling every face takes one
//! vertex from each pair, and the three diagonals are exactly the antipodal
//! pairs.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cm::{dist_sq, Point3, SquaredDistanceMatrix, MAX_POINTS};
use crate::error::{Error, Result};
use crate::tolerances::Tolerances;

pub const ANTIPODAL_PAIRS: [(usize, usize); 3] = [(0, 5), (1, 4), (2, 3)];

pub const DIAGONALS: [(usize, usize); 3] = ANTIPODAL_PAIRS;

/// The 12 edges, in the order used everywhere in the crate.
pub const EDGES: [(usize, usize); 12] = [
    (0, 1),
    (0, 2),
    (0, 3),
    (0, 4),
    (1, 2),
    (1, 3),
    (1, 5),
    (2, 4),
    (2, 5),
    (3, 4),
    (3, 5),
    (4, 5),
];

pub const FACES: [[usize; 3]; 8] = [
    [0, 1, 2],
    [0, 1, 3],
    [0, 2, 4],
    [0, 3, 4],
    [1, 2, 5],
    [1, 3, 5],
    [2, 4, 5],
    [3, 4, 5],
];

pub fn antipode(v: usize) -> usize {
    5 - v
}

pub fn is_edge(i: usize, j: usize) -> bool {
    i != j && i < 6 && j < 6 && antipode(i) != j
}

pub fn edge_index(i: usize, j: usize) -> Option<usize> {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    EDGES.iter().position(|&e| e == (a, b))
}

pub fn edge_key(i: usize, j: usize) -> String {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    format!("{a}{b}")
}

/// The apexes of the two faces sharing edge `(i, j)`; always an antipodal pair.
pub fn edge_apexes(i: usize, j: usize) -> (usize, usize) {
    let k = (0..6).find(|&k| k != i && k != j && k != antipode(i) && k != antipode(j)).expect("edge");
    let (a, b) = (k.min(antipode(k)), k.max(antipode(k)));
    (a, b)
}

/// Parses a two-digit key such as `"03"` into a vertex pair.
fn parse_pair(key: &str) -> Option<(usize, usize)> {
    let b = key.as_bytes();
    if b.len() != 2 || !b[0].is_ascii_digit() || !b[1].is_ascii_digit() {
        return None;
    }
    let (i, j) = ((b[0] - b'0') as usize, (b[1] - b'0') as usize);
    (i < 6 && j < 6 && i != j).then_some((i, j))
}

/// A problem found while validating a development.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    MissingEdge { edge: String },
    UnknownKey { key: String },
    DiagonalKey { key: String },
    DuplicateEdge { edge: String },
    NonPositive { edge: String, value: f64 },
    DegenerateFace { face: [usize; 3] },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingEdge { edge } => write!(f, "missing edge \"{edge}\""),
            Violation::UnknownKey { key } => write!(f, "unknown key \"{key}\""),
            Violation::DiagonalKey { key } => {
                write!(f, "key \"{key}\" is a diagonal (antipodal pair), not an edge")
            }
            Violation::DuplicateEdge { edge } => write!(f, "edge \"{edge}\" given more than once"),
            Violation::NonPositive { edge, value } => write!(f, "edge \"{edge}\" has non-positive length {value}"),
            Violation::DegenerateFace { face } => {
                write!(f, "face {{{},{},{}}} violates the strict triangle inequality", face[0], face[1], face[2])
            }
        }
    }
}

/// The 12 edge lengths of an octahedron's natural development.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NaturalDevelopment {
    lengths: [f64; 12],
}

/// One triangle of a development, with `sides[k]` the length between
/// `vertices[k]` and `vertices[(k + 1) % 3]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaceTriangle {
    pub vertices: [usize; 3],
    pub sides: [f64; 3],
}

impl NaturalDevelopment {
    /// Validates keyed edge lengths. Keys are `"ij"`; the reversed order
    /// `"ji"` is accepted but counts as the same edge.
    pub fn validate<'a, I>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, f64)>,
    {
        let mut violations = Vec::new();
        let mut slots: [Option<f64>; 12] = [None; 12];
        for (key, value) in entries {
            let Some((i, j)) = parse_pair(key) else {
                violations.push(Violation::UnknownKey { key: key.to_string() });
                continue;
            };
            if antipode(i) == j {
                violations.push(Violation::DiagonalKey { key: key.to_string() });
                continue;
            }
            let idx = edge_index(i, j).expect("non-antipodal pair is an edge");
            if slots[idx].is_some() {
                violations.push(Violation::DuplicateEdge { edge: edge_key(i, j) });
                continue;
            }
            slots[idx] = Some(value);
        }
        let mut lengths = [0.0; 12];
        for (idx, slot) in slots.iter().enumerate() {
            let (i, j) = EDGES[idx];
            match slot {
                None => violations.push(Violation::MissingEdge { edge: edge_key(i, j) }),
                Some(v) => lengths[idx] = *v,
            }
        }
        if !violations.is_empty() {
            return Err(Error::InvalidDevelopment(violations));
        }
        Self::from_lengths(lengths)
    }

    /// Builds a development from lengths listed in [`EDGES`] order.
    pub fn from_lengths(lengths: [f64; 12]) -> Result<Self> {
        let mut violations = Vec::new();
        for (idx, &v) in lengths.iter().enumerate() {
            if !(v > 0.0 && v.is_finite()) {
                let (i, j) = EDGES[idx];
                violations.push(Violation::NonPositive { edge: edge_key(i, j), value: v });
            }
        }
        if violations.is_empty() {
            let dev = Self { lengths };
            for face in FACES {
                let [a, b, c] = dev.face_sides(face);
                if !(a < b + c && b < a + c && c < a + b) {
                    violations.push(Violation::DegenerateFace { face });
                }
            }
        }
        if violations.is_empty() {
            Ok(Self { lengths })
        } else {
            Err(Error::InvalidDevelopment(violations))
        }
    }

    /// Reduces eight face triangles to edge lengths. Each face of the
    /// octahedron must appear once, and the two copies of every shared side
    /// must agree to 1e-12 relative.
    pub fn from_face_triangles(triangles: &[FaceTriangle]) -> Result<Self> {
        const SIDE_TOL: f64 = 1e-12;
        let fail = |msg: String| Error::InvalidOctahedron(msg);
        if triangles.len() != 8 {
            return Err(fail(format!("expected 8 triangles, got {}", triangles.len())));
        }
        let mut seen = [false; 8];
        let mut lengths: [Option<f64>; 12] = [None; 12];
        for t in triangles {
            let mut sorted = t.vertices;
            sorted.sort_unstable();
            let Some(f) = FACES.iter().position(|&face| face == sorted) else {
                return Err(fail(format!("{:?} is not a face of the octahedron", t.vertices)));
            };
            if std::mem::replace(&mut seen[f], true) {
                return Err(fail(format!("face {:?} given twice", FACES[f])));
            }
            for k in 0..3 {
                let (i, j) = (t.vertices[k], t.vertices[(k + 1) % 3]);
                let idx = edge_index(i, j).expect("face side is an edge");
                let side = t.sides[k];
                match lengths[idx] {
                    None => lengths[idx] = Some(side),
                    Some(prev) if (prev - side).abs() <= SIDE_TOL * prev.abs().max(side.abs()) => {}
                    Some(prev) => {
                        return Err(fail(format!(
                            "side {} has length {prev} in one triangle and {side} in another",
                            edge_key(i, j)
                        )))
                    }
                }
            }
        }
        let mut out = [0.0; 12];
        for (o, l) in out.iter_mut().zip(lengths) {
            *o = l.expect("eight faces cover every edge");
        }
        Self::from_lengths(out)
    }

    pub fn lengths(&self) -> &[f64; 12] {
        &self.lengths
    }

    /// Length of edge `(i, j)`, or `None` if the pair is not an edge.
    pub fn length(&self, i: usize, j: usize) -> Option<f64> {
        edge_index(i, j).map(|k| self.lengths[k])
    }

    fn len_unchecked(&self, i: usize, j: usize) -> f64 {
        self.length(i, j).expect("edge")
    }

    pub fn face_sides(&self, face: [usize; 3]) -> [f64; 3] {
        let [a, b, c] = face;
        [self.len_unchecked(a, b), self.len_unchecked(b, c), self.len_unchecked(a, c)]
    }

    /// Mean squared edge length; the unit that makes residuals dimensionless.
    pub fn scale(&self) -> f64 {
        self.lengths.iter().map(|l| l * l).sum::<f64>() / 12.0
    }

    pub fn scaled(&self, k: f64) -> Self {
        let mut lengths = self.lengths;
        for l in lengths.iter_mut() {
            *l *= k;
        }
        Self { lengths }
    }

    /// The development seen through a relabeling: edge `(i, j)` of the
    /// result has the length of edge `(perm[i], perm[j])` of `self`.
    /// `perm` must preserve antipodal pairs.
    pub fn relabeled(&self, perm: &[usize; 6]) -> Self {
        let mut lengths = [0.0; 12];
        for (k, &(i, j)) in EDGES.iter().enumerate() {
            lengths[k] = self.len_unchecked(perm[i], perm[j]);
        }
        Self { lengths }
    }

    pub fn to_map(&self) -> BTreeMap<String, f64> {
        EDGES.iter().zip(self.lengths).map(|(&(i, j), l)| (edge_key(i, j), l)).collect()
    }
}

/// The three diagonal lengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagonalSet {
    pub d05: f64,
    pub d14: f64,
    pub d23: f64,
}

impl DiagonalSet {
    pub fn new(d05: f64, d14: f64, d23: f64) -> Result<Self> {
        for d in [d05, d14, d23] {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::InvalidDiagonal(d));
            }
        }
        Ok(Self { d05, d14, d23 })
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        match (i.min(j), i.max(j)) {
            (0, 5) => Some(self.d05),
            (1, 4) => Some(self.d14),
            (2, 3) => Some(self.d23),
            _ => None,
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self { d05: self.d05 * k, d14: self.d14 * k, d23: self.d23 * k }
    }

    pub fn max_relative_difference(&self, other: &Self) -> f64 {
        [(self.d05, other.d05), (self.d14, other.d14), (self.d23, other.d23)]
            .into_iter()
            .map(|(a, b)| (a - b).abs() / a.abs().max(b.abs()))
            .fold(0.0, f64::max)
    }
}

/// Threshold below which a normalized face area or adjacent-face volume
/// counts as zero. Much tighter than the marginal-convexity band so that
/// near-flat but valid octahedra can still be classified.
pub const DEGENERACY_EPS: f64 = 1e-12;

/// Six labeled points in 3-space forming an octahedron.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Octahedron3 {
    vertices: [Point3; 6],
}

fn sub(a: &Point3, b: &Point3) -> Point3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: &Point3, b: &Point3) -> Point3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: &Point3, b: &Point3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Six times the signed volume of tetrahedron `(a, b, c, d)`.
pub(crate) fn orient3d(a: &Point3, b: &Point3, c: &Point3, d: &Point3) -> f64 {
    dot(&cross(&sub(b, a), &sub(c, a)), &sub(d, a))
}

impl Octahedron3 {
    /// Checks that all faces have nonzero area and no two adjacent faces are
    /// coplanar, up to [`DEGENERACY_EPS`].
    pub fn new(vertices: [Point3; 6]) -> Result<Self> {
        Self::with_threshold(vertices, DEGENERACY_EPS)
    }

    /// Like [`Octahedron3::new`] with a custom dimensionless threshold on
    /// face areas and on the volumes spanned by adjacent face pairs.
    pub fn with_threshold(vertices: [Point3; 6], eps: f64) -> Result<Self> {
        if vertices.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidOctahedron("non-finite coordinate".into()));
        }
        let oct = Self { vertices };
        let scale = oct.scale();
        if !(scale > 0.0) {
            return Err(Error::InvalidOctahedron("all vertices coincide".into()));
        }
        for face in FACES {
            let [a, b, c] = face.map(|k| vertices[k]);
            let n = cross(&sub(&b, &a), &sub(&c, &a));
            if dot(&n, &n).sqrt() / scale <= eps {
                return Err(Error::InvalidOctahedron(format!("face {face:?} has zero area")));
            }
        }
        for &(i, j) in EDGES.iter() {
            let (p, q) = edge_apexes(i, j);
            let vol = orient3d(&vertices[i], &vertices[j], &vertices[p], &vertices[q]);
            if vol.abs() / scale.powf(1.5) <= eps {
                return Err(Error::InvalidOctahedron(format!(
                    "the faces on edge {} are coplanar",
                    edge_key(i, j)
                )));
            }
        }
        Ok(oct)
    }

    pub fn vertices(&self) -> &[Point3; 6] {
        &self.vertices
    }

    /// Mean squared edge length.
    pub fn scale(&self) -> f64 {
        EDGES.iter().map(|&(i, j)| dist_sq(&self.vertices[i], &self.vertices[j])).sum::<f64>() / 12.0
    }

    /// Applies `x ↦ linear·x + translation` to every vertex.
    pub fn transformed(&self, linear: &[[f64; 3]; 3], translation: &Point3) -> Result<Self> {
        let v = self.vertices.map(|p| {
            let mut out = *translation;
            for (r, o) in out.iter_mut().enumerate() {
                *o += linear[r][0] * p[0] + linear[r][1] * p[1] + linear[r][2] * p[2];
            }
            out
        });
        Self::new(v)
    }
}

/// Edge lengths of a coordinate octahedron.
pub fn develop(oct: &Octahedron3) -> NaturalDevelopment {
    let v = oct.vertices();
    let lengths = EDGES.map(|(i, j)| dist_sq(&v[i], &v[j]).sqrt());
    NaturalDevelopment::from_lengths(lengths).expect("faces of a valid octahedron are nondegenerate")
}

pub fn diagonals_of(oct: &Octahedron3) -> DiagonalSet {
    let v = oct.vertices();
    let d = |i: usize, j: usize| dist_sq(&v[i], &v[j]).sqrt();
    DiagonalSet { d05: d(0, 5), d14: d(1, 4), d23: d(2, 3) }
}

/// Outcome of the geometric convexity test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Convexity {
    Convex,
    /// `vertex` lies strictly on the wrong side of `face`.
    Nonconvex { face: [usize; 3], vertex: usize },
    /// `vertex` lies within the tolerance band of `face`'s plane.
    Marginal { face: [usize; 3], vertex: usize },
}

impl Convexity {
    pub fn is_convex(&self) -> bool {
        matches!(self, Convexity::Convex)
    }
}

/// Signed distances, in units of `sqrt(scale)`, of the three vertices not on
/// `face` to the face plane. Normal orientation is arbitrary but fixed.
pub fn face_signed_distances(points: &[Point3; 6], face: [usize; 3], scale: f64) -> Result<[(usize, f64); 3]> {
    let [a, b, c] = face.map(|k| points[k]);
    let n = cross(&sub(&b, &a), &sub(&c, &a));
    let norm = dot(&n, &n).sqrt();
    if !(norm > 0.0) {
        return Err(Error::InvalidOctahedron(format!("face {face:?} has no plane")));
    }
    let unit = scale.sqrt();
    let mut out = [(0, 0.0); 3];
    let mut k = 0;
    for v in 0..6 {
        if face.contains(&v) {
            continue;
        }
        out[k] = (v, dot(&n, &sub(&points[v], &a)) / norm / unit);
        k += 1;
    }
    Ok(out)
}

pub fn is_convex(oct: &Octahedron3, tol: &Tolerances) -> Result<Convexity> {
    convexity_of_points(oct.vertices(), oct.scale(), tol)
}

pub(crate) fn convexity_of_points(points: &[Point3; 6], scale: f64, tol: &Tolerances) -> Result<Convexity> {
    let mut marginal = None;
    for face in FACES {
        let sd = face_signed_distances(points, face, scale)?;
        let pos = sd.iter().filter(|(_, d)| *d > tol.eps_geom).count();
        let neg = sd.iter().filter(|(_, d)| *d < -tol.eps_geom).count();
        if pos > 0 && neg > 0 {
            // the minority side is the offender
            let want_neg = pos >= neg;
            let (vertex, _) = *sd
                .iter()
                .find(|(_, d)| if want_neg { *d < -tol.eps_geom } else { *d > tol.eps_geom })
                .expect("counted above");
            return Ok(Convexity::Nonconvex { face, vertex });
        }
        if marginal.is_none() {
            if let Some(&(vertex, _)) = sd.iter().find(|(_, d)| d.abs() <= tol.eps_geom) {
                marginal = Some(Convexity::Marginal { face, vertex });
            }
        }
    }
    Ok(marginal.unwrap_or(Convexity::Convex))
}

/// Whether every canonical face is a facet of the convex hull of `points`
/// and no other vertex triple is.
pub fn canonical_faces_are_hull_facets(points: &[Point3; 6], scale: f64, tol: &Tolerances) -> bool {
    let unit = scale.powf(1.5);
    let mut facets = Vec::new();
    for a in 0..6 {
        for b in a + 1..6 {
            for c in b + 1..6 {
                let (mut pos, mut neg) = (0, 0);
                for d in (0..6).filter(|d| ![a, b, c].contains(d)) {
                    let o = orient3d(&points[a], &points[b], &points[c], &points[d]) / unit;
                    if o > tol.eps_geom {
                        pos += 1;
                    } else if o < -tol.eps_geom {
                        neg += 1;
                    }
                }
                if pos == 3 || neg == 3 {
                    facets.push([a, b, c]);
                }
            }
        }
    }
    facets == FACES
}

/// Squared distance matrix of the six vertices, edges from the development
/// and antipodal entries from the diagonals. Scale is `dev.scale()`.
pub fn assemble_sdm(dev: &NaturalDevelopment, diag: &DiagonalSet) -> SquaredDistanceMatrix {
    let s = squared_entries(dev, diag.d05 * diag.d05, diag.d14 * diag.d14, diag.d23 * diag.d23);
    SquaredDistanceMatrix::from_array(6, s).expect("positive lengths").with_scale(dev.scale())
}

/// Raw 6×6 squared entries with the given squared diagonals.
pub(crate) fn squared_entries(dev: &NaturalDevelopment, s05: f64, s14: f64, s23: f64) -> [[f64; MAX_POINTS]; MAX_POINTS] {
    let mut s = [[0.0; MAX_POINTS]; MAX_POINTS];
    for (k, &(i, j)) in EDGES.iter().enumerate() {
        let l = dev.lengths[k];
        s[i][j] = l * l;
        s[j][i] = l * l;
    }
    for ((i, j), v) in DIAGONALS.into_iter().zip([s05, s14, s23]) {
        s[i][j] = v;
        s[j][i] = v;
    }
    s
}

/// The 48 vertex permutations that preserve the antipodal pairing, i.e. the
/// combinatorial symmetries of the octahedron. The identity comes first.
pub fn octahedral_symmetries() -> Vec<[usize; 6]> {
    const PAIR_ORDERS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut out = Vec::with_capacity(48);
    for order in PAIR_ORDERS {
        for flips in 0..8u32 {
            let mut perm = [0; 6];
            for (slot, &(a, b)) in ANTIPODAL_PAIRS.iter().enumerate() {
                let (ta, tb) = ANTIPODAL_PAIRS[order[slot]];
                let (ta, tb) = if flips & (1 << slot) != 0 { (tb, ta) } else { (ta, tb) };
                perm[a] = ta;
                perm[b] = tb;
            }
            out.push(perm);
        }
    }
    out
}
