//! The five groups of necessary conditions, evaluated on development edge
//! lengths plus candidate diagonals.
//!
//! Groups 1 and 2 concern a single octahedron (embeddability and convexity);
//! groups 3 and 4 are the same evaluators applied to the second development.
//! Group 5 ties the two together through the common volume ratio
//! `alpha = (det A)^2`.
//!
//! Every value here is dimensionless: a Cayley–Menger determinant of `k + 1`
//! points is divided by `scale^k`, where `scale` is the mean squared edge
//! length of the development under test.

use serde::{Deserialize, Serialize};

use crate::cm::{cm_raw, MAX_POINTS};
use crate::error::{Error, Result};
use crate::model::{antipode, assemble_sdm, edge_apexes, DiagonalSet, NaturalDevelopment, EDGES, FACES};
use crate::tolerances::Tolerances;

/// Embeddability of the six-point distance data in 3-space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Group1Report {
    /// `cm(x0,x1)` and `-cm(x0,x1,x2)`; positive.
    pub eq6_margins: [f64; 2],
    /// `cm(x0,x1,x2,x3)`; positive.
    pub eq7_margin: f64,
    /// `cm(x0..x3, x4)`; zero.
    pub eq8_res: f64,
    /// `cm(x0..x3, x5)`; zero.
    pub eq9_res: f64,
    /// `cm(x0..x5)`; zero.
    pub eq10_res: f64,
    pub satisfied: bool,
}

impl Group1Report {
    pub fn residuals(&self) -> [f64; 3] {
        [self.eq8_res, self.eq9_res, self.eq10_res]
    }

    pub fn max_abs_residual(&self) -> f64 {
        self.residuals().iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}

pub fn group1(dev: &NaturalDevelopment, diag: &DiagonalSet, tol: &Tolerances) -> Group1Report {
    let m = assemble_sdm(dev, diag);
    let s = m.raw();
    let scale = m.scale();
    let norm = |subset: &[usize]| cm_raw(subset, s) / scale.powi(subset.len() as i32 - 1);
    let eq6_margins = [norm(&[0, 1]), -norm(&[0, 1, 2])];
    let eq7_margin = norm(&[0, 1, 2, 3]);
    let eq8_res = norm(&[0, 1, 2, 3, 4]);
    let eq9_res = norm(&[0, 1, 2, 3, 5]);
    let eq10_res = norm(&[0, 1, 2, 3, 4, 5]);
    let satisfied = eq6_margins.iter().all(|&x| x > tol.eps_geom)
        && eq7_margin > tol.eps_geom
        && [eq8_res, eq9_res, eq10_res].iter().all(|r| r.abs() <= tol.eps_rel);
    Group1Report { eq6_margins, eq7_margin, eq8_res, eq9_res, eq10_res, satisfied }
}

/// How the group-2 quadratic is parameterized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Group2Variant {
    /// The unknown `t` is the squared distance between the two apexes; the
    /// margin is positive exactly when both apexes lie strictly on the same
    /// side of the face plane.
    #[default]
    ApexPair,
    /// Diagnostic variant: `t` sits in the slot joining the first apex to its
    /// antipode on the face, and the leading coefficient is taken over the
    /// complementary triple, while the comparison still uses the apex-pair
    /// length. Kept for side-by-side comparison only.
    DisplayedSlot,
}

/// One of the 24 group-2 inequalities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Group2Entry {
    pub face: [usize; 3],
    /// Apexes of the two faces adjacent to `face` across the edges meeting
    /// at the face's shared vertex.
    pub apexes: [usize; 2],
    /// Leading coefficient `A`, normalized.
    pub a: f64,
    /// `(C - A * d^4) / scale^4`; positive for a convex configuration.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Group2Report {
    pub entries: Vec<Group2Entry>,
    /// Every margin exceeds `eps_geom`.
    pub satisfied: bool,
    /// Some margin lies within `±eps_geom`.
    pub marginal: bool,
}

impl Group2Report {
    pub fn min_margin(&self) -> f64 {
        self.entries.iter().map(|e| e.margin).fold(f64::INFINITY, f64::min)
    }
}

/// The 24 (face, apex pair) combinations, as `(face, shared vertex, p, q)`.
pub fn group2_layout() -> Vec<([usize; 3], usize, usize, usize)> {
    let mut out = Vec::with_capacity(24);
    for face in FACES {
        for k in 0..3 {
            let i0 = face[k];
            let i1 = face[(k + 1) % 3];
            let i2 = face[(k + 2) % 3];
            let (lo, hi) = (i1.min(i2), i1.max(i2));
            // p is across edge (i0, lo), q across edge (i0, hi).
            out.push((face, i0, antipode(hi), antipode(lo)));
        }
    }
    out
}

/// Coefficients of `t ↦ cm(subset)` with `s[i][j] = s[j][i] = t`; the
/// function is exactly quadratic in `t`.
pub(crate) fn slot_quadratic(
    subset: &[usize],
    s: &[[f64; MAX_POINTS]; MAX_POINTS],
    i: usize,
    j: usize,
    probe: f64,
) -> (f64, f64, f64) {
    let rest: Vec<usize> = subset.iter().copied().filter(|&k| k != i && k != j).collect();
    let a = -cm_raw(&rest, s);
    let mut w = *s;
    let mut at = |t: f64| {
        w[i][j] = t;
        w[j][i] = t;
        cm_raw(subset, &w)
    };
    let c = at(0.0);
    let b = (at(probe) - at(-probe)) / (2.0 * probe);
    (a, b, c)
}

pub fn group2(dev: &NaturalDevelopment, diag: &DiagonalSet, tol: &Tolerances) -> Result<Group2Report> {
    group2_with_variant(dev, diag, tol, Group2Variant::ApexPair)
}

pub fn group2_with_variant(
    dev: &NaturalDevelopment,
    diag: &DiagonalSet,
    tol: &Tolerances,
    variant: Group2Variant,
) -> Result<Group2Report> {
    let m = assemble_sdm(dev, diag);
    let s = m.raw();
    let scale = m.scale();
    let mut entries = Vec::with_capacity(24);
    for (face, _, p, q) in group2_layout() {
        let subset = [face[0], face[1], face[2], p, q];
        let (i, j) = match variant {
            Group2Variant::ApexPair => (p, q),
            Group2Variant::DisplayedSlot => (p, antipode(p)),
        };
        let (a, _, c) = slot_quadratic(&subset, s, i, j, scale);
        let a_norm = a / scale.powi(2);
        if variant == Group2Variant::ApexPair && a_norm <= tol.eps_geom {
            return Err(Error::DegenerateFace { face, a: a_norm });
        }
        let d4 = s[p][q] * s[p][q];
        let margin = (c - a * d4) / scale.powi(4);
        entries.push(Group2Entry { face, apexes: [p, q], a: a_norm, margin });
    }
    let satisfied = entries.iter().all(|e| e.margin > tol.eps_geom);
    let marginal = entries.iter().any(|e| e.margin.abs() <= tol.eps_geom);
    Ok(Group2Report { entries, satisfied, marginal })
}

/// The equal-volume-ratio conditions across all 12 edge tetrahedra.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Group5Report {
    /// `cm'(T_e) / cm(T_e)` for the tetrahedron on each edge, in edge order.
    pub ratios: [f64; 12],
    pub alpha_hat: f64,
    /// `max_e |ratio_e / alpha_hat - 1|`.
    pub spread: f64,
    pub satisfied: bool,
}

/// The tetrahedron attached to an edge: its endpoints plus the apexes of the
/// two faces containing it.
pub fn edge_tetrahedron(i: usize, j: usize) -> [usize; 4] {
    let (p, q) = edge_apexes(i, j);
    [i, j, p, q]
}

/// Median of positive values, taking the geometric mean of the middle pair so
/// that the estimate of reciprocal ratios is exactly reciprocal.
pub(crate) fn robust_center(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        return v[n / 2];
    }
    let (lo, hi) = (v[n / 2 - 1], v[n / 2]);
    if lo > 0.0 && hi > 0.0 {
        (lo * hi).sqrt()
    } else {
        0.5 * (lo + hi)
    }
}

pub fn group5(
    dev_a: &NaturalDevelopment,
    diag_a: &DiagonalSet,
    dev_b: &NaturalDevelopment,
    diag_b: &DiagonalSet,
    tol: &Tolerances,
) -> Result<Group5Report> {
    let ma = assemble_sdm(dev_a, diag_a);
    let mb = assemble_sdm(dev_b, diag_b);
    let (sa, sb) = (ma.scale().powi(3), mb.scale().powi(3));
    let mut ratios = [0.0; 12];
    let mut signs_ok = true;
    for (k, &(i, j)) in EDGES.iter().enumerate() {
        let tetra = edge_tetrahedron(i, j);
        let ca = cm_raw(&tetra, ma.raw());
        let cb = cm_raw(&tetra, mb.raw());
        if !(ca / sa > tol.eps_geom) {
            return Err(Error::DegenerateTetrahedron { tetra, cm: ca / sa });
        }
        signs_ok &= cb / sb > tol.eps_geom;
        ratios[k] = cb / ca;
    }
    let alpha_hat = robust_center(&ratios);
    let spread = if alpha_hat > 0.0 {
        ratios.iter().map(|r| (r / alpha_hat - 1.0).abs()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    let satisfied = signs_ok && spread <= tol.alpha_yes;
    Ok(Group5Report { ratios, alpha_hat, spread, satisfied })
}

/// Condition values for one octahedron (groups 1–2) and, when a second
/// octahedron is involved, the cross-octahedron group 5.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub group1: Group1Report,
    pub group2: Group2Report,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group5: Option<Group5Report>,
}

impl ConditionReport {
    pub fn satisfied(&self) -> bool {
        self.group1.satisfied && self.group2.satisfied && self.group5.as_ref().is_none_or(|g| g.satisfied)
    }
}

pub fn evaluate(dev: &NaturalDevelopment, diag: &DiagonalSet, tol: &Tolerances) -> Result<ConditionReport> {
    Ok(ConditionReport { group1: group1(dev, diag, tol), group2: group2(dev, diag, tol)?, group5: None })
}
