//! Recovering the diagonals, and then coordinates, of a convex octahedron
//! from its development.
//!
//! Unknowns are the squared diagonals `u = δ23²`, `v = δ14²`, `w = δ05²`.
//! The base-tetrahedron condition `cm(x0,x1,x2,x3) > 0` is a concave
//! quadratic in `u` and fixes an open interval. For fixed `u`, the
//! conditions `cm(x0..x3,x4) = 0` and `cm(x0..x3,x5) = 0` are quadratics in
//! `v` and `w` respectively, so each has two closed-form branches.
//!
//! On those branches `cm(x0..x5)` is a perfect square in `δ45²` (up to the
//! sign of the base volume) and never changes sign, so it cannot be bracketed
//! directly. Instead we track the signed mismatch between the development's
//! `δ45²` and the value that makes `cm(x0..x5)` stationary. Its sign changes
//! along each of the four branch pairs are bracketed on a grid, bisected, and
//! polished by damped Newton; `cm(x0..x5) = 0` is then checked as the final
//! certificate.
//!
//! The system generally has several real solutions (nonconvex realizations
//! share the development); the convexity inequalities pick the one that a
//! convex octahedron can have, and Cauchy's rigidity theorem says there is at
//! most one.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::cm::{cm_raw, cm_raw_fast, embed_six_points, EmbeddingResult, MAX_POINTS};
use crate::conditions::{evaluate, group2, ConditionReport};
use crate::error::{Error, Result};
use crate::model::{
    assemble_sdm, canonical_faces_are_hull_facets, convexity_of_points, squared_entries, Convexity, DiagonalSet,
    NaturalDevelopment,
};
use crate::tolerances::Tolerances;

type Raw = [[f64; MAX_POINTS]; MAX_POINTS];

const EQ8: [usize; 5] = [0, 1, 2, 3, 4];
const EQ9: [usize; 5] = [0, 1, 2, 3, 5];
const EQ10: [usize; 6] = [0, 1, 2, 3, 4, 5];
const DEDUP_REL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Unique,
    None,
    /// More than one convex realization survived; numerically suspect.
    Ambiguous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionResult {
    pub status: Status,
    pub diagonals: Option<DiagonalSet>,
    pub embedding: Option<EmbeddingResult>,
    pub report: Option<ConditionReport>,
    /// Convex realizations left after filtering.
    pub candidates_found: usize,
    /// Solutions of the equality system before convexity filtering.
    pub raw_candidates: usize,
    /// Surviving diagonal sets when the status is ambiguous.
    pub alternatives: Vec<DiagonalSet>,
    pub diagnostics: Vec<String>,
}

/// The development with the three diagonal slots left open.
struct System {
    base: Raw,
    scale: f64,
}

impl System {
    fn new(dev: &NaturalDevelopment) -> Self {
        Self { base: squared_entries(dev, 0.0, 0.0, 0.0), scale: dev.scale() }
    }

    fn with(&self, u: f64, v: f64, w: f64) -> Raw {
        let mut s = self.base;
        s[2][3] = u;
        s[3][2] = u;
        s[1][4] = v;
        s[4][1] = v;
        s[0][5] = w;
        s[5][0] = w;
        s
    }

    /// Signed mismatch `s45 - t*` between the given squared length of edge
    /// 45 and the one implied by the other entries, where `t*` is the vertex
    /// of the six-point determinant viewed as a quadratic in slot `(4, 5)`.
    ///
    /// Once both five-point determinants vanish, the six-point determinant
    /// is `A (s45 - t*)^2` with `A = -cm(x0..x3)`: a perfect square that
    /// touches zero without changing sign. The mismatch itself crosses
    /// zero transversally, so it is what the solver searches and polishes.
    fn mismatch(&self, s: &Raw, cm: fn(&[usize], &Raw) -> f64) -> f64 {
        let a = -cm(&[0, 1, 2, 3], s);
        let p = self.scale;
        let mut w = *s;
        let mut at = |t: f64| {
            w[4][5] = t;
            w[5][4] = t;
            cm(&EQ10, &w)
        };
        let b = (at(p) - at(-p)) / (2.0 * p);
        (s[4][5] + b / (2.0 * a)) / p
    }

    /// Normalized residuals of the two five-point equations and the edge-45
    /// mismatch, in double-double precision.
    fn residuals(&self, x: &[f64; 3]) -> [f64; 3] {
        let s = self.with(x[0], x[1], x[2]);
        let sc4 = self.scale.powi(4);
        [cm_raw(&EQ8, &s) / sc4, cm_raw(&EQ9, &s) / sc4, self.mismatch(&s, cm_raw)]
    }

    fn residuals_fast(&self, x: &[f64; 3]) -> [f64; 3] {
        let s = self.with(x[0], x[1], x[2]);
        let sc4 = self.scale.powi(4);
        [cm_raw_fast(&EQ8, &s) / sc4, cm_raw_fast(&EQ9, &s) / sc4, self.mismatch(&s, cm_raw_fast)]
    }

    /// Normalized six-point determinant, the certificate checked at the end.
    fn eq10(&self, x: &[f64; 3]) -> f64 {
        cm_raw(&EQ10, &self.with(x[0], x[1], x[2])) / self.scale.powi(5)
    }

    /// Jacobian by central differences. The five-point residuals are
    /// quadratic in each unknown, so their columns are exact up to rounding.
    fn jacobian(&self, x: &[f64; 3]) -> Matrix3<f64> {
        let h = 1e-6 * self.scale;
        let mut j = Matrix3::zeros();
        for col in 0..3 {
            let mut xp = *x;
            let mut xm = *x;
            xp[col] += h;
            xm[col] -= h;
            let (fp, fm) = (self.residuals_fast(&xp), self.residuals_fast(&xm));
            for row in 0..3 {
                j[(row, col)] = (fp[row] - fm[row]) / (2.0 * h);
            }
        }
        j
    }

    /// `(A, B, C)` of `t ↦ cm(subset)` with slot `(i, j)` set to `t`.
    fn quadratic(&self, s: &Raw, subset: &[usize], i: usize, j: usize) -> (f64, f64, f64) {
        let rest: Vec<usize> = subset.iter().copied().filter(|&k| k != i && k != j).collect();
        let a = -cm_raw_fast(&rest, s);
        let mut w = *s;
        let mut at = |t: f64| {
            w[i][j] = t;
            w[j][i] = t;
            cm_raw_fast(subset, &w)
        };
        let c = at(0.0);
        let p = self.scale;
        let b = (at(p) - at(-p)) / (2.0 * p);
        (a, b, c)
    }

    /// Open interval of `u` on which the base tetrahedron is nondegenerate.
    fn base_interval(&self) -> Option<(f64, f64)> {
        let s = self.with(0.0, 0.0, 0.0);
        let (a, b, c) = self.quadratic(&s, &[0, 1, 2, 3], 2, 3);
        let (lo, hi) = real_roots(a, b, c)?;
        let lo = lo.max(0.0);
        (hi > lo).then_some((lo, hi))
    }

    /// Branch values `(v, w)` at `u`; `sv`, `sw` select the smaller (false)
    /// or larger (true) root.
    fn branches(&self, u: f64) -> [Option<f64>; 4] {
        let s = self.with(u, 0.0, 0.0);
        let v = real_roots_tuple(self.quadratic(&s, &EQ8, 1, 4));
        let w = real_roots_tuple(self.quadratic(&s, &EQ9, 0, 5));
        [v.map(|r| r.0), v.map(|r| r.1), w.map(|r| r.0), w.map(|r| r.1)]
    }

    fn branch_point(&self, u: f64, sv: bool, sw: bool) -> Option<[f64; 3]> {
        let [v0, v1, w0, w1] = self.branches(u);
        let v = if sv { v1? } else { v0? };
        let w = if sw { w1? } else { w0? };
        (v > 0.0 && w > 0.0).then_some([u, v, w])
    }

    fn g(&self, u: f64, sv: bool, sw: bool) -> Option<f64> {
        let x = self.branch_point(u, sv, sw)?;
        Some(self.mismatch(&self.with(x[0], x[1], x[2]), cm_raw_fast))
    }
}

fn real_roots_tuple((a, b, c): (f64, f64, f64)) -> Option<(f64, f64)> {
    real_roots(a, b, c)
}

/// Real roots of `a t² + b t + c`, ascending. A vanishing `a` falls back to
/// the linear root.
fn real_roots(a: f64, b: f64, c: f64) -> Option<(f64, f64)> {
    let mag = a.abs().max(b.abs()).max(c.abs());
    if mag == 0.0 {
        return None;
    }
    if a.abs() <= 1e-14 * mag {
        if b == 0.0 {
            return None;
        }
        let r = -c / b;
        return Some((r, r));
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let (r1, r2) = if q == 0.0 { (0.0, 0.0) } else { (q / a, c / q) };
    Some((r1.min(r2), r1.max(r2)))
}

fn max_abs(r: &[f64; 3]) -> f64 {
    r.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Damped Newton on the three equalities. Returns the polished point if the
/// residuals end below `eps_rel` with all unknowns positive.
fn polish(sys: &System, start: [f64; 3], tol: &Tolerances) -> Option<[f64; 3]> {
    let mut x = start;
    let mut f = sys.residuals(&x);
    let mut norm = max_abs(&f);
    for _ in 0..tol.newton_max_iter {
        if norm == 0.0 {
            break;
        }
        let j = sys.jacobian(&x);
        let Some(step) = j.lu().solve(&-Vector3::from(f)) else { break };
        let mut lambda = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let trial = [x[0] + lambda * step[0], x[1] + lambda * step[1], x[2] + lambda * step[2]];
            if trial.iter().all(|&t| t > 0.0) {
                let ft = sys.residuals(&trial);
                let nt = max_abs(&ft);
                if nt < norm {
                    let moved = (0..3).map(|k| (trial[k] - x[k]).abs() / x[k].abs()).fold(0.0, f64::max);
                    x = trial;
                    f = ft;
                    norm = nt;
                    improved = moved > 1e-17;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (norm <= tol.eps_rel && sys.eq10(&x).abs() <= tol.eps_rel && x.iter().all(|&t| t > 0.0)).then_some(x)
}

fn bisect(sys: &System, mut lo: f64, mut hi: f64, mut g_lo: f64, sv: bool, sw: bool, tol: &Tolerances) -> f64 {
    while (hi - lo) > tol.bisect_rel * hi.abs().max(lo.abs()) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let Some(g_mid) = sys.g(mid, sv, sw) else { break };
        if g_mid == 0.0 {
            return mid;
        }
        if (g_mid > 0.0) == (g_lo > 0.0) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn same_point(a: &[f64; 3], b: &[f64; 3]) -> bool {
    (0..3).all(|k| (a[k] - b[k]).abs() <= DEDUP_REL * a[k].abs().max(b[k].abs()))
}

/// Squared-diagonal triples `(u, v, w)` solving the equality system, sorted
/// by `u`.
fn solve_squared(dev: &NaturalDevelopment, tol: &Tolerances) -> Result<Vec<[f64; 3]>> {
    let sys = System::new(dev);
    let (u_lo, u_hi) = sys
        .base_interval()
        .ok_or_else(|| Error::NoRealization("no diagonal length gives a nondegenerate base tetrahedron".into()))?;

    let n = tol.grid;
    let us: Vec<f64> = (0..n).map(|k| u_lo + (u_hi - u_lo) * (k as f64 + 0.5) / n as f64).collect();
    let mut seeds: Vec<[f64; 3]> = Vec::new();
    for (sv, sw) in [(false, false), (false, true), (true, false), (true, true)] {
        let gs: Vec<Option<f64>> = us.iter().map(|&u| sys.g(u, sv, sw)).collect();
        for k in 0..n {
            match (gs[k], gs.get(k + 1).copied().flatten()) {
                (Some(g0), Some(g1)) if g0 == 0.0 || (g0 > 0.0) != (g1 > 0.0) => {
                    let u = if g0 == 0.0 { us[k] } else { bisect(&sys, us[k], us[k + 1], g0, sv, sw, tol) };
                    if let Some(x) = sys.branch_point(u, sv, sw) {
                        seeds.push(x);
                    }
                }
                _ => {}
            }
            // Branch boundaries: a root may sit where the branch appears or
            // disappears, without a sign change on the grid.
            let prev = if k == 0 { None } else { gs[k - 1] };
            if gs[k].is_some() && (k == 0 || prev.is_none() || k + 1 == n || gs[k + 1].is_none()) {
                if let Some(x) = sys.branch_point(us[k], sv, sw) {
                    seeds.push(x);
                }
            }
        }
    }

    let mut found: Vec<[f64; 3]> = Vec::new();
    for seed in seeds {
        if let Some(x) = polish(&sys, seed, tol) {
            if x[0] <= u_lo || x[0] >= u_hi {
                continue;
            }
            // An antipodal pair collapsed onto one point: not an octahedron.
            if x.iter().any(|&t| t <= tol.eps_geom * sys.scale) {
                continue;
            }
            if !found.iter().any(|y| same_point(y, &x)) {
                found.push(x);
            }
        }
    }
    found.sort_by(|a, b| a[0].total_cmp(&b[0]));
    if found.is_empty() {
        return Err(Error::NoRealization("the equality system has no solution on any branch".into()));
    }
    Ok(found)
}

/// Every diagonal set satisfying the embeddability conditions, sorted by
/// `δ23`. Convexity is not checked here.
pub fn solve_diagonals(dev: &NaturalDevelopment, tol: &Tolerances) -> Result<Vec<DiagonalSet>> {
    tol.validate()?;
    solve_squared(dev, tol)?
        .into_iter()
        .map(|[u, v, w]| DiagonalSet::new(w.sqrt(), v.sqrt(), u.sqrt()))
        .collect()
}

/// Finds the convex octahedron with the given development.
pub fn reconstruct(dev: &NaturalDevelopment, tol: &Tolerances) -> Result<ReconstructionResult> {
    tol.validate()?;
    let mut diagnostics = Vec::new();
    let none = |diagnostics: Vec<String>, raw: usize| ReconstructionResult {
        status: Status::None,
        diagonals: None,
        embedding: None,
        report: None,
        candidates_found: 0,
        raw_candidates: raw,
        alternatives: Vec::new(),
        diagnostics,
    };

    let candidates = match solve_diagonals(dev, tol) {
        Ok(c) => c,
        Err(Error::NoRealization(why)) => {
            diagnostics.push(format!("no realization in 3-space: {why}"));
            return Ok(none(diagnostics, 0));
        }
        Err(e) => return Err(e),
    };

    let scale = dev.scale();
    let mut survivors: Vec<(DiagonalSet, EmbeddingResult)> = Vec::new();
    for diag in &candidates {
        let g2 = match group2(dev, diag, tol) {
            Ok(g) => g,
            Err(e) => {
                diagnostics.push(format!("candidate {diag:?} skipped: {e}"));
                continue;
            }
        };
        if !g2.satisfied {
            if g2.marginal && g2.entries.iter().all(|e| e.margin > -tol.eps_geom) {
                diagnostics.push(format!(
                    "candidate {diag:?} lies on the convexity boundary (min group-2 margin {:e})",
                    g2.min_margin()
                ));
            }
            continue;
        }
        let emb = match embed_six_points(&assemble_sdm(dev, diag), tol) {
            Ok(e) => e,
            Err(e) => {
                diagnostics.push(format!("candidate {diag:?} failed to embed: {e}"));
                continue;
            }
        };
        match convexity_of_points(&emb.points, scale, tol) {
            Ok(Convexity::Convex) if canonical_faces_are_hull_facets(&emb.points, scale, tol) => {
                survivors.push((*diag, emb));
            }
            Ok(c) => diagnostics.push(format!("candidate {diag:?} passed group 2 but embeds as {c:?}")),
            Err(e) => diagnostics.push(format!("candidate {diag:?}: {e}")),
        }
    }

    match survivors.len() {
        0 => {
            diagnostics.push(format!("none of {} realizations is convex", candidates.len()));
            Ok(none(diagnostics, candidates.len()))
        }
        1 => {
            let (diag, emb) = survivors.pop().expect("one survivor");
            Ok(ReconstructionResult {
                status: Status::Unique,
                diagonals: Some(diag),
                embedding: Some(emb),
                report: Some(evaluate(dev, &diag, tol)?),
                candidates_found: 1,
                raw_candidates: candidates.len(),
                alternatives: Vec::new(),
                diagnostics,
            })
        }
        k => {
            diagnostics.push(format!("{k} convex realizations survived; tolerances may be too loose"));
            Ok(ReconstructionResult {
                status: Status::Ambiguous,
                diagonals: None,
                embedding: None,
                report: None,
                candidates_found: k,
                raw_candidates: candidates.len(),
                alternatives: survivors.into_iter().map(|(d, _)| d).collect(),
                diagnostics,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genkit::{random_convex_octahedron_at, GenConfig};
    use crate::model::{develop, diagonals_of};
    use approx::assert_relative_eq;

    #[test]
    fn roots_of_quadratics() {
        assert_eq!(real_roots(1.0, -3.0, 2.0), Some((1.0, 2.0)));
        assert_eq!(real_roots(1.0, 0.0, 1.0), None);
        assert_eq!(real_roots(0.0, 2.0, -4.0), Some((2.0, 2.0)));
        let (a, b) = real_roots(-2.0, 0.0, 8.0).unwrap();
        assert_eq!((a, b), (-2.0, 2.0));
    }

    #[test]
    fn regular_development() {
        let dev = NaturalDevelopment::from_lengths([1.0; 12]).unwrap();
        let tol = Tolerances::default();
        let cands = solve_diagonals(&dev, &tol).unwrap();
        let r2 = 2f64.sqrt();
        assert!(cands.iter().any(|d| d.max_relative_difference(&DiagonalSet { d05: r2, d14: r2, d23: r2 }) < 1e-10));
        let r = reconstruct(&dev, &tol).unwrap();
        assert_eq!(r.status, Status::Unique);
        let d = r.diagonals.unwrap();
        for x in [d.d05, d.d14, d.d23] {
            assert_relative_eq!(x, r2, max_relative = 1e-10);
        }
    }

    #[test]
    fn random_round_trips() {
        let cfg = GenConfig::with_seed(2024);
        let tol = Tolerances::default();
        for k in 0..20 {
            let oct = random_convex_octahedron_at(&cfg, k).unwrap();
            let r = reconstruct(&develop(&oct), &tol).unwrap();
            assert_eq!(r.status, Status::Unique, "instance {k}: {:?}", r.diagnostics);
            let want = diagonals_of(&oct);
            assert!(r.diagonals.unwrap().max_relative_difference(&want) < 1e-8);
        }
    }

    #[test]
    fn impossible_vertex_star_has_no_realization() {
        // At vertex 0 the face angle of {0,1,2} is close to π while the other
        // three are small, so the link of vertex 0 cannot close up.
        let mut l = [1.0; 12];
        let set = |l: &mut [f64; 12], i: usize, j: usize, v: f64| l[crate::model::edge_index(i, j).unwrap()] = v;
        set(&mut l, 1, 2, 1.99);
        for (i, j) in [(1, 3), (2, 4), (3, 4)] {
            set(&mut l, i, j, 0.35);
        }
        let dev = NaturalDevelopment::from_lengths(l).unwrap();
        let tol = Tolerances::default();
        assert!(matches!(solve_diagonals(&dev, &tol), Err(Error::NoRealization(_))));
        let r = reconstruct(&dev, &tol).unwrap();
        assert_eq!(r.status, Status::None);
        assert!(!r.diagnostics.is_empty());
    }
}
