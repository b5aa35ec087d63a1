//! Deciding affine equivalence of two convex octahedra from their
//! developments, and recovering the affine map between reconstructions.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::cm::{EmbeddingResult, Point3};
use crate::conditions::{group5, Group5Report};
use crate::error::{Error, Result};
use crate::model::{octahedral_symmetries, NaturalDevelopment, Octahedron3};
use crate::reconstruct::{reconstruct, ReconstructionResult, Status};
use crate::tolerances::Tolerances;

/// `x ↦ linear · x + translation`, with `linear` stored row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub linear: [[f64; 3]; 3],
    pub translation: Point3,
    pub det: f64,
}

fn to_matrix(m: &[[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::from_fn(|r, c| m[r][c])
}

fn to_rows(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    std::array::from_fn(|r| std::array::from_fn(|c| m[(r, c)]))
}

impl AffineMap {
    pub fn new(linear: [[f64; 3]; 3], translation: Point3) -> Self {
        let det = to_matrix(&linear).determinant();
        Self { linear, translation, det }
    }

    pub fn from_matrix(linear: &Matrix3<f64>, translation: Point3) -> Self {
        Self::new(to_rows(linear), translation)
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        to_matrix(&self.linear)
    }

    pub fn identity() -> Self {
        Self::new([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], [0.0; 3])
    }

    pub fn apply(&self, p: &Point3) -> Point3 {
        let q = to_matrix(&self.linear) * Vector3::from(*p) + Vector3::from(self.translation);
        [q[0], q[1], q[2]]
    }

    pub fn apply_octahedron(&self, oct: &Octahedron3) -> Result<Octahedron3> {
        oct.transformed(&self.linear, &self.translation)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecoveredMap {
    pub map: AffineMap,
    /// `max_{i=4,5} |A(p_i) - q_i| / sqrt(scale_B)`.
    pub map_residual: f64,
}

/// The unique affine map sending points 0–3 of `a` onto points 0–3 of `b`,
/// and how far it misses on points 4 and 5.
pub fn recover_affine_map(a: &EmbeddingResult, b: &EmbeddingResult, _tol: &Tolerances) -> Result<RecoveredMap> {
    let (p, q) = (&a.points, &b.points);
    let diff = |x: &Point3, y: &Point3| Vector3::new(x[0] - y[0], x[1] - y[1], x[2] - y[2]);
    let src = Matrix3::from_columns(&[diff(&p[1], &p[0]), diff(&p[2], &p[0]), diff(&p[3], &p[0])]);
    let dst = Matrix3::from_columns(&[diff(&q[1], &q[0]), diff(&q[2], &q[0]), diff(&q[3], &q[0])]);
    let len_a = (1..4).map(|k| src.column(k - 1).norm()).fold(0.0, f64::max);
    if !(src.determinant().abs() > 1e-12 * len_a.powi(3)) {
        return Err(Error::SingularBase);
    }
    let inv = src.try_inverse().ok_or(Error::SingularBase)?;
    let linear = dst * inv;
    let t = Vector3::from(q[0]) - linear * Vector3::from(p[0]);
    let map = AffineMap::from_matrix(&linear, [t[0], t[1], t[2]]);

    let scale_b = edge_scale(q);
    let map_residual = [4, 5]
        .iter()
        .map(|&i| {
            let img = map.apply(&p[i]);
            let d = diff(&img, &q[i]);
            d.norm() / scale_b.sqrt()
        })
        .fold(0.0, f64::max);
    Ok(RecoveredMap { map, map_residual })
}

fn edge_scale(points: &[Point3; 6]) -> f64 {
    crate::model::EDGES
        .iter()
        .map(|&(i, j)| crate::cm::dist_sq(&points[i], &points[j]))
        .sum::<f64>()
        / 12.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Equivalent,
    NotEquivalent,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub verdict: Verdict,
    /// Estimated `(det A)^2`.
    pub alpha_hat: Option<f64>,
    pub ratios: Option<[f64; 12]>,
    pub spread: Option<f64>,
    pub group5: Option<Group5Report>,
    pub map: Option<AffineMap>,
    pub map_residual: Option<f64>,
    pub reconstructions: [ReconstructionResult; 2],
    pub diagnostics: Vec<String>,
}

/// Decides whether the octahedra with developments `a` and `b` (labels
/// already in correspondence) are affinely equivalent.
pub fn decide(a: &NaturalDevelopment, b: &NaturalDevelopment, tol: &Tolerances) -> Result<Decision> {
    tol.validate()?;
    let ra = reconstruct(a, tol)?;
    let rb = reconstruct(b, tol)?;
    let mut diagnostics = Vec::new();
    let mut decision = Decision {
        verdict: Verdict::Indeterminate,
        alpha_hat: None,
        ratios: None,
        spread: None,
        group5: None,
        map: None,
        map_residual: None,
        reconstructions: [ra.clone(), rb.clone()],
        diagnostics: Vec::new(),
    };

    let (Some(da), Some(db)) = (ra.diagonals, rb.diagonals) else {
        for (name, r) in [("first", &ra), ("second", &rb)] {
            if r.status != Status::Unique {
                diagnostics.push(format!("{name} development: reconstruction status {:?}", r.status));
            }
        }
        let one_missing = matches!(
            (ra.status, rb.status),
            (Status::Unique, Status::None) | (Status::None, Status::Unique)
        );
        if one_missing {
            diagnostics.push("no realization: only one development admits a convex octahedron".into());
            decision.verdict = Verdict::NotEquivalent;
        }
        decision.diagnostics = diagnostics;
        return Ok(decision);
    };

    let g5 = group5(a, &da, b, &db, tol)?;
    decision.alpha_hat = Some(g5.alpha_hat);
    decision.ratios = Some(g5.ratios);
    decision.spread = Some(g5.spread);

    let emb_a = ra.embedding.as_ref().expect("unique reconstruction has an embedding");
    let emb_b = rb.embedding.as_ref().expect("unique reconstruction has an embedding");
    let recovered = recover_affine_map(emb_a, emb_b, tol)?;
    decision.map = Some(recovered.map);
    decision.map_residual = Some(recovered.map_residual);

    decision.verdict = if g5.spread <= tol.alpha_yes && g5.satisfied {
        if recovered.map_residual <= tol.eps_rel {
            Verdict::Equivalent
        } else {
            diagnostics.push(format!(
                "volume ratios agree but the recovered map misses vertices 4/5 by {:e}",
                recovered.map_residual
            ));
            Verdict::Indeterminate
        }
    } else if g5.spread >= tol.alpha_no {
        Verdict::NotEquivalent
    } else {
        diagnostics.push(format!("ratio spread {:e} lies in the indeterminate band", g5.spread));
        Verdict::Indeterminate
    };
    decision.group5 = Some(g5);
    decision.diagnostics = diagnostics;
    Ok(decision)
}

/// A relabeling of the second development that passes the cheap
/// volume-ratio screen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelingCandidate {
    /// Edge `(i, j)` of the relabeled development is edge
    /// `(perm[i], perm[j])` of the original.
    pub perm: [usize; 6],
    pub spread: f64,
    pub alpha_hat: f64,
}

/// Screens the 48 octahedral relabelings of `b` by group-5 spread against
/// `a`, keeping those below `alpha_no`, best first.
///
/// Both developments are reconstructed once; a relabeling of a convex
/// octahedron relabels its diagonals the same way, so no per-relabeling
/// solve is needed.
pub fn align_labelings(
    a: &NaturalDevelopment,
    b: &NaturalDevelopment,
    tol: &Tolerances,
) -> Result<Vec<LabelingCandidate>> {
    tol.validate()?;
    let ra = reconstruct(a, tol)?;
    let rb = reconstruct(b, tol)?;
    let (Some(da), Some(emb_b)) = (ra.diagonals, rb.embedding.as_ref()) else {
        return Ok(Vec::new());
    };
    let mut out = Vec::new();
    for perm in octahedral_symmetries() {
        let b_rel = b.relabeled(&perm);
        let pts = perm.map(|k| emb_b.points[k]);
        let d = |i: usize, j: usize| crate::cm::dist_sq(&pts[i], &pts[j]).sqrt();
        let db = crate::model::DiagonalSet::new(d(0, 5), d(1, 4), d(2, 3))?;
        if let Ok(g) = group5(a, &da, &b_rel, &db, tol) {
            if g.spread < tol.alpha_no {
                out.push(LabelingCandidate { perm, spread: g.spread, alpha_hat: g.alpha_hat });
            }
        }
    }
    out.sort_by(|x, y| x.spread.total_cmp(&y.spread));
    Ok(out)
}
