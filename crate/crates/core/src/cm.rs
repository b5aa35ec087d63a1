//! Cayley–Menger determinants, simplex volumes from distances, Menger's
//! embeddability conditions for six points, and trilateration.

use serde::{Deserialize, Serialize};

use crate::det::{det_fast, det_precise, MAX_DIM};
use crate::error::{Error, Result};
use crate::tolerances::Tolerances;

/// Largest number of points a matrix may hold.
pub const MAX_POINTS: usize = 7;

pub type Point3 = [f64; 3];

/// Symmetric matrix of squared distances with zero diagonal.
///
/// `scale` is the length² unit used to make residuals dimensionless. By
/// default it is the mean off-diagonal entry; matrices assembled from a
/// development carry the mean squared edge length instead.
#[derive(Debug, Clone, PartialEq)]
pub struct SquaredDistanceMatrix {
    n: usize,
    s: [[f64; MAX_POINTS]; MAX_POINTS],
    scale: f64,
}

impl SquaredDistanceMatrix {
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if !(2..=MAX_POINTS).contains(&n) {
            return Err(Error::InvalidMatrix(format!("need 2..={MAX_POINTS} points, got {n}")));
        }
        let mut s = [[0.0; MAX_POINTS]; MAX_POINTS];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidMatrix(format!("row {i} has {} entries, expected {n}", row.len())));
            }
            s[i][..n].copy_from_slice(row);
        }
        Self::from_array(n, s)
    }

    pub(crate) fn from_array(n: usize, s: [[f64; MAX_POINTS]; MAX_POINTS]) -> Result<Self> {
        for i in 0..n {
            if s[i][i] != 0.0 {
                return Err(Error::InvalidMatrix(format!("diagonal entry {i} is {} (must be 0)", s[i][i])));
            }
            for j in i + 1..n {
                if s[i][j] != s[j][i] {
                    return Err(Error::InvalidMatrix(format!("entries ({i},{j}) and ({j},{i}) differ")));
                }
                if !(s[i][j] > 0.0 && s[i][j].is_finite()) {
                    return Err(Error::InvalidMatrix(format!(
                        "squared distance ({i},{j}) = {} must be positive and finite",
                        s[i][j]
                    )));
                }
            }
        }
        let pairs = (n * (n - 1) / 2) as f64;
        let mut sum = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                sum += s[i][j];
            }
        }
        Ok(Self { n, s, scale: sum / pairs })
    }

    /// Squared pairwise distances of a point cloud.
    pub fn from_points(points: &[Point3]) -> Result<Self> {
        let n = points.len();
        if !(2..=MAX_POINTS).contains(&n) {
            return Err(Error::InvalidMatrix(format!("need 2..={MAX_POINTS} points, got {n}")));
        }
        let mut s = [[0.0; MAX_POINTS]; MAX_POINTS];
        for i in 0..n {
            for j in i + 1..n {
                let d = dist_sq(&points[i], &points[j]);
                s[i][j] = d;
                s[j][i] = d;
            }
        }
        Self::from_array(n, s)
    }

    /// Replaces the normalization scale. Must be positive.
    pub fn with_scale(mut self, scale: f64) -> Self {
        assert!(scale > 0.0 && scale.is_finite(), "scale must be positive");
        self.scale = scale;
        self
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.s[i][j]
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.s[i][..self.n].to_vec()).collect()
    }

    pub(crate) fn raw(&self) -> &[[f64; MAX_POINTS]; MAX_POINTS] {
        &self.s
    }

    /// Multiplies every squared distance (and the scale) by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for row in out.s.iter_mut() {
            for x in row.iter_mut() {
                *x *= factor;
            }
        }
        out.scale *= factor;
        out
    }

    /// Largest relative difference between corresponding entries.
    pub fn max_relative_difference(&self, other: &Self) -> f64 {
        assert_eq!(self.n, other.n);
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in i + 1..self.n {
                let a = self.s[i][j];
                let b = other.s[i][j];
                worst = worst.max((a - b).abs() / a.abs().max(b.abs()));
            }
        }
        worst
    }
}

/// A Cayley–Menger determinant of `order + 1` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CmValue {
    pub value: f64,
    pub order: usize,
    /// `value / scale^order`.
    pub normalized: f64,
}

pub(crate) fn dist_sq(a: &Point3, b: &Point3) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

pub(crate) fn bordered(subset: &[usize], s: &[[f64; MAX_POINTS]; MAX_POINTS]) -> [[f64; MAX_DIM]; MAX_DIM] {
    let m = subset.len() + 1;
    let mut a = [[0.0; MAX_DIM]; MAX_DIM];
    for k in 1..m {
        a[0][k] = 1.0;
        a[k][0] = 1.0;
    }
    for (r, &i) in subset.iter().enumerate() {
        for (c, &j) in subset.iter().enumerate() {
            a[r + 1][c + 1] = s[i][j];
        }
    }
    a
}

/// Precise Cayley–Menger determinant over raw squared distances; no checks.
pub(crate) fn cm_raw(subset: &[usize], s: &[[f64; MAX_POINTS]; MAX_POINTS]) -> f64 {
    det_precise(subset.len() + 1, &bordered(subset, s))
}

/// `f64` variant of [`cm_raw`] for inner loops.
pub(crate) fn cm_raw_fast(subset: &[usize], s: &[[f64; MAX_POINTS]; MAX_POINTS]) -> f64 {
    det_fast(subset.len() + 1, &bordered(subset, s))
}

fn check_subset(subset: &[usize], n: usize) -> Result<()> {
    if subset.len() < 2 || subset.len() > MAX_POINTS {
        return Err(Error::SubsetSize(subset.len()));
    }
    for (k, &i) in subset.iter().enumerate() {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
        if subset[..k].contains(&i) {
            return Err(Error::DuplicateIndex(i));
        }
    }
    Ok(())
}

/// The bordered Cayley–Menger determinant of the points in `subset`.
pub fn cm_determinant(subset: &[usize], m: &SquaredDistanceMatrix) -> Result<CmValue> {
    check_subset(subset, m.n)?;
    let order = subset.len() - 1;
    let value = cm_raw(subset, &m.s);
    Ok(CmValue { value, order, normalized: value / m.scale.powi(order as i32) })
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Squared `n`-volume of the simplex spanned by `n + 1` points.
///
/// Uses `vol² = (-1)^(n+1) cm / (2^n (n!)^2)`. A normalized determinant with
/// the wrong sign by less than `tol.eps_rel` is treated as a flat simplex;
/// anything beyond that cannot come from points in Euclidean space.
pub fn simplex_volume_sq(subset: &[usize], m: &SquaredDistanceMatrix, tol: &Tolerances) -> Result<f64> {
    if subset.len() > 5 {
        return Err(Error::SubsetSize(subset.len()));
    }
    let cm = cm_determinant(subset, m)?;
    let n = cm.order;
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    let signed = sign * cm.value;
    if signed < 0.0 {
        if sign * cm.normalized < -tol.eps_rel {
            return Err(Error::NotEmbeddable(format!(
                "{}-simplex {:?} has normalized Cayley-Menger value {:e} of the wrong sign",
                n, subset, cm.normalized
            )));
        }
        return Ok(0.0);
    }
    Ok(signed / (2f64.powi(n as i32) * factorial(n).powi(2)))
}

/// Menger's conditions for six points with base `x0..x3`, target dimension 3.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MengerReport {
    /// Normalized `(-1)^(k+1) cm(x0..xk)` for `k = 1, 2, 3`; must be positive.
    pub strict_inequalities: [f64; 3],
    /// Normalized `cm(x0..x3, x4)`, `cm(x0..x3, x5)`, `cm(x0..x5)`; must vanish.
    pub equalities: [f64; 3],
    pub satisfied: bool,
}

pub fn menger_conditions(m: &SquaredDistanceMatrix, tol: &Tolerances) -> Result<MengerReport> {
    if m.n != 6 {
        return Err(Error::InvalidMatrix(format!("Menger conditions need 6 points, got {}", m.n)));
    }
    let norm = |subset: &[usize]| cm_raw(subset, &m.s) / m.scale.powi(subset.len() as i32 - 1);
    let strict_inequalities = [norm(&[0, 1]), -norm(&[0, 1, 2]), norm(&[0, 1, 2, 3])];
    let equalities = [norm(&[0, 1, 2, 3, 4]), norm(&[0, 1, 2, 3, 5]), norm(&[0, 1, 2, 3, 4, 5])];
    let satisfied = strict_inequalities.iter().all(|&x| x > tol.eps_rel)
        && equalities.iter().all(|&x| x.abs() <= tol.eps_rel);
    Ok(MengerReport { strict_inequalities, equalities, satisfied })
}

/// Six points in 3-space realizing a squared distance matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingResult {
    pub points: [Point3; 6],
    /// Largest `|‖p_i − p_j‖² − s_ij| / scale` over the 15 pairs.
    pub max_distance_error: f64,
}

/// Places six points by sequential trilateration.
///
/// `x0` goes to the origin, `x1` on the positive first axis, `x2` in the
/// upper half of the first coordinate plane and `x3` above it; `x4` and `x5`
/// come from the linear system of squared-distance differences against the
/// base tetrahedron. All 15 distances are then checked.
pub fn embed_six_points(m: &SquaredDistanceMatrix, tol: &Tolerances) -> Result<EmbeddingResult> {
    if m.n != 6 {
        return Err(Error::InvalidMatrix(format!("embedding needs 6 points, got {}", m.n)));
    }
    let s = &m.s;
    let cm3 = cm_raw(&[0, 1, 2], s);
    let cm4 = cm_raw(&[0, 1, 2, 3], s);
    let base_margin = cm4 / m.scale.powi(3);
    if base_margin <= tol.eps_geom || cm3 >= 0.0 {
        return Err(Error::DegenerateBase { margin: base_margin });
    }

    let d01 = s[0][1].sqrt();
    let x1 = [d01, 0.0, 0.0];
    let x2x = (s[0][1] + s[0][2] - s[1][2]) / (2.0 * d01);
    let x2 = [x2x, (-cm3).sqrt() / (2.0 * d01), 0.0];

    // Coordinates of a point from its squared distances to x0..x2 (first two
    // axes); the third is supplied separately.
    let planar = |s0: f64, s1: f64, s2: f64| {
        let px = (s[0][1] + s0 - s1) / (2.0 * x1[0]);
        let py = (x2[0] * x2[0] + x2[1] * x2[1] + s0 - s2 - 2.0 * x2[0] * px) / (2.0 * x2[1]);
        (px, py)
    };

    let (x3x, x3y) = planar(s[0][3], s[1][3], s[2][3]);
    let x3 = [x3x, x3y, (cm4 / (-2.0 * cm3)).sqrt()];

    let place = |k: usize| {
        let (px, py) = planar(s[0][k], s[1][k], s[2][k]);
        let n3 = x3[0] * x3[0] + x3[1] * x3[1] + x3[2] * x3[2];
        let pz = (n3 + s[0][k] - s[3][k] - 2.0 * x3[0] * px - 2.0 * x3[1] * py) / (2.0 * x3[2]);
        [px, py, pz]
    };

    let points = [[0.0; 3], x1, x2, x3, place(4), place(5)];
    let mut mismatch: f64 = 0.0;
    for i in 0..6 {
        for j in i + 1..6 {
            mismatch = mismatch.max((dist_sq(&points[i], &points[j]) - s[i][j]).abs() / m.scale);
        }
    }
    if !(mismatch <= tol.eps_embed) {
        return Err(Error::InconsistentInput { mismatch });
    }
    Ok(EmbeddingResult { points, max_distance_error: mismatch })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn uniform(n: usize, d2: f64) -> SquaredDistanceMatrix {
        let rows: Vec<Vec<f64>> =
            (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { d2 }).collect()).collect();
        SquaredDistanceMatrix::new(&rows).unwrap()
    }

    // Standard regular octahedron with edge 1: vertices ±e_i / √2, labeled so
    // that (0,5), (1,4), (2,3) are antipodal.
    fn regular_octahedron() -> [Point3; 6] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        [[h, 0.0, 0.0], [0.0, h, 0.0], [0.0, 0.0, -h], [0.0, 0.0, h], [0.0, -h, 0.0], [-h, 0.0, 0.0]]
    }

    #[test]
    fn two_point_value() {
        let m = uniform(2, 4.0);
        let cm = cm_determinant(&[0, 1], &m).unwrap();
        assert_eq!(cm.value, 8.0);
        assert_eq!(cm.order, 1);
    }

    #[test]
    fn unit_simplices() {
        let m = uniform(5, 1.0);
        assert_relative_eq!(cm_determinant(&[0, 1, 2], &m).unwrap().value, -3.0, max_relative = 1e-12);
        assert_relative_eq!(cm_determinant(&[0, 1, 2, 3], &m).unwrap().value, 4.0, max_relative = 1e-12);
    }

    #[test]
    fn subset_errors() {
        let m = uniform(4, 1.0);
        assert_eq!(cm_determinant(&[0, 4], &m), Err(Error::IndexOutOfRange { index: 4, n: 4 }));
        assert_eq!(cm_determinant(&[1, 2, 1], &m), Err(Error::DuplicateIndex(1)));
        assert_eq!(cm_determinant(&[1], &m), Err(Error::SubsetSize(1)));
    }

    #[test]
    fn matrix_invariants_enforced() {
        assert!(SquaredDistanceMatrix::new(&[vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        assert!(SquaredDistanceMatrix::new(&[vec![1.0, 1.0], vec![1.0, 0.0]]).is_err());
        assert!(SquaredDistanceMatrix::new(&[vec![0.0, 0.0], vec![0.0, 0.0]]).is_err());
        assert!(SquaredDistanceMatrix::new(&[vec![0.0, 1.0]]).is_err());
    }

    #[test]
    fn volumes_from_distances() {
        let tol = Tolerances::default();
        let m = uniform(4, 1.0);
        assert_relative_eq!(simplex_volume_sq(&[0, 1, 2], &m, &tol).unwrap(), 3.0 / 16.0, max_relative = 1e-12);
        assert_relative_eq!(simplex_volume_sq(&[0, 1, 2, 3], &m, &tol).unwrap(), 1.0 / 72.0, max_relative = 1e-12);
        assert_relative_eq!(simplex_volume_sq(&[2, 3], &m, &tol).unwrap(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn collinear_triangle_has_zero_area() {
        let m = SquaredDistanceMatrix::new(&[vec![0.0, 4.0, 1.0], vec![4.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]]).unwrap();
        assert_eq!(simplex_volume_sq(&[0, 1, 2], &m, &Tolerances::default()).unwrap(), 0.0);
    }

    #[test]
    fn impossible_triangle_is_not_embeddable() {
        let m = SquaredDistanceMatrix::new(&[vec![0.0, 9.0, 1.0], vec![9.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]]).unwrap();
        assert!(matches!(simplex_volume_sq(&[0, 1, 2], &m, &Tolerances::default()), Err(Error::NotEmbeddable(_))));
    }

    #[test]
    fn regular_octahedron_satisfies_menger() {
        let m = SquaredDistanceMatrix::from_points(&regular_octahedron()).unwrap();
        let r = menger_conditions(&m, &Tolerances::default()).unwrap();
        assert!(r.satisfied);
        for e in r.equalities {
            assert!(e.abs() <= 1e-12, "{e}");
        }
        assert!(r.strict_inequalities.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn six_equidistant_points_fail_menger() {
        let m = uniform(6, 1.0);
        let r = menger_conditions(&m, &Tolerances::default()).unwrap();
        assert!(!r.satisfied);
        assert_relative_eq!(r.equalities[2], 6.0, max_relative = 1e-12);
        assert!(r.equalities[0].abs() > 1e-3);
    }

    #[test]
    fn coplanar_points_fail_strict_margin() {
        let pts = [
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [1.0, 1.0, 0.0],
            [2.0, 0.5, 0.0],
            [0.5, 2.0, 0.0],
        ];
        let m = SquaredDistanceMatrix::from_points(&pts).unwrap();
        let r = menger_conditions(&m, &Tolerances::default()).unwrap();
        assert!(r.strict_inequalities[2] <= 1e-12);
        assert!(!r.satisfied);
    }

    #[test]
    fn embeds_regular_octahedron() {
        let m = SquaredDistanceMatrix::from_points(&regular_octahedron()).unwrap();
        let e = embed_six_points(&m, &Tolerances::default()).unwrap();
        let back = SquaredDistanceMatrix::from_points(&e.points).unwrap();
        assert!(m.max_relative_difference(&back) <= 1e-10);
        assert_eq!(e.points[0], [0.0; 3]);
        assert!(e.points[1][0] > 0.0 && e.points[1][1] == 0.0 && e.points[1][2] == 0.0);
        assert!(e.points[2][1] > 0.0 && e.points[2][2] == 0.0);
        assert!(e.points[3][2] > 0.0);
    }

    #[test]
    fn equidistant_points_are_inconsistent() {
        let m = uniform(6, 1.0);
        assert!(matches!(embed_six_points(&m, &Tolerances::default()), Err(Error::InconsistentInput { .. })));
    }

    #[test]
    fn flat_base_cannot_trilaterate() {
        let pts = [
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [1.0, 1.0, 0.0],
            [0.3, 0.2, 1.0],
            [0.5, 0.7, -1.0],
        ];
        let m = SquaredDistanceMatrix::from_points(&pts).unwrap();
        assert!(matches!(embed_six_points(&m, &Tolerances::default()), Err(Error::DegenerateBase { .. })));
    }
}
