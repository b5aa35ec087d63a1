//! Seeded instance generation: random convex octahedra, random affine maps,
//! and single-edge perturbations of developments.
//!
//! Every sample is a pure function of `(seed, counter)`: the counter selects
//! an independent ChaCha stream, so parallel or out-of-order generation
//! reproduces the same instances.

use nalgebra::Matrix3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::cm::Point3;
use crate::decision::AffineMap;
use crate::error::{Error, Result};
use crate::model::{
    canonical_faces_are_hull_facets, edge_index, is_convex, NaturalDevelopment, Octahedron3,
};
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub seed: u64,
    /// Coordinate perturbation amplitude relative to the unit axis points.
    pub noise: f64,
    pub affine_det_range: (f64, f64),
    pub affine_cond_max: f64,
    /// Translation components are drawn from `[-t, t]`.
    pub affine_translation: f64,
    pub max_rejections: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            noise: 0.25,
            affine_det_range: (0.1, 10.0),
            affine_cond_max: 100.0,
            affine_translation: 1.0,
            max_rejections: 1000,
        }
    }
}

impl GenConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Parse(m));
        if !(0.0..1.0).contains(&self.noise) {
            return bad(format!("noise must lie in [0, 1), got {}", self.noise));
        }
        let (lo, hi) = self.affine_det_range;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return bad(format!("empty determinant range [{lo}, {hi}]"));
        }
        if !(self.affine_cond_max >= 1.0) {
            return bad(format!("condition bound must be at least 1, got {}", self.affine_cond_max));
        }
        if !(self.affine_translation >= 0.0) {
            return bad("translation amplitude must be non-negative".into());
        }
        Ok(())
    }
}

/// The octahedron with vertices `±e_i`, labeled so that antipodal labels
/// are antipodal points: `0 = e1, 1 = e2, 2 = -e3, 3 = e3, 4 = -e2, 5 = -e1`.
pub fn axis_octahedron() -> [Point3; 6] {
    [
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, -1.0],
        [0.0, 0.0, 1.0],
        [0.0, -1.0, 0.0],
        [-1.0, 0.0, 0.0],
    ]
}

/// Independent stream `counter` of generator `seed`.
pub fn instance_rng(seed: u64, counter: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(counter);
    rng
}

fn random_rotation<R: Rng>(rng: &mut R) -> Matrix3<f64> {
    loop {
        let q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n < 1e-6 {
            continue;
        }
        let [w, x, y, z] = q.map(|c| c / n);
        return Matrix3::new(
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        );
    }
}

/// Axis points perturbed by uniform noise, then rotated. No validity checks.
pub fn candidate_vertices<R: Rng>(rng: &mut R, noise: f64) -> [Point3; 6] {
    let mut v = axis_octahedron();
    if noise > 0.0 {
        for p in v.iter_mut() {
            for c in p.iter_mut() {
                *c += rng.random_range(-noise..=noise);
            }
        }
    }
    let r = random_rotation(rng);
    v.map(|p| {
        let q = r * nalgebra::Vector3::from(p);
        [q[0], q[1], q[2]]
    })
}

/// Whether generated vertices pass every convex-octahedron check with room
/// to spare (margins above `eps_geom`).
fn accept_convex(v: [Point3; 6], tol: &Tolerances) -> Option<Octahedron3> {
    let oct = Octahedron3::with_threshold(v, tol.eps_geom).ok()?;
    let convex = is_convex(&oct, tol).ok()?.is_convex();
    (convex && canonical_faces_are_hull_facets(&v, oct.scale(), tol)).then_some(oct)
}

/// Convex octahedron number `counter` of the generator.
pub fn random_convex_octahedron_at(cfg: &GenConfig, counter: u64) -> Result<Octahedron3> {
    cfg.validate()?;
    let tol = Tolerances::default();
    let mut rng = instance_rng(cfg.seed, counter);
    for _ in 0..=cfg.max_rejections {
        if let Some(oct) = accept_convex(candidate_vertices(&mut rng, cfg.noise), &tol) {
            return Ok(oct);
        }
    }
    Err(Error::TooManyRejections(cfg.max_rejections))
}

pub fn random_convex_octahedron(cfg: &GenConfig) -> Result<Octahedron3> {
    random_convex_octahedron_at(cfg, 0)
}

/// A generated realization before the convexity filter, for exercising
/// code on nonconvex inputs. Only octahedron validity is enforced.
#[derive(Debug, Clone, Copy)]
pub struct Realization {
    pub octahedron: Octahedron3,
    pub convex: bool,
}

pub fn random_realization_at(cfg: &GenConfig, counter: u64) -> Result<Realization> {
    cfg.validate()?;
    let tol = Tolerances::default();
    let mut rng = instance_rng(cfg.seed, counter);
    for _ in 0..=cfg.max_rejections {
        let v = candidate_vertices(&mut rng, cfg.noise);
        if let Ok(octahedron) = Octahedron3::with_threshold(v, tol.eps_geom) {
            let convex = accept_convex(v, &tol).is_some();
            return Ok(Realization { octahedron, convex });
        }
    }
    Err(Error::TooManyRejections(cfg.max_rejections))
}

fn condition_number(m: &Matrix3<f64>) -> f64 {
    let sv = m.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

/// Random affine map number `counter`: `|det|` log-uniform in the configured
/// range, condition number within bound, uniform translation.
pub fn random_affine_at(cfg: &GenConfig, counter: u64) -> Result<AffineMap> {
    cfg.validate()?;
    // Disjoint from the octahedron streams of the same seed.
    let mut rng = instance_rng(cfg.seed ^ 0xa5a5_5a5a_f00d_cafe, counter);
    let (lo, hi) = cfg.affine_det_range;
    let target = if lo == hi { lo } else { rng.random_range(lo.ln()..hi.ln()).exp() };
    let linear = if cfg.affine_cond_max == 1.0 {
        // Only multiples of orthogonal maps qualify; take the scaled identity.
        Matrix3::identity() * target.cbrt()
    } else {
        let mut tries = 0;
        loop {
            let m = Matrix3::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
            let det = m.determinant();
            tries += 1;
            if det.abs() > 1e-8 && condition_number(&m) <= cfg.affine_cond_max {
                break m * (target / det.abs()).cbrt();
            }
            if tries > cfg.max_rejections {
                return Err(Error::TooManyRejections(cfg.max_rejections));
            }
        }
    };
    let t = cfg.affine_translation;
    let translation: Point3 =
        std::array::from_fn(|_| if t > 0.0 { rng.random_range(-t..=t) } else { 0.0 });
    Ok(AffineMap::from_matrix(&linear, translation))
}

pub fn random_affine(cfg: &GenConfig) -> Result<AffineMap> {
    random_affine_at(cfg, 0)
}

/// Scales one edge of a development, re-validating the result.
pub fn perturb_development(dev: &NaturalDevelopment, edge_key: &str, factor: f64) -> Result<NaturalDevelopment> {
    let idx = parse_edge_key(edge_key)?;
    let mut lengths = *dev.lengths();
    lengths[idx] *= factor;
    NaturalDevelopment::from_lengths(lengths)
}

pub(crate) fn parse_edge_key(key: &str) -> Result<usize> {
    let b = key.as_bytes();
    let idx = (b.len() == 2 && b.iter().all(u8::is_ascii_digit))
        .then(|| edge_index((b[0] - b'0') as usize, (b[1] - b'0') as usize))
        .flatten();
    idx.ok_or_else(|| Error::Parse(format!("\"{key}\" is not an edge key")))
}

/// Iterator-style access to a generator's convex octahedra.
#[derive(Debug, Clone)]
pub struct OctaGenerator {
    cfg: GenConfig,
    counter: u64,
}

impl OctaGenerator {
    pub fn new(cfg: GenConfig) -> Self {
        Self { cfg, counter: 0 }
    }

    pub fn next_convex(&mut self) -> Result<Octahedron3> {
        let out = random_convex_octahedron_at(&self.cfg, self.counter);
        self.counter += 1;
        out
    }

    pub fn next_affine(&mut self) -> Result<AffineMap> {
        let out = random_affine_at(&self.cfg, self.counter);
        self.counter += 1;
        out
    }
}
