//! Acceptance suite: one line per criterion, `PASS` or `FAIL`, followed by
//! the measured quantities. Exits nonzero if any criterion fails.
//!
//! Run alone with `cargo test -p octa-core --test acceptance`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use octa_core::cm::{cm_determinant, simplex_volume_sq, SquaredDistanceMatrix};
use octa_core::conditions::{group2, group2_layout};
use octa_core::genkit::{random_affine_at, random_convex_octahedron_at, random_realization_at, GenConfig};
use octa_core::model::{face_signed_distances, EDGES};
use octa_core::{
    decide, develop, diagonals_of, perturb_development, reconstruct, DiagonalSet, NaturalDevelopment,
    Octahedron3, Status, Tolerances, Verdict,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Pinned tolerances, one block per criterion.
const C1_COUNT: u64 = 500;
const C1_DIAG_REL: f64 = 1e-8;
const C1_DIST_REL: f64 = 1e-8;
const C1_BUDGET: Duration = Duration::from_secs(30);

const C2_COUNT: u64 = 200;
const C2_ALPHA_REL: f64 = 1e-7;
const C2_GROUP1_ABS: f64 = 1e-9;
const C2_BUDGET: Duration = Duration::from_secs(30);

const C3_MAP_RESIDUAL: f64 = 1e-8;

const C4_COUNT: u64 = 200;
const C4_FACTOR: f64 = 1.01;
const C4_MIN_FRACTION: f64 = 0.99;
const C4_BUDGET: Duration = Duration::from_secs(30);

const C5_COUNT: u64 = 200;
const C5_BAND: f64 = 1e-9;

const C6_REL: f64 = 1e-12;

const C7_DIAG_ABS: f64 = 1e-10;
const C7_RESIDUAL_ABS: f64 = 1e-12;
const C7_ALPHA_REL: f64 = 1e-7;

const C8_COUNT: u64 = 50;
const C8_FACTORS: [f64; 3] = [0.1, 3.0, 10.0];
const C8_ALPHA_REL: f64 = 1e-8;
const C8_RESIDUAL_ABS: f64 = 1e-10;

struct Outcome {
    pass: bool,
    detail: String,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn sdm_of(points: &[[f64; 3]]) -> SquaredDistanceMatrix {
    SquaredDistanceMatrix::from_points(points).expect("distinct points")
}

fn max_rel_entry(a: &SquaredDistanceMatrix, b: &SquaredDistanceMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..6 {
        for j in i + 1..6 {
            worst = worst.max(rel(a.get(i, j), b.get(i, j)));
        }
    }
    worst
}

fn round_trip() -> Outcome {
    let cfg = GenConfig::with_seed(0x0c7a_0001);
    let tol = Tolerances::default();
    let start = Instant::now();
    let (mut ok, mut worst_diag, mut worst_dist) = (0, 0.0f64, 0.0f64);
    let mut first_bad = None;
    for k in 0..C1_COUNT {
        let p = random_convex_octahedron_at(&cfg, k).expect("generator");
        let r = reconstruct(&develop(&p), &tol).expect("reconstruct");
        let good = match (&r.diagonals, &r.embedding) {
            (Some(d), Some(e)) if r.status == Status::Unique => {
                let dd = d.max_relative_difference(&diagonals_of(&p));
                let de = max_rel_entry(&sdm_of(&e.points), &sdm_of(p.vertices()));
                worst_diag = worst_diag.max(dd);
                worst_dist = worst_dist.max(de);
                dd <= C1_DIAG_REL && de <= C1_DIST_REL
            }
            _ => false,
        };
        if good {
            ok += 1;
        } else if first_bad.is_none() {
            first_bad = Some((k, r.status, r.diagnostics.clone()));
        }
    }
    let elapsed = start.elapsed();
    let mut detail = format!(
        "{ok}/{C1_COUNT} unique and matching; max diagonal rel err {worst_diag:.1e} (<= {C1_DIAG_REL:e}); \
         max distance rel err {worst_dist:.1e} (<= {C1_DIST_REL:e}); {:.1}s (< {}s)",
        elapsed.as_secs_f64(),
        C1_BUDGET.as_secs()
    );
    if let Some((k, s, d)) = first_bad {
        detail += &format!("; first failure #{k}: {s:?} {d:?}");
    }
    Outcome { pass: ok == C1_COUNT && elapsed < C1_BUDGET, detail }
}

struct AffineStats {
    outcome: Outcome,
    map_residuals: Vec<f64>,
}

fn affine_soundness() -> AffineStats {
    let cfg = GenConfig::with_seed(0x0c7a_0002);
    let tol = Tolerances::default();
    let start = Instant::now();
    let (mut ok, mut worst_alpha, mut worst_g1) = (0, 0.0f64, 0.0f64);
    let mut min_g2 = f64::INFINITY;
    let mut map_residuals = Vec::new();
    let mut first_bad = None;
    for k in 0..C2_COUNT {
        let p = random_convex_octahedron_at(&cfg, k).expect("generator");
        let a = random_affine_at(&cfg, k).expect("affine");
        let q = a.apply_octahedron(&p).expect("affine image is an octahedron");
        let d = decide(&develop(&p), &develop(&q), &tol).expect("decide");
        let want = a.det * a.det;
        let alpha_err = d.alpha_hat.map_or(f64::INFINITY, |x| rel(x, want));
        let mut g1: f64 = 0.0;
        let mut g2 = f64::INFINITY;
        for r in &d.reconstructions {
            match &r.report {
                Some(rep) => {
                    g1 = g1.max(rep.group1.max_abs_residual());
                    g2 = g2.min(rep.group2.min_margin());
                }
                None => {
                    g1 = f64::INFINITY;
                    g2 = f64::NEG_INFINITY;
                }
            }
        }
        worst_alpha = worst_alpha.max(alpha_err);
        worst_g1 = worst_g1.max(g1);
        min_g2 = min_g2.min(g2);
        if d.verdict == Verdict::Equivalent {
            map_residuals.push(d.map_residual.unwrap_or(f64::INFINITY));
        }
        let good = d.verdict == Verdict::Equivalent && alpha_err <= C2_ALPHA_REL && g1 <= C2_GROUP1_ABS && g2 > 0.0;
        if good {
            ok += 1;
        } else if first_bad.is_none() {
            first_bad = Some((k, d.verdict, d.diagnostics.clone()));
        }
    }
    let elapsed = start.elapsed();
    let mut detail = format!(
        "{ok}/{C2_COUNT} equivalent; max alpha rel err {worst_alpha:.1e} (<= {C2_ALPHA_REL:e}); \
         max group-1 residual {worst_g1:.1e} (<= {C2_GROUP1_ABS:e}); min of 48 group-2 margins {min_g2:.2e} (> 0); \
         {:.1}s (< {}s)",
        elapsed.as_secs_f64(),
        C2_BUDGET.as_secs()
    );
    if let Some((k, v, diag)) = first_bad {
        detail += &format!("; first failure #{k}: {v:?} {diag:?}");
    }
    AffineStats { outcome: Outcome { pass: ok == C2_COUNT && elapsed < C2_BUDGET, detail }, map_residuals }
}

fn completeness(map_residuals: &[f64]) -> Outcome {
    let worst = map_residuals.iter().copied().fold(0.0, f64::max);
    let bad = map_residuals.iter().filter(|&&r| r.is_nan() || r > C3_MAP_RESIDUAL).count();
    Outcome {
        pass: !map_residuals.is_empty() && bad == 0,
        detail: format!(
            "{} equivalent verdicts checked; max map residual {worst:.1e} (<= {C3_MAP_RESIDUAL:e}); {bad} over",
            map_residuals.len()
        ),
    }
}

fn falsification() -> Outcome {
    let cfg = GenConfig::with_seed(0x0c7a_0004);
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x0c7a_0004);
    let start = Instant::now();
    let (mut valid, mut not_eq, mut eq, mut indet) = (0, 0, 0, 0);
    for k in 0..C4_COUNT {
        let p = random_convex_octahedron_at(&cfg, k).expect("generator");
        let dev = develop(&p);
        let (i, j) = EDGES[rng.random_range(0..12)];
        let Ok(pert) = perturb_development(&dev, &format!("{i}{j}"), C4_FACTOR) else { continue };
        valid += 1;
        match decide(&dev, &pert, &tol).expect("decide").verdict {
            Verdict::NotEquivalent => not_eq += 1,
            Verdict::Equivalent => eq += 1,
            Verdict::Indeterminate => indet += 1,
        }
    }
    let elapsed = start.elapsed();
    let frac = not_eq as f64 / valid.max(1) as f64;
    Outcome {
        pass: valid > 0 && frac >= C4_MIN_FRACTION && eq == 0 && elapsed < C4_BUDGET,
        detail: format!(
            "{valid} valid perturbations: {not_eq} not_equivalent ({:.1}%, >= {:.0}%), {eq} equivalent (must be 0), \
             {indet} indeterminate; {:.1}s (< {}s)",
            100.0 * frac,
            100.0 * C4_MIN_FRACTION,
            elapsed.as_secs_f64(),
            C4_BUDGET.as_secs()
        ),
    }
}

fn group2_oracle() -> Outcome {
    let tol = Tolerances::default();
    // Half the instances at the default noise, half at a level where most
    // draws are nonconvex.
    let mild = GenConfig::with_seed(0x0c7a_0005);
    let wild = GenConfig { noise: 0.9, ..GenConfig::with_seed(0x0c7a_0055) };
    let (mut compared, mut mismatched, mut banded, mut nonconvex) = (0usize, 0usize, 0usize, 0usize);
    let mut first_bad = None;
    for k in 0..C5_COUNT {
        let cfg = if k % 2 == 0 { &mild } else { &wild };
        let r = random_realization_at(cfg, k).expect("generator");
        if !r.convex {
            nonconvex += 1;
        }
        let oct: &Octahedron3 = &r.octahedron;
        let report = match group2(&develop(oct), &diagonals_of(oct), &tol) {
            Ok(g) => g,
            Err(_) => {
                banded += 24;
                continue;
            }
        };
        let scale = oct.scale();
        for (entry, (face, _, p, q)) in report.entries.iter().zip(group2_layout()) {
            let dists = face_signed_distances(oct.vertices(), face, scale).expect("valid face");
            let dist = |v: usize| dists.iter().find(|(k, _)| *k == v).expect("apex is off the face").1;
            let (dp, dq) = (dist(p), dist(q));
            if entry.margin.abs() <= C5_BAND || dp.abs() <= C5_BAND || dq.abs() <= C5_BAND {
                banded += 1;
                continue;
            }
            compared += 1;
            let same_side = (dp > 0.0) == (dq > 0.0);
            if same_side != (entry.margin > 0.0) {
                mismatched += 1;
                first_bad.get_or_insert((k, face, p, q, entry.margin, dp, dq));
            }
        }
    }
    let mut detail = format!(
        "{compared} sign pairs compared over {C5_COUNT} realizations ({nonconvex} nonconvex); \
         {mismatched} mismatches; {banded} inside the +-{C5_BAND:e} band"
    );
    if let Some(b) = first_bad {
        detail += &format!("; first mismatch {b:?}");
    }
    Outcome { pass: mismatched == 0 && compared > 0 && nonconvex > 0, detail }
}

fn cm_fixed_points() -> Outcome {
    let tol = Tolerances::default();
    let pair = SquaredDistanceMatrix::new(&[vec![0.0, 4.0], vec![4.0, 0.0]]).unwrap();
    let unit = |n: usize| {
        let rows: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { 1.0 }).collect()).collect();
        SquaredDistanceMatrix::new(&rows).unwrap()
    };
    let checks = [
        ("cm pair d=2", cm_determinant(&[0, 1], &pair).unwrap().value, 8.0),
        ("cm equilateral", cm_determinant(&[0, 1, 2], &unit(3)).unwrap().value, -3.0),
        ("cm unit tetrahedron", cm_determinant(&[0, 1, 2, 3], &unit(4)).unwrap().value, 4.0),
        ("area^2", simplex_volume_sq(&[0, 1, 2], &unit(3), &tol).unwrap(), 3.0 / 16.0),
        ("vol^2", simplex_volume_sq(&[0, 1, 2, 3], &unit(4), &tol).unwrap(), 1.0 / 72.0),
    ];
    let worst = checks.iter().map(|(_, got, want)| rel(*got, *want)).fold(0.0, f64::max);
    let parts: Vec<String> = checks.iter().map(|(n, got, _)| format!("{n} = {got}")).collect();
    Outcome { pass: worst <= C6_REL, detail: format!("{}; max rel err {worst:.1e} (<= {C6_REL:e})", parts.join(", ")) }
}

fn regular_case() -> Outcome {
    let tol = Tolerances::default();
    let dev = NaturalDevelopment::from_lengths([1.0; 12]).unwrap();
    let r = reconstruct(&dev, &tol).unwrap();
    let r2 = 2f64.sqrt();
    let (diag_err, res) = match (&r.diagonals, &r.report) {
        (Some(d), Some(rep)) => {
            let e = [d.d05, d.d14, d.d23].iter().map(|x| (x - r2).abs()).fold(0.0, f64::max);
            (e, rep.group1.max_abs_residual())
        }
        _ => (f64::INFINITY, f64::INFINITY),
    };
    let d = decide(&dev, &dev.scaled(2.0), &tol).unwrap();
    let alpha = d.alpha_hat.unwrap_or(f64::NAN);
    let alpha_err = rel(alpha, 64.0);
    Outcome {
        pass: r.status == Status::Unique
            && diag_err <= C7_DIAG_ABS
            && res <= C7_RESIDUAL_ABS
            && d.verdict == Verdict::Equivalent
            && alpha_err <= C7_ALPHA_REL,
        detail: format!(
            "status {:?}; diagonal err {diag_err:.1e} (<= {C7_DIAG_ABS:e}); eq8-10 residual {res:.1e} \
             (<= {C7_RESIDUAL_ABS:e}); decide(regular, 2x) {:?} alpha {alpha} (rel err {alpha_err:.1e} <= {C7_ALPHA_REL:e})",
            r.status, d.verdict
        ),
    }
}

fn dimensionless_values(dev: &NaturalDevelopment, diag: &DiagonalSet, tol: &Tolerances) -> Vec<f64> {
    let rep = octa_core::evaluate(dev, diag, tol).expect("evaluate");
    let mut v = vec![rep.group1.eq6_margins[0], rep.group1.eq6_margins[1], rep.group1.eq7_margin];
    v.extend(rep.group1.residuals());
    v.extend(rep.group2.entries.iter().map(|e| e.margin));
    v
}

fn scale_invariance() -> Outcome {
    let cfg = GenConfig::with_seed(0x0c7a_0008);
    let tol = Tolerances::default();
    let (mut ok, mut total, mut worst_alpha, mut worst_res) = (0, 0, 0.0f64, 0.0f64);
    for k in 0..C8_COUNT {
        let p = random_convex_octahedron_at(&cfg, k).expect("generator");
        let dev = develop(&p);
        let base = dimensionless_values(&dev, &diagonals_of(&p), &tol);
        for factor in C8_FACTORS {
            total += 1;
            let scaled = dev.scaled(factor);
            let d = decide(&dev, &scaled, &tol).expect("decide");
            let alpha_err = d.alpha_hat.map_or(f64::INFINITY, |a| rel(a, factor.powi(6)));
            let res_err = match d.reconstructions[1].diagonals {
                Some(diag) => dimensionless_values(&scaled, &diag, &tol)
                    .iter()
                    .zip(&base)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max),
                None => f64::INFINITY,
            };
            worst_alpha = worst_alpha.max(alpha_err);
            worst_res = worst_res.max(res_err);
            if d.verdict == Verdict::Equivalent && alpha_err <= C8_ALPHA_REL && res_err <= C8_RESIDUAL_ABS {
                ok += 1;
            }
        }
    }
    Outcome {
        pass: ok == total,
        detail: format!(
            "{ok}/{total} equivalent with alpha = k^6; max alpha rel err {worst_alpha:.1e} (<= {C8_ALPHA_REL:e}); \
             max change in dimensionless residuals {worst_res:.1e} (<= {C8_RESIDUAL_ABS:e})"
        ),
    }
}

fn main() -> ExitCode {
    let mut all = true;
    let mut report = |n: usize, name: &str, o: Outcome| {
        all &= o.pass;
        println!("{} criterion {n} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    };
    report(1, "round-trip reconstruction", round_trip());
    let affine = affine_soundness();
    report(2, "affine soundness", affine.outcome);
    report(3, "completeness certificate", completeness(&affine.map_residuals));
    report(4, "falsification", falsification());
    report(5, "group-2 oracle equivalence", group2_oracle());
    report(6, "cm kernel fixed points", cm_fixed_points());
    report(7, "regular octahedron", regular_case());
    report(8, "scale invariance", scale_invariance());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
