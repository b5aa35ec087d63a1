//! Reconstruction of convex octahedra from their natural developments and
//! decisions on affine equivalence, via Cayley–Menger determinants.
//!
//! Vertices are labeled so that the antipodal (non-adjacent) pairs are
//! `(0,5)`, `(1,4)` and `(2,3)`. A development is the twelve remaining edge
//! lengths; the three diagonals are the unknowns [`reconstruct`] solves for.
//!
//! ```
//! use octa_core::{reconstruct, NaturalDevelopment, Status, Tolerances};
//!
//! let dev = NaturalDevelopment::from_lengths([1.0; 12]).unwrap();
//! let r = reconstruct(&dev, &Tolerances::default()).unwrap();
//! assert_eq!(r.status, Status::Unique);
//! assert!((r.diagonals.unwrap().d05 - 2f64.sqrt()).abs() < 1e-10);
//! ```

// Negated comparisons are kept on purpose: `!(x > 0.0)` rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cm;
pub mod conditions;
pub mod decision;
mod det;
pub mod error;
pub mod genkit;
pub mod io;
pub mod model;
pub mod reconstruct;
pub mod tolerances;

pub use cm::{
    cm_determinant, embed_six_points, menger_conditions, simplex_volume_sq, CmValue, EmbeddingResult, MengerReport,
    Point3, SquaredDistanceMatrix,
};
pub use conditions::{
    evaluate, group1, group2, group2_with_variant, group5, ConditionReport, Group1Report, Group2Report, Group2Variant,
    Group5Report,
};
pub use decision::{align_labelings, decide, recover_affine_map, AffineMap, Decision, LabelingCandidate, Verdict};
pub use error::{Error, Result};
pub use genkit::{perturb_development, random_affine, random_convex_octahedron, GenConfig, OctaGenerator};
pub use model::{
    assemble_sdm, develop, diagonals_of, is_convex, Convexity, DiagonalSet, NaturalDevelopment, Octahedron3,
    Violation,
};
pub use reconstruct::{reconstruct, solve_diagonals, ReconstructionResult, Status};
pub use tolerances::Tolerances;
