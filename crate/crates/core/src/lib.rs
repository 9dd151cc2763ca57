//! Computation in the free algebra and the free field: exact noncommutative polynomials,
//! linear pencils and their noncommutative rank, rational expressions with their linear
//! representations, and random-matrix checks of the resulting spectral predictions.

pub mod error;
pub mod freefield;
pub mod io;
pub mod linalg;
mod matching;
pub mod ncpoly;
pub mod ncrank;
pub mod pencil;
pub mod ratdag;
pub mod rmtlab;
pub mod rng;
pub mod scalar;
pub mod spectra;

pub use error::{Error, Result};
pub use freefield::{rf_add, rf_inv, rf_mul, RationalFunction};
pub use ncpoly::{MatrixTuple, NCPoly, PolyMatrix, Word};
pub use ncrank::{CertificateKind, Confidence, RankCertificate, RankMethod, RankOptions};
pub use pencil::{FlatnessReport, LinearPencil, MonicReduction};
pub use ratdag::{eval_dag, linearize, FormalLinearRep, Node, RatExpr};
pub use rmtlab::SpectralSample;
pub use scalar::{ExactScalar, ScalarMatrix};
pub use spectra::{Atom, AtomReport, HoelderReport};
