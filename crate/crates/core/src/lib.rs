//! Direct and inverse spectral theory of Jacobi-type pencils `J5 - lambda J3`.
//!
//! A pencil bundles a Jacobi matrix `J3`, a symmetric five-diagonal matrix
//! `J5` with positive second off-diagonal, and two scalars `alpha > 0`,
//! `beta`. The crate computes its associated polynomials and operator, the
//! spectral function, the model representation in `L2(sigma)` together with
//! the reconstruction of a pencil from it, the closed-form resolvent calculus
//! of the shift-plus-rank-one perturbation family, and the beam-equation grid
//! model that produces such pencils.

// `!(x > 0.0)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod beamgrid;
pub mod error;
pub mod inverse;
pub mod io;
pub mod linalg;
pub mod measure;
pub mod operator;
pub mod pencil;
pub mod perturbation;
pub mod poly;
pub mod scalar;

pub use error::{PencilError, Result};
pub use measure::{Measure, MeasureKind, MomentTable};
pub use pencil::{FiveDiagMatrix, JacobiMatrix, Pencil, Tail};
pub use poly::{ComplexPoly, Poly};
