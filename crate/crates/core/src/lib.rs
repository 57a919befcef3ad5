//! Numerical laboratory for symplectic forms on spaces of embedded surfaces.
//!
//! The ambient manifold is a flat torus `T^{2n}` with a closed symplectic form,
//! the domain surface is the flat 2-torus discretised on a periodic collocation
//! grid, and every pairing is evaluated with spectral calculus.

// `!(x > 0.0)` is used on purpose so NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ambient;
pub mod embedding;
pub mod error;
pub mod forms;
pub mod io;
pub mod lab;
pub mod moser;
pub mod surface;

pub use ambient::{
    AmbientModel, AmbientSymplectomorphism, FourierTerm, OneFormTerm, ScalarHamiltonian,
};
pub use embedding::{Classification, Embedding, SplitResult, TangentField, Verdict};
pub use error::{Error, Result};
pub use surface::{AreaForm, GridDiffeo, OneFormGrid, SurfaceField, TorusGrid, TwoFormGrid};
