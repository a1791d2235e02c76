//! Fast `ℓ₂ → ℓ_p` dimension reduction with a structured random map
//! `Ψx = k^{-1/p} β_p^{-1} · A·D₁·H·D₂·H·D₃·x`, plus the tooling used to
//! check it: exact and Monte-Carlo verification, a lower-bound demonstrator
//! and stage timing.
//!
//! ```
//! use fjlp_core::Transform;
//!
//! let t = Transform::plan(16, 1, 2.0, 0, true).unwrap();
//! let y = t.apply(&[0.25; 16]).unwrap();
//! assert_eq!(y.len(), 1);
//! ```

pub mod embed;
mod error;
pub mod fourwise;
pub mod gf2m;
pub mod io;
pub mod lowerbound;
pub mod profile;
pub mod seeds;
pub mod verify;
pub mod wht;

pub use embed::{
    beta_p, padded_dimension, required_k, required_k_union, strict_row_limit, GaussianBaseline, MomentConstants,
    Transform, TransformSpec, DEFAULT_C0,
};
pub use error::{Error, Result};
pub use fourwise::FourWiseMatrix;
pub use gf2m::FieldSpec;
pub use io::VectorFormat;
pub use lowerbound::{CoverCode, HardFamily, TargetNorm};
pub use verify::VerificationReport;
pub use wht::IndexSet;
