//! Numerical toolkit for model spaces `K_Θ = H² ⊖ ΘH²`.
//!
//! The crate evaluates inner functions and their reproducing kernels,
//! measures the interpolation geometry of point sequences, certifies
//! finite sections of normalized-kernel systems through their Gram
//! matrices, computes Clark level sets, and splits kernel systems into
//! parts with Riesz certificates.
//!
//! Data-parallel loops use rayon when the `parallel` feature is on (the
//! default); every such loop also runs sequentially through [`Exec`] with
//! bit-identical results.

pub mod carleson;
pub mod clark;
pub mod decompose;
pub mod error;
pub mod gram;
pub mod inner;
pub mod linalg;
pub mod paley_wiener;
pub mod par;
pub mod quad;

pub use carleson::{CarlesonReport, PointSequence};
pub use clark::ClarkFamily;
pub use decompose::Partition;
pub use error::{Error, Result};
pub use gram::{FrameBounds, GramMatrix};
pub use inner::{InnerFunction, KernelNormSq, SingularAtom, UnitPoint};
pub use paley_wiener::ExpSystem;
pub use par::Exec;
