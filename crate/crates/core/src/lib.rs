//! Numerical and exact-arithmetic toolkit for Boolean stable laws, their
//! classical scale mixtures, and the transform calculus that connects the
//! classical, free, Boolean and monotone worlds.
//!
//! The crate is organised around a small number of layers:
//!
//! * [`sectors`]: complex powers with explicit branch sectors — the single
//!   numerical foundation every transform formula relies on;
//! * [`quad`]: adaptive Gauss–Kronrod quadrature with unbounded-tail and
//!   power-singularity maps;
//! * [`measures`]: the measure data model (atoms, closed-form families,
//!   grids, transform-defined measures) and the elementary calculus on it;
//! * [`transforms`]: Cauchy, reciprocal Cauchy, η, η⁻¹, Σ, S, Voiculescu and
//!   classical cumulant transforms, plus measure recovery from η;
//! * [`stable`]: the four strictly stable families and the other closed-form
//!   laws (Cauchy family, free Poisson, Pareto);
//! * [`mixtures`]: scale mixtures of Boolean stable laws, Boolean additive
//!   convolution, multiplicative monotone convolution, and the catalog-level
//!   multiplicative free convolution;
//! * [`identities`]: a verification engine for the distributional identities
//!   relating all of the above;
//! * [`moments`]: exact-rational Fuss–Narayana moment sequences and Hankel
//!   determinant positivity scans;
//! * [`fid`]: free/classical infinite-divisibility analysis;
//! * [`lln`]: limits of free multiplicative laws of large numbers and the
//!   explicit density examples;
//! * [`sampler`]: random variate generation and distribution tests.

pub mod error;
pub mod fid;
pub mod identities;
pub mod lln;
pub mod measures;
pub mod mixtures;
pub mod moments;
pub mod quad;
pub mod sampler;
pub mod sectors;
pub mod stable;
pub mod transforms;

pub use error::{Error, Result};
pub use measures::{Family, GridDensity, Measure};
pub use transforms::TransformReq;
pub use quad::QuadSpec;
pub use sectors::Sector;
pub use stable::AdmissiblePair;

/// Re-export of the complex scalar used throughout.
pub use num_complex::Complex64;
