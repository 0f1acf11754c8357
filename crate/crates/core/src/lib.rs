//! Statistics of random lattices and punctured tori.
//!
//! Lattices up to rotation and scale are parametrized by the fundamental
//! domain of the modular group, which carries a finite hyperbolic area
//! (`pi/3`). Normalizing that area gives a uniform distribution on the moduli
//! space. This crate samples from it, measures Teichmueller distances to the
//! square lattice and to the rectangular locus, and evaluates the exact
//! densities and moments of those distances.

pub mod area;
pub mod closed_forms;
pub mod error;
pub mod fuchsian;
pub mod hyperbolic;
pub mod modular;
pub mod qc;
pub mod sampler;
pub mod special;
pub mod verify;

pub use closed_forms::{Distribution, MomentReport, PiecewiseDensity};
pub use error::{Error, Result};
pub use fuchsian::{IdealQuadrilateral, RectangularGroup};
pub use hyperbolic::{DPoint, EuclideanDisk, HPoint, MoebiusMap};
pub use modular::{FundamentalPoint, ModularElement, ReductionResult};
pub use qc::AffineMap;
pub use sampler::{SampleBatch, SamplerConfig, SamplingMethod};
pub use verify::{EmpiricalCdf, VerificationReport};
