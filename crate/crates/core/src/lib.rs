pub mod analysis;
pub mod error;
pub mod geometry;
pub mod identities;
pub mod jets;
pub mod multivector;
pub mod surface;
pub mod vecops;
pub mod zoo;

pub use error::{Bound, LabError, Result};
pub use jets::{ImmersionField, Jet, JetCache, Point};
pub use multivector::MultiVector;
pub use surface::SurfaceSpec;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/surfaces.md")]
    mod surfaces {}
    #[doc = include_str!("../../../book/src/multivectors.md")]
    mod multivectors {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/analysis.md")]
    mod analysis {}
    #[doc = include_str!("../../../book/src/identities.md")]
    mod identities {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
