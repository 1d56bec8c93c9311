//! Finite metric measure spaces, annular coverings, covering graphs and
//! numerical checks of weighted Sobolev and Hardy inequalities.

pub mod constants;
pub mod covering;
pub mod error;
pub mod gallery;
pub mod graph;
pub mod render;
pub mod report;
pub mod riesz;
pub mod space;
pub mod tolerances;
pub mod verify;

pub use error::{Error, Result};
pub use space::Space;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/spaces.md")]
    mod spaces {}
    #[doc = include_str!("../../../book/src/coverings.md")]
    mod coverings {}
    #[doc = include_str!("../../../book/src/graphs.md")]
    mod graphs {}
    #[doc = include_str!("../../../book/src/chains.md")]
    mod chains {}
    #[doc = include_str!("../../../book/src/checks.md")]
    mod checks {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
