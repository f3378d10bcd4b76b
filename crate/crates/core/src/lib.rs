//! Discrete soap films and wet Plateau borders on square grids.
//!
//! Sets live on a uniform grid of spacing `h` inside a rectangular box:
//! `E` is a set of cells (the liquid), `K` a set of facets (the film).
//! Films are constrained to block a family of loops around the wire; the
//! optimizer anneals `(K, E)` pairs and `analysis` checks the result against
//! the Plateau-border geometry.

pub mod analysis;
pub mod energy;
pub mod error;
pub mod geom;
pub mod grid;
pub mod io;
pub mod optimizer;
pub mod partition;
pub mod scene;
pub mod spanning;

pub use error::{Error, Result};
pub use grid::{build_domain, CellId, CellSet, Domain, FacetId, FacetSet, FilmPair};
pub use scene::SceneConfig;
