use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("the wire covers the whole box; no free cells remain")]
    EmptyOmega,
    #[error("bad scene: {0}")]
    BadScene(String),
    #[error("facet {0} is not an interior facet")]
    NonInteriorFacet(usize),
    #[error("thickened loop overlaps itself")]
    TubeSelfOverlap,
    #[error("tube touches the wire")]
    TubeTouchesWire,
    #[error("degenerate tube: {0}")]
    DegenerateTube(String),
    #[error("could not construct an initial spanning set")]
    NoInitialSpanning,
    #[error("volume {requested} is infeasible (available {available})")]
    VolumeInfeasible { requested: f64, available: f64 },
    #[error("reduced boundary of E is not contained in K")]
    NotAFilmPair,
    #[error("chain has fewer points than a fit needs")]
    ChainTooShort,
    #[error("no junction with exactly three incident chains")]
    NoJunction,
    #[error("malformed data: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
