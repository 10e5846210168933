use thiserror::Error;

use crate::lattice::LatticePoint;

/// Witness returned when a partial height function admits no extension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExtendWitness {
    /// A pinned value disagrees with the parity of its site.
    Parity { point: LatticePoint, value: i64 },
    /// A pair violating the l1-Lipschitz condition.
    Pair {
        x: LatticePoint,
        y: LatticePoint,
        hx: i64,
        hy: i64,
        dist: i64,
    },
}

impl std::fmt::Display for ExtendWitness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExtendWitness::Parity { point, value } => {
                write!(f, "parity violation at {:?}: value {}", point.coords(), value)
            }
            ExtendWitness::Pair { x, y, hx, hy, dist } => write!(
                f,
                "pair ({:?}, {:?}): |{} - {}| > {}",
                x.coords(),
                y.coords(),
                hx,
                hy,
                dist
            ),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("discretization at scale n={0} is empty")]
    EmptyDiscretization(u32),
    #[error("discretization at scale n={n} is disconnected ({components} components)")]
    DisconnectedDiscretization { n: u32, components: usize },
    #[error("point {0:?} lies outside the discrete domain")]
    PointOutsideDomain(Vec<i64>),
    #[error("profile has no certified Lipschitz bound")]
    UnsupportedProfile,
    #[error("domain does not cover a full lattice cell; cannot interpolate")]
    DomainNotCellCovered,
    #[error("partial height function is not extendable: {0}")]
    NotExtendable(ExtendWitness),
    #[error("carrier set is empty")]
    EmptyCarrier,
    #[error("instance too large: {0}")]
    InstanceTooLarge(String),
    #[error("pinned value {value} at {point:?} violates parity")]
    UnsatisfiableParity { point: Vec<i64>, value: i64 },
    #[error("set of height functions is empty")]
    EmptySet,
    #[error("no simplex of scale {0} fits inside the domain")]
    NoSimplexFits(String),
    #[error("simplex domain is disconnected")]
    DisconnectedMesh,
    #[error("mesh is not contained in the profile domain")]
    MeshOutsideDomain,
    #[error("slope {0:?} outside the surface-tension model range")]
    SlopeOutOfRange(Vec<f64>),
    #[error("boundary data is not 1-Lipschitz on the mesh: {0}")]
    InfeasibleBoundary(String),
    #[error("image output unsupported for dimension {0}")]
    UnsupportedDimension(usize),
    #[error("corrupt table file: {0}")]
    CorruptTable(String),
    #[error("invalid rational literal: {0}")]
    BadRational(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
