use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("intervals [{0}, {1}] and [{2}, {3}] overlap")]
    OverlappingIntervals(f64, f64, f64, f64),
    #[error("degenerate component: {0}")]
    DegenerateComponent(String),
    #[error("polyline is not a simple closed curve")]
    NonSimplePolyline,
    #[error("discretization too coarse: need at least {required} points, got {got}")]
    ConfigTooCoarse { required: usize, got: usize },
    #[error("gap-condition system is numerically singular")]
    SingularSystem,
    #[error("equilibrium quadrature underflowed")]
    QuadratureUnderflow,
    #[error("branch tracking failed at z = {0}")]
    BranchTrackingFailure(String),
    #[error("operation not supported for set family {0}")]
    UnsupportedFamily(String),
    #[error("weight vanishes on a set of full equilibrium measure")]
    WeightVanishesEverywhere,
    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("reference points collapsed")]
    ReferenceCollapse,
    #[error("capacity is not attached to this solution")]
    CapacityMissing,
    #[error("band extraction failed: {0}")]
    BandExtractionFailure(String),
    #[error("square-root branch is ambiguous near a band edge")]
    BranchAmbiguity,
    #[error("least-squares system is rank deficient")]
    RankDeficiency,
    #[error("root residual too large ({residual:e})")]
    RootResidualTooLarge { residual: f64, roots: Vec<[f64; 2]> },
    #[error("test point {0} lies too close to the convex hull")]
    TestPointInsideHull(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
