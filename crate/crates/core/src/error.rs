use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown nonlinearity `{0}` (available: allen_cahn, sine)")]
    UnknownNonlinearity(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("profile construction failed: {0}")]
    Profile(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("grid error: {0}")]
    Grid(String),
    #[error("diagonal dominance violated at node ({i},{j}); use a smaller h or the hybrid scheme")]
    NotDiagonallyDominant { i: usize, j: usize },
    #[error("linear solve stalled: relative residual {residual:.3e} after {sweeps} sweeps")]
    LinearSolve { residual: f64, sweeps: usize },
    #[error("support needs y up to {needed:.3}, grid gives {available:.3}; required R >= {required_r:.3}")]
    SupportTooLarge {
        needed: f64,
        available: f64,
        required_r: f64,
    },
    #[error("eigen iteration stagnated; last Rayleigh quotient {last:.10}")]
    EigenStagnation { last: f64 },
    #[error("quadrature did not converge on [{a}, {b}]")]
    Quadrature { a: f64, b: f64 },
    #[error("{0}")]
    Config(String),
    #[error("no negative direction: Q = {q:.6e} at a = {a}")]
    NoNegativeDirection { a: f64, q: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
