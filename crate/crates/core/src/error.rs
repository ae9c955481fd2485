use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("scenario schema: {0}")]
    Schema(String),
    #[error("{0} is inside an obstacle")]
    PlayerInObstacle(String),
    #[error("target set must be nonempty and lie in free space")]
    BadTarget,
    #[error("attacker {attacker} (speed {va}) is faster than defender {defender} (speed {vd})")]
    AttackerTooFast {
        attacker: usize,
        va: f64,
        defender: usize,
        vd: f64,
    },
    #[error("no free cells on the domain boundary")]
    NoFreeBoundary,
    #[error("source region is empty after removing obstacle cells")]
    EmptySource,
    #[error("point ({0}, {1}) lies in an obstacle cell")]
    PointInObstacle(f64, f64),
    #[error("point ({0}, {1}) is outside the domain")]
    OutOfDomain(f64, f64),
    #[error("point ({0}, {1}) is unreachable from the sources")]
    Unreachable(f64, f64),
    #[error("cell ({0}, {1}) is not a free boundary cell")]
    NotBoundary(usize, usize),
    #[error("attacker level set image lies beyond the far endpoint of the path")]
    ImageBeyondPath,
    #[error("joint state space needs {needed} states, budget is {budget}")]
    BudgetExceeded { needed: usize, budget: usize },
    #[error("player index {0} out of range")]
    BadPlayerIndex(usize),
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
