use alloc::string::String;

use crate::kb::FactorId;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("operation undefined for the zero polynomial")]
    ZeroPolynomial,
    #[error("operation undefined for a constant polynomial")]
    ConstantPolynomial,
    #[error("unknown factor id {0}")]
    UnknownFactor(FactorId),
    #[error("no usable degree split for n = {0}")]
    NoSplit(usize),
    #[error("deduction would make the unknown degree negative")]
    NegativeDegree,
    #[error("constraint set is infeasible")]
    Infeasible,
    #[error("evaluation points do not give an invertible system")]
    SingularPoints,
    #[error("candidate point pool exhausted: need {needed}, have {available}")]
    PoolExhausted { needed: usize, available: usize },
    #[error("no resultant bound available at point {0}")]
    BoundsUnavailable(String),
    #[error("search found no polynomial within the initial bound")]
    EmptySearch,
    #[error("polynomial is not symmetric under x -> 1-x")]
    NotSymmetric,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
