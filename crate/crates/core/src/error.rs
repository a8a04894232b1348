use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid subspace: 2j = {twice_j} is not allowed for N = {n_spins}")]
    InvalidIndex { n_spins: u32, twice_j: u32 },

    #[error("empty subspace: N = {n_spins}, 2j = {twice_j}, k = {k} lies below k0")]
    EmptySubspace { n_spins: u32, twice_j: u32, k: u64 },

    #[error("coupling index {alpha} out of range 1..={max}")]
    IndexOutOfRange { alpha: usize, max: usize },

    #[error("{0}")]
    Domain(String),

    #[error("inverse iteration did not converge for shift {shift} (residual {residual:e})")]
    NoConvergence { shift: f64, residual: f64 },

    #[error("dense oracle refused for N = {0}: limited to N <= 12")]
    TooLarge(u32),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
