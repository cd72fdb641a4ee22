use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A size parameter exceeds what the implementation supports.
    #[error("capacity exceeded: {what} = {value} exceeds limit {limit}")]
    Capacity {
        what: &'static str,
        value: u64,
        limit: u64,
    },

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("insufficient data: {usable} usable points, at least {required} required")]
    InsufficientData { usable: usize, required: usize },

    #[error(
        "infinite divergence: input {input} produces output {output}, \
         which the zero-cost input never produces"
    )]
    InfiniteDivergence { input: usize, output: usize },

    #[error("no input is affordable within a burst budget of {budget}")]
    EmptyPlan { budget: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn check_capacity(what: &'static str, value: u64, limit: u64) -> Result<()> {
    if value > limit {
        Err(Error::Capacity { what, value, limit })
    } else {
        Ok(())
    }
}
