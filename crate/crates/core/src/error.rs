use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    /// A precondition on the inputs does not hold.
    Input(String),
    /// A bounded search ran out; the histogram counts rejections per condition.
    NotFound {
        what: String,
        histogram: Vec<(String, u64)>,
    },
    /// A check that must hold whenever the inputs are valid failed.
    Inconsistent(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Input(m) => write!(f, "invalid input: {m}"),
            Error::NotFound { what, histogram } => {
                write!(f, "not found: {what}")?;
                for (k, v) in histogram {
                    write!(f, "\n  {k}: {v}")?;
                }
                Ok(())
            }
            Error::Inconsistent(m) => write!(f, "internal inconsistency: {m}"),
        }
    }
}

impl core::error::Error for Error {}
