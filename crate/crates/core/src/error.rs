use alloc::string::String;

/// Failure modes shared by every module of the core.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// The request exceeds a configured size cap.
    #[error("resource limit: {0}")]
    Resource(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! domain {
    ($($arg:tt)*) => {
        $crate::Error::Domain(alloc::format!($($arg)*))
    };
}

macro_rules! ensure {
    ($cond:expr, $($arg:tt)*) => {
        if !$cond {
            return Err($crate::Error::Domain(alloc::format!($($arg)*)));
        }
    };
}

pub(crate) use {domain, ensure};
