use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("sample rate mismatch: {0} Hz vs {1} Hz")]
    RateMismatch(f64, f64),
    #[error("waveforms are not aligned (t0 {0} s vs {1} s, {2} vs {3} samples)")]
    Misaligned(f64, f64, usize, usize),
}

pub type Result<T> = core::result::Result<T, Error>;

/// Shorthand for building an [`Error::InvalidArgument`].
macro_rules! invalid {
    ($($arg:tt)*) => {
        $crate::error::Error::InvalidArgument(alloc::format!($($arg)*))
    };
}
pub(crate) use invalid;
