use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: {left_len}x{left_channels} vs {right_len}x{right_channels}")]
    ShapeMismatch {
        left_len: usize,
        left_channels: usize,
        right_len: usize,
        right_channels: usize,
    },
    #[error("channel mismatch: {left} vs {right}")]
    ChannelMismatch { left: usize, right: usize },
    #[error("band radius {band} cannot align lengths {left_len} and {right_len}")]
    InfeasibleBand {
        band: usize,
        left_len: usize,
        right_len: usize,
    },
    #[error("{0} must not be empty")]
    Empty(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("window of {window} samples does not fit a session of {available} samples")]
    WindowTooLong { window: usize, available: usize },
    #[error("unknown channel `{0}`")]
    UnknownChannel(String),
    #[error("{0} is undefined for an empty denominator")]
    NotApplicable(&'static str),
}
