use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected_w}x{expected_h}, got {got_w}x{got_h}")]
    DimensionMismatch {
        expected_w: usize,
        expected_h: usize,
        got_w: usize,
        got_h: usize,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("non-positive or non-finite depth {value} at pixel ({u}, {v})")]
    InvalidDepth { u: usize, v: usize, value: f64 },
    #[error("point at pixel ({u}, {v}) lies behind the camera (z = {z})")]
    BehindCamera { u: usize, v: usize, z: f64 },
    #[error("surface point at pixel ({u}, {v}) coincides with the light position (distance {distance})")]
    LightOnSurface { u: usize, v: usize, distance: f64 },
    #[error("need at least {needed} valid pixels, found {found}")]
    TooFewPixels { needed: usize, found: usize },
    #[error("degenerate correlation: {0} has zero variance over the valid pixels")]
    DegenerateCorrelation(&'static str),
    #[error("singular scale/shift normal equations")]
    SingularAlignment,
    #[error("loss term `{0}` is not finite")]
    NonFiniteTerm(&'static str),
    #[error("non-finite gradient at iteration {iteration}")]
    NonFiniteGradient { iteration: usize },
    #[error("surface does not cover the frame: {count} uncovered pixels, first at {first:?}")]
    UncoveredPixels {
        count: usize,
        first: Vec<(usize, usize)>,
    },
    #[error("grid of {width}x{height} is not divisible by {divisor}; pad to {padded_w}x{padded_h}")]
    IndivisibleGrid {
        width: usize,
        height: usize,
        divisor: usize,
        padded_w: usize,
        padded_h: usize,
    },
    #[error("format error: {0}")]
    Format(String),
    #[error("NaN value at pixel ({u}, {v})")]
    NanValue { u: usize, v: usize },
    #[error("unsupported bit depth: {0}")]
    UnsupportedBitDepth(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
