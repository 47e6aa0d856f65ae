//! Crate-wide error type.

use crate::groups::PlaneGroup;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("image error: {0}")]
    Image(#[from] image::ImageError),

    #[error("unsupported bit depth or color type: {0}")]
    UnsupportedFormat(String),

    #[error("selection of size {size} at center ({cx}, {cy}) exceeds image bounds {width}x{height}")]
    SelectionOutOfBounds {
        size: usize,
        cx: usize,
        cy: usize,
        width: usize,
        height: usize,
    },

    #[error("selection size {0} is not a power of two")]
    NonPowerOfTwoSize(usize),

    #[error("input is {width}x{height}, expected a square image")]
    NonSquareInput { width: usize, height: usize },

    #[error("output dimensions {0}x{1} overflow")]
    DimensionOverflow(usize, usize),

    #[error("insufficient periodic repeats: found {found} spectral peaks, need at least {needed}")]
    InsufficientPeriodicity { found: usize, needed: usize },

    #[error("degenerate reciprocal lattice: {0}")]
    DegenerateLattice(String),

    #[error("plane group {0} is not supported by the selection pipeline (centered setting)")]
    UnsupportedGroup(PlaneGroup),

    #[error("coefficient set is not closed under Friedel pairing; synthesis would be complex")]
    NotFriedelClosed,

    #[error("coefficient index ({h}, {k}) does not fit a {q}x{q} synthesis grid")]
    IndexOutOfRange { h: i32, k: i32, q: usize },

    #[error("{path}:{line}: malformed numeric field {field:?}")]
    HkaParse {
        path: String,
        line: usize,
        field: String,
    },

    #[error("{path}:{line}: observed amplitude must be positive")]
    HkaZeroAmplitude { path: String, line: usize },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("all-zero observed amplitudes")]
    ZeroAmplitudes,

    #[error("baseline residual is zero; inequality test is degenerate")]
    DegenerateBaseline,

    #[error("all candidate models fit perfectly; plane group is indeterminate above p1")]
    P1Indeterminate,

    #[error("{0}")]
    InvalidArgument(String),
}
