use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A distribution was given no atoms.
    Empty,
    /// Atom and probability lists differ in length.
    LengthMismatch { expected: usize, found: usize },
    /// A probability or weight was negative.
    NegativeMass { index: usize, value: f64 },
    /// All probabilities were zero.
    ZeroMass,
    /// An atom, probability or parameter was NaN or infinite.
    NonFinite,
    /// A quantile level outside `(0, 1]`.
    QuantileOutOfRange(f64),
    /// A Wasserstein order below one.
    InvalidOrder(f64),
    /// A mixture was given no components.
    EmptyMixture,
    /// Mixture weights do not sum to one.
    WeightSum(f64),
    /// A categorical support with `v_min >= v_max` or fewer than two atoms.
    InvalidSupport,
    /// Two categorical objects live on different supports.
    SupportMismatch,
    /// Two tables are indexed by different state/action sets.
    IndexMismatch,
    /// A malformed MDP.
    InvalidMdp(String),
    /// A malformed policy.
    InvalidPolicy(String),
    /// An exact operator would have produced more atoms than allowed.
    SupportOverflow { atoms: usize, cap: usize },
    /// A logit left the admissible range during training.
    Divergence { sweep: usize, logit: f64 },
    /// A training configuration was rejected.
    InvalidConfig(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Empty => write!(f, "distribution has no atoms"),
            Error::LengthMismatch { expected, found } => {
                write!(f, "length mismatch: expected {expected}, found {found}")
            }
            Error::NegativeMass { index, value } => {
                write!(f, "negative probability {value} at index {index}")
            }
            Error::ZeroMass => write!(f, "probabilities sum to zero"),
            Error::NonFinite => write!(f, "non-finite value"),
            Error::QuantileOutOfRange(q) => write!(f, "quantile level {q} outside (0, 1]"),
            Error::InvalidOrder(p) => write!(f, "Wasserstein order {p} is below 1"),
            Error::EmptyMixture => write!(f, "mixture has no components"),
            Error::WeightSum(s) => write!(f, "mixture weights sum to {s}, expected 1"),
            Error::InvalidSupport => {
                write!(f, "categorical support needs v_min < v_max and at least two atoms")
            }
            Error::SupportMismatch => write!(f, "categorical supports differ"),
            Error::IndexMismatch => write!(f, "tables have different state/action index sets"),
            Error::InvalidMdp(msg) => write!(f, "invalid MDP: {msg}"),
            Error::InvalidPolicy(msg) => write!(f, "invalid policy: {msg}"),
            Error::SupportOverflow { atoms, cap } => {
                write!(f, "operator output would hold {atoms} atoms (cap {cap})")
            }
            Error::Divergence { sweep, logit } => {
                write!(f, "training diverged at sweep {sweep}: logit magnitude {logit}")
            }
            Error::InvalidConfig(msg) => write!(f, "invalid training config: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
