use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("divided-difference nodes {i} and {j} are closer than the separation tolerance ({xi} vs {xj})")]
    NodesTooClose { i: usize, j: usize, xi: f64, xj: f64 },

    #[error("{name} = {value} is out of range (expected {expected})")]
    OutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("negative concentration {0}")]
    NegativeConcentration(f64),

    #[error("s = {s} lies within pole-proximity tolerance of pole {pole}")]
    PoleProximity { s: f64, pole: f64 },

    #[error("eigenvalue {eigenvalue} collides with the pole factor {pole}")]
    DegenerateEigenvalue { eigenvalue: f64, pole: f64 },

    #[error("discriminant does not change sign over slope range [{lo}, {hi}]")]
    NoBifurcationInRange { lo: f64, hi: f64 },

    #[error("slopes (xi = {xi}, eta = {eta}) do not stabilize the 1-cycle")]
    UnstableSlopes { xi: f64, eta: f64 },

    #[error("infeasible saturation bounds: {0}")]
    InfeasibleBounds(String),

    #[error("measured output {0} outside [0, 100]")]
    OutOfRangeMeasurement(f64),

    #[error("trace horizon {horizon} min is shorter than the required {required} min")]
    HorizonTooShort { horizon: f64, required: f64 },

    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("row {row}: {source}")]
    AtRow {
        row: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("duplicate patient id {0}")]
    DuplicatePin(u32),

    #[error("patient {pin}: {source}")]
    Patient {
        pin: u32,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn out_of_range(name: &'static str, value: f64, expected: &'static str) -> Self {
        Error::OutOfRange { name, value, expected }
    }

    /// True for errors caused by invalid user input, as opposed to numeric
    /// failures inside an otherwise valid computation.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::OutOfRange { .. }
            | Error::NegativeConcentration(_)
            | Error::UnstableSlopes { .. }
            | Error::InfeasibleBounds(_)
            | Error::OutOfRangeMeasurement(_)
            | Error::HorizonTooShort { .. }
            | Error::Parse { .. }
            | Error::DuplicatePin(_) => true,
            Error::Patient { source, .. } | Error::AtRow { source, .. } => source.is_validation(),
            Error::NodesTooClose { .. }
            | Error::PoleProximity { .. }
            | Error::DegenerateEigenvalue { .. }
            | Error::NoBifurcationInRange { .. }
            | Error::Io(_) => false,
        }
    }
}
