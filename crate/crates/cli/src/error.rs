use std::fmt;

use foresight_core::dataset::DatasetError;
use foresight_core::explore::ExploreError;
use foresight_core::floorgen::FloorgenError;
use foresight_core::metrics::MetricsError;
use foresight_core::nav::NavError;
use foresight_core::predict::PredictError;
use foresight_core::raster::RasterError;

/// Error category; also the process exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Category {
    Config = 2,
    Io = 3,
    Format = 4,
    Generation = 5,
    Predictor = 6,
    Simulation = 7,
}

impl Category {
    pub fn label(self) -> &'static str {
        match self {
            Category::Config => "config",
            Category::Io => "io",
            Category::Format => "format",
            Category::Generation => "generation",
            Category::Predictor => "predictor",
            Category::Simulation => "simulation",
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub category: Category,
    pub message: String,
}

impl CliError {
    pub fn new(category: Category, message: impl Into<String>) -> Self {
        CliError {
            category,
            message: message.into(),
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new(Category::Config, message)
    }

    pub fn context(mut self, what: impl fmt::Display) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} error: {}", self.category.label(), self.message)
    }
}

pub type CliResult<T> = Result<T, CliError>;

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::new(Category::Io, e.to_string())
    }
}

impl From<RasterError> for CliError {
    fn from(e: RasterError) -> Self {
        match e {
            RasterError::Io(io) => io.into(),
            other => CliError::new(Category::Format, other.to_string()),
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Io(io) => io.into(),
            DatasetError::InvalidLossConfig(_) | DatasetError::QueryOutOfRange(_) => {
                CliError::new(Category::Config, e.to_string())
            }
            other => CliError::new(Category::Format, other.to_string()),
        }
    }
}

impl From<FloorgenError> for CliError {
    fn from(e: FloorgenError) -> Self {
        match e {
            FloorgenError::InvalidSpec { .. } => CliError::new(Category::Config, e.to_string()),
            other => CliError::new(Category::Generation, other.to_string()),
        }
    }
}

impl From<ExploreError> for CliError {
    fn from(e: ExploreError) -> Self {
        CliError::new(Category::Simulation, e.to_string())
    }
}

impl From<PredictError> for CliError {
    fn from(e: PredictError) -> Self {
        CliError::new(Category::Predictor, e.to_string())
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        CliError::new(Category::Format, e.to_string())
    }
}

impl From<NavError> for CliError {
    fn from(e: NavError) -> Self {
        match e {
            NavError::Explore(x) => x.into(),
            NavError::Predict(x) => x.into(),
            NavError::Config(_) => CliError::new(Category::Config, e.to_string()),
            NavError::Parse(_) => CliError::new(Category::Format, e.to_string()),
            NavError::NoEpisodes | NavError::NoStart => CliError::new(Category::Simulation, e.to_string()),
        }
    }
}
