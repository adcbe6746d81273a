use foresight_core::predict::{ClassFrequencies, PredictorKind};
use foresight_core::NUM_CLASSES;

use crate::error::{CliError, CliResult};

/// Backend named on the command line, before any census is known.
#[derive(Clone, Debug, PartialEq)]
pub enum Choice {
    None,
    Oracle,
    Uniform,
    Constant(f32),
    Frequency,
    External(String),
}

impl Choice {
    /// `none`, `oracle`, `uniform`, `zero`, `constant:V`, `frequency` or
    /// `external:ENDPOINT` (ENDPOINT = `tcp:HOST:PORT`, `unix:PATH` or
    /// `stdio:COMMAND`).
    pub fn parse(text: &str) -> CliResult<Choice> {
        Ok(match text {
            "none" => Choice::None,
            "oracle" => Choice::Oracle,
            "uniform" => Choice::Uniform,
            "zero" => Choice::Constant(0.0),
            "frequency" => Choice::Frequency,
            other => {
                if let Some(v) = other.strip_prefix("constant:") {
                    let v: f32 = v
                        .parse()
                        .map_err(|_| CliError::config(format!("bad constant predictor value `{v}`")))?;
                    if !(0.0..=1.0).contains(&v) {
                        return Err(CliError::config(format!("constant predictor value {v} outside [0, 1]")));
                    }
                    Choice::Constant(v)
                } else if let Some(endpoint) = other.strip_prefix("external:") {
                    Choice::External(endpoint.to_string())
                } else {
                    return Err(CliError::config(format!("unknown predictor `{other}`")));
                }
            }
        })
    }

    pub fn needs_census(&self) -> bool {
        *self == Choice::Frequency
    }

    pub fn kind(&self, census: Option<&[u64; NUM_CLASSES]>) -> CliResult<Option<PredictorKind>> {
        Ok(match self {
            Choice::None => None,
            Choice::Oracle => Some(PredictorKind::Oracle),
            Choice::Uniform => Some(PredictorKind::Uniform),
            Choice::Constant(v) => Some(PredictorKind::Constant(*v)),
            Choice::Frequency => {
                let census = census.ok_or_else(|| CliError::config("frequency predictor needs a census"))?;
                Some(PredictorKind::FrequencyPrior(ClassFrequencies::from_census(census)?))
            }
            Choice::External(endpoint) => Some(PredictorKind::External(endpoint.clone())),
        })
    }
}
