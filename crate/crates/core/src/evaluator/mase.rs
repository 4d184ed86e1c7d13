use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MaseError {
    #[error("forecast has {forecast} values but actual has {actual}")]
    LengthMismatch { forecast: usize, actual: usize },
    #[error("training series needs more than {period} values, has {len}")]
    ShortTraining { period: usize, len: usize },
    #[error("seasonal period must be at least 1")]
    ZeroPeriod,
    #[error("empty forecast")]
    EmptyForecast,
    #[error("seasonal naive error on the training series is zero")]
    ZeroScale,
}

/// Mean absolute scaled error: forecast MAE over the in-sample MAE of the
/// seasonal naive forecast `y[t] = y[t - period]` on `training`.
pub fn compute_mase(
    forecast: &[f64],
    actual: &[f64],
    training: &[f64],
    period: usize,
) -> Result<f64, MaseError> {
    if forecast.len() != actual.len() {
        return Err(MaseError::LengthMismatch {
            forecast: forecast.len(),
            actual: actual.len(),
        });
    }
    if forecast.is_empty() {
        return Err(MaseError::EmptyForecast);
    }
    if period == 0 {
        return Err(MaseError::ZeroPeriod);
    }
    if training.len() <= period {
        return Err(MaseError::ShortTraining {
            period,
            len: training.len(),
        });
    }
    let mae = forecast
        .iter()
        .zip(actual)
        .map(|(f, a)| (f - a).abs())
        .sum::<f64>()
        / forecast.len() as f64;
    let scale = training
        .windows(period + 1)
        .map(|w| (w[period] - w[0]).abs())
        .sum::<f64>()
        / (training.len() - period) as f64;
    if scale == 0.0 {
        return Err(MaseError::ZeroScale);
    }
    Ok(mae / scale)
}
