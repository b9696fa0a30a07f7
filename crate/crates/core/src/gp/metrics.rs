use serde::Serialize;

use super::GpError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub rmse: f64,
    pub mae: f64,
    pub pearson: f64,
}

fn check(predicted: &[f64], actual: &[f64], needed: usize) -> Result<(), GpError> {
    if predicted.len() != actual.len() {
        return Err(GpError::LengthMismatch { left: predicted.len(), right: actual.len() });
    }
    if predicted.len() < needed {
        return Err(GpError::TooFewPoints { needed, got: predicted.len() });
    }
    Ok(())
}

pub fn rmse(predicted: &[f64], actual: &[f64]) -> Result<f64, GpError> {
    check(predicted, actual, 1)?;
    let sse: f64 = predicted.iter().zip(actual).map(|(p, a)| (p - a) * (p - a)).sum();
    Ok((sse / predicted.len() as f64).sqrt())
}

pub fn mae(predicted: &[f64], actual: &[f64]) -> Result<f64, GpError> {
    check(predicted, actual, 1)?;
    let sae: f64 = predicted.iter().zip(actual).map(|(p, a)| (p - a).abs()).sum();
    Ok(sae / predicted.len() as f64)
}

pub fn pearson(predicted: &[f64], actual: &[f64]) -> Result<f64, GpError> {
    check(predicted, actual, 2)?;
    let n = predicted.len() as f64;
    let mp = predicted.iter().sum::<f64>() / n;
    let ma = actual.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (p, a) in predicted.iter().zip(actual) {
        let (dp, da) = (p - mp, a - ma);
        sxy += dp * da;
        sxx += dp * dp;
        syy += da * da;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(GpError::ConstantVector);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// RMSE, MAE and Pearson correlation in one pass over the inputs.
pub fn metrics(predicted: &[f64], actual: &[f64]) -> Result<Metrics, GpError> {
    Ok(Metrics { rmse: rmse(predicted, actual)?, mae: mae(predicted, actual)?, pearson: pearson(predicted, actual)? })
}
