use super::UtilityMetric;
use crate::error::{Error, Result};

/// Scalar utility of a rate vector. An empty vector scores 0 under every metric.
///
/// The geometric mean is evaluated in the log domain so large populations
/// don't overflow.
pub fn utility(rates: &[f64], metric: UtilityMetric) -> Result<f64> {
    if let Some(bad) = rates.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
        return Err(Error::domain(format!("rate {bad} is not a finite non-negative number")));
    }
    if rates.is_empty() {
        return Ok(0.0);
    }
    Ok(match metric {
        UtilityMetric::SumRate => rates.iter().sum(),
        UtilityMetric::MinRate => rates.iter().copied().fold(f64::INFINITY, f64::min),
        UtilityMetric::ProportionalFair => {
            if rates.contains(&0.0) {
                0.0
            } else {
                let mean_log = rates.iter().map(|r| r.ln()).sum::<f64>() / rates.len() as f64;
                mean_log.exp()
            }
        }
    })
}
