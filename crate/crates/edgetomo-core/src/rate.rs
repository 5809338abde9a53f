//! Least-squares rate fitting for dyadic refinement sweeps.
//!
//! Convergence experiments produce a handful of `(eps, value)` pairs with
//! `eps` halving between runs; the questions asked of them are always "what
//! power of `eps` is this" and "how well does a power law explain it". Both
//! are answered by ordinary least squares in log-log coordinates, with an
//! optional division by `ln(1 / eps)` first for quantities whose leading
//! behavior carries that logarithmic factor.

use alloc::vec::Vec;

use crate::math;

/// Failures of the fitting helpers.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RateError {
    /// A parameter fails its documented precondition.
    #[error("bad parameter: {0}")]
    BadParameter(&'static str),
}

/// Result of a log-log least-squares fit `value ~ C * eps^rate`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    /// Fitted exponent of `eps`.
    pub rate: f64,
    /// Base-2 logarithm of the fitted prefactor `C`.
    pub log2_prefactor: f64,
    /// Coefficient of determination of the fit in log-log coordinates;
    /// `1` for an exact power law.
    pub r_squared: f64,
}

/// Fits `values[i] ~ C * eps[i]^rate` by least squares on
/// `log2(values)` against `log2(eps)`.
///
/// # Errors
/// [`RateError::BadParameter`] when the slices differ in length or hold
/// fewer than two points, when any `eps` or value is non-positive or
/// non-finite, or when all `eps` coincide (no abscissa spread to fit).
pub fn fit_power_law(eps: &[f64], values: &[f64]) -> Result<RateFit, RateError> {
    let (xs, ys) = log_coords(eps, values)?;
    Ok(ls_fit(&xs, &ys))
}

/// Fits `values[i] ~ C * eps[i]^rate * ln(1 / eps[i])`: the logarithmic
/// factor is divided out first, then the power law is fitted as in
/// [`fit_power_law`].
///
/// # Errors
/// As [`fit_power_law`], plus every `eps` must be below `1` so that the
/// divided factor `ln(1 / eps)` is positive.
pub fn fit_power_law_log_corrected(eps: &[f64], values: &[f64]) -> Result<RateFit, RateError> {
    if eps.iter().any(|&e| e >= 1.0) {
        return Err(RateError::BadParameter(
            "log-corrected fit needs eps below 1",
        ));
    }
    let corrected: Vec<f64> = eps
        .iter()
        .zip(values)
        .map(|(&e, &v)| v / math::ln(1.0 / e))
        .collect();
    let (xs, ys) = log_coords(eps, &corrected)?;
    Ok(ls_fit(&xs, &ys))
}

/// Validates the sweep and maps it to base-2 log coordinates.
fn log_coords(eps: &[f64], values: &[f64]) -> Result<(Vec<f64>, Vec<f64>), RateError> {
    if eps.len() != values.len() {
        return Err(RateError::BadParameter("slices differ in length"));
    }
    if eps.len() < 2 {
        return Err(RateError::BadParameter("need at least two points"));
    }
    const LOG2_E: f64 = core::f64::consts::LOG2_E;
    let mut xs = Vec::with_capacity(eps.len());
    let mut ys = Vec::with_capacity(eps.len());
    for (&e, &v) in eps.iter().zip(values) {
        if !(e > 0.0) || !e.is_finite() {
            return Err(RateError::BadParameter("eps must be positive and finite"));
        }
        if !(v > 0.0) || !v.is_finite() {
            return Err(RateError::BadParameter(
                "values must be positive and finite",
            ));
        }
        xs.push(math::ln(e) * LOG2_E);
        ys.push(math::ln(v) * LOG2_E);
    }
    let spread = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, &x| {
        (a.0.min(x), a.1.max(x))
    });
    if spread.1 - spread.0 <= 0.0 {
        return Err(RateError::BadParameter("eps values must not coincide"));
    }
    Ok((xs, ys))
}

/// Ordinary least squares of `y` on `x` with the determination coefficient.
fn ls_fit(xs: &[f64], ys: &[f64]) -> RateFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res = (syy - sxy * sxy / sxx).max(0.0);
    let r_squared = if syy > 0.0 {
        1.0 - ss_res / syy
    } else {
        // All responses equal: a flat line explains them exactly.
        1.0
    };
    RateFit {
        rate: slope,
        log2_prefactor: intercept,
        r_squared,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law_is_recovered() {
        let eps: Vec<f64> = (5..=10).map(|k| math::powi(2.0, -k)).collect();
        let values: Vec<f64> = eps.iter().map(|&e| 3.25 * math::powf(e, 0.5)).collect();
        let fit = fit_power_law(&eps, &values).unwrap();
        assert!((fit.rate - 0.5).abs() < 1e-12, "rate {}", fit.rate);
        assert!((math::powf(2.0, fit.log2_prefactor) - 3.25).abs() < 1e-10);
        assert!(fit.r_squared > 1.0 - 1e-12);
    }

    #[test]
    fn logarithmic_factor_is_divided_out() {
        let eps: Vec<f64> = (5..=10).map(|k| math::powi(2.0, -k)).collect();
        let values: Vec<f64> = eps
            .iter()
            .map(|&e| 0.7 * math::powf(e, 0.55) * math::ln(1.0 / e))
            .collect();
        // A plain power-law fit smears the log factor into the exponent;
        // the corrected fit recovers it exactly.
        let plain = fit_power_law(&eps, &values).unwrap();
        assert!((plain.rate - 0.55).abs() > 0.01);
        let fit = fit_power_law_log_corrected(&eps, &values).unwrap();
        assert!((fit.rate - 0.55).abs() < 1e-12, "rate {}", fit.rate);
        assert!(fit.r_squared > 1.0 - 1e-12);
    }

    #[test]
    fn noise_lowers_the_determination_coefficient() {
        let eps = [0.5, 0.25, 0.125, 0.0625];
        let values = [1.0, 0.5, 0.27, 0.11];
        let fit = fit_power_law(&eps, &values).unwrap();
        assert!(fit.r_squared < 1.0);
        assert!(fit.r_squared > 0.9);
        assert!(fit.rate > 0.9 && fit.rate < 1.2);
    }

    #[test]
    fn flat_responses_fit_a_zero_rate() {
        let eps = [0.5, 0.25, 0.125];
        let values = [2.0, 2.0, 2.0];
        let fit = fit_power_law(&eps, &values).unwrap();
        assert_eq!(fit.rate, 0.0);
        assert_eq!(fit.r_squared, 1.0);
    }

    #[test]
    fn bad_sweeps_are_rejected() {
        assert!(fit_power_law(&[0.5], &[1.0]).is_err());
        assert!(fit_power_law(&[0.5, 0.25], &[1.0]).is_err());
        assert!(fit_power_law(&[0.5, 0.5], &[1.0, 2.0]).is_err());
        assert!(fit_power_law(&[0.5, -0.25], &[1.0, 2.0]).is_err());
        assert!(fit_power_law(&[0.5, 0.25], &[1.0, 0.0]).is_err());
        assert!(fit_power_law(&[0.5, 0.25], &[1.0, f64::NAN]).is_err());
        assert!(fit_power_law_log_corrected(&[2.0, 0.25], &[1.0, 1.0]).is_err());
    }
}
