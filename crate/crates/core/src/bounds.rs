//! Closed-form probability bounds implied by a barrier certificate.
//!
//! All three formulas are written with `exp_m1`/`ln` so that small decay rates
//! (`lambda` around `1e-5`) keep full relative precision.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundError {
    #[error("decay rate must be positive and finite, got {0}")]
    Rate(f64),
    #[error("drift constant has the wrong sign: {0}")]
    DriftSign(f64),
    #[error("horizon penalty {delta} leaves a non-positive denominator")]
    Degenerate { delta: f64 },
    #[error("global bound M must be positive, got {0}")]
    GlobalBound(f64),
}

fn check_rate(lambda: f64) -> Result<(), BoundError> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(BoundError::Rate(lambda))
    }
}

fn check_m(m: f64) -> Result<(), BoundError> {
    if m > 0.0 && m.is_finite() {
        Ok(())
    } else {
        Err(BoundError::GlobalBound(m))
    }
}

/// `(e^{lambda t} - 1) / lambda`, accurate as `lambda -> 0`.
pub fn growth_integral(lambda: f64, t: f64) -> f64 {
    (lambda * t).exp_m1() / lambda
}

/// Upper bound `e^{-lambda K} (v0 + beta (e^{lambda H} - 1) / lambda)`.
pub fn bound_upper(
    v0: f64,
    lambda: f64,
    beta: f64,
    horizon: f64,
    threshold: f64,
) -> Result<f64, BoundError> {
    check_rate(lambda)?;
    if beta < 0.0 {
        return Err(BoundError::DriftSign(beta));
    }
    Ok((-lambda * threshold).exp() * (v0 + beta * growth_integral(lambda, horizon)))
}

/// Horizon penalty `M e^{-lambda (H - K)}` of the first attractive bound.
pub fn delta_exterior(m: f64, lambda: f64, horizon: f64, threshold: f64) -> f64 {
    m * (-lambda * (horizon - threshold)).exp()
}

/// Lower bound `(v0 - |beta| H - delta) / (1 - delta)`.
pub fn bound_lower1(
    v0: f64,
    beta: f64,
    m: f64,
    lambda: f64,
    horizon: f64,
    threshold: f64,
) -> Result<f64, BoundError> {
    check_rate(lambda)?;
    check_m(m)?;
    if beta > 0.0 {
        return Err(BoundError::DriftSign(beta));
    }
    let log_delta = m.ln() - lambda * (horizon - threshold);
    let delta = log_delta.exp();
    // 1 - delta without cancellation
    let denom = -log_delta.exp_m1();
    if !(denom > 0.0) {
        return Err(BoundError::Degenerate { delta });
    }
    Ok((v0 - beta.abs() * horizon - delta) / denom)
}

/// Horizon penalty `M e^{lambda (2K - H)}` of the second attractive bound.
pub fn delta_clock(m: f64, lambda: f64, horizon: f64, threshold: f64) -> f64 {
    m * (lambda * (2.0 * threshold - horizon)).exp()
}

/// Drift term `beta (1 - e^{-lambda K}) / lambda`.
pub fn drift_gain(beta: f64, lambda: f64, threshold: f64) -> f64 {
    -beta * (-lambda * threshold).exp_m1() / lambda
}

/// Lower bound `(v0 + gamma - delta_W) / (e^{lambda K} - delta_W)`.
pub fn bound_lower2(
    v0: f64,
    beta: f64,
    m: f64,
    lambda: f64,
    horizon: f64,
    threshold: f64,
) -> Result<f64, BoundError> {
    check_rate(lambda)?;
    check_m(m)?;
    if beta < 0.0 {
        return Err(BoundError::DriftSign(beta));
    }
    let delta = delta_clock(m, lambda, horizon, threshold);
    // e^{lambda K} - M e^{lambda(2K-H)} = -e^{lambda K} expm1(ln M + lambda (K - H))
    let denom = -(lambda * threshold).exp() * (m.ln() + lambda * (threshold - horizon)).exp_m1();
    if !(denom > 0.0) {
        return Err(BoundError::Degenerate { delta });
    }
    Ok((v0 + drift_gain(beta, lambda, threshold) - delta) / denom)
}

pub fn clamp_probability(raw: f64) -> f64 {
    if raw.is_nan() {
        0.0
    } else {
        raw.clamp(0.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn upper_examples() {
        for k in [0.5, 2.0, 7.0] {
            assert_relative_eq!(
                bound_upper(1.0, 0.3, 0.0, 10.0, k).unwrap(),
                (-0.3 * k).exp()
            );
        }
        assert_relative_eq!(
            bound_upper(0.5, 1.0, 0.0, 10.0, 2.0).unwrap(),
            0.067_667_641_618_306_35,
            max_relative = 1e-14
        );
        // beta (e^{lambda H} - 1)/lambda -> beta H
        let b = bound_upper(0.0, 1e-9, 0.1, 10.0, 0.0).unwrap();
        assert_relative_eq!(b, 1.0, max_relative = 1e-8);
        assert!(bound_upper(1.0, 0.0, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn lower1_examples() {
        // delta -> 0 via tiny M
        assert_relative_eq!(bound_lower1(1.0, 0.0, 1e-300, 1.0, 10.0, 2.0).unwrap(), 1.0);
        let b = bound_lower1(0.8, 0.0, 1.0, 0.1, 10.0, 2.0).unwrap();
        assert_relative_eq!(b, 0.636_806_755_816_781_2, max_relative = 1e-12);
        let d = delta_exterior(1.0, 0.1, 10.0, 2.0);
        assert!(bound_lower1(d, 0.0, 1.0, 0.1, 10.0, 2.0).unwrap().abs() < 1e-15);
        assert!(bound_lower1(0.5, 0.0, 1.0, 0.1, 10.0, 10.0).is_err());
    }

    #[test]
    fn lower2_examples() {
        let b = bound_lower2(1.0, 0.0, 1.0, 1.0, 10.0, 2.0).unwrap();
        assert_relative_eq!(b, 0.135_045_123_200_624_48, max_relative = 1e-12);
        // delta_W = 0 limit with v0 = e^{lambda K}
        let b = bound_lower2((0.5f64 * 2.0).exp(), 0.0, 1e-300, 0.5, 10.0, 2.0).unwrap();
        assert_relative_eq!(b, 1.0, max_relative = 1e-14);
        // M e^{lambda(2K - H)} = e^{lambda K} exactly when M = e^{lambda (H - K)}
        assert!(bound_lower2(1.0, 0.0, (1.0f64 * 8.0).exp(), 1.0, 10.0, 2.0).is_err());
    }

    #[test]
    fn clamp() {
        assert_eq!(clamp_probability(1.7), 1.0);
        assert_eq!(clamp_probability(-3.0), 0.0);
        assert_eq!(clamp_probability(f64::NAN), 0.0);
        assert_eq!(clamp_probability(0.25), 0.25);
    }
}
