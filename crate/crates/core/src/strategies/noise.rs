//! Numeric noise: Gaussian perturbation and the Laplace mechanism.
//!
//! Stream consumption is fixed so draws are reproducible: two words per
//! Gaussian draw (Box-Muller) and one word per Laplace draw (inverse CDF).

use crate::error::{Error, Result};
use crate::strategies::DeterministicStream;

/// `value + z * sigma` with `z` standard normal.
pub fn perturb_gaussian(value: f64, sigma: f64, stream: &mut DeterministicStream) -> Result<f64> {
    if !value.is_finite() {
        return Err(Error::InvalidInput(format!("non-finite value {value}")));
    }
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::InvalidParams(format!("sigma must be >= 0, got {sigma}")));
    }
    let z = stream.next_standard_normal();
    Ok(value + z * sigma)
}

/// Zero-centred Laplace sample with scale `b`:
/// `-b * sgn(u - 0.5) * ln(1 - 2|u - 0.5|)` for `u` uniform on (0, 1).
pub fn laplace_noise(scale: f64, stream: &mut DeterministicStream) -> f64 {
    let u = stream.next_f64() - 0.5;
    if u == 0.0 {
        return 0.0;
    }
    -scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

/// Laplace mechanism with scale `sensitivity / epsilon`.
pub fn dp_laplace(
    value: f64,
    epsilon: f64,
    sensitivity: f64,
    stream: &mut DeterministicStream,
) -> Result<f64> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidParams(format!("epsilon must be > 0, got {epsilon}")));
    }
    if !(sensitivity.is_finite() && sensitivity > 0.0) {
        return Err(Error::InvalidParams(format!(
            "sensitivity must be > 0, got {sensitivity}"
        )));
    }
    if !value.is_finite() {
        return Err(Error::InvalidInput(format!("non-finite value {value}")));
    }
    Ok(value + laplace_noise(sensitivity / epsilon, stream))
}

/// Parses a numeric cell or span, tolerating thousands separators.
pub fn parse_number(surface: &str) -> Result<f64> {
    let cleaned: String = surface.trim().chars().filter(|&c| c != ',').collect();
    cleaned
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::format("numeric", format!("'{surface}' is not a number")))
}

/// Formats `value` with as many decimals as `original` had.
pub fn format_like(original: &str, value: f64) -> String {
    let decimals = original
        .trim()
        .split_once('.')
        .map_or(0, |(_, frac)| frac.chars().take_while(char::is_ascii_digit).count());
    format!("{value:.decimals$}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_sigma_is_identity() {
        let mut s = DeterministicStream::new(1, "g");
        for _ in 0..100 {
            assert_eq!(perturb_gaussian(12.34, 0.0, &mut s).unwrap(), 12.34);
        }
        assert_eq!(s.draws(), 200);
    }

    #[test]
    fn rejects_bad_inputs() {
        let mut s = DeterministicStream::new(1, "g");
        assert!(perturb_gaussian(f64::NAN, 0.1, &mut s).is_err());
        assert!(perturb_gaussian(1.0, -0.1, &mut s).is_err());
        assert!(matches!(dp_laplace(1.0, 0.0, 1.0, &mut s), Err(Error::InvalidParams(_))));
        assert!(matches!(dp_laplace(1.0, 1.0, -1.0, &mut s), Err(Error::InvalidParams(_))));
        assert!(dp_laplace(f64::INFINITY, 1.0, 1.0, &mut s).is_err());
    }

    #[test]
    fn huge_epsilon_is_near_identity() {
        // b = 1e-6; P(|L| > 1e-4) = exp(-100).
        let mut s = DeterministicStream::new(9, "l");
        for _ in 0..10_000 {
            let v = dp_laplace(12.34, 1e6, 1.0, &mut s).unwrap();
            assert!((v - 12.34).abs() <= 1e-4);
        }
    }

    #[test]
    fn single_draws_are_reproducible() {
        let draw = |seed| {
            let mut s = DeterministicStream::new(seed, "numeric|amount");
            (
                perturb_gaussian(12.34, 0.1, &mut s).unwrap().to_bits(),
                dp_laplace(12.34, 0.5, 1.0, &mut s).unwrap().to_bits(),
            )
        };
        assert_eq!(draw(5), draw(5));
        assert_ne!(draw(5), draw(6));
    }

    #[test]
    fn formatting() {
        assert_eq!(format_like("12.34", 12.3871), "12.39");
        assert_eq!(format_like("100", 99.6), "100");
        assert_eq!(parse_number(" 1,234.5 ").unwrap(), 1234.5);
        assert!(parse_number("12a").is_err());
        assert!(parse_number("inf").is_err());
    }
}
