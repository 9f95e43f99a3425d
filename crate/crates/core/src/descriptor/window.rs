use crate::error::{Error, Result};
use crate::imaging::{direction_mode, gradient_of, GradientOperator};

use super::WindowSpec;

fn check_shape(values: &[f64], n: usize) -> Result<()> {
    if n == 0 || values.len() != n * n {
        return Err(Error::invalid(format!(
            "window of {} values is not {n}x{n}",
            values.len()
        )));
    }
    Ok(())
}

fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    }
}

/// `1 - sqrt(sum((w - median)^2)) / 2^n_bits` over raw intensities.
///
/// Not clamped below; strongly varying windows give negative values.
pub fn homogeneity(values: &[f64], n: usize, n_bits: u32) -> Result<f64> {
    check_shape(values, n)?;
    let m = median(values);
    let ss: f64 = values.iter().map(|&v| (v - m) * (v - m)).sum();
    Ok(1.0 - ss.sqrt() / 2f64.powi(n_bits as i32))
}

/// Center of the dominant 1-degree gradient bin of the window.
pub fn anchor_angle(values: &[f64], n: usize, op: GradientOperator) -> Result<f64> {
    check_shape(values, n)?;
    let field = gradient_of(values, n, n, op)?;
    direction_mode(&field, None)
}

/// Window passes the homogeneity gate and has a dominant direction.
pub fn is_processable(values: &[f64], n_bits: u32, spec: &WindowSpec) -> bool {
    match homogeneity(values, spec.n, n_bits) {
        Ok(h) if h < spec.homogeneity_threshold => {
            anchor_angle(values, spec.n, spec.gradient).is_ok()
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_window_is_fully_homogeneous() {
        let w = vec![42.0; 9];
        assert_eq!(homogeneity(&w, 3, 8).unwrap(), 1.0);
        assert!(!is_processable(&w, 8, &WindowSpec::with_n(3)));
    }

    #[test]
    fn single_outlier() {
        let mut w = vec![100.0; 9];
        w[4] = 116.0;
        assert_eq!(homogeneity(&w, 3, 8).unwrap(), 0.9375);
        assert!(is_processable(&w, 8, &WindowSpec::with_n(3)));
    }

    #[test]
    fn deviation_of_full_range_gives_zero() {
        // median 0, one pixel at 256 -> sqrt(65536) = 256
        let mut w = vec![0.0; 9];
        w[0] = 256.0;
        assert_eq!(homogeneity(&w, 3, 8).unwrap(), 0.0);
        // larger deviations go negative
        w[1] = 256.0;
        assert!(homogeneity(&w, 3, 8).unwrap() < 0.0);
    }

    #[test]
    fn threshold_gate() {
        // H = 1 - 12.8/256 = 0.95
        let mut w = vec![100.0; 9];
        w[4] = 112.8;
        let h = homogeneity(&w, 3, 8).unwrap();
        assert!((h - 0.95).abs() < 1e-12);
        let mut spec = WindowSpec::with_n(3);
        spec.homogeneity_threshold = 0.9;
        assert!(!is_processable(&w, 8, &spec));
        spec.homogeneity_threshold = 0.96;
        assert!(is_processable(&w, 8, &spec));
    }

    #[test]
    fn shape_is_checked() {
        assert!(homogeneity(&[0.0; 8], 3, 8).is_err());
    }

    #[test]
    fn even_count_median() {
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), 2.5);
    }
}
