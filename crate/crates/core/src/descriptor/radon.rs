//! Discrete Radon projection of a square window.
//!
//! The window is rotated by `-theta` about its center with bilinear
//! interpolation and zero padding, then each column is summed. Angles are split
//! into whole quarter turns (done by index permutation) and a remainder in
//! `[0, 90)` degrees, so quarter-turn multiples involve no interpolation.

use super::ProjectionVector;

/// Samples `out(x, y) = in(R(90 * k) (x, y))` about the window center.
pub fn rotate_quarter_turns(values: &[f64], n: usize, k: usize) -> Vec<f64> {
    let mut cur = values.to_vec();
    for _ in 0..k % 4 {
        let mut next = vec![0.0; n * n];
        for y in 0..n {
            for x in 0..n {
                next[y * n + x] = cur[x * n + (n - 1 - y)];
            }
        }
        cur = next;
    }
    cur
}

#[inline]
fn bilinear(values: &[f64], n: usize, px: f64, py: f64) -> f64 {
    let x0 = px.floor();
    let y0 = py.floor();
    let fx = px - x0;
    let fy = py - y0;
    let (x0, y0) = (x0 as isize, y0 as isize);
    let at = |x: isize, y: isize| -> f64 {
        if x < 0 || y < 0 || x >= n as isize || y >= n as isize {
            0.0
        } else {
            values[y as usize * n + x as usize]
        }
    };
    (1.0 - fy) * ((1.0 - fx) * at(x0, y0) + fx * at(x0 + 1, y0))
        + fy * ((1.0 - fx) * at(x0, y0 + 1) + fx * at(x0 + 1, y0 + 1))
}

/// Projection of an `n x n` window along lines at angle `theta` (degrees).
///
/// Output bin `x` integrates the window along the line whose offset from the
/// center, measured along `(cos theta, sin theta)`, is `x - (n - 1) / 2`.
pub fn radon_projection(values: &[f64], n: usize, theta: f64) -> ProjectionVector {
    assert_eq!(values.len(), n * n, "window must be n x n");
    let phi = theta.rem_euclid(360.0);
    let quarters = ((phi / 90.0).floor() as usize).min(3);
    let rest = phi - 90.0 * quarters as f64;
    let turned = rotate_quarter_turns(values, n, quarters);

    let mut proj = vec![0.0; n];
    if rest == 0.0 {
        for y in 0..n {
            for (x, p) in proj.iter_mut().enumerate() {
                *p += turned[y * n + x];
            }
        }
    } else {
        let (sin, cos) = rest.to_radians().sin_cos();
        let c = (n as f64 - 1.0) / 2.0;
        for y in 0..n {
            let v = y as f64 - c;
            for (x, p) in proj.iter_mut().enumerate() {
                let u = x as f64 - c;
                let sx = u * cos - v * sin + c;
                let sy = u * sin + v * cos + c;
                *p += bilinear(&turned, n, sx, sy);
            }
        }
    }
    ProjectionVector {
        values: proj,
        theta,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_window_at_zero() {
        let w = vec![0.5; 81];
        let p = radon_projection(&w, 9, 0.0);
        assert_eq!(p.values, vec![4.5; 9]);
    }

    #[test]
    fn column_impulse() {
        let n = 5;
        let mut w = vec![0.0; n * n];
        for y in 0..n {
            w[y * n + 1] = 1.0;
        }
        let p = radon_projection(&w, n, 0.0);
        assert_eq!(p.values, vec![0.0, 5.0, 0.0, 0.0, 0.0]);
        let turned = rotate_quarter_turns(&w, n, 1);
        assert_eq!(
            radon_projection(&w, n, 90.0).values,
            radon_projection(&turned, n, 0.0).values
        );
        // a vertical line becomes a row: its 90-degree projection is a box
        assert_eq!(radon_projection(&w, n, 90.0).values, vec![1.0; 5]);
    }

    #[test]
    fn quarter_turns_compose() {
        let n = 5;
        let w: Vec<f64> = (0..25).map(|i| i as f64).collect();
        assert_eq!(rotate_quarter_turns(&w, n, 4), w);
        let two = rotate_quarter_turns(&rotate_quarter_turns(&w, n, 1), n, 1);
        assert_eq!(two, rotate_quarter_turns(&w, n, 2));
        let rev: Vec<f64> = w.iter().rev().copied().collect();
        assert_eq!(two, rev);
    }

    #[test]
    fn oblique_projection_loses_only_corner_mass() {
        let n = 9;
        let w = vec![1.0; n * n];
        let p = radon_projection(&w, n, 30.0);
        assert_eq!(p.len(), n);
        let total: f64 = p.values.iter().sum();
        assert!(total < 81.0 && total > 60.0, "{total}");
        // symmetric about the center for a symmetric window
        for i in 0..n {
            assert!((p.values[i] - p.values[n - 1 - i]).abs() < 1e-9);
        }
    }

    #[test]
    fn small_angle_is_close_to_zero_angle() {
        let n = 7;
        let w: Vec<f64> = (0..49).map(|i| ((i * 37) % 11) as f64 / 10.0).collect();
        let a = radon_projection(&w, n, 0.0).values;
        let b = radon_projection(&w, n, 1e-7).values;
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-5);
        }
    }
}
