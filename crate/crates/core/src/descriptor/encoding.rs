/// Ternary code of the forward differences of `p`.
///
/// `0` where the difference is `<= -t`, `2` where it is `>= t`, `1` otherwise.
pub fn ternary_encode(p: &[f64], t: f64) -> Vec<u8> {
    p.windows(2)
        .map(|w| {
            let d = w[1] - w[0];
            if d <= -t {
                0
            } else if d >= t {
                2
            } else {
                1
            }
        })
        .collect()
}

/// Number of positions where consecutive codes differ.
pub fn transition_count(q: &[u8]) -> usize {
    q.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Binary code of the forward differences: bit `i` is set iff
/// `p[i + 1] > p[i]`.
pub fn sign_code(p: &[f64]) -> usize {
    assert!(p.len() <= usize::BITS as usize, "projection too long for a sign code");
    p.windows(2)
        .enumerate()
        .filter(|(_, w)| w[1] > w[0])
        .fold(0usize, |code, (i, _)| code | (1 << i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ternary_examples() {
        assert_eq!(ternary_encode(&[1.0, 1.0, 1.0, 1.0], 0.08), vec![1, 1, 1]);
        assert_eq!(ternary_encode(&[0.0, 1.0, 0.0], 0.08), vec![2, 0]);
        assert_eq!(ternary_encode(&[0.0, 0.05, 0.10], 0.08), vec![1, 1]);
    }

    #[test]
    fn ternary_boundaries_are_inclusive() {
        // differences of exactly -0.5 and +0.5
        assert_eq!(ternary_encode(&[1.0, 0.5, 1.0], 0.5), vec![0, 2]);
        assert_eq!(ternary_encode(&[1.0, 0.75, 1.0], 0.5), vec![1, 1]);
    }

    #[test]
    fn transition_examples() {
        assert_eq!(transition_count(&[1; 8]), 0);
        assert_eq!(transition_count(&[2, 0, 2, 0, 2, 0, 2, 0]), 7);
        assert_eq!(transition_count(&[1, 1, 2, 2, 0]), 2);
        assert_eq!(transition_count(&[0]), 0);
    }

    #[test]
    fn sign_code_examples() {
        let up: Vec<f64> = (0..9).map(|i| i as f64).collect();
        assert_eq!(sign_code(&up), 255);
        assert_eq!(sign_code(&[3.0; 9]), 0);
        assert_eq!(sign_code(&[0.0, 1.0, 0.0, 0.0, 5.0]), 0b1001);
    }

    proptest! {
        #[test]
        fn transitions_bounded(q in prop::collection::vec(0u8..3, 1..20)) {
            let d = transition_count(&q);
            prop_assert!(d < q.len());
        }

        #[test]
        fn codes_invariant_under_joint_power_of_two_scaling(
            p in prop::collection::vec(-4.0f64..4.0, 2..12),
            t in 0.0f64..1.0,
            k in -6i32..6,
        ) {
            let s = 2f64.powi(k);
            let scaled: Vec<f64> = p.iter().map(|v| v * s).collect();
            prop_assert_eq!(ternary_encode(&p, t), ternary_encode(&scaled, t * s));
        }
    }
}
