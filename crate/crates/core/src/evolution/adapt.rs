//! Time-variant adaptation of relaxation factors.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::AdaptiveParams;

/// Standard deviation of the Gaussian noise in the TVA probabilities.
pub const NOISE_STD_DEV: f64 = 0.25;

/// Adapted factors are kept this far inside `(omega_lo, omega_hi)`.
pub const OMEGA_MARGIN: f64 = 1e-6;

/// Evenly spaced midpoints `lo + d/2, lo + 3d/2, ...` with `d = (hi - lo) / n`.
pub fn init_relaxation_factors(n_pop: usize, params: &AdaptiveParams) -> Vec<f64> {
    let d = (params.omega_hi - params.omega_lo) / n_pop as f64;
    (0..n_pop).map(|i| params.omega_lo + d * (i as f64 + 0.5)).collect()
}

/// Basic time-variant parameter `lambda * ln(1 + 1/(t + lambda))`.
pub fn basic_time_variant(t: u64, lambda: f64) -> f64 {
    lambda * (1.0 / (t as f64 + lambda)).ln_1p()
}

/// The signed step `p_x` for the worse individual's factor and the
/// nonnegative step `p_y` for the better one's.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TvaProbabilities {
    pub p_x: f64,
    pub p_y: f64,
}

impl TvaProbabilities {
    /// Scales raw Gaussian draws by the bounds and the time-variant factor.
    pub fn from_gaussians(g_x: f64, g_y: f64, t: u64, params: &AdaptiveParams) -> Self {
        let tw = basic_time_variant(t, params.lambda);
        TvaProbabilities { p_x: params.e_x * g_x * tw, p_y: params.e_y * g_y.abs() * tw }
    }
}

/// Draws the two Gaussians for one adaptation, in the order `g_x`, `g_y`.
pub fn draw_gaussians<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    let normal = Normal::new(0.0, NOISE_STD_DEV).expect("valid standard deviation");
    (normal.sample(rng), normal.sample(rng))
}

fn clamp_omega(omega: f64, params: &AdaptiveParams) -> f64 {
    omega.clamp(params.omega_lo + OMEGA_MARGIN, params.omega_hi - OMEGA_MARGIN)
}

/// Returns `(new_loser, new_winner)`: the loser is pulled toward the winner's
/// factor and the winner is pushed toward the boundary on its own side.
fn adapt_ordered(loser: f64, winner: f64, probs: TvaProbabilities, params: &AdaptiveParams) -> (f64, f64) {
    let new_loser = (0.5 + probs.p_x) * (loser + winner);
    let new_winner = if winner >= loser {
        winner + probs.p_y * (params.omega_hi - winner)
    } else {
        winner + probs.p_y * (params.omega_lo - winner)
    };
    (clamp_omega(new_loser, params), clamp_omega(new_winner, params))
}

/// Adapts a pair of factors given already-scaled probabilities.
///
/// Equal errors leave both factors untouched.
pub fn apply_adaptation(
    omega_x: f64,
    omega_y: f64,
    err_x: f64,
    err_y: f64,
    probs: TvaProbabilities,
    params: &AdaptiveParams,
) -> (f64, f64) {
    if err_x > err_y {
        adapt_ordered(omega_x, omega_y, probs, params)
    } else if err_x < err_y {
        let (new_y, new_x) = adapt_ordered(omega_y, omega_x, probs, params);
        (new_x, new_y)
    } else {
        (omega_x, omega_y)
    }
}

/// Adapts the pair `(omega_x, omega_y)` at generation `t`, drawing the noise
/// from `rng`. Two Gaussians are consumed on every call, including the
/// no-op equal-error case, so the stream position never depends on fitness
/// ties.
#[allow(clippy::too_many_arguments)]
pub fn adapt_pair<R: Rng + ?Sized>(
    omega_x: f64,
    omega_y: f64,
    err_x: f64,
    err_y: f64,
    t: u64,
    params: &AdaptiveParams,
    rng: &mut R,
) -> (f64, f64) {
    let (g_x, g_y) = draw_gaussians(rng);
    let probs = TvaProbabilities::from_gaussians(g_x, g_y, t, params);
    apply_adaptation(omega_x, omega_y, err_x, err_y, probs, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::seeded_rng;
    use proptest::prelude::*;

    fn defaults() -> AdaptiveParams {
        AdaptiveParams::default()
    }

    #[test]
    fn midpoint_initialization() {
        let p = defaults();
        assert_eq!(init_relaxation_factors(2, &p), vec![0.5, 1.5]);
        assert_eq!(init_relaxation_factors(4, &p), vec![0.25, 0.75, 1.25, 1.75]);
        assert_eq!(init_relaxation_factors(1, &p), vec![1.0]);
    }

    #[test]
    fn time_variant_values() {
        // 50 ln(51/50) and 50 ln(1.01), evaluated with the plain ln
        let at0 = 50.0 * (51.0f64 / 50.0).ln();
        let at50 = 50.0 * 1.01f64.ln();
        assert!((basic_time_variant(0, 50.0) - at0).abs() < 1e-12);
        assert!((basic_time_variant(50, 50.0) - at50).abs() < 1e-12);
        // frozen from an independent double-precision evaluation
        assert!((basic_time_variant(0, 50.0) - 0.990_131_364_8).abs() < 1e-10);
        assert!((basic_time_variant(50, 50.0) - 0.497_516_542_7).abs() < 1e-10);
        assert!(basic_time_variant(10_000_000, 50.0) < 1e-5);
    }

    #[test]
    fn time_variant_strictly_decreasing() {
        let mut prev = basic_time_variant(0, 50.0);
        assert!(prev < 1.0);
        for t in 1..=10_000 {
            let cur = basic_time_variant(t, 50.0);
            assert!(cur < prev, "t = {t}");
            assert!(cur > 0.0);
            prev = cur;
        }
    }

    #[test]
    fn equal_errors_do_not_adapt() {
        let mut rng = seeded_rng(3);
        for &(x, y) in &[(0.5, 1.5), (1.9, 0.1), (1.0, 1.0)] {
            assert_eq!(adapt_pair(x, y, 2.0, 2.0, 0, &defaults(), &mut rng), (x, y));
        }
    }

    #[test]
    fn zero_noise_pulls_loser_to_midpoint() {
        let probs = TvaProbabilities::from_gaussians(0.0, 0.0, 7, &defaults());
        assert_eq!(apply_adaptation(0.5, 1.5, 3.0, 1.0, probs, &defaults()), (1.0, 1.5));
        assert_eq!(apply_adaptation(0.5, 1.5, 1.0, 3.0, probs, &defaults()), (0.5, 1.0));
    }

    #[test]
    fn winner_pushed_toward_its_boundary() {
        let p = defaults();
        let up = TvaProbabilities { p_x: 0.0, p_y: 0.1 };
        let (_, wy) = apply_adaptation(0.5, 1.5, 3.0, 1.0, up, &p);
        assert!((wy - 1.55).abs() < 1e-15);
        // winner below loser moves toward omega_lo: 0.5 + 0.1 (0 - 0.5)
        let (_, wy) = apply_adaptation(1.5, 0.5, 3.0, 1.0, up, &p);
        assert!((wy - 0.45).abs() < 1e-15);
        // tie on omega goes up
        let (_, wy) = apply_adaptation(1.0, 1.0, 3.0, 1.0, up, &p);
        assert!((wy - 1.1).abs() < 1e-15);
    }

    #[test]
    fn extreme_draws_are_clamped() {
        let p = defaults();
        let wild = TvaProbabilities { p_x: 5.0, p_y: 1.0 };
        let (x, y) = apply_adaptation(1.5, 1.9, 3.0, 1.0, wild, &p);
        assert_eq!(x, 2.0 - OMEGA_MARGIN);
        assert_eq!(y, 2.0 - OMEGA_MARGIN);
        let wild = TvaProbabilities { p_x: -5.0, p_y: 1.0 };
        let (x, y) = apply_adaptation(0.5, 0.1, 3.0, 1.0, wild, &p);
        assert_eq!(x, OMEGA_MARGIN);
        assert_eq!(y, OMEGA_MARGIN);
    }

    #[test]
    fn step_scale_shrinks_over_time() {
        let p = defaults();
        for t in 0..1000 {
            let now = TvaProbabilities::from_gaussians(1.0, 1.0, t, &p);
            let later = TvaProbabilities::from_gaussians(1.0, 1.0, t + 1, &p);
            assert!(later.p_x < now.p_x && later.p_y < now.p_y);
        }
    }

    proptest! {
        #[test]
        fn reversed_case_mirrors_forward_case(
            wx in 0.01f64..1.99, wy in 0.01f64..1.99,
            lo_err in 0.0f64..100.0, gap in 1e-9f64..100.0,
            gx in -1.0f64..1.0, gy in -1.0f64..1.0, t in 0u64..5000,
        ) {
            let p = defaults();
            let probs = TvaProbabilities::from_gaussians(gx, gy, t, &p);
            let hi_err = lo_err + gap;
            let reversed = apply_adaptation(wx, wy, lo_err, hi_err, probs, &p);
            let (a, b) = apply_adaptation(wy, wx, hi_err, lo_err, probs, &p);
            prop_assert_eq!(reversed, (b, a));
        }

        #[test]
        fn adapted_factors_stay_inside(
            wx in 1e-6f64..(2.0 - 1e-6), wy in 1e-6f64..(2.0 - 1e-6),
            ex in 0.0f64..10.0, ey in 0.0f64..10.0, t in 0u64..10_000, seed in any::<u64>(),
        ) {
            let p = defaults();
            let mut rng = seeded_rng(seed);
            let (x, y) = adapt_pair(wx, wy, ex, ey, t, &p, &mut rng);
            if ex != ey {
                for w in [x, y] {
                    prop_assert!((OMEGA_MARGIN..=2.0 - OMEGA_MARGIN).contains(&w));
                }
            }
        }
    }
}
