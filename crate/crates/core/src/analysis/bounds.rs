/// Upper bound on the probability that the object survives `horizon` periods
/// when a player active with probability `q_greedy` plays greedily.
///
/// A greedy search finds the object with probability at least
/// `(1 − δ_max)/n` whenever that player is active.
pub fn residual_bound(q_greedy: f64, n: usize, max_overlook: f64, horizon: usize) -> f64 {
    let rate = per_period_rate(q_greedy, n, max_overlook);
    (1.0 - rate).max(0.0).powi(horizon.min(i32::MAX as usize) as i32)
}

/// Smallest horizon with `residual_bound(..) <= target`.
pub fn horizon_for_bound(q_greedy: f64, n: usize, max_overlook: f64, target: f64) -> usize {
    let rate = per_period_rate(q_greedy, n, max_overlook);
    if rate >= 1.0 {
        return 1;
    }
    let mut t = (target.ln() / (1.0 - rate).ln()).ceil().max(1.0) as usize;
    // ln rounding can leave the bound a hair above target
    while residual_bound(q_greedy, n, max_overlook, t) > target {
        t += 1;
    }
    t
}

/// Smallest `T` with `discount^T <= tail_tol`.
pub fn discount_horizon(discount: f64, tail_tol: f64) -> usize {
    let mut t = (tail_tol.ln() / discount.ln()).ceil().max(1.0) as usize;
    while discount.powi(t as i32) > tail_tol {
        t += 1;
    }
    t
}

fn per_period_rate(q: f64, n: usize, max_overlook: f64) -> f64 {
    q * (1.0 - max_overlook) / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_examples() {
        assert_eq!(residual_bound(0.99, 2, 0.0, 10), 0.505f64.powi(10));
        assert_eq!(residual_bound(1.0, 1, 0.0, 1), 0.0);
        assert!((residual_bound(0.5, 2, 0.5, 1) - 0.875).abs() < 1e-15);
    }

    #[test]
    fn horizon_is_minimal() {
        for &(q, n, d) in &[(0.99, 2, 0.0), (0.01, 2, 0.0), (0.3, 4, 0.9), (0.35, 2, 0.0)] {
            let t = horizon_for_bound(q, n, d, 1e-6);
            assert!(residual_bound(q, n, d, t) <= 1e-6);
            assert!(t == 1 || residual_bound(q, n, d, t - 1) > 1e-6);
        }
        assert_eq!(horizon_for_bound(1.0, 1, 0.0, 1e-9), 1);
    }

    #[test]
    fn discount_horizon_examples() {
        let t = discount_horizon(0.999, 1e-6);
        assert!(0.999f64.powi(t as i32) <= 1e-6);
        assert!(0.999f64.powi(t as i32 - 1) > 1e-6);
    }
}
