//! Stable log-domain primitives used by the likelihood and EM code.
//!
//! All posterior arithmetic in this crate runs on log-weights and converts
//! back to probabilities through [`sigmoid`] or [`normalize_log_weights`],
//! so extreme rates and long tally runs cannot underflow.

/// ln(n!), computed by direct summation.
pub fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// ln(Σ exp(x_i)) without overflow; empty input and all `-inf` give `-inf`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Logistic function of a log-odds value; exact at `±inf`.
pub fn sigmoid(logit: f64) -> f64 {
    if logit >= 0.0 {
        1.0 / (1.0 + (-logit).exp())
    } else {
        let e = logit.exp();
        e / (1.0 + e)
    }
}

/// Turns log-weights into a normalized probability vector in place.
///
/// Returns the log of the normalizing constant. All-`-inf` input is left
/// untouched and reported as `-inf`.
pub fn normalize_log_weights(ws: &mut [f64]) -> f64 {
    let z = log_sum_exp(ws);
    if z == f64::NEG_INFINITY {
        return z;
    }
    for w in ws.iter_mut() {
        *w = (*w - z).exp();
    }
    z
}

/// Compensated running sum (Neumaier's variant of Kahan summation).
///
/// Keeps the accumulated error at a few ulps of the total instead of
/// growing with the number of terms, which matters for the objective:
/// an EM trace over thousands of cells must stay monotone to 1e-10, well
/// below what a plain fold guarantees. Infinite terms pass straight
/// through, so `-inf` objectives stay `-inf` instead of turning into NaN.
#[derive(Debug, Clone, Copy, Default)]
pub struct StableSum {
    total: f64,
    carry: f64,
}

impl StableSum {
    pub fn new(first: f64) -> Self {
        Self {
            total: first,
            carry: 0.0,
        }
    }

    pub fn add(&mut self, x: f64) {
        let t = self.total + x;
        if t.is_finite() {
            if self.total.abs() >= x.abs() {
                self.carry += (self.total - t) + x;
            } else {
                self.carry += (x - t) + self.total;
            }
        }
        self.total = t;
    }

    pub fn value(&self) -> f64 {
        if self.total.is_finite() {
            self.total + self.carry
        } else {
            self.total
        }
    }
}

/// Log-probability of observing `positives` successes in `trials` independent
/// checks that each fire with probability `rate`: `E ln r + (N-E) ln(1-r)`.
///
/// The binomial coefficient is omitted throughout the crate; it cancels in
/// every posterior and shifts every objective by the same constant. The
/// `0 ln 0 = 0` convention applies, so a zero rate with zero positives is a
/// certain (log-probability 0) outcome rather than a NaN.
pub fn log_count_prob(rate: f64, positives: u32, trials: u32) -> f64 {
    debug_assert!(positives <= trials);
    debug_assert!((0.0..=1.0).contains(&rate));
    let misses = trials - positives;
    let hit = if positives == 0 {
        0.0
    } else {
        positives as f64 * rate.ln()
    };
    let miss = if misses == 0 {
        0.0
    } else {
        misses as f64 * (-rate).ln_1p()
    };
    hit + miss
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorial_small_values() {
        assert_eq!(ln_factorial(0), 0.0);
        assert_eq!(ln_factorial(1), 0.0);
        assert!((ln_factorial(5) - 120f64.ln()).abs() < 1e-12);
        assert!((ln_factorial(10) - 3628800f64.ln()).abs() < 1e-11);
    }

    #[test]
    fn log_sum_exp_handles_extremes() {
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert_eq!(
            log_sum_exp(&[f64::NEG_INFINITY, f64::NEG_INFINITY]),
            f64::NEG_INFINITY
        );
        let z = log_sum_exp(&[-1000.0, -1000.0]);
        assert!((z - (-1000.0 + 2f64.ln())).abs() < 1e-12);
        assert!((log_sum_exp(&[0.0, f64::NEG_INFINITY]) - 0.0).abs() < 1e-15);
    }

    #[test]
    fn sigmoid_matches_direct_form() {
        for &x in &[-30.0, -2.5, 0.0, 0.3, 7.0] {
            let direct = 1.0 / (1.0 + (-x as f64).exp());
            assert!((sigmoid(x) - direct).abs() < 1e-15);
        }
        assert_eq!(sigmoid(f64::NEG_INFINITY), 0.0);
        assert_eq!(sigmoid(f64::INFINITY), 1.0);
    }

    #[test]
    fn count_prob_conventions() {
        assert_eq!(log_count_prob(0.0, 0, 4), 0.0);
        assert_eq!(log_count_prob(1.0, 4, 4), 0.0);
        assert_eq!(log_count_prob(0.0, 1, 4), f64::NEG_INFINITY);
        let v = log_count_prob(0.8, 2, 3);
        assert!((v - (2.0 * 0.8f64.ln() + 0.2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn stable_sum_beats_plain_folds() {
        // 1 + 1e-16 added 10^4 times: the plain fold drops every small term.
        let mut s = StableSum::new(1.0);
        let mut plain = 1.0f64;
        for _ in 0..10_000 {
            s.add(1e-16);
            plain += 1e-16;
        }
        assert_eq!(plain, 1.0);
        assert!((s.value() - (1.0 + 1e-12)).abs() < 1e-27);
    }

    #[test]
    fn stable_sum_passes_infinities_through() {
        let mut s = StableSum::new(2.0);
        s.add(f64::NEG_INFINITY);
        s.add(1.0);
        assert_eq!(s.value(), f64::NEG_INFINITY);
    }

    #[test]
    fn normalize_recovers_probabilities() {
        let mut ws = vec![(0.2f64).ln() - 3.0, (0.8f64).ln() - 3.0];
        let z = normalize_log_weights(&mut ws);
        assert!((z - (-3.0)).abs() < 1e-12);
        assert!((ws[0] - 0.2).abs() < 1e-12);
        assert!((ws[1] - 0.8).abs() < 1e-12);
    }
}
