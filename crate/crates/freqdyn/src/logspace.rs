//! Log-domain accumulation helpers.
//!
//! Weights such as `exp(k / ln k)` overflow `f64` long before the horizons used
//! here, so every sum of positive terms is carried as its logarithm.

/// `ln(e^a + e^b)` without overflow. `-inf` is the additive identity.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(e^a - e^b)` for `a >= b`. Returns `-inf` when the difference vanishes.
#[inline]
pub fn log_sub_exp(a: f64, b: f64) -> f64 {
    if b == f64::NEG_INFINITY {
        return a;
    }
    if b >= a {
        return f64::NEG_INFINITY;
    }
    a + (-(b - a).exp()).ln_1p()
}

/// Log of a sum given the logs of its terms (pairwise reduction, order-stable).
pub fn log_sum_exp(terms: &[f64]) -> f64 {
    match terms.len() {
        0 => f64::NEG_INFINITY,
        1 => terms[0],
        n => {
            let (l, r) = terms.split_at(n / 2);
            log_add_exp(log_sum_exp(l), log_sum_exp(r))
        }
    }
}

/// Streaming accumulator for `ln Σ e^{x_i}`.
#[derive(Debug, Clone, Copy)]
pub struct LogAccumulator {
    value: f64,
}

impl Default for LogAccumulator {
    fn default() -> Self {
        Self::new()
    }
}

impl LogAccumulator {
    pub fn new() -> Self {
        Self {
            value: f64::NEG_INFINITY,
        }
    }

    #[inline]
    pub fn push(&mut self, log_term: f64) {
        self.value = log_add_exp(self.value, log_term);
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.value
    }
}

/// Pairwise summation of plain floats; deterministic regardless of thread layout.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let (l, r) = xs.split_at(xs.len() / 2);
    pairwise_sum(l) + pairwise_sum(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_exp_matches_direct() {
        let v = log_add_exp(1.0_f64.ln(), 2.0_f64.ln());
        assert!((v - 3.0_f64.ln()).abs() < 1e-15);
        assert_eq!(log_add_exp(f64::NEG_INFINITY, 0.5), 0.5);
    }

    #[test]
    fn add_exp_survives_large_arguments() {
        let v = log_add_exp(1000.0, 1000.0);
        assert!((v - (1000.0 + 2.0_f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn sub_exp_inverts_add() {
        let s = log_add_exp(3.0, 1.0);
        assert!((log_sub_exp(s, 1.0) - 3.0).abs() < 1e-13);
        assert_eq!(log_sub_exp(1.0, 1.0), f64::NEG_INFINITY);
    }

    #[test]
    fn sum_exp_empty_is_neg_inf() {
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        let v = log_sum_exp(&[0.0; 10]);
        assert!((v - 10.0_f64.ln()).abs() < 1e-14);
    }
}
