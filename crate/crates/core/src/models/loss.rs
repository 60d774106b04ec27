/// Training loss of a regressor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Loss {
    SquaredError,
    /// Pinball (quantile) loss at level `tau` in (0, 1).
    Pinball(f64),
}

impl Loss {
    pub(crate) fn validate(self) -> crate::Result<()> {
        match self {
            Loss::SquaredError => Ok(()),
            Loss::Pinball(tau) if tau > 0.0 && tau < 1.0 => Ok(()),
            Loss::Pinball(tau) => Err(crate::Error::InvalidHyperparameter(alloc::format!(
                "pinball level {tau} outside (0, 1)"
            ))),
        }
    }

    /// Negative gradient of the loss with respect to the prediction.
    pub(crate) fn negative_gradient(self, y: f64, prediction: f64) -> f64 {
        match self {
            Loss::SquaredError => y - prediction,
            Loss::Pinball(tau) => {
                if y > prediction {
                    tau
                } else {
                    -(1.0 - tau)
                }
            }
        }
    }

    /// Loss-optimal constant for a set of values (consumes the buffer order).
    pub fn optimal_constant(self, values: &mut [f64]) -> f64 {
        match self {
            Loss::SquaredError => mean(values),
            Loss::Pinball(tau) => empirical_quantile(values, tau),
        }
    }
}

/// `tau * (y - y_hat)` when `y > y_hat`, `(1 - tau) * (y_hat - y)` otherwise.
pub fn pinball_loss(tau: f64, y: f64, y_hat: f64) -> f64 {
    if y > y_hat {
        tau * (y - y_hat)
    } else {
        (1.0 - tau) * (y_hat - y)
    }
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Lower empirical `tau`-quantile: the `ceil(tau * n)`-th smallest value.
/// This is an exact minimizer of the summed pinball loss.
pub fn empirical_quantile(values: &mut [f64], tau: f64) -> f64 {
    let n = values.len();
    assert!(n > 0, "quantile of an empty set");
    let k = (libm::ceil(tau * n as f64) as usize).clamp(1, n);
    let (_, kth, _) = values.select_nth_unstable_by(k - 1, f64::total_cmp);
    *kth
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    fn total(tau: f64, ys: &[f64], c: f64) -> f64 {
        ys.iter().map(|&y| pinball_loss(tau, y, c)).sum()
    }

    #[test]
    fn quantile_of_one_to_ten() {
        let mut ys: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(empirical_quantile(&mut ys, 0.9), 9.0);
        assert_eq!(empirical_quantile(&mut ys, 0.5), 5.0);
        assert_eq!(empirical_quantile(&mut ys, 0.01), 1.0);
    }

    #[test]
    fn quantile_minimizes_pinball() {
        let ys = [3.0, -1.0, 7.5, 7.5, 2.0, 10.0, 0.0];
        for tau in [0.1, 0.25, 0.5, 0.75, 0.9] {
            let mut buf = ys;
            let q = empirical_quantile(&mut buf, tau);
            let best = ys
                .iter()
                .map(|&c| total(tau, &ys, c))
                .fold(f64::INFINITY, f64::min);
            assert!(total(tau, &ys, q) <= best + 1e-12, "tau {tau}");
        }
    }

    #[test]
    fn pinball_is_asymmetric() {
        assert_eq!(pinball_loss(0.9, 10.0, 8.0), 0.9 * 2.0);
        assert!((pinball_loss(0.9, 8.0, 10.0) - 0.2).abs() < 1e-15);
        assert_eq!(pinball_loss(0.3, 4.0, 4.0), 0.0);
    }
}
