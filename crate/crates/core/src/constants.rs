//! Radii and coefficients used by the determination argument.

/// `δ′ = min{δ, 1/(9c)}`.
pub fn delta_prime(c: f64, delta: f64) -> f64 {
    delta.min(1.0 / (9.0 * c))
}

/// `c′ = 6c`, the coefficient after the sharp-minimum transform.
pub fn c_prime(c: f64) -> f64 {
    6.0 * c
}

/// `δ̂ = min{δ/2, 1/(18c)}`, the radius on which `f − g` is constant.
pub fn delta_hat(c: f64, delta: f64) -> f64 {
    (delta / 2.0).min(1.0 / (18.0 * c))
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Constants {
    pub c: f64,
    pub delta: f64,
    pub c_prime: f64,
    pub delta_prime: f64,
    pub delta_hat: f64,
}

impl Constants {
    pub fn new(c: f64, delta: f64) -> Self {
        Constants {
            c,
            delta,
            c_prime: c_prime(c),
            delta_prime: delta_prime(c, delta),
            delta_hat: delta_hat(c, delta),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_parameters() {
        let k = Constants::new(1.0, 1.0);
        assert_eq!(k.delta_prime, 1.0 / 9.0);
        assert_eq!(k.c_prime, 6.0);
        assert_eq!(k.delta_hat, 1.0 / 18.0);
    }

    #[test]
    fn delta_hat_is_half_delta_prime() {
        for c in [0.01, 0.1, 0.5, 1.0, 3.0, 10.0] {
            for d in [0.01, 0.2, 0.5, 1.0, 2.0] {
                assert_eq!(delta_hat(c, d), delta_prime(c, d) / 2.0);
            }
        }
    }
}
