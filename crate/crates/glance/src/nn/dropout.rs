//! Inverted dropout: survivors are scaled by 1/(1-rate) at train time so
//! inference needs no rescaling. The mask is returned for exact backward
//! replay.

use crate::error::{GlanceError, Result};
use crate::nn::matrix::DenseMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn dropout_apply(
    x: &DenseMatrix,
    rate: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(DenseMatrix, DenseMatrix)> {
    if !(0.0..1.0).contains(&rate) {
        return Err(GlanceError::Config(format!(
            "dropout rate must be in [0,1), got {rate}"
        )));
    }
    let mut mask = DenseMatrix::zeros(x.rows(), x.cols());
    if rate == 0.0 {
        mask.map_in_place(|_| 1.0);
    } else {
        let keep_scale = 1.0 / (1.0 - rate);
        for v in mask.values_mut() {
            *v = if rng.gen::<f64>() < rate {
                0.0
            } else {
                keep_scale
            };
        }
    }
    let mut out = x.clone();
    out.mul_elementwise(&mask)?;
    Ok((out, mask))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_from_seed;

    #[test]
    fn rate_zero_is_identity() {
        let x = DenseMatrix::from_vec(2, 2, vec![1.0, -2.0, 3.0, 4.0]).unwrap();
        let mut rng = stream_from_seed(1);
        let (out, mask) = dropout_apply(&x, 0.0, &mut rng).unwrap();
        assert_eq!(out.values(), x.values());
        assert!(mask.values().iter().all(|&m| m == 1.0));
    }

    #[test]
    fn fixed_seed_gives_identical_mask() {
        let x = DenseMatrix::zeros(4, 8);
        let (_, m1) = dropout_apply(&x, 0.5, &mut stream_from_seed(9)).unwrap();
        let (_, m2) = dropout_apply(&x, 0.5, &mut stream_from_seed(9)).unwrap();
        assert_eq!(m1.values(), m2.values());
    }

    #[test]
    fn masked_expectation_matches_input() {
        // Monte-Carlo oracle: mean of masked x over many seeded draws ~= x.
        let x = DenseMatrix::from_vec(1, 1, vec![2.0]).unwrap();
        let rate = 0.3;
        let mut rng = stream_from_seed(42);
        let draws = 10_000;
        let mut sum = 0.0;
        for _ in 0..draws {
            let (out, _) = dropout_apply(&x, rate, &mut rng).unwrap();
            sum += out.get(0, 0);
        }
        let mean = sum / draws as f64;
        assert!(
            (mean - 2.0).abs() / 2.0 < 0.02,
            "mean {mean} should be within 2% of 2.0"
        );
    }

    #[test]
    fn invalid_rate_rejected() {
        let x = DenseMatrix::zeros(1, 1);
        assert!(dropout_apply(&x, 1.0, &mut stream_from_seed(0)).is_err());
    }
}
