use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::{default_names, Dataset};
use crate::error::{invalid, Result};
use crate::{seed, Scalar};

pub const FRIEDMAN1_DIM: usize = 5;

/// Noiseless friedman1 regression function
/// `10 sin(pi x1 x2) + 20 (x3 - 0.5)^2 + 10 x4 + 5 x5`.
pub fn eval_friedman1<T: Scalar>(x: &[T]) -> Result<T> {
    if x.len() != FRIEDMAN1_DIM {
        return Err(invalid(format!("friedman1 takes 5 coordinates, got {}", x.len())));
    }
    let c = |v: f64| T::from_f64_lossy(v);
    let pi = c(std::f64::consts::PI);
    let centered = x[2] - c(0.5);
    Ok(c(10.0) * (pi * x[0] * x[1]).sin()
        + c(20.0) * centered * centered
        + c(10.0) * x[3]
        + c(5.0) * x[4])
}

/// `n` rows uniform on `[0,1]^5` with response `m(x) + N(0, noise_sd^2)`.
pub fn gen_friedman1<T: Scalar>(n: usize, noise_sd: f64, seed: u64) -> Result<Dataset<T>> {
    if n == 0 {
        return Err(invalid("friedman1 needs at least one row"));
    }
    if !(noise_sd >= 0.0 && noise_sd.is_finite()) {
        return Err(invalid(format!("noise standard deviation must be >= 0, got {noise_sd}")));
    }
    let mut rng = seed::rng(seed);
    let noise = Normal::new(0.0, noise_sd).map_err(|e| invalid(e.to_string()))?;
    let mut features = Vec::with_capacity(n * FRIEDMAN1_DIM);
    let mut response = Vec::with_capacity(n);
    for _ in 0..n {
        let row: Vec<f64> = (0..FRIEDMAN1_DIM).map(|_| rng.random::<f64>()).collect();
        let m = eval_friedman1(&row)?;
        let eps = if noise_sd > 0.0 { noise.sample(&mut rng) } else { 0.0 };
        features.extend(row.iter().map(|&v| T::from_f64_lossy(v)));
        response.push(T::from_f64_lossy(m + eps));
    }
    let mask = vec![false; features.len()];
    Dataset::new(FRIEDMAN1_DIM, features, mask, response, default_names(FRIEDMAN1_DIM))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formula_values() {
        let centre = 10.0 * (std::f64::consts::FRAC_PI_4).sin() + 5.0 + 2.5;
        assert!((eval_friedman1(&[0.5; 5]).unwrap() - centre).abs() < 1e-12);
        assert!((eval_friedman1(&[0.5f64; 5]).unwrap() - 14.571_067_811_865_476).abs() < 1e-12);
        assert!((eval_friedman1(&[1.0, 0.5, 0.5, 1.0, 1.0]).unwrap() - 25.0f64).abs() < 1e-12);
        assert_eq!(eval_friedman1(&[0.0, 1.0, 0.5, 0.0, 0.0]).unwrap(), 0.0f64);
        assert_eq!(eval_friedman1(&[0.0, 0.0, 0.5, 0.0, 0.0]).unwrap(), 0.0f64);
        assert!((eval_friedman1(&[0.0f64; 5]).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_wrong_length() {
        assert!(eval_friedman1(&[0.0f64; 4]).is_err());
        assert!(eval_friedman1(&[0.0f64; 6]).is_err());
    }

    #[test]
    fn generator_contract() {
        assert!(gen_friedman1::<f64>(0, 1.0, 1).is_err());
        let a: Dataset<f64> = gen_friedman1(50, 1.0, 9).unwrap();
        let b: Dataset<f64> = gen_friedman1(50, 1.0, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n_cols(), 5);
        assert!(!a.has_missing());
        for i in 0..a.n_rows() {
            let x = a.complete_row(i).unwrap();
            assert!(x.iter().all(|v| (0.0..=1.0).contains(v)));
        }
        let clean: Dataset<f64> = gen_friedman1(20, 0.0, 3).unwrap();
        for i in 0..20 {
            let m = eval_friedman1(&clean.complete_row(i).unwrap()).unwrap();
            assert_eq!(m, clean.y(i));
        }
    }
}
