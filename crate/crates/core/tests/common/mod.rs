#![allow(dead_code)]

pub mod lattice_oracle;
pub mod naive_book;

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Fixture for the first-action ratio: the mean Ising waiting time for which
/// `Q = target` at sweep probability `q`, from solving
/// `1 - Q = q / (1 - (1-q) x)` for `x = exp(-1/mu)`.
pub fn back_solve_mu(q: f64, target: f64) -> f64 {
    let x = (1.0 - q / (1.0 - target)) / (1.0 - q);
    -1.0 / x.ln()
}

/// Pearson chi-square p-value. Cells with expected count below 5 are merged
/// into one pooled cell.
pub fn chi_square_p(observed: &[u64], probs: &[f64]) -> (f64, f64, usize) {
    let total: u64 = observed.iter().sum();
    let n = total as f64;
    let (mut stat, mut cells) = (0.0, 0usize);
    let (mut pool_obs, mut pool_exp) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        let e = p * n;
        if e < 5.0 {
            pool_obs += o as f64;
            pool_exp += e;
        } else {
            stat += (o as f64 - e).powi(2) / e;
            cells += 1;
        }
    }
    if pool_exp > 0.0 {
        stat += (pool_obs - pool_exp).powi(2) / pool_exp;
        cells += 1;
    }
    let df = (cells - 1) as f64;
    let p = 1.0 - ChiSquared::new(df).unwrap().cdf(stat);
    (stat, p, cells - 1)
}

/// One-sided sign-test p-value for `wins` successes out of `n`.
pub fn sign_test_p(wins: usize, n: usize) -> f64 {
    let mut tail = 0.0;
    for k in wins..=n {
        tail += binomial(n, k);
    }
    tail / 2f64.powi(n as i32)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
