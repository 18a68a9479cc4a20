//! Special functions needed for exact moment and pmf evaluation.

use std::f64::consts::PI;

/// `ln(k!)`: exact summation below 32, Stirling series above.
pub fn ln_factorial(k: usize) -> f64 {
    if k < 32 {
        return (2..=k).map(|i| (i as f64).ln()).sum();
    }
    let x = k as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    x * x.ln() - x + 0.5 * (2.0 * PI * x).ln() + inv / 12.0 - inv * inv2 / 360.0
        + inv * inv2 * inv2 / 1260.0
}

/// Hurwitz zeta `sum_{k>=0} (k + a)^{-s}` for `s > 1`, `a > 0`, by Euler-Maclaurin.
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    assert!(s > 1.0 && a > 0.0, "hurwitz_zeta needs s > 1, a > 0");
    const N: usize = 64;
    let mut sum = 0.0;
    for k in 0..N {
        sum += (k as f64 + a).powf(-s);
    }
    let x = N as f64 + a;
    sum += x.powf(1.0 - s) / (s - 1.0);
    sum += 0.5 * x.powf(-s);
    // Bernoulli correction terms B2, B4, B6, B8.
    let mut rising = s; // s (s+1) ... (s+2j-2)
    let mut xp = x.powf(-s - 1.0);
    let coeffs = [1.0 / 12.0, -1.0 / 720.0, 1.0 / 30240.0, -1.0 / 1209600.0];
    for (j, c) in coeffs.iter().enumerate() {
        sum += c * rising * xp;
        let m = (2 * j) as f64;
        rising *= (s + m + 1.0) * (s + m + 2.0);
        xp /= x * x;
    }
    sum
}

pub fn zeta(s: f64) -> f64 {
    hurwitz_zeta(s, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_known_values() {
        assert!((zeta(2.0) - PI * PI / 6.0).abs() < 1e-13);
        assert!((zeta(4.0) - PI.powi(4) / 90.0).abs() < 1e-13);
        // zeta(3) Apery's constant
        assert!((zeta(3.0) - 1.202_056_903_159_594_3).abs() < 1e-13);
    }

    #[test]
    fn hurwitz_shift() {
        for &s in &[2.5, 3.5, 5.0] {
            let lhs = hurwitz_zeta(s, 2.0);
            assert!((lhs - (zeta(s) - 1.0)).abs() < 1e-13);
        }
    }

    #[test]
    fn ln_factorial_matches_product() {
        let mut acc = 0.0f64;
        for k in 1..200usize {
            acc += (k as f64).ln();
            let got = ln_factorial(k);
            assert!((got - acc).abs() < 1e-10 * acc.max(1.0), "k={k}");
        }
        assert_eq!(ln_factorial(0), 0.0);
    }
}
