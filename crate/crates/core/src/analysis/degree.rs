//! Limiting degree law of the projection and its comparison with a census.

use crate::error::{Error, Result};
use crate::params::{GroupSizeLaw, WeightLaw};
use crate::projection::ProjectedMultigraph;

pub const DEFAULT_ORACLE_TOL: f64 = 1e-9;

/// `q_k = P(sum_l (l-1) X_l = k)` for `k <= k_max`, with
/// `X_l ~ Poisson(l p_l W)` independent given `W`.
pub fn degree_law_oracle(weights: &WeightLaw, sizes: &GroupSizeLaw, k_max: usize) -> Result<Vec<f64>> {
    degree_law_oracle_scaled(weights, sizes, k_max, 1.0, DEFAULT_ORACLE_TOL)
}

/// Same with every rate multiplied by `scale` and an explicit tail tolerance.
///
/// Per atom `w` the degree is compound Poisson with rate `w mu` and jump law
/// `P(J = j) = (j+1) p_{j+1} / mu`, evaluated by the Panjer recursion.
pub fn degree_law_oracle_scaled(
    weights: &WeightLaw,
    sizes: &GroupSizeLaw,
    k_max: usize,
    scale: f64,
    tol: f64,
) -> Result<Vec<f64>> {
    let mu = sizes.mu();
    let jumps: Vec<f64> = (0..=k_max).map(|j| if j == 0 { 0.0 } else { (j + 1) as f64 * sizes.pmf(j + 1) / mu }).collect();
    let mut q = vec![0.0; k_max + 1];
    for &(w, mass) in weights.atoms() {
        let lambda = scale * w * mu;
        let mut g = vec![0.0; k_max + 1];
        g[0] = (-lambda).exp();
        for k in 1..=k_max {
            let mut s = 0.0;
            for j in 1..=k {
                s += j as f64 * jumps[j] * g[k - j];
            }
            g[k] = lambda / k as f64 * s;
        }
        for (qk, gk) in q.iter_mut().zip(&g) {
            *qk += mass * gk;
        }
    }
    let tail = (1.0 - q.iter().sum::<f64>()).max(0.0);
    if tail > tol {
        return Err(Error::Truncation { k_max, tail, suggested: (2 * k_max).max(16) });
    }
    Ok(q)
}

/// Empirical degree distribution `Q_k = #{i : d_i = k} / n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeCensus {
    counts: Vec<usize>,
    n: usize,
}

impl DegreeCensus {
    pub fn from_degrees(degrees: &[u64]) -> Self {
        let max = degrees.iter().copied().max().unwrap_or(0) as usize;
        let mut counts = vec![0usize; max + 1];
        for &d in degrees {
            counts[d as usize] += 1;
        }
        DegreeCensus { counts, n: degrees.len() }
    }

    pub fn from_projection(graph: &ProjectedMultigraph) -> Self {
        Self::from_degrees(graph.degrees())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn max_degree(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn mass(&self, k: usize) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        self.counts.get(k).map_or(0.0, |&c| c as f64 / self.n as f64)
    }

    pub fn mean(&self) -> f64 {
        let s: usize = self.counts.iter().enumerate().map(|(k, c)| k * c).sum();
        s as f64 / self.n as f64
    }
}

/// `(1/2) sum_k |Q_k - q_k|` over the oracle range, plus the census mass beyond
/// it and the oracle's missing tail mass.
pub fn tv_degree_test(census: &DegreeCensus, oracle: &[f64]) -> f64 {
    let mut diff = 0.0;
    for (k, &q) in oracle.iter().enumerate() {
        diff += (census.mass(k) - q).abs();
    }
    let beyond: f64 = (oracle.len()..census.counts.len()).map(|k| census.mass(k)).sum();
    let oracle_tail = (1.0 - oracle.iter().sum::<f64>()).max(0.0);
    0.5 * (diff + beyond) + oracle_tail
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;
    use rand_distr::{Distribution, Poisson};

    fn poisson_pmf(lambda: f64, k: usize) -> f64 {
        (-lambda + k as f64 * lambda.ln() - crate::special::ln_factorial(k)).exp()
    }

    #[test]
    fn pairs_give_poisson_two() {
        let q = degree_law_oracle(&WeightLaw::constant(1.0).unwrap(), &GroupSizeLaw::fixed(2).unwrap(), 40).unwrap();
        assert!((q[0] - (-2f64).exp()).abs() < 1e-15);
        for (k, &qk) in q.iter().enumerate() {
            assert!((qk - poisson_pmf(2.0, k)).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_weights() {
        let q = degree_law_oracle(&WeightLaw::constant(0.0).unwrap(), &GroupSizeLaw::fixed(2).unwrap(), 3).unwrap();
        assert_eq!(q, vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn triples_live_on_even_degrees() {
        let q = degree_law_oracle(&WeightLaw::constant(1.0).unwrap(), &GroupSizeLaw::fixed(3).unwrap(), 60).unwrap();
        for k in 0..30 {
            assert_eq!(q[2 * k + 1], 0.0);
            assert!((q[2 * k] - poisson_pmf(3.0, k)).abs() < 1e-13);
        }
        assert!((q[2] - 3.0 * (-3f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn truncation_error_suggests_more() {
        let err = degree_law_oracle(&WeightLaw::constant(1.0).unwrap(), &GroupSizeLaw::fixed(2).unwrap(), 3).unwrap_err();
        match err {
            Error::Truncation { k_max, tail, suggested } => {
                assert_eq!(k_max, 3);
                assert!(tail > 0.1);
                assert!(suggested > 3);
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn mean_matches_mu2_minus_mu() {
        let w = WeightLaw::two_point(0.5, 2.0, 0.25).unwrap();
        let p = GroupSizeLaw::finite(&[0.5, 0.3, 0.2]).unwrap();
        let q = degree_law_oracle(&w, &p, 200).unwrap();
        let mean: f64 = q.iter().enumerate().map(|(k, x)| k as f64 * x).sum();
        assert!((mean - w.mean() * (p.mu2() - p.mu())).abs() < 1e-9);
    }

    #[test]
    fn census_and_tv() {
        let c = DegreeCensus::from_degrees(&[0, 1, 1, 3]);
        assert_eq!(c.counts(), &[1, 2, 0, 1]);
        assert_eq!((0..4).map(|k| c.mass(k)).sum::<f64>(), 1.0);
        assert_eq!(tv_degree_test(&c, &[0.25, 0.5, 0.0, 0.25]), 0.0);
        let point = DegreeCensus::from_degrees(&[5, 5]);
        assert_eq!(tv_degree_test(&point, &[1.0]), 1.0);
        assert!((c.mean() - 1.25).abs() < 1e-15);
    }

    #[test]
    fn matches_direct_monte_carlo() {
        let w = WeightLaw::two_point(0.5, 2.0, 0.25).unwrap();
        let p = GroupSizeLaw::finite(&[0.5, 0.3, 0.2]).unwrap();
        let q = degree_law_oracle(&w, &p, 200).unwrap();
        let mut r = rng::seeded(99);
        let mut degrees = Vec::with_capacity(1_000_000);
        for _ in 0..1_000_000 {
            let wi = if r.random::<f64>() < 0.25 { 2.0 } else { 0.5 };
            let mut d = 0u64;
            for l in 2..=4usize {
                let rate = l as f64 * p.pmf(l) * wi;
                let x: f64 = Poisson::new(rate).unwrap().sample(&mut r);
                d += (l as u64 - 1) * x as u64;
            }
            degrees.push(d);
        }
        let tv = tv_degree_test(&DegreeCensus::from_degrees(&degrees), &q);
        assert!(tv < 0.01, "{tv}");
    }

    #[test]
    fn power_law_oracle_converges() {
        let q = degree_law_oracle(&WeightLaw::constant(1.0).unwrap(), &GroupSizeLaw::power_law(3.5).unwrap(), 16_000)
            .unwrap();
        let total: f64 = q.iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
    }
}
