//! Limiting degree laws of the bipartite graph and the giant-component fixed point.

use crate::error::{Error, Result};
use crate::params::{GroupSizeLaw, WeightLaw};
use crate::special::hurwitz_zeta;

/// Truncation point for power-law right pgfs; the remaining mass is folded in
/// as a single term.
const RIGHT_CAP: usize = 1 << 20;

/// Generating functions of the limiting left degree `D_l ~ Poisson(scale W mu)`,
/// right degree `D_r ~ p`, and their shifted size-biased versions.
#[derive(Debug, Clone)]
pub struct LimitLaws {
    weights: WeightLaw,
    sizes: GroupSizeLaw,
    scale: f64,
    /// `p_k` for `k <= cap`.
    probs: Vec<f64>,
    /// `P(K > cap)` and `E[K; K > cap]`.
    rest: f64,
    rest_sized: f64,
}

impl LimitLaws {
    pub fn new(weights: &WeightLaw, sizes: &GroupSizeLaw) -> Result<Self> {
        Self::scaled(weights, sizes, 1.0)
    }

    /// Rates multiplied by `scale`; `1 + t` gives the union-graph limit.
    pub fn scaled(weights: &WeightLaw, sizes: &GroupSizeLaw, scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::Config(format!("rate scale {scale} must be positive")));
        }
        if weights.mean() <= 0.0 {
            return Err(Error::DegenerateWeights("E[W] = 0".into()));
        }
        let cap = match sizes.max_size() {
            Some(m) => m,
            None => sizes.support_until(1e-16).last().unwrap_or(2).min(RIGHT_CAP),
        };
        let probs: Vec<f64> = (0..=cap).map(|k| sizes.pmf(k)).collect();
        let rest = sizes.tail(cap);
        let rest_sized = match sizes.alpha() {
            // E[K; K > c] = (c+1) P(K > c) + sum_{j >= c+2} P(K >= j)
            Some(a) => (cap + 1) as f64 * rest + 2f64.powf(a) * hurwitz_zeta(a, (cap + 2) as f64),
            None => 0.0,
        };
        Ok(LimitLaws { weights: weights.clone(), sizes: sizes.clone(), scale, probs, rest, rest_sized })
    }

    pub fn weight_law(&self) -> &WeightLaw {
        &self.weights
    }

    pub fn size_law(&self) -> &GroupSizeLaw {
        &self.sizes
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    fn left_rate(&self) -> f64 {
        self.scale * self.sizes.mu()
    }

    /// `G_{D_l}(z) = E[exp(W mu (z - 1))]`.
    pub fn left_pgf(&self, z: f64) -> f64 {
        let c = self.left_rate() * (z - 1.0);
        self.weights.atoms().iter().map(|&(w, p)| p * (w * c).exp()).sum()
    }

    /// `E[W exp(W mu (z - 1))] / E[W]`.
    pub fn shifted_left_pgf(&self, z: f64) -> f64 {
        let c = self.left_rate() * (z - 1.0);
        let s: f64 = self.weights.atoms().iter().map(|&(w, p)| p * w * (w * c).exp()).sum();
        s / self.weights.mean()
    }

    /// `sum_k p_k z^k`.
    pub fn right_pgf(&self, z: f64) -> f64 {
        let mut acc = 0.0;
        let mut zk = 1.0;
        for &p in &self.probs {
            acc += p * zk;
            zk *= z;
        }
        acc + self.rest * zk
    }

    /// `sum_k k p_k z^{k-1} / mu`.
    pub fn shifted_right_pgf(&self, z: f64) -> f64 {
        let mut acc = 0.0;
        let mut zk = 1.0;
        for (k, &p) in self.probs.iter().enumerate().skip(1) {
            acc += k as f64 * p * zk;
            zk *= z;
        }
        (acc + self.rest_sized * zk) / self.sizes.mu()
    }

    pub fn mean_left(&self) -> f64 {
        self.left_rate() * self.weights.mean()
    }

    /// `E[D~_l] = scale mu E[W^2] / E[W]`.
    pub fn mean_shifted_left(&self) -> f64 {
        self.left_rate() * self.weights.moment(2) / self.weights.mean()
    }

    /// `E[D~_r] = (mu_2 - mu) / mu`.
    pub fn mean_shifted_right(&self) -> f64 {
        (self.sizes.mu2() - self.sizes.mu()) / self.sizes.mu()
    }

    /// Mean offspring of a left vertex two generations down.
    pub fn offspring_product(&self) -> f64 {
        self.mean_shifted_left() * self.mean_shifted_right()
    }

    /// `eta -> G_{D~_r}(G_{D~_l}(eta))`.
    pub fn giant_map(&self, eta: f64) -> f64 {
        self.shifted_right_pgf(self.shifted_left_pgf(eta))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GiantSolution {
    pub eta: f64,
    pub xi: f64,
    pub supercritical: bool,
    pub residual: f64,
    pub iterations: usize,
}

const GIANT_TOL: f64 = 1e-13;
const GIANT_MAX_ITER: usize = 100_000;

/// Smallest fixed point of `eta = G_{D~_r}(G_{D~_l}(eta))` by monotone iteration from 0.
pub fn solve_giant(laws: &LimitLaws) -> Result<GiantSolution> {
    if laws.offspring_product() <= 1.0 {
        return Ok(GiantSolution { eta: 1.0, xi: 0.0, supercritical: false, residual: 0.0, iterations: 0 });
    }
    let mut eta = 0.0;
    for it in 1..=GIANT_MAX_ITER {
        let next = laws.giant_map(eta);
        if !next.is_finite() {
            return Err(Error::Numeric(format!("giant map returned {next} at eta = {eta}")));
        }
        let step = (next - eta).abs();
        eta = next;
        if step < GIANT_TOL {
            let residual = (laws.giant_map(eta) - eta).abs();
            let xi = 1.0 - laws.left_pgf(eta);
            return Ok(GiantSolution { eta, xi, supercritical: xi > 0.0, residual, iterations: it });
        }
    }
    Err(Error::Numeric(format!("giant fixed point did not converge in {GIANT_MAX_ITER} iterations")))
}
