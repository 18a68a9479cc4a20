//! Largest active group over time under power-law group sizes, and its Fréchet limit.

use crate::dynamics::Timeline;
use crate::error::{Error, Result};
use crate::params::{GroupSizeLaw, WeightModel};
use crate::stats::ks_continuous;

/// `s -> K_max^{[0,s]}`: the largest group ON at some time in `[0, s]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxGroupProcess {
    horizon: f64,
    normalization: f64,
    /// `(time, value)` with strictly increasing values; the first entry is `(0, K_max^{0})`.
    jumps: Vec<(f64, usize)>,
    warning: Option<String>,
}

impl MaxGroupProcess {
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// `n^{1/alpha}`.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn jumps(&self) -> &[(f64, usize)] {
        &self.jumps
    }

    /// `K_max^{0}`, the largest group ON at time 0 (0 if none).
    pub fn initial(&self) -> usize {
        self.jumps[0].1
    }

    /// `K_max^{[0,s]}`, right-continuous.
    pub fn value_at(&self, s: f64) -> usize {
        let idx = self.jumps.partition_point(|&(time, _)| time <= s);
        self.jumps[idx.max(1) - 1].1
    }

    pub fn normalized_at(&self, s: f64) -> f64 {
        self.value_at(s) as f64 / self.normalization
    }

    /// Set when the tail exponent is outside the range where the Fréchet limit is known to hold.
    pub fn warning(&self) -> Option<&str> {
        self.warning.as_deref()
    }
}

fn power_law_params(sizes: &GroupSizeLaw) -> Result<(f64, f64, Option<String>)> {
    let (Some(alpha), Some(c)) = (sizes.alpha(), sizes.tail_constant()) else {
        return Err(Error::Unsupported("maximum-group-size limit needs a power-law size law".into()));
    };
    let warning = (alpha <= 3.0).then(|| format!("alpha = {alpha} <= 3: the Fréchet limit is not guaranteed"));
    Ok((alpha, c, warning))
}

pub fn kmax_process(timeline: &Timeline, sizes: &GroupSizeLaw) -> Result<MaxGroupProcess> {
    let (alpha, _, warning) = power_law_params(sizes)?;
    let mut initial = 0;
    let mut arrivals: Vec<(f64, usize)> = Vec::new();
    for (g, m) in timeline.iter() {
        for &(on, _) in m.intervals() {
            if on == 0.0 {
                initial = initial.max(g.size());
            } else {
                arrivals.push((on, g.size()));
            }
        }
    }
    arrivals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut jumps = vec![(0.0, initial)];
    for (time, k) in arrivals {
        if k > jumps.last().expect("nonempty").1 {
            jumps.push((time, k));
        }
    }
    Ok(MaxGroupProcess {
        horizon: timeline.horizon(),
        normalization: (timeline.n() as f64).powf(1.0 / alpha),
        jumps,
        warning,
    })
}

/// Largest group switching ON in `(a, b]`; 0 if none.
pub fn max_switch_on_size(timeline: &Timeline, a: f64, b: f64) -> usize {
    timeline
        .iter()
        .filter(|(_, m)| m.intervals().iter().any(|&(on, _)| on > a && on <= b))
        .map(|(g, _)| g.size())
        .max()
        .unwrap_or(0)
}

/// `(K_max^{(0,s]}, K_max^{(s,t]})`.
pub fn kmax_increments(timeline: &Timeline, s: f64) -> Result<(usize, usize)> {
    let t = timeline.horizon();
    if !(0.0..=t).contains(&s) {
        return Err(Error::Range { s, t });
    }
    Ok((max_switch_on_size(timeline, 0.0, s), max_switch_on_size(timeline, s, t)))
}

/// Limit CDF `exp(-(t + 1) c_p x^{-alpha} E[W])` of `K_max^{[0,t]} / n^{1/alpha}`.
pub fn frechet_cdf(x: f64, t: f64, alpha: f64, c_p: f64, mean_w: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    (-(t + 1.0) * c_p * x.powf(-alpha) * mean_w).exp()
}

/// `P(K_max^{[0,t]} <= m)` at finite `n`, using that a group of size `l` is active
/// somewhere in `[0,t]` with probability `1 - e^{-t q_a} / (1 + q_a)`, and
/// `sum_{|a| = l} q_a = l_n p_l l! e_l(w / l_n)`.
#[derive(Debug, Clone)]
pub struct FiniteKmaxLaw {
    ell: f64,
    t: f64,
    /// `S(m) = sum_{l > m} p_l l! e_l(w / l_n)` for `m < cap`.
    tail_sums: Vec<f64>,
    cap_factor: f64,
    sizes: GroupSizeLaw,
}

pub const FINITE_KMAX_CAP: usize = 4096;

impl FiniteKmaxLaw {
    pub fn new(weights: &WeightModel, sizes: &GroupSizeLaw, t: f64) -> Self {
        let ell = weights.ell_n();
        let cap = weights.n().min(FINITE_KMAX_CAP);
        // f_l = l! e_l(x); adding x_j maps f_l to f_l + l x_j f_{l-1}
        let mut f = vec![0.0; cap + 1];
        f[0] = 1.0;
        for (j, &w) in weights.weights().iter().enumerate() {
            let x = w / ell;
            for l in (1..=cap.min(j + 1)).rev() {
                f[l] += l as f64 * x * f[l - 1];
            }
        }
        let mut tail_sums = vec![0.0; cap + 1];
        // beyond the cap f_l <= f_cap; approximate the remainder by f_cap
        let mut acc = sizes.tail(cap) * f[cap];
        for m in (0..=cap).rev() {
            tail_sums[m] = acc;
            acc += sizes.pmf(m) * f[m];
        }
        FiniteKmaxLaw { ell, t, tail_sums, cap_factor: f[cap], sizes: sizes.clone() }
    }

    pub fn cdf(&self, m: usize) -> f64 {
        let s = match self.tail_sums.get(m) {
            Some(&s) => s,
            None => self.sizes.tail(m) * self.cap_factor,
        };
        (-(1.0 + self.t) * self.ell * s).exp()
    }
}

/// KS distances of replica samples of `K_max^{[0,t]}` against the limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KmaxKs {
    /// Integer support: `F_emp(m)` versus `G((m + 1) / n^{1/alpha})`, the limit
    /// evaluated where it approximates `P(K_max <= m)`.
    pub lattice: f64,
    /// Naive continuous KS of `K_max / n^{1/alpha}` against `G`.
    pub continuous: f64,
    /// Integer support against the exact finite-`n` law.
    pub finite_n: f64,
}

/// Compares replica values of `K_max^{[0,t]}` (at common `n`, weights and `t`)
/// with the Fréchet limit.
pub fn kmax_ks(samples: &[usize], weights: &WeightModel, sizes: &GroupSizeLaw, t: f64) -> Result<KmaxKs> {
    let (alpha, c_p, _) = power_law_params(sizes)?;
    if samples.is_empty() {
        return Err(Error::InsufficientSample { got: 0, needed: 1 });
    }
    let a = (weights.n() as f64).powf(1.0 / alpha);
    let mean_w = weights.empirical_moment(1);
    let g = |x: f64| frechet_cdf(x, t, alpha, c_p, mean_w);
    let scaled: Vec<f64> = samples.iter().map(|&k| k as f64 / a).collect();
    let continuous = ks_continuous(&scaled, g);
    let exact = FiniteKmaxLaw::new(weights, sizes, t);
    let lattice = ks_integer(samples, |m| g((m + 1) as f64 / a));
    let finite_n = ks_integer(samples, |m| exact.cdf(m));
    Ok(KmaxKs { lattice, continuous, finite_n })
}

/// `max_m |F_emp(m) - H(m)|` over integers spanning the sample, where `H(m)` is
/// a model CDF at integer `m`.
pub fn ks_integer(samples: &[usize], cdf: impl Fn(usize) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_unstable();
    let n = xs.len() as f64;
    let lo = xs[0].saturating_sub(1);
    let hi = *xs.last().expect("nonempty");
    let mut d: f64 = 0.0;
    let mut idx = 0;
    for m in lo..=hi {
        while idx < xs.len() && xs[idx] <= m {
            idx += 1;
        }
        d = d.max((idx as f64 / n - cdf(m)).abs());
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{simulate, ActivationMark};
    use crate::params::Model;
    use crate::rng;
    use crate::sampler::Group;

    fn toy() -> Timeline {
        let n = 10;
        let g = |m: &[u32]| Group::new(m, n).unwrap();
        let mk = |iv: Vec<(f64, f64)>| ActivationMark::new(iv).unwrap();
        Timeline::from_parts(
            n,
            2.0,
            vec![g(&[0, 1]), g(&[2, 3, 4]), g(&[5, 6, 7, 8]), g(&[0, 9])],
            vec![
                mk(vec![(0.0, 0.4)]),
                mk(vec![(0.5, 0.7), (1.5, 3.0)]),
                mk(vec![(1.2, 1.3)]),
                mk(vec![(0.1, 0.2)]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn process_steps() {
        let p = kmax_process(&toy(), &GroupSizeLaw::power_law(3.5).unwrap()).unwrap();
        assert_eq!(p.jumps(), &[(0.0, 2), (0.5, 3), (1.2, 4)]);
        assert_eq!(p.initial(), 2);
        assert_eq!(p.value_at(0.49), 2);
        assert_eq!(p.value_at(0.5), 3);
        assert_eq!(p.value_at(2.0), 4);
        assert!(p.warning().is_none());
        assert_eq!(kmax_increments(&toy(), 1.0).unwrap(), (3, 4));
        assert_eq!(kmax_increments(&toy(), 0.3).unwrap(), (2, 4));
        assert!(kmax_increments(&toy(), 2.5).is_err());
    }

    #[test]
    fn rejects_bounded_sizes_and_warns_for_small_alpha() {
        let e = kmax_process(&toy(), &GroupSizeLaw::fixed(2).unwrap()).unwrap_err();
        assert!(matches!(e, Error::Unsupported(_)));
        let p = kmax_process(&toy(), &GroupSizeLaw::power_law(2.5).unwrap()).unwrap();
        assert!(p.warning().is_some());
    }

    #[test]
    fn process_is_monotone() {
        let m = Model::new(WeightModel::constant(5000, 1.0).unwrap(), GroupSizeLaw::power_law(3.5).unwrap(), 2.0)
            .unwrap();
        let tl = simulate(&m, &mut rng::seeded(2)).unwrap();
        let p = kmax_process(&tl, &m.sizes).unwrap();
        let mut prev = 0;
        for i in 0..=200 {
            let v = p.value_at(i as f64 * 0.01);
            assert!(v >= prev);
            prev = v;
        }
        assert_eq!(p.initial(), tl.initial_state().max_group_size());
        assert_eq!(p.value_at(2.0), tl.union_graph().max_group_size());
    }

    #[test]
    fn frechet_limit() {
        assert_eq!(frechet_cdf(0.0, 1.0, 3.5, 11.3, 1.0), 0.0);
        assert!(frechet_cdf(1e6, 1.0, 3.5, 11.3, 1.0) > 1.0 - 1e-12);
        let a = frechet_cdf(2.0, 0.0, 3.5, 2f64.powf(3.5), 1.0);
        assert!((a - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn finite_law_for_constant_weights() {
        // W = 1: l! e_l(1/n, ..., 1/n) = prod_{j<l} (1 - j/n)
        let n = 50;
        let w = WeightModel::constant(n, 1.0).unwrap();
        let p = GroupSizeLaw::power_law(3.5).unwrap();
        let law = FiniteKmaxLaw::new(&w, &p, 0.5);
        for m in [1usize, 2, 5, 10] {
            let mut s = 0.0;
            for l in m + 1..=n {
                let falling: f64 = (0..l).map(|j| 1.0 - j as f64 / n as f64).product();
                s += p.pmf(l) * falling;
            }
            let expected = (-1.5 * n as f64 * s).exp();
            assert!((law.cdf(m) - expected).abs() < 1e-12, "{m}");
        }
    }

    #[test]
    fn integer_ks() {
        let d = ks_integer(&[1, 1, 2, 3], |m| [0.0, 0.5, 0.75, 1.0][m.min(3)]);
        assert_eq!(d, 0.0);
        let d = ks_integer(&[2, 2], |m| if m >= 1 { 1.0 } else { 0.0 });
        assert_eq!(d, 1.0);
    }

    #[test]
    fn stationary_max_matches_finite_law() {
        let n = 2000;
        let m = Model::new(WeightModel::constant(n, 1.0).unwrap(), GroupSizeLaw::power_law(3.5).unwrap(), 0.0)
            .unwrap();
        let samples: Vec<usize> = (0..400)
            .map(|r| crate::sampler::sample_stationary(&m, &mut rng::replica(7, r)).unwrap().max_group_size())
            .collect();
        let ks = kmax_ks(&samples, &m.weights, &m.sizes, 0.0).unwrap();
        // 400 replicas: 1.36 / sqrt(400) = 0.068 at the 5% level
        assert!(ks.finite_n < 0.068, "{ks:?}");
    }
}
