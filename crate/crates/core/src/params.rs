//! Model inputs: vertex weights, the group-size law, the time horizon, and
//! the per-group switching rates derived from them.
//!
//! A potential group `a` (a set of at least two distinct vertices) switches
//! OFF -> ON at rate `q_a = |a|! p_|a| prod_{i in a} w_i / l_n^{|a|-1}` and
//! ON -> OFF at rate 1. Everything downstream is driven by `q_a`.

use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, SimRng};
use crate::special::{hurwitz_zeta, ln_factorial};

/// Finite discrete law of the limiting weight `W`, as `(value, mass)` atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightLaw {
    atoms: Vec<(f64, f64)>,
}

impl WeightLaw {
    pub fn discrete(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Config("weight law needs at least one atom".into()));
        }
        let mut total = 0.0;
        for &(v, m) in &atoms {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("weight atom value {v} must be finite and >= 0")));
            }
            if !(m.is_finite() && m >= 0.0) {
                return Err(Error::Config(format!("weight atom mass {m} must be finite and >= 0")));
            }
            total += m;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("weight law masses sum to {total}, expected 1")));
        }
        let atoms = atoms
            .into_iter()
            .filter(|&(_, m)| m > 0.0)
            .map(|(v, m)| (v, m / total))
            .collect();
        Ok(WeightLaw { atoms })
    }

    pub fn constant(value: f64) -> Result<Self> {
        Self::discrete(vec![(value, 1.0)])
    }

    pub fn two_point(low: f64, high: f64, p_high: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_high) {
            return Err(Error::Config(format!("p_high = {p_high} is not a probability")));
        }
        Self::discrete(vec![(low, 1.0 - p_high), (high, p_high)])
    }

    /// Empirical law of a weight list.
    pub fn empirical(weights: &[f64]) -> Result<Self> {
        let mut sorted = weights.to_vec();
        sorted.sort_by(f64::total_cmp);
        let m = 1.0 / sorted.len() as f64;
        let mut atoms: Vec<(f64, f64)> = Vec::new();
        for w in sorted {
            match atoms.last_mut() {
                Some((v, mass)) if *v == w => *mass += m,
                _ => atoms.push((w, m)),
            }
        }
        Self::discrete(atoms)
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn moment(&self, p: i32) -> f64 {
        self.atoms.iter().map(|&(v, m)| m * v.powi(p)).sum()
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    /// Size-biased law `P(W* = w) = w P(W = w) / E[W]`.
    pub fn size_biased(&self) -> Result<Self> {
        let mean = self.mean();
        if mean <= 0.0 {
            return Err(Error::DegenerateWeights("E[W] = 0 has no size-biased law".into()));
        }
        Self::discrete(self.atoms.iter().map(|&(v, m)| (v, v * m / mean)).collect())
    }

    /// Law of `min(W, cap)`.
    pub fn capped(&self, cap: f64) -> Self {
        WeightLaw {
            atoms: self.atoms.iter().map(|&(v, m)| (v.min(cap), m)).collect(),
        }
    }

    fn quantile(&self, u: f64) -> f64 {
        let mut sorted = self.atoms.clone();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut acc = 0.0;
        for &(v, m) in &sorted {
            acc += m;
            if u < acc {
                return v;
            }
        }
        sorted.last().map(|a| a.0).unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Assignment {
    /// `w_i` drawn iid from the law.
    #[default]
    Iid,
    /// `w_i = F^{-1}((i + 1/2) / n)`, deterministic.
    Quantile,
}

/// Vertex weights `w_i`, their sum `l_n`, and the limiting law `W`.
#[derive(Debug, Clone)]
pub struct WeightModel {
    weights: Vec<f64>,
    ell_n: f64,
    limit_law: WeightLaw,
    weight_cap: Option<f64>,
}

impl WeightModel {
    pub fn explicit(weights: Vec<f64>, weight_cap: Option<f64>) -> Result<Self> {
        let limit_law = WeightLaw::empirical(&weights)?;
        Self::with_law(weights, limit_law, weight_cap)
    }

    pub fn constant(n: usize, value: f64) -> Result<Self> {
        Self::with_law(vec![value; n], WeightLaw::constant(value)?, None)
    }

    pub fn from_law(
        n: usize,
        law: &WeightLaw,
        assignment: Assignment,
        weight_cap: Option<f64>,
        rng: &mut SimRng,
    ) -> Result<Self> {
        let weights = match assignment {
            Assignment::Quantile => (0..n)
                .map(|i| law.quantile((i as f64 + 0.5) / n as f64))
                .collect(),
            Assignment::Iid => {
                let masses: Vec<f64> = law.atoms.iter().map(|a| a.1).collect();
                let index = WeightedAliasIndex::new(masses)
                    .map_err(|e| Error::Config(format!("weight law: {e}")))?;
                (0..n).map(|_| law.atoms[index.sample(rng)].0).collect()
            }
        };
        Self::with_law(weights, law.clone(), weight_cap)
    }

    fn with_law(mut weights: Vec<f64>, limit_law: WeightLaw, weight_cap: Option<f64>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::Config("need at least two vertices".into()));
        }
        let mut limit_law = limit_law;
        if let Some(cap) = weight_cap {
            if !(cap.is_finite() && cap > 0.0) {
                return Err(Error::Config(format!("weight cap {cap} must be positive")));
            }
            for w in &mut weights {
                *w = w.min(cap);
            }
            limit_law = limit_law.capped(cap);
        }
        if let Some(bad) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::Config(format!("vertex weight {bad} must be positive and finite")));
        }
        let ell_n = weights.iter().sum();
        Ok(WeightModel { weights, ell_n, limit_law, weight_cap })
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn ell_n(&self) -> f64 {
        self.ell_n
    }

    pub fn limit_law(&self) -> &WeightLaw {
        &self.limit_law
    }

    pub fn weight_cap(&self) -> Option<f64> {
        self.weight_cap
    }

    /// `E[W_n^p]` for the empirical law of the weight list.
    pub fn empirical_moment(&self, p: i32) -> f64 {
        self.weights.iter().map(|w| w.powi(p)).sum::<f64>() / self.n() as f64
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
enum SizeKind {
    /// `probs[k]` is `p_k`; entries below 2 are zero.
    Finite { probs: Vec<f64>, alias: WeightedAliasIndex<f64> },
    /// `P(K >= k) = (2/k)^alpha` for `k >= 2`.
    PowerLaw { alpha: f64 },
}

/// Group-size distribution `(p_k)_{k >= 2}`.
#[derive(Debug, Clone)]
pub struct GroupSizeLaw {
    kind: SizeKind,
    mu: f64,
    mu2: f64,
}

impl GroupSizeLaw {
    /// Every group has size `k`.
    pub fn fixed(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::Config(format!("group size {k} must be at least 2")));
        }
        let mut probs = vec![0.0; k + 1];
        probs[k] = 1.0;
        Self::from_probs(probs)
    }

    /// `pmf[j]` is `p_{j+2}`.
    pub fn finite(pmf: &[f64]) -> Result<Self> {
        let mut probs = vec![0.0, 0.0];
        probs.extend_from_slice(pmf);
        Self::from_probs(probs)
    }

    fn from_probs(mut probs: Vec<f64>) -> Result<Self> {
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::Config("group-size probabilities must be finite and >= 0".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("group-size pmf sums to {total}, expected 1")));
        }
        for p in &mut probs {
            *p /= total;
        }
        while probs.last() == Some(&0.0) {
            probs.pop();
        }
        let mu = probs.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
        let mu2 = probs.iter().enumerate().map(|(k, p)| (k * k) as f64 * p).sum();
        let alias = WeightedAliasIndex::new(probs.clone())
            .map_err(|e| Error::Config(format!("group-size pmf: {e}")))?;
        Ok(GroupSizeLaw { kind: SizeKind::Finite { probs, alias }, mu, mu2 })
    }

    /// Power law with exact tail `P(K >= k) = (2/k)^alpha`, `alpha > 2`.
    pub fn power_law(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 2.0) {
            return Err(Error::Config(format!(
                "power-law exponent alpha = {alpha} must exceed 2 for a finite second moment"
            )));
        }
        let c = 2f64.powf(alpha);
        // mu = sum_{k>=1} P(K >= k); mu2 = sum_{k>=1} (2k - 1) P(K >= k).
        let mu = 1.0 + c * hurwitz_zeta(alpha, 2.0);
        let mu2 = 1.0 + c * (2.0 * hurwitz_zeta(alpha - 1.0, 2.0) - hurwitz_zeta(alpha, 2.0));
        Ok(GroupSizeLaw { kind: SizeKind::PowerLaw { alpha }, mu, mu2 })
    }

    pub fn pmf(&self, k: usize) -> f64 {
        match &self.kind {
            SizeKind::Finite { probs, .. } => probs.get(k).copied().unwrap_or(0.0),
            SizeKind::PowerLaw { alpha } => {
                if k < 2 {
                    0.0
                } else {
                    (2.0 / k as f64).powf(*alpha) - (2.0 / (k + 1) as f64).powf(*alpha)
                }
            }
        }
    }

    /// `P(K > k)`.
    pub fn tail(&self, k: usize) -> f64 {
        match &self.kind {
            SizeKind::Finite { probs, .. } => probs.iter().skip(k + 1).sum(),
            SizeKind::PowerLaw { alpha } => {
                if k < 2 {
                    1.0
                } else {
                    (2.0 / (k + 1) as f64).powf(*alpha)
                }
            }
        }
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn mu2(&self) -> f64 {
        self.mu2
    }

    pub fn alpha(&self) -> Option<f64> {
        match self.kind {
            SizeKind::PowerLaw { alpha } => Some(alpha),
            SizeKind::Finite { .. } => None,
        }
    }

    /// `c_p` in `sum_{l > k} p_l = c_p k^{-alpha} (1 + o(1))`.
    pub fn tail_constant(&self) -> Option<f64> {
        self.alpha().map(|a| 2f64.powf(a))
    }

    /// Largest size with positive mass, `None` for unbounded support.
    pub fn max_size(&self) -> Option<usize> {
        match &self.kind {
            SizeKind::Finite { probs, .. } => Some(probs.len() - 1),
            SizeKind::PowerLaw { .. } => None,
        }
    }

    /// `ln f(k) = ln(k! p_k)`; `-inf` when `p_k = 0`.
    pub fn ln_f(&self, k: usize) -> f64 {
        let p = self.pmf(k);
        if p > 0.0 {
            ln_factorial(k) + p.ln()
        } else {
            f64::NEG_INFINITY
        }
    }

    pub fn sample(&self, rng: &mut SimRng) -> usize {
        match &self.kind {
            SizeKind::Finite { alias, .. } => alias.sample(rng),
            SizeKind::PowerLaw { alpha } => {
                let u = 1.0 - rng.random::<f64>();
                (2.0 * u.powf(-1.0 / alpha)).floor() as usize
            }
        }
    }

    /// Draw conditioned on `K <= n`, by redrawing. Terminates for `n >= 2`
    /// whenever the law puts mass on some size `<= n`.
    pub fn sample_at_most(&self, n: usize, rng: &mut SimRng) -> Result<usize> {
        if (2..=n).all(|k| self.pmf(k) == 0.0) {
            return Err(Error::Config(format!("no group size <= {n} has positive mass")));
        }
        loop {
            let k = self.sample(rng);
            if k <= n {
                return Ok(k);
            }
        }
    }

    /// Sizes `k >= 2` in increasing order until the remaining tail drops below `eps`
    /// (or the support ends).
    pub fn support_until(&self, eps: f64) -> impl Iterator<Item = usize> + '_ {
        let cap = self.max_size();
        (2usize..)
            .take_while(move |&k| match cap {
                Some(m) => k <= m,
                None => k == 2 || self.tail(k - 1) >= eps,
            })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Stationary,
    Dynamic,
    Union,
    Rescaled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum WeightLawSpec {
    Constant { value: f64 },
    TwoPoint { low: f64, high: f64, p_high: f64 },
    Discrete { atoms: Vec<(f64, f64)> },
    Explicit { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    #[serde(flatten)]
    pub law: WeightLawSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<f64>,
    #[serde(default)]
    pub assignment: Assignment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum GroupSizeSpec {
    Fixed { k: usize },
    /// `pmf[j]` is `p_{j+2}`.
    Finite { pmf: Vec<f64> },
    PowerLaw { alpha: f64 },
}

/// Serialized run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub n: usize,
    #[serde(default)]
    pub t: f64,
    #[serde(default)]
    pub seed: u64,
    pub weights: WeightSpec,
    pub group_size: GroupSizeSpec,
    #[serde(default)]
    pub mode: Mode,
}

/// Stream index reserved for weight generation, disjoint from replica streams.
const WEIGHT_STREAM: u64 = u64::MAX - 1;

impl ModelConfig {
    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn build(&self) -> Result<Model> {
        if self.n < 2 {
            return Err(Error::Config(format!("n = {} must be at least 2", self.n)));
        }
        if self.n > u32::MAX as usize {
            return Err(Error::Config(format!("n = {} exceeds the u32 vertex range", self.n)));
        }
        if !(self.t.is_finite() && self.t >= 0.0) {
            return Err(Error::Config(format!("t = {} must be finite and >= 0", self.t)));
        }
        let mut rng = rng::replica(self.seed, WEIGHT_STREAM);
        let cap = self.weights.cap;
        let assignment = self.weights.assignment;
        let weights = match &self.weights.law {
            WeightLawSpec::Explicit { values } => {
                if values.len() != self.n {
                    return Err(Error::Config(format!(
                        "explicit weights list has {} entries, n = {}",
                        values.len(),
                        self.n
                    )));
                }
                WeightModel::explicit(values.clone(), cap)?
            }
            WeightLawSpec::Constant { value } => {
                WeightModel::from_law(self.n, &WeightLaw::constant(*value)?, assignment, cap, &mut rng)?
            }
            WeightLawSpec::TwoPoint { low, high, p_high } => WeightModel::from_law(
                self.n,
                &WeightLaw::two_point(*low, *high, *p_high)?,
                assignment,
                cap,
                &mut rng,
            )?,
            WeightLawSpec::Discrete { atoms } => {
                WeightModel::from_law(self.n, &WeightLaw::discrete(atoms.clone())?, assignment, cap, &mut rng)?
            }
        };
        let sizes = match &self.group_size {
            GroupSizeSpec::Fixed { k } => GroupSizeLaw::fixed(*k)?,
            GroupSizeSpec::Finite { pmf } => GroupSizeLaw::finite(pmf)?,
            GroupSizeSpec::PowerLaw { alpha } => GroupSizeLaw::power_law(*alpha)?,
        };
        Ok(Model { weights, sizes, t: self.t, seed: self.seed, mode: self.mode })
    }
}

/// A validated, immutable model instance.
#[derive(Debug, Clone)]
pub struct Model {
    pub weights: WeightModel,
    pub sizes: GroupSizeLaw,
    pub t: f64,
    pub seed: u64,
    pub mode: Mode,
}

impl Model {
    pub fn new(weights: WeightModel, sizes: GroupSizeLaw, t: f64) -> Result<Self> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::Config(format!("t = {t} must be finite and >= 0")));
        }
        Ok(Model { weights, sizes, t, seed: 0, mode: Mode::Stationary })
    }

    pub fn n(&self) -> usize {
        self.weights.n()
    }

    pub fn with_horizon(&self, t: f64) -> Self {
        Model { t, ..self.clone() }
    }
}

/// Validates a group and returns it sorted.
pub fn canonical_group(group: &[u32], n: usize) -> Result<Vec<u32>> {
    if group.len() < 2 {
        return Err(Error::InvalidGroup(format!("{group:?} has fewer than two vertices")));
    }
    let mut sorted = group.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidGroup(format!("{group:?} repeats a vertex")));
    }
    if let Some(&v) = sorted.iter().find(|&&v| v as usize >= n) {
        return Err(Error::InvalidGroup(format!("vertex {v} outside [0, {n})")));
    }
    Ok(sorted)
}

/// `ln q_a` for an already validated group; `-inf` when `p_|a| = 0`.
pub(crate) fn ln_group_rate(members: &[u32], weights: &WeightModel, law: &GroupSizeLaw) -> f64 {
    let k = members.len();
    let ln_f = law.ln_f(k);
    if ln_f == f64::NEG_INFINITY {
        return ln_f;
    }
    let ln_w: f64 = members.iter().map(|&i| weights.weight(i as usize).ln()).sum();
    ln_f + ln_w - (k as f64 - 1.0) * weights.ell_n().ln()
}

/// OFF -> ON rate `q_a = |a|! p_|a| prod w_i / l_n^{|a|-1}`.
pub fn group_rate(group: &[u32], weights: &WeightModel, law: &GroupSizeLaw) -> Result<f64> {
    let members = canonical_group(group, weights.n())?;
    Ok(ln_group_rate(&members, weights, law).exp())
}

/// Stationary ON probability `q_a / (1 + q_a)`.
pub fn stationary_on_probability(group: &[u32], weights: &WeightModel, law: &GroupSizeLaw) -> Result<f64> {
    let q = group_rate(group, weights, law)?;
    Ok(q / (1.0 + q))
}

/// `E[W^2] (mu2 - mu) / E[W]`; a giant component exists iff this exceeds 1.
pub fn supercriticality_parameter(law: &WeightLaw, sizes: &GroupSizeLaw) -> Result<f64> {
    let mean = law.mean();
    if mean <= 0.0 {
        return Err(Error::DegenerateWeights("E[W] = 0".into()));
    }
    Ok(law.moment(2) * (sizes.mu2() - sizes.mu()) / mean)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityReport {
    pub n: usize,
    pub mean: f64,
    pub second_moment: f64,
    pub third_moment: f64,
    pub max_weight: f64,
    /// `max_i w_i / sqrt(n)`; should be small for `max w_i = o(sqrt n)`.
    pub max_over_sqrt_n: f64,
    /// `max_i w_i^2 / l_n`.
    pub max_sq_over_ell: f64,
    pub threshold: f64,
    pub flagged: bool,
}

pub const DEFAULT_REGULARITY_THRESHOLD: f64 = 0.1;

pub fn regularity_report(weights: &WeightModel, threshold: f64) -> RegularityReport {
    let max_weight = weights.max_weight();
    let max_sq_over_ell = max_weight * max_weight / weights.ell_n();
    RegularityReport {
        n: weights.n(),
        mean: weights.empirical_moment(1),
        second_moment: weights.empirical_moment(2),
        third_moment: weights.empirical_moment(3),
        max_weight,
        max_over_sqrt_n: max_weight / (weights.n() as f64).sqrt(),
        max_sq_over_ell,
        threshold,
        flagged: max_sq_over_ell > threshold,
    }
}
