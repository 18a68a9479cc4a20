//! Exact sampling of the stationary bipartite graph.
//!
//! Candidate groups arrive as a Poisson process: a `Poisson(scale * l_n)`
//! number of ordered tuples, each with a size drawn from `p_k` and members
//! drawn iid proportional to `w_i`. Tuples that repeat a vertex (or exceed `n`)
//! are discarded. Each distinct group `a` is then hit `Poisson(scale * q_a)`
//! times, independently across groups. Keeping an occupied group with
//! probability `pi_ON / (1 - exp(-q))` leaves it active with probability
//! exactly `pi_ON = q / (1 + q)`.

use std::collections::BTreeMap;
use std::io::{self, Write};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::{Distribution, Poisson};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{canonical_group, ln_group_rate, GroupSizeLaw, Model, WeightModel};
use crate::rng::SimRng;

/// A set of at least two distinct vertices, stored sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Group(Vec<u32>);

impl Group {
    pub fn new(members: &[u32], n: usize) -> Result<Self> {
        canonical_group(members, n).map(Group)
    }

    pub(crate) fn from_sorted(members: Vec<u32>) -> Self {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        Group(members)
    }

    pub fn members(&self) -> &[u32] {
        &self.0
    }

    pub fn size(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, v: u32) -> bool {
        self.0.binary_search(&v).is_ok()
    }
}

/// The set of active groups on `n` left vertices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BipartiteState {
    n: usize,
    groups: Vec<Group>,
}

#[derive(Serialize)]
struct GroupRecord<'a> {
    members: &'a [u32],
    size: usize,
}

impl BipartiteState {
    pub fn new(n: usize, mut groups: Vec<Group>) -> Result<Self> {
        groups.sort_unstable();
        if groups.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidGroup("a group appears twice in the active set".into()));
        }
        if let Some(g) = groups.iter().find(|g| g.members().last().is_some_and(|&v| v as usize >= n)) {
            return Err(Error::InvalidGroup(format!("{:?} has a vertex outside [0, {n})", g.members())));
        }
        Ok(BipartiteState { n, groups })
    }

    /// Caller guarantees sorted, distinct, in-range groups.
    pub(crate) fn from_sorted(n: usize, groups: Vec<Group>) -> Self {
        debug_assert!(groups.windows(2).all(|w| w[0] < w[1]));
        BipartiteState { n, groups }
    }

    pub fn empty(n: usize) -> Self {
        BipartiteState { n, groups: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn contains(&self, group: &Group) -> bool {
        self.groups.binary_search(group).is_ok()
    }

    /// `M_n`, the number of active groups.
    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    /// `d^(l)_i`: number of active groups containing `i`.
    pub fn left_degrees(&self) -> Vec<u32> {
        let mut deg = vec![0u32; self.n];
        for g in &self.groups {
            for &v in g.members() {
                deg[v as usize] += 1;
            }
        }
        deg
    }

    /// `A_k`: number of active groups of each size.
    pub fn size_counts(&self) -> BTreeMap<usize, usize> {
        let mut counts = BTreeMap::new();
        for g in &self.groups {
            *counts.entry(g.size()).or_insert(0) += 1;
        }
        counts
    }

    /// `sum_a |a|`, equal to the sum of left degrees.
    pub fn incidence_count(&self) -> usize {
        self.groups.iter().map(Group::size).sum()
    }

    pub fn max_group_size(&self) -> usize {
        self.groups.iter().map(Group::size).max().unwrap_or(0)
    }

    /// One JSON record `{"members": [...], "size": k}` per active group.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        for g in &self.groups {
            let rec = GroupRecord { members: g.members(), size: g.size() };
            serde_json::to_writer(&mut out, &rec)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Draws candidate groups: size from `p_k`, members iid proportional to weight.
pub(crate) struct CandidateStream<'a> {
    vertices: WeightedAliasIndex<f64>,
    sizes: &'a GroupSizeLaw,
    n: usize,
    scratch: Vec<u32>,
}

impl<'a> CandidateStream<'a> {
    pub(crate) fn new(weights: &WeightModel, sizes: &'a GroupSizeLaw) -> Result<Self> {
        let vertices = WeightedAliasIndex::new(weights.weights().to_vec())
            .map_err(|e| Error::Config(format!("vertex weights: {e}")))?;
        Ok(CandidateStream { vertices, sizes, n: weights.n(), scratch: Vec::new() })
    }

    /// `None` when the draw names a size above `n` or repeats a vertex.
    pub(crate) fn draw(&mut self, rng: &mut SimRng) -> Option<Group> {
        let k = self.sizes.sample(rng);
        if k > self.n {
            return None;
        }
        self.scratch.clear();
        for _ in 0..k {
            self.scratch.push(self.vertices.sample(rng) as u32);
        }
        self.scratch.sort_unstable();
        if self.scratch.windows(2).any(|w| w[0] == w[1]) {
            return None;
        }
        Some(Group::from_sorted(self.scratch.clone()))
    }
}

/// Probability `[q/(1+q)] / [1 - exp(-q)]` of keeping an occupied group.
pub fn thinning_probability(q: f64) -> f64 {
    if q <= 0.0 {
        return 1.0;
    }
    if q < 1e-8 {
        // (1 - q)(1 + q/2) to second order
        return 1.0 - q / 2.0;
    }
    (q / (1.0 + q)) / (-(-q).exp_m1())
}

pub(crate) fn poisson_count(mean: f64, rng: &mut SimRng) -> Result<u64> {
    if mean <= 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean).map_err(|e| Error::Numeric(format!("Poisson({mean}): {e}")))?;
    Ok(dist.sample(rng) as u64)
}

/// Stationary sample where every rate is multiplied by `scale`
/// (`scale = 1` is the stationary graph, `scale = 1 + t` the rescaled graph).
pub fn sample_scaled(model: &Model, scale: f64, rng: &mut SimRng) -> Result<BipartiteState> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::Config(format!("rate scale {scale} must be positive")));
    }
    let weights = &model.weights;
    let mut stream = CandidateStream::new(weights, &model.sizes)?;
    let count = poisson_count(scale * weights.ell_n(), rng)?;
    let mut occupied = Vec::with_capacity(count as usize);
    for _ in 0..count {
        if let Some(g) = stream.draw(rng) {
            occupied.push(g);
        }
    }
    occupied.sort_unstable();
    occupied.dedup();
    let ln_scale = scale.ln();
    let mut active = Vec::with_capacity(occupied.len());
    for g in occupied {
        let q = (ln_group_rate(g.members(), weights, &model.sizes) + ln_scale).exp();
        if rng.random::<f64>() < thinning_probability(q) {
            active.push(g);
        }
    }
    Ok(BipartiteState::from_sorted(weights.n(), active))
}

pub fn sample_stationary(model: &Model, rng: &mut SimRng) -> Result<BipartiteState> {
    sample_scaled(model, 1.0, rng)
}

/// Upper bound on `P(C_k(i) != Z_{i,k})` for the Poisson coupling of the number
/// of size-`k` groups containing `i`.
pub fn poisson_coupling_bound(i: usize, k: usize, weights: &WeightModel, sizes: &GroupSizeLaw) -> Result<f64> {
    let n = weights.n();
    if i >= n {
        return Err(Error::Config(format!("vertex {i} outside [0, {n})")));
    }
    if k < 2 || k > n {
        return Err(Error::Config(format!("group size {k} outside [2, {n}]")));
    }
    let p = sizes.pmf(k);
    if p == 0.0 {
        return Ok(0.0);
    }
    let ell = weights.ell_n();
    let kf = k as f64;
    let w = weights.weight(i);
    let ratio = weights.empirical_moment(2) / weights.empirical_moment(1);
    let lead = kf * (kf - 1.0) * p;
    Ok(2.0 * lead * lead * w * w / ell * ((kf - 1.0) / ell).powi(k as i32 - 2) * ratio.powi(k as i32 - 1))
}

/// Largest number of potential groups accepted by the exhaustive oracle.
pub const ENUMERATION_GROUP_LIMIT: usize = 25;

/// Exact product law of the active set over all potential groups of a tiny instance.
#[derive(Debug, Clone)]
pub struct StationaryLaw {
    n: usize,
    groups: Vec<Group>,
    on_probability: Vec<BigRational>,
    probabilities: Vec<BigRational>,
}

pub(crate) fn exact(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::Numeric(format!("{x} has no exact rational form")))
}

fn factorial(k: usize) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

impl StationaryLaw {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Potential groups with positive rate, in configuration bit order.
    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn on_probability(&self, index: usize) -> &BigRational {
        &self.on_probability[index]
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    /// Probability of configuration `mask` (bit `j` set iff group `j` active).
    pub fn probability(&self, mask: usize) -> &BigRational {
        &self.probabilities[mask]
    }

    pub fn active_groups(&self, mask: usize) -> Vec<Group> {
        (0..self.groups.len())
            .filter(|j| mask >> j & 1 == 1)
            .map(|j| self.groups[j].clone())
            .collect()
    }

    pub fn mask_of(&self, state: &BipartiteState) -> Option<usize> {
        let mut mask = 0usize;
        for g in state.groups() {
            let j = self.groups.iter().position(|h| h == g)?;
            mask |= 1 << j;
        }
        Some(mask)
    }

    pub fn total(&self) -> BigRational {
        self.probabilities.iter().fold(BigRational::zero(), |acc, p| acc + p)
    }
}

/// Exhaustive law of the stationary graph for `n <= 5` and sizes `<= max_size <= 3`,
/// with all rates multiplied by `scale`.
pub fn enumerate_stationary_law(
    weights: &WeightModel,
    sizes: &GroupSizeLaw,
    max_size: usize,
    scale: f64,
) -> Result<StationaryLaw> {
    let n = weights.n();
    if n > 5 || max_size > 3 {
        return Err(Error::SizeLimit(format!(
            "exhaustive oracle needs n <= 5 and sizes <= 3, got n = {n}, max size = {max_size}"
        )));
    }
    if let Some(top) = sizes.max_size() {
        if top > max_size && (max_size + 1..=top.min(n)).any(|k| sizes.pmf(k) > 0.0) {
            return Err(Error::SizeLimit(format!("size law has mass above {max_size}")));
        }
    } else if (max_size + 1..=n).any(|k| sizes.pmf(k) > 0.0) {
        return Err(Error::SizeLimit(format!("size law has mass above {max_size}")));
    }
    let mut groups = Vec::new();
    for k in 2..=max_size.min(n) {
        if sizes.pmf(k) == 0.0 {
            continue;
        }
        for members in subsets(n as u32, k) {
            groups.push(Group::from_sorted(members));
        }
    }
    if groups.len() > ENUMERATION_GROUP_LIMIT {
        return Err(Error::SizeLimit(format!(
            "{} potential groups exceed the limit of {ENUMERATION_GROUP_LIMIT}",
            groups.len()
        )));
    }
    let w: Vec<BigRational> = weights.weights().iter().map(|&x| exact(x)).collect::<Result<_>>()?;
    let ell = w.iter().fold(BigRational::zero(), |acc, x| acc + x);
    let scale = exact(scale)?;
    let mut on_probability = Vec::with_capacity(groups.len());
    for g in &groups {
        let k = g.size();
        let mut q = BigRational::from_integer(factorial(k)) * exact(sizes.pmf(k))? * &scale;
        for &v in g.members() {
            q *= &w[v as usize];
        }
        for _ in 1..k {
            q /= &ell;
        }
        let pi = &q / (BigRational::one() + &q);
        on_probability.push(pi);
    }
    let mut probabilities = vec![BigRational::one()];
    for pi in &on_probability {
        let off = BigRational::one() - pi;
        // group j ends up as bit j of the configuration index
        let mut next = Vec::with_capacity(probabilities.len() * 2);
        next.extend(probabilities.iter().map(|p| p * &off));
        next.extend(probabilities.iter().map(|p| p * pi));
        probabilities = next;
    }
    Ok(StationaryLaw { n, groups, on_probability, probabilities })
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub(crate) fn subsets(n: u32, k: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: u32, n: u32, k: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in start..n {
            cur.push(v);
            rec(v + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}
