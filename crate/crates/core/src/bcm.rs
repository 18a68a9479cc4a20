//! Bipartite configuration model with community degrees, its exact law, and
//! exhaustive checks of the uniformity statements on tiny instances.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{GroupSizeLaw, WeightModel};
use crate::rng::SimRng;
use crate::sampler::{enumerate_stationary_law, exact, Group};

/// Largest half-edge count accepted by the matching enumerator (`8! = 40320`).
pub const MAX_ENUMERATED_HALF_EDGES: usize = 8;
/// Largest individual count accepted by the stationary-law checks.
pub const MAX_BGRG_VERTICES: usize = 4;
pub const SIMPLE_REJECTION_CAP: usize = 100_000;

/// Left (individual) and right (community slot) degrees with equal sums.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct DegreeSequencePair {
    left: Vec<u32>,
    right: Vec<u32>,
}

impl DegreeSequencePair {
    pub fn new(left: Vec<u32>, right: Vec<u32>) -> Result<Self> {
        let l: u64 = left.iter().map(|&d| d as u64).sum();
        let r: u64 = right.iter().map(|&d| d as u64).sum();
        if l != r {
            return Err(Error::Balance { left: l, right: r });
        }
        Ok(DegreeSequencePair { left, right })
    }

    pub fn left(&self) -> &[u32] {
        &self.left
    }

    pub fn right(&self) -> &[u32] {
        &self.right
    }

    /// Number of half-edges on either side.
    pub fn half_edges(&self) -> usize {
        self.left.iter().map(|&d| d as usize).sum()
    }

    fn left_stubs(&self) -> Vec<u32> {
        stubs(&self.left)
    }

    fn right_stubs(&self) -> Vec<u32> {
        stubs(&self.right)
    }
}

fn stubs(degrees: &[u32]) -> Vec<u32> {
    degrees.iter().enumerate().flat_map(|(i, &d)| std::iter::repeat_n(i as u32, d as usize)).collect()
}

/// Multiplicities `x_{ia}` between individuals `i` and community slots `a`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct BipartiteMultigraph {
    n_left: usize,
    n_right: usize,
    edges: BTreeMap<(u32, u32), u32>,
}

impl BipartiteMultigraph {
    pub fn new(n_left: usize, n_right: usize, edges: BTreeMap<(u32, u32), u32>) -> Result<Self> {
        if let Some(&(i, a)) = edges.keys().find(|&&(i, a)| i as usize >= n_left || a as usize >= n_right) {
            return Err(Error::Config(format!("edge ({i}, {a}) outside {n_left} x {n_right}")));
        }
        let edges = edges.into_iter().filter(|&(_, m)| m > 0).collect();
        Ok(BipartiteMultigraph { n_left, n_right, edges })
    }

    fn from_pairs(n_left: usize, n_right: usize, pairs: impl Iterator<Item = (u32, u32)>) -> Self {
        let mut edges = BTreeMap::new();
        for p in pairs {
            *edges.entry(p).or_insert(0) += 1;
        }
        BipartiteMultigraph { n_left, n_right, edges }
    }

    pub fn multiplicity(&self, i: u32, a: u32) -> u32 {
        self.edges.get(&(i, a)).copied().unwrap_or(0)
    }

    pub fn edges(&self) -> &BTreeMap<(u32, u32), u32> {
        &self.edges
    }

    pub fn left_degrees(&self) -> Vec<u32> {
        let mut d = vec![0; self.n_left];
        for (&(i, _), &m) in &self.edges {
            d[i as usize] += m;
        }
        d
    }

    pub fn right_degrees(&self) -> Vec<u32> {
        let mut d = vec![0; self.n_right];
        for (&(_, a), &m) in &self.edges {
            d[a as usize] += m;
        }
        d
    }

    pub fn is_simple(&self) -> bool {
        self.edges.values().all(|&m| m <= 1)
    }

    /// Member lists of the slots, each sorted.
    pub fn neighborhoods(&self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new(); self.n_right];
        for &(i, a) in self.edges.keys() {
            out[a as usize].push(i);
        }
        out
    }
}

/// Uniform pairing of left and right half-edges.
pub fn sample_bcm(degrees: &DegreeSequencePair, rng: &mut SimRng) -> BipartiteMultigraph {
    let left = degrees.left_stubs();
    let mut right = degrees.right_stubs();
    right.shuffle(rng);
    BipartiteMultigraph::from_pairs(degrees.left.len(), degrees.right.len(), left.into_iter().zip(right))
}

/// Rejection sampler for the model conditioned on simplicity.
pub fn sample_bcm_simple(degrees: &DegreeSequencePair, rng: &mut SimRng) -> Result<BipartiteMultigraph> {
    for _ in 0..SIMPLE_REJECTION_CAP {
        let g = sample_bcm(degrees, rng);
        if g.is_simple() {
            return Ok(g);
        }
    }
    Err(Error::Guard(format!("no simple graph in {SIMPLE_REJECTION_CAP} attempts")))
}

fn factorial(k: u32) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// `P(BCM = G) = (1/h!) prod d_l! prod d_r! / prod x!`, exactly.
pub fn bcm_law(degrees: &DegreeSequencePair, g: &BipartiteMultigraph) -> Result<BigRational> {
    if g.left_degrees() != degrees.left || g.right_degrees() != degrees.right {
        return Err(Error::DegreeMismatch(format!(
            "graph degrees {:?} / {:?} differ from {:?} / {:?}",
            g.left_degrees(),
            g.right_degrees(),
            degrees.left,
            degrees.right
        )));
    }
    let mut num = BigInt::one();
    for &d in degrees.left.iter().chain(&degrees.right) {
        num *= factorial(d);
    }
    let mut den = factorial(degrees.half_edges() as u32);
    for &m in g.edges.values() {
        den *= factorial(m);
    }
    Ok(BigRational::new(num, den))
}

/// Frequencies of every multigraph over all `h!` matchings.
pub fn enumerate_bcm(degrees: &DegreeSequencePair) -> Result<BTreeMap<BipartiteMultigraph, BigRational>> {
    let h = degrees.half_edges();
    if h > MAX_ENUMERATED_HALF_EDGES {
        return Err(Error::SizeLimit(format!("{h} half-edges exceed {MAX_ENUMERATED_HALF_EDGES}")));
    }
    let left = degrees.left_stubs();
    let mut right = degrees.right_stubs();
    let mut counts: HashMap<BipartiteMultigraph, u64> = HashMap::new();
    let (nl, nr) = (degrees.left.len(), degrees.right.len());
    let mut record = |right: &[u32]| {
        let g = BipartiteMultigraph::from_pairs(nl, nr, left.iter().copied().zip(right.iter().copied()));
        *counts.entry(g).or_insert(0) += 1;
    };
    // Heap's algorithm over positions, so equal stubs are still distinct half-edges
    let mut c = vec![0usize; h];
    record(&right);
    let mut i = 1;
    while i < h {
        if c[i] < i {
            if i % 2 == 0 {
                right.swap(0, i);
            } else {
                right.swap(c[i], i);
            }
            record(&right);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    let total = BigInt::from(counts.values().sum::<u64>());
    Ok(counts
        .into_iter()
        .map(|(g, k)| (g, BigRational::new(BigInt::from(k), total.clone())))
        .collect())
}

/// One conditioning class of an exhaustive report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassReport {
    pub degrees: serde_json::Value,
    pub members: Vec<serde_json::Value>,
    /// Common conditional probability, or `None` when members differ.
    pub probability: Option<String>,
    pub member_probabilities: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniformityReport {
    pub sequence: serde_json::Value,
    pub classes: Vec<ClassReport>,
    pub uniform: bool,
    pub note: Option<String>,
}

fn ratio_string(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn class_report(degrees: serde_json::Value, members: Vec<(serde_json::Value, BigRational)>) -> ClassReport {
    let total = members.iter().fold(BigRational::zero(), |acc, (_, p)| acc + p);
    let conditional: Vec<BigRational> = members.iter().map(|(_, p)| p / &total).collect();
    let uniform = conditional.windows(2).all(|w| w[0] == w[1]);
    ClassReport {
        degrees,
        members: members.into_iter().map(|(m, _)| m).collect(),
        probability: uniform.then(|| conditional.first().map(ratio_string)).flatten(),
        member_probabilities: conditional.iter().map(ratio_string).collect(),
    }
}

/// Checks that enumerated frequencies equal [`bcm_law`] and sum to one.
pub fn verify_bcm_law(degrees: &DegreeSequencePair) -> Result<bool> {
    let law = enumerate_bcm(degrees)?;
    let mut total = BigRational::zero();
    for (g, p) in &law {
        if *p != bcm_law(degrees, g)? {
            return Ok(false);
        }
        total += p;
    }
    Ok(total == BigRational::one())
}

/// Conditioned on simplicity, every simple graph with the degrees is equally likely.
pub fn verify_bcm_uniform_given_simple(degrees: &DegreeSequencePair) -> Result<UniformityReport> {
    let law = enumerate_bcm(degrees)?;
    let simple: Vec<(serde_json::Value, BigRational)> = law
        .iter()
        .filter(|(g, _)| g.is_simple())
        .map(|(g, p)| (serde_json::json!(g.neighborhoods()), p.clone()))
        .collect();
    let sequence = serde_json::json!(degrees);
    if simple.is_empty() {
        return Ok(UniformityReport {
            sequence,
            classes: Vec::new(),
            uniform: true,
            note: Some("no simple graphs".into()),
        });
    }
    let class = class_report(serde_json::json!({"left": degrees.left, "right": degrees.right}), simple);
    let uniform = class.probability.is_some();
    Ok(UniformityReport { sequence, classes: vec![class], uniform, note: None })
}

/// `(left degrees, sorted group sizes)` of an active set.
type SlotKey = (Vec<u32>, Vec<usize>);

type GroupSets = Vec<Vec<u32>>;

fn slot_key(n: usize, groups: &[Group]) -> SlotKey {
    let mut left = vec![0u32; n];
    for g in groups {
        for &v in g.members() {
            left[v as usize] += 1;
        }
    }
    let mut sizes: Vec<usize> = groups.iter().map(Group::size).collect();
    sizes.sort_unstable();
    (left, sizes)
}

fn group_sets(groups: &[Group]) -> Vec<Vec<u32>> {
    groups.iter().map(|g| g.members().to_vec()).collect()
}

/// Exhaustive uniformity of the stationary graph given its degrees.
///
/// Classes indexed by the groups themselves are single configurations. The
/// report therefore also groups configurations by left degrees and the multiset
/// of group sizes (community slots without identity), where uniformity is a
/// real statement, and checks the factorization
/// `P(config) = H(d) prod_a (1 + q_a)^{-1}` with
/// `H(d) = prod_i w_i^{d_i} prod_{a active} |a|! p_{|a|} / l_n^{|a|-1}`.
pub fn verify_bgrg_uniform_given_degrees(
    weights: &WeightModel,
    sizes: &GroupSizeLaw,
    max_size: usize,
) -> Result<UniformityReport> {
    let n = weights.n();
    if n > MAX_BGRG_VERTICES {
        return Err(Error::SizeLimit(format!("n = {n} exceeds {MAX_BGRG_VERTICES}")));
    }
    let law = enumerate_stationary_law(weights, sizes, max_size, 1.0)?;
    let w: Vec<BigRational> = weights.weights().iter().map(|&x| exact(x)).collect::<Result<_>>()?;
    let ell = w.iter().fold(BigRational::zero(), |acc, x| acc + x);
    let mut off_product = BigRational::one();
    for j in 0..law.groups().len() {
        off_product *= BigRational::one() - law.on_probability(j);
    }
    let mut factorization_holds = true;
    let mut classes: BTreeMap<SlotKey, Vec<(serde_json::Value, BigRational)>> = BTreeMap::new();
    for mask in 0..law.len() {
        let active = law.active_groups(mask);
        let p = law.probability(mask).clone();
        let key = slot_key(n, &active);
        let mut h = BigRational::one();
        for (i, &d) in key.0.iter().enumerate() {
            for _ in 0..d {
                h *= &w[i];
            }
        }
        for g in &active {
            let k = g.size();
            h *= BigRational::from_integer(factorial(k as u32)) * exact(sizes.pmf(k))?;
            for _ in 1..k {
                h /= &ell;
            }
        }
        factorization_holds &= h * &off_product == p;
        classes.entry(key).or_default().push((serde_json::json!(group_sets(&active)), p));
    }
    let classes: Vec<ClassReport> = classes
        .into_iter()
        .map(|((left, sizes), members)| class_report(serde_json::json!({"left": left, "group_sizes": sizes}), members))
        .collect();
    let uniform = factorization_holds && classes.iter().all(|c| c.probability.is_some());
    Ok(UniformityReport {
        sequence: serde_json::json!({"weights": weights.weights(), "max_size": max_size}),
        classes,
        uniform,
        note: (!factorization_holds).then(|| "factorization H(d) prod (1+q)^-1 failed".into()),
    })
}

/// Outcome of comparing the stationary graph given its degrees with the
/// configuration model given simplicity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BridgeReport {
    pub classes_compared: usize,
    /// Classes whose half-edge count exceeds the matching enumerator.
    pub classes_skipped: usize,
    pub equal: bool,
}

/// For each class `(left degrees, group sizes)` of the stationary graph, the
/// conditional law over active sets equals the configuration model with those
/// degrees, conditioned on being simple with pairwise distinct slot
/// neighbourhoods and read as a set of groups.
pub fn verify_bgrg_bcm_bridge(weights: &WeightModel, sizes: &GroupSizeLaw, max_size: usize) -> Result<BridgeReport> {
    let n = weights.n();
    if n > MAX_BGRG_VERTICES {
        return Err(Error::SizeLimit(format!("n = {n} exceeds {MAX_BGRG_VERTICES}")));
    }
    let law = enumerate_stationary_law(weights, sizes, max_size, 1.0)?;
    let mut classes: BTreeMap<SlotKey, Vec<(GroupSets, BigRational)>> = BTreeMap::new();
    for mask in 0..law.len() {
        let active = law.active_groups(mask);
        classes
            .entry(slot_key(n, &active))
            .or_default()
            .push((group_sets(&active), law.probability(mask).clone()));
    }
    let mut report = BridgeReport { classes_compared: 0, classes_skipped: 0, equal: true };
    for ((left, group_sizes), members) in classes {
        let half_edges: usize = group_sizes.iter().sum();
        if half_edges > MAX_ENUMERATED_HALF_EDGES {
            report.classes_skipped += 1;
            continue;
        }
        let total = members.iter().fold(BigRational::zero(), |acc, (_, p)| acc + p);
        let bgrg: BTreeMap<Vec<Vec<u32>>, BigRational> = members
            .into_iter()
            .map(|(mut s, p)| {
                s.sort();
                (s, p / &total)
            })
            .collect();

        let right: Vec<u32> = group_sizes.iter().map(|&k| k as u32).collect();
        let seq = DegreeSequencePair::new(left, right)?;
        let mut bcm: BTreeMap<Vec<Vec<u32>>, BigRational> = BTreeMap::new();
        let mut mass = BigRational::zero();
        for (g, p) in enumerate_bcm(&seq)? {
            if !g.is_simple() {
                continue;
            }
            let mut sets = g.neighborhoods();
            sets.sort();
            if sets.windows(2).any(|w| w[0] == w[1]) {
                continue;
            }
            mass += &p;
            *bcm.entry(sets).or_insert_with(BigRational::zero) += p;
        }
        for p in bcm.values_mut() {
            *p /= &mass;
        }
        report.classes_compared += 1;
        report.equal &= bcm == bgrg;
    }
    Ok(report)
}

/// Degree sequences with at most eight half-edges used by the exhaustive checks.
pub fn builtin_sequences() -> Vec<DegreeSequencePair> {
    let raw: &[(&[u32], &[u32])] = &[
        (&[1], &[1]),
        (&[2], &[2]),
        (&[1, 1], &[2]),
        (&[1, 1], &[1, 1]),
        (&[2, 1], &[1, 1, 1]),
        (&[1, 1, 1], &[3]),
        (&[2, 1, 1], &[2, 2]),
        (&[2, 2], &[2, 2]),
        (&[3, 1], &[2, 2]),
        (&[1, 1, 1, 1], &[2, 2]),
        (&[2, 2], &[1, 1, 1, 1]),
        (&[2, 2, 1], &[3, 2]),
        (&[3, 2, 1], &[2, 2, 2]),
        (&[2, 2, 2], &[3, 3]),
        (&[1, 1, 1, 1, 1, 1], &[2, 2, 2]),
        (&[2, 2, 2, 1], &[3, 2, 2]),
        (&[2, 2, 2, 2], &[2, 2, 2, 2]),
        (&[2, 2, 2, 2], &[4, 4]),
        (&[4, 4], &[2, 2, 2, 2]),
        (&[3, 2, 2, 1], &[2, 3, 3]),
        (&[1, 1, 1, 1, 1, 1, 1, 1], &[4, 4]),
    ];
    raw.iter().map(|(l, r)| DegreeSequencePair::new(l.to_vec(), r.to_vec()).expect("balanced")).collect()
}

/// Tiny stationary instances `(weights, sizes, max_size)` with at most three individuals.
pub fn builtin_bgrg_instances() -> Vec<(WeightModel, GroupSizeLaw, usize)> {
    let w = |v: &[f64]| WeightModel::explicit(v.to_vec(), None).expect("valid weights");
    vec![
        (w(&[1.0, 1.0, 1.0]), GroupSizeLaw::fixed(2).expect("valid"), 2),
        (w(&[1.0, 2.0, 3.0]), GroupSizeLaw::fixed(2).expect("valid"), 2),
        (w(&[1.0, 2.0, 3.0]), GroupSizeLaw::finite(&[0.6, 0.4]).expect("valid"), 3),
        (w(&[0.5, 1.5, 1.0]), GroupSizeLaw::finite(&[0.25, 0.75]).expect("valid"), 3),
        (w(&[2.0, 1.0]), GroupSizeLaw::fixed(2).expect("valid"), 2),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn pair(l: &[u32], r: &[u32]) -> DegreeSequencePair {
        DegreeSequencePair::new(l.to_vec(), r.to_vec()).unwrap()
    }

    fn graph(nl: usize, nr: usize, e: &[((u32, u32), u32)]) -> BipartiteMultigraph {
        BipartiteMultigraph::new(nl, nr, e.iter().copied().collect()).unwrap()
    }

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn balance_is_checked() {
        assert_eq!(DegreeSequencePair::new(vec![1, 2], vec![2]), Err(Error::Balance { left: 3, right: 2 }));
    }

    #[test]
    fn forced_samples() {
        let mut r = rng::seeded(1);
        assert_eq!(sample_bcm(&pair(&[1], &[1]), &mut r), graph(1, 1, &[((0, 0), 1)]));
        assert_eq!(sample_bcm(&pair(&[2], &[2]), &mut r), graph(1, 1, &[((0, 0), 2)]));
        assert_eq!(sample_bcm(&pair(&[1, 1], &[2]), &mut r), graph(2, 1, &[((0, 0), 1), ((1, 0), 1)]));
    }

    #[test]
    fn sampler_matches_law() {
        let seq = pair(&[2, 1, 1], &[2, 2]);
        let law = enumerate_bcm(&seq).unwrap();
        let mut counts: HashMap<BipartiteMultigraph, usize> = HashMap::new();
        let mut r = rng::seeded(2);
        let m = 60_000;
        for _ in 0..m {
            *counts.entry(sample_bcm(&seq, &mut r)).or_default() += 1;
        }
        for (g, p) in &law {
            let p: f64 = num_traits::ToPrimitive::to_f64(p).unwrap();
            let got = counts.get(g).copied().unwrap_or(0) as f64 / m as f64;
            assert!((got - p).abs() < 4.0 * (p * (1.0 - p) / m as f64).sqrt() + 1e-9);
        }
    }

    #[test]
    fn law_examples() {
        assert_eq!(bcm_law(&pair(&[2], &[2]), &graph(1, 1, &[((0, 0), 2)])).unwrap(), q(1, 1));
        let g = graph(2, 2, &[((0, 0), 1), ((1, 1), 1)]);
        assert_eq!(bcm_law(&pair(&[1, 1], &[1, 1]), &g).unwrap(), q(1, 2));
        assert!(matches!(bcm_law(&pair(&[2], &[2]), &g), Err(Error::DegreeMismatch(_))));
    }

    #[test]
    fn enumeration_equals_formula_for_builtin_corpus() {
        for seq in builtin_sequences() {
            assert!(verify_bcm_law(&seq).unwrap(), "{seq:?}");
        }
    }

    #[test]
    fn enumeration_cap() {
        let seq = pair(&[3, 3, 3], &[9]);
        assert!(matches!(enumerate_bcm(&seq), Err(Error::SizeLimit(_))));
    }

    #[test]
    fn simple_conditioning() {
        let r = verify_bcm_uniform_given_simple(&pair(&[1, 1], &[1, 1])).unwrap();
        assert!(r.uniform);
        assert_eq!(r.classes[0].members.len(), 2);
        assert_eq!(r.classes[0].probability.as_deref(), Some("1/2"));
        let forced = verify_bcm_uniform_given_simple(&pair(&[2], &[2])).unwrap();
        assert!(forced.classes.is_empty());
        assert_eq!(forced.note.as_deref(), Some("no simple graphs"));
        for seq in builtin_sequences() {
            assert!(verify_bcm_uniform_given_simple(&seq).unwrap().uniform, "{seq:?}");
        }
    }

    #[test]
    fn report_json_shape() {
        let r = verify_bcm_uniform_given_simple(&pair(&[2, 1, 1], &[2, 2])).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert!(v["sequence"].is_object());
        assert!(v["classes"][0]["degrees"].is_object());
        assert!(v["classes"][0]["members"].is_array());
        assert!(v["classes"][0]["probability"].is_string());
        assert_eq!(v["uniform"], serde_json::Value::Bool(true));
    }

    #[test]
    fn bgrg_uniform_on_corpus() {
        for (w, p, k) in builtin_bgrg_instances() {
            let r = verify_bgrg_uniform_given_degrees(&w, &p, k).unwrap();
            assert!(r.uniform, "{:?}", r.note);
        }
        let w = WeightModel::explicit(vec![1.0, 2.0, 2.0, 1.0], None).unwrap();
        let r = verify_bgrg_uniform_given_degrees(&w, &GroupSizeLaw::finite(&[0.5, 0.5]).unwrap(), 3).unwrap();
        assert!(r.uniform);
    }

    #[test]
    fn exchangeable_pairs() {
        // {0,1} and {0,2} are distinct classes of equal probability
        let w = WeightModel::constant(3, 1.0).unwrap();
        let law = enumerate_stationary_law(&w, &GroupSizeLaw::fixed(2).unwrap(), 2, 1.0).unwrap();
        assert_eq!(law.len(), 8);
        assert_eq!(law.probability(0b001), law.probability(0b010));
        assert_eq!(law.probability(0b011), law.probability(0b110));
        let r = verify_bgrg_uniform_given_degrees(&w, &GroupSizeLaw::fixed(2).unwrap(), 2).unwrap();
        // left degrees distinguish every configuration here
        assert_eq!(r.classes.len(), 8);
        assert!(r.classes.iter().all(|c| c.members.len() == 1));
    }

    #[test]
    fn bgrg_rejects_large_instances() {
        let w = WeightModel::constant(5, 1.0).unwrap();
        assert!(matches!(
            verify_bgrg_uniform_given_degrees(&w, &GroupSizeLaw::fixed(2).unwrap(), 2),
            Err(Error::SizeLimit(_))
        ));
    }

    #[test]
    fn bridge_on_corpus() {
        let mut compared = 0;
        for (w, p, k) in builtin_bgrg_instances() {
            let r = verify_bgrg_bcm_bridge(&w, &p, k).unwrap();
            assert!(r.equal, "{r:?}");
            compared += r.classes_compared;
        }
        assert!(compared > 20);
    }

    #[test]
    fn pair_splits_are_equally_likely() {
        let seq = pair(&[1, 1, 1, 1], &[2, 2]);
        let mut sets: BTreeMap<Vec<Vec<u32>>, usize> = BTreeMap::new();
        for (g, _) in enumerate_bcm(&seq).unwrap() {
            if g.is_simple() {
                let mut s = g.neighborhoods();
                s.sort();
                *sets.entry(s).or_default() += 1;
            }
        }
        // three ways to split four individuals into two pairs, each hit equally often
        assert_eq!(sets.len(), 3);
        assert!(sets.values().all(|&c| c == sets.values().next().copied().unwrap()));
    }

    #[test]
    fn simple_rejection_sampler() {
        let mut r = rng::seeded(3);
        let g = sample_bcm_simple(&pair(&[2, 1, 1], &[2, 2]), &mut r).unwrap();
        assert!(g.is_simple());
        assert!(matches!(sample_bcm_simple(&pair(&[2], &[2]), &mut r), Err(Error::Guard(_))));
    }
}
