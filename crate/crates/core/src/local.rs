//! The two-type branching-process limit, its community projection, rooted balls
//! with canonical codes, and neighbourhood censuses.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::io::{self, Write};

use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::{Distribution, Poisson};

use crate::analysis::LimitLaws;
use crate::error::{Error, Result};
use crate::params::GroupSizeLaw;
use crate::projection::ProjectedMultigraph;
use crate::rng::SimRng;
use crate::stats::tv_counts;

pub const TREE_NODE_GUARD: usize = 1_000_000;
pub const DEFAULT_BALL_CAP: usize = 200;
pub const EXHAUSTIVE_CANON_LIMIT: usize = 12;
pub const CANON_NODE_BUDGET: usize = 20_000;
pub const MIN_CENSUS_SAMPLE: usize = 1_000;
pub const MAX_CENSUS_RADIUS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mark {
    Left,
    Right,
}

impl Mark {
    fn other(self) -> Mark {
        match self {
            Mark::Left => Mark::Right,
            Mark::Right => Mark::Left,
        }
    }
}

/// Rooted ordered tree with alternating marks; node 0 is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoTypeTree {
    marks: Vec<Mark>,
    depths: Vec<usize>,
    children: Vec<Vec<u32>>,
    depth: usize,
}

impl TwoTypeTree {
    pub fn len(&self) -> usize {
        self.marks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.marks.is_empty()
    }

    pub fn root_mark(&self) -> Mark {
        self.marks[0]
    }

    pub fn mark(&self, v: usize) -> Mark {
        self.marks[v]
    }

    pub fn node_depth(&self, v: usize) -> usize {
        self.depths[v]
    }

    pub fn children(&self, v: usize) -> &[u32] {
        &self.children[v]
    }

    /// Depth to which offspring were drawn.
    pub fn depth(&self) -> usize {
        self.depth
    }
}

/// Size-biased group sizes `P(K* = k) = k p_k / mu`.
#[derive(Debug, Clone)]
enum SizeBiased {
    Finite(WeightedAliasIndex<f64>),
    /// Rejection from the envelope `P(G >= k) = (2/k)^{alpha - 1}`.
    PowerLaw { alpha: f64, bound: f64, law: GroupSizeLaw },
}

impl SizeBiased {
    fn new(sizes: &GroupSizeLaw) -> Result<Self> {
        if let Some(alpha) = sizes.alpha() {
            let env = |k: usize| (2.0 / k as f64).powf(alpha - 1.0) - (2.0 / (k + 1) as f64).powf(alpha - 1.0);
            let ratio = |k: usize| k as f64 * sizes.pmf(k) / env(k);
            let mut bound = 2.0 * alpha / (alpha - 1.0);
            for k in 2..100_000 {
                bound = bound.max(ratio(k));
            }
            return Ok(SizeBiased::PowerLaw { alpha, bound: bound * (1.0 + 1e-9), law: sizes.clone() });
        }
        let max = sizes.max_size().expect("bounded support");
        let w: Vec<f64> = (0..=max).map(|k| k as f64 * sizes.pmf(k)).collect();
        WeightedAliasIndex::new(w)
            .map(SizeBiased::Finite)
            .map_err(|e| Error::Config(format!("size-biased group-size law: {e}")))
    }

    fn sample(&self, rng: &mut SimRng) -> usize {
        match self {
            SizeBiased::Finite(alias) => alias.sample(rng),
            SizeBiased::PowerLaw { alpha, bound, law } => loop {
                let u = 1.0 - rng.random::<f64>();
                let k = (2.0 * u.powf(-1.0 / (alpha - 1.0))).floor() as usize;
                let env = (2.0 / k as f64).powf(alpha - 1.0) - (2.0 / (k + 1) as f64).powf(alpha - 1.0);
                if rng.random::<f64>() * bound * env <= k as f64 * law.pmf(k) {
                    return k;
                }
            },
        }
    }
}

/// Mixed-Poisson offspring `Poisson(rate * W)` with `W` from a discrete law.
#[derive(Debug, Clone)]
struct MixedPoisson {
    pick: WeightedAliasIndex<f64>,
    rates: Vec<Option<Poisson<f64>>>,
}

impl MixedPoisson {
    fn new(atoms: &[(f64, f64)], rate: f64) -> Result<Self> {
        let pick = WeightedAliasIndex::new(atoms.iter().map(|a| a.1).collect())
            .map_err(|e| Error::Config(format!("weight law: {e}")))?;
        let rates = atoms
            .iter()
            .map(|&(w, _)| {
                let lam = rate * w;
                if lam > 0.0 {
                    Poisson::new(lam).map(Some).map_err(|e| Error::Numeric(format!("Poisson({lam}): {e}")))
                } else {
                    Ok(None)
                }
            })
            .collect::<Result<_>>()?;
        Ok(MixedPoisson { pick, rates })
    }

    fn sample(&self, rng: &mut SimRng) -> usize {
        match &self.rates[self.pick.sample(rng)] {
            Some(p) => p.sample(rng) as usize,
            None => 0,
        }
    }
}

/// Offspring samplers for every node type of the limiting tree.
#[derive(Debug, Clone)]
pub struct BpSampler {
    root_left: MixedPoisson,
    left: MixedPoisson,
    sizes: GroupSizeLaw,
    biased: SizeBiased,
}

impl BpSampler {
    pub fn new(laws: &LimitLaws) -> Result<Self> {
        let rate = laws.scale() * laws.size_law().mu();
        let w = laws.weight_law();
        Ok(BpSampler {
            root_left: MixedPoisson::new(w.atoms(), rate)?,
            left: MixedPoisson::new(w.size_biased()?.atoms(), rate)?,
            sizes: laws.size_law().clone(),
            biased: SizeBiased::new(laws.size_law())?,
        })
    }

    fn offspring(&self, mark: Mark, is_root: bool, rng: &mut SimRng) -> usize {
        match (mark, is_root) {
            (Mark::Left, true) => self.root_left.sample(rng),
            (Mark::Left, false) => self.left.sample(rng),
            (Mark::Right, true) => self.sizes.sample(rng),
            (Mark::Right, false) => self.biased.sample(rng) - 1,
        }
    }

    /// Tree with the given root mark, offspring drawn for generations `< depth`.
    pub fn sample_rooted(&self, root: Mark, depth: usize, rng: &mut SimRng) -> Result<TwoTypeTree> {
        let mut tree = TwoTypeTree { marks: vec![root], depths: vec![0], children: vec![Vec::new()], depth };
        let mut queue = VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            let d = tree.depths[v];
            if d == depth {
                continue;
            }
            let k = self.offspring(tree.marks[v], v == 0, rng);
            if tree.len() + k > TREE_NODE_GUARD {
                return Err(Error::Guard(format!("branching process exceeds {TREE_NODE_GUARD} nodes")));
            }
            let mark = tree.marks[v].other();
            for _ in 0..k {
                let c = tree.len();
                tree.marks.push(mark);
                tree.depths.push(d + 1);
                tree.children.push(Vec::new());
                tree.children[v].push(c as u32);
                queue.push_back(c);
            }
        }
        Ok(tree)
    }
}

/// Default mixing probability `P(root is an individual) = 1 / (1 + E[W])`.
pub fn default_left_probability(laws: &LimitLaws) -> f64 {
    1.0 / (1.0 + laws.weight_law().mean())
}

/// Samples the mixture tree: root mark `l` with probability `p_left`, else `r`.
pub fn sample_bp(laws: &LimitLaws, p_left: f64, depth: usize, rng: &mut SimRng) -> Result<TwoTypeTree> {
    if !(0.0..=1.0).contains(&p_left) {
        return Err(Error::Config(format!("mixing probability {p_left} outside [0, 1]")));
    }
    let root = if rng.random::<f64>() < p_left { Mark::Left } else { Mark::Right };
    BpSampler::new(laws)?.sample_rooted(root, depth, rng)
}

/// Rooted multigraph (root is vertex 0) with its canonical code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootedBall {
    radius: usize,
    adjacency: Vec<Vec<u32>>,
    code: Vec<u8>,
    exact: bool,
}

impl RootedBall {
    /// Ball from a dense symmetric multiplicity matrix with the given root.
    pub fn from_matrix(adjacency: Vec<Vec<u32>>, root: usize, radius: usize) -> Result<Self> {
        let n = adjacency.len();
        if root >= n || adjacency.iter().any(|row| row.len() != n) {
            return Err(Error::Config("ball matrix must be square and contain the root".into()));
        }
        for i in 0..n {
            if adjacency[i][i] != 0 || (0..n).any(|j| adjacency[i][j] != adjacency[j][i]) {
                return Err(Error::Config("ball matrix must be symmetric with zero diagonal".into()));
            }
        }
        let mut perm: Vec<usize> = (0..n).collect();
        perm.swap(0, root);
        let adjacency: Vec<Vec<u32>> =
            perm.iter().map(|&i| perm.iter().map(|&j| adjacency[i][j]).collect()).collect();
        let (code, exact) = canonical_code(&adjacency);
        Ok(RootedBall { radius, adjacency, code, exact })
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn size(&self) -> usize {
        self.adjacency.len()
    }

    /// Multiplicity matrix with the root at index 0.
    pub fn adjacency(&self) -> &[Vec<u32>] {
        &self.adjacency
    }

    pub fn code(&self) -> &[u8] {
        &self.code
    }

    pub fn code_hex(&self) -> String {
        self.code.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// False when the search budget ran out and the code came from tie-breaking.
    pub fn is_exact(&self) -> bool {
        self.exact
    }
}

/// Community projection of an `l`-rooted tree: each `r`-node becomes a clique on
/// its parent and children. A depth-`2r` tree yields the exact `r`-ball.
pub fn project_bp(tree: &TwoTypeTree) -> Result<RootedBall> {
    if tree.root_mark() != Mark::Left {
        return Err(Error::Unsupported("projection of a group-rooted tree has no individual root".into()));
    }
    let mut index = vec![usize::MAX; tree.len()];
    let mut count = 0;
    for v in 0..tree.len() {
        if tree.mark(v) == Mark::Left {
            index[v] = count;
            count += 1;
        }
    }
    let mut parents = vec![None; tree.len()];
    for v in 0..tree.len() {
        for &c in tree.children(v) {
            parents[c as usize] = Some(v);
        }
    }
    let mut adj = vec![vec![0u32; count]; count];
    for v in 0..tree.len() {
        if tree.mark(v) != Mark::Right {
            continue;
        }
        let parent = parents[v];
        let members: Vec<usize> =
            parent.into_iter().chain(tree.children(v).iter().map(|&c| c as usize)).map(|u| index[u]).collect();
        for (x, &a) in members.iter().enumerate() {
            for &b in &members[x + 1..] {
                adj[a][b] += 1;
                adj[b][a] += 1;
            }
        }
    }
    RootedBall::from_matrix(adj, 0, tree.depth() / 2)
}

/// Induced `r`-ball of `root`; `None` if it has more than `cap` vertices.
pub fn extract_ball(graph: &ProjectedMultigraph, root: u32, radius: usize, cap: usize) -> Result<Option<RootedBall>> {
    if root as usize >= graph.n() {
        return Err(Error::Config(format!("root {root} outside [0, {})", graph.n())));
    }
    let mut index: HashMap<u32, usize> = HashMap::from([(root, 0)]);
    let mut order = vec![root];
    let mut queue = VecDeque::from([(root, 0usize)]);
    while let Some((v, d)) = queue.pop_front() {
        if d == radius {
            continue;
        }
        for (u, _) in graph.neighbors(v as usize) {
            if !index.contains_key(&u) {
                if order.len() == cap {
                    return Ok(None);
                }
                index.insert(u, order.len());
                order.push(u);
                queue.push_back((u, d + 1));
            }
        }
    }
    let k = order.len();
    let mut adj = vec![vec![0u32; k]; k];
    for (a, &v) in order.iter().enumerate() {
        for (u, m) in graph.neighbors(v as usize) {
            if let Some(&b) = index.get(&u) {
                adj[a][b] = m;
            }
        }
    }
    RootedBall::from_matrix(adj, 0, radius).map(Some)
}

fn push_varint(out: &mut Vec<u8>, mut x: u64) {
    loop {
        let byte = (x & 0x7f) as u8;
        x >>= 7;
        if x == 0 {
            out.push(byte);
            return;
        }
        out.push(byte | 0x80);
    }
}

fn read_varint(bytes: &[u8], pos: &mut usize) -> Option<u64> {
    let mut x = 0u64;
    let mut shift = 0;
    loop {
        let b = *bytes.get(*pos)?;
        *pos += 1;
        x |= ((b & 0x7f) as u64) << shift;
        if b & 0x80 == 0 {
            return Some(x);
        }
        shift += 7;
    }
}

/// Decodes a canonical code back into the matrix it encodes (root at 0).
pub fn decode_code(code: &[u8]) -> Option<Vec<Vec<u32>>> {
    let mut pos = 0;
    let n = read_varint(code, &mut pos)? as usize;
    let mut adj = vec![vec![0u32; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let m = read_varint(code, &mut pos)? as u32;
            adj[i][j] = m;
            adj[j][i] = m;
        }
    }
    (pos == code.len()).then_some(adj)
}

fn encode(adj: &[Vec<u32>], order: &[usize]) -> Vec<u8> {
    let mut out = Vec::new();
    push_varint(&mut out, order.len() as u64);
    for (x, &i) in order.iter().enumerate() {
        for &j in &order[x + 1..] {
            push_varint(&mut out, adj[i][j] as u64);
        }
    }
    out
}

/// Refines colours by neighbour-colour multisets until stable. Colours are ranks
/// of sorted signatures, so the result does not depend on vertex names.
fn refine(adj: &[Vec<u32>], mut colors: Vec<u32>) -> Vec<u32> {
    let n = adj.len();
    let mut classes = {
        let mut c = colors.clone();
        c.sort_unstable();
        c.dedup();
        c.len()
    };
    loop {
        let sigs: Vec<(u32, Vec<(u32, u32)>)> = (0..n)
            .map(|v| {
                let mut nb: Vec<(u32, u32)> =
                    (0..n).filter(|&w| adj[v][w] > 0).map(|w| (colors[w], adj[v][w])).collect();
                nb.sort_unstable();
                (colors[v], nb)
            })
            .collect();
        let mut sorted: Vec<&(u32, Vec<(u32, u32)>)> = sigs.iter().collect();
        sorted.sort();
        sorted.dedup();
        let next: Vec<u32> = sigs.iter().map(|s| sorted.binary_search(&s).expect("present") as u32).collect();
        if sorted.len() == classes {
            return next;
        }
        classes = sorted.len();
        colors = next;
    }
}

fn twins(adj: &[Vec<u32>], u: usize, v: usize) -> bool {
    (0..adj.len()).all(|w| w == u || w == v || adj[u][w] == adj[v][w])
}

struct Search<'a> {
    adj: &'a [Vec<u32>],
    best: Option<(Vec<u8>, Vec<usize>)>,
    /// Automorphisms found by comparing leaves with equal codes.
    autos: Vec<Vec<usize>>,
    nodes: usize,
    budget: Option<usize>,
    exact: bool,
}

impl Search<'_> {
    /// Orbit representatives of `vertices` under the found automorphisms that fix `prefix` pointwise.
    fn orbit_roots(&self, prefix: &[usize]) -> Vec<usize> {
        let n = self.adj.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for g in self.autos.iter().filter(|g| prefix.iter().all(|&p| g[p] == p)) {
            for (v, &w) in g.iter().enumerate() {
                let (a, b) = (find(&mut parent, v), find(&mut parent, w));
                parent[a.max(b)] = a.min(b);
            }
        }
        (0..n).map(|v| find(&mut parent, v)).collect()
    }

    fn run(&mut self, colors: Vec<u32>, prefix: &mut Vec<usize>) {
        self.nodes += 1;
        let colors = refine(self.adj, colors);
        let n = colors.len();
        let mut counts = vec![0usize; n];
        for &c in &colors {
            counts[c as usize] += 1;
        }
        let Some(target) = (0..n).find(|&c| counts[c] > 1) else {
            let mut order = vec![0usize; n];
            for (v, &c) in colors.iter().enumerate() {
                order[c as usize] = v;
            }
            let code = encode(self.adj, &order);
            match &self.best {
                Some((b, border)) if code == *b => {
                    let mut g = vec![0usize; n];
                    for (&from, &to) in border.iter().zip(&order) {
                        g[from] = to;
                    }
                    if g.iter().enumerate().any(|(v, &w)| v != w) {
                        self.autos.push(g);
                    }
                }
                Some((b, _)) if code > *b => {}
                _ => self.best = Some((code, order)),
            }
            return;
        };
        let cell: Vec<usize> = (0..n).filter(|&v| colors[v] as usize == target).collect();
        // one representative per twin class: swapping twins is an automorphism
        // fixing the current colouring, so their subtrees give the same codes
        let mut reps: Vec<usize> = Vec::new();
        for &v in &cell {
            if !reps.iter().any(|&r| twins(self.adj, r, v)) {
                reps.push(v);
            }
        }
        let mut explored: Vec<usize> = Vec::new();
        for &v in &reps {
            if !explored.is_empty() {
                if self.budget.is_some_and(|b| self.nodes > b) {
                    self.exact = false;
                    return;
                }
                // an automorphism fixing the prefix maps an explored branch onto this one
                let roots = self.orbit_roots(prefix);
                if explored.iter().any(|&u| roots[u] == roots[v]) {
                    continue;
                }
            }
            explored.push(v);
            let next: Vec<u32> = colors.iter().enumerate().map(|(w, &c)| 2 * c + u32::from(w != v)).collect();
            prefix.push(v);
            self.run(next, prefix);
            prefix.pop();
        }
    }
}

/// Lexicographically smallest encoding over all root-first orderings reachable by
/// individualization-refinement. Exhaustive up to [`EXHAUSTIVE_CANON_LIMIT`]
/// vertices; larger inputs get a node budget and report `false` if it ran out.
pub fn canonical_code(adj: &[Vec<u32>]) -> (Vec<u8>, bool) {
    let n = adj.len();
    if n == 0 {
        return (vec![0], true);
    }
    // initial colours: distance from the root (vertex 0)
    let mut dist = vec![u32::MAX; n];
    dist[0] = 0;
    let mut queue = VecDeque::from([0usize]);
    while let Some(v) = queue.pop_front() {
        for w in 0..n {
            if adj[v][w] > 0 && dist[w] == u32::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    let budget = (n > EXHAUSTIVE_CANON_LIMIT).then_some(CANON_NODE_BUDGET);
    let mut search = Search { adj, best: None, autos: Vec::new(), nodes: 0, budget, exact: true };
    search.run(dist, &mut vec![0]);
    (search.best.expect("at least one leaf").0, search.exact)
}

/// Counts of canonical codes on both sides of a census comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct Census {
    pub radius: usize,
    pub simulated: BTreeMap<Vec<u8>, usize>,
    pub limit: BTreeMap<Vec<u8>, usize>,
    /// Balls over the size cap, excluded from the counts.
    pub truncated_simulated: usize,
    pub truncated_limit: usize,
    /// Balls whose code came from a budget-limited search.
    pub inexact: usize,
    pub tv: f64,
}

impl Census {
    /// CSV `code,simulated,limit` with codes in hex.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "code,simulated,limit")?;
        let mut keys: Vec<&Vec<u8>> = self.simulated.keys().chain(self.limit.keys()).collect();
        keys.sort();
        keys.dedup();
        for k in keys {
            let hex: String = k.iter().map(|b| format!("{b:02x}")).collect();
            writeln!(
                out,
                "{hex},{},{}",
                self.simulated.get(k).copied().unwrap_or(0),
                self.limit.get(k).copied().unwrap_or(0)
            )?;
        }
        Ok(())
    }
}

/// Compares `r`-balls around `samples` uniform roots of `graph` with `samples`
/// projected `l`-rooted trees from `laws`.
pub fn census_compare(
    graph: &ProjectedMultigraph,
    laws: &LimitLaws,
    radius: usize,
    samples: usize,
    cap: usize,
    rng: &mut SimRng,
) -> Result<Census> {
    if samples < MIN_CENSUS_SAMPLE {
        return Err(Error::InsufficientSample { got: samples, needed: MIN_CENSUS_SAMPLE });
    }
    if radius > MAX_CENSUS_RADIUS {
        return Err(Error::Unsupported(format!("census radius {radius} > {MAX_CENSUS_RADIUS}")));
    }
    if graph.n() == 0 {
        return Err(Error::InsufficientSample { got: 0, needed: 1 });
    }
    let mut census = Census {
        radius,
        simulated: BTreeMap::new(),
        limit: BTreeMap::new(),
        truncated_simulated: 0,
        truncated_limit: 0,
        inexact: 0,
        tv: 0.0,
    };
    for _ in 0..samples {
        let root = rng.random_range(0..graph.n() as u32);
        match extract_ball(graph, root, radius, cap)? {
            Some(b) => {
                census.inexact += usize::from(!b.is_exact());
                *census.simulated.entry(b.code).or_default() += 1;
            }
            None => census.truncated_simulated += 1,
        }
    }
    let bp = BpSampler::new(laws)?;
    for _ in 0..samples {
        let tree = bp.sample_rooted(Mark::Left, 2 * radius, rng)?;
        let lefts = (0..tree.len()).filter(|&v| tree.mark(v) == Mark::Left).count();
        if lefts > cap {
            census.truncated_limit += 1;
            continue;
        }
        let b = project_bp(&tree)?;
        census.inexact += usize::from(!b.is_exact());
        *census.limit.entry(b.code).or_default() += 1;
    }
    census.tv = tv_counts(&census.simulated, &census.limit);
    Ok(census)
}
