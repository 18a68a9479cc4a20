use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use drig_core::analysis::{
    default_mark_grid, degree_law_oracle_scaled, empirical_mark_cdf, giant_fraction_bipartite, giant_trajectory,
    kmax_ks, kmax_process, mark_cdf_limit, mark_law_test, solve_giant, tv_degree_test, DegreeCensus, LimitLaws,
    DEFAULT_ORACLE_TOL,
};
use drig_core::bcm::{
    builtin_bgrg_instances, builtin_sequences, verify_bcm_law, verify_bcm_uniform_given_simple,
    verify_bgrg_bcm_bridge, verify_bgrg_uniform_given_degrees,
};
use drig_core::dynamics::{equivalence_bound, sample_rescaled, simulate as run_dynamics};
use drig_core::local::{census_compare, DEFAULT_BALL_CAP};
use drig_core::projection::project;
use drig_core::rng::{self, SimRng};
use drig_core::sampler::sample_stationary;
use drig_core::stats::{mean_se, write_stats_csv, StatRow};
use drig_core::{BipartiteState, Error, GroupSizeLaw, Mode, Model, ModelConfig, WeightModel};

use crate::{AnalyzeKind, CliError, RunArgs, RunManifest, VerifyKind};

const TRAJECTORY_RADII: [usize; 3] = [2, 4, 6];
const ORACLE_K_MAX_LIMIT: usize = 1 << 16;

fn load_config(path: &Path, seed: Option<u64>) -> Result<(ModelConfig, Model), CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut cfg = ModelConfig::from_json(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let model = cfg.build()?;
    Ok((cfg, model))
}

fn config_echo(cfg: &ModelConfig) -> serde_json::Value {
    serde_json::to_value(cfg).unwrap_or(serde_json::Value::Null)
}

fn label(model: &Model) -> String {
    format!("n={};t={};mode={}", model.n(), model.t, mode_name(model.mode))
}

fn mode_name(mode: Mode) -> String {
    match serde_json::to_value(mode) {
        Ok(serde_json::Value::String(s)) => s,
        _ => format!("{mode:?}"),
    }
}

/// Rate multiplier of the graph a mode produces.
fn scale_of(model: &Model) -> f64 {
    match model.mode {
        Mode::Stationary | Mode::Dynamic => 1.0,
        Mode::Union | Mode::Rescaled => 1.0 + model.t,
    }
}

fn draw_state(model: &Model, rng: &mut SimRng) -> drig_core::Result<BipartiteState> {
    match model.mode {
        Mode::Stationary => sample_stationary(model, rng),
        Mode::Rescaled => sample_rescaled(model, rng),
        Mode::Union => Ok(run_dynamics(model, rng)?.union_graph()),
        Mode::Dynamic => run_dynamics(model, rng)?.slice(model.t),
    }
}

/// Runs `f` for every replica on `jobs` threads; results come back in replica order.
fn replicas<T, F>(run: &RunArgs, seed: u64, f: F) -> Result<Vec<T>, CliError>
where
    T: Send,
    F: Fn(u64, &mut SimRng) -> drig_core::Result<T> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(run.jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Usage(format!("--jobs: {e}")))?;
    let out = pool.install(|| {
        (0..run.replicas)
            .into_par_iter()
            .map(|r| f(r, &mut rng::replica(seed, r)))
            .collect::<drig_core::Result<Vec<T>>>()
    })?;
    Ok(out)
}

fn summarize(config: &str, statistic: impl Into<String>, xs: &[f64]) -> StatRow {
    let (m, se) = mean_se(xs);
    StatRow::new(config, statistic, m, se.is_finite().then_some(se))
}

fn write_file(
    dir: &Path,
    name: &str,
    manifest: &mut RunManifest,
    body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(dir.join(name))?);
    body(&mut w)?;
    w.flush()?;
    drop(w);
    manifest.add(dir, name)
}

fn average_degree(state: &BipartiteState) -> f64 {
    let pairs: usize = state.size_counts().iter().map(|(&k, &c)| k * (k - 1) * c).sum();
    pairs as f64 / state.n() as f64
}

struct SampleStats {
    groups_per_n: f64,
    sizes: BTreeMap<usize, usize>,
    avg_degree: f64,
    state: Option<BipartiteState>,
}

pub fn sample(run: &RunArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let (cfg, model) = load_config(&run.config, run.seed)?;
    fs::create_dir_all(&run.out)?;
    let stats = replicas(run, cfg.seed, |r, rng| {
        let state = draw_state(&model, rng)?;
        Ok(SampleStats {
            groups_per_n: state.group_count() as f64 / model.n() as f64,
            sizes: state.size_counts(),
            avg_degree: average_degree(&state),
            state: (r == 0).then_some(state),
        })
    })?;
    let mut manifest = RunManifest::new("sample", config_echo(&cfg), Some(cfg.seed), Some(run.replicas));
    let first = stats[0].state.as_ref().expect("replica 0 keeps its state");
    write_file(&run.out, "state.jsonl", &mut manifest, |w| first.write_jsonl(w))?;

    let tag = label(&model);
    let mut rows = vec![summarize(&tag, "groups_per_n", &stats.iter().map(|s| s.groups_per_n).collect::<Vec<_>>())];
    let ks: std::collections::BTreeSet<usize> = stats.iter().flat_map(|s| s.sizes.keys().copied()).collect();
    for k in ks {
        let xs: Vec<f64> =
            stats.iter().map(|s| s.sizes.get(&k).copied().unwrap_or(0) as f64 / model.n() as f64).collect();
        rows.push(summarize(&tag, format!("A_{k}_per_n"), &xs));
    }
    rows.push(summarize(&tag, "average_degree", &stats.iter().map(|s| s.avg_degree).collect::<Vec<_>>()));
    write_file(&run.out, "summary.csv", &mut manifest, |w| write_stats_csv(&rows, w))?;
    manifest.write(&run.out, start.elapsed())
}

pub fn simulate(run: &RunArgs, sweep: Option<&[usize]>) -> Result<(), CliError> {
    let start = Instant::now();
    let (cfg, model) = load_config(&run.config, run.seed)?;
    fs::create_dir_all(&run.out)?;
    let mut manifest = RunManifest::new("simulate", config_echo(&cfg), Some(cfg.seed), Some(run.replicas));

    let timeline = run_dynamics(&model, &mut rng::replica(cfg.seed, 0))?;
    write_file(&run.out, "events.jsonl", &mut manifest, |w| timeline.write_events_jsonl(w))?;

    let sizes = sweep.map(<[usize]>::to_vec).unwrap_or_else(|| vec![cfg.n]);
    let mut lines = vec!["n,t,replicas,union_groups,events,multi_switch,multi_switch_fraction".to_string()];
    for n in sizes {
        let m = ModelConfig { n, ..cfg.clone() }.build()?;
        let per = replicas(run, cfg.seed, |_, rng| {
            let tl = run_dynamics(&m, rng)?;
            Ok((tl.groups().len(), tl.events().len(), tl.count_multi_switch()))
        })?;
        let (groups, events, multi) =
            per.iter().fold((0usize, 0usize, 0usize), |a, x| (a.0 + x.0, a.1 + x.1, a.2 + x.2));
        let frac = if groups == 0 { 0.0 } else { multi as f64 / groups as f64 };
        lines.push(format!("{n},{},{},{groups},{events},{multi},{frac:.10e}", model.t, run.replicas));
    }
    write_file(&run.out, "summary.csv", &mut manifest, |w| {
        lines.iter().try_for_each(|l| writeln!(w, "{l}"))
    })?;
    manifest.write(&run.out, start.elapsed())
}

fn degree_oracle(model: &Model, scale: f64) -> drig_core::Result<Vec<f64>> {
    let mut k_max = 64;
    loop {
        match degree_law_oracle_scaled(model.weights.limit_law(), &model.sizes, k_max, scale, DEFAULT_ORACLE_TOL) {
            Err(Error::Truncation { suggested, .. }) if suggested <= ORACLE_K_MAX_LIMIT => k_max = suggested,
            other => return other,
        }
    }
}

fn mark_grid(t: f64, grid: Option<&[f64]>) -> Vec<(f64, f64)> {
    let Some(points) = grid else {
        return default_mark_grid(t);
    };
    let mut out = Vec::new();
    for &a in points.iter().filter(|&&a| (0.0..=t).contains(&a)) {
        for &b in points.iter().filter(|&&b| b >= a) {
            out.push((a, b));
        }
    }
    out
}

fn time_grid(t: f64, grid: Option<&[f64]>) -> Vec<f64> {
    match grid {
        Some(g) => g.to_vec(),
        None if t == 0.0 => vec![0.0],
        None => (0..=10).map(|i| t * i as f64 / 10.0).collect(),
    }
}

pub fn analyze(
    kind: AnalyzeKind,
    run: &RunArgs,
    grid: Option<&[f64]>,
    radius: usize,
    samples: usize,
) -> Result<(), CliError> {
    let start = Instant::now();
    let (cfg, model) = load_config(&run.config, run.seed)?;
    fs::create_dir_all(&run.out)?;
    let mut manifest = RunManifest::new(format!("analyze {kind}"), config_echo(&cfg), Some(cfg.seed), Some(run.replicas));
    let tag = label(&model);
    let scale = scale_of(&model);
    let laws = || LimitLaws::scaled(model.weights.limit_law(), &model.sizes, scale);
    let mut rows = Vec::new();

    match kind {
        AnalyzeKind::Degrees => {
            let oracle = degree_oracle(&model, scale)?;
            let per = replicas(run, cfg.seed, |_, rng| {
                let census = DegreeCensus::from_projection(&project(&draw_state(&model, rng)?)?);
                Ok((tv_degree_test(&census, &oracle), census.mean()))
            })?;
            rows.push(summarize(&tag, "tv", &per.iter().map(|x| x.0).collect::<Vec<_>>()));
            rows.push(summarize(&tag, "mean_degree", &per.iter().map(|x| x.1).collect::<Vec<_>>()));
            let w = model.weights.limit_law().mean();
            let limit = scale * (model.sizes.mu2() - model.sizes.mu()) * w;
            rows.push(StatRow::new(&tag, "mean_degree_limit", limit, None));
        }
        AnalyzeKind::Giant => {
            let sol = solve_giant(&laws()?)?;
            let per = replicas(run, cfg.seed, |_, rng| Ok(giant_fraction_bipartite(&draw_state(&model, rng)?).0))?;
            rows.push(StatRow::new(&tag, "eta", sol.eta, None));
            rows.push(StatRow::new(&tag, "xi", sol.xi, None));
            rows.push(summarize(&tag, "empirical_fraction", &per));
        }
        AnalyzeKind::Kmax => {
            let t = model.t;
            let per = replicas(run, cfg.seed, |_, rng| {
                let tl = run_dynamics(&model, rng)?;
                let p = kmax_process(&tl, &model.sizes)?;
                Ok((p.value_at(t), p.normalized_at(t), p.warning().map(str::to_string)))
            })?;
            if let Some(w) = per.iter().find_map(|x| x.2.as_deref()) {
                eprintln!("warning: {w}");
            }
            let raw: Vec<usize> = per.iter().map(|x| x.0).collect();
            let ks = kmax_ks(&raw, &model.weights, &model.sizes, t)?;
            rows.push(summarize(&tag, "kmax_normalized", &per.iter().map(|x| x.1).collect::<Vec<_>>()));
            rows.push(StatRow::new(&tag, "ks_lattice", ks.lattice, None));
            rows.push(StatRow::new(&tag, "ks_continuous", ks.continuous, None));
            rows.push(StatRow::new(&tag, "ks_finite_n", ks.finite_n, None));
        }
        AnalyzeKind::Marks => {
            let t = model.t;
            let pairs = mark_grid(t, grid);
            let per = replicas(run, cfg.seed, |_, rng| {
                let tl = run_dynamics(&model, rng)?;
                let dev = mark_law_test(&tl, &pairs)?;
                let emp: Vec<f64> = pairs.iter().map(|&(a, b)| empirical_mark_cdf(&tl, a, b)).collect();
                Ok((dev, emp))
            })?;
            rows.push(summarize(&tag, "max_deviation", &per.iter().map(|x| x.0).collect::<Vec<_>>()));
            for (i, &(a, b)) in pairs.iter().enumerate() {
                let xs: Vec<f64> = per.iter().map(|x| x.1[i]).collect();
                rows.push(summarize(&tag, format!("F_empirical[{a}|{b}]"), &xs));
                rows.push(StatRow::new(&tag, format!("F_limit[{a}|{b}]"), mark_cdf_limit(t, a, b), None));
            }
        }
        AnalyzeKind::Local => {
            let limit = laws()?;
            let per = replicas(run, cfg.seed, |r, rng| {
                let graph = project(&draw_state(&model, rng)?)?;
                let c = census_compare(&graph, &limit, radius, samples, DEFAULT_BALL_CAP, rng)?;
                Ok((c.tv, c.simulated.len().max(c.limit.len()), c.truncated_simulated + c.truncated_limit, c.inexact, (r == 0).then_some(c)))
            })?;
            rows.push(summarize(&tag, "tv", &per.iter().map(|x| x.0).collect::<Vec<_>>()));
            rows.push(summarize(&tag, "classes", &per.iter().map(|x| x.1 as f64).collect::<Vec<_>>()));
            rows.push(summarize(&tag, "truncated", &per.iter().map(|x| x.2 as f64).collect::<Vec<_>>()));
            rows.push(summarize(&tag, "inexact_codes", &per.iter().map(|x| x.3 as f64).collect::<Vec<_>>()));
            let census = per[0].4.as_ref().expect("replica 0 keeps its census");
            write_file(&run.out, "census.csv", &mut manifest, |w| census.write_csv(w))?;
        }
        AnalyzeKind::Trajectory => {
            let times = time_grid(model.t, grid);
            let per = replicas(run, cfg.seed, |_, rng| {
                let tl = run_dynamics(&model, rng)?;
                let root = rng.random_range(0..model.n() as u32);
                giant_trajectory(&tl, root, &times, &TRAJECTORY_RADII)
            })?;
            let xi = solve_giant(&LimitLaws::new(model.weights.limit_law(), &model.sizes)?)?.xi;
            rows.push(StatRow::new(&tag, "xi", xi, None));
            for (i, s) in times.iter().enumerate() {
                let frac: Vec<f64> = per.iter().map(|p| p.giant_fraction[i]).collect();
                let ind: Vec<f64> = per.iter().map(|p| f64::from(u8::from(p.indicator[i]))).collect();
                rows.push(summarize(&tag, format!("giant_fraction[{s}]"), &frac));
                rows.push(summarize(&tag, format!("root_in_giant[{s}]"), &ind));
            }
            for (j, r) in TRAJECTORY_RADII.iter().enumerate() {
                let xs: Vec<f64> = per
                    .iter()
                    .flat_map(|p| p.proxies[j].1.iter().zip(&p.indicator).map(|(a, b)| f64::from(u8::from(a != b))))
                    .collect();
                rows.push(summarize(&tag, format!("proxy_disagreement_r{r}"), &xs));
            }
            write_file(&run.out, "trajectory_paths.csv", &mut manifest, |w| {
                write!(w, "replica,root,s,indicator,giant_fraction")?;
                for r in TRAJECTORY_RADII {
                    write!(w, ",proxy_r{r}")?;
                }
                writeln!(w)?;
                for (rep, p) in per.iter().enumerate() {
                    for (i, s) in p.grid.iter().enumerate() {
                        write!(w, "{rep},{},{s},{},{:.10e}", p.root, u8::from(p.indicator[i]), p.giant_fraction[i])?;
                        for (_, prox) in &p.proxies {
                            write!(w, ",{}", u8::from(prox[i]))?;
                        }
                        writeln!(w)?;
                    }
                }
                Ok(())
            })?;
        }
    }
    write_file(&run.out, &format!("{kind}.csv"), &mut manifest, |w| write_stats_csv(&rows, w))?;
    manifest.write(&run.out, start.elapsed())
}

#[derive(Serialize)]
struct VerifyReport {
    kind: String,
    pass: bool,
    details: serde_json::Value,
}

fn equivalence_report(config: Option<&Path>) -> Result<(bool, serde_json::Value), CliError> {
    let cases: Vec<(WeightModel, GroupSizeLaw, f64)> = match config {
        Some(path) => {
            let (_, m) = load_config(path, None)?;
            vec![(m.weights, m.sizes, m.t)]
        }
        None => [1_000usize, 10_000, 100_000]
            .into_iter()
            .map(|n| Ok((WeightModel::constant(n, 1.0)?, GroupSizeLaw::fixed(2)?, 1.0)))
            .collect::<drig_core::Result<_>>()?,
    };
    let mut pass = true;
    let mut rows = Vec::new();
    for (w, sizes, t) in cases {
        let doubled: Vec<f64> = w.weights().iter().chain(w.weights()).copied().collect();
        let w2 = WeightModel::explicit(doubled, w.weight_cap())?;
        let b1 = equivalence_bound(&w, &sizes, t)?;
        let b2 = equivalence_bound(&w2, &sizes, t)?;
        let ratio = b2 / b1;
        // exactly halving for p_2 = 1; larger sizes decay faster in l_n
        let ok = ratio.is_finite() && ratio <= 0.5 * 1.05 && (sizes.max_size() != Some(2) || ratio >= 0.5 * 0.95);
        pass &= ok;
        rows.push(serde_json::json!({"n": w.n(), "t": t, "bound": b1, "bound_2n": b2, "ratio": ratio, "pass": ok}));
    }
    Ok((pass, serde_json::Value::Array(rows)))
}

fn json<T: Serialize>(x: &T) -> serde_json::Value {
    serde_json::to_value(x).unwrap_or(serde_json::Value::Null)
}

pub fn verify(kind: VerifyKind, out: &Path, config: Option<&Path>) -> Result<(), CliError> {
    let start = Instant::now();
    fs::create_dir_all(out)?;
    let (pass, details) = match kind {
        VerifyKind::BcmLaw => {
            let mut pass = true;
            let mut items = Vec::new();
            for s in builtin_sequences() {
                let ok = verify_bcm_law(&s)?;
                pass &= ok;
                items.push(serde_json::json!({"sequence": json(&s), "pass": ok}));
            }
            (pass, serde_json::Value::Array(items))
        }
        VerifyKind::BcmUniform => {
            let reports = builtin_sequences()
                .iter()
                .map(verify_bcm_uniform_given_simple)
                .collect::<drig_core::Result<Vec<_>>>()?;
            (reports.iter().all(|r| r.uniform), json(&reports))
        }
        VerifyKind::BgrgUniform => {
            let reports = builtin_bgrg_instances()
                .iter()
                .map(|(w, p, k)| verify_bgrg_uniform_given_degrees(w, p, *k))
                .collect::<drig_core::Result<Vec<_>>>()?;
            (reports.iter().all(|r| r.uniform), json(&reports))
        }
        VerifyKind::Bridge => {
            let reports = builtin_bgrg_instances()
                .iter()
                .map(|(w, p, k)| verify_bgrg_bcm_bridge(w, p, *k))
                .collect::<drig_core::Result<Vec<_>>>()?;
            (reports.iter().all(|r| r.equal), json(&reports))
        }
        VerifyKind::EquivalenceBound => equivalence_report(config)?,
    };
    let mut manifest = RunManifest::new(format!("verify {kind}"), serde_json::Value::Null, None, None);
    let name = format!("verify-{kind}.json");
    let report = VerifyReport { kind: kind.to_string(), pass, details };
    write_file(out, &name, &mut manifest, |w| {
        serde_json::to_writer_pretty(&mut *w, &report)?;
        writeln!(w)
    })?;
    manifest.write(out, start.elapsed())?;
    if pass {
        Ok(())
    } else {
        Err(CliError::Numeric(format!("verification {kind} failed; see {}", out.join(name).display())))
    }
}
