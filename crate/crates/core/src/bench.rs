//! Bound-ratio suite: generate, reduce, verify and measure, one row per
//! (family, seed, delta, t).

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::depth::{choose_t, reduce_depth_delta, DEFAULT_BUDGET};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::generate::{generate, Family, GeneratorSpec};
use crate::var::infer_k;
use crate::verify::{check_bounds, check_equivalence, layered_report, structural_report};

fn one() -> u64 {
    1
}

fn default_deltas() -> Vec<u32> {
    vec![2]
}

fn default_trials() -> u64 {
    20
}

fn default_budget() -> u64 {
    DEFAULT_BUDGET as u64
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchConfig {
    /// Each spec's seed is the first of `seeds` consecutive seeds.
    pub families: Vec<GeneratorSpec>,
    #[serde(default = "one")]
    pub seeds: u64,
    #[serde(default = "default_deltas")]
    pub deltas: Vec<u32>,
    /// Thresholds to sweep; empty means the schedule's own choice.
    #[serde(default)]
    pub t_values: Vec<u32>,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub verify_seed: u64,
    #[serde(default = "default_budget")]
    pub budget: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub family: String,
    pub n: usize,
    pub k: u32,
    pub s: usize,
    pub delta: u32,
    pub t: u32,
    pub out_size: usize,
    pub top_fanin: usize,
    pub tree_depth: usize,
    pub bound_ratio: f64,
    pub topfanin_ratio: f64,
    pub equiv_verdict: String,
    pub seconds: f64,
}

/// Spread of the fitted constant `C = log_s(top fan-in) · t / kn` over the
/// rows of one (family, delta, t) group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRow {
    pub family: String,
    pub delta: u32,
    pub t: u32,
    pub rows: usize,
    pub c_min: f64,
    pub c_max: f64,
    pub c_mean: f64,
    /// `c_max / c_min`; infinite when some row has top fan-in 1.
    pub spread: f64,
}

pub fn family_label(spec: &GeneratorSpec) -> String {
    match &spec.family {
        Family::ProductOfSums { blocks, width } => format!("product_of_sums_{blocks}x{width}"),
        Family::RandomMultilinear { gates } => format!("random_multilinear_g{gates}"),
        Family::RandomMultiKIc { gates, k } => format!("random_multi_k_ic_g{gates}_k{k}"),
        Family::FullMultilinear => "full_multilinear".to_string(),
    }
}

struct Job {
    spec: GeneratorSpec,
    delta: u32,
    t: Option<u32>,
}

fn run_job(job: &Job, cfg: &BenchConfig, field: Field) -> Result<BenchRow> {
    let c = generate(&job.spec, field)?;
    let start = Instant::now();
    let budget = cfg.budget as u128;
    let (layered, rep) = reduce_depth_delta(&c, job.delta, job.t, budget)?;
    let outcome = check_equivalence(&c, &layered, budget, cfg.trials, cfg.verify_seed);
    let seconds = start.elapsed().as_secs_f64();
    let before = structural_report(&c, 0);
    let after = layered_report(&layered, 0);
    let k = infer_k(&c).max(1);
    let schedule = choose_t(c.num_vars(), k, c.size().max(2), job.delta)?;
    let schedule = crate::depth::Schedule { t_value: rep.t, ..schedule };
    let bounds = check_bounds(&before, &after, &schedule);
    Ok(BenchRow {
        family: family_label(&job.spec),
        n: c.num_vars(),
        k,
        s: c.size(),
        delta: job.delta,
        t: rep.t,
        out_size: after.size,
        top_fanin: rep.top_fanin,
        tree_depth: rep.tree_depth,
        bound_ratio: bounds.bound_ratio,
        topfanin_ratio: bounds.topfanin_ratio,
        equiv_verdict: outcome.label(),
        seconds,
    })
}

/// Rows in configuration order (family, seed, delta, t), computed in
/// parallel.
pub fn run_bench(cfg: &BenchConfig, field: Field) -> Result<Vec<BenchRow>> {
    if cfg.families.is_empty() {
        return Err(Error::InvalidParams("bench config lists no families".into()));
    }
    let ts: Vec<Option<u32>> =
        if cfg.t_values.is_empty() { vec![None] } else { cfg.t_values.iter().map(|&t| Some(t)).collect() };
    let mut jobs = Vec::new();
    for fam in &cfg.families {
        for i in 0..cfg.seeds {
            let spec = GeneratorSpec { seed: fam.seed.wrapping_add(i), ..fam.clone() };
            for &delta in &cfg.deltas {
                for &t in &ts {
                    jobs.push(Job { spec: spec.clone(), delta, t });
                }
            }
        }
    }
    jobs.par_iter().map(|j| run_job(j, cfg, field)).collect()
}

/// One fit per (family, delta, t), in first-appearance order.
pub fn fit(rows: &[BenchRow]) -> Vec<FitRow> {
    let mut groups: Vec<((String, u32, u32), Vec<f64>)> = Vec::new();
    for r in rows {
        let key = (r.family.clone(), r.delta, r.t);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(r.topfanin_ratio),
            None => groups.push((key, vec![r.topfanin_ratio])),
        }
    }
    groups
        .into_iter()
        .map(|((family, delta, t), cs)| {
            let c_min = cs.iter().copied().fold(f64::INFINITY, f64::min);
            let c_max = cs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let c_mean = cs.iter().sum::<f64>() / cs.len() as f64;
            // a constant group (all zero when every top fan-in is 1) has no spread
            let spread = if c_max == c_min {
                1.0
            } else if c_min > 0.0 {
                c_max / c_min
            } else {
                f64::INFINITY
            };
            FitRow { family, delta, t, rows: cs.len(), c_min, c_max, c_mean, spread }
        })
        .collect()
}

pub fn write_csv<W: std::io::Write, T: Serialize>(out: W, rows: &[T]) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
