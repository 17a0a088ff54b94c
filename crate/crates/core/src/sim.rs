//! Event-driven straggler simulation.
//!
//! Each worker runs its assigned tasks back to back. Task durations are
//! drawn per worker from a seeded stream, so a run is a pure function of
//! `(plan, chain, model, seed)`. Completions are processed in
//! `(time, worker)` order and fed to an incremental decoder; the run ends
//! at the first result that makes the system full rank.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use crate::analysis::{Memory, SchemeLabel};
use crate::chain::{assemble_result, oracle_chain_multiply, random_chain, BlockChain, ChainResult};
use crate::decoding::IncrementalDecoder;
use crate::encoding::{encode_task, worker_compute};
use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::placement::StoragePlan;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LatencyModel {
    /// `shift + Exp(rate)` per task.
    ShiftedExponential { shift: f64, rate: f64 },
    Deterministic { task_time: f64 },
}

impl Default for LatencyModel {
    fn default() -> Self {
        LatencyModel::ShiftedExponential { shift: 1.0, rate: 1.0 }
    }
}

impl LatencyModel {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            LatencyModel::ShiftedExponential { shift, rate } => shift >= 0.0 && rate > 0.0 && shift.is_finite() && rate.is_finite(),
            LatencyModel::Deterministic { task_time } => task_time > 0.0 && task_time.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("bad latency model {self:?}")))
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            LatencyModel::ShiftedExponential { shift, rate } => {
                shift + Exp::new(rate).expect("rate checked positive").sample(rng)
            }
            LatencyModel::Deterministic { task_time } => task_time,
        }
    }

    /// Completion times of `count` back-to-back tasks on `worker`.
    pub fn completion_times(&self, seed: u64, worker: usize, count: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(worker as u64);
        let mut t = 0.0;
        (0..count)
            .map(|_| {
                t += self.sample(&mut rng);
                t
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct SimOutcome {
    /// Arrival time of the result that completed the rank.
    pub recovery_time: f64,
    pub tasks_total: usize,
    /// Results finished at or before the recovery time.
    pub tasks_completed: usize,
    /// Tasks finishing after the recovery time; queues are not cancelled.
    pub tasks_wasted: usize,
    /// Results per worker at or before the recovery time.
    pub per_worker_completed: Vec<usize>,
    /// Results handed to the decoder, including the last one.
    pub results_used: usize,
    /// `results_used - R_th`.
    pub extra_for_decodability: usize,
    pub recovery_threshold: usize,
    pub decoded: ChainResult,
}

struct Event {
    time: f64,
    worker: usize,
    task: usize,
}

fn events(plan: &StoragePlan, model: &LatencyModel, seed: u64) -> Vec<Event> {
    let mut all: Vec<Event> = plan
        .assignments()
        .iter()
        .flat_map(|a| {
            model
                .completion_times(seed, a.worker, a.tasks.len())
                .into_iter()
                .enumerate()
                .map(move |(task, time)| Event { time, worker: a.worker, task })
        })
        .collect();
    all.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.worker.cmp(&b.worker)).then(a.task.cmp(&b.task)));
    all
}

/// Runs one simulation and checks the decoded product against direct
/// multiplication of the chain.
pub fn simulate(
    plan: &StoragePlan,
    chain: &BlockChain,
    model: &LatencyModel,
    seed: u64,
    field: &PrimeField,
) -> Result<SimOutcome> {
    model.validate()?;
    if chain.scheme() != plan.scheme() {
        return Err(Error::InvalidParameter("chain and plan use different partition schemes".into()));
    }
    let kind = plan.kind();
    let mut decoder = IncrementalDecoder::new(kind, plan.scheme(), *field);
    let needed = decoder.unknowns();
    let schedule = events(plan, model, seed);
    let mut used = 0;
    let mut recovery = None;
    for ev in &schedule {
        let point = &plan.tasks_for(ev.worker)[ev.task];
        let value = worker_compute(&encode_task(chain, kind, point, field)?, field)?;
        used += 1;
        decoder.offer(point, &value)?;
        if decoder.is_decodable() {
            recovery = Some(ev.time);
            break;
        }
    }
    let Some(recovery_time) = recovery else {
        return Err(Error::NeverDecodable { collected: used, rank: decoder.rank(), needed });
    };
    let decoded = decoder.finish()?;
    let expected = oracle_chain_multiply(&chain.reassemble(), field)?;
    if assemble_result(&decoded)? != expected {
        return Err(Error::DecodeMismatch);
    }
    let mut per_worker_completed = vec![0; plan.workers()];
    for e in schedule.iter().filter(|e| e.time <= recovery_time) {
        per_worker_completed[e.worker] += 1;
    }
    let tasks_completed: usize = per_worker_completed.iter().sum();
    Ok(SimOutcome {
        recovery_time,
        tasks_total: plan.total_tasks(),
        tasks_completed,
        tasks_wasted: plan.total_tasks() - tasks_completed,
        per_worker_completed,
        results_used: used,
        extra_for_decodability: used - needed,
        recovery_threshold: needed,
        decoded,
    })
}

/// Time of the `r`-th completion when `workers` nodes each run an
/// unbounded stream of tasks: the recovery time of any code whose every
/// `r` results suffice, such as the univariate scheme.
pub fn order_statistic_recovery(r: usize, workers: usize, model: &LatencyModel, seed: u64) -> f64 {
    assert!(r > 0 && workers > 0);
    // No worker contributes more than r of the first r completions.
    let mut times: Vec<f64> = (0..workers).flat_map(|w| model.completion_times(seed, w, r)).collect();
    times.sort_by(f64::total_cmp);
    times[r - 1]
}

/// Expected `r`-th order statistic of `n >= r` shifted exponentials,
/// `shift + (1/rate) sum_{j=n-r+1}^{n} 1/j`.
pub fn expected_order_statistic(r: usize, n: usize, shift: f64, rate: f64) -> Option<f64> {
    (r >= 1 && r <= n).then(|| shift + (n - r + 1..=n).map(|j| 1.0 / j as f64).sum::<f64>() / rate)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub plan_id: String,
    pub scheme: SchemeLabel,
    pub memory: Option<Memory>,
    pub workers: usize,
    pub seed: u64,
    /// `None` when the plan's results never reach full rank.
    pub recovery_time: Option<f64>,
    pub tasks_total: usize,
    pub tasks_wasted: usize,
    pub extra_for_decodability: Option<usize>,
}

pub const RUNS_CSV_HEADER: &str = "plan_id,scheme,memory,N,seed,recovery_time,tasks_total,tasks_wasted,extra_for_decodability";
pub const SUMMARY_CSV_HEADER: &str = "plan_id,scheme,memory,N,runs,decoded,mean,p50,p90,p99";

/// Runs every plan under every seed on a random chain drawn from the seed.
/// Plans that cannot decode are recorded, other errors abort the sweep.
/// Each distinct `(N, R_th^UV)` also gets a univariate baseline record; it
/// executes no coding and its task counts refer to the threshold alone.
pub fn sweep(
    plans: &[(String, StoragePlan)],
    model: &LatencyModel,
    seeds: &[u64],
    field: &PrimeField,
) -> Result<Vec<RunRecord>> {
    let mut records = Vec::new();
    let mut baselines = BTreeMap::new();
    for (plan_id, plan) in plans {
        let uv = crate::analysis::uv_metrics(plan.scheme()).recovery_threshold as usize;
        baselines.entry((plan.workers(), uv)).or_insert(());
        for &seed in seeds {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let chain = random_chain(plan.scheme(), field, &mut rng);
            let (recovery_time, tasks_wasted, extra) = match simulate(plan, &chain, model, seed, field) {
                Ok(o) => (Some(o.recovery_time), o.tasks_wasted, Some(o.extra_for_decodability)),
                Err(Error::NeverDecodable { .. }) => (None, 0, None),
                Err(e) => return Err(e),
            };
            records.push(RunRecord {
                plan_id: plan_id.clone(),
                scheme: plan.kind().into(),
                memory: Some(plan.memory()),
                workers: plan.workers(),
                seed,
                recovery_time,
                tasks_total: plan.total_tasks(),
                tasks_wasted,
                extra_for_decodability: extra,
            });
        }
    }
    for (workers, uv) in baselines.into_keys() {
        for &seed in seeds {
            records.push(RunRecord {
                plan_id: format!("uv-analytic-n{workers}-r{uv}"),
                scheme: SchemeLabel::Uv,
                memory: None,
                workers,
                seed,
                recovery_time: Some(order_statistic_recovery(uv, workers, model, seed)),
                tasks_total: uv,
                tasks_wasted: 0,
                extra_for_decodability: Some(0),
            });
        }
    }
    Ok(records)
}

fn fmt_opt<T: ToString>(v: Option<T>, none: &str) -> String {
    v.map_or_else(|| none.to_string(), |v| v.to_string())
}

pub fn runs_csv(records: &[RunRecord]) -> String {
    let mut out = format!("{RUNS_CSV_HEADER}\n");
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.plan_id,
            r.scheme,
            r.memory.map_or("-", Memory::as_str),
            r.workers,
            r.seed,
            fmt_opt(r.recovery_time.map(|t| format!("{t:.6}")), "never"),
            r.tasks_total,
            r.tasks_wasted,
            fmt_opt(r.extra_for_decodability, "-"),
        );
    }
    out
}

/// Nearest-rank percentile of sorted data, `q` in `(0, 100]`.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let rank = ((q / 100.0) * sorted.len() as f64).ceil().max(1.0) as usize;
    sorted[rank.min(sorted.len()) - 1]
}

#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub plan_id: String,
    pub scheme: SchemeLabel,
    pub memory: Option<Memory>,
    pub workers: usize,
    pub runs: usize,
    pub decoded: usize,
    /// Mean and nearest-rank p50, p90, p99 over decoded runs.
    pub stats: Option<[f64; 4]>,
}

/// One summary per plan id, in first-appearance order.
pub fn summarize(records: &[RunRecord]) -> Vec<Summary> {
    let mut order: Vec<&str> = Vec::new();
    for r in records {
        if !order.contains(&r.plan_id.as_str()) {
            order.push(&r.plan_id);
        }
    }
    order
        .into_iter()
        .map(|id| {
            let group: Vec<&RunRecord> = records.iter().filter(|r| r.plan_id == id).collect();
            let mut times: Vec<f64> = group.iter().filter_map(|r| r.recovery_time).collect();
            times.sort_by(f64::total_cmp);
            let stats = (!times.is_empty()).then(|| {
                let mean = times.iter().sum::<f64>() / times.len() as f64;
                [mean, percentile(&times, 50.0), percentile(&times, 90.0), percentile(&times, 99.0)]
            });
            let first = group[0];
            Summary {
                plan_id: id.to_string(),
                scheme: first.scheme,
                memory: first.memory,
                workers: first.workers,
                runs: group.len(),
                decoded: times.len(),
                stats,
            }
        })
        .collect()
}

pub fn summary_csv(summaries: &[Summary]) -> String {
    let mut out = format!("{SUMMARY_CSV_HEADER}\n");
    for s in summaries {
        let stats = match s.stats {
            Some(v) => v.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(","),
            None => "-,-,-,-".to_string(),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            s.plan_id,
            s.scheme,
            s.memory.map_or("-", Memory::as_str),
            s.workers,
            s.runs,
            s.decoded,
            stats
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::Fraction;
    use crate::chain::PartitionScheme;
    use crate::encoding::SchemeKind;
    use crate::placement::{plan_dedicated, plan_shared, GridConvention};

    fn setup(kind: SchemeKind, m: usize, workers: usize) -> (StoragePlan, BlockChain, PrimeField) {
        let f = PrimeField::default();
        let scheme = PartitionScheme::new(vec![2; m + 1], vec![2; m + 1]).unwrap();
        let plan = plan_shared(kind, &scheme, workers, 11, GridConvention::Minus, &f).unwrap();
        let chain = random_chain(&scheme, &f, &mut ChaCha8Rng::seed_from_u64(4));
        (plan, chain, f)
    }

    #[test]
    fn single_worker_deterministic() {
        let (plan, chain, f) = setup(SchemeKind::Mv1, 2, 1);
        let out = simulate(&plan, &chain, &LatencyModel::Deterministic { task_time: 0.5 }, 0, &f).unwrap();
        assert_eq!(out.recovery_time, 16.0 * 0.5);
        assert_eq!(out.tasks_wasted, 0);
        assert_eq!(out.per_worker_completed, vec![16]);
        assert_eq!(out.extra_for_decodability, 0);
    }

    #[test]
    fn four_workers_deterministic() {
        for (kind, m, r) in [(SchemeKind::Mv1, 2, 16usize), (SchemeKind::Mv2, 3, 36)] {
            let (plan, chain, f) = setup(kind, m, 4);
            let out = simulate(&plan, &chain, &LatencyModel::Deterministic { task_time: 1.0 }, 0, &f).unwrap();
            assert_eq!(out.recovery_time, r.div_ceil(4) as f64);
            assert_eq!(out.recovery_threshold, r);
            assert_eq!(out.tasks_completed, r);
            assert_eq!(out.extra_for_decodability, 0);
        }
    }

    #[test]
    fn runs_are_reproducible() {
        let (plan, chain, f) = setup(SchemeKind::Mv2, 2, 3);
        let model = LatencyModel::default();
        let a = simulate(&plan, &chain, &model, 9, &f).unwrap();
        let b = simulate(&plan, &chain, &model, 9, &f).unwrap();
        assert_eq!(a.recovery_time, b.recovery_time);
        assert_eq!(a.decoded, b.decoded);
        assert_eq!(a.tasks_wasted, b.tasks_wasted);
    }

    #[test]
    fn more_workers_never_slower_when_deterministic() {
        let mut last = f64::INFINITY;
        for n in 1..=8 {
            let (plan, chain, f) = setup(SchemeKind::Mv1, 2, n);
            let t = simulate(&plan, &chain, &LatencyModel::Deterministic { task_time: 1.0 }, 0, &f).unwrap().recovery_time;
            assert!(t <= last);
            last = t;
        }
    }

    #[test]
    fn dedicated_plan_runs() {
        let f = PrimeField::default();
        let scheme = PartitionScheme::new(vec![2; 3], vec![2; 3]).unwrap();
        let half = Fraction::new(1, 2);
        let plan = plan_dedicated(SchemeKind::Mv1, &scheme, 8, &[half, half], 3, &f).unwrap();
        let chain = random_chain(&scheme, &f, &mut ChaCha8Rng::seed_from_u64(1));
        let out = simulate(&plan, &chain, &LatencyModel::default(), 5, &f).unwrap();
        assert!(out.results_used >= 16);
    }

    #[test]
    fn order_statistics() {
        let det = LatencyModel::Deterministic { task_time: 2.0 };
        assert_eq!(order_statistic_recovery(9, 4, &det, 0), 6.0);
        assert_eq!(order_statistic_recovery(3, 5, &det, 0), 2.0);
        assert_eq!(expected_order_statistic(1, 1, 1.0, 1.0), Some(2.0));
        assert_eq!(expected_order_statistic(3, 2, 1.0, 1.0), None);
        // Sample mean approaches the closed form.
        let model = LatencyModel::default();
        let mean = (0..4000).map(|s| order_statistic_recovery(3, 6, &model, s)).sum::<f64>() / 4000.0;
        let exact = expected_order_statistic(3, 6, 1.0, 1.0).unwrap();
        assert!((mean - exact).abs() < 0.05, "{mean} vs {exact}");
    }

    #[test]
    fn sweep_and_csv() {
        let (plan, _, f) = setup(SchemeKind::Mv1, 2, 4);
        let records = sweep(&[("mv1-s".into(), plan)], &LatencyModel::Deterministic { task_time: 1.0 }, &[1, 2], &f).unwrap();
        assert_eq!(records.len(), 4);
        let csv = runs_csv(&records);
        assert!(csv.starts_with(RUNS_CSV_HEADER));
        assert!(csv.contains("mv1-s,MV1,S,4,1,4.000000,16,0,0"));
        let summary = summarize(&records);
        assert_eq!(summary.len(), 2);
        assert_eq!(summary[0].stats, Some([4.0; 4]));
        assert!(summary_csv(&summary).lines().nth(1).unwrap().starts_with("mv1-s,MV1,S,4,2,2,4.000000"));
    }

    #[test]
    fn percentile_nearest_rank() {
        let v: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(percentile(&v, 50.0), 5.0);
        assert_eq!(percentile(&v, 90.0), 9.0);
        assert_eq!(percentile(&v, 99.0), 10.0);
        assert_eq!(percentile(&[3.0], 50.0), 3.0);
    }

    #[test]
    fn rejects_bad_model() {
        let (plan, chain, f) = setup(SchemeKind::Mv1, 2, 1);
        let bad = LatencyModel::ShiftedExponential { shift: 1.0, rate: 0.0 };
        assert!(matches!(simulate(&plan, &chain, &bad, 0, &f), Err(Error::InvalidParameter(_))));
    }
}
