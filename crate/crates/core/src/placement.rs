//! Assignment of evaluation points to workers.
//!
//! Each polynomial variable gets a pool of distinct nonzero field elements
//! drawn from a seeded stream. Shared plans use the first `A_k` elements of
//! every pool and spread the full grid round-robin over the workers.
//! Dedicated plans give worker `w` its own contiguous chunk of `s_k A_k`
//! elements per axis, so coded blocks are never shared between workers.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analysis::{check_fractions, Fraction, Memory};
use crate::chain::PartitionScheme;
use crate::encoding::{EvalPoint, SchemeKind};
use crate::error::{Error, Result};
use crate::field::{FieldElement, PrimeField};
use crate::index::MixedRadix;

/// Inner MV2 axes hold `2p_i - 1` points (`Minus`) or `2p_i + 1` (`Plus`).
/// MV1 axes and the outer MV2 axes are unaffected.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum GridConvention {
    #[default]
    Minus,
    Plus,
}

impl GridConvention {
    pub fn axis_sizes(self, kind: SchemeKind, scheme: &PartitionScheme) -> Vec<usize> {
        let mut sizes = kind.axis_sizes(scheme);
        if self == GridConvention::Plus && kind == SchemeKind::Mv2 {
            let last = sizes.len() - 1;
            for s in &mut sizes[1..last] {
                *s += 2;
            }
        }
        sizes
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WorkerAssignment {
    pub worker: usize,
    /// Per-axis elements this worker may evaluate at.
    pub axis_points: Vec<Vec<FieldElement>>,
    pub tasks: Vec<EvalPoint>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StoragePlan {
    kind: SchemeKind,
    scheme: PartitionScheme,
    memory: Memory,
    fractions: Option<Vec<Fraction>>,
    axis_sizes: Vec<usize>,
    assignments: Vec<WorkerAssignment>,
}

/// Fields up to this size are sampled by shuffling every nonzero element.
const SMALL_FIELD: u64 = 1 << 20;

/// `count` distinct nonzero elements for variable `axis`. A longer pool for
/// the same `(seed, axis)` extends a shorter one.
pub fn point_pool(field: &PrimeField, seed: u64, axis: usize, count: usize) -> Result<Vec<FieldElement>> {
    if count as u64 > field.modulus() - 1 {
        return Err(Error::FieldTooSmall { modulus: field.modulus(), requested: count });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(axis as u64);
    if field.modulus() <= SMALL_FIELD {
        let mut all: Vec<u64> = (1..field.modulus()).collect();
        all.shuffle(&mut rng);
        return Ok(all[..count].iter().map(|&v| field.elem(v)).collect());
    }
    let mut seen = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x = field.random_nonzero(&mut rng);
        if seen.insert(x) {
            out.push(x);
        }
    }
    Ok(out)
}

fn grid(axes: &[Vec<FieldElement>]) -> Vec<EvalPoint> {
    let radices: Vec<usize> = axes.iter().map(Vec::len).collect();
    MixedRadix::new(&radices)
        .map(|t| EvalPoint::new(t.iter().enumerate().map(|(k, &j)| axes[k][j]).collect()))
        .collect()
}

/// Full grid, task `t` (in lexicographic order) going to worker `t mod N`.
pub fn plan_shared(
    kind: SchemeKind,
    scheme: &PartitionScheme,
    workers: usize,
    seed: u64,
    convention: GridConvention,
    field: &PrimeField,
) -> Result<StoragePlan> {
    if workers == 0 {
        return Err(Error::InvalidParameter("need at least one worker".into()));
    }
    let axis_sizes = convention.axis_sizes(kind, scheme);
    let axes = axis_sizes
        .iter()
        .enumerate()
        .map(|(k, &a)| point_pool(field, seed, k, a))
        .collect::<Result<Vec<_>>>()?;
    let mut assignments: Vec<WorkerAssignment> = (0..workers)
        .map(|w| WorkerAssignment { worker: w, axis_points: axes.clone(), tasks: Vec::new() })
        .collect();
    for (t, point) in grid(&axes).into_iter().enumerate() {
        assignments[t % workers].tasks.push(point);
    }
    Ok(StoragePlan { kind, scheme: scheme.clone(), memory: Memory::Shared, fractions: None, axis_sizes, assignments })
}

/// Disjoint per-worker grids of `s_k A_k` points per axis.
pub fn plan_dedicated(
    kind: SchemeKind,
    scheme: &PartitionScheme,
    workers: usize,
    fractions: &[Fraction],
    seed: u64,
    field: &PrimeField,
) -> Result<StoragePlan> {
    let axis_sizes = kind.axis_sizes(scheme);
    check_fractions(workers as u64, fractions, axis_sizes.len())?;
    let chunk = axis_sizes
        .iter()
        .zip(fractions)
        .enumerate()
        .map(|(axis, (&a, &s))| {
            let share = s * Fraction::from_integer(a as u64);
            if share.is_integer() {
                Ok(*share.numer() as usize)
            } else {
                Err(Error::NonIntegralAssignment { axis, fraction: s.to_string(), size: a })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let pools = chunk
        .iter()
        .enumerate()
        .map(|(k, &c)| point_pool(field, seed, k, c * workers))
        .collect::<Result<Vec<_>>>()?;
    let assignments = (0..workers)
        .map(|w| {
            let axis_points: Vec<Vec<FieldElement>> =
                pools.iter().zip(&chunk).map(|(pool, &c)| pool[w * c..(w + 1) * c].to_vec()).collect();
            let tasks = grid(&axis_points);
            WorkerAssignment { worker: w, axis_points, tasks }
        })
        .collect();
    Ok(StoragePlan {
        kind,
        scheme: scheme.clone(),
        memory: Memory::Dedicated,
        fractions: Some(fractions.to_vec()),
        axis_sizes,
        assignments,
    })
}

impl StoragePlan {
    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn scheme(&self) -> &PartitionScheme {
        &self.scheme
    }

    pub fn memory(&self) -> Memory {
        self.memory
    }

    pub fn workers(&self) -> usize {
        self.assignments.len()
    }

    pub fn fractions(&self) -> Option<&[Fraction]> {
        self.fractions.as_deref()
    }

    /// Grid axis sizes the plan was built from.
    pub fn axis_sizes(&self) -> &[usize] {
        &self.axis_sizes
    }

    pub fn assignments(&self) -> &[WorkerAssignment] {
        &self.assignments
    }

    pub fn tasks_for(&self, worker: usize) -> &[EvalPoint] {
        &self.assignments[worker].tasks
    }

    pub fn total_tasks(&self) -> usize {
        self.assignments.iter().map(|a| a.tasks.len()).sum()
    }

    /// Every `(worker, point)` pair, workers in order.
    pub fn enumerate_tasks(&self) -> Vec<(usize, EvalPoint)> {
        self.assignments
            .iter()
            .flat_map(|a| a.tasks.iter().map(move |p| (a.worker, p.clone())))
            .collect()
    }

    fn block_key(&self, i: usize, point: &EvalPoint) -> Vec<FieldElement> {
        match self.kind {
            SchemeKind::Mv1 => vec![point.coords[i]],
            SchemeKind::Mv2 => vec![point.coords[i], point.coords[i + 1]],
        }
    }

    /// Number of coded blocks of each `M_i` that must be stored: distinct
    /// blocks overall when memory is shared, summed over workers otherwise.
    pub fn storage_thresholds(&self) -> Vec<usize> {
        (0..self.scheme.m())
            .map(|i| {
                let per_worker = |a: &WorkerAssignment| -> BTreeSet<Vec<FieldElement>> {
                    a.tasks.iter().map(|p| self.block_key(i, p)).collect()
                };
                match self.memory {
                    Memory::Shared => {
                        self.assignments.iter().flat_map(per_worker).collect::<BTreeSet<_>>().len()
                    }
                    Memory::Dedicated => self.assignments.iter().map(|a| per_worker(a).len()).sum(),
                }
            })
            .collect()
    }

    /// True when no two workers hold a common point on any axis.
    pub fn is_disjoint(&self) -> bool {
        (0..self.axis_sizes.len()).all(|k| {
            let mut seen = HashSet::new();
            self.assignments.iter().all(|a| a.axis_points[k].iter().all(|x| seen.insert(*x)))
        })
    }
}

impl fmt::Display for StoragePlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "scheme {} ({} memory), {} workers", self.kind, self.memory, self.workers())?;
        writeln!(f, "partitions {:?}, grid axes {:?}", self.scheme.parts(), self.axis_sizes)?;
        if let Some(s) = &self.fractions {
            let s: Vec<String> = s.iter().map(ToString::to_string).collect();
            writeln!(f, "storage fractions [{}]", s.join(", "))?;
        }
        writeln!(f, "total tasks {}", self.total_tasks())?;
        writeln!(f, "storage thresholds {:?}", self.storage_thresholds())?;
        for a in &self.assignments {
            writeln!(f, "  worker {}: {} tasks", a.worker, a.tasks.len())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn equal(p: usize, m: usize) -> PartitionScheme {
        PartitionScheme::new(vec![p; m + 1], vec![p; m + 1]).unwrap()
    }

    #[test]
    fn shared_examples() {
        let f = PrimeField::default();
        let mv1 = plan_shared(SchemeKind::Mv1, &equal(2, 2), 3, 1, GridConvention::Minus, &f).unwrap();
        assert_eq!(mv1.storage_thresholds(), vec![4, 4]);
        assert_eq!(mv1.total_tasks(), 16);
        assert_eq!(mv1.tasks_for(0).len(), 6);
        assert_eq!(mv1.tasks_for(2).len(), 5);
        let mv2 = plan_shared(SchemeKind::Mv2, &equal(2, 3), 4, 1, GridConvention::Minus, &f).unwrap();
        assert_eq!(mv2.storage_thresholds(), vec![6, 9, 6]);
        assert_eq!(mv2.total_tasks(), 36);
        let plus = plan_shared(SchemeKind::Mv2, &equal(2, 3), 4, 1, GridConvention::Plus, &f).unwrap();
        assert_eq!(plus.axis_sizes(), &[2, 5, 5, 2]);
    }

    #[test]
    fn dedicated_example() {
        let f = PrimeField::default();
        let half = Fraction::new(1, 2);
        let plan = plan_dedicated(SchemeKind::Mv1, &equal(2, 2), 4, &[half, half], 7, &f).unwrap();
        assert!(plan.assignments().iter().all(|a| a.tasks.len() == 4));
        assert_eq!(plan.storage_thresholds(), vec![8, 8]);
        assert!(plan.is_disjoint());
        assert_eq!(plan.total_tasks(), 16);
    }

    #[test]
    fn dedicated_errors() {
        let f = PrimeField::default();
        let half = Fraction::new(1, 2);
        let third = Fraction::new(1, 3);
        assert!(matches!(
            plan_dedicated(SchemeKind::Mv1, &equal(2, 2), 3, &[half, half], 0, &f),
            Err(Error::InfeasiblePlan { .. })
        ));
        assert!(matches!(
            plan_dedicated(SchemeKind::Mv1, &equal(2, 2), 9, &[third, third], 0, &f),
            Err(Error::NonIntegralAssignment { axis: 0, .. })
        ));
        let tiny = PrimeField::new(7).unwrap();
        assert!(matches!(
            plan_shared(SchemeKind::Mv1, &equal(3, 2), 1, 0, GridConvention::Minus, &tiny),
            Err(Error::FieldTooSmall { modulus: 7, requested: 9 })
        ));
    }

    #[test]
    fn single_full_worker_matches_shared_points() {
        let f = PrimeField::default();
        let s = equal(2, 3);
        let shared = plan_shared(SchemeKind::Mv2, &s, 1, 5, GridConvention::Minus, &f).unwrap();
        let ded = plan_dedicated(SchemeKind::Mv2, &s, 1, &[Fraction::from_integer(1); 4], 5, &f).unwrap();
        assert_eq!(shared.tasks_for(0), ded.tasks_for(0));
    }

    #[test]
    fn pools_are_distinct_nonzero_and_prefix_stable() {
        let f = PrimeField::new(101).unwrap();
        let long = point_pool(&f, 3, 1, 60).unwrap();
        let short = point_pool(&f, 3, 1, 10).unwrap();
        assert_eq!(&long[..10], &short[..]);
        assert!(long.iter().all(|x| !x.is_zero()));
        assert_eq!(long.iter().collect::<HashSet<_>>().len(), 60);
        assert_eq!(point_pool(&f, 3, 0, 100).unwrap().len(), 100);
    }

    #[test]
    fn display_mentions_counts() {
        let f = PrimeField::default();
        let plan = plan_shared(SchemeKind::Mv1, &equal(2, 2), 2, 0, GridConvention::Minus, &f).unwrap();
        let text = plan.to_string();
        assert!(text.contains("total tasks 16"));
        assert!(text.contains("worker 1: 8 tasks"));
    }
}
