//! Recovery thresholds, storage thresholds and overheads.
//!
//! Everything in [`SchemeMetrics`] is exact: thresholds are integers or
//! rationals and `delta + 1 == R_th / K` holds with no rounding. The
//! figure-data path at the bottom switches to `f64` because the symmetric
//! storage fractions `N^{-1/m}` are irrational in general.

use std::fmt;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Zero};

use crate::chain::PartitionScheme;
use crate::encoding::SchemeKind;
use crate::error::{Error, Result};

/// Storage fraction `s_i` as an exact rational.
pub type Fraction = Ratio<u64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeLabel {
    Uv,
    Mv1,
    Mv2,
}

impl SchemeLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            SchemeLabel::Uv => "UV",
            SchemeLabel::Mv1 => "MV1",
            SchemeLabel::Mv2 => "MV2",
        }
    }
}

impl From<SchemeKind> for SchemeLabel {
    fn from(kind: SchemeKind) -> Self {
        match kind {
            SchemeKind::Mv1 => SchemeLabel::Mv1,
            SchemeKind::Mv2 => SchemeLabel::Mv2,
        }
    }
}

impl fmt::Display for SchemeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Memory {
    Shared,
    Dedicated,
}

impl Memory {
    pub fn as_str(self) -> &'static str {
        match self {
            Memory::Shared => "S",
            Memory::Dedicated => "D",
        }
    }
}

impl fmt::Display for Memory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Memory::Shared => "shared",
            Memory::Dedicated => "dedicated",
        })
    }
}

/// How coded blocks are stored across workers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StorageMode {
    Shared,
    /// `workers` nodes, node storing fraction `fractions[k]` of axis `k`.
    Dedicated { workers: u64, fractions: Vec<Fraction> },
}

impl StorageMode {
    pub fn memory(&self) -> Memory {
        match self {
            StorageMode::Shared => Memory::Shared,
            StorageMode::Dedicated { .. } => Memory::Dedicated,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemeMetrics {
    pub label: SchemeLabel,
    pub memory: Option<Memory>,
    pub recovery_threshold: u128,
    pub partition_level: u128,
    pub storage_thresholds: Vec<BigRational>,
    pub delta: BigRational,
    pub storage_overheads: Vec<BigRational>,
}

fn rational(n: u128) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn fraction(f: Fraction) -> BigRational {
    BigRational::new(BigInt::from(*f.numer()), BigInt::from(*f.denom()))
}

impl SchemeMetrics {
    fn build(
        label: SchemeLabel,
        memory: Option<Memory>,
        scheme: &PartitionScheme,
        recovery_threshold: u128,
        storage_thresholds: Vec<BigRational>,
    ) -> Self {
        let partition_level = scheme.partition_level();
        let delta = rational(recovery_threshold) / rational(partition_level) - BigRational::one();
        let p = scheme.parts();
        let storage_overheads = storage_thresholds
            .iter()
            .enumerate()
            .map(|(i, s)| s / rational((p[i] * p[i + 1]) as u128) - BigRational::one())
            .collect();
        Self { label, memory, recovery_threshold, partition_level, storage_thresholds, delta, storage_overheads }
    }
}

/// Closed-form metrics of the univariate scheme:
/// `R_th = prod_{j=0}^{m} p_j + prod_{j=1}^{m-1} p_j - 1`, `S_th,i = R_th`.
pub fn uv_metrics(scheme: &PartitionScheme) -> SchemeMetrics {
    let p = scheme.parts();
    let m = scheme.m();
    let all: u128 = p.iter().map(|&x| x as u128).product();
    let inner: u128 = p[1..m].iter().map(|&x| x as u128).product();
    let r_th = all + inner - 1;
    SchemeMetrics::build(SchemeLabel::Uv, None, scheme, r_th, vec![rational(r_th); m])
}

/// Per-variable minimal grid sizes, `A_k`. Their product is `R_th`.
pub fn axis_sizes(kind: SchemeKind, scheme: &PartitionScheme) -> Vec<u128> {
    let p = scheme.parts();
    let m = scheme.m();
    match kind {
        SchemeKind::Mv1 => (0..m).map(|i| (p[i] * p[i + 1]) as u128).collect(),
        SchemeKind::Mv2 => (0..=m)
            .map(|i| if i == 0 || i == m { p[i] as u128 } else { (2 * p[i] - 1) as u128 })
            .collect(),
    }
}

/// `R_th^{MV1} = prod p_i p_{i+1}`, `R_th^{MV2} = p_0 p_m prod (2 p_i - 1)`.
pub fn recovery_threshold(kind: SchemeKind, scheme: &PartitionScheme) -> u128 {
    axis_sizes(kind, scheme).iter().product()
}

/// Validates storage fractions: right count, each in `(0, 1]`, and
/// `N prod s_i >= 1`. Returns `N prod s_i`.
pub fn check_fractions(workers: u64, fractions: &[Fraction], expected_len: usize) -> Result<Fraction> {
    if fractions.len() != expected_len {
        return Err(Error::InvalidParameter(format!(
            "{} storage fractions given, scheme needs {expected_len}",
            fractions.len()
        )));
    }
    if workers == 0 {
        return Err(Error::InvalidParameter("need at least one worker".into()));
    }
    if let Some(bad) = fractions.iter().find(|s| s.is_zero() || **s > Fraction::one()) {
        return Err(Error::InvalidParameter(format!("storage fraction {bad} outside (0, 1]")));
    }
    // Reduce as we go; u64 overflow would need absurd inputs.
    let product = fractions.iter().fold(Fraction::from_integer(workers), |acc, s| acc * s);
    if product < Fraction::one() {
        return Err(Error::InfeasiblePlan { product: product.to_string() });
    }
    Ok(product)
}

fn mv_metrics(kind: SchemeKind, scheme: &PartitionScheme, mode: &StorageMode) -> Result<SchemeMetrics> {
    let m = scheme.m();
    let axes = axis_sizes(kind, scheme);
    let r_th = axes.iter().product();
    // Coded blocks of M_i are indexed by x_i (MV1) or (x_i, x_{i+1}) (MV2).
    let per_matrix_axes = |i: usize| -> Vec<usize> {
        match kind {
            SchemeKind::Mv1 => vec![i],
            SchemeKind::Mv2 => vec![i, i + 1],
        }
    };
    let storage: Vec<BigRational> = match mode {
        StorageMode::Shared => (0..m)
            .map(|i| per_matrix_axes(i).iter().map(|&k| rational(axes[k])).product())
            .collect(),
        StorageMode::Dedicated { workers, fractions } => {
            check_fractions(*workers, fractions, axes.len())?;
            (0..m)
                .map(|i| {
                    per_matrix_axes(i)
                        .iter()
                        .map(|&k| fraction(fractions[k]) * rational(axes[k]))
                        .fold(rational(*workers as u128), |acc, x| acc * x)
                })
                .collect()
        }
    };
    Ok(SchemeMetrics::build(kind.into(), Some(mode.memory()), scheme, r_th, storage))
}

/// MV1: `S_th,i = p_i p_{i+1}` shared, `N s_i p_i p_{i+1}` dedicated.
pub fn mv1_metrics(scheme: &PartitionScheme, mode: &StorageMode) -> Result<SchemeMetrics> {
    mv_metrics(SchemeKind::Mv1, scheme, mode)
}

/// MV2: `S_th,i = A_i A_{i+1}` shared with `A = (p_0, 2p_1-1, .., 2p_{m-1}-1, p_m)`,
/// and `N s_i A_i s_{i+1} A_{i+1}` dedicated.
pub fn mv2_metrics(scheme: &PartitionScheme, mode: &StorageMode) -> Result<SchemeMetrics> {
    mv_metrics(SchemeKind::Mv2, scheme, mode)
}

pub fn mv_metrics_for(kind: SchemeKind, scheme: &PartitionScheme, mode: &StorageMode) -> Result<SchemeMetrics> {
    mv_metrics(kind, scheme, mode)
}

/// Equal-partition computation overheads in their simplified closed forms.
pub mod equal_partition {
    use super::*;

    fn inv_pow(p: u64, e: u32) -> BigRational {
        BigRational::new(BigInt::one(), BigInt::from(p).pow(e))
    }

    fn int(v: u64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }

    /// `p^{-2} - p^{-(m+1)}`.
    pub fn uv_delta(p: u64, m: u32) -> BigRational {
        inv_pow(p, 2) - inv_pow(p, m + 1)
    }

    /// `p^{m-1} + p^{m-3} - p^{-2} - 1`.
    pub fn uv_delta_s(p: u64, m: u32) -> BigRational {
        let p_m3 = if m >= 3 { int(p.pow(m - 3)) } else { inv_pow(p, 3 - m) };
        int(p.pow(m - 1)) + p_m3 - inv_pow(p, 2) - BigRational::one()
    }

    /// `p^{m-1} - 1`.
    pub fn mv1_delta(p: u64, m: u32) -> BigRational {
        int(p.pow(m - 1)) - BigRational::one()
    }

    /// `(2 - 1/p)^{m-1} - 1`.
    pub fn mv2_delta(p: u64, m: u32) -> BigRational {
        let base = int(2) - inv_pow(p, 1);
        num_traits::pow(base, (m - 1) as usize) - BigRational::one()
    }

    /// `(2 - 1/p)^2 - 1`, the shared-memory overhead of an inner matrix.
    pub fn mv2_delta_s_shared(p: u64) -> BigRational {
        let base = int(2) - inv_pow(p, 1);
        &base * &base - BigRational::one()
    }
}

// ---------------------------------------------------------------------------
// Figure and table data
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Figure {
    /// Computation overhead against partitions.
    Fig2,
    /// Storage overhead against partitions at fixed `N`.
    Fig3,
    /// Storage overhead against workers at fixed `p`.
    Fig4,
    /// Leading-order overhead expressions.
    Table1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    Delta,
    DeltaS,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Delta => "delta",
            Metric::DeltaS => "delta_s",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FigureRanges {
    pub ms: Vec<usize>,
    pub ps: Vec<u64>,
    pub ns: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FigureRow {
    pub scheme: SchemeLabel,
    pub memory: Option<Memory>,
    pub m: usize,
    pub p: u64,
    pub n: Option<u64>,
    pub metric: Metric,
    pub value_percent: f64,
}

pub const FIGURE_CSV_HEADER: &str = "scheme,memory,m,p,N,metric,value_percent";

/// Overheads with all `p_i = p`, without integrality constraints on the
/// storage fractions. Storage entries refer to an inner matrix (`i = 1`)
/// when the chain has one, otherwise to `M_0`.
pub mod curves {
    fn powf(x: f64, e: f64) -> f64 {
        x.powf(e)
    }

    pub fn uv_delta(p: f64, m: usize) -> f64 {
        let all = p.powi(m as i32 + 1);
        let inner = p.powi(m as i32 - 1);
        (all + inner - 1.0) / all - 1.0
    }

    pub fn uv_delta_s(p: f64, m: usize) -> f64 {
        let r_th = p.powi(m as i32 + 1) + p.powi(m as i32 - 1) - 1.0;
        r_th / (p * p) - 1.0
    }

    pub fn mv1_delta(p: f64, m: usize) -> f64 {
        // R = p^{2m}, K = p^{m+1}
        p.powi(2 * m as i32) / p.powi(m as i32 + 1) - 1.0
    }

    pub fn mv1_delta_s_dedicated(n: f64, m: usize) -> f64 {
        // N s p^2 / p^2 with s = N^{-1/m}
        n * powf(n, -1.0 / m as f64) - 1.0
    }

    pub fn mv2_delta(p: f64, m: usize) -> f64 {
        let r_th = p * p * (2.0 * p - 1.0).powi(m as i32 - 1);
        r_th / p.powi(m as i32 + 1) - 1.0
    }

    fn mv2_storage_axes(p: f64, m: usize) -> (f64, f64) {
        let inner = 2.0 * p - 1.0;
        if m >= 3 {
            (inner, inner)
        } else {
            (p, inner)
        }
    }

    pub fn mv2_delta_s_shared(p: f64, m: usize) -> f64 {
        let (a, b) = mv2_storage_axes(p, m);
        a * b / (p * p) - 1.0
    }

    pub fn mv2_delta_s_dedicated(p: f64, n: f64, m: usize) -> f64 {
        let (a, b) = mv2_storage_axes(p, m);
        let s = powf(n, -1.0 / (m as f64 + 1.0));
        n * s * a * s * b / (p * p) - 1.0
    }
}

fn push(rows: &mut Vec<FigureRow>, scheme: SchemeLabel, memory: Option<Memory>, m: usize, p: u64, n: Option<u64>, metric: Metric, value: f64) {
    rows.push(FigureRow { scheme, memory, m, p, n, metric, value_percent: 100.0 * value });
}

fn storage_rows(rows: &mut Vec<FigureRow>, m: usize, p: u64, n: u64) {
    let (pf, nf) = (p as f64, n as f64);
    let n = Some(n);
    push(rows, SchemeLabel::Uv, None, m, p, n, Metric::DeltaS, curves::uv_delta_s(pf, m));
    push(rows, SchemeLabel::Mv1, Some(Memory::Shared), m, p, n, Metric::DeltaS, 0.0);
    push(rows, SchemeLabel::Mv1, Some(Memory::Dedicated), m, p, n, Metric::DeltaS, curves::mv1_delta_s_dedicated(nf, m));
    push(rows, SchemeLabel::Mv2, Some(Memory::Shared), m, p, n, Metric::DeltaS, curves::mv2_delta_s_shared(pf, m));
    push(rows, SchemeLabel::Mv2, Some(Memory::Dedicated), m, p, n, Metric::DeltaS, curves::mv2_delta_s_dedicated(pf, nf, m));
}

fn sorted<T: Copy + Ord>(v: &[T]) -> Vec<T> {
    let mut out = v.to_vec();
    out.sort_unstable();
    out.dedup();
    out
}

/// Rows for one figure or table, ordered by `(m, p, N)` then scheme.
pub fn emit_figure_data(which: Figure, ranges: &FigureRanges) -> Result<Vec<FigureRow>> {
    let ms = sorted(&ranges.ms);
    let ps = sorted(&ranges.ps);
    let ns = sorted(&ranges.ns);
    if ms.is_empty() || ps.is_empty() || (which != Figure::Fig2 && ns.is_empty()) {
        return Err(Error::InvalidParameter("empty parameter range".into()));
    }
    if ms.iter().any(|&m| m < 2) || ps.contains(&0) || ns.contains(&0) {
        return Err(Error::InvalidParameter("need m >= 2, p >= 1 and N >= 1".into()));
    }
    let mut rows = Vec::new();
    for &m in &ms {
        for &p in &ps {
            let pf = p as f64;
            match which {
                Figure::Fig2 => {
                    push(&mut rows, SchemeLabel::Uv, None, m, p, None, Metric::Delta, curves::uv_delta(pf, m));
                    push(&mut rows, SchemeLabel::Mv1, None, m, p, None, Metric::Delta, curves::mv1_delta(pf, m));
                    push(&mut rows, SchemeLabel::Mv2, None, m, p, None, Metric::Delta, curves::mv2_delta(pf, m));
                }
                Figure::Fig3 | Figure::Fig4 => {
                    for &n in &ns {
                        storage_rows(&mut rows, m, p, n);
                    }
                }
                Figure::Table1 => {
                    for &n in &ns {
                        table_rows(&mut rows, m, p, n);
                    }
                }
            }
        }
    }
    Ok(rows)
}

/// Leading-order terms: UV `p^-2`, `p^{m-1}`; MV1 `p^{m-1}`, `0`,
/// `N^{(m-1)/m} - 1`; MV2 `2^{m-1} - 1`, `2^2 - 1`, `2^2 N^{(m-1)/(m+1)} - 1`.
fn table_rows(rows: &mut Vec<FigureRow>, m: usize, p: u64, n: u64) {
    let (pf, nf, mf) = (p as f64, n as f64, m as f64);
    let n = Some(n);
    let grow = pf.powi(m as i32 - 1);
    push(rows, SchemeLabel::Uv, None, m, p, n, Metric::Delta, pf.powi(-2));
    push(rows, SchemeLabel::Uv, Some(Memory::Shared), m, p, n, Metric::DeltaS, grow);
    push(rows, SchemeLabel::Uv, Some(Memory::Dedicated), m, p, n, Metric::DeltaS, grow);
    push(rows, SchemeLabel::Mv1, None, m, p, n, Metric::Delta, grow);
    push(rows, SchemeLabel::Mv1, Some(Memory::Shared), m, p, n, Metric::DeltaS, 0.0);
    push(rows, SchemeLabel::Mv1, Some(Memory::Dedicated), m, p, n, Metric::DeltaS, nf.powf((mf - 1.0) / mf) - 1.0);
    push(rows, SchemeLabel::Mv2, None, m, p, n, Metric::Delta, 2f64.powi(m as i32 - 1) - 1.0);
    push(rows, SchemeLabel::Mv2, Some(Memory::Shared), m, p, n, Metric::DeltaS, 3.0);
    push(rows, SchemeLabel::Mv2, Some(Memory::Dedicated), m, p, n, Metric::DeltaS, 4.0 * nf.powf((mf - 1.0) / (mf + 1.0)) - 1.0);
}

/// CSV with the mandatory header; `N` is blank for computation overheads.
pub fn figure_csv(rows: &[FigureRow]) -> String {
    let mut out = String::from(FIGURE_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let memory = r.memory.map_or("-", Memory::as_str);
        let n = r.n.map_or(String::new(), |n| n.to_string());
        let _ = writeln!(out, "{},{},{},{},{},{},{:.6}", r.scheme, memory, r.m, r.p, n, r.metric.as_str(), r.value_percent);
    }
    out
}
