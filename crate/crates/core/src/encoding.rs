//! Coded-block generation for the two multivariate schemes.
//!
//! * `MV1` encodes `M_i` in its own variable `x_i`, placing block
//!   `(b, b')` at exponent `p_{i+1} b + b'`.
//! * `MV2` lets `M_i` and `M_{i+1}` share `x_{i+1}`: block `(b, b')` of
//!   `M_i` carries `x_i^{p_i - 1 - b} x_{i+1}^{b'}`, so in the product the
//!   exponent of every inner variable is `p_i - 1` exactly when the inner
//!   indices line up.

use std::fmt;
use std::str::FromStr;

use crate::chain::{BlockChain, PartitionScheme};
use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldMatrix, PrimeField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeKind {
    Mv1,
    Mv2,
}

impl SchemeKind {
    /// Number of polynomial variables for a chain of `m` matrices.
    pub fn num_variables(self, m: usize) -> usize {
        match self {
            SchemeKind::Mv1 => m,
            SchemeKind::Mv2 => m + 1,
        }
    }

    /// Degree of the product polynomial in each variable.
    pub fn degrees(self, scheme: &PartitionScheme) -> Vec<usize> {
        let p = scheme.parts();
        let m = scheme.m();
        match self {
            SchemeKind::Mv1 => (0..m).map(|i| p[i] * p[i + 1] - 1).collect(),
            SchemeKind::Mv2 => (0..=m)
                .map(|i| if i == 0 || i == m { p[i] - 1 } else { 2 * p[i] - 2 })
                .collect(),
        }
    }

    /// Minimal grid axis sizes, `degree + 1` per variable.
    pub fn axis_sizes(self, scheme: &PartitionScheme) -> Vec<usize> {
        self.degrees(scheme).into_iter().map(|d| d + 1).collect()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SchemeKind::Mv1 => "mv1",
            SchemeKind::Mv2 => "mv2",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mv1" => Ok(SchemeKind::Mv1),
            "mv2" => Ok(SchemeKind::Mv2),
            other => Err(Error::Parse(format!("unknown scheme {other:?} (expected mv1 or mv2)"))),
        }
    }
}

/// Evaluation point `x = (x_0, ..)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EvalPoint {
    pub coords: Vec<FieldElement>,
}

impl EvalPoint {
    pub fn new(coords: Vec<FieldElement>) -> Self {
        Self { coords }
    }

    pub fn values(&self) -> Vec<u64> {
        self.coords.iter().map(|c| c.value()).collect()
    }
}

/// One subtask: a point together with the `m` coded blocks evaluated there.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodedTask {
    pub kind: SchemeKind,
    pub point: EvalPoint,
    pub coded_blocks: Vec<FieldMatrix>,
}

fn check_matrix_index(chain: &BlockChain, i: usize) -> Result<()> {
    let m = chain.scheme().m();
    if i >= m {
        return Err(Error::IndexOutOfRange(format!("matrix index {i} in a chain of {m}")));
    }
    Ok(())
}

/// `sum_{b, b'} M_i^{(b, b')} x^{p_{i+1} b + b'}`.
///
/// Exponents follow the row-major block order, so this is a single Horner
/// pass over the blocks from last to first.
pub fn encode_mv1_block(chain: &BlockChain, i: usize, x: FieldElement, field: &PrimeField) -> Result<FieldMatrix> {
    check_matrix_index(chain, i)?;
    let blocks = chain.blocks_of(i);
    let mut acc = blocks.last().expect("at least one block").clone();
    for block in blocks.iter().rev().skip(1) {
        acc.horner_step(x, block, field);
    }
    Ok(acc)
}

/// `sum_{b, b'} M_i^{(b, b')} x_i^{p_i - 1 - b} x_{i+1}^{b'}`.
pub fn encode_mv2_block(
    chain: &BlockChain,
    i: usize,
    x_i: FieldElement,
    x_next: FieldElement,
    field: &PrimeField,
) -> Result<FieldMatrix> {
    check_matrix_index(chain, i)?;
    let parts = chain.scheme().parts();
    let (rows, cols) = chain.scheme().block_shape(i);
    let mut outer = FieldMatrix::zeros(rows, cols);
    // b = 0 carries the highest power of x_i, so feed rows in ascending order.
    for b in 0..parts[i] {
        let mut inner = chain.block(i, b, parts[i + 1] - 1).clone();
        for b2 in (0..parts[i + 1] - 1).rev() {
            inner.horner_step(x_next, chain.block(i, b, b2), field);
        }
        outer.horner_step(x_i, &inner, field);
    }
    Ok(outer)
}

/// Coded blocks of every matrix of the chain at `point`.
pub fn encode_task(chain: &BlockChain, kind: SchemeKind, point: &EvalPoint, field: &PrimeField) -> Result<CodedTask> {
    let m = chain.scheme().m();
    let expected = kind.num_variables(m);
    if point.coords.len() != expected {
        return Err(Error::PointArityMismatch { expected, got: point.coords.len() });
    }
    let x = &point.coords;
    let coded_blocks = (0..m)
        .map(|i| match kind {
            SchemeKind::Mv1 => encode_mv1_block(chain, i, x[i], field),
            SchemeKind::Mv2 => encode_mv2_block(chain, i, x[i], x[i + 1], field),
        })
        .collect::<Result<_>>()?;
    Ok(CodedTask { kind, point: point.clone(), coded_blocks })
}

/// What a worker does with a task: multiply its coded blocks.
pub fn worker_compute(task: &CodedTask, field: &PrimeField) -> Result<FieldMatrix> {
    let mut blocks = task.coded_blocks.iter();
    let first = blocks
        .next()
        .ok_or_else(|| Error::ChainShapeMismatch("task carries no blocks".into()))?
        .clone();
    blocks.try_fold(first, |acc, b| {
        acc.mat_mul(b, field).map_err(|_| {
            Error::ChainShapeMismatch(format!("coded blocks {:?} and {:?} do not chain", acc.shape(), b.shape()))
        })
    })
}

impl CodedTask {
    /// Wire format: a `scheme m` line, the point coordinates on one line,
    /// then the `m` coded blocks in matrix fixture format.
    pub fn to_text(&self) -> String {
        let coords: Vec<String> = self.point.coords.iter().map(|c| c.to_string()).collect();
        let mut out = format!("{} {}\n{}\n", self.kind, self.coded_blocks.len(), coords.join(" "));
        for block in &self.coded_blocks {
            out.push_str(&block.to_text());
        }
        out
    }

    pub fn from_text(text: &str, field: &PrimeField) -> Result<CodedTask> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse("empty task".into()))?;
        let (kind, m) = match header.split_whitespace().collect::<Vec<_>>()[..] {
            [kind, m] => (
                kind.parse::<SchemeKind>()?,
                m.parse::<usize>().map_err(|_| Error::Parse(format!("bad chain length in {header:?}")))?,
            ),
            _ => return Err(Error::Parse(format!("task header must be `scheme m`, got {header:?}"))),
        };
        let coords_line = lines.next().ok_or_else(|| Error::Parse("missing point line".into()))?;
        let coords = coords_line
            .split_whitespace()
            .map(|t| {
                t.parse::<u64>()
                    .map(|v| field.elem(v))
                    .map_err(|_| Error::Parse(format!("bad coordinate {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if coords.len() != kind.num_variables(m) {
            return Err(Error::PointArityMismatch { expected: kind.num_variables(m), got: coords.len() });
        }
        let mut coded_blocks = Vec::with_capacity(m);
        for _ in 0..m {
            let (rows, cols) = crate::field::matrix_header(lines.next())?;
            coded_blocks.push(FieldMatrix::parse_body(&mut lines, rows, cols, field)?);
        }
        if let Some(extra) = lines.next() {
            return Err(Error::Parse(format!("trailing content: {extra:?}")));
        }
        Ok(CodedTask { kind, point: EvalPoint::new(coords), coded_blocks })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{block_chain_product, partition, random_chain};
    use crate::index::MixedRadix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Expands the product polynomial term by term: every choice of one
    /// block per matrix contributes its block product times a monomial.
    fn expanded_product(chain: &BlockChain, kind: SchemeKind, x: &[FieldElement], f: &PrimeField) -> FieldMatrix {
        let scheme = chain.scheme();
        let p = scheme.parts();
        let m = scheme.m();
        let (rows, cols) = scheme.result_block_shape();
        let mut total = FieldMatrix::zeros(rows, cols);
        let radices: Vec<usize> = (0..m).map(|i| p[i] * p[i + 1]).collect();
        for choice in MixedRadix::new(&radices) {
            let pairs: Vec<(usize, usize)> = (0..m).map(|i| (choice[i] / p[i + 1], choice[i] % p[i + 1])).collect();
            let mut prod = chain.block(0, pairs[0].0, pairs[0].1).clone();
            for (i, &(b, b2)) in pairs.iter().enumerate().skip(1) {
                prod = prod.mat_mul(chain.block(i, b, b2), f).unwrap();
            }
            let mut exps = vec![0u64; kind.num_variables(m)];
            for (i, &(b, b2)) in pairs.iter().enumerate() {
                match kind {
                    SchemeKind::Mv1 => exps[i] += (p[i + 1] * b + b2) as u64,
                    SchemeKind::Mv2 => {
                        exps[i] += (p[i] - 1 - b) as u64;
                        exps[i + 1] += b2 as u64;
                    }
                }
            }
            let monomial = exps.iter().zip(x).fold(f.one(), |acc, (&e, &xv)| f.mul(acc, f.pow(xv, e)));
            total.add_scaled_assign(&prod, monomial, f).unwrap();
        }
        total
    }

    fn random_point(kind: SchemeKind, m: usize, f: &PrimeField, rng: &mut ChaCha8Rng) -> EvalPoint {
        EvalPoint::new((0..kind.num_variables(m)).map(|_| f.random(rng)).collect())
    }

    fn small_chain(f: &PrimeField) -> BlockChain {
        let rows: Vec<Vec<u64>> = vec![vec![1, 2], vec![3, 4]];
        let m0 = FieldMatrix::from_rows(f, &rows).unwrap();
        partition(&[m0, FieldMatrix::identity(2)], &[2, 2, 1]).unwrap()
    }

    #[test]
    fn mv1_exponent_map_is_a_bijection() {
        for pi in 1..=4usize {
            for pn in 1..=4usize {
                let mut seen = vec![false; pi * pn];
                for b in 0..pi {
                    for b2 in 0..pn {
                        let e = pn * b + b2;
                        assert!(!seen[e]);
                        seen[e] = true;
                    }
                }
                assert!(seen.iter().all(|&s| s));
            }
        }
    }

    #[test]
    fn mv1_block_examples() {
        let f = PrimeField::new(101).unwrap();
        let chain = small_chain(&f);
        // M1 = I split into two rows: [1 0] + 9 [0 1]
        assert_eq!(encode_mv1_block(&chain, 1, f.elem(9), &f).unwrap(), FieldMatrix::from_rows(&f, &[vec![1, 9]]).unwrap());
        // x = 0 keeps only the (0,0) block
        assert_eq!(encode_mv1_block(&chain, 0, f.zero(), &f).unwrap(), FieldMatrix::scalar(f.elem(1)));
        // M00 + 3 M01 + 9 M10 + 27 M11 = 1 + 6 + 27 + 108 = 142 = 41 mod 101
        assert_eq!(encode_mv1_block(&chain, 0, f.elem(3), &f).unwrap(), FieldMatrix::scalar(f.elem(41)));
        assert!(matches!(encode_mv1_block(&chain, 2, f.one(), &f), Err(Error::IndexOutOfRange(_))));
    }

    #[test]
    fn mv2_block_examples() {
        let f = PrimeField::new(101).unwrap();
        let chain = small_chain(&f);
        // 2 M00 + 10 M01 + M10 + 5 M11 = 2 + 20 + 3 + 20 = 45
        assert_eq!(encode_mv2_block(&chain, 0, f.elem(2), f.elem(5), &f).unwrap(), FieldMatrix::scalar(f.elem(45)));
        // x_i = 0 keeps the b = p_i - 1 row only: M10 + 5 M11 = 23
        assert_eq!(encode_mv2_block(&chain, 0, f.zero(), f.elem(5), &f).unwrap(), FieldMatrix::scalar(f.elem(23)));
        // 4 [1 0] + [0 1]; p_{i+1} = 1 so x_{i+1} drops out
        assert_eq!(
            encode_mv2_block(&chain, 1, f.elem(4), f.elem(7), &f).unwrap(),
            FieldMatrix::from_rows(&f, &[vec![4, 1]]).unwrap()
        );
    }

    #[test]
    fn unit_partition_tasks_are_the_inputs() {
        let f = PrimeField::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let scheme = PartitionScheme::new(vec![2, 3, 2, 4], vec![1, 1, 1, 1]).unwrap();
        let chain = random_chain(&scheme, &f, &mut rng);
        for kind in [SchemeKind::Mv1, SchemeKind::Mv2] {
            let task = encode_task(&chain, kind, &random_point(kind, 3, &f, &mut rng), &f).unwrap();
            assert_eq!(task.coded_blocks, chain.reassemble());
            let expected = block_chain_product(&chain, &[0, 0, 0, 0], &f).unwrap();
            assert_eq!(worker_compute(&task, &f).unwrap(), expected);
        }
    }

    #[test]
    fn arity_is_checked() {
        let f = PrimeField::default();
        let chain = small_chain(&f);
        let err = encode_task(&chain, SchemeKind::Mv2, &EvalPoint::new(vec![f.one(); 2]), &f);
        assert_eq!(err, Err(Error::PointArityMismatch { expected: 3, got: 2 }));
    }

    #[test]
    fn worker_product_matches_expanded_polynomial() {
        let f = PrimeField::default();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..40 {
            let m = rng.gen_range(2..=4);
            let parts: Vec<usize> = (0..=m).map(|_| rng.gen_range(1..=3)).collect();
            let block: Vec<usize> = (0..=m).map(|_| rng.gen_range(1..=3)).collect();
            let scheme = PartitionScheme::with_block_sizes(parts, &block).unwrap();
            let chain = random_chain(&scheme, &f, &mut rng);
            for kind in [SchemeKind::Mv1, SchemeKind::Mv2] {
                let point = random_point(kind, m, &f, &mut rng);
                let task = encode_task(&chain, kind, &point, &f).unwrap();
                let got = worker_compute(&task, &f).unwrap();
                assert_eq!(got, expanded_product(&chain, kind, &point.coords, &f), "{kind} {:?}", scheme.parts());
            }
        }
    }

    #[test]
    fn worker_output_is_linear_in_each_input() {
        let f = PrimeField::default();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let scheme = PartitionScheme::new(vec![4, 2, 6], vec![2, 2, 3]).unwrap();
        let chain = random_chain(&scheme, &f, &mut rng);
        let c = f.elem(12345);
        let mut mats = chain.reassemble();
        mats[0] = mats[0].scale(c, &f);
        let scaled = partition(&mats, scheme.parts()).unwrap();
        for kind in [SchemeKind::Mv1, SchemeKind::Mv2] {
            let point = random_point(kind, 2, &f, &mut rng);
            let base = worker_compute(&encode_task(&chain, kind, &point, &f).unwrap(), &f).unwrap();
            let got = worker_compute(&encode_task(&scaled, kind, &point, &f).unwrap(), &f).unwrap();
            assert_eq!(got, base.scale(c, &f));
        }
    }

    #[test]
    fn task_wire_format_round_trips() {
        let f = PrimeField::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let scheme = PartitionScheme::new(vec![4, 6, 2, 2], vec![2, 3, 1, 2]).unwrap();
        let chain = random_chain(&scheme, &f, &mut rng);
        for kind in [SchemeKind::Mv1, SchemeKind::Mv2] {
            let task = encode_task(&chain, kind, &random_point(kind, 3, &f, &mut rng), &f).unwrap();
            let text = task.to_text();
            assert!(text.starts_with(&format!("{kind} 3\n")));
            assert_eq!(CodedTask::from_text(&text, &f).unwrap(), task);
        }
        assert!(CodedTask::from_text("mv3 2\n1 2\n", &f).is_err());
        assert!(matches!(
            CodedTask::from_text("mv1 2\n1 2 3\n1 1\n0\n1 1\n0\n", &f),
            Err(Error::PointArityMismatch { expected: 2, got: 3 })
        ));
    }

    #[test]
    fn degrees_per_scheme() {
        let s = PartitionScheme::new(vec![2, 3, 4, 5], vec![2, 3, 4, 5]).unwrap();
        assert_eq!(SchemeKind::Mv1.degrees(&s), vec![5, 11, 19]);
        assert_eq!(SchemeKind::Mv2.degrees(&s), vec![1, 4, 6, 4]);
        assert_eq!(SchemeKind::Mv2.axis_sizes(&s), vec![2, 5, 7, 5]);
    }
}
