//! Recovering the chain product from worker results.
//!
//! Two routes are provided. Tensor-grid interpolation runs one-dimensional
//! Vandermonde solves along each axis of a Cartesian grid. The general
//! decoder accepts arbitrary points and solves the monomial system by
//! exact elimination, failing with [`Error::SingularSystem`] when the
//! points do not determine the polynomial.

use std::collections::{BTreeSet, HashMap};

use crate::chain::{ChainResult, PartitionScheme};
use crate::encoding::{EvalPoint, SchemeKind};
use crate::error::{Error, Result};
use crate::field::{solve_vandermonde, EchelonSystem, FieldElement, FieldMatrix, PrimeField};
use crate::index::{flat_offset, MixedRadix};

/// Cartesian product `X_0 x X_1 x ...` of per-variable coordinate sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvaluationGrid {
    kind: SchemeKind,
    degrees: Vec<usize>,
    axes: Vec<Vec<FieldElement>>,
}

impl EvaluationGrid {
    /// Checks distinctness along every axis and that each axis has at
    /// least `degree + 1` coordinates for the scheme's product polynomial.
    pub fn new(kind: SchemeKind, scheme: &PartitionScheme, axes: Vec<Vec<FieldElement>>) -> Result<Self> {
        let degrees = kind.degrees(scheme);
        if axes.len() != degrees.len() {
            return Err(Error::PointArityMismatch { expected: degrees.len(), got: axes.len() });
        }
        for (k, axis) in axes.iter().enumerate() {
            let mut seen = BTreeSet::new();
            if let Some(dup) = axis.iter().find(|x| !seen.insert(**x)) {
                return Err(Error::DuplicatePoint(dup.value()));
            }
            if axis.len() < degrees[k] + 1 {
                return Err(Error::InvalidParameter(format!(
                    "axis {k} has {} coordinates, degree {} needs {}",
                    axis.len(),
                    degrees[k],
                    degrees[k] + 1
                )));
            }
        }
        Ok(Self { kind, degrees, axes })
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn axes(&self) -> &[Vec<FieldElement>] {
        &self.axes
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    /// Every grid point, lexicographic over axis positions.
    pub fn points(&self) -> Vec<EvalPoint> {
        let sizes: Vec<usize> = self.axes.iter().map(Vec::len).collect();
        self.points_with_sizes(&sizes)
    }

    /// Points of the grid trimmed to `degree + 1` coordinates per axis.
    pub fn trimmed_points(&self) -> Vec<EvalPoint> {
        let sizes: Vec<usize> = self.degrees.iter().map(|d| d + 1).collect();
        self.points_with_sizes(&sizes)
    }

    fn points_with_sizes(&self, sizes: &[usize]) -> Vec<EvalPoint> {
        MixedRadix::new(sizes)
            .map(|idx| EvalPoint::new(idx.iter().enumerate().map(|(k, &j)| self.axes[k][j]).collect()))
            .collect()
    }
}

/// Dense coefficients of a matrix-valued multivariate polynomial, indexed
/// by exponent tuple (first variable slowest).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientTensor {
    degrees: Vec<usize>,
    coeffs: Vec<FieldMatrix>,
}

impl CoefficientTensor {
    pub fn new(degrees: Vec<usize>, coeffs: Vec<FieldMatrix>) -> Result<Self> {
        let expected: usize = degrees.iter().map(|d| d + 1).product();
        if coeffs.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for degree bounds {degrees:?} (need {expected})",
                coeffs.len()
            )));
        }
        Ok(Self { degrees, coeffs })
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn shape(&self) -> Vec<usize> {
        self.degrees.iter().map(|d| d + 1).collect()
    }

    pub fn coefficient(&self, exponents: &[usize]) -> &FieldMatrix {
        &self.coeffs[flat_offset(&self.shape(), exponents)]
    }

    /// Evaluates the polynomial at `point`.
    pub fn evaluate(&self, point: &[FieldElement], field: &PrimeField) -> FieldMatrix {
        let (rows, cols) = self.coeffs[0].shape();
        let mut out = FieldMatrix::zeros(rows, cols);
        for (exps, c) in MixedRadix::new(&self.shape()).zip(&self.coeffs) {
            let mono = exps
                .iter()
                .zip(point)
                .fold(field.one(), |acc, (&e, &x)| field.mul(acc, field.pow(x, e as u64)));
            out.add_scaled_assign(c, mono, field).expect("uniform shapes");
        }
        out
    }
}

fn gather_grid_values(
    grid: &EvaluationGrid,
    evaluations: &HashMap<EvalPoint, FieldMatrix>,
) -> Result<(Vec<usize>, Vec<FieldMatrix>)> {
    let shape: Vec<usize> = grid.degrees.iter().map(|d| d + 1).collect();
    let values = grid
        .trimmed_points()
        .into_iter()
        .map(|p| evaluations.get(&p).cloned().ok_or_else(|| Error::MissingEvaluation(p.values())))
        .collect::<Result<Vec<_>>>()?;
    if values.iter().any(|v| v.shape() != values[0].shape()) {
        return Err(Error::ShapeMismatch);
    }
    Ok((shape, values))
}

/// Tensor-product interpolation over the grid trimmed to `degree + 1`
/// coordinates per axis: one Vandermonde solve per fiber, axis by axis.
pub fn interpolate_grid(
    grid: &EvaluationGrid,
    evaluations: &HashMap<EvalPoint, FieldMatrix>,
    field: &PrimeField,
) -> Result<CoefficientTensor> {
    let (shape, mut data) = gather_grid_values(grid, evaluations)?;
    for (axis, &len) in shape.iter().enumerate() {
        let stride: usize = shape[axis + 1..].iter().product();
        let outer: usize = shape[..axis].iter().product();
        let points = &grid.axes[axis][..len];
        for o in 0..outer {
            for inner in 0..stride {
                let base = o * len * stride + inner;
                let fiber: Vec<FieldMatrix> = (0..len).map(|j| data[base + j * stride].clone()).collect();
                for (j, c) in solve_vandermonde(field, points, &fiber)?.into_iter().enumerate() {
                    data[base + j * stride] = c;
                }
            }
        }
    }
    CoefficientTensor::new(grid.degrees.clone(), data)
}

fn check_degrees(tensor: &CoefficientTensor, expected: Vec<usize>) -> Result<()> {
    if tensor.degrees != expected {
        return Err(Error::DegreeMismatch { expected, got: tensor.degrees.clone() });
    }
    Ok(())
}

/// Result blocks from an MV1 product polynomial: block `(n_0, n_m)` is the
/// sum over inner indices of the coefficients at exponents
/// `p_{i+1} n_i + n_{i+1}`.
pub fn extract_mv1(tensor: &CoefficientTensor, scheme: &PartitionScheme, field: &PrimeField) -> Result<ChainResult> {
    check_degrees(tensor, SchemeKind::Mv1.degrees(scheme))?;
    let p = scheme.parts();
    let m = scheme.m();
    let (rows, cols) = tensor.coeffs[0].shape();
    let mut sums = vec![FieldMatrix::zeros(rows, cols); p[0] * p[m]];
    for n in scheme.index_tuples() {
        let exps: Vec<usize> = (0..m).map(|i| p[i + 1] * n[i] + n[i + 1]).collect();
        sums[n[0] * p[m] + n[m]].add_scaled_assign(tensor.coefficient(&exps), FieldElement::ONE, field)?;
    }
    collect_result(scheme, sums)
}

/// Result blocks from an MV2 product polynomial: block `(n_0, n_m)` is the
/// single coefficient at `(p_0 - 1 - n_0, p_1 - 1, .., p_{m-1} - 1, n_m)`.
pub fn extract_mv2(tensor: &CoefficientTensor, scheme: &PartitionScheme) -> Result<ChainResult> {
    check_degrees(tensor, SchemeKind::Mv2.degrees(scheme))?;
    let p = scheme.parts();
    let m = scheme.m();
    let mut blocks = Vec::with_capacity(p[0] * p[m]);
    for n0 in 0..p[0] {
        for nm in 0..p[m] {
            blocks.push(tensor.coefficient(&mv2_target_exponents(scheme, n0, nm)).clone());
        }
    }
    collect_result(scheme, blocks)
}

fn mv2_target_exponents(scheme: &PartitionScheme, n0: usize, nm: usize) -> Vec<usize> {
    let p = scheme.parts();
    let m = scheme.m();
    let mut exps: Vec<usize> = p.iter().map(|&pi| pi - 1).collect();
    exps[0] = p[0] - 1 - n0;
    exps[m] = nm;
    exps
}

fn collect_result(scheme: &PartitionScheme, blocks: Vec<FieldMatrix>) -> Result<ChainResult> {
    let pm = scheme.parts()[scheme.m()];
    let mut result = ChainResult::empty(scheme.clone());
    for (k, block) in blocks.into_iter().enumerate() {
        result.set(k / pm, k % pm, block)?;
    }
    Ok(result)
}

pub fn extract(kind: SchemeKind, tensor: &CoefficientTensor, scheme: &PartitionScheme, field: &PrimeField) -> Result<ChainResult> {
    match kind {
        SchemeKind::Mv1 => extract_mv1(tensor, scheme, field),
        SchemeKind::Mv2 => extract_mv2(tensor, scheme),
    }
}

/// Grid decode that never materialises the full MV2 tensor: every inner
/// axis collapses to its single coefficient `p_i - 1` via one row of the
/// inverse Vandermonde matrix, leaving a `p_0 x p_m` problem.
pub fn decode_mv2_grid_targeted(
    grid: &EvaluationGrid,
    evaluations: &HashMap<EvalPoint, FieldMatrix>,
    scheme: &PartitionScheme,
    field: &PrimeField,
) -> Result<ChainResult> {
    if grid.kind != SchemeKind::Mv2 {
        return Err(Error::InvalidParameter("targeted decoding is specific to mv2 grids".into()));
    }
    check_grid_matches(grid, SchemeKind::Mv2.degrees(scheme))?;
    let (mut shape, mut data) = gather_grid_values(grid, evaluations)?;
    let m = scheme.m();
    let p = scheme.parts();
    // Inner axes first (highest index first keeps the strides simple).
    for axis in (1..m).rev() {
        let len = shape[axis];
        let weights = coefficient_functional(field, &grid.axes[axis][..len], p[axis] - 1)?;
        let stride: usize = shape[axis + 1..].iter().product();
        let outer: usize = shape[..axis].iter().product();
        let mut next = Vec::with_capacity(outer * stride);
        for o in 0..outer {
            for inner in 0..stride {
                let base = o * len * stride + inner;
                let (rows, cols) = data[base].shape();
                let mut acc = FieldMatrix::zeros(rows, cols);
                for (j, &w) in weights.iter().enumerate() {
                    acc.add_scaled_assign(&data[base + j * stride], w, field)?;
                }
                next.push(acc);
            }
        }
        data = next;
        shape.remove(axis);
    }
    // Remaining shape is [p_0, p_m]: plain bivariate interpolation.
    for (axis, coords) in [(0usize, &grid.axes[0]), (1, &grid.axes[m])] {
        let len = shape[axis];
        let stride: usize = shape[axis + 1..].iter().product();
        let outer: usize = shape[..axis].iter().product();
        for o in 0..outer {
            for inner in 0..stride {
                let base = o * len * stride + inner;
                let fiber: Vec<FieldMatrix> = (0..len).map(|j| data[base + j * stride].clone()).collect();
                for (j, c) in solve_vandermonde(field, &coords[..len], &fiber)?.into_iter().enumerate() {
                    data[base + j * stride] = c;
                }
            }
        }
    }
    let mut blocks = Vec::with_capacity(p[0] * p[m]);
    for n0 in 0..p[0] {
        for nm in 0..p[m] {
            blocks.push(data[(p[0] - 1 - n0) * p[m] + nm].clone());
        }
    }
    collect_result(scheme, blocks)
}

fn check_grid_matches(grid: &EvaluationGrid, expected: Vec<usize>) -> Result<()> {
    if grid.degrees != expected {
        return Err(Error::DegreeMismatch { expected, got: grid.degrees.clone() });
    }
    Ok(())
}

/// Weights `w` with `c_k = sum_j w_j y_j` for the interpolant through
/// `(points[j], y_j)`.
fn coefficient_functional(field: &PrimeField, points: &[FieldElement], k: usize) -> Result<Vec<FieldElement>> {
    (0..points.len())
        .map(|j| {
            let unit: Vec<FieldMatrix> = (0..points.len())
                .map(|i| FieldMatrix::scalar(if i == j { field.one() } else { field.zero() }))
                .collect();
            Ok(solve_vandermonde(field, points, &unit)?[k].get(0, 0))
        })
        .collect()
}

/// Interpolate-then-extract on a grid: the reference decode path.
pub fn decode_grid(
    grid: &EvaluationGrid,
    evaluations: &HashMap<EvalPoint, FieldMatrix>,
    scheme: &PartitionScheme,
    field: &PrimeField,
) -> Result<ChainResult> {
    check_grid_matches(grid, grid.kind.degrees(scheme))?;
    let tensor = interpolate_grid(grid, evaluations, field)?;
    extract(grid.kind, &tensor, scheme, field)
}

/// Exponent tuples that actually occur in the product polynomial, found by
/// expanding every choice of one block per matrix.
pub fn monomial_support(kind: SchemeKind, scheme: &PartitionScheme) -> BTreeSet<Vec<usize>> {
    let p = scheme.parts();
    let m = scheme.m();
    let radices: Vec<usize> = (0..m).map(|i| p[i] * p[i + 1]).collect();
    MixedRadix::new(&radices)
        .map(|choice| {
            let mut exps = vec![0usize; kind.num_variables(m)];
            for (i, &c) in choice.iter().enumerate() {
                let (b, b2) = (c / p[i + 1], c % p[i + 1]);
                match kind {
                    SchemeKind::Mv1 => exps[i] = p[i + 1] * b + b2,
                    SchemeKind::Mv2 => {
                        exps[i] += p[i] - 1 - b;
                        exps[i + 1] += b2;
                    }
                }
            }
            exps
        })
        .collect()
}

/// Monomial system for one scheme, fed one worker result at a time.
///
/// Unknowns are the coefficients of the dense exponent box
/// `prod (degree_k + 1)`, which is exactly the recovery threshold of
/// either scheme.
#[derive(Clone, Debug)]
pub struct IncrementalDecoder {
    kind: SchemeKind,
    scheme: PartitionScheme,
    field: PrimeField,
    degrees: Vec<usize>,
    block_shape: (usize, usize),
    system: EchelonSystem,
}

impl IncrementalDecoder {
    pub fn new(kind: SchemeKind, scheme: &PartitionScheme, field: PrimeField) -> Self {
        let degrees = kind.degrees(scheme);
        let unknowns = degrees.iter().map(|d| d + 1).product();
        let block_shape = scheme.result_block_shape();
        Self {
            kind,
            scheme: scheme.clone(),
            field,
            degrees,
            block_shape,
            system: EchelonSystem::new(field, unknowns, block_shape.0 * block_shape.1),
        }
    }

    /// Number of unknown coefficients (the recovery threshold).
    pub fn unknowns(&self) -> usize {
        self.system.unknowns()
    }

    pub fn rank(&self) -> usize {
        self.system.rank()
    }

    pub fn offered(&self) -> usize {
        self.system.offered()
    }

    pub fn is_decodable(&self) -> bool {
        self.system.is_full_rank()
    }

    /// Monomial values `prod_k x_k^{e_k}` over the exponent box.
    pub fn monomial_row(&self, point: &EvalPoint) -> Result<Vec<FieldElement>> {
        if point.coords.len() != self.degrees.len() {
            return Err(Error::PointArityMismatch { expected: self.degrees.len(), got: point.coords.len() });
        }
        let f = &self.field;
        let powers: Vec<Vec<FieldElement>> = point
            .coords
            .iter()
            .zip(&self.degrees)
            .map(|(&x, &d)| {
                std::iter::successors(Some(f.one()), |&acc| Some(f.mul(acc, x))).take(d + 1).collect()
            })
            .collect();
        let shape: Vec<usize> = self.degrees.iter().map(|d| d + 1).collect();
        Ok(MixedRadix::new(&shape)
            .map(|exps| exps.iter().enumerate().fold(f.one(), |acc, (k, &e)| f.mul(acc, powers[k][e])))
            .collect())
    }

    /// Adds one result; returns whether it raised the rank.
    pub fn offer(&mut self, point: &EvalPoint, value: &FieldMatrix) -> Result<bool> {
        if value.shape() != self.block_shape {
            return Err(Error::ShapeMismatch);
        }
        let row = self.monomial_row(point)?;
        self.system.insert(&row, value.entries())
    }

    pub fn coefficients(&self) -> Result<CoefficientTensor> {
        let (rows, cols) = self.block_shape;
        let coeffs = self
            .system
            .solve()?
            .into_iter()
            .map(|entries| FieldMatrix::new(rows, cols, entries))
            .collect::<Result<Vec<_>>>()?;
        CoefficientTensor::new(self.degrees.clone(), coeffs)
    }

    pub fn finish(&self) -> Result<ChainResult> {
        extract(self.kind, &self.coefficients()?, &self.scheme, &self.field)
    }
}

/// Decodes from arbitrary evaluation points, keeping the first linearly
/// independent equations. Fails with `SingularSystem` when the supplied
/// points do not pin down every coefficient.
pub fn decode_general(
    points: &[EvalPoint],
    evaluations: &[FieldMatrix],
    kind: SchemeKind,
    scheme: &PartitionScheme,
    field: &PrimeField,
) -> Result<ChainResult> {
    if points.len() != evaluations.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} points but {} evaluations",
            points.len(),
            evaluations.len()
        )));
    }
    let mut decoder = IncrementalDecoder::new(kind, scheme, *field);
    for (point, value) in points.iter().zip(evaluations) {
        decoder.offer(point, value)?;
        if decoder.is_decodable() {
            break;
        }
    }
    decoder.finish()
}
