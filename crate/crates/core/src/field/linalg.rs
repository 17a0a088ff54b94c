use super::{FieldElement, FieldMatrix, PrimeField};
use crate::error::{Error, Result};

/// Interpolates the matrix polynomial `P(x) = sum_k c_k x^k` of degree
/// `< points.len()` with `P(points[j]) = values[j]`, returning `c_0..c_d`.
///
/// Runs Newton divided differences entrywise and then expands the Newton
/// form into monomial coefficients, `O(d^2)` matrix operations overall.
pub fn solve_vandermonde(
    field: &PrimeField,
    points: &[FieldElement],
    values: &[FieldMatrix],
) -> Result<Vec<FieldMatrix>> {
    if points.len() != values.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} points but {} values",
            points.len(),
            values.len()
        )));
    }
    let Some(first) = values.first() else {
        return Ok(Vec::new());
    };
    if values.iter().any(|v| v.shape() != first.shape()) {
        return Err(Error::ShapeMismatch);
    }
    let n = points.len();
    for i in 0..n {
        for j in 0..i {
            if points[i] == points[j] {
                return Err(Error::DuplicatePoint(points[i].value()));
            }
        }
    }

    // Divided differences, in place: after pass `j`, coeffs[i] holds
    // f[x_{i-j}, ..., x_i] for i >= j.
    let mut coeffs = values.to_vec();
    for j in 1..n {
        for i in (j..n).rev() {
            let denom = field.inv(field.sub(points[i], points[i - j]))?;
            let (lo, hi) = coeffs.split_at_mut(i);
            let diff = &mut hi[0];
            diff.add_scaled_assign(&lo[i - 1], field.neg(FieldElement::ONE), field)?;
            *diff = diff.scale(denom, field);
        }
    }

    // Newton form -> monomial form, Horner style from the top coefficient:
    // poly <- poly * (x - x_k) + a_k.
    let (rows, cols) = first.shape();
    let mut poly: Vec<FieldMatrix> = vec![coeffs[n - 1].clone()];
    for k in (0..n - 1).rev() {
        let shift = field.neg(points[k]);
        let mut next = vec![FieldMatrix::zeros(rows, cols); poly.len() + 1];
        for (deg, c) in poly.iter().enumerate() {
            next[deg + 1].add_scaled_assign(c, FieldElement::ONE, field)?;
            next[deg].add_scaled_assign(c, shift, field)?;
        }
        next[0].add_scaled_assign(&coeffs[k], FieldElement::ONE, field)?;
        poly = next;
    }
    Ok(poly)
}

/// Rank over `F_q` by Gaussian elimination with first-nonzero pivoting.
pub fn rank(field: &PrimeField, matrix: &FieldMatrix) -> usize {
    let (rows, cols) = matrix.shape();
    let mut m: Vec<Vec<FieldElement>> = (0..rows).map(|r| matrix.row(r).to_vec()).collect();
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, pivot);
        let inv = field.inv(m[rank][col]).expect("pivot is nonzero");
        let pivot_row = m[rank].clone();
        for row in m.iter_mut().skip(rank + 1) {
            let factor = field.mul(row[col], inv);
            if factor.is_zero() {
                continue;
            }
            for (x, &p) in row.iter_mut().zip(&pivot_row).skip(col) {
                *x = field.sub(*x, field.mul(factor, p));
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// Incrementally built linear system `A c = B` kept in reduced row echelon
/// form. Rows that are linear combinations of earlier rows are discarded,
/// so the retained equations are the first linearly independent ones in
/// insertion order.
#[derive(Clone, Debug)]
pub struct EchelonSystem {
    field: PrimeField,
    unknowns: usize,
    rhs_width: usize,
    rows: Vec<Vec<FieldElement>>,
    pivot_cols: Vec<usize>,
    pivot_row_of: Vec<Option<usize>>,
    offered: usize,
}

impl EchelonSystem {
    pub fn new(field: PrimeField, unknowns: usize, rhs_width: usize) -> Self {
        Self {
            field,
            unknowns,
            rhs_width,
            rows: Vec::new(),
            pivot_cols: Vec::new(),
            pivot_row_of: vec![None; unknowns],
            offered: 0,
        }
    }

    pub fn unknowns(&self) -> usize {
        self.unknowns
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Number of equations offered so far, independent or not.
    pub fn offered(&self) -> usize {
        self.offered
    }

    pub fn is_full_rank(&self) -> bool {
        self.rows.len() == self.unknowns
    }

    /// Adds one equation; returns whether it raised the rank.
    pub fn insert(&mut self, coeffs: &[FieldElement], rhs: &[FieldElement]) -> Result<bool> {
        if coeffs.len() != self.unknowns || rhs.len() != self.rhs_width {
            return Err(Error::DimensionMismatch(format!(
                "equation with {} coefficients and {} right-hand sides, system has {} and {}",
                coeffs.len(),
                rhs.len(),
                self.unknowns,
                self.rhs_width
            )));
        }
        self.offered += 1;
        if self.is_full_rank() {
            return Ok(false);
        }
        let f = self.field;
        let mut row: Vec<FieldElement> = coeffs.iter().chain(rhs).copied().collect();
        for (stored, &pc) in self.rows.iter().zip(&self.pivot_cols) {
            let factor = row[pc];
            if factor.is_zero() {
                continue;
            }
            for (x, &s) in row.iter_mut().zip(stored).skip(pc) {
                *x = f.sub(*x, f.mul(factor, s));
            }
        }
        let Some(pc) = row[..self.unknowns].iter().position(|v| !v.is_zero()) else {
            return Ok(false);
        };
        let inv = f.inv(row[pc])?;
        for x in row.iter_mut().skip(pc) {
            *x = f.mul(*x, inv);
        }
        for stored in &mut self.rows {
            let factor = stored[pc];
            if factor.is_zero() {
                continue;
            }
            for (x, &s) in stored.iter_mut().zip(&row).skip(pc) {
                *x = f.sub(*x, f.mul(factor, s));
            }
        }
        self.pivot_row_of[pc] = Some(self.rows.len());
        self.pivot_cols.push(pc);
        self.rows.push(row);
        Ok(true)
    }

    /// The unique solution, one right-hand-side vector per unknown, once
    /// the system has full rank.
    pub fn solve(&self) -> Result<Vec<Vec<FieldElement>>> {
        if !self.is_full_rank() {
            return Err(Error::SingularSystem { rank: self.rank(), needed: self.unknowns });
        }
        Ok(self
            .pivot_row_of
            .iter()
            .map(|r| self.rows[r.expect("full rank")][self.unknowns..].to_vec())
            .collect())
    }
}
