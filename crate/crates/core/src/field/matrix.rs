use std::fmt::Write as _;

use rand::Rng;

use super::{FieldElement, PrimeField};
use crate::error::{Error, Result};

/// Dense row-major matrix over a prime field.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldMatrix {
    rows: usize,
    cols: usize,
    data: Vec<FieldElement>,
}

impl FieldMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<FieldElement>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![FieldElement::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, FieldElement::ONE);
        }
        m
    }

    /// Builds a matrix from nested integer rows, reducing each entry.
    pub fn from_rows(field: &PrimeField, rows: &[Vec<u64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let data = rows.iter().flatten().map(|&v| field.elem(v)).collect();
        Self::new(rows.len(), cols, data)
    }

    /// A `1 x 1` matrix.
    pub fn scalar(value: FieldElement) -> Self {
        Self { rows: 1, cols: 1, data: vec![value] }
    }

    pub fn random<R: Rng + ?Sized>(rows: usize, cols: usize, field: &PrimeField, rng: &mut R) -> Self {
        let data = (0..rows * cols).map(|_| field.random(rng)).collect();
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> FieldElement {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: FieldElement) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[FieldElement] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn entries(&self) -> &[FieldElement] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|e| e.is_zero())
    }

    /// Exact product `self * rhs`.
    pub fn mat_mul(&self, rhs: &FieldMatrix, field: &PrimeField) -> Result<FieldMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = FieldMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(rhs.row(k)) {
                    *o = field.add(*o, field.mul(a, b));
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &FieldMatrix, field: &PrimeField) -> Result<FieldMatrix> {
        let mut out = self.clone();
        out.add_scaled_assign(rhs, FieldElement::ONE, field)?;
        Ok(out)
    }

    pub fn sub(&self, rhs: &FieldMatrix, field: &PrimeField) -> Result<FieldMatrix> {
        let mut out = self.clone();
        out.add_scaled_assign(rhs, field.neg(FieldElement::ONE), field)?;
        Ok(out)
    }

    pub fn scale(&self, c: FieldElement, field: &PrimeField) -> FieldMatrix {
        FieldMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| field.mul(v, c)).collect(),
        }
    }

    /// `self += c * rhs`.
    pub fn add_scaled_assign(&mut self, rhs: &FieldMatrix, c: FieldElement, field: &PrimeField) -> Result<()> {
        if self.shape() != rhs.shape() {
            return Err(Error::ShapeMismatch);
        }
        for (a, &b) in self.data.iter_mut().zip(&rhs.data) {
            *a = field.add(*a, field.mul(b, c));
        }
        Ok(())
    }

    /// `self = self * c + rhs`; one Horner step.
    pub(crate) fn horner_step(&mut self, c: FieldElement, rhs: &FieldMatrix, field: &PrimeField) {
        debug_assert_eq!(self.shape(), rhs.shape());
        for (a, &b) in self.data.iter_mut().zip(&rhs.data) {
            *a = field.add(field.mul(*a, c), b);
        }
    }

    /// Copies out the `rows x cols` window whose top-left corner is `(r0, c0)`.
    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Result<FieldMatrix> {
        if r0 + rows > self.rows || c0 + cols > self.cols {
            return Err(Error::IndexOutOfRange(format!(
                "window {rows}x{cols} at ({r0},{c0}) in {}x{}",
                self.rows, self.cols
            )));
        }
        let mut data = Vec::with_capacity(rows * cols);
        for r in r0..r0 + rows {
            data.extend_from_slice(&self.data[r * self.cols + c0..r * self.cols + c0 + cols]);
        }
        Ok(FieldMatrix { rows, cols, data })
    }

    /// Writes `block` into `self` with its top-left corner at `(r0, c0)`.
    pub fn paste(&mut self, r0: usize, c0: usize, block: &FieldMatrix) -> Result<()> {
        if r0 + block.rows > self.rows || c0 + block.cols > self.cols {
            return Err(Error::IndexOutOfRange(format!(
                "block {}x{} at ({r0},{c0}) in {}x{}",
                block.rows, block.cols, self.rows, self.cols
            )));
        }
        for r in 0..block.rows {
            let dst = (r0 + r) * self.cols + c0;
            self.data[dst..dst + block.cols].copy_from_slice(block.row(r));
        }
        Ok(())
    }

    /// Plain-text fixture format: a `rows cols` header line, then one line
    /// of space-separated integers per row.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.rows, self.cols);
        for r in 0..self.rows {
            let line: Vec<String> = self.row(r).iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    /// Parses [`to_text`](Self::to_text) output. Entries are reduced into
    /// `field`; blank lines and `#` comments are ignored.
    pub fn from_text(text: &str, field: &PrimeField) -> Result<FieldMatrix> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let (rows, cols) = parse_header(lines.next())?;
        let matrix = Self::parse_body(&mut lines, rows, cols, field)?;
        if let Some(extra) = lines.next() {
            return Err(Error::Parse(format!("trailing content: {extra:?}")));
        }
        Ok(matrix)
    }

    pub(crate) fn parse_body<'a>(
        lines: &mut impl Iterator<Item = &'a str>,
        rows: usize,
        cols: usize,
        field: &PrimeField,
    ) -> Result<FieldMatrix> {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("expected {rows} rows, found {r}")))?;
            let before = data.len();
            for tok in line.split_whitespace() {
                let v: u64 = tok.parse().map_err(|_| Error::Parse(format!("bad entry {tok:?}")))?;
                data.push(field.elem(v));
            }
            if data.len() - before != cols {
                return Err(Error::Parse(format!("row {r} has {} entries, expected {cols}", data.len() - before)));
            }
        }
        FieldMatrix::new(rows, cols, data)
    }
}

pub(crate) fn parse_header(line: Option<&str>) -> Result<(usize, usize)> {
    let line = line.ok_or_else(|| Error::Parse("missing `rows cols` header".into()))?;
    let dims: Vec<usize> = line
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad header {line:?}"))))
        .collect::<Result<_>>()?;
    match dims[..] {
        [r, c] => Ok((r, c)),
        _ => Err(Error::Parse(format!("header must be `rows cols`, got {line:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn schoolbook(a: &FieldMatrix, b: &FieldMatrix, q: u64) -> Vec<Vec<u64>> {
        let mut out = vec![vec![0u64; b.cols()]; a.rows()];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                let mut acc: u128 = 0;
                for k in 0..a.cols() {
                    acc += a.get(i, k).value() as u128 * b.get(k, j).value() as u128;
                }
                *cell = (acc % q as u128) as u64;
            }
        }
        out
    }

    #[test]
    fn identity_and_scalar_products() {
        let f = PrimeField::new(101).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = FieldMatrix::random(3, 4, &f, &mut rng);
        assert_eq!(a.mat_mul(&FieldMatrix::identity(4), &f).unwrap(), a);
        let ab = FieldMatrix::scalar(f.elem(7)).mat_mul(&FieldMatrix::scalar(f.elem(20)), &f).unwrap();
        assert_eq!(ab, FieldMatrix::scalar(f.elem(39)));
    }

    #[test]
    fn mat_mul_rejects_mismatch() {
        let a = FieldMatrix::zeros(2, 3);
        let b = FieldMatrix::zeros(2, 3);
        assert!(matches!(a.mat_mul(&b, &PrimeField::default()), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn mat_mul_matches_schoolbook() {
        let f = PrimeField::mersenne31();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let (r, k, c) = (rng.gen_range(1..=8), rng.gen_range(1..=8), rng.gen_range(1..=8));
            let a = FieldMatrix::random(r, k, &f, &mut rng);
            let b = FieldMatrix::random(k, c, &f, &mut rng);
            let expected = schoolbook(&a, &b, f.modulus());
            let got = a.mat_mul(&b, &f).unwrap();
            for (i, row) in expected.iter().enumerate() {
                for (j, &v) in row.iter().enumerate() {
                    assert_eq!(got.get(i, j).value(), v);
                }
            }
        }
    }

    #[test]
    fn text_round_trip() {
        let f = PrimeField::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = FieldMatrix::random(3, 5, &f, &mut rng);
        assert_eq!(FieldMatrix::from_text(&m.to_text(), &f).unwrap(), m);
        assert!(FieldMatrix::from_text("2 2\n1 2\n3\n", &f).is_err());
        assert!(FieldMatrix::from_text("2 2\n1 2\n", &f).is_err());
        assert!(FieldMatrix::from_text("", &f).is_err());
        let m = FieldMatrix::from_text("# fixture\n2 1\n5\n2147483648\n", &f).unwrap();
        assert_eq!(m.get(1, 0).value(), 1);
    }

    #[test]
    fn submatrix_and_paste() {
        let f = PrimeField::new(101).unwrap();
        let m = FieldMatrix::from_rows(&f, &[vec![1, 2, 3], vec![4, 5, 6]]).unwrap();
        let s = m.submatrix(0, 1, 2, 2).unwrap();
        assert_eq!(s, FieldMatrix::from_rows(&f, &[vec![2, 3], vec![5, 6]]).unwrap());
        let mut z = FieldMatrix::zeros(2, 3);
        z.paste(0, 1, &s).unwrap();
        assert_eq!(z, FieldMatrix::from_rows(&f, &[vec![0, 2, 3], vec![0, 5, 6]]).unwrap());
        assert!(m.submatrix(1, 1, 2, 2).is_err());
    }
}
