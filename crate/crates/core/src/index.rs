//! Mixed-radix enumeration of index tuples, first position varying slowest.

/// Iterates all tuples `t` with `0 <= t[k] < radices[k]` in lexicographic
/// order. An empty radix list yields the single empty tuple; any zero
/// radix yields nothing.
#[derive(Clone, Debug)]
pub struct MixedRadix {
    radices: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl MixedRadix {
    pub fn new(radices: &[usize]) -> Self {
        let next = if radices.contains(&0) { None } else { Some(vec![0; radices.len()]) };
        Self { radices: radices.to_vec(), next }
    }

    /// Number of tuples.
    pub fn count_total(radices: &[usize]) -> usize {
        radices.iter().product()
    }
}

impl Iterator for MixedRadix {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        for k in (0..succ.len()).rev() {
            succ[k] += 1;
            if succ[k] < self.radices[k] {
                self.next = Some(succ);
                return Some(current);
            }
            succ[k] = 0;
        }
        Some(current)
    }
}

/// Flat offset of `index` in a dense row-major tensor with the given shape.
pub fn flat_offset(shape: &[usize], index: &[usize]) -> usize {
    debug_assert_eq!(shape.len(), index.len());
    index.iter().zip(shape).fold(0, |acc, (&i, &n)| {
        debug_assert!(i < n);
        acc * n + i
    })
}
