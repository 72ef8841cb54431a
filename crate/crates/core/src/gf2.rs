//! Dense matrices over GF(2) with word-packed rows.

use crate::pauli::PauliString;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gf2Matrix {
    n_cols: usize,
    words: usize,
    rows: Vec<Vec<u64>>,
}

impl Gf2Matrix {
    pub fn new(n_cols: usize) -> Self {
        Self { n_cols, words: n_cols.div_ceil(64), rows: Vec::new() }
    }

    /// Symplectic generator matrix: row `i` is `(x_i | z_i)` of `paulis[i]`.
    pub fn symplectic(paulis: &[PauliString]) -> Self {
        let n = paulis.first().map_or(0, PauliString::n_sites);
        let mut m = Self::new(2 * n);
        for p in paulis {
            let mut row = vec![0u64; m.words];
            for site in 0..n {
                if (p.x_mask() >> site) & 1 == 1 {
                    set(&mut row, site);
                }
                if (p.z_mask() >> site) & 1 == 1 {
                    set(&mut row, n + site);
                }
            }
            m.rows.push(row);
        }
        m
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn push_row(&mut self, bits: &[bool]) {
        assert_eq!(bits.len(), self.n_cols);
        let mut row = vec![0u64; self.words];
        for (c, _) in bits.iter().enumerate().filter(|(_, &b)| b) {
            set(&mut row, c);
        }
        self.rows.push(row);
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        (self.rows[r][c / 64] >> (c % 64)) & 1 == 1
    }

    /// Rank by forward elimination on a copy.
    pub fn rank(&self) -> usize {
        let mut rows = self.rows.clone();
        let mut rank = 0;
        for col in 0..self.n_cols {
            let (w, bit) = (col / 64, 1u64 << (col % 64));
            let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][w] & bit != 0) else {
                continue;
            };
            rows.swap(rank, pivot);
            let pivot_row = rows[rank].clone();
            for row in rows.iter_mut().skip(rank + 1) {
                if row[w] & bit != 0 {
                    row.iter_mut().zip(&pivot_row).for_each(|(a, b)| *a ^= b);
                }
            }
            rank += 1;
            if rank == rows.len() {
                break;
            }
        }
        rank
    }
}

fn set(row: &mut [u64], c: usize) {
    row[c / 64] |= 1u64 << (c % 64);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_ranks() {
        let mut m = Gf2Matrix::new(3);
        m.push_row(&[true, true, false]);
        m.push_row(&[false, true, true]);
        m.push_row(&[true, false, true]);
        assert_eq!(m.rank(), 2);
        assert_eq!(Gf2Matrix::new(5).rank(), 0);
    }

    #[test]
    fn wide_rows_cross_word_boundaries() {
        let mut m = Gf2Matrix::new(130);
        let mut a = vec![false; 130];
        a[0] = true;
        a[129] = true;
        let mut b = vec![false; 130];
        b[64] = true;
        m.push_row(&a);
        m.push_row(&b);
        m.push_row(&a);
        assert_eq!(m.rank(), 2);
        assert!(m.get(0, 129));
    }

    #[test]
    fn symplectic_rows() {
        let p = PauliString::parse("+ * X0 Y2", 3).unwrap();
        let m = Gf2Matrix::symplectic(&[p]);
        let bits: Vec<bool> = (0..6).map(|c| m.get(0, c)).collect();
        assert_eq!(bits, vec![true, false, true, false, false, true]);
    }
}
