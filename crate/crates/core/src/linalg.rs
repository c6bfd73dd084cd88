//! Exact sparse Gaussian elimination over the rationals.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::expr::Rat;

/// Sparse row: column → coefficient, no explicit zeros.
pub type Row = BTreeMap<usize, Rat>;

/// Incrementally reduced system `A x = b`. Rows are reduced against the
/// existing pivots as they arrive, so memory stays proportional to the rank.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    /// pivot column → (row with leading 1 at the pivot, rhs)
    pivots: BTreeMap<usize, (Row, Rat)>,
    inconsistent: bool,
}

fn axpy(dst: &mut Row, s: &Rat, src: &Row) {
    for (c, v) in src {
        let e = dst.entry(*c).or_insert_with(Rat::zero);
        *e -= s * v;
        if e.is_zero() {
            dst.remove(c);
        }
    }
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn is_consistent(&self) -> bool {
        !self.inconsistent
    }

    /// Adds one equation. Returns false if it was dependent on earlier ones.
    pub fn push(&mut self, mut row: Row, mut rhs: Rat) -> bool {
        row.retain(|_, v| !v.is_zero());
        loop {
            let hit = row.keys().find(|c| self.pivots.contains_key(c)).copied();
            let Some(c) = hit else { break };
            let s = row[&c].clone();
            let (prow, prhs) = &self.pivots[&c];
            axpy(&mut row, &s, prow);
            rhs -= &s * prhs;
        }
        let Some((&lead, v)) = row.iter().next() else {
            if !rhs.is_zero() {
                self.inconsistent = true;
            }
            return false;
        };
        let inv = Rat::one() / v.clone();
        for x in row.values_mut() {
            *x *= &inv;
        }
        rhs *= &inv;
        // keep existing pivot rows free of the new pivot column
        for (prow, prhs) in self.pivots.values_mut() {
            if let Some(s) = prow.get(&lead).cloned() {
                axpy(prow, &s, &row);
                *prhs -= &s * &rhs;
            }
        }
        self.pivots.insert(lead, (row, rhs));
        true
    }

    /// A particular solution with every free variable set to zero.
    pub fn solution(&self, ncols: usize) -> Option<Vec<Rat>> {
        if self.inconsistent {
            return None;
        }
        let mut x = vec![Rat::zero(); ncols];
        for (c, (_, rhs)) in &self.pivots {
            x[*c] = rhs.clone();
        }
        Some(x)
    }

    /// Basis of the null space of the homogeneous system.
    pub fn nullspace(&self, ncols: usize) -> Vec<Vec<Rat>> {
        let mut out = Vec::new();
        for free in (0..ncols).filter(|c| !self.pivots.contains_key(c)) {
            let mut v = vec![Rat::zero(); ncols];
            v[free] = Rat::one();
            for (c, (row, _)) in &self.pivots {
                if let Some(a) = row.get(&free) {
                    v[*c] = -a.clone();
                }
            }
            out.push(v);
        }
        out
    }
}

/// Solves `A x = b` exactly; `None` when inconsistent.
pub fn solve(rows: impl IntoIterator<Item = (Row, Rat)>, ncols: usize) -> Option<Vec<Rat>> {
    let mut e = Echelon::new();
    for (r, b) in rows {
        e.push(r, b);
        if !e.is_consistent() {
            return None;
        }
    }
    e.solution(ncols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{int, rat};

    fn row(v: &[(usize, i64)]) -> Row {
        v.iter().map(|(c, x)| (*c, int(*x))).collect()
    }

    #[test]
    fn solves_small_system() {
        // x + y = 3, x - y = 1
        let x = solve(vec![(row(&[(0, 1), (1, 1)]), int(3)), (row(&[(0, 1), (1, -1)]), int(1))], 2).unwrap();
        assert_eq!(x, vec![int(2), int(1)]);
    }

    #[test]
    fn detects_inconsistency() {
        let r = solve(vec![(row(&[(0, 1)]), int(1)), (row(&[(0, 2)]), int(3))], 1);
        assert!(r.is_none());
    }

    #[test]
    fn nullspace_of_rank_one() {
        let mut e = Echelon::new();
        e.push(row(&[(0, 1), (1, 2), (2, 3)]), int(0));
        let ns = e.nullspace(3);
        assert_eq!(ns.len(), 2);
        for v in ns {
            assert_eq!(&v[0] + int(2) * &v[1] + int(3) * &v[2], int(0));
        }
    }

    #[test]
    fn rational_pivots() {
        let x = solve(vec![(row(&[(0, 2)]), int(1))], 1).unwrap();
        assert_eq!(x[0], rat(1, 2));
    }
}
