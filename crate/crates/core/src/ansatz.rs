//! Linear ansätze over invariant tensors. Unknown coefficients are fixed by
//! exact component matching.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;

use crate::expr::{canonicalize, Components, Expression, Idx, Kind, PolyKey, Rat, Sym};
use crate::linalg::{Echelon, Row};

/// All products of δ's with at most one ε (internal) and one η (spatial)
/// whose free labels are exactly `labels`. Together these span the
/// rotation-invariant tensors of each kind.
pub fn tensor_patterns(labels: &[Idx]) -> Vec<Expression> {
    let spatial: Vec<Idx> = labels.iter().copied().filter(|l| l.kind == Kind::Spatial).collect();
    let internal: Vec<Idx> = labels.iter().copied().filter(|l| l.kind == Kind::Internal).collect();
    let sp = kind_patterns(&spatial, Kind::Spatial);
    let it = kind_patterns(&internal, Kind::Internal);
    let mut out = Vec::new();
    for a in &sp {
        for b in &it {
            out.push(a.mul(b).expect("disjoint labels"));
        }
    }
    out
}

fn kind_patterns(ls: &[Idx], kind: Kind) -> Vec<Expression> {
    let mut out = Vec::new();
    if ls.len() % 2 == 0 {
        out.extend(matchings(ls));
    }
    if ls.len() >= 3 && ls.len() % 2 == 1 {
        for x in 0..ls.len() {
            for y in x + 1..ls.len() {
                for z in y + 1..ls.len() {
                    let rest: Vec<Idx> =
                        ls.iter().enumerate().filter(|(k, _)| *k != x && *k != y && *k != z).map(|(_, l)| *l).collect();
                    let lc = match kind {
                        Kind::Spatial => Expression::eta(ls[x], ls[y], ls[z]),
                        Kind::Internal => Expression::eps(ls[x], ls[y], ls[z]),
                    };
                    for m in matchings(&rest) {
                        out.push(lc.mul(&m).expect("disjoint labels"));
                    }
                }
            }
        }
    }
    out
}

fn matchings(ls: &[Idx]) -> Vec<Expression> {
    if ls.is_empty() {
        return vec![Expression::one()];
    }
    let first = ls[0];
    let mut out = Vec::new();
    for k in 1..ls.len() {
        let rest: Vec<Idx> = ls.iter().enumerate().filter(|(j, _)| *j != 0 && *j != k).map(|(_, l)| *l).collect();
        let d = Expression::delta(first, ls[k]);
        for m in matchings(&rest) {
            out.push(d.mul(&m).expect("disjoint labels"));
        }
    }
    out
}

/// Every tensor pattern contracted with `factors`, leaving `target` free.
/// The factor labels that are not in `target` are the contracted ones.
pub fn contracted_basis(factors: &Expression, target: &[Idx]) -> Vec<Expression> {
    let mut open: Vec<Idx> = factors.free.iter().copied().filter(|l| !target.contains(l)).collect();
    open.extend(target.iter().copied().filter(|l| !factors.free.contains(l)));
    let mut out = Vec::new();
    for p in tensor_patterns(&open) {
        let e = canonicalize(&p.mul(factors).expect("pattern contracts factor labels"));
        if !e.is_zero() {
            out.push(e);
        }
    }
    out
}

type Coord = (Vec<u8>, PolyKey);

fn coords(c: &Components, shift: &[(Sym, i32)]) -> BTreeMap<Coord, Rat> {
    let mut out = BTreeMap::new();
    for (asg, poly) in &c.parts {
        for (k, v) in poly {
            let mut k = k.clone();
            if !shift.is_empty() {
                let mut m: BTreeMap<Sym, i32> = k.consts.iter().cloned().collect();
                for (n, p) in shift {
                    *m.entry(n.clone()).or_insert(0) += p;
                }
                k.consts = m.into_iter().filter(|(_, p)| *p != 0).collect();
            }
            out.insert((asg.clone(), k), v.clone());
        }
    }
    out
}

fn const_monomials(c: &Components) -> BTreeSet<Vec<(Sym, i32)>> {
    c.parts.values().flat_map(|p| p.keys().map(|k| k.consts.clone())).collect()
}

fn divide(t: &[(Sym, i32)], m: &[(Sym, i32)]) -> Vec<(Sym, i32)> {
    let mut out: BTreeMap<Sym, i32> = t.iter().cloned().collect();
    for (n, p) in m {
        *out.entry(n.clone()).or_insert(0) -= p;
    }
    out.into_iter().filter(|(_, p)| *p != 0).collect()
}

/// A solved linear combination.
#[derive(Clone, Debug)]
pub struct Fit {
    /// (basis index, constant monomial, coefficient), nonzero only.
    pub parts: Vec<(usize, Vec<(Sym, i32)>, Rat)>,
}

impl Fit {
    pub fn expression(&self, basis: &[Expression], free: &[Idx]) -> Expression {
        let mut acc = Expression::zero(free.to_vec());
        for (k, shift, c) in &self.parts {
            let mut e = basis[*k].scale(c);
            for (n, p) in shift {
                e = e.mul_const(n, *p);
            }
            acc = acc.add(&e).expect("same free labels");
        }
        canonicalize(&acc)
    }
}

/// Finds rational coefficients, each possibly times a Laurent monomial in
/// the constants, with Σ c·basis = target. `None` if no combination exists.
pub fn fit(target: &Expression, basis: &[Expression]) -> Option<Fit> {
    let cols: Vec<Vec<Expression>> = basis
        .iter()
        .map(|b| vec![if b.free == target.free { b.clone() } else { Expression::zero(target.free.clone()) }])
        .collect();
    fit_blocks(std::slice::from_ref(target), &cols)
}

/// Simultaneous fit of several targets: `columns[k][j]` is the contribution
/// of unknown `k` to target `j`.
pub fn fit_blocks(targets: &[Expression], columns: &[Vec<Expression>]) -> Option<Fit> {
    let tcs: Vec<Components> = targets.iter().map(|t| t.components()).collect();
    if tcs.iter().all(|c| c.is_zero()) {
        return Some(Fit { parts: Vec::new() });
    }
    let mut wanted: BTreeSet<Vec<(Sym, i32)>> = BTreeSet::new();
    for c in &tcs {
        wanted.extend(const_monomials(c));
    }
    let mut cols: Vec<(usize, Vec<(Sym, i32)>)> = Vec::new();
    let mut rows: BTreeMap<(usize, Coord), Row> = BTreeMap::new();
    for (k, col) in columns.iter().enumerate() {
        let comps: Vec<Components> = col.iter().map(|e| e.components()).collect();
        let mut shifts = BTreeSet::new();
        for c in &comps {
            for m in const_monomials(c) {
                for t in &wanted {
                    shifts.insert(divide(t, &m));
                }
            }
        }
        for s in shifts {
            let j = cols.len();
            cols.push((k, s.clone()));
            for (block, c) in comps.iter().enumerate() {
                for (coord, v) in coords(c, &s) {
                    rows.entry((block, coord)).or_default().insert(j, v);
                }
            }
        }
    }
    let mut rhs: BTreeMap<(usize, Coord), Rat> = BTreeMap::new();
    for (block, c) in tcs.iter().enumerate() {
        for (coord, v) in coords(c, &[]) {
            rows.entry((block, coord.clone())).or_default();
            rhs.insert((block, coord), v);
        }
    }
    let mut ech = Echelon::new();
    for (key, row) in rows {
        let b = rhs.get(&key).cloned().unwrap_or_else(Rat::zero);
        ech.push(row, b);
        if !ech.is_consistent() {
            return None;
        }
    }
    let x = ech.solution(cols.len())?;
    let parts = cols.into_iter().zip(x).filter(|(_, c)| !c.is_zero()).map(|((k, s), c)| (k, s, c)).collect();
    Some(Fit { parts })
}

/// Null space of the column set `basis` (no constant shifts): every
/// vector `c` with Σ c·basis = 0.
pub fn relations(basis: &[Expression]) -> Vec<Vec<Rat>> {
    let mut rows: BTreeMap<Coord, Row> = BTreeMap::new();
    for (j, b) in basis.iter().enumerate() {
        for (coord, v) in coords(&b.components(), &[]) {
            rows.entry(coord).or_default().insert(j, v);
        }
    }
    let mut ech = Echelon::new();
    for (_, row) in rows {
        ech.push(row, Rat::zero());
    }
    ech.nullspace(basis.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{int, FieldSymbol};

    #[test]
    fn pattern_counts() {
        let s = |n| Idx::s(n);
        assert_eq!(tensor_patterns(&[s(0), s(1)]).len(), 1);
        assert_eq!(tensor_patterns(&[s(0), s(1), s(2), s(3)]).len(), 3);
        assert_eq!(tensor_patterns(&[s(0), s(1), s(2)]).len(), 1);
        // η with one δ: C(5,3) · 1
        assert_eq!(tensor_patterns(&[s(0), s(1), s(2), s(3), s(4)]).len(), 10);
        assert_eq!(tensor_patterns(&[s(0), Idx::i(0)]).len(), 0);
    }

    #[test]
    fn fits_eps_contraction() {
        // ε_ijk X_j Y_k as a combination of patterns over X_j Y_k
        let x = Expression::field(FieldSymbol::new("X", vec![Idx::i(1)]));
        let y = Expression::field(FieldSymbol::new("Y", vec![Idx::i(2)]));
        let xy = x.mul(&y).unwrap();
        let target = canonicalize(
            &Expression::eps(Idx::i(0), Idx::i(1), Idx::i(2)).mul(&xy).unwrap().scale(&int(3)).mul_const("Xi", 1),
        );
        let basis = contracted_basis(&xy, &[Idx::i(0)]);
        let f = fit(&target, &basis).unwrap();
        assert!(f.expression(&basis, &target.free).equivalent(&target));
    }

    #[test]
    fn unreachable_target() {
        let x = Expression::field(FieldSymbol::new("X", vec![Idx::i(0)]));
        let y = Expression::field(FieldSymbol::new("Y", vec![Idx::i(0)]));
        assert!(fit(&y, &[x]).is_none());
    }

    #[test]
    fn relation_between_columns() {
        let x = Expression::field(FieldSymbol::new("X", vec![Idx::i(0)]));
        let r = relations(&[x.clone(), x.scale(&int(2))]);
        assert_eq!(r.len(), 1);
        assert_eq!(&r[0][0] * int(1) + &r[0][1] * int(2), int(0));
    }
}
