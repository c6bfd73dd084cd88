use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use super::{Expression, FieldSymbol, Idx, Kind, Rat, Term};

/// Above this many dummy permutations the renamer falls back to a
/// first-appearance scheme.
const BRUTE_FORCE_LIMIT: usize = 720;

/// Canonical form: ε·ε and η·η expanded into δ's, δ's contracted,
/// antisymmetric slots and Levi-Civita indices sorted with sign, dummies
/// renamed, like terms collected. A result that vanishes on every index
/// value is returned as the zero expression.
pub fn canonicalize(e: &Expression) -> Expression {
    let mut acc: BTreeMap<Term, Rat> = BTreeMap::new();
    for t in &e.terms {
        for nt in normalize(t.clone()) {
            let (key, c) = finish(nt);
            if c.is_zero() {
                continue;
            }
            *acc.entry(key).or_insert_with(Rat::zero) += c;
        }
    }
    let terms: Vec<Term> = acc
        .into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(mut t, c)| {
            t.coeff = c;
            t
        })
        .collect();
    let out = Expression { terms, free: e.free.clone() };
    if !out.terms.is_empty() && out.components().is_zero() {
        return Expression::zero(e.free.clone());
    }
    out
}

/// Applies the rewrite rules that may split a term.
fn normalize(t: Term) -> Vec<Term> {
    let mut out = Vec::new();
    let mut work = vec![t];
    while let Some(mut t) = work.pop() {
        if t.coeff.is_zero() {
            continue;
        }
        contract_deltas(&mut t);
        if t.coeff.is_zero() {
            continue;
        }
        if t.eps.len() >= 2 {
            let a = t.eps.remove(0);
            let b = t.eps.remove(0);
            work.extend(expand_pair(&t, a, b));
            continue;
        }
        if t.eta.len() >= 2 {
            let a = t.eta.remove(0);
            let b = t.eta.remove(0);
            work.extend(expand_pair(&t, a, b));
            continue;
        }
        out.push(t);
    }
    out
}

/// ε_{ijk} ε_{lmn} = det[δ(row, col)].
fn expand_pair(t: &Term, a: [Idx; 3], b: [Idx; 3]) -> Vec<Term> {
    const PERMS: [([usize; 3], i64); 6] = [
        ([0, 1, 2], 1),
        ([1, 2, 0], 1),
        ([2, 0, 1], 1),
        ([0, 2, 1], -1),
        ([2, 1, 0], -1),
        ([1, 0, 2], -1),
    ];
    PERMS
        .iter()
        .map(|(p, s)| {
            let mut nt = t.clone();
            if *s < 0 {
                nt.coeff = -nt.coeff;
            }
            for r in 0..3 {
                nt.deltas.push([a[r], b[p[r]]]);
            }
            nt
        })
        .collect()
}

fn contract_deltas(t: &mut Term) {
    loop {
        let mut changed = false;
        let mut k = 0;
        while k < t.deltas.len() {
            let [x, y] = t.deltas[k];
            if x == y {
                t.deltas.remove(k);
                t.coeff *= Rat::from_integer(3.into());
                changed = true;
                continue;
            }
            let counts = t.label_counts();
            // counts include this delta's own occurrence
            let x_else = counts.get(&x).copied().unwrap_or(0) > 1;
            let y_else = counts.get(&y).copied().unwrap_or(0) > 1;
            if x_else || y_else {
                t.deltas.remove(k);
                let (from, to) = if y_else { (y, x) } else { (x, y) };
                t.map_labels(|l| if l == from { to } else { l });
                changed = true;
                continue;
            }
            k += 1;
        }
        if !changed {
            break;
        }
    }
    for d in t.deltas.iter_mut() {
        d.sort();
    }
    t.deltas.sort();
}

/// Sorts the three labels with sign. Returns 0 on a repeated label.
fn sort3(e: &mut [Idx; 3]) -> i32 {
    if e[0] == e[1] || e[1] == e[2] || e[0] == e[2] {
        return 0;
    }
    let mut sign = 1;
    for i in 0..3 {
        for j in 0..2 - i {
            if e[j] > e[j + 1] {
                e.swap(j, j + 1);
                sign = -sign;
            }
        }
    }
    sign
}

/// Sorts slot-level structure in place; returns the sign picked up, or 0.
fn tidy(t: &mut Term) -> i32 {
    let mut sign = 1;
    for e in t.eps.iter_mut().chain(t.eta.iter_mut()) {
        sign *= sort3(e);
    }
    if sign == 0 {
        return 0;
    }
    for f in t.fields.iter_mut().chain(t.smearings.iter_mut()) {
        let s = tidy_symbol(f);
        if s == 0 {
            return 0;
        }
        sign *= s;
    }
    for d in t.deltas.iter_mut() {
        d.sort();
    }
    for d in t.dists.iter_mut() {
        d.sort();
    }
    t.eps.sort();
    t.eta.sort();
    t.deltas.sort();
    t.fields.sort();
    t.smearings.sort();
    t.dists.sort();
    sign
}

fn tidy_symbol(f: &mut FieldSymbol) -> i32 {
    f.derivs.sort();
    if let Some((p, q)) = f.antisym {
        let (p, q) = (p as usize, q as usize);
        match f.slots[p].cmp(&f.slots[q]) {
            Ordering::Equal => return 0,
            Ordering::Greater => {
                f.slots.swap(p, q);
                return -1;
            }
            Ordering::Less => {}
        }
    }
    1
}

/// Renames dummies canonically and strips the coefficient. Returns the
/// coefficient-free key and the signed coefficient.
fn finish(mut t: Term) -> (Term, Rat) {
    t.consts.retain(|(_, p)| *p != 0);
    t.consts.sort();
    let s = tidy(&mut t);
    if s == 0 {
        return (t, Rat::zero());
    }
    let mut coeff = std::mem::replace(&mut t.coeff, Rat::one());
    if s < 0 {
        coeff = -coeff;
    }
    let counts = t.label_counts();
    let free: BTreeSet<Idx> = counts.iter().filter(|&(_, &c)| c == 1).map(|(l, _)| *l).collect();
    let mut dummies: BTreeMap<Kind, Vec<Idx>> = BTreeMap::new();
    for (l, c) in &counts {
        if *c == 2 {
            dummies.entry(l.kind).or_default().push(*l);
        }
    }
    if dummies.is_empty() {
        return (t, coeff);
    }
    // target pool per kind: smallest labels that are not free
    let mut pools: Vec<(Vec<Idx>, Vec<Idx>)> = Vec::new();
    for (kind, ds) in &dummies {
        let pool: Vec<Idx> = (0u16..)
            .map(|n| Idx::new(*kind, n))
            .filter(|l| !free.contains(l))
            .take(ds.len())
            .collect();
        pools.push((ds.clone(), pool));
    }
    let total: usize = pools.iter().map(|(d, _)| factorial(d.len())).product();
    if total <= BRUTE_FORCE_LIMIT {
        let mut best: Option<(Term, i32)> = None;
        let mut symmetric_zero = false;
        let perms: Vec<Vec<Vec<usize>>> =
            pools.iter().map(|(d, _)| permutations(d.len())).collect();
        let mut choice = vec![0usize; pools.len()];
        loop {
            let mut map = BTreeMap::new();
            for (g, (ds, pool)) in pools.iter().enumerate() {
                for (k, d) in ds.iter().enumerate() {
                    map.insert(*d, pool[perms[g][choice[g]][k]]);
                }
            }
            let mut c = t.clone();
            c.map_labels(|l| *map.get(&l).unwrap_or(&l));
            let s = tidy(&mut c);
            match &best {
                None => best = Some((c, s)),
                Some((b, bs)) => match c.cmp(b) {
                    Ordering::Less => {
                        best = Some((c, s));
                        symmetric_zero = false;
                    }
                    Ordering::Equal => {
                        if s != *bs {
                            symmetric_zero = true;
                        }
                    }
                    Ordering::Greater => {}
                },
            }
            // next combination
            let mut g = 0;
            loop {
                if g == pools.len() {
                    let (b, bs) = best.expect("at least one permutation");
                    if symmetric_zero {
                        return (b, Rat::zero());
                    }
                    if bs < 0 {
                        coeff = -coeff;
                    }
                    return (b, coeff);
                }
                choice[g] += 1;
                if choice[g] < perms[g].len() {
                    break;
                }
                choice[g] = 0;
                g += 1;
            }
        }
    }
    // first-appearance fallback
    let order: Vec<Idx> = t.labels();
    let mut map = BTreeMap::new();
    for (ds, pool) in &pools {
        let mut next = 0;
        for l in &order {
            if ds.contains(l) && !map.contains_key(l) {
                map.insert(*l, pool[next]);
                next += 1;
            }
        }
    }
    t.map_labels(|l| *map.get(&l).unwrap_or(&l));
    if tidy(&mut t) < 0 {
        coeff = -coeff;
    }
    (t, coeff)
}

fn factorial(n: usize) -> usize {
    (1..=n).product::<usize>().max(1)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{int, Expression, FieldSymbol};

    fn i(n: u16) -> Idx {
        Idx::i(n)
    }
    fn s(n: u16) -> Idx {
        Idx::s(n)
    }

    #[test]
    fn eps_eps_contraction() {
        // eps(i,j,k) eps(i,m,n) = delta(j,m)delta(k,n) - delta(j,n)delta(k,m)
        let lhs = Expression::eps(i(0), i(1), i(2)).mul(&Expression::eps(i(0), i(3), i(4))).unwrap();
        let rhs = Expression::delta(i(1), i(3))
            .mul(&Expression::delta(i(2), i(4)))
            .unwrap()
            .sub(&Expression::delta(i(1), i(4)).mul(&Expression::delta(i(2), i(3))).unwrap())
            .unwrap();
        assert_eq!(canonicalize(&lhs), canonicalize(&rhs));
        assert_eq!(canonicalize(&lhs).terms.len(), 2);
    }

    #[test]
    fn full_eps_contraction_is_six() {
        let e = Expression::eps(i(0), i(1), i(2)).mul(&Expression::eps(i(0), i(1), i(2))).unwrap();
        assert_eq!(canonicalize(&e), Expression::scalar(int(6)));
    }

    #[test]
    fn antisymmetric_equal_labels_vanish() {
        let b = FieldSymbol::new("B", vec![s(0), s(0), i(0)]).with_antisym(Some((0, 1)));
        assert!(canonicalize(&Expression::field(b)).is_zero());
    }

    #[test]
    fn antisymmetric_slots_sorted_with_sign() {
        let b1 = FieldSymbol::new("B", vec![s(1), s(0), i(0)]).with_antisym(Some((0, 1)));
        let b2 = FieldSymbol::new("B", vec![s(0), s(1), i(0)]).with_antisym(Some((0, 1)));
        let sum = Expression::field(b1).add(&Expression::field(b2)).unwrap();
        assert!(canonicalize(&sum).is_zero());
    }

    #[test]
    fn delta_contracts_into_field() {
        let x = FieldSymbol::new("X", vec![i(1)]);
        let e = Expression::delta(i(0), i(1)).mul(&Expression::field(x)).unwrap();
        let expect = Expression::field(FieldSymbol::new("X", vec![i(0)]));
        assert_eq!(canonicalize(&e), expect);
    }

    #[test]
    fn dummy_renaming_is_label_independent() {
        let a = |n| FieldSymbol::new("A", vec![s(0), i(n)]);
        let u = |n| FieldSymbol::new("U", vec![s(0), i(n)]);
        let e1 = Expression::field(a(5)).mul(&Expression::field(u(5))).unwrap();
        let e2 = Expression::field(a(2)).mul(&Expression::field(u(2))).unwrap();
        assert_eq!(canonicalize(&e1), canonicalize(&e2));
    }

    #[test]
    fn symmetric_times_antisymmetric_vanishes() {
        let x = |n| FieldSymbol::new("X", vec![i(n)]);
        let e = Expression::eps(i(0), i(1), i(2))
            .mul(&Expression::field(x(0)))
            .unwrap()
            .mul(&Expression::field(x(1)))
            .unwrap();
        assert!(canonicalize(&e).is_zero());
    }

    #[test]
    fn idempotent_on_sample() {
        let a = FieldSymbol::new("A", vec![s(2), i(1)]);
        let e = Expression::eps(i(0), i(1), i(2))
            .mul(&Expression::eta(s(0), s(1), s(2)))
            .unwrap()
            .mul(&Expression::field(a))
            .unwrap();
        let c = canonicalize(&e);
        assert_eq!(canonicalize(&c), c);
    }
}
