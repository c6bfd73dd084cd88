//! Component expansion: every index takes the values 1, 2, 3 and an
//! expression becomes, for each assignment of its free indices, a polynomial
//! in field components and their derivatives. Two expressions are equal iff
//! their expansions agree.

use std::collections::BTreeMap;

use num_traits::Zero;

use super::{Expression, FieldSymbol, Idx, Rat, Sym, Term};

/// One component of a field or smearing function, with derivative orders
/// along the three spatial directions.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CompVar {
    pub smearing: bool,
    pub name: Sym,
    pub comps: Vec<u8>,
    pub derivs: [u8; 3],
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PolyKey {
    pub consts: Vec<(Sym, i32)>,
    pub dists: Vec<[u8; 3]>,
    pub mono: Vec<(CompVar, u32)>,
}

impl PolyKey {
    pub fn field_degree(&self) -> u32 {
        self.mono.iter().filter(|(v, _)| !v.smearing).map(|(_, p)| *p).sum()
    }
}

pub type Poly = BTreeMap<PolyKey, Rat>;

/// Expansion of an expression, keyed by the values of its free indices
/// (in the order of `Expression::free`).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Components {
    pub free: Vec<Idx>,
    pub parts: BTreeMap<Vec<u8>, Poly>,
}

impl Components {
    pub fn is_zero(&self) -> bool {
        self.parts.values().all(|p| p.is_empty())
    }

    pub fn get(&self, assignment: &[u8]) -> Option<&Poly> {
        self.parts.get(assignment)
    }

    fn add_term(&mut self, assignment: Vec<u8>, key: PolyKey, c: Rat) {
        use std::collections::btree_map::Entry;
        let poly = self.parts.entry(assignment).or_default();
        match poly.entry(key) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                if !c.is_zero() {
                    v.insert(c);
                }
            }
        }
    }

    /// Numeric evaluation at one free-index assignment. Distributions map to
    /// 1 without derivatives and 0 with any.
    pub fn eval(
        &self,
        assignment: &[u8],
        var: &mut dyn FnMut(&CompVar) -> f64,
        constant: &dyn Fn(&str) -> f64,
    ) -> f64 {
        let Some(poly) = self.parts.get(assignment) else { return 0.0 };
        eval_poly(poly, var, constant)
    }
}

pub fn eval_poly(poly: &Poly, var: &mut dyn FnMut(&CompVar) -> f64, constant: &dyn Fn(&str) -> f64) -> f64 {
    let mut total = 0.0;
    for (k, c) in poly {
        if k.dists.iter().any(|d| d.iter().any(|&x| x > 0)) {
            continue;
        }
        let mut v = rat_to_f64(c);
        for (n, p) in &k.consts {
            v *= constant(n).powi(*p);
        }
        for (cv, p) in &k.mono {
            v *= var(cv).powi(*p as i32);
        }
        total += v;
    }
    total
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

fn perm_sign(v: &[u8; 3]) -> i32 {
    if v[0] == v[1] || v[1] == v[2] || v[0] == v[2] {
        return 0;
    }
    let mut inv = 0;
    for a in 0..3 {
        for b in a + 1..3 {
            if v[a] > v[b] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

fn comp_var(f: &FieldSymbol, val: &BTreeMap<Idx, u8>, smearing: bool) -> Option<(CompVar, i32)> {
    let mut comps: Vec<u8> = f.slots.iter().map(|l| val[l]).collect();
    let mut sign = 1;
    if let Some((p, q)) = f.antisym {
        let (p, q) = (p as usize, q as usize);
        if comps[p] == comps[q] {
            return None;
        }
        if comps[p] > comps[q] {
            comps.swap(p, q);
            sign = -1;
        }
    }
    let mut derivs = [0u8; 3];
    for d in &f.derivs {
        derivs[val[d] as usize] += 1;
    }
    Some((CompVar { smearing, name: f.name.clone(), comps, derivs }, sign))
}

fn expand_term(t: &Term, free: &[Idx], out: &mut Components) {
    let labels: Vec<Idx> = {
        let mut ls: Vec<Idx> = t.label_counts().into_keys().collect();
        // free labels first keeps assignment keys cheap to build
        ls.sort_by_key(|l| (!free.contains(l), *l));
        ls
    };
    let pos: BTreeMap<Idx, usize> = labels.iter().enumerate().map(|(k, l)| (*l, k)).collect();
    // constraint checks scheduled at the position of their last label
    let mut checks: Vec<Vec<Check>> = vec![Vec::new(); labels.len().max(1)];
    for d in &t.deltas {
        let at = pos[&d[0]].max(pos[&d[1]]);
        checks[at].push(Check::Equal(d[0], d[1]));
    }
    for e in t.eps.iter().chain(t.eta.iter()) {
        let at = e.iter().map(|l| pos[l]).max().unwrap();
        checks[at].push(Check::Distinct3(*e));
    }
    for f in t.fields.iter().chain(t.smearings.iter()) {
        if let Some((p, q)) = f.antisym {
            let (a, b) = (f.slots[p as usize], f.slots[q as usize]);
            let at = pos[&a].max(pos[&b]);
            checks[at].push(Check::Distinct2(a, b));
        }
    }
    let mut val: BTreeMap<Idx, u8> = BTreeMap::new();
    assign(t, free, &labels, 0, &checks, &mut val, out);
}

#[derive(Clone)]
enum Check {
    Equal(Idx, Idx),
    Distinct2(Idx, Idx),
    Distinct3([Idx; 3]),
}

fn assign(
    t: &Term,
    free: &[Idx],
    labels: &[Idx],
    k: usize,
    checks: &[Vec<Check>],
    val: &mut BTreeMap<Idx, u8>,
    out: &mut Components,
) {
    if k == labels.len() {
        emit(t, free, val, out);
        return;
    }
    for v in 0..3u8 {
        val.insert(labels[k], v);
        let ok = checks[k].iter().all(|c| match c {
            Check::Equal(a, b) => val[a] == val[b],
            Check::Distinct2(a, b) => val[a] != val[b],
            Check::Distinct3(e) => {
                let (x, y, z) = (val[&e[0]], val[&e[1]], val[&e[2]]);
                x != y && y != z && x != z
            }
        });
        if ok {
            assign(t, free, labels, k + 1, checks, val, out);
        }
    }
    val.remove(&labels[k]);
}

fn emit(t: &Term, free: &[Idx], val: &BTreeMap<Idx, u8>, out: &mut Components) {
    let mut sign = 1i32;
    for e in t.eps.iter().chain(t.eta.iter()) {
        sign *= perm_sign(&[val[&e[0]], val[&e[1]], val[&e[2]]]);
    }
    let mut mono: BTreeMap<CompVar, u32> = BTreeMap::new();
    for (f, sm) in t.fields.iter().map(|f| (f, false)).chain(t.smearings.iter().map(|f| (f, true))) {
        match comp_var(f, val, sm) {
            None => return,
            Some((cv, s)) => {
                sign *= s;
                *mono.entry(cv).or_insert(0) += 1;
            }
        }
    }
    if sign == 0 {
        return;
    }
    let mut dists: Vec<[u8; 3]> = t
        .dists
        .iter()
        .map(|d| {
            let mut a = [0u8; 3];
            for l in d {
                a[val[l] as usize] += 1;
            }
            a
        })
        .collect();
    dists.sort();
    let mut consts = t.consts.clone();
    consts.retain(|(_, p)| *p != 0);
    consts.sort();
    let key = PolyKey { consts, dists, mono: mono.into_iter().collect() };
    let assignment: Vec<u8> = free.iter().map(|l| val[l]).collect();
    let mut c = t.coeff.clone();
    if sign < 0 {
        c = -c;
    }
    out.add_term(assignment, key, c);
}

impl Expression {
    /// Component expansion of the expression.
    pub fn components(&self) -> Components {
        let mut out = Components { free: self.free.clone(), parts: BTreeMap::new() };
        for t in &self.terms {
            if t.coeff.is_zero() {
                continue;
            }
            expand_term(t, &self.free, &mut out);
        }
        out.parts.retain(|_, p| !p.is_empty());
        out
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::{int, Expression, FieldSymbol, Idx};

    #[test]
    fn delta_trace_is_three() {
        let e = Expression::delta(Idx::i(0), Idx::i(0));
        let c = e.components();
        let p = c.get(&[]).unwrap();
        assert_eq!(p.values().next().unwrap(), &int(3));
    }

    #[test]
    fn eps_components_are_signs() {
        let e = Expression::eps(Idx::i(0), Idx::i(1), Idx::i(2));
        let c = e.components();
        assert_eq!(c.parts.len(), 6);
        let p = c.get(&[1, 0, 2]).unwrap();
        assert_eq!(p.values().next().unwrap(), &int(-1));
    }

    #[test]
    fn antisymmetric_components_fold() {
        let b = |x: u16, y: u16| {
            Expression::field(FieldSymbol::new("B", vec![Idx::s(x), Idx::s(y)]).with_antisym(Some((0, 1))))
        };
        let sum = b(0, 1).add(&b(1, 0).rename_free(&Default::default())).unwrap();
        assert!(sum.components().is_zero());
    }
}
