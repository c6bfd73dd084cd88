use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;

use super::{canonicalize, Expression, FieldSymbol, Idx, Kind, Sym, Term};
use crate::error::{Error, Result};

/// Right-hand side of a substitution: `expr` with free labels `slots`, in
/// the slot order of the symbol it replaces.
#[derive(Clone, Debug)]
pub struct Binding {
    pub slots: Vec<Idx>,
    pub expr: Expression,
}

impl Binding {
    pub fn new(slots: Vec<Idx>, expr: Expression) -> Result<Self> {
        let mut s = slots.clone();
        s.sort();
        if s != expr.free {
            return Err(Error::Structural(format!(
                "binding signature ({}) does not match expression free indices ({})",
                slots.iter().map(|l| l.label()).collect::<Vec<_>>().join(","),
                expr.free.iter().map(|l| l.label()).collect::<Vec<_>>().join(",")
            )));
        }
        Ok(Binding { slots, expr })
    }
}

impl Term {
    /// ∂_a by Leibniz over fields, smearings and distributions. `a` must not
    /// be a dummy of the term.
    fn derive(&self, a: Idx) -> Vec<Term> {
        let mut out = Vec::new();
        for k in 0..self.fields.len() {
            let mut t = self.clone();
            t.fields[k].derivs.push(a);
            out.push(t);
        }
        for k in 0..self.smearings.len() {
            let mut t = self.clone();
            t.smearings[k].derivs.push(a);
            out.push(t);
        }
        for k in 0..self.dists.len() {
            let mut t = self.clone();
            t.dists[k].push(a);
            out.push(t);
        }
        out
    }
}

impl Expression {
    /// Raw ∂_a without canonicalization.
    pub fn derive_raw(&self, a: Idx) -> Expression {
        debug_assert_eq!(a.kind, Kind::Spatial);
        let avoid: BTreeSet<Idx> = [a].into_iter().collect();
        let mut terms = Vec::new();
        for t in &self.terms {
            let mut t = t.clone();
            t.rename_dummies_avoiding(&avoid);
            terms.extend(t.derive(a));
        }
        let mut free: BTreeSet<Idx> = self.free.iter().copied().collect();
        if !free.remove(&a) {
            free.insert(a);
        }
        Expression { terms, free: free.into_iter().collect() }
    }

    /// ∂_a applied at the point x. If `a` is already free the result is the
    /// contracted divergence.
    pub fn spatial_derivative(&self, a: Idx) -> Result<Expression> {
        if a.kind != Kind::Spatial {
            return Err(Error::IndexKind(format!("derivative index `{a}` is not spatial")));
        }
        Ok(canonicalize(&self.derive_raw(a)))
    }

    /// Simultaneous substitution of symbols (fields or smearings) by
    /// expressions, followed by canonicalization.
    pub fn substitute(&self, bindings: &BTreeMap<Sym, Binding>) -> Result<Expression> {
        Ok(canonicalize(&self.substitute_raw(bindings)?))
    }

    pub fn substitute_raw(&self, bindings: &BTreeMap<Sym, Binding>) -> Result<Expression> {
        let mut acc: Vec<Term> = Vec::new();
        for t in &self.terms {
            acc.extend(substitute_term(t, bindings)?.terms);
        }
        Ok(Expression { terms: acc, free: self.free.clone() })
    }
}

/// Replaces every bound factor in `t`. Returns an expression with the free
/// signature of `t`.
fn substitute_term(t: &Term, bindings: &BTreeMap<Sym, Binding>) -> Result<Expression> {
    let mut rest = t.clone();
    rest.fields.clear();
    rest.smearings.clear();
    let mut pending = Vec::new();
    for f in &t.fields {
        if bindings.contains_key(&f.name) {
            pending.push(f.clone());
        } else {
            rest.fields.push(f.clone());
        }
    }
    for f in &t.smearings {
        if bindings.contains_key(&f.name) {
            pending.push(f.clone());
        } else {
            rest.smearings.push(f.clone());
        }
    }
    if pending.is_empty() {
        return Ok(Expression { terms: vec![t.clone()], free: t.free() });
    }
    let mut cur = Expression { terms: vec![rest], free: Vec::new() };
    let mut used: BTreeSet<Idx> = t.labels().into_iter().collect();
    for f in pending {
        let inner = instantiate(&bindings[&f.name], &f, &used)?;
        used.extend(inner.all_labels());
        cur = multiply_raw(&cur, &inner);
    }
    let free = t.free();
    let terms: Vec<Term> = cur.terms.into_iter().filter(|x| !x.coeff.is_zero()).collect();
    Ok(Expression { terms, free })
}

/// The binding evaluated at the slots and derivatives of `occ`, with its
/// dummies kept clear of `used`.
pub(crate) fn instantiate(b: &Binding, occ: &FieldSymbol, used: &BTreeSet<Idx>) -> Result<Expression> {
    if b.slots.len() != occ.slots.len() {
        return Err(Error::Structural(format!(
            "binding for `{}` has {} slots, occurrence has {}",
            occ.name,
            b.slots.len(),
            occ.slots.len()
        )));
    }
    // go through fresh intermediates so overlapping labels do not interfere
    let mut inner = b.expr.rename_dummies_avoiding(used);
    let mut fresh_map = BTreeMap::new();
    let mut fresh_used = used.clone();
    fresh_used.extend(inner.all_labels());
    for s in &b.slots {
        let fl = super::fresh_label(s.kind, &fresh_used);
        fresh_used.insert(fl);
        fresh_map.insert(*s, fl);
    }
    inner = inner.rename_free(&fresh_map);
    let mut to_target = BTreeMap::new();
    for (s, target) in b.slots.iter().zip(occ.slots.iter()) {
        to_target.insert(fresh_map[s], *target);
    }
    inner = inner.rename_free(&to_target);
    for d in &occ.derivs {
        inner = inner.derive_raw(*d);
    }
    Ok(inner)
}

/// `t` with its `k`-th field (or smearing, when `smearing` is set) replaced
/// by the binding, derivatives included.
pub(crate) fn replace_factor(t: &Term, k: usize, smearing: bool, b: &Binding) -> Result<Expression> {
    let mut rest = t.clone();
    let occ = if smearing { rest.smearings.remove(k) } else { rest.fields.remove(k) };
    let used: BTreeSet<Idx> = t.labels().into_iter().collect();
    let inner = instantiate(b, &occ, &used)?;
    let prod = multiply_raw(&Expression { terms: vec![rest], free: Vec::new() }, &inner);
    Ok(Expression { terms: prod.terms, free: t.free() })
}

/// Term-by-term product of expressions whose dummies are already disjoint.
pub(crate) fn multiply_raw(a: &Expression, b: &Expression) -> Expression {
    let mut terms = Vec::with_capacity(a.terms.len() * b.terms.len());
    for x in &a.terms {
        for y in &b.terms {
            let mut y = y.clone();
            let xl: BTreeSet<Idx> = x.labels().into_iter().collect();
            let yfree: BTreeSet<Idx> = y.free().into_iter().collect();
            let clash: BTreeSet<Idx> = xl.difference(&yfree).copied().collect();
            y.rename_dummies_avoiding(&clash);
            terms.push(x.mul_raw(&y));
        }
    }
    Expression { terms, free: Vec::new() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{Expression, Idx};

    #[test]
    fn derivative_of_constant_vanishes() {
        let e = Expression::scalar(crate::expr::int(5));
        assert!(e.spatial_derivative(Idx::s(0)).unwrap().is_zero());
    }

    #[test]
    fn derivative_moves_onto_distribution() {
        let e = Expression::dist().spatial_derivative(Idx::s(0)).unwrap();
        assert_eq!(e.terms[0].dists[0], vec![Idx::s(0)]);
    }

    #[test]
    fn identity_substitution() {
        let u = FieldSymbol::new("U", vec![Idx::s(0), Idx::i(0)]);
        let e = Expression::field(u.clone()).mul(&Expression::field(FieldSymbol::new("X", vec![Idx::i(0)]))).unwrap();
        let mut b = BTreeMap::new();
        b.insert(crate::expr::sym("U"), Binding::new(u.slots.clone(), Expression::field(u)).unwrap());
        assert_eq!(e.substitute(&b).unwrap(), canonicalize(&e));
    }
}
