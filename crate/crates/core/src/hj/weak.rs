//! Weak closure: writing an expression as a combination of Hamiltonians
//! with invariant-tensor coefficients, optionally times fields.

use std::collections::{BTreeMap, BTreeSet};

use super::{expand, Hamiltonian};
use crate::ansatz::{contracted_basis, fit};
use crate::expr::{canonicalize, fresh_label, Expression, FieldSymbol, Idx, Kind, Sym};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WeakOptions {
    /// Maximum number of field factors in a coefficient.
    pub field_degree: usize,
    /// Allow one spatial derivative on the Hamiltonian or the smearing.
    pub derivatives: bool,
}

impl Default for WeakOptions {
    fn default() -> Self {
        WeakOptions { field_degree: 1, derivatives: true }
    }
}

struct Shape {
    name: Sym,
    kinds: Vec<Kind>,
    antisym: Option<(u8, u8)>,
}

fn shapes(syms: impl Iterator<Item = FieldSymbol>) -> Vec<Shape> {
    let mut seen = BTreeMap::new();
    for f in syms {
        seen.entry(f.name.clone()).or_insert_with(|| Shape {
            name: f.name.clone(),
            kinds: f.slots.iter().map(|l| l.kind).collect(),
            antisym: f.antisym,
        });
    }
    seen.into_values().collect()
}

fn fresh(kinds: &[Kind], used: &mut BTreeSet<Idx>) -> Vec<Idx> {
    kinds
        .iter()
        .map(|k| {
            let l = fresh_label(*k, used);
            used.insert(l);
            l
        })
        .collect()
}

fn has_derivatives(e: &Expression) -> bool {
    e.terms.iter().any(|t| {
        t.fields.iter().chain(t.smearings.iter()).any(|f| !f.derivs.is_empty()) || t.dists.iter().any(|d| !d.is_empty())
    })
}

fn multisets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for m in multisets(n, k - 1) {
        let start = m.last().copied().unwrap_or(0);
        for j in start..n {
            let mut v = m.clone();
            v.push(j);
            out.push(v);
        }
    }
    out
}

/// Writes `r` as Σ (tensor · fields · smearing) · φ, returning the
/// combination with Hamiltonians as placeholder symbols. `None` when `r` is
/// not weakly zero within the ansatz.
pub fn weak_fit(r: &Expression, hams: &[Hamiltonian], opts: WeakOptions) -> Option<Expression> {
    if r.is_identically_zero() {
        return Some(Expression::zero(r.free.clone()));
    }
    let smearings = shapes(r.terms.iter().flat_map(|t| t.smearings.iter().cloned()));
    let fields = shapes(r.terms.iter().flat_map(|t| t.fields.iter().cloned()));
    let derivs = opts.derivatives && has_derivatives(r);
    for degree in 0..=opts.field_degree {
        let mut sym_basis = Vec::new();
        let mut exp_basis = Vec::new();
        for h in hams {
            for variant in 0..if derivs { 3 } else { 1 } {
                if variant == 2 && smearings.is_empty() {
                    continue;
                }
                for xs in multisets(fields.len(), degree) {
                    let mut used: BTreeSet<Idx> = r.free.iter().copied().collect();
                    let mut ph = h.placeholder(&fresh(&h.kinds(), &mut used));
                    let mut factor = Vec::new();
                    for s in &smearings {
                        let mut f = FieldSymbol::new(&s.name, fresh(&s.kinds, &mut used)).with_antisym(s.antisym);
                        if variant == 2 {
                            f.derivs.push(fresh(&[Kind::Spatial], &mut used)[0]);
                        }
                        factor.push(Expression::smearing(f));
                    }
                    if variant == 1 {
                        ph.derivs.push(fresh(&[Kind::Spatial], &mut used)[0]);
                    }
                    factor.push(Expression::field(ph));
                    for &x in &xs {
                        let s = &fields[x];
                        factor.push(Expression::field(
                            FieldSymbol::new(&s.name, fresh(&s.kinds, &mut used)).with_antisym(s.antisym),
                        ));
                    }
                    let mut f = Expression::one();
                    for e in factor {
                        f = f.mul(&e).expect("fresh labels");
                    }
                    for b in contracted_basis(&f, &r.free) {
                        let Ok(e) = expand(&b, hams) else { continue };
                        if e.is_zero() {
                            continue;
                        }
                        sym_basis.push(b);
                        exp_basis.push(e);
                    }
                }
            }
        }
        if let Some(f) = fit(r, &exp_basis) {
            return Some(canonicalize(&f.expression(&sym_basis, &r.free)));
        }
    }
    None
}
