use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{expand, Classification, Hamiltonian, Origin};
use crate::ansatz::{contracted_basis, fit};
use crate::error::{Error, Result};
use crate::expr::{canonicalize, fresh_label, Expression, FieldSymbol, Idx, Kind};
use crate::phase::{Model, Role};

/// `lhs = rhs` among Hamiltonian placeholders, with the expanded residual.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducibilityRelation {
    pub family: String,
    pub lhs: Expression,
    pub rhs: Expression,
    pub residual: Expression,
}

impl ReducibilityRelation {
    pub fn holds(&self) -> bool {
        self.residual.is_identically_zero()
    }

    /// Number of scalar conditions: one per free-index component.
    pub fn conditions(&self) -> usize {
        3usize.pow(self.lhs.free.len() as u32)
    }
}

/// Expands both sides and records lhs − rhs.
pub fn verify_relation(family: &str, lhs: &Expression, rhs: &Expression, hams: &[Hamiltonian]) -> Result<ReducibilityRelation> {
    let residual = canonicalize(&expand(lhs, hams)?.sub(&expand(rhs, hams)?)?);
    Ok(ReducibilityRelation { family: family.to_string(), lhs: lhs.clone(), rhs: rhs.clone(), residual })
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

fn multisets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for m in multisets(n, k - 1) {
        for j in m.last().copied().unwrap_or(0)..n {
            let mut v = m.clone();
            v.push(j);
            out.push(v);
        }
    }
    out
}

/// ∂_a φ^{a…} as a combination of involutive Hamiltonians with coefficients
/// built from invariant tensors and up to `degree` dynamical fields.
pub fn discover_relation(model: &Model, family: &Hamiltonian, hams: &[Hamiltonian], degree: usize) -> Result<ReducibilityRelation> {
    let no = || Error::NoRelation(format!("{} (degree {degree})", family.name));
    let slots = family.slots().to_vec();
    let Some(pos) = slots.iter().position(|l| l.kind == Kind::Spatial) else { return Err(no()) };
    let a = slots[pos];
    let mut ph = family.placeholder(&slots);
    ph.derivs.push(a);
    let lhs = canonicalize(&Expression::field(ph));
    let target = expand(&lhs, hams)?;
    let dynamical: Vec<_> = model.fields.iter().filter(|f| f.role == Role::Dynamical).collect();
    let span: Vec<&Hamiltonian> = hams.iter().filter(|h| h.classification == Classification::Involutive).collect();
    let mut sym = Vec::new();
    let mut exp = Vec::new();
    for d in 0..=degree {
        for h in &span {
            for xs in multisets(dynamical.len(), d) {
                let mut used: BTreeSet<Idx> = lhs.all_labels();
                let mut f = Expression::field(h.placeholder(&fresh(&h.kinds(), &mut used)));
                for &x in &xs {
                    let fd = dynamical[x];
                    let s = FieldSymbol::new(&fd.name, fresh(&fd.kinds, &mut used)).with_antisym(fd.antisym);
                    f = f.mul(&Expression::field(s)).expect("fresh labels");
                }
                for b in contracted_basis(&f, &lhs.free) {
                    let Ok(e) = expand(&b, hams) else { continue };
                    if !e.is_identically_zero() {
                        sym.push(b);
                        exp.push(e);
                    }
                }
            }
        }
    }
    let f = fit(&target, &exp).ok_or_else(no)?;
    let rhs = f.expression(&sym, &lhs.free);
    verify_relation(&family.name, &lhs, &rhs, hams)
}

/// Tries every integrability-generated involutive Hamiltonian with exactly
/// one spatial slot.
pub fn find_reducibility(model: &Model, hams: &[Hamiltonian], degree: usize) -> Result<Vec<ReducibilityRelation>> {
    let mut out = Vec::new();
    for h in hams {
        let spatial = h.kinds().iter().filter(|k| **k == Kind::Spatial).count();
        if h.classification != Classification::Involutive || spatial != 1 || !matches!(h.origin, Origin::Integrability(_)) {
            continue;
        }
        match discover_relation(model, h, hams, degree) {
            Ok(r) => out.push(r),
            Err(Error::NoRelation(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}
