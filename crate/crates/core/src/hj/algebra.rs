use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{expand, Classification, Hamiltonian};
use crate::ansatz::{contracted_basis, fit};
use crate::bracket::{relabel, set_labels, Star};
use crate::error::Result;
use crate::expr::{canonicalize, fresh_label, Expression, Idx};

/// `{left(x), right(y)}*` written as Σ c·φ·δ³.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgebraEntry {
    pub left: String,
    pub right: String,
    pub kernel: Expression,
    /// Combination of Hamiltonian placeholders; zero when nothing fits.
    pub structure: Expression,
    /// kernel − expanded structure.
    pub residual: Expression,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AlgebraTable {
    pub entries: Vec<AlgebraEntry>,
    pub closed: bool,
}

/// Structure-constant basis: every invariant tensor times φ_k(x)·δ³.
fn structure_basis(kernel: &Expression, span: &[Hamiltonian]) -> (Vec<Expression>, Vec<Expression>) {
    let mut sym = Vec::new();
    let mut exp = Vec::new();
    for h in span {
        let mut used: BTreeSet<Idx> = kernel.free.iter().copied().collect();
        let labels: Vec<Idx> = h
            .kinds()
            .into_iter()
            .map(|k| {
                let l = fresh_label(k, &used);
                used.insert(l);
                l
            })
            .collect();
        let f = Expression::field(h.placeholder(&labels)).mul(&Expression::dist()).expect("fresh labels");
        for b in contracted_basis(&f, &kernel.free) {
            let Ok(e) = expand(&b, span) else { continue };
            if !e.is_identically_zero() {
                sym.push(b);
                exp.push(e);
            }
        }
    }
    (sym, exp)
}

/// Pairwise star brackets among `names` (including each with itself),
/// each fitted with constant coefficients against the involutive set.
pub fn algebra_table(hams: &[Hamiltonian], names: &[String], star: &Star) -> Result<AlgebraTable> {
    let span: Vec<Hamiltonian> =
        hams.iter().filter(|h| h.classification == Classification::Involutive).cloned().collect();
    let pick: Vec<&Hamiltonian> = names.iter().filter_map(|n| hams.iter().find(|h| &h.name == n)).collect();
    let mut entries = Vec::new();
    for (m, a) in pick.iter().enumerate() {
        for b in &pick[m..] {
            let f = relabel(&a.density, &set_labels(&a.kinds(), 0));
            let g = relabel(&b.density, &set_labels(&b.kinds(), 1));
            let kernel = star.kernel(&f, &g)?;
            let (sym, exp) = structure_basis(&kernel, &span);
            let structure = match fit(&kernel, &exp) {
                Some(fit) => fit.expression(&sym, &kernel.free),
                None => Expression::zero(kernel.free.clone()),
            };
            let residual = canonicalize(&kernel.sub(&expand(&structure, &span)?)?);
            entries.push(AlgebraEntry { left: a.name.clone(), right: b.name.clone(), kernel, structure, residual });
        }
    }
    let closed = entries.iter().all(|e| e.residual.is_identically_zero());
    Ok(AlgebraTable { entries, closed })
}
