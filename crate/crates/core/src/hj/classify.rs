use serde::{Deserialize, Serialize};

use super::{weak_fit, Classification, Hamiltonian, WeakOptions};
use crate::error::Result;
use crate::expr::{canonicalize, Expression, FieldSymbol};

/// A bracket that failed weak closure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub left: String,
    pub right: String,
    /// `{left(x), ∫right·s}` for a smearing `s`.
    pub bracket: Expression,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub involutive: Vec<String>,
    pub non_involutive: Vec<String>,
    pub witnesses: Vec<Witness>,
}

/// `φ·s` with a fresh smearing `s` carrying φ's free labels.
pub(crate) fn smeared(h: &Hamiltonian, name: &str) -> Expression {
    let s = FieldSymbol::new(name, h.density.free.clone()).with_antisym(crate::bracket::antisym_pair(&h.density));
    canonicalize(&h.density.mul(&Expression::smearing(s)).expect("contraction"))
}

/// Marks every Hamiltonian involutive or non-involutive. A Hamiltonian is
/// non-involutive iff its bracket with some member of `hams` is not a
/// combination of `hams`. `bracket(f, ψ)` computes `{f(x), ∫ψ}`.
pub fn classify(
    hams: &mut [Hamiltonian],
    bracket: &dyn Fn(&Expression, &Expression) -> Result<Expression>,
    opts: WeakOptions,
) -> Result<Partition> {
    for h in hams.iter_mut() {
        h.classification = Classification::Involutive;
    }
    let witnesses = reclassify(hams, 0, bracket, opts)?;
    Ok(partition(hams, witnesses))
}

/// Checks only the pairs involving `hams[from..]`; earlier verdicts stand
/// unless a new pair fails.
pub(crate) fn reclassify(
    hams: &mut [Hamiltonian],
    from: usize,
    bracket: &dyn Fn(&Expression, &Expression) -> Result<Expression>,
    opts: WeakOptions,
) -> Result<Vec<Witness>> {
    let n = hams.len();
    let mut bad = vec![false; n];
    let mut witnesses = Vec::new();
    for m in 0..n {
        for k in m.max(from)..n {
            let r = bracket(&hams[m].density, &smeared(&hams[k], "_s"))?;
            if r.is_identically_zero() {
                continue;
            }
            if weak_fit(&r, hams, opts).is_none() {
                bad[m] = true;
                bad[k] = true;
                witnesses.push(Witness { left: hams[m].name.clone(), right: hams[k].name.clone(), bracket: r });
            }
        }
    }
    for (h, b) in hams.iter_mut().zip(bad) {
        if b {
            h.classification = Classification::NonInvolutive;
        } else if h.classification == Classification::Unknown {
            h.classification = Classification::Involutive;
        }
    }
    Ok(witnesses)
}

pub(crate) fn partition(hams: &[Hamiltonian], witnesses: Vec<Witness>) -> Partition {
    let mut p = Partition { witnesses, ..Default::default() };
    for h in hams {
        match h.classification {
            Classification::NonInvolutive => p.non_involutive.push(h.name.clone()),
            _ => p.involutive.push(h.name.clone()),
        }
    }
    p
}
