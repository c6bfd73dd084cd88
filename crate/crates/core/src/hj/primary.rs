use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Classification, Hamiltonian, Origin};
use crate::error::{Error, Result};
use crate::expr::{canonicalize, Expression, FieldSymbol, Idx};
use crate::phase::{rename_simultaneous, slot_labels, HamDecl, Model};

/// Derived primary against the model's declared one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimaryCheck {
    pub name: String,
    pub derived: Expression,
    pub declared: Option<Expression>,
    pub matches: bool,
}

fn declared_for<'m>(model: &'m Model, momentum: &str) -> Option<&'m HamDecl> {
    model.primaries.iter().find(|h| h.density.field_names().iter().any(|n| &**n == momentum))
}

/// φ = p − (coefficient of the velocity) for every field; φ = p when the
/// field has no velocity term. Without kinetic declarations the declared
/// primaries are taken as given.
pub fn derive_primary_hamiltonians(model: &Model) -> Result<(Vec<Hamiltonian>, Vec<PrimaryCheck>)> {
    let from_decl = |d: &HamDecl| Hamiltonian {
        name: d.name.clone(),
        density: d.density.clone(),
        classification: Classification::Unknown,
        origin: Origin::Primary,
        param: d.param.clone(),
        normalization: None,
    };
    if model.kinetic.is_empty() {
        return Ok((model.primaries.iter().map(from_decl).collect(), Vec::new()));
    }
    let momenta: Vec<&str> = model.fields.iter().map(|f| f.momentum.as_str()).collect();
    let mut hams = Vec::new();
    let mut checks = Vec::new();
    for f in &model.fields {
        let kin = model.kinetic.iter().find(|k| k.field == f.name);
        let slots: Vec<Idx> = match kin {
            Some(k) => k.slots.clone(),
            None => slot_labels(&f.kinds, 0, 8).0,
        };
        let p = Expression::field(FieldSymbol::new(&f.momentum, slots.clone()).with_antisym(f.antisym));
        let mut phi = p.clone();
        if let Some(k) = kin {
            if k.coeff.field_names().iter().any(|n| momenta.contains(&&**n)) {
                return Err(Error::Unsupported(format!(
                    "velocity coefficient of `{}` depends on momenta; only first-order Lagrangians are supported",
                    f.name
                )));
            }
            if !k.coeff.is_zero() {
                phi = phi.sub(&k.coeff)?;
            }
        }
        let mut phi = canonicalize(&phi);
        let decl = declared_for(model, &f.momentum);
        if let Some(d) = decl {
            let map: BTreeMap<Idx, Idx> = slots.iter().copied().zip(d.slots.iter().copied()).collect();
            phi = canonicalize(&rename_simultaneous(&phi, &map));
            let matches = phi.free == d.density.free && phi.equivalent(&d.density);
            checks.push(PrimaryCheck {
                name: d.name.clone(),
                derived: phi.clone(),
                declared: Some(d.density.clone()),
                matches,
            });
            hams.push(Hamiltonian { density: phi, ..from_decl(d) });
        } else {
            let name = format!("phi{}", hams.len() + 1);
            checks.push(PrimaryCheck { name: name.clone(), derived: phi.clone(), declared: None, matches: true });
            hams.push(Hamiltonian {
                name,
                density: phi,
                classification: Classification::Unknown,
                origin: Origin::Primary,
                param: None,
                normalization: None,
            });
        }
    }
    Ok((hams, checks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::{builtin_model, load_model, Builtin};

    #[test]
    fn builtin_primaries_match_declarations() {
        for b in [Builtin::Pontryagin, Builtin::Euler] {
            let m = builtin_model(b);
            let (hams, checks) = derive_primary_hamiltonians(&m).unwrap();
            assert_eq!(hams.len(), 8);
            assert!(checks.iter().all(|c| c.matches), "{checks:?}");
            let names: Vec<_> = hams.iter().map(|h| h.name.as_str()).collect();
            assert_eq!(names, ["phi1", "phi2", "phi3", "phi4", "phi5", "phi6", "phi7", "phi8"]);
        }
    }

    #[test]
    fn multiplier_gives_bare_momentum() {
        let m = builtin_model(Builtin::Pontryagin);
        let (hams, _) = derive_primary_hamiltonians(&m).unwrap();
        assert!(hams[2].density.equivalent(&m.parse("Th[i]").unwrap()));
    }

    #[test]
    fn constant_velocity_coefficient() {
        let src = "model toy\nconst c\nfield q slots=(internal) role=dynamical momentum=p\n\
                   field X slots=(internal) role=auxiliary momentum=pX\n\
                   bracket {q[i], p[j]} = delta(i,j)*D3(x,y)\n\
                   bracket {X[i], pX[j]} = delta(i,j)*D3(x,y)\n\
                   kinetic q[i] = c*X[i]\nhamiltonian H = 0 canonical\n";
        let m = load_model(src).unwrap();
        let (hams, _) = derive_primary_hamiltonians(&m).unwrap();
        assert!(hams[0].density.equivalent(&m.parse("p[i] - c*X[i]").unwrap()));
        assert!(hams[1].density.equivalent(&m.parse("pX[i]").unwrap()));
    }

    #[test]
    fn momentum_in_coefficient_is_unsupported() {
        let src = "model toy\nfield q slots=(internal) role=dynamical momentum=p\n\
                   bracket {q[i], p[j]} = delta(i,j)*D3(x,y)\n\
                   kinetic q[i] = p[i]\nhamiltonian H = 0 canonical\n";
        let m = load_model(src).unwrap();
        assert!(matches!(derive_primary_hamiltonians(&m), Err(Error::Unsupported(_))));
    }
}
