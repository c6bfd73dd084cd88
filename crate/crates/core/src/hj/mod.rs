//! The Hamilton–Jacobi pipeline: primary Hamiltonians, classification,
//! integrability, algebra, reducibility, DOF and characteristic equations.

mod algebra;
mod characteristic;
mod classify;
mod dof;
mod integrability;
mod primary;
mod reducibility;
mod weak;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::expr::{Binding, Expression, FieldSymbol, Idx, Kind};
use crate::parse::{SymbolClass, SymbolTable};
use crate::phase::Model;

pub use algebra::{algebra_table, AlgebraEntry, AlgebraTable};
pub use characteristic::{characteristic_equations, gauge_transformations, CharacteristicEquations, VariableEquation};
pub use classify::{classify, Partition, Witness};
pub use dof::{count_dof, DofReport};
pub use integrability::{integrability_loop, Generation, LoopResult};
pub use primary::{derive_primary_hamiltonians, PrimaryCheck};
pub use reducibility::{find_reducibility, verify_relation, ReducibilityRelation};
pub use weak::{weak_fit, WeakOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Unknown,
    Involutive,
    NonInvolutive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "parent")]
pub enum Origin {
    Primary,
    Integrability(String),
}

/// A constraint density with its free-index slots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hamiltonian {
    pub name: String,
    pub density: Expression,
    pub classification: Classification,
    pub origin: Origin,
    pub param: Option<String>,
    /// How the stored sign relates to the raw integrability output.
    pub normalization: Option<String>,
}

impl Hamiltonian {
    pub fn slots(&self) -> &[Idx] {
        &self.density.free
    }

    pub fn kinds(&self) -> Vec<Kind> {
        self.density.free.iter().map(|l| l.kind).collect()
    }

    /// Number of components, counting an antisymmetric pair once.
    pub fn component_count(&self) -> usize {
        let total = 3usize.pow(self.density.free.len() as u32);
        match crate::bracket::antisym_pair(&self.density) {
            Some(_) => total / 3,
            None => total,
        }
    }

    /// The Hamiltonian as an opaque symbol with the given labels.
    pub fn placeholder(&self, labels: &[Idx]) -> FieldSymbol {
        FieldSymbol::new(&self.name, labels.to_vec())
    }
}

/// Replaces Hamiltonian placeholders by their densities.
pub fn expand(e: &Expression, hams: &[Hamiltonian]) -> Result<Expression> {
    let names = e.field_names();
    let mut b = BTreeMap::new();
    for h in hams {
        if names.contains(h.name.as_str()) {
            b.insert(crate::expr::sym(&h.name), Binding::new(h.density.free.clone(), h.density.clone())?);
        }
    }
    if b.is_empty() {
        return Ok(e.clone());
    }
    e.substitute(&b)
}

/// The model's symbols plus every Hamiltonian name, so relations and
/// displays can be written in terms of φ's.
pub fn symbols_with_hamiltonians(model: &Model, hams: &[Hamiltonian]) -> SymbolTable {
    let mut t = model.symbols.clone();
    for h in hams {
        t.declare(&h.name, h.kinds(), None, SymbolClass::Field);
    }
    t
}

/// Gauge-parameter symbols declared as smearings.
pub fn symbols_with_params(base: &SymbolTable, hams: &[Hamiltonian]) -> SymbolTable {
    let mut t = base.clone();
    for h in hams {
        if let Some(p) = &h.param {
            t.declare(p, h.kinds(), crate::bracket::antisym_pair(&h.density), SymbolClass::Smearing);
        }
    }
    t
}

/// The parameter of `h` as a smearing function contracted with its density.
pub fn smeared_with_param(h: &Hamiltonian) -> Option<Expression> {
    let p = h.param.as_ref()?;
    let s = FieldSymbol::new(p, h.density.free.clone()).with_antisym(crate::bracket::antisym_pair(&h.density));
    Some(crate::expr::canonicalize(&h.density.mul(&Expression::smearing(s)).ok()?))
}
