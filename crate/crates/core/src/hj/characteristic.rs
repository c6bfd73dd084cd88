use serde::{Deserialize, Serialize};

use super::{smeared_with_param, Classification, Hamiltonian, Origin};
use crate::bracket::Star;
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::phase::Model;

/// dq = dt·{q, H₀}* + Σ_p dp·{q, ∫φ_p p}*.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariableEquation {
    pub variable: String,
    /// The variable with its slot labels, as it appears on the left.
    pub symbol: Expression,
    pub dt: Expression,
    /// Nonzero parameter parts in Hamiltonian order. Each part is linear in
    /// its parameter, which appears as a smearing symbol.
    pub params: Vec<(String, Expression)>,
}

impl VariableEquation {
    pub fn param(&self, name: &str) -> Option<&Expression> {
        self.params.iter().find(|(p, _)| p == name).map(|(_, e)| e)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicEquations {
    pub per_variable: Vec<VariableEquation>,
}

impl CharacteristicEquations {
    pub fn get(&self, variable: &str) -> Option<&VariableEquation> {
        self.per_variable.iter().find(|v| v.variable == variable)
    }
}

/// Characteristic equations for every field and momentum of the model,
/// driven by H₀ and the involutive Hamiltonians.
pub fn characteristic_equations(model: &Model, hams: &[Hamiltonian], star: &Star) -> Result<CharacteristicEquations> {
    let h0 = star.prepare(&model.canonical)?;
    let mut gens = Vec::new();
    for h in hams.iter().filter(|h| h.classification == Classification::Involutive) {
        let Some(psi) = smeared_with_param(h) else { continue };
        gens.push((h.param.clone().unwrap_or_default(), star.prepare(&psi)?));
    }
    let mut per_variable = Vec::new();
    for name in model.phase_space() {
        let sym = model.symbol_at(&name, 0).ok_or_else(|| Error::UndeclaredSymbol(name.clone()))?;
        let q = Expression::field(sym);
        let dt = star.with_prepared(&q, &h0)?;
        let mut params = Vec::new();
        for (p, g) in &gens {
            let part = star.with_prepared(&q, g)?;
            if !part.is_identically_zero() {
                params.push((p.clone(), part));
            }
        }
        per_variable.push(VariableEquation { variable: name, symbol: q, dt, params });
    }
    Ok(CharacteristicEquations { per_variable })
}

/// The dt = 0 parts generated by integrability Hamiltonians only.
pub fn gauge_transformations(ce: &CharacteristicEquations, hams: &[Hamiltonian]) -> CharacteristicEquations {
    let gauge: Vec<&str> = hams
        .iter()
        .filter(|h| matches!(h.origin, Origin::Integrability(_)) && h.classification == Classification::Involutive)
        .filter_map(|h| h.param.as_deref())
        .collect();
    let per_variable = ce
        .per_variable
        .iter()
        .map(|v| VariableEquation {
            variable: v.variable.clone(),
            symbol: v.symbol.clone(),
            dt: Expression::zero(v.dt.free.clone()),
            params: v.params.iter().filter(|(p, _)| gauge.contains(&p.as_str())).cloned().collect(),
        })
        .collect();
    CharacteristicEquations { per_variable }
}
