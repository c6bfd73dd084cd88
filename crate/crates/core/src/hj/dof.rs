use serde::{Deserialize, Serialize};

use super::{Classification, Hamiltonian, Origin, ReducibilityRelation};
use crate::phase::{Model, Role};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DofReport {
    /// Components of the dynamical configuration fields.
    pub dynamical_count: usize,
    /// Components of integrability-generated involutive Hamiltonians.
    pub raw_involutive: usize,
    pub reducibility_count: usize,
    pub independent_involutive: usize,
    pub dof: i64,
    /// Full phase-space dimension (fields and momenta).
    pub phase_space_dim: usize,
    /// Involutive components over the whole phase space, after reducibility.
    pub first_class: usize,
    pub second_class: usize,
    /// (2N − 2·first − second)/2.
    pub symplectic_dof: i64,
    pub diagnostic: Option<String>,
}

pub fn count_dof(model: &Model, hams: &[Hamiltonian], relations: &[ReducibilityRelation]) -> DofReport {
    let dynamical_count: usize =
        model.fields.iter().filter(|f| f.role == Role::Dynamical).map(|f| f.component_count()).sum();
    let involutive = |h: &&Hamiltonian| h.classification == Classification::Involutive;
    let raw_involutive: usize = hams
        .iter()
        .filter(involutive)
        .filter(|h| matches!(h.origin, Origin::Integrability(_)))
        .map(|h| h.component_count())
        .sum();
    let reducibility_count: usize = relations.iter().filter(|r| r.holds()).map(|r| r.conditions()).sum();
    let independent_involutive = raw_involutive.saturating_sub(reducibility_count);
    let dof = dynamical_count as i64 - independent_involutive as i64;
    let phase_space_dim = 2 * model.fields.iter().map(|f| f.component_count()).sum::<usize>();
    let all_involutive: usize = hams.iter().filter(involutive).map(|h| h.component_count()).sum();
    let first_class = all_involutive.saturating_sub(reducibility_count);
    let second_class: usize = hams
        .iter()
        .filter(|h| h.classification == Classification::NonInvolutive)
        .map(|h| h.component_count())
        .sum();
    let symplectic_dof = (phase_space_dim as i64 - 2 * first_class as i64 - second_class as i64) / 2;
    let mut notes = Vec::new();
    if dof < 0 {
        notes.push(format!("negative DOF ({dof}): a Hamiltonian is misclassified or a reducibility relation is missing"));
    }
    if symplectic_dof < 0 {
        notes.push(format!("negative symplectic DOF ({symplectic_dof})"));
    }
    DofReport {
        dynamical_count,
        raw_involutive,
        reducibility_count,
        independent_involutive,
        dof,
        phase_space_dim,
        first_class,
        second_class,
        symplectic_dof,
        diagnostic: if notes.is_empty() { None } else { Some(notes.join("; ")) },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::load_model;

    #[test]
    fn unconstrained_pair_has_one_dof() {
        let m = load_model(
            "model free\nfield q slots=() role=dynamical momentum=p\n\
             bracket {q, p} = D3(x,y)\nhamiltonian H = 1/2*p*p canonical\n",
        )
        .unwrap();
        let r = count_dof(&m, &[], &[]);
        assert_eq!((r.dynamical_count, r.dof, r.symplectic_dof), (1, 1, 1));
        assert!(r.diagnostic.is_none());
    }
}
