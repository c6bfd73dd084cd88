use serde::{Deserialize, Serialize};

use super::classify::{partition, reclassify};
use super::{weak_fit, Classification, Hamiltonian, Origin, Partition, WeakOptions};
use crate::bracket::{CMatrix, Constraint, Poisson, Star};
use crate::error::{Error, Result};
use crate::phase::Model;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Generation {
    pub index: usize,
    /// Hamiltonians whose dt-part was checked in this generation.
    pub checked: Vec<String>,
    pub new: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct LoopResult {
    pub generations: Vec<Generation>,
    pub partition: Partition,
    /// C-matrix over the final non-involutive set.
    pub cmatrix: CMatrix,
}

fn constraints(hams: &[Hamiltonian]) -> Vec<Constraint> {
    hams.iter()
        .filter(|h| h.classification == Classification::NonInvolutive)
        .map(|h| Constraint { name: h.name.clone(), density: h.density.clone() })
        .collect()
}

fn next_name(hams: &[Hamiltonian]) -> String {
    let mut n = hams.len() + 1;
    while hams.iter().any(|h| h.name == format!("phi{n}")) {
        n += 1;
    }
    format!("phi{n}")
}

/// Runs dφ = {φ, H₀}* dt + … for every involutive φ until no new
/// Hamiltonian appears. A non-vanishing dt-part R yields φ_new = −R
/// (dφ/dt = −φ_new), or +R when the model's hint says `flip`.
pub fn integrability_loop(
    model: &Model,
    hams: &mut Vec<Hamiltonian>,
    witnesses: Vec<super::Witness>,
    pb: &Poisson,
    c: CMatrix,
    opts: WeakOptions,
    max_generations: usize,
) -> Result<LoopResult> {
    let mut witnesses = witnesses;
    let mut star = Star::new(pb.clone(), c);
    let mut h0 = star.prepare(&model.canonical)?;
    let mut to_check: Vec<usize> =
        (0..hams.len()).filter(|&k| hams[k].classification == Classification::Involutive).collect();
    let mut generations = Vec::new();
    for index in 1..=max_generations {
        let mut fresh: Vec<Hamiltonian> = Vec::new();
        let checked: Vec<String> = to_check.iter().map(|&k| hams[k].name.clone()).collect();
        for &k in &to_check {
            let parent = &hams[k];
            let r = star.with_prepared(&parent.density, &h0)?;
            if weak_fit(&r, hams, opts).is_some() {
                continue;
            }
            let hint = model.hints.iter().find(|h| h.parent == parent.name);
            let mut all = hams.clone();
            all.extend(fresh.iter().cloned());
            let name = hint.map(|h| h.name.clone()).unwrap_or_else(|| next_name(&all));
            let param = hint
                .map(|h| h.param.clone())
                .unwrap_or_else(|| format!("{}_t", parent.param.clone().unwrap_or_else(|| parent.name.clone())));
            let flip = hint.is_some_and(|h| h.flip);
            let (density, normalization) = if flip {
                (r.clone(), format!("{name} = +{{{}, {}}}*", parent.name, model.canonical_name))
            } else {
                (r.neg(), format!("{name} = -{{{}, {}}}*", parent.name, model.canonical_name))
            };
            fresh.push(Hamiltonian {
                name,
                density,
                classification: Classification::Unknown,
                origin: Origin::Integrability(parent.name.clone()),
                param: Some(param),
                normalization: Some(normalization),
            });
        }
        generations.push(Generation { index, checked, new: fresh.iter().map(|h| h.name.clone()).collect() });
        if fresh.is_empty() {
            let p = partition(hams, witnesses);
            return Ok(LoopResult { generations, partition: p, cmatrix: star.c });
        }
        let from = hams.len();
        let before = constraints(hams).len();
        hams.extend(fresh);
        witnesses.extend(reclassify(hams, from, &|f, d| star.with_functional(f, d), opts)?);
        let cons = constraints(hams);
        if cons.len() != before {
            star = Star::new(pb.clone(), CMatrix::build(&cons, pb)?);
            h0 = star.prepare(&model.canonical)?;
        }
        to_check = (from..hams.len()).filter(|&k| hams[k].classification == Classification::Involutive).collect();
    }
    Err(Error::NonTermination(max_generations))
}
