//! End-to-end analysis of a model.

use crate::bracket::{CMatrix, Constraint, Poisson, Star};
use crate::error::Result;
use crate::expr::{Expression, FieldSymbol, Idx, Kind};
use crate::hj::{
    algebra_table, characteristic_equations, classify, count_dof, derive_primary_hamiltonians, find_reducibility,
    gauge_transformations, integrability_loop, AlgebraTable, CharacteristicEquations, Classification, DofReport,
    Generation, Hamiltonian, Origin, Partition, PrimaryCheck, ReducibilityRelation, WeakOptions,
};
use crate::oracle::{cross_validate, CrossValidation, Oracle, OraclePair};
use crate::phase::Model;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Options {
    pub weak: WeakOptions,
    pub max_generations: usize,
    /// Field degree of reducibility coefficients.
    pub ansatz_degree: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options { weak: WeakOptions::default(), max_generations: 10, ansatz_degree: 1 }
    }
}

/// One entry of the bracket table between phase-space variables.
#[derive(Clone, Debug, PartialEq)]
pub struct BracketEntry {
    pub left: String,
    pub right: String,
    pub f: Expression,
    pub g: Expression,
    pub poisson: Expression,
    pub star: Expression,
}

/// Everything up to and including the generalized brackets.
#[derive(Clone, Debug)]
pub struct BracketStage {
    pub model: Model,
    pub primary_checks: Vec<PrimaryCheck>,
    pub hamiltonians: Vec<Hamiltonian>,
    pub partition: Partition,
    pub cmatrix: CMatrix,
    pub brackets: Vec<BracketEntry>,
}

#[derive(Clone, Debug)]
pub struct Analysis {
    pub stage: BracketStage,
    /// Primaries plus integrability Hamiltonians, classified.
    pub hamiltonians: Vec<Hamiltonian>,
    pub generations: Vec<Generation>,
    pub final_partition: Partition,
    pub final_cmatrix: CMatrix,
    pub algebra: AlgebraTable,
    pub reducibility: Vec<ReducibilityRelation>,
    pub dof: DofReport,
    pub characteristic: CharacteristicEquations,
    pub gauge: CharacteristicEquations,
}

/// Labels for the left (`offset` 0) or right (`offset` 1) argument of a
/// displayed bracket: `a,b,i` on the left and `c,d,j` on the right.
pub fn display_labels(kinds: &[Kind], right: bool) -> Vec<Idx> {
    let (mut s, mut i) = if right { (2u16, 1u16) } else { (0, 0) };
    kinds
        .iter()
        .map(|k| match k {
            Kind::Spatial => {
                s += 1;
                Idx::s(s - 1)
            }
            Kind::Internal => {
                i += 1;
                Idx::i(i - 1)
            }
        })
        .collect()
}

pub fn display_symbol(model: &Model, name: &str, right: bool) -> Option<Expression> {
    let (f, _) = model.phase_symbol(name)?;
    Some(Expression::field(FieldSymbol::new(name, display_labels(&f.kinds, right)).with_antisym(f.antisym)))
}

pub fn non_involutive_constraints(hams: &[Hamiltonian]) -> Vec<Constraint> {
    hams.iter()
        .filter(|h| h.classification == Classification::NonInvolutive)
        .map(|h| Constraint { name: h.name.clone(), density: h.density.clone() })
        .collect()
}

/// Primaries, classification, C-matrix and the generalized bracket table.
/// The table holds every pair whose Poisson or generalized bracket is
/// nonzero.
pub fn bracket_stage(model: &Model, opts: &Options) -> Result<BracketStage> {
    let pb = Poisson::new(&model.table);
    let (mut hams, primary_checks) = derive_primary_hamiltonians(model)?;
    let partition = classify(&mut hams, &|f, d| pb.with_functional(f, d), opts.weak)?;
    let cmatrix = CMatrix::build(&non_involutive_constraints(&hams), &pb)?;
    let star = Star::new(pb.clone(), cmatrix.clone());
    let names = model.phase_space();
    let mut brackets = Vec::new();
    for (k, u) in names.iter().enumerate() {
        for v in &names[k..] {
            let f = display_symbol(model, u, false).expect("declared");
            let g = display_symbol(model, v, true).expect("declared");
            let poisson = pb.kernel(&f, &g)?;
            let st = star.kernel(&f, &g)?;
            if poisson.is_identically_zero() && st.is_identically_zero() {
                continue;
            }
            brackets.push(BracketEntry { left: u.clone(), right: v.clone(), f, g, poisson, star: st });
        }
    }
    Ok(BracketStage { model: model.clone(), primary_checks, hamiltonians: hams, partition, cmatrix, brackets })
}

pub fn analyze(model: &Model, opts: &Options) -> Result<Analysis> {
    let stage = bracket_stage(model, opts)?;
    let pb = Poisson::new(&model.table);
    let mut hams = stage.hamiltonians.clone();
    let lr = integrability_loop(
        model,
        &mut hams,
        stage.partition.witnesses.clone(),
        &pb,
        stage.cmatrix.clone(),
        opts.weak,
        opts.max_generations,
    )?;
    let star = Star::new(pb.clone(), lr.cmatrix.clone());
    let secondary: Vec<String> = hams
        .iter()
        .filter(|h| matches!(h.origin, Origin::Integrability(_)) && h.classification == Classification::Involutive)
        .map(|h| h.name.clone())
        .collect();
    let algebra = algebra_table(&hams, &secondary, &star)?;
    let reducibility = find_reducibility(model, &hams, opts.ansatz_degree)?;
    let dof = count_dof(model, &hams, &reducibility);
    let characteristic = characteristic_equations(model, &hams, &star)?;
    let gauge = gauge_transformations(&characteristic, &hams);
    Ok(Analysis {
        stage,
        hamiltonians: hams,
        generations: lr.generations,
        final_partition: lr.partition,
        final_cmatrix: lr.cmatrix,
        algebra,
        reducibility,
        dof,
        characteristic,
        gauge,
    })
}

impl Analysis {
    pub fn hamiltonian(&self, name: &str) -> Option<&Hamiltonian> {
        self.hamiltonians.iter().find(|h| h.name == name)
    }

    pub fn star(&self) -> Star<'_> {
        Star::new(Poisson::new(&self.stage.model.table), self.final_cmatrix.clone())
    }
}

/// Numeric check of every generalized-bracket table entry.
pub fn validate_brackets(stage: &BracketStage, trials: usize, tol: f64, seed: u64) -> Result<CrossValidation> {
    let second: Vec<Expression> = non_involutive_constraints(&stage.hamiltonians).into_iter().map(|c| c.density).collect();
    let oracle = Oracle::new(&stage.model, &second)?;
    let pairs: Vec<OraclePair> = stage
        .brackets
        .iter()
        .map(|b| OraclePair {
            label: format!("{{{}, {}}}*", b.left, b.right),
            f: b.f.clone(),
            g: b.g.clone(),
            kernel: b.star.clone(),
        })
        .collect();
    cross_validate(&oracle, &pairs, trials, tol, seed)
}
