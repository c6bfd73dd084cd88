//! Analysis reports and their text, structured (JSON) and LaTeX forms.

mod latex;
mod text;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::hj::{Classification, DofReport, Generation, Origin};
use crate::oracle::CrossValidation;
use crate::pipeline::{Analysis, BracketStage};
use crate::reference::{Comparison, Verdict};

pub use latex::{latex_expression, LatexNames};
pub use text::TextStyle;

pub const SCHEMA_VERSION: &str = "hj-report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Structured,
    Latex,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(Format::Text),
            "structured" | "json" => Ok(Format::Structured),
            "latex" => Ok(Format::Latex),
            other => Err(Error::Unsupported(format!("output format `{other}`"))),
        }
    }
}

/// An expression in DSL text together with its tree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Expr {
    pub text: String,
    pub tree: Expression,
}

impl From<&Expression> for Expr {
    fn from(e: &Expression) -> Self {
        Expr { text: e.to_string(), tree: e.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianRow {
    pub name: String,
    pub density: Expr,
    pub classification: Classification,
    pub origin: Origin,
    pub param: Option<String>,
    pub normalization: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionRow {
    pub involutive: Vec<String>,
    pub non_involutive: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixEntry {
    pub row: String,
    pub col: String,
    pub value: Expr,
}

/// Nonzero C-matrix and inverse entries. Row labels carry suffix 1 and
/// column labels suffix 2.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CMatrixReport {
    pub names: Vec<String>,
    pub entries: Vec<MatrixEntry>,
    pub inverse: Vec<MatrixEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BracketRow {
    pub left: Expr,
    pub right: Expr,
    pub poisson: Expr,
    pub star: Expr,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgebraRow {
    pub left: String,
    pub right: String,
    pub kernel: Expr,
    pub structure: Expr,
    pub closes: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationRow {
    pub family: String,
    pub lhs: Expr,
    pub rhs: Expr,
    pub holds: bool,
    pub conditions: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquationRow {
    pub variable: String,
    pub symbol: Expr,
    pub dt: Expr,
    pub params: Vec<(String, Expr)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub id: String,
    pub section: crate::reference::Section,
    pub verdict: Verdict,
    pub engine: Expr,
    pub printed: Expr,
    pub residual: Expr,
    pub note: Option<String>,
}

impl From<&Comparison> for ComparisonRow {
    fn from(c: &Comparison) -> Self {
        ComparisonRow {
            id: c.id.clone(),
            section: c.section,
            verdict: c.verdict,
            engine: (&c.engine).into(),
            printed: (&c.printed).into(),
            residual: (&c.residual).into(),
            note: c.note.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub topic: String,
    pub message: String,
}

/// Everything an analysis produced. Sections that were not run are empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: String,
    pub model: String,
    pub hamiltonians: Vec<HamiltonianRow>,
    pub partition: Option<PartitionRow>,
    pub cmatrix: Option<CMatrixReport>,
    pub brackets: Vec<BracketRow>,
    pub generations: Vec<Generation>,
    pub final_partition: Option<PartitionRow>,
    pub algebra: Vec<AlgebraRow>,
    pub algebra_closed: Option<bool>,
    pub reducibility: Vec<RelationRow>,
    pub dof: Option<DofReport>,
    pub characteristic: Vec<EquationRow>,
    pub gauge: Vec<EquationRow>,
    pub oracle: Option<CrossValidation>,
    pub comparisons: Vec<ComparisonRow>,
    pub diagnostics: Vec<Diagnostic>,
    /// LaTeX templates of the model's symbols.
    pub tex: BTreeMap<String, String>,
}

fn cmatrix_report(c: &crate::bracket::CMatrix) -> CMatrixReport {
    let mut entries = Vec::new();
    let mut inverse = Vec::new();
    for (r, rn) in c.names.iter().enumerate() {
        for (k, cn) in c.names.iter().enumerate() {
            for (src, dst) in [(&c.entries, &mut entries), (&c.inverse, &mut inverse)] {
                if !src[r][k].is_zero() {
                    dst.push(MatrixEntry { row: rn.clone(), col: cn.clone(), value: (&src[r][k]).into() });
                }
            }
        }
    }
    CMatrixReport { names: c.names.clone(), entries, inverse }
}

fn partition_row(p: &crate::hj::Partition) -> PartitionRow {
    PartitionRow { involutive: p.involutive.clone(), non_involutive: p.non_involutive.clone() }
}

fn equation_rows(ce: &crate::hj::CharacteristicEquations) -> Vec<EquationRow> {
    ce.per_variable
        .iter()
        .map(|v| EquationRow {
            variable: v.variable.clone(),
            symbol: (&v.symbol).into(),
            dt: (&v.dt).into(),
            params: v.params.iter().map(|(p, e)| (p.clone(), e.into())).collect(),
        })
        .collect()
}

impl AnalysisReport {
    /// A report with no sections.
    pub fn empty(model: &str) -> Self {
        AnalysisReport {
            schema_version: SCHEMA_VERSION.to_string(),
            model: model.to_string(),
            hamiltonians: Vec::new(),
            partition: None,
            cmatrix: None,
            brackets: Vec::new(),
            generations: Vec::new(),
            final_partition: None,
            algebra: Vec::new(),
            algebra_closed: None,
            reducibility: Vec::new(),
            dof: None,
            characteristic: Vec::new(),
            gauge: Vec::new(),
            oracle: None,
            comparisons: Vec::new(),
            diagnostics: Vec::new(),
            tex: BTreeMap::new(),
        }
    }

    /// Primaries, partition, C-matrix and bracket table.
    pub fn from_stage(stage: &BracketStage) -> Self {
        let mut r = AnalysisReport::empty(&stage.model.name);
        r.tex = stage.model.tex.clone();
        r.hamiltonians = stage.hamiltonians.iter().map(hamiltonian_row).collect();
        r.partition = Some(partition_row(&stage.partition));
        r.cmatrix = Some(cmatrix_report(&stage.cmatrix));
        r.brackets = stage
            .brackets
            .iter()
            .map(|b| BracketRow { left: (&b.f).into(), right: (&b.g).into(), poisson: (&b.poisson).into(), star: (&b.star).into() })
            .collect();
        for c in stage.primary_checks.iter().filter(|c| !c.matches) {
            r.diagnostics.push(Diagnostic {
                topic: c.name.clone(),
                message: format!("derived primary {} differs from the declared density", c.derived),
            });
        }
        r
    }

    pub fn from_analysis(a: &Analysis) -> Self {
        let mut r = AnalysisReport::from_stage(&a.stage);
        r.hamiltonians = a.hamiltonians.iter().map(hamiltonian_row).collect();
        r.generations = a.generations.clone();
        r.final_partition = Some(partition_row(&a.final_partition));
        r.algebra = a
            .algebra
            .entries
            .iter()
            .map(|e| AlgebraRow {
                left: e.left.clone(),
                right: e.right.clone(),
                kernel: (&e.kernel).into(),
                structure: (&e.structure).into(),
                closes: e.residual.is_identically_zero(),
            })
            .collect();
        r.algebra_closed = Some(a.algebra.closed);
        r.reducibility = a
            .reducibility
            .iter()
            .map(|x| RelationRow {
                family: x.family.clone(),
                lhs: (&x.lhs).into(),
                rhs: (&x.rhs).into(),
                holds: x.holds(),
                conditions: x.conditions(),
            })
            .collect();
        r.dof = Some(a.dof.clone());
        if let Some(d) = &a.dof.diagnostic {
            r.diagnostics.push(Diagnostic { topic: "dof".into(), message: d.clone() });
        }
        r.characteristic = equation_rows(&a.characteristic);
        r.gauge = equation_rows(&a.gauge);
        for h in &a.hamiltonians {
            if let Some(n) = &h.normalization {
                r.diagnostics.push(Diagnostic { topic: h.name.clone(), message: format!("sign normalization: {n}") });
            }
        }
        r
    }

    pub fn with_oracle(mut self, cv: CrossValidation) -> Self {
        if let Some(f) = &cv.failure {
            self.diagnostics.push(Diagnostic {
                topic: "oracle".into(),
                message: format!("{} deviates by {:e} at seed {}", f.label, f.max_deviation, f.worst_seed),
            });
        }
        self.oracle = Some(cv);
        self
    }

    /// Adds comparisons with the printed results; every non-matching entry
    /// also becomes a diagnostic.
    pub fn with_comparisons(mut self, cs: &[Comparison]) -> Self {
        for c in cs {
            if !c.matches() {
                let mut msg = format!("{:?}: engine - printed = {}", c.verdict, c.residual);
                if let Some(n) = &c.note {
                    msg.push_str(&format!(" ({n})"));
                }
                self.diagnostics.push(Diagnostic { topic: format!("{:?} {}", c.section, c.id), message: msg });
            }
        }
        self.comparisons.extend(cs.iter().map(ComparisonRow::from));
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Structural(format!("report: {e}")))
    }

    pub fn emit(&self, format: Format, style: TextStyle) -> String {
        match format {
            Format::Text => text::render(self, style),
            Format::Structured => {
                let mut s = self.to_json();
                s.push('\n');
                s
            }
            Format::Latex => latex::render(self),
        }
    }
}

fn hamiltonian_row(h: &crate::hj::Hamiltonian) -> HamiltonianRow {
    HamiltonianRow {
        name: h.name.clone(),
        density: (&h.density).into(),
        classification: h.classification,
        origin: h.origin.clone(),
        param: h.param.clone(),
        normalization: h.normalization.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_round_trips() {
        let r = AnalysisReport::empty("toy");
        assert_eq!(AnalysisReport::from_json(&r.to_json()).unwrap(), r);
        assert!(r.emit(Format::Latex, TextStyle::plain()).contains("\\end{document}"));
        assert!(r.emit(Format::Text, TextStyle::plain()).starts_with("model toy"));
    }

    #[test]
    fn format_names() {
        assert_eq!("latex".parse::<Format>().unwrap(), Format::Latex);
        assert!("pdf".parse::<Format>().is_err());
    }
}
