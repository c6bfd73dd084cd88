use std::fmt::Write;

use super::{AnalysisReport, EquationRow, MatrixEntry, PartitionRow};
use crate::hj::{Classification, Origin};
use crate::reference::Verdict;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TextStyle {
    /// ANSI bold headings.
    pub color: bool,
}

impl TextStyle {
    pub fn plain() -> Self {
        TextStyle { color: false }
    }

    /// `HJ_COLOR=1` turns styling on; anything else leaves it off.
    pub fn from_env() -> Self {
        TextStyle { color: std::env::var("HJ_COLOR").is_ok_and(|v| v == "1") }
    }

    fn heading(&self, out: &mut String, title: &str) {
        if self.color {
            let _ = writeln!(out, "\n\x1b[1m== {title} ==\x1b[0m");
        } else {
            let _ = writeln!(out, "\n== {title} ==");
        }
    }
}

fn partition(out: &mut String, p: &PartitionRow) {
    let _ = writeln!(out, "  involutive:     {}", p.involutive.join(", "));
    let _ = writeln!(out, "  non-involutive: {}", p.non_involutive.join(", "));
}

fn matrix(out: &mut String, name: &str, es: &[MatrixEntry]) {
    for e in es {
        let _ = writeln!(out, "  {name}[{}, {}] = {}", e.row, e.col, e.value.text);
    }
}

fn equation(out: &mut String, e: &EquationRow, with_dt: bool) {
    let mut parts = Vec::new();
    if with_dt && !e.dt.tree.is_zero() {
        parts.push(format!("({}) dt", e.dt.text));
    }
    for (p, x) in &e.params {
        parts.push(format!("({}) d{p}", x.text));
    }
    let rhs = if parts.is_empty() { "0".to_string() } else { parts.join("\n      + ") };
    let _ = writeln!(out, "  d{} = {rhs}", e.symbol.text);
}

pub(super) fn render(r: &AnalysisReport, style: TextStyle) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "model {}", r.model);
    let _ = writeln!(out, "schema {}", r.schema_version);

    if !r.hamiltonians.is_empty() {
        style.heading(&mut out, "Hamiltonians");
        for h in &r.hamiltonians {
            let class = match h.classification {
                Classification::Involutive => "involutive",
                Classification::NonInvolutive => "non-involutive",
                Classification::Unknown => "unknown",
            };
            let origin = match &h.origin {
                Origin::Primary => "primary".to_string(),
                Origin::Integrability(p) => format!("from {p}"),
            };
            let _ = writeln!(out, "  {} = {}", h.name, h.density.text);
            let mut tags = vec![class.to_string(), origin];
            if let Some(p) = &h.param {
                tags.push(format!("param {p}"));
            }
            if let Some(n) = &h.normalization {
                tags.push(n.clone());
            }
            let _ = writeln!(out, "      [{}]", tags.join("; "));
        }
    }
    if let Some(p) = &r.partition {
        style.heading(&mut out, "Classification");
        partition(&mut out, p);
    }
    if let Some(c) = &r.cmatrix {
        style.heading(&mut out, "C-matrix");
        let _ = writeln!(out, "  over {}", c.names.join(", "));
        matrix(&mut out, "C", &c.entries);
        style.heading(&mut out, "C-matrix inverse");
        matrix(&mut out, "Cinv", &c.inverse);
    }
    if !r.brackets.is_empty() {
        style.heading(&mut out, "Generalized brackets");
        for b in &r.brackets {
            let _ = writeln!(out, "  {{{}, {}}}  = {}", b.left.text, b.right.text, b.poisson.text);
            let _ = writeln!(out, "  {{{}, {}}}* = {}", b.left.text, b.right.text, b.star.text);
        }
    }
    if !r.generations.is_empty() {
        style.heading(&mut out, "Integrability");
        for g in &r.generations {
            let new = if g.new.is_empty() { "nothing new".to_string() } else { g.new.join(", ") };
            let _ = writeln!(out, "  generation {}: checked {} -> {new}", g.index, g.checked.join(", "));
        }
        if let Some(p) = &r.final_partition {
            partition(&mut out, p);
        }
    }
    if let Some(closed) = r.algebra_closed {
        style.heading(&mut out, "Algebra");
        for a in &r.algebra {
            let mark = if a.closes { "" } else { "  [does not close]" };
            let _ = writeln!(out, "  {{{}, {}}}* = {}{mark}", a.left, a.right, a.structure.text);
        }
        let _ = writeln!(out, "  closed: {closed}");
    }
    if !r.reducibility.is_empty() {
        style.heading(&mut out, "Reducibility");
        for x in &r.reducibility {
            let status = if x.holds { "holds" } else { "fails" };
            let _ = writeln!(out, "  {}: {} = {}  [{status}, {} conditions]", x.family, x.lhs.text, x.rhs.text, x.conditions);
        }
    }
    if let Some(d) = &r.dof {
        style.heading(&mut out, "Degrees of freedom");
        let _ = writeln!(out, "  dynamical variables: {}", d.dynamical_count);
        let _ = writeln!(
            out,
            "  involutive constraints: {} - {} reducibility conditions = {}",
            d.raw_involutive, d.reducibility_count, d.independent_involutive
        );
        let _ = writeln!(out, "  DOF = {} - {} = {}", d.dynamical_count, d.independent_involutive, d.dof);
        let _ = writeln!(
            out,
            "  symplectic count: ({} - 2*{} - {})/2 = {}",
            d.phase_space_dim, d.first_class, d.second_class, d.symplectic_dof
        );
    }
    if !r.characteristic.is_empty() {
        style.heading(&mut out, "Characteristic equations");
        for e in &r.characteristic {
            equation(&mut out, e, true);
        }
    }
    if !r.gauge.is_empty() {
        style.heading(&mut out, "Gauge transformations (dt = 0)");
        for e in r.gauge.iter().filter(|e| !e.params.is_empty()) {
            equation(&mut out, e, false);
        }
    }
    if let Some(o) = &r.oracle {
        style.heading(&mut out, "Numeric cross-check");
        let _ = writeln!(out, "  {} reductions from seed {}, tolerance {:e}", o.trials, o.seed, o.tolerance);
        for p in &o.pairs {
            let _ = writeln!(out, "  {}  max deviation {:.3e} (seed {})", p.label, p.max_deviation, p.worst_seed);
        }
        let verdict = if o.passed() { "pass" } else { "FAIL" };
        let _ = writeln!(out, "  overall max deviation {:.3e}: {verdict}", o.max_deviation);
    }
    if !r.comparisons.is_empty() {
        style.heading(&mut out, "Comparison with printed results");
        let matched = r.comparisons.iter().filter(|c| c.verdict == Verdict::Match).count();
        let _ = writeln!(out, "  {matched} of {} displays match exactly", r.comparisons.len());
        for c in r.comparisons.iter().filter(|c| c.verdict != Verdict::Match) {
            let _ = writeln!(out, "  {:?} {}: {:?}", c.section, c.id, c.verdict);
        }
    }
    if !r.diagnostics.is_empty() {
        style.heading(&mut out, "Diagnostics");
        for d in &r.diagnostics {
            let _ = writeln!(out, "  {}: {}", d.topic, d.message);
        }
    }
    out
}
