use std::collections::BTreeMap;
use std::fmt::Write;

use num_traits::{One, Signed};

use super::{AnalysisReport, EquationRow, MatrixEntry};
use crate::expr::{Expression, FieldSymbol, Idx, Rat, Term};

/// Symbol templates: `#n` stands for the n-th slot label.
pub type LatexNames = BTreeMap<String, String>;

fn label(l: &Idx) -> String {
    let s = l.label();
    let split = s.find(|c: char| c.is_ascii_digit()).unwrap_or(s.len());
    let (head, tail) = s.split_at(split);
    if tail.is_empty() {
        head.to_string()
    } else {
        format!("{head}_{{{tail}}}")
    }
}

fn labels(ls: &[Idx]) -> String {
    ls.iter().map(label).collect()
}

fn greek(name: &str) -> Option<&'static str> {
    Some(match name {
        "tau" => "\\tau",
        "lam" => "\\lambda",
        "sigma" => "\\sigma",
        "zeta" => "\\zeta",
        "rho" => "\\rho",
        "vphi" => "\\varphi",
        "theta" => "\\theta",
        "xi" => "\\xi",
        "Xi" => "\\Xi",
        "Omega" => "\\Omega",
        _ => return None,
    })
}

fn symbol_name(f: &FieldSymbol, names: &LatexNames) -> String {
    if let Some(t) = names.get(&*f.name) {
        let mut s = t.clone();
        // highest slot first so #1 does not clobber #10
        for (k, l) in f.slots.iter().enumerate().rev() {
            s = s.replace(&format!("#{}", k + 1), &label(l));
        }
        return s;
    }
    let idx = labels(&f.slots);
    let sup = if idx.is_empty() { String::new() } else { format!("{{}}^{{{idx}}}") };
    if let Some(n) = f.name.strip_prefix("phi").filter(|n| n.chars().all(|c| c.is_ascii_digit()) && !n.is_empty()) {
        return format!("\\phi_{{{n}}}{sup}");
    }
    if let Some(base) = f.name.strip_suffix("_t").and_then(greek) {
        return format!("\\tilde{{{base}}}{sup}");
    }
    if let Some(g) = greek(&f.name) {
        return format!("{g}{sup}");
    }
    format!("\\mathrm{{{}}}{sup}", f.name)
}

fn symbol(f: &FieldSymbol, names: &LatexNames) -> String {
    let mut s = String::new();
    for d in f.derivs.iter().rev() {
        let _ = write!(s, "\\partial_{{{}}}", label(d));
    }
    s.push_str(&symbol_name(f, names));
    s
}

fn factors(t: &Term, names: &LatexNames) -> Vec<String> {
    let mut out = Vec::new();
    for (n, p) in &t.consts {
        let base = greek(n).map(str::to_string).unwrap_or_else(|| format!("\\mathrm{{{n}}}"));
        out.push(if *p == 1 { base } else { format!("{base}^{{{p}}}") });
    }
    for e in &t.eps {
        out.push(format!("\\epsilon^{{{}}}", labels(e)));
    }
    for e in &t.eta {
        out.push(format!("\\eta^{{{}}}", labels(e)));
    }
    for d in &t.deltas {
        out.push(format!("\\delta_{{{}}}", labels(d)));
    }
    for f in t.fields.iter().chain(t.smearings.iter()) {
        out.push(symbol(f, names));
    }
    for d in &t.dists {
        let mut s = String::new();
        for l in d.iter().rev() {
            let _ = write!(s, "\\partial_{{{}}}", label(l));
        }
        s.push_str("\\delta^3(x-y)");
        out.push(s);
    }
    out
}

fn coefficient(c: &Rat, bare: bool) -> String {
    let a = c.abs();
    if a.is_one() && !bare {
        return String::new();
    }
    if a.denom().is_one() {
        a.numer().to_string()
    } else {
        format!("\\frac{{{}}}{{{}}}", a.numer(), a.denom())
    }
}

pub fn latex_expression(e: &Expression, names: &LatexNames) -> String {
    if e.terms.is_empty() {
        return "0".to_string();
    }
    let mut s = String::new();
    for (k, t) in e.terms.iter().enumerate() {
        let fs = factors(t, names);
        let neg = t.coeff.is_negative();
        s.push_str(match (k, neg) {
            (0, true) => "-",
            (0, false) => "",
            (_, true) => " - ",
            (_, false) => " + ",
        });
        let c = coefficient(&t.coeff, fs.is_empty());
        s.push_str(&c);
        if !c.is_empty() && !fs.is_empty() {
            s.push(' ');
        }
        s.push_str(&fs.join(" "));
    }
    s
}

fn escape(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        match c {
            '_' | '{' | '}' | '&' | '%' | '$' | '#' => {
                out.push('\\');
                out.push(c);
            }
            '^' => out.push_str("\\^{}"),
            '~' => out.push_str("\\~{}"),
            '\\' => out.push_str("\\textbackslash{}"),
            _ => out.push(c),
        }
    }
    out
}

fn ham_label(name: &str) -> String {
    match name.strip_prefix("phi") {
        Some(n) if !n.is_empty() && n.chars().all(|c| c.is_ascii_digit()) => format!("\\phi_{{{n}}}"),
        _ => format!("\\mathrm{{{}}}", escape(name)),
    }
}

fn matrix(out: &mut String, es: &[MatrixEntry], names: &LatexNames, sym: &str) {
    let lines: Vec<String> = es
        .iter()
        .map(|e| {
            format!(
                "{sym}_{{{}\\,{}}} &= {}",
                ham_label(&e.row),
                ham_label(&e.col),
                latex_expression(&e.value.tree, names)
            )
        })
        .collect();
    align(out, &lines);
}

fn equation(e: &EquationRow, names: &LatexNames, with_dt: bool) -> String {
    let mut parts = Vec::new();
    if with_dt && !e.dt.tree.is_zero() {
        parts.push(format!("\\left({}\\right) dt", latex_expression(&e.dt.tree, names)));
    }
    for (p, x) in &e.params {
        let pf = FieldSymbol::new(p, Vec::new());
        parts.push(format!("\\left({}\\right) d{}", latex_expression(&x.tree, names), symbol_name(&pf, names)));
    }
    let rhs = if parts.is_empty() { "0".to_string() } else { parts.join(" \\\\\n  &\\quad + ") };
    format!("d{} &= {rhs}", latex_expression(&e.symbol.tree, names))
}

fn align(out: &mut String, lines: &[String]) {
    if lines.is_empty() {
        return;
    }
    let _ = writeln!(out, "\\begin{{align*}}");
    let _ = writeln!(out, "{}", lines.join(" \\\\\n"));
    let _ = writeln!(out, "\\end{{align*}}");
}

pub(super) fn render(r: &AnalysisReport) -> String {
    let n = &r.tex;
    let mut out = String::new();
    let _ = writeln!(out, "\\documentclass{{article}}");
    let _ = writeln!(out, "\\usepackage{{amsmath,amssymb}}");
    let _ = writeln!(out, "\\allowdisplaybreaks");
    let _ = writeln!(out, "\\begin{{document}}");
    let _ = writeln!(out, "\\section*{{Model {}}}", escape(&r.model));

    if !r.hamiltonians.is_empty() {
        let _ = writeln!(out, "\\subsection*{{Hamiltonians}}");
        let lines: Vec<String> = r
            .hamiltonians
            .iter()
            .map(|h| format!("{} &= {}", ham_label(&h.name), latex_expression(&h.density.tree, n)))
            .collect();
        align(&mut out, &lines);
    }
    if let Some(p) = &r.final_partition.as_ref().or(r.partition.as_ref()) {
        let list = |v: &[String]| v.iter().map(|x| format!("${}$", ham_label(x))).collect::<Vec<_>>().join(", ");
        let _ = writeln!(out, "\\subsection*{{Classification}}");
        let _ = writeln!(out, "Involutive: {}.\\\\", list(&p.involutive));
        let _ = writeln!(out, "Non-involutive: {}.", list(&p.non_involutive));
    }
    if let Some(c) = &r.cmatrix {
        let _ = writeln!(out, "\\subsection*{{C-matrix and inverse}}");
        matrix(&mut out, &c.entries, n, "C");
        matrix(&mut out, &c.inverse, n, "C^{-1}");
    }
    if !r.brackets.is_empty() {
        let _ = writeln!(out, "\\subsection*{{Generalized brackets}}");
        let lines: Vec<String> = r
            .brackets
            .iter()
            .map(|b| {
                format!(
                    "\\{{{}(x), {}(y)\\}}^* &= {}",
                    latex_expression(&b.left.tree, n),
                    latex_expression(&b.right.tree, n),
                    latex_expression(&b.star.tree, n)
                )
            })
            .collect();
        align(&mut out, &lines);
    }
    if !r.algebra.is_empty() {
        let _ = writeln!(out, "\\subsection*{{Algebra}}");
        let lines: Vec<String> = r
            .algebra
            .iter()
            .map(|a| {
                format!(
                    "\\{{{}(x), {}(y)\\}}^* &= {}",
                    ham_label(&a.left),
                    ham_label(&a.right),
                    latex_expression(&a.structure.tree, n)
                )
            })
            .collect();
        align(&mut out, &lines);
    }
    if !r.reducibility.is_empty() {
        let _ = writeln!(out, "\\subsection*{{Reducibility}}");
        let lines: Vec<String> = r
            .reducibility
            .iter()
            .map(|x| format!("{} &= {}", latex_expression(&x.lhs.tree, n), latex_expression(&x.rhs.tree, n)))
            .collect();
        align(&mut out, &lines);
    }
    if let Some(d) = &r.dof {
        let _ = writeln!(out, "\\subsection*{{Degrees of freedom}}");
        let _ = writeln!(
            out,
            "\\[ \\mathrm{{DOF}} = {} - {} = {} \\]",
            d.dynamical_count, d.independent_involutive, d.dof
        );
    }
    if !r.characteristic.is_empty() {
        let _ = writeln!(out, "\\subsection*{{Characteristic equations}}");
        let lines: Vec<String> = r.characteristic.iter().map(|e| equation(e, n, true)).collect();
        align(&mut out, &lines);
    }
    let gauge: Vec<String> = r.gauge.iter().filter(|e| !e.params.is_empty()).map(|e| equation(e, n, false)).collect();
    if !gauge.is_empty() {
        let _ = writeln!(out, "\\subsection*{{Gauge transformations}}");
        align(&mut out, &gauge);
    }
    if !r.diagnostics.is_empty() {
        let _ = writeln!(out, "\\subsection*{{Diagnostics}}");
        let _ = writeln!(out, "\\begin{{itemize}}");
        for d in &r.diagnostics {
            let _ = writeln!(out, "\\item \\texttt{{{}}}: \\texttt{{{}}}", escape(&d.topic), escape(&d.message));
        }
        let _ = writeln!(out, "\\end{{itemize}}");
    }
    let _ = writeln!(out, "\\end{{document}}");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::{builtin_model, Builtin};

    #[test]
    fn renders_templates_and_tensors() {
        let m = builtin_model(Builtin::Pontryagin);
        let e = m.parse("1/2*Xi^-1*eta(a,b,c)*d(a)@A0[b,i]*eps(i,j,k)").unwrap();
        let s = latex_expression(&e, &m.tex);
        assert!(s.contains("\\frac{1}{2}"), "{s}");
        assert!(s.contains("\\Xi^{-1}"), "{s}");
        assert!(s.contains("\\partial_{b}A_{a0}{}^{i}"), "{s}");
        assert!(s.contains("\\epsilon^{ijk}"), "{s}");
    }

    #[test]
    fn placeholders_and_parameters() {
        let f = FieldSymbol::new("phi12", vec![Idx::s(0), Idx::i(0)]);
        assert_eq!(symbol_name(&f, &LatexNames::new()), "\\phi_{12}{}^{ai}");
        let f = FieldSymbol::new("lam_t", vec![Idx::i(0)]);
        assert_eq!(symbol_name(&f, &LatexNames::new()), "\\tilde{\\lambda}{}^{i}");
    }
}
