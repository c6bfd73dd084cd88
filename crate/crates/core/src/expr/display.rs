use std::fmt;

use num_traits::{One, Signed};

use super::{Expression, FieldSymbol, Idx, Rat, Term};

fn join(ls: &[Idx]) -> String {
    ls.iter().map(|l| l.label()).collect::<Vec<_>>().join(",")
}

fn symbol(f: &FieldSymbol) -> String {
    let mut s = String::new();
    for d in f.derivs.iter().rev() {
        s.push_str(&format!("d({d})@"));
    }
    s.push_str(&f.name);
    if !f.slots.is_empty() {
        s.push_str(&format!("[{}]", join(&f.slots)));
    }
    s
}

/// Factors of a term without its coefficient, in DSL syntax.
pub(crate) fn factors(t: &Term) -> Vec<String> {
    let mut out = Vec::new();
    for (n, p) in &t.consts {
        if *p == 1 {
            out.push(n.to_string());
        } else {
            out.push(format!("{n}^{p}"));
        }
    }
    for e in &t.eps {
        out.push(format!("eps({})", join(e)));
    }
    for e in &t.eta {
        out.push(format!("eta({})", join(e)));
    }
    for d in &t.deltas {
        out.push(format!("delta({})", join(d)));
    }
    for f in &t.fields {
        out.push(symbol(f));
    }
    for f in &t.smearings {
        out.push(symbol(f));
    }
    for d in &t.dists {
        let mut s = String::new();
        for l in d.iter().rev() {
            s.push_str(&format!("d({l})@"));
        }
        s.push_str("D3(x,y)");
        out.push(s);
    }
    out
}

fn magnitude(c: &Rat, fs: &[String]) -> String {
    let a = c.abs();
    if fs.is_empty() {
        return a.to_string();
    }
    let mut s = String::new();
    if !a.is_one() {
        s.push_str(&a.to_string());
        s.push('*');
    }
    s.push_str(&fs.join("*"));
    s
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fs = factors(self);
        if self.coeff.is_negative() {
            f.write_str("-")?;
        }
        f.write_str(&magnitude(&self.coeff, &fs))
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, t) in self.terms.iter().enumerate() {
            let fs = factors(t);
            let neg = t.coeff.is_negative();
            match (k, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            f.write_str(&magnitude(&t.coeff, &fs))?;
        }
        Ok(())
    }
}
