//! Phase-space declarations: fields, momenta, constants, the fundamental
//! bracket table and the Hamiltonians a model starts from.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{canonicalize, Expression, FieldSymbol, Idx, Kind};
use crate::parse::{self, Directive, SymbolClass, SymbolTable};

const PONTRYAGIN_SRC: &str = include_str!("../models/pontryagin.hj");
const EULER_SRC: &str = include_str!("../models/euler.hj");

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Dynamical,
    Multiplier,
    Auxiliary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldDecl {
    pub name: String,
    pub kinds: Vec<Kind>,
    pub antisym: Option<(u8, u8)>,
    pub role: Role,
    pub momentum: String,
}

impl FieldDecl {
    /// Number of independent components.
    pub fn component_count(&self) -> usize {
        let total = 3usize.pow(self.kinds.len() as u32);
        match self.antisym {
            Some(_) => total / 3,
            None => total,
        }
    }
}

/// A declared bracket {left, right} with its δ³ stripped. `coeff` carries
/// the slot labels of both symbols as free indices.
#[derive(Clone, Debug, PartialEq)]
pub struct BracketEntry {
    pub left: String,
    pub left_slots: Vec<Idx>,
    pub right: String,
    pub right_slots: Vec<Idx>,
    pub coeff: Expression,
}

/// Fundamental brackets. Only declared pairs are stored; the reverse
/// orientation is derived on lookup.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BracketTable {
    pub entries: Vec<BracketEntry>,
}

impl BracketTable {
    /// Coefficient tensor of {u, v}: free labels are `u_slots` ∪ `v_slots`.
    pub fn lookup(&self, u: &str, u_slots: &[Idx], v: &str, v_slots: &[Idx]) -> Option<Expression> {
        for e in &self.entries {
            let (sign, ls, rs) = if e.left == u && e.right == v {
                (1, u_slots, v_slots)
            } else if e.left == v && e.right == u {
                (-1, v_slots, u_slots)
            } else {
                continue;
            };
            let mut map = BTreeMap::new();
            for (a, b) in e.left_slots.iter().zip(ls) {
                map.insert(*a, *b);
            }
            for (a, b) in e.right_slots.iter().zip(rs) {
                map.insert(*a, *b);
            }
            let c = rename_simultaneous(&e.coeff, &map);
            return Some(if sign < 0 { c.neg() } else { c });
        }
        None
    }

    /// Symbols that have at least one nonzero bracket with `u`.
    pub fn partners(&self, u: &str) -> Vec<String> {
        let mut out = BTreeSet::new();
        for e in &self.entries {
            if e.left == u {
                out.insert(e.right.clone());
            }
            if e.right == u {
                out.insert(e.left.clone());
            }
        }
        out.into_iter().collect()
    }

    /// Canonical table {q, p_q} = Πδ·δ³, with antisymmetric slots projected.
    pub fn canonical(fields: &[FieldDecl]) -> BracketTable {
        let mut entries = Vec::new();
        for f in fields {
            let (ls, rs) = slot_labels(&f.kinds, 0, f.kinds.len() as u16);
            let coeff = identity_tensor(&ls, &rs, f.antisym);
            entries.push(BracketEntry {
                left: f.name.clone(),
                left_slots: ls,
                right: f.momentum.clone(),
                right_slots: rs,
                coeff,
            });
        }
        BracketTable { entries }
    }
}

/// Relabels free indices through an intermediate fresh set so that
/// overlapping source and target labels do not interfere.
pub fn rename_simultaneous(e: &Expression, map: &BTreeMap<Idx, Idx>) -> Expression {
    let mut used: BTreeSet<Idx> = e.all_labels();
    used.extend(map.values().copied());
    let mut step1 = BTreeMap::new();
    let mut step2 = BTreeMap::new();
    for (from, to) in map {
        let mid = crate::expr::fresh_label(from.kind, &used);
        used.insert(mid);
        step1.insert(*from, mid);
        step2.insert(mid, *to);
    }
    e.rename_free(&step1).rename_free(&step2)
}

/// Two disjoint label lists for the given slot kinds.
pub fn slot_labels(kinds: &[Kind], base: u16, stride: u16) -> (Vec<Idx>, Vec<Idx>) {
    let mut counts: BTreeMap<Kind, u16> = BTreeMap::new();
    let mut l = Vec::new();
    let mut r = Vec::new();
    for k in kinds {
        let c = counts.entry(*k).or_insert(0);
        l.push(Idx::new(*k, base + *c));
        r.push(Idx::new(*k, base + stride + *c));
        *c += 1;
    }
    (l, r)
}

/// Π δ(l_s, r_s), antisymmetrized on the given slot pair with weight ½.
pub fn identity_tensor(ls: &[Idx], rs: &[Idx], antisym: Option<(u8, u8)>) -> Expression {
    let mut e = Expression::one();
    for (a, b) in ls.iter().zip(rs) {
        e = e.mul(&Expression::delta(*a, *b)).expect("disjoint labels");
    }
    if let Some((p, q)) = antisym {
        let (p, q) = (p as usize, q as usize);
        let mut swapped = BTreeMap::new();
        swapped.insert(rs[p], rs[q]);
        swapped.insert(rs[q], rs[p]);
        let other = rename_simultaneous(&e, &swapped);
        e = e.sub(&other).expect("same signature").scale(&crate::expr::rat(1, 2));
    }
    canonicalize(&e)
}

/// A declared Hamiltonian density with its free-index slots.
#[derive(Clone, Debug, PartialEq)]
pub struct HamDecl {
    pub name: String,
    pub slots: Vec<Idx>,
    pub density: Expression,
    pub param: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KineticDecl {
    pub field: String,
    pub slots: Vec<Idx>,
    pub coeff: Expression,
}

/// Naming and sign hint for an integrability-generated Hamiltonian.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecondaryHint {
    pub name: String,
    pub parent: String,
    pub param: String,
    pub flip: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub name: String,
    pub constants: Vec<String>,
    pub fields: Vec<FieldDecl>,
    pub table: BracketTable,
    /// H₀. The generator H′ = Π + H₀ is implied; Π never enters brackets.
    pub canonical: Expression,
    pub canonical_name: String,
    pub primaries: Vec<HamDecl>,
    pub kinetic: Vec<KineticDecl>,
    pub hints: Vec<SecondaryHint>,
    pub tex: BTreeMap<String, String>,
    pub notes: Vec<String>,
    pub symbols: SymbolTable,
}

impl Model {
    pub fn field(&self, name: &str) -> Option<&FieldDecl> {
        self.fields.iter().find(|f| f.name == name)
    }

    /// Declaration of a field or momentum symbol by name.
    pub fn phase_symbol(&self, name: &str) -> Option<(&FieldDecl, bool)> {
        self.fields
            .iter()
            .find_map(|f| if f.name == name { Some((f, false)) } else if f.momentum == name { Some((f, true)) } else { None })
    }

    /// All phase-space symbol names: each field followed by its momentum.
    pub fn phase_space(&self) -> Vec<String> {
        self.fields.iter().flat_map(|f| [f.name.clone(), f.momentum.clone()]).collect()
    }

    /// A field symbol with standard slot labels starting at `base`.
    pub fn symbol_at(&self, name: &str, base: u16) -> Option<FieldSymbol> {
        let (f, _) = self.phase_symbol(name)?;
        let (ls, _) = slot_labels(&f.kinds, base, 8);
        Some(FieldSymbol::new(name, ls).with_antisym(f.antisym))
    }

    /// Parses an expression against this model's symbols plus extra
    /// smearing symbols.
    pub fn parse(&self, src: &str) -> Result<Expression> {
        Ok(canonicalize(&parse::parse_expression(src, &self.symbols)?))
    }

    pub fn parse_with(&self, src: &str, extra: &SymbolTable) -> Result<Expression> {
        let mut t = self.symbols.clone();
        for (k, v) in &extra.symbols {
            t.symbols.insert(k.clone(), v.clone());
        }
        Ok(canonicalize(&parse::parse_expression(src, &t)?))
    }

    pub fn source(&self) -> Option<&'static str> {
        match self.name.as_str() {
            "pontryagin" => Some(PONTRYAGIN_SRC),
            "euler" => Some(EULER_SRC),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Builtin {
    Pontryagin,
    Euler,
}

impl std::str::FromStr for Builtin {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pontryagin" => Ok(Builtin::Pontryagin),
            "euler" => Ok(Builtin::Euler),
            other => Err(Error::UnknownModel(other.to_string())),
        }
    }
}

pub fn builtin_model(which: Builtin) -> Model {
    let src = match which {
        Builtin::Pontryagin => PONTRYAGIN_SRC,
        Builtin::Euler => EULER_SRC,
    };
    load_model(src).expect("built-in model validates")
}

pub fn builtin_source(which: Builtin) -> &'static str {
    match which {
        Builtin::Pontryagin => PONTRYAGIN_SRC,
        Builtin::Euler => EULER_SRC,
    }
}

fn perr<T>(line: usize, col: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line, col, msg: msg.into() })
}

/// Parses and validates a model file.
pub fn load_model(src: &str) -> Result<Model> {
    let directives = parse::parse_directives(src)?;
    let mut name = String::from("unnamed");
    let mut constants = Vec::new();
    let mut fields: Vec<FieldDecl> = Vec::new();
    let mut tex = BTreeMap::new();
    let mut notes = Vec::new();
    let mut hints = Vec::new();

    // pass 1: declarations
    for d in &directives {
        match &d.directive {
            Directive::Model(n) => name = n.clone(),
            Directive::Const(c) => constants.push(c.clone()),
            Directive::Field { name: fname, kinds, antisym, role, momentum } => {
                let role = match role.as_str() {
                    "dynamical" => Role::Dynamical,
                    "multiplier" => Role::Multiplier,
                    "auxiliary" => Role::Auxiliary,
                    other => return perr(d.line, d.col, format!("unknown role `{other}`")),
                };
                if fields.iter().any(|f| f.name == *fname || f.momentum == *fname) {
                    return perr(d.line, d.col, format!("symbol `{fname}` declared twice"));
                }
                if fields.iter().any(|f| f.momentum == *momentum || f.name == *momentum) || momentum == fname {
                    return Err(Error::DuplicateMomentum(momentum.clone()));
                }
                fields.push(FieldDecl {
                    name: fname.clone(),
                    kinds: kinds.clone(),
                    antisym: *antisym,
                    role,
                    momentum: momentum.clone(),
                });
            }
            Directive::Tex { name, template } => {
                tex.insert(name.clone(), template.clone());
            }
            Directive::Note(n) => notes.push(n.clone()),
            Directive::Secondary { name, parent, param, flip } => hints.push(SecondaryHint {
                name: name.clone(),
                parent: parent.clone(),
                param: param.clone(),
                flip: *flip,
            }),
            _ => {}
        }
    }
    if fields.is_empty() {
        return Err(Error::NoFields);
    }
    let mut symbols = SymbolTable::default();
    for c in &constants {
        symbols.constants.insert(c.clone());
    }
    for f in &fields {
        symbols.declare(&f.name, f.kinds.clone(), f.antisym, SymbolClass::Field);
        symbols.declare(&f.momentum, f.kinds.clone(), f.antisym, SymbolClass::Field);
    }

    // pass 2: expressions
    let mut table = BracketTable::default();
    let mut canonical: Option<(String, Expression)> = None;
    let mut primaries = Vec::new();
    let mut kinetic = Vec::new();
    for d in &directives {
        match &d.directive {
            Directive::Bracket { left, right, rhs } => {
                let mut entry = Vec::new();
                for (sym_name, slots) in [left, right] {
                    let Some(info) = symbols.symbols.get(sym_name) else {
                        return perr(d.line, d.col, format!("undeclared symbol `{sym_name}`"));
                    };
                    check_slots(sym_name, slots, &info.kinds, d.line, d.col)?;
                    entry.push((sym_name.clone(), slots.clone()));
                }
                let kernel = parse::parse_span(rhs, &symbols)?;
                let mut want: Vec<Idx> = left.1.iter().chain(right.1.iter()).copied().collect();
                want.sort();
                if kernel.free != want {
                    return perr(rhs.at_start().0, rhs.at_start().1, "bracket right-hand side must carry exactly the slot labels of both symbols");
                }
                let coeff = strip_distribution(&kernel).map_err(|m| Error::Parse { line: rhs.at_start().0, col: rhs.at_start().1, msg: m })?;
                if table.entries.iter().any(|e: &BracketEntry| {
                    (e.left == left.0 && e.right == right.0) || (e.left == right.0 && e.right == left.0)
                }) {
                    return perr(d.line, d.col, format!("bracket {{{}, {}}} declared twice", left.0, right.0));
                }
                table.entries.push(BracketEntry {
                    left: entry[0].0.clone(),
                    left_slots: entry[0].1.clone(),
                    right: entry[1].0.clone(),
                    right_slots: entry[1].1.clone(),
                    coeff,
                });
            }
            Directive::Hamiltonian { name: hname, free, rhs, flags, param } => {
                let density = canonicalize(&parse::parse_span(rhs, &symbols)?);
                let mut want = free.clone();
                want.sort();
                if density.free != want && !density.is_zero() {
                    return perr(rhs.at_start().0, rhs.at_start().1, format!("free indices of `{hname}` do not match its declaration"));
                }
                let density = Expression { free: want, ..density };
                if flags.iter().any(|f| f == "canonical") {
                    if canonical.is_some() {
                        return perr(d.line, d.col, "more than one canonical Hamiltonian");
                    }
                    if !free.is_empty() {
                        return perr(d.line, d.col, "the canonical Hamiltonian has no free indices");
                    }
                    canonical = Some((hname.clone(), density));
                } else {
                    primaries.push(HamDecl { name: hname.clone(), slots: free.clone(), density, param: param.clone() });
                }
            }
            Directive::Kinetic { field, rhs } => {
                let Some(info) = symbols.symbols.get(&field.0) else {
                    return perr(d.line, d.col, format!("undeclared symbol `{}`", field.0));
                };
                check_slots(&field.0, &field.1, &info.kinds, d.line, d.col)?;
                let coeff = canonicalize(&parse::parse_span(rhs, &symbols)?);
                let mut want = field.1.clone();
                want.sort();
                if coeff.free != want && !coeff.is_zero() {
                    return perr(rhs.at_start().0, rhs.at_start().1, "kinetic coefficient must carry the field's slot labels");
                }
                kinetic.push(KineticDecl { field: field.0.clone(), slots: field.1.clone(), coeff });
            }
            _ => {}
        }
    }
    let Some((canonical_name, canonical)) = canonical else {
        return Err(Error::Structural("no canonical Hamiltonian declared".into()));
    };
    let names: BTreeSet<&str> = primaries.iter().map(|h| h.name.as_str()).collect();
    for h in &hints {
        if !names.contains(h.parent.as_str()) && !hints.iter().any(|o| o.name == h.parent) {
            return Err(Error::UndeclaredSymbol(h.parent.clone()));
        }
    }
    Ok(Model {
        name,
        constants,
        fields,
        table,
        canonical,
        canonical_name,
        primaries,
        kinetic,
        hints,
        tex,
        notes,
        symbols,
    })
}

fn check_slots(name: &str, slots: &[Idx], kinds: &[Kind], line: usize, col: usize) -> Result<()> {
    if slots.len() != kinds.len() {
        return perr(line, col, format!("`{name}` takes {} indices, got {}", kinds.len(), slots.len()));
    }
    for (l, k) in slots.iter().zip(kinds) {
        if l.kind != *k {
            return perr(line, col, format!("index-kind mismatch: `{l}` in `{name}`"));
        }
    }
    Ok(())
}

/// Removes the single undifferentiated δ³ from every term of an ultralocal,
/// field-free kernel.
fn strip_distribution(kernel: &Expression) -> std::result::Result<Expression, String> {
    let mut terms = Vec::new();
    for t in &kernel.terms {
        if !t.fields.is_empty() || !t.smearings.is_empty() {
            return Err("unsupported bracket entry: field-dependent kernels are not supported".into());
        }
        if t.dists.len() != 1 || !t.dists[0].is_empty() {
            return Err("unsupported bracket entry: each term needs exactly one D3(x,y) without derivatives".into());
        }
        let mut t = t.clone();
        t.dists.clear();
        terms.push(t);
    }
    Ok(canonicalize(&Expression { terms, free: kernel.free.clone() }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_load() {
        let p = builtin_model(Builtin::Pontryagin);
        assert_eq!(p.fields.len(), 8);
        assert_eq!(p.primaries.len(), 8);
        let e = builtin_model(Builtin::Euler);
        assert_eq!(e.fields.len(), 8);
        assert!(e.table.lookup("A0", &[Idx::s(0), Idx::i(0)], "pi", &[Idx::s(1), Idx::i(1)]).is_some());
        assert!(e.table.lookup("A0", &[Idx::s(0), Idx::i(0)], "p0", &[Idx::s(1), Idx::i(1)]).is_none());
    }

    #[test]
    fn empty_model_rejected() {
        assert_eq!(load_model("model x\n"), Err(Error::NoFields));
    }

    #[test]
    fn duplicate_momentum_rejected() {
        let src = "field q slots=() role=dynamical momentum=p\nfield r slots=() role=dynamical momentum=p\n";
        assert!(matches!(load_model(src), Err(Error::DuplicateMomentum(_))));
    }

    #[test]
    fn reverse_lookup_is_negated() {
        let p = builtin_model(Builtin::Pontryagin);
        let (a, b) = ([Idx::s(0), Idx::i(0)], [Idx::s(1), Idx::i(1)]);
        let fwd = p.table.lookup("A0", &a, "p0", &b).unwrap();
        let rev = p.table.lookup("p0", &b, "A0", &a).unwrap();
        assert!(fwd.add(&rev).unwrap().is_identically_zero());
    }
}
