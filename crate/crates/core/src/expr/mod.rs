//! Symbolic tensor expressions over 3d spatial and internal indices.
//!
//! An [`Expression`] is a sum of [`Term`]s. Each term is an exact rational
//! times powers of formal constants, invariant tensors (ε, η, δ), phase-space
//! fields, smearing functions and δ³(x−y) distributions. Fields and smearings
//! live at the point `x`; distributions carry their derivatives with respect
//! to `x`.

mod canon;
mod components;
mod display;
mod ops;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use canon::canonicalize;
pub use components::{CompVar, Components, Poly, PolyKey};
pub use ops::Binding;
pub(crate) use ops::replace_factor;
pub use components::{eval_poly, rat_to_f64};

/// Exact rational coefficient.
pub type Rat = BigRational;

/// Interned-by-refcount symbol name.
pub type Sym = Arc<str>;

pub fn sym(s: &str) -> Sym {
    Arc::from(s)
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(n.into(), d.into())
}

pub fn int(n: i64) -> Rat {
    Rat::from_integer(n.into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Spatial,
    Internal,
}

const SPATIAL_LETTERS: &[u8] = b"abcdefgh";
const INTERNAL_LETTERS: &[u8] = b"ijklmnpqrstuvw";

impl Kind {
    fn letters(self) -> &'static [u8] {
        match self {
            Kind::Spatial => SPATIAL_LETTERS,
            Kind::Internal => INTERNAL_LETTERS,
        }
    }
}

/// An index label. The kind is part of the identity, so a spatial and an
/// internal label never collide.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Idx {
    pub kind: Kind,
    pub n: u16,
}

impl Idx {
    pub const fn new(kind: Kind, n: u16) -> Self {
        Idx { kind, n }
    }

    pub const fn s(n: u16) -> Self {
        Idx::new(Kind::Spatial, n)
    }

    pub const fn i(n: u16) -> Self {
        Idx::new(Kind::Internal, n)
    }

    /// Parses `a`, `b3`, `k`, `m12`. The letter fixes the kind.
    pub fn parse(s: &str) -> Option<Idx> {
        let mut chars = s.chars();
        let c = chars.next()? as u32;
        if c > 127 {
            return None;
        }
        let rest = chars.as_str();
        let suffix: u16 = if rest.is_empty() { 0 } else { rest.parse().ok()? };
        for kind in [Kind::Spatial, Kind::Internal] {
            let letters = kind.letters();
            if let Some(p) = letters.iter().position(|&l| l as u32 == c) {
                let n = suffix.checked_mul(letters.len() as u16)?.checked_add(p as u16)?;
                return Some(Idx::new(kind, n));
            }
        }
        None
    }

    pub fn label(&self) -> String {
        let letters = self.kind.letters();
        let len = letters.len() as u16;
        let c = letters[(self.n % len) as usize] as char;
        let q = self.n / len;
        if q == 0 {
            c.to_string()
        } else {
            format!("{c}{q}")
        }
    }
}

impl fmt::Display for Idx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl Serialize for Idx {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.label())
    }
}

impl<'de> Deserialize<'de> for Idx {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Idx::parse(&s).ok_or_else(|| serde::de::Error::custom(format!("bad index label `{s}`")))
    }
}

/// A field, momentum or smearing function with index slots and applied
/// spatial derivatives. `antisym` holds a slot pair (0-based) in which the
/// symbol is antisymmetric.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FieldSymbol {
    pub name: Sym,
    pub slots: Vec<Idx>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub antisym: Option<(u8, u8)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub derivs: Vec<Idx>,
}

impl FieldSymbol {
    pub fn new(name: &str, slots: Vec<Idx>) -> Self {
        FieldSymbol { name: sym(name), slots, antisym: None, derivs: Vec::new() }
    }

    pub fn with_antisym(mut self, pair: Option<(u8, u8)>) -> Self {
        self.antisym = pair;
        self
    }

    fn labels(&self) -> impl Iterator<Item = Idx> + '_ {
        self.slots.iter().chain(self.derivs.iter()).copied()
    }

    fn map_labels(&mut self, f: &mut impl FnMut(Idx) -> Idx) {
        for l in self.slots.iter_mut().chain(self.derivs.iter_mut()) {
            *l = f(*l);
        }
    }
}

/// One product term.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Term {
    pub coeff: Rat,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub consts: Vec<(Sym, i32)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub eps: Vec<[Idx; 3]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub eta: Vec<[Idx; 3]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub deltas: Vec<[Idx; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fields: Vec<FieldSymbol>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub smearings: Vec<FieldSymbol>,
    /// δ³(x−y) factors, each with its derivative labels.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dists: Vec<Vec<Idx>>,
}

impl Term {
    pub fn scalar(c: Rat) -> Self {
        Term {
            coeff: c,
            consts: Vec::new(),
            eps: Vec::new(),
            eta: Vec::new(),
            deltas: Vec::new(),
            fields: Vec::new(),
            smearings: Vec::new(),
            dists: Vec::new(),
        }
    }

    pub fn one() -> Self {
        Term::scalar(Rat::one())
    }

    /// Every label occurrence, with multiplicity.
    pub fn labels(&self) -> Vec<Idx> {
        let mut out = Vec::new();
        for e in self.eps.iter().chain(self.eta.iter()) {
            out.extend_from_slice(e);
        }
        for d in &self.deltas {
            out.extend_from_slice(d);
        }
        for f in self.fields.iter().chain(self.smearings.iter()) {
            out.extend(f.labels());
        }
        for d in &self.dists {
            out.extend_from_slice(d);
        }
        out
    }

    pub fn label_counts(&self) -> BTreeMap<Idx, usize> {
        let mut m = BTreeMap::new();
        for l in self.labels() {
            *m.entry(l).or_insert(0) += 1;
        }
        m
    }

    /// Labels that occur exactly once, sorted.
    pub fn free(&self) -> Vec<Idx> {
        self.label_counts().into_iter().filter(|&(_, c)| c == 1).map(|(l, _)| l).collect()
    }

    pub fn dummies(&self) -> Vec<Idx> {
        self.label_counts().into_iter().filter(|&(_, c)| c == 2).map(|(l, _)| l).collect()
    }

    pub fn map_labels(&mut self, mut f: impl FnMut(Idx) -> Idx) {
        for e in self.eps.iter_mut().chain(self.eta.iter_mut()) {
            for l in e.iter_mut() {
                *l = f(*l);
            }
        }
        for d in self.deltas.iter_mut() {
            for l in d.iter_mut() {
                *l = f(*l);
            }
        }
        for s in self.fields.iter_mut().chain(self.smearings.iter_mut()) {
            s.map_labels(&mut f);
        }
        for d in self.dists.iter_mut() {
            for l in d.iter_mut() {
                *l = f(*l);
            }
        }
    }

    /// Renames the dummies of `self` that clash with `avoid` to fresh labels.
    pub fn rename_dummies_avoiding(&mut self, avoid: &BTreeSet<Idx>) {
        let counts = self.label_counts();
        let clashing: Vec<Idx> =
            counts.iter().filter(|&(l, &c)| c == 2 && avoid.contains(l)).map(|(l, _)| *l).collect();
        if clashing.is_empty() {
            return;
        }
        let mut used: BTreeSet<Idx> = avoid.iter().copied().collect();
        used.extend(counts.keys().copied());
        let mut map = BTreeMap::new();
        for l in clashing {
            let fresh = fresh_label(l.kind, &used);
            used.insert(fresh);
            map.insert(l, fresh);
        }
        self.map_labels(|l| *map.get(&l).unwrap_or(&l));
    }

    pub fn mul_const(&mut self, name: &Sym, power: i32) {
        if let Some(e) = self.consts.iter_mut().find(|(n, _)| n == name) {
            e.1 += power;
        } else {
            self.consts.push((name.clone(), power));
        }
        self.consts.retain(|(_, p)| *p != 0);
        self.consts.sort();
    }

    /// Product without any renaming. Callers make dummies disjoint first.
    pub fn mul_raw(&self, other: &Term) -> Term {
        let mut t = self.clone();
        t.coeff *= &other.coeff;
        for (n, p) in &other.consts {
            t.mul_const(n, *p);
        }
        t.eps.extend_from_slice(&other.eps);
        t.eta.extend_from_slice(&other.eta);
        t.deltas.extend_from_slice(&other.deltas);
        t.fields.extend(other.fields.iter().cloned());
        t.smearings.extend(other.smearings.iter().cloned());
        t.dists.extend(other.dists.iter().cloned());
        t
    }

    /// Product with dummies renamed apart.
    pub fn mul(&self, other: &Term) -> Term {
        let mut a = self.clone();
        let mut b = other.clone();
        let b_free: BTreeSet<Idx> = b.free().into_iter().collect();
        a.rename_dummies_avoiding(&b_free);
        let a_all: BTreeSet<Idx> = a.labels().into_iter().collect();
        b.rename_dummies_avoiding(&a_all);
        a.mul_raw(&b)
    }

    pub fn is_field_free(&self) -> bool {
        self.fields.is_empty()
    }

    /// Degree in phase-space fields.
    pub fn field_degree(&self) -> usize {
        self.fields.len()
    }

    pub fn const_power(&self, name: &str) -> i32 {
        self.consts.iter().find(|(n, _)| &**n == name).map(|(_, p)| *p).unwrap_or(0)
    }
}

/// Smallest label of `kind` not in `used`.
pub fn fresh_label(kind: Kind, used: &BTreeSet<Idx>) -> Idx {
    (0u16..).map(|n| Idx::new(kind, n)).find(|l| !used.contains(l)).expect("label space")
}

/// A sum of terms sharing one free-index signature.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expression {
    pub terms: Vec<Term>,
    pub free: Vec<Idx>,
}

impl Expression {
    pub fn zero(free: Vec<Idx>) -> Self {
        let mut free = free;
        free.sort();
        Expression { terms: Vec::new(), free }
    }

    pub fn scalar(c: Rat) -> Self {
        Expression::from_term(Term::scalar(c))
    }

    pub fn one() -> Self {
        Expression::scalar(Rat::one())
    }

    pub fn from_term(t: Term) -> Self {
        let free = t.free();
        let terms = if t.coeff.is_zero() { Vec::new() } else { vec![t] };
        Expression { terms, free }
    }

    /// Builds an expression and checks index balance and a common signature.
    pub fn from_terms(terms: Vec<Term>) -> Result<Self> {
        let free = terms.first().map(|t| t.free()).unwrap_or_default();
        let e = Expression { terms, free };
        e.validate()?;
        Ok(e)
    }

    pub fn field(f: FieldSymbol) -> Self {
        let mut t = Term::one();
        t.fields.push(f);
        Expression::from_term(t)
    }

    pub fn smearing(f: FieldSymbol) -> Self {
        let mut t = Term::one();
        t.smearings.push(f);
        Expression::from_term(t)
    }

    pub fn constant(name: &str, power: i32) -> Self {
        let mut t = Term::one();
        t.mul_const(&sym(name), power);
        Expression::from_term(t)
    }

    pub fn delta(a: Idx, b: Idx) -> Self {
        let mut t = Term::one();
        t.deltas.push([a, b]);
        Expression::from_term(t)
    }

    pub fn eps(i: Idx, j: Idx, k: Idx) -> Self {
        let mut t = Term::one();
        t.eps.push([i, j, k]);
        Expression::from_term(t)
    }

    pub fn eta(a: Idx, b: Idx, c: Idx) -> Self {
        let mut t = Term::one();
        t.eta.push([a, b, c]);
        Expression::from_term(t)
    }

    pub fn dist() -> Self {
        let mut t = Term::one();
        t.dists.push(Vec::new());
        Expression::from_term(t)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Index balance: every label once or twice, equal kinds implied by
    /// label identity, one free signature.
    pub fn validate(&self) -> Result<()> {
        for t in &self.terms {
            for (l, c) in t.label_counts() {
                if c > 2 {
                    return Err(Error::Structural(format!(
                        "index `{l}` appears {c} times in one term"
                    )));
                }
            }
            for f in t.fields.iter().chain(t.smearings.iter()) {
                for d in &f.derivs {
                    if d.kind != Kind::Spatial {
                        return Err(Error::IndexKind(format!(
                            "derivative index `{d}` on `{}` is not spatial",
                            f.name
                        )));
                    }
                }
            }
            let free = t.free();
            if free != self.free {
                let diff: Vec<String> = free
                    .iter()
                    .filter(|l| !self.free.contains(l))
                    .chain(self.free.iter().filter(|l| !free.contains(l)))
                    .map(|l| l.label())
                    .collect();
                return Err(Error::Structural(format!(
                    "free-index signature mismatch at `{}`",
                    diff.join(",")
                )));
            }
        }
        Ok(())
    }

    pub fn add(&self, other: &Expression) -> Result<Expression> {
        if self.is_zero() && self.free.is_empty() && !other.free.is_empty() {
            return Ok(other.clone());
        }
        if other.is_zero() && other.free.is_empty() && !self.free.is_empty() {
            return Ok(self.clone());
        }
        if self.free != other.free {
            let mut a: Vec<String> = self.free.iter().map(|l| l.label()).collect();
            a.extend(other.free.iter().map(|l| format!("/{l}")));
            return Err(Error::Structural(format!(
                "cannot add expressions with free indices {}",
                a.join(",")
            )));
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Expression { terms, free: self.free.clone() })
    }

    pub fn sub(&self, other: &Expression) -> Result<Expression> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Expression {
        self.scale(&-Rat::one())
    }

    pub fn scale(&self, c: &Rat) -> Expression {
        if c.is_zero() {
            return Expression::zero(self.free.clone());
        }
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut t = t.clone();
                t.coeff *= c;
                t
            })
            .collect();
        Expression { terms, free: self.free.clone() }
    }

    pub fn mul_const(&self, name: &str, power: i32) -> Expression {
        let s = sym(name);
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut t = t.clone();
                t.mul_const(&s, power);
                t
            })
            .collect();
        Expression { terms, free: self.free.clone() }
    }

    /// Product; repeated free labels contract.
    pub fn mul(&self, other: &Expression) -> Result<Expression> {
        let mut free: BTreeSet<Idx> = self.free.iter().copied().collect();
        for l in &other.free {
            if !free.remove(l) {
                free.insert(*l);
            }
        }
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(a.mul(b));
            }
        }
        let e = Expression { terms, free: free.into_iter().collect() };
        e.validate()?;
        Ok(e)
    }

    /// Renames free labels according to `map` (dummies are moved out of the
    /// way first).
    pub fn rename_free(&self, map: &BTreeMap<Idx, Idx>) -> Expression {
        let targets: BTreeSet<Idx> = map.values().copied().collect();
        let mut avoid = targets.clone();
        avoid.extend(self.free.iter().copied());
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut t = t.clone();
                t.rename_dummies_avoiding(&avoid);
                t.map_labels(|l| *map.get(&l).unwrap_or(&l));
                t
            })
            .collect();
        let mut free: Vec<Idx> = self.free.iter().map(|l| *map.get(l).unwrap_or(l)).collect();
        free.sort();
        Expression { terms, free }
    }

    /// Renames every dummy so none collides with `avoid`.
    pub fn rename_dummies_avoiding(&self, avoid: &BTreeSet<Idx>) -> Expression {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut t = t.clone();
                t.rename_dummies_avoiding(avoid);
                t
            })
            .collect();
        Expression { terms, free: self.free.clone() }
    }

    pub fn all_labels(&self) -> BTreeSet<Idx> {
        self.terms.iter().flat_map(|t| t.labels()).collect()
    }

    pub fn field_names(&self) -> BTreeSet<Sym> {
        self.terms.iter().flat_map(|t| t.fields.iter().map(|f| f.name.clone())).collect()
    }

    pub fn smearing_names(&self) -> BTreeSet<Sym> {
        self.terms.iter().flat_map(|t| t.smearings.iter().map(|f| f.name.clone())).collect()
    }

    pub fn canonical(&self) -> Expression {
        canonicalize(self)
    }

    /// Exact equality test by component expansion.
    pub fn equivalent(&self, other: &Expression) -> bool {
        if self.free != other.free {
            return false;
        }
        match self.sub(other) {
            Ok(d) => d.components().is_zero(),
            Err(_) => false,
        }
    }

    pub fn is_identically_zero(&self) -> bool {
        self.components().is_zero()
    }
}
