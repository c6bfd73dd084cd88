//! Poisson brackets from a fundamental table, the C-matrix of a
//! non-involutive set, and generalized brackets.
//!
//! Brackets are computed in operator form: for a density `f` at x and a
//! functional `∫ψ`,
//! `{f(x), ∫ψ} = Σ_u ∂f/∂(∂_L u) · ∂_L (Σ_v W(u,v) E_v(ψ))`,
//! where `E_v` is the Euler operator and `W` the ultralocal table entry.
//! Kernels `{f(x), g(y)}` are read off by smearing `g` with a test function
//! and trading each `∂_L h` for `∂_L δ³(x−y)`.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;

use crate::ansatz::{fit_blocks, tensor_patterns};
use crate::error::{Error, Result};
use crate::expr::{canonicalize, fresh_label, rat, replace_factor, Binding, Expression, FieldSymbol, Idx, Kind, Sym};
use crate::phase::{identity_tensor, rename_simultaneous, BracketTable};

const KERNEL_SMEARING: &str = "_h";

/// Euler–Lagrange derivative of `∫density` with respect to the field or
/// smearing `v`, returned with free labels `slots`.
pub fn functional_derivative(density: &Expression, v: &str, slots: &[Idx]) -> Expression {
    let mut want: Vec<Idx> = slots.to_vec();
    want.sort();
    let avoid: BTreeSet<Idx> = slots.iter().copied().collect();
    let d = density.rename_dummies_avoiding(&avoid);
    let mut acc = Expression::zero(want.clone());
    for t in &d.terms {
        let occurrences: Vec<(bool, usize)> = t
            .fields
            .iter()
            .enumerate()
            .filter(|(_, f)| &*f.name == v)
            .map(|(k, _)| (false, k))
            .chain(t.smearings.iter().enumerate().filter(|(_, f)| &*f.name == v).map(|(k, _)| (true, k)))
            .collect();
        for (sm, k) in occurrences {
            let mut rest = t.clone();
            let occ = if sm { rest.smearings.remove(k) } else { rest.fields.remove(k) };
            let mut map: BTreeMap<Idx, Idx> = BTreeMap::new();
            let mut extra = Vec::new();
            for (l, s) in occ.slots.iter().zip(slots) {
                match map.get(l) {
                    Some(prev) => extra.push([*prev, *s]),
                    None => {
                        map.insert(*l, *s);
                    }
                }
            }
            rest.map_labels(|x| *map.get(&x).unwrap_or(&x));
            rest.deltas.extend(extra);
            let derivs: Vec<Idx> = occ.derivs.iter().map(|x| *map.get(x).unwrap_or(x)).collect();
            if derivs.len() % 2 == 1 {
                rest.coeff = -rest.coeff;
            }
            let mut e = Expression { free: rest.free(), terms: vec![rest] };
            for l in derivs {
                e = e.derive_raw(l);
            }
            acc.terms.extend(e.terms);
        }
    }
    let mut out = canonicalize(&acc);
    out.free = want;
    out
}

/// True iff `density` integrates to zero for all field configurations of
/// compact support: every Euler–Lagrange derivative vanishes and there is
/// no symbol-free part.
pub fn is_total_derivative(density: &Expression) -> bool {
    let constant: Vec<_> =
        density.terms.iter().filter(|t| t.fields.is_empty() && t.smearings.is_empty()).cloned().collect();
    if !(Expression { terms: constant, free: density.free.clone() }).is_identically_zero() {
        return false;
    }
    let mut seen: BTreeMap<Sym, usize> = BTreeMap::new();
    for t in &density.terms {
        for f in t.fields.iter().chain(t.smearings.iter()) {
            seen.insert(f.name.clone(), f.slots.len());
        }
    }
    for t in &density.terms {
        for f in t.fields.iter().chain(t.smearings.iter()) {
            if seen.remove(&f.name).is_none() {
                continue;
            }
            let used = density.all_labels();
            let mut slots = Vec::new();
            let mut u = used.clone();
            for s in &f.slots {
                let l = fresh_label(s.kind, &u);
                u.insert(l);
                slots.push(l);
            }
            let mut d = functional_derivative(density, &f.name, &slots);
            // only the antisymmetric part couples to an antisymmetric symbol
            if let Some((p, q)) = f.antisym {
                let (p, q) = (slots[p as usize], slots[q as usize]);
                let swapped = rename_simultaneous(&d, &BTreeMap::from([(p, q), (q, p)]));
                d = d.sub(&swapped).expect("same free labels");
            }
            if !d.is_identically_zero() {
                return false;
            }
        }
    }
    true
}

/// Slot pair (positions in `e.free`) in which `e` is antisymmetric.
pub fn antisym_pair(e: &Expression) -> Option<(u8, u8)> {
    if e.is_identically_zero() {
        return None;
    }
    for p in 0..e.free.len() {
        for q in p + 1..e.free.len() {
            if e.free[p].kind != e.free[q].kind {
                continue;
            }
            let mut m = BTreeMap::new();
            m.insert(e.free[p], e.free[q]);
            m.insert(e.free[q], e.free[p]);
            let swapped = e.rename_free(&m);
            if e.add(&swapped).map(|s| s.is_identically_zero()).unwrap_or(false) {
                return Some((p as u8, q as u8));
            }
        }
    }
    None
}

/// Fresh labels of the given kinds for label set `set`: `a1, b1, i1, …`
/// for set 0, `a2, …` for set 1 and so on.
pub fn set_labels(kinds: &[Kind], set: u16) -> Vec<Idx> {
    let (mut ns, mut ni) = (0u16, 0u16);
    kinds
        .iter()
        .map(|k| match k {
            Kind::Spatial => {
                ns += 1;
                Idx::s(ns - 1 + 8 * (set + 1))
            }
            Kind::Internal => {
                ni += 1;
                Idx::i(ni - 1 + 14 * (set + 1))
            }
        })
        .collect()
}

/// `e` with its free labels (in sorted order) renamed to `labels`.
pub fn relabel(e: &Expression, labels: &[Idx]) -> Expression {
    let map: BTreeMap<Idx, Idx> = e.free.iter().copied().zip(labels.iter().copied()).collect();
    rename_simultaneous(e, &map)
}

/// Poisson brackets over a fundamental table.
#[derive(Clone, Debug)]
pub struct Poisson<'a> {
    pub table: &'a BracketTable,
}

impl<'a> Poisson<'a> {
    pub fn new(table: &'a BracketTable) -> Self {
        Poisson { table }
    }

    /// `Σ_v W(u[slots], v) E_v(ψ)` with free labels `slots`.
    fn flow(&self, u: &str, slots: &[Idx], density: &Expression) -> Expression {
        let mut acc = Expression::zero({
            let mut s = slots.to_vec();
            s.sort();
            s
        });
        let mut used: BTreeSet<Idx> = density.all_labels();
        used.extend(slots.iter().copied());
        for v in self.table.partners(u) {
            let Some(kinds) = self.symbol_kinds(&v) else { continue };
            let mut u2 = used.clone();
            let mut t = Vec::new();
            for k in kinds {
                let l = fresh_label(k, &u2);
                u2.insert(l);
                t.push(l);
            }
            let ev = functional_derivative(density, &v, &t);
            if ev.is_zero() {
                continue;
            }
            let w = self.table.lookup(u, slots, &v, &t).expect("partner has an entry");
            let term = w.mul(&ev).expect("contraction over partner slots");
            acc = acc.add(&term).expect("same free labels");
        }
        canonicalize(&acc)
    }

    fn symbol_kinds(&self, name: &str) -> Option<Vec<Kind>> {
        for e in &self.table.entries {
            if e.left == name {
                return Some(e.left_slots.iter().map(|l| l.kind).collect());
            }
            if e.right == name {
                return Some(e.right_slots.iter().map(|l| l.kind).collect());
            }
        }
        None
    }

    /// `{f(x), ∫density}` as a density at x with the free labels of `f`.
    /// `density` must carry no free labels.
    pub fn with_functional(&self, f: &Expression, density: &Expression) -> Result<Expression> {
        if !density.free.is_empty() {
            return Err(Error::Structural(format!(
                "unmatched free indices in smeared argument: {}",
                density.free.iter().map(|l| l.label()).collect::<Vec<_>>().join(",")
            )));
        }
        let mut cache: BTreeMap<Sym, Option<Binding>> = BTreeMap::new();
        let mut acc = Expression::zero(f.free.clone());
        for t in &f.terms {
            for (k, occ) in t.fields.iter().enumerate() {
                let b = match cache.get(&occ.name) {
                    Some(b) => b.clone(),
                    None => {
                        let b = self.binding_for(occ, density)?;
                        cache.insert(occ.name.clone(), b.clone());
                        b
                    }
                };
                if let Some(b) = b {
                    acc.terms.extend(replace_factor(t, k, false, &b)?.terms);
                }
            }
        }
        Ok(canonicalize(&acc))
    }

    fn binding_for(&self, occ: &FieldSymbol, density: &Expression) -> Result<Option<Binding>> {
        if self.table.partners(&occ.name).is_empty() {
            return Ok(None);
        }
        let kinds: Vec<Kind> = occ.slots.iter().map(|l| l.kind).collect();
        let slots = set_labels(&kinds, 40);
        let x = self.flow(&occ.name, &slots, density);
        if x.is_zero() {
            return Ok(None);
        }
        Ok(Some(Binding::new(slots, x)?))
    }

    /// `{f(x), g(y)}` with explicit δ³(x−y) factors. Free labels of `f` and
    /// `g` must be disjoint; the result carries both.
    pub fn kernel(&self, f: &Expression, g: &Expression) -> Result<Expression> {
        kernel_via(f, g, |f, d| self.with_functional(f, d))
    }
}

/// Shared smear-then-unsmear step for plain and generalized kernels.
fn kernel_via(
    f: &Expression,
    g: &Expression,
    bracket: impl Fn(&Expression, &Expression) -> Result<Expression>,
) -> Result<Expression> {
    if f.free.iter().any(|l| g.free.contains(l)) {
        return Err(Error::Structural("kernel arguments share free labels".into()));
    }
    let pair = antisym_pair(g);
    let h = FieldSymbol::new(KERNEL_SMEARING, g.free.clone()).with_antisym(pair);
    let smeared = canonicalize(&g.mul(&Expression::smearing(h)).expect("contraction"));
    let r = bracket(f, &smeared)?;
    let mut free: Vec<Idx> = f.free.iter().chain(g.free.iter()).copied().collect();
    free.sort();
    let avoid: BTreeSet<Idx> = g.free.iter().copied().collect();
    let mut acc = Expression::zero(free.clone());
    for t in &r.terms {
        let mut t = t.clone();
        t.rename_dummies_avoiding(&avoid);
        let Some(k) = t.smearings.iter().position(|s| &*s.name == KERNEL_SMEARING) else {
            continue;
        };
        let occ = t.smearings.remove(k);
        t.dists.push(occ.derivs.clone());
        let proj = identity_tensor(&occ.slots, &g.free, pair);
        let rest = Expression { free: t.free(), terms: vec![t] };
        let e = rest.mul(&proj)?;
        acc.terms.extend(e.terms);
    }
    Ok(canonicalize(&acc))
}

/// Removes a single underived δ³ from every term of a field-free kernel.
pub fn ultralocal_constant(kernel: &Expression) -> Result<Expression> {
    let mut terms = Vec::new();
    for t in &kernel.terms {
        if !t.fields.is_empty() || t.dists.len() != 1 || !t.dists[0].is_empty() {
            return Err(Error::Unsupported(
                "C-matrix entries must be constant tensors times δ³(x−y); field-dependent kernels are not supported"
                    .into(),
            ));
        }
        let mut t = t.clone();
        t.dists.clear();
        terms.push(t);
    }
    Ok(canonicalize(&Expression { terms, free: kernel.free.clone() }))
}

/// A named constraint density.
#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub density: Expression,
}

/// C-matrix over a non-involutive set, with its inverse. Entry (a, b)
/// carries the labels `labels[a][0]` then `labels[b][1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    pub names: Vec<String>,
    pub densities: Vec<Expression>,
    pub antisym: Vec<Option<(u8, u8)>>,
    /// three disjoint label sets per constraint
    pub labels: Vec<[Vec<Idx>; 3]>,
    pub entries: Vec<Vec<Expression>>,
    pub inverse: Vec<Vec<Expression>>,
}

impl CMatrix {
    /// Builds and inverts the C-matrix of `cons`.
    pub fn build(cons: &[Constraint], pb: &Poisson) -> Result<CMatrix> {
        let n = cons.len();
        let mut labels = Vec::new();
        let mut densities = Vec::new();
        let mut antisym = Vec::new();
        for c in cons {
            let kinds: Vec<Kind> = c.density.free.iter().map(|l| l.kind).collect();
            let ls = [set_labels(&kinds, 0), set_labels(&kinds, 1), set_labels(&kinds, 2)];
            densities.push(relabel(&c.density, &ls[0]));
            antisym.push(antisym_pair(&c.density));
            labels.push(ls);
        }
        let mut entries = vec![vec![Expression::one(); n]; n];
        for a in 0..n {
            for b in 0..n {
                let g = relabel(&densities[b], &labels[b][1]);
                entries[a][b] = ultralocal_constant(&pb.kernel(&densities[a], &g)?)?;
            }
        }
        let inverse = invert(&entries, &labels, &antisym)?;
        Ok(CMatrix { names: cons.iter().map(|c| c.name.clone()).collect(), densities, antisym, labels, entries, inverse })
    }

    /// Σ_b entry(a,b)·inverse(b,c) − identity(a,c), which must vanish.
    pub fn convolution_residual(&self, a: usize, c: usize) -> Expression {
        let n = self.entries.len();
        let mut acc = Expression::zero({
            let mut f: Vec<Idx> = self.labels[a][0].iter().chain(self.labels[c][2].iter()).copied().collect();
            f.sort();
            f
        });
        for b in 0..n {
            let d = self.inverse_at(b, c, 1, 2);
            acc = acc.add(&self.entries[a][b].mul(&d).expect("contract")).expect("same free");
        }
        if a == c {
            let id = identity_tensor(&self.labels[a][0], &self.labels[a][2], self.antisym[a]);
            acc = acc.sub(&id).expect("same free");
        }
        canonicalize(&acc)
    }

    /// Inverse entry (a,b) with label sets `sa` for a and `sb` for b.
    pub fn inverse_at(&self, a: usize, b: usize, sa: usize, sb: usize) -> Expression {
        let mut m = BTreeMap::new();
        for (x, y) in self.labels[a][0].iter().zip(&self.labels[a][sa]) {
            m.insert(*x, *y);
        }
        for (x, y) in self.labels[b][1].iter().zip(&self.labels[b][sb]) {
            m.insert(*x, *y);
        }
        rename_simultaneous(&self.inverse[a][b], &m)
    }
}

fn project(e: &Expression, slots: &[Idx], pair: Option<(u8, u8)>) -> Expression {
    let Some((p, q)) = pair else { return e.clone() };
    let mut m = BTreeMap::new();
    m.insert(slots[p as usize], slots[q as usize]);
    m.insert(slots[q as usize], slots[p as usize]);
    canonicalize(&e.sub(&e.rename_free(&m)).expect("same free").scale(&rat(1, 2)))
}

fn invert(c: &[Vec<Expression>], labels: &[[Vec<Idx>; 3]], antisym: &[Option<(u8, u8)>]) -> Result<Vec<Vec<Expression>>> {
    let n = c.len();
    let singular = || Error::Singular("no constant-tensor inverse exists".into());
    let mut inv = vec![vec![Expression::one(); n]; n];
    for col in 0..n {
        // unknown block d(b, col) with labels (set 1 of b, set 2 of col)
        let mut basis_exprs: Vec<(usize, Expression)> = Vec::new();
        for b in 0..n {
            let mut ls: Vec<Idx> = labels[b][1].iter().chain(labels[col][2].iter()).copied().collect();
            ls.sort();
            for p in tensor_patterns(&ls) {
                basis_exprs.push((b, canonicalize(&p)));
            }
        }
        let targets: Vec<Expression> = (0..n)
            .map(|a| {
                let mut free: Vec<Idx> = labels[a][0].iter().chain(labels[col][2].iter()).copied().collect();
                free.sort();
                if a == col {
                    identity_tensor(&labels[a][0], &labels[col][2], antisym[a])
                } else {
                    Expression::zero(free)
                }
            })
            .collect();
        let columns: Vec<Vec<Expression>> = basis_exprs
            .iter()
            .map(|(b, p)| (0..n).map(|a| canonicalize(&c[a][*b].mul(p).expect("contract"))).collect())
            .collect();
        let fit = fit_blocks(&targets, &columns).ok_or_else(singular)?;
        for b in 0..n {
            let mut free: Vec<Idx> = labels[b][1].iter().chain(labels[col][2].iter()).copied().collect();
            free.sort();
            let mut d = Expression::zero(free);
            for (k, shift, coef) in &fit.parts {
                if basis_exprs[*k].0 != b {
                    continue;
                }
                let mut e = basis_exprs[*k].1.scale(coef);
                for (nm, pw) in shift {
                    e = e.mul_const(nm, *pw);
                }
                d = d.add(&e).expect("same free");
            }
            let d = project(&project(&canonicalize(&d), &labels[b][1], antisym[b]), &labels[col][2], antisym[col]);
            // store with (set 0, set 1) labels
            let mut m = BTreeMap::new();
            for (x, y) in labels[b][1].iter().zip(&labels[b][0]) {
                m.insert(*x, *y);
            }
            for (x, y) in labels[col][2].iter().zip(&labels[col][1]) {
                m.insert(*x, *y);
            }
            inv[b][col] = rename_simultaneous(&d, &m);
        }
    }
    let cm = CMatrix {
        names: Vec::new(),
        densities: Vec::new(),
        antisym: antisym.to_vec(),
        labels: labels.to_vec(),
        entries: c.to_vec(),
        inverse: inv.clone(),
    };
    for a in 0..n {
        for col in 0..n {
            if !cm.convolution_residual(a, col).is_identically_zero() {
                return Err(singular());
            }
        }
    }
    Ok(inv)
}

/// A functional prepared for generalized brackets: its density and the
/// correction coefficients `U_a = Σ_b C⁻¹_ab {φ_b, ∫ψ}`.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub density: Expression,
    corrections: Vec<Option<Binding>>,
}

/// Generalized brackets `{A,B}* = {A,B} − {A,φ_a} C⁻¹_ab {φ_b,B}`.
#[derive(Clone, Debug)]
pub struct Star<'a> {
    pub pb: Poisson<'a>,
    pub c: CMatrix,
}

impl<'a> Star<'a> {
    pub fn new(pb: Poisson<'a>, c: CMatrix) -> Self {
        Star { pb, c }
    }

    pub fn prepare(&self, density: &Expression) -> Result<Prepared> {
        let n = self.c.names.len();
        let v: Vec<Expression> = (0..n)
            .map(|b| {
                let vb = self.pb.with_functional(&self.c.densities[b], density)?;
                Ok(relabel(&vb, &self.c.labels[b][1]))
            })
            .collect::<Result<_>>()?;
        let mut corrections = Vec::new();
        for a in 0..n {
            let mut u = Expression::zero({
                let mut f = self.c.labels[a][0].clone();
                f.sort();
                f
            });
            for (b, vb) in v.iter().enumerate() {
                if vb.is_zero() || self.c.inverse[a][b].is_zero() {
                    continue;
                }
                u = u.add(&self.c.inverse[a][b].mul(vb)?)?;
            }
            let u = canonicalize(&u);
            corrections.push(if u.is_zero() { None } else { Some(Binding::new(self.c.labels[a][0].clone(), u)?) });
        }
        Ok(Prepared { density: density.clone(), corrections })
    }

    /// `{f(x), ∫ψ}*` for a prepared functional.
    pub fn with_prepared(&self, f: &Expression, p: &Prepared) -> Result<Expression> {
        let mut acc = self.pb.with_functional(f, &p.density)?;
        for (a, corr) in p.corrections.iter().enumerate() {
            let Some(b) = corr else { continue };
            let name = format!("_k{a}");
            let k = FieldSymbol::new(&name, self.c.labels[a][0].clone());
            let smeared = canonicalize(&self.c.densities[a].mul(&Expression::smearing(k))?);
            let raw = self.pb.with_functional(f, &smeared)?;
            if raw.is_zero() {
                continue;
            }
            let mut bind = BTreeMap::new();
            bind.insert(crate::expr::sym(&name), b.clone());
            let corr = raw.substitute(&bind)?;
            acc = acc.sub(&corr)?;
        }
        Ok(canonicalize(&acc))
    }

    pub fn with_functional(&self, f: &Expression, density: &Expression) -> Result<Expression> {
        self.with_prepared(f, &self.prepare(density)?)
    }

    /// `{f(x), g(y)}*` with explicit δ³ factors.
    pub fn kernel(&self, f: &Expression, g: &Expression) -> Result<Expression> {
        kernel_via(f, g, |f, d| self.with_functional(f, d))
    }
}

/// True when every term of `e` is free of fields; used to sanity-check
/// C-matrix entries in reports.
pub fn is_field_free(e: &Expression) -> bool {
    e.terms.iter().all(|t| t.fields.is_empty() && !t.coeff.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::int;
    use crate::phase::{builtin_model, Builtin};

    fn model() -> crate::phase::Model {
        builtin_model(Builtin::Pontryagin)
    }

    #[test]
    fn euler_operator_moves_derivatives() {
        let m = model();
        // ∫ ∂_a p0[a,i] X[i]  →  E_p0[b,j] = −∂_b X_j
        let tab = crate::parse::SymbolTable {
            symbols: {
                let mut s = m.symbols.symbols.clone();
                s.insert(
                    "X".into(),
                    crate::parse::SymbolInfo {
                        kinds: vec![Kind::Internal],
                        antisym: None,
                        class: crate::parse::SymbolClass::Smearing,
                    },
                );
                s
            },
            constants: m.symbols.constants.clone(),
        };
        let d = m.parse_with("d(a)@p0[a,i]*X[i]", &tab).unwrap();
        let e = functional_derivative(&d, "p0", &[Idx::s(1), Idx::i(1)]);
        let want = m.parse_with("-d(b)@X[j]", &tab).unwrap();
        assert!(e.equivalent(&want), "{e}");
    }

    #[test]
    fn fundamental_kernel() {
        let m = model();
        let pb = Poisson::new(&m.table);
        let a = m.parse("A0[a,i]").unwrap();
        let p = m.parse("p0[b,j]").unwrap();
        let k = pb.kernel(&a, &p).unwrap();
        let want = m.parse("delta(a,b)*delta(i,j)*D3(x,y)").unwrap();
        assert!(k.equivalent(&want), "{k}");
    }

    #[test]
    fn derivative_kernel() {
        let m = model();
        let pb = Poisson::new(&m.table);
        let a = m.parse("A0[a,i]").unwrap();
        let g = m.parse("d(b)@p0[b,j]").unwrap();
        let k = pb.kernel(&a, &g).unwrap();
        // {A(x), ∂_b p^b(y)} = ∂^y_a δ(x−y) = −∂^x_a δ(x−y)
        let want = m.parse("-delta(i,j)*d(a)@D3(x,y)").unwrap();
        assert!(k.equivalent(&want), "{k}");
    }

    #[test]
    fn total_derivative_detection() {
        let m = model();
        let d = m.parse("d(a)@p0[a,i]*T[i] + p0[a,i]*d(a)@T[i]").unwrap();
        assert!(is_total_derivative(&d));
        let d = m.parse("p0[a,i]*d(a)@T[i]").unwrap();
        assert!(!is_total_derivative(&d));
    }

    #[test]
    fn trivial_pair_inverse() {
        // {q, p} = δ³ as a 2×2 kernel: inverse is the negative transpose
        let src = "field q slots=() role=dynamical momentum=p\n\
                   bracket {q, p} = D3(x,y)\n\
                   hamiltonian H = 0 canonical\n";
        let m = crate::phase::load_model(src).unwrap();
        let pb = Poisson::new(&m.table);
        let cons = vec![
            Constraint { name: "q".into(), density: m.parse("q").unwrap() },
            Constraint { name: "p".into(), density: m.parse("p").unwrap() },
        ];
        let c = CMatrix::build(&cons, &pb).unwrap();
        assert!(c.entries[0][1].equivalent(&Expression::one()));
        assert!(c.inverse[0][1].equivalent(&Expression::scalar(int(-1))));
        assert!(c.inverse[1][0].equivalent(&Expression::one()));
    }
}
