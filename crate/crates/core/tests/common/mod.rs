//! Random expression corpus and property checks shared by the property
//! suite and the acceptance target.
#![allow(dead_code)]

use std::sync::OnceLock;

use hj_core::bracket::{is_total_derivative, Poisson, Star};
use hj_core::expr::{canonicalize, Expression, FieldSymbol, Idx};
use hj_core::phase::{builtin_model, Builtin, Model};
use hj_core::pipeline::{bracket_stage, BracketStage, Options};
use proptest::prelude::*;

/// Scalar building blocks over the Pontryagin phase space.
pub const SCALARS: &[&str] = &[
    "A0[a,i]*p0[a,i]",
    "Ups[a,i]*pi[a,i]",
    "eps(i,j,k)*A0[a,i]*Ups[a,j]*T[k]",
    "eta(a,b,c)*d(a)@A0[b,i]*Ups[c,i]",
    "T[i]*Th[i]",
    "Lam[i]*Lh[i]",
    "eta(a,b,c)*B0[a,b,i]*A0[c,i]",
    "pB0[a,b,i]*B[a,b,i]",
    "Sig[a,i]*Sh[a,i]*T[j]*T[j]",
    "eps(i,j,k)*p0[a,i]*pi[a,j]*Lam[k]",
    "d(a)@p0[a,i]*T[i]",
    "A0[a,i]*A0[a,i]",
    "pi[a,i]*pi[a,i]",
    "eta(a,b,c)*Ups[a,i]*d(b)@Ups[c,i]",
    "Chi[a,i]*Ch[a,i]",
    "eps(i,j,k)*Th[i]*Lh[j]*T[k]",
    "eta(a,b,c)*pB[a,b,i]*pi[c,i]",
    "d(a)@Ups[a,i]*Lam[i]",
];

/// Blocks with one free internal index `i`.
pub const VECTORS: &[&str] = &[
    "eps(i,j,k)*A0[a,j]*Ups[a,k]",
    "d(a)@pi[a,i]",
    "T[i]",
    "eta(a,b,c)*B[a,b,i]*d(c)@Lh[j]*Lam[j]",
    "delta(i,j)*Th[j]",
    "eps(i,j,k)*p0[a,j]*A0[a,k]*T[l]*Lam[l]",
    "eta(a,b,c)*d(a)@d(b)@Ups[c,i]",
];

pub struct Fixture {
    pub model: Model,
    pub stage: BracketStage,
}

pub fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let model = builtin_model(Builtin::Pontryagin);
        let stage = bracket_stage(&model, &Options::default()).expect("bracket stage");
        Fixture { model, stage }
    })
}

impl Fixture {
    pub fn poisson(&self) -> Poisson<'_> {
        Poisson::new(&self.model.table)
    }

    pub fn star(&self) -> Star<'_> {
        Star::new(self.poisson(), self.stage.cmatrix.clone())
    }
}

/// (block, numerator, denominator, power of Xi)
pub type Draw = Vec<(usize, i64, i64, i32)>;

fn draw(blocks: usize) -> impl Strategy<Value = Draw> {
    prop::collection::vec(
        (0..blocks, prop_oneof![-3i64..=-1, 1i64..=3], 1i64..=3, -1i32..=1),
        1..=3,
    )
}

pub fn scalar() -> impl Strategy<Value = Draw> {
    draw(SCALARS.len())
}

pub fn vector() -> impl Strategy<Value = Draw> {
    draw(VECTORS.len())
}

pub fn build(blocks: &[&str], s: &Draw) -> Expression {
    let src: Vec<String> = s
        .iter()
        .map(|(b, n, d, p)| format!("({n}/{d})*Xi^{p}*{}", blocks[*b]))
        .collect();
    fixture().model.parse(&src.join(" + ")).expect("corpus parses")
}

pub fn check(ok: bool, what: &str, e: &Expression) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(format!("{what}: {e}"))
    }
}

pub fn antisymmetry(f: &Expression, g: &Expression) -> Result<(), String> {
    let pb = fixture().poisson();
    let s = pb.with_functional(f, g).unwrap().add(&pb.with_functional(g, f).unwrap()).unwrap();
    check(is_total_derivative(&canonicalize(&s)), "{f,G} + {g,F} is not a total derivative", &s)
}

/// Leibniz rule in the local argument: {g h, ∫f} = {g, ∫f} h + g {h, ∫f}.
pub fn leibniz(f: &Expression, g: &Expression, h: &Expression) -> Result<(), String> {
    let pb = fixture().poisson();
    let lhs = pb.with_functional(&g.mul(h).unwrap(), f).unwrap();
    let rhs = pb
        .with_functional(g, f)
        .unwrap()
        .mul(h)
        .unwrap()
        .add(&g.mul(&pb.with_functional(h, f).unwrap()).unwrap())
        .unwrap();
    let r = canonicalize(&lhs.sub(&rhs).unwrap());
    check(r.is_identically_zero(), "Leibniz residual", &r)
}

pub fn jacobi(f: &Expression, g: &Expression, h: &Expression) -> Result<(), String> {
    let pb = fixture().poisson();
    let nested = |a: &Expression, b: &Expression, c: &Expression| {
        let ab = pb.with_functional(a, b).unwrap();
        pb.with_functional(&ab, c).unwrap()
    };
    let s = nested(f, g, h).add(&nested(g, h, f)).unwrap().add(&nested(h, f, g)).unwrap();
    check(is_total_derivative(&canonicalize(&s)), "Jacobi sum is not a total derivative", &s)
}

/// {f(x), ∫φ s}* = 0 and {φ(x), ∫f}* = 0 for every non-involutive φ.
pub fn star_annihilation(f: &Expression) -> Result<(), String> {
    let fx = fixture();
    let star = fx.star();
    let c = &fx.stage.cmatrix;
    for ((name, d), pair) in c.names.iter().zip(&c.densities).zip(&c.antisym) {
        let s = FieldSymbol::new("s", d.free.clone()).with_antisym(*pair);
        let smeared = canonicalize(&d.mul(&Expression::smearing(s)).unwrap());
        let a = star.with_functional(f, &smeared).unwrap();
        check(a.is_identically_zero(), &format!("{{f, {name}}}*"), &a)?;
        let b = star.with_functional(d, f).unwrap();
        check(b.is_identically_zero(), &format!("{{{name}, F}}*"), &b)?;
    }
    Ok(())
}

pub fn idempotence(e: &Expression) -> Result<(), String> {
    let once = canonicalize(e);
    let twice = canonicalize(&once);
    if once != twice {
        return Err(format!("canonicalize not idempotent: {once} vs {twice}"));
    }
    let z = canonicalize(&e.sub(e).unwrap());
    check(z.is_zero(), "e - e", &z)
}

/// ∂(f g) = ∂f g + f ∂g and ∂(f + g) = ∂f + ∂g.
pub fn derivative_rules(f: &Expression, g: &Expression) -> Result<(), String> {
    let a = Idx::s(7);
    let d = |e: &Expression| e.spatial_derivative(a).unwrap();
    let prod = d(&f.mul(g).unwrap()).sub(&d(f).mul(g).unwrap().add(&f.mul(&d(g)).unwrap()).unwrap()).unwrap();
    check(canonicalize(&prod).is_identically_zero(), "Leibniz for d", &prod)?;
    let fg = f.mul(g).unwrap();
    let sum = d(&g.add(&fg).unwrap()).sub(&d(g).add(&d(&fg)).unwrap()).unwrap();
    check(canonicalize(&sum).is_identically_zero(), "linearity of d", &sum)
}
