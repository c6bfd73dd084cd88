//! Numeric cross-check of symbolic brackets on single-point reductions.
//!
//! Every independent field and momentum component becomes one coordinate;
//! spatial derivatives are set to zero and δ³ to one. Poisson brackets are
//! gradient contractions with the numeric fundamental matrix, and the
//! generalized bracket is formed from a numerically inverted C-matrix over
//! the components of the non-involutive Hamiltonians.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{eval_poly, rat_to_f64, CompVar, Expression, FieldSymbol, Idx, Poly};
use crate::phase::Model;

/// Numeric matrices at one reduction.
#[derive(Clone, Debug)]
pub struct Numeric {
    pub j: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub inv: DMatrix<f64>,
    /// Generalized bracket matrix over the coordinates.
    pub star: DMatrix<f64>,
}

/// Random values for every coordinate and constant of a model.
#[derive(Clone, Debug)]
pub struct PointReduction {
    pub seed: u64,
    pub values: Vec<f64>,
    pub constants: BTreeMap<String, f64>,
}

/// Coordinates, fundamental brackets and second-class components of a model.
#[derive(Clone, Debug)]
pub struct Oracle {
    coords: Vec<CompVar>,
    index: BTreeMap<CompVar, usize>,
    /// (row, column, coefficient polynomial in the constants)
    fundamental: Vec<(usize, usize, Poly)>,
    constraints: Vec<Poly>,
    constant_names: Vec<String>,
}

fn canonical_components(kinds_len: usize, antisym: Option<(u8, u8)>) -> Vec<Vec<u8>> {
    let mut out = vec![Vec::new()];
    for _ in 0..kinds_len {
        out = out
            .into_iter()
            .flat_map(|v: Vec<u8>| {
                (0..3u8).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    if let Some((p, q)) = antisym {
        out.retain(|c| c[p as usize] < c[q as usize]);
    }
    out
}

fn assignment(free: &[Idx], vals: &BTreeMap<Idx, u8>) -> Option<Vec<u8>> {
    free.iter().map(|l| vals.get(l).copied()).collect()
}

fn same_up_to_sign(a: &Poly, b: &Poly) -> bool {
    a == b || (a.len() == b.len() && a.iter().all(|(k, c)| b.get(k).is_some_and(|d| *d == -c.clone())))
}

impl Oracle {
    /// `second_class` lists the densities of the non-involutive Hamiltonians.
    pub fn new(model: &Model, second_class: &[Expression]) -> Result<Oracle> {
        let mut coords = Vec::new();
        let mut slots_of: BTreeMap<String, FieldSymbol> = BTreeMap::new();
        for name in model.phase_space() {
            let (f, _) = model.phase_symbol(&name).ok_or_else(|| Error::UndeclaredSymbol(name.clone()))?;
            for comps in canonical_components(f.kinds.len(), f.antisym) {
                coords.push(CompVar { smearing: false, name: crate::expr::sym(&name), comps, derivs: [0; 3] });
            }
            let sym = model.symbol_at(&name, 0).ok_or_else(|| Error::UndeclaredSymbol(name.clone()))?;
            slots_of.insert(name, sym);
        }
        let index: BTreeMap<CompVar, usize> = coords.iter().cloned().enumerate().map(|(k, c)| (c, k)).collect();

        let mut fundamental = Vec::new();
        for (u, us) in &slots_of {
            for v in slots_of.keys() {
                let vs = model.symbol_at(v, 8).expect("declared").slots;
                let Some(coeff) = model.table.lookup(u, &us.slots, v, &vs) else { continue };
                let comps = coeff.components();
                for cu in coords.iter().filter(|c| *c.name == **u) {
                    for cv in coords.iter().filter(|c| *c.name == **v) {
                        let mut vals = BTreeMap::new();
                        vals.extend(us.slots.iter().copied().zip(cu.comps.iter().copied()));
                        vals.extend(vs.iter().copied().zip(cv.comps.iter().copied()));
                        let Some(a) = assignment(&comps.free, &vals) else { continue };
                        if let Some(p) = comps.get(&a) {
                            if !p.is_empty() {
                                fundamental.push((index[cu], index[cv], p.clone()));
                            }
                        }
                    }
                }
            }
        }

        let mut constraints: Vec<Poly> = Vec::new();
        for d in second_class {
            for p in d.components().parts.into_values() {
                if p.is_empty() || constraints.iter().any(|q| same_up_to_sign(q, &p)) {
                    continue;
                }
                constraints.push(p);
            }
        }
        let constant_names = model.constants.iter().map(|c| c.to_string()).collect();
        Ok(Oracle { coords, index, fundamental, constraints, constant_names })
    }

    pub fn dimension(&self) -> usize {
        self.coords.len()
    }

    pub fn constraint_count(&self) -> usize {
        self.constraints.len()
    }

    /// Fields uniform in [−1, 1]; constants k/64 with k in 32..=128.
    pub fn reduction(&self, seed: u64) -> PointReduction {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let constants = self
            .constant_names
            .iter()
            .map(|c| (c.clone(), rng.gen_range(32..=128) as f64 / 64.0))
            .collect();
        let values = (0..self.coords.len()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        PointReduction { seed, values, constants }
    }

    fn constant<'a>(r: &'a PointReduction) -> impl Fn(&str) -> f64 + 'a {
        move |n| r.constants.get(n).copied().unwrap_or(f64::NAN)
    }

    fn value(&self, r: &PointReduction, v: &CompVar) -> f64 {
        if v.smearing || v.derivs != [0; 3] {
            return 0.0;
        }
        self.index.get(v).map_or(0.0, |&k| r.values[k])
    }

    pub fn eval(&self, p: &Poly, r: &PointReduction) -> f64 {
        eval_poly(p, &mut |v| self.value(r, v), &Self::constant(r))
    }

    /// Gradient of a polynomial with respect to the coordinates.
    pub fn gradient(&self, p: &Poly, r: &PointReduction) -> DVector<f64> {
        let constant = Self::constant(r);
        let mut g = DVector::zeros(self.coords.len());
        for (k, c) in p {
            if k.dists.iter().any(|d| d.iter().any(|&x| x > 0)) {
                continue;
            }
            let mut base = rat_to_f64(c);
            for (n, e) in &k.consts {
                base *= constant(n).powi(*e);
            }
            let vals: Vec<f64> = k.mono.iter().map(|(v, _)| self.value(r, v)).collect();
            for (j, (v, e)) in k.mono.iter().enumerate() {
                let Some(&slot) = self.index.get(v) else { continue };
                if v.derivs != [0; 3] {
                    continue;
                }
                let mut t = base * *e as f64 * vals[j].powi(*e as i32 - 1);
                for (m, (_, em)) in k.mono.iter().enumerate() {
                    if m != j {
                        t *= vals[m].powi(*em as i32);
                    }
                }
                g[slot] += t;
            }
        }
        g
    }

    pub fn fundamental_matrix(&self, r: &PointReduction) -> DMatrix<f64> {
        let n = self.coords.len();
        let mut j = DMatrix::zeros(n, n);
        for (u, v, p) in &self.fundamental {
            j[(*u, *v)] = self.eval(p, r);
        }
        j
    }

    /// Fundamental matrix, C-matrix, its inverse and the generalized
    /// bracket matrix J − J·G·C⁻¹·Gᵀ·J at a reduction.
    pub fn numeric(&self, r: &PointReduction) -> Result<Numeric> {
        let j = self.fundamental_matrix(r);
        let m = self.constraints.len();
        let mut grads = DMatrix::zeros(self.coords.len(), m);
        for (a, p) in self.constraints.iter().enumerate() {
            grads.set_column(a, &self.gradient(p, r));
        }
        let c = grads.transpose() * &j * &grads;
        let inv = c
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Oracle(format!("numerically singular C-matrix at seed {}", r.seed)))?;
        let jg = &j * &grads;
        let star = &j - &jg * &inv * (grads.transpose() * &j);
        Ok(Numeric { j, c, inv, star })
    }

    /// {f, g}* at a reduction for scalar polynomials f and g.
    pub fn star(&self, f: &Poly, g: &Poly, r: &PointReduction) -> Result<f64> {
        Ok(self.star_with(&self.numeric(r)?.star, f, g, r))
    }

    fn star_with(&self, d: &DMatrix<f64>, f: &Poly, g: &Poly, r: &PointReduction) -> f64 {
        let gf = self.sparse_gradient(f, r);
        let gg = self.sparse_gradient(g, r);
        let mut total = 0.0;
        for (u, x) in &gf {
            for (v, y) in &gg {
                total += x * d[(*u, *v)] * y;
            }
        }
        total
    }

    fn sparse_gradient(&self, p: &Poly, r: &PointReduction) -> Vec<(usize, f64)> {
        let g = self.gradient(p, r);
        g.iter().enumerate().filter(|(_, x)| **x != 0.0).map(|(k, x)| (k, *x)).collect()
    }

    /// Poisson bracket {f, g} at a reduction.
    pub fn poisson(&self, f: &Poly, g: &Poly, r: &PointReduction) -> f64 {
        self.gradient(f, r).dot(&(self.fundamental_matrix(r) * self.gradient(g, r)))
    }
}

/// A symbolic bracket to check: `{f, g}* = kernel` with the labels of f and
/// g free in the kernel.
#[derive(Clone, Debug)]
pub struct OraclePair {
    pub label: String,
    pub f: Expression,
    pub g: Expression,
    pub kernel: Expression,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairOutcome {
    pub label: String,
    pub max_deviation: f64,
    pub worst_seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub trials: usize,
    pub tolerance: f64,
    pub seed: u64,
    pub pairs: Vec<PairOutcome>,
    pub max_deviation: f64,
    /// First pair over tolerance, with the seed of its worst reduction.
    pub failure: Option<PairOutcome>,
}

impl CrossValidation {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Every index assignment of f and g, with the matching kernel assignment.
fn assignments(pair: &OraclePair) -> Vec<(Vec<u8>, Vec<u8>, Vec<u8>)> {
    let mut labels: Vec<Idx> = pair.f.free.clone();
    labels.extend(pair.g.free.iter().copied().filter(|l| !pair.f.free.contains(l)));
    let mut out = Vec::new();
    for comps in canonical_components(labels.len(), None) {
        let vals: BTreeMap<Idx, u8> = labels.iter().copied().zip(comps).collect();
        let fa = assignment(&pair.f.free, &vals).expect("labels cover f");
        let ga = assignment(&pair.g.free, &vals).expect("labels cover g");
        let ka: Vec<u8> = pair.kernel.free.iter().map(|l| vals.get(l).copied().unwrap_or(0)).collect();
        out.push((fa, ga, ka));
    }
    out
}

fn deviation(oracle: &Oracle, prepared: &Prepared, r: &PointReduction, num: &Numeric) -> f64 {
    let kc = &prepared.kernel;
    let mut worst: f64 = 0.0;
    for (fa, ga, ka) in &prepared.assignments {
        let (Some(fp), Some(gp)) = (prepared.f.get(fa), prepared.g.get(ga)) else {
            let symbolic = kc.get(ka).map_or(0.0, |p| oracle.eval(p, r));
            worst = worst.max(symbolic.abs());
            continue;
        };
        let numeric = oracle.star_with(&num.star, fp, gp, r);
        let symbolic = kc.get(ka).map_or(0.0, |p| oracle.eval(p, r));
        worst = worst.max((numeric - symbolic).abs());
    }
    worst
}

struct Prepared {
    kernel: crate::expr::Components,
    f: BTreeMap<Vec<u8>, Poly>,
    g: BTreeMap<Vec<u8>, Poly>,
    assignments: Vec<(Vec<u8>, Vec<u8>, Vec<u8>)>,
}

/// Compares every pair against the numeric generalized bracket over
/// `trials` reductions seeded `seed, seed + 1, …`.
pub fn cross_validate(oracle: &Oracle, pairs: &[OraclePair], trials: usize, tol: f64, seed: u64) -> Result<CrossValidation> {
    let prepared: Vec<Prepared> = pairs
        .iter()
        .map(|p| Prepared {
            kernel: p.kernel.components(),
            f: p.f.components().parts, g: p.g.components().parts, assignments: assignments(p) })
        .collect();
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(trials.max(1));
    let seeds: Vec<u64> = (0..trials as u64).map(|t| seed.wrapping_add(t)).collect();
    let chunk = seeds.len().div_ceil(threads).max(1);
    // per seed: deviation of every pair
    let per_seed: Vec<Result<(u64, Vec<f64>)>> = std::thread::scope(|s| {
        let handles: Vec<_> = seeds
            .chunks(chunk)
            .map(|ch| {
                let prepared = &prepared;
                s.spawn(move || {
                    ch.iter()
                        .map(|&sd| {
                            let r = oracle.reduction(sd);
                            let num = oracle.numeric(&r)?;
                            let devs = prepared.iter().map(|pr| deviation(oracle, pr, &r, &num)).collect();
                            Ok((sd, devs))
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("oracle worker")).collect()
    });
    let mut outcomes: Vec<PairOutcome> =
        pairs.iter().map(|p| PairOutcome { label: p.label.clone(), max_deviation: 0.0, worst_seed: seed }).collect();
    for res in per_seed {
        let (sd, devs) = res?;
        for (o, d) in outcomes.iter_mut().zip(devs) {
            if d > o.max_deviation || d.is_nan() {
                o.max_deviation = d;
                o.worst_seed = sd;
            }
        }
    }
    let max_deviation = outcomes.iter().map(|o| o.max_deviation).fold(0.0, f64::max);
    let failure = outcomes.iter().find(|o| !(o.max_deviation <= tol)).cloned();
    Ok(CrossValidation { trials, tolerance: tol, seed, pairs: outcomes, max_deviation, failure })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::{builtin_model, Builtin};

    fn setup(which: Builtin) -> (Model, Oracle) {
        let m = builtin_model(which);
        let sc: Vec<Expression> = ["phi1", "phi2", "phi7", "phi8"]
            .iter()
            .map(|n| m.primaries.iter().find(|h| h.name == *n).unwrap().density.clone())
            .collect();
        let o = Oracle::new(&m, &sc).unwrap();
        (m, o)
    }

    fn comp(m: &Model, name: &str, c: &[u8]) -> Poly {
        let e = Expression::field(m.symbol_at(name, 0).unwrap());
        e.components().get(c).cloned().unwrap_or_default()
    }

    #[test]
    fn pontryagin_b0_a_entry() {
        let (m, o) = setup(Builtin::Pontryagin);
        assert_eq!(o.dimension(), 120);
        assert_eq!(o.constraint_count(), 36);
        let r = o.reduction(7);
        let xi = r.constants["Xi"];
        // {B_{120}^1, A_{30}^1}* = η_{123}/(2Ξ)
        let v = o.star(&comp(&m, "B0", &[0, 1, 0]), &comp(&m, "A0", &[2, 0]), &r).unwrap();
        assert!((v - 0.5 / xi).abs() < 1e-12, "{v}");
        let v = o.star(&comp(&m, "B0", &[0, 1, 0]), &comp(&m, "A0", &[2, 1]), &r).unwrap();
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn euler_b_a_entry() {
        let (m, o) = setup(Builtin::Euler);
        let r = o.reduction(3);
        let om = r.constants["Omega"];
        let v = o.star(&comp(&m, "B", &[0, 1, 2]), &comp(&m, "A0", &[2, 2]), &r).unwrap();
        assert!((v - 0.5 / om).abs() < 1e-12, "{v}");
    }

    #[test]
    fn star_is_antisymmetric_and_self_bracket_vanishes() {
        let (m, o) = setup(Builtin::Pontryagin);
        let r = o.reduction(11);
        let f = comp(&m, "Ups", &[1, 2]);
        let g = comp(&m, "pB", &[0, 2, 1]);
        let a = o.star(&f, &g, &r).unwrap();
        let b = o.star(&g, &f, &r).unwrap();
        assert!((a + b).abs() < 1e-12);
        assert!(o.star(&f, &f, &r).unwrap().abs() < 1e-12);
    }

    #[test]
    fn reductions_are_deterministic() {
        let (_, o) = setup(Builtin::Euler);
        let (a, b) = (o.reduction(42), o.reduction(42));
        assert_eq!(a.values, b.values);
        assert_eq!(a.constants, b.constants);
        for c in a.constants.values() {
            assert!((0.5..=2.0).contains(c));
        }
    }
}
