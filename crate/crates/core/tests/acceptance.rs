//! Acceptance criteria 1-10. Each criterion prints one PASS/FAIL line.
//! Criteria whose printed reference displays carry sign or index errors
//! fail with the exact list of divergent displays; the test pins that list
//! so a new divergence, or a fixed one, is noticed.

mod common;

use std::collections::BTreeSet;
use std::io::Write;
use std::sync::OnceLock;

use hj_core::phase::{builtin_model, Builtin};
use hj_core::pipeline::{analyze, validate_brackets, Analysis, Options};
use hj_core::reference::{compare_all, core_ids, generator_interchange, reference, Comparison, Section, Verdict};
use hj_core::report::AnalysisReport;
use proptest::test_runner::{Config, TestRunner};

struct Model {
    which: Builtin,
    analysis: Analysis,
    comparisons: Vec<Comparison>,
}

fn model(which: Builtin) -> &'static Model {
    static P: OnceLock<Model> = OnceLock::new();
    static E: OnceLock<Model> = OnceLock::new();
    let cell = match which {
        Builtin::Pontryagin => &P,
        Builtin::Euler => &E,
    };
    cell.get_or_init(|| {
        let analysis = analyze(&builtin_model(which), &Options::default()).expect("pipeline");
        let comparisons = compare_all(reference(which), &analysis).expect("comparisons");
        Model { which, analysis, comparisons }
    })
}

fn both() -> [&'static Model; 2] {
    [model(Builtin::Pontryagin), model(Builtin::Euler)]
}

fn name(m: &Model) -> &'static str {
    match m.which {
        Builtin::Pontryagin => "pontryagin",
        Builtin::Euler => "euler",
    }
}

/// Outcome of one criterion: failing checks, and the subset explained by
/// divergent printed displays.
#[derive(Default)]
struct Outcome {
    failures: Vec<String>,
    divergent: BTreeSet<String>,
}

impl Outcome {
    fn require(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    /// A printed display that does not hold for the engine.
    fn diverges(&mut self, id: String) {
        self.failures.push(format!("printed display diverges: {id}"));
        self.divergent.insert(id);
    }

    fn unexplained(&self) -> Vec<&String> {
        self.failures.iter().filter(|f| !f.starts_with("printed display diverges")).collect()
    }
}

fn section<'a>(m: &'a Model, s: Section) -> impl Iterator<Item = &'a Comparison> {
    m.comparisons.iter().filter(move |c| c.section == s)
}

fn matching(m: &Model, s: Section, o: &mut Outcome) -> usize {
    let mut n = 0;
    for c in section(m, s) {
        n += 1;
        o.require(c.matches(), format!("{} {:?} {}: {:?}", name(m), s, c.id, c.verdict));
    }
    n
}

fn criterion_1() -> Outcome {
    let mut o = Outcome::default();
    let m = model(Builtin::Pontryagin);
    let r = reference(Builtin::Pontryagin);
    let p = &m.analysis.stage.partition;
    o.require(p.involutive == r.involutive, format!("involutive {:?}", p.involutive));
    o.require(p.non_involutive == r.non_involutive, format!("non-involutive {:?}", p.non_involutive));
    o
}

fn criterion_2() -> Outcome {
    let mut o = Outcome::default();
    for m in both() {
        let c = &m.analysis.stage.cmatrix;
        let n = c.names.len();
        o.require(n == 4, format!("{}: C-matrix over {n} Hamiltonians", name(m)));
        let entries = matching(m, Section::CMatrix, &mut o);
        o.require(entries == n * n, format!("{}: {entries} C entries compared", name(m)));
        matching(m, Section::CInverse, &mut o);
        for a in 0..n {
            for b in 0..n {
                let r = c.convolution_residual(a, b);
                o.require(r.is_identically_zero(), format!("{}: (C Cinv)[{a},{b}] - 1 = {r}", name(m)));
            }
        }
    }
    o
}

fn criterion_3() -> Outcome {
    let mut o = Outcome::default();
    for m in both() {
        let n = matching(m, Section::Brackets, &mut o);
        o.require(n == 10, format!("{}: {n} bracket entries", name(m)));
        let cv = validate_brackets(&m.analysis.stage, 100, 1e-10, 1).expect("oracle");
        o.require(
            cv.passed() && cv.trials >= 100,
            format!("{}: oracle max deviation {:e} over {} trials", name(m), cv.max_deviation, cv.trials),
        );
    }
    o
}

fn criterion_4() -> Outcome {
    let mut o = Outcome::default();
    let generated = ["phi9", "phi10", "phi11", "phi12"];
    for m in both() {
        let g = &m.analysis.generations;
        o.require(g.len() == 2, format!("{}: {} generations", name(m), g.len()));
        if let Some(first) = g.first() {
            o.require(first.new == generated, format!("{}: generation 1 gave {:?}", name(m), first.new));
        }
        if let Some(second) = g.get(1) {
            o.require(second.new.is_empty(), format!("{}: generation 2 gave {:?}", name(m), second.new));
        }
        let r = reference(m.which);
        for c in section(m, Section::Hamiltonians).filter(|c| generated.contains(&c.id.as_str())) {
            let documented = r.notes.iter().any(|(k, _)| *k == c.id);
            let ok = c.matches() || (c.verdict == Verdict::Negated && documented);
            o.require(ok, format!("{} {}: {:?}", name(m), c.id, c.verdict));
        }
    }
    o
}

fn criterion_5() -> Outcome {
    let mut o = Outcome::default();
    for m in both() {
        let n = matching(m, Section::Algebra, &mut o);
        o.require(n == 10, format!("{}: {n} algebra entries", name(m)));
        o.require(m.analysis.algebra.closed, format!("{}: algebra not closed", name(m)));
    }
    o
}

fn criterion_6() -> Outcome {
    let mut o = Outcome::default();
    for m in both() {
        let mut n = 0;
        for c in section(m, Section::Reducibility) {
            n += 1;
            if !c.matches() {
                o.diverges(format!("{} {}", name(m), c.id));
            }
        }
        o.require(n == 2, format!("{}: {n} printed relations", name(m)));
        let a = &m.analysis;
        o.require(a.reducibility.iter().all(|r| r.holds()), format!("{}: a discovered relation fails", name(m)));
        let count: usize = a.reducibility.iter().map(|r| r.conditions()).sum();
        o.require(count == 6, format!("{}: {count} reducibility conditions discovered", name(m)));
    }
    o
}

fn criterion_7() -> Outcome {
    let mut o = Outcome::default();
    for m in both() {
        let d = &m.analysis.dof;
        o.require(
            d.dynamical_count == 18 && d.independent_involutive == 18 && d.dof == 0,
            format!("{}: DOF = {} - {} = {}", name(m), d.dynamical_count, d.independent_involutive, d.dof),
        );
    }
    o
}

fn criterion_8() -> Outcome {
    let mut o = Outcome::default();
    for m in both() {
        let core: BTreeSet<String> = core_ids(reference(m.which)).into_iter().collect();
        let report = AnalysisReport::from_analysis(&m.analysis).with_comparisons(&m.comparisons);
        let mut seen = BTreeSet::new();
        for c in m.comparisons.iter().filter(|c| matches!(c.section, Section::Characteristic | Section::Gauge)) {
            let topic = format!("{:?} {}", c.section, c.id);
            if core.contains(&c.id) {
                seen.insert(c.id.clone());
            }
            if !c.matches() {
                o.require(report.diagnostics.iter().any(|d| d.topic == topic), format!("{topic} has no diagnostic"));
                if core.contains(&c.id) {
                    o.diverges(format!("{} {topic}", name(m)));
                }
            }
        }
        let missing: Vec<_> = core.difference(&seen).collect();
        o.require(missing.is_empty(), format!("{}: no equation for {missing:?}", name(m)));
    }
    o
}

fn criterion_9() -> Outcome {
    let mut o = Outcome::default();
    let cs = generator_interchange(&model(Builtin::Pontryagin).analysis, &model(Builtin::Euler).analysis).expect("interchange");
    o.require(cs.len() == 2, format!("{} interchange identities", cs.len()));
    for c in cs {
        o.require(c.matches(), format!("{}: {:?}", c.id, c.verdict));
    }
    o
}

fn criterion_10() -> Outcome {
    use common::*;
    let mut o = Outcome::default();
    let mut runner = TestRunner::new(Config { cases: 200, failure_persistence: None, ..Config::default() });
    let fail = |r: Result<(), String>| r.map_err(proptest::test_runner::TestCaseError::fail);
    let results: [(&str, Result<(), String>); 5] = [
        ("antisymmetry", run_err(&mut runner, &(scalar(), scalar()), |(f, g)| fail(antisymmetry(&build(SCALARS, &f), &build(SCALARS, &g))))),
        (
            "leibniz",
            run_err(&mut runner, &(scalar(), vector(), vector()), |(f, g, h)| {
                fail(leibniz(&build(SCALARS, &f), &build(VECTORS, &g), &build(VECTORS, &h)))
            }),
        ),
        (
            "jacobi",
            run_err(&mut runner, &(scalar(), scalar(), scalar()), |(f, g, h)| {
                fail(jacobi(&build(SCALARS, &f), &build(SCALARS, &g), &build(SCALARS, &h)))
            }),
        ),
        ("star annihilation", run_err(&mut runner, &scalar(), |f| fail(star_annihilation(&build(SCALARS, &f))))),
        (
            "canonicalization",
            run_err(&mut runner, &(scalar(), vector()), |(f, g)| {
                fail(idempotence(&build(SCALARS, &f)).and_then(|_| idempotence(&build(VECTORS, &g))))
            }),
        ),
    ];
    for (what, r) in results {
        if let Err(e) = r {
            o.require(false, format!("{what}: {e}"));
        }
    }
    o
}

fn run_err<S: proptest::strategy::Strategy>(
    runner: &mut TestRunner,
    s: &S,
    t: impl Fn(S::Value) -> Result<(), proptest::test_runner::TestCaseError>,
) -> Result<(), String> {
    runner.run(s, t).map_err(|e| e.to_string())
}

/// Printed displays known to disagree with the engine; see the decisions
/// ledger for the analysis of each.
const DIVERGENT: &[&str] = &[
    "pontryagin d phi12",
    "pontryagin Characteristic dUps/dt",
    "pontryagin Characteristic dUps/tau_t",
    "pontryagin Gauge dUps/tau_t",
    "euler Characteristic dUps/lam_t",
    "euler Gauge dUps/lam_t",
];

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("pontryagin classification", criterion_1),
        ("C-matrix and inverse", criterion_2),
        ("generalized brackets", criterion_3),
        ("integrability", criterion_4),
        ("algebra closure", criterion_5),
        ("reducibility", criterion_6),
        ("degrees of freedom", criterion_7),
        ("characteristic equations and gauge transformations", criterion_8),
        ("generator interchange", criterion_9),
        ("property suites", criterion_10),
    ];
    let mut unexplained = Vec::new();
    let mut divergent = BTreeSet::new();
    for (k, (title, run)) in criteria.iter().enumerate() {
        let o = run();
        let verdict = if o.failures.is_empty() { "PASS" } else { "FAIL" };
        // written past the test harness capture so the verdicts always show
        let mut err = std::io::stderr().lock();
        let _ = writeln!(err, "criterion {:>2} {verdict}: {title}", k + 1);
        for f in &o.failures {
            let _ = writeln!(err, "    {f}");
        }
        unexplained.extend(o.unexplained().into_iter().map(|f| format!("criterion {}: {f}", k + 1)));
        divergent.extend(o.divergent);
    }
    assert!(unexplained.is_empty(), "unexplained failures:\n{}", unexplained.join("\n"));
    let pinned: BTreeSet<String> = DIVERGENT.iter().map(|s| s.to_string()).collect();
    assert_eq!(divergent, pinned, "divergent printed displays changed");
}
