use hj_core::oracle::{cross_validate, Oracle, OraclePair};
use hj_core::phase::{builtin_model, builtin_source, load_model, Builtin};
use hj_core::pipeline::{analyze, bracket_stage, non_involutive_constraints, Analysis, Options};
use hj_core::reference::compare;
use hj_core::reference::Section;
use hj_core::report::{AnalysisReport, Format, TextStyle};

fn euler() -> Analysis {
    analyze(&builtin_model(Builtin::Euler), &Options::default()).unwrap()
}

#[test]
fn euler_structured_report_round_trips() {
    let a = euler();
    let report = AnalysisReport::from_analysis(&a);
    let json = report.emit(Format::Structured, TextStyle::plain());
    let back = AnalysisReport::from_json(&json).unwrap();
    assert_eq!(back, report);

    let row = back.brackets.iter().find(|b| b.left.text.starts_with("Ups") && b.right.text.starts_with("B0")).unwrap();
    let printed = a.stage.model.parse("-1/2*Omega^-1*eta(a,c,d)*delta(i,j)*D3(x,y)").unwrap();
    let c = compare("B0,Ups", Section::Brackets, &row.star.tree, &printed, None).unwrap();
    assert!(c.matches(), "{}", c.residual);
}

#[test]
fn analysis_is_deterministic() {
    let m = builtin_model(Builtin::Pontryagin);
    let one = AnalysisReport::from_analysis(&analyze(&m, &Options::default()).unwrap()).to_json();
    let two = AnalysisReport::from_analysis(&analyze(&m, &Options::default()).unwrap()).to_json();
    assert_eq!(one, two);
}

#[test]
fn oracle_rejects_a_wrong_bracket() {
    let stage = bracket_stage(&builtin_model(Builtin::Pontryagin), &Options::default()).unwrap();
    let second: Vec<_> = non_involutive_constraints(&stage.hamiltonians).into_iter().map(|c| c.density).collect();
    let oracle = Oracle::new(&stage.model, &second).unwrap();
    let b = stage.brackets.iter().find(|b| b.right.starts_with("B0") && !b.star.is_identically_zero()).unwrap();
    let wrong = OraclePair { label: "doubled".into(), f: b.f.clone(), g: b.g.clone(), kernel: b.star.scale(&hj_core::expr::int(2)) };
    let right = OraclePair { label: "engine".into(), f: b.f.clone(), g: b.g.clone(), kernel: b.star.clone() };
    assert!(cross_validate(&oracle, &[right], 10, 1e-10, 7).unwrap().passed());
    let cv = cross_validate(&oracle, &[wrong], 10, 1e-10, 7).unwrap();
    assert!(!cv.passed());
    assert_eq!(cv.failure.unwrap().label, "doubled");
}

#[test]
fn builtin_sources_load_and_bad_input_is_rejected() {
    for b in [Builtin::Pontryagin, Builtin::Euler] {
        let m = load_model(builtin_source(b)).unwrap();
        assert_eq!(m.primaries.len(), 8);
    }
    let bad = builtin_source(Builtin::Pontryagin).replacen("const Xi", "", 1);
    assert!(load_model(&bad).is_err());
}

#[test]
fn latex_report_is_a_document() {
    let a = euler();
    let tex = AnalysisReport::from_analysis(&a).emit(Format::Latex, TextStyle::plain());
    assert!(tex.starts_with("\\documentclass"));
    assert!(tex.contains("\\Omega"));
    assert_eq!(tex.matches("\\begin{align*}").count(), tex.matches("\\end{align*}").count());
    assert!(tex.trim_end().ends_with("\\end{document}"));
}
