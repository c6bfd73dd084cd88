mod common;

use common::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, ..ProptestConfig::default() })]

    #[test]
    fn bracket_antisymmetry(f in scalar(), g in scalar()) {
        antisymmetry(&build(SCALARS, &f), &build(SCALARS, &g)).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn bracket_leibniz(f in scalar(), g in vector(), h in vector()) {
        leibniz(&build(SCALARS, &f), &build(VECTORS, &g), &build(VECTORS, &h)).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn bracket_jacobi(f in scalar(), g in scalar(), h in scalar()) {
        jacobi(&build(SCALARS, &f), &build(SCALARS, &g), &build(SCALARS, &h)).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn star_annihilates_second_class(f in scalar()) {
        star_annihilation(&build(SCALARS, &f)).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn canonical_form(f in scalar(), g in vector()) {
        idempotence(&build(SCALARS, &f)).map_err(TestCaseError::fail)?;
        idempotence(&build(VECTORS, &g)).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn spatial_derivative_rules(f in scalar(), g in vector()) {
        derivative_rules(&build(SCALARS, &f), &build(VECTORS, &g)).map_err(TestCaseError::fail)?;
    }
}
