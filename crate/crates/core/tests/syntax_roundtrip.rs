mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;
use zonelogic::enumerate::RandomDerivations;
use zonelogic::files::{parse_derivation, parse_discipline, print_derivation, print_discipline};
use zonelogic::signature::extract_signature;
use zonelogic::syntax::{parse_formula, parse_sequent, print_formula, print_sequent, Formula, Sequent, ZoneContext, ZonedFormula};

fn formula() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        Just(Formula::Unit),
        "[A-Z][a-z0-9]{0,3}".prop_filter("unit token", |s| s != "I").prop_map(Formula::atom),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| (inner.clone(), inner).prop_map(|(a, b)| Formula::tensor(a, b)))
}

fn sequent() -> impl Strategy<Value = Sequent> {
    let item = (prop::sample::select(vec!["l", "p", "r", "zone_1"]), formula())
        .prop_map(|(zone, f)| ZonedFormula::new(z(zone), f));
    (prop::collection::vec(item, 0..5), formula()).prop_map(|(ctx, f)| Sequent::new(ZoneContext::new(ctx), f))
}

proptest! {
    #[test]
    fn formula_print_parse(f in formula()) {
        let text = print_formula(&f);
        prop_assert_eq!(parse_formula(&text).unwrap(), f);
    }

    #[test]
    fn sequent_print_parse(s in sequent()) {
        let text = print_sequent(&s);
        let back = parse_sequent(&text).unwrap();
        prop_assert_eq!(&back, &s);
        prop_assert_eq!(print_sequent(&back), text);
    }

    #[test]
    fn discipline_print_parse(seed in any::<u64>()) {
        let spec = random_discipline(&mut ChaCha8Rng::seed_from_u64(seed));
        let text = print_discipline(&spec);
        let back = parse_discipline(&text).unwrap();
        prop_assert_eq!(print_discipline(&back), text);
        prop_assert!(zonelogic::signature::signatures_equal(
            &extract_signature(&spec).unwrap(),
            &extract_signature(&back).unwrap()
        ));
    }
}

#[test]
fn derivations_print_parse() {
    let sig = extract_signature(&three_zone()).unwrap();
    for guarded in [true, false] {
        let mut gen = RandomDerivations::new(&sig, &["X", "Y"], guarded, ChaCha8Rng::seed_from_u64(11));
        for n in 1..=12 {
            for _ in 0..40 {
                let d = gen.derivation(n);
                let back = parse_derivation(&print_derivation(&d), Some(&sig)).unwrap();
                assert_eq!(back, d);
            }
        }
    }
}

#[test]
fn whitespace_is_insignificant() {
    let a = parse_sequent("p:X,r:(Y*I)|-X").unwrap();
    let b = parse_sequent("  p : X ,  r : ( Y * I )  |-  X ").unwrap();
    assert_eq!(a, b);
}
