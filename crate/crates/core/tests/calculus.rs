mod common;

use std::collections::BTreeSet;
use std::ops::ControlFlow;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;
use zonelogic::calculus::{check, fragment_closure_check, Derivation, Verdict};
use zonelogic::cut_elim::{cut_rank, eliminate, CutMode, Elimination};
use zonelogic::enumerate::{Enumerator, RandomDerivations};
use zonelogic::search::{search, SearchBudget, SearchResult};
use zonelogic::signature::{extract_signature, SubexpSignature};
use zonelogic::syntax::{Formula, Sequent, ZoneContext};

fn sig() -> SubexpSignature {
    extract_signature(&three_zone()).unwrap()
}

fn paths(d: &Derivation) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    d.walk(&mut |p, _| out.push(p.to_vec()));
    out
}

fn shuffle_contexts(d: &Derivation, rng: &mut ChaCha8Rng) -> Derivation {
    let mut items = d.context().items().to_vec();
    items.shuffle(rng);
    Derivation::new(
        Sequent::new(ZoneContext::new(items), d.succedent().clone()),
        d.rule.clone(),
        d.premises.iter().map(|p| shuffle_contexts(p, rng)).collect(),
    )
}

fn corpus(n: usize, seed: u64) -> Vec<Derivation> {
    let sig = sig();
    let mut out = Vec::new();
    for guarded in [true, false] {
        let mut gen = RandomDerivations::new(&sig, &["X", "Y"], guarded, ChaCha8Rng::seed_from_u64(seed));
        for nodes in 1..=12 {
            out.extend((0..n).map(|_| gen.derivation(nodes)));
        }
    }
    out
}

#[test]
fn context_order_is_irrelevant() {
    let sig = sig();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for d in corpus(20, 1) {
        assert!(check(&sig, &d).is_valid());
        let e = shuffle_contexts(&d, &mut rng);
        assert!(check(&sig, &e).is_valid(), "{}", e.to_string_rules());
    }
}

#[test]
fn changing_a_succedent_is_caught_at_that_node_or_its_parent() {
    let sig = sig();
    let odd = Formula::atom("Odd");
    for d in corpus(10, 2) {
        for p in paths(&d) {
            let mut node = d.at(&p).unwrap().clone();
            node.conclusion.succedent = odd.clone();
            let mut e = d.clone();
            e.replace_at(&p, node);
            let Verdict::Invalid { path, .. } = check(&sig, &e) else {
                panic!("mutation at {p:?} accepted: {}", e.to_string_rules());
            };
            let parent = &p[..p.len().saturating_sub(1)];
            assert!(path == p || path == parent, "{path:?} vs {p:?}");
        }
    }
}

#[test]
fn dropping_a_context_formula_is_caught() {
    let sig = sig();
    for d in corpus(10, 3) {
        for p in paths(&d) {
            let mut node = d.at(&p).unwrap().clone();
            let mut items = node.context().items().to_vec();
            if items.pop().is_none() {
                continue;
            }
            node.conclusion.antecedent = ZoneContext::new(items);
            let mut e = d.clone();
            e.replace_at(&p, node);
            assert!(!check(&sig, &e).is_valid(), "mutation at {p:?} accepted");
        }
    }
}

#[test]
fn structural_rules_follow_the_signature() {
    let sig = sig();
    for d in corpus(20, 4) {
        d.walk(&mut |_, n| match &n.rule {
            zonelogic::calculus::RuleId::Weaken(z) => assert!(sig.can_weaken(z)),
            zonelogic::calculus::RuleId::Contract(z) => assert!(sig.can_contract(z)),
            _ => {}
        });
    }
}

#[test]
fn pinned_level_count() {
    let sig = sig();
    assert_eq!(Enumerator::new(&sig, &["X"]).count(3), 198_990);
}

#[test]
fn enumerated_derivations_stay_in_the_fragment() {
    let sig = sig();
    let mut seen = 0;
    let _ = Enumerator::new(&sig, &["X", "Y"]).visit(9, &mut |d| {
        assert!(fragment_closure_check(d).is_ok());
        assert!(check(&sig, d).is_valid());
        seen += 1;
        if seen == 10_000 {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    assert_eq!(seen, 10_000);
}

#[test]
fn search_proves_every_enumerated_cut_free_sequent() {
    let sig = sig();
    let mut goals = BTreeSet::new();
    let _ = Enumerator::with_nesting(&sig, &["X"], 1).visit(4, &mut |d| {
        if d.is_cut_free() && d.conclusion.size() <= 8 {
            goals.insert(d.conclusion.canonical());
        }
        ControlFlow::Continue(())
    });
    assert!(goals.len() > 100);
    for goal in &goals {
        match search(&sig, goal, SearchBudget::new(8, 2)) {
            SearchResult::Found(p) => {
                assert!(p.is_cut_free());
                assert_eq!(&p.conclusion, goal);
                assert!(check(&sig, &p).is_valid());
            }
            other => panic!("{goal}: {other}"),
        }
    }
}

#[test]
fn paper_mode_either_finishes_or_reports_a_checkable_witness() {
    let sig = sig();
    let (mut free, mut stuck) = (0, 0);
    for d in corpus(10, 5) {
        match eliminate(&sig, &d, CutMode::PaperCut, None).unwrap() {
            Elimination::CutFree { derivation, .. } => {
                assert_eq!(cut_rank(&derivation), (0, 0));
                assert!(check(&sig, &derivation).is_valid());
                free += 1;
            }
            Elimination::Stuck { witness, reason, .. } => {
                assert!(check(&sig, &witness).is_valid(), "{reason}");
                assert!(reason.contains("∉"), "{reason}");
                stuck += 1;
            }
            Elimination::FuelExhausted { steps, .. } => panic!("fuel exhausted after {steps}"),
        }
    }
    assert!(free > 0 && stuck > 0, "{free} {stuck}");
}

#[test]
fn guarded_mode_eliminates_random_guarded_derivations() {
    let sig = sig();
    let mut gen = RandomDerivations::new(&sig, &["X", "Y"], true, ChaCha8Rng::seed_from_u64(6));
    for nodes in 1..=14 {
        for _ in 0..30 {
            let d = gen.derivation(nodes);
            assert_eq!(guarded_elim_ok(&sig, &d), Ok(true), "{}", d.to_string_rules());
        }
    }
}
