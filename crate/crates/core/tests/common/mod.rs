#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use rand::Rng;
use zonelogic::calculus::{check, fragment_closure_check, Derivation, RuleId};
use zonelogic::cut_elim::{default_fuel, eliminate, guard_violation, CutMode, Elimination};
use zonelogic::diagram::{compile, identity_rho, interpret_context, licensed_check, out_object, typecheck, DiagGen};
use zonelogic::files::parse_discipline;
use zonelogic::signature::{DisciplineSpec, StructuralFamily, SubexpSignature, Zone, ZonePreorder};

pub fn sample(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../cli/examples").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn three_zone() -> DisciplineSpec {
    parse_discipline(&sample("three-zone.disc")).unwrap()
}

pub fn z(s: &str) -> Zone {
    Zone::new(s).unwrap()
}

/// Guarded elimination of a guard-satisfying derivation must end cut-free
/// within the default fuel, with the same end-sequent, valid, and inside
/// the fragment. `Ok(false)` when the derivation violates the guard.
pub fn guarded_elim_ok(sig: &SubexpSignature, d: &Derivation) -> Result<bool, String> {
    if guard_violation(sig, d).is_some() {
        return Ok(false);
    }
    let fuel = default_fuel(d);
    match eliminate(sig, d, CutMode::GuardedCut, None).map_err(|e| e.to_string())? {
        Elimination::CutFree { derivation, steps } => {
            if steps > fuel {
                return Err(format!("{steps} steps exceed fuel {fuel}"));
            }
            if !derivation.is_cut_free() {
                return Err("result contains a cut".into());
            }
            if !derivation.context().multiset_eq(d.context()) || derivation.succedent() != d.succedent() {
                return Err(format!("end-sequent changed: {} vs {}", derivation.conclusion, d.conclusion));
            }
            if !check(sig, &derivation).is_valid() {
                return Err(format!("result invalid: {}", check(sig, &derivation)));
            }
            fragment_closure_check(&derivation).map_err(|v| v.to_string())?;
            Ok(true)
        }
        Elimination::Stuck { reason, .. } => Err(format!("stuck: {reason}")),
        Elimination::FuelExhausted { steps, .. } => Err(format!("fuel exhausted after {steps} steps")),
    }
}

/// Compiled term typechecks at the interpreted end-sequent, is licensed,
/// and its structural witnesses match the structural rules one for one.
pub fn compile_ok(spec: &DisciplineSpec, d: &Derivation) -> Result<(), String> {
    let mut atoms = Vec::new();
    d.walk(&mut |_, n| {
        for f in n.conclusion.formulas() {
            f.atoms(&mut atoms);
        }
    });
    let atoms: BTreeSet<String> = atoms.into_iter().collect();
    let rho = identity_rho(atoms.iter().map(String::as_str));
    let t = compile(spec, &rho, d).map_err(|e| e.to_string())?;
    let want = (
        interpret_context(&rho, d.context()).unwrap(),
        out_object(&rho, d.succedent()).unwrap(),
    );
    match typecheck(&t) {
        Ok(got) if got == want => {}
        Ok(got) => return Err(format!("typed {} -> {}, expected {} -> {}", got.0, got.1, want.0, want.1)),
        Err(e) => return Err(e.to_string()),
    }
    licensed_check(&t, spec).map_err(|e| e.to_string())?;
    for z in spec.preorder.zones() {
        let pairs = [
            (
                t.count_gens(&|g| matches!(g, DiagGen::Discard(y, _) if y == z)),
                d.count_rules(&|r| matches!(r, RuleId::Weaken(y) if y == z)),
                "discard/weaken",
            ),
            (
                t.count_gens(&|g| matches!(g, DiagGen::Diagonal(y, _) if y == z)),
                d.count_rules(&|r| matches!(r, RuleId::Contract(y) if y == z)),
                "diagonal/contract",
            ),
            (
                t.count_gens(&|g| matches!(g, DiagGen::Input(y, _) if y == z)),
                d.count_rules(&|r| matches!(r, RuleId::Cut { zone, .. } if zone == z)),
                "input/cut",
            ),
        ];
        for (a, b, what) in pairs {
            if a != b {
                return Err(format!("{what} in zone {z}: {a} vs {b}"));
            }
        }
    }
    Ok(())
}

/// A valid discipline over at most five zones with a random preorder and
/// random upward-closed families.
pub fn random_discipline(rng: &mut impl Rng) -> DisciplineSpec {
    let n = rng.gen_range(0..=5);
    let zones: Vec<Zone> = (0..n).map(|i| z(&format!("z{i}"))).collect();
    let mut edges = Vec::new();
    for a in &zones {
        for b in &zones {
            if a != b && rng.gen_bool(0.2) {
                edges.push((a.clone(), b.clone()));
            }
        }
    }
    let order = ZonePreorder::close(zones.clone(), &edges).unwrap();
    let mut seed = |p: f64| -> BTreeSet<Zone> { zones.iter().filter(|_| rng.gen_bool(p)).cloned().collect() };
    let (w, c) = (seed(0.3), seed(0.4));
    let family = StructuralFamily::new(order.upward_closure(&w), order.upward_closure(&c));
    DisciplineSpec::new(order, family)
}
