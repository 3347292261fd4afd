//! Exhaustive enumeration of valid derivations by node count.
//!
//! Level `n` holds every derivation with exactly `n` nodes, built from lower
//! levels by applying each rule forwards. Contexts are kept in canonical
//! order, so each tree is produced once. Small levels are cached; larger ones
//! are regenerated on demand so that memory stays bounded.

use std::collections::BTreeSet;
use std::ops::ControlFlow;

use rand::Rng;

use crate::calculus::{Derivation, RuleId};
use crate::signature::{SubexpSignature, Zone};
use crate::syntax::{Formula, Sequent, ZoneContext, ZonedFormula};

pub const DEFAULT_NESTING: usize = 2;
const STORE_LIMIT: usize = 250_000;

/// Atoms and `I`, closed under `*` up to the given tensor depth.
pub fn formula_universe(atoms: &[&str], max_nesting: usize) -> Vec<Formula> {
    let mut layer: Vec<Formula> = atoms.iter().map(|a| Formula::atom(*a)).collect();
    layer.push(Formula::Unit);
    for _ in 0..max_nesting {
        let mut next = layer.clone();
        for a in &layer {
            for b in &layer {
                let t = Formula::tensor(a.clone(), b.clone());
                if !next.contains(&t) {
                    next.push(t);
                }
            }
        }
        layer = next;
    }
    layer.sort();
    layer
}

pub struct Enumerator<'s> {
    sig: &'s SubexpSignature,
    universe: Vec<Formula>,
    max_nesting: usize,
    levels: Vec<Option<Vec<Derivation>>>,
}

impl<'s> Enumerator<'s> {
    pub fn new(sig: &'s SubexpSignature, atoms: &[&str]) -> Enumerator<'s> {
        Enumerator::with_nesting(sig, atoms, DEFAULT_NESTING)
    }

    pub fn with_nesting(
        sig: &'s SubexpSignature,
        atoms: &[&str],
        max_nesting: usize,
    ) -> Enumerator<'s> {
        Enumerator {
            sig,
            universe: formula_universe(atoms, max_nesting),
            max_nesting,
            levels: vec![None],
        }
    }

    pub fn universe(&self) -> &[Formula] {
        &self.universe
    }

    /// Caches every level below `max_nodes` that fits the store limit.
    fn prepare(&mut self, max_nodes: usize) {
        while self.levels.len() < max_nodes {
            let n = self.levels.len();
            let mut store = Some(Vec::new());
            let _ = self.visit_exact(n, &mut |d| {
                if let Some(v) = store.as_mut() {
                    if v.len() == STORE_LIMIT {
                        store = None;
                        return ControlFlow::Break(());
                    }
                    v.push(d.clone());
                }
                ControlFlow::Continue(())
            });
            self.levels.push(store);
        }
    }

    /// Visits every derivation with at most `max_nodes` nodes, smallest first.
    pub fn visit(
        &mut self,
        max_nodes: usize,
        f: &mut dyn FnMut(&Derivation) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        for n in 1..=max_nodes {
            self.prepare(n);
            self.visit_exact(n, f)?;
        }
        ControlFlow::Continue(())
    }

    pub fn count(&mut self, max_nodes: usize) -> usize {
        let mut k = 0;
        let _ = self.visit(max_nodes, &mut |_| {
            k += 1;
            ControlFlow::Continue(())
        });
        k
    }

    pub fn collect(&mut self, max_nodes: usize) -> Vec<Derivation> {
        let mut out = Vec::new();
        let _ = self.visit(max_nodes, &mut |d| {
            out.push(d.clone());
            ControlFlow::Continue(())
        });
        out
    }

    fn visit_exact(
        &self,
        n: usize,
        f: &mut dyn FnMut(&Derivation) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        if n == 0 {
            return ControlFlow::Continue(());
        }
        if let Some(Some(level)) = self.levels.get(n) {
            for d in level {
                f(d)?;
            }
            return ControlFlow::Continue(());
        }
        if n == 1 {
            return self.leaves(f);
        }
        self.visit_exact(n - 1, &mut |d| self.unary(d, f))?;
        for i in 1..n - 1 {
            let j = n - 1 - i;
            self.visit_exact(i, &mut |l| self.visit_exact(j, &mut |r| self.binary(l, r, f)))?;
        }
        ControlFlow::Continue(())
    }

    fn leaves(&self, f: &mut dyn FnMut(&Derivation) -> ControlFlow<()>) -> ControlFlow<()> {
        f(&Derivation::unit_r())?;
        for z in self.sig.zones() {
            for a in &self.universe {
                f(&Derivation::ax(ZonedFormula::new(z.clone(), a.clone())))?;
            }
        }
        ControlFlow::Continue(())
    }

    fn emit(
        &self,
        ctx: ZoneContext,
        succ: Formula,
        rule: RuleId,
        premises: Vec<Derivation>,
        f: &mut dyn FnMut(&Derivation) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        f(&Derivation::new(Sequent::new(ctx.sorted(), succ), rule, premises))
    }

    fn unary(
        &self,
        d: &Derivation,
        f: &mut dyn FnMut(&Derivation) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        let ctx = d.context();
        let succ = d.succedent();
        let items = ctx.items();

        let mut seen = BTreeSet::new();
        for (i, a) in items.iter().enumerate() {
            for (j, b) in items.iter().enumerate() {
                if i == j || a.zone != b.zone {
                    continue;
                }
                let t = Formula::tensor(a.formula.clone(), b.formula.clone());
                if t.tensor_depth() > self.max_nesting {
                    continue;
                }
                let item = ZonedFormula::new(a.zone.clone(), t);
                if !seen.insert(item.clone()) {
                    continue;
                }
                let rest = ctx.remove_one(a).and_then(|c| c.remove_one(b)).unwrap();
                self.emit(rest.with(item), succ.clone(), RuleId::TensorL, vec![d.clone()], f)?;
            }
        }

        for z in self.sig.zones() {
            let unit = ZonedFormula::new(z.clone(), Formula::Unit);
            self.emit(ctx.with(unit), succ.clone(), RuleId::UnitL, vec![d.clone()], f)?;
        }

        for z in self.sig.weakening() {
            for a in &self.universe {
                let item = ZonedFormula::new(z.clone(), a.clone());
                self.emit(ctx.with(item), succ.clone(), RuleId::Weaken(z.clone()), vec![d.clone()], f)?;
            }
        }

        let distinct: BTreeSet<&ZonedFormula> = items.iter().collect();
        for item in distinct {
            if self.sig.can_contract(&item.zone) && ctx.count(item) >= 2 {
                let rest = ctx.remove_one(item).unwrap();
                self.emit(rest, succ.clone(), RuleId::Contract(item.zone.clone()), vec![d.clone()], f)?;
            }
        }
        ControlFlow::Continue(())
    }

    fn binary(
        &self,
        l: &Derivation,
        r: &Derivation,
        f: &mut dyn FnMut(&Derivation) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        let t = Formula::tensor(l.succedent().clone(), r.succedent().clone());
        if t.tensor_depth() <= self.max_nesting {
            let ctx = l.context().concat(r.context());
            self.emit(ctx, t, RuleId::TensorR, vec![l.clone(), r.clone()], f)?;
        }
        let a = l.succedent();
        let zones: BTreeSet<_> = r
            .context()
            .iter()
            .filter(|item| &item.formula == a)
            .map(|item| item.zone.clone())
            .collect();
        for z in zones {
            let item = ZonedFormula::new(z.clone(), a.clone());
            let delta = r.context().remove_one(&item).unwrap();
            self.emit(
                l.context().concat(&delta),
                r.succedent().clone(),
                RuleId::Cut {
                    zone: z,
                    formula: a.clone(),
                },
                vec![l.clone(), r.clone()],
                f,
            )?;
        }
        ControlFlow::Continue(())
    }
}

/// Every valid derivation with at most `max_nodes` nodes over `atoms`, with
/// tensor nesting at most 2, in a fixed order.
pub fn enumerate_derivations(
    sig: &SubexpSignature,
    max_nodes: usize,
    atoms: &[&str],
) -> Vec<Derivation> {
    assert!(max_nodes >= 1, "max_nodes must be positive");
    Enumerator::new(sig, atoms).collect(max_nodes)
}

/// Lower bound on the number of derivations with at most `max_nodes` nodes:
/// axioms followed by chains of weakenings, each adding any formula.
pub fn weakening_chain_lower_bound(sig: &SubexpSignature, max_nodes: usize, universe: usize) -> f64 {
    let axioms = (sig.zones().len() * universe) as f64;
    let per_step = (sig.weakening().len() * universe) as f64;
    (0..max_nodes).map(|k| axioms * per_step.powi(k as i32)).sum()
}

/// Seeded random derivations over a fixed formula universe.
///
/// Cut left premises are built to prove a formula taken from the right
/// premise's context; with `guarded` they only use zones above the cut zone.
pub struct RandomDerivations<'s, R: Rng> {
    sig: &'s SubexpSignature,
    universe: Vec<Formula>,
    max_nesting: usize,
    guarded: bool,
    rng: R,
}

impl<'s, R: Rng> RandomDerivations<'s, R> {
    pub fn new(sig: &'s SubexpSignature, atoms: &[&str], guarded: bool, rng: R) -> Self {
        RandomDerivations {
            sig,
            universe: formula_universe(atoms, DEFAULT_NESTING),
            max_nesting: DEFAULT_NESTING,
            guarded,
            rng,
        }
    }

    fn all_zones(&self) -> Vec<Zone> {
        self.sig.zones().iter().cloned().collect()
    }

    /// A valid derivation with exactly `nodes` nodes.
    pub fn derivation(&mut self, nodes: usize) -> Derivation {
        assert!(nodes >= 1);
        let zones = self.all_zones();
        loop {
            if nodes == 1 {
                return self.leaf(&zones, None);
            }
            match self.rng.gen_range(0..3) {
                0 => {
                    let d = self.derivation(nodes - 1);
                    return self.unary(d, &zones);
                }
                1 => {
                    if nodes < 3 {
                        continue;
                    }
                    let i = self.rng.gen_range(1..nodes - 1);
                    let (l, r) = (self.derivation(i), self.derivation(nodes - 1 - i));
                    let t = Formula::tensor(l.succedent().clone(), r.succedent().clone());
                    if t.tensor_depth() <= self.max_nesting {
                        let ctx = l.context().concat(r.context()).sorted();
                        return Derivation::new(Sequent::new(ctx, t), RuleId::TensorR, vec![l, r]);
                    }
                }
                _ => {
                    if nodes < 3 {
                        continue;
                    }
                    let i = self.rng.gen_range(1..nodes - 1);
                    let r = self.derivation(nodes - 1 - i);
                    if r.context().is_empty() {
                        continue;
                    }
                    let k = self.rng.gen_range(0..r.context().len());
                    let item = r.context().items()[k].clone();
                    let allowed: Vec<Zone> = if self.guarded {
                        zones.iter().filter(|z| self.sig.leq(&item.zone, z)).cloned().collect()
                    } else {
                        zones.clone()
                    };
                    let l = self.proving(&item.formula, i, &allowed);
                    let delta = r.context().remove_one(&item).unwrap();
                    let ctx = l.context().concat(&delta).sorted();
                    let succ = r.succedent().clone();
                    return Derivation::new(
                        Sequent::new(ctx, succ),
                        RuleId::Cut {
                            zone: item.zone,
                            formula: item.formula,
                        },
                        vec![l, r],
                    );
                }
            }
        }
    }

    /// A cut-free derivation of `succ` with exactly `nodes` nodes whose
    /// context only uses `zones`.
    pub fn proving(&mut self, succ: &Formula, nodes: usize, zones: &[Zone]) -> Derivation {
        if nodes == 1 {
            return self.leaf(zones, Some(succ));
        }
        if let Formula::Tensor(a, b) = succ {
            if nodes >= 3 && self.rng.gen_bool(0.5) {
                let i = self.rng.gen_range(1..nodes - 1);
                let l = self.proving(a, i, zones);
                let r = self.proving(b, nodes - 1 - i, zones);
                let ctx = l.context().concat(r.context()).sorted();
                return Derivation::new(Sequent::new(ctx, succ.clone()), RuleId::TensorR, vec![l, r]);
            }
        }
        let d = self.proving(succ, nodes - 1, zones);
        self.unary(d, zones)
    }

    fn leaf(&mut self, zones: &[Zone], succ: Option<&Formula>) -> Derivation {
        let formula = match succ {
            Some(Formula::Unit) if self.rng.gen_bool(0.5) => return Derivation::unit_r(),
            Some(f) => f.clone(),
            None if self.rng.gen_range(0..self.universe.len() + 1) == 0 => {
                return Derivation::unit_r()
            }
            None => self.universe[self.rng.gen_range(0..self.universe.len())].clone(),
        };
        let z = zones[self.rng.gen_range(0..zones.len())].clone();
        Derivation::ax(ZonedFormula::new(z, formula))
    }

    /// Applies a random applicable left rule whose new formulas stay in `zones`.
    fn unary(&mut self, d: Derivation, zones: &[Zone]) -> Derivation {
        let ctx = d.context().clone();
        let succ = d.succedent().clone();
        let items = ctx.items();
        let mut options: Vec<(ZoneContext, RuleId)> = Vec::new();
        for (i, a) in items.iter().enumerate() {
            for (j, b) in items.iter().enumerate() {
                if i != j && a.zone == b.zone {
                    let t = Formula::tensor(a.formula.clone(), b.formula.clone());
                    if t.tensor_depth() <= self.max_nesting {
                        let rest = ctx.remove_one(a).and_then(|c| c.remove_one(b)).unwrap();
                        options.push((rest.with(ZonedFormula::new(a.zone.clone(), t)), RuleId::TensorL));
                    }
                }
            }
            if self.sig.can_contract(&a.zone) && ctx.count(a) >= 2 {
                options.push((ctx.remove_one(a).unwrap(), RuleId::Contract(a.zone.clone())));
            }
        }
        for z in zones {
            options.push((ctx.with(ZonedFormula::new(z.clone(), Formula::Unit)), RuleId::UnitL));
            if self.sig.can_weaken(z) {
                let f = self.universe[self.rng.gen_range(0..self.universe.len())].clone();
                options.push((ctx.with(ZonedFormula::new(z.clone(), f)), RuleId::Weaken(z.clone())));
            }
        }
        let (ctx, rule) = options.swap_remove(self.rng.gen_range(0..options.len()));
        Derivation::new(Sequent::new(ctx.sorted(), succ), rule, vec![d])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::check;
    use crate::signature::extract_signature;
    use crate::signature::fixtures::three_zone;
    use std::collections::HashSet;

    #[test]
    fn universe_sizes() {
        assert_eq!(formula_universe(&["X", "Y"], 2).len(), 147);
        assert_eq!(formula_universe(&["X"], 2).len(), 38);
        assert_eq!(formula_universe(&["X"], 0).len(), 2);
    }

    #[test]
    fn single_node_level_is_axioms_and_unit() {
        let sig = extract_signature(&three_zone()).unwrap();
        let all = enumerate_derivations(&sig, 1, &["X"]);
        assert_eq!(all.len(), 3 * 38 + 1);
        assert!(all.iter().all(|d| matches!(d.rule, RuleId::Ax | RuleId::UnitR)));
    }

    #[test]
    fn random_derivations_are_valid_with_exact_size() {
        use rand::SeedableRng;
        let sig = extract_signature(&three_zone()).unwrap();
        let rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut gen = RandomDerivations::new(&sig, &["X", "Y"], true, rng);
        for n in 1..=9 {
            for _ in 0..50 {
                let d = gen.derivation(n);
                assert_eq!(d.node_count(), n);
                assert!(check(&sig, &d).is_valid(), "{}", d.to_string_rules());
                assert!(crate::cut_elim::guard_violation(&sig, &d).is_none());
            }
        }
    }

    #[test]
    fn small_levels_are_valid_and_distinct() {
        let sig = extract_signature(&three_zone()).unwrap();
        let all = Enumerator::with_nesting(&sig, &["X"], 1).collect(3);
        let set: HashSet<_> = all.iter().collect();
        assert_eq!(set.len(), all.len());
        for d in &all {
            assert!(check(&sig, d).is_valid(), "{}", d.to_string_rules());
        }
    }
}
