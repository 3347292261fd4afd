//! Bounded backward search for cut-free derivations.
//!
//! Goals are canonical sequents. The reachable goal graph is built
//! breadth-first up to the depth bound, then derivability is computed as a
//! least fixpoint, so every proof read back from the table is acyclic.
//! Proofs are eta-long: axioms are only used on atoms.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use crate::calculus::{Derivation, RuleId};
use crate::signature::SubexpSignature;
use crate::syntax::{Formula, Sequent, ZoneContext, ZonedFormula};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    /// Maximum derivation height.
    pub max_depth: usize,
    /// Maximum multiplicity a contraction may bring a zoned formula to.
    pub contraction_cap: usize,
}

impl SearchBudget {
    pub fn new(max_depth: usize, contraction_cap: usize) -> SearchBudget {
        assert!(max_depth > 0 && contraction_cap > 0, "budget must be positive");
        SearchBudget {
            max_depth,
            contraction_cap,
        }
    }

    /// Cap defaults to the total formula size of the goal.
    pub fn for_goal(goal: &Sequent, max_depth: usize) -> SearchBudget {
        SearchBudget::new(max_depth, default_cap(goal))
    }
}

pub fn default_cap(goal: &Sequent) -> usize {
    goal.size().max(1)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchResult {
    Found(Derivation),
    /// The goal graph was explored completely under the cap without a proof.
    Exhausted,
    /// Some goals were cut off by the depth bound.
    NotDerivableWithinBudget,
}

impl SearchResult {
    pub fn is_found(&self) -> bool {
        matches!(self, SearchResult::Found(_))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            SearchResult::Found(_) => 0,
            SearchResult::Exhausted => 1,
            SearchResult::NotDerivableWithinBudget => 2,
        }
    }
}

impl fmt::Display for SearchResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SearchResult::Found(_) => f.write_str("Found"),
            SearchResult::Exhausted => f.write_str("Exhausted"),
            SearchResult::NotDerivableWithinBudget => f.write_str("NotDerivableWithinBudget"),
        }
    }
}

#[derive(Debug, Clone)]
struct Expansion {
    goal: usize,
    rule: RuleId,
    premises: Vec<usize>,
}

struct Graph {
    goals: Vec<Sequent>,
    index: HashMap<Sequent, usize>,
    level: Vec<usize>,
    expansions: Vec<Expansion>,
    truncated: bool,
}

impl Graph {
    fn intern(&mut self, s: Sequent, level: usize, queue: &mut VecDeque<usize>) -> usize {
        if let Some(&id) = self.index.get(&s) {
            return id;
        }
        let id = self.goals.len();
        self.goals.push(s.clone());
        self.index.insert(s, id);
        self.level.push(level);
        queue.push_back(id);
        id
    }
}

fn canon(ctx: ZoneContext, succ: Formula) -> Sequent {
    Sequent::new(ctx, succ).canonical()
}

/// Backward rule instances for one goal: `(rule, premise sequents)`.
fn backward(sig: &SubexpSignature, goal: &Sequent, cap: usize) -> Vec<(RuleId, Vec<Sequent>)> {
    let ctx = &goal.antecedent;
    let succ = &goal.succedent;
    let mut out = Vec::new();
    // atomic axioms only; compound ones are recovered by eta-expansion
    if ctx.len() == 1 && &ctx.items()[0].formula == succ && matches!(succ, Formula::Atom(_)) {
        out.push((RuleId::Ax, vec![]));
    }
    if ctx.is_empty() && *succ == Formula::Unit {
        out.push((RuleId::UnitR, vec![]));
    }
    if let Formula::Tensor(a, b) = succ {
        let mut seen = BTreeSet::new();
        let items = ctx.items();
        for mask in 0u64..(1u64 << items.len()) {
            let (mut l, mut r) = (Vec::new(), Vec::new());
            for (i, item) in items.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    l.push(item.clone());
                } else {
                    r.push(item.clone());
                }
            }
            let pl = canon(ZoneContext::new(l), (**a).clone());
            let pr = canon(ZoneContext::new(r), (**b).clone());
            if seen.insert((pl.clone(), pr.clone())) {
                out.push((RuleId::TensorR, vec![pl, pr]));
            }
        }
    }
    let distinct: BTreeSet<&ZonedFormula> = ctx.iter().collect();
    for item in &distinct {
        let rest = ctx.remove_one(item).unwrap();
        match &item.formula {
            Formula::Tensor(a, b) => {
                let prem = rest
                    .with(ZonedFormula::new(item.zone.clone(), (**a).clone()))
                    .with(ZonedFormula::new(item.zone.clone(), (**b).clone()));
                out.push((RuleId::TensorL, vec![canon(prem, succ.clone())]));
            }
            Formula::Unit => out.push((RuleId::UnitL, vec![canon(rest.clone(), succ.clone())])),
            Formula::Atom(_) => {}
        }
        if sig.can_weaken(&item.zone) {
            out.push((
                RuleId::Weaken(item.zone.clone()),
                vec![canon(rest, succ.clone())],
            ));
        }
        if sig.can_contract(&item.zone) && ctx.count(item) < cap {
            out.push((
                RuleId::Contract(item.zone.clone()),
                vec![canon(ctx.with((*item).clone()), succ.clone())],
            ));
        }
    }
    out
}

/// Backward cut-free search; deterministic in its inputs.
pub fn search(sig: &SubexpSignature, goal: &Sequent, budget: SearchBudget) -> SearchResult {
    let mut g = Graph {
        goals: Vec::new(),
        index: HashMap::new(),
        level: Vec::new(),
        expansions: Vec::new(),
        truncated: false,
    };
    let mut queue = VecDeque::new();
    let root = g.intern(goal.canonical(), 1, &mut queue);
    while let Some(id) = queue.pop_front() {
        let level = g.level[id];
        let goal = g.goals[id].clone();
        for (rule, premises) in backward(sig, &goal, budget.contraction_cap) {
            if !premises.is_empty() && level >= budget.max_depth {
                g.truncated = true;
                continue;
            }
            let premises = premises
                .into_iter()
                .map(|p| g.intern(p, level + 1, &mut queue))
                .collect();
            g.expansions.push(Expansion {
                goal: id,
                rule,
                premises,
            });
        }
    }

    // least fixpoint with per-expansion counters of underived premises
    let n = g.goals.len();
    let mut proof: Vec<Option<usize>> = vec![None; n];
    let mut waiting: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut remaining: Vec<usize> = Vec::with_capacity(g.expansions.len());
    let mut ready = VecDeque::new();
    for (e, exp) in g.expansions.iter().enumerate() {
        let distinct: BTreeSet<usize> = exp.premises.iter().copied().collect();
        remaining.push(distinct.len());
        for p in distinct {
            waiting[p].push(e);
        }
        if exp.premises.is_empty() {
            ready.push_back(e);
        }
    }
    while let Some(e) = ready.pop_front() {
        let goal = g.expansions[e].goal;
        if proof[goal].is_some() {
            continue;
        }
        proof[goal] = Some(e);
        if goal == root {
            break;
        }
        for &e2 in &waiting[goal] {
            remaining[e2] -= 1;
            if remaining[e2] == 0 {
                ready.push_back(e2);
            }
        }
    }

    if proof[root].is_some() {
        let mut d = build(&g, &proof, root);
        d.conclusion = goal.clone();
        SearchResult::Found(d)
    } else if g.truncated {
        SearchResult::NotDerivableWithinBudget
    } else {
        SearchResult::Exhausted
    }
}

fn build(g: &Graph, proof: &[Option<usize>], id: usize) -> Derivation {
    let exp = &g.expansions[proof[id].expect("derived goal")];
    Derivation::new(
        g.goals[id].clone(),
        exp.rule.clone(),
        exp.premises.iter().map(|&p| build(g, proof, p)).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::check;
    use crate::signature::extract_signature;
    use crate::signature::fixtures::three_zone;
    use crate::syntax::parse_sequent;

    fn sig() -> SubexpSignature {
        extract_signature(&three_zone()).unwrap()
    }

    fn run(s: &str, depth: usize, cap: usize) -> SearchResult {
        search(&sig(), &parse_sequent(s).unwrap(), SearchBudget::new(depth, cap))
    }

    #[test]
    fn weakening_in_p_found() {
        let SearchResult::Found(d) = run("p:X |- I", 4, 2) else {
            panic!()
        };
        assert_eq!(d.to_string_rules(), "w.p(ir)");
        assert!(check(&sig(), &d).is_valid());
    }

    #[test]
    fn no_weakening_in_r() {
        assert_eq!(run("r:X |- I", 12, 3), SearchResult::Exhausted);
        assert_eq!(run("l:X |- I", 12, 3), SearchResult::Exhausted);
    }

    #[test]
    fn forced_tensor_decomposition() {
        for z in ["l", "p", "r"] {
            let SearchResult::Found(d) = run(&format!("{z}:(X * Y) |- (X * Y)"), 5, 2) else {
                panic!()
            };
            assert_eq!(d.to_string_rules(), "tl(tr(ax, ax))");
        }
    }

    #[test]
    fn contraction_needed() {
        let SearchResult::Found(d) = run("r:X |- (X * X)", 4, 2) else {
            panic!()
        };
        assert!(check(&sig(), &d).is_valid());
        assert_eq!(run("r:X |- (X * X)", 4, 1), SearchResult::Exhausted);
        assert_eq!(run("l:X |- (X * X)", 6, 3), SearchResult::Exhausted);
    }

    #[test]
    fn shallow_depth_is_not_exhaustive() {
        assert_eq!(
            run("p:X, p:Y |- I", 2, 2),
            SearchResult::NotDerivableWithinBudget
        );
        assert!(run("p:X, p:Y |- I", 3, 2).is_found());
    }

    #[test]
    fn default_cap_is_goal_size() {
        assert_eq!(default_cap(&parse_sequent("r:(X * Y) |- X").unwrap()), 4);
        assert_eq!(default_cap(&parse_sequent("|- I").unwrap()), 1);
    }
}
