//! Local cut reductions and the elimination driver.

use std::fmt;

use thiserror::Error;

use crate::calculus::{check, fmt_path, principal_left, Derivation, RuleId, Verdict};
use crate::signature::{SubexpSignature, Zone};
use crate::syntax::{Formula, Sequent, ZonedFormula};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CutMode {
    /// Cuts in any zone, no side condition on the left premise.
    PaperCut,
    /// Every left-premise zone `z'` of a cut in zone `z` satisfies `z ⪯ z'`.
    GuardedCut,
}

impl fmt::Display for CutMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CutMode::PaperCut => "paper",
            CutMode::GuardedCut => "guarded",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReductionKind {
    AxiomLeft,
    AxiomRight,
    PrincipalUnit,
    PrincipalTensor,
    EtaExpand,
    Weakening,
    Contraction,
    CommuteLeft,
    CommuteRight,
}

impl ReductionKind {
    pub fn is_principal(self) -> bool {
        matches!(
            self,
            ReductionKind::AxiomLeft
                | ReductionKind::AxiomRight
                | ReductionKind::PrincipalUnit
                | ReductionKind::PrincipalTensor
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReductionOutcome {
    Reduced {
        next: Derivation,
        kind: ReductionKind,
        path: Vec<usize>,
    },
    AlreadyCutFree,
    Stuck {
        path: Vec<usize>,
        reason: String,
        witness: Derivation,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CutElimError {
    #[error("input derivation is not valid: {0}")]
    NotValid(Verdict),
    #[error("cut at {} violates the guard: {left} in the left context is not above cut zone {cut}", fmt_path(.path))]
    GuardViolated { path: Vec<usize>, cut: Zone, left: Zone },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Elimination {
    CutFree {
        derivation: Derivation,
        steps: usize,
    },
    Stuck {
        path: Vec<usize>,
        reason: String,
        witness: Derivation,
        steps: usize,
    },
    FuelExhausted {
        partial: Derivation,
        steps: usize,
    },
}

impl Elimination {
    pub fn steps(&self) -> usize {
        match self {
            Elimination::CutFree { steps, .. }
            | Elimination::Stuck { steps, .. }
            | Elimination::FuelExhausted { steps, .. } => *steps,
        }
    }

    pub fn cut_free(&self) -> Option<&Derivation> {
        match self {
            Elimination::CutFree { derivation, .. } => Some(derivation),
            _ => None,
        }
    }
}

/// `(largest cut-formula size, number of cuts of that size)`; `(0, 0)` when cut-free.
pub fn cut_rank(d: &Derivation) -> (usize, usize) {
    let mut rank = (0, 0);
    d.walk(&mut |_, node| {
        if let RuleId::Cut { formula, .. } = &node.rule {
            let size = formula.size();
            if size > rank.0 {
                rank = (size, 1);
            } else if size == rank.0 {
                rank.1 += 1;
            }
        }
    });
    rank
}

/// First cut (in preorder) whose left premise has a zone not above the cut zone.
pub fn guard_violation(sig: &SubexpSignature, d: &Derivation) -> Option<CutElimError> {
    let mut found = None;
    d.walk(&mut |path, node| {
        if found.is_some() {
            return;
        }
        if let RuleId::Cut { zone, .. } = &node.rule {
            if let Some(left) = node.premises[0]
                .context()
                .zones()
                .find(|z2| !sig.leq(zone, z2))
            {
                found = Some(CutElimError::GuardViolated {
                    path: path.to_vec(),
                    cut: zone.clone(),
                    left: left.clone(),
                });
            }
        }
    });
    found
}

/// Topmost-leftmost cut: descend into the leftmost premise that still has a cut.
pub fn topmost_cut(d: &Derivation) -> Option<Vec<usize>> {
    if d.is_cut_free() {
        return None;
    }
    let mut path = Vec::new();
    let mut node = d;
    loop {
        match node.premises.iter().position(|p| !p.is_cut_free()) {
            Some(i) => {
                path.push(i);
                node = &node.premises[i];
            }
            None => return Some(path),
        }
    }
}

/// One reduction at the topmost-leftmost cut.
pub fn reduce_once(
    sig: &SubexpSignature,
    d: &Derivation,
    mode: CutMode,
) -> Result<ReductionOutcome, CutElimError> {
    let verdict = check(sig, d);
    if !verdict.is_valid() {
        return Err(CutElimError::NotValid(verdict));
    }
    if mode == CutMode::GuardedCut {
        if let Some(e) = guard_violation(sig, d) {
            return Err(e);
        }
    }
    Ok(step(sig, d))
}

fn step(sig: &SubexpSignature, d: &Derivation) -> ReductionOutcome {
    let Some(path) = topmost_cut(d) else {
        return ReductionOutcome::AlreadyCutFree;
    };
    let cut = d.at(&path).expect("path from topmost_cut");
    match reduce_cut(sig, cut) {
        Ok((mut replacement, kind)) => {
            replacement.conclusion = cut.conclusion.clone();
            let mut next = d.clone();
            next.replace_at(&path, replacement);
            ReductionOutcome::Reduced { next, kind, path }
        }
        Err(reason) => ReductionOutcome::Stuck {
            path,
            reason,
            witness: cut.clone(),
        },
    }
}

/// Runs reductions until no cut remains, a cut is stuck, or fuel runs out.
/// `fuel = None` means `10 · n²` for the input node count `n`.
pub fn eliminate(
    sig: &SubexpSignature,
    d: &Derivation,
    mode: CutMode,
    fuel: Option<usize>,
) -> Result<Elimination, CutElimError> {
    let verdict = check(sig, d);
    if !verdict.is_valid() {
        return Err(CutElimError::NotValid(verdict));
    }
    if mode == CutMode::GuardedCut {
        if let Some(e) = guard_violation(sig, d) {
            return Err(e);
        }
    }
    let fuel = fuel.unwrap_or_else(|| default_fuel(d));
    let mut current = d.clone();
    let mut steps = 0;
    loop {
        match step(sig, &current) {
            ReductionOutcome::AlreadyCutFree => {
                return Ok(Elimination::CutFree {
                    derivation: current,
                    steps,
                })
            }
            ReductionOutcome::Stuck {
                path,
                reason,
                witness,
            } => {
                return Ok(Elimination::Stuck {
                    path,
                    reason,
                    witness,
                    steps,
                })
            }
            ReductionOutcome::Reduced { next, .. } => {
                if steps == fuel {
                    return Ok(Elimination::FuelExhausted {
                        partial: current,
                        steps,
                    });
                }
                steps += 1;
                current = next;
            }
        }
    }
}

pub fn default_fuel(d: &Derivation) -> usize {
    let n = d.node_count();
    10 * n * n
}

// ---- builders that recompute conclusions ----

fn mk_cut(zone: &Zone, formula: &Formula, left: Derivation, right: Derivation) -> Derivation {
    let item = ZonedFormula::new(zone.clone(), formula.clone());
    let delta = right
        .context()
        .remove_one(&item)
        .expect("cut formula present in right premise");
    let conclusion = Sequent::new(left.context().concat(&delta), right.succedent().clone());
    Derivation::new(
        conclusion,
        RuleId::Cut {
            zone: zone.clone(),
            formula: formula.clone(),
        },
        vec![left, right],
    )
}

fn mk_weaken(item: ZonedFormula, d: Derivation) -> Derivation {
    let zone = item.zone.clone();
    let conclusion = Sequent::new(d.context().with(item), d.succedent().clone());
    Derivation::new(conclusion, RuleId::Weaken(zone), vec![d])
}

fn mk_contract(item: &ZonedFormula, d: Derivation) -> Derivation {
    let ctx = d.context().remove_one(item).expect("contracted item present");
    let conclusion = Sequent::new(ctx, d.succedent().clone());
    Derivation::new(conclusion, RuleId::Contract(item.zone.clone()), vec![d])
}

fn mk_tensor_l(item: &ZonedFormula, d: Derivation) -> Derivation {
    let Formula::Tensor(a, b) = &item.formula else {
        panic!("tl on non-tensor {item}");
    };
    let ctx = d
        .context()
        .remove_one(&ZonedFormula::new(item.zone.clone(), (**a).clone()))
        .and_then(|c| c.remove_one(&ZonedFormula::new(item.zone.clone(), (**b).clone())))
        .expect("tensor components present")
        .with(item.clone());
    let conclusion = Sequent::new(ctx, d.succedent().clone());
    Derivation::new(conclusion, RuleId::TensorL, vec![d])
}

fn mk_unit_l(item: ZonedFormula, d: Derivation) -> Derivation {
    let conclusion = Sequent::new(d.context().with(item), d.succedent().clone());
    Derivation::new(conclusion, RuleId::UnitL, vec![d])
}

fn mk_tensor_r(left: Derivation, right: Derivation) -> Derivation {
    let conclusion = Sequent::new(
        left.context().concat(right.context()),
        Formula::tensor(left.succedent().clone(), right.succedent().clone()),
    );
    Derivation::new(conclusion, RuleId::TensorR, vec![left, right])
}

/// Re-applies the last left rule of `template` on top of `d`.
fn reapply_left(template: &Derivation, d: Derivation) -> Derivation {
    let item = principal_left(template).expect("left rule has a principal formula");
    match template.rule {
        RuleId::TensorL => mk_tensor_l(&item, d),
        RuleId::UnitL => mk_unit_l(item, d),
        RuleId::Weaken(_) => mk_weaken(item, d),
        RuleId::Contract(_) => mk_contract(&item, d),
        _ => unreachable!("not a left rule"),
    }
}

fn is_left_rule(rule: &RuleId) -> bool {
    matches!(
        rule,
        RuleId::TensorL | RuleId::UnitL | RuleId::Weaken(_) | RuleId::Contract(_)
    )
}

/// Reduces the cut at the root of `cut`; both premises are cut-free.
fn reduce_cut(
    sig: &SubexpSignature,
    cut: &Derivation,
) -> Result<(Derivation, ReductionKind), String> {
    let RuleId::Cut { zone, formula } = &cut.rule else {
        unreachable!("reduce_cut on a non-cut node");
    };
    let left = &cut.premises[0];
    let right = &cut.premises[1];
    let item = ZonedFormula::new(zone.clone(), formula.clone());

    if left.rule == RuleId::Ax && left.context().items()[0] == item {
        return Ok((right.clone(), ReductionKind::AxiomLeft));
    }
    if right.rule == RuleId::Ax {
        return Ok((left.clone(), ReductionKind::AxiomRight));
    }

    let commute_left = || -> Option<(Derivation, ReductionKind)> {
        if !is_left_rule(&left.rule) {
            return None;
        }
        let inner = mk_cut(zone, formula, left.premises[0].clone(), right.clone());
        Some((reapply_left(left, inner), ReductionKind::CommuteLeft))
    };

    let principal = is_left_rule(&right.rule) && principal_left(right).as_ref() == Some(&item);
    if principal {
        let body = right.premises[0].clone();
        match &right.rule {
            RuleId::TensorL => {
                let Formula::Tensor(a, b) = formula else {
                    unreachable!()
                };
                if left.rule == RuleId::TensorR {
                    let inner = mk_cut(zone, a, left.premises[0].clone(), body);
                    let outer = mk_cut(zone, b, left.premises[1].clone(), inner);
                    return Ok((outer, ReductionKind::PrincipalTensor));
                }
                if left.rule == RuleId::Ax {
                    let z2 = left.context().items()[0].zone.clone();
                    let expanded = Derivation::new(
                        left.conclusion.clone(),
                        RuleId::TensorL,
                        vec![mk_tensor_r(
                            Derivation::ax(ZonedFormula::new(z2.clone(), (**a).clone())),
                            Derivation::ax(ZonedFormula::new(z2, (**b).clone())),
                        )],
                    );
                    return Ok((
                        mk_cut(zone, formula, expanded, right.clone()),
                        ReductionKind::EtaExpand,
                    ));
                }
                commute_left().ok_or_else(|| format!("no reduction for tl against {}", left.rule))
            }
            RuleId::UnitL => {
                if left.rule == RuleId::UnitR {
                    return Ok((body, ReductionKind::PrincipalUnit));
                }
                if left.rule == RuleId::Ax {
                    let z2 = left.context().items()[0].clone();
                    return Ok((mk_unit_l(z2, body), ReductionKind::AxiomLeft));
                }
                commute_left().ok_or_else(|| format!("no reduction for il against {}", left.rule))
            }
            RuleId::Weaken(_) => {
                if let Some(out) = commute_left() {
                    return Ok(out);
                }
                if let Some(z2) = left.context().zones().find(|z2| !sig.can_weaken(z2)) {
                    return Err(format!(
                        "weakening case requires all left-context zones weakenable; {z2}∉W"
                    ));
                }
                let mut out = body;
                for g in left.context().iter() {
                    out = mk_weaken(g.clone(), out);
                }
                Ok((out, ReductionKind::Weakening))
            }
            RuleId::Contract(_) => {
                if let Some(out) = commute_left() {
                    return Ok(out);
                }
                if let Some(z2) = left.context().zones().find(|z2| !sig.can_contract(z2)) {
                    return Err(format!(
                        "contraction case requires all left-context zones contractible; {z2}∉C"
                    ));
                }
                let inner = mk_cut(zone, formula, left.clone(), body);
                let mut out = mk_cut(zone, formula, left.clone(), inner);
                for g in left.context().iter() {
                    out = mk_contract(g, out);
                }
                Ok((out, ReductionKind::Contraction))
            }
            _ => unreachable!(),
        }
    } else {
        match &right.rule {
            RuleId::TensorR => {
                let (ra, rb) = (&right.premises[0], &right.premises[1]);
                let out = if ra.context().contains(&item) {
                    mk_tensor_r(mk_cut(zone, formula, left.clone(), ra.clone()), rb.clone())
                } else {
                    mk_tensor_r(ra.clone(), mk_cut(zone, formula, left.clone(), rb.clone()))
                };
                Ok((out, ReductionKind::CommuteRight))
            }
            r if is_left_rule(r) => {
                let inner = mk_cut(zone, formula, left.clone(), right.premises[0].clone());
                Ok((reapply_left(right, inner), ReductionKind::CommuteRight))
            }
            other => Err(format!("no reduction for cut against right rule {other}")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::extract_signature;
    use crate::signature::fixtures::{three_zone, z};
    use crate::syntax::{parse_formula, parse_sequent};

    fn sig() -> SubexpSignature {
        extract_signature(&three_zone()).unwrap()
    }

    fn node(s: &str, rule: RuleId, premises: Vec<Derivation>) -> Derivation {
        Derivation::new(parse_sequent(s).unwrap(), rule, premises)
    }

    fn cut(z_: &str, f: &str, s: &str, l: Derivation, r: Derivation) -> Derivation {
        node(
            s,
            RuleId::Cut {
                zone: z(z_),
                formula: parse_formula(f).unwrap(),
            },
            vec![l, r],
        )
    }

    fn gap_witness() -> Derivation {
        cut(
            "p",
            "X",
            "l:X |- I",
            node("l:X |- X", RuleId::Ax, vec![]),
            node("p:X |- I", RuleId::Weaken(z("p")), vec![Derivation::unit_r()]),
        )
    }

    #[test]
    fn rank_of_cut_free_and_single_cut() {
        assert_eq!(cut_rank(&Derivation::unit_r()), (0, 0));
        assert_eq!(cut_rank(&gap_witness()), (1, 1));
    }

    #[test]
    fn paper_cut_gap_is_stuck() {
        let d = gap_witness();
        assert!(check(&sig(), &d).is_valid());
        let out = reduce_once(&sig(), &d, CutMode::PaperCut).unwrap();
        let ReductionOutcome::Stuck { reason, witness, path } = out else {
            panic!("expected stuck, got {out:?}");
        };
        assert!(path.is_empty());
        assert_eq!(
            reason,
            "weakening case requires all left-context zones weakenable; l∉W"
        );
        assert!(check(&sig(), &witness).is_valid());
    }

    #[test]
    fn guard_rejects_gap_witness() {
        let err = reduce_once(&sig(), &gap_witness(), CutMode::GuardedCut).unwrap_err();
        assert!(matches!(err, CutElimError::GuardViolated { .. }));
    }

    #[test]
    fn principal_tensor_splits_into_two_cuts() {
        let left = node(
            "l:X, l:Y |- (X * Y)",
            RuleId::TensorR,
            vec![node("l:X |- X", RuleId::Ax, vec![]), node("l:Y |- Y", RuleId::Ax, vec![])],
        );
        let right = node(
            "l:(X * Y) |- (X * Y)",
            RuleId::TensorL,
            vec![node(
                "l:X, l:Y |- (X * Y)",
                RuleId::TensorR,
                vec![node("l:X |- X", RuleId::Ax, vec![]), node("l:Y |- Y", RuleId::Ax, vec![])],
            )],
        );
        let d = cut("l", "(X * Y)", "l:X, l:Y |- (X * Y)", left, right);
        let before = cut_rank(&d);
        let ReductionOutcome::Reduced { next, kind, .. } =
            reduce_once(&sig(), &d, CutMode::GuardedCut).unwrap()
        else {
            panic!()
        };
        assert_eq!(kind, ReductionKind::PrincipalTensor);
        assert_eq!(next.count_rules(&|r| r.is_cut()), 2);
        assert!(cut_rank(&next) < before);
        assert!(check(&sig(), &next).is_valid());
        let done = eliminate(&sig(), &d, CutMode::GuardedCut, None).unwrap();
        let out = done.cut_free().expect("cut-free");
        assert!(check(&sig(), out).is_valid());
        assert!(out.conclusion.equiv(&d.conclusion));
    }

    #[test]
    fn cut_free_input_is_unchanged() {
        let d = node("p:X |- I", RuleId::Weaken(z("p")), vec![Derivation::unit_r()]);
        assert_eq!(
            reduce_once(&sig(), &d, CutMode::PaperCut).unwrap(),
            ReductionOutcome::AlreadyCutFree
        );
        assert_eq!(
            eliminate(&sig(), &d, CutMode::PaperCut, None).unwrap(),
            Elimination::CutFree { derivation: d, steps: 0 }
        );
    }

    #[test]
    fn axiom_left_yields_right_premise() {
        let right = node("p:X |- I", RuleId::Weaken(z("p")), vec![Derivation::unit_r()]);
        let d = cut("p", "X", "p:X |- I", node("p:X |- X", RuleId::Ax, vec![]), right.clone());
        let ReductionOutcome::Reduced { next, kind, .. } =
            reduce_once(&sig(), &d, CutMode::PaperCut).unwrap()
        else {
            panic!()
        };
        assert_eq!(kind, ReductionKind::AxiomLeft);
        assert_eq!(next, right);
    }

    #[test]
    fn weakening_case_rebuilds_context() {
        let left = node(
            "p:Y, p:X |- X",
            RuleId::Weaken(z("p")),
            vec![node("p:X |- X", RuleId::Ax, vec![])],
        );
        let right = node("p:X |- I", RuleId::Weaken(z("p")), vec![Derivation::unit_r()]);
        let d = cut("p", "X", "p:Y, p:X |- I", left, right);
        let done = eliminate(&sig(), &d, CutMode::GuardedCut, None).unwrap();
        let out = done.cut_free().unwrap();
        assert!(check(&sig(), out).is_valid());
        assert_eq!(out.count_rules(&|r| matches!(r, RuleId::Weaken(_))), 2);
    }

    #[test]
    fn contraction_case_duplicates_left() {
        let left = node("r:X |- X", RuleId::Ax, vec![]);
        let right = node(
            "r:X |- (X * X)",
            RuleId::Contract(z("r")),
            vec![node(
                "r:X, r:X |- (X * X)",
                RuleId::TensorR,
                vec![node("r:X |- X", RuleId::Ax, vec![]), node("r:X |- X", RuleId::Ax, vec![])],
            )],
        );
        let pl = node(
            "p:X |- X",
            RuleId::Contract(z("p")),
            vec![node(
                "p:X, p:X |- X",
                RuleId::Weaken(z("p")),
                vec![node("p:X |- X", RuleId::Ax, vec![])],
            )],
        );
        // p ⪯ r fails in a discrete order, so use PaperCut where the guard is not needed
        let d = cut("r", "X", "p:X |- (X * X)", pl, right.clone());
        let done = eliminate(&sig(), &d, CutMode::PaperCut, None).unwrap();
        let out = done.cut_free().unwrap();
        assert!(check(&sig(), out).is_valid());
        let d = cut("r", "X", "r:X |- (X * X)", left, right);
        assert!(eliminate(&sig(), &d, CutMode::GuardedCut, None).unwrap().cut_free().is_some());
    }
}
