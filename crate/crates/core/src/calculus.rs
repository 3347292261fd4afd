//! The tensorial zone calculus: rule schemes, derivation trees and the checker.
//!
//! Derivations only record rule names and sequents. The checker matches each
//! node against its scheme existentially, comparing contexts as multisets,
//! so principal formulas never have to be pointed at by index. Cuts are the
//! exception: they carry the cut zone and formula.

use std::fmt;

use crate::signature::{SubexpSignature, Zone};
use crate::syntax::{Formula, Sequent, ZoneContext, ZonedFormula};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleId {
    Ax,
    UnitR,
    TensorR,
    TensorL,
    UnitL,
    Cut { zone: Zone, formula: Formula },
    Weaken(Zone),
    Contract(Zone),
}

impl RuleId {
    pub fn arity(&self) -> usize {
        match self {
            RuleId::Ax | RuleId::UnitR => 0,
            RuleId::TensorR | RuleId::Cut { .. } => 2,
            RuleId::TensorL | RuleId::UnitL | RuleId::Weaken(_) | RuleId::Contract(_) => 1,
        }
    }

    /// File token: `ax ir tr tl il cut w.<z> c.<z>`.
    pub fn token(&self) -> String {
        match self {
            RuleId::Ax => "ax".into(),
            RuleId::UnitR => "ir".into(),
            RuleId::TensorR => "tr".into(),
            RuleId::TensorL => "tl".into(),
            RuleId::UnitL => "il".into(),
            RuleId::Cut { .. } => "cut".into(),
            RuleId::Weaken(z) => format!("w.{z}"),
            RuleId::Contract(z) => format!("c.{z}"),
        }
    }

    pub fn is_cut(&self) -> bool {
        matches!(self, RuleId::Cut { .. })
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleId::Cut { zone, formula } => write!(f, "cut[{zone}:{formula}]"),
            other => f.write_str(&other.token()),
        }
    }
}

/// A rule scheme of `TZ_Σ`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleScheme {
    Ax,
    UnitR,
    TensorR,
    TensorL,
    UnitL,
    Cut,
    Weaken(Zone),
    Contract(Zone),
}

impl RuleScheme {
    pub fn token(&self) -> String {
        match self {
            RuleScheme::Ax => "ax".into(),
            RuleScheme::UnitR => "ir".into(),
            RuleScheme::TensorR => "tr".into(),
            RuleScheme::TensorL => "tl".into(),
            RuleScheme::UnitL => "il".into(),
            RuleScheme::Cut => "cut".into(),
            RuleScheme::Weaken(z) => format!("w.{z}"),
            RuleScheme::Contract(z) => format!("c.{z}"),
        }
    }

    /// Premises and conclusion in the concrete sequent syntax.
    pub fn schema(&self) -> String {
        match self {
            RuleScheme::Ax => "z:A |- A".into(),
            RuleScheme::UnitR => "|- I".into(),
            RuleScheme::TensorR => "G |- A   D |- B  /  G, D |- (A * B)".into(),
            RuleScheme::TensorL => "G, z:A, z:B |- C  /  G, z:(A * B) |- C".into(),
            RuleScheme::UnitL => "G |- C  /  G, z:I |- C".into(),
            RuleScheme::Cut => "G |- A   D, z:A |- B  /  G, D |- B".into(),
            RuleScheme::Weaken(z) => format!("G |- B  /  G, {z}:A |- B"),
            RuleScheme::Contract(z) => format!("G, {z}:A, {z}:A |- B  /  G, {z}:A |- B"),
        }
    }
}

impl fmt::Display for RuleScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:<6} {}", self.token(), self.schema())
    }
}

/// The six fixed schemes, then `w.z` / `c.z` for each licensed zone in id order.
pub fn rule_set(sig: &SubexpSignature) -> Vec<RuleScheme> {
    let mut rules = vec![
        RuleScheme::Ax,
        RuleScheme::UnitR,
        RuleScheme::TensorR,
        RuleScheme::TensorL,
        RuleScheme::UnitL,
        RuleScheme::Cut,
    ];
    for z in sig.zones() {
        if sig.can_weaken(z) {
            rules.push(RuleScheme::Weaken(z.clone()));
        }
        if sig.can_contract(z) {
            rules.push(RuleScheme::Contract(z.clone()));
        }
    }
    rules
}

/// One line per scheme.
pub fn rule_listing(sig: &SubexpSignature) -> String {
    rule_set(sig).iter().map(|r| format!("{r}\n")).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Derivation {
    pub conclusion: Sequent,
    pub rule: RuleId,
    pub premises: Vec<Derivation>,
}

impl Derivation {
    pub fn new(conclusion: Sequent, rule: RuleId, premises: Vec<Derivation>) -> Derivation {
        Derivation {
            conclusion,
            rule,
            premises,
        }
    }

    pub fn leaf(conclusion: Sequent, rule: RuleId) -> Derivation {
        Derivation::new(conclusion, rule, Vec::new())
    }

    pub fn ax(item: ZonedFormula) -> Derivation {
        let succ = item.formula.clone();
        Derivation::leaf(Sequent::new(ZoneContext::singleton(item), succ), RuleId::Ax)
    }

    pub fn unit_r() -> Derivation {
        Derivation::leaf(Sequent::new(ZoneContext::empty(), Formula::Unit), RuleId::UnitR)
    }

    pub fn node_count(&self) -> usize {
        1 + self.premises.iter().map(Derivation::node_count).sum::<usize>()
    }

    pub fn height(&self) -> usize {
        1 + self.premises.iter().map(Derivation::height).max().unwrap_or(0)
    }

    pub fn context(&self) -> &ZoneContext {
        &self.conclusion.antecedent
    }

    pub fn succedent(&self) -> &Formula {
        &self.conclusion.succedent
    }

    pub fn is_cut_free(&self) -> bool {
        !self.rule.is_cut() && self.premises.iter().all(Derivation::is_cut_free)
    }

    /// Number of nodes whose rule satisfies `pred`.
    pub fn count_rules(&self, pred: &dyn Fn(&RuleId) -> bool) -> usize {
        usize::from(pred(&self.rule))
            + self
                .premises
                .iter()
                .map(|p| p.count_rules(pred))
                .sum::<usize>()
    }

    pub fn at(&self, path: &[usize]) -> Option<&Derivation> {
        match path.split_first() {
            None => Some(self),
            Some((&i, rest)) => self.premises.get(i)?.at(rest),
        }
    }

    /// Replaces the subtree at `path`. Panics on a dangling path.
    pub fn replace_at(&mut self, path: &[usize], new: Derivation) {
        match path.split_first() {
            None => *self = new,
            Some((&i, rest)) => self.premises[i].replace_at(rest, new),
        }
    }

    /// Preorder walk with the path to each node.
    pub fn walk(&self, f: &mut dyn FnMut(&[usize], &Derivation)) {
        fn go(d: &Derivation, path: &mut Vec<usize>, f: &mut dyn FnMut(&[usize], &Derivation)) {
            f(path, d);
            for (i, p) in d.premises.iter().enumerate() {
                path.push(i);
                go(p, path, f);
                path.pop();
            }
        }
        go(self, &mut Vec::new(), f);
    }

    /// Rule skeleton such as `tl(tr(ax, ax))`.
    pub fn to_string_rules(&self) -> String {
        if self.premises.is_empty() {
            return self.rule.token();
        }
        let inner: Vec<String> = self.premises.iter().map(Derivation::to_string_rules).collect();
        format!("{}({})", self.rule.token(), inner.join(", "))
    }

    /// Copy whose every context is in canonical order.
    pub fn canonical(&self) -> Derivation {
        Derivation::new(
            self.conclusion.canonical(),
            self.rule.clone(),
            self.premises.iter().map(Derivation::canonical).collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    Invalid { path: Vec<usize>, reason: String },
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Valid => f.write_str("Valid"),
            Verdict::Invalid { path, reason } => {
                write!(f, "Invalid at {}: {reason}", fmt_path(path))
            }
        }
    }
}

pub fn fmt_path(path: &[usize]) -> String {
    if path.is_empty() {
        return "root".into();
    }
    let parts: Vec<String> = path.iter().map(|i| i.to_string()).collect();
    format!("root/{}", parts.join("/"))
}

/// Validates every node, reporting the first failure in preorder.
pub fn check(sig: &SubexpSignature, d: &Derivation) -> Verdict {
    let mut path = Vec::new();
    match check_rec(sig, d, &mut path) {
        Ok(()) => Verdict::Valid,
        Err(reason) => Verdict::Invalid { path, reason },
    }
}

fn check_rec(sig: &SubexpSignature, d: &Derivation, path: &mut Vec<usize>) -> Result<(), String> {
    check_node(sig, d)?;
    for (i, p) in d.premises.iter().enumerate() {
        path.push(i);
        check_rec(sig, p, path)?;
        path.pop();
    }
    Ok(())
}

/// Whether a single node instantiates its scheme, assuming nothing about
/// its premises beyond their end-sequents.
pub fn check_node(sig: &SubexpSignature, d: &Derivation) -> Result<(), String> {
    let rule = &d.rule;
    if d.premises.len() != rule.arity() {
        return Err(format!(
            "{} expects {} premise(s), found {}",
            rule.token(),
            rule.arity(),
            d.premises.len()
        ));
    }
    if let Some(z) = d.context().zones().find(|z| !sig.has_zone(z)) {
        return Err(format!("unknown zone {z}"));
    }
    let concl = &d.conclusion;
    let ctx = &concl.antecedent;
    let succ = &concl.succedent;
    match rule {
        RuleId::Ax => match ctx.items() {
            [item] if &item.formula == succ => Ok(()),
            _ => Err(format!("ax: `{concl}` is not of the form z:A |- A")),
        },
        RuleId::UnitR => {
            if ctx.is_empty() && *succ == Formula::Unit {
                Ok(())
            } else {
                Err(format!("ir: `{concl}` is not |- I"))
            }
        }
        RuleId::TensorR => {
            let (left, right) = (&d.premises[0], &d.premises[1]);
            let Formula::Tensor(a, b) = succ else {
                return Err(format!("tr: succedent {succ} is not a tensor"));
            };
            if **a != *left.succedent() || **b != *right.succedent() {
                return Err(format!(
                    "tr: premise succedents {} and {} do not build {succ}",
                    left.succedent(),
                    right.succedent()
                ));
            }
            if !ctx.multiset_eq(&left.context().concat(right.context())) {
                return Err("tr: conclusion context is not the union of the premise contexts".into());
            }
            Ok(())
        }
        RuleId::TensorL => {
            let prem = &d.premises[0];
            same_succedent("tl", succ, prem)?;
            let found = ctx.iter().any(|item| match &item.formula {
                Formula::Tensor(a, b) => {
                    let rest = ctx.remove_one(item).unwrap();
                    let expected = rest
                        .with(ZonedFormula::new(item.zone.clone(), (**a).clone()))
                        .with(ZonedFormula::new(item.zone.clone(), (**b).clone()));
                    expected.multiset_eq(prem.context())
                }
                _ => false,
            });
            if found {
                Ok(())
            } else {
                Err("tl: no tensor in the conclusion context decomposes into the premise context".into())
            }
        }
        RuleId::UnitL => {
            let prem = &d.premises[0];
            same_succedent("il", succ, prem)?;
            let found = ctx.iter().any(|item| {
                item.formula == Formula::Unit
                    && ctx.remove_one(item).unwrap().multiset_eq(prem.context())
            });
            if found {
                Ok(())
            } else {
                Err("il: conclusion is not the premise plus one z:I".into())
            }
        }
        RuleId::Weaken(z) => {
            if !sig.can_weaken(z) {
                return Err(format!("weakening not licensed in zone {z}"));
            }
            let prem = &d.premises[0];
            same_succedent(&rule.token(), succ, prem)?;
            match single_extra(ctx, prem.context()) {
                Some(item) if &item.zone == z => Ok(()),
                _ => Err(format!(
                    "{}: conclusion is not the premise plus one formula in zone {z}",
                    rule.token()
                )),
            }
        }
        RuleId::Contract(z) => {
            if !sig.can_contract(z) {
                return Err(format!("contraction not licensed in zone {z}"));
            }
            let prem = &d.premises[0];
            same_succedent(&rule.token(), succ, prem)?;
            match single_extra(prem.context(), ctx) {
                Some(item) if &item.zone == z && ctx.contains(&item) => Ok(()),
                _ => Err(format!(
                    "{}: premise is not the conclusion plus a second copy of a formula in zone {z}",
                    rule.token()
                )),
            }
        }
        RuleId::Cut { zone, formula } => {
            if !sig.has_zone(zone) {
                return Err(format!("unknown zone {zone}"));
            }
            let (left, right) = (&d.premises[0], &d.premises[1]);
            if left.succedent() != formula {
                return Err(format!(
                    "cut: left premise proves {}, not the cut formula {formula}",
                    left.succedent()
                ));
            }
            let cut_item = ZonedFormula::new(zone.clone(), formula.clone());
            let Some(delta) = right.context().remove_one(&cut_item) else {
                return Err(format!("cut: right premise has no {cut_item} to cut"));
            };
            if !ctx.multiset_eq(&left.context().concat(&delta)) {
                return Err("cut: conclusion context is not G, D".into());
            }
            if right.succedent() != succ {
                return Err(format!(
                    "cut: right premise proves {}, conclusion claims {succ}",
                    right.succedent()
                ));
            }
            Ok(())
        }
    }
}

fn same_succedent(rule: &str, succ: &Formula, prem: &Derivation) -> Result<(), String> {
    if prem.succedent() == succ {
        Ok(())
    } else {
        Err(format!(
            "{rule}: succedent changed from {} to {succ}",
            prem.succedent()
        ))
    }
}

/// The single item `bigger` has beyond `smaller`, provided `smaller` is
/// included in `bigger` and they differ by exactly one item.
fn single_extra(bigger: &ZoneContext, smaller: &ZoneContext) -> Option<ZonedFormula> {
    if !smaller.excess_over(bigger).is_empty() {
        return None;
    }
    match bigger.excess_over(smaller).into_items().as_slice() {
        [item] => Some(item.clone()),
        _ => None,
    }
}

/// The formula a left rule acts on: the decomposed tensor for `tl`, the
/// removed unit for `il`, the added formula for `w.z`, the duplicated one
/// for `c.z`. `None` for right rules, axioms and cuts.
pub fn principal_left(d: &Derivation) -> Option<ZonedFormula> {
    let prem = d.premises.first()?;
    match d.rule {
        RuleId::TensorL | RuleId::UnitL | RuleId::Weaken(_) => {
            single_extra(d.context(), prem.context()).or_else(|| {
                // tl: one tensor replaced by two components
                let extra = d.context().excess_over(prem.context());
                extra.items().first().cloned()
            })
        }
        RuleId::Contract(_) => single_extra(prem.context(), d.context()),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FragmentViolation {
    pub path: Vec<usize>,
    pub reason: String,
}

impl fmt::Display for FragmentViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "outside the tensorial fragment at {}: {}", fmt_path(&self.path), self.reason)
    }
}

/// Every node uses a calculus rule with the right number of premises.
/// Formulas are tensorial by construction of [`Formula`]; imported files are
/// screened for foreign connectives and rule tokens when they are parsed.
pub fn fragment_closure_check(d: &Derivation) -> Result<(), FragmentViolation> {
    let mut violation = None;
    d.walk(&mut |path, node| {
        if violation.is_none() && node.premises.len() != node.rule.arity() {
            violation = Some(FragmentViolation {
                path: path.to_vec(),
                reason: format!(
                    "rule {} with {} premise(s)",
                    node.rule.token(),
                    node.premises.len()
                ),
            });
        }
    });
    match violation {
        Some(v) => Err(v),
        None => Ok(()),
    }
}
