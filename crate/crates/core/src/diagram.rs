//! Diagram terms over interface blocks, licensed structural maps and
//! architectural blocks, and the compiler from derivations to terms.
//!
//! Objects are flat factor lists. Associators and unitors are identities on
//! flat lists; they are still emitted as generators so every rearrangement
//! step of a compiled term is visible.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::calculus::{check, principal_left, Derivation, RuleId, Verdict};
use crate::signature::{extract_signature, CtxSigEntry, DisciplineSpec, SignatureError, Zone};
use crate::syntax::{Formula, ZoneContext, ZonedFormula};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CarrierExpr {
    Atom(String),
    One,
    Prod(Box<CarrierExpr>, Box<CarrierExpr>),
}

impl CarrierExpr {
    pub fn atom(name: impl Into<String>) -> CarrierExpr {
        CarrierExpr::Atom(name.into())
    }

    pub fn prod(a: CarrierExpr, b: CarrierExpr) -> CarrierExpr {
        CarrierExpr::Prod(Box::new(a), Box::new(b))
    }
}

impl fmt::Display for CarrierExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CarrierExpr::Atom(a) => f.write_str(a),
            CarrierExpr::One => f.write_str("1"),
            CarrierExpr::Prod(a, b) => write!(f, "({a} x {b})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Factor {
    Z(Zone, CarrierExpr),
    Out(CarrierExpr),
}

impl Factor {
    pub fn carrier(&self) -> &CarrierExpr {
        match self {
            Factor::Z(_, c) | Factor::Out(c) => c,
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Factor::Z(z, c) => write!(f, "{z}:{c}"),
            Factor::Out(c) => write!(f, "o:{c}"),
        }
    }
}

/// Tensor of one-zone objects; empty is the unit object.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObjExpr(pub Vec<Factor>);

impl ObjExpr {
    pub fn unit() -> ObjExpr {
        ObjExpr(Vec::new())
    }

    pub fn factors(&self) -> &[Factor] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &ObjExpr) -> ObjExpr {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        ObjExpr(v)
    }
}

impl fmt::Display for ObjExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str("]")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DiagGen {
    /// `r_{z,A}: J_z(A) -> Out(A)`
    Readout(Zone, CarrierExpr),
    /// `ι_{z,A}: Out(A) -> J_z(A)`
    Input(Zone, CarrierExpr),
    /// `τ_{A,B}: Out(A) ⊗ Out(B) -> Out(A×B)`
    TensorOut(CarrierExpr, CarrierExpr),
    /// `μ_{z,A,B}: J_z(A×B) -> J_z(A) ⊗ J_z(B)`
    TensorDecomp(Zone, CarrierExpr, CarrierExpr),
    /// `η: ∅ -> Out(1)`
    UnitOut,
    /// `ν_z: J_z(1) -> ∅`
    UnitDiscard(Zone),
    Coerce(Zone, Zone, CarrierExpr),
    Discard(Zone, CarrierExpr),
    Diagonal(Zone, CarrierExpr),
    Block {
        name: String,
        dom: ObjExpr,
        cod: ObjExpr,
    },
    Assoc(ObjExpr),
    Unitor(ObjExpr),
    /// `cod[i] = dom[perm[i]]`
    Symmetry { dom: ObjExpr, perm: Vec<usize> },
}

impl DiagGen {
    /// Structural isomorphisms that only rewire.
    pub fn is_iso(&self) -> bool {
        matches!(
            self,
            DiagGen::Assoc(_) | DiagGen::Unitor(_) | DiagGen::Symmetry { .. }
        )
    }

    pub fn name(&self) -> &'static str {
        match self {
            DiagGen::Readout(..) => "readout",
            DiagGen::Input(..) => "input",
            DiagGen::TensorOut(..) => "tensor-out",
            DiagGen::TensorDecomp(..) => "tensor-decomp",
            DiagGen::UnitOut => "unit-out",
            DiagGen::UnitDiscard(_) => "unit-discard",
            DiagGen::Coerce(..) => "coerce",
            DiagGen::Discard(..) => "discard",
            DiagGen::Diagonal(..) => "diagonal",
            DiagGen::Block { .. } => "block",
            DiagGen::Assoc(_) => "assoc",
            DiagGen::Unitor(_) => "unitor",
            DiagGen::Symmetry { .. } => "symmetry",
        }
    }

    /// Domain and codomain; `Err` for a malformed permutation.
    pub fn typ(&self) -> Result<(ObjExpr, ObjExpr), String> {
        use CarrierExpr as C;
        use Factor::{Out, Z};
        let one = |f: Factor| ObjExpr(vec![f]);
        Ok(match self {
            DiagGen::Readout(z, a) => (one(Z(z.clone(), a.clone())), one(Out(a.clone()))),
            DiagGen::Input(z, a) => (one(Out(a.clone())), one(Z(z.clone(), a.clone()))),
            DiagGen::TensorOut(a, b) => (
                ObjExpr(vec![Out(a.clone()), Out(b.clone())]),
                one(Out(C::prod(a.clone(), b.clone()))),
            ),
            DiagGen::TensorDecomp(z, a, b) => (
                one(Z(z.clone(), C::prod(a.clone(), b.clone()))),
                ObjExpr(vec![Z(z.clone(), a.clone()), Z(z.clone(), b.clone())]),
            ),
            DiagGen::UnitOut => (ObjExpr::unit(), one(Out(C::One))),
            DiagGen::UnitDiscard(z) => (one(Z(z.clone(), C::One)), ObjExpr::unit()),
            DiagGen::Coerce(z, z2, a) => (one(Z(z.clone(), a.clone())), one(Z(z2.clone(), a.clone()))),
            DiagGen::Discard(z, a) => (one(Z(z.clone(), a.clone())), ObjExpr::unit()),
            DiagGen::Diagonal(z, a) => (
                one(Z(z.clone(), a.clone())),
                ObjExpr(vec![Z(z.clone(), a.clone()), Z(z.clone(), a.clone())]),
            ),
            DiagGen::Block { dom, cod, .. } => (dom.clone(), cod.clone()),
            DiagGen::Assoc(x) | DiagGen::Unitor(x) => (x.clone(), x.clone()),
            DiagGen::Symmetry { dom, perm } => {
                let mut seen = vec![false; dom.len()];
                if perm.len() != dom.len() {
                    return Err(format!(
                        "symmetry permutation has length {}, object has {} factors",
                        perm.len(),
                        dom.len()
                    ));
                }
                for &i in perm {
                    if i >= dom.len() || std::mem::replace(&mut seen[i], true) {
                        return Err(format!("{perm:?} is not a permutation"));
                    }
                }
                (dom.clone(), ObjExpr(perm.iter().map(|&i| dom.0[i].clone()).collect()))
            }
        })
    }
}

impl fmt::Display for DiagGen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiagGen::Readout(z, a) | DiagGen::Input(z, a) | DiagGen::Discard(z, a) | DiagGen::Diagonal(z, a) => {
                write!(f, "({} {z} {a})", self.name())
            }
            DiagGen::TensorOut(a, b) => write!(f, "(tensor-out {a} {b})"),
            DiagGen::TensorDecomp(z, a, b) => write!(f, "(tensor-decomp {z} {a} {b})"),
            DiagGen::UnitOut => f.write_str("(unit-out)"),
            DiagGen::UnitDiscard(z) => write!(f, "(unit-discard {z})"),
            DiagGen::Coerce(z, z2, a) => write!(f, "(coerce {z} {z2} {a})"),
            DiagGen::Block { name, dom, cod } => write!(f, "(block {name} {dom} {cod})"),
            DiagGen::Assoc(x) => write!(f, "(assoc {x})"),
            DiagGen::Unitor(x) => write!(f, "(unitor {x})"),
            DiagGen::Symmetry { dom, perm } => {
                write!(f, "(symmetry {dom} (perm")?;
                for i in perm {
                    write!(f, " {i}")?;
                }
                f.write_str("))")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DiagTerm {
    Gen(DiagGen),
    Id(ObjExpr),
    /// `after ∘ before`
    Comp(Box<DiagTerm>, Box<DiagTerm>),
    Tensor(Box<DiagTerm>, Box<DiagTerm>),
}

impl DiagTerm {
    pub fn comp(after: DiagTerm, before: DiagTerm) -> DiagTerm {
        DiagTerm::Comp(Box::new(after), Box::new(before))
    }

    pub fn tensor(left: DiagTerm, right: DiagTerm) -> DiagTerm {
        DiagTerm::Tensor(Box::new(left), Box::new(right))
    }

    pub fn gen(g: DiagGen) -> DiagTerm {
        DiagTerm::Gen(g)
    }

    /// Generators in left-to-right preorder.
    pub fn generators(&self) -> Vec<&DiagGen> {
        let mut out = Vec::new();
        fn go<'a>(t: &'a DiagTerm, out: &mut Vec<&'a DiagGen>) {
            match t {
                DiagTerm::Gen(g) => out.push(g),
                DiagTerm::Id(_) => {}
                DiagTerm::Comp(a, b) | DiagTerm::Tensor(a, b) => {
                    go(a, out);
                    go(b, out);
                }
            }
        }
        go(self, &mut out);
        out
    }

    pub fn count_gens(&self, pred: &dyn Fn(&DiagGen) -> bool) -> usize {
        self.generators().into_iter().filter(|g| pred(g)).count()
    }

    /// Nested S-expression mirroring the term.
    pub fn to_sexpr(&self) -> String {
        let mut s = String::new();
        self.write_sexpr(&mut s, 0);
        s
    }

    fn write_sexpr(&self, s: &mut String, indent: usize) {
        let pad = "  ".repeat(indent);
        match self {
            DiagTerm::Gen(g) => {
                let _ = write!(s, "{pad}(gen {g})");
            }
            DiagTerm::Id(x) => {
                let _ = write!(s, "{pad}(id {x})");
            }
            DiagTerm::Comp(a, b) | DiagTerm::Tensor(a, b) => {
                let head = if matches!(self, DiagTerm::Comp(..)) { "comp" } else { "tensor" };
                let _ = writeln!(s, "{pad}({head}");
                a.write_sexpr(s, indent + 1);
                s.push('\n');
                b.write_sexpr(s, indent + 1);
                s.push(')');
            }
        }
    }
}

impl fmt::Display for DiagTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiagTerm::Gen(g) => write!(f, "{g}"),
            DiagTerm::Id(x) => write!(f, "(id {x})"),
            DiagTerm::Comp(a, b) => write!(f, "(comp {a} {b})"),
            DiagTerm::Tensor(a, b) => write!(f, "(tensor {a} {b})"),
        }
    }
}

// ---- interpretation ----

/// Base assignment of carriers to atoms.
pub type Rho = BTreeMap<String, CarrierExpr>;

/// `X ↦ X` for each atom.
pub fn identity_rho<'a>(atoms: impl IntoIterator<Item = &'a str>) -> Rho {
    atoms
        .into_iter()
        .map(|a| (a.to_string(), CarrierExpr::atom(a)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("derivation is not valid: {0}")]
    NotValid(Verdict),
    #[error(transparent)]
    Discipline(#[from] SignatureError),
}

pub fn interpret_formula(rho: &Rho, a: &Formula) -> Result<CarrierExpr, CompileError> {
    Ok(match a {
        Formula::Atom(x) => rho
            .get(x)
            .cloned()
            .ok_or_else(|| CompileError::UnknownAtom(x.clone()))?,
        Formula::Unit => CarrierExpr::One,
        Formula::Tensor(a, b) => CarrierExpr::prod(interpret_formula(rho, a)?, interpret_formula(rho, b)?),
    })
}

pub fn interpret_item(rho: &Rho, item: &ZonedFormula) -> Result<Factor, CompileError> {
    Ok(Factor::Z(item.zone.clone(), interpret_formula(rho, &item.formula)?))
}

/// Factors in the context's serialization order.
pub fn interpret_context(rho: &Rho, ctx: &ZoneContext) -> Result<ObjExpr, CompileError> {
    ctx.iter().map(|i| interpret_item(rho, i)).collect::<Result<_, _>>().map(ObjExpr)
}

pub fn out_object(rho: &Rho, a: &Formula) -> Result<ObjExpr, CompileError> {
    Ok(ObjExpr(vec![Factor::Out(interpret_formula(rho, a)?)]))
}

/// Object for a declared block context signature; carrier names are atomic.
pub fn ctxsig_object(entries: &[CtxSigEntry]) -> ObjExpr {
    ObjExpr(
        entries
            .iter()
            .map(|e| {
                let c = CarrierExpr::atom(e.carrier.clone());
                if e.zone.is_output() {
                    Factor::Out(c)
                } else {
                    Factor::Z(e.zone.clone(), c)
                }
            })
            .collect(),
    )
}

/// The generator of a declared block.
pub fn block_gen(spec: &DisciplineSpec, name: &str) -> Option<DiagGen> {
    let decl = spec.block(name)?;
    Some(DiagGen::Block {
        name: decl.name.clone(),
        dom: ctxsig_object(&decl.dom),
        cod: ctxsig_object(&decl.cod),
    })
}

// ---- typing and licensing ----

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("type error at {}: {message}", crate::calculus::fmt_path(.path))]
pub struct TypeError {
    /// Child indices: 0 = `after`/left, 1 = `before`/right.
    pub path: Vec<usize>,
    pub message: String,
}

pub fn typecheck(t: &DiagTerm) -> Result<(ObjExpr, ObjExpr), TypeError> {
    fn go(t: &DiagTerm, path: &mut Vec<usize>) -> Result<(ObjExpr, ObjExpr), TypeError> {
        match t {
            DiagTerm::Gen(g) => g.typ().map_err(|message| TypeError {
                path: path.clone(),
                message,
            }),
            DiagTerm::Id(x) => Ok((x.clone(), x.clone())),
            DiagTerm::Comp(after, before) => {
                path.push(1);
                let (d, mid) = go(before, path)?;
                path.pop();
                path.push(0);
                let (mid2, c) = go(after, path)?;
                path.pop();
                if mid != mid2 {
                    return Err(TypeError {
                        path: path.clone(),
                        message: format!("codomain {mid} does not match domain {mid2}"),
                    });
                }
                Ok((d, c))
            }
            DiagTerm::Tensor(l, r) => {
                path.push(0);
                let (d1, c1) = go(l, path)?;
                path.pop();
                path.push(1);
                let (d2, c2) = go(r, path)?;
                path.pop();
                Ok((d1.concat(&d2), c1.concat(&c2)))
            }
        }
    }
    go(t, &mut Vec::new())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unlicensed generator {gen} at {}: {reason}", crate::calculus::fmt_path(.path))]
pub struct Unlicensed {
    pub gen: DiagGen,
    pub path: Vec<usize>,
    pub reason: String,
}

/// Every discard is in a weakening zone, every diagonal in a contraction
/// zone, every coercion goes up the preorder, every block is declared with
/// the types it is used at.
pub fn licensed_check(t: &DiagTerm, spec: &DisciplineSpec) -> Result<(), Unlicensed> {
    fn go(t: &DiagTerm, spec: &DisciplineSpec, path: &mut Vec<usize>) -> Result<(), Unlicensed> {
        match t {
            DiagTerm::Gen(g) => {
                let fail = |reason: String| {
                    Err(Unlicensed {
                        gen: g.clone(),
                        path: path.clone(),
                        reason,
                    })
                };
                match g {
                    DiagGen::Discard(z, _) if !spec.family.discard_zones.contains(z) => {
                        fail(format!("no discard in zone {z}"))
                    }
                    DiagGen::Diagonal(z, _) if !spec.family.diagonal_zones.contains(z) => {
                        fail(format!("no diagonal in zone {z}"))
                    }
                    DiagGen::Coerce(a, b, _) if !spec.preorder.leq(a, b) => {
                        fail(format!("{a} is not below {b}"))
                    }
                    DiagGen::Block { name, .. } => match block_gen(spec, name) {
                        None => fail(format!("block `{name}` is not declared")),
                        Some(decl) if &decl != g => {
                            fail(format!("block `{name}` used at types other than declared"))
                        }
                        Some(_) => Ok(()),
                    },
                    _ => Ok(()),
                }
            }
            DiagTerm::Id(_) => Ok(()),
            DiagTerm::Comp(a, b) | DiagTerm::Tensor(a, b) => {
                path.push(0);
                go(a, spec, path)?;
                path.pop();
                path.push(1);
                go(b, spec, path)?;
                path.pop();
                Ok(())
            }
        }
    }
    go(t, spec, &mut Vec::new())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WitnessKind {
    Discard,
    Diagonal,
    Coerce,
}

impl fmt::Display for WitnessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WitnessKind::Discard => "discard",
            WitnessKind::Diagonal => "diagonal",
            WitnessKind::Coerce => "coerce",
        })
    }
}

/// Every discard, diagonal and coercion in the term, sorted.
pub fn structural_witnesses(t: &DiagTerm) -> Vec<(WitnessKind, Zone)> {
    let mut out: Vec<_> = t
        .generators()
        .into_iter()
        .filter_map(|g| match g {
            DiagGen::Discard(z, _) => Some((WitnessKind::Discard, z.clone())),
            DiagGen::Diagonal(z, _) => Some((WitnessKind::Diagonal, z.clone())),
            DiagGen::Coerce(z, _, _) => Some((WitnessKind::Coerce, z.clone())),
            _ => None,
        })
        .collect();
    out.sort();
    out
}

// ---- compilation ----

/// Stable matching of `to` against `from`: the k-th copy of a factor in
/// `to` takes the k-th copy in `from`. `None` unless `to` permutes `from`.
pub fn permutation(from: &ObjExpr, to: &ObjExpr) -> Option<Vec<usize>> {
    if from.len() != to.len() {
        return None;
    }
    let mut used = vec![false; from.len()];
    to.0.iter()
        .map(|f| {
            let i = (0..from.len()).find(|&i| !used[i] && &from.0[i] == f)?;
            used[i] = true;
            Some(i)
        })
        .collect()
}

/// Symmetry from `from` to `to`, or nothing when they coincide.
fn rewire(from: &ObjExpr, to: &ObjExpr) -> Option<DiagTerm> {
    let perm = permutation(from, to).expect("rewire between permutations of one object");
    if perm.iter().enumerate().all(|(i, &p)| i == p) {
        None
    } else {
        Some(DiagTerm::gen(DiagGen::Symmetry {
            dom: from.clone(),
            perm,
        }))
    }
}

/// Composes `steps` first to last, dropping absent rewirings.
fn chain(steps: Vec<Option<DiagTerm>>) -> DiagTerm {
    let mut it = steps.into_iter().flatten();
    let first = it.next().expect("nonempty chain");
    it.fold(first, |acc, next| DiagTerm::comp(next, acc))
}

/// Interprets a valid derivation as a licensed diagram
/// `⟦Γ⟧ -> Out(A)`.
pub fn compile(spec: &DisciplineSpec, rho: &Rho, d: &Derivation) -> Result<DiagTerm, CompileError> {
    let sig = extract_signature(spec)?;
    let verdict = check(&sig, d);
    if !verdict.is_valid() {
        return Err(CompileError::NotValid(verdict));
    }
    compile_node(rho, d)
}

fn compile_node(rho: &Rho, d: &Derivation) -> Result<DiagTerm, CompileError> {
    let gamma = interpret_context(rho, d.context())?;
    Ok(match &d.rule {
        RuleId::Ax => {
            let item = &d.context().items()[0];
            DiagTerm::gen(DiagGen::Readout(item.zone.clone(), interpret_formula(rho, &item.formula)?))
        }
        RuleId::UnitR => DiagTerm::gen(DiagGen::UnitOut),
        RuleId::TensorR => {
            let (l, r) = (&d.premises[0], &d.premises[1]);
            let split = interpret_context(rho, l.context())?.concat(&interpret_context(rho, r.context())?);
            let body = DiagTerm::tensor(compile_node(rho, l)?, compile_node(rho, r)?);
            let tau = DiagTerm::gen(DiagGen::TensorOut(
                interpret_formula(rho, l.succedent())?,
                interpret_formula(rho, r.succedent())?,
            ));
            chain(vec![rewire(&gamma, &split), Some(body), Some(tau)])
        }
        RuleId::TensorL | RuleId::UnitL | RuleId::Weaken(_) | RuleId::Contract(_) => {
            let prem = &d.premises[0];
            let prem_obj = interpret_context(rho, prem.context())?;
            let item = principal_left(d).expect("left rule has a principal formula");
            let rest = d.context().remove_one(&item).expect("principal item in conclusion");
            let rest_obj = interpret_context(rho, &rest)?;
            let principal = interpret_item(rho, &item)?;
            let front = rest_obj.concat(&ObjExpr(vec![principal.clone()]));
            let carrier = principal.carrier().clone();
            let z = item.zone.clone();
            let (gen, after): (DiagGen, ObjExpr) = match &d.rule {
                RuleId::TensorL => {
                    let CarrierExpr::Prod(a, b) = carrier else {
                        unreachable!("tensor carrier")
                    };
                    let after = rest_obj.concat(&ObjExpr(vec![
                        Factor::Z(z.clone(), (*a).clone()),
                        Factor::Z(z.clone(), (*b).clone()),
                    ]));
                    (DiagGen::TensorDecomp(z, *a, *b), after)
                }
                RuleId::UnitL => (DiagGen::UnitDiscard(z), rest_obj.clone()),
                RuleId::Weaken(_) => (DiagGen::Discard(z, carrier), rest_obj.clone()),
                RuleId::Contract(_) => {
                    let after = front.concat(&ObjExpr(vec![principal.clone()]));
                    (DiagGen::Diagonal(z, carrier), after)
                }
                _ => unreachable!(),
            };
            let local = DiagTerm::tensor(DiagTerm::Id(rest_obj.clone()), DiagTerm::gen(gen));
            let unitor = match d.rule {
                RuleId::UnitL | RuleId::Weaken(_) => Some(DiagTerm::gen(DiagGen::Unitor(rest_obj.clone()))),
                _ => None,
            };
            chain(vec![
                rewire(&gamma, &front),
                Some(local),
                unitor,
                rewire(&after, &prem_obj),
                Some(compile_node(rho, prem)?),
            ])
        }
        RuleId::Cut { zone, formula } => {
            let (l, r) = (&d.premises[0], &d.premises[1]);
            let cut_item = ZonedFormula::new(zone.clone(), formula.clone());
            let delta = r.context().remove_one(&cut_item).expect("cut formula in right premise");
            let delta_obj = interpret_context(rho, &delta)?;
            let left_obj = interpret_context(rho, l.context())?;
            let carrier = interpret_formula(rho, formula)?;
            let out_a = ObjExpr(vec![Factor::Out(carrier.clone())]);
            let after_left = out_a.concat(&delta_obj);
            let swapped = delta_obj.concat(&out_a);
            let into_right = delta_obj.concat(&ObjExpr(vec![Factor::Z(zone.clone(), carrier.clone())]));
            let right_obj = interpret_context(rho, r.context())?;
            chain(vec![
                rewire(&gamma, &left_obj.concat(&delta_obj)),
                Some(DiagTerm::tensor(compile_node(rho, l)?, DiagTerm::Id(delta_obj.clone()))),
                rewire(&after_left, &swapped),
                Some(DiagTerm::tensor(
                    DiagTerm::Id(delta_obj.clone()),
                    DiagTerm::gen(DiagGen::Input(zone.clone(), carrier)),
                )),
                rewire(&into_right, &right_obj),
                Some(compile_node(rho, r)?),
            ])
        }
    })
}

// ---- block wiring ----

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WireError {
    #[error("no blocks to wire")]
    Empty,
    #[error("block `{0}` is not declared")]
    UnknownBlock(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Source {
    External(usize),
    Produced(usize, usize),
}

/// Sequential composite of declared blocks. Each block input is taken from
/// an earlier block's output when one matches, otherwise from an external
/// input; an external input in a diagonal zone is shared between consumers
/// through `δ`. Unconsumed wires are passed through to the codomain.
pub fn wire_blocks(spec: &DisciplineSpec, names: &[&str]) -> Result<DiagTerm, WireError> {
    if names.is_empty() {
        return Err(WireError::Empty);
    }
    let gens = names
        .iter()
        .map(|n| block_gen(spec, n).ok_or_else(|| WireError::UnknownBlock(n.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    let types: Vec<(ObjExpr, ObjExpr)> = gens.iter().map(|g| g.typ().expect("declared block")).collect();

    let mut externals: Vec<Factor> = Vec::new();
    let mut uses: Vec<usize> = Vec::new();
    let mut pool: Vec<(Source, Factor)> = Vec::new();
    let mut plan: Vec<Vec<Source>> = Vec::new();
    for (k, (dom, cod)) in types.iter().enumerate() {
        let mut slots = Vec::new();
        for f in &dom.0 {
            if let Some(i) = pool.iter().position(|(_, g)| g == f) {
                slots.push(pool.remove(i).0);
                continue;
            }
            let shared = match f {
                Factor::Z(z, _) if spec.family.diagonal_zones.contains(z) => externals.iter().position(|g| g == f),
                _ => None,
            };
            let e = shared.unwrap_or_else(|| {
                externals.push(f.clone());
                uses.push(0);
                externals.len() - 1
            });
            uses[e] += 1;
            slots.push(Source::External(e));
        }
        pool.extend(cod.0.iter().enumerate().map(|(s, f)| (Source::Produced(k, s), f.clone())));
        plan.push(slots);
    }

    let objs = |ws: &[(Source, Factor)]| ObjExpr(ws.iter().map(|(_, f)| f.clone()).collect());
    let mut wires: Vec<(Source, Factor)> = externals
        .iter()
        .enumerate()
        .map(|(e, f)| (Source::External(e), f.clone()))
        .collect();
    let mut steps: Vec<Option<DiagTerm>> = Vec::new();
    for (k, g) in gens.into_iter().enumerate() {
        let mut taken: Vec<usize> = Vec::new();
        for src in &plan[k] {
            let i = (0..wires.len())
                .find(|i| !taken.contains(i) && wires[*i].0 == *src)
                .expect("planned source is live");
            if let Source::External(e) = src {
                if uses[*e] > 1 {
                    uses[*e] -= 1;
                    let Factor::Z(z, c) = wires[i].1.clone() else {
                        unreachable!("shared inputs are zoned")
                    };
                    let mut t = DiagTerm::gen(DiagGen::Diagonal(z, c));
                    if i + 1 < wires.len() {
                        t = DiagTerm::tensor(t, DiagTerm::Id(objs(&wires[i + 1..])));
                    }
                    if i > 0 {
                        t = DiagTerm::tensor(DiagTerm::Id(objs(&wires[..i])), t);
                    }
                    steps.push(Some(t));
                    wires.insert(i + 1, wires[i].clone());
                    for j in taken.iter_mut().filter(|j| **j > i) {
                        *j += 1;
                    }
                }
            }
            taken.push(i);
        }
        let rest: Vec<(Source, Factor)> = (0..wires.len())
            .filter(|i| !taken.contains(i))
            .map(|i| wires[i].clone())
            .collect();
        let order: Vec<usize> = taken.iter().copied().chain((0..wires.len()).filter(|i| !taken.contains(i))).collect();
        if order.iter().enumerate().any(|(i, &p)| i != p) {
            steps.push(Some(DiagTerm::gen(DiagGen::Symmetry {
                dom: objs(&wires),
                perm: order,
            })));
        }
        let (_, cod) = types[k].clone();
        let block = DiagTerm::gen(g);
        steps.push(Some(if rest.is_empty() {
            block
        } else {
            DiagTerm::tensor(block, DiagTerm::Id(objs(&rest)))
        }));
        wires = cod
            .0
            .into_iter()
            .enumerate()
            .map(|(s, f)| (Source::Produced(k, s), f))
            .chain(rest)
            .collect();
    }
    Ok(chain(steps))
}

// ---- DOT export ----

#[derive(Clone)]
enum Port {
    Boundary(usize),
    Node(usize),
}

/// One node per non-iso generator (`g0`, `g1`, ... in evaluation order),
/// point nodes `in<i>` / `out<i>` for the boundary, one edge per wire.
pub fn export_dot(t: &DiagTerm) -> Result<String, TypeError> {
    let (dom, cod) = typecheck(t)?;
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    let inputs: Vec<(Port, Factor)> = dom
        .0
        .iter()
        .enumerate()
        .map(|(i, f)| (Port::Boundary(i), f.clone()))
        .collect();
    let outputs = dot_wire(t, inputs, &mut nodes, &mut edges);
    let mut s = String::from("digraph diagram {\n  rankdir=LR;\n");
    for i in 0..dom.len() {
        let _ = writeln!(s, "  in{i} [shape=point];");
    }
    for (i, label) in nodes.iter().enumerate() {
        let _ = writeln!(s, "  g{i} [shape=box, label=\"{label}\"];");
    }
    for i in 0..cod.len() {
        let _ = writeln!(s, "  out{i} [shape=point];");
    }
    let port_name = |p: &Port| match p {
        Port::Boundary(i) => format!("in{i}"),
        Port::Node(n) => format!("g{n}"),
    };
    for (from, to, factor) in &edges {
        let _ = writeln!(s, "  {} -> g{to} [label=\"{factor}\"];", port_name(from));
    }
    for (i, (p, factor)) in outputs.iter().enumerate() {
        let _ = writeln!(s, "  {} -> out{i} [label=\"{factor}\"];", port_name(p));
    }
    s.push_str("}\n");
    Ok(s)
}

fn dot_wire(
    t: &DiagTerm,
    inputs: Vec<(Port, Factor)>,
    nodes: &mut Vec<String>,
    edges: &mut Vec<(Port, usize, Factor)>,
) -> Vec<(Port, Factor)> {
    match t {
        DiagTerm::Id(_) => inputs,
        DiagTerm::Comp(after, before) => {
            let mid = dot_wire(before, inputs, nodes, edges);
            dot_wire(after, mid, nodes, edges)
        }
        DiagTerm::Tensor(l, r) => {
            let (ldom, _) = typecheck(l).expect("typechecked");
            let mut inputs = inputs;
            let rest = inputs.split_off(ldom.len());
            let mut out = dot_wire(l, inputs, nodes, edges);
            out.extend(dot_wire(r, rest, nodes, edges));
            out
        }
        DiagTerm::Gen(g) => match g {
            DiagGen::Assoc(_) | DiagGen::Unitor(_) => inputs,
            DiagGen::Symmetry { perm, .. } => perm.iter().map(|&i| inputs[i].clone()).collect(),
            _ => {
                let id = nodes.len();
                let label = match g {
                    DiagGen::Block { name, .. } => name.clone(),
                    other => other.to_string().replace('"', "'"),
                };
                nodes.push(label);
                for (p, f) in inputs {
                    edges.push((p, id, f));
                }
                let (_, cod) = g.typ().expect("typechecked");
                cod.0.into_iter().map(|f| (Port::Node(id), f)).collect()
            }
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::fixtures::{three_zone, z};
    use crate::syntax::parse_sequent;

    fn rho() -> Rho {
        identity_rho(["X", "Y"])
    }

    fn x() -> CarrierExpr {
        CarrierExpr::atom("X")
    }

    #[test]
    fn formula_interpretation() {
        assert_eq!(interpret_formula(&rho(), &Formula::Unit).unwrap(), CarrierExpr::One);
        let t = crate::syntax::parse_formula("(X * I)").unwrap();
        assert_eq!(
            interpret_formula(&rho(), &t).unwrap(),
            CarrierExpr::prod(x(), CarrierExpr::One)
        );
        assert_eq!(
            interpret_formula(&rho(), &Formula::atom("Z")),
            Err(CompileError::UnknownAtom("Z".into()))
        );
        assert!(interpret_context(&rho(), &ZoneContext::empty()).unwrap().is_empty());
    }

    #[test]
    fn readout_types() {
        let t = DiagTerm::gen(DiagGen::Readout(z("p"), x()));
        assert_eq!(
            typecheck(&t).unwrap(),
            (ObjExpr(vec![Factor::Z(z("p"), x())]), ObjExpr(vec![Factor::Out(x())]))
        );
        assert_eq!(typecheck(&DiagTerm::Id(ObjExpr::unit())).unwrap(), (ObjExpr::unit(), ObjExpr::unit()));
        let bad = DiagTerm::comp(DiagTerm::gen(DiagGen::UnitOut), t);
        assert_eq!(typecheck(&bad).unwrap_err().path, Vec::<usize>::new());
    }

    #[test]
    fn weakening_unit_compiles_to_expected_shape() {
        let d = Derivation::new(
            parse_sequent("p:X |- I").unwrap(),
            RuleId::Weaken(z("p")),
            vec![Derivation::unit_r()],
        );
        let t = compile(&three_zone(), &rho(), &d).unwrap();
        let expected = DiagTerm::comp(
            DiagTerm::gen(DiagGen::UnitOut),
            DiagTerm::comp(
                DiagTerm::gen(DiagGen::Unitor(ObjExpr::unit())),
                DiagTerm::tensor(
                    DiagTerm::Id(ObjExpr::unit()),
                    DiagTerm::gen(DiagGen::Discard(z("p"), x())),
                ),
            ),
        );
        assert_eq!(t, expected);
        assert!(licensed_check(&t, &three_zone()).is_ok());
        assert_eq!(structural_witnesses(&t), vec![(WitnessKind::Discard, z("p"))]);
        assert_eq!(
            typecheck(&t).unwrap(),
            (ObjExpr(vec![Factor::Z(z("p"), x())]), ObjExpr(vec![Factor::Out(CarrierExpr::One)]))
        );
    }

    #[test]
    fn discard_in_r_is_unlicensed() {
        let t = DiagTerm::gen(DiagGen::Discard(z("r"), x()));
        let err = licensed_check(&t, &three_zone()).unwrap_err();
        assert_eq!(err.reason, "no discard in zone r");
    }

    #[test]
    fn dot_counts() {
        let empty = export_dot(&DiagTerm::Id(ObjExpr::unit())).unwrap();
        assert!(!empty.contains("g0"));
        let r = export_dot(&DiagTerm::gen(DiagGen::Readout(z("p"), x()))).unwrap();
        assert!(r.contains("g0 [") && !r.contains("g1 ["));
        assert_eq!(r.matches("->").count(), 2);
    }

    #[test]
    fn permutation_is_stable() {
        let a = Factor::Z(z("p"), x());
        let b = Factor::Z(z("r"), x());
        let from = ObjExpr(vec![a.clone(), b.clone(), a.clone()]);
        let to = ObjExpr(vec![b, a.clone(), a]);
        assert_eq!(permutation(&from, &to), Some(vec![1, 0, 2]));
    }
}
