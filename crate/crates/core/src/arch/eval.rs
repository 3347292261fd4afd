//! Bindings of carriers and blocks, and evaluation of diagram terms in
//! finite sets.

use std::collections::BTreeMap;
use std::fmt;

use super::block::{carrier, compose_blocks, identity_block, permutation_block, tensor_blocks, Block, TypedContext};
use super::finset::{FinMap, FinObj};
use super::ArchError;
use crate::diagram::{licensed_check, typecheck, CarrierExpr, DiagGen, DiagTerm, Factor, ObjExpr};
use crate::signature::{DisciplineSpec, Zone};

/// Structural maps used for discards, diagonals and coercions.
pub trait StructuralMaps {
    fn discard(&self, _z: &Zone, a: &FinObj) -> FinMap {
        FinMap::terminal(a)
    }

    fn diagonal(&self, _z: &Zone, a: &FinObj) -> FinMap {
        FinMap::diagonal(a)
    }

    fn coerce(&self, _from: &Zone, _to: &Zone, a: &FinObj) -> FinMap {
        FinMap::identity(a)
    }
}

/// `ω` terminal, `δ` diagonal, `χ` identity.
#[derive(Debug, Clone, Copy, Default)]
pub struct Cartesian;

impl StructuralMaps for Cartesian {}

/// Cartesian except `δ(x) = (x, x₀)`.
#[derive(Debug, Clone, Copy)]
pub struct MutatedDiagonal {
    pub fixed: usize,
}

impl StructuralMaps for MutatedDiagonal {
    fn diagonal(&self, _z: &Zone, a: &FinObj) -> FinMap {
        let x0 = self.fixed.min(a.size().saturating_sub(1));
        FinMap::from_fn(a, &FinObj::product(a, a), |x| a.pair(a, x, x0))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockDef {
    pub param: usize,
    pub table: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Binding {
    pub def: String,
    pub element: usize,
}

/// Carrier sizes for atoms and named objects, tabulated block definitions
/// and the binding of block generators to them.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Bindings {
    pub atoms: BTreeMap<String, usize>,
    pub objects: BTreeMap<String, usize>,
    pub blockdefs: BTreeMap<String, BlockDef>,
    pub binds: BTreeMap<String, Binding>,
}

impl Bindings {
    pub fn carrier_size(&self, name: &str) -> Option<usize> {
        self.objects.get(name).or_else(|| self.atoms.get(name)).copied()
    }

    pub fn carrier_obj(&self, c: &CarrierExpr) -> Result<FinObj, ArchError> {
        Ok(match c {
            CarrierExpr::Atom(n) => FinObj::sized(self.carrier_size(n).ok_or_else(|| ArchError::UnknownCarrier(n.clone()))?),
            CarrierExpr::One => FinObj::unit(),
            CarrierExpr::Prod(a, b) => FinObj::product(&self.carrier_obj(a)?, &self.carrier_obj(b)?),
        })
    }

    pub fn typed_context(&self, obj: &ObjExpr) -> Result<TypedContext, ArchError> {
        obj.factors()
            .iter()
            .map(|f| {
                let z = match f {
                    Factor::Z(z, _) => z.clone(),
                    Factor::Out(_) => Zone::output(),
                };
                Ok((z, self.carrier_obj(f.carrier())?))
            })
            .collect::<Result<_, _>>()
            .map(TypedContext::new)
    }

    /// The block bound to a generator, with its chosen parameter element.
    pub fn resolve(&self, name: &str, dom: &ObjExpr, cod: &ObjExpr) -> Result<(Block, usize), ArchError> {
        let bind = self.binds.get(name).ok_or_else(|| ArchError::UnboundGenerator(name.to_string()))?;
        let def = self
            .blockdefs
            .get(&bind.def)
            .ok_or_else(|| ArchError::UnboundGenerator(format!("{name} (blockdef {} missing)", bind.def)))?;
        if bind.element >= def.param {
            return Err(ArchError::UnboundParameter {
                block: name.to_string(),
                index: bind.element,
                size: def.param,
            });
        }
        let block = Block::from_table(
            FinObj::sized(def.param),
            self.typed_context(dom)?,
            self.typed_context(cod)?,
            def.table.clone(),
        )?;
        Ok((block, bind.element))
    }
}

/// Element of a carrier: atomic index, the unit, or a pair.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Elem {
    Atom(usize),
    Unit,
    Pair(Box<Elem>, Box<Elem>),
}

impl Elem {
    pub fn pair(a: Elem, b: Elem) -> Elem {
        Elem::Pair(Box::new(a), Box::new(b))
    }

    pub fn encode(&self, c: &CarrierExpr, b: &Bindings) -> Result<usize, ArchError> {
        match (self, c) {
            (Elem::Atom(i), CarrierExpr::Atom(n)) => {
                let size = b.carrier_size(n).ok_or_else(|| ArchError::UnknownCarrier(n.clone()))?;
                if *i < size {
                    Ok(*i)
                } else {
                    Err(ArchError::OutOfRange { value: *i, size })
                }
            }
            (Elem::Unit, CarrierExpr::One) => Ok(0),
            (Elem::Pair(x, y), CarrierExpr::Prod(l, r)) => {
                let (i, j) = (x.encode(l, b)?, y.encode(r, b)?);
                Ok(i * b.carrier_obj(r)?.size() + j)
            }
            _ => Err(ArchError::Input(format!("element {self} does not fit carrier {c}"))),
        }
    }

    pub fn decode(k: usize, c: &CarrierExpr, b: &Bindings) -> Result<Elem, ArchError> {
        Ok(match c {
            CarrierExpr::Atom(_) => Elem::Atom(k),
            CarrierExpr::One => Elem::Unit,
            CarrierExpr::Prod(l, r) => {
                let n = b.carrier_obj(r)?.size();
                Elem::pair(Elem::decode(k / n, l, b)?, Elem::decode(k % n, r, b)?)
            }
        })
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Elem::Atom(i) => write!(f, "{i}"),
            Elem::Unit => f.write_str("()"),
            Elem::Pair(a, b) => write!(f, "({a}, {b})"),
        }
    }
}

pub fn print_elems(xs: &[Elem]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

/// Parses `[e, ...]` where `e` is a number, `()` or `(e, e)`.
pub fn parse_elems(text: &str) -> Result<Vec<Elem>, ArchError> {
    let mut p = ElemParser { s: text.as_bytes(), i: 0 };
    p.expect(b'[')?;
    let mut out = Vec::new();
    if !p.eat(b']') {
        loop {
            out.push(p.elem()?);
            if p.eat(b']') {
                break;
            }
            p.expect(b',')?;
        }
    }
    p.skip_ws();
    if p.i != p.s.len() {
        return Err(p.err("trailing input"));
    }
    Ok(out)
}

struct ElemParser<'a> {
    s: &'a [u8],
    i: usize,
}

impl ElemParser<'_> {
    fn err(&self, msg: &str) -> ArchError {
        ArchError::Input(format!("{msg} at offset {}", self.i))
    }

    fn skip_ws(&mut self) {
        while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.s.get(self.i) == Some(&c) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ArchError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{}`", c as char)))
        }
    }

    fn elem(&mut self) -> Result<Elem, ArchError> {
        self.skip_ws();
        if self.eat(b'(') {
            if self.eat(b')') {
                return Ok(Elem::Unit);
            }
            let a = self.elem()?;
            self.expect(b',')?;
            let b = self.elem()?;
            self.expect(b')')?;
            return Ok(Elem::pair(a, b));
        }
        let start = self.i;
        while self.i < self.s.len() && self.s[self.i].is_ascii_digit() {
            self.i += 1;
        }
        std::str::from_utf8(&self.s[start..self.i])
            .unwrap()
            .parse()
            .map(Elem::Atom)
            .map_err(|_| self.err("expected element"))
    }
}

/// A diagram term with generators resolved to concrete maps.
enum Op {
    Id,
    Comp(Box<Op>, Box<Op>),
    Tensor(Box<Op>, usize, Box<Op>),
    /// One factor in, one factor out.
    Map(FinMap),
    /// One factor in, two out, through a map into a product.
    Split(FinMap, FinObj, FinObj),
    /// Two factors in, one out.
    Join(FinObj, FinObj),
    /// One factor in, none out.
    Drop,
    /// None in, the unit element out.
    Unit,
    Perm(Vec<usize>),
    Block { block: Block, element: usize },
}

/// A term prepared for repeated evaluation on per-factor element indices.
pub struct Evaluator {
    op: Op,
    dom: ObjExpr,
    cod: ObjExpr,
    bindings: Bindings,
}

impl Evaluator {
    /// Typechecks, checks licensing, resolves every block.
    pub fn new(spec: &DisciplineSpec, bindings: &Bindings, t: &DiagTerm) -> Result<Evaluator, ArchError> {
        Evaluator::with_maps(spec, bindings, t, &Cartesian)
    }

    pub fn with_maps(spec: &DisciplineSpec, bindings: &Bindings, t: &DiagTerm, maps: &dyn StructuralMaps) -> Result<Evaluator, ArchError> {
        let (dom, cod) = typecheck(t).map_err(|e| ArchError::Mismatch(e.to_string()))?;
        licensed_check(t, spec).map_err(|e| ArchError::Mismatch(e.to_string()))?;
        let op = prepare(t, bindings, maps)?;
        Ok(Evaluator {
            op,
            dom,
            cod,
            bindings: bindings.clone(),
        })
    }

    pub fn dom(&self) -> &ObjExpr {
        &self.dom
    }

    pub fn cod(&self) -> &ObjExpr {
        &self.cod
    }

    /// Carriers of the domain factors, for enumerating inputs.
    pub fn dom_context(&self) -> TypedContext {
        self.bindings.typed_context(&self.dom).expect("resolved at construction")
    }

    pub fn run(&self, input: &[usize]) -> Vec<usize> {
        assert_eq!(input.len(), self.dom.len(), "one element per domain factor");
        run(&self.op, input.to_vec())
    }

    pub fn run_elems(&self, input: &[Elem]) -> Result<Vec<Elem>, ArchError> {
        if input.len() != self.dom.len() {
            return Err(ArchError::Input(format!(
                "expected {} elements for {}, got {}",
                self.dom.len(),
                self.dom,
                input.len()
            )));
        }
        let idx = input
            .iter()
            .zip(self.dom.factors())
            .map(|(e, f)| e.encode(f.carrier(), &self.bindings))
            .collect::<Result<Vec<_>, _>>()?;
        self.run(&idx)
            .into_iter()
            .zip(self.cod.factors())
            .map(|(k, f)| Elem::decode(k, f.carrier(), &self.bindings))
            .collect()
    }
}

/// Evaluates `t` at one input under the cartesian structural maps.
pub fn eval_diagram(spec: &DisciplineSpec, bindings: &Bindings, t: &DiagTerm, input: &[Elem]) -> Result<Vec<Elem>, ArchError> {
    Evaluator::new(spec, bindings, t)?.run_elems(input)
}

fn prepare(t: &DiagTerm, b: &Bindings, maps: &dyn StructuralMaps) -> Result<Op, ArchError> {
    Ok(match t {
        DiagTerm::Id(_) => Op::Id,
        DiagTerm::Comp(after, before) => Op::Comp(Box::new(prepare(after, b, maps)?), Box::new(prepare(before, b, maps)?)),
        DiagTerm::Tensor(l, r) => {
            let n = typecheck(l).expect("typechecked").0.len();
            Op::Tensor(Box::new(prepare(l, b, maps)?), n, Box::new(prepare(r, b, maps)?))
        }
        DiagTerm::Gen(g) => match g {
            DiagGen::Readout(..) | DiagGen::Input(..) | DiagGen::Assoc(_) | DiagGen::Unitor(_) => Op::Id,
            DiagGen::TensorOut(x, y) => Op::Join(b.carrier_obj(x)?, b.carrier_obj(y)?),
            DiagGen::TensorDecomp(_, x, y) => {
                let (x, y) = (b.carrier_obj(x)?, b.carrier_obj(y)?);
                Op::Split(FinMap::identity(&FinObj::product(&x, &y)), x, y)
            }
            DiagGen::UnitOut => Op::Unit,
            DiagGen::UnitDiscard(_) => Op::Drop,
            DiagGen::Discard(..) => Op::Drop,
            DiagGen::Diagonal(z, c) => {
                let a = b.carrier_obj(c)?;
                Op::Split(maps.diagonal(z, &a), a.clone(), a)
            }
            DiagGen::Coerce(z, z2, c) => Op::Map(maps.coerce(z, z2, &b.carrier_obj(c)?)),
            DiagGen::Symmetry { perm, .. } => Op::Perm(perm.clone()),
            DiagGen::Block { name, dom, cod } => {
                let (block, element) = b.resolve(name, dom, cod)?;
                Op::Block { block, element }
            }
        },
    })
}

fn run(op: &Op, mut xs: Vec<usize>) -> Vec<usize> {
    match op {
        Op::Id => xs,
        Op::Comp(after, before) => run(after, run(before, xs)),
        Op::Tensor(l, n, r) => {
            let rest = xs.split_off(*n);
            let mut out = run(l, xs);
            out.extend(run(r, rest));
            out
        }
        Op::Map(f) => vec![f.apply(xs[0])],
        Op::Split(f, a, b) => {
            let (i, j) = a.unpair(b, f.apply(xs[0]));
            vec![i, j]
        }
        Op::Join(a, b) => vec![a.pair(b, xs[0], xs[1])],
        Op::Drop => Vec::new(),
        Op::Unit => vec![0],
        Op::Perm(p) => p.iter().map(|&i| xs[i]).collect(),
        Op::Block { block, element } => {
            let x = if block.dom.is_empty() { 0 } else { block.dom.index(&xs) };
            let y = block.apply(*element, x);
            if block.cod.is_empty() {
                Vec::new()
            } else {
                block.cod.coords(y)
            }
        }
    }
}

/// Builds the term as a single block by composing and tensoring blocks,
/// together with the parameter element selected by the bindings.
pub fn realize(t: &DiagTerm, b: &Bindings, maps: &dyn StructuralMaps) -> Result<(Block, usize), ArchError> {
    Ok(match t {
        DiagTerm::Id(x) => (identity_block(&b.typed_context(x)?), 0),
        DiagTerm::Comp(after, before) => {
            let (g, q) = realize(after, b, maps)?;
            let (f, p) = realize(before, b, maps)?;
            let gf = compose_blocks(&g, &f)?;
            let e = g.param.pair(&f.param, q, p);
            (gf, e)
        }
        DiagTerm::Tensor(l, r) => {
            let (f, p) = realize(l, b, maps)?;
            let (g, q) = realize(r, b, maps)?;
            let e = f.param.pair(&g.param, p, q);
            (tensor_blocks(&f, &g), e)
        }
        DiagTerm::Gen(g) => {
            let (dom, cod) = g.typ().map_err(ArchError::Mismatch)?;
            let (dctx, cctx) = (b.typed_context(&dom)?, b.typed_context(&cod)?);
            let lift = |f: FinMap| Block::lift(dctx.clone(), cctx.clone(), &f);
            let same = || FinMap::identity(&carrier(&dctx));
            match g {
                DiagGen::Block { name, dom, cod } => b.resolve(name, dom, cod)?,
                DiagGen::Symmetry { perm, .. } => (permutation_block(&dctx, perm), 0),
                DiagGen::Coerce(z, z2, c) => (lift(maps.coerce(z, z2, &b.carrier_obj(c)?))?, 0),
                DiagGen::Discard(z, c) => (lift(maps.discard(z, &b.carrier_obj(c)?))?, 0),
                DiagGen::Diagonal(z, c) => (lift(maps.diagonal(z, &b.carrier_obj(c)?))?, 0),
                DiagGen::Readout(_, c) | DiagGen::Input(_, c) => (lift(FinMap::identity(&b.carrier_obj(c)?))?, 0),
                DiagGen::UnitDiscard(_) => (lift(FinMap::terminal(&carrier(&dctx)))?, 0),
                DiagGen::TensorOut(..) | DiagGen::TensorDecomp(..) | DiagGen::UnitOut | DiagGen::Assoc(_) | DiagGen::Unitor(_) => {
                    (lift(same())?, 0)
                }
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::fixtures::{three_zone, z};

    fn bindings() -> Bindings {
        let mut b = Bindings::default();
        b.atoms.insert("X".into(), 2);
        b.atoms.insert("Y".into(), 3);
        b
    }

    #[test]
    fn elems_round_trip() {
        let xs = parse_elems("[1, (0, 1), ()]").unwrap();
        assert_eq!(print_elems(&xs), "[1, (0, 1), ()]");
        assert!(parse_elems("[1,").is_err());
        assert_eq!(parse_elems("[]").unwrap(), vec![]);
    }

    #[test]
    fn diagonal_and_identity() {
        let x = CarrierExpr::atom("X");
        let t = DiagTerm::gen(DiagGen::Diagonal(z("p"), x.clone()));
        let out = eval_diagram(&three_zone(), &bindings(), &t, &[Elem::Atom(1)]).unwrap();
        assert_eq!(out, vec![Elem::Atom(1), Elem::Atom(1)]);
        let id = DiagTerm::Id(ObjExpr(vec![Factor::Z(z("l"), CarrierExpr::prod(x.clone(), x))]));
        let e = Elem::pair(Elem::Atom(0), Elem::Atom(1));
        assert_eq!(eval_diagram(&three_zone(), &bindings(), &id, &[e.clone()]).unwrap(), vec![e]);
    }

    #[test]
    fn unlicensed_is_refused() {
        let t = DiagTerm::gen(DiagGen::Diagonal(z("l"), CarrierExpr::atom("X")));
        assert!(eval_diagram(&three_zone(), &bindings(), &t, &[Elem::Atom(0)]).is_err());
    }

    #[test]
    fn unbound_block() {
        let spec = three_zone();
        let t = DiagTerm::gen(DiagGen::Block {
            name: "f".into(),
            dom: ObjExpr::unit(),
            cod: ObjExpr::unit(),
        });
        let mut spec = spec;
        spec.blocks.push(crate::signature::BlockDecl {
            name: "f".into(),
            dom: vec![],
            cod: vec![],
        });
        assert!(matches!(
            Evaluator::new(&spec, &bindings(), &t),
            Err(ArchError::UnboundGenerator(_))
        ));
    }

    #[test]
    fn two_block_composite_matches_function_composition() {
        let spec = crate::files::parse_discipline(
            "zone p\nzone r\nzone l\ndiscard p\ndiagonal p\ndiagonal r\n\
             block f : p:M, r:R, l:X -> l:H\nblock g : l:H, p:M -> o:Y\n",
        )
        .unwrap();
        let t = crate::diagram::wire_blocks(&spec, &["f", "g"]).unwrap();
        assert_eq!(t.count_gens(&|g| matches!(g, DiagGen::Diagonal(..))), 1);
        let mut b = Bindings::default();
        for n in ["M", "R", "X", "H", "Y"] {
            b.objects.insert(n.into(), 2);
        }
        let f = vec![0, 1, 1, 0, 1, 1, 0, 0];
        let g = vec![1, 0, 0, 0];
        b.blockdefs.insert("F".into(), BlockDef { param: 1, table: f.clone() });
        b.blockdefs.insert("G".into(), BlockDef { param: 1, table: g.clone() });
        b.binds.insert("f".into(), Binding { def: "F".into(), element: 0 });
        b.binds.insert("g".into(), Binding { def: "G".into(), element: 0 });
        let ev = Evaluator::new(&spec, &b, &t).unwrap();
        let (block, e) = realize(&t, &b, &Cartesian).unwrap();
        for m in 0..2 {
            for r in 0..2 {
                for x in 0..2 {
                    let want = g[f[(m * 2 + r) * 2 + x] * 2 + m];
                    assert_eq!(ev.run(&[m, r, x]), vec![want]);
                    assert_eq!(block.apply(e, (m * 2 + r) * 2 + x), want);
                }
            }
        }
    }
}
