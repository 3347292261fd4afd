//! Typed contexts and parametrised blocks `(P, φ: P × ⟦Γ⟧ -> ⟦Δ⟧)`.

use std::fmt;

use super::finset::{permutations, FinMap, FinObj};
use super::ArchError;
use crate::signature::Zone;

pub const MAX_EQUIV_PARAM: usize = 4;

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TypedContext {
    pub entries: Vec<(Zone, FinObj)>,
}

impl TypedContext {
    pub fn new(entries: Vec<(Zone, FinObj)>) -> TypedContext {
        TypedContext { entries }
    }

    pub fn empty() -> TypedContext {
        TypedContext::default()
    }

    pub fn single(zone: Zone, obj: FinObj) -> TypedContext {
        TypedContext::new(vec![(zone, obj)])
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn concat(&self, other: &TypedContext) -> TypedContext {
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().cloned());
        TypedContext { entries }
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.entries.iter().map(|(_, o)| o.size()).collect()
    }

    /// Coordinates of a carrier element, one per entry.
    pub fn coords(&self, mut k: usize) -> Vec<usize> {
        let mut out = vec![0; self.len()];
        for (slot, (_, o)) in out.iter_mut().zip(&self.entries).rev() {
            *slot = k % o.size();
            k /= o.size();
        }
        out
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        coords
            .iter()
            .zip(&self.entries)
            .fold(0, |acc, (&c, (_, o))| acc * o.size() + c)
    }

    /// Reorders entries: result entry `i` is entry `perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> TypedContext {
        TypedContext::new(perm.iter().map(|&i| self.entries[i].clone()).collect())
    }
}

impl fmt::Display for TypedContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, (z, o)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{z}:{}", o.size())?;
        }
        f.write_str("]")
    }
}

/// Left-nested product of the entry objects; the unit for the empty context.
pub fn carrier(ctx: &TypedContext) -> FinObj {
    let mut it = ctx.entries.iter();
    match it.next() {
        None => FinObj::unit(),
        Some((_, first)) => it.fold(first.clone(), |acc, (_, o)| FinObj::product(&acc, o)),
    }
}

/// `(μ, ν)` with `μ: ⟦Γ,Δ⟧ -> ⟦Γ⟧ × ⟦Δ⟧` and `ν` its inverse, computed
/// through entry coordinates.
pub fn carrier_tensor_iso(g: &TypedContext, d: &TypedContext) -> (FinMap, FinMap) {
    let gd = g.concat(d);
    let (cg, cd) = (carrier(g), carrier(d));
    let prod = FinObj::product(&cg, &cd);
    let split = |k: usize| -> (usize, usize) {
        if gd.is_empty() {
            return (0, 0);
        }
        let c = gd.coords(k);
        let (left, right) = c.split_at(g.len());
        let i = if g.is_empty() { 0 } else { g.index(left) };
        let j = if d.is_empty() { 0 } else { d.index(right) };
        (i, j)
    };
    let mu = FinMap::from_fn(&carrier(&gd), &prod, |k| {
        let (i, j) = split(k);
        cg.pair(&cd, i, j)
    });
    let nu = FinMap::from_fn(&prod, &carrier(&gd), |k| {
        let (i, j) = cg.unpair(&cd, k);
        let mut c = if g.is_empty() { Vec::new() } else { g.coords(i) };
        if !d.is_empty() {
            c.extend(d.coords(j));
        }
        if gd.is_empty() {
            0
        } else {
            gd.index(&c)
        }
    });
    (mu, nu)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Block {
    pub param: FinObj,
    pub dom: TypedContext,
    pub cod: TypedContext,
    /// `P × ⟦dom⟧ -> ⟦cod⟧`
    pub map: FinMap,
}

impl Block {
    pub fn new(param: FinObj, dom: TypedContext, cod: TypedContext, map: FinMap) -> Result<Block, ArchError> {
        let expected_dom = FinObj::product(&param, &carrier(&dom));
        if map.dom() != &expected_dom || map.cod() != &carrier(&cod) {
            return Err(ArchError::Mismatch(format!(
                "block table is not P x {dom} -> {cod}"
            )));
        }
        Ok(Block { param, dom, cod, map })
    }

    /// Block from a table over `P × ⟦dom⟧` in row-major order.
    pub fn from_table(param: FinObj, dom: TypedContext, cod: TypedContext, table: Vec<usize>) -> Result<Block, ArchError> {
        let map = FinMap::new(FinObj::product(&param, &carrier(&dom)), carrier(&cod), table)?;
        Block::new(param, dom, cod, map)
    }

    /// Parameter-free block `(1, f ∘ π₂)`.
    pub fn lift(dom: TypedContext, cod: TypedContext, f: &FinMap) -> Result<Block, ArchError> {
        let unit = FinObj::unit();
        let map = f.after(&FinMap::left_unitor(&carrier(&dom)))?;
        Block::new(unit, dom, cod, map)
    }

    pub fn apply(&self, p: usize, x: usize) -> usize {
        self.map.apply(self.param.pair(&carrier(&self.dom), p, x))
    }
}

/// `J_z(f) = (1, f ∘ π₂): ⟨z, A⟩ -> ⟨z, B⟩`.
pub fn one_zone(z: &Zone, f: &FinMap) -> Block {
    Block::lift(
        TypedContext::single(z.clone(), f.dom().clone()),
        TypedContext::single(z.clone(), f.cod().clone()),
        f,
    )
    .expect("one-zone block is well typed")
}

/// `(1, π₂): Γ -> Γ`.
pub fn identity_block(ctx: &TypedContext) -> Block {
    Block::lift(ctx.clone(), ctx.clone(), &FinMap::identity(&carrier(ctx))).expect("identity is well typed")
}

/// Rewiring `Γ -> Γ·perm` with `(Γ·perm)[i] = Γ[perm[i]]`.
pub fn permutation_block(ctx: &TypedContext, perm: &[usize]) -> Block {
    let target = ctx.permute(perm);
    let f = FinMap::from_fn(&carrier(ctx), &carrier(&target), |k| {
        if ctx.is_empty() {
            return 0;
        }
        let c = ctx.coords(k);
        target.index(&perm.iter().map(|&i| c[i]).collect::<Vec<_>>())
    });
    Block::lift(ctx.clone(), target, &f).expect("permutation is well typed")
}

/// `σ_{Γ,Δ}: Γ,Δ -> Δ,Γ`.
pub fn symmetry_block(g: &TypedContext, d: &TypedContext) -> Block {
    let perm: Vec<usize> = (g.len()..g.len() + d.len()).chain(0..g.len()).collect();
    permutation_block(&g.concat(d), &perm)
}

/// `g ∘ f = (Q × P, ψ ∘ (id_Q × φ) ∘ α⁻¹)`.
pub fn compose_blocks(g: &Block, f: &Block) -> Result<Block, ArchError> {
    if f.cod != g.dom {
        return Err(ArchError::ContextMismatch {
            left: f.cod.to_string(),
            right: g.dom.to_string(),
        });
    }
    let cgam = carrier(&f.dom);
    // α⁻¹: (Q × P) × Γ -> Q × (P × Γ)
    let alpha_inv = FinMap::assoc(&g.param, &f.param, &cgam);
    let step = FinMap::product(&FinMap::identity(&g.param), &f.map);
    let map = g.map.after(&step)?.after(&alpha_inv)?;
    Block::new(FinObj::product(&g.param, &f.param), f.dom.clone(), g.cod.clone(), map)
}

/// `f ⊗ g = (P × Q, ν ∘ (φ × ψ) ∘ σ ∘ (id × μ))`.
pub fn tensor_blocks(f: &Block, g: &Block) -> Block {
    let (mu_dom, _) = carrier_tensor_iso(&f.dom, &g.dom);
    let (_, nu_cod) = carrier_tensor_iso(&f.cod, &g.cod);
    let pq = FinObj::product(&f.param, &g.param);
    let lift_mu = FinMap::product(&FinMap::identity(&pq), &mu_dom);
    let shuffle = FinMap::interchange(&f.param, &g.param, &carrier(&f.dom), &carrier(&g.dom));
    let both = FinMap::product(&f.map, &g.map);
    let map = nu_cod
        .after(&both)
        .and_then(|m| m.after(&shuffle))
        .and_then(|m| m.after(&lift_mu))
        .expect("tensor of blocks is well typed");
    Block::new(pq, f.dom.concat(&g.dom), f.cod.concat(&g.cod), map).expect("tensor of blocks is well typed")
}

/// Whether `φ_b ∘ (u × id) = φ_a` for the bijection `u: P_a -> P_b`.
pub fn blocks_equivalent_via(a: &Block, b: &Block, u: &FinMap) -> bool {
    if a.dom != b.dom || a.cod != b.cod || u.dom() != &a.param || u.cod() != &b.param || !u.is_bijection() {
        return false;
    }
    let n = carrier(&a.dom).size();
    (0..a.param.size()).all(|p| (0..n).all(|x| b.apply(u.apply(p), x) == a.apply(p, x)))
}

/// A reparametrisation witnessing `a ∼ b`, if any; parameters above
/// [`MAX_EQUIV_PARAM`] elements are refused.
pub fn find_equivalence(a: &Block, b: &Block) -> Result<Option<FinMap>, ArchError> {
    let n = a.param.size().max(b.param.size());
    if n > MAX_EQUIV_PARAM {
        return Err(ArchError::ParamTooLarge { size: n, cap: MAX_EQUIV_PARAM });
    }
    if a.dom != b.dom || a.cod != b.cod {
        return Err(ArchError::ContextMismatch {
            left: format!("{} -> {}", a.dom, a.cod),
            right: format!("{} -> {}", b.dom, b.cod),
        });
    }
    if a.param.size() != b.param.size() {
        return Ok(None);
    }
    Ok(permutations(a.param.size())
        .into_iter()
        .map(|t| FinMap::new(a.param.clone(), b.param.clone(), t).expect("permutation table"))
        .find(|u| blocks_equivalent_via(a, b, u)))
}

pub fn blocks_equivalent(a: &Block, b: &Block) -> Result<bool, ArchError> {
    find_equivalence(a, b).map(|w| w.is_some())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(s: &str) -> Zone {
        Zone::new(s).unwrap()
    }

    #[test]
    fn carrier_sizes() {
        assert_eq!(carrier(&TypedContext::empty()), FinObj::unit());
        let g = TypedContext::new(vec![(z("a"), FinObj::sized(2)), (z("b"), FinObj::sized(3))]);
        assert_eq!(carrier(&g).size(), 6);
    }

    #[test]
    fn function_composition_with_unit_params() {
        let ctx = TypedContext::single(z("a"), FinObj::sized(2));
        let f = Block::lift(ctx.clone(), ctx.clone(), &FinMap::new(FinObj::sized(2), FinObj::sized(2), vec![1, 1]).unwrap()).unwrap();
        let g = Block::lift(ctx.clone(), ctx.clone(), &FinMap::new(FinObj::sized(2), FinObj::sized(2), vec![1, 0]).unwrap()).unwrap();
        let gf = compose_blocks(&g, &f).unwrap();
        assert_eq!(gf.apply(0, 0), 0);
        assert_eq!(gf.apply(0, 1), 0);
    }

    #[test]
    fn permuted_params_are_equivalent() {
        let ctx = TypedContext::single(z("a"), FinObj::sized(2));
        let a = Block::from_table(FinObj::sized(2), ctx.clone(), ctx.clone(), vec![0, 1, 1, 0]).unwrap();
        let b = Block::from_table(FinObj::sized(2), ctx.clone(), ctx.clone(), vec![1, 0, 0, 1]).unwrap();
        assert!(blocks_equivalent(&a, &a).unwrap());
        assert!(blocks_equivalent(&a, &b).unwrap());
        let c = Block::from_table(FinObj::sized(1), ctx.clone(), ctx.clone(), vec![0, 1]).unwrap();
        assert!(!blocks_equivalent(&a, &c).unwrap());
        let big = Block::from_table(FinObj::sized(5), ctx.clone(), ctx, vec![0; 10]).unwrap();
        assert!(matches!(blocks_equivalent(&big, &big), Err(ArchError::ParamTooLarge { .. })));
    }
}
