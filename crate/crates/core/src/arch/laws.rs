//! Exhaustive and sampled checks of the discipline squares and the
//! symmetric monoidal laws in the finite-set model.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::block::{
    blocks_equivalent_via, carrier, carrier_tensor_iso, compose_blocks, find_equivalence, identity_block, one_zone,
    symmetry_block, tensor_blocks, Block, TypedContext, MAX_EQUIV_PARAM,
};
use super::eval::StructuralMaps;
use super::finset::{FinMap, FinObj};
use crate::signature::{DisciplineSpec, Zone};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LawResult {
    pub name: String,
    pub instances: usize,
    pub counterexample: Option<String>,
}

impl LawResult {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LawReport {
    pub results: Vec<LawResult>,
}

impl LawReport {
    pub fn all_pass(&self) -> bool {
        self.results.iter().all(LawResult::passed)
    }

    pub fn get(&self, name: &str) -> Option<&LawResult> {
        self.results.iter().find(|r| r.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &LawResult> {
        self.results.iter().filter(|r| !r.passed())
    }

    fn record(&mut self, name: &str, instances: usize, counterexample: Option<String>) {
        self.results.push(LawResult {
            name: name.to_string(),
            instances,
            counterexample,
        });
    }
}

impl fmt::Display for LawReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.results {
            match &r.counterexample {
                None => writeln!(f, "pass {} ({} instances)", r.name, r.instances)?,
                Some(c) => writeln!(f, "FAIL {} ({} instances): {c}", r.name, r.instances)?,
            }
        }
        Ok(())
    }
}

/// First domain element where two parameter-free blocks differ.
fn ext_diff(a: &Block, b: &Block) -> Option<(usize, usize, usize)> {
    assert_eq!((a.param.size(), b.param.size()), (1, 1), "parameter-free blocks");
    assert!(a.dom == b.dom && a.cod == b.cod, "parallel blocks");
    (0..carrier(&a.dom).size()).find_map(|x| {
        let (l, r) = (a.apply(0, x), b.apply(0, x));
        (l != r).then_some((x, l, r))
    })
}

fn describe(a: &Block, (x, l, r): (usize, usize, usize)) -> String {
    let (dom, cod) = (carrier(&a.dom), carrier(&a.cod));
    format!("at x={} lhs={} rhs={}", dom.label(x), cod.label(l), cod.label(r))
}

fn table(f: &FinMap) -> String {
    format!("{:?}", f.table())
}

/// Every map between the two objects when both have at most two elements,
/// otherwise `samples` random ones.
fn maps_between(a: &FinObj, b: &FinObj, samples: usize, rng: &mut ChaCha8Rng) -> Vec<FinMap> {
    if a.size() <= 2 && b.size() <= 2 {
        return FinMap::all(a, b);
    }
    if b.size() == 0 {
        return FinMap::all(a, b);
    }
    (0..samples)
        .map(|_| {
            let t = (0..a.size()).map(|_| rng.gen_range(0..b.size())).collect();
            FinMap::new(a.clone(), b.clone(), t).expect("in range")
        })
        .collect()
}

struct Squares<'a> {
    maps: &'a dyn StructuralMaps,
}

impl Squares<'_> {
    fn chi(&self, z: &Zone, z2: &Zone, a: &FinObj) -> Block {
        Block::lift(
            TypedContext::single(z.clone(), a.clone()),
            TypedContext::single(z2.clone(), a.clone()),
            &self.maps.coerce(z, z2, a),
        )
        .expect("coercion is well typed")
    }

    fn omega(&self, z: &Zone, a: &FinObj) -> Block {
        Block::lift(TypedContext::single(z.clone(), a.clone()), TypedContext::empty(), &self.maps.discard(z, a))
            .expect("discard is well typed")
    }

    fn delta(&self, z: &Zone, a: &FinObj) -> Block {
        let two = TypedContext::new(vec![(z.clone(), a.clone()), (z.clone(), a.clone())]);
        Block::lift(TypedContext::single(z.clone(), a.clone()), two, &self.maps.diagonal(z, a))
            .expect("diagonal is well typed")
    }
}

fn comp(g: &Block, f: &Block) -> Block {
    compose_blocks(g, f).expect("composable")
}

/// Evaluates the coercion, discard and diagonal squares of the discipline
/// over objects of size `0..=max_size`.
pub fn coherence_check(spec: &DisciplineSpec, maps: &dyn StructuralMaps, max_size: usize, samples: usize, seed: u64) -> LawReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sq = Squares { maps };
    let objs: Vec<FinObj> = (0..=max_size).map(FinObj::sized).collect();
    let mut pairs: Vec<(FinObj, FinObj, Vec<FinMap>)> = Vec::new();
    for a in &objs {
        for b in &objs {
            let ms = maps_between(a, b, samples, &mut rng);
            pairs.push((a.clone(), b.clone(), ms));
        }
    }
    let order: Vec<(Zone, Zone)> = spec.preorder.pairs().iter().cloned().collect();
    let zones: Vec<Zone> = spec.preorder.zones().iter().cloned().collect();
    let w = &spec.family.discard_zones;
    let c = &spec.family.diagonal_zones;
    let mut report = LawReport::default();

    let mut run = |name: &str, check: &mut dyn FnMut(&mut usize) -> Option<String>| {
        let mut n = 0;
        let cx = check(&mut n);
        report.record(name, n, cx);
    };

    run("coercion naturality", &mut |n| {
        for (z, z2) in &order {
            for (a, b, ms) in &pairs {
                for f in ms {
                    *n += 1;
                    let lhs = comp(&one_zone(z2, f), &sq.chi(z, z2, a));
                    let rhs = comp(&sq.chi(z, z2, b), &one_zone(z, f));
                    if let Some(d) = ext_diff(&lhs, &rhs) {
                        return Some(format!("{z}<={z2}, |A|={} |B|={} f={}: {}", a.size(), b.size(), table(f), describe(&lhs, d)));
                    }
                }
            }
        }
        None
    });
    run("coercion identity", &mut |n| {
        for z in &zones {
            for a in &objs {
                *n += 1;
                let chi = sq.chi(z, z, a);
                if let Some(d) = ext_diff(&chi, &identity_block(&chi.dom)) {
                    return Some(format!("zone {z}, |A|={}: {}", a.size(), describe(&chi, d)));
                }
            }
        }
        None
    });
    run("coercion composition", &mut |n| {
        for (z, z2) in &order {
            for (y, z3) in &order {
                if y != z2 {
                    continue;
                }
                for a in &objs {
                    *n += 1;
                    let lhs = comp(&sq.chi(z2, z3, a), &sq.chi(z, z2, a));
                    let rhs = sq.chi(z, z3, a);
                    if let Some(d) = ext_diff(&lhs, &rhs) {
                        return Some(format!("{z}<={z2}<={z3}, |A|={}: {}", a.size(), describe(&lhs, d)));
                    }
                }
            }
        }
        None
    });
    run("discard naturality", &mut |n| {
        for z in w {
            for (a, b, ms) in &pairs {
                for f in ms {
                    *n += 1;
                    let lhs = comp(&sq.omega(z, b), &one_zone(z, f));
                    let rhs = sq.omega(z, a);
                    if let Some(d) = ext_diff(&lhs, &rhs) {
                        return Some(format!("zone {z}, f={}: {}", table(f), describe(&lhs, d)));
                    }
                }
            }
        }
        None
    });
    run("discard refinement", &mut |n| {
        for (z, z2) in &order {
            if !(w.contains(z) && w.contains(z2)) {
                continue;
            }
            for a in &objs {
                *n += 1;
                let lhs = comp(&sq.omega(z2, a), &sq.chi(z, z2, a));
                let rhs = sq.omega(z, a);
                if let Some(d) = ext_diff(&lhs, &rhs) {
                    return Some(format!("{z}<={z2}, |A|={}: {}", a.size(), describe(&lhs, d)));
                }
            }
        }
        None
    });
    run("diagonal naturality", &mut |n| {
        for z in c {
            for (a, b, ms) in &pairs {
                for f in ms {
                    *n += 1;
                    let jf = one_zone(z, f);
                    let lhs = comp(&tensor_blocks(&jf, &jf), &sq.delta(z, a));
                    let rhs = comp(&sq.delta(z, b), &jf);
                    if let Some(d) = ext_diff(&lhs, &rhs) {
                        return Some(format!("zone {z}, |A|={} |B|={} f={}: {}", a.size(), b.size(), table(f), describe(&lhs, d)));
                    }
                }
            }
        }
        None
    });
    run("diagonal refinement", &mut |n| {
        for (z, z2) in &order {
            if !(c.contains(z) && c.contains(z2)) {
                continue;
            }
            for a in &objs {
                *n += 1;
                let chi = sq.chi(z, z2, a);
                let lhs = comp(&tensor_blocks(&chi, &chi), &sq.delta(z, a));
                let rhs = comp(&sq.delta(z2, a), &chi);
                if let Some(d) = ext_diff(&lhs, &rhs) {
                    return Some(format!("{z}<={z2}, |A|={}: {}", a.size(), describe(&lhs, d)));
                }
            }
        }
        None
    });
    report
}

// ---- monoidal laws ----

struct Gen {
    rng: ChaCha8Rng,
    max_size: usize,
    max_param: usize,
}

impl Gen {
    fn context(&mut self) -> TypedContext {
        let n = self.rng.gen_range(0..=2);
        let zones = ["a", "b", "c"];
        TypedContext::new(
            (0..n)
                .map(|_| {
                    let z = Zone::new(zones[self.rng.gen_range(0..zones.len())]).expect("zone id");
                    (z, FinObj::sized(self.rng.gen_range(1..=self.max_size)))
                })
                .collect(),
        )
    }

    fn block(&mut self, dom: &TypedContext, cod: &TypedContext) -> Block {
        let param = FinObj::sized(self.rng.gen_range(1..=self.max_param));
        let n = param.size() * carrier(dom).size();
        let m = carrier(cod).size();
        let table = (0..n).map(|_| self.rng.gen_range(0..m)).collect();
        Block::from_table(param, dom.clone(), cod.clone(), table).expect("generated block")
    }

    fn bijection(&mut self, a: &FinObj) -> FinMap {
        let mut t: Vec<usize> = (0..a.size()).collect();
        for i in (1..t.len()).rev() {
            t.swap(i, self.rng.gen_range(0..=i));
        }
        FinMap::new(a.clone(), a.clone(), t).expect("permutation")
    }
}

/// `f` with its parameter relabelled along the bijection `u`.
pub fn reparametrise(f: &Block, u: &FinMap) -> Block {
    let inv = u.inverse().expect("bijection");
    let n = carrier(&f.dom).size();
    let table = (0..f.param.size() * n).map(|k| f.apply(inv.apply(k / n), k % n)).collect();
    Block::from_table(f.param.clone(), f.dom.clone(), f.cod.clone(), table).expect("same shape")
}

fn equiv(a: &Block, b: &Block, u: &FinMap) -> Result<(), String> {
    if !blocks_equivalent_via(a, b, u) {
        return Err(format!("witness {:?} fails for {} -> {}", u.table(), a.dom, a.cod));
    }
    if a.param.size().max(b.param.size()) <= MAX_EQUIV_PARAM {
        match find_equivalence(a, b) {
            Ok(Some(_)) => {}
            _ => return Err(format!("bijection search finds no witness for {} -> {}", a.dom, a.cod)),
        }
    }
    Ok(())
}

/// Category, monoidal and symmetry laws on random blocks with entry
/// carriers of size `1..=max_size` and parameters of size `1..=max_param`,
/// plus the coherence diagrams on carrier bijections.
pub fn monoidal_law_check(max_size: usize, max_param: usize, instances: usize, seed: u64) -> LawReport {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        max_size,
        max_param,
    };
    let mut report = LawReport::default();
    let law = |report: &mut LawReport, name: &str, g: &mut Gen, f: &mut dyn FnMut(&mut Gen) -> Result<(), String>| {
        let mut cx = None;
        let mut n = 0;
        for _ in 0..instances {
            n += 1;
            if let Err(e) = f(g) {
                cx = Some(e);
                break;
            }
        }
        report.record(name, n, cx);
    };

    // μ, ν over every context of at most two entries
    {
        let mut ctxs = vec![TypedContext::empty()];
        for a in 0..=max_size {
            ctxs.push(TypedContext::single(Zone::new("a").unwrap(), FinObj::sized(a)));
            for b in 0..=max_size {
                ctxs.push(TypedContext::new(vec![
                    (Zone::new("a").unwrap(), FinObj::sized(a)),
                    (Zone::new("b").unwrap(), FinObj::sized(b)),
                ]));
            }
        }
        let mut n = 0;
        let mut cx = None;
        'outer: for x in &ctxs {
            for y in &ctxs {
                n += 1;
                let (mu, nu) = carrier_tensor_iso(x, y);
                let ok = mu.after(&nu).map(|m| m == FinMap::identity(nu.dom())).unwrap_or(false)
                    && nu.after(&mu).map(|m| m == FinMap::identity(mu.dom())).unwrap_or(false);
                if !ok {
                    cx = Some(format!("{x} and {y}"));
                    break 'outer;
                }
            }
        }
        report.record("carrier tensor iso", n, cx);
    }

    law(&mut report, "left unit", &mut g, &mut |g| {
        let (d, c) = (g.context(), g.context());
        let f = g.block(&d, &c);
        let lhs = compose_blocks(&identity_block(&c), &f).map_err(|e| e.to_string())?;
        equiv(&f, &lhs, &FinMap::left_unitor(&f.param).inverse().unwrap())
    });
    law(&mut report, "right unit", &mut g, &mut |g| {
        let (d, c) = (g.context(), g.context());
        let f = g.block(&d, &c);
        let lhs = compose_blocks(&f, &identity_block(&d)).map_err(|e| e.to_string())?;
        equiv(&f, &lhs, &FinMap::right_unitor(&f.param).inverse().unwrap())
    });
    law(&mut report, "associativity", &mut g, &mut |g| {
        let (a, b, c, d) = (g.context(), g.context(), g.context(), g.context());
        let (f, gg, h) = (g.block(&a, &b), g.block(&b, &c), g.block(&c, &d));
        let lhs = comp(&comp(&h, &gg), &f);
        let rhs = comp(&h, &comp(&gg, &f));
        equiv(&lhs, &rhs, &FinMap::assoc(&h.param, &gg.param, &f.param))
    });
    law(&mut report, "interchange", &mut g, &mut |g| {
        let (a, b, c) = (g.context(), g.context(), g.context());
        let (x, y, z) = (g.context(), g.context(), g.context());
        let (f1, f) = (g.block(&a, &b), g.block(&b, &c));
        let (g1, gg) = (g.block(&x, &y), g.block(&y, &z));
        let lhs = comp(&tensor_blocks(&f, &gg), &tensor_blocks(&f1, &g1));
        let rhs = tensor_blocks(&comp(&f, &f1), &comp(&gg, &g1));
        equiv(&lhs, &rhs, &FinMap::interchange(&f.param, &gg.param, &f1.param, &g1.param))
    });
    law(&mut report, "symmetry naturality", &mut g, &mut |g| {
        let (a, b, c, d) = (g.context(), g.context(), g.context(), g.context());
        let (f, h) = (g.block(&a, &b), g.block(&c, &d));
        let lhs = comp(&symmetry_block(&b, &d), &tensor_blocks(&f, &h));
        let rhs = comp(&tensor_blocks(&h, &f), &symmetry_block(&a, &c));
        let pq = FinObj::product(&f.param, &h.param);
        let qp = FinObj::product(&h.param, &f.param);
        let u = FinMap::right_unitor(&qp)
            .inverse()
            .unwrap()
            .after(&FinMap::swap(&f.param, &h.param))
            .and_then(|m| m.after(&FinMap::left_unitor(&pq)))
            .map_err(|e| e.to_string())?;
        equiv(&lhs, &rhs, &u)
    });
    law(&mut report, "symmetry involution", &mut g, &mut |g| {
        let (a, b) = (g.context(), g.context());
        let twice = comp(&symmetry_block(&b, &a), &symmetry_block(&a, &b));
        match ext_diff(&twice, &identity_block(&a.concat(&b))) {
            None => Ok(()),
            Some(d) => Err(describe(&twice, d)),
        }
    });
    law(&mut report, "tensor unit object", &mut g, &mut |g| {
        let (d, c) = (g.context(), g.context());
        let f = g.block(&d, &c);
        let e = identity_block(&TypedContext::empty());
        let right = tensor_blocks(&f, &e);
        equiv(&f, &right, &FinMap::right_unitor(&f.param).inverse().unwrap())?;
        let left = tensor_blocks(&e, &f);
        equiv(&f, &left, &FinMap::left_unitor(&f.param).inverse().unwrap())
    });
    law(&mut report, "tensor well defined", &mut g, &mut |g| {
        let (a, b, c, d) = (g.context(), g.context(), g.context(), g.context());
        let (f, h) = (g.block(&a, &b), g.block(&c, &d));
        let u = g.bijection(&f.param);
        let f2 = reparametrise(&f, &u);
        equiv(&f, &f2, &u)?;
        equiv(&tensor_blocks(&f, &h), &tensor_blocks(&f2, &h), &FinMap::product(&u, &FinMap::identity(&h.param)))?;
        equiv(&tensor_blocks(&h, &f), &tensor_blocks(&h, &f2), &FinMap::product(&FinMap::identity(&h.param), &u))
    });
    law(&mut report, "composition well defined", &mut g, &mut |g| {
        let (a, b, c) = (g.context(), g.context(), g.context());
        let (f, h) = (g.block(&a, &b), g.block(&b, &c));
        let u = g.bijection(&f.param);
        let f2 = reparametrise(&f, &u);
        equiv(&comp(&h, &f), &comp(&h, &f2), &FinMap::product(&FinMap::identity(&h.param), &u))
    });
    law(&mut report, "equivalence relation", &mut g, &mut |g| {
        let (d, c) = (g.context(), g.context());
        let f = g.block(&d, &c);
        let (u, v) = (g.bijection(&f.param), g.bijection(&f.param));
        let (f1, f2) = (reparametrise(&f, &u), reparametrise(&reparametrise(&f, &u), &v));
        equiv(&f, &f, &FinMap::identity(&f.param))?;
        equiv(&f1, &f, &u.inverse().unwrap())?;
        equiv(&f, &f2, &v.after(&u).map_err(|e| e.to_string())?)
    });
    law(&mut report, "hexagon (contexts)", &mut g, &mut |g| {
        let sizes: Vec<usize> = (0..3).map(|_| g.rng.gen_range(1..=max_size)).collect();
        let one = |z: &str, n: usize| TypedContext::single(Zone::new(z).unwrap(), FinObj::sized(n));
        let (a, b, c) = (one("a", sizes[0]), one("b", sizes[1]), one("c", sizes[2]));
        let lhs = symmetry_block(&a, &b.concat(&c));
        let rhs = comp(
            &tensor_blocks(&identity_block(&b), &symmetry_block(&a, &c)),
            &tensor_blocks(&symmetry_block(&a, &b), &identity_block(&c)),
        );
        match ext_diff(&lhs, &rhs) {
            None => Ok(()),
            Some(d) => Err(describe(&lhs, d)),
        }
    });

    // coherence diagrams on carriers
    let objs: Vec<FinObj> = (1..=max_size).map(FinObj::sized).collect();
    let id = FinMap::identity;
    let x = |a: &FinMap, b: &FinMap| FinMap::product(a, b);
    let p = |a: &FinObj, b: &FinObj| FinObj::product(a, b);
    let mut n = 0;
    let mut pentagon = None;
    let mut triangle = None;
    let mut hexagon = None;
    for a in &objs {
        for b in &objs {
            let t_lhs = x(&id(a), &FinMap::left_unitor(b)).after(&FinMap::assoc(a, &FinObj::unit(), b)).unwrap();
            let t_rhs = x(&FinMap::right_unitor(a), &id(b));
            if triangle.is_none() && t_lhs != t_rhs {
                triangle = Some(format!("|A|={} |B|={}", a.size(), b.size()));
            }
            for c in &objs {
                let h_lhs = FinMap::assoc(b, c, a)
                    .after(&FinMap::swap(a, &p(b, c)))
                    .and_then(|m| m.after(&FinMap::assoc(a, b, c)))
                    .unwrap();
                let h_rhs = x(&id(b), &FinMap::swap(a, c))
                    .after(&FinMap::assoc(b, a, c))
                    .and_then(|m| m.after(&x(&FinMap::swap(a, b), &id(c))))
                    .unwrap();
                if hexagon.is_none() && h_lhs != h_rhs {
                    hexagon = Some(format!("|A|={} |B|={} |C|={}", a.size(), b.size(), c.size()));
                }
                for d in &objs {
                    n += 1;
                    let lhs = FinMap::assoc(a, b, &p(c, d)).after(&FinMap::assoc(&p(a, b), c, d)).unwrap();
                    let rhs = x(&id(a), &FinMap::assoc(b, c, d))
                        .after(&FinMap::assoc(a, &p(b, c), d))
                        .and_then(|m| m.after(&x(&FinMap::assoc(a, b, c), &id(d))))
                        .unwrap();
                    if pentagon.is_none() && lhs != rhs {
                        pentagon = Some(format!("|A|={} |B|={} |C|={} |D|={}", a.size(), b.size(), c.size(), d.size()));
                    }
                }
            }
        }
    }
    let k = objs.len();
    report.record("pentagon", n, pentagon);
    report.record("triangle", k * k, triangle);
    report.record("hexagon", k * k * k, hexagon);
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arch::eval::{Cartesian, MutatedDiagonal};
    use crate::signature::fixtures::{three_zone, z, zones};
    use crate::signature::{StructuralFamily, ZonePreorder};

    fn chain_spec() -> DisciplineSpec {
        let order = ZonePreorder::close(zones(&["a", "b", "c"]), &[(z("a"), z("b")), (z("b"), z("c"))]).unwrap();
        DisciplineSpec::new(order, StructuralFamily::new(zones(&["b", "c"]), zones(&["a", "b", "c"])))
    }

    #[test]
    fn cartesian_discipline_is_coherent() {
        for spec in [three_zone(), chain_spec()] {
            let r = coherence_check(&spec, &Cartesian, 3, 16, 1);
            assert!(r.all_pass(), "{r}");
        }
    }

    #[test]
    fn mutated_diagonal_breaks_naturality() {
        let r = coherence_check(&three_zone(), &MutatedDiagonal { fixed: 0 }, 3, 16, 1);
        let nat = r.get("diagonal naturality").unwrap();
        assert!(nat.counterexample.as_deref().unwrap().contains("at x="), "{r}");
        assert!(r.get("discard naturality").unwrap().passed());
    }

    #[test]
    fn monoidal_laws_hold() {
        let r = monoidal_law_check(3, 2, 40, 7);
        assert!(r.all_pass(), "{r}");
        assert!(r.get("pentagon").unwrap().instances > 0);
    }
}
