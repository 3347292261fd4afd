//! Finite sets with labelled elements and tabulated maps.

use std::fmt;

use super::ArchError;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FinObj {
    labels: Vec<String>,
}

impl FinObj {
    pub fn new(labels: Vec<String>) -> Result<FinObj, ArchError> {
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(ArchError::DuplicateLabel(l.clone()));
            }
        }
        Ok(FinObj { labels })
    }

    /// `{0, .., n-1}`.
    pub fn sized(n: usize) -> FinObj {
        FinObj {
            labels: (0..n).map(|i| i.to_string()).collect(),
        }
    }

    /// The terminal object.
    pub fn unit() -> FinObj {
        FinObj {
            labels: vec!["*".into()],
        }
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    /// `A × B`, indexed row-major: `(i, j) ↦ i·|B| + j`.
    pub fn product(a: &FinObj, b: &FinObj) -> FinObj {
        let mut labels = Vec::with_capacity(a.size() * b.size());
        for x in &a.labels {
            for y in &b.labels {
                labels.push(format!("({x},{y})"));
            }
        }
        FinObj { labels }
    }

    pub fn pair(&self, b: &FinObj, i: usize, j: usize) -> usize {
        debug_assert!(i < self.size() && j < b.size());
        i * b.size() + j
    }

    pub fn unpair(&self, b: &FinObj, k: usize) -> (usize, usize) {
        (k / b.size(), k % b.size())
    }
}

impl fmt::Display for FinObj {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.labels.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FinMap {
    dom: FinObj,
    cod: FinObj,
    table: Vec<usize>,
}

impl FinMap {
    pub fn new(dom: FinObj, cod: FinObj, table: Vec<usize>) -> Result<FinMap, ArchError> {
        if table.len() != dom.size() {
            return Err(ArchError::TableShape {
                expected: dom.size(),
                found: table.len(),
            });
        }
        if let Some(&bad) = table.iter().find(|&&v| v >= cod.size()) {
            return Err(ArchError::OutOfRange {
                value: bad,
                size: cod.size(),
            });
        }
        Ok(FinMap { dom, cod, table })
    }

    pub fn from_fn(dom: &FinObj, cod: &FinObj, f: impl Fn(usize) -> usize) -> FinMap {
        let table = (0..dom.size()).map(f).collect();
        FinMap::new(dom.clone(), cod.clone(), table).expect("from_fn produced an out-of-range value")
    }

    pub fn dom(&self) -> &FinObj {
        &self.dom
    }

    pub fn cod(&self) -> &FinObj {
        &self.cod
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn apply(&self, x: usize) -> usize {
        self.table[x]
    }

    pub fn identity(a: &FinObj) -> FinMap {
        FinMap::from_fn(a, a, |x| x)
    }

    /// `self ∘ before`.
    pub fn after(&self, before: &FinMap) -> Result<FinMap, ArchError> {
        if before.cod != self.dom {
            return Err(ArchError::Mismatch(format!(
                "cannot compose: codomain of size {} against domain of size {}",
                before.cod.size(),
                self.dom.size()
            )));
        }
        Ok(FinMap::from_fn(&before.dom, &self.cod, |x| self.apply(before.apply(x))))
    }

    /// `f × g`.
    pub fn product(f: &FinMap, g: &FinMap) -> FinMap {
        let dom = FinObj::product(&f.dom, &g.dom);
        let cod = FinObj::product(&f.cod, &g.cod);
        FinMap::from_fn(&dom, &cod, |k| {
            let (i, j) = f.dom.unpair(&g.dom, k);
            f.cod.pair(&g.cod, f.apply(i), g.apply(j))
        })
    }

    /// `A -> 1`.
    pub fn terminal(a: &FinObj) -> FinMap {
        FinMap::from_fn(a, &FinObj::unit(), |_| 0)
    }

    /// `x ↦ (x, x)`.
    pub fn diagonal(a: &FinObj) -> FinMap {
        FinMap::from_fn(a, &FinObj::product(a, a), |x| a.pair(a, x, x))
    }

    /// `A × B -> A`.
    pub fn proj1(a: &FinObj, b: &FinObj) -> FinMap {
        FinMap::from_fn(&FinObj::product(a, b), a, |k| a.unpair(b, k).0)
    }

    /// `A × B -> B`.
    pub fn proj2(a: &FinObj, b: &FinObj) -> FinMap {
        FinMap::from_fn(&FinObj::product(a, b), b, |k| a.unpair(b, k).1)
    }

    /// `(A × B) × C -> A × (B × C)`.
    pub fn assoc(a: &FinObj, b: &FinObj, c: &FinObj) -> FinMap {
        let ab = FinObj::product(a, b);
        let bc = FinObj::product(b, c);
        FinMap::from_fn(&FinObj::product(&ab, c), &FinObj::product(a, &bc), |k| {
            let (xy, z) = ab.unpair(c, k);
            let (x, y) = a.unpair(b, xy);
            a.pair(&bc, x, b.pair(c, y, z))
        })
    }

    /// `A × (B × C) -> (A × B) × C`.
    pub fn assoc_inv(a: &FinObj, b: &FinObj, c: &FinObj) -> FinMap {
        let ab = FinObj::product(a, b);
        let bc = FinObj::product(b, c);
        FinMap::from_fn(&FinObj::product(a, &bc), &FinObj::product(&ab, c), |k| {
            let (x, yz) = a.unpair(&bc, k);
            let (y, z) = b.unpair(c, yz);
            ab.pair(c, a.pair(b, x, y), z)
        })
    }

    /// `A × B -> B × A`.
    pub fn swap(a: &FinObj, b: &FinObj) -> FinMap {
        FinMap::from_fn(&FinObj::product(a, b), &FinObj::product(b, a), |k| {
            let (x, y) = a.unpair(b, k);
            b.pair(a, y, x)
        })
    }

    /// `1 × A -> A`.
    pub fn left_unitor(a: &FinObj) -> FinMap {
        FinMap::proj2(&FinObj::unit(), a)
    }

    /// `A × 1 -> A`.
    pub fn right_unitor(a: &FinObj) -> FinMap {
        FinMap::proj1(a, &FinObj::unit())
    }

    /// `(A × B) × (C × D) -> (A × C) × (B × D)`.
    pub fn interchange(a: &FinObj, b: &FinObj, c: &FinObj, d: &FinObj) -> FinMap {
        let (ab, cd, ac, bd) = (
            FinObj::product(a, b),
            FinObj::product(c, d),
            FinObj::product(a, c),
            FinObj::product(b, d),
        );
        FinMap::from_fn(&FinObj::product(&ab, &cd), &FinObj::product(&ac, &bd), |k| {
            let (xy, zw) = ab.unpair(&cd, k);
            let (x, y) = a.unpair(b, xy);
            let (z, w) = c.unpair(d, zw);
            ac.pair(&bd, a.pair(c, x, z), b.pair(d, y, w))
        })
    }

    pub fn is_bijection(&self) -> bool {
        if self.dom.size() != self.cod.size() {
            return false;
        }
        let mut seen = vec![false; self.cod.size()];
        self.table.iter().all(|&v| !std::mem::replace(&mut seen[v], true))
    }

    pub fn inverse(&self) -> Option<FinMap> {
        if !self.is_bijection() {
            return None;
        }
        let mut table = vec![0; self.cod.size()];
        for (x, &y) in self.table.iter().enumerate() {
            table[y] = x;
        }
        Some(FinMap {
            dom: self.cod.clone(),
            cod: self.dom.clone(),
            table,
        })
    }

    /// Every map `A -> B`, in lexicographic table order.
    pub fn all(a: &FinObj, b: &FinObj) -> Vec<FinMap> {
        let n = a.size();
        let m = b.size();
        if m == 0 {
            return if n == 0 { vec![FinMap::identity(a).retarget(b)] } else { Vec::new() };
        }
        let total = m.checked_pow(n as u32).expect("map count overflow");
        (0..total)
            .map(|mut code| {
                let mut table = vec![0; n];
                for slot in table.iter_mut().rev() {
                    *slot = code % m;
                    code /= m;
                }
                FinMap {
                    dom: a.clone(),
                    cod: b.clone(),
                    table,
                }
            })
            .collect()
    }

    fn retarget(self, cod: &FinObj) -> FinMap {
        FinMap {
            dom: self.dom,
            cod: cod.clone(),
            table: self.table,
        }
    }
}

/// All bijections of `{0..n}` as tables, lexicographic.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_indexing() {
        let a = FinObj::sized(2);
        let b = FinObj::sized(3);
        let ab = FinObj::product(&a, &b);
        assert_eq!(ab.size(), 6);
        assert_eq!(a.pair(&b, 1, 2), 5);
        assert_eq!(ab.label(5), "(1,2)");
    }

    #[test]
    fn map_counts() {
        assert_eq!(FinMap::all(&FinObj::sized(2), &FinObj::sized(3)).len(), 9);
        assert_eq!(FinMap::all(&FinObj::sized(0), &FinObj::sized(0)).len(), 1);
        assert_eq!(FinMap::all(&FinObj::sized(1), &FinObj::sized(0)).len(), 0);
        assert_eq!(permutations(3).len(), 6);
    }

    #[test]
    fn assoc_round_trip() {
        let (a, b, c) = (FinObj::sized(2), FinObj::sized(3), FinObj::sized(2));
        let there = FinMap::assoc(&a, &b, &c);
        let back = FinMap::assoc_inv(&a, &b, &c);
        assert_eq!(back.after(&there).unwrap(), FinMap::identity(there.dom()));
        assert!(there.is_bijection());
    }

    #[test]
    fn duplicate_labels_rejected() {
        assert!(FinObj::new(vec!["a".into(), "a".into()]).is_err());
    }
}
