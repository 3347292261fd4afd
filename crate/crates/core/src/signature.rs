//! Zones, zone preorders, coherent zone disciplines and signature extraction.
//!
//! A discipline records which zones license discarding and duplication. The
//! extracted [`SubexpSignature`] is read back from the licensed structural
//! family rather than copied from the declaration, so the round trip between
//! the two is a property that can be tested.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// Token reserved for the output zone adjoined by the diagram semantics.
pub const OUTPUT_ZONE: &str = "o";

/// A zone label.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Zone(String);

impl Zone {
    /// Builds a user zone. Rejects malformed tokens and the reserved output token.
    pub fn new(id: impl Into<String>) -> Result<Zone, SignatureError> {
        let id = id.into();
        if !is_token(&id) {
            return Err(SignatureError::BadZoneId(id));
        }
        if id == OUTPUT_ZONE {
            return Err(SignatureError::ReservedZone);
        }
        Ok(Zone(id))
    }

    /// The fresh output zone `o`. Never a member of a user zone set.
    pub fn output() -> Zone {
        Zone(OUTPUT_ZONE.to_string())
    }

    pub fn is_output(&self) -> bool {
        self.0 == OUTPUT_ZONE
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Zone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Nonempty run of ASCII letters, digits and underscores.
pub fn is_token(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SignatureError {
    #[error("malformed zone id `{0}`")]
    BadZoneId(String),
    #[error("`o` is reserved for the output zone")]
    ReservedZone,
    #[error("unknown zone `{0}`")]
    UnknownZone(String),
    #[error("duplicate zone `{0}`")]
    DuplicateZone(String),
    #[error("invalid discipline: {0}")]
    InvalidDiscipline(ValidationReport),
    #[error("`{set}` is not upward closed: {lower} is in it, {upper} is not, and {lower} <= {upper}")]
    NotUpwardClosed {
        set: &'static str,
        lower: Zone,
        upper: Zone,
    },
}

/// Reflexive-transitive refinement order on a finite zone set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ZonePreorder {
    zones: BTreeSet<Zone>,
    leq: BTreeSet<(Zone, Zone)>,
}

impl ZonePreorder {
    /// Least reflexive-transitive relation on `zones` containing `edges`.
    pub fn close(
        zones: impl IntoIterator<Item = Zone>,
        edges: &[(Zone, Zone)],
    ) -> Result<ZonePreorder, SignatureError> {
        let zones: BTreeSet<Zone> = zones.into_iter().collect();
        for (a, b) in edges {
            for z in [a, b] {
                if !zones.contains(z) {
                    return Err(SignatureError::UnknownZone(z.to_string()));
                }
            }
        }
        let index: BTreeMap<&Zone, usize> = zones.iter().enumerate().map(|(i, z)| (z, i)).collect();
        let n = zones.len();
        let mut reach = vec![vec![false; n]; n];
        for (i, row) in reach.iter_mut().enumerate() {
            row[i] = true;
        }
        for (a, b) in edges {
            reach[index[a]][index[b]] = true;
        }
        // Warshall
        for k in 0..n {
            for i in 0..n {
                if reach[i][k] {
                    for j in 0..n {
                        if reach[k][j] {
                            reach[i][j] = true;
                        }
                    }
                }
            }
        }
        let names: Vec<&Zone> = zones.iter().collect();
        let mut leq = BTreeSet::new();
        for i in 0..n {
            for j in 0..n {
                if reach[i][j] {
                    leq.insert((names[i].clone(), names[j].clone()));
                }
            }
        }
        Ok(ZonePreorder { zones, leq })
    }

    /// The discrete order on `zones`.
    pub fn discrete(zones: impl IntoIterator<Item = Zone>) -> ZonePreorder {
        ZonePreorder::close(zones, &[]).expect("no edges to resolve")
    }

    pub fn zones(&self) -> &BTreeSet<Zone> {
        &self.zones
    }

    pub fn pairs(&self) -> &BTreeSet<(Zone, Zone)> {
        &self.leq
    }

    pub fn leq(&self, a: &Zone, b: &Zone) -> bool {
        self.leq.contains(&(a.clone(), b.clone()))
    }

    pub fn contains(&self, z: &Zone) -> bool {
        self.zones.contains(z)
    }

    /// Pairs `a <= b` with `a != b`.
    pub fn strict_pairs(&self) -> impl Iterator<Item = &(Zone, Zone)> {
        self.leq.iter().filter(|(a, b)| a != b)
    }

    pub fn is_discrete(&self) -> bool {
        self.strict_pairs().next().is_none()
    }

    /// First witness `(lower, upper)` showing `set` is not upward closed.
    pub fn upward_closure_witness(&self, set: &BTreeSet<Zone>) -> Option<(Zone, Zone)> {
        self.leq
            .iter()
            .find(|(a, b)| set.contains(a) && !set.contains(b))
            .cloned()
    }

    /// Smallest upward-closed superset of `seed`.
    pub fn upward_closure(&self, seed: &BTreeSet<Zone>) -> BTreeSet<Zone> {
        self.leq
            .iter()
            .filter(|(a, _)| seed.contains(a))
            .map(|(_, b)| b.clone())
            .chain(seed.iter().cloned())
            .collect()
    }
}

/// Zones carrying licensed discards and licensed diagonals, uniformly in the carrier.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct StructuralFamily {
    pub discard_zones: BTreeSet<Zone>,
    pub diagonal_zones: BTreeSet<Zone>,
}

/// Carrier names used to probe the licensed family "for every carrier".
const PROBE_CARRIERS: [&str; 3] = ["1", "A", "A*A"];

/// Shape of one side of a licensed structural morphism: a list of
/// `(zone, carrier)` factors. The empty list is the monoidal unit.
pub type FactorShape = Vec<(Zone, String)>;

/// A structural morphism of the licensed family, described only by its
/// domain and codomain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LicensedMorphism {
    pub dom: FactorShape,
    pub cod: FactorShape,
}

impl StructuralFamily {
    pub fn new(
        discard: impl IntoIterator<Item = Zone>,
        diagonal: impl IntoIterator<Item = Zone>,
    ) -> StructuralFamily {
        StructuralFamily {
            discard_zones: discard.into_iter().collect(),
            diagonal_zones: diagonal.into_iter().collect(),
        }
    }

    /// Every discard `J_z(A) -> ()` and diagonal `J_z(A) -> J_z(A), J_z(A)`
    /// the family licenses, over the given probe carriers.
    pub fn licensed_morphisms(&self, carriers: &[&str]) -> Vec<LicensedMorphism> {
        let mut out = Vec::new();
        for z in &self.discard_zones {
            for a in carriers {
                out.push(LicensedMorphism {
                    dom: vec![(z.clone(), a.to_string())],
                    cod: vec![],
                });
            }
        }
        for z in &self.diagonal_zones {
            for a in carriers {
                let f = (z.clone(), a.to_string());
                out.push(LicensedMorphism {
                    dom: vec![f.clone()],
                    cod: vec![f.clone(), f],
                });
            }
        }
        out
    }
}

/// Reconstructs the weakening and contraction classes from the licensed
/// family: a zone is in the first class when, for every probe carrier `A`,
/// the family holds a morphism `J_z(A) -> ()`, and in the second when it
/// holds a morphism `J_z(A) -> J_z(A), J_z(A)`.
pub fn reconstruct_classes(family: &StructuralFamily) -> (BTreeSet<Zone>, BTreeSet<Zone>) {
    let morphisms = family.licensed_morphisms(&PROBE_CARRIERS);
    let candidates: BTreeSet<Zone> = morphisms
        .iter()
        .flat_map(|m| m.dom.iter().map(|(z, _)| z.clone()))
        .collect();
    let has = |z: &Zone, a: &str, cod_of: &dyn Fn(&(Zone, String)) -> FactorShape| {
        let dom = vec![(z.clone(), a.to_string())];
        let cod = cod_of(&dom[0]);
        morphisms.iter().any(|m| m.dom == dom && m.cod == cod)
    };
    let discard = candidates
        .iter()
        .filter(|z| PROBE_CARRIERS.iter().all(|a| has(z, a, &|_| vec![])))
        .cloned()
        .collect();
    let diagonal = candidates
        .iter()
        .filter(|z| {
            PROBE_CARRIERS
                .iter()
                .all(|a| has(z, a, &|f| vec![f.clone(), f.clone()]))
        })
        .cloned()
        .collect();
    (discard, diagonal)
}

/// How zone coercions act on carriers. Only identity-carrier coercions are
/// supported.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum CoercionPolicy {
    #[default]
    IdentityCarrier,
}

/// One entry of a block context signature.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CtxSigEntry {
    /// A user zone, or [`Zone::output`].
    pub zone: Zone,
    pub carrier: String,
}

/// Declaration of an architectural block generator.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BlockDecl {
    pub name: String,
    pub dom: Vec<CtxSigEntry>,
    pub cod: Vec<CtxSigEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DisciplineSpec {
    pub preorder: ZonePreorder,
    pub family: StructuralFamily,
    pub coercion_policy: CoercionPolicy,
    pub blocks: Vec<BlockDecl>,
}

impl DisciplineSpec {
    pub fn new(preorder: ZonePreorder, family: StructuralFamily) -> DisciplineSpec {
        DisciplineSpec {
            preorder,
            family,
            coercion_policy: CoercionPolicy::IdentityCarrier,
            blocks: Vec::new(),
        }
    }

    pub fn block(&self, name: &str) -> Option<&BlockDecl> {
        self.blocks.iter().find(|b| b.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Violation {
    NotUpwardClosed {
        class: &'static str,
        lower: Zone,
        upper: Zone,
    },
    UnknownZone {
        location: String,
        zone: Zone,
    },
    DuplicateBlock(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotUpwardClosed { class, lower, upper } => write!(
                f,
                "{class} zones not upward closed: {lower} <= {upper}, {lower} licensed, {upper} not"
            ),
            Violation::UnknownZone { location, zone } => {
                write!(f, "unknown zone `{zone}` in {location}")
            }
            Violation::DuplicateBlock(name) => write!(f, "block `{name}` declared twice"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks upward closure of both structural classes and that every zone
/// reference resolves. Violations are reported, never repaired.
pub fn validate_discipline(spec: &DisciplineSpec) -> ValidationReport {
    let mut violations = Vec::new();
    let order = &spec.preorder;
    for (class, set) in [
        ("discard", &spec.family.discard_zones),
        ("diagonal", &spec.family.diagonal_zones),
    ] {
        for z in set {
            if !order.contains(z) {
                violations.push(Violation::UnknownZone {
                    location: format!("{class} declaration"),
                    zone: z.clone(),
                });
            }
        }
        for (a, b) in order.pairs() {
            if set.contains(a) && !set.contains(b) {
                violations.push(Violation::NotUpwardClosed {
                    class,
                    lower: a.clone(),
                    upper: b.clone(),
                });
            }
        }
    }
    let mut seen = BTreeSet::new();
    for block in &spec.blocks {
        if !seen.insert(block.name.as_str()) {
            violations.push(Violation::DuplicateBlock(block.name.clone()));
        }
        for e in block.dom.iter().chain(&block.cod) {
            if !e.zone.is_output() && !order.contains(&e.zone) {
                violations.push(Violation::UnknownZone {
                    location: format!("block `{}`", block.name),
                    zone: e.zone.clone(),
                });
            }
        }
    }
    ValidationReport { violations }
}

/// The quadruple `(Z, <=, W, C)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubexpSignature {
    preorder: ZonePreorder,
    weakening: BTreeSet<Zone>,
    contraction: BTreeSet<Zone>,
}

impl SubexpSignature {
    /// Fails unless both classes are upward-closed subsets of the zone set.
    pub fn new(
        preorder: ZonePreorder,
        weakening: BTreeSet<Zone>,
        contraction: BTreeSet<Zone>,
    ) -> Result<SubexpSignature, SignatureError> {
        for (set, name) in [(&weakening, "W"), (&contraction, "C")] {
            if let Some(z) = set.iter().find(|z| !preorder.contains(z)) {
                return Err(SignatureError::UnknownZone(z.to_string()));
            }
            if let Some((lower, upper)) = preorder.upward_closure_witness(set) {
                return Err(SignatureError::NotUpwardClosed { set: name, lower, upper });
            }
        }
        Ok(SubexpSignature {
            preorder,
            weakening,
            contraction,
        })
    }

    pub fn zones(&self) -> &BTreeSet<Zone> {
        self.preorder.zones()
    }

    pub fn preorder(&self) -> &ZonePreorder {
        &self.preorder
    }

    pub fn weakening(&self) -> &BTreeSet<Zone> {
        &self.weakening
    }

    pub fn contraction(&self) -> &BTreeSet<Zone> {
        &self.contraction
    }

    pub fn has_zone(&self, z: &Zone) -> bool {
        self.preorder.contains(z)
    }

    pub fn can_weaken(&self, z: &Zone) -> bool {
        self.weakening.contains(z)
    }

    pub fn can_contract(&self, z: &Zone) -> bool {
        self.contraction.contains(z)
    }

    pub fn leq(&self, a: &Zone, b: &Zone) -> bool {
        self.preorder.leq(a, b)
    }
}

fn fmt_zone_set(f: &mut fmt::Formatter<'_>, set: &BTreeSet<Zone>) -> fmt::Result {
    f.write_str("{")?;
    for (i, z) in set.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{z}")?;
    }
    f.write_str("}")
}

impl fmt::Display for SubexpSignature {
    /// `Z={..} W={..} C={..}`, followed by a `leq:` line when the preorder
    /// is not discrete.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Z=")?;
        fmt_zone_set(f, self.zones())?;
        f.write_str(" W=")?;
        fmt_zone_set(f, &self.weakening)?;
        f.write_str(" C=")?;
        fmt_zone_set(f, &self.contraction)?;
        if !self.preorder.is_discrete() {
            f.write_str("\nleq:")?;
            for (a, b) in self.preorder.strict_pairs() {
                write!(f, " {a}<={b}")?;
            }
        }
        Ok(())
    }
}

/// `Σ_Lic = (Z, <=, W^disc, C^diag)` for a valid discipline.
pub fn extract_signature(spec: &DisciplineSpec) -> Result<SubexpSignature, SignatureError> {
    let report = validate_discipline(spec);
    if !report.is_ok() {
        return Err(SignatureError::InvalidDiscipline(report));
    }
    let (weakening, contraction) = reconstruct_classes(&spec.family);
    SubexpSignature::new(spec.preorder.clone(), weakening, contraction)
}

pub fn signatures_equal(a: &SubexpSignature, b: &SubexpSignature) -> bool {
    a.zones() == b.zones()
        && a.preorder.pairs() == b.preorder.pairs()
        && a.weakening == b.weakening
        && a.contraction == b.contraction
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn z(s: &str) -> Zone {
        Zone::new(s).unwrap()
    }

    pub fn zones(ids: &[&str]) -> BTreeSet<Zone> {
        ids.iter().map(|s| z(s)).collect()
    }

    /// The persistent / relevant / linear discipline.
    pub fn three_zone() -> DisciplineSpec {
        DisciplineSpec::new(
            ZonePreorder::discrete(zones(&["p", "r", "l"])),
            StructuralFamily::new(zones(&["p"]), zones(&["p", "r"])),
        )
    }
}
