//! Tensorial formulas, zoned contexts, sequents and their concrete syntax.
//!
//! ```text
//! formula = atom | "I" | "(" formula "*" formula ")"
//! zitem   = zone ":" formula
//! ctx     = zitem {"," zitem} | ""
//! sequent = ctx "|-" formula
//! ```
//!
//! Tensors are always parenthesized. Contexts keep the order they were
//! written in, but every comparison treats them as multisets.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::signature::{is_token, SubexpSignature, Zone};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Atom(String),
    Unit,
    Tensor(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Formula {
        Formula::Atom(name.into())
    }

    pub fn tensor(left: Formula, right: Formula) -> Formula {
        Formula::Tensor(Box::new(left), Box::new(right))
    }

    /// Node count.
    pub fn size(&self) -> usize {
        match self {
            Formula::Atom(_) | Formula::Unit => 1,
            Formula::Tensor(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Depth of nested tensors; 0 for atoms and the unit.
    pub fn tensor_depth(&self) -> usize {
        match self {
            Formula::Atom(_) | Formula::Unit => 0,
            Formula::Tensor(a, b) => 1 + a.tensor_depth().max(b.tensor_depth()),
        }
    }

    pub fn atoms(&self, out: &mut Vec<String>) {
        match self {
            Formula::Atom(a) => {
                if !out.contains(a) {
                    out.push(a.clone());
                }
            }
            Formula::Unit => {}
            Formula::Tensor(a, b) => {
                a.atoms(out);
                b.atoms(out);
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(a) => f.write_str(a),
            Formula::Unit => f.write_str("I"),
            Formula::Tensor(a, b) => write!(f, "({a} * {b})"),
        }
    }
}

/// `<z>A`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ZonedFormula {
    pub zone: Zone,
    pub formula: Formula,
}

impl ZonedFormula {
    pub fn new(zone: Zone, formula: Formula) -> ZonedFormula {
        ZonedFormula { zone, formula }
    }
}

impl fmt::Display for ZonedFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.zone, self.formula)
    }
}

/// A finite multiset of zoned formulas, stored in serialization order.
///
/// `PartialEq` is structural (order-sensitive); use [`ZoneContext::multiset_eq`]
/// for the semantic comparison.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ZoneContext(Vec<ZonedFormula>);

impl ZoneContext {
    pub fn new(items: Vec<ZonedFormula>) -> ZoneContext {
        ZoneContext(items)
    }

    pub fn empty() -> ZoneContext {
        ZoneContext(Vec::new())
    }

    pub fn singleton(item: ZonedFormula) -> ZoneContext {
        ZoneContext(vec![item])
    }

    pub fn items(&self) -> &[ZonedFormula] {
        &self.0
    }

    pub fn into_items(self) -> Vec<ZonedFormula> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ZonedFormula> {
        self.0.iter()
    }

    pub fn count(&self, item: &ZonedFormula) -> usize {
        self.0.iter().filter(|x| *x == item).count()
    }

    pub fn contains(&self, item: &ZonedFormula) -> bool {
        self.0.contains(item)
    }

    /// Same context in canonical (sorted) order.
    pub fn sorted(&self) -> ZoneContext {
        let mut items = self.0.clone();
        items.sort();
        ZoneContext(items)
    }

    pub fn multiset_eq(&self, other: &ZoneContext) -> bool {
        self.len() == other.len() && self.sorted().0 == other.sorted().0
    }

    /// `Γ, Δ`.
    pub fn concat(&self, other: &ZoneContext) -> ZoneContext {
        let mut items = self.0.clone();
        items.extend(other.0.iter().cloned());
        ZoneContext(items)
    }

    pub fn push(&mut self, item: ZonedFormula) {
        self.0.push(item);
    }

    pub fn with(&self, item: ZonedFormula) -> ZoneContext {
        let mut out = self.clone();
        out.push(item);
        out
    }

    /// Removes one occurrence of `item`, keeping the order of the rest.
    pub fn remove_one(&self, item: &ZonedFormula) -> Option<ZoneContext> {
        let pos = self.0.iter().position(|x| x == item)?;
        let mut items = self.0.clone();
        items.remove(pos);
        Some(ZoneContext(items))
    }

    /// Multiset difference `self - other`; `None` when `other` is not
    /// included in `self`.
    pub fn subtract(&self, other: &ZoneContext) -> Option<ZoneContext> {
        let mut rest = self.clone();
        for item in other.iter() {
            rest = rest.remove_one(item)?;
        }
        Some(rest)
    }

    /// Saturating multiset difference: what `self` has beyond `other`.
    pub fn excess_over(&self, other: &ZoneContext) -> ZoneContext {
        let mut pool = other.0.clone();
        let mut out = Vec::new();
        for item in &self.0 {
            match pool.iter().position(|x| x == item) {
                Some(i) => {
                    pool.swap_remove(i);
                }
                None => out.push(item.clone()),
            }
        }
        ZoneContext(out)
    }

    /// Multiplicity of every distinct item.
    pub fn multiplicities(&self) -> BTreeMap<&ZonedFormula, usize> {
        let mut m = BTreeMap::new();
        for item in &self.0 {
            *m.entry(item).or_insert(0) += 1;
        }
        m
    }

    pub fn zones(&self) -> impl Iterator<Item = &Zone> {
        self.0.iter().map(|x| &x.zone)
    }
}

impl FromIterator<ZonedFormula> for ZoneContext {
    fn from_iter<T: IntoIterator<Item = ZonedFormula>>(iter: T) -> Self {
        ZoneContext(iter.into_iter().collect())
    }
}

impl fmt::Display for ZoneContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, item) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{item}")?;
        }
        Ok(())
    }
}

pub fn contexts_equal(a: &ZoneContext, b: &ZoneContext) -> bool {
    a.multiset_eq(b)
}

pub fn context_concat(a: &ZoneContext, b: &ZoneContext) -> ZoneContext {
    a.concat(b)
}

pub fn context_subtract(a: &ZoneContext, b: &ZoneContext) -> Option<ZoneContext> {
    a.subtract(b)
}

/// `Γ ⊢ A`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sequent {
    pub antecedent: ZoneContext,
    pub succedent: Formula,
}

impl Sequent {
    pub fn new(antecedent: ZoneContext, succedent: Formula) -> Sequent {
        Sequent {
            antecedent,
            succedent,
        }
    }

    /// Equality up to permutation of the antecedent.
    pub fn equiv(&self, other: &Sequent) -> bool {
        self.succedent == other.succedent && self.antecedent.multiset_eq(&other.antecedent)
    }

    pub fn canonical(&self) -> Sequent {
        Sequent::new(self.antecedent.sorted(), self.succedent.clone())
    }

    /// Sum of formula sizes over the whole sequent.
    pub fn size(&self) -> usize {
        self.succedent.size() + self.antecedent.iter().map(|x| x.formula.size()).sum::<usize>()
    }

    pub fn formulas(&self) -> impl Iterator<Item = &Formula> {
        self.antecedent
            .iter()
            .map(|x| &x.formula)
            .chain(std::iter::once(&self.succedent))
    }
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.antecedent.is_empty() {
            write!(f, "|- {}", self.succedent)
        } else {
            write!(f, "{} |- {}", self.antecedent, self.succedent)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown zone `{zone}` at byte {offset}")]
    UnknownZone { zone: String, offset: usize },
}

impl ParseError {
    fn syntax(offset: usize, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            offset,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Star,
    Colon,
    Comma,
    Turnstile,
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            src: text.as_bytes(),
            pos: 0,
        }
    }

    /// Next token and its starting offset.
    fn next(&mut self) -> Result<(Tok, usize), ParseError> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = self.src.get(self.pos) else {
            return Ok((Tok::End, start));
        };
        let tok = match c {
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'*' => Tok::Star,
            b':' => Tok::Colon,
            b',' => Tok::Comma,
            b'|' => {
                if self.src.get(self.pos + 1) == Some(&b'-') {
                    self.pos += 2;
                    return Ok((Tok::Turnstile, start));
                }
                return Err(ParseError::syntax(start, "expected `|-`"));
            }
            c if c.is_ascii_alphanumeric() || c == b'_' => {
                while self
                    .src
                    .get(self.pos)
                    .is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'_')
                {
                    self.pos += 1;
                }
                let word = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                return Ok((Tok::Ident(word.to_string()), start));
            }
            _ => {
                return Err(ParseError::syntax(
                    start,
                    format!("unexpected character `{}`", char::from(c)),
                ))
            }
        };
        self.pos += 1;
        Ok((tok, start))
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    peeked: Option<(Tok, usize)>,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser {
            lexer: Lexer::new(text),
            peeked: None,
        }
    }

    fn peek(&mut self) -> Result<&(Tok, usize), ParseError> {
        if self.peeked.is_none() {
            self.peeked = Some(self.lexer.next()?);
        }
        Ok(self.peeked.as_ref().unwrap())
    }

    fn bump(&mut self) -> Result<(Tok, usize), ParseError> {
        self.peek()?;
        Ok(self.peeked.take().unwrap())
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<usize, ParseError> {
        let (tok, at) = self.bump()?;
        if tok == want {
            Ok(at)
        } else {
            Err(ParseError::syntax(at, format!("expected {what}")))
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let (tok, at) = self.bump()?;
        match tok {
            Tok::Ident(name) if name == "I" => Ok(Formula::Unit),
            Tok::Ident(name) => Ok(Formula::Atom(name)),
            Tok::LParen => {
                let left = self.formula()?;
                self.expect(Tok::Star, "`*`")?;
                let right = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Formula::tensor(left, right))
            }
            _ => Err(ParseError::syntax(at, "expected a formula")),
        }
    }

    fn zitem(&mut self) -> Result<(ZonedFormula, usize), ParseError> {
        let (tok, at) = self.bump()?;
        let Tok::Ident(name) = tok else {
            return Err(ParseError::syntax(at, "expected a zone"));
        };
        let zone = Zone::new(name).map_err(|e| ParseError::syntax(at, e.to_string()))?;
        self.expect(Tok::Colon, "`:`")?;
        let formula = self.formula()?;
        Ok((ZonedFormula::new(zone, formula), at))
    }

    fn sequent(&mut self) -> Result<(Sequent, Vec<usize>), ParseError> {
        let mut items = Vec::new();
        let mut offsets = Vec::new();
        if self.peek()?.0 != Tok::Turnstile {
            loop {
                let (item, at) = self.zitem()?;
                items.push(item);
                offsets.push(at);
                if self.peek()?.0 == Tok::Comma {
                    self.bump()?;
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::Turnstile, "`|-`")?;
        let succedent = self.formula()?;
        Ok((Sequent::new(ZoneContext(items), succedent), offsets))
    }

    fn end(&mut self) -> Result<(), ParseError> {
        let (tok, at) = self.bump()?;
        if tok == Tok::End {
            Ok(())
        } else {
            Err(ParseError::syntax(at, "trailing input"))
        }
    }
}

pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser::new(text);
    let f = p.formula()?;
    p.end()?;
    Ok(f)
}

pub fn print_formula(f: &Formula) -> String {
    f.to_string()
}

pub fn parse_sequent(text: &str) -> Result<Sequent, ParseError> {
    let mut p = Parser::new(text);
    let (s, _) = p.sequent()?;
    p.end()?;
    Ok(s)
}

/// Parses a sequent and rejects zones outside the signature.
pub fn parse_sequent_in(text: &str, sig: &SubexpSignature) -> Result<Sequent, ParseError> {
    let mut p = Parser::new(text);
    let (s, offsets) = p.sequent()?;
    p.end()?;
    for (item, at) in s.antecedent.iter().zip(offsets) {
        if !sig.has_zone(&item.zone) {
            return Err(ParseError::UnknownZone {
                zone: item.zone.to_string(),
                offset: at,
            });
        }
    }
    Ok(s)
}

pub fn print_sequent(s: &Sequent) -> String {
    s.to_string()
}

/// True when `name` can be written as an atom (a token other than `I`).
pub fn is_atom_name(name: &str) -> bool {
    is_token(name) && name != "I"
}
