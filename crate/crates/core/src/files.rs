//! Text formats: discipline files, derivation files, bindings files.

use std::fmt::Write as _;

use thiserror::Error;

use crate::arch::eval::{Binding, BlockDef, Bindings};
use crate::calculus::{fragment_closure_check, Derivation, FragmentViolation, RuleId};
use crate::signature::{BlockDecl, CtxSigEntry, DisciplineSpec, SignatureError, StructuralFamily, SubexpSignature, Zone, ZonePreorder};
use crate::syntax::{parse_formula, parse_sequent, parse_sequent_in, ParseError, Sequent};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FileError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("line {line}: {source}")]
    Zone { line: usize, source: SignatureError },
    #[error("at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("in {text:?}: {source}")]
    Sequent { text: String, source: ParseError },
    #[error("{0}")]
    Fragment(FragmentViolation),
}

fn line_err(line: usize, message: impl Into<String>) -> FileError {
    FileError::Line {
        line,
        message: message.into(),
    }
}

/// Meaningful lines with their 1-based numbers; `#` starts a comment line.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

// ---- disciplines ----

fn user_zone(line: usize, id: &str) -> Result<Zone, FileError> {
    Zone::new(id).map_err(|source| FileError::Zone { line, source })
}

fn ctxsig(line: usize, text: &str) -> Result<Vec<CtxSigEntry>, FileError> {
    let text = text.trim();
    if text == "()" {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|entry| {
            let (z, c) = entry
                .split_once(':')
                .ok_or_else(|| line_err(line, format!("expected <zone>:<carrier>, found `{}`", entry.trim())))?;
            let (z, c) = (z.trim(), c.trim());
            let zone = if z == "o" { Zone::output() } else { user_zone(line, z)? };
            if !crate::signature::is_token(c) {
                return Err(line_err(line, format!("malformed carrier name `{c}`")));
            }
            Ok(CtxSigEntry {
                zone,
                carrier: c.to_string(),
            })
        })
        .collect()
}

pub fn parse_discipline(text: &str) -> Result<DisciplineSpec, FileError> {
    let mut zones: Vec<Zone> = Vec::new();
    let mut edges = Vec::new();
    let mut family = StructuralFamily::default();
    let mut blocks: Vec<BlockDecl> = Vec::new();
    for (n, l) in lines(text) {
        let (head, rest) = l.split_once(char::is_whitespace).unwrap_or((l, ""));
        let args: Vec<&str> = rest.split_whitespace().collect();
        let one = || -> Result<Zone, FileError> {
            match args.as_slice() {
                [z] => user_zone(n, z),
                _ => Err(line_err(n, format!("`{head}` takes one zone"))),
            }
        };
        match head {
            "zone" => {
                let z = one()?;
                if zones.contains(&z) {
                    return Err(FileError::Zone {
                        line: n,
                        source: SignatureError::DuplicateZone(z.to_string()),
                    });
                }
                zones.push(z);
            }
            "leq" => match args.as_slice() {
                [a, b] => edges.push((user_zone(n, a)?, user_zone(n, b)?)),
                _ => return Err(line_err(n, "`leq` takes two zones")),
            },
            "discard" => {
                family.discard_zones.insert(one()?);
            }
            "diagonal" => {
                family.diagonal_zones.insert(one()?);
            }
            "block" => {
                let (name, sig) = rest
                    .split_once(':')
                    .ok_or_else(|| line_err(n, "expected `block <name> : <ctxsig> -> <ctxsig>`"))?;
                let name = name.trim();
                if !crate::signature::is_token(name) {
                    return Err(line_err(n, format!("malformed block name `{name}`")));
                }
                let (dom, cod) = sig.split_once("->").ok_or_else(|| line_err(n, "block signature needs `->`"))?;
                if blocks.iter().any(|b| b.name == name) {
                    return Err(line_err(n, format!("duplicate block `{name}`")));
                }
                blocks.push(BlockDecl {
                    name: name.to_string(),
                    dom: ctxsig(n, dom)?,
                    cod: ctxsig(n, cod)?,
                });
            }
            other => return Err(line_err(n, format!("unknown declaration `{other}`"))),
        }
    }
    let preorder = ZonePreorder::close(zones, &edges).map_err(|source| FileError::Zone { line: 0, source })?;
    let mut spec = DisciplineSpec::new(preorder, family);
    spec.blocks = blocks;
    Ok(spec)
}

pub fn print_discipline(spec: &DisciplineSpec) -> String {
    let mut s = String::new();
    for z in spec.preorder.zones() {
        let _ = writeln!(s, "zone {z}");
    }
    for (a, b) in spec.preorder.strict_pairs() {
        let _ = writeln!(s, "leq {a} {b}");
    }
    for z in &spec.family.discard_zones {
        let _ = writeln!(s, "discard {z}");
    }
    for z in &spec.family.diagonal_zones {
        let _ = writeln!(s, "diagonal {z}");
    }
    let sig = |es: &[CtxSigEntry]| {
        if es.is_empty() {
            "()".to_string()
        } else {
            es.iter().map(|e| format!("{}:{}", e.zone, e.carrier)).collect::<Vec<_>>().join(", ")
        }
    };
    for b in &spec.blocks {
        let _ = writeln!(s, "block {} : {} -> {}", b.name, sig(&b.dom), sig(&b.cod));
    }
    s
}

// ---- derivations ----

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Open,
    Close,
    Str(String),
    Word(String),
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, FileError> {
    let b = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        match c {
            b';' => {
                while i < b.len() && b[i] != b'\n' {
                    i += 1;
                }
            }
            b'#' if out.is_empty() || text[..i].ends_with('\n') => {
                while i < b.len() && b[i] != b'\n' {
                    i += 1;
                }
            }
            c if c.is_ascii_whitespace() => i += 1,
            b'(' => {
                out.push((i, Tok::Open));
                i += 1;
            }
            b')' => {
                out.push((i, Tok::Close));
                i += 1;
            }
            b'"' => {
                let start = i;
                i += 1;
                let mut s = String::new();
                loop {
                    match text[i..].chars().next() {
                        None => {
                            return Err(FileError::Syntax {
                                offset: start,
                                message: "unterminated string".into(),
                            })
                        }
                        Some('"') => {
                            i += 1;
                            break;
                        }
                        Some(ch) => {
                            s.push(ch);
                            i += ch.len_utf8();
                        }
                    }
                }
                out.push((start, Tok::Str(s)));
            }
            _ => {
                let start = i;
                while i < b.len() && !b[i].is_ascii_whitespace() && !matches!(b[i], b'(' | b')' | b'"') {
                    i += 1;
                }
                out.push((start, Tok::Word(text[start..i].to_string())));
            }
        }
    }
    Ok(out)
}

/// Connectives from outside the tensorial fragment.
const FOREIGN: [&str; 11] = ["-o", "⊸", "&", "+", "⊕", "⅋", "!", "?", "->", "|", "\\/"];

struct DerivParser<'a> {
    toks: Vec<(usize, Tok)>,
    i: usize,
    sig: Option<&'a SubexpSignature>,
    end: usize,
}

impl DerivParser<'_> {
    fn offset(&self) -> usize {
        self.toks.get(self.i).map_or(self.end, |t| t.0)
    }

    fn syntax(&self, message: impl Into<String>) -> FileError {
        FileError::Syntax {
            offset: self.offset(),
            message: message.into(),
        }
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.i).map(|t| t.1.clone());
        self.i += 1;
        t
    }

    fn string(&mut self, what: &str, path: &[usize]) -> Result<String, FileError> {
        match self.next() {
            Some(Tok::Str(s)) => {
                let probe = s.replace("|-", "");
                if let Some(c) = FOREIGN.iter().find(|c| probe.contains(**c)) {
                    return Err(FileError::Fragment(FragmentViolation {
                        path: path.to_vec(),
                        reason: format!("foreign connective `{c}` in {s:?}"),
                    }));
                }
                Ok(s)
            }
            _ => {
                self.i -= 1;
                Err(self.syntax(format!("expected quoted {what}")))
            }
        }
    }

    fn sequent(&mut self, path: &[usize]) -> Result<Sequent, FileError> {
        let text = self.string("sequent", path)?;
        let parsed = match self.sig {
            Some(sig) => parse_sequent_in(&text, sig),
            None => parse_sequent(&text),
        };
        parsed.map_err(|source| FileError::Sequent { text, source })
    }

    fn node(&mut self, path: &mut Vec<usize>) -> Result<Derivation, FileError> {
        if self.next() != Some(Tok::Open) {
            self.i -= 1;
            return Err(self.syntax("expected `(`"));
        }
        let head = match self.next() {
            Some(Tok::Word(w)) => w,
            _ => {
                self.i -= 1;
                return Err(self.syntax("expected rule token"));
            }
        };
        let zone_of = |s: &str| -> Result<Zone, FileError> {
            Zone::new(s).map_err(|e| FileError::Fragment(FragmentViolation {
                path: path.clone(),
                reason: format!("bad zone in rule token `{head}`: {e}"),
            }))
        };
        let rule = match head.as_str() {
            "ax" => RuleId::Ax,
            "ir" => RuleId::UnitR,
            "tr" => RuleId::TensorR,
            "tl" => RuleId::TensorL,
            "il" => RuleId::UnitL,
            "cut" => {
                let zone = match self.next() {
                    Some(Tok::Word(w)) => zone_of(&w)?,
                    _ => {
                        self.i -= 1;
                        return Err(self.syntax("expected cut zone"));
                    }
                };
                let text = self.string("cut formula", path)?;
                let formula = parse_formula(&text).map_err(|source| FileError::Sequent { text, source })?;
                if let Some(sig) = self.sig {
                    if !sig.has_zone(&zone) {
                        return Err(FileError::Sequent {
                            text: zone.to_string(),
                            source: ParseError::UnknownZone {
                                zone: zone.to_string(),
                                offset: 0,
                            },
                        });
                    }
                }
                RuleId::Cut { zone, formula }
            }
            w if w.starts_with("w.") => RuleId::Weaken(zone_of(&w[2..])?),
            w if w.starts_with("c.") => RuleId::Contract(zone_of(&w[2..])?),
            other => {
                return Err(FileError::Fragment(FragmentViolation {
                    path: path.clone(),
                    reason: format!("unknown rule token `{other}`"),
                }))
            }
        };
        let conclusion = self.sequent(path)?;
        let mut premises = Vec::new();
        loop {
            match self.toks.get(self.i).map(|t| &t.1) {
                Some(Tok::Close) => {
                    self.i += 1;
                    break;
                }
                Some(Tok::Open) => {
                    path.push(premises.len());
                    premises.push(self.node(path)?);
                    path.pop();
                }
                _ => return Err(self.syntax("expected `(` or `)`")),
            }
        }
        Ok(Derivation::new(conclusion, rule, premises))
    }
}

/// Parses a derivation file. With a signature, sequent zones must belong
/// to it. Unknown rule tokens, foreign connectives and wrong premise counts
/// are reported as fragment violations.
pub fn parse_derivation(text: &str, sig: Option<&SubexpSignature>) -> Result<Derivation, FileError> {
    let mut p = DerivParser {
        toks: tokenize(text)?,
        i: 0,
        sig,
        end: text.len(),
    };
    let d = p.node(&mut Vec::new())?;
    if p.i < p.toks.len() {
        return Err(p.syntax("trailing input after derivation"));
    }
    fragment_closure_check(&d).map_err(FileError::Fragment)?;
    Ok(d)
}

pub fn print_derivation(d: &Derivation) -> String {
    let mut s = String::new();
    write_node(d, 0, &mut s);
    s.push('\n');
    s
}

fn write_node(d: &Derivation, indent: usize, s: &mut String) {
    let pad = "  ".repeat(indent);
    match &d.rule {
        RuleId::Cut { zone, formula } => {
            let _ = write!(s, "{pad}(cut {zone} \"{formula}\" \"{}\"", d.conclusion);
        }
        r => {
            let _ = write!(s, "{pad}({} \"{}\"", r.token(), d.conclusion);
        }
    }
    for p in &d.premises {
        s.push('\n');
        write_node(p, indent + 1, s);
    }
    s.push(')');
}

/// A derivation, or a sequential wiring of declared blocks
/// (`wire <block> <block> ...`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Program {
    Derivation(Derivation),
    Wiring(Vec<String>),
}

pub fn parse_program(text: &str, sig: Option<&SubexpSignature>) -> Result<Program, FileError> {
    let mut meaningful = lines(text).filter(|(_, l)| !l.starts_with(';'));
    if let Some((n, first)) = meaningful.next() {
        if let Some(rest) = first.strip_prefix("wire") {
            if rest.is_empty() || rest.starts_with(char::is_whitespace) {
                if let Some((m, _)) = meaningful.next() {
                    return Err(line_err(m, "a wiring file holds a single `wire` line"));
                }
                let names: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
                if names.is_empty() {
                    return Err(line_err(n, "`wire` needs at least one block"));
                }
                return Ok(Program::Wiring(names));
            }
        }
    }
    parse_derivation(text, sig).map(Program::Derivation)
}

// ---- bindings ----

fn number(line: usize, s: &str) -> Result<usize, FileError> {
    s.parse().map_err(|_| line_err(line, format!("expected a number, found `{s}`")))
}

pub fn parse_bindings(text: &str) -> Result<Bindings, FileError> {
    let mut b = Bindings::default();
    for (n, l) in lines(text) {
        let words: Vec<&str> = l.split_whitespace().collect();
        match words.as_slice() {
            ["atom", name, "size", k] => {
                b.atoms.insert(name.to_string(), number(n, k)?);
            }
            ["object", name, "size", k] => {
                b.objects.insert(name.to_string(), number(n, k)?);
            }
            ["blockdef", name, "param", k, "table", rest @ ..] => {
                let joined = rest.join(" ");
                let inner = joined.trim().trim_start_matches('[').trim_end_matches(']');
                let table = inner
                    .split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|s| !s.is_empty())
                    .map(|s| number(n, s))
                    .collect::<Result<Vec<_>, _>>()?;
                b.blockdefs.insert(
                    name.to_string(),
                    BlockDef {
                        param: number(n, k)?,
                        table,
                    },
                );
            }
            ["bind", gen, def, "param-element", i] => {
                b.binds.insert(
                    gen.to_string(),
                    Binding {
                        def: def.to_string(),
                        element: number(n, i)?,
                    },
                );
            }
            _ => return Err(line_err(n, format!("unrecognised bindings line `{l}`"))),
        }
    }
    Ok(b)
}

pub fn print_bindings(b: &Bindings) -> String {
    let mut s = String::new();
    for (name, k) in &b.atoms {
        let _ = writeln!(s, "atom {name} size {k}");
    }
    for (name, k) in &b.objects {
        let _ = writeln!(s, "object {name} size {k}");
    }
    for (name, def) in &b.blockdefs {
        let table: Vec<String> = def.table.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(s, "blockdef {name} param {} table {}", def.param, table.join(" "));
    }
    for (gen, bind) in &b.binds {
        let _ = writeln!(s, "bind {gen} {} param-element {}", bind.def, bind.element);
    }
    s
}
