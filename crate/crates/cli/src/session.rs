//! Line-oriented session files: ring and torus declarations, gradings,
//! automorphisms, homomorphisms, and the commands to run against them.
//!
//! The format is deliberately flat so that corpus files diff cleanly. A
//! `#` starts a comment. Declarations:
//!
//! ```text
//! ring A over QQ
//! vars x, y, y_inv
//! units y:y_inv
//! base x
//! relations x^2 - y^3 - 1; x*y - 1
//! asserts base_alg_closed, trdeg=1
//!
//! torus T rank 2 over QQ vars u, v
//! subalgebra S gens u=[1,0]*1 unit, v=[0,1]*1 base b=[-1,2]*1
//!
//! grading g weights 1, -1
//! auto M matrix [[1,1],[0,1]] scalars 1, 2
//!
//! hom F from A adjoin y to B adjoin z
//! map x -> x
//! inv x -> x
//! end
//!
//! cmd neutral A
//! ```
//!
//! `vars`/`units`/`base`/`relations`/`asserts` attach to the most recent
//! `ring`; `subalgebra` attaches to the most recent `torus`; `map`/`inv`
//! lines live between `hom` and `end`. Every name must be declared before
//! it is used by a `cmd`.

use num_bigint::BigInt;

/// Parse failure with the 1-based source line.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionError {
    pub line: usize,
    pub message: String,
}

impl SessionError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        SessionError { line, message: message.into() }
    }
}

impl std::fmt::Display for SessionError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for SessionError {}

type Result<T> = std::result::Result<T, SessionError>;

/// Coefficient domain named in a declaration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainTag {
    Rationals,
    Integers,
    PrimeField(u64),
}

impl DomainTag {
    fn parse(line: usize, word: &str) -> Result<Self> {
        match word {
            "QQ" => Ok(DomainTag::Rationals),
            "ZZ" => Ok(DomainTag::Integers),
            _ => {
                if let Some(p) = word.strip_prefix("FF") {
                    let p: u64 = p.parse().map_err(|_| {
                        SessionError::new(line, format!("invalid prime field '{word}'"))
                    })?;
                    return Ok(DomainTag::PrimeField(p));
                }
                Err(SessionError::new(line, format!("unknown domain '{word}' (QQ, ZZ, FF<p>)")))
            }
        }
    }

    #[cfg(test)]
    fn render(&self) -> String {
        match self {
            DomainTag::Rationals => "QQ".into(),
            DomainTag::Integers => "ZZ".into(),
            DomainTag::PrimeField(p) => format!("FF{p}"),
        }
    }
}

/// Presented algebra: generators, unit pairs, base generators, relations.
#[derive(Debug, Clone, PartialEq)]
pub struct RingDecl {
    pub name: String,
    pub domain: DomainTag,
    pub vars: Vec<String>,
    pub unit_pairs: Vec<(String, String)>,
    pub base: Vec<String>,
    pub relations: Vec<String>,
    pub base_alg_closed: bool,
    pub trdeg: Option<u64>,
    pub line: usize,
}

/// Ambient Laurent torus with named coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusDecl {
    pub name: String,
    pub rank: usize,
    pub domain: DomainTag,
    pub vars: Vec<String>,
    pub line: usize,
}

/// One monomial generator `name = coeff * y^expo`, optionally a unit.
#[derive(Debug, Clone, PartialEq)]
pub struct GenDecl {
    pub name: String,
    pub expo: Vec<BigInt>,
    pub coeff: String,
    pub unit: bool,
}

/// Monomial subalgebra of its enclosing torus.
#[derive(Debug, Clone, PartialEq)]
pub struct SubDecl {
    pub name: String,
    pub torus: String,
    pub gens: Vec<GenDecl>,
    pub base_gens: Vec<GenDecl>,
    pub line: usize,
}

/// Weight vector literal.
#[derive(Debug, Clone, PartialEq)]
pub struct GradingDecl {
    pub name: String,
    pub weights: Vec<BigInt>,
    pub line: usize,
}

/// Monomial automorphism literal: exponent matrix plus unit scalars.
#[derive(Debug, Clone, PartialEq)]
pub struct AutoDecl {
    pub name: String,
    pub matrix: Vec<Vec<BigInt>>,
    pub scalars: Vec<String>,
    pub line: usize,
}

/// Homomorphism of Laurent extensions between two presented rings.
#[derive(Debug, Clone, PartialEq)]
pub struct HomDecl {
    pub name: String,
    pub source: String,
    pub source_adjoin: Vec<String>,
    pub target: String,
    pub target_adjoin: Vec<String>,
    pub images: Vec<(String, String)>,
    pub inverses: Vec<(String, String)>,
    pub line: usize,
}

/// One operation, either from a `cmd` line or from command-line flags.
#[derive(Debug, Clone, PartialEq)]
pub enum Request {
    Units { object: String, expr: String },
    Grade { object: String, grading: String, expr: String },
    Gradings { ring: String },
    Neutral { ring: String },
    Auto { auto: String, object: String, expr: String, then: Option<String> },
    Reconstruct { hom: String },
    Normalize { algebra: String, grading: String, localize: Option<String> },
    Characterize { object: String },
    BgCancel { algebra: String, adjoin: usize, auto: String },
    Cancel { hom: Option<String>, source: Option<String>, target: Option<String>, adjoin: usize, auto: Option<String> },
}

impl Request {
    /// The subcommand name this request corresponds to.
    pub fn command(&self) -> &'static str {
        match self {
            Request::Units { .. } => "units",
            Request::Grade { .. } => "grade",
            Request::Gradings { .. } => "gradings",
            Request::Neutral { .. } => "neutral",
            Request::Auto { .. } => "auto",
            Request::Reconstruct { .. } => "reconstruct",
            Request::Normalize { .. } => "normalize",
            Request::Characterize { .. } => "characterize",
            Request::BgCancel { .. } => "bg-cancel",
            Request::Cancel { .. } => "cancel",
        }
    }
}

/// Command line from the file, with its source position.
#[derive(Debug, Clone, PartialEq)]
pub struct CmdDecl {
    pub request: Request,
    pub line: usize,
}

/// A parsed session file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SessionFile {
    pub rings: Vec<RingDecl>,
    pub tori: Vec<TorusDecl>,
    pub subalgebras: Vec<SubDecl>,
    pub gradings: Vec<GradingDecl>,
    pub autos: Vec<AutoDecl>,
    pub homs: Vec<HomDecl>,
    pub cmds: Vec<CmdDecl>,
}

impl SessionFile {
    pub fn ring(&self, name: &str) -> Option<&RingDecl> {
        self.rings.iter().find(|r| r.name == name)
    }

    pub fn torus(&self, name: &str) -> Option<&TorusDecl> {
        self.tori.iter().find(|t| t.name == name)
    }

    pub fn subalgebra(&self, name: &str) -> Option<&SubDecl> {
        self.subalgebras.iter().find(|s| s.name == name)
    }

    pub fn grading(&self, name: &str) -> Option<&GradingDecl> {
        self.gradings.iter().find(|g| g.name == name)
    }

    pub fn auto(&self, name: &str) -> Option<&AutoDecl> {
        self.autos.iter().find(|a| a.name == name)
    }

    pub fn hom(&self, name: &str) -> Option<&HomDecl> {
        self.homs.iter().find(|h| h.name == name)
    }

    fn all_names(&self) -> Vec<&str> {
        let mut names: Vec<&str> = Vec::new();
        names.extend(self.rings.iter().map(|r| r.name.as_str()));
        names.extend(self.tori.iter().map(|t| t.name.as_str()));
        names.extend(self.subalgebras.iter().map(|s| s.name.as_str()));
        names.extend(self.gradings.iter().map(|g| g.name.as_str()));
        names.extend(self.autos.iter().map(|a| a.name.as_str()));
        names.extend(self.homs.iter().map(|h| h.name.as_str()));
        names
    }

    /// Canonical rendering; parsing it back yields an equal session.
    #[cfg(test)]
    pub(crate) fn render(&self) -> String {
        let mut out = String::new();
        let gen_list = |gens: &[GenDecl]| {
            gens.iter()
                .map(|g| {
                    let expo = g
                        .expo
                        .iter()
                        .map(|e| e.to_string())
                        .collect::<Vec<_>>()
                        .join(",");
                    let unit = if g.unit { " unit" } else { "" };
                    format!("{}=[{}]*{}{}", g.name, expo, g.coeff, unit)
                })
                .collect::<Vec<_>>()
                .join(", ")
        };
        for r in &self.rings {
            out.push_str(&format!("ring {} over {}\n", r.name, r.domain.render()));
            if !r.vars.is_empty() {
                out.push_str(&format!("vars {}\n", r.vars.join(", ")));
            }
            if !r.unit_pairs.is_empty() {
                let pairs = r
                    .unit_pairs
                    .iter()
                    .map(|(a, b)| format!("{a}:{b}"))
                    .collect::<Vec<_>>()
                    .join(", ");
                out.push_str(&format!("units {pairs}\n"));
            }
            if !r.base.is_empty() {
                out.push_str(&format!("base {}\n", r.base.join(", ")));
            }
            if !r.relations.is_empty() {
                out.push_str(&format!("relations {}\n", r.relations.join("; ")));
            }
            let mut asserts = Vec::new();
            if r.base_alg_closed {
                asserts.push("base_alg_closed".to_string());
            }
            if let Some(t) = r.trdeg {
                asserts.push(format!("trdeg={t}"));
            }
            if !asserts.is_empty() {
                out.push_str(&format!("asserts {}\n", asserts.join(", ")));
            }
        }
        for t in &self.tori {
            out.push_str(&format!(
                "torus {} rank {} over {} vars {}\n",
                t.name,
                t.rank,
                t.domain.render(),
                t.vars.join(", ")
            ));
        }
        for s in &self.subalgebras {
            out.push_str(&format!("subalgebra {} gens {}", s.name, gen_list(&s.gens)));
            if !s.base_gens.is_empty() {
                out.push_str(&format!(" base {}", gen_list(&s.base_gens)));
            }
            out.push('\n');
        }
        for g in &self.gradings {
            let ws = g.weights.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(", ");
            out.push_str(&format!("grading {} weights {}\n", g.name, ws));
        }
        for a in &self.autos {
            let rows = a
                .matrix
                .iter()
                .map(|row| {
                    format!(
                        "[{}]",
                        row.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(",")
                    )
                })
                .collect::<Vec<_>>()
                .join(",");
            out.push_str(&format!(
                "auto {} matrix [{}] scalars {}\n",
                a.name,
                rows,
                a.scalars.join(", ")
            ));
        }
        for h in &self.homs {
            out.push_str(&format!(
                "hom {} from {} adjoin {} to {} adjoin {}\n",
                h.name,
                h.source,
                h.source_adjoin.join(", "),
                h.target,
                h.target_adjoin.join(", ")
            ));
            for (n, e) in &h.images {
                out.push_str(&format!("map {n} -> {e}\n"));
            }
            for (n, e) in &h.inverses {
                out.push_str(&format!("inv {n} -> {e}\n"));
            }
            out.push_str("end\n");
        }
        for c in &self.cmds {
            out.push_str(&format!("cmd {}\n", render_request(&c.request)));
        }
        out
    }
}

#[cfg(test)]
fn render_request(r: &Request) -> String {
    match r {
        Request::Units { object, expr } => format!("units {object} {expr}"),
        Request::Grade { object, grading, expr } => format!("grade {object} {grading} {expr}"),
        Request::Gradings { ring } => format!("gradings {ring}"),
        Request::Neutral { ring } => format!("neutral {ring}"),
        Request::Auto { auto, object, expr, then } => match then {
            Some(n) => format!("auto {auto} then {n} {object} {expr}"),
            None => format!("auto {auto} {object} {expr}"),
        },
        Request::Reconstruct { hom } => format!("reconstruct {hom}"),
        Request::Normalize { algebra, grading, localize } => match localize {
            Some(p) => format!("normalize {algebra} {grading} localize {p}"),
            None => format!("normalize {algebra} {grading}"),
        },
        Request::Characterize { object } => format!("characterize {object}"),
        Request::BgCancel { algebra, adjoin, auto } => {
            format!("bg-cancel {algebra} {adjoin} {auto}")
        }
        Request::Cancel { hom, source, target, adjoin, auto } => {
            let mut s = "cancel".to_string();
            if let Some(h) = hom {
                s.push_str(&format!(" hom {h}"));
            }
            if let (Some(a), Some(b), Some(m)) = (source, target, auto) {
                s.push_str(&format!(" monomial {a} {b} {adjoin} {m}"));
            }
            s
        }
    }
}

/// Splits on `sep` at bracket depth zero.
fn split_top_level(s: &str, sep: char) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, ch) in s.char_indices() {
        match ch {
            '[' => depth += 1,
            ']' => depth = depth.saturating_sub(1),
            c if c == sep && depth == 0 => {
                parts.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(s[start..].trim());
    parts
}

fn ident(line: usize, word: &str) -> Result<String> {
    let ok = !word.is_empty()
        && word.chars().next().unwrap().is_ascii_alphabetic()
        && word.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if !ok {
        return Err(SessionError::new(line, format!("invalid name '{word}'")));
    }
    Ok(word.to_string())
}

fn ident_list(line: usize, s: &str) -> Result<Vec<String>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    split_top_level(s, ',').into_iter().map(|w| ident(line, w)).collect()
}

fn int_list(line: usize, s: &str) -> Result<Vec<BigInt>> {
    if s.trim().is_empty() {
        return Err(SessionError::new(line, "empty integer list"));
    }
    split_top_level(s, ',')
        .into_iter()
        .map(|w| {
            w.parse::<BigInt>()
                .map_err(|_| SessionError::new(line, format!("invalid integer '{w}'")))
        })
        .collect()
}

/// `[1,0,-2]` -> the integer entries.
fn bracketed_ints(line: usize, s: &str) -> Result<Vec<BigInt>> {
    let inner = s
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| SessionError::new(line, format!("expected [..] exponent vector, found '{s}'")))?;
    int_list(line, inner)
}

/// `[[1,1],[0,1]]` -> the rows.
fn bracketed_matrix(line: usize, s: &str) -> Result<Vec<Vec<BigInt>>> {
    let inner = s
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| SessionError::new(line, format!("expected [[..],..] matrix, found '{s}'")))?;
    let mut rows = Vec::new();
    for part in split_top_level(inner, ',') {
        rows.push(bracketed_ints(line, part)?);
    }
    let cols = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != cols) {
        return Err(SessionError::new(line, "ragged matrix literal"));
    }
    Ok(rows)
}

/// `u=[1,0]*1 unit` -> one generator.
fn gen_decl(line: usize, s: &str) -> Result<GenDecl> {
    let (name, rest) = s
        .split_once('=')
        .ok_or_else(|| SessionError::new(line, format!("expected name=[..]*coeff, found '{s}'")))?;
    let name = ident(line, name.trim())?;
    let rest = rest.trim();
    let close = rest
        .find(']')
        .ok_or_else(|| SessionError::new(line, format!("missing ']' in generator '{name}'")))?;
    let expo = bracketed_ints(line, &rest[..=close])?;
    let tail = rest[close + 1..].trim();
    let tail = tail
        .strip_prefix('*')
        .ok_or_else(|| SessionError::new(line, format!("missing '*coeff' in generator '{name}'")))?
        .trim();
    let (coeff, unit) = match tail.strip_suffix("unit") {
        Some(c) => (c.trim(), true),
        None => (tail, false),
    };
    if coeff.is_empty() {
        return Err(SessionError::new(line, format!("empty coefficient in generator '{name}'")));
    }
    Ok(GenDecl { name, expo, coeff: coeff.to_string(), unit })
}

fn gen_list(line: usize, s: &str) -> Result<Vec<GenDecl>> {
    split_top_level(s, ',').into_iter().map(|p| gen_decl(line, p)).collect()
}

/// Consumes `keyword` from the front of `s`, returning the remainder.
fn expect_word<'a>(line: usize, s: &'a str, keyword: &str) -> Result<&'a str> {
    let s = s.trim_start();
    match s.strip_prefix(keyword) {
        Some(rest) if rest.is_empty() || rest.starts_with(char::is_whitespace) => Ok(rest.trim_start()),
        _ => Err(SessionError::new(line, format!("expected '{keyword}'"))),
    }
}

/// Takes the next whitespace-delimited word.
fn next_word<'a>(line: usize, s: &'a str, what: &str) -> Result<(&'a str, &'a str)> {
    let s = s.trim_start();
    if s.is_empty() {
        return Err(SessionError::new(line, format!("expected {what}")));
    }
    let end = s.find(char::is_whitespace).unwrap_or(s.len());
    Ok((&s[..end], s[end..].trim_start()))
}

fn parse_cmd(line: usize, rest: &str) -> Result<Request> {
    let (verb, rest) = next_word(line, rest, "a command name")?;
    let req = match verb {
        "units" => {
            let (object, expr) = next_word(line, rest, "an object name")?;
            if expr.is_empty() {
                return Err(SessionError::new(line, "expected an expression"));
            }
            Request::Units { object: ident(line, object)?, expr: expr.to_string() }
        }
        "grade" => {
            let (object, rest) = next_word(line, rest, "an object name")?;
            let (grading, expr) = next_word(line, rest, "a grading name")?;
            if expr.is_empty() {
                return Err(SessionError::new(line, "expected an expression"));
            }
            Request::Grade {
                object: ident(line, object)?,
                grading: ident(line, grading)?,
                expr: expr.to_string(),
            }
        }
        "gradings" => Request::Gradings { ring: ident(line, rest.trim())? },
        "neutral" => Request::Neutral { ring: ident(line, rest.trim())? },
        "auto" => {
            let (auto, rest) = next_word(line, rest, "an automorphism name")?;
            let (then, rest) = if let Ok(tail) = expect_word(line, rest, "then") {
                let (second, tail) = next_word(line, tail, "an automorphism name")?;
                (Some(ident(line, second)?), tail)
            } else {
                (None, rest)
            };
            let (object, expr) = next_word(line, rest, "an object name")?;
            if expr.is_empty() {
                return Err(SessionError::new(line, "expected an expression"));
            }
            Request::Auto {
                auto: ident(line, auto)?,
                object: ident(line, object)?,
                expr: expr.to_string(),
                then,
            }
        }
        "reconstruct" => Request::Reconstruct { hom: ident(line, rest.trim())? },
        "normalize" => {
            let (algebra, rest) = next_word(line, rest, "an algebra name")?;
            let (grading, rest) = next_word(line, rest, "a grading name")?;
            let localize = if rest.is_empty() {
                None
            } else {
                let tail = expect_word(line, rest, "localize")?;
                Some(ident(line, tail.trim())?)
            };
            Request::Normalize {
                algebra: ident(line, algebra)?,
                grading: ident(line, grading)?,
                localize,
            }
        }
        "characterize" => Request::Characterize { object: ident(line, rest.trim())? },
        "bg-cancel" => {
            let (algebra, rest) = next_word(line, rest, "an algebra name")?;
            let (n, rest) = next_word(line, rest, "an adjoined count")?;
            let adjoin: usize = n
                .parse()
                .map_err(|_| SessionError::new(line, format!("invalid adjoined count '{n}'")))?;
            Request::BgCancel {
                algebra: ident(line, algebra)?,
                adjoin,
                auto: ident(line, rest.trim())?,
            }
        }
        "cancel" => {
            let mut hom = None;
            let mut source = None;
            let mut target = None;
            let mut adjoin = 0usize;
            let mut auto = None;
            let mut rest = rest;
            while !rest.is_empty() {
                let (word, tail) = next_word(line, rest, "'hom' or 'monomial'")?;
                match word {
                    "hom" => {
                        let (name, tail) = next_word(line, tail, "a homomorphism name")?;
                        hom = Some(ident(line, name)?);
                        rest = tail;
                    }
                    "monomial" => {
                        let (a, tail) = next_word(line, tail, "a source algebra")?;
                        let (b, tail) = next_word(line, tail, "a target algebra")?;
                        let (n, tail) = next_word(line, tail, "an adjoined count")?;
                        let (m, tail) = next_word(line, tail, "an automorphism name")?;
                        source = Some(ident(line, a)?);
                        target = Some(ident(line, b)?);
                        adjoin = n.parse().map_err(|_| {
                            SessionError::new(line, format!("invalid adjoined count '{n}'"))
                        })?;
                        auto = Some(ident(line, m)?);
                        rest = tail;
                    }
                    other => {
                        return Err(SessionError::new(
                            line,
                            format!("expected 'hom' or 'monomial', found '{other}'"),
                        ))
                    }
                }
            }
            if hom.is_none() && auto.is_none() {
                return Err(SessionError::new(line, "cancel needs 'hom' or 'monomial' data"));
            }
            Request::Cancel { hom, source, target, adjoin, auto }
        }
        other => return Err(SessionError::new(line, format!("unknown command '{other}'"))),
    };
    Ok(req)
}

/// Parses a session file.
pub fn parse_session(src: &str) -> Result<SessionFile> {
    let mut file = SessionFile::default();
    let mut open_hom: Option<HomDecl> = None;
    for (idx, raw) in src.lines().enumerate() {
        let line = idx + 1;
        let text = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        let text = text.trim();
        if text.is_empty() {
            continue;
        }
        let (directive, rest) = next_word(line, text, "a directive")?;

        if let Some(hom) = open_hom.as_mut() {
            match directive {
                "map" | "inv" => {
                    let (name, rest) = next_word(line, rest, "a symbol name")?;
                    let expr = expect_word(line, rest, "->")?;
                    if expr.is_empty() {
                        return Err(SessionError::new(line, "expected an expression after '->'"));
                    }
                    let entry = (ident(line, name)?, expr.to_string());
                    if directive == "map" {
                        hom.images.push(entry);
                    } else {
                        hom.inverses.push(entry);
                    }
                }
                "end" => {
                    file.homs.push(open_hom.take().unwrap());
                }
                other => {
                    return Err(SessionError::new(
                        line,
                        format!("expected 'map', 'inv' or 'end' inside hom block, found '{other}'"),
                    ))
                }
            }
            continue;
        }

        match directive {
            "ring" => {
                let (name, rest) = next_word(line, rest, "a ring name")?;
                let rest = expect_word(line, rest, "over")?;
                let (dom, rest) = next_word(line, rest, "a domain")?;
                if !rest.is_empty() {
                    return Err(SessionError::new(line, "unexpected trailing text"));
                }
                file.rings.push(RingDecl {
                    name: ident(line, name)?,
                    domain: DomainTag::parse(line, dom)?,
                    vars: Vec::new(),
                    unit_pairs: Vec::new(),
                    base: Vec::new(),
                    relations: Vec::new(),
                    base_alg_closed: false,
                    trdeg: None,
                    line,
                });
            }
            "vars" => {
                let ring = last_ring(&mut file, line)?;
                ring.vars = ident_list(line, rest)?;
            }
            "units" => {
                let ring = last_ring(&mut file, line)?;
                for pair in split_top_level(rest, ',') {
                    let (a, b) = pair.split_once(':').ok_or_else(|| {
                        SessionError::new(line, format!("expected gen:gen_inv, found '{pair}'"))
                    })?;
                    ring.unit_pairs.push((ident(line, a.trim())?, ident(line, b.trim())?));
                }
            }
            "base" => {
                let ring = last_ring(&mut file, line)?;
                ring.base = ident_list(line, rest)?;
            }
            "relations" => {
                let ring = last_ring(&mut file, line)?;
                for rel in rest.split(';') {
                    let rel = rel.trim();
                    if rel.is_empty() {
                        return Err(SessionError::new(line, "empty relation"));
                    }
                    ring.relations.push(rel.to_string());
                }
            }
            "asserts" => {
                let ring = last_ring(&mut file, line)?;
                for flag in split_top_level(rest, ',') {
                    if flag == "base_alg_closed" {
                        ring.base_alg_closed = true;
                    } else if let Some(v) = flag.strip_prefix("trdeg=") {
                        let t: u64 = v.trim().parse().map_err(|_| {
                            SessionError::new(line, format!("invalid trdeg '{v}'"))
                        })?;
                        ring.trdeg = Some(t);
                    } else {
                        return Err(SessionError::new(
                            line,
                            format!("unknown assertion '{flag}' (base_alg_closed, trdeg=<n>)"),
                        ));
                    }
                }
            }
            "torus" => {
                let (name, rest) = next_word(line, rest, "a torus name")?;
                let rest = expect_word(line, rest, "rank")?;
                let (rank, rest) = next_word(line, rest, "a rank")?;
                let rank: usize = rank
                    .parse()
                    .map_err(|_| SessionError::new(line, format!("invalid rank '{rank}'")))?;
                let rest = expect_word(line, rest, "over")?;
                let (dom, rest) = next_word(line, rest, "a domain")?;
                let vars = if rest.is_empty() {
                    (1..=rank).map(|i| format!("y{i}")).collect()
                } else {
                    let tail = expect_word(line, rest, "vars")?;
                    ident_list(line, tail)?
                };
                if vars.len() != rank {
                    return Err(SessionError::new(
                        line,
                        format!("torus rank {rank} but {} coordinate names", vars.len()),
                    ));
                }
                file.tori.push(TorusDecl {
                    name: ident(line, name)?,
                    rank,
                    domain: DomainTag::parse(line, dom)?,
                    vars,
                    line,
                });
            }
            "subalgebra" => {
                let (name, rest) = next_word(line, rest, "a subalgebra name")?;
                let torus = file
                    .tori
                    .last()
                    .ok_or_else(|| SessionError::new(line, "no torus declared yet"))?
                    .name
                    .clone();
                let rest = expect_word(line, rest, "gens")?;
                let (gens_part, base_part) = match rest.find(" base ") {
                    Some(i) => (&rest[..i], Some(&rest[i + 6..])),
                    None => (rest, None),
                };
                let gens = gen_list(line, gens_part)?;
                let base_gens = match base_part {
                    Some(p) => gen_list(line, p)?,
                    None => Vec::new(),
                };
                file.subalgebras.push(SubDecl {
                    name: ident(line, name)?,
                    torus,
                    gens,
                    base_gens,
                    line,
                });
            }
            "grading" => {
                let (name, rest) = next_word(line, rest, "a grading name")?;
                let rest = expect_word(line, rest, "weights")?;
                file.gradings.push(GradingDecl {
                    name: ident(line, name)?,
                    weights: int_list(line, rest)?,
                    line,
                });
            }
            "auto" => {
                let (name, rest) = next_word(line, rest, "an automorphism name")?;
                let rest = expect_word(line, rest, "matrix")?;
                let (mat, rest) = next_word(line, rest, "a matrix literal")?;
                let matrix = bracketed_matrix(line, mat)?;
                let rest = expect_word(line, rest, "scalars")?;
                let scalars: Vec<String> = split_top_level(rest, ',')
                    .into_iter()
                    .map(|s| s.to_string())
                    .collect();
                if scalars.iter().any(|s| s.is_empty()) {
                    return Err(SessionError::new(line, "empty scalar"));
                }
                file.autos.push(AutoDecl { name: ident(line, name)?, matrix, scalars, line });
            }
            "hom" => {
                let (name, rest) = next_word(line, rest, "a homomorphism name")?;
                let rest = expect_word(line, rest, "from")?;
                let (source, rest) = next_word(line, rest, "a source ring")?;
                let rest = expect_word(line, rest, "adjoin")?;
                let to_pos = rest.find(" to ").ok_or_else(|| {
                    SessionError::new(line, "expected 'to <ring> adjoin <names>'")
                })?;
                let source_adjoin = ident_list(line, &rest[..to_pos])?;
                let rest = &rest[to_pos + 4..];
                let (target, rest) = next_word(line, rest, "a target ring")?;
                let rest = expect_word(line, rest, "adjoin")?;
                let target_adjoin = ident_list(line, rest)?;
                if source_adjoin.is_empty() || target_adjoin.is_empty() {
                    return Err(SessionError::new(line, "adjoin lists must be nonempty"));
                }
                open_hom = Some(HomDecl {
                    name: ident(line, name)?,
                    source: ident(line, source)?,
                    source_adjoin,
                    target: ident(line, target)?,
                    target_adjoin,
                    images: Vec::new(),
                    inverses: Vec::new(),
                    line,
                });
            }
            "cmd" => {
                file.cmds.push(CmdDecl { request: parse_cmd(line, rest)?, line });
            }
            other => {
                return Err(SessionError::new(line, format!("unknown directive '{other}'")));
            }
        }
    }
    if let Some(h) = open_hom {
        return Err(SessionError::new(h.line, format!("hom '{}' is missing its 'end'", h.name)));
    }
    let names = file.all_names();
    for (i, n) in names.iter().enumerate() {
        if names[..i].contains(n) {
            return Err(SessionError::new(0, format!("duplicate declaration '{n}'")));
        }
    }
    Ok(file)
}

fn last_ring<'a>(file: &'a mut SessionFile, line: usize) -> Result<&'a mut RingDecl> {
    file.rings
        .last_mut()
        .ok_or_else(|| SessionError::new(line, "no ring declared yet"))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# presented algebra with a unit pair
ring A over QQ
vars x, y, y_inv
units y:y_inv
relations x^2 - y^3 - 1
asserts base_alg_closed, trdeg=1

torus T rank 2 over QQ vars u, v
subalgebra S gens a=[1,0]*1 unit, b=[0,1]*1 base c=[-1,2]*1

grading g weights 1, -1
auto M matrix [[1,1],[0,1]] scalars 1, 2

hom F from A adjoin w to A adjoin w
map x -> x
inv x -> x
end

cmd neutral A
cmd normalize S g
cmd cancel monomial S S 1 M
";

    #[test]
    fn parses_every_declaration_kind() {
        let f = parse_session(SAMPLE).unwrap();
        assert_eq!(f.rings.len(), 1);
        assert_eq!(f.rings[0].vars, vec!["x", "y", "y_inv"]);
        assert_eq!(f.rings[0].unit_pairs, vec![("y".to_string(), "y_inv".to_string())]);
        assert_eq!(f.rings[0].trdeg, Some(1));
        assert_eq!(f.tori[0].vars, vec!["u", "v"]);
        assert_eq!(f.subalgebras[0].gens.len(), 2);
        assert!(f.subalgebras[0].gens[0].unit);
        assert_eq!(f.subalgebras[0].base_gens.len(), 1);
        assert_eq!(f.subalgebras[0].base_gens[0].expo, vec![BigInt::from(-1), BigInt::from(2)]);
        assert_eq!(f.gradings[0].weights.len(), 2);
        assert_eq!(f.autos[0].matrix.len(), 2);
        assert_eq!(f.homs[0].images.len(), 1);
        assert_eq!(f.cmds.len(), 3);
    }

    #[test]
    fn print_then_parse_round_trips() {
        // Source positions shift when blank lines are dropped, so the law is
        // that the canonical print is a fixed point of print-then-parse.
        let f = parse_session(SAMPLE).unwrap();
        let printed = f.render();
        let again = parse_session(&printed).unwrap();
        assert_eq!(printed, again.render());
    }

    #[test]
    fn errors_carry_the_line_number() {
        let err = parse_session("ring A over QQ\nvars x\nbogus y\n").unwrap_err();
        assert_eq!(err.line, 3);
        assert!(err.message.contains("bogus"));
    }

    #[test]
    fn unterminated_hom_blocks_are_rejected() {
        let src = "ring A over QQ\nvars x\nhom F from A adjoin y to A adjoin z\nmap x -> x\n";
        let err = parse_session(src).unwrap_err();
        assert!(err.message.contains("missing its 'end'"));
    }

    #[test]
    fn duplicate_names_are_rejected() {
        let src = "ring A over QQ\nvars x\ngrading A weights 1\n";
        let err = parse_session(src).unwrap_err();
        assert!(err.message.contains("duplicate"));
    }

    #[test]
    fn empty_files_parse_to_an_empty_session() {
        let f = parse_session("# nothing here\n\n").unwrap();
        assert_eq!(f, SessionFile::default());
    }
}
