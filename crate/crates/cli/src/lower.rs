//! Turns session declarations into core objects, and carries the
//! command-line error classification: session errors (unreadable files,
//! unknown names, bad expressions) exit with 3, hypothesis failures with 2,
//! and every other computational rejection with 1.

use laurel_core::algebra::{
    AlgebraPresentation, AssertedFlags, LocalizableDomain, MonoGen, MonomialSubalgebra,
};
use laurel_core::automorphism::MonomialAutomorphism;
use laurel_core::domain::CoeffDomain;
use laurel_core::hom::{LaurentExtension, LaurentHom};
use laurel_core::parse::parse_poly;
use laurel_core::{ExponentVector, IntMatrix, LaurentPoly};

use crate::session::{
    AutoDecl, DomainTag, GenDecl, GradingDecl, HomDecl, RingDecl, SessionFile, SubDecl, TorusDecl,
};

/// Failure of a command, split by exit-code class.
#[derive(Debug)]
pub enum CliError {
    /// The file or flags could not be interpreted (exit 3).
    Session(String),
    /// The computation rejected the data (exit 2 for hypothesis failures,
    /// exit 1 otherwise).
    Core(laurel_core::Error),
}

impl CliError {
    pub fn session(message: impl Into<String>) -> Self {
        CliError::Session(message.into())
    }

    /// Process exit code for this failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Session(_) => 3,
            CliError::Core(e) => {
                if e.is_hypothesis_failure() {
                    2
                } else {
                    1
                }
            }
        }
    }

    /// Stable machine-readable error class.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Session(_) => "SessionError",
            CliError::Core(e) => e.kind(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Session(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<laurel_core::Error> for CliError {
    fn from(e: laurel_core::Error) -> Self {
        CliError::Core(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Parses an expression over the given variable names.
pub fn parse_in<D: CoeffDomain>(d: &D, names: &[String], src: &str) -> Result<LaurentPoly<D>> {
    parse_poly(src, names, d).map_err(|e| CliError::session(format!("in '{src}': {e}")))
}

/// Parses a constant of the coefficient domain (no variables allowed).
pub fn parse_constant<D: CoeffDomain>(d: &D, src: &str) -> Result<D::Elem> {
    let p: LaurentPoly<D> = parse_in(d, &[], src)?;
    let c = p.terms().next().map(|(_, c)| c.clone());
    Ok(c.unwrap_or_else(|| d.zero()))
}

/// Presented algebra from a `ring` declaration.
pub fn lower_presentation<D: LocalizableDomain>(
    d: &D,
    decl: &RingDecl,
) -> Result<AlgebraPresentation<D>> {
    if decl.vars.is_empty() {
        return Err(CliError::session(format!("ring '{}' declares no vars", decl.name)));
    }
    let idx = |n: &str| {
        decl.vars.iter().position(|v| v == n).ok_or_else(|| {
            CliError::session(format!("ring '{}' has no generator '{n}'", decl.name))
        })
    };
    let mut unit_pairs = Vec::new();
    for (a, b) in &decl.unit_pairs {
        unit_pairs.push((idx(a)?, idx(b)?));
    }
    let mut in_base = Vec::new();
    for b in &decl.base {
        in_base.push(idx(b)?);
    }
    let mut relations = Vec::new();
    for r in &decl.relations {
        relations.push(parse_in(d, &decl.vars, r)?);
    }
    let asserted = AssertedFlags { base_alg_closed: decl.base_alg_closed, trdeg: decl.trdeg };
    AlgebraPresentation::new(d.clone(), decl.vars.clone(), unit_pairs, in_base, relations, asserted)
        .map_err(CliError::from)
}

fn lower_gen<D: CoeffDomain>(d: &D, rank: usize, owner: &str, g: &GenDecl) -> Result<MonoGen<D>> {
    if g.expo.len() != rank {
        return Err(CliError::session(format!(
            "generator '{}' of '{owner}' has {} exponents; the torus has rank {rank}",
            g.name,
            g.expo.len()
        )));
    }
    Ok(MonoGen {
        name: g.name.clone(),
        coeff: parse_constant(d, &g.coeff)?,
        expo: ExponentVector::new(g.expo.clone()),
        unit: g.unit,
    })
}

/// Monomial subalgebra from a `subalgebra` declaration and its torus.
pub fn lower_subalgebra<D: CoeffDomain>(
    d: &D,
    torus: &TorusDecl,
    decl: &SubDecl,
) -> Result<MonomialSubalgebra<D>> {
    let mut gens = Vec::new();
    for g in &decl.gens {
        gens.push(lower_gen(d, torus.rank, &decl.name, g)?);
    }
    let mut base_gens = Vec::new();
    for g in &decl.base_gens {
        base_gens.push(lower_gen(d, torus.rank, &decl.name, g)?);
    }
    MonomialSubalgebra::new(d.clone(), torus.rank, gens, base_gens).map_err(CliError::from)
}

/// Monomial automorphism from an `auto` declaration.
pub fn lower_automorphism<D: CoeffDomain>(
    d: &D,
    decl: &AutoDecl,
) -> Result<MonomialAutomorphism<D>> {
    let matrix = IntMatrix::from_rows(decl.matrix.clone());
    let mut scalars = Vec::new();
    for s in &decl.scalars {
        scalars.push(parse_constant(d, s)?);
    }
    MonomialAutomorphism::new(d.clone(), matrix, scalars).map_err(CliError::from)
}

/// Extension homomorphism from a `hom` block, with its declared inverse
/// images attached when present.
pub fn lower_hom<D: LocalizableDomain>(
    d: &D,
    file: &SessionFile,
    decl: &HomDecl,
) -> Result<LaurentHom<D>> {
    let src_ring = ring_decl(file, &decl.source)?;
    let tgt_ring = ring_decl(file, &decl.target)?;
    let source = LaurentExtension::new(
        lower_presentation(d, src_ring)?,
        decl.source_adjoin.clone(),
    )?;
    let target = LaurentExtension::new(
        lower_presentation(d, tgt_ring)?,
        decl.target_adjoin.clone(),
    )?;
    let source_names = source.symbol_names();
    let target_names = target.symbol_names();
    let mut images = Vec::new();
    for (n, e) in &decl.images {
        images.push((n.clone(), parse_in(d, &target_names, e)?));
    }
    let hom = LaurentHom::new(source, target, images)?;
    if decl.inverses.is_empty() {
        return Ok(hom);
    }
    let mut inverses = Vec::new();
    for (n, e) in &decl.inverses {
        inverses.push((n.clone(), parse_in(d, &source_names, e)?));
    }
    hom.with_inverse(inverses).map_err(CliError::from)
}

/// A named object that expressions can live in.
#[derive(Debug, Clone, Copy)]
pub enum ObjectRef<'a> {
    Ring(&'a RingDecl),
    Torus(&'a TorusDecl),
    Sub(&'a SubDecl, &'a TorusDecl),
}

impl<'a> ObjectRef<'a> {
    pub fn kind(&self) -> &'static str {
        match self {
            ObjectRef::Ring(_) => "ring",
            ObjectRef::Torus(_) => "torus",
            ObjectRef::Sub(..) => "subalgebra",
        }
    }

    pub fn name(&self) -> &'a str {
        match self {
            ObjectRef::Ring(r) => &r.name,
            ObjectRef::Torus(t) => &t.name,
            ObjectRef::Sub(s, _) => &s.name,
        }
    }

    pub fn domain_tag(&self) -> DomainTag {
        match self {
            ObjectRef::Ring(r) => r.domain,
            ObjectRef::Torus(t) => t.domain,
            ObjectRef::Sub(_, t) => t.domain,
        }
    }

    /// Variable names expressions in this object are written over.
    pub fn var_names(&self) -> &'a [String] {
        match self {
            ObjectRef::Ring(r) => &r.vars,
            ObjectRef::Torus(t) => &t.vars,
            ObjectRef::Sub(_, t) => &t.vars,
        }
    }
}

/// Resolves a name to its ring, torus, or subalgebra declaration.
pub fn lookup_object<'a>(file: &'a SessionFile, name: &str) -> Result<ObjectRef<'a>> {
    if let Some(r) = file.ring(name) {
        return Ok(ObjectRef::Ring(r));
    }
    if let Some(t) = file.torus(name) {
        return Ok(ObjectRef::Torus(t));
    }
    if let Some(s) = file.subalgebra(name) {
        let t = file.torus(&s.torus).ok_or_else(|| {
            CliError::session(format!(
                "subalgebra '{name}' references unknown torus '{}'",
                s.torus
            ))
        })?;
        return Ok(ObjectRef::Sub(s, t));
    }
    Err(CliError::session(format!("no object named '{name}'")))
}

pub fn ring_decl<'a>(file: &'a SessionFile, name: &str) -> Result<&'a RingDecl> {
    file.ring(name).ok_or_else(|| CliError::session(format!("no ring named '{name}'")))
}

pub fn sub_decl<'a>(file: &'a SessionFile, name: &str) -> Result<(&'a SubDecl, &'a TorusDecl)> {
    match lookup_object(file, name)? {
        ObjectRef::Sub(s, t) => Ok((s, t)),
        _ => Err(CliError::session(format!("'{name}' is not a subalgebra"))),
    }
}

pub fn grading_decl<'a>(file: &'a SessionFile, name: &str) -> Result<&'a GradingDecl> {
    file.grading(name).ok_or_else(|| CliError::session(format!("no grading named '{name}'")))
}

pub fn auto_decl<'a>(file: &'a SessionFile, name: &str) -> Result<&'a AutoDecl> {
    file.auto(name).ok_or_else(|| CliError::session(format!("no automorphism named '{name}'")))
}

pub fn hom_decl<'a>(file: &'a SessionFile, name: &str) -> Result<&'a HomDecl> {
    file.hom(name).ok_or_else(|| CliError::session(format!("no hom named '{name}'")))
}
