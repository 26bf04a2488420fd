//! Executes one request against a parsed session, producing both the JSON
//! report body and the plain-text rendering.
//!
//! Every worker is generic over the coefficient domain and monomorphized by
//! the `with_domain!` dispatch on the declared domain tag. Expressions are
//! always parsed over the variable names of the object they belong to;
//! grading and degree output for presented rings refers to the given
//! representative, not to a canonical form.

use laurel_core::algebra::{LocalizableDomain, MonomialSubalgebra, UnitElement};
use laurel_core::cancel::{
    bg_cancel, characterize_laurent, laurent_cancel, localized_normalize, reconstruct_iso,
    unit_normalize, BgReport, CancelBranch, CancelInstance, CharacterizeVerdict, IsoReport,
    MonomialCancelData, NormalizationStep, NormalizationTrace,
};
use laurel_core::domain::{CoeffDomain, Integers, PrimeField, Rationals};
use laurel_core::grading::{grading_lattice, presentation_neutral, Grading};
use laurel_core::report::{bigint_json, matrix_json, vec_json, Ledger};
use laurel_core::{ExponentVector, IntMatrix, LaurentPoly};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::lower::{
    auto_decl, grading_decl, hom_decl, lookup_object, lower_automorphism, lower_hom,
    lower_presentation, lower_subalgebra, parse_in, ring_decl, sub_decl, CliError, ObjectRef,
};
use crate::session::{DomainTag, GradingDecl, Request, RingDecl, SessionFile, SubDecl, TorusDecl};

type Result<T> = std::result::Result<T, CliError>;

/// A successful command: the JSON report body and the text rendering.
pub struct Outcome {
    pub report: Value,
    pub human: String,
}

fn outcome(report: Value, lines: Vec<String>) -> Outcome {
    let mut human = lines.join("\n");
    human.push('\n');
    Outcome { report, human }
}

macro_rules! with_domain {
    ($tag:expr, $dom:ident, $body:expr) => {
        match $tag {
            DomainTag::Rationals => {
                let $dom = Rationals;
                $body
            }
            DomainTag::Integers => {
                let $dom = Integers::new();
                $body
            }
            DomainTag::PrimeField(p) => {
                let $dom = PrimeField::new(p)?;
                $body
            }
        }
    };
}

/// Runs one request against the session.
pub fn execute(file: &SessionFile, req: &Request, trace: bool) -> Result<Outcome> {
    match req {
        Request::Units { object, expr } => units_cmd(file, object, expr),
        Request::Grade { object, grading, expr } => grade_cmd(file, object, grading, expr),
        Request::Gradings { ring } => gradings_cmd(file, ring),
        Request::Neutral { ring } => neutral_cmd(file, ring),
        Request::Auto { auto, object, expr, then } => {
            auto_cmd(file, auto, then.as_deref(), object, expr)
        }
        Request::Reconstruct { hom } => reconstruct_cmd(file, hom, trace),
        Request::Normalize { algebra, grading, localize } => {
            normalize_cmd(file, algebra, grading, localize.as_deref(), trace)
        }
        Request::Characterize { object } => characterize_cmd(file, object, trace),
        Request::BgCancel { algebra, adjoin, auto } => {
            bg_cancel_cmd(file, algebra, *adjoin, auto, trace)
        }
        Request::Cancel { hom, source, target, adjoin, auto } => cancel_cmd(
            file,
            hom.as_deref(),
            source.as_deref(),
            target.as_deref(),
            *adjoin,
            auto.as_deref(),
            trace,
        ),
    }
}

// ---------------------------------------------------------------------------
// Shared rendering helpers.

fn mono_string<D: CoeffDomain>(d: &D, c: &D::Elem, e: &ExponentVector, names: &[String]) -> String {
    LaurentPoly::monomial(d.clone(), e.rank(), c.clone(), e.clone()).to_string_with(names)
}

fn word_json(word: &[(usize, BigInt)], gen_names: &[String]) -> Value {
    Value::Array(
        word.iter()
            .map(|(i, k)| json!({ "gen": gen_names[*i], "power": bigint_json(k) }))
            .collect(),
    )
}

fn word_string(word: &[(usize, BigInt)], gen_names: &[String]) -> String {
    if word.is_empty() {
        return "1".to_string();
    }
    word.iter()
        .map(|(i, k)| {
            if k.is_one() {
                gen_names[*i].clone()
            } else {
                format!("{}^{}", gen_names[*i], k)
            }
        })
        .collect::<Vec<_>>()
        .join("*")
}

fn unit_json<D: CoeffDomain>(
    d: &D,
    u: &UnitElement<D>,
    ambient: &[String],
    gens: &[String],
) -> Value {
    json!({
        "element": mono_string(d, &u.coeff, &u.expo, ambient),
        "coefficient": d.format_elem(&u.coeff),
        "exponent": vec_json(u.expo.entries()),
        "word": word_json(&u.word, gens),
    })
}

fn ledger_json(l: &Ledger) -> Value {
    serde_json::to_value(l).expect("ledger serializes")
}

fn ledger_counts(l: &Ledger) -> String {
    let mut v = 0;
    let mut a = 0;
    let mut f = 0;
    for e in l.entries() {
        match e.status {
            laurel_core::report::CheckStatus::Verified => v += 1,
            laurel_core::report::CheckStatus::Asserted => a += 1,
            laurel_core::report::CheckStatus::Failed => f += 1,
        }
    }
    format!("{v} verified, {a} asserted, {f} failed")
}

fn ledger_lines(l: &Ledger, lines: &mut Vec<String>) {
    for e in l.entries() {
        match &e.detail {
            Some(d) => lines.push(format!("check {}: {} ({d})", e.name, e.status)),
            None => lines.push(format!("check {}: {}", e.name, e.status)),
        }
    }
}

fn ints_string(v: &[BigInt]) -> String {
    format!("({})", v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "))
}

fn matrix_string(m: &IntMatrix) -> String {
    let rows = m
        .to_rows()
        .iter()
        .map(|r| format!("[{}]", r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")))
        .collect::<Vec<_>>()
        .join(",");
    format!("[{rows}]")
}

fn opt_string(v: Option<String>) -> Value {
    v.map(Value::String).unwrap_or(Value::Null)
}

/// Names for adjoined coordinates beyond the declared ambient names.
fn adjoined_names(base: &[String], n: usize) -> Vec<String> {
    let mut out = base.to_vec();
    for i in 1..=n {
        let mut name = format!("z{i}");
        while out.contains(&name) {
            name.push('_');
        }
        out.push(name);
    }
    out
}

/// Coordinate names for the normalized unit torus.
fn w_names(m: usize) -> Vec<String> {
    if m == 1 {
        vec!["W".to_string()]
    } else {
        (1..=m).map(|i| format!("W{i}")).collect()
    }
}

fn gen_names<D: CoeffDomain>(sub: &MonomialSubalgebra<D>) -> Vec<String> {
    sub.gens().iter().map(|g| g.name.clone()).collect()
}

fn image_pairs(gens: &[String], images: &[String]) -> Value {
    Value::Array(
        gens.iter()
            .zip(images)
            .map(|(g, im)| json!({ "generator": g, "image": im }))
            .collect(),
    )
}

// ---------------------------------------------------------------------------
// units

fn units_cmd(file: &SessionFile, object: &str, expr: &str) -> Result<Outcome> {
    match lookup_object(file, object)? {
        ObjectRef::Ring(r) => with_domain!(r.domain, dom, units_in_ring(&dom, r, expr)),
        ObjectRef::Torus(t) => with_domain!(t.domain, dom, units_in_torus(&dom, t, expr)),
        ObjectRef::Sub(s, t) => with_domain!(t.domain, dom, units_in_sub(&dom, s, t, expr)),
    }
}

struct UnitFinding {
    is_unit: bool,
    exact: bool,
    scalar: Option<String>,
    exponent: Option<Vec<BigInt>>,
    word: Option<Value>,
    word_text: Option<String>,
    reduced: Option<String>,
    note: Option<String>,
}

impl UnitFinding {
    fn negative(exact: bool, note: &str) -> Self {
        UnitFinding {
            is_unit: false,
            exact,
            scalar: None,
            exponent: None,
            word: None,
            word_text: None,
            reduced: None,
            note: Some(note.to_string()),
        }
    }
}

fn unit_outcome(kind: &str, object: &str, expr: &str, f: UnitFinding) -> Outcome {
    let report = json!({
        "object_kind": kind,
        "object": object,
        "expression": expr,
        "is_unit": f.is_unit,
        "exact": f.exact,
        "scalar": opt_string(f.scalar.clone()),
        "exponent": f.exponent.as_ref().map(|e| vec_json(e)).unwrap_or(Value::Null),
        "word": f.word.unwrap_or(Value::Null),
        "reduced": opt_string(f.reduced.clone()),
        "note": opt_string(f.note.clone()),
    });
    let mut lines = vec![
        format!("object: {object} ({kind})"),
        format!("expression: {expr}"),
    ];
    if let Some(r) = &f.reduced {
        lines.push(format!("reduced: {r}"));
    }
    lines.push(format!("is_unit: {}", f.is_unit));
    if let Some(s) = &f.scalar {
        lines.push(format!("scalar: {s}"));
    }
    if let Some(w) = &f.word_text {
        lines.push(format!("word: {w}"));
    }
    if let Some(n) = &f.note {
        lines.push(format!("note: {n}"));
    }
    outcome(report, lines)
}

fn units_in_torus<D: LocalizableDomain>(d: &D, t: &TorusDecl, expr: &str) -> Result<Outcome> {
    let p = parse_in(d, &t.vars, expr)?;
    let finding = match p.is_unit_poly() {
        Some((c, e)) => {
            let word: Vec<(usize, BigInt)> = e
                .entries()
                .iter()
                .enumerate()
                .filter(|(_, k)| !k.is_zero())
                .map(|(i, k)| (i, k.clone()))
                .collect();
            UnitFinding {
                is_unit: true,
                exact: true,
                scalar: Some(d.format_elem(&c)),
                exponent: Some(e.entries().to_vec()),
                word: Some(word_json(&word, &t.vars)),
                word_text: Some(word_string(&word, &t.vars)),
                reduced: None,
                note: None,
            }
        }
        None => UnitFinding::negative(
            true,
            "torus units are exactly the unit-scalar monomials",
        ),
    };
    Ok(unit_outcome("torus", &t.name, expr, finding))
}

fn units_in_sub<D: LocalizableDomain>(
    d: &D,
    s: &SubDecl,
    t: &TorusDecl,
    expr: &str,
) -> Result<Outcome> {
    let sub = lower_subalgebra(d, t, s)?;
    let names = gen_names(&sub);
    let p = parse_in(d, &t.vars, expr)?;
    let finding = if p.num_terms() == 1 {
        let (e, c) = p.terms().next().unwrap();
        match sub.classify_unit(c, e) {
            Some(u) => UnitFinding {
                is_unit: true,
                exact: true,
                scalar: Some(d.format_elem(&u.scalar)),
                exponent: Some(e.entries().to_vec()),
                word: Some(word_json(&u.word, &names)),
                word_text: Some(word_string(&u.word, &names)),
                reduced: None,
                note: None,
            },
            None => UnitFinding::negative(true, "the monomial is not in the declared unit group"),
        }
    } else {
        UnitFinding::negative(true, "units of a monomial subalgebra are single-term elements")
    };
    Ok(unit_outcome("subalgebra", &s.name, expr, finding))
}

fn units_in_ring<D: LocalizableDomain>(d: &D, r: &RingDecl, expr: &str) -> Result<Outcome> {
    let p = lower_presentation(d, r)?;
    let q = parse_in(d, &r.vars, expr)?;
    let reduced = p.reduce(&q);
    let view = p.symbol_subalgebra();
    let mut finding = if reduced.num_terms() == 1 {
        let (e, c) = reduced.terms().next().unwrap();
        match view.classify_unit(c, e) {
            Some(u) => UnitFinding {
                is_unit: true,
                exact: false,
                scalar: Some(d.format_elem(&u.scalar)),
                exponent: Some(e.entries().to_vec()),
                word: Some(word_json(&u.word, &r.vars)),
                word_text: Some(word_string(&u.word, &r.vars)),
                reduced: None,
                note: Some("certified by reduction to a declared-unit monomial".to_string()),
            },
            None => UnitFinding::negative(
                false,
                "no monomial certificate over the declared units; not provably a unit",
            ),
        }
    } else {
        UnitFinding::negative(
            false,
            "no monomial certificate after reduction; not provably a unit",
        )
    };
    finding.reduced = Some(reduced.to_string_with(&r.vars));
    Ok(unit_outcome("ring", &r.name, expr, finding))
}

// ---------------------------------------------------------------------------
// grade

fn grade_cmd(file: &SessionFile, object: &str, grading: &str, expr: &str) -> Result<Outcome> {
    let obj = lookup_object(file, object)?;
    let gd = grading_decl(file, grading)?;
    with_domain!(obj.domain_tag(), dom, grade_in(&dom, obj, gd, expr))
}

fn grade_in<D: LocalizableDomain>(
    d: &D,
    obj: ObjectRef<'_>,
    gd: &GradingDecl,
    expr: &str,
) -> Result<Outcome> {
    let names = obj.var_names();
    if gd.weights.len() != names.len() {
        return Err(CliError::session(format!(
            "grading '{}' has {} weights; '{}' has {} variables",
            gd.name,
            gd.weights.len(),
            obj.name(),
            names.len()
        )));
    }
    let g = Grading::new(gd.weights.clone());
    let p = parse_in(d, names, expr)?;
    let support: Vec<BigInt> = g.support(&p).into_iter().collect();
    let comps = g.homogeneous_components(&p);
    let components: Vec<(BigInt, String)> = comps
        .iter()
        .map(|(deg, q)| (deg.clone(), q.to_string_with(names)))
        .collect();
    let leading = components.last().cloned();
    let report = json!({
        "object_kind": obj.kind(),
        "object": obj.name(),
        "grading": gd.name,
        "weights": vec_json(&gd.weights),
        "expression": expr,
        "support": vec_json(&support),
        "homogeneous": g.is_homogeneous(&p),
        "components": components.iter().map(|(deg, el)| json!({
            "degree": bigint_json(deg),
            "element": el,
        })).collect::<Vec<_>>(),
        "leading": leading.as_ref().map(|(deg, el)| json!({
            "degree": bigint_json(deg),
            "element": el,
        })).unwrap_or(Value::Null),
    });
    let mut lines = vec![
        format!("object: {} ({})", obj.name(), obj.kind()),
        format!("grading: {} {}", gd.name, ints_string(&gd.weights)),
        format!("expression: {expr}"),
        format!("support: {}", ints_string(&support)),
        format!("homogeneous: {}", g.is_homogeneous(&p)),
    ];
    for (deg, el) in &components {
        lines.push(format!("component {deg}: {el}"));
    }
    match &leading {
        Some((deg, el)) => lines.push(format!("leading: degree {deg}, element {el}")),
        None => lines.push("leading: (zero)".to_string()),
    }
    Ok(outcome(report, lines))
}

// ---------------------------------------------------------------------------
// gradings / neutral

fn lattice_lines(rank: usize, rows: &[Vec<BigInt>], lines: &mut Vec<String>) {
    lines.push(format!("grading_rank: {rank}"));
    if rows.is_empty() {
        lines.push("basis: (none)".to_string());
    } else {
        for row in rows {
            lines.push(format!("basis: {}", ints_string(row)));
        }
    }
}

fn gradings_cmd(file: &SessionFile, ring: &str) -> Result<Outcome> {
    let r = ring_decl(file, ring)?;
    with_domain!(r.domain, dom, {
        let p = lower_presentation(&dom, r)?;
        let gl = grading_lattice(&p);
        let rows = gl.lattice.basis_rows();
        let report = json!({
            "ring": r.name,
            "gen_names": gl.gen_names,
            "rank": gl.lattice.rank(),
            "basis": matrix_json(gl.lattice.basis_matrix()),
        });
        let mut lines = vec![
            format!("ring: {}", r.name),
            format!("gen_names: {}", r.vars.join(", ")),
        ];
        lattice_lines(gl.lattice.rank(), &rows, &mut lines);
        Ok(outcome(report, lines))
    })
}

fn neutral_cmd(file: &SessionFile, ring: &str) -> Result<Outcome> {
    let r = ring_decl(file, ring)?;
    with_domain!(r.domain, dom, {
        let p = lower_presentation(&dom, r)?;
        let rep = presentation_neutral(&p);
        let rows = rep.lattice.lattice.basis_rows();
        let report = json!({
            "ring": r.name,
            "gen_names": rep.lattice.gen_names,
            "rank": rep.lattice.lattice.rank(),
            "basis": matrix_json(rep.lattice.lattice.basis_matrix()),
            "gen_neutral": rep.gen_neutral,
            "algebra_neutral": rep.algebra_neutral,
        });
        let mut lines = vec![
            format!("ring: {}", r.name),
            format!("gen_names: {}", r.vars.join(", ")),
        ];
        lattice_lines(rep.lattice.lattice.rank(), &rows, &mut lines);
        let flags = r
            .vars
            .iter()
            .zip(&rep.gen_neutral)
            .map(|(n, b)| format!("{n}={b}"))
            .collect::<Vec<_>>()
            .join(", ");
        lines.push(format!("gen_neutral: {flags}"));
        lines.push(format!("algebra_neutral: {}", rep.algebra_neutral));
        Ok(outcome(report, lines))
    })
}

// ---------------------------------------------------------------------------
// auto

fn auto_cmd(
    file: &SessionFile,
    auto: &str,
    then: Option<&str>,
    object: &str,
    expr: &str,
) -> Result<Outcome> {
    let first = auto_decl(file, auto)?;
    let second = then.map(|n| auto_decl(file, n)).transpose()?;
    let obj = lookup_object(file, object)?;
    if matches!(obj, ObjectRef::Ring(_)) {
        return Err(CliError::session(
            "automorphisms act on a torus or subalgebra, not a presented ring",
        ));
    }
    with_domain!(obj.domain_tag(), dom, {
        let mut phi = lower_automorphism(&dom, first)?;
        if let Some(sd) = second {
            phi = phi.then(&lower_automorphism(&dom, sd)?)?;
        }
        if phi.rank() != obj.var_names().len() {
            return Err(CliError::session(format!(
                "automorphism '{}' has rank {}; '{}' has {} variables",
                auto,
                phi.rank(),
                obj.name(),
                obj.var_names().len()
            )));
        }
        let p = parse_in(&dom, obj.var_names(), expr)?;
        let image = phi.apply(&p)?;
        let scalars: Vec<String> =
            phi.scalars().iter().map(|s| dom.format_elem(s)).collect();
        let image_str = image.to_string_with(obj.var_names());
        let report = json!({
            "automorphism": auto,
            "composed_with": opt_string(then.map(str::to_string)),
            "object": obj.name(),
            "expression": expr,
            "matrix": matrix_json(phi.matrix()),
            "scalars": scalars,
            "image": image_str,
        });
        let mut lines = vec![format!("automorphism: {auto}")];
        if let Some(n) = then {
            lines.push(format!("composed_with: {n}"));
        }
        lines.push(format!("object: {}", obj.name()));
        lines.push(format!("matrix: {}", matrix_string(phi.matrix())));
        lines.push(format!("scalars: {}", scalars.join(", ")));
        lines.push(format!("expression: {expr}"));
        lines.push(format!("image: {image_str}"));
        Ok(outcome(report, lines))
    })
}

// ---------------------------------------------------------------------------
// reconstruct

/// Name contexts for rendering the parts of an isomorphism report.
struct IsoNames {
    sigma_gens: Vec<String>,
    sigma_over: Vec<String>,
    tau_gens: Vec<String>,
    tau_over: Vec<String>,
    forward_over: Vec<String>,
    backward_over: Vec<String>,
    collapse_over: Vec<String>,
}

fn iso_json<D: CoeffDomain>(iso: &IsoReport<D>, names: &IsoNames) -> Value {
    let sigma: Vec<String> =
        iso.sigma_images.iter().map(|p| p.to_string_with(&names.sigma_over)).collect();
    let tau: Vec<String> =
        iso.tau_images.iter().map(|p| p.to_string_with(&names.tau_over)).collect();
    json!({
        "e_matrix": matrix_json(&iso.e_matrix),
        "d_matrix": matrix_json(&iso.d_matrix),
        "forward_units": iso.forward_units.iter()
            .map(|p| p.to_string_with(&names.forward_over)).collect::<Vec<_>>(),
        "backward_units": iso.backward_units.iter()
            .map(|p| p.to_string_with(&names.backward_over)).collect::<Vec<_>>(),
        "sigma": image_pairs(&names.sigma_gens, &sigma),
        "tau": image_pairs(&names.tau_gens, &tau),
        "collapse_ideal": iso.collapse_ideal.iter()
            .map(|p| p.to_string_with(&names.collapse_over)).collect::<Vec<_>>(),
        "ledger": ledger_json(&iso.ledger),
    })
}

fn iso_lines<D: CoeffDomain>(
    iso: &IsoReport<D>,
    names: &IsoNames,
    trace: bool,
    lines: &mut Vec<String>,
) {
    lines.push(format!("e_matrix: {}", matrix_string(&iso.e_matrix)));
    lines.push(format!("d_matrix: {}", matrix_string(&iso.d_matrix)));
    for (g, im) in names.sigma_gens.iter().zip(&iso.sigma_images) {
        lines.push(format!("sigma: {g} -> {}", im.to_string_with(&names.sigma_over)));
    }
    for (g, im) in names.tau_gens.iter().zip(&iso.tau_images) {
        lines.push(format!("tau: {g} -> {}", im.to_string_with(&names.tau_over)));
    }
    if trace {
        ledger_lines(&iso.ledger, lines);
    }
    lines.push(format!("checks: {}", ledger_counts(&iso.ledger)));
}

fn reconstruct_cmd(file: &SessionFile, hom: &str, trace: bool) -> Result<Outcome> {
    let h = hom_decl(file, hom)?;
    let src = ring_decl(file, &h.source)?;
    let tgt = ring_decl(file, &h.target)?;
    if src.domain != tgt.domain {
        return Err(CliError::session(format!(
            "hom '{}' connects rings over different domains",
            h.name
        )));
    }
    with_domain!(src.domain, dom, {
        let f = lower_hom(&dom, file, h)?;
        let iso = reconstruct_iso(&f)?;
        let names = IsoNames {
            sigma_gens: src.vars.clone(),
            sigma_over: tgt.vars.clone(),
            tau_gens: tgt.vars.clone(),
            tau_over: src.vars.clone(),
            forward_over: tgt.vars.clone(),
            backward_over: src.vars.clone(),
            collapse_over: f.target().symbol_names(),
        };
        let report = json!({
            "hom": h.name,
            "source": h.source,
            "target": h.target,
            "iso": iso_json(&iso, &names),
        });
        let side = |name: &str, adjoin: &[String]| {
            if adjoin.is_empty() {
                name.to_string()
            } else {
                format!("{name} (adjoin {})", adjoin.join(", "))
            }
        };
        let mut lines = vec![
            format!("hom: {}", h.name),
            format!("source: {}", side(&h.source, &h.source_adjoin)),
            format!("target: {}", side(&h.target, &h.target_adjoin)),
        ];
        iso_lines(&iso, &names, trace, &mut lines);
        Ok(outcome(report, lines))
    })
}

// ---------------------------------------------------------------------------
// normalize

fn step_json<D: CoeffDomain>(
    fd: &D,
    st: &NormalizationStep<D>,
    ambient: &[String],
    gens: &[String],
) -> Value {
    json!({
        "u": unit_json(fd, &st.u, ambient, gens),
        "v": unit_json(fd, &st.v, ambient, gens),
        "deg_u": bigint_json(&st.deg_u),
        "deg_v": bigint_json(&st.deg_v),
        "d": bigint_json(&st.d),
        "a": bigint_json(&st.a),
        "b": bigint_json(&st.b),
        "m": bigint_json(&st.m),
        "n": bigint_json(&st.n),
        "r": fd.format_elem(&st.r),
        "w": unit_json(fd, &st.w, ambient, gens),
        "flipped_v": st.flipped_v,
        "localized_at": opt_string(st.localized_at.as_ref().map(|c| fd.format_elem(c))),
    })
}

fn trace_json<D: CoeffDomain>(
    tr: &NormalizationTrace<D>,
    ambient: &[String],
    gens: &[String],
) -> Value {
    let fd = &tr.final_domain;
    json!({
        "seed": unit_json(fd, &tr.seed, ambient, gens),
        "steps": tr.steps.iter().map(|s| step_json(fd, s, ambient, gens)).collect::<Vec<_>>(),
        "w": unit_json(fd, &tr.w, ambient, gens),
        "localizations": tr.localizations.iter().map(|c| fd.format_elem(c)).collect::<Vec<_>>(),
        "final_domain": fd.name(),
        "ledger": ledger_json(&tr.ledger),
    })
}

fn trace_lines<D: CoeffDomain>(
    tr: &NormalizationTrace<D>,
    g: &Grading,
    ambient: &[String],
    trace: bool,
    lines: &mut Vec<String>,
) {
    let fd = &tr.final_domain;
    lines.push(format!(
        "seed: {} (degree {})",
        mono_string(fd, &tr.seed.coeff, &tr.seed.expo, ambient),
        g.weight(&tr.seed.expo)
    ));
    lines.push(format!("steps: {}", tr.steps.len()));
    if trace {
        for (i, st) in tr.steps.iter().enumerate() {
            let mut line = format!(
                "step {}: u={} (deg {}), v={} (deg {}) -> d={}, a={}, b={}, m={}, n={}, r={}, w={}",
                i + 1,
                mono_string(fd, &st.u.coeff, &st.u.expo, ambient),
                st.deg_u,
                mono_string(fd, &st.v.coeff, &st.v.expo, ambient),
                st.deg_v,
                st.d,
                st.a,
                st.b,
                st.m,
                st.n,
                fd.format_elem(&st.r),
                mono_string(fd, &st.w.coeff, &st.w.expo, ambient),
            );
            if let Some(c) = &st.localized_at {
                line.push_str(&format!(", localized at {}", fd.format_elem(c)));
            }
            lines.push(line);
        }
        ledger_lines(&tr.ledger, lines);
    }
    if tr.localizations.is_empty() {
        lines.push("localizations: (none)".to_string());
    } else {
        let list: Vec<String> = tr.localizations.iter().map(|c| fd.format_elem(c)).collect();
        lines.push(format!("localizations: {}", list.join(", ")));
    }
    lines.push(format!("final_domain: {}", fd.name()));
    lines.push(format!("checks: {}", ledger_counts(&tr.ledger)));
    lines.push(format!("w = {}", mono_string(fd, &tr.w.coeff, &tr.w.expo, ambient)));
}

fn normalize_cmd(
    file: &SessionFile,
    algebra: &str,
    grading: &str,
    localize: Option<&str>,
    trace: bool,
) -> Result<Outcome> {
    let (s, t) = sub_decl(file, algebra)?;
    let gd = grading_decl(file, grading)?;
    if gd.weights.len() != t.rank {
        return Err(CliError::session(format!(
            "grading '{}' has {} weights; torus '{}' has rank {}",
            gd.name,
            gd.weights.len(),
            t.name,
            t.rank
        )));
    }
    let g = Grading::new(gd.weights.clone());
    match localize {
        None => with_domain!(t.domain, dom, {
            let sub = lower_subalgebra(&dom, t, s)?;
            let gens = gen_names(&sub);
            let tr = unit_normalize(&sub, &g)?;
            let mut report = json!({
                "algebra": s.name,
                "grading": gd.name,
                "weights": vec_json(&gd.weights),
                "localized": Value::Null,
            });
            merge_json(&mut report, trace_json(&tr, &t.vars, &gens));
            let mut lines = vec![
                format!("algebra: {}", s.name),
                format!("grading: {} {}", gd.name, ints_string(&gd.weights)),
            ];
            trace_lines(&tr, &g, &t.vars, trace, &mut lines);
            Ok(outcome(report, lines))
        }),
        Some(ring_name) => {
            let r = ring_decl(file, ring_name)?;
            if r.domain != t.domain {
                return Err(CliError::session(format!(
                    "ring '{}' and torus '{}' use different domains",
                    r.name, t.name
                )));
            }
            with_domain!(t.domain, dom, {
                let p = lower_presentation(&dom, r)?;
                let sub = lower_subalgebra(&dom, t, s)?;
                let gens = gen_names(&sub);
                let (loc, tr) = localized_normalize(&p, &sub, &g)?;
                let loc_gens = loc.presentation.gen_names().to_vec();
                let inverted = loc.inverted.to_string_with(&r.vars);
                let inverse_gen = loc.inverse_gen.map(|i| loc_gens[i].clone());
                let mut report = json!({
                    "algebra": s.name,
                    "grading": gd.name,
                    "weights": vec_json(&gd.weights),
                    "localized": {
                        "ring": r.name,
                        "generators": loc_gens,
                        "inverted": inverted,
                        "inverse_gen": opt_string(inverse_gen.clone()),
                        "domain": loc.presentation.domain().name(),
                    },
                });
                merge_json(&mut report, trace_json(&tr, &t.vars, &gens));
                let mut lines = vec![
                    format!("algebra: {}", s.name),
                    format!("grading: {} {}", gd.name, ints_string(&gd.weights)),
                    format!("localized_ring: {}", r.name),
                    format!("inverted: {inverted}"),
                    format!(
                        "inverse_gen: {}",
                        inverse_gen.unwrap_or_else(|| "(constant)".to_string())
                    ),
                ];
                trace_lines(&tr, &g, &t.vars, trace, &mut lines);
                Ok(outcome(report, lines))
            })
        }
    }
}

/// Moves every key of `extra` into `base` (both must be objects).
fn merge_json(base: &mut Value, extra: Value) {
    let Value::Object(b) = base else {
        unreachable!("reports are JSON objects")
    };
    let Value::Object(e) = extra else {
        unreachable!("reports are JSON objects")
    };
    for (k, v) in e {
        b.insert(k, v);
    }
}

// ---------------------------------------------------------------------------
// characterize

fn characterize_cmd(file: &SessionFile, object: &str, trace: bool) -> Result<Outcome> {
    match lookup_object(file, object)? {
        ObjectRef::Ring(r) => with_domain!(r.domain, dom, {
            let p = lower_presentation(&dom, r)?;
            let v = characterize_laurent(Some(&p), None)?;
            Ok(characterize_outcome(&dom, "ring", &r.name, &r.vars, &r.vars, &v, trace))
        }),
        ObjectRef::Sub(s, t) => with_domain!(t.domain, dom, {
            let sub = lower_subalgebra(&dom, t, s)?;
            let v = characterize_laurent(None, Some(&sub))?;
            let gens = gen_names(&sub);
            Ok(characterize_outcome(&dom, "subalgebra", &s.name, &t.vars, &gens, &v, trace))
        }),
        ObjectRef::Torus(_) => Err(CliError::session(
            "characterize takes a presented ring or a monomial subalgebra",
        )),
    }
}

fn characterize_outcome<D: CoeffDomain>(
    d: &D,
    kind: &str,
    name: &str,
    ambient: &[String],
    gens: &[String],
    v: &CharacterizeVerdict<D>,
    trace: bool,
) -> Outcome {
    let report = json!({
        "object_kind": kind,
        "object": name,
        "is_laurent_line": v.is_laurent_line,
        "witness": v.witness.as_ref().map(|u| unit_json(d, u, ambient, gens)).unwrap_or(Value::Null),
        "witness_gen_names": v.witness_gen_names,
        "outside_witness": v.outside_witness.as_ref().map(|e| vec_json(e)).unwrap_or(Value::Null),
        "ledger": ledger_json(&v.ledger),
    });
    let mut lines = vec![
        format!("object: {name} ({kind})"),
        format!("is_laurent_line: {}", v.is_laurent_line),
    ];
    if let Some(u) = &v.witness {
        lines.push(format!("witness: {}", mono_string(d, &u.coeff, &u.expo, ambient)));
    }
    if let Some(e) = &v.outside_witness {
        lines.push(format!("outside_witness: {}", ints_string(e)));
    }
    if !v.is_laurent_line {
        if let Some(f) = v.ledger.first_failure() {
            lines.push(format!("first_failure: {}", f.name));
        }
    }
    if trace {
        ledger_lines(&v.ledger, &mut lines);
    }
    lines.push(format!("checks: {}", ledger_counts(&v.ledger)));
    outcome(report, lines)
}

// ---------------------------------------------------------------------------
// bg-cancel

fn bg_json<D: CoeffDomain>(
    d: &D,
    rep: &BgReport<D>,
    ambient: &[String],
    sigma_gens: &[String],
) -> Value {
    let over = w_names(rep.unit_rank.max(1));
    let sigma: Vec<String> = rep
        .sigma_images
        .iter()
        .map(|p| p.to_string_with(&over[..p.rank()]))
        .collect();
    json!({
        "unit_rank": rep.unit_rank,
        "levels": rep.peeled.len(),
        "e_matrix": matrix_json(&rep.e_matrix),
        "d_matrix": matrix_json(&rep.d_matrix),
        "image_scalars": rep.image_scalars.iter().map(|c| d.format_elem(c)).collect::<Vec<_>>(),
        "unit_basis": rep.unit_basis.iter()
            .map(|u| unit_json(d, u, ambient, sigma_gens)).collect::<Vec<_>>(),
        "sigma": image_pairs(sigma_gens, &sigma),
        "ledger": ledger_json(&rep.ledger),
    })
}

fn bg_lines<D: CoeffDomain>(
    d: &D,
    rep: &BgReport<D>,
    sigma_gens: &[String],
    trace: bool,
    lines: &mut Vec<String>,
) {
    let over = w_names(rep.unit_rank.max(1));
    lines.push(format!("unit_rank: {}", rep.unit_rank));
    lines.push(format!("levels: {}", rep.peeled.len()));
    lines.push(format!("e_matrix: {}", matrix_string(&rep.e_matrix)));
    lines.push(format!("d_matrix: {}", matrix_string(&rep.d_matrix)));
    let scalars: Vec<String> = rep.image_scalars.iter().map(|c| d.format_elem(c)).collect();
    lines.push(format!("image_scalars: {}", scalars.join(", ")));
    for (g, im) in sigma_gens.iter().zip(&rep.sigma_images) {
        lines.push(format!("sigma: {g} -> {}", im.to_string_with(&over[..im.rank()])));
    }
    if trace {
        ledger_lines(&rep.ledger, lines);
    }
    lines.push(format!("checks: {}", ledger_counts(&rep.ledger)));
}

fn bg_cancel_cmd(
    file: &SessionFile,
    algebra: &str,
    adjoin: usize,
    auto: &str,
    trace: bool,
) -> Result<Outcome> {
    let (s, t) = sub_decl(file, algebra)?;
    let ad = auto_decl(file, auto)?;
    with_domain!(t.domain, dom, {
        let sub = lower_subalgebra(&dom, t, s)?;
        let alpha = lower_automorphism(&dom, ad)?;
        let rep = bg_cancel(&sub, adjoin, &alpha)?;
        let gens = gen_names(&sub);
        let report = json!({
            "algebra": s.name,
            "adjoin": adjoin,
            "automorphism": auto,
            "bg": bg_json(&dom, &rep, &t.vars, &gens),
        });
        let mut lines = vec![
            format!("algebra: {}", s.name),
            format!("adjoin: {adjoin}"),
            format!("automorphism: {auto}"),
        ];
        bg_lines(&dom, &rep, &gens, trace, &mut lines);
        Ok(outcome(report, lines))
    })
}

// ---------------------------------------------------------------------------
// cancel

fn cancel_cmd(
    file: &SessionFile,
    hom: Option<&str>,
    source: Option<&str>,
    target: Option<&str>,
    adjoin: usize,
    auto: Option<&str>,
    trace: bool,
) -> Result<Outcome> {
    let hd = hom.map(|h| hom_decl(file, h)).transpose()?;
    let mono = match (source, target, auto) {
        (Some(a), Some(b), Some(m)) => {
            if adjoin == 0 {
                return Err(CliError::session(
                    "monomial cancellation needs an adjoined count of at least 1",
                ));
            }
            Some((sub_decl(file, a)?, sub_decl(file, b)?, auto_decl(file, m)?))
        }
        (None, None, None) => None,
        _ => {
            return Err(CliError::session(
                "monomial data needs source, target, and auto together",
            ))
        }
    };
    if hd.is_none() && mono.is_none() {
        return Err(CliError::session("cancel needs hom and/or monomial data"));
    }

    // One domain for the whole instance.
    let mut tag: Option<DomainTag> = None;
    let mut note = |t: DomainTag| -> Result<()> {
        match tag {
            None => {
                tag = Some(t);
                Ok(())
            }
            Some(prev) if prev == t => Ok(()),
            Some(_) => Err(CliError::session("the instance mixes coefficient domains")),
        }
    };
    if let Some(h) = hd {
        note(ring_decl(file, &h.source)?.domain)?;
        note(ring_decl(file, &h.target)?.domain)?;
    }
    if let Some(((_, ta), (_, tb), _)) = mono {
        note(ta.domain)?;
        note(tb.domain)?;
    }
    let tag = tag.expect("at least one view present");

    with_domain!(tag, dom, {
        let hom_view = hd.map(|h| lower_hom(&dom, file, h)).transpose()?;
        let mono_view = mono
            .map(|((sa, ta), (sb, tb), ad)| -> Result<MonomialCancelData<_>> {
                Ok(MonomialCancelData {
                    a: lower_subalgebra(&dom, ta, sa)?,
                    b: lower_subalgebra(&dom, tb, sb)?,
                    n: adjoin,
                    alpha: lower_automorphism(&dom, ad)?,
                })
            })
            .transpose()?;
        let inst = CancelInstance { hom: hom_view, monomial: mono_view };
        let rep = laurent_cancel(&inst)?;

        // Rendering contexts depend on which view the branch consumed.
        let (sigma_gens, sigma_over, tau_gens, tau_over) = match rep.branch {
            CancelBranch::UnitsNeutral => {
                let h = hd.expect("neutral branch needs the hom view");
                let src = ring_decl(file, &h.source)?;
                let tgt = ring_decl(file, &h.target)?;
                (src.vars.clone(), tgt.vars.clone(), tgt.vars.clone(), src.vars.clone())
            }
            CancelBranch::UnitsAlgebraic | CancelBranch::FieldCharacterize => {
                let ((sa, ta), (sb, tb), _) = mono.expect("monomial branch needs its view");
                let a_gens: Vec<String> = sa.gens.iter().map(|g| g.name.clone()).collect();
                let b_gens: Vec<String> = sb.gens.iter().map(|g| g.name.clone()).collect();
                (a_gens, tb.vars.clone(), b_gens, ta.vars.clone())
            }
        };
        let sigma: Vec<String> =
            rep.sigma_images.iter().map(|p| p.to_string_with(&sigma_over)).collect();
        let tau: Vec<String> =
            rep.tau_images.iter().map(|p| p.to_string_with(&tau_over)).collect();

        let iso_value = match &rep.iso {
            None => Value::Null,
            Some(iso) => {
                let names = match rep.branch {
                    CancelBranch::UnitsNeutral => {
                        let h = hd.expect("neutral branch needs the hom view");
                        let src = ring_decl(file, &h.source)?;
                        let tgt = ring_decl(file, &h.target)?;
                        let mut collapse_over = tgt.vars.clone();
                        collapse_over.extend(h.target_adjoin.iter().cloned());
                        IsoNames {
                            sigma_gens: src.vars.clone(),
                            sigma_over: tgt.vars.clone(),
                            tau_gens: tgt.vars.clone(),
                            tau_over: src.vars.clone(),
                            forward_over: tgt.vars.clone(),
                            backward_over: src.vars.clone(),
                            collapse_over,
                        }
                    }
                    _ => {
                        let ((sa, ta), (sb, tb), _) = mono.expect("monomial branch");
                        IsoNames {
                            sigma_gens: sa.gens.iter().map(|g| g.name.clone()).collect(),
                            sigma_over: tb.vars.clone(),
                            tau_gens: sb.gens.iter().map(|g| g.name.clone()).collect(),
                            tau_over: ta.vars.clone(),
                            forward_over: tb.vars.clone(),
                            backward_over: ta.vars.clone(),
                            collapse_over: adjoined_names(&ta.vars, adjoin),
                        }
                    }
                };
                iso_json(iso, &names)
            }
        };
        let bg_value = match &rep.bg {
            None => Value::Null,
            Some(bg) => {
                let ((_, _), (sb, tb), _) = mono.expect("line branch needs the monomial view");
                let b_gens: Vec<String> = sb.gens.iter().map(|g| g.name.clone()).collect();
                bg_json(&dom, bg, &tb.vars, &b_gens)
            }
        };

        let report = json!({
            "branch": rep.branch.tag(),
            "hom": opt_string(hom.map(str::to_string)),
            "source": opt_string(source.map(str::to_string)),
            "target": opt_string(target.map(str::to_string)),
            "adjoin": mono.map(|_| json!(adjoin)).unwrap_or(Value::Null),
            "auto": opt_string(auto.map(str::to_string)),
            "sigma": image_pairs(&sigma_gens, &sigma),
            "tau": image_pairs(&tau_gens, &tau),
            "iso": iso_value,
            "bg": bg_value,
            "ledger": ledger_json(&rep.ledger),
        });
        let mut lines = vec![format!("branch: {}", rep.branch.tag())];
        for (g, im) in sigma_gens.iter().zip(&sigma) {
            lines.push(format!("sigma: {g} -> {im}"));
        }
        for (g, im) in tau_gens.iter().zip(&tau) {
            lines.push(format!("tau: {g} -> {im}"));
        }
        if trace {
            ledger_lines(&rep.ledger, &mut lines);
        }
        lines.push(format!("checks: {}", ledger_counts(&rep.ledger)));
        Ok(outcome(report, lines))
    })
}
