//! Acceptance suite: one test per advertised guarantee, each printing a
//! single `<name>: pass` / `<name>: fail` line.
//!
//! Wherever a computation is being accepted, its result is compared against
//! an independently coded oracle — bounded inverse search for units,
//! determinantal divisors for Smith forms, cofactor determinants for
//! unimodularity, brute-force windows for kernels and lattice membership —
//! never against the library's own intermediate data.

use std::panic::{catch_unwind, resume_unwind, UnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use laurel_core::algebra::{
    AlgebraPresentation, AssertedFlags, MonoGen, MonomialSubalgebra,
};
use laurel_core::automorphism::MonomialAutomorphism;
use laurel_core::cancel::{bg_cancel, characterize_laurent, reconstruct_iso, unit_normalize};
use laurel_core::domain::{CoeffDomain, Rationals};
use laurel_core::grading::{grading_lattice, presentation_neutral, Grading};
use laurel_core::hom::{LaurentExtension, LaurentHom};
use laurel_core::lattice::{integer_kernel, saturate};
use laurel_core::parse::parse_poly;
use laurel_core::{ExponentVector, IntMatrix, LatticeBasis, LaurentPoly};

/// Runs one acceptance check and prints its verdict line whether or not the
/// body panicked; a failure still fails the test afterwards.
fn check(name: &str, body: impl FnOnce() + UnwindSafe) {
    let outcome = catch_unwind(body);
    println!("{name}: {}", if outcome.is_ok() { "pass" } else { "fail" });
    if let Err(cause) = outcome {
        resume_unwind(cause);
    }
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

fn nonzero_rational(rng: &mut ChaCha8Rng) -> BigRational {
    let num = loop {
        let n: i64 = rng.gen_range(-9..=9);
        if n != 0 {
            break n;
        }
    };
    BigRational::new(BigInt::from(num), BigInt::from(rng.gen_range(1..=9i64)))
}

/// Product of `factors` random elementary matrices (transvection, swap,
/// sign flip), hence unimodular by construction.
fn random_unimodular(rng: &mut ChaCha8Rng, n: usize, factors: usize) -> IntMatrix {
    let mut rows: Vec<Vec<BigInt>> = IntMatrix::identity(n).to_rows();
    for _ in 0..rng.gen_range(1..=factors) {
        let i = rng.gen_range(0..n);
        match rng.gen_range(0..3) {
            0 => {
                let j = rng.gen_range(0..n);
                if i != j {
                    let k = BigInt::from([-2i64, -1, 1, 2][rng.gen_range(0..4)]);
                    let src = rows[j].clone();
                    for (a, b) in rows[i].iter_mut().zip(&src) {
                        *a += &k * b;
                    }
                }
            }
            1 => {
                let j = rng.gen_range(0..n);
                rows.swap(i, j);
            }
            _ => {
                for a in rows[i].iter_mut() {
                    *a = -a.clone();
                }
            }
        }
    }
    IntMatrix::from_rows(rows)
}

fn random_automorphism(rng: &mut ChaCha8Rng, n: usize, factors: usize) -> MonomialAutomorphism<Rationals> {
    let scalars = (0..n).map(|_| nonzero_rational(rng)).collect();
    MonomialAutomorphism::new(Rationals, random_unimodular(rng, n, factors), scalars)
        .expect("elementary products are unimodular")
}

/// A polynomial with an exact number of terms in `lo..=hi`, all exponents
/// inside `[-window, window]` and all coefficients nonzero.
fn random_poly(
    rng: &mut ChaCha8Rng,
    rank: usize,
    lo: usize,
    hi: usize,
    window: i64,
) -> LaurentPoly<Rationals> {
    let want = rng.gen_range(lo..=hi);
    let mut expos = std::collections::BTreeSet::new();
    while expos.len() < want {
        let e: Vec<i64> = (0..rank).map(|_| rng.gen_range(-window..=window)).collect();
        expos.insert(e);
    }
    let terms = expos
        .into_iter()
        .map(|e| (ExponentVector::from_i64(&e), nonzero_rational(rng)))
        .collect();
    LaurentPoly::from_terms(Rationals, rank, terms)
}

/// `x^k` for a rational `x != 0` and a signed integer `k`, by repeated
/// multiplication — deliberately not the library's power routine.
fn pow_rat(x: &BigRational, k: &BigInt) -> BigRational {
    let e = k.to_i64().expect("small exponent");
    let mut out = BigRational::one();
    for _ in 0..e.unsigned_abs() {
        out *= x;
    }
    if e < 0 {
        out = out.recip();
    }
    out
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Determinant by cofactor expansion on plain vectors, independent of the
/// matrix type's own elimination.
fn cofactor_det(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    if n == 1 {
        return m[0][0].clone();
    }
    let mut out = BigInt::zero();
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<BigInt>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(c, _)| *c != j)
                    .map(|(_, x)| x.clone())
                    .collect()
            })
            .collect();
        let term = &m[0][j] * cofactor_det(&minor);
        if j % 2 == 0 {
            out += term;
        } else {
            out -= term;
        }
    }
    out
}

fn corpus(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("corpus")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn laurel(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_laurel"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().expect("no signal"),
        String::from_utf8(out.stdout).expect("utf-8 stdout"),
        String::from_utf8(out.stderr).expect("utf-8 stderr"),
    )
}

// ---------------------------------------------------------------------------

#[test]
fn cubic_coordinate_ring_certifies_neutral() {
    check("cubic coordinate ring certifies neutral within 100ms", || {
        let ns = names(&["x", "y"]);
        let rel = parse_poly("x^2 - y^3 - 1", &ns, &Rationals).unwrap();
        let pres = AlgebraPresentation::new(
            Rationals,
            ns,
            vec![],
            vec![],
            vec![rel],
            AssertedFlags { base_alg_closed: true, trdeg: Some(1) },
        )
        .unwrap();
        let start = Instant::now();
        let gl = grading_lattice(&pres);
        let report = presentation_neutral(&pres);
        let elapsed = start.elapsed();
        assert!(gl.lattice.is_empty(), "expected the trivial grading lattice");
        assert_eq!(gl.lattice.rank(), 0);
        assert!(report.algebra_neutral);
        assert!(report.gen_neutral.iter().all(|&b| b));
        assert!(elapsed < Duration::from_millis(100), "took {elapsed:?}");
    });
}

/// Inverse search with bounded support: solves `(p * q)_k = [k == 0]` for
/// the coefficients of `q` over exponents `-9..=9` by rational elimination.
fn window_inverse(p: &LaurentPoly<Rationals>) -> Option<LaurentPoly<Rationals>> {
    if p.is_zero() {
        return None;
    }
    let supp: Vec<(i64, BigRational)> = p
        .terms()
        .map(|(e, c)| (e.entry(0).to_i64().expect("window exponent"), c.clone()))
        .collect();
    let (lo, hi) = (-9i64, 9i64);
    let emin = supp.iter().map(|t| t.0).min().unwrap();
    let emax = supp.iter().map(|t| t.0).max().unwrap();
    let ncols = (hi - lo + 1) as usize;
    let mut rows = Vec::new();
    for k in emin + lo..=emax + hi {
        let mut row = vec![BigRational::zero(); ncols + 1];
        for (i, a) in &supp {
            let j = k - i;
            if (lo..=hi).contains(&j) {
                row[(j - lo) as usize] += a;
            }
        }
        if k == 0 {
            row[ncols] = BigRational::one();
        }
        rows.push(row);
    }
    let sol = solve_rational(rows, ncols)?;
    let terms: Vec<(ExponentVector, BigRational)> = sol
        .into_iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(idx, c)| (ExponentVector::from_i64(&[lo + idx as i64]), c))
        .collect();
    if terms.is_empty() {
        return None;
    }
    Some(LaurentPoly::from_terms(Rationals, 1, terms))
}

/// Gauss–Jordan elimination over the rationals on an augmented matrix;
/// returns a particular solution (free unknowns set to zero), or `None`
/// when the system is inconsistent.
fn solve_rational(mut m: Vec<Vec<BigRational>>, ncols: usize) -> Option<Vec<BigRational>> {
    let nrows = m.len();
    let mut pivot_cols = Vec::new();
    let mut r = 0usize;
    for col in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(pr) = (r..nrows).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(r, pr);
        let inv = m[r][col].clone().recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..nrows {
            if i == r || m[i][col].is_zero() {
                continue;
            }
            let f = m[i][col].clone();
            let pivot_row = m[r].clone();
            for (x, p) in m[i].iter_mut().zip(&pivot_row) {
                *x -= &f * p;
            }
        }
        pivot_cols.push(col);
        r += 1;
    }
    if m[r..].iter().any(|row| !row[ncols].is_zero()) {
        return None;
    }
    let mut sol = vec![BigRational::zero(); ncols];
    for (k, &col) in pivot_cols.iter().enumerate() {
        sol[col] = m[k][ncols].clone();
    }
    Some(sol)
}

#[test]
fn unit_classification_matches_bounded_inverse_search() {
    check("unit classification agrees with bounded inverse search", || {
        let mut rng = ChaCha8Rng::seed_from_u64(0xACC2);
        // A polynomial with two or more terms is never a unit.
        for _ in 0..1000 {
            let rank = rng.gen_range(1..=2);
            let p = random_poly(&mut rng, rank, 2, 5, 6);
            assert!(p.is_unit_poly().is_none(), "false unit: {p:?}");
        }
        // A nonzero monomial always is, with its own data returned.
        for _ in 0..1000 {
            let rank = rng.gen_range(1..=2);
            let c = nonzero_rational(&mut rng);
            let e = ExponentVector::new(
                (0..rank).map(|_| BigInt::from(rng.gen_range(-20i64..=20))).collect(),
            );
            let p = LaurentPoly::monomial(Rationals, rank, c.clone(), e.clone());
            assert_eq!(p.is_unit_poly(), Some((c, e)));
        }
        // On a bounded exponent window the verdict matches an inverse
        // search that knows nothing about monomials.
        for _ in 0..400 {
            let terms = rng.gen_range(1..=3);
            let p = random_poly(&mut rng, 1, terms, terms, 3);
            let mine = p.is_unit_poly();
            let oracle = window_inverse(&p);
            assert_eq!(
                mine.is_some(),
                oracle.is_some(),
                "classification disagrees with inverse search on {p:?}"
            );
            if let (Some((c, e)), Some(found)) = (mine, oracle) {
                let one = LaurentPoly::one(Rationals, 1);
                assert_eq!(p.mul(&found).unwrap(), one, "oracle inverse fails");
                let inv = LaurentPoly::monomial(Rationals, 1, BigRational::one() / c, e.neg());
                assert_eq!(found, inv, "the two inverses differ");
            }
        }
    });
}

#[test]
fn automorphism_composition_laws_hold_exactly() {
    check("monomial automorphisms compose and invert exactly", || {
        let mut rng = ChaCha8Rng::seed_from_u64(0xACC3);
        for _ in 0..200 {
            let rank = rng.gen_range(1..=3);
            let f = random_automorphism(&mut rng, rank, 4);
            let g = random_automorphism(&mut rng, rank, 4);
            let fg = f.then(&g).unwrap();
            assert_eq!(*fg.matrix(), f.matrix().mul(g.matrix()));
            let f_inv = f.inverse().unwrap();
            let round = f.then(&f_inv).unwrap();
            assert_eq!(*round.matrix(), IntMatrix::identity(rank));
            assert!(round.scalars().iter().all(One::is_one));
            for _ in 0..10 {
                let p = random_poly(&mut rng, rank, 1, 4, 3);
                assert_eq!(
                    fg.apply(&p).unwrap(),
                    g.apply(&f.apply(&p).unwrap()).unwrap(),
                    "composite disagrees with two-step application"
                );
                assert_eq!(f_inv.apply(&f.apply(&p).unwrap()).unwrap(), p);
            }
        }
    });
}

/// The presentation of a rank-`r` torus: pairs `(p1, p1_inv), ...` with the
/// defining relations added automatically.
fn paired_torus(prefix: &str, r: usize) -> AlgebraPresentation<Rationals> {
    let mut gens = Vec::new();
    let mut pairs = Vec::new();
    for i in 1..=r {
        pairs.push((gens.len(), gens.len() + 1));
        gens.push(format!("{prefix}{i}"));
        gens.push(format!("{prefix}{i}_inv"));
    }
    AlgebraPresentation::new(Rationals, gens, pairs, vec![], vec![], AssertedFlags::default())
        .unwrap()
}

/// Rewrites a rank-`r` torus element over the `2r` paired symbols, putting
/// every exponent on the primary symbol of its pair.
fn fold_to_pairs(p: &LaurentPoly<Rationals>) -> LaurentPoly<Rationals> {
    let r = p.rank();
    let terms = p
        .terms()
        .map(|(e, c)| {
            let mut out = vec![BigInt::zero(); 2 * r];
            for (i, k) in e.entries().iter().enumerate() {
                out[2 * i] = k.clone();
            }
            (ExponentVector::new(out), c.clone())
        })
        .collect();
    LaurentPoly::from_terms(Rationals, 2 * r, terms)
}

#[test]
fn disguised_extension_isomorphisms_collapse_to_the_base_iso() {
    check("disguised extension isomorphisms collapse to the exact base isomorphism", || {
        let mut rng = ChaCha8Rng::seed_from_u64(0xACC4);
        let start = Instant::now();
        for _ in 0..100 {
            let r = rng.gen_range(1..=2);
            let n = rng.gen_range(1..=4);
            let sigma = random_automorphism(&mut rng, r, 4);
            let tau = sigma.inverse().unwrap();
            let twist = random_unimodular(&mut rng, n, 8);
            let untwist = twist.invert_unimodular().unwrap();
            let units: Vec<(BigRational, Vec<i64>)> = (0..n)
                .map(|_| {
                    (
                        nonzero_rational(&mut rng),
                        (0..r).map(|_| rng.gen_range(-2i64..=2)).collect(),
                    )
                })
                .collect();
            let src = LaurentExtension::new(
                paired_torus("t", r),
                (1..=n).map(|i| format!("y{i}")).collect(),
            )
            .unwrap();
            let tgt = LaurentExtension::new(
                paired_torus("u", r),
                (1..=n).map(|i| format!("z{i}")).collect(),
            )
            .unwrap();

            // Forward: the base iso on the pairs, then each adjoined
            // variable to a base unit times a twisted adjoined monomial.
            let mut forward = Vec::new();
            for i in 0..r {
                forward.push((
                    format!("t{}", i + 1),
                    tgt.embed_base(&fold_to_pairs(&sigma.image_of_variable(i))),
                ));
            }
            for (i, (c, k)) in units.iter().enumerate() {
                let mut expo = vec![BigInt::zero(); 2 * r + n];
                for (j, kj) in k.iter().enumerate() {
                    expo[2 * j] = BigInt::from(*kj);
                }
                for j in 0..n {
                    expo[2 * r + j] = twist[(i, j)].clone();
                }
                forward.push((
                    format!("y{}", i + 1),
                    LaurentPoly::monomial(Rationals, 2 * r + n, c.clone(), ExponentVector::new(expo)),
                ));
            }

            // Backward: the inverse base iso, and for each z_j the unit
            // that makes the round trip land on y^(D_j) exactly.
            let mut backward = Vec::new();
            for i in 0..r {
                backward.push((
                    format!("u{}", i + 1),
                    src.embed_base(&fold_to_pairs(&tau.image_of_variable(i))),
                ));
            }
            for j in 0..n {
                let mut qj = LaurentPoly::one(Rationals, r);
                for (i, (c, k)) in units.iter().enumerate() {
                    let bi = LaurentPoly::monomial(
                        Rationals,
                        r,
                        c.clone(),
                        ExponentVector::from_i64(k),
                    );
                    qj = qj.mul(&bi.pow_fraction(&-untwist[(j, i)].clone()).unwrap()).unwrap();
                }
                let wj = tau.apply(&qj).unwrap();
                let (we, wc) = wj.terms().next().map(|(e, c)| (e.clone(), c.clone())).unwrap();
                let mut expo = vec![BigInt::zero(); 2 * r + n];
                for (idx, kk) in we.entries().iter().enumerate() {
                    expo[2 * idx] = kk.clone();
                }
                for i in 0..n {
                    expo[2 * r + i] = untwist[(j, i)].clone();
                }
                backward.push((
                    format!("z{}", j + 1),
                    LaurentPoly::monomial(Rationals, 2 * r + n, wc, ExponentVector::new(expo)),
                ));
            }

            let f = LaurentHom::new(src.clone(), tgt.clone(), forward)
                .unwrap()
                .with_inverse(backward)
                .unwrap();
            let rep = reconstruct_iso(&f).unwrap();

            assert_eq!(rep.e_matrix, twist);
            assert_eq!(rep.d_matrix, untwist);
            assert_eq!(rep.d_matrix.mul(&rep.e_matrix), IntMatrix::identity(n));
            assert_eq!(rep.e_matrix.mul(&rep.d_matrix), IntMatrix::identity(n));
            for (i, (c, k)) in units.iter().enumerate() {
                let expected = fold_to_pairs(&LaurentPoly::monomial(
                    Rationals,
                    r,
                    c.clone(),
                    ExponentVector::from_i64(k),
                ));
                assert_eq!(rep.forward_units[i], expected);
            }
            // The recovered base maps are the planted iso and its inverse,
            // generator by generator (pair partners included).
            for i in 0..r {
                let fwd = fold_to_pairs(&sigma.image_of_variable(i));
                assert_eq!(rep.sigma_images[2 * i], fwd);
                assert_eq!(
                    rep.sigma_images[2 * i + 1],
                    fwd.pow_fraction(&BigInt::from(-1)).unwrap()
                );
                let bwd = fold_to_pairs(&tau.image_of_variable(i));
                assert_eq!(rep.tau_images[2 * i], bwd);
                assert_eq!(
                    rep.tau_images[2 * i + 1],
                    bwd.pow_fraction(&BigInt::from(-1)).unwrap()
                );
            }
            assert!(rep.ledger.all_ok());
        }
        let elapsed = start.elapsed();
        assert!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    });
}

/// For a matrix of rank one, Smith reduction gives the lattice generator:
/// `u*m = s*v^-1` has a single nonzero row, `s_11` times the first row of
/// `v^-1`.
fn smith_line_generator(m: &IntMatrix) -> Vec<BigInt> {
    let (s, _u, v) = m.smith_normal_form();
    assert!(s[(0, 0)].is_positive(), "rank must be at least one");
    for i in 1..m.rows().min(m.cols()) {
        assert!(s[(i, i)].is_zero(), "rank must be exactly one");
    }
    let vi = v.invert_unimodular().unwrap();
    vi.row(0).iter().map(|x| x * &s[(0, 0)]).collect()
}

#[test]
fn unit_normalization_recovers_the_hidden_line_generator() {
    check("unit normalization recovers the hidden line generator", || {
        let mut rng = ChaCha8Rng::seed_from_u64(0xACC5);
        for _ in 0..100 {
            let rank = 4usize;
            let hidden: Vec<i64> = loop {
                let v: Vec<i64> = (0..rank).map(|_| rng.gen_range(-5..=5)).collect();
                if v.iter().any(|&x| x != 0) {
                    break v;
                }
            };
            let mults: Vec<i64> = loop {
                let count = rng.gen_range(2..=5);
                let v: Vec<i64> = (0..count)
                    .map(|_| {
                        let k = rng.gen_range(1..=50i64);
                        if rng.gen_bool(0.5) {
                            -k
                        } else {
                            k
                        }
                    })
                    .collect();
                if v.iter().fold(0i64, |acc, &x| acc.gcd(&x)) == 1 {
                    break v;
                }
            };
            let weights: Vec<i64> = loop {
                let w: Vec<i64> = (0..rank).map(|_| rng.gen_range(-4..=4)).collect();
                if w.iter().zip(&hidden).map(|(a, b)| a * b).sum::<i64>() != 0 {
                    break w;
                }
            };
            let gens: Vec<MonoGen<Rationals>> = mults
                .iter()
                .enumerate()
                .map(|(i, &k)| MonoGen {
                    name: format!("u{}", i + 1),
                    coeff: nonzero_rational(&mut rng),
                    expo: ExponentVector::from_i64(
                        &hidden.iter().map(|&x| x * k).collect::<Vec<_>>(),
                    ),
                    unit: true,
                })
                .collect();
            let sub = MonomialSubalgebra::new(Rationals, rank, gens, vec![]).unwrap();
            let trace = unit_normalize(&sub, &Grading::from_i64(&weights)).unwrap();

            let wb: Vec<BigInt> = weights.iter().map(|&x| BigInt::from(x)).collect();
            let hb: Vec<BigInt> = hidden.iter().map(|&x| BigInt::from(x)).collect();
            let neg_hb: Vec<BigInt> = hb.iter().map(|x| -x).collect();

            // The answer is the planted generator up to sign, positively
            // graded, and matches the Smith-form oracle.
            let we = trace.w.expo.entries().to_vec();
            assert!(
                we == hb || we == neg_hb,
                "expected ±{hb:?}, got {we:?} (multiples {mults:?})"
            );
            assert!(dot(&we, &wb).is_positive());
            let stack = IntMatrix::from_rows(
                sub.gens().iter().map(|g| g.expo.entries().to_vec()).collect(),
            );
            let oracle = smith_line_generator(&stack);
            let neg_oracle: Vec<BigInt> = oracle.iter().map(|x| -x).collect();
            assert!(we == oracle || we == neg_oracle, "Smith oracle gives {oracle:?}");
            assert_eq!(
                LatticeBasis::from_rows(rank, vec![we.clone()]),
                sub.unit_lattice()
            );

            // The seed is a smallest-degree unit, oriented positively.
            let min_deg = sub
                .gens()
                .iter()
                .map(|g| dot(g.expo.entries(), &wb).abs())
                .min()
                .unwrap();
            assert_eq!(dot(trace.seed.expo.entries(), &wb), min_deg);

            // Every merge satisfies its binomial identities, recomputed
            // here from scratch, and the degrees strictly decrease.
            let mut cur = trace.seed.clone();
            let mut cur_deg = dot(cur.expo.entries(), &wb);
            for st in &trace.steps {
                assert_eq!(st.u, cur, "merge chain broken");
                assert_eq!(st.deg_u, cur_deg);
                assert_eq!(st.deg_v, dot(st.v.expo.entries(), &wb));
                assert_eq!(st.d, st.deg_u.gcd(&st.deg_v));
                assert!(st.d.is_positive());
                assert!(st.d < st.deg_u, "degree failed to drop");
                assert_eq!(st.a, &st.deg_u / &st.d);
                assert_eq!(st.b, &st.deg_v / &st.d);
                assert!((st.m.clone() * &st.a + st.n.clone() * &st.b).is_one());
                // v^a = (-r) * u^b defines the relation constant.
                assert_eq!(st.v.expo.scale(&st.a), st.u.expo.scale(&st.b));
                assert_eq!(
                    pow_rat(&st.v.coeff, &st.a),
                    -st.r.clone() * pow_rat(&st.u.coeff, &st.b)
                );
                // w = u^m * v^n.
                assert_eq!(st.w.expo, st.u.expo.scale(&st.m).add(&st.v.expo.scale(&st.n)));
                assert_eq!(
                    st.w.coeff,
                    pow_rat(&st.u.coeff, &st.m) * pow_rat(&st.v.coeff, &st.n)
                );
                // w^a = (-r)^n * u and w^b = (-r)^(-m) * v.
                assert_eq!(st.w.expo.scale(&st.a), st.u.expo);
                assert_eq!(
                    pow_rat(&st.w.coeff, &st.a),
                    pow_rat(&-st.r.clone(), &st.n) * &st.u.coeff
                );
                assert_eq!(st.w.expo.scale(&st.b), st.v.expo);
                assert_eq!(
                    pow_rat(&st.w.coeff, &st.b),
                    pow_rat(&-st.r.clone(), &-st.m.clone()) * &st.v.coeff
                );
                cur = st.w.clone();
                cur_deg = st.d.clone();
            }
            assert_eq!(trace.w, cur);

            // The recorded word over the generators multiplies out to the
            // final unit exactly.
            let mut expo = ExponentVector::zero(rank);
            let mut coeff = BigRational::one();
            for (idx, k) in &trace.w.word {
                expo = expo.add(&sub.gens()[*idx].expo.scale(k));
                coeff *= pow_rat(&sub.gens()[*idx].coeff, k);
            }
            assert_eq!(expo, trace.w.expo);
            assert_eq!(coeff, trace.w.coeff);

            assert!(trace.localizations.is_empty());
            assert!(trace.ledger.all_ok());
        }
    });
}

#[test]
fn line_characterization_separates_the_reference_algebras() {
    check("line characterization separates the two reference algebras", || {
        // Q[x, 1/x] presented with a unit pair: certifies, witnessed by x.
        let pres = AlgebraPresentation::new(
            Rationals,
            names(&["x", "x_inv"]),
            vec![(0, 1)],
            vec![],
            vec![],
            AssertedFlags { base_alg_closed: true, trdeg: Some(1) },
        )
        .unwrap();
        let verdict = characterize_laurent(Some(&pres), None).unwrap();
        assert!(verdict.is_laurent_line);
        let witness = verdict.witness.expect("a certifying unit");
        assert_eq!(witness.expo, ExponentVector::from_i64(&[1, 0]));
        assert_eq!(verdict.witness_gen_names, vec!["x".to_string()]);
        assert!(verdict.ledger.all_ok());

        // k[u^(+-1), v] over the base k[u^-1 v^2]: v escapes the span of
        // the base and the unit line, so the verdict is negative.
        let one = BigRational::one();
        let sub = MonomialSubalgebra::new(
            Rationals,
            2,
            vec![
                MonoGen {
                    name: "u".into(),
                    coeff: one.clone(),
                    expo: ExponentVector::from_i64(&[1, 0]),
                    unit: true,
                },
                MonoGen {
                    name: "v".into(),
                    coeff: one.clone(),
                    expo: ExponentVector::from_i64(&[0, 1]),
                    unit: false,
                },
            ],
            vec![MonoGen {
                name: "c".into(),
                coeff: one,
                expo: ExponentVector::from_i64(&[-1, 2]),
                unit: false,
            }],
        )
        .unwrap();
        let verdict = characterize_laurent(None, Some(&sub)).unwrap();
        assert!(!verdict.is_laurent_line);
        assert_eq!(
            verdict.outside_witness,
            Some(vec![BigInt::zero(), BigInt::one()])
        );
        assert_eq!(
            verdict.ledger.first_failure().expect("a failed check").name,
            "generators_span_line"
        );

        // Brute-force membership: no integer combination of (1,0) and
        // (-1,2) reaches (0,1) — but twice the witness is reached, so the
        // miss is integral, not rational.
        for a in -60..=60i64 {
            for b in -60..=60i64 {
                assert_ne!((a - b, 2 * b), (0, 1), "witness unexpectedly in the span");
            }
        }
        assert_eq!((1 - 1, 2 * 1), (0, 2));
        let span = LatticeBasis::from_rows(
            2,
            vec![
                vec![BigInt::from(1), BigInt::from(0)],
                vec![BigInt::from(-1), BigInt::from(2)],
            ],
        );
        let v01 = [BigInt::zero(), BigInt::one()];
        assert!(!span.contains(&v01));
        assert!(saturate(&span).contains(&v01));
    });
}

#[test]
fn torus_peeling_reproduces_the_ambient_automorphism() {
    check("torus peeling reproduces the ambient automorphism on all generators", || {
        let mut rng = ChaCha8Rng::seed_from_u64(0xACC7);
        for _ in 0..50 {
            let rank = rng.gen_range(1..=3);
            let alg = MonomialSubalgebra::full_torus(Rationals, rank, None);
            let alpha = random_automorphism(&mut rng, rank + 1, 6);
            let rep = bg_cancel(&alg, 1, &alpha).unwrap();
            assert_eq!(rep.unit_rank, rank);
            assert_eq!(rep.e_matrix, *alpha.matrix());
            assert_eq!(rep.image_scalars, alpha.scalars().to_vec());
            assert_eq!(rep.d_matrix, *alpha.inverse().unwrap().matrix());
            assert_eq!(rep.d_matrix.mul(&rep.e_matrix), IntMatrix::identity(rank + 1));
            // The reported data rebuilds a monomial map that agrees with
            // the planted automorphism on every ambient coordinate.
            let rebuilt = MonomialAutomorphism::new(
                Rationals,
                rep.e_matrix.clone(),
                rep.image_scalars.clone(),
            )
            .unwrap();
            for i in 0..=rank {
                assert_eq!(rebuilt.image_of_variable(i), alpha.image_of_variable(i));
            }
            // The residual identification is the coordinate identity on a
            // rank-`rank` torus.
            assert_eq!(rep.sigma_images.len(), rank);
            for (i, s) in rep.sigma_images.iter().enumerate() {
                assert_eq!(*s, LaurentPoly::variable(Rationals, rank, i));
            }
            for need in ["units_fill_torus", "unit_substitution_round_trip"] {
                assert!(
                    rep.ledger.entries().iter().any(|e| e.name == need),
                    "missing check '{need}'"
                );
            }
            assert!(rep.ledger.all_ok());
        }
    });
}

#[test]
fn scripted_cancellation_instances_select_their_branches() {
    check("scripted cancellation instances select their advertised branches", || {
        let runs = [
            ("branch_a.ring", "units_algebraic"),
            ("branch_b.ring", "units_neutral"),
            ("branch_c.ring", "field_characterize"),
        ];
        for (file, tag) in runs {
            let (code, stdout, stderr) = laurel(&["cancel", &corpus(file), "--json"]);
            assert_eq!(code, 0, "{file}: {stderr}");
            let v: Value = serde_json::from_str(&stdout).unwrap();
            assert_eq!(v["status"], "ok");
            let rep = &v["report"];
            assert_eq!(rep["branch"], tag, "{file} chose {}", rep["branch"]);
            let trail = rep["ledger"].as_array().unwrap();
            assert!(trail
                .iter()
                .any(|e| e["name"] == "branch_selected" && e["status"] == "verified"));
            // Only decline notes for the earlier routes may be failures.
            for e in trail {
                if e["status"] == "failed" {
                    let name = e["name"].as_str().unwrap();
                    assert!(name.ends_with("_applies"), "unexpected failure {name}");
                }
            }
            // Both composite directions were verified on the generators.
            if tag == "field_characterize" {
                assert!(!rep["bg"].is_null());
                assert!(trail
                    .iter()
                    .any(|e| e["name"] == "line_round_trip" && e["status"] == "verified"));
            } else {
                assert!(!rep["iso"].is_null());
                let ledger = rep["iso"]["ledger"].as_array().unwrap();
                for need in ["collapse_round_trip_source", "collapse_round_trip_target"] {
                    assert!(
                        ledger.iter().any(|e| e["name"] == need && e["status"] == "verified"),
                        "{file} missing '{need}'"
                    );
                }
                assert!(ledger.iter().all(|e| e["status"] != "failed"));
            }
        }

        // A violated hypothesis refuses with the dedicated exit code.
        let (code, stdout, _) = laurel(&["run", &corpus("violating.ring"), "--json"]);
        assert_eq!(code, 2);
        let v: Value = serde_json::from_str(&stdout).unwrap();
        assert_eq!(v["status"], "error");
        assert_eq!(v["error"]["kind"], "HypothesisFailed");
        assert_eq!(v["error"]["exit_code"], 2);
    });
}

fn assert_hermite_shape(h: &IntMatrix) {
    let mut last_pivot: Option<usize> = None;
    let mut seen_zero_row = false;
    for i in 0..h.rows() {
        match h.row(i).iter().position(|x| !x.is_zero()) {
            None => seen_zero_row = true,
            Some(p) => {
                assert!(!seen_zero_row, "nonzero row below a zero row");
                if let Some(prev) = last_pivot {
                    assert!(p > prev, "pivot columns do not step right");
                }
                last_pivot = Some(p);
                let pivot = &h[(i, p)];
                assert!(pivot.is_positive(), "pivot not positive");
                for r in 0..i {
                    assert!(
                        !h[(r, p)].is_negative() && h[(r, p)] < *pivot,
                        "entry above pivot not reduced"
                    );
                }
            }
        }
    }
}

/// All `k`-element subsets of `0..n`, lexicographically.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if k > n {
        return vec![];
    }
    let mut out = Vec::new();
    for last in k - 1..n {
        for mut head in subsets(last, k - 1) {
            head.push(last);
            out.push(head);
        }
    }
    out
}

/// `gcd` of all `k x k` minors, by cofactor expansion over every index pair.
fn minor_gcd(m: &IntMatrix, k: usize) -> BigInt {
    let mut g = BigInt::zero();
    for rows in subsets(m.rows(), k) {
        for cols in subsets(m.cols(), k) {
            let sub: Vec<Vec<BigInt>> = rows
                .iter()
                .map(|&i| cols.iter().map(|&j| m[(i, j)].clone()).collect())
                .collect();
            g = g.gcd(&cofactor_det(&sub));
        }
    }
    g
}

#[test]
fn integer_normal_forms_match_brute_force_oracles() {
    check("integer normal forms match their brute-force oracles", || {
        let mut rng = ChaCha8Rng::seed_from_u64(0xACC9);
        for _ in 0..2000 {
            let r = rng.gen_range(1..=3);
            let c = rng.gen_range(1..=3);
            let m = IntMatrix::new(
                r,
                c,
                (0..r * c).map(|_| BigInt::from(rng.gen_range(-3i64..=3))).collect(),
            );

            let (h, u) = m.hermite_normal_form();
            assert_eq!(u.mul(&m), h, "transform identity fails");
            assert!(cofactor_det(&u.to_rows()).abs().is_one(), "transform not unimodular");
            assert_hermite_shape(&h);

            let (s, us, vs) = m.smith_normal_form();
            assert_eq!(us.mul(&m).mul(&vs), s);
            assert!(cofactor_det(&us.to_rows()).abs().is_one());
            assert!(cofactor_det(&vs.to_rows()).abs().is_one());
            for i in 0..r {
                for j in 0..c {
                    if i != j {
                        assert!(s[(i, j)].is_zero(), "off-diagonal entry in Smith form");
                    }
                }
            }
            let diag: Vec<BigInt> = (0..r.min(c)).map(|i| s[(i, i)].clone()).collect();
            assert!(diag.iter().all(|x| !x.is_negative()));
            // Determinantal divisors: s_k = gcd(k-minors) / gcd((k-1)-minors).
            let mut prev = BigInt::one();
            for (k, sk) in diag.iter().enumerate() {
                let dk = minor_gcd(&m, k + 1);
                if dk.is_zero() {
                    assert!(
                        diag[k..].iter().all(Zero::is_zero),
                        "rank drop not reflected in the Smith form"
                    );
                    break;
                }
                assert_eq!(*sk, &dk / &prev, "divisor chain mismatch at {}", k + 1);
                prev = dk;
            }

            let ker = integer_kernel(&m);
            for row in ker.basis_rows() {
                assert!(m.mul_col_vec(&row).iter().all(Zero::is_zero));
            }
            assert_eq!(saturate(&ker), ker, "kernel not saturated");
            // Every solution in the window lies in the reported lattice.
            let w = 3i64;
            let mut v = vec![-w; c];
            'window: loop {
                let vb: Vec<BigInt> = v.iter().map(|&x| BigInt::from(x)).collect();
                if m.mul_col_vec(&vb).iter().all(Zero::is_zero) {
                    assert!(ker.contains(&vb), "window solution {v:?} missing");
                }
                let mut idx = 0;
                loop {
                    if idx == c {
                        break 'window;
                    }
                    v[idx] += 1;
                    if v[idx] > w {
                        v[idx] = -w;
                        idx += 1;
                    } else {
                        break;
                    }
                }
            }
        }
    });
}
