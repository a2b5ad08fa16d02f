//! Exit criteria. Every criterion runs to completion and prints one line;
//! the process fails if any criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use hermitia::classify::{enumerate_admissible, solution_space, space_matches_shape, FormShape};
use hermitia::gf::{field_of_order, make_embedding, FieldDesc};
use hermitia::matff::{
    hermitian_decompose, random_hermitian_invertible, twisted_gram, Mat, SurfaceSpec,
};
use hermitia::orbit::{
    act, aut_order, build_curve, count_td, embed_qprime, equivalent, hermitian_rep_c1,
    inflate_case_one, q2_lambda_rep, sample_nondiagonal, stab_order, stabilizer_search, sympow,
    BigForm, CaseId, Count, StabMode,
};
use hermitia::tetra::{expand_form, is_identically_zero, smoothness_scan, Signature};

type Verdict = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:?}, limit {limit:?}"))
}

fn cli_count(q: u64) -> Result<(Value, Duration), String> {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_hermitia"))
        .args(["count", "--q", &q.to_string()])
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let json: Value = serde_json::from_slice(&out.stdout).map_err(|e| {
        format!(
            "q={q}: unparsable output ({e}), exit {:?}",
            out.status.code()
        )
    })?;
    Ok((json, elapsed))
}

fn count_reproduction() -> Verdict {
    let table: [(u64, [(&str, Value); 2]); 4] = [
        (3, [("C1", 18144.into()), ("C3", 1866240.into())]),
        (4, [("C1", 249600.into()), ("C2", 15667200.into())]),
        (5, [("C1", 1890000.into()), ("C3", 468000000.into())]),
        (2, [("C1", "infinite".into()), ("C2", "infinite".into())]),
    ];
    for (q, want) in table {
        let (json, elapsed) = cli_count(q)?;
        ensure(elapsed < Duration::from_secs(1), || {
            format!("count --q {q} took {elapsed:?}")
        })?;
        let entries = json["entries"].as_array().ok_or("missing entries")?;
        ensure(entries.len() == 2, || {
            format!("q={q}: {} entries", entries.len())
        })?;
        for (case, value) in want {
            let e = entries
                .iter()
                .find(|e| e["case"] == case)
                .ok_or_else(|| format!("q={q}: no {case}"))?;
            ensure(e["count"] == value, || {
                format!("q={q} {case}: got {}, want {value}", e["count"])
            })?;
        }
    }
    Ok("q = 2, 3, 4, 5 via the binary".into())
}

fn orbit_stabilizer() -> Verdict {
    let start = Instant::now();
    let mut checked = 0;
    for q in [3u64, 4, 5, 7, 8, 9, 11, 13] {
        let aut = aut_order(q).map_err(|e| e.to_string())?;
        for case in CaseId::valid_for(q) {
            let stab = stab_order(case, q)
                .map_err(|e| e.to_string())?
                .ok_or("no stabilizer order")?;
            let count = count_td(case, q).map_err(|e| e.to_string())?;
            ensure(aut % stab == 0, || {
                format!("q={q} {case}: {stab} does not divide {aut}")
            })?;
            ensure(Count::Finite(aut / stab) == count, || {
                format!("q={q} {case}: quotient {} vs {count}", aut / stab)
            })?;
            checked += 1;
        }
    }
    within(start, Duration::from_secs(1))?;
    Ok(format!("{checked} (q, case) pairs"))
}

fn classification() -> Verdict {
    let start = Instant::now();
    let sig = |d, i, j| Signature::new(d, i, j).unwrap();
    let runs = [
        (2u64, 12u64, vec![sig(3, 1, 2), sig(6, 3, 5)]),
        (3, 12, vec![sig(4, 1, 3), sig(6, 2, 5)]),
        (4, 21, vec![sig(5, 1, 4), sig(20, 5, 17)]),
    ];
    let mut failures = Vec::new();
    for (q, d_max, want) in runs {
        let report = enumerate_admissible(q, d_max).map_err(|e| e.to_string())?;
        let mut found = report.signatures();
        found.sort();
        if found != want {
            let shown: Vec<String> = found.iter().map(|s| s.to_string()).collect();
            failures.push(format!("q={q}: found {{{}}}", shown.join(",")));
            continue;
        }
        for a in &report.admissible {
            let space = solution_space(a.sig, q).map_err(|e| e.to_string())?;
            let case = [FormShape::I, FormShape::II, FormShape::III]
                .into_iter()
                .find(|c| c.curve_case().signature(q).ok() == Some(a.sig))
                .ok_or_else(|| format!("q={q}: {} has no case", a.sig))?;
            if !(a.shape_matches && space_matches_shape(&space, case)) {
                failures.push(format!("q={q}: {} does not match its case shape", a.sig));
            }
        }
    }
    within(start, Duration::from_secs(300))?;
    if failures.is_empty() {
        Ok("q = 2, 3, 4".into())
    } else {
        Err(failures.join("; "))
    }
}

fn decomposition() -> Verdict {
    let start = Instant::now();
    for q in [2u64, 3, 4, 5, 7] {
        for seed in 0..200 {
            let a = random_hermitian_invertible(q, 4, seed).map_err(|e| e.to_string())?;
            let b = hermitian_decompose(&a, q).map_err(|e| format!("q={q} seed={seed}: {e}"))?;
            let id = Mat::identity(a.field(), 4);
            let back = twisted_gram(&b, &id, q).map_err(|e| e.to_string())?;
            ensure(back == a, || {
                format!("q={q} seed={seed}: round trip differs")
            })?;
        }
    }
    within(start, Duration::from_secs(10))?;
    Ok("1000 matrices".into())
}

fn construction() -> Verdict {
    let start = Instant::now();
    let combos = [
        (CaseId::C1, 2u64),
        (CaseId::C1, 3),
        (CaseId::C1, 4),
        (CaseId::C1, 5),
        (CaseId::C2, 2),
        (CaseId::C2, 4),
        (CaseId::C3, 3),
        (CaseId::C3, 5),
    ];
    for (case, q) in combos {
        let surf = SurfaceSpec::fermat(q).map_err(|e| e.to_string())?;
        let built = build_curve(case, q, &surf, 6).map_err(|e| format!("{case} q={q}: {e}"))?;
        ensure(built.on_surface, || {
            format!("{case} q={q}: not on the surface")
        })?;
    }
    for q in [2u64, 3, 4, 5] {
        let sig = CaseId::C1.signature(q).map_err(|e| e.to_string())?;
        let rep = hermitian_rep_c1(q).map_err(|e| e.to_string())?;
        let zero = is_identically_zero(sig, q, &rep).map_err(|e| e.to_string())?;
        ensure(zero, || {
            format!("q={q}: Hermitian case-I form does not cancel")
        })?;
    }
    within(start, Duration::from_secs(60))?;
    Ok("8 constructions, 4 cancellations".into())
}

fn smoothness() -> Verdict {
    let start = Instant::now();
    let mut failures = Vec::new();
    for (case, q) in [
        (CaseId::C1, 2u64),
        (CaseId::C1, 3),
        (CaseId::C1, 4),
        (CaseId::C2, 2),
        (CaseId::C2, 4),
        (CaseId::C3, 3),
    ] {
        let field = field_of_order(q, 4).map_err(|e| e.to_string())?;
        let report = smoothness_scan(case, q, &field).map_err(|e| e.to_string())?;
        ensure(report.all_on_equations, || {
            format!("{case} q={q}: image leaves the equations")
        })?;
        let ok = match case {
            CaseId::C1 => report.deficient.is_empty(),
            _ => report.rank_at(&[0, 0, 0, 1]) == Some(1),
        };
        if !ok {
            let pts: Vec<String> = report
                .deficient
                .iter()
                .map(|d| format!("{:?} rank {}", d.point, d.rank))
                .collect();
            failures.push(format!(
                "{case} q={q}: deficient points [{}]",
                pts.join(", ")
            ));
        }
    }
    within(start, Duration::from_secs(60))?;
    if failures.is_empty() {
        Ok("C1 q=2,3,4; C2 q=2,4; C3 q=3".into())
    } else {
        Err(failures.join("; "))
    }
}

fn stabilizers() -> Verdict {
    let start = Instant::now();
    let mut failures = Vec::new();
    for (case, q, want) in [(CaseId::C3, 3u64, 7usize), (CaseId::C2, 4, 65)] {
        let r = stabilizer_search(case, q, StabMode::DiagonalExhaustive, None)
            .map_err(|e| e.to_string())?;
        if r.order != want || !r.cyclic || r.predicted_order != want as u64 {
            failures.push(format!(
                "{case} q={q}: order {} (cyclic {}), predicted {}, expected {want}",
                r.order, r.cyclic, r.predicted_order
            ));
        }
        let field = field_of_order(q, 6).map_err(|e| e.to_string())?;
        let hits = sample_nondiagonal(case, q, &field, 10_000, 7).map_err(|e| e.to_string())?;
        if !hits.is_empty() {
            failures.push(format!(
                "{case} q={q}: {} non-diagonal solutions",
                hits.len()
            ));
        }
    }
    within(start, Duration::from_secs(600))?;
    if failures.is_empty() {
        Ok("C3 q=3: 7, C2 q=4: 65".into())
    } else {
        Err(failures.join("; "))
    }
}

fn c2_q2_form(field: &FieldDesc, b2: u64) -> BigForm {
    let m = Mat::from_rows(
        field,
        &[
            vec![0, 1, 0, b2],
            vec![0, 0, 0, 1],
            vec![0, 0, 1, 0],
            vec![1, b2, 0, 0],
        ],
    )
    .unwrap();
    embed_qprime(&m, CaseId::C2, 2).unwrap()
}

fn q2_family() -> Verdict {
    let start = Instant::now();
    let f4 = field_of_order(2, 2).map_err(|e| e.to_string())?;
    let f16 = field_of_order(2, 4).map_err(|e| e.to_string())?;
    let family: Vec<BigForm> = (0..4)
        .map(|l| {
            embed_qprime(
                &inflate_case_one(&q2_lambda_rep(l).params, &f4).unwrap(),
                CaseId::C1,
                2,
            )
            .unwrap()
        })
        .collect();
    for a in 0..4 {
        for b in a + 1..4 {
            let eq = equivalent(&family[a], &family[b], &f16, true).map_err(|e| e.to_string())?;
            ensure(eq.is_none(), || format!("λ={a} and λ={b} are equivalent"))?;
        }
    }
    let base = c2_q2_form(&f16, 1);
    let mut non_cube = 0;
    for beta in 2..16u64 {
        if f16.pow(beta, 3) == 1 {
            continue;
        }
        let eq =
            equivalent(&base, &c2_q2_form(&f16, beta), &f16, true).map_err(|e| e.to_string())?;
        ensure(eq.is_none(), || {
            format!("b2 = 1 and b2 = {beta} are equivalent")
        })?;
        non_cube += 1;
    }
    let emb = make_embedding(&f4, &f16).map_err(|e| e.to_string())?;
    let xi = emb.apply(f4.generator());
    let planted =
        equivalent(&base, &c2_q2_form(&f16, xi), &f16, true).map_err(|e| e.to_string())?;
    within(start, Duration::from_secs(600))?;
    if planted.is_some() {
        return Ok(format!("λ-family inequivalent, {non_cube} non-cube ratios inequivalent, cube-root pair equivalent"));
    }
    let f64_ = field_of_order(2, 6).map_err(|e| e.to_string())?;
    let emb = make_embedding(&f4, &f64_).map_err(|e| e.to_string())?;
    let wider = equivalent(
        &c2_q2_form(&f64_, 1),
        &c2_q2_form(&f64_, emb.apply(f4.generator())),
        &f64_,
        true,
    )
    .map_err(|e| e.to_string())?;
    Err(format!(
        "cube-root pair b2 = 1, {xi} not equivalent over GL2(GF(16)) (over GF(64): {})",
        if wider.is_some() {
            "equivalent"
        } else {
            "not equivalent"
        }
    ))
}

fn random_mat(f: &FieldDesc, rng: &mut ChaCha8Rng) -> Mat {
    let rows: Vec<Vec<u64>> = (0..4)
        .map(|_| (0..4).map(|_| rng.gen_range(0..f.size())).collect())
        .collect();
    Mat::from_rows(f, &rows).unwrap()
}

fn dense_form(f: &FieldDesc, sig: Signature, q: u64, b: &Mat, t: u64) -> u64 {
    let v: Vec<u64> = sig.exponents().iter().map(|&e| f.pow(t, e)).collect();
    let mut acc = 0;
    for l in 0..4 {
        for m in 0..4 {
            acc = f.add(acc, f.mul(f.mul(v[l], b.get(l, m)), f.pow(v[m], q)));
        }
    }
    acc
}

fn properties() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for (q, k) in [(2u64, 2u32), (3, 2), (4, 2), (5, 2), (2, 8), (3, 4), (7, 2)] {
        let f = field_of_order(q, k).map_err(|e| e.to_string())?;
        for _ in 0..300 {
            let [a, b, c] = [0; 3].map(|_| rng.gen_range(0..f.size()));
            ensure(f.add(a, f.add(b, c)) == f.add(f.add(a, b), c), || {
                "add assoc".into()
            })?;
            ensure(f.mul(a, f.mul(b, c)) == f.mul(f.mul(a, b), c), || {
                "mul assoc".into()
            })?;
            ensure(
                f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c)),
                || "distributive".into(),
            )?;
            ensure(f.add(a, f.neg(a)) == 0, || "negation".into())?;
            ensure(a == 0 || f.mul(a, f.inv(a).unwrap()) == 1, || {
                "inverse".into()
            })?;
            if k == 2 {
                let conj = f.pow(a, q);
                ensure(f.pow(conj, q) == a, || {
                    format!("frobenius is not an involution on GF({q}^2)")
                })?;
                ensure(f.pow(f.mul(a, conj), q) == f.mul(a, conj), || {
                    "norm leaves GF(q)".into()
                })?;
            }
        }
    }
    for q in [2u64, 3] {
        let f = field_of_order(q, 2).map_err(|e| e.to_string())?;
        let m = embed_qprime(&hermitian_rep_c1(q).unwrap(), CaseId::C1, q)
            .map_err(|e| e.to_string())?;
        for _ in 0..40 {
            let g = hermitia::matff::random_invertible_with(&f, 2, &mut rng);
            let h = hermitia::matff::random_invertible_with(&f, 2, &mut rng);
            let d = rng.gen_range(1..12);
            let lhs = sympow(&g.mul(&h).unwrap(), d).unwrap();
            let rhs = sympow(&g, d).unwrap().mul(&sympow(&h, d).unwrap()).unwrap();
            ensure(lhs == rhs, || {
                format!("sympow not multiplicative, q={q} d={d}")
            })?;
            let left = act(&act(&m, &g).unwrap(), &h).unwrap();
            let right = act(&m, &g.mul(&h).unwrap()).unwrap();
            ensure(left == right, || format!("action law fails, q={q}"))?;
        }
        ensure(act(&m, &Mat::identity(&f, 2)).unwrap() == m, || {
            "identity acts nontrivially".into()
        })?;
    }
    for q in [2u64, 3] {
        let big = field_of_order(q, 4).map_err(|e| e.to_string())?;
        for _ in 0..30 {
            let d = rng.gen_range(3..=10u64);
            let i = rng.gen_range(1..d - 1);
            let j = rng.gen_range(i + 1..d);
            let sig = Signature::new(d, i, j).unwrap();
            let space = solution_space(sig, q).map_err(|e| e.to_string())?;
            let coeffs: Vec<u64> = (0..space.dim())
                .map(|_| rng.gen_range(0..big.size()))
                .collect();
            for b in [random_mat(&big, &mut rng), space.combination(&big, &coeffs)] {
                let form = expand_form(sig, q, &b).map_err(|e| e.to_string())?;
                let zero = is_identically_zero(sig, q, &b).map_err(|e| e.to_string())?;
                for t in big.elements() {
                    let dense = dense_form(&big, sig, q, &b, t);
                    ensure(form.evaluate(1, t) == dense, || {
                        format!("{sig}: sparse and dense disagree")
                    })?;
                    ensure(!zero || dense == 0, || {
                        format!("{sig}: zero form evaluates nonzero")
                    })?;
                }
            }
            let projected = space.combination(&big, &coeffs);
            ensure(is_identically_zero(sig, q, &projected).unwrap(), || {
                format!("{sig}: solution does not vanish")
            })?;
        }
    }
    for _ in 0..2000 {
        let d = rng.gen_range(3..=60u64);
        let i = rng.gen_range(1..d - 1);
        let j = rng.gen_range(i + 1..d);
        let s = Signature::new(d, i, j).unwrap();
        let c = s.canonical();
        ensure(c.canonical() == c, || {
            format!("{s}: canonical not idempotent")
        })?;
        ensure(s.flip().canonical() == c, || {
            format!("{s}: flip changes canonical form")
        })?;
        ensure(s.scaled(rng.gen_range(2..5)).canonical() == c, || {
            format!("{s}: scaling changes canonical form")
        })?;
    }
    within(start, Duration::from_secs(60))?;
    Ok("fields, frobenius, sympow/act, expansion, canonical signatures".into())
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 9] = [
        ("count reproduction", count_reproduction),
        ("orbit-stabilizer consistency", orbit_stabilizer),
        ("classification rediscovery", classification),
        ("decomposition round-trip", decomposition),
        ("curve construction and containment", construction),
        ("smoothness and singularity", smoothness),
        ("stabilizer orders", stabilizers),
        ("q = 2 family evidence", q2_family),
        ("property suites", properties),
    ];
    let mut failed = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let t = start.elapsed();
        match verdict {
            Ok(detail) => println!("PASS [{}] {name} ({t:.2?}): {detail}", n + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL [{}] {name} ({t:.2?}): {why}", n + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
