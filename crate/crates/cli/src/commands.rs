use std::collections::BTreeSet;
use std::path::Path;

use serde_json::{json, Value};

use hermitia::classify::{default_d_max, enumerate_admissible};
use hermitia::gf::field_of_order;
use hermitia::matff::{SurfaceJson, SurfaceSpec};
use hermitia::orbit::{
    build_curve, count_report, embed_qprime, equivalent, inflate_case_one, q2_lambda_rep,
    q2_representatives, sample_nondiagonal, stabilizer_search, CaseId, StabMode,
};
use hermitia::tetra::{smoothness_scan, Signature};

use crate::{CliError, ModeArg, Outcome};

/// Stabilizer scans inside `count` stop at this many field elements.
const COUNT_SEARCH_LIMIT: u64 = 1 << 20;

fn tag(v: &impl serde::Serialize) -> String {
    match serde_json::to_value(v) {
        Ok(Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(_) => String::new(),
    }
}

fn opt(v: Option<impl ToString>) -> String {
    v.map_or_else(|| "-".into(), |x| x.to_string())
}

pub fn classify(q: u64, max_d: Option<u64>) -> Result<Outcome, CliError> {
    let d_max = max_d.unwrap_or_else(|| default_d_max(q));
    let report = enumerate_admissible(q, d_max)?;
    let expected: BTreeSet<Signature> = CaseId::valid_for(q)
        .into_iter()
        .map(|c| c.signature(q))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .filter(|s| s.d <= d_max)
        .collect();
    let found: BTreeSet<Signature> = report.signatures().into_iter().collect();
    let matches = expected == found && !report.has_unexpected();
    let mut tsv = vec![
        vec!["sig", "canonical", "dim", "case", "shape_matches", "method"]
            .into_iter()
            .map(String::from)
            .collect::<Vec<_>>(),
    ];
    for a in &report.admissible {
        tsv.push(vec![
            a.sig.to_string(),
            a.canonical.to_string(),
            a.dim.to_string(),
            tag(&a.case),
            a.shape_matches.to_string(),
            a.method.clone(),
        ]);
    }
    tsv.push(vec!["# matches".into(), matches.to_string()]);
    Ok(Outcome {
        json: json!({
            "report": report,
            "expected": expected,
            "found": found,
            "matches": matches,
        }),
        tsv,
        consistent: matches,
    })
}

pub fn count(q: u64, search: bool) -> Result<Outcome, CliError> {
    let report = count_report(q, search, COUNT_SEARCH_LIMIT)?;
    let mut tsv = vec![[
        "case",
        "d",
        "count",
        "aut",
        "stab",
        "search_stab",
        "search_count",
        "matches",
    ]
    .map(String::from)
    .to_vec()];
    for e in &report.entries {
        tsv.push(vec![
            e.case.to_string(),
            e.d.to_string(),
            e.count.to_string(),
            e.aut.to_string(),
            opt(e.stab),
            opt(e.search_stab),
            opt(e.search_count),
            opt(e.matches),
        ]);
    }
    Ok(Outcome {
        consistent: !report.has_mismatch(),
        json: serde_json::to_value(&report).expect("serializable"),
        tsv,
    })
}

pub fn build(
    q: u64,
    case: CaseId,
    surface: Option<&Path>,
    max_ext: u32,
    scan_degree: u32,
) -> Result<Outcome, CliError> {
    case.check(q)?;
    let surf = match surface {
        None => SurfaceSpec::fermat(q)?,
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
            let j: SurfaceJson = serde_json::from_str(&text)
                .map_err(|e| CliError::Input(format!("bad surface file: {e}")))?;
            if j.q != q {
                return Err(CliError::Input(format!(
                    "surface file has q = {}, expected {q}",
                    j.q
                )));
            }
            SurfaceSpec::from_json(&j)?
        }
    };
    if !surf.is_hermitian() {
        return Err(CliError::Input(
            "surface Gram matrix is not Hermitian".into(),
        ));
    }
    if !surf.is_smooth() {
        return Err(CliError::Input("surface Gram matrix is singular".into()));
    }
    let built = build_curve(case, q, &surf, max_ext)?;
    let scan = smoothness_scan(case, q, &field_of_order(q, scan_degree)?)?;
    let smooth = scan.deficient.is_empty();
    let expected_point = [0u64, 0, 0, 1];
    let singularity_as_predicted = match case {
        CaseId::C1 => smooth,
        _ => scan.rank_at(&expected_point) == Some(1),
    };
    let nonplanar = built.curve.is_nonplanar();
    let consistent =
        built.on_surface && nonplanar && scan.all_on_equations && singularity_as_predicted;
    let mut tsv = vec![
        vec!["case".into(), case.to_string()],
        vec!["sig".into(), built.curve.sig.to_string()],
        vec![
            "frame_field".into(),
            format!("GF({})", built.curve.frame.field().size()),
        ],
        vec!["on_surface".into(), built.on_surface.to_string()],
        vec!["nonplanar".into(), nonplanar.to_string()],
        vec!["smooth".into(), smooth.to_string()],
    ];
    for d in &scan.deficient {
        tsv.push(vec!["deficient".into(), tag(&d.point), d.rank.to_string()]);
    }
    tsv.push(vec!["# consistent".into(), consistent.to_string()]);
    Ok(Outcome {
        json: json!({
            "curve": built.curve.to_json(),
            "surface": surf.to_json(),
            "target": built.target.to_json(),
            "on_surface": built.on_surface,
            "nonplanar": nonplanar,
            "smooth": smooth,
            "smoothness": scan,
            "predicted_singular_point": if case == CaseId::C1 { Value::Null } else { json!(expected_point) },
            "singularity_as_predicted": singularity_as_predicted,
            "consistent": consistent,
        }),
        tsv,
        consistent,
    })
}

pub fn stabilizer(
    q: u64,
    case: CaseId,
    mode: ModeArg,
    samples: u64,
    seed: u64,
) -> Result<Outcome, CliError> {
    case.check(q)?;
    let mode = match mode {
        ModeArg::Diagonal => StabMode::DiagonalExhaustive,
        ModeArg::Full => StabMode::FullSmall,
    };
    let report = stabilizer_search(case, q, mode, None)?;
    let hits = if samples > 0 {
        sample_nondiagonal(case, q, &field_of_order(q, 6)?, samples, seed)?.len()
    } else {
        0
    };
    // a full scan over a small field only sees a subgroup
    let order_ok = match mode {
        StabMode::DiagonalExhaustive => report.matches && report.cyclic,
        StabMode::FullSmall => {
            report.order > 0 && report.predicted_order % report.order as u64 == 0
        }
    };
    let consistent = order_ok && report.closed && hits == 0;
    let tsv = vec![
        vec!["case".into(), case.to_string()],
        vec!["mode".into(), report.mode.clone()],
        vec!["search_field".into(), report.search_field.clone()],
        vec!["order".into(), report.order.to_string()],
        vec!["predicted_order".into(), report.predicted_order.to_string()],
        vec!["cyclic".into(), report.cyclic.to_string()],
        vec!["closed".into(), report.closed.to_string()],
        vec!["match".into(), report.matches.to_string()],
        vec!["nondiagonal_samples".into(), samples.to_string()],
        vec!["nondiagonal_hits".into(), hits.to_string()],
    ];
    let mut json = serde_json::to_value(&report).expect("serializable");
    json["nondiagonal_samples"] = json!(samples);
    json["nondiagonal_hits"] = json!(hits);
    json["consistent"] = json!(consistent);
    Ok(Outcome {
        json,
        tsv,
        consistent,
    })
}

pub fn reps_q2(lambdas: Option<&Path>, search_degree: u32) -> Result<Outcome, CliError> {
    let lambdas: Vec<u64> = match lambdas {
        None => (0..4).collect(),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Input(format!("bad lambda file: {e}")))?
        }
    };
    if let Some(bad) = lambdas.iter().find(|&&l| l >= 4) {
        return Err(CliError::Input(format!("{bad} is not an element of GF(4)")));
    }
    let f4 = field_of_order(2, 2)?;
    let search = field_of_order(2, search_degree)?;
    let reps: Vec<_> = q2_representatives()
        .into_iter()
        .chain(lambdas.iter().map(|&l| q2_lambda_rep(l)))
        .collect();
    let forms = reps
        .iter()
        .map(|r| embed_qprime(&inflate_case_one(&r.params, &f4)?, CaseId::C1, 2))
        .collect::<Result<Vec<_>, _>>()?;
    let n = forms.len();
    let mut matrix = vec![vec![true; n]; n];
    for a in 0..n {
        for b in a + 1..n {
            let eq = equivalent(&forms[a], &forms[b], &search, true)?.is_some();
            matrix[a][b] = eq;
            matrix[b][a] = eq;
        }
    }
    let all_inequivalent = (0..n).all(|a| (0..n).all(|b| a == b || !matrix[a][b]));
    let mut tsv = vec![std::iter::once(String::from("label"))
        .chain(reps.iter().map(|r| r.label.clone()))
        .collect::<Vec<_>>()];
    for (r, row) in reps.iter().zip(&matrix) {
        tsv.push(
            std::iter::once(r.label.clone())
                .chain(row.iter().map(|&e| u8::from(e).to_string()))
                .collect(),
        );
    }
    tsv.push(vec![
        "# all_inequivalent".into(),
        all_inequivalent.to_string(),
    ]);
    Ok(Outcome {
        json: json!({
            "search_field": format!("GF({})", search.size()),
            "field_bounded": true,
            "forms": reps,
            "equivalent": matrix,
            "all_inequivalent": all_inequivalent,
        }),
        tsv,
        consistent: all_inequivalent,
    })
}
