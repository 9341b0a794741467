use std::fmt::Write;

use qdpa::algebra::Algebra;
use qdpa::flor::{flor_decompose, verify_flor, FlorError, NonnegMatrix};
use qdpa::linalg::IntMatrix;
use qdpa::module::{injective_module, is_isomorphic, is_self_injective, loewy_report, projective_module, ModuleError};
use qdpa::search::{
    classify as run_classify, search as run_search, AnnotatedCandidate, SearchBounds, SearchError, SearchOptions,
};
use qdpa::selftest::{run_selftest, SelftestConfig};
use qdpa::twocat::{cell_rep_matrices, cells as run_cells, CellError, Indecomposable};
use serde_json::{json, Value};

pub const SCHEMA_VERSION: u32 = 1;

/// Both renderings of a command's output.
pub struct Report {
    pub json: Value,
    pub text: String,
}

fn envelope(command: &str, alg: Option<&Algebra>, mut body: Value) -> Value {
    let obj = body.as_object_mut().expect("report bodies are objects");
    obj.insert("schema_version".into(), json!(SCHEMA_VERSION));
    obj.insert("command".into(), json!(command));
    if let Some(alg) = alg {
        obj.insert("instance".into(), alg.instance().instance().to_json());
    }
    body
}

fn matrix_text(m: &IntMatrix, indent: &str) -> String {
    let width = m.entries().map(|x| x.to_string().len()).max().unwrap_or(1);
    let mut out = String::new();
    for r in 0..m.rows() {
        let cells: Vec<String> = m.row(r).iter().map(|x| format!("{x:>width$}")).collect();
        let _ = writeln!(out, "{indent}{}", cells.join(" "));
    }
    out
}

fn header(alg: &Algebra) -> String {
    format!("instance: {}\n", alg.instance().label())
}

pub fn algebra(alg: &Algebra) -> Report {
    let basis = alg.basis();
    let products: Vec<[usize; 3]> = alg.nonzero_products().into_iter().map(|(x, y, z)| [x, y, z]).collect();
    let json = envelope(
        "algebra",
        Some(alg),
        json!({
            "convention": "right-to-left: x*y applies y first",
            "dim": alg.dim(),
            "basis": basis.iter().enumerate().map(|(i, b)| json!({
                "index": i,
                "label": b.to_string(),
                "element": b,
            })).collect::<Vec<_>>(),
            "products": products,
            "cartan": alg.cartan_matrix(),
        }),
    );
    let mut text = header(alg);
    let _ = writeln!(text, "convention: right-to-left (x*y applies y first)");
    let _ = writeln!(text, "dim A = {}", alg.dim());
    let labels: Vec<String> = basis.iter().map(ToString::to_string).collect();
    let _ = writeln!(text, "basis: {}", labels.join(" "));
    let _ = writeln!(text, "nonzero products of non-idempotents:");
    for &[x, y, z] in &products {
        if basis[x].length() > 0 && basis[y].length() > 0 {
            let _ = writeln!(text, "  {} * {} = {}", basis[x], basis[y], basis[z]);
        }
    }
    let _ = writeln!(text, "cartan:");
    text.push_str(&matrix_text(&alg.cartan_matrix(), "  "));
    Report { json, text }
}

pub fn cartan(alg: &Algebra) -> Report {
    let k: Vec<usize> = (1..=alg.n()).map(|i| alg.hom_dim(i, i)).collect();
    let json = envelope("cartan", Some(alg), json!({ "cartan": alg.cartan_matrix(), "k": k }));
    let mut text = header(alg);
    text.push_str(&matrix_text(&alg.cartan_matrix(), ""));
    let _ = writeln!(
        text,
        "k: {}",
        k.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
    );
    Report { json, text }
}

pub fn projectives(alg: &Algebra) -> Result<Report, ModuleError> {
    let n = alg.n();
    let mut entries = Vec::new();
    let mut text = header(alg);
    let injectives: Vec<_> = (1..=n).map(|j| injective_module(alg, j)).collect();
    for i in 1..=n {
        let p = projective_module(alg, i);
        let loewy = loewy_report(&p);
        let mut injective_as = None;
        for (j, inj) in injectives.iter().enumerate() {
            if is_isomorphic(&p, inj)? {
                injective_as = Some(j + 1);
                break;
            }
        }
        let layers: Vec<String> = loewy.layers.iter().map(|l| format!("{l:?}")).collect();
        let _ = writeln!(
            text,
            "P_{i}: dim {}, layers {}, socle {:?}{}",
            p.dim(),
            layers.join(" / "),
            loewy.socle,
            injective_as.map_or(String::new(), |j| format!(", injective (≅ I_{j})"))
        );
        entries.push(json!({
            "vertex": i,
            "dim": p.dim(),
            "dim_vector": p.dim_vector(),
            "loewy": loewy,
            "isomorphic_injective": injective_as,
        }));
    }
    let self_injective = is_self_injective(alg)?;
    let criterion = alg.instance().special_is_trivial();
    let _ = writeln!(text, "self-injective: {self_injective} (S empty or S = V: {criterion})");
    let json = envelope(
        "projectives",
        Some(alg),
        json!({
            "projectives": entries,
            "self_injective": self_injective,
            "special_is_trivial": criterion,
        }),
    );
    Ok(Report { json, text })
}

fn labels(classes: &[Vec<Indecomposable>]) -> Vec<Vec<String>> {
    classes
        .iter()
        .map(|c| c.iter().map(ToString::to_string).collect())
        .collect()
}

pub fn cells(alg: &Algebra) -> Report {
    let c = run_cells(alg);
    let json = envelope(
        "cells",
        Some(alg),
        json!({ "left": c.left, "right": c.right, "two_sided": c.two_sided }),
    );
    let mut text = header(alg);
    for (name, classes) in [("left", &c.left), ("right", &c.right), ("two-sided", &c.two_sided)] {
        let shown: Vec<String> = labels(classes)
            .iter()
            .map(|c| format!("{{{}}}", c.join(", ")))
            .collect();
        let _ = writeln!(text, "{name} cells ({}): {}", classes.len(), shown.join(" "));
    }
    Report { json, text }
}

pub fn cell_matrices(alg: &Algebra, j: usize) -> Result<Report, CellError> {
    let cm = cell_rep_matrices(alg, j)?;
    let n = alg.n();
    let mut entries = Vec::new();
    let mut text = header(alg);
    let _ = writeln!(text, "left cell L_{j}; objects are P_1..P_{n}");
    for i in 1..=n {
        for k in 1..=n {
            let m = &cm.matrices[i - 1][k - 1];
            entries.push(json!({ "f": format!("F({i},{k})"), "matrix": m }));
            let _ = writeln!(text, "[F({i},{k})]");
            text.push_str(&matrix_text(m, "  "));
        }
    }
    let json = envelope(
        "cellmatrices",
        Some(alg),
        json!({ "left_cell": j, "matrices": entries }),
    );
    Ok(Report { json, text })
}

pub fn flor(m: &NonnegMatrix) -> Result<Report, FlorError> {
    let form = flor_decompose(m)?;
    let verified = verify_flor(m.matrix(), &form);
    let one = |v: &[usize]| v.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(" ");
    let mut text = String::new();
    let _ = writeln!(text, "lambda: {}", form.scalar);
    let _ = writeln!(
        text,
        "first: [{}]  core: [{}]  last: [{}]",
        one(&form.first_block),
        one(&form.core),
        one(&form.last_block)
    );
    let classes: Vec<String> = form.core_classes.iter().map(|c| format!("[{}]", one(c))).collect();
    let _ = writeln!(text, "core classes: {}", classes.join(" "));
    let _ = writeln!(text, "verified: {verified}");
    text.push_str(&form.display_blocks(m.matrix()));
    let json = envelope(
        "flor",
        None,
        json!({ "size": m.size(), "index_base": 0, "form": form, "verified": verified }),
    );
    Ok(Report { json, text })
}

fn candidate_text(out: &mut String, a: &AnnotatedCandidate) {
    let c = &a.candidate;
    let _ = writeln!(out, "r = {}, cartanB:", c.r());
    out.push_str(&matrix_text(&c.cartan_b(), "    "));
    for i in 1..=c.n() {
        for j in 1..=c.n() {
            let b = c.block(i, j);
            if !b.is_zero() {
                let rows: Vec<String> = b.to_rows().iter().map(|r| format!("{r:?}")).collect();
                let _ = writeln!(out, "  m[{i}][{j}] = {}", rows.join(" "));
            }
        }
    }
    if a.violated.is_empty() {
        let _ = writeln!(out, "  passes every check");
    } else {
        let _ = writeln!(out, "  violates: {}", a.violated.join(", "));
    }
}

pub fn search(alg: &Algebra, bounds: &SearchBounds, options: &SearchOptions) -> Result<Report, SearchError> {
    let out = run_search(alg, bounds, options)?;
    let annotated: Vec<AnnotatedCandidate> = out
        .candidates
        .into_iter()
        .map(|c| AnnotatedCandidate::new(alg, c))
        .collect();
    let mut text = header(alg);
    let _ = writeln!(
        text,
        "bounds: r <= {}, entries <= {}; faithful: {}, dichotomy: {}",
        bounds.r_max, bounds.entry_cap, options.require_faithful, options.require_dichotomy
    );
    let _ = writeln!(text, "{} candidates ({} nodes)", annotated.len(), out.nodes);
    for (idx, a) in annotated.iter().enumerate() {
        let _ = write!(text, "#{} ", idx + 1);
        candidate_text(&mut text, a);
    }
    let json = envelope(
        "search",
        Some(alg),
        json!({
            "bounds": bounds,
            "require_faithful": options.require_faithful,
            "require_dichotomy": options.require_dichotomy,
            "nodes": out.nodes,
            "candidates": annotated,
        }),
    );
    Ok(Report { json, text })
}

pub fn classify(alg: &Algebra, bounds: &SearchBounds, budget: u64) -> Result<(Report, bool), SearchError> {
    let v = run_classify(alg, bounds, budget)?;
    let mut text = header(alg);
    let _ = writeln!(text, "bounds: r <= {}, entries <= {}", bounds.r_max, bounds.entry_cap);
    if v.covered_by_prior_work {
        let _ = writeln!(
            text,
            "note: S is empty or S = V (self-injective); this case is covered by earlier results"
        );
    }
    let _ = writeln!(text, "cell representation found: {}", v.cell_found);
    let _ = writeln!(
        text,
        "faithful solutions with the dichotomy: {} ({} pass the derived constraints)",
        v.with_dichotomy.len(),
        v.with_dichotomy
            .iter()
            .filter(|a| a.checks.derived_constraints_hold())
            .count()
    );
    let _ = writeln!(text, "unfaithful solutions: {}", v.unfaithful.len());
    let _ = writeln!(text, "extra solutions without the dichotomy: {}", v.extra.len());
    for (idx, a) in v.extra.iter().enumerate() {
        let _ = write!(text, "  extra #{} ", idx + 1);
        candidate_text(&mut text, a);
    }
    let _ = writeln!(
        text,
        "verdict: {}",
        if v.confirmed { "confirmed" } else { "NOT confirmed" }
    );
    let confirmed = v.confirmed;
    let json = envelope("classify", Some(alg), json!({ "verdict": v }));
    Ok((Report { json, text }, confirmed))
}

pub fn selftest(config: &SelftestConfig) -> (Report, bool) {
    let report = run_selftest(config);
    let passed = report.passed();
    let mut text = report.to_string();
    let _ = writeln!(
        text,
        "{}",
        if passed {
            "all criteria pass"
        } else {
            "some criteria FAIL"
        }
    );
    let json = envelope("selftest", None, json!({ "report": report, "passed": passed }));
    (Report { json, text }, passed)
}
