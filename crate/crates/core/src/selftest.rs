//! The bundled self-check behind `qdpa selftest`: the fixture instances,
//! seeded random trees, and one pass/fail line per acceptance criterion.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::Algebra;
use crate::fixtures;
use crate::flor::{flor_decompose, random_block_form, verify_flor, NonnegMatrix};
use crate::linalg::to_rational;
use crate::module::{is_self_injective, loewy_report, projective_module, tensor_dim};
use crate::search::{classify, SearchBounds, Verdict, DEFAULT_BUDGET};
use crate::tree::{parse_tree_spec, random_instance, validate, ValidatedInstance};
use crate::twocat::{cell_rep_matrices, cells};

/// Tree specs shipped in `fixtures/`, by file name.
pub fn bundled_fixtures() -> Vec<(String, String)> {
    [
        ("edge_s2.tree", include_str!("../../../fixtures/edge_s2.tree")),
        ("path3_s3.tree", include_str!("../../../fixtures/path3_s3.tree")),
        ("example1_n4.tree", include_str!("../../../fixtures/example1_n4.tree")),
        ("example2.tree", include_str!("../../../fixtures/example2.tree")),
        ("example2.json", include_str!("../../../fixtures/example2.json")),
        ("star3_empty.tree", include_str!("../../../fixtures/star3_empty.tree")),
    ]
    .into_iter()
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .collect()
}

/// Known `(dim A, Cartan matrix)` of the named fixtures.
fn recorded(name: &str) -> Option<(usize, Vec<Vec<i64>>)> {
    let stem = name.rsplit_once('.').map_or(name, |(s, _)| s);
    Some(match stem {
        "edge_s2" => (5, vec![vec![2, 1], vec![1, 1]]),
        "path3_s3" => (9, vec![vec![2, 1, 0], vec![1, 2, 1], vec![0, 1, 1]]),
        "example1_n4" => (
            13,
            vec![vec![2, 1, 0, 0], vec![1, 2, 1, 0], vec![0, 1, 2, 1], vec![0, 0, 1, 1]],
        ),
        "example2" => (
            12,
            vec![vec![2, 1, 0, 0], vec![1, 2, 1, 1], vec![0, 1, 1, 0], vec![0, 1, 0, 1]],
        ),
        "star3_empty" => (10, vec![vec![2, 1, 1], vec![1, 2, 0], vec![1, 0, 2]]),
        _ => return None,
    })
}

#[derive(Clone, Debug)]
pub struct SelftestConfig {
    pub seed: u64,
    /// Also classify the 4-vertex star (several minutes).
    pub full: bool,
    /// `(file name, tree spec)` pairs.
    pub fixtures: Vec<(String, String)>,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        SelftestConfig {
            seed: 0,
            full: false,
            fixtures: bundled_fixtures(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CriterionOutcome {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    /// First failure found, or a short summary of what was checked.
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub full: bool,
    pub criteria: Vec<CriterionOutcome>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }
}

impl fmt::Display for SelftestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.criteria {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            writeln!(f, "[{tag}] {:>2} {}: {}", c.id, c.name, c.detail)?;
        }
        Ok(())
    }
}

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

struct Context {
    fixtures: Vec<(String, ValidatedInstance)>,
    load_errors: Vec<String>,
    random: Vec<ValidatedInstance>,
    small_random: Vec<ValidatedInstance>,
    rng: ChaCha8Rng,
    verdicts: Option<Result<Vec<(&'static str, Verdict)>, String>>,
}

pub fn run_selftest(config: &SelftestConfig) -> SelftestReport {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut fixtures_ok = Vec::new();
    let mut load_errors = Vec::new();
    for (name, text) in &config.fixtures {
        match parse_tree_spec(text)
            .map_err(|e| e.to_string())
            .and_then(|t| validate(t).map_err(|e| e.to_string()))
        {
            Ok(inst) => fixtures_ok.push((name.clone(), inst)),
            Err(e) => load_errors.push(format!("{name}: {e}")),
        }
    }
    let mut sample = |count: usize, max_n: usize| -> Vec<ValidatedInstance> {
        (0..count)
            .map(|_| {
                let n = rng.gen_range(2..=max_n);
                random_instance(&mut rng, n)
            })
            .collect()
    };
    let random = sample(50, 8);
    let small_random = sample(20, 6);
    let mut ctx = Context {
        fixtures: fixtures_ok,
        load_errors,
        random,
        small_random,
        rng,
        verdicts: None,
    };

    let checks: [(&'static str, fn(&mut Context, &SelftestConfig) -> Check); 10] = [
        ("dimension formula and associativity", dimension),
        ("hom_dim case formula", hom_dim_formula),
        ("projective structure", projective_structure),
        ("self-injectivity criterion", self_injectivity),
        ("tensor dimensions", tensor_dims),
        ("cell structure", cell_structure),
        ("cell matrices", cell_matrices),
        ("Flor normal form", flor_checks),
        ("classification", classification),
        ("extra solutions annotated", extras),
    ];
    let criteria = checks
        .iter()
        .enumerate()
        .map(|(i, (name, check))| {
            let (passed, detail) = match check(&mut ctx, config) {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            CriterionOutcome {
                id: i + 1,
                name,
                passed,
                detail,
            }
        })
        .collect();
    SelftestReport {
        seed: config.seed,
        full: config.full,
        criteria,
    }
}

fn all_instances(ctx: &Context) -> Vec<(String, ValidatedInstance)> {
    let mut out = ctx.fixtures.clone();
    for n in 3..=6 {
        out.push((format!("example1(n={n})"), fixtures::example1(n)));
    }
    out.extend(ctx.random.iter().map(|i| (i.label(), i.clone())));
    out
}

fn dimension(ctx: &mut Context, _: &SelftestConfig) -> Check {
    if let Some(e) = ctx.load_errors.first() {
        return Err(format!("fixture failed to load: {e}"));
    }
    for (name, inst) in &ctx.fixtures {
        let alg = Algebra::build(inst);
        if let Some((dim, cartan)) = recorded(name) {
            ensure(alg.dim() == dim, || {
                format!("{name}: dim {} but recorded {dim}", alg.dim())
            })?;
            ensure(alg.cartan_matrix().to_rows() == cartan, || {
                format!("{name}: Cartan matrix differs from the recorded one")
            })?;
        }
    }
    let instances = all_instances(ctx);
    for (name, inst) in &instances {
        let alg = Algebra::build(inst);
        let expected = 4 * inst.n() - 2 - inst.special().len();
        ensure(alg.dim() == expected, || {
            format!("{name}: dim {} != 4n-2-|S| = {expected}", alg.dim())
        })?;
        let d = alg.dim();
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    let left = alg.mult(a, b).and_then(|ab| alg.mult(ab, c));
                    let right = alg.mult(b, c).and_then(|bc| alg.mult(a, bc));
                    ensure(left == right, || {
                        format!("{name}: (xy)z != x(yz) at basis ({a},{b},{c})")
                    })?;
                }
            }
        }
    }
    Ok(format!("{} instances", instances.len()))
}

fn hom_dim_formula(ctx: &mut Context, _: &SelftestConfig) -> Check {
    let instances = all_instances(ctx);
    for (name, inst) in &instances {
        let alg = Algebra::build(inst);
        for l in 1..=inst.n() {
            for k in 1..=inst.n() {
                let expected = if k == l {
                    if inst.is_special(k) {
                        1
                    } else {
                        2
                    }
                } else {
                    usize::from(inst.is_adjacent(k, l))
                };
                ensure(alg.hom_dim(l, k) == expected, || {
                    format!(
                        "{name}: hom_dim({l},{k}) = {} but the case formula gives {expected}",
                        alg.hom_dim(l, k)
                    )
                })?;
            }
        }
    }
    Ok(format!("{} instances, all pairs", instances.len()))
}

fn projective_structure(ctx: &mut Context, _: &SelftestConfig) -> Check {
    let mut instances: Vec<(String, ValidatedInstance)> = (3..=6)
        .map(|n| (format!("example1(n={n})"), fixtures::example1(n)))
        .collect();
    instances.push(("example2".into(), fixtures::example2()));
    instances.extend(ctx.random.iter().map(|i| (i.label(), i.clone())));
    let mut count = 0;
    for (name, inst) in &instances {
        let alg = Algebra::build(inst);
        for i in 1..=inst.n() {
            let rep = loewy_report(&projective_module(&alg, i));
            let neighbors: Vec<usize> = inst.neighbors(i).to_vec();
            let ok = if !inst.is_special(i) {
                rep.loewy_length == 3 && rep.top == vec![i] && rep.socle == vec![i] && rep.layers[1] == neighbors
            } else {
                // the socle is the unique neighbour, so top and socle differ
                let j = neighbors[0];
                rep.loewy_length == 2 && rep.top == vec![i] && rep.socle == vec![j]
            };
            ensure(ok, || format!("{name}: P_{i} has layers {:?}", rep.layers))?;
            count += 1;
        }
    }
    Ok(format!("{count} projectives"))
}

fn self_injectivity(ctx: &mut Context, _: &SelftestConfig) -> Check {
    let mut instances: Vec<(String, ValidatedInstance)> = ctx.fixtures.clone();
    instances.extend(ctx.small_random.iter().map(|i| (i.label(), i.clone())));
    instances.push(("edge_both_special".into(), fixtures::edge_both_special()));
    for (name, inst) in &instances {
        let alg = Algebra::build(inst);
        let computed = is_self_injective(&alg).map_err(|e| format!("{name}: {e}"))?;
        let criterion = inst.special_is_trivial();
        ensure(computed == criterion, || {
            format!("{name}: injective comparison says {computed}, criterion S = ∅ or S = V says {criterion}")
        })?;
    }
    Ok(format!("{} instances, no inconclusive test", instances.len()))
}

fn tensor_dims(ctx: &mut Context, _: &SelftestConfig) -> Check {
    let mut pairs = 0;
    for (name, inst) in &ctx.fixtures {
        let alg = Algebra::build(inst);
        for j in 1..=inst.n() {
            for k in 1..=inst.n() {
                let t = tensor_dim(&alg, j, k);
                ensure(t == alg.hom_dim(j, k), || {
                    format!("{name}: tensor_dim({j},{k}) = {t} != hom_dim")
                })?;
                pairs += 1;
            }
        }
    }
    Ok(format!("{pairs} pairs"))
}

fn cell_structure(ctx: &mut Context, _: &SelftestConfig) -> Check {
    let instances = all_instances(ctx);
    for (name, inst) in &instances {
        let c = cells(&Algebra::build(inst));
        ensure(c.two_sided.len() == 2, || {
            format!("{name}: {} two-sided cells", c.two_sided.len())
        })?;
        ensure(c.left.len() == inst.n() + 1, || {
            format!("{name}: {} left cells", c.left.len())
        })?;
        ensure(c.right.len() == inst.n() + 1, || {
            format!("{name}: {} right cells", c.right.len())
        })?;
    }
    Ok(format!("{} instances", instances.len()))
}

fn cell_matrices(ctx: &mut Context, _: &SelftestConfig) -> Check {
    let instances = all_instances(ctx);
    for (name, inst) in &instances {
        let alg = Algebra::build(inst);
        let n = inst.n();
        let mats = cell_rep_matrices(&alg, 1).map_err(|e| e.to_string())?.matrices;
        for i in 0..n {
            let k = if inst.is_special(i + 1) { 1 } else { 2 };
            ensure(mats[i][i].trace() == k, || {
                format!("{name}: trace [F_{}{}] != {k}", i + 1, i + 1)
            })?;
            for j in 0..n {
                for kk in 0..n {
                    for l in 0..n {
                        let lhs = mats[i][j].mul(&mats[kk][l]);
                        let rhs = mats[i][l].scale(&(alg.hom_dim(j + 1, kk + 1) as i64));
                        ensure(lhs == rhs, || {
                            format!(
                                "{name}: [F_{}{}][F_{}{}] != hom_dim · [F_{}{}]",
                                i + 1,
                                j + 1,
                                kk + 1,
                                l + 1,
                                i + 1,
                                l + 1
                            )
                        })?;
                    }
                }
            }
        }
    }
    Ok(format!("{} instances", instances.len()))
}

fn flor_checks(ctx: &mut Context, _: &SelftestConfig) -> Check {
    for t in 0..200 {
        let (m, _) = random_block_form(&mut ctx.rng, 8);
        let nonneg = NonnegMatrix::new(m.clone()).map_err(|e| format!("random matrix {t}: {e}"))?;
        let form = flor_decompose(&nonneg).map_err(|e| format!("random matrix {t}: {e}"))?;
        ensure(verify_flor(&m, &form), || {
            format!("random matrix {t}: certificate rejected")
        })?;
    }
    let mut cell_count = 0;
    for (name, inst) in all_instances(ctx) {
        let alg = Algebra::build(&inst);
        let mats = cell_rep_matrices(&alg, 1).map_err(|e| e.to_string())?.matrices;
        for i in 0..inst.n() {
            let f = &mats[i][i];
            let q = to_rational(f);
            let form = flor_decompose(&NonnegMatrix::new(q.clone()).map_err(|e| e.to_string())?)
                .map_err(|e| format!("{name}: [F_{}{}]: {e}", i + 1, i + 1))?;
            ensure(verify_flor(&q, &form), || {
                format!("{name}: [F_{}{}] certificate rejected", i + 1, i + 1)
            })?;
            let size = f.rows();
            let symmetric = (0..size).all(|s| {
                let row_zero = (0..size).all(|t| f[(s, t)] == 0);
                let col_zero = (0..size).all(|t| f[(t, s)] == 0);
                row_zero == col_zero
            });
            let off_core_absent = form.first_block.is_empty() && form.jb.is_zero();
            ensure(symmetric == off_core_absent, || {
                format!(
                    "{name}: [F_{}{}] support symmetry {symmetric} but off-core blocks absent {off_core_absent}",
                    i + 1,
                    i + 1
                )
            })?;
            cell_count += 1;
        }
    }
    Ok(format!("200 random block forms, {cell_count} cell matrices"))
}

fn classified(config: &SelftestConfig) -> Vec<(&'static str, ValidatedInstance)> {
    let mut out = vec![("edge_s2", fixtures::edge_s2()), ("path3_s3", fixtures::path3_s3())];
    if config.full {
        out.push(("example2", fixtures::example2()));
    }
    out
}

fn verdicts<'c>(ctx: &'c mut Context, config: &SelftestConfig) -> Result<&'c [(&'static str, Verdict)], String> {
    let computed = ctx.verdicts.get_or_insert_with(|| {
        classified(config)
            .into_iter()
            .map(|(name, inst)| {
                let alg = Algebra::build(&inst);
                classify(&alg, &SearchBounds::default_for(&alg), DEFAULT_BUDGET)
                    .map(|v| (name, v))
                    .map_err(|e| format!("{name}: {e}"))
            })
            .collect()
    });
    computed.as_deref().map_err(Clone::clone)
}

fn classification(ctx: &mut Context, config: &SelftestConfig) -> Check {
    let mut names = Vec::new();
    for (name, verdict) in verdicts(ctx, config)? {
        ensure(verdict.confirmed, || format!("{name}: not confirmed"))?;
        names.push(*name);
    }
    Ok(format!("confirmed on {}", names.join(", ")))
}

fn extras(ctx: &mut Context, config: &SelftestConfig) -> Check {
    let mut total = 0;
    for (name, verdict) in verdicts(ctx, config)? {
        for extra in &verdict.extra {
            ensure(!extra.checks.violated_conclusions().is_empty(), || {
                format!(
                    "{name}: extra solution with r = {} passes every check",
                    extra.candidate.r()
                )
            })?;
        }
        total += verdict.extra.len();
    }
    Ok(format!("{total} extra solutions, each with a violated check"))
}
