mod common;

use std::sync::OnceLock;

use proptest::prelude::*;
use qdpa::algebra::{Algebra, BasisElement};
use qdpa::fixtures;
use qdpa::flor::{flor_decompose, random_block_form, verify_flor, NonnegMatrix};
use qdpa::linalg::{q, IntMatrix, QMatrix, Rational};
use qdpa::module::{hom_space, projective_module};
use qdpa::search::{
    canonical_form, check_candidate, search, xy_sets, CandidateRep, SearchBounds, SearchOptions, DEFAULT_BUDGET,
};
use qdpa::tree::{doubled_quiver, parse_tree_spec, random_instance, validate, Arrow, TreeInstance, ValidatedInstance};
use qdpa::twocat::{compose, matrix_of, OneMorphism};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn instance(seed: u64, max_n: usize) -> ValidatedInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=max_n);
    random_instance(&mut rng, n)
}

/// Every solution on the edge (`r <= 3`) and the path (`r <= 4`), with its algebra.
fn pool() -> &'static [(Algebra, Vec<CandidateRep>)] {
    static POOL: OnceLock<Vec<(Algebra, Vec<CandidateRep>)>> = OnceLock::new();
    POOL.get_or_init(|| {
        [fixtures::edge_s2(), fixtures::path3_s3()]
            .iter()
            .map(|inst| {
                let alg = Algebra::build(inst);
                let bounds = SearchBounds {
                    r_max: inst.n() + 1,
                    entry_cap: 2,
                };
                let options = SearchOptions {
                    require_faithful: false,
                    require_dichotomy: false,
                    budget: DEFAULT_BUDGET,
                };
                let found = search(&alg, &bounds, &options).unwrap().candidates;
                (alg, found)
            })
            .collect()
    })
}

fn one_morphism(rng: &mut ChaCha8Rng, n: usize) -> OneMorphism {
    let mut f = OneMorphism::zero(n);
    f.id_mult = rng.gen_range(0..=2);
    for row in &mut f.f_mult {
        for x in row.iter_mut() {
            *x = if rng.gen_bool(0.3) { rng.gen_range(1..=2) } else { 0 };
        }
    }
    f
}

fn shuffled(rng: &mut ChaCha8Rng, r: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..r).collect();
    for i in (1..r).rev() {
        p.swap(i, rng.gen_range(0..=i));
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn emit_then_parse_is_the_identity(seed in any::<u64>()) {
        let inst = instance(seed, 9);
        let text = inst.instance().emit();
        let back = parse_tree_spec(&text).unwrap();
        prop_assert_eq!(&back, inst.instance());
        prop_assert_eq!(back.emit(), text);
    }

    #[test]
    fn instances_have_the_expected_shape(seed in any::<u64>()) {
        let inst = instance(seed, 9);
        prop_assert_eq!(doubled_quiver(&inst).arrows.len(), 2 * (inst.n() - 1));
        prop_assert!(!inst.leaves().is_empty());
        prop_assert!(inst.special().is_subset(&inst.leaves()));
    }

    #[test]
    fn dimension_and_associativity(seed in any::<u64>()) {
        let inst = instance(seed, 7);
        let alg = Algebra::build(&inst);
        prop_assert_eq!(alg.dim(), 4 * inst.n() - 2 - inst.special().len());
        let d = alg.dim();
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    let left = alg.mult(a, b).and_then(|ab| alg.mult(ab, c));
                    let right = alg.mult(b, c).and_then(|bc| alg.mult(a, bc));
                    prop_assert_eq!(left, right);
                }
            }
        }
    }

    #[test]
    fn idempotents_sum_to_the_identity(seed in any::<u64>()) {
        let inst = instance(seed, 8);
        let alg = Algebra::build(&inst);
        for b in 0..alg.dim() {
            let hits: Vec<Option<usize>> = (1..=inst.n())
                .map(|v| alg.index_of(&BasisElement::Idem { vertex: v }).unwrap())
                .flat_map(|e| [alg.mult(e, b), alg.mult(b, e)])
                .collect();
            prop_assert_eq!(hits.iter().filter(|x| **x == Some(b)).count(), 2);
            prop_assert_eq!(hits.iter().filter(|x| x.is_some()).count(), 2);
        }
    }

    #[test]
    fn cartan_margins_are_projective_dimensions(seed in any::<u64>()) {
        let inst = instance(seed, 8);
        let alg = Algebra::build(&inst);
        let h = alg.cartan_matrix();
        let n = inst.n();
        for v in 1..=n {
            let row: i64 = h.row(v - 1).iter().sum();
            let col: i64 = (0..n).map(|s| h[(s, v - 1)]).sum();
            let ending = alg.basis().iter().filter(|b| b.target() == v).count() as i64;
            prop_assert_eq!(row, ending);
            prop_assert_eq!(col, projective_module(&alg, v).dim() as i64);
        }
    }

    #[test]
    fn words_of_length_three_vanish(seed in any::<u64>(), len in 3usize..7) {
        let inst = instance(seed, 8);
        let alg = Algebra::build(&inst);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let start = rng.gen_range(1..=inst.n());
        let mut word = Vec::new();
        let mut at = start;
        for _ in 0..len {
            let nbrs = inst.neighbors(at);
            let next = nbrs[rng.gen_range(0..nbrs.len())];
            word.push(Arrow { source: at, target: next });
            at = next;
        }
        prop_assert!(alg.normal_form(start, &word).unwrap().is_zero());
    }

    #[test]
    fn hom_spaces_between_projectives(seed in any::<u64>()) {
        let inst = instance(seed, 5);
        let alg = Algebra::build(&inst);
        let ps: Vec<_> = (1..=inst.n()).map(|i| projective_module(&alg, i)).collect();
        for i in 1..=inst.n() {
            for j in 1..=inst.n() {
                prop_assert_eq!(hom_space(&ps[i - 1], &ps[j - 1]).dim, alg.hom_dim(i, j));
            }
        }
    }

    #[test]
    fn composition_is_associative_and_unital(seed in any::<u64>()) {
        let inst = instance(seed, 6);
        let alg = Algebra::build(&inst);
        let n = inst.n();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (f, g, h) = (one_morphism(&mut rng, n), one_morphism(&mut rng, n), one_morphism(&mut rng, n));
        prop_assert_eq!(
            compose(&alg, &compose(&alg, &f, &g), &h),
            compose(&alg, &f, &compose(&alg, &g, &h))
        );
        prop_assert_eq!(compose(&alg, &OneMorphism::identity(n), &f), f.clone());
        prop_assert_eq!(compose(&alg, &f, &OneMorphism::identity(n)), f);
    }

    #[test]
    fn matrices_are_multiplicative(pick in any::<prop::sample::Index>(), seed in any::<u64>()) {
        let (alg, found) = &pool()[1];
        let rep = pick.get(found);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (f, g) = (one_morphism(&mut rng, alg.n()), one_morphism(&mut rng, alg.n()));
        prop_assert_eq!(matrix_of(&compose(alg, &f, &g), rep), matrix_of(&f, rep).mul(&matrix_of(&g, rep)));
    }

    #[test]
    fn block_forms_decompose(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (m, lambda) = random_block_form(&mut rng, 8);
        let form = flor_decompose(&NonnegMatrix::new(m.clone()).unwrap()).unwrap();
        prop_assert!(verify_flor(&m, &form));
        let e = m.scale(&(Rational::from_integer(1.into()) / &form.scalar));
        if !m.is_zero() {
            prop_assert_eq!(&form.scalar, &lambda);
        }
        prop_assert_eq!(e.trace(), q(form.core_classes.len() as i64));

        // relabelling the input relabels the blocks
        let p = shuffled(&mut rng, m.rows());
        let pm = QMatrix::from_fn(m.rows(), m.rows(), |a, b| m[(p[a], p[b])].clone());
        let pform = flor_decompose(&NonnegMatrix::new(pm.clone()).unwrap()).unwrap();
        prop_assert!(verify_flor(&pm, &pform));
        let image = |xs: &[usize]| {
            let mut v: Vec<usize> = xs.iter().map(|&a| p[a]).collect();
            v.sort_unstable();
            v
        };
        let sorted = |xs: &[usize]| {
            let mut v = xs.to_vec();
            v.sort_unstable();
            v
        };
        prop_assert_eq!(image(&pform.first_block), sorted(&form.first_block));
        prop_assert_eq!(image(&pform.core), sorted(&form.core));
        prop_assert_eq!(image(&pform.last_block), sorted(&form.last_block));
        let classes = |f: &Vec<Vec<usize>>, map: &dyn Fn(&[usize]) -> Vec<usize>| {
            let mut v: Vec<Vec<usize>> = f.iter().map(|c| map(c)).collect();
            v.sort();
            v
        };
        prop_assert_eq!(classes(&pform.core_classes, &image), classes(&form.core_classes, &sorted));
    }

    #[test]
    fn canonical_form_is_a_normal_form(pick in any::<prop::sample::Index>(), seed in any::<u64>()) {
        let (_, found) = &pool()[1];
        let rep = pick.get(found);
        let canon = canonical_form(rep);
        prop_assert_eq!(&canonical_form(&canon), &canon);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = shuffled(&mut rng, rep.r());
        prop_assert_eq!(canonical_form(&rep.permuted(&p)), canon);
    }
}

#[test]
fn rejected_degenerate_case_is_infinite() {
    // one edge without special vertices: the quotient has paths of every length
    let t = common::Tree::new(2, &[(1, 2)], &[]);
    let dims = common::graded_dims(&t, 6);
    for (d, level) in dims.iter().enumerate() {
        let total: usize = level.iter().flatten().sum();
        assert!(total > 0, "degree {d} vanishes");
    }
    assert!(validate(TreeInstance::new(2, [(1, 2)], Vec::<usize>::new())).is_err());
}

#[test]
fn search_results_pass_the_checker() {
    for (alg, found) in pool() {
        for rep in found {
            let checks = check_candidate(alg, rep);
            assert!(checks.axioms_hold(), "{:?}", checks.notes);
            if rep.is_faithful() {
                assert!(checks.quasi_idempotent, "{:?}", checks.notes);
                let f = rep.action_matrix(1, 1);
                assert!(flor_decompose(&NonnegMatrix::new(qdpa::linalg::to_rational(&f)).unwrap()).is_ok());
            }
        }
    }
}

#[test]
fn matching_x_and_y_give_symmetric_zero_patterns_in_the_blocks() {
    let mut seen = 0;
    for (alg, found) in pool() {
        for rep in found {
            if xy_sets(rep).x_equals_y != Some(true) {
                continue;
            }
            seen += 1;
            let r = rep.r();
            for i in 1..=alg.n() {
                let b: IntMatrix = rep.block(i, i);
                for s in 0..r {
                    let row = (0..r).all(|t| b[(s, t)] == 0);
                    let col = (0..r).all(|t| b[(t, s)] == 0);
                    assert_eq!(row, col, "m[{i}][{i}] of {rep:?}");
                }
            }
        }
    }
    assert!(seen > 0);
}

#[test]
fn action_matrices_of_the_cell_have_unmatched_zero_rows() {
    // [F_11] = [[2, 1], [0, 0]]: row 2 vanishes, column 2 does not
    let alg = Algebra::build(&fixtures::edge_s2());
    let cell = CandidateRep::cell(&alg);
    assert_eq!(xy_sets(&cell).x_equals_y, Some(true));
    assert_eq!(cell.action_matrix(1, 1).to_rows(), vec![vec![2, 1], vec![0, 0]]);
}

fn pinned_cartan(rep: &CandidateRep, h: &IntMatrix) -> bool {
    let n = rep.n();
    let xs = xy_sets(rep).x_reduced.unwrap();
    let pi: Vec<usize> = xs.iter().map(|s| *s.iter().next().unwrap() - 1).collect();
    rep.r() == n && (0..n).all(|a| (0..n).all(|b| rep.cartan_entry(pi[a], pi[b]) == h[(a, b)]))
}

#[test]
fn constrained_candidates_carry_the_cartan_matrix() {
    let mut twisted = 0;
    for (alg, found) in pool() {
        let h = alg.cartan_matrix();
        for rep in found {
            let c = check_candidate(alg, rep);
            if !(c.faithful && c.diagonal_dichotomy && c.singleton_x && c.disjoint_x) {
                continue;
            }
            assert_eq!(rep.r(), alg.n());
            if c.support_symmetry {
                assert!(pinned_cartan(rep, &h), "{rep:?}");
            } else if !pinned_cartan(rep, &h) {
                twisted += 1;
            }
        }
    }
    // without support symmetry the Cartan matrix is not determined
    assert!(twisted > 0);
}
