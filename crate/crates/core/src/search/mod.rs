//! Bounded exhaustive search for decategorified transitive 2-representations
//! and the matrix-level classification check.

mod candidate;
mod check;
mod engine;
mod rank_one;

use serde::Serialize;
use thiserror::Error;

pub use candidate::{canonical_form, CandidateRep, ShapeError};
pub use check::{check_candidate, xy_sets, CheckReport, XYReport};

use crate::algebra::Algebra;
use engine::{faithful_solutions, Budget};

/// Limits on the enumeration: rank at most `r_max`, entries of `m` and
/// `cartanB` at most `entry_cap`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SearchBounds {
    pub r_max: usize,
    pub entry_cap: i64,
}

impl SearchBounds {
    /// `r_max = n + 1`, `entry_cap = 2`.
    pub fn default_for(alg: &Algebra) -> Self {
        SearchBounds {
            r_max: alg.n() + 1,
            entry_cap: 2,
        }
    }
}

/// Node limit used when none is given.
pub const DEFAULT_BUDGET: u64 = 20_000_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchOptions {
    pub require_faithful: bool,
    pub require_dichotomy: bool,
    pub budget: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            require_faithful: false,
            require_dichotomy: false,
            budget: DEFAULT_BUDGET,
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SearchError {
    #[error("invalid search bounds: {0}")]
    InvalidBounds(String),
    #[error("search budget of {budget} nodes exceeded")]
    BudgetExceeded { budget: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchOutcome {
    /// Canonical forms, sorted.
    pub candidates: Vec<CandidateRep>,
    /// Search nodes visited.
    pub nodes: u64,
}

/// All candidates within `bounds` satisfying the composition law and
/// transitivity (plus faithfulness and the diagonal dichotomy when asked).
///
/// An unfaithful candidate has every `m` zero, so transitivity forces
/// `r = 1`; its `cartanB` is invisible to every equation and is reported
/// as `[[1]]`. Faithful candidates come from the block search in
/// `engine`, which runs the ranks in turn and the first blocks in parallel.
pub fn search(alg: &Algebra, bounds: &SearchBounds, options: &SearchOptions) -> Result<SearchOutcome, SearchError> {
    if bounds.r_max < 1 {
        return Err(SearchError::InvalidBounds("r_max must be at least 1".into()));
    }
    if bounds.entry_cap < 1 {
        return Err(SearchError::InvalidBounds("entry_cap must be at least 1".into()));
    }
    let budget = Budget::new(options.budget);
    let exceeded = || SearchError::BudgetExceeded { budget: options.budget };
    let mut candidates = Vec::new();
    if !options.require_faithful {
        candidates.push(CandidateRep::zero(alg.n()));
    }
    for r in 1..=bounds.r_max {
        let found =
            faithful_solutions(alg, r, bounds.entry_cap, options.require_dichotomy, &budget).map_err(|_| exceeded())?;
        candidates.extend(found);
    }
    if budget.exceeded() {
        return Err(exceeded());
    }
    candidates.sort();
    candidates.dedup();
    Ok(SearchOutcome {
        candidates,
        nodes: budget.used(),
    })
}

/// A candidate with its check report and the names of failed checks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AnnotatedCandidate {
    #[serde(flatten)]
    pub candidate: CandidateRep,
    pub checks: CheckReport,
    pub violated: Vec<&'static str>,
}

impl AnnotatedCandidate {
    pub fn new(alg: &Algebra, candidate: CandidateRep) -> Self {
        let checks = check_candidate(alg, &candidate);
        let violated = checks.failed();
        AnnotatedCandidate {
            candidate,
            checks,
            violated,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub bounds: SearchBounds,
    /// `S = ∅` or `S = V`: the self-injective case, handled by earlier work.
    pub covered_by_prior_work: bool,
    /// The cell representation is among the solutions with the dichotomy.
    pub cell_found: bool,
    /// Every faithful solution passing the derived constraints is the cell
    /// representation, and the only unfaithful one is the zero representation.
    pub confirmed: bool,
    /// Faithful solutions satisfying the dichotomy.
    pub with_dichotomy: Vec<AnnotatedCandidate>,
    /// Solutions that are neither the
    /// cell representation nor the zero representation.
    pub extra: Vec<AnnotatedCandidate>,
    /// Unfaithful solutions (expected: only the zero representation).
    pub unfaithful: Vec<CandidateRep>,
    pub nodes: u64,
}

/// Runs the search once without the diagonal dichotomy, reads off the
/// solutions that satisfy it, and compares them with the cell representation.
/// The dichotomy only filters complete solutions, so this matches a separate
/// search with `require_dichotomy`.
pub fn classify(alg: &Algebra, bounds: &SearchBounds, budget: u64) -> Result<Verdict, SearchError> {
    let all = search(
        alg,
        bounds,
        &SearchOptions {
            require_faithful: false,
            require_dichotomy: false,
            budget,
        },
    )?;

    let cell = canonical_form(&CandidateRep::cell(alg));
    let zero = CandidateRep::zero(alg.n());
    let with_dichotomy: Vec<AnnotatedCandidate> = all
        .candidates
        .iter()
        .filter(|c| c.is_faithful())
        .map(|c| AnnotatedCandidate::new(alg, c.clone()))
        .filter(|a| a.checks.diagonal_dichotomy)
        .collect();
    let unfaithful: Vec<CandidateRep> = all.candidates.iter().filter(|c| !c.is_faithful()).cloned().collect();
    let extra: Vec<AnnotatedCandidate> = all
        .candidates
        .iter()
        .filter(|c| **c != cell && **c != zero)
        .map(|c| AnnotatedCandidate::new(alg, c.clone()))
        .collect();

    let cell_found = with_dichotomy.iter().any(|a| a.candidate == cell);
    let constrained_are_cell = with_dichotomy
        .iter()
        .filter(|a| a.checks.derived_constraints_hold())
        .all(|a| a.candidate == cell);
    let confirmed = cell_found && constrained_are_cell && unfaithful == vec![zero];

    Ok(Verdict {
        bounds: *bounds,
        covered_by_prior_work: alg.instance().special_is_trivial(),
        cell_found,
        confirmed,
        with_dichotomy,
        extra,
        unfaithful,
        nodes: all.nodes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn edge_search_singles_out_the_cell() {
        let alg = Algebra::build(&fixtures::edge_s2());
        let bounds = SearchBounds { r_max: 3, entry_cap: 2 };
        let opts = SearchOptions {
            require_faithful: true,
            require_dichotomy: true,
            ..SearchOptions::default()
        };
        let out = search(&alg, &bounds, &opts).unwrap();
        let cell = canonical_form(&CandidateRep::cell(&alg));
        assert!(out.candidates.contains(&cell));
        // Twisted solutions pass the axioms and the dichotomy; only the
        // symmetry of supports on m[i][i] rules them out.
        let passing: Vec<_> = out
            .candidates
            .iter()
            .filter(|c| {
                let report = check_candidate(&alg, c);
                assert!(report.axioms_hold() && report.diagonal_dichotomy);
                report.derived_constraints_hold()
            })
            .collect();
        assert_eq!(passing, vec![&cell]);

        let opts = SearchOptions {
            require_faithful: false,
            ..opts
        };
        let unfaithful = search(&alg, &bounds, &opts).unwrap().candidates.len();
        assert_eq!(unfaithful, out.candidates.len() + 1);
    }

    #[test]
    fn rank_one_engine_agrees_with_the_general_one() {
        let budget = engine::Budget::new(DEFAULT_BUDGET);
        for (inst, r_max) in [(fixtures::edge_s2(), 3), (fixtures::path3_s3(), 4)] {
            let alg = Algebra::build(&inst);
            for r in 1..=r_max {
                let rs = engine::RankSearch::new(&alg, r, 2, false, &budget);
                let general = engine::general_solutions(&rs).unwrap();
                let fast = engine::faithful_solutions(&alg, r, 2, false, &budget).unwrap();
                assert_eq!(general, fast, "{} r={r}", inst.label());
            }
        }
    }

    #[test]
    fn filtering_matches_a_separate_dichotomy_search() {
        for inst in [fixtures::edge_s2(), fixtures::path3_s3()] {
            let alg = Algebra::build(&inst);
            let bounds = SearchBounds::default_for(&alg);
            let verdict = classify(&alg, &bounds, DEFAULT_BUDGET).unwrap();
            let opts = SearchOptions {
                require_faithful: true,
                require_dichotomy: true,
                ..SearchOptions::default()
            };
            let direct = search(&alg, &bounds, &opts).unwrap().candidates;
            let filtered: Vec<CandidateRep> = verdict.with_dichotomy.into_iter().map(|a| a.candidate).collect();
            assert_eq!(filtered, direct, "{}", inst.label());
        }
    }

    #[test]
    fn tiny_budget_is_reported() {
        let alg = Algebra::build(&fixtures::edge_s2());
        let bounds = SearchBounds { r_max: 3, entry_cap: 2 };
        let opts = SearchOptions {
            budget: 10,
            ..SearchOptions::default()
        };
        assert_eq!(
            search(&alg, &bounds, &opts),
            Err(SearchError::BudgetExceeded { budget: 10 })
        );
    }

    #[test]
    fn bad_bounds() {
        let alg = Algebra::build(&fixtures::edge_s2());
        let opts = SearchOptions::default();
        assert!(matches!(
            search(&alg, &SearchBounds { r_max: 0, entry_cap: 2 }, &opts),
            Err(SearchError::InvalidBounds(_))
        ));
        assert!(matches!(
            search(&alg, &SearchBounds { r_max: 2, entry_cap: 0 }, &opts),
            Err(SearchError::InvalidBounds(_))
        ));
    }

    #[test]
    fn edge_is_confirmed() {
        let alg = Algebra::build(&fixtures::edge_s2());
        let verdict = classify(&alg, &SearchBounds::default_for(&alg), DEFAULT_BUDGET).unwrap();
        assert!(verdict.confirmed);
        assert!(!verdict.covered_by_prior_work);
        for extra in &verdict.extra {
            assert!(!extra.checks.violated_conclusions().is_empty());
        }
    }
}
