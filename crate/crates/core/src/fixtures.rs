//! Small named instances used throughout the tests, the book and `selftest`.

use crate::tree::{validate, TreeInstance, ValidatedInstance};

fn valid(inst: TreeInstance) -> ValidatedInstance {
    validate(inst).expect("fixture is a valid instance")
}

/// One edge `1 - 2` with `S = {2}`.
pub fn edge_s2() -> ValidatedInstance {
    valid(TreeInstance::new(2, [(1, 2)], [2]))
}

/// One edge with both vertices special (`S = V`, self-injective).
pub fn edge_both_special() -> ValidatedInstance {
    valid(TreeInstance::new(2, [(1, 2)], [1, 2]))
}

/// Path `1 - 2 - ... - n` with `S = {n}`.
pub fn example1(n: usize) -> ValidatedInstance {
    valid(TreeInstance::new(n, (1..n).map(|i| (i, i + 1)), [n]))
}

/// Path `1 - 2 - 3` with `S = {3}`.
pub fn path3_s3() -> ValidatedInstance {
    example1(3)
}

/// Vertex 2 joined to 1, 3 and 4, with `S = {3, 4}`.
pub fn example2() -> ValidatedInstance {
    valid(TreeInstance::new(4, [(1, 2), (2, 3), (2, 4)], [3, 4]))
}

/// Star with centre 1 on `n` vertices and no special leaves.
pub fn star(n: usize) -> ValidatedInstance {
    valid(TreeInstance::new(n, (2..=n).map(|v| (1, v)), []))
}
