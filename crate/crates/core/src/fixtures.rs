//! Small embedded models on which the attribution methods demonstrably
//! disagree. The CLI demos and several tests are built on these.

use crate::model::SimplifiedModel;
use crate::subset::SubsetMask;

/// Two active players with equal singleton values but a superadditive pair:
/// `f(empty) = 0`, `f({1}) = f({2}) = 1`, `f({1,2}) = 3`.
///
/// The greedy path explanation assigns (2, 1) here although players 1 and 2
/// are interchangeable; the Shapley values are (1.5, 1.5). This is the
/// fixture that separates restricted symmetry from the other axioms.
pub fn asymmetric_pair_model() -> SimplifiedModel {
    SimplifiedModel::new(2, SubsetMask::full(2), vec![0.0, 1.0, 1.0, 3.0])
        .expect("fixture is valid")
}

/// Width 3 with active set {1, 2}: proper nonempty subsets of the active set
/// are worth 1, the active set 2, the empty set 0 (off-active subsets are
/// also worth 1).
///
/// Weighting coalitions by the full dimension instead of the active count
/// gives (0.5, 0.5, 0) on this model, which sums with the baseline to 1
/// while the model output is 2 — the clean local-accuracy failure of
/// [`crate::claim1_explanation`]. The Shapley values are (1, 1, 0).
pub fn inactive_index_model() -> SimplifiedModel {
    let mut values = vec![1.0; 8];
    values[0] = 0.0;
    values[3] = 2.0;
    SimplifiedModel::new(3, SubsetMask::from_players(&[1, 2]).unwrap(), values)
        .expect("fixture is valid")
}

/// Width 2 with only index 1 active: `f(empty) = 0`, `f({1}) = f({2}) = 1`,
/// `f({1,2}) = 2`.
///
/// Indices 1 and 2 look interchangeable over the *full* table, so any
/// explanation that satisfies missingness plus the symmetry scan over all
/// indices is forced to 0 everywhere — and then cannot reach the output
/// `f({1}) = 1`. No explanation passes local accuracy, missingness and
/// unrestricted symmetry together on this model, which is why the symmetry
/// hypothesis has to be restricted to the active set.
pub fn half_active_model() -> SimplifiedModel {
    SimplifiedModel::new(
        2,
        SubsetMask::from_players(&[1]).unwrap(),
        vec![0.0, 1.0, 1.0, 2.0],
    )
    .expect("fixture is valid")
}
