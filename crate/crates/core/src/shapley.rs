//! Exact Shapley values for games and models, plus the two non-Shapley
//! explanations that the axiom suite tells apart from them: a greedy
//! coalition-path explanation and the published closed form that weights
//! coalitions by the full input dimension.

use crate::comb::binomial;
use crate::error::{Error, Result};
use crate::model::{Attribution, CooperativeGame, SimplifiedModel};
use crate::subset::{submasks, SubsetMask};
use rayon::prelude::*;

/// Above this many active players the per-player sums run on the rayon
/// pool; each player's sum stays sequential, so results do not depend on
/// the thread count.
const PARALLEL_THRESHOLD: usize = 16;

/// The Shapley kernel weight for an `s`-sized coalition among `n` players:
/// `(s-1)! (n-s)! / n! = 1 / (n * C(n-1, s-1))`.
///
/// Evaluated through the exact binomial rather than factorials, so nothing
/// overflows for any supported width.
pub fn shapley_weight(n: usize, s: usize) -> f64 {
    debug_assert!(n >= 1 && s >= 1 && s <= n);
    1.0 / (n as f64 * binomial(n - 1, s - 1) as f64)
}

/// Marginal contribution of `player` relative to the coalition `s`:
/// `v(S) - v(S \ {i})` if the player is in `S`, else `v(S u {i}) - v(S)`.
pub fn marginal_contribution(game: &CooperativeGame, player: usize, s: SubsetMask) -> Result<f64> {
    if player == 0 || player > game.n() {
        return Err(Error::InvalidArgument(format!(
            "player {player} out of range 1..={}",
            game.n()
        )));
    }
    if !s.fits(game.n()) {
        return Err(Error::InvalidArgument(format!(
            "coalition {s:?} does not fit in width {}",
            game.n()
        )));
    }
    Ok(if s.contains(player) {
        game.value(s) - game.value(s.without(player))
    } else {
        game.value(s.with(player)) - game.value(s)
    })
}

fn weight_table(n: usize) -> Vec<f64> {
    let mut w = vec![0.0; n + 1];
    for (s, slot) in w.iter_mut().enumerate().skip(1) {
        *slot = shapley_weight(n, s);
    }
    w
}

/// Shapley allocation of a cooperative game. The returned vector sums to the
/// grand-coalition value (efficiency) up to rounding.
pub fn shapley_values(game: &CooperativeGame) -> Vec<f64> {
    let n = game.n();
    if n == 0 {
        return Vec::new();
    }
    let weights = weight_table(n);
    let full = SubsetMask::full(n);
    let per_player = |i: usize| {
        let mut acc = 0.0;
        for s in submasks(full.without(i)) {
            let with_i = s.with(i);
            acc += weights[with_i.len()] * (game.value(with_i) - game.value(s));
        }
        acc
    };
    if n >= PARALLEL_THRESHOLD {
        (1..=n).into_par_iter().map(per_player).collect()
    } else {
        (1..=n).map(per_player).collect()
    }
}

fn explanation_with_weights(model: &SimplifiedModel, weights: &[f64]) -> Attribution {
    let active = model.active();
    let mut phi = vec![0.0; model.d()];
    let per_player = |i: usize| {
        let mut acc = 0.0;
        for s in submasks(active.without(i)) {
            let with_i = s.with(i);
            acc += weights[with_i.len()] * (model.value(with_i) - model.value(s));
        }
        (i, acc)
    };
    let parts: Vec<(usize, f64)> = if active.len() >= PARALLEL_THRESHOLD {
        active
            .players()
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(per_player)
            .collect()
    } else {
        active.players().map(per_player).collect()
    };
    for (i, v) in parts {
        phi[i - 1] = v;
    }
    Attribution {
        phi0: model.baseline(),
        phi,
    }
}

/// The Shapley explanation of a model: inactive indices get exactly 0, and
/// an active index `i` gets its marginal contributions over subsets of the
/// active set weighted by the Shapley kernel in `|A(x')|`.
///
/// This is the unique explanation satisfying local accuracy, missingness,
/// restricted symmetry and restricted consistency; the axiom suite checks
/// all four.
pub fn shapley_explanation(model: &SimplifiedModel) -> Attribution {
    let m = model.active().len();
    if m == 0 {
        return Attribution {
            phi0: model.baseline(),
            phi: vec![0.0; model.d()],
        };
    }
    explanation_with_weights(model, &weight_table(m))
}

/// The explanation from Lundberg and Lee's original uniqueness claim: the
/// same marginal sums over subsets of the active set, but with kernel
/// weights taken in the full dimension `d` instead of `|A(x')|`.
///
/// The two coincide when every index is active. When some index is inactive
/// the weights no longer sum correctly and local accuracy fails; the
/// function is provided to reproduce that falsification, it guarantees no
/// axiom.
pub fn claim1_explanation(model: &SimplifiedModel) -> Attribution {
    explanation_with_weights(model, &weight_table(model.d()))
}

/// A greedy coalition-path explanation: remove the active indices one at a
/// time in ascending order and attribute to each the drop in model value
/// when it leaves. Inactive indices get 0.
///
/// The per-index differences telescope, so local accuracy holds, and each
/// attribution is a single marginal contribution, so restricted consistency
/// holds too — yet interchangeable indices can receive different values,
/// which is what separates this explanation from the Shapley values.
pub fn greedy_path_explanation(model: &SimplifiedModel) -> Attribution {
    let active = model.active();
    let mut phi = vec![0.0; model.d()];
    let mut remaining = active;
    let mut prev = model.value(active);
    for p in active.players() {
        remaining = remaining.without(p);
        let next = model.value(remaining);
        phi[p - 1] = prev - next;
        prev = next;
    }
    Attribution {
        phi0: model.baseline(),
        phi,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::induced_model;
    use proptest::prelude::*;

    fn two_player_model() -> SimplifiedModel {
        SimplifiedModel::new(2, SubsetMask::full(2), vec![0.0, 1.0, 1.0, 3.0]).unwrap()
    }

    /// Active set {1,2} inside d=3; proper nonempty subsets of the active
    /// set are worth 1, the active set 2, everything off the active set 1.
    fn partial_active_model() -> SimplifiedModel {
        let mut values = vec![1.0; 8];
        values[0] = 0.0;
        values[3] = 2.0;
        SimplifiedModel::new(3, SubsetMask::from_players(&[1, 2]).unwrap(), values).unwrap()
    }

    #[test]
    fn marginal_contribution_cases() {
        let g = two_player_model().induced_game();
        assert_eq!(
            marginal_contribution(&g, 1, SubsetMask::full(2)).unwrap(),
            2.0
        );
        // empty coalition: the marginal is v({i})
        assert_eq!(
            marginal_contribution(&g, 1, SubsetMask::EMPTY).unwrap(),
            1.0
        );
        assert!(marginal_contribution(&g, 3, SubsetMask::EMPTY).is_err());
        assert!(marginal_contribution(&g, 0, SubsetMask::EMPTY).is_err());
    }

    #[test]
    fn cardinality_game_has_unit_marginals() {
        for n in 1..=4usize {
            let values: Vec<f64> = (0..(1u32 << n))
                .map(|s| SubsetMask::from_bits(s).len() as f64)
                .collect();
            let g = CooperativeGame::new(n, values).unwrap();
            for s in 0..(1u32 << n) {
                for i in 1..=n {
                    assert_eq!(
                        marginal_contribution(&g, i, SubsetMask::from_bits(s)).unwrap(),
                        1.0
                    );
                }
            }
        }
    }

    #[test]
    fn shapley_splits_the_two_player_surplus() {
        let g = two_player_model().induced_game();
        let phi = shapley_values(&g);
        assert_eq!(phi, vec![1.5, 1.5]);
    }

    #[test]
    fn parallel_path_matches_a_sequential_sum() {
        // 16 players crosses the rayon threshold; each per-player sum is
        // sequential over ascending submasks either way, so the values are
        // bit-identical to this local oracle
        use rand::SeedableRng;
        let n = 16;
        let g =
            crate::gen::random_game(n, &mut rand_chacha::ChaCha8Rng::seed_from_u64(71)).unwrap();
        let phi = shapley_values(&g);
        let full = SubsetMask::full(n);
        for i in [1usize, 7, 16] {
            let mut acc = 0.0;
            for s in submasks(full.without(i)) {
                let with_i = s.with(i);
                acc += shapley_weight(n, with_i.len()) * (g.value(with_i) - g.value(s));
            }
            assert_eq!(phi[i - 1], acc);
        }
        let total: f64 = phi.iter().sum();
        assert!((total - g.grand_value()).abs() < 1e-10);
    }

    #[test]
    fn shapley_of_additive_game_recovers_coefficients() {
        let c = [0.7, -0.3, 0.45];
        let values: Vec<f64> = (0..8u32)
            .map(|s| {
                SubsetMask::from_bits(s)
                    .players()
                    .map(|i| c[i - 1])
                    .sum::<f64>()
            })
            .collect();
        let g = CooperativeGame::new(3, values).unwrap();
        let phi = shapley_values(&g);
        for (a, b) in phi.iter().zip(c.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
        let zero = CooperativeGame::new(3, vec![0.0; 8]).unwrap();
        assert_eq!(shapley_values(&zero), vec![0.0; 3]);
    }

    #[test]
    fn efficiency_on_seeded_games() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for n in 1..=10usize {
            let g = crate::gen::random_game(n, &mut rng).unwrap();
            let total: f64 = shapley_values(&g).iter().sum();
            assert!((total - g.grand_value()).abs() < 1e-10);
        }
    }

    #[test]
    fn explanation_on_partially_active_model() {
        let attr = shapley_explanation(&partial_active_model());
        assert!((attr.phi[0] - 1.0).abs() < 1e-12);
        assert!((attr.phi[1] - 1.0).abs() < 1e-12);
        assert_eq!(attr.phi[2], 0.0);
        assert_eq!(attr.phi0, 0.0);
    }

    #[test]
    fn explanation_with_no_active_indices_is_zero() {
        let m = SimplifiedModel::new(2, SubsetMask::EMPTY, vec![0.4, 1.0, 2.0, 3.0]).unwrap();
        let attr = shapley_explanation(&m);
        assert_eq!(attr.phi, vec![0.0, 0.0]);
        assert_eq!(attr.phi0, 0.4);
    }

    #[test]
    fn explanation_matches_induced_game_allocation() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for _ in 0..40 {
            let m = crate::gen::random_model(8, None, &mut rng).unwrap();
            let attr = shapley_explanation(&m);
            let alloc = shapley_values(&m.induced_game());
            for (k, p) in m.active().players().enumerate() {
                assert!((attr.phi[p - 1] - alloc[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn claim1_weights_use_the_full_dimension() {
        let attr = claim1_explanation(&partial_active_model());
        assert!((attr.phi[0] - 0.5).abs() < 1e-15);
        assert!((attr.phi[1] - 0.5).abs() < 1e-15);
        assert_eq!(attr.phi[2], 0.0);
        // the total misses the model output: 1 vs f(A) = 2
        assert!((attr.total() - 1.0).abs() < 1e-15);
        assert_eq!(partial_active_model().output(), 2.0);
    }

    #[test]
    fn claim1_equals_shapley_when_all_indices_active() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(33);
        for d in 1..=6usize {
            let m = crate::gen::random_model(d, Some(SubsetMask::full(d)), &mut rng).unwrap();
            let a = claim1_explanation(&m);
            let b = shapley_explanation(&m);
            for (x, y) in a.phi.iter().zip(b.phi.iter()) {
                assert!((x - y).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn claim1_of_zero_model_is_zero() {
        let m = SimplifiedModel::new(3, SubsetMask::from_players(&[1, 2]).unwrap(), vec![0.0; 8])
            .unwrap();
        let attr = claim1_explanation(&m);
        assert_eq!(attr.phi, vec![0.0; 3]);
        assert_eq!(attr.phi0, 0.0);
    }

    #[test]
    fn greedy_path_on_the_asymmetric_fixture() {
        let attr = greedy_path_explanation(&two_player_model());
        assert_eq!(attr.phi, vec![2.0, 1.0]);
        assert_eq!(attr.phi0, 0.0);
        // the telescoping total is exact on this integer table
        assert_eq!(attr.total(), 3.0);
    }

    #[test]
    fn greedy_path_on_additive_model_recovers_coefficients() {
        let c = [0.25, -1.5, 0.75];
        let values: Vec<f64> = (0..8u32)
            .map(|s| {
                SubsetMask::from_bits(s)
                    .players()
                    .map(|i| c[i - 1])
                    .sum::<f64>()
            })
            .collect();
        let m = SimplifiedModel::new(3, SubsetMask::full(3), values).unwrap();
        let attr = greedy_path_explanation(&m);
        for (a, b) in attr.phi.iter().zip(c.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn greedy_path_with_no_active_indices_is_zero() {
        let m = SimplifiedModel::new(2, SubsetMask::EMPTY, vec![0.5, 1.0, 2.0, 3.0]).unwrap();
        assert_eq!(greedy_path_explanation(&m).phi, vec![0.0, 0.0]);
    }

    #[test]
    fn dummy_index_gets_zero() {
        // index 2 never changes the value: f(S) = f(S \ {2})
        let mut values = vec![0.0; 8];
        for s in 0..8u32 {
            let s = SubsetMask::from_bits(s);
            let base = s.without(2);
            values[s.index()] = base.len() as f64 * 1.25 + 0.5;
        }
        let m = SimplifiedModel::new(3, SubsetMask::full(3), values).unwrap();
        let attr = shapley_explanation(&m);
        assert!(attr.phi[1].abs() < 1e-12);
    }

    /// The coefficient of `f_x(S)` in `sum_i phi_i`, recovered by running the
    /// explanation on basis tables (the explanation is linear in the table).
    pub(crate) fn table_coefficients(d: usize, active: SubsetMask) -> Vec<(SubsetMask, f64)> {
        submasks(active)
            .map(|s| {
                let mut values = vec![0.0; 1 << d];
                values[s.index()] = 1.0;
                let m = SimplifiedModel::new(d, active, values).unwrap();
                let gamma: f64 = shapley_explanation(&m).phi.iter().sum();
                (s, gamma)
            })
            .collect()
    }

    #[test]
    fn attribution_totals_expand_with_unit_coefficients() {
        for (d, active) in [
            (3, SubsetMask::from_players(&[1, 2]).unwrap()),
            (4, SubsetMask::from_players(&[1, 3, 4]).unwrap()),
            (5, SubsetMask::full(5)),
        ] {
            for (s, gamma) in table_coefficients(d, active) {
                let expected = if s.is_empty() {
                    -1.0
                } else if s == active {
                    1.0
                } else {
                    0.0
                };
                assert!(
                    (gamma - expected).abs() < 1e-12,
                    "coefficient of {s:?} was {gamma}"
                );
            }
        }
    }

    proptest! {
        #[test]
        fn local_accuracy_and_missingness(seed in 0u64..500) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let d = 1 + (seed as usize % 10);
            let m = crate::gen::random_model(d, None, &mut rng).unwrap();
            for attr in [shapley_explanation(&m), greedy_path_explanation(&m)] {
                prop_assert!((attr.total() - m.output()).abs() < 1e-10);
                for i in 1..=m.d() {
                    if !m.active().contains(i) {
                        prop_assert_eq!(attr.phi[i - 1], 0.0);
                    }
                }
            }
        }

        #[test]
        fn restriction_preserves_attributions(seed in 0u64..200) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let m = crate::gen::random_model(8, None, &mut rng).unwrap();
            let restricted = m.restrict_to_active().unwrap();
            let full = shapley_explanation(&m);
            let small = shapley_explanation(&restricted);
            for (k, p) in m.active().players().enumerate() {
                prop_assert!((full.phi[p - 1] - small.phi[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn scattered_allocation_equals_explanation() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(55);
        let m = crate::gen::random_model(7, None, &mut rng).unwrap();
        let g = m.induced_game();
        let scattered = induced_model(&g, m.d(), m.active()).unwrap();
        let a = shapley_explanation(&m);
        let b = shapley_explanation(&scattered);
        for (x, y) in a.phi.iter().zip(b.phi.iter()) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
