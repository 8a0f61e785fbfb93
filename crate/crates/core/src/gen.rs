//! Seeded random fixtures. Every generator takes the RNG by argument so a
//! caller with a fixed seed gets byte-identical fixtures on every run.

use crate::error::Result;
use crate::model::{CooperativeGame, SimplifiedModel};
use crate::subset::{SubsetMask, MAX_DIMENSION};
use rand::Rng;

/// A model of width `d` with table values uniform in [-1, 1]. When `active`
/// is `None` a nonempty active set is drawn uniformly.
pub fn random_model<R: Rng>(
    d: usize,
    active: Option<SubsetMask>,
    rng: &mut R,
) -> Result<SimplifiedModel> {
    let active = match active {
        Some(a) => a,
        None => SubsetMask::from_bits(rng.random_range(1..(1u32 << d))),
    };
    let values = (0..(1usize << d))
        .map(|_| rng.random_range(-1.0..=1.0))
        .collect();
    SimplifiedModel::new(d, active, values)
}

/// A game on `n` players with coalition values uniform in [-1, 1] and the
/// empty coalition pinned to exactly 0.
pub fn random_game<R: Rng>(n: usize, rng: &mut R) -> Result<CooperativeGame> {
    let mut values: Vec<f64> = (0..(1usize << n))
        .map(|_| rng.random_range(-1.0..=1.0))
        .collect();
    values[0] = 0.0;
    CooperativeGame::new(n, values)
}

/// A game whose values are small integers (as exact doubles), so any short
/// signed sum of them evaluates without rounding. Used wherever a check
/// asserts bit-exact identities between value combinations.
pub fn random_integer_game<R: Rng>(n: usize, rng: &mut R) -> Result<CooperativeGame> {
    debug_assert!(n <= MAX_DIMENSION);
    let mut values: Vec<f64> = (0..(1usize << n))
        .map(|_| f64::from(rng.random_range(-1024i32..=1024)))
        .collect();
    values[0] = 0.0;
    CooperativeGame::new(n, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn same_seed_same_fixture() {
        let a = random_model(6, None, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = random_model(6, None, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
        assert!(!a.active().is_empty());

        let g = random_game(5, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let h = random_game(5, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(g, h);
        assert_eq!(g.value(crate::subset::SubsetMask::EMPTY), 0.0);
    }

    #[test]
    fn integer_games_hold_integers() {
        let g = random_integer_game(6, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert!(g
            .values()
            .iter()
            .all(|v| v.fract() == 0.0 && v.abs() <= 1024.0));
    }
}
