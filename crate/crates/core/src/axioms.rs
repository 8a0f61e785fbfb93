//! Executable verifiers for the attribution axioms, on both sides of the
//! model/game correspondence: local accuracy, missingness, restricted
//! symmetry and restricted consistency for explanations; efficiency,
//! symmetry (permutation form and pairwise form) and strong monotonicity
//! for allocations.
//!
//! Each check returns an [`AxiomReport`]. Conditional axioms distinguish a
//! failed hypothesis from a violated conclusion, so a vacuously true check
//! never masquerades as evidence. A `Violated` report always carries a
//! [`Witness`] with the two quantities that disagree, so the violation can
//! be reproduced standalone.
//!
//! Hypothesis *equalities* (e.g. `f(S u {i}) = f(S u {j})`) are tested with
//! exact `f64` equality: fixtures are constructed to be exact, and a fuzzy
//! hypothesis would manufacture vacuous implications. Hypothesis
//! *inequalities* allow `tol` slack, and conclusions use the caller's `tol`.

use crate::error::{Error, Result};
use crate::model::{Attribution, CooperativeGame, SimplifiedModel};
use crate::shapley::marginal_contribution;
use crate::subset::{submasks, SubsetMask};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Outcome of an axiom check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Violated,
    /// The axiom's hypothesis was not satisfied by the inputs, so the
    /// conclusion was never tested.
    HypothesisNotMet,
}

/// The concrete disagreement behind a `Violated` verdict. Indices are
/// 1-based, like everywhere else; `lhs`/`rhs` are the two quantities the
/// axiom requires to agree (or to be ordered).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Witness {
    /// A permutation (as the array `sigma[k] = image of player k+1`) and a
    /// player whose allocation moved.
    Permuted {
        sigma: Vec<usize>,
        i: usize,
        lhs: f64,
        rhs: f64,
    },
    /// A pair of players that the axiom ties together.
    PlayerPair {
        i: usize,
        j: usize,
        lhs: f64,
        rhs: f64,
    },
    /// A single player.
    Player { i: usize, lhs: f64, rhs: f64 },
    /// Two totals that must agree.
    Totals { lhs: f64, rhs: f64 },
}

/// Result of one axiom check, serializable as
/// `{"axiom": ..., "verdict": ..., "witness": ..., "residual": ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub axiom: String,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub residual: Option<f64>,
}

impl AxiomReport {
    fn holds(axiom: &str) -> Self {
        AxiomReport {
            axiom: axiom.into(),
            verdict: Verdict::Holds,
            witness: None,
            residual: None,
        }
    }

    fn holds_with_residual(axiom: &str, residual: f64) -> Self {
        AxiomReport {
            axiom: axiom.into(),
            verdict: Verdict::Holds,
            witness: None,
            residual: Some(residual),
        }
    }

    fn violated(axiom: &str, witness: Witness, residual: f64) -> Self {
        AxiomReport {
            axiom: axiom.into(),
            verdict: Verdict::Violated,
            witness: Some(witness),
            residual: Some(residual),
        }
    }

    fn hypothesis_not_met(axiom: &str) -> Self {
        AxiomReport {
            axiom: axiom.into(),
            verdict: Verdict::HypothesisNotMet,
            witness: None,
            residual: None,
        }
    }

    pub fn is_holds(&self) -> bool {
        self.verdict == Verdict::Holds
    }
}

fn require_positive_tol(tol: f64) -> Result<()> {
    if tol > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )))
    }
}

fn require_same_shape(f: &SimplifiedModel, g: &SimplifiedModel) -> Result<()> {
    if f.d() != g.d() || f.active() != g.active() {
        return Err(Error::InvalidArgument(
            "models must share the width and the active set".into(),
        ));
    }
    Ok(())
}

/// Local accuracy: `phi0 + sum_i phi_i` must equal the model output
/// `f_x(A(x'))` within `tol`.
pub fn check_local_accuracy<E>(expl: E, model: &SimplifiedModel, tol: f64) -> Result<AxiomReport>
where
    E: Fn(&SimplifiedModel) -> Attribution,
{
    require_positive_tol(tol)?;
    let lhs = expl(model).total();
    let rhs = model.output();
    let residual = (lhs - rhs).abs();
    Ok(if residual <= tol {
        AxiomReport::holds_with_residual("local_accuracy", residual)
    } else {
        AxiomReport::violated("local_accuracy", Witness::Totals { lhs, rhs }, residual)
    })
}

/// Missingness: every inactive index must get attribution exactly 0.
pub fn check_missingness<E>(expl: E, model: &SimplifiedModel) -> Result<AxiomReport>
where
    E: Fn(&SimplifiedModel) -> Attribution,
{
    let attr = expl(model);
    for i in 1..=model.d() {
        if !model.active().contains(i) && attr.phi[i - 1] != 0.0 {
            return Ok(AxiomReport::violated(
                "missingness",
                Witness::Player {
                    i,
                    lhs: attr.phi[i - 1],
                    rhs: 0.0,
                },
                attr.phi[i - 1].abs(),
            ));
        }
    }
    Ok(AxiomReport::holds("missingness"))
}

/// Scans every pair of indices from `pairs_from`; where the interchange
/// hypothesis `f(S u {i}) = f(S u {j})` holds exactly for all
/// `S ⊆ scan_set \ {i, j}`, the two attributions must agree within `tol`.
fn symmetry_scan<E>(
    axiom: &str,
    expl: E,
    model: &SimplifiedModel,
    pairs_from: SubsetMask,
    scan_set: SubsetMask,
    tol: f64,
) -> Result<AxiomReport>
where
    E: Fn(&SimplifiedModel) -> Attribution,
{
    require_positive_tol(tol)?;
    if pairs_from.len() > 20 {
        return Err(Error::InvalidArgument(
            "symmetry scans are limited to 20 indices".into(),
        ));
    }
    let attr = expl(model);
    let indices: Vec<usize> = pairs_from.players().collect();
    for (a, &i) in indices.iter().enumerate() {
        for &j in &indices[a + 1..] {
            let rest = scan_set.without(i).without(j);
            let interchangeable =
                submasks(rest).all(|s| model.value(s.with(i)) == model.value(s.with(j)));
            if !interchangeable {
                continue;
            }
            let (lhs, rhs) = (attr.phi[i - 1], attr.phi[j - 1]);
            if (lhs - rhs).abs() > tol {
                return Ok(AxiomReport::violated(
                    axiom,
                    Witness::PlayerPair { i, j, lhs, rhs },
                    (lhs - rhs).abs(),
                ));
            }
        }
    }
    Ok(AxiomReport::holds(axiom))
}

/// Restricted symmetry: interchangeability is judged over subsets of the
/// active set, and only active pairs are compared.
pub fn check_restricted_symmetry<E>(
    expl: E,
    model: &SimplifiedModel,
    tol: f64,
) -> Result<AxiomReport>
where
    E: Fn(&SimplifiedModel) -> Attribution,
{
    symmetry_scan(
        "restricted_symmetry",
        expl,
        model,
        model.active(),
        model.active(),
        tol,
    )
}

/// The same scan over *all* indices and *all* subsets, active or not. This
/// is the reconstructed unrestricted formulation; no explanation can satisfy
/// it together with local accuracy and missingness (see
/// [`crate::fixtures::half_active_model`]), which is exactly what it is here
/// to demonstrate.
pub fn check_unrestricted_symmetry<E>(
    expl: E,
    model: &SimplifiedModel,
    tol: f64,
) -> Result<AxiomReport>
where
    E: Fn(&SimplifiedModel) -> Attribution,
{
    let full = SubsetMask::full(model.d());
    symmetry_scan("unrestricted_symmetry", expl, model, full, full, tol)
}

/// Restricted consistency for one index: if the primed model's marginals for
/// `i` dominate the base model's over every subset of the active set (with
/// `tol` slack), the primed attribution of `i` must not fall more than `tol`
/// below the base one.
pub fn check_restricted_consistency<E>(
    expl: E,
    model: &SimplifiedModel,
    primed: &SimplifiedModel,
    i: usize,
    tol: f64,
) -> Result<AxiomReport>
where
    E: Fn(&SimplifiedModel) -> Attribution,
{
    require_positive_tol(tol)?;
    require_same_shape(model, primed)?;
    if i == 0 || i > model.d() {
        return Err(Error::InvalidArgument(format!(
            "index {i} out of range 1..={}",
            model.d()
        )));
    }
    let dominates = submasks(model.active()).all(|s| {
        let up = primed.value(s) - primed.value(s.without(i));
        let lo = model.value(s) - model.value(s.without(i));
        up >= lo - tol
    });
    if !dominates {
        return Ok(AxiomReport::hypothesis_not_met("restricted_consistency"));
    }
    let lhs = expl(primed).phi[i - 1];
    let rhs = expl(model).phi[i - 1];
    Ok(if lhs >= rhs - tol {
        AxiomReport::holds("restricted_consistency")
    } else {
        AxiomReport::violated(
            "restricted_consistency",
            Witness::Player { i, lhs, rhs },
            rhs - lhs,
        )
    })
}

/// Constant on inducing: models that induce the same game (exact table
/// equality) must receive the same attribution vector within `tol`.
pub fn check_constant_on_inducing<E>(
    expl: E,
    model: &SimplifiedModel,
    other: &SimplifiedModel,
    tol: f64,
) -> Result<AxiomReport>
where
    E: Fn(&SimplifiedModel) -> Attribution,
{
    require_positive_tol(tol)?;
    require_same_shape(model, other)?;
    if model.induced_game() != other.induced_game() {
        return Ok(AxiomReport::hypothesis_not_met("constant_on_inducing"));
    }
    let a = expl(model);
    let b = expl(other);
    for i in 1..=model.d() {
        let (lhs, rhs) = (a.phi[i - 1], b.phi[i - 1]);
        if (lhs - rhs).abs() > tol {
            return Ok(AxiomReport::violated(
                "constant_on_inducing",
                Witness::Player { i, lhs, rhs },
                (lhs - rhs).abs(),
            ));
        }
    }
    Ok(AxiomReport::holds("constant_on_inducing"))
}

/// Efficiency: the allocation must sum to the grand-coalition value within
/// `tol`.
pub fn check_efficiency<A>(alloc: A, game: &CooperativeGame, tol: f64) -> Result<AxiomReport>
where
    A: Fn(&CooperativeGame) -> Vec<f64>,
{
    require_positive_tol(tol)?;
    let lhs: f64 = alloc(game).iter().sum();
    let rhs = game.grand_value();
    let residual = (lhs - rhs).abs();
    Ok(if residual <= tol {
        AxiomReport::holds_with_residual("efficiency", residual)
    } else {
        AxiomReport::violated("efficiency", Witness::Totals { lhs, rhs }, residual)
    })
}

/// A bijection of `{1, ..., n}`, stored as `map[k] = sigma(k + 1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n + 1];
        for &v in &map {
            if v == 0 || v > n || seen[v] {
                return Err(Error::InvalidArgument(format!(
                    "{map:?} is not a bijection of 1..={n}"
                )));
            }
            seen[v] = true;
        }
        Ok(Permutation { map })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            map: (1..=n).collect(),
        }
    }

    /// The transposition swapping `a` and `b`.
    pub fn transposition(n: usize, a: usize, b: usize) -> Result<Self> {
        let mut map: Vec<usize> = (1..=n).collect();
        if a == 0 || a > n || b == 0 || b > n {
            return Err(Error::InvalidArgument(format!(
                "transposition ({a} {b}) out of range 1..={n}"
            )));
        }
        map.swap(a - 1, b - 1);
        Ok(Permutation { map })
    }

    pub fn n(&self) -> usize {
        self.map.len()
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn apply(&self, player: usize) -> usize {
        self.map[player - 1]
    }

    /// The image set `sigma(S)`.
    pub fn apply_mask(&self, s: SubsetMask) -> SubsetMask {
        let mut out = SubsetMask::EMPTY;
        for p in s.players() {
            out = out.with(self.apply(p));
        }
        out
    }

    pub fn inverse(&self) -> Permutation {
        let mut map = vec![0; self.map.len()];
        for (k, &v) in self.map.iter().enumerate() {
            map[v - 1] = k + 1;
        }
        Permutation { map }
    }

    /// `self ∘ inner`: `inner` is applied first.
    pub fn compose(&self, inner: &Permutation) -> Permutation {
        debug_assert_eq!(self.n(), inner.n());
        Permutation {
            map: (1..=inner.n())
                .map(|p| self.apply(inner.apply(p)))
                .collect(),
        }
    }
}

/// Every permutation of `{1, ..., n}`, for `n <= 8`.
pub fn all_permutations(n: usize) -> Result<Vec<Permutation>> {
    if n > 8 {
        return Err(Error::InvalidArgument(format!(
            "full permutation enumeration is capped at n = 8, got {n}; \
             use the sampled symmetry check instead"
        )));
    }
    let mut out = Vec::new();
    let mut current: Vec<usize> = (1..=n).collect();
    permute_rec(&mut current, 0, &mut out);
    Ok(out)
}

fn permute_rec(current: &mut Vec<usize>, k: usize, out: &mut Vec<Permutation>) {
    if k == current.len() {
        out.push(Permutation {
            map: current.clone(),
        });
        return;
    }
    for idx in k..current.len() {
        current.swap(k, idx);
        permute_rec(current, k + 1, out);
        current.swap(k, idx);
    }
}

/// A uniformly random permutation (Fisher-Yates).
pub fn random_permutation<R: Rng>(n: usize, rng: &mut R) -> Permutation {
    let mut map: Vec<usize> = (1..=n).collect();
    for k in (1..n).rev() {
        let j = rng.random_range(0..=k);
        map.swap(k, j);
    }
    Permutation { map }
}

/// The relabeled game `sigma(v)` with `sigma(v)(S) = v(sigma(S))`.
/// Relabeling twice with a permutation and its inverse recovers the game
/// exactly.
pub fn permute_game(game: &CooperativeGame, sigma: &Permutation) -> Result<CooperativeGame> {
    if sigma.n() != game.n() {
        return Err(Error::InvalidArgument(format!(
            "permutation acts on {} players but the game has {}",
            sigma.n(),
            game.n()
        )));
    }
    let values = (0..(1u32 << game.n()))
        .map(|s| game.value(sigma.apply_mask(SubsetMask::from_bits(s))))
        .collect();
    CooperativeGame::new(game.n(), values)
}

fn symmetry_over<'a, A>(
    alloc: A,
    game: &CooperativeGame,
    perms: impl Iterator<Item = &'a Permutation>,
    tol: f64,
) -> Result<AxiomReport>
where
    A: Fn(&CooperativeGame) -> Vec<f64>,
{
    require_positive_tol(tol)?;
    let base = alloc(game);
    for sigma in perms {
        let relabeled = permute_game(game, sigma)?;
        let moved = alloc(&relabeled);
        for i in 1..=game.n() {
            let lhs = moved[i - 1];
            let rhs = base[sigma.apply(i) - 1];
            if (lhs - rhs).abs() > tol {
                return Ok(AxiomReport::violated(
                    "symmetry",
                    Witness::Permuted {
                        sigma: sigma.map().to_vec(),
                        i,
                        lhs,
                        rhs,
                    },
                    (lhs - rhs).abs(),
                ));
            }
        }
    }
    Ok(AxiomReport::holds("symmetry"))
}

/// Permutation symmetry: for every permutation, relabeling the game must
/// relabel the allocation. With the relabeling `sigma(v)(S) = v(sigma(S))`
/// of [`permute_game`], the checkable statement is
/// `psi_i(sigma(v)) = psi_{sigma(i)}(v)` within `tol` — player `i` of the
/// relabeled game stands for player `sigma(i)` of the original. (Since the
/// property quantifies over all permutations, this is the same axiom as the
/// formulation with the roles of `sigma` and its inverse swapped.)
/// Enumerates all `n!` permutations, so `n <= 8`.
pub fn check_symmetry<A>(alloc: A, game: &CooperativeGame, tol: f64) -> Result<AxiomReport>
where
    A: Fn(&CooperativeGame) -> Vec<f64>,
{
    let perms = all_permutations(game.n())?;
    symmetry_over(alloc, game, perms.iter(), tol)
}

/// The same check over a seeded random sample of permutations. A sound
/// violation finder for `n > 8`, not a proof of symmetry.
pub fn check_symmetry_sampled<A>(
    alloc: A,
    game: &CooperativeGame,
    tol: f64,
    samples: usize,
    seed: u64,
) -> Result<AxiomReport>
where
    A: Fn(&CooperativeGame) -> Vec<f64>,
{
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let perms: Vec<Permutation> = (0..samples)
        .map(|_| random_permutation(game.n(), &mut rng))
        .collect();
    symmetry_over(alloc, game, perms.iter(), tol)
}

/// Pairwise symmetry: players whose coalition values are interchangeable
/// (`v(S u {i}) = v(S u {j})` exactly for all `S` avoiding both) must be
/// allocated equal amounts within `tol`.
pub fn check_new_symmetry<A>(alloc: A, game: &CooperativeGame, tol: f64) -> Result<AxiomReport>
where
    A: Fn(&CooperativeGame) -> Vec<f64>,
{
    require_positive_tol(tol)?;
    let n = game.n();
    if n > 20 {
        return Err(Error::InvalidArgument(
            "pairwise symmetry scans are limited to 20 players".into(),
        ));
    }
    let psi = alloc(game);
    let full = SubsetMask::full(n);
    for i in 1..=n {
        for j in (i + 1)..=n {
            let rest = full.without(i).without(j);
            let interchangeable =
                submasks(rest).all(|s| game.value(s.with(i)) == game.value(s.with(j)));
            if !interchangeable {
                continue;
            }
            let (lhs, rhs) = (psi[i - 1], psi[j - 1]);
            if (lhs - rhs).abs() > tol {
                return Ok(AxiomReport::violated(
                    "new_symmetry",
                    Witness::PlayerPair { i, j, lhs, rhs },
                    (lhs - rhs).abs(),
                ));
            }
        }
    }
    Ok(AxiomReport::holds("new_symmetry"))
}

/// Strong monotonicity for one player: if `i`'s marginal contributions in
/// `game` dominate those in `other` over every coalition (with `tol` slack),
/// the allocation of `i` in `game` must not fall more than `tol` below its
/// allocation in `other`.
pub fn check_strong_monotonicity<A>(
    alloc: A,
    game: &CooperativeGame,
    other: &CooperativeGame,
    i: usize,
    tol: f64,
) -> Result<AxiomReport>
where
    A: Fn(&CooperativeGame) -> Vec<f64>,
{
    require_positive_tol(tol)?;
    if game.n() != other.n() {
        return Err(Error::InvalidArgument(
            "games must have the same player count".into(),
        ));
    }
    if i == 0 || i > game.n() {
        return Err(Error::InvalidArgument(format!(
            "player {i} out of range 1..={}",
            game.n()
        )));
    }
    for s in 0..(1u32 << game.n()) {
        let s = SubsetMask::from_bits(s);
        let up = marginal_contribution(game, i, s)?;
        let lo = marginal_contribution(other, i, s)?;
        if up < lo - tol {
            return Ok(AxiomReport::hypothesis_not_met("strong_monotonicity"));
        }
    }
    let lhs = alloc(game)[i - 1];
    let rhs = alloc(other)[i - 1];
    Ok(if lhs >= rhs - tol {
        AxiomReport::holds("strong_monotonicity")
    } else {
        AxiomReport::violated(
            "strong_monotonicity",
            Witness::Player { i, lhs, rhs },
            rhs - lhs,
        )
    })
}

/// Writes a permutation as transpositions `(a b)`; composing the returned
/// pairs right-to-left (last pair applied first) reproduces the permutation
/// exactly, using at most `n - 1` transpositions.
pub fn decompose_transpositions(sigma: &Permutation) -> Vec<(usize, usize)> {
    let n = sigma.n();
    let mut visited = vec![false; n + 1];
    let mut out = Vec::new();
    for start in 1..=n {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        let mut cycle = vec![start];
        let mut next = sigma.apply(start);
        while next != start {
            visited[next] = true;
            cycle.push(next);
            next = sigma.apply(next);
        }
        // (a1 a2 ... ak) = (a1 ak) (a1 a(k-1)) ... (a1 a2)
        for idx in (1..cycle.len()).rev() {
            out.push((cycle[0], cycle[idx]));
        }
    }
    out
}

/// The auxiliary game that keeps player `i`'s marginal contributions and
/// makes `i` and `j` interchangeable. It ties strong monotonicity to
/// symmetry: an allocation with both gives `i` the same amount here as in
/// the original game, while the pairwise-symmetry hypothesis holds between
/// `i` and `j` by construction.
pub fn symmetrizing_game(game: &CooperativeGame, i: usize, j: usize) -> Result<CooperativeGame> {
    let n = game.n();
    if i == j {
        return Err(Error::InvalidArgument(
            "the two players must be distinct".into(),
        ));
    }
    if i == 0 || i > n || j == 0 || j > n {
        return Err(Error::InvalidArgument(format!(
            "players ({i}, {j}) out of range 1..={n}"
        )));
    }
    let values = (0..(1u32 << n))
        .map(|bits| {
            let s = SubsetMask::from_bits(bits);
            match (s.contains(i), s.contains(j)) {
                (false, false) => 0.0,
                (true, false) => game.value(s) - game.value(s.without(i)),
                (false, true) => game.value(s.without(j).with(i)) - game.value(s.without(j)),
                (true, true) => {
                    game.value(s) - game.value(s.without(i)) + game.value(s.without(j))
                        - game.value(s.without(i).without(j))
                }
            }
        })
        .collect();
    CooperativeGame::new(n, values)
}
