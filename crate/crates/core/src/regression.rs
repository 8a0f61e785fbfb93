//! The Shapley values as the unique solution of a constrained weighted
//! linear regression over proper coalitions.
//!
//! The weight of an `s`-sized coalition among `m` active players is
//! `pi(s) = (m-1) / (C(m,s) * s * (m-s))`, infinite at `s = 0` and `s = m`.
//! The infinite weights are never approximated by large finite ones: they
//! are consumed as the two hard equality constraints (the intercept equals
//! the baseline, the attributions sum to the output minus the baseline),
//! eliminated through the substitution `theta = A*gamma + b`. Realizing
//! them as growing finite weights would also require an argument that the
//! minimizer commutes with that limit; the constraint form sidesteps the
//! question and keeps the system well conditioned.
//!
//! Two independent solve routes are provided: the closed-form inverse of the
//! reduced Gram matrix (the default), and plain normal equations solved by
//! Gaussian elimination (the oracle). [`identity_suite`] cross-checks every
//! closed-form quantity against a dense evaluation.

use crate::comb::{binomial, binomial_or_zero};
use crate::error::{Error, Result};
use crate::model::SimplifiedModel;
use crate::subset::{proper_subsets, SubsetMask};
use ndarray::{Array2, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeSet;

/// The regression weight of a coalition size: finite only strictly between
/// the empty and the grand coalition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelWeight {
    Finite(f64),
    /// Signals `s = 0` or `s = m`; realized as an equality constraint.
    Infinite,
}

impl KernelWeight {
    pub fn finite(self) -> Option<f64> {
        match self {
            KernelWeight::Finite(w) => Some(w),
            KernelWeight::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, KernelWeight::Infinite)
    }
}

/// `pi(s)` for `m` active players; symmetric in `s <-> m - s`.
pub fn kernel_weight(m: usize, s: usize) -> Result<KernelWeight> {
    if m == 0 || s > m {
        return Err(Error::InvalidArgument(format!(
            "coalition size {s} out of range 0..={m}"
        )));
    }
    if s == 0 || s == m {
        return Ok(KernelWeight::Infinite);
    }
    Ok(KernelWeight::Finite(
        (m - 1) as f64 / (binomial(m, s) as f64 * (s * (m - s)) as f64),
    ))
}

fn finite_weight(m: usize, s: usize) -> f64 {
    match kernel_weight(m, s) {
        Ok(KernelWeight::Finite(w)) => w,
        _ => unreachable!("proper coalition sizes have finite weight"),
    }
}

/// The assembled regression data for a model, after restriction to its
/// active indices: design rows are the indicator vectors of all proper
/// nonempty coalitions in ascending mask order, weights are `pi(|S|)`,
/// targets are `f(S) - f(empty)`, and `elimination`/`offset` encode the two
/// hard constraints (`theta = elimination * gamma + offset`).
#[derive(Debug, Clone)]
pub struct KernelSystem {
    d: usize,
    x: Array2<f64>,
    w: Vec<f64>,
    y: Vec<f64>,
    elimination: Array2<f64>,
    b: Vec<f64>,
    subsets: Vec<SubsetMask>,
}

impl KernelSystem {
    /// Active-player count of the restricted model.
    pub fn d(&self) -> usize {
        self.d
    }

    /// The `(2^d - 2) x d` binary design matrix.
    pub fn design(&self) -> &Array2<f64> {
        &self.x
    }

    /// The diagonal of the weight matrix.
    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    /// Targets `f(S) - f(empty)` row by row.
    pub fn targets(&self) -> &[f64] {
        &self.y
    }

    /// The `d x (d-1)` constraint-elimination matrix: identity atop a row
    /// of -1.
    pub fn elimination(&self) -> &Array2<f64> {
        &self.elimination
    }

    /// The constraint offset: zeros except the last entry,
    /// `f(full) - f(empty)`.
    pub fn offset(&self) -> &[f64] {
        &self.b
    }

    /// Row order of the design matrix.
    pub fn subsets(&self) -> &[SubsetMask] {
        &self.subsets
    }

    /// `X * elimination`, the design over the free parameters.
    pub fn reduced_design(&self) -> Array2<f64> {
        self.x.dot(&self.elimination)
    }

    /// `W * (y - X*b)` as a vector.
    fn weighted_residual(&self) -> Vec<f64> {
        let xb = self.x.dot(&ArrayView1::from(&self.b[..]));
        self.w
            .iter()
            .zip(self.y.iter())
            .zip(xb.iter())
            .map(|((w, y), xb)| w * (y - xb))
            .collect()
    }

    /// `(XA)^T W (y - X*b)`, the right-hand side of the reduced system.
    pub fn projected_rhs(&self) -> Vec<f64> {
        let wr = self.weighted_residual();
        self.reduced_design()
            .t()
            .dot(&ArrayView1::from(&wr[..]))
            .to_vec()
    }

    /// Applies the constraints: `theta = elimination * gamma + offset`.
    pub fn apply_constraints(&self, gamma: &[f64]) -> Vec<f64> {
        let eg = self.elimination.dot(&ArrayView1::from(gamma));
        eg.iter().zip(self.b.iter()).map(|(e, b)| e + b).collect()
    }

    /// The weighted squared-error objective over proper coalitions at a
    /// candidate restricted attribution (the intercept is pinned to the
    /// baseline, which the targets already absorb).
    pub fn objective(&self, theta: &[f64]) -> f64 {
        let pred = self.x.dot(&ArrayView1::from(theta));
        self.w
            .iter()
            .zip(self.y.iter())
            .zip(pred.iter())
            .map(|((w, y), p)| w * (y - p) * (y - p))
            .sum()
    }
}

#[derive(Serialize)]
struct SystemWire<'a> {
    d: usize,
    x: Vec<Vec<u8>>,
    w: &'a [f64],
    y: &'a [f64],
    b: &'a [f64],
}

impl Serialize for KernelSystem {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let x = self
            .x
            .rows()
            .into_iter()
            .map(|r| r.iter().map(|&v| v as u8).collect())
            .collect();
        SystemWire {
            d: self.d,
            x,
            w: &self.w,
            y: &self.y,
            b: &self.b,
        }
        .serialize(serializer)
    }
}

/// Assembles the regression system for a model. The model is restricted to
/// its active indices first, so at least two of them are required; a single
/// active index has no free parameter and is handled analytically by
/// [`solve_constrained`].
pub fn build_system(model: &SimplifiedModel) -> Result<KernelSystem> {
    let restricted = model.restrict_to_active()?;
    let d = restricted.d();
    if d < 2 {
        return Err(Error::DegenerateInput(
            "the regression needs at least two active indices".into(),
        ));
    }
    let subsets = proper_subsets(d)?;
    let rows = subsets.len();
    let mut x = Array2::zeros((rows, d));
    let mut w = Vec::with_capacity(rows);
    let mut y = Vec::with_capacity(rows);
    let base = restricted.baseline();
    for (r, &s) in subsets.iter().enumerate() {
        for p in s.players() {
            x[(r, p - 1)] = 1.0;
        }
        w.push(finite_weight(d, s.len()));
        y.push(restricted.value(s) - base);
    }
    let elimination = Array2::from_shape_fn((d, d - 1), |(r, c)| {
        if r == d - 1 {
            -1.0
        } else if r == c {
            1.0
        } else {
            0.0
        }
    });
    let mut b = vec![0.0; d];
    b[d - 1] = restricted.output() - base;
    Ok(KernelSystem {
        d,
        x,
        w,
        y,
        elimination,
        b,
        subsets,
    })
}

/// Closed form of the reduced Gram matrix `(XA)^T W (XA)`:
/// `((d-1)/d) * (I + J)` of size `(d-1) x (d-1)`.
pub fn gram_matrix(d: usize) -> Result<Array2<f64>> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "the reduced Gram matrix needs d >= 2, got {d}"
        )));
    }
    let c = (d - 1) as f64 / d as f64;
    Ok(Array2::from_shape_fn((d - 1, d - 1), |(i, j)| {
        if i == j {
            2.0 * c
        } else {
            c
        }
    }))
}

/// Closed form of its inverse: `(d/(d-1)) * I - (1/(d-1)) * J`, i.e. unit
/// diagonal and `-1/(d-1)` off the diagonal.
pub fn gram_inverse(d: usize) -> Result<Array2<f64>> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "the reduced Gram inverse needs d >= 2, got {d}"
        )));
    }
    let off = -1.0 / (d as f64 - 1.0);
    Ok(Array2::from_shape_fn((d - 1, d - 1), |(i, j)| {
        if i == j {
            1.0
        } else {
            off
        }
    }))
}

/// Rank-one update of an inverse: given `A^-1`, returns `(A + u v^T)^-1`
/// via the Sherman-Morrison identity. Fails when `1 + v^T A^-1 u` is within
/// 1e-12 of zero.
pub fn sherman_morrison_inverse(a_inv: &Array2<f64>, u: &[f64], v: &[f64]) -> Result<Array2<f64>> {
    let n = a_inv.nrows();
    if a_inv.ncols() != n || u.len() != n || v.len() != n {
        return Err(Error::InvalidArgument(format!(
            "shape mismatch: inverse is {}x{}, u has {}, v has {}",
            a_inv.nrows(),
            a_inv.ncols(),
            u.len(),
            v.len()
        )));
    }
    let u = ArrayView1::from(u);
    let v = ArrayView1::from(v);
    let au = a_inv.dot(&u);
    let va = v.dot(a_inv);
    let denom = 1.0 + v.dot(&au);
    if denom.abs() <= 1e-12 {
        return Err(Error::Singular(format!(
            "denominator 1 + v^T A^-1 u = {denom} is too close to zero"
        )));
    }
    let mut out = a_inv.clone();
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] -= au[i] * va[j] / denom;
        }
    }
    Ok(out)
}

/// Which route computes the reduced solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solver {
    /// The closed-form Gram inverse.
    ClosedForm,
    /// Dense normal equations by Gaussian elimination; kept as the
    /// independent oracle for the closed form.
    NormalEquations,
}

/// Solution of the constrained regression, scattered back onto the original
/// indices (zeros off the active set).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionSolution {
    /// The intercept; pinned to `f(empty)` exactly by the constraint.
    pub theta0: f64,
    /// One attribution per original index.
    pub theta: Vec<f64>,
    /// The free parameters of the reduced problem (empty for a single
    /// active index).
    pub gamma: Vec<f64>,
}

impl RegressionSolution {
    pub fn attribution(&self) -> crate::model::Attribution {
        crate::model::Attribution {
            phi0: self.theta0,
            phi: self.theta.clone(),
        }
    }
}

fn solve_dense(mut a: Array2<f64>, mut rhs: Vec<f64>) -> Result<Vec<f64>> {
    let n = rhs.len();
    debug_assert_eq!(a.nrows(), n);
    debug_assert_eq!(a.ncols(), n);
    for col in 0..n {
        let mut p = col;
        for r in col + 1..n {
            if a[(r, col)].abs() > a[(p, col)].abs() {
                p = r;
            }
        }
        if a[(p, col)].abs() < 1e-12 {
            return Err(Error::Singular(format!(
                "pivot {} ~ 0 in column {col}",
                a[(p, col)]
            )));
        }
        if p != col {
            for c in 0..n {
                let tmp = a[(p, c)];
                a[(p, c)] = a[(col, c)];
                a[(col, c)] = tmp;
            }
            rhs.swap(p, col);
        }
        for r in col + 1..n {
            let f = a[(r, col)] / a[(col, col)];
            if f != 0.0 {
                for c in col..n {
                    a[(r, c)] -= f * a[(col, c)];
                }
                rhs[r] -= f * rhs[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut acc = rhs[r];
        for c in r + 1..n {
            acc -= a[(r, c)] * x[c];
        }
        x[r] = acc / a[(r, r)];
    }
    Ok(x)
}

fn scatter_solution(
    model: &SimplifiedModel,
    theta_restricted: &[f64],
    gamma: Vec<f64>,
) -> RegressionSolution {
    let mut theta = vec![0.0; model.d()];
    for (k, p) in model.active().players().enumerate() {
        theta[p - 1] = theta_restricted[k];
    }
    RegressionSolution {
        theta0: model.baseline(),
        theta,
        gamma,
    }
}

/// Solves the constrained weighted regression with the closed-form route.
/// The result equals the Shapley explanation up to rounding.
pub fn solve_constrained(model: &SimplifiedModel) -> Result<RegressionSolution> {
    solve_constrained_with(model, Solver::ClosedForm)
}

/// Same, with an explicit choice of solve route.
pub fn solve_constrained_with(
    model: &SimplifiedModel,
    solver: Solver,
) -> Result<RegressionSolution> {
    let active = model.active();
    if active.is_empty() {
        return Err(Error::DegenerateInput(
            "no active indices to attribute".into(),
        ));
    }
    if active.len() == 1 {
        // both constraints bind and no free parameter remains
        let theta = vec![model.output() - model.baseline()];
        return Ok(scatter_solution(model, &theta, Vec::new()));
    }
    let sys = build_system(model)?;
    let rhs = sys.projected_rhs();
    let gamma = match solver {
        Solver::ClosedForm => gram_inverse(sys.d())?
            .dot(&ArrayView1::from(&rhs[..]))
            .to_vec(),
        Solver::NormalEquations => {
            let xa = sys.reduced_design();
            let wxa = scale_rows(&xa, sys.weights());
            solve_dense(xa.t().dot(&wxa), rhs)?
        }
    };
    let theta_restricted = sys.apply_constraints(&gamma);
    Ok(scatter_solution(model, &theta_restricted, gamma))
}

fn scale_rows(m: &Array2<f64>, w: &[f64]) -> Array2<f64> {
    let mut out = m.clone();
    for (mut row, &wk) in out.rows_mut().into_iter().zip(w.iter()) {
        row.mapv_inplace(|v| v * wk);
    }
    out
}

fn random_subset_of_size<R: Rng>(
    d: usize,
    s: usize,
    scratch: &mut [usize],
    rng: &mut R,
) -> SubsetMask {
    for (k, slot) in scratch.iter_mut().enumerate() {
        *slot = k + 1;
    }
    let mut mask = SubsetMask::EMPTY;
    for k in 0..s {
        let j = rng.random_range(k..d);
        scratch.swap(k, j);
        mask = mask.with(scratch[k]);
    }
    mask
}

/// Monte-Carlo variant of [`solve_constrained`]: draws `n_samples` proper
/// coalitions with probability proportional to their kernel weight and
/// solves the same constrained problem on the coalitions that were hit.
/// Duplicates aggregate into a single row (the kernel weight applies once),
/// so once the sample covers every proper coalition the system is the exact
/// one. Deterministic for a fixed seed; the counter-based generator keeps
/// draws reproducible.
///
/// Returns [`Error::Underdetermined`] when the draws cannot pin down the
/// free parameters.
pub fn sampled_wls(
    model: &SimplifiedModel,
    n_samples: usize,
    seed: u64,
) -> Result<RegressionSolution> {
    let active = model.active();
    if active.is_empty() {
        return Err(Error::DegenerateInput(
            "no active indices to attribute".into(),
        ));
    }
    if active.len() == 1 {
        let theta = vec![model.output() - model.baseline()];
        return Ok(scatter_solution(model, &theta, Vec::new()));
    }
    let restricted = model.restrict_to_active()?;
    let d = restricted.d();
    if n_samples < d - 1 {
        return Err(Error::Underdetermined(format!(
            "need at least d - 1 = {} samples, got {n_samples}",
            d - 1
        )));
    }

    // coalition-size distribution proportional to pi(s) * #subsets of size s
    let mut cumulative = Vec::with_capacity(d - 1);
    let mut total = 0.0;
    for s in 1..d {
        total += finite_weight(d, s) * binomial(d, s) as f64;
        cumulative.push(total);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scratch = vec![0usize; d];
    let mut support: BTreeSet<u32> = BTreeSet::new();
    for _ in 0..n_samples {
        let u: f64 = rng.random_range(0.0..total);
        let s = cumulative.partition_point(|&c| c <= u) + 1;
        let mask = random_subset_of_size(d, s, &mut scratch, &mut rng);
        support.insert(mask.bits());
    }

    let rows: Vec<SubsetMask> = support.iter().map(|&b| SubsetMask::from_bits(b)).collect();
    if rows.len() < d - 1 {
        return Err(Error::Underdetermined(format!(
            "only {} distinct coalitions were sampled; {} free parameters",
            rows.len(),
            d - 1
        )));
    }

    let base = restricted.baseline();
    let span = restricted.output() - base;
    let mut xa = Array2::zeros((rows.len(), d - 1));
    let mut rhs_rows = Vec::with_capacity(rows.len());
    let mut weights = Vec::with_capacity(rows.len());
    for (r, &s) in rows.iter().enumerate() {
        let last_in = s.contains(d);
        for p in s.players() {
            if p < d {
                xa[(r, p - 1)] = 1.0;
            }
        }
        if last_in {
            for c in 0..d - 1 {
                xa[(r, c)] -= 1.0;
            }
        }
        // y - X*b folds the grand-coalition constraint into the target
        let target = restricted.value(s) - base - if last_in { span } else { 0.0 };
        rhs_rows.push(target);
        weights.push(finite_weight(d, s.len()));
    }

    let wxa = scale_rows(&xa, &weights);
    let normal = xa.t().dot(&wxa);
    let rhs: Vec<f64> = (0..d - 1)
        .map(|c| (0..rows.len()).map(|r| wxa[(r, c)] * rhs_rows[r]).sum())
        .collect();
    let gamma = solve_dense(normal, rhs)
        .map_err(|_| Error::Underdetermined("sampled design is rank deficient".into()))?;

    let mut theta_restricted = gamma.clone();
    theta_restricted.push(span - gamma.iter().sum::<f64>());
    Ok(scatter_solution(model, &theta_restricted, gamma))
}

/// One numeric cross-check inside [`IdentityReport`].
#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub max_abs_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl IdentityCheck {
    fn new(name: &str, max_abs_error: f64, tolerance: f64) -> Self {
        IdentityCheck {
            name: name.into(),
            max_abs_error,
            tolerance,
            pass: max_abs_error <= tolerance,
        }
    }
}

/// Results of evaluating both sides of every closed-form identity the
/// solver relies on, at one width.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub d: usize,
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Evaluates both sides of the combinatorial and matrix identities behind
/// the closed-form solver — the weight symmetries, the per-size coefficient
/// collapses, the entrywise formulas for the solver factors, the Gram
/// closed form and its inverse (also via the rank-one-update route), and
/// the outer-product decompositions — on a seeded full-active model of
/// width `d`. Supported for `3 <= d <= 14`.
pub fn identity_suite(d: usize) -> Result<IdentityReport> {
    if !(3..=14).contains(&d) {
        return Err(Error::InvalidArgument(format!(
            "identity suite supports 3 <= d <= 14, got {d}"
        )));
    }
    const TOL_SUM: f64 = 1e-10;
    const TOL_DENSE: f64 = 1e-12;
    let df = d as f64;
    let pi = |s: usize| finite_weight(d, s);

    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED ^ d as u64);
    let model = crate::gen::random_model(d, Some(SubsetMask::full(d)), &mut rng)?;
    let sys = build_system(&model)?;
    let xa = sys.reduced_design();
    let rows = sys.subsets().len();
    let mut checks = Vec::new();

    // [XA]_ij = X_ij - X_id entrywise
    let mut err = 0.0f64;
    for r in 0..rows {
        for c in 0..d - 1 {
            let direct = sys.design()[(r, c)] - sys.design()[(r, d - 1)];
            err = err.max((xa[(r, c)] - direct).abs());
        }
    }
    checks.push(IdentityCheck::new("reduced_design_entries", err, TOL_DENSE));

    // pi(k) = pi(d - k)
    let mut err = 0.0f64;
    for k in 1..d {
        err = err.max((pi(k) - pi(d - k)).abs());
    }
    checks.push(IdentityCheck::new("weight_symmetry", err, TOL_DENSE));

    // 2 * sum_s pi(s) C(d-3, s-1) = (d-1)/d, and the same with C(d-3, s-2)
    for (name, shift) in [
        ("weight_binomial_sum_lower", 1isize),
        ("weight_binomial_sum_upper", 2isize),
    ] {
        let total: f64 = (1..d)
            .map(|s| pi(s) * binomial_or_zero(d - 3, s as isize - shift))
            .sum();
        let err = (2.0 * total - (df - 1.0) / df).abs();
        checks.push(IdentityCheck::new(name, err, TOL_SUM));
    }

    // aggregated coefficient of the grand coalition in each free parameter:
    // sum over rows containing the eliminated index of the left-factor
    // formula, equal to -1/d
    let mut err = 0.0f64;
    for i in 1..d {
        let mut total = 0.0;
        for z in (0..(1u32 << d)).map(SubsetMask::from_bits) {
            if !z.contains(d) || z == SubsetMask::full(d) {
                continue;
            }
            let zi = if z.contains(i) { 1.0 } else { 0.0 };
            let card = z.len() as f64;
            total += (df / (df - 1.0) * (zi - 1.0) + (df - card) / (df - 1.0)) * pi(d - z.len());
        }
        err = err.max((total - (-1.0 / df)).abs());
    }
    checks.push(IdentityCheck::new(
        "grand_coalition_coefficient",
        err,
        TOL_SUM,
    ));

    // aggregated coefficient of the empty coalition: +1/d
    let mut err = 0.0f64;
    for i in 1..d {
        let mut total = 0.0;
        for z in (0..(1u32 << d)).map(SubsetMask::from_bits) {
            if z.contains(d) || z.is_empty() {
                continue;
            }
            let zi = if z.contains(i) { 1.0 } else { 0.0 };
            let card = z.len() as f64;
            total += (df / (df - 1.0) * zi - card / (df - 1.0)) * pi(z.len());
        }
        err = err.max((total - 1.0 / df).abs());
    }
    checks.push(IdentityCheck::new(
        "empty_coalition_coefficient",
        err,
        TOL_SUM,
    ));

    // the four per-size coefficient collapses used to fold the solver sum
    // into Shapley kernel weights
    let mut errs = [0.0f64; 4];
    for s in 1..d {
        let sf = s as f64;
        let c_s = binomial(d, s) as f64;
        let c_s1 = binomial(d, s + 1) as f64;
        errs[0] = errs[0].max((1.0 / (df - 1.0) * (df - sf) * pi(d - s) - 1.0 / (sf * c_s)).abs());
        errs[1] = errs[1].max(((sf / (df - 1.0)) * pi(s) - 1.0 / ((sf + 1.0) * c_s1)).abs());
        errs[2] =
            errs[2].max(((df / (df - 1.0) - sf / (df - 1.0)) * pi(s) - 1.0 / (sf * c_s)).abs());
        errs[3] = errs[3].max(
            ((df / (df - 1.0) - (df - sf) / (df - 1.0)) * pi(d - s) - 1.0 / ((df - sf) * c_s))
                .abs(),
        );
    }
    for (name, err) in [
        ("size_coefficient_with_last", errs[0]),
        ("size_coefficient_without_both", errs[1]),
        ("size_coefficient_with_member", errs[2]),
        ("size_coefficient_with_last_only", errs[3]),
    ] {
        checks.push(IdentityCheck::new(name, err, TOL_SUM));
    }

    // entrywise formula for Ginv (XA)^T
    let ginv = gram_inverse(d)?;
    let left = ginv.dot(&xa.t());
    let mut err = 0.0f64;
    for i in 0..d - 1 {
        for j in 0..rows {
            let card = sys.subsets()[j].len() as f64;
            let xji = sys.design()[(j, i)];
            let expected = if sys.design()[(j, d - 1)] == 1.0 {
                df / (df - 1.0) * (xji - 1.0) + (df - card) / (df - 1.0)
            } else {
                df / (df - 1.0) * xji - card / (df - 1.0)
            };
            err = err.max((left[(i, j)] - expected).abs());
        }
    }
    checks.push(IdentityCheck::new("left_factor_entries", err, TOL_SUM));

    // entrywise formula for W (y - X*b)
    let wr = sys.weighted_residual();
    let mut err = 0.0f64;
    for (j, &s) in sys.subsets().iter().enumerate() {
        let expected = if s.contains(d) {
            pi(s.len()) * (model.value(s) - model.output())
        } else {
            pi(s.len()) * (model.value(s) - model.baseline())
        };
        err = err.max((wr[j] - expected).abs());
    }
    checks.push(IdentityCheck::new(
        "weighted_residual_entries",
        err,
        TOL_SUM,
    ));

    // dense (XA)^T W (XA) against the closed form
    let dense_gram = xa.t().dot(&scale_rows(&xa, sys.weights()));
    let gram = gram_matrix(d)?;
    let mut err = 0.0f64;
    for i in 0..d - 1 {
        for j in 0..d - 1 {
            err = err.max((dense_gram[(i, j)] - gram[(i, j)]).abs());
        }
    }
    checks.push(IdentityCheck::new("gram_closed_form", err, TOL_DENSE));

    // closed-form inverse really inverts, and the rank-one-update route
    // reproduces it
    let product = gram.dot(&ginv);
    let mut err = 0.0f64;
    for i in 0..d - 1 {
        for j in 0..d - 1 {
            let expected = if i == j { 1.0 } else { 0.0 };
            err = err.max((product[(i, j)] - expected).abs());
        }
    }
    checks.push(IdentityCheck::new("gram_inverse_product", err, TOL_DENSE));

    let c = (df - 1.0) / df;
    let a0_inv = Array2::from_shape_fn((d - 1, d - 1), |(i, j)| if i == j { 1.0 / c } else { 0.0 });
    let u = vec![c.sqrt(); d - 1];
    let smw = sherman_morrison_inverse(&a0_inv, &u, &u)?;
    let mut err = 0.0f64;
    for i in 0..d - 1 {
        for j in 0..d - 1 {
            err = err.max((smw[(i, j)] - ginv[(i, j)]).abs());
        }
    }
    checks.push(IdentityCheck::new(
        "gram_inverse_rank_one_route",
        err,
        TOL_DENSE,
    ));

    // X^T W X as a sum of weighted row outer products
    let dense = sys
        .design()
        .t()
        .dot(&scale_rows(sys.design(), sys.weights()));
    let mut accumulated = Array2::<f64>::zeros((d, d));
    for (r, &wk) in sys.weights().iter().enumerate() {
        for i in 0..d {
            if sys.design()[(r, i)] == 0.0 {
                continue;
            }
            for j in 0..d {
                accumulated[(i, j)] += wk * sys.design()[(r, j)];
            }
        }
    }
    let mut err = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            err = err.max((dense[(i, j)] - accumulated[(i, j)]).abs());
        }
    }
    checks.push(IdentityCheck::new("outer_product_sum", err, TOL_DENSE));

    // sum over fixed-size binary vectors of z z^T, against
    // C(n-2, s-1) I + C(n-2, s-2) J
    let n = d - 1;
    let mut err = 0.0f64;
    for s in 1..=n {
        let mut acc = Array2::<f64>::zeros((n, n));
        for z in (0..(1u32 << n)).map(SubsetMask::from_bits) {
            if z.len() != s {
                continue;
            }
            for i in z.players() {
                for j in z.players() {
                    acc[(i - 1, j - 1)] += 1.0;
                }
            }
        }
        let diag =
            binomial_or_zero(n - 2, s as isize - 1) + binomial_or_zero(n - 2, s as isize - 2);
        let off = binomial_or_zero(n - 2, s as isize - 2);
        for i in 0..n {
            for j in 0..n {
                let expected = if i == j { diag } else { off };
                err = err.max((acc[(i, j)] - expected).abs());
            }
        }
    }
    checks.push(IdentityCheck::new("binary_outer_sum", err, TOL_DENSE));

    Ok(IdentityReport { d, checks })
}
