//! Brute-force certification of the two-step structure of the
//! monotone-budget polytope on small grids.
//!
//! The polytope is `{ q ∈ [0,1]^n : q monotone, Σ w_i q_i (= or ≤) k }`.
//! [`enumerate_vertices`] computes its exact vertex set generically from
//! the inequality description — it deliberately does not assume the
//! two-step characterization it is used to certify. Candidates come from
//! all `{0, *, 1}` assignments (any basic solution pins every coordinate
//! at a bound except at most one budget-solved block), and each candidate
//! is kept only if the constraints active at it have full rank. All
//! arithmetic is exact rational; float inputs are converted exactly.
//!
//! [`lp_maximize`] provides an independent linear maximizer over the same
//! polytope, in two modes that must agree: an exhaustive search over the
//! two-step family (1D, structured) and a scan of the enumerated vertex
//! set (generic).

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::measures::{GridDomain, GridMeasure};
use crate::rules::{AllocationRule, BudgetMode, TwoStepRule, UpSet};
use crate::tol;

pub type Rational = BigRational;

/// Exact rational from a finite float (every finite float is rational).
pub fn rational_from_f64(x: f64) -> Result<Rational> {
    BigRational::from_float(x)
        .ok_or_else(|| Error::Domain(format!("{x} has no exact rational value")))
}

fn ratio(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Number of grid points the generic vertex enumeration accepts.
pub const VERTEX_ENUM_CAP: usize = 14;
/// Per-axis cap for 2D up-set enumeration.
pub const UP_SET_PLANE_CAP: usize = 4;
/// 1D cap for up-set enumeration.
pub const UP_SET_LINE_CAP: usize = 14;
/// Largest 1D instance the structured two-step maximizer accepts.
pub const TWO_STEP_CAP: usize = 2000;

/// The discretized monotone-budget polytope
/// `{ q ∈ [0,1]^n : q monotone, Σ w_i q_i (= or ≤) k }`.
#[derive(Clone, Debug)]
pub struct PolytopeSpec {
    domain: GridDomain,
    weights: Vec<Rational>,
    weights_f64: Vec<f64>,
    budget: Rational,
    budget_f64: f64,
    mode: BudgetMode,
}

impl PolytopeSpec {
    /// Build from a measure; masses and budget convert to exact rationals.
    pub fn from_measure(mu: &GridMeasure, k: f64, mode: BudgetMode) -> Result<Self> {
        let weights = mu
            .mass()
            .iter()
            .map(|&m| rational_from_f64(m))
            .collect::<Result<Vec<_>>>()?;
        Self::new_exact(mu.domain().clone(), weights, rational_from_f64(k)?, mode)
    }

    /// Build from exact rational weights summing to 1.
    pub fn new_exact(
        domain: GridDomain,
        weights: Vec<Rational>,
        budget: Rational,
        mode: BudgetMode,
    ) -> Result<Self> {
        if weights.len() != domain.len() {
            return Err(Error::Structural(format!(
                "{} weights for {} grid points",
                weights.len(),
                domain.len()
            )));
        }
        if weights.iter().any(|w| w.is_negative()) {
            return Err(Error::Domain("polytope weights must be nonnegative".into()));
        }
        if weights.iter().all(|w| w.is_zero()) {
            return Err(Error::Domain(
                "degenerate measure: all polytope weights are zero".into(),
            ));
        }
        let total: Rational = weights.iter().sum();
        if (total - Rational::one()).abs() > ratio(1, 1_000_000_000_000) {
            return Err(Error::Domain("polytope weights must sum to 1".into()));
        }
        if budget <= Rational::zero() || budget >= Rational::one() {
            return Err(Error::Domain("polytope budget must lie in (0, 1)".into()));
        }
        let weights_f64 = weights.iter().map(|w| w.to_f64().unwrap_or(f64::NAN)).collect();
        let budget_f64 = budget.to_f64().unwrap_or(f64::NAN);
        Ok(PolytopeSpec {
            domain,
            weights,
            weights_f64,
            budget,
            budget_f64,
            mode,
        })
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.domain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domain.is_empty()
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn weights_f64(&self) -> &[f64] {
        &self.weights_f64
    }

    pub fn budget(&self) -> &Rational {
        &self.budget
    }

    pub fn budget_f64(&self) -> f64 {
        self.budget_f64
    }

    pub fn mode(&self) -> BudgetMode {
        self.mode
    }
}

/// All upward-closed subsets of the grid poset, including the empty set
/// and the full domain.
///
/// 1D grids have exactly `n + 1` up-sets (the suffixes); an m×n lattice
/// has one per non-increasing threshold staircase.
pub fn enumerate_up_sets(domain: &GridDomain) -> Result<Vec<UpSet>> {
    if let Some(coords) = domain.line_coords() {
        let n = coords.len();
        if n > UP_SET_LINE_CAP {
            return Err(Error::Resource {
                what: "1D up-set enumeration".into(),
                limit: UP_SET_LINE_CAP,
                requested: n,
            });
        }
        return (0..=n).rev().map(|s| UpSet::suffix(domain, s)).collect();
    }
    let (nx, ny) = domain.plane_shape().expect("not a line, must be a plane");
    if nx > UP_SET_PLANE_CAP || ny > UP_SET_PLANE_CAP {
        return Err(Error::Resource {
            what: "2D up-set enumeration".into(),
            limit: UP_SET_PLANE_CAP,
            requested: nx.max(ny),
        });
    }
    // A 2D up-set is a non-increasing column threshold profile:
    // column ix contains rows iy >= t[ix].
    fn staircases(
        domain: &GridDomain,
        nx: usize,
        ny: usize,
        prefix: &mut Vec<usize>,
        cap: usize,
        out: &mut Vec<UpSet>,
    ) -> Result<()> {
        if prefix.len() == nx {
            let mut members = vec![false; nx * ny];
            for (ix, &t) in prefix.iter().enumerate() {
                for iy in t..ny {
                    members[ix * ny + iy] = true;
                }
            }
            out.push(UpSet::from_members(domain, &members)?);
            return Ok(());
        }
        for t in (0..=cap).rev() {
            prefix.push(t);
            staircases(domain, nx, ny, prefix, t, out)?;
            prefix.pop();
        }
        Ok(())
    }
    let mut out = Vec::new();
    staircases(domain, nx, ny, &mut Vec::new(), ny, &mut out)?;
    Ok(out)
}

/// Rank of a rational matrix by Gaussian elimination.
fn rational_rank(mut rows: Vec<Vec<Rational>>, cols: usize) -> usize {
    let mut rank = 0;
    let mut col = 0;
    while col < cols && rank < rows.len() {
        // find a pivot
        let pivot = (rank..rows.len()).find(|&r| !rows[r][col].is_zero());
        let Some(pivot) = pivot else {
            col += 1;
            continue;
        };
        rows.swap(rank, pivot);
        let pivot_val = rows[rank][col].clone();
        for r in rank + 1..rows.len() {
            if rows[r][col].is_zero() {
                continue;
            }
            let factor = &rows[r][col] / &pivot_val;
            for c in col..cols {
                let delta = &factor * &rows[rank][c];
                rows[r][c] = &rows[r][c] - delta;
            }
        }
        rank += 1;
        col += 1;
    }
    rank
}

/// Does the active-constraint system at `q` have full rank n?
fn is_vertex(spec: &PolytopeSpec, q: &[Rational]) -> bool {
    let n = q.len();
    let zero = Rational::zero();
    let one = Rational::one();
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    for (i, v) in q.iter().enumerate() {
        if *v == zero || *v == one {
            let mut row = vec![Rational::zero(); n];
            row[i] = Rational::one();
            rows.push(row);
        }
    }
    for &(lo, hi) in &spec.domain.covers() {
        if q[lo] == q[hi] {
            let mut row = vec![Rational::zero(); n];
            row[lo] = Rational::one();
            row[hi] = -Rational::one();
            rows.push(row);
        }
    }
    let load: Rational = q.iter().zip(&spec.weights).map(|(v, w)| v * w).sum();
    if load == spec.budget {
        rows.push(spec.weights.clone());
    }
    rational_rank(rows, n) == n
}

/// Exact vertex set of the polytope, sorted lexicographically.
pub fn enumerate_vertices_exact(spec: &PolytopeSpec) -> Result<Vec<Vec<Rational>>> {
    let n = spec.len();
    if n > VERTEX_ENUM_CAP {
        return Err(Error::Resource {
            what: "generic vertex enumeration".into(),
            limit: VERTEX_ENUM_CAP,
            requested: n,
        });
    }
    let covers = spec.domain.covers();
    let zero = Rational::zero();
    let one = Rational::one();

    let mut out: Vec<Vec<Rational>> = Vec::new();
    // digits in {0 = value 0, 1 = budget-solved block, 2 = value 1}
    let mut sigma = vec![0u8; n];
    'patterns: loop {
        // monotone pattern filter in the 0 < * < 1 ordering
        let monotone = covers.iter().all(|&(lo, hi)| sigma[lo] <= sigma[hi]);
        if monotone {
            let mut fixed_load = Rational::zero();
            let mut star_weight = Rational::zero();
            for i in 0..n {
                match sigma[i] {
                    2 => fixed_load += &spec.weights[i],
                    1 => star_weight += &spec.weights[i],
                    _ => {}
                }
            }
            let has_star = sigma.iter().any(|&s| s == 1);
            let candidate: Option<Vec<Rational>> = if !has_star {
                let feasible = match spec.mode {
                    BudgetMode::Equality => fixed_load == spec.budget,
                    BudgetMode::Inequality => fixed_load <= spec.budget,
                };
                feasible.then(|| {
                    sigma
                        .iter()
                        .map(|&s| if s == 2 { one.clone() } else { zero.clone() })
                        .collect()
                })
            } else if star_weight.is_zero() {
                // the budget cannot pin a weightless block
                None
            } else {
                let level = (&spec.budget - &fixed_load) / &star_weight;
                (level > zero && level < one).then(|| {
                    sigma
                        .iter()
                        .map(|&s| match s {
                            0 => zero.clone(),
                            1 => level.clone(),
                            _ => one.clone(),
                        })
                        .collect()
                })
            };
            if let Some(q) = candidate {
                if is_vertex(spec, &q) {
                    out.push(q);
                }
            }
        }
        // odometer over base-3 digits
        let mut i = 0;
        loop {
            if i == n {
                break 'patterns;
            }
            sigma[i] += 1;
            if sigma[i] < 3 {
                break;
            }
            sigma[i] = 0;
            i += 1;
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Float view of [`enumerate_vertices_exact`].
pub fn enumerate_vertices(spec: &PolytopeSpec) -> Result<Vec<AllocationRule>> {
    enumerate_vertices_exact(spec)?
        .into_iter()
        .map(|q| {
            let values = q.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect();
            AllocationRule::new(spec.domain.clone(), values)
        })
        .collect()
}

/// A vertex together with its two-step decomposition, when one exists.
#[derive(Clone, Debug)]
pub struct VertexCertificate {
    pub vertex: AllocationRule,
    pub decomposition: Option<TwoStepRule>,
    /// Max pointwise error between the vertex and the reconstruction.
    pub residual: f64,
}

impl VertexCertificate {
    pub fn certified(&self) -> bool {
        self.decomposition.is_some()
    }
}

/// Shared structure finder: given the level sets of a rule (values
/// grouped exactly or within tolerance), produce nested up-sets and λ.
///
/// A rule is two-step iff it has at most two distinct nonzero levels,
/// a second level only ever sits under a top level of exactly 1, and
/// every level set is upward closed.
fn decompose_levels(
    domain: &GridDomain,
    is_one: &[bool],
    mid_mask: &[bool],
    mid_level: Option<f64>,
) -> Option<(UpSet, UpSet, f64)> {
    let n = domain.len();
    let has_one = is_one.iter().any(|&b| b);
    let a2_mask: Vec<bool> = (0..n).map(|i| is_one[i] || mid_mask[i]).collect();
    let a1 = if has_one {
        UpSet::from_members(domain, is_one).ok()?
    } else {
        UpSet::empty()
    };
    let a2 = UpSet::from_members(domain, &a2_mask).ok()?;
    let lambda = match mid_level {
        Some(level) => 1.0 - level,
        // no interior level: canonical λ = 1 (A1 = A2)
        None => 1.0,
    };
    Some((a1, a2, lambda))
}

fn certify_values(
    domain: &GridDomain,
    values: &[f64],
    tolerance: f64,
    binding: Option<bool>,
) -> Option<(UpSet, UpSet, f64)> {
    let n = values.len();
    // cluster values into levels within tolerance
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let mut level_reps: Vec<f64> = Vec::new();
    for &v in &sorted {
        match level_reps.last() {
            Some(&last) if (v - last).abs() <= tolerance => {}
            _ => level_reps.push(v),
        }
    }
    let assign = |v: f64| -> usize {
        level_reps
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| (v - **a).abs().total_cmp(&(v - **b).abs()))
            .map(|(i, _)| i)
            .unwrap()
    };
    let nonzero: Vec<f64> = level_reps.iter().copied().filter(|&l| l > tolerance).collect();
    if nonzero.len() > 2 {
        return None;
    }
    let top_is_one = nonzero.last().map(|&l| (l - 1.0).abs() <= tolerance);
    if nonzero.len() == 2 && top_is_one != Some(true) {
        return None;
    }
    // a fractional level must sit on the budget face of the polytope
    let has_fractional = nonzero.first().map(|&l| (l - 1.0).abs() > tolerance) == Some(true);
    if has_fractional {
        if let Some(is_binding) = binding {
            if !is_binding {
                return None;
            }
        }
    }
    let one_level = if top_is_one == Some(true) {
        Some(level_reps.len() - 1)
    } else {
        None
    };
    let mid_value = match (nonzero.len(), one_level) {
        (2, Some(_)) => Some(nonzero[0]),
        (1, None) => Some(nonzero[0]),
        _ => None,
    };
    let is_one: Vec<bool> = (0..n)
        .map(|i| one_level.map(|l| assign(values[i]) == l).unwrap_or(false))
        .collect();
    let mid_mask: Vec<bool> = (0..n)
        .map(|i| {
            mid_value
                .map(|mv| (level_reps[assign(values[i])] - mv).abs() <= tolerance && !is_one[i])
                .unwrap_or(false)
        })
        .collect();
    decompose_levels(domain, &is_one, &mid_mask, mid_value)
}

/// Decompose a rule as `λ·1_{A₁} + (1−λ)·1_{A₂}` with `A₁ ⊆ A₂`, within
/// [`tol::CERT_RESIDUAL`]. Pure structure test; no budget context.
pub fn certify_two_step(q: &AllocationRule) -> VertexCertificate {
    certify_against(q, None)
}

/// Decompose a claimed vertex of `spec`. On top of the structural check,
/// any fractional level must sit on a binding budget (with a slack budget
/// the fractional block could scale, so the point would not be extreme).
pub fn certify_vertex(q: &AllocationRule, spec: &PolytopeSpec) -> VertexCertificate {
    certify_against(q, Some(spec))
}

fn certify_against(q: &AllocationRule, spec: Option<&PolytopeSpec>) -> VertexCertificate {
    let binding = spec.map(|s| {
        let load: f64 = q
            .values()
            .iter()
            .zip(s.weights_f64())
            .map(|(v, w)| v * w)
            .sum();
        (load - s.budget_f64()).abs() <= 1e-9
    });
    let found = certify_values(q.domain(), q.values(), tol::CERT_RESIDUAL, binding);
    match found {
        None => VertexCertificate {
            vertex: q.clone(),
            decomposition: None,
            residual: f64::INFINITY,
        },
        Some((a1, a2, lambda)) => {
            match TwoStepRule::new(q.domain().clone(), a1, a2, lambda.clamp(0.0, 1.0)) {
                Err(_) => VertexCertificate {
                    vertex: q.clone(),
                    decomposition: None,
                    residual: f64::INFINITY,
                },
                Ok(rule) => {
                    let recon = rule.materialize();
                    let residual = q
                        .values()
                        .iter()
                        .zip(recon.values())
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max);
                    if residual <= tol::CERT_RESIDUAL {
                        VertexCertificate {
                            vertex: q.clone(),
                            decomposition: Some(rule),
                            residual,
                        }
                    } else {
                        VertexCertificate {
                            vertex: q.clone(),
                            decomposition: None,
                            residual,
                        }
                    }
                }
            }
        }
    }
}

/// Exact certificate for a rational vertex: nested up-sets and exact λ,
/// with zero reconstruction residual, or `None`.
pub fn certify_vertex_exact(
    spec: &PolytopeSpec,
    values: &[Rational],
) -> Option<(UpSet, UpSet, Rational)> {
    let domain = &spec.domain;
    let n = values.len();
    let zero = Rational::zero();
    let one = Rational::one();
    let mut levels: Vec<&Rational> = values.iter().filter(|v| **v > zero).collect();
    levels.sort();
    levels.dedup();
    if levels.len() > 2 {
        return None;
    }
    if levels.len() == 2 && *levels[1] != one {
        return None;
    }
    let mid: Option<&Rational> = match levels.len() {
        1 if *levels[0] != one => Some(levels[0]),
        2 => Some(levels[0]),
        _ => None,
    };
    if mid.is_some() {
        // fractional level requires a binding budget
        let load: Rational = values.iter().zip(&spec.weights).map(|(v, w)| v * w).sum();
        if load != spec.budget {
            return None;
        }
    }
    let is_one: Vec<bool> = values.iter().map(|v| *v == one).collect();
    let in_a2: Vec<bool> = values.iter().map(|v| *v > zero).collect();
    let a1 = if is_one.iter().any(|&b| b) {
        UpSet::from_members(domain, &is_one).ok()?
    } else {
        UpSet::empty()
    };
    let a2 = UpSet::from_members(domain, &in_a2).ok()?;
    let lambda = match mid {
        Some(level) => one - level,
        None => one.clone(),
    };
    // exact reconstruction check
    for (i, v) in values.iter().enumerate() {
        let recon = if a1.contains(domain, i) {
            one.clone()
        } else if a2.contains(domain, i) {
            &one - &lambda
        } else {
            zero.clone()
        };
        if recon != *v {
            return None;
        }
    }
    Some((a1, a2, lambda))
}

/// Solution of a linear maximization over the polytope.
#[derive(Clone, Debug)]
pub struct LpSolution {
    pub rule: AllocationRule,
    pub value: f64,
}

/// Best candidate of the structured 1D search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct TwoStepChoice {
    /// First index of the fractional block (A₂ threshold).
    pub low: usize,
    /// First index of the value-1 block (A₁ threshold); `n` for none.
    pub high_exclusive: usize,
    pub alpha: f64,
    pub payoff: f64,
}

/// Exhaustive 1D search over the two-step family: all suffix pairs with
/// the interior level solved from the budget, plus all pure up-set
/// indicators. Covers every vertex of the 1D polytope.
pub(crate) fn two_step_search_f64(
    objective: &[f64],
    weights: &[f64],
    k: f64,
    mode: BudgetMode,
) -> Option<TwoStepChoice> {
    let n = weights.len();
    // suffix sums: W[i] = Σ_{j≥i} w_j, C[i] = Σ_{j≥i} obj_j w_j
    let mut w_tail = vec![0.0; n + 1];
    let mut c_tail = vec![0.0; n + 1];
    for i in (0..n).rev() {
        w_tail[i] = w_tail[i + 1] + weights[i];
        c_tail[i] = c_tail[i + 1] + objective[i] * weights[i];
    }
    let mut best: Option<TwoStepChoice> = None;
    let mut consider = |cand: TwoStepChoice| match &best {
        Some(b) if b.payoff >= cand.payoff => {}
        _ => best = Some(cand),
    };
    // pure indicators
    for r in 0..=n {
        let load = w_tail[r];
        let feasible = match mode {
            BudgetMode::Equality => (load - k).abs() <= tol::STRUCTURAL,
            BudgetMode::Inequality => load <= k + tol::STRUCTURAL,
        };
        if feasible {
            consider(TwoStepChoice {
                low: r,
                high_exclusive: r,
                alpha: 0.0,
                payoff: c_tail[r],
            });
        }
    }
    // budget-solved interior level on [low, r)
    for low in 0..n {
        for r in low + 1..=n {
            let w_mid = w_tail[low] - w_tail[r];
            if w_mid <= 0.0 {
                continue;
            }
            let alpha = (k - w_tail[r]) / w_mid;
            if !(-tol::STRUCTURAL..=1.0 + tol::STRUCTURAL).contains(&alpha) {
                continue;
            }
            let alpha = alpha.clamp(0.0, 1.0);
            consider(TwoStepChoice {
                low,
                high_exclusive: r,
                alpha,
                payoff: alpha * (c_tail[low] - c_tail[r]) + c_tail[r],
            });
        }
    }
    best
}

impl TwoStepChoice {
    pub(crate) fn to_rule(self, domain: &GridDomain) -> Result<TwoStepRule> {
        if self.low == self.high_exclusive {
            let a = UpSet::suffix(domain, self.low)?;
            TwoStepRule::new(domain.clone(), a.clone(), a, 1.0)
        } else {
            TwoStepRule::two_step_1d(domain.clone(), self.low, self.high_exclusive - 1, self.alpha)
        }
    }
}

/// Exact rational version of the structured 1D search; returns the exact
/// optimum value and one maximizing vertex.
pub fn lp_maximize_two_step_exact(
    objective: &[Rational],
    spec: &PolytopeSpec,
) -> Result<(Vec<Rational>, Rational)> {
    if !spec.domain.is_line() {
        return Err(Error::Unsupported(
            "the structured two-step search requires a 1D grid".into(),
        ));
    }
    let n = spec.len();
    if objective.len() != n {
        return Err(Error::Structural("objective length mismatch".into()));
    }
    let zero = Rational::zero();
    let one = Rational::one();
    let mut w_tail = vec![Rational::zero(); n + 1];
    let mut c_tail = vec![Rational::zero(); n + 1];
    for i in (0..n).rev() {
        w_tail[i] = &w_tail[i + 1] + &spec.weights[i];
        c_tail[i] = &c_tail[i + 1] + &objective[i] * &spec.weights[i];
    }
    let mut best: Option<(Vec<Rational>, Rational)> = None;
    let mut consider = |values: Vec<Rational>, payoff: Rational| match &best {
        Some((_, b)) if *b >= payoff => {}
        _ => best = Some((values, payoff)),
    };
    for r in 0..=n {
        let feasible = match spec.mode {
            BudgetMode::Equality => w_tail[r] == spec.budget,
            BudgetMode::Inequality => w_tail[r] <= spec.budget,
        };
        if feasible {
            let values: Vec<Rational> = (0..n)
                .map(|i| if i >= r { one.clone() } else { zero.clone() })
                .collect();
            consider(values, c_tail[r].clone());
        }
    }
    for low in 0..n {
        for r in low + 1..=n {
            let w_mid = &w_tail[low] - &w_tail[r];
            if w_mid.is_zero() {
                continue;
            }
            let alpha = (&spec.budget - &w_tail[r]) / &w_mid;
            if alpha < zero || alpha > one {
                continue;
            }
            let payoff = &alpha * (&c_tail[low] - &c_tail[r]) + &c_tail[r];
            let values: Vec<Rational> = (0..n)
                .map(|i| {
                    if i >= r {
                        one.clone()
                    } else if i >= low {
                        alpha.clone()
                    } else {
                        zero.clone()
                    }
                })
                .collect();
            consider(values, payoff);
        }
    }
    best.ok_or_else(|| Error::Infeasible("no feasible two-step rule".into()))
}

/// Exact maximization by scanning the enumerated vertex set.
pub fn lp_maximize_vertex_scan_exact(
    objective: &[Rational],
    spec: &PolytopeSpec,
) -> Result<(Vec<Rational>, Rational)> {
    if objective.len() != spec.len() {
        return Err(Error::Structural("objective length mismatch".into()));
    }
    let vertices = enumerate_vertices_exact(spec)?;
    let mut best: Option<(Vec<Rational>, Rational)> = None;
    for q in vertices {
        let payoff: Rational = q
            .iter()
            .zip(objective)
            .zip(&spec.weights)
            .map(|((v, o), w)| v * o * w)
            .sum();
        match &best {
            Some((_, b)) if *b >= payoff => {}
            _ => best = Some((q, payoff)),
        }
    }
    best.ok_or_else(|| Error::Infeasible("the polytope has no vertices".into()))
}

/// Maximize `Σ objective_i · w_i · q_i` over the polytope.
///
/// 1D grids run the structured two-step search (cap [`TWO_STEP_CAP`]);
/// everything else scans the generically enumerated vertex set (cap
/// [`VERTEX_ENUM_CAP`]).
pub fn lp_maximize(objective: &[f64], spec: &PolytopeSpec) -> Result<LpSolution> {
    let n = spec.len();
    if objective.len() != n {
        return Err(Error::Structural(format!(
            "objective has {} values for {} grid points",
            objective.len(),
            n
        )));
    }
    if objective.iter().any(|o| !o.is_finite()) {
        return Err(Error::Domain("objective contains non-finite values".into()));
    }
    if spec.domain.is_line() && n <= TWO_STEP_CAP {
        let choice = two_step_search_f64(objective, spec.weights_f64(), spec.budget_f64(), spec.mode)
            .ok_or_else(|| Error::Infeasible("no feasible two-step rule".into()))?;
        let rule = choice.to_rule(&spec.domain)?.materialize();
        let value: f64 = rule
            .values()
            .iter()
            .zip(objective)
            .zip(spec.weights_f64())
            .map(|((q, o), w)| q * o * w)
            .sum();
        return Ok(LpSolution { rule, value });
    }
    if n > VERTEX_ENUM_CAP {
        return Err(Error::Resource {
            what: "generic vertex-scan maximization".into(),
            limit: VERTEX_ENUM_CAP,
            requested: n,
        });
    }
    let objective_exact = objective
        .iter()
        .map(|&o| rational_from_f64(o))
        .collect::<Result<Vec<_>>>()?;
    let (values, payoff) = lp_maximize_vertex_scan_exact(&objective_exact, spec)?;
    let rule = AllocationRule::new(
        spec.domain.clone(),
        values.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect(),
    )?;
    Ok(LpSolution {
        rule,
        value: payoff.to_f64().unwrap_or(f64::NAN),
    })
}
