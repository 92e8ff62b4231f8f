//! Monotone allocation rules, the budget constraint, the majorization
//! order, and the nested two-step parametric form.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::measures::{integrate, upper_integral, GridDomain, GridMeasure};
use crate::tol;

/// Whether the prize budget binds with equality or only as an upper bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BudgetMode {
    Equality,
    Inequality,
}

/// An upward-closed subset of a grid poset, stored by its minimal
/// antichain. Membership of `i` means some minimal element lies below `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UpSet {
    min_elems: Vec<usize>,
}

impl UpSet {
    /// Empty up-set.
    pub fn empty() -> Self {
        UpSet { min_elems: Vec::new() }
    }

    /// The whole domain as an up-set.
    pub fn full(domain: &GridDomain) -> Self {
        Self::from_members(
            domain,
            &vec![true; domain.len()],
        )
        .expect("full set is upward closed")
    }

    /// Canonicalize a membership mask into a minimal antichain.
    /// Fails if the mask is not upward closed.
    pub fn from_members(domain: &GridDomain, members: &[bool]) -> Result<Self> {
        if members.len() != domain.len() {
            return Err(Error::Structural(format!(
                "membership mask has {} entries for {} grid points",
                members.len(),
                domain.len()
            )));
        }
        for &(lo, hi) in &domain.covers() {
            if members[lo] && !members[hi] {
                return Err(Error::Domain(format!(
                    "set is not upward closed: contains {lo} but not {hi}"
                )));
            }
        }
        let mut min_elems = Vec::new();
        'outer: for i in 0..members.len() {
            if !members[i] {
                continue;
            }
            for j in 0..members.len() {
                if j != i && members[j] && domain.le(j, i) {
                    continue 'outer;
                }
            }
            min_elems.push(i);
        }
        Ok(UpSet { min_elems })
    }

    /// Up-set generated by an antichain of minimal elements.
    pub fn from_min_elems(domain: &GridDomain, min_elems: Vec<usize>) -> Result<Self> {
        for &m in &min_elems {
            if m >= domain.len() {
                return Err(Error::Structural(format!(
                    "minimal element {m} outside grid of {}",
                    domain.len()
                )));
            }
        }
        for &a in &min_elems {
            for &b in &min_elems {
                if a != b && domain.le(a, b) {
                    return Err(Error::Domain(format!(
                        "minimal elements {a} and {b} are comparable; not an antichain"
                    )));
                }
            }
        }
        let mut min_elems = min_elems;
        min_elems.sort_unstable();
        Ok(UpSet { min_elems })
    }

    /// 1D upper interval `{i : i ≥ start}`; `start == n` gives the empty set.
    pub fn suffix(domain: &GridDomain, start: usize) -> Result<Self> {
        if !domain.is_line() {
            return Err(Error::Unsupported("suffix up-sets require a 1D grid".into()));
        }
        let n = domain.len();
        if start > n {
            return Err(Error::Structural(format!("suffix start {start} outside grid of {n}")));
        }
        Ok(UpSet {
            min_elems: if start == n { Vec::new() } else { vec![start] },
        })
    }

    pub fn min_elems(&self) -> &[usize] {
        &self.min_elems
    }

    pub fn is_set_empty(&self) -> bool {
        self.min_elems.is_empty()
    }

    pub fn contains(&self, domain: &GridDomain, i: usize) -> bool {
        self.min_elems.iter().any(|&m| domain.le(m, i))
    }

    pub fn members(&self, domain: &GridDomain) -> Vec<bool> {
        (0..domain.len()).map(|i| self.contains(domain, i)).collect()
    }

    pub fn is_subset_of(&self, other: &UpSet, domain: &GridDomain) -> bool {
        self.min_elems.iter().all(|&m| other.contains(domain, m))
    }
}

/// A monotone allocation rule: one win probability in `[0, 1]` per grid
/// point, non-decreasing along the poset order.
#[derive(Clone, Debug, PartialEq)]
pub struct AllocationRule {
    domain: GridDomain,
    values: Vec<f64>,
}

impl AllocationRule {
    pub fn new(domain: GridDomain, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::Structural(format!(
                "rule has {} values for {} grid points",
                values.len(),
                domain.len()
            )));
        }
        let mut values = values;
        for (i, v) in values.iter_mut().enumerate() {
            if !v.is_finite() || *v < -tol::STRUCTURAL || *v > 1.0 + tol::STRUCTURAL {
                return Err(Error::Domain(format!("value[{i}] = {v} outside [0, 1]")));
            }
            *v = v.clamp(0.0, 1.0);
        }
        for &(lo, hi) in &domain.covers() {
            if values[lo] > values[hi] + tol::STRUCTURAL {
                return Err(Error::Domain(format!(
                    "rule is not monotone: value[{lo}] = {} exceeds value[{hi}] = {}",
                    values[lo], values[hi]
                )));
            }
        }
        Ok(AllocationRule { domain, values })
    }

    pub fn constant(domain: GridDomain, level: f64) -> Result<Self> {
        let n = domain.len();
        Self::new(domain, vec![level; n])
    }

    pub fn indicator(domain: GridDomain, set: &UpSet) -> Result<Self> {
        let values = set
            .members(&domain)
            .into_iter()
            .map(|b| if b { 1.0 } else { 0.0 })
            .collect();
        Self::new(domain, values)
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Prize mass handed out by `q` under competition `μ`: `∫ q dμ`.
pub fn budget(q: &AllocationRule, mu: &GridMeasure) -> Result<f64> {
    if q.domain() != mu.domain() {
        return Err(Error::Structural(
            "budget: rule and measure live on different grids".into(),
        ));
    }
    integrate(q.values(), mu)
}

/// The majorization order: `f` majorizes `g` when every upper-tail
/// integral of `f` weakly dominates the one of `g`. Defined on 1D grids.
pub fn majorizes(f: &AllocationRule, g: &AllocationRule, mu: &GridMeasure) -> Result<bool> {
    if !mu.domain().is_line() {
        return Err(Error::Unsupported(
            "majorization is defined on 1D grids only".into(),
        ));
    }
    if f.domain() != mu.domain() || g.domain() != mu.domain() {
        return Err(Error::Structural(
            "majorizes: rules and measure live on different grids".into(),
        ));
    }
    let n = mu.domain().len();
    let mut tail_f = 0.0;
    let mut tail_g = 0.0;
    // accumulate tails from the top so each comparison sees the same sums
    for t in (0..n).rev() {
        tail_f += f.values()[t] * mu.mass()[t];
        tail_g += g.values()[t] * mu.mass()[t];
        if tail_f < tail_g - tol::MAJORIZATION_SLACK {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A rule of the form `λ·1_{A₁} + (1−λ)·1_{A₂}` with nested up-sets
/// `A₁ ⊆ A₂`: value 1 on `A₁`, `1−λ` on `A₂∖A₁`, 0 elsewhere.
///
/// In 1D this is a step function with at most two jumps; the lower
/// threshold is the minimal point of `A₂`, the upper one the minimal
/// point of `A₁`, and the interior level is `1−λ`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoStepRule {
    domain: GridDomain,
    a1: UpSet,
    a2: UpSet,
    lambda: f64,
}

impl TwoStepRule {
    pub fn new(domain: GridDomain, a1: UpSet, a2: UpSet, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::Domain(format!("lambda = {lambda} outside [0, 1]")));
        }
        if !a1.is_subset_of(&a2, &domain) {
            return Err(Error::Domain("two-step rule requires A1 ⊆ A2".into()));
        }
        Ok(TwoStepRule { domain, a1, a2, lambda })
    }

    /// Constant rule `q ≡ level` (empty `A₁`, full `A₂`).
    pub fn constant(domain: GridDomain, level: f64) -> Result<Self> {
        let full = UpSet::full(&domain);
        Self::new(domain, UpSet::empty(), full, 1.0 - level)
    }

    /// 1D single-threshold rule: value 1 strictly above the atom at
    /// `threshold`, `beta` at it, 0 below.
    pub fn single_threshold(domain: GridDomain, threshold: usize, beta: f64) -> Result<Self> {
        let a1 = UpSet::suffix(&domain, threshold + 1)?;
        let a2 = UpSet::suffix(&domain, threshold)?;
        Self::new(domain, a1, a2, 1.0 - beta)
    }

    /// 1D two-step rule: 0 below `low`, `alpha` on `[low, high]`, 1 above `high`.
    pub fn two_step_1d(domain: GridDomain, low: usize, high: usize, alpha: f64) -> Result<Self> {
        if low > high || high >= domain.len() {
            return Err(Error::Structural(format!(
                "two-step thresholds ({low}, {high}) out of order or outside grid"
            )));
        }
        let a1 = UpSet::suffix(&domain, high + 1)?;
        let a2 = UpSet::suffix(&domain, low)?;
        Self::new(domain, a1, a2, 1.0 - alpha)
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn a1(&self) -> &UpSet {
        &self.a1
    }

    pub fn a2(&self) -> &UpSet {
        &self.a2
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Interior level `1−λ` taken on `A₂∖A₁`.
    pub fn interior_level(&self) -> f64 {
        1.0 - self.lambda
    }

    /// Coordinate of the lower jump (minimal point of `A₂`), 1D only.
    pub fn x_low(&self) -> Option<f64> {
        let coords = self.domain.line_coords()?;
        self.a2.min_elems().first().map(|&i| coords[i])
    }

    /// Coordinate of the upper jump (minimal point of `A₁`), 1D only.
    pub fn x_high(&self) -> Option<f64> {
        let coords = self.domain.line_coords()?;
        self.a1.min_elems().first().map(|&i| coords[i])
    }

    /// Point-wise form: 1 on `A₁`, `1−λ` on `A₂∖A₁`, 0 elsewhere.
    pub fn materialize(&self) -> AllocationRule {
        let level = self.interior_level();
        let values = (0..self.domain.len())
            .map(|i| {
                if self.a1.contains(&self.domain, i) {
                    1.0
                } else if self.a2.contains(&self.domain, i) {
                    level
                } else {
                    0.0
                }
            })
            .collect();
        AllocationRule::new(self.domain.clone(), values)
            .expect("nested up-sets materialize to a monotone rule")
    }
}

/// The budget-k single-threshold rule against `μ`: value 1 strictly above
/// the marginal atom, a fractional level at it, 0 below, with `∫ q dμ = k`
/// exact to working precision.
///
/// The marginal atom is the largest grid point whose inclusive tail mass
/// still reaches `k`; the fractional level soaks up exactly the residual
/// budget, which on a point mass at `x̃` gives `q(x̃) = k`.
pub fn threshold_rule(mu: &GridMeasure, k: f64) -> Result<TwoStepRule> {
    if !mu.domain().is_line() {
        return Err(Error::Unsupported("threshold rules require a 1D grid".into()));
    }
    if !(0.0 < k && k < 1.0) {
        return Err(Error::Domain(format!("budget k = {k} outside (0, 1)")));
    }
    let n = mu.domain().len();
    let mass = mu.mass();
    // largest index whose inclusive tail reaches k
    let mut tail = 0.0;
    let mut idx = 0;
    for i in (0..n).rev() {
        tail += mass[i];
        if tail >= k {
            idx = i;
            break;
        }
    }
    let above: f64 = upper_integral(&vec![1.0; n], mu, idx)? - mass[idx];
    debug_assert!(mass[idx] > 0.0);
    let mut beta = ((k - above) / mass[idx]).clamp(0.0, 1.0);
    let mut rule = TwoStepRule::single_threshold(mu.domain().clone(), idx, beta)?;
    // one Newton correction against the shared budget evaluator pins the
    // residual at ulp level regardless of summation order
    let achieved = budget(&rule.materialize(), mu)?;
    beta = (beta + (k - achieved) / mass[idx]).clamp(0.0, 1.0);
    rule = TwoStepRule::single_threshold(mu.domain().clone(), idx, beta)?;
    Ok(rule)
}
