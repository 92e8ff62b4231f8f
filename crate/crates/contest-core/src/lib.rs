//! Budget-constrained monotone allocation rules on finite grids.
//!
//! The crate models a designer who hands out a prize mass `k` to a
//! continuum of contestants. Everything lives on finite grids so that
//! every integral is a finite sum and every optimum is exact:
//!
//! * [`measures`] — effort/performance grids, probability masses on
//!   them, and noise kernels (integration, tail integration,
//!   pushforwards).
//! * [`rules`] — monotone allocation rules, the budget constraint, the
//!   majorization order, and the nested two-step parametric form.
//! * [`extreme`] — brute-force vertex enumeration of the discretized
//!   monotone-budget polytope, two-step certification of every vertex,
//!   and an exact linear maximizer used as an independent oracle.
//! * [`solver`] — the designer's problem: classify the payoff weight,
//!   produce the optimal rule case by case, sweep budgets, and test the
//!   convexity/supermodularity conditions behind the majorization
//!   comparative statics.
//! * [`contest`] — the agent side: win probabilities (optionally through
//!   a noise kernel), best responses, equilibrium verification, and
//!   damped best-response dynamics.
//! * [`sampling`] — seeded generators for random monotone rules and
//!   ordered rule pairs, shared by the property checks.
//!
//! The crate is `no_std` + `alloc`; all IO lives in the companion CLI
//! crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod contest;
pub mod error;
pub mod extreme;
pub mod measures;
pub mod rules;
pub mod sampling;
pub mod solver;

pub use error::{Error, Result};
pub use measures::{integrate, pushforward, upper_integral, GridDomain, GridMeasure, NoiseKernel};
pub use rules::{majorizes, threshold_rule, AllocationRule, BudgetMode, TwoStepRule, UpSet};

/// Tolerance policy used across the crate.
pub mod tol {
    /// Structural sums: probability masses, kernel rows, budget residuals.
    pub const STRUCTURAL: f64 = 1e-12;
    /// User-supplied masses within this distance of 1 are renormalized;
    /// anything farther off is rejected.
    pub const RENORMALIZE: f64 = 1e-9;
    /// Slack allowed when comparing tail integrals in the majorization order.
    pub const MAJORIZATION_SLACK: f64 = 1e-12;
    /// Reconstruction residual accepted by two-step certification of float rules.
    pub const CERT_RESIDUAL: f64 = 1e-9;
    /// Agreement required between independent optimizer routes.
    pub const PAYOFF_AGREEMENT: f64 = 1e-9;
    /// Largest deviation gain tolerated by equilibrium verification.
    pub const EQUILIBRIUM_GAIN: f64 = 1e-9;
}

pub(crate) mod util {
    /// Compensated (Kahan) summation; keeps cross-route sum agreement at
    /// a few ulps regardless of term order.
    pub fn kahan_sum(terms: impl IntoIterator<Item = f64>) -> f64 {
        let mut sum = 0.0;
        let mut comp = 0.0;
        for t in terms {
            let y = t - comp;
            let next = sum + y;
            comp = (next - sum) - y;
            sum = next;
        }
        sum
    }

    /// SplitMix64 step, used to derive independent per-sample seeds.
    pub fn splitmix64(state: u64) -> u64 {
        let mut z = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
}
