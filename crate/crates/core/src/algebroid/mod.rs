//! Courant-algebroid backends.
//!
//! Two concrete backends cover the scope of this crate:
//!
//! * [`point`] — the base is a point and the algebroid is a quadratic
//!   Lie algebra: the bracket is the Lie bracket, the anchor vanishes,
//!   and everything is exact linear algebra on structure constants.
//! * [`chart`] — an exact algebroid `(T ⊕ T*)U` over a coordinate box,
//!   classified by a closed 3-form H, with the twisted Dorfman bracket;
//!   all derivatives are central finite differences.
//!
//! [`action`] holds group actions of a quadratic Lie algebra on a chart
//! (the pullback situation used by the duality pipeline) together with
//! the kernel-coisotropy checks.

pub mod action;
pub mod chart;
pub mod point;

pub use action::{verify_pullback_conditions, GroupAction, PullbackConditionsReport};
pub use chart::{ChartSection, ExactChartCA, ThreeForm};
pub use point::QuadraticLieAlgebra;

use serde::Serialize;

/// Max residuals of the five bracket axioms, one entry per axiom.
///
/// All checkers are report-only: a failing axiom shows up as a large
/// residual, never as an error.
#[derive(Debug, Clone, Serialize)]
pub struct AxiomReport {
    /// [s,[t,u]] − [[s,t],u] − [t,[s,u]]
    pub leibniz: f64,
    /// ρ([s,t]) − [ρ(s),ρ(t)]
    pub anchor_homomorphism: f64,
    /// [s, f·t] − f·[s,t] − (ρ(s)f)·t
    pub module_rule: f64,
    /// ρ(s)⟨t,u⟩ − ⟨[s,t],u⟩ − ⟨t,[s,u]⟩
    pub pairing_invariance: f64,
    /// [s,t] + [t,s] − ρᵗ(d⟨s,t⟩)
    pub symmetrization: f64,
}

impl AxiomReport {
    pub fn max_residual(&self) -> f64 {
        self.leibniz
            .max(self.anchor_homomorphism)
            .max(self.module_rule)
            .max(self.pairing_invariance)
            .max(self.symmetrization)
    }

    pub fn pass(&self, tol: f64) -> bool {
        self.max_residual() < tol
    }
}
