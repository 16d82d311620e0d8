//! Actions of a quadratic Lie algebra on a chart, with the kernel
//! conditions that make the pullback algebroid well defined: generator
//! closure, coisotropic stabilizers, and (for exactness) transitivity
//! with Lagrangian stabilizers.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::point::QuadraticLieAlgebra;
use crate::numeric;
use crate::quadspace::{orthogonal_complement, Subspace};
use crate::tolerances;

type GeneratorFn = dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync;

/// Action of the algebra on a chart: `generators(x)` is the d×n matrix
/// whose i-th column is the generator vector field of the i-th basis
/// element at x, so the anchor of a constant section w is
/// `generators(x) · w`.
#[derive(Clone)]
pub struct GroupAction {
    chart_dim: usize,
    algebra_dim: usize,
    generators: Arc<GeneratorFn>,
}

impl GroupAction {
    pub fn from_fn<F>(chart_dim: usize, algebra_dim: usize, generators: F) -> Self
    where
        F: Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    {
        GroupAction {
            chart_dim,
            algebra_dim,
            generators: Arc::new(generators),
        }
    }

    pub fn chart_dim(&self) -> usize {
        self.chart_dim
    }

    pub fn algebra_dim(&self) -> usize {
        self.algebra_dim
    }

    pub fn generator_matrix(&self, x: &DVector<f64>) -> DMatrix<f64> {
        (self.generators)(x)
    }

    /// Generator field of w: ρ(w)(x).
    pub fn anchor(&self, w: &DVector<f64>, x: &DVector<f64>) -> DVector<f64> {
        self.generator_matrix(x) * w
    }

    /// max over basis pairs of ‖[ρ(eᵢ), ρ(eⱼ)] − ρ([eᵢ,eⱼ])‖∞ at x,
    /// Lie brackets by central differences.
    pub fn closure_residual(&self, algebra: &QuadraticLieAlgebra, x: &DVector<f64>) -> f64 {
        let n = self.algebra_dim;
        let d = self.chart_dim;
        let mut worst: f64 = 0.0;
        let r = self.generator_matrix(x);
        // ∂ₐ of the full generator matrix.
        let dr: Vec<DMatrix<f64>> = (0..d)
            .map(|a| numeric::diff_matrix(|y| self.generator_matrix(y), x, a, 0))
            .collect();
        for i in 0..n {
            for j in (i + 1)..n {
                let mut lie = DVector::zeros(d);
                for a in 0..d {
                    let mut acc = 0.0;
                    for b in 0..d {
                        acc += r[(b, i)] * dr[b][(a, j)] - r[(b, j)] * dr[b][(a, i)];
                    }
                    lie[a] = acc;
                }
                let ei = numeric::basis_vector(n, i);
                let ej = numeric::basis_vector(n, j);
                let expected = &r * algebra.bracket(&ei, &ej);
                worst = worst.max((lie - expected).amax());
            }
        }
        worst
    }

    /// Kernel of the anchor at x as a subspace of the algebra.
    pub fn stabilizer(&self, x: &DVector<f64>) -> Subspace {
        let r = self.generator_matrix(x);
        // ker(R) = Euclidean complement of range(Rᵀ).
        Subspace::new(numeric::orthocomplement_of_span(&r.transpose()))
            .expect("orthonormal kernel basis is full rank")
    }
}

/// Per-sample and aggregate results of the pullback conditions.
#[derive(Debug, Clone, Serialize)]
pub struct PullbackConditionsReport {
    /// max over samples of the generator-closure residual.
    pub closure_residual: f64,
    /// max over samples of the coisotropy containment residual
    /// sin∠(ker⊥, ker).
    pub coisotropy_residual: f64,
    /// Anchor rank equals the chart dimension at every sample.
    pub transitive: bool,
    /// Stabilizers are Lagrangian (ker⊥ = ker of dimension n/2) at every
    /// sample; with transitivity this makes the pullback exact.
    pub lagrangian_stabilizers: bool,
    pub exact: bool,
    pub samples: usize,
}

/// Checks, at each sample point: (i) the generators close under the Lie
/// bracket, (ii) the stabilizer ker ρₓ is coisotropic ((ker)⊥ ⊆ ker),
/// and (iii) whether the action is transitive with Lagrangian
/// stabilizers, which makes the pullback algebroid exact.
pub fn verify_pullback_conditions(
    algebra: &QuadraticLieAlgebra,
    action: &GroupAction,
    samples: &[DVector<f64>],
) -> PullbackConditionsReport {
    let mut closure: f64 = 0.0;
    let mut coisotropy: f64 = 0.0;
    let mut transitive = true;
    let mut lagrangian = true;

    for x in samples {
        closure = closure.max(action.closure_residual(algebra, x));

        let r = action.generator_matrix(x);
        if numeric::rank(&r, tolerances::RANK_REL) < action.chart_dim() {
            transitive = false;
        }

        let kernel = action.stabilizer(x);
        let perp =
            orthogonal_complement(algebra.pairing(), &kernel).expect("pairing is non-degenerate");
        // (ker)⊥ ⊆ ker measured as the largest principal angle between
        // ker⊥ and its projection into ker.
        let containment = if perp.subspace.dim() == 0 {
            0.0
        } else if perp.subspace.dim() > kernel.dim() {
            1.0
        } else {
            let qk = numeric::orthonormal_columns(kernel.basis());
            let qp = numeric::orthonormal_columns(perp.subspace.basis());
            let resid = &qp - &qk * (qk.transpose() * &qp);
            numeric::spectral_norm(&resid)
        };
        coisotropy = coisotropy.max(containment);

        let half = algebra.dim() / 2;
        if !(kernel.dim() == half
            && perp.subspace.dim() == half
            && containment < tolerances::SPAN.max(1e-8))
        {
            lagrangian = false;
        }
    }

    PullbackConditionsReport {
        closure_residual: closure,
        coisotropy_residual: coisotropy,
        transitive,
        lagrangian_stabilizers: lagrangian,
        exact: transitive && lagrangian,
        samples: samples.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn coadjoint_translation_action_is_exact() {
        // The semiabelian double acting on the dual of its subalgebra by
        // (coadjoint, translation): at every point the stabilizer is a
        // Lagrangian complement, so the pullback is exact.
        let algebra = catalog::semiabelian_double_su2();
        let action = catalog::coadjoint_translation_action(&algebra);
        let samples = numeric::sample_box(&[(-0.8, 0.8); 3], 6, 41);
        let report = verify_pullback_conditions(&algebra, &action, &samples);
        assert!(report.closure_residual < 1e-5, "{report:?}");
        assert!(report.coisotropy_residual < 1e-8, "{report:?}");
        assert!(report.exact, "{report:?}");
    }

    #[test]
    fn trivial_action_of_nonzero_algebra_fails() {
        let algebra = catalog::semiabelian_double_su2();
        let action = GroupAction::from_fn(3, 6, |_| DMatrix::zeros(3, 6));
        let samples = numeric::sample_box(&[(-0.8, 0.8); 3], 3, 43);
        let report = verify_pullback_conditions(&algebra, &action, &samples);
        // ker = everything, so ker⊥ = 0 is contained: coisotropic but
        // neither transitive nor Lagrangian.
        assert!(!report.transitive);
        assert!(!report.lagrangian_stabilizers);
        assert!(!report.exact);
    }

    #[test]
    fn diagonal_su2_conjugation_action_is_coisotropic() {
        // su(2)⊕su(2) acting on SU(2) through left/right translations;
        // stabilizers are the Ad-twisted diagonals, which are Lagrangian
        // for the (K, −K) pairing.
        let algebra = catalog::su2_su2_double();
        let action = catalog::su2_bi_translation_action(&algebra);
        let samples = numeric::sample_box(&[(-0.5, 0.5); 3], 5, 47);
        let report = verify_pullback_conditions(&algebra, &action, &samples);
        assert!(report.closure_residual < 1e-5, "{report:?}");
        assert!(report.coisotropy_residual < 1e-8, "{report:?}");
        assert!(report.exact, "{report:?}");
    }
}
