//! The tolerance ladder.
//!
//! Three regimes, matching how the numbers are produced:
//!
//! | Regime | Basis | Value |
//! |--------|-------|-------|
//! | algebraic | exact linear algebra in f64 | 1e-12 |
//! | first derivative | central differences, h = 1e-5 | 1e-5 |
//! | second derivative | nested central differences, h' = 1e-4 | 1e-4 |
//!
//! Central differences have truncation error O(h²) and roundoff error
//! O(ε/h); h = 1e-5 balances both near 1e-10 for O(1) data, and the 1e-5
//! acceptance leaves margin for O(1)..O(100) derivatives. Curvature-type
//! quantities differentiate coefficients that were themselves obtained by
//! differencing, hence the wider step and the 1e-4 ladder rung.

/// Quantities produced by exact (derivative-free) linear algebra.
pub const ALGEBRAIC: f64 = 1e-12;

/// Residuals involving one level of finite differencing.
pub const FD_FIRST: f64 = 1e-5;

/// Residuals involving nested finite differencing (curvature, ∇c,
/// theorem checks on chart backends).
pub const FD_SECOND: f64 = 1e-4;

/// Relative rank cut: singular values below this times the largest
/// singular value count as zero.
pub const RANK_REL: f64 = 1e-10;

/// Two subspaces are considered equal when every principal angle
/// between them is below this.
pub const SPAN: f64 = 1e-9;

/// Gram residual allowed for a signed orthonormal basis,
/// ‖BᵀηB − diag(signs)‖∞.
pub const SIGNED_GRAM: f64 = 1e-10;

/// Structure-constant residuals (antisymmetry, Jacobi, ad-invariance)
/// for point-case algebras.
pub const POINT_STRUCTURE: f64 = 1e-10;

/// Chart-side structural residuals verified by finite differences
/// (closedness of H, action closure, axiom checks).
pub const CHART_STRUCTURE: f64 = 1e-5;

/// Pairing/bracket preservation required of adjoint transports along
/// group charts.
pub const ADJOINT_AUTOMORPHISM: f64 = 1e-8;

/// First-difference step scale; the actual step is `h·max(1, |xₐ|)`
/// per coordinate.
pub const STEP_FIRST: f64 = 1e-5;

/// Step scale for differencing quantities that already contain one
/// level of finite differences.
pub const STEP_SECOND: f64 = 1e-4;

/// Blow-up guard for flow integration: stop when ‖GRic‖∞ exceeds this.
pub const FLOW_BLOWUP: f64 = 1e6;

/// Positivity margin below which a flow step is rejected.
pub const FLOW_POSITIVITY_MARGIN: f64 = 1e-8;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_is_ordered() {
        assert!(ALGEBRAIC < SIGNED_GRAM);
        assert!(SIGNED_GRAM < FD_FIRST);
        assert!(FD_FIRST < FD_SECOND);
        assert!(STEP_FIRST < STEP_SECOND);
    }
}
