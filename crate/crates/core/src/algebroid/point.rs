//! The point backend: a Lie algebra with an invariant non-degenerate
//! pairing. Sections are constant vectors, the anchor is zero, and the
//! Courant bracket is the Lie bracket computed from structure constants.

use nalgebra::{DMatrix, DVector};

use super::AxiomReport;
use crate::error::{Error, Result};
use crate::numeric::{self, Tensor3};
use crate::quadspace::Pairing;
use crate::tolerances;

/// Lie algebra with structure constants c\[i\]\[j\]\[k\] (meaning
/// \[eᵢ,eⱼ\] = Σₖ c\[i\]\[j\]\[k\] eₖ) and an ad-invariant pairing.
#[derive(Debug, Clone)]
pub struct QuadraticLieAlgebra {
    name: String,
    dim: usize,
    constants: Tensor3,
    pairing: Pairing,
}

impl QuadraticLieAlgebra {
    /// Validates antisymmetry of the constants, the Jacobi identity and
    /// ad-invariance of the pairing before accepting the algebra.
    pub fn new(name: &str, constants: Tensor3, pairing: Pairing) -> Result<Self> {
        let dim = pairing.dim();
        if constants.dim() != dim {
            return Err(Error::DimensionMismatch(format!(
                "structure constants have index range {}, pairing dimension {}",
                constants.dim(),
                dim
            )));
        }
        let alg = QuadraticLieAlgebra {
            name: name.to_string(),
            dim,
            constants,
            pairing,
        };
        let anti = alg.antisymmetry_residual();
        if anti > tolerances::POINT_STRUCTURE {
            return Err(Error::NotAntisymmetric(anti));
        }
        let jac = alg.jacobi_residual();
        if jac > tolerances::POINT_STRUCTURE {
            return Err(Error::JacobiFails(jac));
        }
        let inv = alg.ad_invariance_residual();
        if inv > tolerances::POINT_STRUCTURE {
            return Err(Error::NotAdInvariant(inv));
        }
        Ok(alg)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pairing(&self) -> &Pairing {
        &self.pairing
    }

    pub fn constants(&self) -> &Tensor3 {
        &self.constants
    }

    /// [u, v] by structure-constant contraction.
    pub fn bracket(&self, u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let n = self.dim;
        let mut out = DVector::zeros(n);
        for i in 0..n {
            if u[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                if v[j] == 0.0 {
                    continue;
                }
                let uv = u[i] * v[j];
                for k in 0..n {
                    out[k] += self.constants.get(i, j, k) * uv;
                }
            }
        }
        out
    }

    /// Matrix of ad(u) = [u, ·].
    pub fn ad(&self, u: &DVector<f64>) -> DMatrix<f64> {
        let n = self.dim;
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            let col = self.bracket(u, &numeric::basis_vector(n, j));
            m.set_column(j, &col);
        }
        m
    }

    /// The Cartan 3-form c(u,v,w) = ⟨[u,v], w⟩ — the torsion of the zero
    /// connection, which is the only connection over a point.
    pub fn cartan_three_form(&self) -> Tensor3 {
        let n = self.dim;
        let basis: Vec<DVector<f64>> = (0..n).map(|i| numeric::basis_vector(n, i)).collect();
        Tensor3::from_fn(n, |i, j, k| {
            self.pairing
                .eval(&self.bracket(&basis[i], &basis[j]), &basis[k])
        })
    }

    pub fn antisymmetry_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    worst = worst
                        .max((self.constants.get(i, j, k) + self.constants.get(j, i, k)).abs());
                }
            }
        }
        worst
    }

    /// max over basis triples of ‖[eᵢ,[eⱼ,eₖ]] − [[eᵢ,eⱼ],eₖ] − [eⱼ,[eᵢ,eₖ]]‖∞.
    pub fn jacobi_residual(&self) -> f64 {
        let n = self.dim;
        let basis: Vec<DVector<f64>> = (0..n).map(|i| numeric::basis_vector(n, i)).collect();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let lhs = self.bracket(&basis[i], &self.bracket(&basis[j], &basis[k]));
                    let rhs = self.bracket(&self.bracket(&basis[i], &basis[j]), &basis[k])
                        + self.bracket(&basis[j], &self.bracket(&basis[i], &basis[k]));
                    worst = worst.max((lhs - rhs).amax());
                }
            }
        }
        worst
    }

    /// max over basis triples of |⟨[x,y],z⟩ + ⟨y,[x,z]⟩|.
    pub fn ad_invariance_residual(&self) -> f64 {
        let n = self.dim;
        let basis: Vec<DVector<f64>> = (0..n).map(|i| numeric::basis_vector(n, i)).collect();
        let mut worst: f64 = 0.0;
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let r = self
                        .pairing
                        .eval(&self.bracket(&basis[x], &basis[y]), &basis[z])
                        + self
                            .pairing
                            .eval(&basis[y], &self.bracket(&basis[x], &basis[z]));
                    worst = worst.max(r.abs());
                }
            }
        }
        worst
    }

    /// ρᵗ over a point: the cotangent space is zero, so this is the zero
    /// section for any input. Kept for interface parity with the chart
    /// backend.
    pub fn rho_transpose(&self) -> DVector<f64> {
        DVector::zeros(self.dim)
    }

    /// Axiom residuals over basis sections. Over a point the anchor is
    /// zero and functions are constants, so the anchor and module-rule
    /// axioms are identically satisfied; they are reported as exact
    /// zeros for uniformity with the chart backend.
    pub fn check_axioms(&self) -> AxiomReport {
        AxiomReport {
            leibniz: self.jacobi_residual(),
            anchor_homomorphism: 0.0,
            module_rule: 0.0,
            pairing_invariance: self.ad_invariance_residual(),
            symmetrization: self.antisymmetry_residual(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn abelian_axioms_are_exact() {
        let alg = catalog::abelian_double(2);
        let report = alg.check_axioms();
        assert_eq!(report.max_residual(), 0.0);
        let u = DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(alg.bracket(&u, &u).amax(), 0.0);
        // The symmetrized bracket lands in the image of ρᵗ, which over a
        // point is zero.
        assert_eq!(alg.rho_transpose().amax(), 0.0);
    }

    #[test]
    fn su2_double_passes_axioms() {
        let alg = catalog::semiabelian_double_su2();
        assert!(alg.check_axioms().pass(1e-10));
    }

    #[test]
    fn sl2r_style_double_passes_axioms() {
        // sl(2,R) acting on its dual by coadjoint brackets.
        let alg = catalog::semiabelian_double_sl2r();
        assert!(alg.check_axioms().pass(1e-10));
    }

    #[test]
    fn broken_jacobi_is_rejected() {
        // Antisymmetric constants that fail Jacobi on (e1,e2,e4):
        // [e1,[e2,e4]] = 0 but [[e1,e2],e4] = [e3,e4] = e1.
        let mut c = Tensor3::zeros(4);
        for (i, j, k) in [(0, 1, 2), (2, 3, 0)] {
            c.set(i, j, k, 1.0);
            c.set(j, i, k, -1.0);
        }
        let err = QuadraticLieAlgebra::new("bad", c, Pairing::split(2));
        assert!(matches!(err, Err(Error::JacobiFails(_))));
    }

    #[test]
    fn cartan_form_is_antisymmetric() {
        for alg in [
            catalog::semiabelian_double_su2(),
            catalog::su2_su2_double(),
            catalog::sl2c_double(),
        ] {
            assert!(alg.cartan_three_form().antisymmetry_residual() < 1e-12);
        }
    }
}
