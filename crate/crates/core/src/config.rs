//! JSON configuration formats: user-supplied quadratic Lie algebras and
//! chart algebroids.
//!
//! Algebra files carry sparse structure-constant triples and a dense
//! pairing:
//!
//! ```json
//! {
//!   "dim": 4,
//!   "structure_constants": [[0, 1, 1, 1.0], [1, 0, 1, -1.0]],
//!   "pairing": [[0,0,1,0],[0,0,0,1],[1,0,0,0],[0,1,0,0]]
//! }
//! ```
//!
//! Chart files describe the 3-form either by preset name or by a
//! polynomial coefficient table:
//!
//! ```json
//! {
//!   "dim": 3,
//!   "h_form": { "terms": [
//!     { "indices": [0,1,2], "poly": [ { "powers": [0,0,0], "coeff": 1.0 } ] }
//!   ]},
//!   "domain": [[-1.0,1.0],[-1.0,1.0],[-1.0,1.0]]
//! }
//! ```
//!
//! Entries are given for one index order; total antisymmetrization is
//! applied when building the tensor. Closedness is checked by the usual
//! report paths, not at parse time.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebroid::{ExactChartCA, QuadraticLieAlgebra, ThreeForm};
use crate::error::{Error, Result};
use crate::numeric::Tensor3;
use crate::quadspace::Pairing;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlgebraConfig {
    pub dim: usize,
    /// Sparse triples (i, j, k, value) meaning [eᵢ,eⱼ] ∋ value·eₖ.
    /// The antisymmetric partner may be omitted; it is filled in.
    pub structure_constants: Vec<(usize, usize, usize, f64)>,
    /// Row-major dense Gram matrix of the pairing.
    pub pairing: Vec<Vec<f64>>,
}

impl AlgebraConfig {
    pub fn to_algebra(&self, name: &str) -> Result<QuadraticLieAlgebra> {
        let n = self.dim;
        let mut c = Tensor3::zeros(n);
        for &(i, j, k, v) in &self.structure_constants {
            if i >= n || j >= n || k >= n {
                return Err(Error::ConfigInvalid(format!(
                    "structure constant index ({i},{j},{k}) out of range for dim {n}"
                )));
            }
            c.set(i, j, k, v);
            if c.get(j, i, k) == 0.0 {
                c.set(j, i, k, -v);
            }
        }
        if self.pairing.len() != n || self.pairing.iter().any(|row| row.len() != n) {
            return Err(Error::ConfigInvalid(format!(
                "pairing must be a dense {n}x{n} matrix"
            )));
        }
        let gram = DMatrix::from_fn(n, n, |i, j| self.pairing[i][j]);
        QuadraticLieAlgebra::new(name, c, Pairing::new(gram)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolyTerm {
    /// Exponent of each coordinate.
    pub powers: Vec<u32>,
    pub coeff: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HTerm {
    pub indices: [usize; 3],
    pub poly: Vec<PolyTerm>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HConfig {
    Preset { preset: String },
    Terms { terms: Vec<HTerm> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChartConfig {
    pub dim: usize,
    pub h_form: HConfig,
    pub domain: Vec<(f64, f64)>,
}

impl ChartConfig {
    pub fn to_chart(&self) -> Result<ExactChartCA> {
        let d = self.dim;
        let h = match &self.h_form {
            HConfig::Preset { preset } => match preset.as_str() {
                "zero" => ThreeForm::zero(d),
                other => {
                    return Err(Error::ConfigInvalid(format!(
                        "unknown h_form preset {other}"
                    )))
                }
            },
            HConfig::Terms { terms } => {
                for term in terms {
                    if term.indices.iter().any(|&i| i >= d) {
                        return Err(Error::ConfigInvalid(
                            "h_form term index out of range".into(),
                        ));
                    }
                    if term.poly.iter().any(|p| p.powers.len() != d) {
                        return Err(Error::ConfigInvalid(
                            "h_form polynomial powers must have chart dimension".into(),
                        ));
                    }
                }
                let terms = terms.clone();
                ThreeForm::from_fn(d, 0, move |x| {
                    let mut t = Tensor3::zeros(d);
                    for term in &terms {
                        let [i, j, k] = term.indices;
                        let mut value = 0.0;
                        for p in &term.poly {
                            let mut mono = p.coeff;
                            for (a, &pw) in p.powers.iter().enumerate() {
                                mono *= x[a].powi(pw as i32);
                            }
                            value += mono;
                        }
                        // Total antisymmetrization over the index triple.
                        for NamedPerm { perm, sign } in PERMUTATIONS {
                            let idx = [i, j, k];
                            let (a, b, c) = (idx[perm[0]], idx[perm[1]], idx[perm[2]]);
                            let prev = t.get(a, b, c);
                            t.set(a, b, c, prev + sign * value);
                        }
                    }
                    t
                })
            }
        };
        ExactChartCA::new(h, self.domain.clone())
    }
}

struct NamedPerm {
    perm: [usize; 3],
    sign: f64,
}

const PERMUTATIONS: [NamedPerm; 6] = [
    NamedPerm {
        perm: [0, 1, 2],
        sign: 1.0,
    },
    NamedPerm {
        perm: [1, 2, 0],
        sign: 1.0,
    },
    NamedPerm {
        perm: [2, 0, 1],
        sign: 1.0,
    },
    NamedPerm {
        perm: [1, 0, 2],
        sign: -1.0,
    },
    NamedPerm {
        perm: [0, 2, 1],
        sign: -1.0,
    },
    NamedPerm {
        perm: [2, 1, 0],
        sign: -1.0,
    },
];

pub fn load_algebra(path: &Path, name: &str) -> Result<QuadraticLieAlgebra> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::ConfigInvalid(format!("cannot read {}: {e}", path.display())))?;
    let config: AlgebraConfig = serde_json::from_str(&text)
        .map_err(|e| Error::ConfigInvalid(format!("{}: {e}", path.display())))?;
    config.to_algebra(name)
}

pub fn load_chart(path: &Path) -> Result<ExactChartCA> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::ConfigInvalid(format!("cannot read {}: {e}", path.display())))?;
    let config: ChartConfig = serde_json::from_str(&text)
        .map_err(|e| Error::ConfigInvalid(format!("{}: {e}", path.display())))?;
    config.to_chart()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use nalgebra::DVector;

    #[test]
    fn algebra_round_trip_matches_catalog() {
        // The affine double written sparsely: only the upper triples.
        let json = r#"{
            "dim": 4,
            "structure_constants": [
                [0, 1, 1, 1.0],
                [0, 3, 3, -1.0],
                [1, 3, 2, 1.0]
            ],
            "pairing": [
                [0,0,1,0],
                [0,0,0,1],
                [1,0,0,0],
                [0,1,0,0]
            ]
        }"#;
        let config: AlgebraConfig = serde_json::from_str(json).unwrap();
        let alg = config.to_algebra("affine_from_json").unwrap();
        let reference = catalog::semiabelian_double_affine();
        let n = 4;
        for i in 0..n {
            for j in 0..n {
                let a = alg.bracket(
                    &crate::numeric::basis_vector(n, i),
                    &crate::numeric::basis_vector(n, j),
                );
                let b = reference.bracket(
                    &crate::numeric::basis_vector(n, i),
                    &crate::numeric::basis_vector(n, j),
                );
                assert!((a - b).amax() < 1e-14, "bracket mismatch at ({i},{j})");
            }
        }
    }

    #[test]
    fn invalid_structure_constants_are_rejected() {
        let config = AlgebraConfig {
            dim: 2,
            structure_constants: vec![(0, 1, 5, 1.0)],
            pairing: vec![vec![0.0, 1.0], vec![1.0, 0.0]],
        };
        assert!(matches!(
            config.to_algebra("bad"),
            Err(Error::ConfigInvalid(_))
        ));
    }

    #[test]
    fn chart_with_polynomial_h() {
        let json = r#"{
            "dim": 3,
            "h_form": { "terms": [
                { "indices": [0, 1, 2],
                  "poly": [ { "powers": [0, 0, 0], "coeff": 2.0 } ] }
            ]},
            "domain": [[-1.0, 1.0], [-1.0, 1.0], [-1.0, 1.0]]
        }"#;
        let config: ChartConfig = serde_json::from_str(json).unwrap();
        let ca = config.to_chart().unwrap();
        let x = DVector::from_vec(vec![0.1, 0.2, 0.3]);
        let h = ca.h_form().eval(&x);
        assert_eq!(h.get(0, 1, 2), 2.0);
        assert_eq!(h.get(1, 0, 2), -2.0);
        assert!(h.antisymmetry_residual() < 1e-14);
    }

    #[test]
    fn chart_preset_zero() {
        let json = r#"{
            "dim": 2,
            "h_form": { "preset": "zero" },
            "domain": [[-1.0, 1.0], [-1.0, 1.0]]
        }"#;
        let config: ChartConfig = serde_json::from_str(json).unwrap();
        let ca = config.to_chart().unwrap();
        assert_eq!(ca.chart_dim(), 2);
    }
}
