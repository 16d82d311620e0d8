//! Built-in algebras, group charts, actions and chart-side backgrounds.
//!
//! Shipped quadratic Lie algebras: abelian doubles, su(2)⊕su(2) with the
//! (K, −K) pairing, semiabelian doubles 𝔤 ⋉ 𝔤* of aff(1), su(2) and
//! sl(2,ℝ), and sl(2,ℂ) as a real 6-dim algebra with the
//! imaginary-Killing pairing. Chart backgrounds: flat boxes, round
//! spheres in stereographic coordinates, and left-invariant (g, H)
//! families on the exp chart of SU(2).

use std::collections::BTreeMap;

use nalgebra::{Complex, DMatrix, DVector, Matrix2};

use crate::algebroid::{ExactChartCA, GroupAction, QuadraticLieAlgebra, ThreeForm};
use crate::duality::ManinTriple;
use crate::error::{Error, Result};
use crate::genmetric::ChartMetric;
use crate::numeric::{self, Tensor3};
use crate::quadspace::{IsotropicSplitting, Pairing, Subspace};

/// ε-tensor structure constants of su(2): [eᵢ,eⱼ] = εᵢⱼₖ eₖ.
pub fn su2_constants() -> Tensor3 {
    Tensor3::from_fn(3, |i, j, k| {
        ((i as i64 - j as i64) * (j as i64 - k as i64) * (k as i64 - i as i64)) as f64 / 2.0
    })
}

/// aff(1): [e₁, e₂] = e₂.
pub fn affine2_constants() -> Tensor3 {
    let mut c = Tensor3::zeros(2);
    c.set(0, 1, 1, 1.0);
    c.set(1, 0, 1, -1.0);
    c
}

/// sl(2,ℝ) in the (h, e, f) basis: [h,e] = 2e, [h,f] = −2f, [e,f] = h.
pub fn sl2r_constants() -> Tensor3 {
    let mut c = Tensor3::zeros(3);
    let mut set = |i: usize, j: usize, k: usize, v: f64| {
        c.set(i, j, k, v);
        c.set(j, i, k, -v);
    };
    set(0, 1, 1, 2.0);
    set(0, 2, 2, -2.0);
    set(1, 2, 0, 1.0);
    c
}

/// Abelian double ℝ²ᵐ with the canonical duality pairing.
pub fn abelian_double(m: usize) -> QuadraticLieAlgebra {
    QuadraticLieAlgebra::new("abelian", Tensor3::zeros(2 * m), Pairing::split(m))
        .expect("abelian double is a quadratic Lie algebra")
}

/// Semiabelian double 𝔤 ⋉ 𝔤* with the coadjoint action and the duality
/// pairing: [eᵢ,eⱼ] = f^k_{ij} eₖ, [eᵢ, ẽʲ] = −f^j_{ik} ẽᵏ, [ẽ, ẽ] = 0.
pub fn semiabelian_double(name: &str, base: &Tensor3) -> QuadraticLieAlgebra {
    let n = base.dim();
    let mut c = Tensor3::zeros(2 * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                c.set(i, j, k, base.get(i, j, k));
            }
        }
    }
    for i in 0..n {
        for b in 0..n {
            for k in 0..n {
                // [eᵢ, ẽᵇ] = −f^b_{ik} ẽᵏ and its antisymmetric partner.
                let v = -base.get(i, k, b);
                c.set(i, n + b, n + k, v);
                c.set(n + b, i, n + k, -v);
            }
        }
    }
    QuadraticLieAlgebra::new(name, c, Pairing::split(n))
        .expect("semiabelian double of a Lie algebra is quadratic")
}

pub fn semiabelian_double_affine() -> QuadraticLieAlgebra {
    semiabelian_double("affine_double", &affine2_constants())
}

pub fn semiabelian_double_su2() -> QuadraticLieAlgebra {
    semiabelian_double("su2_double", &su2_constants())
}

pub fn semiabelian_double_sl2r() -> QuadraticLieAlgebra {
    semiabelian_double("sl2r_double", &sl2r_constants())
}

/// su(2) ⊕ su(2) with pairing (K, −K), K the ε-basis form δ.
pub fn su2_su2_double() -> QuadraticLieAlgebra {
    let su2 = su2_constants();
    let mut c = Tensor3::zeros(6);
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let v = su2.get(i, j, k);
                c.set(i, j, k, v);
                c.set(3 + i, 3 + j, 3 + k, v);
            }
        }
    }
    let mut gram = DMatrix::identity(6, 6);
    for i in 3..6 {
        gram[(i, i)] = -1.0;
    }
    QuadraticLieAlgebra::new("su2_su2", c, Pairing::new(gram).unwrap())
        .expect("(K, −K) is ad-invariant on su(2)⊕su(2)")
}

/// Antidiagonal/diagonal isotropic splitting of su(2)⊕su(2); the
/// diagonal is the Lagrangian stabilizer subalgebra, the antidiagonal
/// its isotropic complement. The duality pairing of the two sides is
/// 2δ, and e = κ·I gives V₊ = {(a, μa)} with μ = (κ−2)/(κ+2), so
/// κ = 2 is V₊ = su(2)⊕0.
pub fn su2_su2_splitting(algebra: &QuadraticLieAlgebra) -> IsotropicSplitting {
    debug_assert_eq!(algebra.dim(), 6);
    let mut anti = DMatrix::zeros(6, 3);
    let mut diag = DMatrix::zeros(6, 3);
    for i in 0..3 {
        anti[(i, i)] = 1.0;
        anti[(3 + i, i)] = -1.0;
        diag[(i, i)] = 1.0;
        diag[(3 + i, i)] = 1.0;
    }
    IsotropicSplitting::new(
        algebra.pairing(),
        Subspace::new(anti).unwrap(),
        Subspace::new(diag).unwrap(),
    )
    .expect("diagonal pair is isotropic and complementary")
}

type C64 = Complex<f64>;

fn sl2c_basis() -> [Matrix2<C64>; 6] {
    let i = C64::new(0.0, 1.0);
    let r = |v: f64| C64::new(v, 0.0);
    [
        // su(2): eₖ = −(i/2)σₖ.
        Matrix2::new(r(0.0), -i * 0.5, -i * 0.5, r(0.0)),
        Matrix2::new(r(0.0), r(-0.5), r(0.5), r(0.0)),
        Matrix2::new(-i * 0.5, r(0.0), r(0.0), i * 0.5),
        // sb(2): dual basis under −2·Im tr(XY).
        Matrix2::new(r(0.0), r(1.0), r(0.0), r(0.0)),
        Matrix2::new(r(0.0), -i, r(0.0), r(0.0)),
        Matrix2::new(r(0.5), r(0.0), r(0.0), r(-0.5)),
    ]
}

/// Coordinates of a traceless complex 2×2 matrix in the sl2c basis.
fn sl2c_coords(m: &Matrix2<C64>) -> DVector<f64> {
    let a = m[(0, 0)];
    let b = m[(0, 1)];
    let c = m[(1, 0)];
    DVector::from_vec(vec![
        -2.0 * c.im,
        2.0 * c.re,
        -2.0 * a.im,
        b.re + c.re,
        -(b.im - c.im),
        2.0 * a.re,
    ])
}

/// sl(2,ℂ) as a real 6-dim quadratic Lie algebra with the
/// imaginary-Killing pairing ⟨X,Y⟩ = −2·Im tr(XY), in a basis adapted to
/// the (su(2), sb(2)) Manin triple: ⟨eᵢ, ẽʲ⟩ = δᵢⱼ.
pub fn sl2c_double() -> QuadraticLieAlgebra {
    let basis = sl2c_basis();
    let constants = Tensor3::from_fn(6, |i, j, k| {
        let comm = basis[i] * basis[j] - basis[j] * basis[i];
        sl2c_coords(&comm)[k]
    });
    let gram = DMatrix::from_fn(6, 6, |i, j| {
        let tr = (basis[i] * basis[j]).trace();
        -2.0 * tr.im
    });
    QuadraticLieAlgebra::new("sl2c", constants, Pairing::new(gram).unwrap())
        .expect("imaginary Killing form is invariant on sl(2,C)")
}

/// Look up a shipped point-case algebra.
pub fn point_algebra(name: &str) -> Option<QuadraticLieAlgebra> {
    match name {
        "abelian4" => Some(abelian_double(2)),
        "abelian6" => Some(abelian_double(3)),
        "su2_su2" => Some(su2_su2_double()),
        "affine_double" => Some(semiabelian_double_affine()),
        "su2_double" => Some(semiabelian_double_su2()),
        "sl2r_double" => Some(semiabelian_double_sl2r()),
        "sl2c" => Some(sl2c_double()),
        _ => None,
    }
}

pub fn point_algebra_names() -> Vec<&'static str> {
    vec![
        "abelian4",
        "abelian6",
        "su2_su2",
        "affine_double",
        "su2_double",
        "sl2r_double",
        "sl2c",
    ]
}

/// Exp-chart data of a Lie group with given structure constants: the
/// adjoint transport and the left Maurer–Cartan frame u⁻¹∂ₐu, both as
/// convergent matrix series in ad.
#[derive(Debug, Clone)]
pub struct LeftInvariantGroup {
    dim: usize,
    ad: Vec<DMatrix<f64>>,
}

impl LeftInvariantGroup {
    pub fn new(constants: &Tensor3) -> Self {
        let n = constants.dim();
        let ad = (0..n)
            .map(|i| DMatrix::from_fn(n, n, |k, j| constants.get(i, j, k)))
            .collect();
        LeftInvariantGroup { dim: n, ad }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ad_of(&self, v: &DVector<f64>) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (i, adi) in self.ad.iter().enumerate() {
            if v[i] != 0.0 {
                m += adi * v[i];
            }
        }
        m
    }

    /// Ad_{u(x)} = exp(ad_{Σxᵢeᵢ}) on the algebra.
    pub fn adjoint(&self, x: &DVector<f64>) -> DMatrix<f64> {
        numeric::expm(&self.ad_of(x))
    }

    /// Ad_{u(x)}⁻¹.
    pub fn adjoint_inv(&self, x: &DVector<f64>) -> DMatrix<f64> {
        numeric::expm(&(-self.ad_of(x)))
    }

    /// Left Maurer–Cartan matrix M(x) with u⁻¹∂ₐu = Σᵢ Mᵢₐ eᵢ,
    /// M = F(−ad_A), F(Z) = Σ Zᵏ/(k+1)!.
    pub fn maurer_cartan(&self, x: &DVector<f64>) -> DMatrix<f64> {
        numeric::exp_series_f(&(-self.ad_of(x)))
    }
}

/// Chart metric for a left-invariant e-field on the exp chart:
/// e(x) = M(x)ᵀ · e_frame · M(x).
pub fn left_invariant_metric(group: &LeftInvariantGroup, e_frame: DMatrix<f64>) -> ChartMetric {
    let group = group.clone();
    ChartMetric::from_fn(group.dim(), 0, move |x| {
        let m = group.maurer_cartan(x);
        m.transpose() * &e_frame * m
    })
}

/// Pullback of a constant frame 3-form to the exp chart:
/// H(x)_{abc} = Σ H_frame_{ijk} Mᵢₐ Mⱼᵦ Mₖ꜀.
pub fn left_invariant_three_form(group: &LeftInvariantGroup, h_frame: Tensor3) -> ThreeForm {
    let group = group.clone();
    let n = group.dim();
    ThreeForm::from_fn(n, 0, move |x| {
        let m = group.maurer_cartan(x);
        let mut out = Tensor3::zeros(n);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let mut acc = 0.0;
                    for i in 0..n {
                        for j in 0..n {
                            for k in 0..n {
                                let v = h_frame.get(i, j, k);
                                if v != 0.0 {
                                    acc += v * m[(i, a)] * m[(j, b)] * m[(k, c)];
                                }
                            }
                        }
                    }
                    out.set(a, b, c, acc);
                }
            }
        }
        out
    })
}

const GROUP_CHART_BOX: (f64, f64) = (-0.45, 0.45);

/// Flat background: H = 0, e = identity.
pub fn flat_chart(d: usize) -> (ExactChartCA, ChartMetric) {
    (ExactChartCA::flat(d), ChartMetric::flat(d))
}

/// Round 3-sphere of radius r in stereographic coordinates:
/// g = 4r⁴/(r² + |x|²)² · δ, H = 0.
pub fn round_sphere_chart(r: f64) -> (ExactChartCA, ChartMetric) {
    let ca = ExactChartCA::new(ThreeForm::zero(3), vec![(-0.6, 0.6); 3]).unwrap();
    (ca, round_sphere_metric(r))
}

pub fn round_sphere_metric(r: f64) -> ChartMetric {
    ChartMetric::from_fn(3, 0, move |x| {
        let s = r * r + x.norm_squared();
        DMatrix::identity(3, 3) * (4.0 * r.powi(4) / (s * s))
    })
}

/// SU(2) with bi-invariant metric k·δ and H = λ·k·(Cartan 3-form);
/// λ = 1 is the matched point where the torsionful connection is flat.
pub fn su2_wzw_chart(k: f64, lambda: f64) -> (ExactChartCA, ChartMetric) {
    let group = LeftInvariantGroup::new(&su2_constants());
    let h_frame =
        cartan_three_form_frame(&su2_constants(), &(DMatrix::identity(3, 3) * k)).scale(lambda);
    let ca = ExactChartCA::new(
        left_invariant_three_form(&group, h_frame),
        vec![GROUP_CHART_BOX; 3],
    )
    .unwrap();
    let metric = left_invariant_metric(&group, DMatrix::identity(3, 3) * k);
    (ca, metric)
}

/// Berger (squashed) 3-sphere: left-invariant diag(p, p, q) on SU(2),
/// H = 0.
pub fn berger_chart(p: f64, q: f64) -> (ExactChartCA, ChartMetric) {
    let group = LeftInvariantGroup::new(&su2_constants());
    let ca = ExactChartCA::new(ThreeForm::zero(3), vec![GROUP_CHART_BOX; 3]).unwrap();
    let metric = left_invariant_metric(
        &group,
        DMatrix::from_diagonal(&DVector::from_vec(vec![p, p, q])),
    );
    (ca, metric)
}

/// Frame components of the Cartan 3-form H(X,Y,Z) = g_frame([X,Y], Z).
pub fn cartan_three_form_frame(constants: &Tensor3, g_frame: &DMatrix<f64>) -> Tensor3 {
    let n = constants.dim();
    Tensor3::from_fn(n, |i, j, k| {
        (0..n)
            .map(|l| constants.get(i, j, l) * g_frame[(l, k)])
            .sum()
    })
}

/// Chart preset lookup for the CLI: name plus numeric parameters.
pub fn chart_preset(
    name: &str,
    params: &BTreeMap<String, f64>,
) -> Result<(ExactChartCA, ChartMetric)> {
    let get = |key: &str, default: f64| params.get(key).copied().unwrap_or(default);
    match name {
        "flat" => Ok(flat_chart(get("d", 3.0) as usize)),
        "round_s3" | "round_sphere" => Ok(round_sphere_chart(get("r", 1.0))),
        "su2_wzw" => Ok(su2_wzw_chart(get("k", 1.0), get("lambda", 1.0))),
        "berger" => Ok(berger_chart(get("p", 1.0), get("q", 1.0))),
        _ => Err(Error::ConfigInvalid(format!("unknown chart preset {name}"))),
    }
}

pub fn chart_preset_names() -> Vec<&'static str> {
    vec!["flat", "round_s3", "su2_wzw", "berger"]
}

/// Shipped Manin triples; the doubles are basis-adapted so the sides
/// are coordinate index sets.
pub fn manin_triple(name: &str) -> Option<ManinTriple> {
    let (double, m) = match name {
        "abelian4" => (abelian_double(2), 2),
        "affine_double" => (semiabelian_double_affine(), 2),
        "su2_semiabelian" => (semiabelian_double_su2(), 3),
        "sl2r_semiabelian" => (semiabelian_double_sl2r(), 3),
        "sl2c_su2_sb2" => (sl2c_double(), 3),
        _ => return None,
    };
    Some(
        ManinTriple::new(double, (0..m).collect(), (m..2 * m).collect())
            .expect("catalog doubles are Manin triples"),
    )
}

pub fn manin_triple_names() -> Vec<&'static str> {
    vec![
        "abelian4",
        "affine_double",
        "su2_semiabelian",
        "sl2r_semiabelian",
        "sl2c_su2_sb2",
    ]
}

/// The semiabelian double acting on the dual vector space by
/// (coadjoint, translation), signs flipped so the generator map is a Lie
/// algebra homomorphism.
pub fn coadjoint_translation_action(algebra: &QuadraticLieAlgebra) -> GroupAction {
    let n = algebra.dim() / 2;
    let constants = algebra.constants().clone();
    GroupAction::from_fn(n, 2 * n, move |xi| {
        let mut r = DMatrix::zeros(n, 2 * n);
        for i in 0..n {
            for k in 0..n {
                // (ad*_{eᵢ}ξ)ₖ = −f^l_{ik} ξ_l; the generator is its
                // negative.
                let mut acc = 0.0;
                for l in 0..n {
                    acc += constants.get(i, k, l) * xi[l];
                }
                r[(k, i)] = acc;
            }
        }
        for j in 0..n {
            // generator of ẽʲ: −∂ⱼ.
            r[(j, n + j)] = -1.0;
        }
        r
    })
}

/// su(2)⊕su(2) acting on SU(2) in the exp chart by inverted left/right
/// translations: ρ(a,b)|ᵥ = M(x)⁻¹(b − Ad_{v⁻¹}a).
pub fn su2_bi_translation_action(algebra: &QuadraticLieAlgebra) -> GroupAction {
    debug_assert_eq!(algebra.dim(), 6);
    let group = LeftInvariantGroup::new(&su2_constants());
    GroupAction::from_fn(3, 6, move |x| {
        let minv = group
            .maurer_cartan(x)
            .try_inverse()
            .expect("Maurer-Cartan frame is invertible inside the chart");
        let ad_inv = group.adjoint_inv(x);
        let mut r = DMatrix::zeros(3, 6);
        r.view_mut((0, 0), (3, 3)).copy_from(&(-&minv * ad_inv));
        r.view_mut((0, 3), (3, 3)).copy_from(&minv);
        r
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_algebras_pass_structure_checks() {
        for name in point_algebra_names() {
            let alg = point_algebra(name).unwrap();
            assert!(
                alg.check_axioms().pass(1e-10),
                "{name} fails structure checks"
            );
        }
    }

    #[test]
    fn sl2c_pairing_is_manin_adapted() {
        let alg = sl2c_double();
        let expected = Pairing::split(3);
        assert!((alg.pairing().gram() - expected.gram()).amax() < 1e-12);
    }

    #[test]
    fn sl2c_sides_are_subalgebras() {
        let alg = sl2c_double();
        let eps = su2_constants();
        for i in 0..3 {
            for j in 0..3 {
                let br = alg.bracket(&numeric::basis_vector(6, i), &numeric::basis_vector(6, j));
                for k in 3..6 {
                    assert!(br[k].abs() < 1e-12, "su(2) not closed");
                }
                for k in 0..3 {
                    assert!((br[k] - eps.get(i, j, k)).abs() < 1e-12);
                }
            }
        }
        for i in 3..6 {
            for j in 3..6 {
                let br = alg.bracket(&numeric::basis_vector(6, i), &numeric::basis_vector(6, j));
                for k in 0..3 {
                    assert!(br[k].abs() < 1e-12, "sb(2) not closed");
                }
            }
        }
    }

    #[test]
    fn maurer_cartan_matches_finite_difference_of_exp() {
        // u(x) = exp(ad_A) in the adjoint representation: u⁻¹∂ₐu must be
        // ad of the series value Σᵢ Mᵢₐ eᵢ.
        let group = LeftInvariantGroup::new(&su2_constants());
        let x = DVector::from_vec(vec![0.3, -0.2, 0.4]);
        let m = group.maurer_cartan(&x);
        for a in 0..3 {
            let du = numeric::diff_matrix(|y| numeric::expm(&group.ad_of(y)), &x, a, 0);
            let lhs = group.adjoint_inv(&x) * du;
            let expected = group.ad_of(&m.column(a).into_owned());
            assert!(
                (lhs - expected).amax() < 1e-8,
                "Maurer-Cartan series disagrees with finite differences"
            );
        }
    }

    #[test]
    fn wzw_chart_h_is_closed_and_metric_positive() {
        let (ca, metric) = su2_wzw_chart(1.0, 1.0);
        let samples = ca.sample_points(5, 61);
        assert!(ca.closedness_residual(&samples) < 1e-5);
        for x in &samples {
            assert!(ca.h_form().eval(x).antisymmetry_residual() < 1e-12);
            let eig = metric.g_at(x).symmetric_eigen().eigenvalues;
            assert!(eig.iter().all(|&l| l > 0.0));
            assert!(metric.b_at(x).amax() < 1e-12);
        }
    }

    #[test]
    fn round_sphere_metric_is_conformal() {
        let m = round_sphere_metric(2.0);
        let x = DVector::from_vec(vec![0.1, 0.2, -0.3]);
        let g = m.g_at(&x);
        let s = 4.0 + x.norm_squared();
        assert!((g[(0, 0)] - 4.0 * 16.0 / (s * s)).abs() < 1e-14);
        assert!(g[(0, 1)].abs() < 1e-14);
    }
}
