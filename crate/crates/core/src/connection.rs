//! Pairing-preserving connections ∇ = ∇⁺ ⊕ ∇⁻ on the chart backend,
//! their torsion 3-tensor, the canonical minus connection, and
//! curvature.
//!
//! A connection is stored through its coefficient matrices in the
//! ambient (T ⊕ T*) frame: ∇ₐs = ∂ₐs + Aₐ(x)s. Metricity is
//! ⟨,⟩-antisymmetry of Aₐ; compatibility means ∇ preserves the moving
//! subbundles V±(x), which is arranged by building coefficients from
//! projector fields rather than by masking constant blocks.
//!
//! Over a point the tangent space is zero, every connection is the zero
//! map, and the torsion reduces to the Cartan 3-form ⟨[u,v],w⟩
//! ([`torsion_c_point`]). Connection-variation statements are vacuous
//! there (Ω¹ of a point vanishes), so the variation machinery is all
//! chart-side.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::algebroid::{ChartSection, ExactChartCA, QuadraticLieAlgebra};
use crate::error::{Error, Result};
use crate::genmetric::ChartMetric;
use crate::numeric::{self, Tensor3};

type CoeffFn = dyn Fn(&DVector<f64>, usize) -> DMatrix<f64> + Send + Sync;

/// ⟨,⟩-preserving connection on the 2d fiber: ∇ₐ s = ∂ₐ s + Aₐ(x) s.
#[derive(Clone)]
pub struct ChartConnection {
    chart_dim: usize,
    coeff: Arc<CoeffFn>,
    fd_depth: u8,
}

impl ChartConnection {
    pub fn from_fn<F>(chart_dim: usize, fd_depth: u8, coeff: F) -> Self
    where
        F: Fn(&DVector<f64>, usize) -> DMatrix<f64> + Send + Sync + 'static,
    {
        ChartConnection {
            chart_dim,
            coeff: Arc::new(coeff),
            fd_depth,
        }
    }

    pub fn chart_dim(&self) -> usize {
        self.chart_dim
    }

    pub fn fd_depth(&self) -> u8 {
        self.fd_depth
    }

    /// Coefficient matrix Aₐ(x).
    pub fn coeff_at(&self, x: &DVector<f64>, a: usize) -> DMatrix<f64> {
        (self.coeff)(x, a)
    }

    /// (∇ₐ u)(x) = ∂ₐu(x) + Aₐ(x)u(x).
    pub fn nabla_at(&self, u: &ChartSection, a: usize, x: &DVector<f64>) -> DVector<f64> {
        numeric::diff_vector(|y| u.eval(y), x, a, u.fd_depth()) + self.coeff_at(x, a) * u.eval(x)
    }

    /// ∇ₐ u as a section; fd depth grows by one.
    pub fn nabla_section(&self, u: &ChartSection, a: usize) -> ChartSection {
        let conn = self.clone();
        let u2 = u.clone();
        let depth = u.fd_depth().max(self.fd_depth) + 1;
        ChartSection::from_fn(self.chart_dim, depth, move |x| conn.nabla_at(&u2, a, x))
    }

    /// Curvature coefficient R(∂ₐ, ∂_b) = ∂ₐA_b − ∂_bAₐ + [Aₐ, A_b].
    pub fn curvature_matrix(&self, x: &DVector<f64>, a: usize, b: usize) -> DMatrix<f64> {
        let da_b = numeric::diff_matrix(|y| self.coeff_at(y, b), x, a, self.fd_depth);
        let db_a = numeric::diff_matrix(|y| self.coeff_at(y, a), x, b, self.fd_depth);
        let aa = self.coeff_at(x, a);
        let ab = self.coeff_at(x, b);
        da_b - db_a + &aa * &ab - ab * aa
    }

    /// Metricity residual: max over coordinate directions and the given
    /// section pairs of |∂ₐ⟨u,v⟩ − ⟨∇ₐu, v⟩ − ⟨u, ∇ₐv⟩|.
    pub fn metricity_residual(
        &self,
        ca: &ExactChartCA,
        sections: &[ChartSection],
        samples: &[DVector<f64>],
    ) -> f64 {
        let pairing = ca.pairing();
        let mut worst: f64 = 0.0;
        for u in sections {
            for v in sections {
                for x in samples {
                    for a in 0..self.chart_dim {
                        let lhs = numeric::diff_scalar(
                            |y| pairing.eval(&u.eval(y), &v.eval(y)),
                            x,
                            a,
                            u.fd_depth().max(v.fd_depth()),
                        );
                        let rhs = pairing.eval(&self.nabla_at(u, a, x), &v.eval(x))
                            + pairing.eval(&u.eval(x), &self.nabla_at(v, a, x));
                        worst = worst.max((lhs - rhs).abs());
                    }
                }
            }
        }
        worst
    }

    /// Compatibility residual: ∇ of a V₊-section must stay in V₊ and
    /// likewise for V₋: max |P∓(∇ₐ σ±_b)|.
    pub fn compatibility_residual(&self, metric: &ChartMetric, samples: &[DVector<f64>]) -> f64 {
        let d = self.chart_dim;
        let mut worst: f64 = 0.0;
        for x in samples {
            let (p_plus, p_minus) = projectors_at(metric, x);
            for b in 0..d {
                let sp = metric.lift_plus(b);
                let sm = metric.lift_minus(b);
                for a in 0..d {
                    worst = worst.max((&p_minus * self.nabla_at(&sp, a, x)).amax());
                    worst = worst.max((&p_plus * self.nabla_at(&sm, a, x)).amax());
                }
            }
        }
        worst
    }
}

/// Projectors onto V₊(x) and V₋(x) along each other, from the graph
/// data: for v = (X, ξ), writing v = lift₊(X₊) + lift₋(X₋) gives
/// ξ = eᵀX₊ − e(X − X₊), so the V₊-coordinate solves (2g)X₊ = ξ + eX.
pub fn projectors_at(metric: &ChartMetric, x: &DVector<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let d = metric.chart_dim();
    let e = metric.e_at(x);
    let two_g = &e + e.transpose();
    let inv = two_g.lu().try_inverse().expect("g is positive definite");
    let mut xplus = DMatrix::zeros(d, 2 * d);
    xplus.view_mut((0, 0), (d, d)).copy_from(&(&inv * &e));
    xplus.view_mut((0, d), (d, d)).copy_from(&inv);
    let mut lift_plus = DMatrix::zeros(2 * d, d);
    lift_plus.view_mut((0, 0), (d, d)).fill_with_identity();
    lift_plus.view_mut((d, 0), (d, d)).copy_from(&e.transpose());
    let p_plus = lift_plus * xplus;
    let p_minus = DMatrix::identity(2 * d, 2 * d) - &p_plus;
    (p_plus, p_minus)
}

/// Christoffel matrices of the symmetric part g: (Γₐ)ᵏ_b = Γᵏ_{ab},
/// computed by central differences.
pub fn christoffel(metric: &ChartMetric, x: &DVector<f64>) -> Vec<DMatrix<f64>> {
    let d = metric.chart_dim();
    let g_inv = metric
        .g_at(x)
        .lu()
        .try_inverse()
        .expect("g is positive definite");
    let dg: Vec<DMatrix<f64>> = (0..d)
        .map(|c| numeric::diff_matrix(|y| metric.g_at(y), x, c, metric.fd_depth()))
        .collect();
    (0..d)
        .map(|a| {
            let mut gamma = DMatrix::zeros(d, d);
            for k in 0..d {
                for b in 0..d {
                    let mut acc = 0.0;
                    for l in 0..d {
                        acc +=
                            0.5 * g_inv[(k, l)] * (dg[a][(l, b)] + dg[b][(l, a)] - dg[l][(a, b)]);
                    }
                    gamma[(k, b)] = acc;
                }
            }
            gamma
        })
        .collect()
}

/// The Levi-Civita pair ∇ = lift₊∘∇ᴸᶜ∘ρ∘P₊ ⊕ lift₋∘∇ᴸᶜ∘ρ∘P₋ — the
/// default compatible metric seed.
pub fn levi_civita_pair(metric: &ChartMetric) -> ChartConnection {
    let d = metric.chart_dim();
    let metric = metric.clone();
    let depth = metric.fd_depth() + 1;
    ChartConnection::from_fn(d, depth, move |x, a| {
        let gamma = christoffel(&metric, x);
        let e = metric.e_at(x);
        let (p_plus, p_minus) = projectors_at(&metric, x);
        // ∂ₐ of the anchor-projected fields y ↦ ρ(P±(y)eᵢ).
        let d_rho_p = numeric::diff_matrix(
            |y| projectors_at(&metric, y).0.rows(0, d).into_owned(),
            x,
            a,
            metric.fd_depth(),
        );
        let d_rho_m = numeric::diff_matrix(
            |y| projectors_at(&metric, y).1.rows(0, d).into_owned(),
            x,
            a,
            metric.fd_depth(),
        );
        let rho_p = p_plus.rows(0, d).into_owned();
        let rho_m = p_minus.rows(0, d).into_owned();
        let cov_plus = d_rho_p + &gamma[a] * rho_p;
        let cov_minus = d_rho_m + &gamma[a] * rho_m;
        let mut lift_plus = DMatrix::zeros(2 * d, d);
        lift_plus.view_mut((0, 0), (d, d)).fill_with_identity();
        lift_plus.view_mut((d, 0), (d, d)).copy_from(&e.transpose());
        let mut lift_minus = DMatrix::zeros(2 * d, d);
        lift_minus.view_mut((0, 0), (d, d)).fill_with_identity();
        lift_minus.view_mut((d, 0), (d, d)).copy_from(&(-&e));
        lift_plus * cov_plus + lift_minus * cov_minus
    })
}

/// Torsion 3-tensor of a compatible connection, on the constant frame
/// sections at x:
/// c(u,v,w) = ⟨[u,v] − ∇_{ρ(u)}v + ∇_{ρ(v)}u − ρᵗ⟨∇u, v⟩, w⟩.
pub fn torsion_c(ca: &ExactChartCA, conn: &ChartConnection, x: &DVector<f64>) -> Result<Tensor3> {
    ca.check_point(x)?;
    let d = ca.chart_dim();
    let n = 2 * d;
    let coeff: Vec<DMatrix<f64>> = (0..d).map(|a| conn.coeff_at(x, a)).collect();
    let h = ca.h_form().eval(x);
    let gram = ca.pairing().gram();

    let mut c = Tensor3::zeros(n);
    for i in 0..n {
        for j in 0..n {
            // Bracket of constant frame sections: (0, H(Xᵢ, Xⱼ, ·)).
            let mut val = DVector::zeros(n);
            if i < d && j < d {
                for b in 0..d {
                    val[d + b] += h.get(i, j, b);
                }
            }
            // −∇_{ρ(eᵢ)}eⱼ + ∇_{ρ(eⱼ)}eᵢ: pure coefficient action on
            // constant sections.
            if i < d {
                val -= coeff[i].column(j).into_owned();
            }
            if j < d {
                val += coeff[j].column(i).into_owned();
            }
            // −ρᵗ⟨∇eᵢ, eⱼ⟩ with ωₐ = ⟨Aₐeᵢ, eⱼ⟩.
            for a in 0..d {
                let w = (gram * coeff[a].column(i))[j];
                val[d + a] -= w;
            }
            let lowered = gram * val;
            for k in 0..n {
                c.set(i, j, k, lowered[k]);
            }
        }
    }
    Ok(c)
}

/// Block shift a = a₊ + a₋, a± ∈ Ω¹(U, ⋀²V±), given through coefficient
/// 2-forms in the graph-lift frames: `form(x, a)[(b,c)] = a(∂ₐ)(σ_b, σ_c)`.
#[derive(Clone)]
pub struct ConnectionShift {
    chart_dim: usize,
    plus_form: Option<Arc<CoeffFn>>,
    minus_form: Option<Arc<CoeffFn>>,
    fd_depth: u8,
}

impl ConnectionShift {
    pub fn minus<F>(chart_dim: usize, fd_depth: u8, form: F) -> Self
    where
        F: Fn(&DVector<f64>, usize) -> DMatrix<f64> + Send + Sync + 'static,
    {
        ConnectionShift {
            chart_dim,
            plus_form: None,
            minus_form: Some(Arc::new(form)),
            fd_depth,
        }
    }

    pub fn plus<F>(chart_dim: usize, fd_depth: u8, form: F) -> Self
    where
        F: Fn(&DVector<f64>, usize) -> DMatrix<f64> + Send + Sync + 'static,
    {
        ConnectionShift {
            chart_dim,
            plus_form: Some(Arc::new(form)),
            minus_form: None,
            fd_depth,
        }
    }

    /// Deterministic random shift with polynomial coefficient forms.
    pub fn random(
        chart_dim: usize,
        with_plus: bool,
        with_minus: bool,
        rng: &mut rand_chacha::ChaCha8Rng,
    ) -> Self {
        let d = chart_dim;
        let make = |rng: &mut rand_chacha::ChaCha8Rng| {
            let consts: Vec<DMatrix<f64>> = (0..d)
                .map(|_| numeric::random_antisymmetric(d, rng))
                .collect();
            let linear: Vec<DMatrix<f64>> = (0..d)
                .map(|_| numeric::random_antisymmetric(d, rng))
                .collect();
            move |x: &DVector<f64>, a: usize| &consts[a] + &linear[a] * x.sum()
        };
        let plus = make(rng);
        let minus = make(rng);
        ConnectionShift {
            chart_dim,
            plus_form: with_plus.then(|| Arc::new(plus) as Arc<CoeffFn>),
            minus_form: with_minus.then(|| Arc::new(minus) as Arc<CoeffFn>),
            fd_depth: 0,
        }
    }

    pub fn chart_dim(&self) -> usize {
        self.chart_dim
    }

    pub fn fd_depth(&self) -> u8 {
        self.fd_depth
    }

    pub fn has_minus(&self) -> bool {
        self.minus_form.is_some()
    }

    pub fn minus_form_at(&self, x: &DVector<f64>, a: usize) -> DMatrix<f64> {
        match &self.minus_form {
            Some(f) => f(x, a),
            None => DMatrix::zeros(self.chart_dim, self.chart_dim),
        }
    }

    pub fn plus_form_at(&self, x: &DVector<f64>, a: usize) -> DMatrix<f64> {
        match &self.plus_form {
            Some(f) => f(x, a),
            None => DMatrix::zeros(self.chart_dim, self.chart_dim),
        }
    }

    fn antisymmetry_residual(&self, x: &DVector<f64>) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..self.chart_dim {
            let m = self.minus_form_at(x, a);
            worst = worst.max((&m + m.transpose()).amax());
            let p = self.plus_form_at(x, a);
            worst = worst.max((&p + p.transpose()).amax());
        }
        worst
    }

    /// Ambient operator of the minus part in direction a: maps V₋ → V₋,
    /// kills V₊, with ⟨Â y₋, z₋⟩ = a₋(∂ₐ)(y₋, z₋).
    pub fn minus_operator(&self, metric: &ChartMetric, x: &DVector<f64>, a: usize) -> DMatrix<f64> {
        operator_from_form(metric, x, &self.minus_form_at(x, a), false)
    }

    pub fn plus_operator(&self, metric: &ChartMetric, x: &DVector<f64>, a: usize) -> DMatrix<f64> {
        operator_from_form(metric, x, &self.plus_form_at(x, a), true)
    }
}

/// Ambient operator on V± (killing the other side) of a 2-form given in
/// the graph-lift frame: solve the side Gram system and conjugate with
/// the lift and coordinate maps.
fn operator_from_form(
    metric: &ChartMetric,
    x: &DVector<f64>,
    form: &DMatrix<f64>,
    plus_side: bool,
) -> DMatrix<f64> {
    let d = metric.chart_dim();
    let e = metric.e_at(x);
    let two_g = &e + e.transpose();
    // ⟨σ±_a, σ±_b⟩ = ±2g in the lift frame.
    let gram = if plus_side { two_g.clone() } else { -two_g };
    let beta = gram
        .lu()
        .solve(&form.transpose())
        .expect("side Gram is definite");
    let (p_plus, p_minus) = projectors_at(metric, x);
    let coords = if plus_side {
        p_plus.rows(0, d).into_owned()
    } else {
        p_minus.rows(0, d).into_owned()
    };
    let mut lift = DMatrix::zeros(2 * d, d);
    lift.view_mut((0, 0), (d, d)).fill_with_identity();
    if plus_side {
        lift.view_mut((d, 0), (d, d)).copy_from(&e.transpose());
    } else {
        lift.view_mut((d, 0), (d, d)).copy_from(&(-&e));
    }
    lift * beta * coords
}

/// ∇ + a for a block-diagonal antisymmetric shift; antisymmetry is
/// validated at the probe point.
pub fn vary(
    metric: &ChartMetric,
    conn: &ChartConnection,
    shift: &ConnectionShift,
    probe: &DVector<f64>,
) -> Result<ChartConnection> {
    let resid = shift.antisymmetry_residual(probe);
    if resid > 1e-10 {
        return Err(Error::ShiftNotAntisymmetric(resid));
    }
    let metric = metric.clone();
    let conn_inner = conn.clone();
    let shift = shift.clone();
    let depth = conn.fd_depth().max(metric.fd_depth() + 1);
    Ok(ChartConnection::from_fn(
        conn.chart_dim(),
        depth,
        move |x, a| {
            conn_inner.coeff_at(x, a)
                + shift.plus_operator(&metric, x, a)
                + shift.minus_operator(&metric, x, a)
        },
    ))
}

/// The canonical minus connection ∇⁻_can = ∇⁻ + a₋ with
/// a₋(ρ(x₊))(y₋,z₋) = c_∇(x₊, y₋, z₋), killing the (+,−,−) torsion
/// component; ρ identifies V₊ with TM, so ρ(x₊) = ∂ₐ means x₊ is the
/// graph lift of ∂ₐ.
pub fn canonical_minus(
    ca: &ExactChartCA,
    metric: &ChartMetric,
    seed: &ChartConnection,
) -> ChartConnection {
    let d = ca.chart_dim();
    let ca = ca.clone();
    let metric_outer = metric.clone();
    let seed_inner = seed.clone();
    let depth = seed.fd_depth();
    ChartConnection::from_fn(d, depth, move |x, a| {
        let c = torsion_c(&ca, &seed_inner, x).expect("torsion inside domain");
        let e = metric_outer.e_at(x);
        let lift_p = |i: usize| {
            let mut v = DVector::zeros(2 * d);
            v[i] = 1.0;
            for b in 0..d {
                v[d + b] = e[(i, b)];
            }
            v
        };
        let lift_m = |i: usize| {
            let mut v = DVector::zeros(2 * d);
            v[i] = 1.0;
            for b in 0..d {
                v[d + b] = -e[(b, i)];
            }
            v
        };
        let mut form = DMatrix::zeros(d, d);
        for b in 0..d {
            for cc in 0..d {
                form[(b, cc)] = c.contract3(&lift_p(a), &lift_m(b), &lift_m(cc));
            }
        }
        seed_inner.coeff_at(x, a) + operator_from_form(&metric_outer, x, &form, false)
    })
}

/// |g(T(∂ₐ,∂_b), ∂_c) + H(∂ₐ,∂_b,∂_c)| maximized over index triples,
/// where T is the torsion of the TM-side connection induced from the
/// minus block through the anchor (coordinate fields commute).
pub fn minus_torsion_identity_residual(
    ca: &ExactChartCA,
    metric: &ChartMetric,
    conn: &ChartConnection,
    x: &DVector<f64>,
) -> f64 {
    let d = ca.chart_dim();
    let g = metric.g_at(x);
    let h = ca.h_form().eval(x);
    let mut worst: f64 = 0.0;
    for a in 0..d {
        for b in 0..d {
            let sb = metric.lift_minus(b);
            let sa = metric.lift_minus(a);
            let t = conn.nabla_at(&sb, a, x).rows(0, d).into_owned()
                - conn.nabla_at(&sa, b, x).rows(0, d).into_owned();
            for c in 0..d {
                let lhs = (g.row(c) * &t)[(0, 0)];
                worst = worst.max((lhs + h.get(a, b, c)).abs());
            }
        }
    }
    worst
}

/// Point-case torsion: with the zero connection (the only one over a
/// point) c reduces to the Cartan 3-form.
pub fn torsion_c_point(algebra: &QuadraticLieAlgebra) -> Tensor3 {
    algebra.cartan_three_form()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn test_sections(d: usize, seed: u64, count: usize) -> Vec<ChartSection> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| ChartSection::random_polynomial(d, &mut rng))
            .collect()
    }

    #[test]
    fn flat_levi_civita_pair_is_zero_and_torsion_free() {
        let (ca, metric) = catalog::flat_chart(3);
        let conn = levi_civita_pair(&metric);
        let x = DVector::from_vec(vec![0.1, -0.2, 0.3]);
        for a in 0..3 {
            assert!(conn.coeff_at(&x, a).amax() < 1e-9);
        }
        let c = torsion_c(&ca, &conn, &x).unwrap();
        assert!(c.inf_norm() < 1e-9);
    }

    #[test]
    fn levi_civita_pair_is_metric_and_compatible() {
        let (ca, metric) = catalog::berger_chart(1.3, 0.7);
        let conn = levi_civita_pair(&metric);
        let samples = ca.sample_points(3, 71);
        let sections = test_sections(3, 72, 2);
        assert!(
            conn.metricity_residual(&ca, &sections, &samples) < 1e-6,
            "metricity fails"
        );
        assert!(
            conn.compatibility_residual(&metric, &samples) < 1e-6,
            "compatibility fails"
        );
    }

    #[test]
    fn torsion_is_totally_antisymmetric() {
        let (ca, metric) = catalog::su2_wzw_chart(1.0, 0.7);
        let conn = levi_civita_pair(&metric);
        let samples = ca.sample_points(3, 73);
        for x in &samples {
            let c = torsion_c(&ca, &conn, x).unwrap();
            assert!(
                c.antisymmetry_residual() < 1e-5,
                "torsion antisymmetry residual {}",
                c.antisymmetry_residual()
            );
        }
    }

    #[test]
    fn shift_changes_torsion_by_minus_form() {
        // c_{∇+a} − c_∇ on (x₊, y₋, z₋) = −a₋(ρ(x₊))(y₋, z₋).
        let (ca, metric) = catalog::berger_chart(1.1, 0.9);
        let conn = levi_civita_pair(&metric);
        let mut rng = ChaCha8Rng::seed_from_u64(75);
        let shift = ConnectionShift::random(3, true, true, &mut rng);
        let x = DVector::from_vec(vec![0.12, -0.2, 0.05]);
        let varied = vary(&metric, &conn, &shift, &x).unwrap();

        let c0 = torsion_c(&ca, &conn, &x).unwrap();
        let c1 = torsion_c(&ca, &varied, &x).unwrap();

        for a in 0..3 {
            let sp = metric.lift_plus(a).eval(&x);
            for b in 0..3 {
                let yb = metric.lift_minus(b).eval(&x);
                for c in 0..3 {
                    let zc = metric.lift_minus(c).eval(&x);
                    let delta = c1.contract3(&sp, &yb, &zc) - c0.contract3(&sp, &yb, &zc);
                    let expected = -shift.minus_form_at(&x, a)[(b, c)];
                    assert!(
                        (delta - expected).abs() < 1e-6,
                        "delta-c mismatch: {delta} vs {expected}"
                    );
                }
            }
        }
    }

    #[test]
    fn varied_connection_stays_metric() {
        let (ca, metric) = catalog::flat_chart(3);
        let conn = levi_civita_pair(&metric);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let shift = ConnectionShift::random(3, false, true, &mut rng);
        let probe = DVector::zeros(3);
        let varied = vary(&metric, &conn, &shift, &probe).unwrap();
        let samples = ca.sample_points(2, 79);
        let sections = test_sections(3, 80, 2);
        assert!(varied.metricity_residual(&ca, &sections, &samples) < 1e-9);
        assert!(varied.compatibility_residual(&metric, &samples) < 1e-9);
    }

    #[test]
    fn non_antisymmetric_shift_is_rejected() {
        let (_, metric) = catalog::flat_chart(2);
        let conn = levi_civita_pair(&metric);
        let bad = ConnectionShift::minus(2, 0, |_, _| {
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])
        });
        let probe = DVector::zeros(2);
        assert!(matches!(
            vary(&metric, &conn, &bad, &probe),
            Err(Error::ShiftNotAntisymmetric(_))
        ));
    }

    #[test]
    fn canonical_minus_kills_plus_minus_minus_torsion() {
        for lambda in [0.0, 1.0] {
            let (ca, metric) = catalog::su2_wzw_chart(1.0, lambda);
            let seed = levi_civita_pair(&metric);
            let can = canonical_minus(&ca, &metric, &seed);
            let x = DVector::from_vec(vec![0.1, 0.2, -0.15]);
            let c = torsion_c(&ca, &can, &x).unwrap();
            for a in 0..3 {
                let sp = metric.lift_plus(a).eval(&x);
                for b in 0..3 {
                    for cc in 0..3 {
                        let v = c.contract3(
                            &sp,
                            &metric.lift_minus(b).eval(&x),
                            &metric.lift_minus(cc).eval(&x),
                        );
                        assert!(v.abs() < 1e-6, "(+,−,−) torsion {v} at λ={lambda}");
                    }
                }
            }
        }
    }

    #[test]
    fn canonical_minus_seed_independence_and_idempotency() {
        let (ca, metric) = catalog::su2_wzw_chart(1.0, 0.5);
        let seed_a = levi_civita_pair(&metric);
        let mut rng = ChaCha8Rng::seed_from_u64(83);
        let shift = ConnectionShift::random(3, false, true, &mut rng);
        let probe = DVector::zeros(3);
        let seed_b = vary(&metric, &seed_a, &shift, &probe).unwrap();

        let can_a = canonical_minus(&ca, &metric, &seed_a);
        let can_b = canonical_minus(&ca, &metric, &seed_b);
        let can_aa = canonical_minus(&ca, &metric, &can_a);

        let x = DVector::from_vec(vec![0.05, -0.1, 0.2]);
        for a in 0..3 {
            for b in 0..3 {
                let sm = metric.lift_minus(b);
                let va = can_a.nabla_at(&sm, a, &x);
                let vb = can_b.nabla_at(&sm, a, &x);
                let vaa = can_aa.nabla_at(&sm, a, &x);
                assert!(
                    (&va - &vb).amax() < 1e-5,
                    "seed dependence {}",
                    (&va - &vb).amax()
                );
                assert!((&va - &vaa).amax() < 1e-6, "not idempotent");
            }
        }
    }

    #[test]
    fn wzw_matched_torsion_identity() {
        // g(T(X,Y),Z) = −H(X,Y,Z) for the canonical minus connection.
        for lambda in [0.0, 0.5, 1.0] {
            let (ca, metric) = catalog::su2_wzw_chart(1.0, lambda);
            let seed = levi_civita_pair(&metric);
            let can = canonical_minus(&ca, &metric, &seed);
            let samples = ca.sample_points(3, 89);
            for x in &samples {
                let r = minus_torsion_identity_residual(&ca, &metric, &can, x);
                assert!(r < 1e-5, "torsion identity residual {r} at λ={lambda}");
            }
        }
    }

    #[test]
    fn curvature_of_flat_connection_vanishes() {
        let (_, metric) = catalog::flat_chart(3);
        let conn = levi_civita_pair(&metric);
        let x = DVector::from_vec(vec![0.3, 0.1, -0.2]);
        assert!(conn.curvature_matrix(&x, 0, 1).amax() < 1e-8);
    }

    #[test]
    fn sphere_sectional_curvature() {
        // Round S² of radius r in stereographic coordinates: sectional
        // curvature 1/r² read from the minus block of the curvature.
        let r = 1.7;
        let metric = ChartMetric::from_fn(2, 0, move |x| {
            let s = r * r + x.norm_squared();
            DMatrix::identity(2, 2) * (4.0 * r.powi(4) / (s * s))
        });
        let conn = levi_civita_pair(&metric);
        let x = DVector::from_vec(vec![0.2, -0.1]);
        let rmat = conn.curvature_matrix(&x, 0, 1);
        let v = rmat * metric.lift_minus(1).eval(&x);
        let g = metric.g_at(&x);
        let num = (g.row(0) * v.rows(0, 2))[(0, 0)];
        let det = g[(0, 0)] * g[(1, 1)] - g[(0, 1)] * g[(1, 0)];
        let sectional = num / det;
        assert!(
            (sectional - 1.0 / (r * r)).abs() < 1e-4,
            "sectional curvature {sectional}, expected {}",
            1.0 / (r * r)
        );
    }

    #[test]
    fn curvature_is_metric() {
        // ⟨R(X,Y)u, v⟩ = −⟨u, R(X,Y)v⟩.
        let (ca, metric) = catalog::berger_chart(1.2, 0.8);
        let conn = levi_civita_pair(&metric);
        let x = DVector::from_vec(vec![0.1, 0.15, -0.2]);
        let rmat = conn.curvature_matrix(&x, 0, 2);
        let gram = ca.pairing().gram();
        let resid = (rmat.transpose() * gram + gram * &rmat).amax();
        assert!(resid < 1e-5, "curvature metricity residual {resid}");
    }

    #[test]
    fn point_torsion_is_cartan_form() {
        let alg = catalog::semiabelian_double_su2();
        let c = torsion_c_point(&alg);
        assert!(c.antisymmetry_residual() < 1e-12);
        let u = numeric::basis_vector(6, 0);
        let v = numeric::basis_vector(6, 1);
        let w = numeric::basis_vector(6, 2);
        let direct = alg.pairing().eval(&alg.bracket(&u, &v), &w);
        assert_eq!(c.get(0, 1, 2), direct);
    }
}
