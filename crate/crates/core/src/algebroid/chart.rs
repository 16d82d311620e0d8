//! The exact chart backend: `(T ⊕ T*)U` over a coordinate box `U ⊂ ℝᵈ`
//! with the H-twisted Dorfman bracket
//!
//! ```text
//! [(X,α),(Y,β)] = ([X,Y], L_X β − i_Y dα + H(X,Y,·))
//! ```
//!
//! Sections are closures over chart points with values in ℝ²ᵈ, ordered
//! (X¹..Xᵈ, α₁..α_d); the pairing is the constant split form
//! ⟨(X,α),(Y,β)⟩ = α(Y) + β(X). Lie derivatives, exterior derivatives
//! and interior products are all realized by central finite differences
//! at the evaluation point.

use std::sync::Arc;

use nalgebra::DVector;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::AxiomReport;
use crate::error::{Error, Result};
use crate::numeric::{self, Tensor3};
use crate::quadspace::Pairing;

type SectionFn = dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync;

/// Section of `(T ⊕ T*)U`: a closure producing the 2d components at a
/// chart point. `fd_depth` counts how many finite-difference levels the
/// closure already contains, so that nested differencing widens its step.
#[derive(Clone)]
pub struct ChartSection {
    chart_dim: usize,
    f: Arc<SectionFn>,
    fd_depth: u8,
}

impl ChartSection {
    pub fn from_fn<F>(chart_dim: usize, fd_depth: u8, f: F) -> Self
    where
        F: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    {
        ChartSection {
            chart_dim,
            f: Arc::new(f),
            fd_depth,
        }
    }

    /// Constant-coefficient section.
    pub fn constant(chart_dim: usize, value: DVector<f64>) -> Self {
        assert_eq!(value.len(), 2 * chart_dim);
        ChartSection::from_fn(chart_dim, 0, move |_| value.clone())
    }

    /// The I-th standard frame section ((∂ₐ, 0) for I < d, (0, dxᵃ) else).
    pub fn frame(chart_dim: usize, index: usize) -> Self {
        ChartSection::constant(chart_dim, numeric::basis_vector(2 * chart_dim, index))
    }

    /// Section with polynomial coefficients (constant + linear +
    /// quadratic), deterministic in the generator state.
    pub fn random_polynomial(chart_dim: usize, rng: &mut ChaCha8Rng) -> Self {
        let n = 2 * chart_dim;
        let constant = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let linear = numeric::random_matrix(n, chart_dim, rng);
        let quad = numeric::random_matrix(n, chart_dim, rng) * 0.5;
        ChartSection::from_fn(chart_dim, 0, move |x| {
            let squares = DVector::from_fn(chart_dim, |a, _| x[a] * x[a]);
            &constant + &linear * x + &quad * squares
        })
    }

    pub fn chart_dim(&self) -> usize {
        self.chart_dim
    }

    pub fn fd_depth(&self) -> u8 {
        self.fd_depth
    }

    pub fn eval(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.f)(x)
    }

    /// Vector components X at x.
    pub fn vector_part(&self, x: &DVector<f64>) -> DVector<f64> {
        self.eval(x).rows(0, self.chart_dim).into_owned()
    }

    /// Form components α at x.
    pub fn form_part(&self, x: &DVector<f64>) -> DVector<f64> {
        self.eval(x)
            .rows(self.chart_dim, self.chart_dim)
            .into_owned()
    }

    /// f·s for a scalar function of stated fd depth.
    pub fn scaled<G>(&self, g: G, g_depth: u8) -> ChartSection
    where
        G: Fn(&DVector<f64>) -> f64 + Send + Sync + 'static,
    {
        let f = self.f.clone();
        ChartSection {
            chart_dim: self.chart_dim,
            f: Arc::new(move |x| f(x) * g(x)),
            fd_depth: self.fd_depth.max(g_depth),
        }
    }

    pub fn add(&self, other: &ChartSection) -> ChartSection {
        let (f, g) = (self.f.clone(), other.f.clone());
        ChartSection {
            chart_dim: self.chart_dim,
            f: Arc::new(move |x| f(x) + g(x)),
            fd_depth: self.fd_depth.max(other.fd_depth),
        }
    }
}

type ThreeFormFn = dyn Fn(&DVector<f64>) -> Tensor3 + Send + Sync;

/// 3-form field on the chart, evaluated to a dense antisymmetric tensor.
#[derive(Clone)]
pub struct ThreeForm {
    chart_dim: usize,
    f: Arc<ThreeFormFn>,
    fd_depth: u8,
}

impl ThreeForm {
    pub fn from_fn<F>(chart_dim: usize, fd_depth: u8, f: F) -> Self
    where
        F: Fn(&DVector<f64>) -> Tensor3 + Send + Sync + 'static,
    {
        ThreeForm {
            chart_dim,
            f: Arc::new(f),
            fd_depth,
        }
    }

    pub fn zero(chart_dim: usize) -> Self {
        ThreeForm::from_fn(chart_dim, 0, move |_| Tensor3::zeros(chart_dim))
    }

    pub fn constant(value: Tensor3) -> Self {
        let d = value.dim();
        ThreeForm::from_fn(d, 0, move |_| value.clone())
    }

    pub fn chart_dim(&self) -> usize {
        self.chart_dim
    }

    pub fn fd_depth(&self) -> u8 {
        self.fd_depth
    }

    pub fn eval(&self, x: &DVector<f64>) -> Tensor3 {
        (self.f)(x)
    }

    /// Max component of dH at x:
    /// (dH)_{abcd} = ∂ₐH_{bcd} − ∂_bH_{acd} + ∂_cH_{abd} − ∂_dH_{abc}.
    pub fn closedness_residual(&self, x: &DVector<f64>) -> f64 {
        let d = self.chart_dim;
        if d < 4 {
            return 0.0;
        }
        let partials: Vec<Tensor3> = (0..d)
            .map(|a| {
                let h = numeric::fd_step(x, a, self.fd_depth);
                let mut xp = x.clone();
                xp[a] += h;
                let mut xm = x.clone();
                xm[a] -= h;
                self.eval(&xp)
                    .scale(1.0 / (2.0 * h))
                    .add_scaled(&self.eval(&xm), -1.0 / (2.0 * h))
            })
            .collect();
        let mut worst: f64 = 0.0;
        for a in 0..d {
            for b in (a + 1)..d {
                for c in (b + 1)..d {
                    for e in (c + 1)..d {
                        let v = partials[a].get(b, c, e) - partials[b].get(a, c, e)
                            + partials[c].get(a, b, e)
                            - partials[e].get(a, b, c);
                        worst = worst.max(v.abs());
                    }
                }
            }
        }
        worst
    }
}

/// Exact Courant algebroid over a coordinate box, with a (nominally
/// closed) 3-form H. Closedness is not enforced at construction —
/// deliberately non-closed H is how bracket-axiom failure is probed —
/// but [`ExactChartCA::closedness_residual`] reports it.
#[derive(Clone)]
pub struct ExactChartCA {
    chart_dim: usize,
    h_form: ThreeForm,
    domain: Vec<(f64, f64)>,
    pairing: Pairing,
}

impl ExactChartCA {
    pub fn new(h_form: ThreeForm, domain: Vec<(f64, f64)>) -> Result<Self> {
        let d = h_form.chart_dim();
        if domain.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "domain has {} intervals for a {}-dimensional chart",
                domain.len(),
                d
            )));
        }
        if domain.iter().any(|&(lo, hi)| !(lo < hi)) {
            return Err(Error::ConfigInvalid("empty domain interval".into()));
        }
        Ok(ExactChartCA {
            chart_dim: d,
            h_form,
            domain,
            pairing: Pairing::split(d),
        })
    }

    /// Flat chart: H = 0 on [-1, 1]^d.
    pub fn flat(d: usize) -> Self {
        ExactChartCA::new(ThreeForm::zero(d), vec![(-1.0, 1.0); d]).expect("valid flat chart")
    }

    pub fn chart_dim(&self) -> usize {
        self.chart_dim
    }

    /// Fiber dimension 2d.
    pub fn fiber_dim(&self) -> usize {
        2 * self.chart_dim
    }

    pub fn h_form(&self) -> &ThreeForm {
        &self.h_form
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn pairing(&self) -> &Pairing {
        &self.pairing
    }

    pub fn contains(&self, x: &DVector<f64>) -> bool {
        x.len() == self.chart_dim
            && x.iter()
                .zip(&self.domain)
                .all(|(&xi, &(lo, hi))| xi >= lo && xi <= hi)
    }

    pub fn check_point(&self, x: &DVector<f64>) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::EvaluationOutsideDomain(x.iter().copied().collect()))
        }
    }

    pub fn sample_points(&self, count: usize, seed: u64) -> Vec<DVector<f64>> {
        numeric::sample_box(&self.domain, count, seed)
    }

    /// dH residual maximized over sample points.
    pub fn closedness_residual(&self, samples: &[DVector<f64>]) -> f64 {
        samples
            .iter()
            .map(|x| self.h_form.closedness_residual(x))
            .fold(0.0, f64::max)
    }

    /// Anchor ρ(X, α) = X.
    pub fn anchor(&self, u: &ChartSection, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_point(x)?;
        Ok(u.vector_part(x))
    }

    /// ρᵗ(df) = (0, df): the section value with ⟨ρᵗ(df), v⟩ = df(ρ(v)).
    pub fn rho_transpose(&self, df: &DVector<f64>) -> DVector<f64> {
        let d = self.chart_dim;
        let mut out = DVector::zeros(2 * d);
        out.rows_mut(d, d).copy_from(df);
        out
    }

    /// The H-twisted Dorfman bracket, evaluated at x.
    pub fn bracket_at(
        &self,
        u: &ChartSection,
        v: &ChartSection,
        x: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        self.check_point(x)?;
        let d = self.chart_dim;
        let depth = u.fd_depth().max(v.fd_depth());

        let uval = u.eval(x);
        let vval = v.eval(x);
        // ∂ₐ of both sections, all components.
        let du: Vec<DVector<f64>> = (0..d)
            .map(|a| numeric::diff_vector(|y| u.eval(y), x, a, u.fd_depth()))
            .collect();
        let dv: Vec<DVector<f64>> = (0..d)
            .map(|a| numeric::diff_vector(|y| v.eval(y), x, a, v.fd_depth()))
            .collect();

        let _ = depth;
        let mut out = DVector::zeros(2 * d);
        // [X, Y]ᵃ = X^b ∂_b Yᵃ − Y^b ∂_b Xᵃ
        for a in 0..d {
            let mut acc = 0.0;
            for b in 0..d {
                acc += uval[b] * dv[b][a] - vval[b] * du[b][a];
            }
            out[a] = acc;
        }
        // (L_X β)ₐ = X^b ∂_b βₐ + β_b ∂ₐ X^b
        // (i_Y dα)ₐ = Y^b (∂_b αₐ − ∂ₐ α_b)
        for a in 0..d {
            let mut acc = 0.0;
            for b in 0..d {
                acc += uval[b] * dv[b][d + a] + vval[d + b] * du[a][b];
                acc -= vval[b] * (du[b][d + a] - du[a][d + b]);
            }
            out[d + a] = acc;
        }
        // H(X, Y, ·)ₐ = H_{bca} X^b Y^c
        let h = self.h_form.eval(x);
        for a in 0..d {
            let mut acc = 0.0;
            for b in 0..d {
                for c in 0..d {
                    acc += h.get(b, c, a) * uval[b] * vval[c];
                }
            }
            out[d + a] += acc;
        }
        Ok(out)
    }

    /// The bracket as a section (for nested brackets; the fd depth grows
    /// by one).
    pub fn bracket(&self, u: &ChartSection, v: &ChartSection) -> ChartSection {
        let ca = self.clone();
        let (u, v) = (u.clone(), v.clone());
        let depth = u.fd_depth().max(v.fd_depth()) + 1;
        ChartSection::from_fn(self.chart_dim, depth, move |x| {
            ca.bracket_at(&u, &v, x).expect("bracket inside domain")
        })
    }

    /// ⟨u, v⟩ at x under the split pairing.
    pub fn pair_at(&self, u: &ChartSection, v: &ChartSection, x: &DVector<f64>) -> f64 {
        self.pairing.eval(&u.eval(x), &v.eval(x))
    }

    /// Axiom residuals over the given sections at the given points.
    pub fn check_axioms(&self, sections: &[ChartSection], samples: &[DVector<f64>]) -> AxiomReport {
        let d = self.chart_dim;
        let mut report = AxiomReport {
            leibniz: 0.0,
            anchor_homomorphism: 0.0,
            module_rule: 0.0,
            pairing_invariance: 0.0,
            symmetrization: 0.0,
        };
        // A fixed non-constant test function for the module rule.
        let f = |x: &DVector<f64>| {
            0.7 + x
                .iter()
                .enumerate()
                .map(|(i, v)| (i as f64 + 1.0) * v)
                .sum::<f64>()
                * 0.3
        };

        for window in sections.chunks(3) {
            if window.len() < 3 {
                continue;
            }
            let (s, t, u) = (&window[0], &window[1], &window[2]);
            let st = self.bracket(s, t);
            let tu = self.bracket(t, u);
            let su = self.bracket(s, u);

            for x in samples {
                // Axiom 1: [s,[t,u]] = [[s,t],u] + [t,[s,u]].
                let lhs = self.bracket_at(s, &tu, x).unwrap();
                let rhs = self.bracket_at(&st, u, x).unwrap() + self.bracket_at(t, &su, x).unwrap();
                report.leibniz = report.leibniz.max((lhs - rhs).amax());

                // Axiom 2: ρ([s,t]) = [ρ(s), ρ(t)] — the vector part of
                // the bracket is the Lie bracket of the vector parts, so
                // compare against an independent fd Lie bracket.
                let lie = {
                    let mut out = DVector::zeros(d);
                    let sx = s.vector_part(x);
                    let tx = t.vector_part(x);
                    for a in 0..d {
                        let mut acc = 0.0;
                        for b in 0..d {
                            let dtb =
                                numeric::diff_vector(|y| t.vector_part(y), x, b, t.fd_depth());
                            let dsb =
                                numeric::diff_vector(|y| s.vector_part(y), x, b, s.fd_depth());
                            acc += sx[b] * dtb[a] - tx[b] * dsb[a];
                        }
                        out[a] = acc;
                    }
                    out
                };
                let anchor_resid = (st.vector_part(x) - lie).amax();
                report.anchor_homomorphism = report.anchor_homomorphism.max(anchor_resid);

                // Axiom 3: [s, f t] = f [s,t] + (ρ(s) f) t.
                let ft = t.scaled(f, 0);
                let lhs = self.bracket_at(s, &ft, x).unwrap();
                let rho_s_f = numeric::diff_scalar(f, x, 0, 0) * s.vector_part(x)[0]
                    + (1..d)
                        .map(|a| numeric::diff_scalar(f, x, a, 0) * s.vector_part(x)[a])
                        .sum::<f64>();
                let rhs = self.bracket_at(s, t, x).unwrap() * f(x) + t.eval(x) * rho_s_f;
                report.module_rule = report.module_rule.max((lhs - rhs).amax());

                // Axiom 4: ρ(s)⟨t,u⟩ = ⟨[s,t],u⟩ + ⟨t,[s,u]⟩.
                let sx = s.vector_part(x);
                let mut lhs = 0.0;
                for a in 0..d {
                    lhs += sx[a]
                        * numeric::diff_scalar(
                            |y| self.pair_at(t, u, y),
                            x,
                            a,
                            t.fd_depth().max(u.fd_depth()),
                        );
                }
                let rhs = self.pairing.eval(&st.eval(x), &u.eval(x))
                    + self.pairing.eval(&t.eval(x), &su.eval(x));
                report.pairing_invariance = report.pairing_invariance.max((lhs - rhs).abs());

                // Axiom 5: [s,t] + [t,s] = ρᵗ(d⟨s,t⟩).
                let sym = self.bracket_at(s, t, x).unwrap() + self.bracket_at(t, s, x).unwrap();
                let dpair = DVector::from_fn(d, |a, _| {
                    numeric::diff_scalar(
                        |y| self.pair_at(s, t, y),
                        x,
                        a,
                        s.fd_depth().max(t.fd_depth()),
                    )
                });
                let resid = (sym - self.rho_transpose(&dpair)).amax();
                report.symmetrization = report.symmetrization.max(resid);
            }
        }
        report
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn volume_form_3d() -> ThreeForm {
        ThreeForm::constant(Tensor3::from_fn(3, |i, j, k| {
            ((i as i64 - j as i64) * (j as i64 - k as i64) * (k as i64 - i as i64)) as f64 / 2.0
        }))
    }

    #[test]
    fn coordinate_bracket_without_h() {
        // u = (∂₁, 0), v = (x₁∂₂, 0): [X,Y] = ∂₂ and no form part.
        let ca = ExactChartCA::flat(2);
        let u = ChartSection::frame(2, 0);
        let v = ChartSection::from_fn(2, 0, |x| DVector::from_vec(vec![0.0, x[0], 0.0, 0.0]));
        let x = DVector::from_vec(vec![0.3, -0.2]);
        let b = ca.bracket_at(&u, &v, &x).unwrap();
        let expected = DVector::from_vec(vec![0.0, 1.0, 0.0, 0.0]);
        assert!((b - expected).amax() < 1e-9);
    }

    #[test]
    fn constant_sections_bracket_to_h_contraction() {
        // On ℝ³ with H = dx¹∧dx²∧dx³: [(∂₁,0),(∂₂,0)] = (0, dx³).
        let ca = ExactChartCA::new(volume_form_3d(), vec![(-1.0, 1.0); 3]).unwrap();
        let u = ChartSection::frame(3, 0);
        let v = ChartSection::frame(3, 1);
        let x = DVector::from_vec(vec![0.1, 0.2, 0.3]);
        let b = ca.bracket_at(&u, &v, &x).unwrap();
        let expected = DVector::from_vec(vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        assert!((b - expected).amax() < 1e-12);
    }

    #[test]
    fn rho_transpose_is_pure_form_and_chain_complex() {
        let ca = ExactChartCA::flat(3);
        let df = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let val = ca.rho_transpose(&df);
        assert_eq!(val.rows(0, 3).amax(), 0.0);
        // ρ∘ρᵗ = 0: the vector part of a pure form vanishes.
        let sec = ChartSection::constant(3, val);
        let x = DVector::zeros(3);
        assert_eq!(ca.anchor(&sec, &x).unwrap().amax(), 0.0);
    }

    #[test]
    fn symmetrized_bracket_equals_rho_transpose_of_pairing_differential() {
        let ca = ExactChartCA::new(volume_form_3d(), vec![(-1.0, 1.0); 3]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let points = ca.sample_points(20, 5);
        for _ in 0..3 {
            let u = ChartSection::random_polynomial(3, &mut rng);
            let v = ChartSection::random_polynomial(3, &mut rng);
            for x in &points {
                let sym = ca.bracket_at(&u, &v, x).unwrap() + ca.bracket_at(&v, &u, x).unwrap();
                let dpair = DVector::from_fn(3, |a, _| {
                    numeric::diff_scalar(|y| ca.pair_at(&u, &v, y), x, a, 0)
                });
                assert!(
                    (sym - ca.rho_transpose(&dpair)).amax() < 1e-6,
                    "axiom 5 residual too large"
                );
            }
        }
    }

    #[test]
    fn axioms_pass_with_closed_h() {
        let ca = ExactChartCA::new(volume_form_3d(), vec![(-1.0, 1.0); 3]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let sections: Vec<ChartSection> = (0..3)
            .map(|_| ChartSection::random_polynomial(3, &mut rng))
            .collect();
        let samples = ca.sample_points(5, 23);
        let report = ca.check_axioms(&sections, &samples);
        assert!(report.pass(1e-5), "residuals: {report:?}");
    }

    #[test]
    fn non_closed_h_breaks_leibniz() {
        // H = x₄ dx¹∧dx²∧dx³ on a 4-dim chart has dH ≠ 0; the Leibniz
        // axiom must fail while closedness reports the defect.
        let h = ThreeForm::from_fn(4, 0, |x| {
            let x3 = x[3];
            Tensor3::from_fn(4, move |i, j, k| {
                if i < 3 && j < 3 && k < 3 {
                    ((i as i64 - j as i64) * (j as i64 - k as i64) * (k as i64 - i as i64)) as f64
                        / 2.0
                        * x3
                } else {
                    0.0
                }
            })
        });
        let ca = ExactChartCA::new(h, vec![(-1.0, 1.0); 4]).unwrap();
        let samples = ca.sample_points(5, 29);
        assert!(ca.closedness_residual(&samples) > 0.5);

        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let sections: Vec<ChartSection> = (0..3)
            .map(|_| ChartSection::random_polynomial(4, &mut rng))
            .collect();
        let report = ca.check_axioms(&sections, &samples);
        assert!(report.leibniz > 1e-3, "leibniz residual {}", report.leibniz);
    }
}
