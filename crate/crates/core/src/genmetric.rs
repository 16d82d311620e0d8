//! Generalized metrics V₊ ⊂ E, their (g, b) graph descriptions,
//! deformation forms, and deformations by inner derivations.
//!
//! Point case: V₊ is a subspace with ⟨,⟩ positive definite on it and
//! negative definite on V₋ = V₊⊥; definiteness is checked exactly at
//! construction and the signed frames and projectors are cached.
//!
//! Chart case: the metric is the field x ↦ e(x) = g(x) + b(x) whose
//! graph inside (T ⊕ T*) is V₊(x); V₋(x) is the graph of b − g. Lifts
//! of coordinate fields to V±(x) provide smooth frames; signed
//! orthonormalization happens pointwise by constant recombination, so
//! differentiating frame-based expressions stays legitimate.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::algebroid::{ChartSection, ExactChartCA, QuadraticLieAlgebra};
use crate::error::{Error, Result};
use crate::numeric;
use crate::quadspace::{
    extract_graph_map, graph_of_map, orthogonal_complement, projector_pair, signed_ortho_basis,
    IsotropicSplitting, Pairing, SignedOrthoBasis, Subspace,
};

/// Generalized metric in the point backend, with cached complement,
/// signed frames and projectors.
#[derive(Debug, Clone)]
pub struct PointGenMetric {
    vplus: Subspace,
    vminus: Subspace,
    frame_plus: SignedOrthoBasis,
    frame_minus: SignedOrthoBasis,
    p_plus: DMatrix<f64>,
    p_minus: DMatrix<f64>,
}

impl PointGenMetric {
    pub fn new(pairing: &Pairing, vplus: Subspace) -> Result<Self> {
        let (p_plus, p_minus) = projector_pair(pairing, &vplus)?;
        let complement = orthogonal_complement(pairing, &vplus)?;
        let frame_plus = signed_ortho_basis(pairing, &vplus)?;
        let frame_minus = signed_ortho_basis(pairing, &complement.subspace)?;
        Ok(PointGenMetric {
            vplus,
            vminus: complement.subspace,
            frame_plus,
            frame_minus,
            p_plus,
            p_minus,
        })
    }

    /// Graph of e = g + b over the first summand of an isotropic
    /// splitting.
    pub fn from_graph(
        pairing: &Pairing,
        splitting: &IsotropicSplitting,
        e: &DMatrix<f64>,
    ) -> Result<Self> {
        let sym = (e + e.transpose()) * 0.5;
        let min_eig = sym
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min_eig <= 0.0 {
            return Err(Error::NotPositiveDefinite(min_eig));
        }
        PointGenMetric::new(pairing, graph_of_map(splitting, e)?)
    }

    pub fn vplus(&self) -> &Subspace {
        &self.vplus
    }

    pub fn vminus(&self) -> &Subspace {
        &self.vminus
    }

    pub fn frame_plus(&self) -> &SignedOrthoBasis {
        &self.frame_plus
    }

    pub fn frame_minus(&self) -> &SignedOrthoBasis {
        &self.frame_minus
    }

    pub fn projector_plus(&self) -> &DMatrix<f64> {
        &self.p_plus
    }

    pub fn projector_minus(&self) -> &DMatrix<f64> {
        &self.p_minus
    }

    pub fn dim_plus(&self) -> usize {
        self.vplus.dim()
    }

    pub fn dim_minus(&self) -> usize {
        self.vminus.dim()
    }
}

/// Split a point metric back into (g, b) over a splitting.
pub fn to_gb(
    splitting: &IsotropicSplitting,
    metric: &PointGenMetric,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let e = extract_graph_map(splitting, metric.vplus())?;
    let g = (&e + e.transpose()) * 0.5;
    let b = (&e - e.transpose()) * 0.5;
    Ok((g, b))
}

/// Build a point metric from (g, b).
pub fn from_gb(
    pairing: &Pairing,
    splitting: &IsotropicSplitting,
    g: &DMatrix<f64>,
    b: &DMatrix<f64>,
) -> Result<PointGenMetric> {
    if (g - g.transpose()).amax() > 1e-12 * g.amax().max(1.0) {
        return Err(Error::DimensionMismatch("g is not symmetric".into()));
    }
    if (b + b.transpose()).amax() > 1e-12 * b.amax().max(1.0) {
        return Err(Error::DimensionMismatch("b is not antisymmetric".into()));
    }
    PointGenMetric::from_graph(pairing, splitting, &(g + b))
}

/// Deformation form C: V₊ ⊗ V₋ → ℝ in the signed frames of the metric
/// it was computed against; the frames are kept so the induced map
/// S: V₊ → V₋ stays recoverable.
#[derive(Debug, Clone)]
pub struct PointDeformation {
    matrix: DMatrix<f64>,
    frame_plus: SignedOrthoBasis,
    frame_minus: SignedOrthoBasis,
}

impl PointDeformation {
    pub fn new(
        matrix: DMatrix<f64>,
        frame_plus: SignedOrthoBasis,
        frame_minus: SignedOrthoBasis,
    ) -> Self {
        assert_eq!(matrix.nrows(), frame_plus.len());
        assert_eq!(matrix.ncols(), frame_minus.len());
        PointDeformation {
            matrix,
            frame_plus,
            frame_minus,
        }
    }

    /// C(pₐ, m_b) entries.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn frame_plus(&self) -> &SignedOrthoBasis {
        &self.frame_plus
    }

    pub fn frame_minus(&self) -> &SignedOrthoBasis {
        &self.frame_minus
    }

    pub fn inf_norm(&self) -> f64 {
        self.matrix.amax()
    }

    /// The induced map S: V₊ → V₋ with ⟨S u₊, v₋⟩ = C(u₊, v₋), solved
    /// against the V₋ Gram matrix (diag(−1) in the signed frame, so
    /// S pₐ = −Σ_b C_{ab} m_b), returned as ambient column images of the
    /// signed V₊ frame.
    pub fn s_map_columns(&self) -> DMatrix<f64> {
        self.frame_minus.vectors() * (-self.matrix.transpose())
    }

    /// C evaluated on arbitrary ambient vectors (projections implicit:
    /// uses the stored frames' spans).
    pub fn eval(&self, pairing: &Pairing, u_plus: &DVector<f64>, v_minus: &DVector<f64>) -> f64 {
        // Expand u₊, v₋ in the signed frames: coords via signed pairing.
        let mut acc = 0.0;
        for a in 0..self.frame_plus.len() {
            let ca = self.frame_plus.sign(a) * pairing.eval(u_plus, &self.frame_plus.vector(a));
            if ca == 0.0 {
                continue;
            }
            for b in 0..self.frame_minus.len() {
                let cb =
                    self.frame_minus.sign(b) * pairing.eval(v_minus, &self.frame_minus.vector(b));
                acc += ca * cb * self.matrix[(a, b)];
            }
        }
        acc
    }
}

/// Finite deformation of V₊ along a deformation form (whose stored
/// frames identify the metric being deformed): the graph update
/// span{u + t·S(u)}, with the generalized-metric property re-checked.
pub fn deform(pairing: &Pairing, c: &PointDeformation, t: f64) -> Result<PointGenMetric> {
    let new_basis = c.frame_plus.vectors() + c.s_map_columns() * t;
    let vplus = Subspace::new(new_basis).map_err(|_| Error::PositivityLost { t })?;
    PointGenMetric::new(pairing, vplus).map_err(|_| Error::PositivityLost { t })
}

/// Deformation by the inner derivation [s, ·]:
/// C(u₊, v₋) = ⟨[s, u₊], v₋⟩ on the signed frames.
pub fn inner_derivation_deformation(
    algebra: &QuadraticLieAlgebra,
    metric: &PointGenMetric,
    s: &DVector<f64>,
) -> PointDeformation {
    let kp = metric.dim_plus();
    let km = metric.dim_minus();
    let mut c = DMatrix::zeros(kp, km);
    for a in 0..kp {
        let bracket = algebra.bracket(s, &metric.frame_plus().vector(a));
        for b in 0..km {
            c[(a, b)] = algebra
                .pairing()
                .eval(&bracket, &metric.frame_minus().vector(b));
        }
    }
    PointDeformation::new(c, metric.frame_plus().clone(), metric.frame_minus().clone())
}

type MetricFn = dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync;

/// Generalized metric on an exact chart: the field e(x) = g(x) + b(x).
#[derive(Clone)]
pub struct ChartMetric {
    chart_dim: usize,
    e: Arc<MetricFn>,
    fd_depth: u8,
}

impl ChartMetric {
    pub fn from_fn<F>(chart_dim: usize, fd_depth: u8, e: F) -> Self
    where
        F: Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    {
        ChartMetric {
            chart_dim,
            e: Arc::new(e),
            fd_depth,
        }
    }

    pub fn constant(e: DMatrix<f64>) -> Self {
        let d = e.nrows();
        ChartMetric::from_fn(d, 0, move |_| e.clone())
    }

    pub fn flat(d: usize) -> Self {
        ChartMetric::constant(DMatrix::identity(d, d))
    }

    pub fn chart_dim(&self) -> usize {
        self.chart_dim
    }

    pub fn fd_depth(&self) -> u8 {
        self.fd_depth
    }

    pub fn e_at(&self, x: &DVector<f64>) -> DMatrix<f64> {
        (self.e)(x)
    }

    pub fn g_at(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let e = self.e_at(x);
        (&e + e.transpose()) * 0.5
    }

    pub fn b_at(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let e = self.e_at(x);
        (&e - e.transpose()) * 0.5
    }

    /// Smallest eigenvalue of g over the samples (positive-definiteness
    /// margin).
    pub fn positivity_margin(&self, samples: &[DVector<f64>]) -> f64 {
        samples
            .iter()
            .map(|x| {
                self.g_at(x)
                    .symmetric_eigen()
                    .eigenvalues
                    .iter()
                    .cloned()
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn check_positive(&self, samples: &[DVector<f64>]) -> Result<()> {
        let margin = self.positivity_margin(samples);
        if margin <= 0.0 {
            return Err(Error::NotPositiveDefinite(margin));
        }
        Ok(())
    }

    /// Basis of V₊(x) = { (X, e(X,·)) }: columns (δₐ, row a of e).
    pub fn vplus_basis(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let d = self.chart_dim;
        let e = self.e_at(x);
        let mut basis = DMatrix::zeros(2 * d, d);
        basis.view_mut((0, 0), (d, d)).fill_with_identity();
        basis.view_mut((d, 0), (d, d)).copy_from(&e.transpose());
        basis
    }

    /// Basis of V₋(x) = { (X, (b − g)(X,·)) }; (b − g)(X,Y) = −e(Y,X),
    /// so the form block is −e.
    pub fn vminus_basis(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let d = self.chart_dim;
        let mut basis = DMatrix::zeros(2 * d, d);
        basis.view_mut((0, 0), (d, d)).fill_with_identity();
        basis.view_mut((d, 0), (d, d)).copy_from(&(-self.e_at(x)));
        basis
    }

    /// The smooth lift of ∂ₐ to V₊ as a section.
    pub fn lift_plus(&self, a: usize) -> ChartSection {
        let e = self.e.clone();
        let d = self.chart_dim;
        ChartSection::from_fn(d, self.fd_depth, move |x| {
            let ex = e(x);
            let mut v = DVector::zeros(2 * d);
            v[a] = 1.0;
            for b in 0..d {
                v[d + b] = ex[(a, b)];
            }
            v
        })
    }

    /// The smooth lift of ∂ₐ to V₋ as a section.
    pub fn lift_minus(&self, a: usize) -> ChartSection {
        let e = self.e.clone();
        let d = self.chart_dim;
        ChartSection::from_fn(d, self.fd_depth, move |x| {
            let ex = e(x);
            let mut v = DVector::zeros(2 * d);
            v[a] = 1.0;
            for b in 0..d {
                // (b − g)(∂ₐ, ·) = −e(·, ∂ₐ) row: −e_{ba}.
                v[d + b] = -ex[(b, a)];
            }
            v
        })
    }

    /// Signed orthonormal frames of V₊(x₀) and V₋(x₀) as smooth
    /// sections: constant recombinations of the graph lifts, so they are
    /// differentiable fields that are exactly signed-orthonormal at x₀.
    pub fn signed_frames_at(
        &self,
        pairing: &Pairing,
        x0: &DVector<f64>,
    ) -> Result<(Vec<ChartSection>, Vec<ChartSection>)> {
        let d = self.chart_dim;
        let plus = signed_ortho_basis(pairing, &Subspace::new(self.vplus_basis(x0))?)?;
        if plus.signs().iter().any(|&s| s < 0.0) {
            return Err(Error::NotGeneralizedMetric(
                "⟨,⟩ not positive definite on V₊(x)".into(),
            ));
        }
        let minus = signed_ortho_basis(pairing, &Subspace::new(self.vminus_basis(x0))?)?;
        if minus.signs().iter().any(|&s| s > 0.0) {
            return Err(Error::NotGeneralizedMetric(
                "⟨,⟩ not negative definite on V₋(x)".into(),
            ));
        }

        // Recombination coefficients: lift_basis(x₀) · coeff = signed
        // vectors; the lift basis has the identity in its top block, so
        // the coefficients are just the top block of the signed vectors.
        let coeff_plus = plus.vectors().rows(0, d).into_owned();
        let coeff_minus = minus.vectors().rows(0, d).into_owned();

        let frames_plus = (0..d)
            .map(|a| self.recombined_lift(true, coeff_plus.column(a).into_owned()))
            .collect();
        let frames_minus = (0..d)
            .map(|a| self.recombined_lift(false, coeff_minus.column(a).into_owned()))
            .collect();
        Ok((frames_plus, frames_minus))
    }

    fn recombined_lift(&self, plus: bool, coeff: DVector<f64>) -> ChartSection {
        let e = self.e.clone();
        let d = self.chart_dim;
        ChartSection::from_fn(d, self.fd_depth, move |x| {
            let ex = e(x);
            let mut v = DVector::zeros(2 * d);
            for a in 0..d {
                v[a] = coeff[a];
            }
            for b in 0..d {
                let mut acc = 0.0;
                for a in 0..d {
                    acc += if plus {
                        coeff[a] * ex[(a, b)]
                    } else {
                        -coeff[a] * ex[(b, a)]
                    };
                }
                v[d + b] = acc;
            }
            v
        })
    }

    /// e ← e + t·(de/dt) as a stacked closure.
    pub fn deform(&self, rate: &ChartDeformation, t: f64) -> ChartMetric {
        let e = self.e.clone();
        let de = rate.de.clone();
        ChartMetric {
            chart_dim: self.chart_dim,
            e: Arc::new(move |x| e(x) + de(x) * t),
            fd_depth: self.fd_depth.max(rate.fd_depth),
        }
    }
}

/// Tangent to a chart metric: the field x ↦ de/dt(x).
#[derive(Clone)]
pub struct ChartDeformation {
    chart_dim: usize,
    de: Arc<MetricFn>,
    fd_depth: u8,
}

impl ChartDeformation {
    pub fn from_fn<F>(chart_dim: usize, fd_depth: u8, de: F) -> Self
    where
        F: Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    {
        ChartDeformation {
            chart_dim,
            de: Arc::new(de),
            fd_depth,
        }
    }

    pub fn chart_dim(&self) -> usize {
        self.chart_dim
    }

    pub fn eval(&self, x: &DVector<f64>) -> DMatrix<f64> {
        (self.de)(x)
    }

    pub fn fd_depth(&self) -> u8 {
        self.fd_depth
    }
}

/// Deformation of e by the inner derivation of a section s = (X, α):
/// de/dt = L_X e + i_X H₀ − dα, the gauge term of the flow.
pub fn inner_derivation_deformation_chart(
    ca: &ExactChartCA,
    metric: &ChartMetric,
    s: &ChartSection,
) -> ChartDeformation {
    let d = ca.chart_dim();
    let ca = ca.clone();
    let metric = metric.clone();
    let s = s.clone();
    let depth = metric.fd_depth().max(s.fd_depth()) + 1;
    ChartDeformation::from_fn(d, depth, move |x| {
        let xv = s.vector_part(x);
        let sdepth = s.fd_depth();
        let de: Vec<DMatrix<f64>> = (0..d)
            .map(|c| numeric::diff_matrix(|y| metric.e_at(y), x, c, metric.fd_depth()))
            .collect();
        let ds: Vec<DVector<f64>> = (0..d)
            .map(|c| numeric::diff_vector(|y| s.eval(y), x, c, sdepth))
            .collect();
        let e = metric.e_at(x);
        let h = ca.h_form().eval(x);
        let mut out = DMatrix::zeros(d, d);
        for a in 0..d {
            for b in 0..d {
                let mut acc = 0.0;
                for c in 0..d {
                    // L_X e
                    acc += xv[c] * de[c][(a, b)];
                    acc += e[(c, b)] * ds[a][c] + e[(a, c)] * ds[b][c];
                    // i_X H₀
                    acc += xv[c] * h.get(c, a, b);
                }
                // −dα
                acc -= ds[a][d + b] - ds[b][d + a];
                out[(a, b)] = acc;
            }
        }
        out
    })
}
