//! The 1-loop flow: dV₊/dt = −2·GRic (plus an optional inner-derivation
//! gauge term) on the point backend, and the reduced parameter ODE for
//! invariant chart backgrounds.
//!
//! Point-case states live in graph coordinates over the initial
//! splitting V₊(0) ⊕ V₋(0): the flowing subspace is
//! span{p⁰ₐ + Σ_b S_{ba} m⁰_b} and the integrator works on the matrix S.
//! Chart-side flows are reduced to finitely many parameters by
//! evaluating the full pointwise right-hand side at a reference point
//! and reading off the parameter velocities; a second reference point
//! cross-checks that the background really is invariant.
//!
//! Integration is classical fixed-step RK4. Blow-up and positivity loss
//! are reportable outcomes recorded in the trajectory, not method
//! errors.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::algebroid::{ExactChartCA, QuadraticLieAlgebra, ThreeForm};
use crate::error::{Error, Result};
use crate::genmetric::{
    inner_derivation_deformation, ChartMetric, PointDeformation, PointGenMetric,
};
use crate::gric::{classical_ricci_gh, gric_point};
use crate::numeric;
use crate::quadspace::Subspace;
use crate::tolerances;

/// Why a trajectory ended.
#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    Completed,
    BlowUp { t: f64 },
    PositivityLost { t: f64 },
}

#[derive(Debug, Clone)]
pub struct TrajectoryRow {
    pub t: f64,
    /// Point case: flattened graph matrix e(t) over the chosen readout
    /// splitting, or the raw graph coordinates. Reduced case: the
    /// parameter vector.
    pub values: DVector<f64>,
    /// ‖GRic‖∞ (point) or ‖de/dt‖∞/2 (reduced) at this state.
    pub gric_inf_norm: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub rows: Vec<TrajectoryRow>,
    pub termination: Termination,
}

impl Trajectory {
    pub fn final_row(&self) -> &TrajectoryRow {
        self.rows.last().expect("trajectory has at least one row")
    }
}

/// One classical RK4 step of y' = f(t, y).
pub fn rk4_step<F>(f: &F, t: f64, y: &DVector<f64>, h: f64) -> Result<DVector<f64>>
where
    F: Fn(f64, &DVector<f64>) -> Result<DVector<f64>>,
{
    let k1 = f(t, y)?;
    let k2 = f(t + 0.5 * h, &(y + &k1 * (0.5 * h)))?;
    let k3 = f(t + 0.5 * h, &(y + &k2 * (0.5 * h)))?;
    let k4 = f(t + h, &(y + &k3 * h))?;
    Ok(y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0))
}

/// Fixed-step RK4 over [t0, t_end], recording every `record_every`
/// accepted steps (and always the endpoints).
pub fn rk4_integrate<F>(
    f: &F,
    y0: DVector<f64>,
    t0: f64,
    t_end: f64,
    h: f64,
    record_every: usize,
) -> Result<Vec<(f64, DVector<f64>)>>
where
    F: Fn(f64, &DVector<f64>) -> Result<DVector<f64>>,
{
    if !(h > 0.0) || !(t_end > t0) {
        return Err(Error::ConfigInvalid(
            "step size and time window must be positive".into(),
        ));
    }
    let steps = ((t_end - t0) / h).round() as usize;
    let mut out = Vec::with_capacity(steps / record_every.max(1) + 2);
    let mut y = y0;
    let mut t = t0;
    out.push((t, y.clone()));
    for i in 0..steps {
        y = rk4_step(f, t, &y, h)?;
        t = t0 + (i + 1) as f64 * h;
        if record_every > 0 && (i + 1) % record_every == 0 && i + 1 < steps {
            out.push((t, y.clone()));
        }
    }
    out.push((t, y));
    Ok(out)
}

/// Point-backend flow state in graph coordinates over the frames of the
/// initial metric.
struct GraphChart {
    base_plus: DMatrix<f64>,
    base_minus: DMatrix<f64>,
}

impl GraphChart {
    fn new(metric: &PointGenMetric) -> Self {
        GraphChart {
            base_plus: metric.frame_plus().vectors().clone(),
            base_minus: metric.frame_minus().vectors().clone(),
        }
    }

    fn k_plus(&self) -> usize {
        self.base_plus.ncols()
    }

    fn k_minus(&self) -> usize {
        self.base_minus.ncols()
    }

    fn subspace(&self, s: &DMatrix<f64>) -> Result<Subspace> {
        Subspace::new(&self.base_plus + &self.base_minus * s)
    }

    fn flatten(s: &DMatrix<f64>) -> DVector<f64> {
        DVector::from_column_slice(s.as_slice())
    }

    fn unflatten(&self, v: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_column_slice(self.k_minus(), self.k_plus(), v.as_slice())
    }
}

/// Right-hand side of the point flow at a metric:
/// −2·GRic + inner derivation of the gauge section.
pub fn flow_rhs_point(
    algebra: &QuadraticLieAlgebra,
    metric: &PointGenMetric,
    gauge: Option<&DVector<f64>>,
) -> PointDeformation {
    let gric = gric_point(algebra, metric);
    let mut c = gric.matrix() * -2.0;
    if let Some(z) = gauge {
        c += inner_derivation_deformation(algebra, metric, z).matrix();
    }
    PointDeformation::new(c, gric.frame_plus().clone(), gric.frame_minus().clone())
}

/// Integrate the point-case flow with RK4. The optional gauge is a
/// (possibly time-dependent) section z₋(t) added as ⟨[z₋,·],·⟩. Rows
/// hold the flattened graph matrix S(t) over the initial frames.
pub fn integrate_point<G>(
    algebra: &QuadraticLieAlgebra,
    initial: &PointGenMetric,
    gauge: Option<G>,
    t_end: f64,
    h: f64,
    record_every: usize,
) -> Result<Trajectory>
where
    G: Fn(f64) -> DVector<f64>,
{
    if !(h > 0.0) || !(t_end > 0.0) {
        return Err(Error::ConfigInvalid(
            "step size and end time must be positive".into(),
        ));
    }
    let chart = GraphChart::new(initial);
    let pairing = algebra.pairing();

    // Velocity of the graph coordinates induced by a deformation form
    // at the current subspace: Ṡ = β − S·α where (α, β) are the fixed
    // ±-frame coordinates of the frame velocities.
    let rhs = |t: f64, flat: &DVector<f64>| -> Result<DVector<f64>> {
        let s = chart.unflatten(flat);
        let v = chart
            .subspace(&s)
            .map_err(|_| Error::PositivityLost { t })?;
        let metric = PointGenMetric::new(pairing, v).map_err(|_| Error::PositivityLost { t })?;
        let gauge_val = gauge.as_ref().map(|g| g(t));
        let c = flow_rhs_point(algebra, &metric, gauge_val.as_ref());
        // Frame velocities δₐ = Σ_c σ_c ⟨wₐ, p_c⟩ S_map(p_c) for the
        // basis wₐ = p⁰ₐ + B₋⁰S·ₐ of the current subspace.
        let w = &chart.base_plus + &chart.base_minus * &s;
        let s_map = c.s_map_columns();
        let kp = chart.k_plus();
        let mut delta = DMatrix::zeros(pairing.dim(), kp);
        for a in 0..kp {
            let wa = w.column(a).into_owned();
            let mut acc = DVector::zeros(pairing.dim());
            for cc in 0..c.frame_plus().len() {
                let coord = c.frame_plus().sign(cc) * pairing.eval(&wa, &c.frame_plus().vector(cc));
                acc += s_map.column(cc) * coord;
            }
            delta.set_column(a, &acc);
        }
        // Split δ into the fixed frames: α = ⟨δ, p⁰⟩, β = −⟨δ, m⁰⟩.
        let alpha = chart.base_plus.transpose() * pairing.gram() * &delta;
        let beta = -(chart.base_minus.transpose() * pairing.gram() * &delta);
        let sdot = &beta - &s * &alpha;
        Ok(GraphChart::flatten(&sdot))
    };

    let mut rows = Vec::new();
    let mut termination = Termination::Completed;
    let steps = (t_end / h).round() as usize;
    let mut flat = GraphChart::flatten(&DMatrix::zeros(chart.k_minus(), chart.k_plus()));

    let record = |rows: &mut Vec<TrajectoryRow>, t: f64, flat: &DVector<f64>| -> Result<f64> {
        let s = chart.unflatten(flat);
        let v = chart
            .subspace(&s)
            .map_err(|_| Error::PositivityLost { t })?;
        let metric = PointGenMetric::new(pairing, v).map_err(|_| Error::PositivityLost { t })?;
        let norm = gric_point(algebra, &metric).inf_norm();
        rows.push(TrajectoryRow {
            t,
            values: flat.clone(),
            gric_inf_norm: norm,
        });
        Ok(norm)
    };
    record(&mut rows, 0.0, &flat)?;

    for i in 0..steps {
        let t = i as f64 * h;
        match rk4_step(&rhs, t, &flat, h) {
            Ok(next) => flat = next,
            Err(Error::PositivityLost { t }) => {
                termination = Termination::PositivityLost { t };
                break;
            }
            Err(e) => return Err(e),
        }
        let t_next = (i + 1) as f64 * h;
        // Accepted-step guards: positivity margin and blow-up.
        let s = chart.unflatten(&flat);
        let margin = match chart.subspace(&s) {
            Ok(v) => {
                let gram = pairing.restricted_gram(&v);
                gram.symmetric_eigen()
                    .eigenvalues
                    .iter()
                    .cloned()
                    .fold(f64::INFINITY, f64::min)
            }
            Err(_) => f64::NEG_INFINITY,
        };
        if margin < tolerances::FLOW_POSITIVITY_MARGIN {
            termination = Termination::PositivityLost { t: t_next };
            break;
        }
        let norm = record(&mut rows, t_next, &flat)?;
        if norm > tolerances::FLOW_BLOWUP {
            termination = Termination::BlowUp { t: t_next };
            break;
        }
        if record_every > 1 && (i + 1) % record_every != 0 && i + 1 < steps {
            rows.pop();
        }
    }
    Ok(Trajectory { rows, termination })
}

/// Reconstruct the metric from a point-trajectory row.
pub fn point_state_metric(
    algebra: &QuadraticLieAlgebra,
    initial: &PointGenMetric,
    row: &TrajectoryRow,
) -> Result<PointGenMetric> {
    let chart = GraphChart::new(initial);
    let s = chart.unflatten(&row.values);
    PointGenMetric::new(algebra.pairing(), chart.subspace(&s)?)
}

type FamilyMetricFn = dyn Fn(&DVector<f64>, &DVector<f64>) -> DMatrix<f64> + Send + Sync;

/// Invariant background family: e(θ, x) over a chart algebroid, with a
/// finite parameter vector θ. The 1-loop right-hand side is read off at
/// a reference point; a second point certifies invariance.
pub struct InvariantFamily {
    ca: ExactChartCA,
    e_of: Arc<FamilyMetricFn>,
    params0: DVector<f64>,
    ref_points: [DVector<f64>; 2],
}

impl InvariantFamily {
    pub fn new<F>(
        ca: ExactChartCA,
        params0: DVector<f64>,
        ref_points: [DVector<f64>; 2],
        e_of: F,
    ) -> Self
    where
        F: Fn(&DVector<f64>, &DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    {
        InvariantFamily {
            ca,
            e_of: Arc::new(e_of),
            params0,
            ref_points,
        }
    }

    pub fn ca(&self) -> &ExactChartCA {
        &self.ca
    }

    pub fn params0(&self) -> &DVector<f64> {
        &self.params0
    }

    pub fn param_dim(&self) -> usize {
        self.params0.len()
    }

    pub fn metric(&self, params: &DVector<f64>) -> ChartMetric {
        let e_of = self.e_of.clone();
        let p = params.clone();
        ChartMetric::from_fn(self.ca.chart_dim(), 0, move |x| e_of(&p, x))
    }

    /// H = db + H₀ for the family metric (H₀ is the algebroid twist).
    pub fn full_h(&self, params: &DVector<f64>) -> ThreeForm {
        let metric = self.metric(params);
        full_h_form(&self.ca, &metric)
    }

    /// ∂e/∂θᵢ at (params, x) by central differences in the parameter.
    fn param_tangent(&self, params: &DVector<f64>, i: usize, x: &DVector<f64>) -> DMatrix<f64> {
        let h = 1e-6 * params[i].abs().max(1.0);
        let mut pp = params.clone();
        pp[i] += h;
        let mut pm = params.clone();
        pm[i] -= h;
        ((self.e_of)(&pp, x) - (self.e_of)(&pm, x)) / (2.0 * h)
    }

    /// Smallest eigenvalue of g at the reference points.
    pub fn positivity_margin(&self, params: &DVector<f64>) -> f64 {
        self.metric(params).positivity_margin(&self.ref_points)
    }

    /// Parameter velocities matching de/dt = −2·Ric_(g,H) at a reference
    /// point, by least squares over the parameter tangent directions.
    fn rhs_at(&self, params: &DVector<f64>, x: &DVector<f64>) -> Result<DVector<f64>> {
        let metric = self.metric(params);
        let margin = metric.positivity_margin(std::slice::from_ref(x));
        if margin < tolerances::FLOW_POSITIVITY_MARGIN {
            return Err(Error::NotPositiveDefinite(margin));
        }
        let h_full = self.full_h(params);
        let de = classical_ricci_gh(&metric, &h_full, x) * -2.0;
        let d = self.ca.chart_dim();
        let np = self.param_dim();
        let mut a = DMatrix::zeros(d * d, np);
        for i in 0..np {
            let tangent = self.param_tangent(params, i, x);
            a.set_column(i, &DVector::from_column_slice(tangent.as_slice()));
        }
        let b = DVector::from_column_slice(de.as_slice());
        Ok(numeric::lstsq(&a, &b))
    }

    /// The reduced right-hand side dθ/dt, with the two-point invariance
    /// cross-check.
    pub fn rhs(&self, params: &DVector<f64>) -> Result<DVector<f64>> {
        let r1 = self.rhs_at(params, &self.ref_points[0])?;
        let r2 = self.rhs_at(params, &self.ref_points[1])?;
        let mismatch = (&r1 - &r2).amax();
        if mismatch > tolerances::FD_SECOND {
            return Err(Error::NotInvariant(mismatch));
        }
        Ok((r1 + r2) * 0.5)
    }

    /// Reduced RHS without the consistency check (used inside RK4 stages
    /// once the family has been certified).
    pub fn rhs_unchecked(&self, params: &DVector<f64>) -> Result<DVector<f64>> {
        self.rhs_at(params, &self.ref_points[0])
    }

    /// ‖de/dt‖∞ at the first reference point.
    pub fn rhs_inf_norm(&self, params: &DVector<f64>) -> Result<f64> {
        let metric = self.metric(params);
        let h_full = self.full_h(params);
        Ok((classical_ricci_gh(&metric, &h_full, &self.ref_points[0]) * -2.0).amax())
    }
}

/// H = db + H₀: the twist of the splitting plus the exterior derivative
/// of the antisymmetric part of e.
pub fn full_h_form(ca: &ExactChartCA, metric: &ChartMetric) -> ThreeForm {
    let d = ca.chart_dim();
    let h0 = ca.h_form().clone();
    let metric = metric.clone();
    let depth = metric.fd_depth().max(h0.fd_depth()) + 1;
    ThreeForm::from_fn(d, depth, move |x| {
        let mut h = h0.eval(x);
        let db: Vec<DMatrix<f64>> = (0..d)
            .map(|p| numeric::diff_matrix(|y| metric.b_at(y), x, p, metric.fd_depth()))
            .collect();
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    // (db)_{abc} = ∂ₐb_{bc} − ∂_b b_{ac} + ∂_c b_{ab}.
                    let v = db[a][(b, c)] - db[b][(a, c)] + db[c][(a, b)];
                    h.set(a, b, c, h.get(a, b, c) + v);
                }
            }
        }
        h
    })
}

/// Integrate the reduced parameter flow with RK4; the invariance
/// certificate runs once at the start. Positivity loss and blow-up
/// truncate the trajectory with the corresponding termination.
pub fn integrate_reduced(
    family: &InvariantFamily,
    t_end: f64,
    h: f64,
    record_every: usize,
) -> Result<Trajectory> {
    if !(h > 0.0) || !(t_end > 0.0) {
        return Err(Error::ConfigInvalid(
            "step size and end time must be positive".into(),
        ));
    }
    // Certify invariance at the initial parameters (two-point check).
    family.rhs(family.params0())?;
    let f = |_t: f64, y: &DVector<f64>| family.rhs_unchecked(y);

    let mut rows = Vec::new();
    let mut termination = Termination::Completed;
    let mut y = family.params0().clone();
    let record = |rows: &mut Vec<TrajectoryRow>, t: f64, y: &DVector<f64>| -> Result<f64> {
        let norm = family.rhs_inf_norm(y)? / 2.0;
        rows.push(TrajectoryRow {
            t,
            values: y.clone(),
            gric_inf_norm: norm,
        });
        Ok(norm)
    };
    record(&mut rows, 0.0, &y)?;

    let steps = (t_end / h).round() as usize;
    for i in 0..steps {
        let t = i as f64 * h;
        match rk4_step(&f, t, &y, h) {
            Ok(next) => y = next,
            Err(Error::NotPositiveDefinite(_)) => {
                termination = Termination::PositivityLost { t };
                break;
            }
            Err(e) => return Err(e),
        }
        let t_next = (i + 1) as f64 * h;
        if family.positivity_margin(&y) < tolerances::FLOW_POSITIVITY_MARGIN {
            termination = Termination::PositivityLost { t: t_next };
            break;
        }
        let norm = match record(&mut rows, t_next, &y) {
            Ok(norm) => norm,
            Err(Error::NotPositiveDefinite(_)) => {
                termination = Termination::PositivityLost { t: t_next };
                break;
            }
            Err(e) => return Err(e),
        };
        if norm > tolerances::FLOW_BLOWUP {
            termination = Termination::BlowUp { t: t_next };
            break;
        }
        if record_every > 1 && (i + 1) % record_every != 0 && i + 1 < steps {
            rows.pop();
        }
    }
    Ok(Trajectory { rows, termination })
}

/// Shipped invariant families.
pub mod families {
    use super::*;
    use crate::catalog;

    /// Round 3-sphere, parameter θ = radius: e(θ, x) = θ²·ĝ_{r₀}(x)/r₀²
    /// in the fixed stereographic chart of radius r₀ = 1. The closed
    /// form of the flow is θ² (t) = θ²(0) − 4t.
    pub fn round_sphere(r0: f64) -> InvariantFamily {
        let (ca, _) = catalog::round_sphere_chart(1.0);
        let refs = [
            DVector::from_vec(vec![0.05, -0.1, 0.2]),
            DVector::from_vec(vec![-0.3, 0.15, 0.1]),
        ];
        InvariantFamily::new(ca, DVector::from_vec(vec![r0]), refs, |p, x| {
            let s = 1.0 + x.norm_squared();
            DMatrix::identity(3, 3) * (p[0] * p[0] * 4.0 / (s * s))
        })
    }

    /// Berger spheres diag(p, p, q) on SU(2), H = 0.
    pub fn berger(p: f64, q: f64) -> InvariantFamily {
        let (ca, _) = catalog::berger_chart(p, q);
        let group = catalog::LeftInvariantGroup::new(&catalog::su2_constants());
        let refs = [
            DVector::from_vec(vec![0.05, -0.1, 0.2]),
            DVector::from_vec(vec![-0.25, 0.15, 0.1]),
        ];
        InvariantFamily::new(ca, DVector::from_vec(vec![p, q]), refs, move |p, x| {
            let m = group.maurer_cartan(x);
            let frame = DMatrix::from_diagonal(&DVector::from_vec(vec![p[0], p[0], p[1]]));
            m.transpose() * frame * m
        })
    }

    /// Bi-invariant SU(2) metric p·δ with fixed H = λ·k₀·Cartan form;
    /// the reduced flow has its fixed point where the torsionful
    /// connection flattens, p = λ·k₀.
    pub fn su2_bi_invariant(p0: f64, k0: f64, lambda: f64) -> InvariantFamily {
        let (ca, _) = catalog::su2_wzw_chart(k0, lambda);
        let group = catalog::LeftInvariantGroup::new(&catalog::su2_constants());
        let refs = [
            DVector::from_vec(vec![0.05, -0.1, 0.2]),
            DVector::from_vec(vec![-0.25, 0.15, 0.1]),
        ];
        InvariantFamily::new(ca, DVector::from_vec(vec![p0]), refs, move |p, x| {
            let m = group.maurer_cartan(x);
            m.transpose() * DMatrix::identity(3, 3) * p[0] * m
        })
    }

    /// Flat torus metrics diag(p₁, p₂, p₃): a family of fixed points.
    pub fn flat_torus(p: [f64; 3]) -> InvariantFamily {
        let ca = ExactChartCA::flat(3);
        let refs = [
            DVector::from_vec(vec![0.2, -0.1, 0.3]),
            DVector::from_vec(vec![-0.4, 0.2, 0.1]),
        ];
        InvariantFamily::new(ca, DVector::from_vec(p.to_vec()), refs, |p, _x| {
            DMatrix::from_diagonal(&DVector::from_vec(vec![p[0], p[1], p[2]]))
        })
    }
}

/// Least-squares fit of a generator w making exp(ad_w)·V_plain match
/// V_gauged (Gauss-Newton on the span distance). Returns the generator
/// and the residual principal-angle sine.
pub fn solve_orbit_generator(
    algebra: &QuadraticLieAlgebra,
    v_gauged: &Subspace,
    v_plain: &Subspace,
    w0: &DVector<f64>,
) -> (DVector<f64>, f64) {
    let n = algebra.dim();
    let distance = |w: &DVector<f64>| -> f64 {
        let transport = numeric::expm(&algebra.ad(w));
        let moved = transport * v_plain.basis();
        numeric::max_principal_angle_sin(&moved, v_gauged.basis())
    };
    let mut w = w0.clone();
    let mut best = distance(&w);
    // Numerical-gradient descent with backtracking; the objective is
    // smooth and tiny (n ≤ 12).
    for _ in 0..60 {
        let mut grad = DVector::zeros(n);
        for i in 0..n {
            grad[i] = numeric::diff_scalar(|v| distance(v), &w, i, 1);
        }
        if grad.amax() < 1e-14 {
            break;
        }
        let mut step = 0.5;
        let mut improved = false;
        while step > 1e-10 {
            let cand = &w - &grad * (step / grad.norm().max(1e-12));
            let d = distance(&cand);
            if d < best {
                w = cand;
                best = d;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved || best < 1e-12 {
            break;
        }
    }
    (w, best)
}
