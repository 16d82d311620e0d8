//! Pseudo-Euclidean linear algebra: pairings of arbitrary signature,
//! subspaces, orthogonal complements, graphs of bilinear forms and
//! signed orthonormal bases.
//!
//! Everything downstream computes fiberwise with these primitives: the
//! pairing ⟨,⟩ is a fixed non-degenerate symmetric form on the ambient
//! space, subspaces are column spans, and traces over subspaces are
//! realized with signed orthonormal bases (⟨vᵢ,vⱼ⟩ = ±δᵢⱼ), whose sign
//! factors implement the ⟨,⟩-dual bases.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::numeric;
use crate::tolerances;

/// Non-degenerate symmetric bilinear form, stored as its Gram matrix in
/// the fixed ambient basis.
#[derive(Debug, Clone)]
pub struct Pairing {
    gram: DMatrix<f64>,
}

impl Pairing {
    pub fn new(gram: DMatrix<f64>) -> Result<Self> {
        if gram.nrows() != gram.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "gram matrix is {}x{}",
                gram.nrows(),
                gram.ncols()
            )));
        }
        let asym = (&gram - gram.transpose()).amax();
        if asym > 1e-12 * gram.amax().max(1.0) {
            return Err(Error::DimensionMismatch(format!(
                "gram matrix is not symmetric (residual {asym:.3e})"
            )));
        }
        let sym = (&gram + gram.transpose()) * 0.5;
        let ratio = numeric::inverse_condition_sym(&sym);
        if !(ratio > tolerances::RANK_REL) {
            return Err(Error::DegeneratePairing(ratio));
        }
        Ok(Pairing { gram: sym })
    }

    /// Euclidean pairing on ℝⁿ.
    pub fn euclidean(n: usize) -> Self {
        Pairing {
            gram: DMatrix::identity(n, n),
        }
    }

    /// Diagonal pairing with the given entries.
    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        Pairing::new(DMatrix::from_diagonal(&DVector::from_row_slice(entries)))
    }

    /// The split pairing of (T ⊕ T*): ⟨(X,α),(Y,β)⟩ = α(Y) + β(X), in the
    /// basis ordering (∂₁..∂_d, dx¹..dx^d).
    pub fn split(d: usize) -> Self {
        let mut g = DMatrix::zeros(2 * d, 2 * d);
        for i in 0..d {
            g[(i, d + i)] = 1.0;
            g[(d + i, i)] = 1.0;
        }
        Pairing { gram: g }
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// ⟨u, v⟩.
    pub fn eval(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        (u.transpose() * &self.gram * v)[(0, 0)]
    }

    /// Index lowering G·v (the element of E* ≅ E paired with v).
    pub fn lower(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.gram * v
    }

    /// Signature (p, q): numbers of positive and negative eigenvalues.
    pub fn signature(&self) -> (usize, usize) {
        let eig = self.gram.clone().symmetric_eigen();
        let p = eig.eigenvalues.iter().filter(|&&l| l > 0.0).count();
        (p, self.dim() - p)
    }

    /// Gram matrix of ⟨,⟩ restricted to a subspace, in its basis.
    pub fn restricted_gram(&self, v: &Subspace) -> DMatrix<f64> {
        v.basis().transpose() * &self.gram * v.basis()
    }
}

/// Subspace of the ambient space, represented by a full-column-rank basis.
#[derive(Debug, Clone)]
pub struct Subspace {
    basis: DMatrix<f64>,
}

impl Subspace {
    pub fn new(basis: DMatrix<f64>) -> Result<Self> {
        let cols = basis.ncols();
        if cols > 0 {
            let rank = numeric::rank(&basis, tolerances::RANK_REL);
            if rank < cols {
                return Err(Error::RankDeficient { rank, cols });
            }
        }
        Ok(Subspace { basis })
    }

    /// Span of selected coordinate axes.
    pub fn coordinate(ambient: usize, axes: &[usize]) -> Self {
        let mut basis = DMatrix::zeros(ambient, axes.len());
        for (c, &a) in axes.iter().enumerate() {
            basis[(a, c)] = 1.0;
        }
        Subspace { basis }
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn column(&self, i: usize) -> DVector<f64> {
        self.basis.column(i).into_owned()
    }

    /// Span equality: dimensions agree and every principal angle is
    /// below the span tolerance.
    pub fn spans_same(&self, other: &Subspace) -> bool {
        self.dim() == other.dim()
            && numeric::max_principal_angle_sin(&self.basis, &other.basis) < tolerances::SPAN
    }

    /// Euclidean distance of v from the span, relative to |v|.
    pub fn contains(&self, v: &DVector<f64>, tol: f64) -> bool {
        let q = numeric::orthonormal_columns(&self.basis);
        let resid = v - &q * (q.transpose() * v);
        resid.norm() <= tol * v.norm().max(1.0)
    }
}

/// Result of [`orthogonal_complement`]. When ⟨,⟩ restricted to the input
/// is singular, the complement intersects the input and the direct-sum
/// property fails; `degenerate_restriction` flags this.
#[derive(Debug, Clone)]
pub struct Complement {
    pub subspace: Subspace,
    pub degenerate_restriction: bool,
}

/// ⟨,⟩-orthogonal complement V⊥ = { w : ⟨v, w⟩ = 0 ∀ v ∈ V }.
pub fn orthogonal_complement(pairing: &Pairing, v: &Subspace) -> Result<Complement> {
    if v.ambient_dim() != pairing.dim() {
        return Err(Error::DimensionMismatch(
            "subspace ambient dimension does not match pairing".into(),
        ));
    }
    let n = pairing.dim();
    let k = v.dim();
    // V⊥ = ker(BᵀG) is the Euclidean complement of span(G·B); with G
    // non-degenerate and B full rank it has dimension n − k exactly.
    let basis = numeric::orthocomplement_of_span(&(pairing.gram() * v.basis()));
    debug_assert_eq!(basis.ncols(), n - k);

    let gram_v = pairing.restricted_gram(v);
    let degenerate = k > 0 && !(numeric::inverse_condition_sym(&gram_v) > tolerances::RANK_REL);
    Ok(Complement {
        subspace: Subspace::new(basis)?,
        degenerate_restriction: degenerate,
    })
}

/// Basis of a subspace, ⟨,⟩-orthonormalized: ⟨vᵢ, vⱼ⟩ = signsᵢ·δᵢⱼ with
/// signs ±1, positive signs first.
#[derive(Debug, Clone)]
pub struct SignedOrthoBasis {
    vectors: DMatrix<f64>,
    signs: Vec<f64>,
}

impl SignedOrthoBasis {
    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> DVector<f64> {
        self.vectors.column(i).into_owned()
    }

    pub fn signs(&self) -> &[f64] {
        &self.signs
    }

    pub fn sign(&self, i: usize) -> f64 {
        self.signs[i]
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    /// ‖BᵀGB − diag(signs)‖∞.
    pub fn gram_residual(&self, pairing: &Pairing) -> f64 {
        let gram = self.vectors.transpose() * pairing.gram() * &self.vectors;
        let expected = DMatrix::from_diagonal(&DVector::from_row_slice(&self.signs));
        (gram - expected).amax()
    }
}

/// Signed Gram–Schmidt with pivoting. At each step the remaining vector
/// with the largest normalized |⟨v,v⟩| is chosen; when all remaining
/// self-pairings are nearly null (split-signature bases can be entirely
/// isotropic) the pair combination vᵢ ± vⱼ with the largest self-pairing
/// is used as the pivot instead.
pub fn signed_ortho_basis(pairing: &Pairing, v: &Subspace) -> Result<SignedOrthoBasis> {
    if v.ambient_dim() != pairing.dim() {
        return Err(Error::DimensionMismatch(
            "subspace ambient dimension does not match pairing".into(),
        ));
    }
    let k = v.dim();
    let mut pool: Vec<DVector<f64>> = (0..k).map(|i| v.column(i).normalize()).collect();
    let mut chosen: Vec<(DVector<f64>, f64)> = Vec::with_capacity(k);

    while chosen.len() < k {
        let quality = |w: &DVector<f64>| {
            let n2 = w.norm_squared();
            if n2 == 0.0 {
                0.0
            } else {
                pairing.eval(w, w).abs() / n2
            }
        };
        let (mut best_i, mut best_q) = (0, 0.0);
        for (i, w) in pool.iter().enumerate() {
            let q = quality(w);
            if q > best_q {
                best_q = q;
                best_i = i;
            }
        }
        let mut pivot = pool[best_i].clone();
        if best_q < 1e-6 {
            // All remaining vectors nearly isotropic; a non-degenerate
            // restriction guarantees some pair combination is not.
            for i in 0..pool.len() {
                for j in (i + 1)..pool.len() {
                    for c in [&pool[i] + &pool[j], &pool[i] - &pool[j]] {
                        let q = quality(&c);
                        if q > best_q {
                            best_q = q;
                            best_i = i;
                            pivot = c.clone();
                        }
                    }
                }
            }
        }
        if best_q < 1e-12 {
            return Err(Error::DegenerateRestriction);
        }
        let self_pairing = pairing.eval(&pivot, &pivot);
        let sign = self_pairing.signum();
        let u = &pivot / self_pairing.abs().sqrt();
        pool.remove(best_i);
        for w in pool.iter_mut() {
            let coeff = sign * pairing.eval(w, &u);
            *w -= &u * coeff;
            let n = w.norm();
            if n > 0.0 {
                *w /= n;
            }
        }
        chosen.push((u, sign));
    }

    // Positive signs first, order otherwise stable.
    chosen.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    let mut vectors = DMatrix::zeros(v.ambient_dim(), k);
    let mut signs = Vec::with_capacity(k);
    for (i, (u, s)) in chosen.into_iter().enumerate() {
        vectors.set_column(i, &u);
        signs.push(s);
    }
    let basis = SignedOrthoBasis { vectors, signs };
    if basis.gram_residual(pairing) > tolerances::SIGNED_GRAM {
        return Err(Error::DegenerateRestriction);
    }
    Ok(basis)
}

/// Orthogonal projectors (P₊, P₋) onto V₊ and V₋ = V₊⊥ for a generalized
/// metric: ⟨,⟩ positive definite on V₊ and negative definite on V₋.
///
/// With signed bases, P₊ = B₊B₊ᵀG and P₋ = −B₋B₋ᵀG; the sign on P₋ is
/// the ⟨,⟩-dual of a negative-definite basis.
pub fn projector_pair(
    pairing: &Pairing,
    v_plus: &Subspace,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let plus = signed_ortho_basis(pairing, v_plus)
        .map_err(|_| Error::NotGeneralizedMetric("⟨,⟩ is degenerate on V₊".into()))?;
    if plus.signs().iter().any(|&s| s < 0.0) {
        return Err(Error::NotGeneralizedMetric(
            "⟨,⟩ is not positive definite on V₊".into(),
        ));
    }
    let complement = orthogonal_complement(pairing, v_plus)?;
    let minus = signed_ortho_basis(pairing, &complement.subspace)
        .map_err(|_| Error::NotGeneralizedMetric("⟨,⟩ is degenerate on V₋".into()))?;
    if minus.signs().iter().any(|&s| s > 0.0) {
        return Err(Error::NotGeneralizedMetric(
            "⟨,⟩ is not negative definite on V₋".into(),
        ));
    }
    let p_plus = plus.vectors() * plus.vectors().transpose() * pairing.gram();
    let p_minus = -(minus.vectors() * minus.vectors().transpose() * pairing.gram());
    Ok((p_plus, p_minus))
}

/// A direct-sum decomposition into two ⟨,⟩-isotropic summands — the
/// (T, T*) shape used to read subspaces as graphs of bilinear forms.
#[derive(Debug, Clone)]
pub struct IsotropicSplitting {
    first: Subspace,
    second: Subspace,
    /// Duality pairing M with Mₐⱼ = ⟨s₂ₐ, s₁ⱼ⟩, cached for graph maps.
    duality: DMatrix<f64>,
}

impl IsotropicSplitting {
    pub fn new(pairing: &Pairing, first: Subspace, second: Subspace) -> Result<Self> {
        let n = pairing.dim();
        if first.dim() + second.dim() != n {
            return Err(Error::DimensionMismatch(
                "splitting summands do not add up to the ambient dimension".into(),
            ));
        }
        for part in [&first, &second] {
            let residual = pairing.restricted_gram(part).amax();
            if residual > 1e-10 {
                return Err(Error::NonIsotropicSplitting(residual));
            }
        }
        let duality = second.basis().transpose() * pairing.gram() * first.basis();
        if !(numeric::inverse_condition(&duality) > tolerances::RANK_REL) {
            return Err(Error::DimensionMismatch(
                "splitting summands are not complementary".into(),
            ));
        }
        Ok(IsotropicSplitting {
            first,
            second,
            duality,
        })
    }

    /// The standard (T, T*) splitting for [`Pairing::split`].
    pub fn standard(d: usize) -> Self {
        let first = Subspace::coordinate(2 * d, &(0..d).collect::<Vec<_>>());
        let second = Subspace::coordinate(2 * d, &(d..2 * d).collect::<Vec<_>>());
        IsotropicSplitting {
            first,
            second,
            duality: DMatrix::identity(d, d),
        }
    }

    pub fn first(&self) -> &Subspace {
        &self.first
    }

    pub fn second(&self) -> &Subspace {
        &self.second
    }

    pub fn half_dim(&self) -> usize {
        self.first.dim()
    }
}

/// The graph { t + ê(t) : t ∈ first } of a bilinear form e on the first
/// summand, where ê(t) ∈ second is determined by ⟨ê(tᵢ), tⱼ⟩ = e(tᵢ,tⱼ).
pub fn graph_of_map(splitting: &IsotropicSplitting, e: &DMatrix<f64>) -> Result<Subspace> {
    let k = splitting.half_dim();
    if e.nrows() != k || e.ncols() != k {
        return Err(Error::DimensionMismatch(format!(
            "graph map must be {k}x{k}"
        )));
    }
    // Coefficients c with c·M = e give ê(tᵢ) = Σₐ cᵢₐ s₂ₐ; the basis
    // matrix is B₁ + B₂cᵀ with cᵀ = M⁻ᵀeᵀ.
    let c_transpose = splitting
        .duality
        .transpose()
        .lu()
        .solve(&e.transpose())
        .ok_or_else(|| Error::DimensionMismatch("singular duality pairing".into()))?;
    let basis = splitting.first.basis() + splitting.second.basis() * c_transpose;
    Subspace::new(basis)
}

/// Inverse of [`graph_of_map`]: read off the bilinear form of a subspace
/// that is a graph over the first summand.
pub fn extract_graph_map(splitting: &IsotropicSplitting, v: &Subspace) -> Result<DMatrix<f64>> {
    let k = splitting.half_dim();
    if v.dim() != k {
        return Err(Error::DimensionMismatch(format!(
            "graph candidate must have dimension {k}"
        )));
    }
    let n = v.ambient_dim();
    // Coordinates of V's basis in the splitting: [B₁ B₂]·[a; b] = B_V.
    let mut frame = DMatrix::zeros(n, n);
    frame
        .view_mut((0, 0), (n, k))
        .copy_from(splitting.first.basis());
    frame
        .view_mut((0, k), (n, n - k))
        .copy_from(splitting.second.basis());
    let coords = frame
        .lu()
        .solve(v.basis())
        .ok_or_else(|| Error::DimensionMismatch("splitting frame is singular".into()))?;
    let a = coords.view((0, 0), (k, k)).into_owned();
    let b = coords.view((k, 0), (k, k)).into_owned();
    let cond = numeric::inverse_condition(&a);
    if !(cond > tolerances::RANK_REL) {
        return Err(Error::NotAGraph(cond));
    }
    // β = b·a⁻¹ holds the second-summand coordinates over the canonical
    // first-summand basis; e = βᵀM.
    let beta = a
        .transpose()
        .lu()
        .solve(&b.transpose())
        .ok_or(Error::NotAGraph(cond))?
        .transpose();
    Ok(beta.transpose() * &splitting.duality)
}
