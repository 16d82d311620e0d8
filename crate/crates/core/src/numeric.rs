//! Shared numerical kernels: central finite differences, dense 3-tensors,
//! matrix exponentials along group charts, least squares.
//!
//! Finite differences are central with per-coordinate step
//! `h·max(1, |xₐ|)`. Quantities that already contain one level of
//! differencing are differenced again with the wider step
//! [`tolerances::STEP_SECOND`]; the `depth` argument tracks this.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::tolerances;

/// i-th standard basis vector of ℝⁿ.
pub fn basis_vector(n: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(n);
    v[i] = 1.0;
    v
}

/// Step size for a central difference in coordinate `a` at `x`.
/// `depth` counts how many finite-difference levels the integrand
/// already contains.
pub fn fd_step(x: &DVector<f64>, a: usize, depth: u8) -> f64 {
    let scale = if depth == 0 {
        tolerances::STEP_FIRST
    } else {
        tolerances::STEP_SECOND
    };
    scale * x[a].abs().max(1.0)
}

fn shifted(x: &DVector<f64>, a: usize, h: f64) -> DVector<f64> {
    let mut y = x.clone();
    y[a] += h;
    y
}

/// ∂ₐ f for scalar-valued f.
pub fn diff_scalar<F: Fn(&DVector<f64>) -> f64>(
    f: F,
    x: &DVector<f64>,
    a: usize,
    depth: u8,
) -> f64 {
    let h = fd_step(x, a, depth);
    (f(&shifted(x, a, h)) - f(&shifted(x, a, -h))) / (2.0 * h)
}

/// ∂ₐ f for vector-valued f.
pub fn diff_vector<F: Fn(&DVector<f64>) -> DVector<f64>>(
    f: F,
    x: &DVector<f64>,
    a: usize,
    depth: u8,
) -> DVector<f64> {
    let h = fd_step(x, a, depth);
    (f(&shifted(x, a, h)) - f(&shifted(x, a, -h))) / (2.0 * h)
}

/// ∂ₐ f for matrix-valued f.
pub fn diff_matrix<F: Fn(&DVector<f64>) -> DMatrix<f64>>(
    f: F,
    x: &DVector<f64>,
    a: usize,
    depth: u8,
) -> DMatrix<f64> {
    let h = fd_step(x, a, depth);
    (f(&shifted(x, a, h)) - f(&shifted(x, a, -h))) / (2.0 * h)
}

/// Dense 3-tensor with index range `dim` in each slot.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    dim: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(dim: usize) -> Self {
        Tensor3 {
            dim,
            data: vec![0.0; dim * dim * dim],
        }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut t = Tensor3::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    t.set(i, j, k, f(i, j, k));
                }
            }
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.dim + j) * self.dim + k]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        self.data[(i * self.dim + j) * self.dim + k] = v;
    }

    /// Contract the three slots with vectors: t(u, v, w).
    pub fn contract3(&self, u: &DVector<f64>, v: &DVector<f64>, w: &DVector<f64>) -> f64 {
        let n = self.dim;
        let mut acc = 0.0;
        for i in 0..n {
            if u[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                if v[j] == 0.0 {
                    continue;
                }
                for k in 0..n {
                    acc += self.get(i, j, k) * u[i] * v[j] * w[k];
                }
            }
        }
        acc
    }

    /// Max deviation from total antisymmetry over all index triples.
    pub fn antisymmetry_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let v = self.get(i, j, k);
                    worst = worst.max((v + self.get(j, i, k)).abs());
                    worst = worst.max((v + self.get(i, k, j)).abs());
                    worst = worst.max((v - self.get(j, k, i)).abs());
                }
            }
        }
        worst
    }

    pub fn inf_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scale(&self, s: f64) -> Tensor3 {
        Tensor3 {
            dim: self.dim,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    /// self + s·other.
    pub fn add_scaled(&self, other: &Tensor3, s: f64) -> Tensor3 {
        assert_eq!(self.dim, other.dim);
        Tensor3 {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + s * b)
                .collect(),
        }
    }
}

/// exp(A) for a small dense matrix.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    a.clone().exp()
}

/// The left Maurer–Cartan series F(A) = Σ_{k≥0} Aᵏ/(k+1)!, i.e. the
/// derivative-of-exponential factor with u⁻¹∂u = F(−ad_A)(∂A).
///
/// Computed from the block identity exp([[A, I],[0, 0]]) = [[eᴬ, F(A)],[0, I]].
pub fn exp_series_f(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut block = DMatrix::<f64>::zeros(2 * n, 2 * n);
    block.view_mut((0, 0), (n, n)).copy_from(a);
    block
        .view_mut((0, n), (n, n))
        .copy_from(&DMatrix::identity(n, n));
    let e = expm(&block);
    e.view((0, n), (n, n)).into_owned()
}

// Rank decisions and orthonormal spans go through column-pivoted QR
// (direct Householder transforms): the iterative bidiagonal SVD in this
// stack misconverges on matrices with clustered singular values,
// projectors in particular. Symmetric spectra use the symmetric
// eigensolver, which resolves the full 1e-16 range without squaring.

/// Absolute eigenvalues of a symmetric matrix, sorted descending.
pub fn sym_spectrum(m: &DMatrix<f64>) -> Vec<f64> {
    if m.ncols() == 0 {
        return Vec::new();
    }
    let mut vals: Vec<f64> = m
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .map(|l| l.abs())
        .collect();
    vals.sort_by(|x, y| y.partial_cmp(x).unwrap());
    vals
}

/// Smallest-to-largest ratio of |eigenvalues| of a symmetric matrix.
pub fn inverse_condition_sym(m: &DMatrix<f64>) -> f64 {
    let sv = sym_spectrum(m);
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if hi > 0.0 => lo / hi,
        _ => 0.0,
    }
}

/// Ratio of smallest to largest R-diagonal magnitude of a column-pivoted
/// QR — a cheap, reliable condition estimate for small dense matrices.
pub fn inverse_condition(a: &DMatrix<f64>) -> f64 {
    if a.ncols() == 0 || a.nrows() < a.ncols() {
        return 0.0;
    }
    let diag = col_piv_r_diagonal(a);
    let hi = diag.iter().cloned().fold(0.0f64, f64::max);
    if hi == 0.0 {
        return 0.0;
    }
    diag.iter().cloned().fold(f64::INFINITY, f64::min) / hi
}

/// |diagonal| of R from a column-pivoted QR (R may be trapezoidal).
fn col_piv_r_diagonal(a: &DMatrix<f64>) -> Vec<f64> {
    let qr = a.clone().col_piv_qr();
    let r = qr.r();
    (0..a.nrows().min(a.ncols()))
        .map(|i| r[(i, i)].abs())
        .collect()
}

/// Largest singular value (spectral norm), via the symmetric Gram route;
/// only the top of the spectrum is needed, which squaring preserves.
pub fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    if a.ncols() == 0 || a.nrows() == 0 {
        return 0.0;
    }
    let gram = if a.nrows() >= a.ncols() {
        a.transpose() * a
    } else {
        a * a.transpose()
    };
    gram.symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(0.0f64, f64::max)
        .max(0.0)
        .sqrt()
}

/// Minimum-norm least-squares solution of A x ≈ b, via the truncated
/// eigendecomposition of the normal equations. Eigenvalues below
/// 1e-12·λmax are treated as structural zeros; the solves this backs
/// are either well conditioned or exactly rank deficient.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let gram = a.transpose() * a;
    let rhs = a.transpose() * b;
    let eig = gram.symmetric_eigen();
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let cut = lmax * 1e-12;
    let mut x = DVector::zeros(a.ncols());
    for i in 0..eig.eigenvalues.len() {
        let l = eig.eigenvalues[i];
        if l > cut && l > 0.0 {
            let q = eig.eigenvectors.column(i);
            x += q * (q.dot(&rhs) / l);
        }
    }
    x
}

/// Numerical rank with a relative cut on the column-pivoted R diagonal.
pub fn rank(a: &DMatrix<f64>, rel_tol: f64) -> usize {
    if a.ncols() == 0 || a.nrows() == 0 {
        return 0;
    }
    let diag = col_piv_r_diagonal(a);
    let hi = diag.iter().cloned().fold(0.0f64, f64::max);
    if hi == 0.0 {
        return 0;
    }
    diag.iter().filter(|&&d| d > hi * rel_tol).count()
}

/// Euclidean-orthonormal basis of the column span: the leading Q columns
/// of a column-pivoted QR, up to the revealed rank.
pub fn orthonormal_columns(a: &DMatrix<f64>) -> DMatrix<f64> {
    if a.ncols() == 0 {
        return a.clone();
    }
    let diag = col_piv_r_diagonal(a);
    let hi = diag.iter().cloned().fold(0.0f64, f64::max);
    if hi == 0.0 {
        return DMatrix::zeros(a.nrows(), 0);
    }
    let r = diag
        .iter()
        .filter(|&&d| d > hi * tolerances::RANK_REL)
        .count();
    a.clone().col_piv_qr().q().columns(0, r).into_owned()
}

/// Euclidean-orthonormal basis of the orthogonal complement of the
/// column span. The complement dimension is fixed by the revealed rank,
/// so an all-noise residual projector cannot leak spurious columns.
pub fn orthocomplement_of_span(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let q = orthonormal_columns(a);
    let r = q.ncols();
    if r == n {
        return DMatrix::zeros(n, 0);
    }
    let residual = DMatrix::identity(n, n) - &q * q.transpose();
    residual.col_piv_qr().q().columns(0, n - r).into_owned()
}

/// Sine of the largest principal angle between two column spans.
/// Returns 1.0 when the dimensions differ.
pub fn max_principal_angle_sin(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let qa = orthonormal_columns(a);
    let qb = orthonormal_columns(b);
    if qa.ncols() != qb.ncols() {
        return 1.0;
    }
    if qa.ncols() == 0 {
        return 0.0;
    }
    // ‖(I − Qa Qaᵀ) Qb‖₂ = sin of the largest principal angle.
    let resid = &qb - &qa * (qa.transpose() * &qb);
    spectral_norm(&resid)
}

/// Deterministic sample points in a box, away from the faces.
pub fn sample_box(domain: &[(f64, f64)], count: usize, seed: u64) -> Vec<DVector<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            DVector::from_iterator(
                domain.len(),
                domain.iter().map(|&(lo, hi)| {
                    let pad = 0.1 * (hi - lo);
                    rng.gen_range(lo + pad..hi - pad)
                }),
            )
        })
        .collect()
}

/// Deterministic dense matrix with entries in (-1, 1).
pub fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

/// Deterministic antisymmetric matrix with entries in (-1, 1).
pub fn random_antisymmetric(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let a = random_matrix(n, n, rng);
    (&a - a.transpose()) * 0.5
}

/// Deterministic symmetric positive-definite matrix, eigenvalues ≥ shift.
pub fn random_spd(n: usize, shift: f64, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let a = random_matrix(n, n, rng);
    &a * a.transpose() + DMatrix::identity(n, n) * shift
}
