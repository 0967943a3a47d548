//! Constraint sets and the closed-form minimizers of the linearized
//! subproblems: two U-updates and four V-column projections.

mod projection;
mod reference;

use std::fmt;
use std::str::FromStr;

pub use projection::{
    project_nonneg_sparse_sphere, project_nonneg_sphere, project_sparse_sphere, project_sphere,
    DEGENERATE_Q,
};
pub use reference::{reference_projection, MAX_REFERENCE_DIM};

use crate::error::{Error, Result};
use crate::numerics::{thin_svd, DenseMatrix};

/// Feasible set for the basis `U`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum USet {
    /// `UᵀU = I`
    Orthogonal,
    /// `U ≥ 0`
    Nonnegative,
}

/// Feasible set for the columns of `V` (radius 1; the solver scales by `l`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VSet {
    Sphere,
    NonnegSphere,
    SparseSphere,
    NonnegSparseSphere,
}

impl USet {
    pub const ALL: [USet; 2] = [USet::Orthogonal, USet::Nonnegative];

    pub fn name(self) -> &'static str {
        match self {
            USet::Orthogonal => "orthogonal",
            USet::Nonnegative => "nonneg",
        }
    }
}

impl VSet {
    pub const ALL: [VSet; 4] = [
        VSet::Sphere,
        VSet::NonnegSphere,
        VSet::SparseSphere,
        VSet::NonnegSparseSphere,
    ];

    pub fn name(self) -> &'static str {
        match self {
            VSet::Sphere => "sphere",
            VSet::NonnegSphere => "nonneg_sphere",
            VSet::SparseSphere => "sparse_sphere",
            VSet::NonnegSparseSphere => "nonneg_sparse_sphere",
        }
    }

    pub fn is_sparse(self) -> bool {
        matches!(self, VSet::SparseSphere | VSet::NonnegSparseSphere)
    }

    pub fn is_nonnegative(self) -> bool {
        matches!(self, VSet::NonnegSphere | VSet::NonnegSparseSphere)
    }

    /// Overwrites `v` with the maximizer of `⟨v, q⟩` over this set; leaves it
    /// alone when `q` is degenerate.
    pub fn project(self, q: &[f64], s: usize, v: &mut [f64]) -> Result<()> {
        match self {
            VSet::Sphere => project_sphere(q, v),
            VSet::NonnegSphere => project_nonneg_sphere(q, v),
            VSet::SparseSphere => project_sparse_sphere(q, s, v)?,
            VSet::NonnegSparseSphere => project_nonneg_sparse_sphere(q, s, v)?,
        }
        Ok(())
    }

    /// Whether `v` is a member of the unit-radius set, within `tol` on the norm.
    pub fn contains(self, v: &[f64], s: usize, tol: f64) -> bool {
        let norm = crate::numerics::norm2(v);
        if (norm - 1.0).abs() > tol {
            return false;
        }
        if self.is_nonnegative() && v.iter().any(|&x| x < 0.0) {
            return false;
        }
        if self.is_sparse() && v.iter().filter(|&&x| x != 0.0).count() > s {
            return false;
        }
        true
    }
}

impl fmt::Display for USet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for VSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for USet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        USet::ALL
            .into_iter()
            .find(|u| u.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown U set '{s}'")))
    }
}

impl FromStr for VSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        VSet::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown V set '{s}'")))
    }
}

/// Which U-set and V-set are active, plus the sparsity level for sparse sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConstraintSpec {
    pub u_set: USet,
    pub v_set: VSet,
    pub sparsity: usize,
}

impl ConstraintSpec {
    pub fn new(u_set: USet, v_set: VSet, sparsity: usize) -> Self {
        Self {
            u_set,
            v_set,
            sparsity,
        }
    }

    /// Checks the spec against a problem with `m` features and rank `r`.
    pub fn validate(&self, m: usize, r: usize) -> Result<()> {
        if r == 0 {
            return Err(Error::InvalidParameter("rank must be at least 1".into()));
        }
        if self.v_set.is_sparse() && (self.sparsity == 0 || self.sparsity > r) {
            return Err(Error::InvalidParameter(format!(
                "sparsity {} outside 1..={r}",
                self.sparsity
            )));
        }
        if self.u_set == USet::Orthogonal && r > m {
            return Err(Error::Infeasible(format!(
                "orthogonal U needs r <= m, got r={r} m={m}"
            )));
        }
        Ok(())
    }
}

impl fmt::Display for ConstraintSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "u={} v={}", self.u_set, self.v_set)?;
        if self.v_set.is_sparse() {
            write!(f, " s={}", self.sparsity)?;
        }
        Ok(())
    }
}

fn check_factor_shapes(x: &DenseMatrix, u: &DenseMatrix, v: &DenseMatrix) -> Result<()> {
    let (m, n) = x.shape();
    if u.rows() != m || v.cols() != n || u.cols() != v.rows() {
        return Err(Error::Dimension(format!(
            "X is {m}x{n}, U is {}x{}, V is {}x{}",
            u.rows(),
            u.cols(),
            v.rows(),
            v.cols()
        )));
    }
    Ok(())
}

fn check_step(mu: f64) -> Result<()> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "step parameter must be positive, got {mu}"
        )));
    }
    Ok(())
}

/// `(X - U V) Vᵀ`, half the negative gradient of `‖X - UV‖²` in `U`.
fn residual_times_vt(x: &DenseMatrix, u: &DenseMatrix, v: &DenseMatrix) -> Result<DenseMatrix> {
    x.sub(&u.matmul(v)?)?.matmul_tr(v)
}

/// Orthogonal U-step: `U = Y Zᵀ` where `Y Σ Zᵀ` is the thin SVD of
/// `M = 2 (X - U_k V_k) V_kᵀ + μ U_k`.
pub fn update_u_orthogonal(
    x: &DenseMatrix,
    u_k: &DenseMatrix,
    v_k: &DenseMatrix,
    mu: f64,
) -> Result<DenseMatrix> {
    check_factor_shapes(x, u_k, v_k)?;
    check_step(mu)?;
    if u_k.cols() > u_k.rows() {
        return Err(Error::Infeasible(format!(
            "orthogonal U needs r <= m, got r={} m={}",
            u_k.cols(),
            u_k.rows()
        )));
    }
    let m = residual_times_vt(x, u_k, v_k)?
        .scale(2.0)
        .add(&u_k.scale(mu))?;
    procrustes(&m)
}

/// Maximizer of `tr(Uᵀ M)` over matrices with orthonormal columns.
pub fn procrustes(m: &DenseMatrix) -> Result<DenseMatrix> {
    let svd = thin_svd(m)?;
    svd.y.matmul_tr(&svd.z)
}

/// Nonnegative U-step: `max{U_k + (2/μ)(X - U_k V_k) V_kᵀ, 0}`.
pub fn update_u_nonnegative(
    x: &DenseMatrix,
    u_k: &DenseMatrix,
    v_k: &DenseMatrix,
    mu: f64,
) -> Result<DenseMatrix> {
    check_factor_shapes(x, u_k, v_k)?;
    check_step(mu)?;
    let step = residual_times_vt(x, u_k, v_k)?.scale(2.0 / mu);
    Ok(u_k.add(&step)?.map(|a| a.max(0.0)))
}

/// `q = 2 Uᵀ x + (λ I - 2 UᵀU) v` for a single column.
pub fn compute_q(x_col: &[f64], u: &DenseMatrix, v_col: &[f64], lambda: f64) -> Result<Vec<f64>> {
    if x_col.len() != u.rows() || v_col.len() != u.cols() {
        return Err(Error::Dimension(format!(
            "x has {} rows, U is {}x{}, v has {} rows",
            x_col.len(),
            u.rows(),
            u.cols(),
            v_col.len()
        )));
    }
    check_step(lambda)?;
    let x = DenseMatrix::column_vector(x_col)?;
    let utx = u.tr_matmul(&x)?;
    let gram = u.tr_matmul(u)?;
    let mut q = vec![0.0; v_col.len()];
    q_from_products(utx.data(), &gram, v_col, lambda, &mut q);
    Ok(q)
}

/// Batched form of [`compute_q`] given precomputed `Uᵀx` and `UᵀU`.
pub(crate) fn q_from_products(
    utx: &[f64],
    gram: &DenseMatrix,
    v: &[f64],
    lambda: f64,
    q: &mut [f64],
) {
    for (i, qi) in q.iter_mut().enumerate() {
        *qi = 2.0 * utx[i] + lambda * v[i];
    }
    for (j, &vj) in v.iter().enumerate() {
        if vj == 0.0 {
            continue;
        }
        for (qi, &g) in q.iter_mut().zip(gram.column(j)) {
            *qi -= 2.0 * g * vj;
        }
    }
}
