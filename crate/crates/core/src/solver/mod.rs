//! Proximal alternating linearized minimization of `‖X - U V‖²_F` with
//! `U` in a U-set and every column of `V` on a sphere of common radius `l`.
//!
//! One iteration:
//!
//! 1. `μ = margin · 2σ₁(V Vᵀ)` and a linearized proximal step on `U`,
//! 2. `λ = margin · 2σ₁(UᵀU)` and an independent projection per column of `V`
//!    onto the radius-`l` set,
//! 3. an exact scalar line search for `l`.
//!
//! With `margin > 1` each of the three steps is non-increasing in the
//! objective. `V` is stored as `l · v_hat` with unit-norm columns.

mod mua;

pub use mua::{mua_objective, mua_step, DEFAULT_MUA_EPS};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::constraints::{
    procrustes, q_from_products, update_u_nonnegative, update_u_orthogonal, ConstraintSpec, USet,
};
use crate::error::{Error, Result};
use crate::numerics::{frobenius_inner, spectral_norm_psd, DenseMatrix, DEFAULT_POWER_TOL};

/// Denominator and value floor for the radius line search.
pub const RADIUS_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Multiplies the Lipschitz constants to obtain `μ` and `λ`. Values at or
    /// below 1 void the descent guarantee and exist for diagnostics.
    pub margin: f64,
    /// Stop once `‖ΔU‖_F + ‖ΔV‖_F` drops below this.
    pub stop_tol: f64,
    pub seed: u64,
    pub update_radius: bool,
    pub record_trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 500,
            margin: 1.01,
            stop_tol: 1e-6,
            seed: 0,
            update_radius: true,
            record_trace: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter(
                "max_iters must be at least 1".into(),
            ));
        }
        if !(self.margin > 0.0) || !self.margin.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "margin must be positive, got {}",
                self.margin
            )));
        }
        if !(self.stop_tol >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "stop_tol must be nonnegative, got {}",
                self.stop_tol
            )));
        }
        Ok(())
    }

    /// Whether the step sizes keep the objective monotone.
    pub fn is_monotone(&self) -> bool {
        self.margin > 1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorizationState {
    pub u: DenseMatrix,
    /// Unit-norm columns; the component matrix is `l · v_hat`.
    pub v_hat: DenseMatrix,
    pub l: f64,
    pub iter: usize,
    pub objective: f64,
}

impl FactorizationState {
    /// The scaled component matrix `V = l · v_hat`.
    pub fn v(&self) -> DenseMatrix {
        self.v_hat.scale(self.l)
    }

    pub fn rank(&self) -> usize {
        self.u.cols()
    }

    /// Checks the set-membership invariants: `U` in its set, every column
    /// of `v_hat` in the unit-radius V-set, `l > 0`.
    pub fn check_feasible(&self, spec: &ConstraintSpec) -> Result<()> {
        match spec.u_set {
            USet::Orthogonal => {
                let err = self
                    .u
                    .tr_matmul(&self.u)?
                    .distance(&DenseMatrix::identity(self.u.cols()))?;
                if err > 1e-10 {
                    return Err(Error::InvalidInput(format!("‖UᵀU - I‖_F = {err:e}")));
                }
            }
            USet::Nonnegative => {
                if !self.u.is_nonnegative() {
                    return Err(Error::InvalidInput("U has negative entries".into()));
                }
            }
        }
        for (j, col) in self.v_hat.columns().enumerate() {
            if !spec.v_set.contains(col, spec.sparsity, 1e-12) {
                return Err(Error::InvalidInput(format!(
                    "column {j} of v_hat is outside {}",
                    spec.v_set
                )));
            }
        }
        if !(self.l > 0.0) {
            return Err(Error::InvalidInput(format!(
                "radius {} is not positive",
                self.l
            )));
        }
        Ok(())
    }
}

/// Per-iteration diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub iter: usize,
    pub objective: f64,
    pub delta_u: f64,
    /// Change of the scaled `V = l · v_hat`.
    pub delta_v: f64,
    pub mu: f64,
    pub lambda: f64,
    pub l: f64,
}

fn check_shapes(x: &DenseMatrix, u: &DenseMatrix, v_hat: &DenseMatrix) -> Result<()> {
    let (m, n) = x.shape();
    if u.rows() != m || v_hat.cols() != n || u.cols() != v_hat.rows() {
        return Err(Error::Dimension(format!(
            "X is {m}x{n}, U is {}x{}, V is {}x{}",
            u.rows(),
            u.cols(),
            v_hat.rows(),
            v_hat.cols()
        )));
    }
    Ok(())
}

/// `‖X - l · U · V̂‖²_F`.
pub fn objective(x: &DenseMatrix, u: &DenseMatrix, v_hat: &DenseMatrix, l: f64) -> Result<f64> {
    check_shapes(x, u, v_hat)?;
    let uv = u.matmul(v_hat)?;
    Ok(x.data()
        .iter()
        .zip(uv.data())
        .map(|(a, b)| {
            let d = a - l * b;
            d * d
        })
        .sum())
}

/// `∇_U h = 2 (U V - X) Vᵀ`.
pub fn gradient_u(x: &DenseMatrix, u: &DenseMatrix, v: &DenseMatrix) -> Result<DenseMatrix> {
    check_shapes(x, u, v)?;
    Ok(u.matmul(v)?.sub(x)?.matmul_tr(v)?.scale(2.0))
}

/// `∇_V h = 2 Uᵀ (U V - X)`, column `j` being the gradient of the `j`-th
/// decoupled subproblem.
pub fn gradient_v(x: &DenseMatrix, u: &DenseMatrix, v: &DenseMatrix) -> Result<DenseMatrix> {
    check_shapes(x, u, v)?;
    Ok(u.tr_matmul(&u.matmul(v)?.sub(x)?)?.scale(2.0))
}

/// Closed-form optimal radius `⟨X, UV̂⟩ / ⟨UV̂, UV̂⟩`.
///
/// Returns [`Error::Degenerate`] when `UV̂` vanishes.
pub fn radius_update(x: &DenseMatrix, u: &DenseMatrix, v_hat: &DenseMatrix) -> Result<f64> {
    check_shapes(x, u, v_hat)?;
    let uv = u.matmul(v_hat)?;
    let denom = frobenius_inner(&uv, &uv)?;
    if denom <= RADIUS_FLOOR {
        return Err(Error::Degenerate(format!("‖UV̂‖² = {denom:e}")));
    }
    Ok(frobenius_inner(x, &uv)? / denom)
}

fn standard_normal(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    let data = (0..rows * cols)
        .map(|_| StandardNormal.sample(rng))
        .collect();
    DenseMatrix::from_raw(rows, cols, data)
}

/// Seeded feasible starting point with `l = 1`.
///
/// `U` is the orthonormal polar factor of a standard-normal matrix (orthogonal
/// set) or its elementwise absolute value (nonnegative set). Each column of
/// `v_hat` is a standard-normal vector projected onto the V-set.
pub fn init(
    x: &DenseMatrix,
    r: usize,
    spec: &ConstraintSpec,
    seed: u64,
) -> Result<FactorizationState> {
    let (m, n) = x.shape();
    if n == 0 || m == 0 {
        return Err(Error::InvalidInput("data matrix is empty".into()));
    }
    spec.validate(m, r)?;
    if spec.u_set == USet::Orthogonal && r > n {
        return Err(Error::Infeasible(format!(
            "orthogonal U needs r <= min(m, n), got r={r} n={n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = standard_normal(m, r, &mut rng);
    let u = match spec.u_set {
        USet::Orthogonal => procrustes(&g)?,
        USet::Nonnegative => g.map(f64::abs),
    };
    let mut v_hat = DenseMatrix::zeros(r, n);
    for j in 0..n {
        let draw: Vec<f64> = (0..r).map(|_| StandardNormal.sample(&mut rng)).collect();
        let col = v_hat.column_mut(j);
        // a zero draw is a measure-zero event; seed the column so it stays feasible
        col[0] = 1.0;
        spec.v_set.project(&draw, spec.sparsity, col)?;
    }
    let objective = objective(x, &u, &v_hat, 1.0)?;
    Ok(FactorizationState {
        u,
        v_hat,
        l: 1.0,
        iter: 0,
        objective,
    })
}

/// One full PALM iteration.
pub fn palm_step(
    x: &DenseMatrix,
    state: &FactorizationState,
    spec: &ConstraintSpec,
    config: &SolverConfig,
) -> Result<(FactorizationState, TraceRecord)> {
    check_shapes(x, &state.u, &state.v_hat)?;
    config.validate()?;
    let (_, n) = x.shape();
    let l = state.l;
    let v_k = state.v();

    // U-step at the scaled V
    let lip_u = 2.0 * spectral_norm_psd(&v_k.matmul_tr(&v_k)?, DEFAULT_POWER_TOL)?;
    let mu = config.margin * lip_u;
    let u = match spec.u_set {
        USet::Orthogonal => update_u_orthogonal(x, &state.u, &v_k, mu)?,
        USet::Nonnegative => update_u_nonnegative(x, &state.u, &v_k, mu)?,
    };

    // V-step, one column at a time on the radius-l set
    let gram = u.tr_matmul(&u)?;
    let lambda = config.margin * 2.0 * spectral_norm_psd(&gram, DEFAULT_POWER_TOL)?;
    let utx = u.tr_matmul(x)?;
    let mut v_hat = state.v_hat.clone();
    if lambda > 0.0 {
        let r = u.cols();
        let mut q = vec![0.0; r];
        for j in 0..n {
            q_from_products(utx.column(j), &gram, v_k.column(j), lambda, &mut q);
            spec.v_set.project(&q, spec.sparsity, v_hat.column_mut(j))?;
        }
    }

    let mut new_l = l;
    if config.update_radius {
        match radius_update(x, &u, &v_hat) {
            Ok(value) if value > RADIUS_FLOOR => new_l = value,
            Ok(_) | Err(Error::Degenerate(_)) => {}
            Err(e) => return Err(e),
        }
    }

    let objective = objective(x, &u, &v_hat, new_l)?;
    let delta_u = u.distance(&state.u)?;
    let delta_v = v_hat.scale(new_l).distance(&v_k)?;
    let iter = state.iter + 1;
    let record = TraceRecord {
        iter,
        objective,
        delta_u,
        delta_v,
        mu,
        lambda,
        l: new_l,
    };
    Ok((
        FactorizationState {
            u,
            v_hat,
            l: new_l,
            iter,
            objective,
        },
        record,
    ))
}

/// Runs [`palm_step`] from `state` until the iteration cap or until
/// `‖ΔU‖_F + ‖ΔV‖_F < stop_tol`.
pub fn solve_from(
    x: &DenseMatrix,
    mut state: FactorizationState,
    spec: &ConstraintSpec,
    config: &SolverConfig,
) -> Result<(FactorizationState, Vec<TraceRecord>)> {
    config.validate()?;
    spec.validate(x.rows(), state.rank())?;
    let mut trace = Vec::new();
    for _ in 0..config.max_iters {
        let (next, record) = palm_step(x, &state, spec, config)?;
        state = next;
        if config.record_trace {
            trace.push(record);
        }
        if record.delta_u + record.delta_v < config.stop_tol {
            break;
        }
    }
    Ok((state, trace))
}

/// Seeded initialization followed by [`solve_from`].
pub fn solve(
    x: &DenseMatrix,
    r: usize,
    spec: &ConstraintSpec,
    config: &SolverConfig,
) -> Result<(FactorizationState, Vec<TraceRecord>)> {
    config.validate()?;
    let state = init(x, r, spec, config.seed)?;
    solve_from(x, state, spec, config)
}
