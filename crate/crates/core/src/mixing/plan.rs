use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

use super::sdp::sdp_objective;

/// Tolerance for the symmetry of `W − euᵀ` in [`validate_w`].
pub const VALIDATE_TOL: f64 = 1e-9;

/// How blocks are mixed between the Jacobian and Gauss-Seidel extremes.
///
/// `w` has an all-ones upper triangle. When `u` is present, the strict lower
/// triangle is `w_ij = 1 + u_j − u_i`. Plans without `u` (fully
/// Gauss-Seidel, or any other hand-built `W`) can be run but carry no
/// convergence certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingPlan {
    pub m: usize,
    pub u: Option<Vec<f64>>,
    #[serde(rename = "W")]
    pub w: DenseMatrix,
    pub alpha: f64,
    /// Linearization flags: `true` linearizes the block's quadratic terms
    /// so its update is a single prox step.
    #[serde(rename = "D")]
    pub d: Vec<bool>,
    pub d_max: f64,
    pub sigma_star: Option<f64>,
}

/// `W` with ones on and above the diagonal and `1 + u_j − u_i` below.
pub fn construct_w(u: &[f64]) -> DenseMatrix {
    let m = u.len();
    DenseMatrix::from_fn(m, m, |i, j| if j >= i { 1.0 } else { 1.0 + u[j] - u[i] })
}

/// Outcome of [`validate_w`].
#[derive(Clone, Debug, PartialEq)]
pub struct WCheck {
    pub ok: bool,
    /// Recovered `u` with `u_1 = 0`.
    pub u: Option<Vec<f64>>,
    pub reason: Option<String>,
}

impl WCheck {
    fn fail(reason: String) -> Self {
        Self { ok: false, u: None, reason: Some(reason) }
    }
}

/// Checks that `w_ij = 1` for `j ≥ i` and that `W − euᵀ` is symmetric for
/// some `u`, recovering `u` from the first column.
pub fn validate_w(w: &DenseMatrix) -> WCheck {
    if !w.is_square() {
        return WCheck::fail(format!("W is {}x{}, not square", w.rows(), w.cols()));
    }
    let m = w.rows();
    for i in 0..m {
        for j in i..m {
            if (w.get(i, j) - 1.0).abs() > VALIDATE_TOL {
                return WCheck::fail(format!("w[{i}][{j}] = {} but entries on or above the diagonal must be 1", w.get(i, j)));
            }
        }
    }
    // w_i1 = 1 + u_1 − u_i with u_1 = 0
    let u: Vec<f64> = (0..m).map(|i| if i == 0 { 0.0 } else { 1.0 - w.get(i, 0) }).collect();
    let mut worst = 0.0_f64;
    for i in 0..m {
        for j in 0..i {
            // (W − euᵀ)_ij vs (W − euᵀ)_ji
            let lower = w.get(i, j) - u[j];
            let upper = w.get(j, i) - u[i];
            worst = worst.max((lower - upper).abs());
        }
    }
    if worst > VALIDATE_TOL {
        return WCheck::fail(format!("W − euᵀ is not symmetric for any u (asymmetry {worst:e})"));
    }
    WCheck { ok: true, u: Some(u), reason: None }
}

impl MixingPlan {
    /// Plan for a given `u`, with `d_max` set to the design objective at `u`.
    pub fn from_u(u: Vec<f64>, d: Vec<bool>, alpha: f64) -> Result<Self> {
        if u.len() != d.len() || u.is_empty() {
            return Err(Error::Dimension(format!("u has {} entries, D has {}", u.len(), d.len())));
        }
        check_alpha(alpha)?;
        let sigma = sdp_objective(&u, &d)?;
        Ok(Self {
            m: u.len(),
            w: construct_w(&u),
            u: Some(u),
            alpha,
            d,
            d_max: sigma.max(0.0),
            sigma_star: Some(sigma),
        })
    }

    /// All-ones `W`: every block sees only the previous iterate.
    pub fn jacobi(d: Vec<bool>) -> Result<Self> {
        Self::from_u(vec![0.0; d.len()], d, 1.0)
    }

    /// Upper-triangular `W`: every block sees the newest values. No `u`
    /// exists for `m ≥ 3`, so `d_max` is left at zero for the caller to set.
    pub fn gauss_seidel(d: Vec<bool>) -> Self {
        let m = d.len();
        let w = DenseMatrix::from_fn(m, m, |i, j| if j >= i { 1.0 } else { 0.0 });
        Self { m, u: None, w, alpha: 1.0, d, d_max: 0.0, sigma_star: None }
    }

    /// Plan from an explicit `W`. `u` is recovered when `W` admits one.
    pub fn from_w(w: DenseMatrix, d: Vec<bool>, alpha: f64) -> Result<Self> {
        let check = validate_w(&w);
        if check.ok {
            return Self::from_u(check.u.expect("ok carries u"), d, alpha);
        }
        check_upper_ones(&w)?;
        if w.rows() != d.len() {
            return Err(Error::Dimension(format!("W is {}x{}, D has {}", w.rows(), w.cols(), d.len())));
        }
        check_alpha(alpha)?;
        Ok(Self { m: d.len(), u: None, w, alpha, d, d_max: 0.0, sigma_star: None })
    }

    /// Re-checks the structural invariants (after deserializing, say).
    pub fn validate(&self) -> Result<()> {
        if self.w.rows() != self.m || self.w.cols() != self.m || self.d.len() != self.m {
            return Err(Error::Dimension("plan sizes disagree with m".into()));
        }
        check_alpha(self.alpha)?;
        check_upper_ones(&self.w)?;
        if let Some(u) = &self.u {
            if u.len() != self.m {
                return Err(Error::Dimension("u has the wrong length".into()));
            }
            let want = construct_w(u);
            if want.sub(&self.w)?.max_abs() > VALIDATE_TOL {
                return Err(Error::InvalidParameter("W does not match u".into()));
            }
        }
        if !(self.d_max >= 0.0) || !self.d_max.is_finite() {
            return Err(Error::InvalidParameter(format!("d_max must be a nonnegative number, got {}", self.d_max)));
        }
        Ok(())
    }

    pub fn is_jacobi(&self) -> bool {
        self.w.data().iter().all(|&v| v == 1.0)
    }

    /// Vectors `(a, b)` with `1 − w_ij = a_i − b_j` for every `j < i`, if
    /// they exist. With them, the mixed point for block `i` needs only two
    /// running sums instead of one term per earlier block.
    pub fn lead_lag(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        if let Some(u) = &self.u {
            return Some((u.clone(), u.clone()));
        }
        let m = self.m;
        let w = &self.w;
        let mut a = vec![0.0; m];
        let mut b = vec![0.0; m];
        for i in 1..m {
            a[i] = 1.0 - w.get(i, 0);
        }
        for j in 1..m.saturating_sub(1) {
            b[j] = a[j + 1] - (1.0 - w.get(j + 1, j));
        }
        for i in 1..m {
            for j in 0..i {
                if ((a[i] - b[j]) - (1.0 - w.get(i, j))).abs() > 1e-12 {
                    return None;
                }
            }
        }
        Some((a, b))
    }

    /// `U = W − euᵀ`.
    pub fn u_matrix(&self) -> Result<DenseMatrix> {
        let u = self.require_u()?;
        Ok(DenseMatrix::from_fn(self.m, self.m, |i, j| self.w.get(i, j) - u[j]))
    }

    /// `W − euᵀ + αuuᵀ`, the block coupling subtracted from `P`.
    pub fn coupling_matrix(&self) -> Result<DenseMatrix> {
        let u = self.require_u()?.to_vec();
        let base = self.u_matrix()?;
        Ok(DenseMatrix::from_fn(self.m, self.m, |i, j| base.get(i, j) + self.alpha * u[i] * u[j]))
    }

    pub fn require_u(&self) -> Result<&[f64]> {
        self.u.as_deref().ok_or_else(|| {
            Error::Unsupported("this operation needs a plan with u (W − euᵀ symmetric)".into())
        })
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha >= 1.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("alpha must be at least 1, got {alpha}")))
    }
}

fn check_upper_ones(w: &DenseMatrix) -> Result<()> {
    if !w.is_square() {
        return Err(Error::NotSquare { rows: w.rows(), cols: w.cols() });
    }
    for i in 0..w.rows() {
        for j in i..w.cols() {
            if w.get(i, j) != 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "w[{i}][{j}] = {}; entries on and above the diagonal must be 1",
                    w.get(i, j)
                )));
            }
        }
    }
    Ok(())
}
