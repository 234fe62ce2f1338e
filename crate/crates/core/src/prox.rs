//! Proximal operators for the separable terms `g_i`.
//!
//! Every oracle acts on a flat slice. The matrix kinds (`Nuclear`,
//! `Spectral`) carry their shape and read the slice in column-major order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{svd, DenseMatrix};

/// Tolerance for indicator violations when evaluating `g`.
pub const INDICATOR_TOL: f64 = 1e-9;

/// Tolerance used by [`ProxOracle::check`].
pub const CHECK_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProxOracle {
    Zero,
    L1 {
        mu: f64,
    },
    NonnegIndicator,
    /// `lo` and `hi` have one entry per coordinate, or a single entry that
    /// applies to all of them.
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    /// `mu * ‖Z‖_*` for a `rows x cols` matrix.
    Nuclear {
        mu: f64,
        rows: usize,
        cols: usize,
    },
    /// `mu * ‖Z‖_2` (largest singular value) for a `rows x cols` matrix.
    Spectral {
        mu: f64,
        rows: usize,
        cols: usize,
    },
    /// `scale * Σ w_k max(0, z_k)`.
    WeightedHinge {
        weights: Vec<f64>,
        scale: f64,
    },
}

fn bound(v: &[f64], k: usize) -> f64 {
    if v.len() == 1 {
        v[0]
    } else {
        v[k]
    }
}

impl ProxOracle {
    pub fn l1(mu: f64) -> Self {
        Self::L1 { mu }
    }

    pub fn nuclear(mu: f64, rows: usize, cols: usize) -> Self {
        Self::Nuclear { mu, rows, cols }
    }

    pub fn spectral(mu: f64, rows: usize, cols: usize) -> Self {
        Self::Spectral { mu, rows, cols }
    }

    pub fn box_uniform(lo: f64, hi: f64) -> Self {
        Self::Box { lo: vec![lo], hi: vec![hi] }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Self::Zero)
    }

    /// True when the prox acts coordinate by coordinate.
    pub fn is_separable(&self) -> bool {
        !matches!(self, Self::Nuclear { .. } | Self::Spectral { .. })
    }

    /// Checks parameters and that the oracle can act on vectors of length `n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match self {
            Self::Zero | Self::NonnegIndicator => Ok(()),
            Self::L1 { mu } => {
                if !(*mu >= 0.0 && mu.is_finite()) {
                    return bad(format!("l1 weight must be a nonnegative number, got {mu}"));
                }
                Ok(())
            }
            Self::Box { lo, hi } => {
                for (name, v) in [("lo", lo), ("hi", hi)] {
                    if v.len() != 1 && v.len() != n {
                        return Err(Error::Dimension(format!(
                            "box bound {name} has length {}, expected 1 or {n}",
                            v.len()
                        )));
                    }
                }
                for k in 0..lo.len().max(hi.len()) {
                    let (l, h) = (bound(lo, k), bound(hi, k));
                    if l.is_nan() || h.is_nan() || l > h {
                        return bad(format!("box bounds lo={l} hi={h} at {k}"));
                    }
                }
                Ok(())
            }
            Self::Nuclear { mu, rows, cols } | Self::Spectral { mu, rows, cols } => {
                if !(*mu >= 0.0 && mu.is_finite()) {
                    return bad(format!("matrix norm weight must be nonnegative, got {mu}"));
                }
                if rows * cols != n {
                    return Err(Error::Dimension(format!(
                        "matrix oracle is {rows}x{cols} but the block has {n} entries"
                    )));
                }
                Ok(())
            }
            Self::WeightedHinge { weights, scale } => {
                if weights.len() != n {
                    return Err(Error::Dimension(format!(
                        "hinge has {} weights for a block of {n}",
                        weights.len()
                    )));
                }
                if !(*scale >= 0.0) || weights.iter().any(|w| !(*w >= 0.0)) {
                    return bad("hinge weights and scale must be nonnegative".into());
                }
                Ok(())
            }
        }
    }

    /// `argmin_z g(z) + (θ/2)‖z − v‖²`.
    pub fn prox(&self, v: &[f64], theta: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; v.len()];
        self.prox_into(v, theta, &mut out)?;
        Ok(out)
    }

    pub fn prox_into(&self, v: &[f64], theta: f64, out: &mut [f64]) -> Result<()> {
        if !(theta > 0.0) || !theta.is_finite() {
            return Err(Error::InvalidParameter(format!("prox weight must be positive, got {theta}")));
        }
        if out.len() != v.len() {
            return Err(Error::Dimension(format!("prox output {} vs input {}", out.len(), v.len())));
        }
        self.validate(v.len())?;
        match self {
            Self::Zero => out.copy_from_slice(v),
            Self::L1 { mu } => {
                let t = mu / theta;
                for (o, &x) in out.iter_mut().zip(v) {
                    *o = x.signum() * (x.abs() - t).max(0.0);
                }
            }
            Self::NonnegIndicator => {
                for (o, &x) in out.iter_mut().zip(v) {
                    *o = x.max(0.0);
                }
            }
            Self::Box { lo, hi } => {
                for (k, (o, &x)) in out.iter_mut().zip(v).enumerate() {
                    *o = x.clamp(bound(lo, k), bound(hi, k));
                }
            }
            Self::WeightedHinge { .. } => {
                for (k, (o, &x)) in out.iter_mut().zip(v).enumerate() {
                    *o = self.prox_coord(k, x, theta)?;
                }
            }
            Self::Nuclear { mu, rows, cols } => {
                let t = mu / theta;
                shrink_singular_values(v, *rows, *cols, out, |s| {
                    s.iter().map(|x| (x - t).max(0.0)).collect()
                });
            }
            Self::Spectral { mu, rows, cols } => {
                let r = mu / theta;
                shrink_singular_values(v, *rows, *cols, out, |s| {
                    let level = l1_ball_level(s, r);
                    s.iter().map(|x| x.min(level)).collect()
                });
            }
        }
        Ok(())
    }

    /// Prox of the term acting on coordinate `k` alone, for separable kinds.
    pub fn prox_coord(&self, k: usize, v: f64, theta: f64) -> Result<f64> {
        Ok(match self {
            Self::Zero => v,
            Self::L1 { mu } => v.signum() * (v.abs() - mu / theta).max(0.0),
            Self::NonnegIndicator => v.max(0.0),
            Self::Box { lo, hi } => v.clamp(bound(lo, k), bound(hi, k)),
            Self::WeightedHinge { weights, scale } => {
                let c = scale * weights[k] / theta;
                if v > c {
                    v - c
                } else if v >= 0.0 {
                    0.0
                } else {
                    v
                }
            }
            Self::Nuclear { .. } | Self::Spectral { .. } => {
                return Err(Error::Unsupported("matrix norms do not act coordinatewise".into()))
            }
        })
    }

    /// `g(x)`, with `+inf` when an indicator is violated by more than
    /// [`INDICATOR_TOL`].
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::L1 { mu } => mu * x.iter().map(|v| v.abs()).sum::<f64>(),
            Self::NonnegIndicator => {
                if x.iter().all(|&v| v >= -INDICATOR_TOL) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Self::Box { lo, hi } => {
                let inside = x.iter().enumerate().all(|(k, &v)| {
                    v >= bound(lo, k) - INDICATOR_TOL && v <= bound(hi, k) + INDICATOR_TOL
                });
                if inside {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Self::WeightedHinge { weights, scale } => {
                scale * x.iter().zip(weights).map(|(v, w)| w * v.max(0.0)).sum::<f64>()
            }
            Self::Nuclear { mu, rows, cols } => {
                if *mu == 0.0 {
                    return 0.0;
                }
                mu * singular_values(x, *rows, *cols).iter().sum::<f64>()
            }
            Self::Spectral { mu, rows, cols } => {
                if *mu == 0.0 {
                    return 0.0;
                }
                mu * singular_values(x, *rows, *cols).first().copied().unwrap_or(0.0)
            }
        }
    }

    /// Tests the optimality inclusion `θ(v − z) ∈ ∂g(z)` to [`CHECK_TOL`],
    /// scaled by the magnitude of the data.
    pub fn check(&self, v: &[f64], theta: f64, z: &[f64]) -> Result<bool> {
        if !(theta > 0.0) {
            return Err(Error::InvalidParameter(format!("prox weight must be positive, got {theta}")));
        }
        if v.len() != z.len() {
            return Err(Error::Dimension(format!("check lengths {} vs {}", v.len(), z.len())));
        }
        self.validate(v.len())?;
        let g: Vec<f64> = v.iter().zip(z).map(|(a, b)| theta * (a - b)).collect();
        let mag = 1.0
            + v.iter().chain(z).fold(0.0_f64, |m, x| m.max(x.abs())) * theta.max(1.0);
        let tol = CHECK_TOL * mag;
        let ok = match self {
            Self::Zero => g.iter().all(|s| s.abs() <= tol),
            Self::L1 { mu } => g.iter().zip(z).all(|(&s, &x)| {
                let at_zero = x.abs() <= tol && s.abs() <= mu + tol;
                let smooth = x != 0.0 && (s - mu * x.signum()).abs() <= tol;
                at_zero || smooth
            }),
            Self::NonnegIndicator => g.iter().zip(z).all(|(&s, &x)| {
                x >= -tol && (s.abs() <= tol || (x.abs() <= tol && s <= tol))
            }),
            Self::Box { lo, hi } => g.iter().zip(z).enumerate().all(|(k, (&s, &x))| {
                let (l, h) = (bound(lo, k), bound(hi, k));
                let inside = x >= l - tol && x <= h + tol;
                let cone = s.abs() <= tol
                    || ((x - l).abs() <= tol && s <= tol)
                    || ((x - h).abs() <= tol && s >= -tol);
                inside && cone
            }),
            Self::WeightedHinge { weights, scale } => {
                g.iter().zip(z).zip(weights).all(|((&s, &x), w)| {
                    let c = scale * w;
                    let pos = x > 0.0 && (s - c).abs() <= tol;
                    let neg = x < 0.0 && s.abs() <= tol;
                    let kink = x.abs() <= tol && s >= -tol && s <= c + tol;
                    pos || neg || kink
                })
            }
            Self::Nuclear { mu, rows, cols } | Self::Spectral { mu, rows, cols } => {
                // For a norm h scaled by mu: G ∈ ∂(mu h)(Z) iff
                // h_dual(G) ≤ mu and <G, Z> = mu h(Z).
                let gs = singular_values(&g, *rows, *cols);
                let zs = singular_values(z, *rows, *cols);
                let (dual, primal) = if matches!(self, Self::Nuclear { .. }) {
                    (gs.first().copied().unwrap_or(0.0), zs.iter().sum::<f64>())
                } else {
                    (gs.iter().sum::<f64>(), zs.first().copied().unwrap_or(0.0))
                };
                let inner: f64 = g.iter().zip(z).map(|(a, b)| a * b).sum();
                let tol_inner = tol * (1.0 + primal);
                dual <= mu + tol && (inner - mu * primal).abs() <= tol_inner
            }
        };
        Ok(ok)
    }
}

fn as_matrix(v: &[f64], rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_col_major(rows, cols, v).expect("shape validated")
}

fn singular_values(v: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    if rows == 0 || cols == 0 {
        return Vec::new();
    }
    svd(&as_matrix(v, rows, cols)).singular_values
}

fn shrink_singular_values(
    v: &[f64],
    rows: usize,
    cols: usize,
    out: &mut [f64],
    map: impl FnOnce(&[f64]) -> Vec<f64>,
) {
    if rows == 0 || cols == 0 {
        return;
    }
    let d = svd(&as_matrix(v, rows, cols));
    let s = map(&d.singular_values);
    out.copy_from_slice(&d.reconstruct_with(&s).to_col_major());
}

/// For nonnegative `s`, the level `τ` with `Σ max(s_k − τ, 0) = r`, so that
/// `s − min(s, τ)` is the projection of `s` onto the `l1` ball of radius `r`.
/// Returns 0 when `s` already lies in the ball.
fn l1_ball_level(s: &[f64], r: f64) -> f64 {
    let total: f64 = s.iter().sum();
    if total <= r {
        return 0.0;
    }
    let mut sorted = s.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut level = 0.0;
    for (k, &x) in sorted.iter().enumerate() {
        cum += x;
        let t = (cum - r) / (k + 1) as f64;
        if t < x {
            level = t;
        } else {
            break;
        }
    }
    level.max(0.0)
}
