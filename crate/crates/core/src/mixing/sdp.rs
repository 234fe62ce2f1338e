//! Design of `u` by minimizing `λ_max(U(u) + uuᵀ + D − I)`.
//!
//! With `U(u) = W − euᵀ`, whose `(i, j)` entry is `1 − u_max(i,j)`, a Schur
//! complement turns `σ ≥ λ_max(U + uuᵀ + D − I)` into the linear matrix
//! inequality
//!
//! ```text
//! F(σ, u) = [ (σ + 1)I − D − U(u)   u ]  ⪰ 0
//!           [ uᵀ                    1 ]
//! ```
//!
//! which is affine in `(σ, u)`. The problem `min σ s.t. F ⪰ 0` is solved by
//! a log-det barrier method with damped Newton steps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{sym_eig, Cholesky, DenseMatrix, Lu};

use super::plan::{construct_w, MixingPlan};

/// Safety margin added to the optimal value when it becomes `d_max`.
pub const D_MAX_MARGIN: f64 = 1e-6;

const GAP_TOL: f64 = 1e-10;
const MAX_NEWTON: usize = 200;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdpSolution {
    /// `λ_max` of the design matrix at `u`.
    pub sigma: f64,
    pub u: Vec<f64>,
    /// Independently recomputed `λ_max` at `u`.
    pub certificate: f64,
    /// Total Newton steps.
    pub iterations: usize,
}

/// Pins a strict-lower entry of `W`: `w_ij = value` for `i > j`
/// (0-based indices).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pin {
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

impl Pin {
    /// Zeros below the first subdiagonal, as for a block-tridiagonal
    /// coupling where blocks more than one apart never interact.
    pub fn banded(m: usize) -> Vec<Pin> {
        let mut pins = Vec::new();
        for i in 0..m {
            for j in 0..i.saturating_sub(1) {
                pins.push(Pin { i, j, value: 0.0 });
            }
        }
        pins
    }
}

/// The design matrix `U(u) + uuᵀ + D − I`.
pub fn design_matrix(u: &[f64], d: &[bool]) -> Result<DenseMatrix> {
    if u.len() != d.len() {
        return Err(Error::Dimension(format!("u has {} entries, D has {}", u.len(), d.len())));
    }
    let m = u.len();
    Ok(DenseMatrix::from_fn(m, m, |i, j| {
        let mut v = 1.0 - u[i.max(j)] + u[i] * u[j];
        if i == j {
            v += if d[i] { 0.0 } else { -1.0 };
        }
        v
    }))
}

/// `λ_max(U(u) + uuᵀ + D − I)`.
pub fn sdp_objective(u: &[f64], d: &[bool]) -> Result<f64> {
    Ok(sym_eig(&design_matrix(u, d)?)?.max())
}

/// Free parameters after applying pins: `u_k = p[comp[k]] + offset[k]`.
struct Reduction {
    comp: Vec<usize>,
    offset: Vec<f64>,
    n_free: usize,
}

fn reduce(m: usize, pins: &[Pin]) -> Result<Reduction> {
    // union-find with potentials: pot[k] = u_k − u_parent(k)
    let mut parent: Vec<usize> = (0..m).collect();
    let mut pot = vec![0.0; m];
    fn find(k: usize, parent: &mut [usize], pot: &mut [f64]) -> (usize, f64) {
        let mut path = Vec::new();
        let mut r = k;
        while parent[r] != r {
            path.push(r);
            r = parent[r];
        }
        // compress, accumulating potentials from the root down
        let mut acc = 0.0;
        for &node in path.iter().rev() {
            acc += pot[node];
            pot[node] = acc;
            parent[node] = r;
        }
        (r, if k == r { 0.0 } else { pot[k] })
    }
    for pin in pins {
        if pin.i >= m || pin.j >= pin.i {
            return Err(Error::InvalidParameter(format!(
                "pin ({}, {}) is not a strict-lower entry of a {m}x{m} W",
                pin.i, pin.j
            )));
        }
        if !pin.value.is_finite() {
            return Err(Error::InvalidParameter("pin value must be finite".into()));
        }
        // w_ij = 1 + u_j − u_i  ⇒  u_i − u_j = 1 − w_ij
        let diff = 1.0 - pin.value;
        let (ri, pi) = find(pin.i, &mut parent, &mut pot);
        let (rj, pj) = find(pin.j, &mut parent, &mut pot);
        if ri == rj {
            if ((pi - pj) - diff).abs() > 1e-9 {
                return Err(Error::InfeasibleConstraints(format!(
                    "pinning w[{}][{}] = {} contradicts earlier pins (requires u_i − u_j = {}, have {})",
                    pin.i,
                    pin.j,
                    pin.value,
                    diff,
                    pi - pj
                )));
            }
        } else {
            // u_ri = u_i − pi = u_j + diff − pi = u_rj + pj + diff − pi
            parent[ri] = rj;
            pot[ri] = pj + diff - pi;
        }
    }
    let mut comp = vec![usize::MAX; m];
    let mut offset = vec![0.0; m];
    let mut root_id = vec![usize::MAX; m];
    let mut n_free = 0;
    for k in 0..m {
        let (r, p) = find(k, &mut parent, &mut pot);
        if root_id[r] == usize::MAX {
            root_id[r] = n_free;
            n_free += 1;
        }
        comp[k] = root_id[r];
        offset[k] = p;
    }
    Ok(Reduction { comp, offset, n_free })
}

/// Affine pieces of `F`: `F = base + σ·I_top + Σ_c p_c·dirs[c]`.
struct Lmi {
    base: DenseMatrix,
    dirs: Vec<DenseMatrix>,
}

fn assemble(m: usize, d: &[bool], red: &Reduction) -> Lmi {
    let n = m + 1;
    // contribution of u_k: +1 on entries with max(i, j) = k, and on the border
    let dir_k = |k: usize| {
        DenseMatrix::from_fn(n, n, |i, j| {
            if i < m && j < m {
                if i.max(j) == k {
                    1.0
                } else {
                    0.0
                }
            } else if (i == m && j == k) || (j == m && i == k) {
                1.0
            } else {
                0.0
            }
        })
    };
    let mut base = DenseMatrix::from_fn(n, n, |i, j| {
        if i == m && j == m {
            1.0
        } else if i == m || j == m {
            0.0
        } else {
            let eye = if i == j { 1.0 } else { 0.0 };
            let dd = if i == j && d[i] { 1.0 } else { 0.0 };
            eye - dd - 1.0
        }
    });
    let mut dirs = vec![DenseMatrix::zeros(n, n); red.n_free];
    for k in 0..m {
        let dk = dir_k(k);
        base = base.add(&dk.scaled(red.offset[k])).expect("same shape");
        dirs[red.comp[k]] = dirs[red.comp[k]].add(&dk).expect("same shape");
    }
    Lmi { base, dirs }
}

impl Lmi {
    fn eval(&self, sigma: f64, p: &[f64]) -> DenseMatrix {
        let n = self.base.rows();
        let mut f = self.base.clone();
        for i in 0..n - 1 {
            f.set(i, i, f.get(i, i) + sigma);
        }
        for (c, dir) in self.dirs.iter().enumerate() {
            if p[c] != 0.0 {
                for (fv, dv) in f.data_mut().iter_mut().zip(dir.data()) {
                    *fv += p[c] * dv;
                }
            }
        }
        f
    }
}

fn u_from(p: &[f64], red: &Reduction) -> Vec<f64> {
    red.offset.iter().zip(&red.comp).map(|(o, &c)| o + p[c]).collect()
}

/// Solves the design problem, optionally with pinned entries of `W`.
pub fn solve_mixing_sdp(m: usize, d: &[bool], pins: &[Pin]) -> Result<SdpSolution> {
    if m == 0 {
        return Err(Error::InvalidParameter("need at least one block".into()));
    }
    if d.len() != m {
        return Err(Error::Dimension(format!("D has {} entries for m = {m}", d.len())));
    }
    let red = reduce(m, pins)?;
    let lmi = assemble(m, d, &red);
    let nv = 1 + red.n_free;
    let n = m + 1;

    let mut p = vec![0.0; red.n_free];
    let mut sigma = sdp_objective(&u_from(&p, &red), d)?.max(0.0) + 1.0;
    let mut t = 1.0;
    let mut iterations = 0;

    loop {
        // centering
        for _ in 0..MAX_NEWTON {
            let f = lmi.eval(sigma, &p);
            let chol = Cholesky::new(&f)?;
            let finv = chol.inverse();
            // K_a = F⁻¹ G_a; for σ, G_σ is the identity on the top block
            let mut ks = Vec::with_capacity(nv);
            ks.push(DenseMatrix::from_fn(n, n, |i, j| if j < m { finv.get(i, j) } else { 0.0 }));
            for dir in &lmi.dirs {
                ks.push(finv.matmul(dir)?);
            }
            let mut grad = vec![0.0; nv];
            for (a, k) in ks.iter().enumerate() {
                grad[a] = -k.trace();
            }
            grad[0] += t;
            let mut hess = DenseMatrix::zeros(nv, nv);
            for a in 0..nv {
                for b in a..nv {
                    let mut s = 0.0;
                    for i in 0..n {
                        for j in 0..n {
                            s += ks[a].get(i, j) * ks[b].get(j, i);
                        }
                    }
                    hess.set(a, b, s);
                    hess.set(b, a, s);
                }
            }
            let neg: Vec<f64> = grad.iter().map(|g| -g).collect();
            let step = match Cholesky::new(&hess) {
                Ok(c) => c.solve(&neg),
                Err(_) => Lu::new(&hess)?.solve(&neg),
            };
            let decrement: f64 = -grad.iter().zip(&step).map(|(g, s)| g * s).sum::<f64>();
            iterations += 1;
            if decrement / 2.0 <= 1e-12 {
                break;
            }
            // backtracking on the barrier, measured as a difference so large
            // t does not swamp it
            let logdet = chol.log_det();
            let mut s = 1.0;
            let mut accepted = false;
            for _ in 0..80 {
                let ns = sigma + s * step[0];
                let np: Vec<f64> = p.iter().zip(&step[1..]).map(|(v, dv)| v + s * dv).collect();
                if let Ok(c) = Cholesky::new(&lmi.eval(ns, &np)) {
                    let change = t * (ns - sigma) - (c.log_det() - logdet);
                    if change <= -0.25 * s * decrement {
                        sigma = ns;
                        p = np;
                        accepted = true;
                        break;
                    }
                }
                s *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if (n as f64) / t < GAP_TOL {
            break;
        }
        t *= 10.0;
    }

    let u = u_from(&p, &red);
    let certificate = sdp_objective(&u, d)?;
    Ok(SdpSolution { sigma: certificate, u, certificate, iterations })
}

impl MixingPlan {
    /// Solves the design problem and wraps the optimal `u` as a plan, with
    /// `d_max = max(σ*, 0) + D_MAX_MARGIN`.
    pub fn solve(d: Vec<bool>, pins: &[Pin]) -> Result<(Self, SdpSolution)> {
        let sol = solve_mixing_sdp(d.len(), &d, pins)?;
        let plan = MixingPlan {
            m: d.len(),
            w: construct_w(&sol.u),
            u: Some(sol.u.clone()),
            alpha: 1.0,
            d,
            d_max: sol.sigma.max(0.0) + D_MAX_MARGIN,
            sigma_star: Some(sol.sigma),
        };
        Ok((plan, sol))
    }
}
