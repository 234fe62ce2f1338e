use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::Exec;

use super::dense::DenseMatrix;
use super::operator::LinearOperator;
use super::vector::{norm, scale};

const POWER_TOL: f64 = 1e-13;
const POWER_MAX_ITERS: usize = 20_000;
const GELFAND_SQUARINGS: usize = 60;

/// Largest singular value of a dense matrix.
pub fn spectral_norm(m: &DenseMatrix) -> f64 {
    operator_norm(m)
}

/// Largest singular value of any linear operator, by power iteration on
/// `MᵀM`. Runs once from the all-ones vector and once from a fixed-seed
/// random vector and keeps the larger estimate, so a start vector that
/// happens to be orthogonal to the top singular direction cannot hide it.
pub fn operator_norm<M: LinearOperator + ?Sized>(m: &M) -> f64 {
    let n = m.ncols();
    if n == 0 || m.nrows() == 0 {
        return 0.0;
    }
    let ones = vec![1.0; n];
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let random: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    power_iteration(m, ones).max(power_iteration(m, random))
}

fn power_iteration<M: LinearOperator + ?Sized>(m: &M, mut x: Vec<f64>) -> f64 {
    let nx = norm(&x);
    if nx == 0.0 {
        return 0.0;
    }
    scale(1.0 / nx, &mut x);
    let mut y = vec![0.0; m.nrows()];
    let mut z = vec![0.0; m.ncols()];
    let mut prev = 0.0;
    let mut est = 0.0;
    for _ in 0..POWER_MAX_ITERS {
        m.apply_into(&x, &mut y, Exec::default());
        m.apply_t_into(&y, &mut z, Exec::default());
        // Rayleigh quotient of MᵀM at the unit vector x
        est = super::vector::dot(&y, &y);
        let nz = norm(&z);
        if nz == 0.0 {
            return 0.0;
        }
        for (xi, zi) in x.iter_mut().zip(&z) {
            *xi = zi / nz;
        }
        // the quotients never decrease in exact arithmetic, so a drop means
        // rounding noise has taken over
        if est <= prev {
            est = prev;
            break;
        }
        if est - prev <= POWER_TOL * est {
            break;
        }
        prev = est;
    }
    est.sqrt()
}

/// Spectral radius of a general square matrix through Gelfand's formula
/// `ρ(M) = lim ‖M^k‖^{1/k}`, evaluated at `k = 2^60` by repeated squaring.
/// Each square is renormalized and the log norms are accumulated, so the
/// power itself never overflows.
pub fn spectral_radius(m: &DenseMatrix) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    if !m.is_finite() {
        return Err(Error::RangeExceeded);
    }
    let mx = m.max_abs();
    if mx == 0.0 {
        return Ok(0.0);
    }
    if !mx.is_normal() {
        return Err(Error::RangeExceeded);
    }
    let unit = m.scaled(1.0 / mx);
    let f = unit.frobenius_norm();
    let mut b = unit.scaled(1.0 / f);
    // log ‖M^{2^k}‖ = log_norm, tracked through the normalized iterate b
    let mut log_norm = mx.ln() + f.ln();
    for _ in 0..GELFAND_SQUARINGS {
        let sq = b.matmul(&b).expect("square");
        let nrm = sq.frobenius_norm();
        if nrm == 0.0 {
            // nilpotent
            return Ok(0.0);
        }
        if !nrm.is_normal() {
            return Err(Error::RangeExceeded);
        }
        log_norm = 2.0 * log_norm + nrm.ln();
        b = sq.scaled(1.0 / nrm);
    }
    let rho = (log_norm / (GELFAND_SQUARINGS as f64).exp2()).exp();
    if rho.is_finite() {
        Ok(rho)
    } else {
        Err(Error::RangeExceeded)
    }
}
