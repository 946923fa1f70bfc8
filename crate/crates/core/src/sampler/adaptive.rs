//! Power-law model of PPR values within a target set and the residual
//! threshold it suggests for a fixed walk budget.

use crate::error::{Error, Result};

/// Model value of the `k`-th largest PPR score inside a target set of size
/// `t_size` whose total PPR mass is `pi_t`, assuming the scores follow a
/// power law with exponent `beta`:
/// `((1 − β) / |T|^{1−β}) · k^{−β} · π[T]`.
pub fn power_law_delta(t_size: usize, pi_t: f64, k: usize, beta: f64) -> Result<f64> {
    if k == 0 || k > t_size {
        return Err(Error::param(format!(
            "rank k={k} must be in [1, |T|={t_size}]"
        )));
    }
    check_beta(beta)?;
    let t = t_size as f64;
    Ok((1.0 - beta) / t.powf(1.0 - beta) * (k as f64).powf(-beta) * pi_t)
}

/// Walk-count constant `c₂ = k^β · c / (1 − β)`.
pub fn walk_constant(k: usize, beta: f64, c: f64) -> f64 {
    (k as f64).powf(beta) * c / (1.0 - beta)
}

/// Residual threshold for a target set given a fixed walk budget `w`:
/// `w · π[T] / (c₂ · |T|^{1−β})`.
pub fn adaptive_r_max(
    t_size: usize,
    pr_t: f64,
    w: f64,
    beta: f64,
    k: usize,
    c: f64,
) -> Result<f64> {
    check_beta(beta)?;
    if t_size == 0 || k == 0 || !(pr_t > 0.0) || !(w > 0.0) || !(c > 0.0) {
        return Err(Error::param(
            "adaptive r_max needs positive |T|, π[T], w, k and c",
        ));
    }
    let c2 = walk_constant(k, beta, c);
    Ok(w * pr_t / (c2 * (t_size as f64).powf(1.0 - beta)))
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta < 1.0 {
        Ok(())
    } else {
        Err(Error::param("power-law exponent beta must be in (0, 1)"))
    }
}
