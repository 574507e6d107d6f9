//! Euclidean projection onto ℓ1 balls (sort-and-soft-threshold).

use super::SieveNetwork;
use crate::error::{Error, Result};

/// Euclidean projection of `v` onto the ℓ1 ball of the given radius.
///
/// Feasible inputs are returned unchanged (exactly). Otherwise the standard
/// sort-based soft-threshold is applied: with `u` the absolute values sorted
/// descending and `c_k` their prefix sums, the threshold is
/// `θ = (c_ρ - radius)/ρ` for the largest `ρ` with `u_ρ > (c_ρ - radius)/ρ`,
/// and the projection is `sign(v_i) · max(|v_i| - θ, 0)`.
pub fn project_l1(v: &[f64], radius: f64) -> Result<Vec<f64>> {
    if !radius.is_finite() || radius <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "l1 radius must be finite and > 0, got {radius}"
        )));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("l1 projection input".into()));
    }
    let mut out = v.to_vec();
    let mut scratch = Vec::new();
    project_l1_in_place(&mut out, radius, &mut scratch);
    Ok(out)
}

/// In-place projection kernel. Assumes finite input and positive radius.
///
/// The output ℓ1 norm is at most `radius` exactly (not just up to rounding):
/// after soft-thresholding, any rounding excess is folded back into the
/// threshold, so re-projecting a projected vector takes the feasible early
/// return and the operation is bit-exactly idempotent.
pub(crate) fn project_l1_in_place(v: &mut [f64], radius: f64, scratch: &mut Vec<f64>) {
    let norm: f64 = v.iter().map(|x| x.abs()).sum();
    if norm <= radius {
        return;
    }
    scratch.clear();
    scratch.extend(v.iter().map(|x| x.abs()));
    scratch.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    let mut surviving = scratch.len();
    for (k, &u) in scratch.iter().enumerate() {
        cum += u;
        let cand = (cum - radius) / (k + 1) as f64;
        if u > cand {
            theta = cand;
            surviving = k + 1;
        } else {
            break;
        }
    }
    for _ in 0..64 {
        let mut out_norm = 0.0;
        for x in v.iter() {
            out_norm += (x.abs() - theta).max(0.0);
        }
        if out_norm <= radius {
            break;
        }
        let corrected = theta + (out_norm - radius) / surviving as f64;
        // Guard against an underflowing correction stalling the loop.
        theta = if corrected > theta {
            corrected
        } else {
            f64::from_bits(theta.to_bits() + 1)
        };
    }
    for x in v.iter_mut() {
        *x = x.signum() * (x.abs() - theta).max(0.0);
    }
}

/// Project every budgeted block of the network: the output block
/// `(α₀, α₁..α_r)` with radius `V`, then each unit's `(γ_{0,j}, γ_{·,j})`
/// with radius `M`. Blocks are independent, so the result is the Euclidean
/// projection onto the product of the budget sets.
pub(crate) fn project_net_in_place(
    net: &mut SieveNetwork,
    block: &mut Vec<f64>,
    scratch: &mut Vec<f64>,
) {
    let d = net.d();
    block.clear();
    block.push(net.alpha0);
    block.extend_from_slice(&net.alphas);
    project_l1_in_place(block, net.v_budget(), scratch);
    net.alpha0 = block[0];
    net.alphas.copy_from_slice(&block[1..]);

    let m = net.m_budget();
    for j in 0..net.r() {
        block.clear();
        block.push(net.gamma0s[j]);
        block.extend_from_slice(&net.gammas[j * d..(j + 1) * d]);
        project_l1_in_place(block, m, scratch);
        net.gamma0s[j] = block[0];
        net.gammas[j * d..(j + 1) * d].copy_from_slice(&block[1..]);
    }
}
