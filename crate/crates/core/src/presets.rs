//! Named model families used across the crate and the CLI: the power-tail
//! edge coupling, logarithmic walk potentials, wall wells for the line
//! model, and the geometric base step.

use crate::error::{Error, Result};
use crate::model::{EdgeCoupling, EdgeEnergies, SosModel, TailCoupling};
use crate::rw_to_sos::BaseStepKernel;

/// Edge coupling phi(x) = delta/(2x) + gamma/x^2 evaluated on the
/// half-integers x = k + 1/2, k = 0..m-1, carrying its tail tag. The same
/// formula is used down to the wall; only the tail drives the phase, so
/// the small-x values are just a convenient smooth choice.
pub fn power_tail_phi(delta: f64, gamma: f64, m: usize) -> EdgeCoupling {
    let phi: Vec<f64> = (0..m)
        .map(|k| {
            let x = k as f64 + 0.5;
            delta / (2.0 * x) + gamma / (x * x)
        })
        .collect();
    EdgeCoupling::with_tail(phi, TailCoupling { delta, gamma })
        .expect("family values are finite for finite parameters")
}

/// Walk potential U(X) = delta ln(X+1) on {0..m}: the discrete stand-in for
/// a -delta/X drift under acceptance dynamics.
pub fn log_potential(delta: f64, m: usize) -> Vec<f64> {
    (0..=m).map(|x| delta * ((x + 1) as f64).ln()).collect()
}

/// Square-well site potential: V(0) = v0, zero elsewhere.
pub fn square_well(v0: f64, m: usize) -> Vec<f64> {
    let mut v = vec![0.0; m + 1];
    v[0] = v0;
    v
}

/// Double-step site potential: V(0) = v0, V(1) = v1, zero elsewhere.
pub fn double_step(v0: f64, v1: f64, m: usize) -> Vec<f64> {
    let mut v = vec![0.0; m + 1];
    v[0] = v0;
    if m >= 1 {
        v[1] = v1;
    }
    v
}

/// Geometric base step with rate j, truncated to |step| <= band (default
/// presentation uses band 4).
pub fn geometric_step(j: f64, band: usize) -> Result<BaseStepKernel> {
    BaseStepKernel::geometric(j, band)
}

/// Wrap a bare site potential into a nearest-neighbor line model with the
/// plain ln 2 edge energies and no per-step factor: the Gibbs form every
/// wall-well analysis in this crate works on.
pub fn nearest_neighbor_sos(v: Vec<f64>) -> Result<SosModel> {
    if v.is_empty() {
        return Err(Error::InvalidInput("need at least one site".into()));
    }
    let m = v.len() - 1;
    let mut w = EdgeEnergies::new_forbidden(m, 1);
    for x in 0..m {
        w.set(x, x + 1, (2.0f64).ln());
    }
    SosModel::new(v, w, 0.0)
}
