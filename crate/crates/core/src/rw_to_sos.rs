//! Walk -> line translations: the +-1 construction through an edge coupling,
//! acceptance-rule (Metropolis) walks with reflecting or soft walls, and
//! bounded general-step walks over a symmetric base kernel.
//!
//! Every constructor here comes in pairs: a kernel builder and an energy
//! builder, arranged so that for any bridge x_0 = x_N = 0 the walk
//! probability prod P(x_{n+1}|x_n) equals the unconditioned Gibbs weight
//! exp(N * log_step_factor - sum W - sum V) exactly. Tests in the bridge
//! module enumerate paths and compare the two laws.

use crate::error::{Error, Result};
use crate::model::{
    EdgeCoupling, EdgeEnergies, KernelStructure, SosModel, WalkKernel, WallMode,
};

/// Recover the edge coupling from +-1 rates.
///
/// `p[x]` and `q[x]` are the up/down probabilities at site x; index 0 is
/// ignored (the wall row is deterministic). The rates only pin the sums
/// phi(x-1/2) + phi(x+1/2) = ln(q_x / p_x), so the first value is a free
/// gauge choice supplied as `phi_half`; the recursion
/// phi(x+1/2) = -phi(x-1/2) + ln(q_x/p_x) does the rest.
pub fn phi_from_rates(p: &[f64], q: &[f64], phi_half: f64) -> Result<EdgeCoupling> {
    if p.len() != q.len() || p.len() < 2 {
        return Err(Error::InvalidInput("need matching rate sequences over sites 0..M".into()));
    }
    let mut phi = Vec::with_capacity(p.len());
    phi.push(phi_half);
    for x in 1..p.len() {
        if !(p[x] > 0.0 && p[x] < 1.0 && q[x] > 0.0 && q[x] < 1.0) {
            return Err(Error::DegenerateRate { index: x });
        }
        if (p[x] + q[x] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "rates at site {x} sum to {} instead of 1",
                p[x] + q[x]
            )));
        }
        phi.push(-phi[x - 1] + (q[x] / p[x]).ln());
    }
    EdgeCoupling::new(phi)
}

/// +-1 walk on {0..M} (M = number of edges) driven by the coupling:
/// p_x = e^{-phi(x+1/2)} / D(x), q_x = e^{phi(x-1/2)} / D(x) with
/// D(x) = e^{-phi(x+1/2)} + e^{phi(x-1/2)}, and deterministic reflection
/// P(1|0) = 1. Rates are evaluated as logistic functions of
/// s_x = phi(x-1/2) + phi(x+1/2), which keeps both tails accurate.
/// The cutoff row reuses its inner coupling for the missing edge and
/// redirects the up-step to holding.
pub fn kernel_from_phi(phi: &EdgeCoupling) -> WalkKernel {
    let m = phi.len();
    let stride = 3;
    let mut rows = vec![0.0; (m + 1) * stride];
    rows[2] = 1.0;
    for x in 1..=m {
        let s = if x < m { phi.at(x - 1) + phi.at(x) } else { 2.0 * phi.at(m - 1) };
        let q = 1.0 / (1.0 + (-s).exp());
        rows[x * stride] = q;
        if x < m {
            rows[x * stride + 2] = 1.0 / (1.0 + s.exp());
        } else {
            rows[x * stride + 1] = 1.0 - q;
        }
    }
    WalkKernel::from_banded(m, 1, rows, KernelStructure::NearestNeighbor, WallMode::Reflect)
        .expect("storage sized above")
}

/// Line model equivalent to [`kernel_from_phi`]: nearest-neighbor edges all
/// carry W = ln 2, and the site potential is
/// V(0) = -(ln 2 + phi(1/2)),
/// V(X) = ln[(e^{-phi(X+1/2)} + e^{phi(X-1/2)}) / 2] for X >= 1.
/// Pairing each down-crossing of an edge with its up-crossing cancels the
/// drift along any bridge, which is what makes the two laws equal.
pub fn sos_from_phi(phi: &EdgeCoupling) -> SosModel {
    let m = phi.len();
    let mut v = Vec::with_capacity(m + 1);
    v.push(-((2.0f64).ln() + phi.at(0)));
    for x in 1..=m {
        let up = if x < m { phi.at(x) } else { phi.at(m - 1) };
        v.push((((-up).exp() + phi.at(x - 1).exp()) / 2.0).ln());
    }
    let mut w = EdgeEnergies::new_forbidden(m, 1);
    for x in 0..m {
        w.set(x, x + 1, (2.0f64).ln());
    }
    let model = SosModel::new(v, w, 0.0).expect("lengths match by construction");
    match phi.tail() {
        Some(t) => model.with_tail(t),
        None => model,
    }
}

fn check_hold_factor(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta <= 0.5) {
        return Err(Error::BadHoldFactor(theta));
    }
    Ok(())
}

/// Acceptance factor e^{-(U(y)-U(x))_+} for a proposed move, with anything
/// outside {0..m} rejected outright.
fn acceptance(u: &[f64], x: usize, y: i64) -> f64 {
    if y < 0 || y as usize >= u.len() {
        return 0.0;
    }
    let d = u[y as usize] - u[x];
    if d > 0.0 {
        (-d).exp()
    } else {
        1.0
    }
}

/// Lazy +-1 walk with acceptance rule
/// P(x+-1 | x) = theta e^{-(U(x+-1)-U(x))_+}, the rest of the mass holding,
/// and deterministic reflection P(1|0) = 1 at the wall. `theta` is the
/// proposal weight per side; any value in (0, 1/2] keeps the holding mass
/// nonnegative.
pub fn metropolis_reflect_kernel(u: &[f64], theta: f64) -> Result<WalkKernel> {
    check_hold_factor(theta)?;
    if u.len() < 2 {
        return Err(Error::InvalidInput("need at least two sites".into()));
    }
    let mut rows = metropolis_bulk(u, theta);
    rows[0] = 0.0;
    rows[1] = 0.0;
    rows[2] = 1.0;
    WalkKernel::from_banded(
        u.len() - 1,
        1,
        rows,
        KernelStructure::LazyNearestNeighbor,
        WallMode::Reflect,
    )
}

/// As [`metropolis_reflect_kernel`] but the wall row follows the same
/// acceptance rule: P(1|0) = theta e^{-(U(1)-U(0))_+}, remainder holds at 0.
pub fn metropolis_full_kernel(u: &[f64], theta: f64) -> Result<WalkKernel> {
    check_hold_factor(theta)?;
    if u.len() < 2 {
        return Err(Error::InvalidInput("need at least two sites".into()));
    }
    let rows = metropolis_bulk(u, theta);
    WalkKernel::from_banded(
        u.len() - 1,
        1,
        rows,
        KernelStructure::LazyNearestNeighbor,
        WallMode::MetropolisWall,
    )
}

/// Shared row builder: acceptance rows at every site including 0 (the
/// reflect variant overwrites row 0 afterwards). Holding mass is computed
/// as 1 - up - down in this exact order; the energy builder repeats the
/// same expression so both sides of the dictionary round identically.
fn metropolis_bulk(u: &[f64], theta: f64) -> Vec<f64> {
    let m = u.len() - 1;
    let stride = 3;
    let mut rows = vec![0.0; (m + 1) * stride];
    for x in 0..=m {
        let up = theta * acceptance(u, x, x as i64 + 1);
        let down = theta * acceptance(u, x, x as i64 - 1);
        rows[x * stride] = down;
        rows[x * stride + 1] = 1.0 - up - down;
        rows[x * stride + 2] = up;
    }
    rows
}

/// Line model equivalent to the acceptance walks. Off-diagonal energies are
/// W(x, x+1) = |U(x+1) - U(x)| / 2; diagonal energies absorb the holding
/// mass, W(x,x) = ln theta - ln(1 - up - down); the per-step factor theta
/// goes into log_step_factor. Under [`WallMode::Reflect`] the wall carries
/// V(0) = ln theta - (U(1)-U(0))_+ and cannot hold; under
/// [`WallMode::MetropolisWall`] V vanishes identically and the wall
/// information lives in W(0,0).
pub fn sos_from_metropolis(u: &[f64], wall_mode: WallMode, theta: f64) -> Result<SosModel> {
    check_hold_factor(theta)?;
    if u.len() < 2 {
        return Err(Error::InvalidInput("need at least two sites".into()));
    }
    let m = u.len() - 1;
    let mut w = EdgeEnergies::new_forbidden(m, 1);
    for x in 0..m {
        w.set(x, x + 1, 0.5 * (u[x + 1] - u[x]).abs());
    }
    for x in 0..=m {
        if x == 0 && wall_mode == WallMode::Reflect {
            continue;
        }
        let up = theta * acceptance(u, x, x as i64 + 1);
        let down = theta * acceptance(u, x, x as i64 - 1);
        let hold = 1.0 - up - down;
        if hold > 0.0 {
            w.set(x, x, theta.ln() - hold.ln());
        } else if hold >= -1e-12 {
            log::warn!("holding mass vanishes at site {x}; emitting a forbidden diagonal");
        } else {
            return Err(Error::NonpositiveHoldMass { index: x });
        }
    }
    let mut v = vec![0.0; m + 1];
    if wall_mode == WallMode::Reflect {
        v[0] = theta.ln() - (u[1] - u[0]).max(0.0);
    }
    SosModel::new(v, w, theta.ln())
}

/// Symmetric translation-invariant base step: half-step weights
/// w_k = e^{-W0(x, x+-k)} for k = 0..=band with w_0 + 2 sum_{k>=1} w_k = 1,
/// i.e. the base kernel is stochastic on the unrestricted lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseStepKernel {
    weights: Vec<f64>,
}

impl BaseStepKernel {
    /// `weights[k]` is the weight of a +-k step (index 0 the diagonal).
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::BadBaseKernel { detail: "need at least one moving step".into() });
        }
        if weights.iter().any(|&w| !(w.is_finite() && w >= 0.0)) {
            return Err(Error::BadBaseKernel { detail: "weights must be finite and nonnegative".into() });
        }
        if weights.iter().skip(1).all(|&w| w == 0.0) {
            return Err(Error::BadBaseKernel { detail: "all moving steps have zero weight".into() });
        }
        let total = weights[0] + 2.0 * weights.iter().skip(1).sum::<f64>();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::BadBaseKernel {
                detail: format!("base row sums to {total}, expected 1"),
            });
        }
        Ok(BaseStepKernel { weights })
    }

    /// Exponentially decaying steps w_k proportional to e^{-j k} for
    /// 1 <= k <= band, no diagonal, normalized exactly.
    pub fn geometric(j: f64, band: usize) -> Result<Self> {
        if band == 0 || !j.is_finite() {
            return Err(Error::BadBaseKernel { detail: "need band >= 1 and finite rate".into() });
        }
        let raw: Vec<f64> = (1..=band).map(|k| (-j * k as f64).exp()).collect();
        let norm = 2.0 * raw.iter().sum::<f64>();
        let mut weights = vec![0.0];
        weights.extend(raw.iter().map(|&w| w / norm));
        BaseStepKernel::new(weights)
    }

    /// The lazy-free +-1 base: weight 1/2 per side.
    pub fn nearest_neighbor() -> Self {
        BaseStepKernel { weights: vec![0.0, 0.5] }
    }

    pub fn band(&self) -> usize {
        self.weights.len() - 1
    }

    /// Weight of a step of signed size `k`.
    pub fn weight(&self, k: i64) -> f64 {
        let a = k.unsigned_abs() as usize;
        if a < self.weights.len() {
            self.weights[a]
        } else {
            0.0
        }
    }

    /// Base energy W0 of a step of size `k`; `None` where the weight is 0.
    pub fn energy(&self, k: i64) -> Option<f64> {
        let w = self.weight(k);
        if w > 0.0 {
            Some(-w.ln())
        } else {
            None
        }
    }
}

/// General-step acceptance walk P(y|x) = w_{|y-x|} e^{-(U(y)-U(x))_+} for
/// y != x inside {0..M}; all rejected or out-of-range proposal mass sits on
/// the diagonal. Reversibility with respect to e^{-U} is exact because the
/// base weight is symmetric in (x, y).
pub fn general_metropolis_kernel(base: &BaseStepKernel, u: &[f64]) -> Result<WalkKernel> {
    if u.len() < 2 {
        return Err(Error::InvalidInput("need at least two sites".into()));
    }
    let m = u.len() - 1;
    let band = base.band();
    let stride = 2 * band + 1;
    let mut rows = vec![0.0; (m + 1) * stride];
    for x in 0..=m {
        let mut moved = 0.0;
        for k in 1..=band as i64 {
            for s in [-k, k] {
                let p = base.weight(s) * acceptance(u, x, x as i64 + s);
                rows[x * stride + (band as i64 + s) as usize] = p;
                moved += p;
            }
        }
        rows[x * stride + band] = base.weight(0) + (1.0 - base.weight(0) - moved);
    }
    WalkKernel::from_banded(m, band, rows, KernelStructure::GeneralStep, WallMode::MetropolisWall)
}

/// Line model equivalent to [`general_metropolis_kernel`]:
/// W(x, y) = W0(|x-y|) + |U(y) - U(x)| / 2 off the diagonal and
/// W(x, x) = -ln P(x|x) with the same holding mass the kernel computes;
/// V vanishes and there is no per-step convention factor.
pub fn sos_from_general(base: &BaseStepKernel, u: &[f64]) -> Result<SosModel> {
    if u.len() < 2 {
        return Err(Error::InvalidInput("need at least two sites".into()));
    }
    let m = u.len() - 1;
    let band = base.band();
    let mut w = EdgeEnergies::new_forbidden(m, band);
    for x in 0..=m {
        for k in 1..=band {
            let y = x + k;
            if y > m {
                break;
            }
            if let Some(w0) = base.energy(k as i64) {
                w.set(x, y, w0 + 0.5 * (u[y] - u[x]).abs());
            }
        }
        let mut moved = 0.0;
        for k in 1..=band as i64 {
            for s in [-k, k] {
                moved += base.weight(s) * acceptance(u, x, x as i64 + s);
            }
        }
        let hold = base.weight(0) + (1.0 - base.weight(0) - moved);
        if hold > 0.0 {
            w.set(x, x, -hold.ln());
        } else if hold >= -1e-12 {
            log::warn!("holding mass vanishes at site {x}; emitting a forbidden diagonal");
        } else {
            return Err(Error::NonpositiveHoldMass { index: x });
        }
    }
    SosModel::new(vec![0.0; m + 1], w, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{detailed_balance_residual, detailed_balance_residual_above, reversing_potential};
    use crate::presets::{log_potential, power_tail_phi};

    #[test]
    fn flat_coupling_gives_symmetric_rates() {
        let phi = EdgeCoupling::new(vec![0.0; 16]).unwrap();
        let k = kernel_from_phi(&phi);
        assert_eq!(k.prob(0, 1), 1.0);
        for x in 1..15 {
            assert_eq!(k.prob(x, x + 1), 0.5);
            assert_eq!(k.prob(x, x - 1), 0.5);
        }
        assert!(k.validate().is_empty());
    }

    #[test]
    fn power_tail_rates_match_closed_form() {
        // q_1 - p_1 = tanh((phi(1/2) + phi(3/2)) / 2).
        let phi = power_tail_phi(1.2, 0.0, 32);
        let k = kernel_from_phi(&phi);
        let expected = ((1.2f64 + 0.4) / 2.0).tanh();
        assert!((k.prob(1, 0) - k.prob(1, 2) - expected).abs() < 1e-15);
        assert!((expected - 0.6640367702678491).abs() < 1e-15);
        assert!(k.validate().is_empty());
    }

    #[test]
    fn rates_roundtrip_through_the_coupling() {
        let phi = power_tail_phi(0.5, 0.0, 40);
        let k = kernel_from_phi(&phi);
        let p: Vec<f64> = (0..40).map(|x| k.prob(x, x + 1)).collect();
        let q: Vec<f64> = (0..40).map(|x| if x > 0 { k.prob(x, x - 1) } else { 0.0 }).collect();
        let back = phi_from_rates(&p, &q, phi.at(0)).unwrap();
        for x in 0..40 {
            assert!((back.at(x) - phi.at(x)).abs() < 1e-13, "phi[{x}]");
        }
    }

    #[test]
    fn alternating_gauge_for_symmetric_rates() {
        let p = vec![0.5; 8];
        let q = vec![0.5; 8];
        let phi = phi_from_rates(&p, &q, 0.7).unwrap();
        for x in 0..8 {
            let want = if x % 2 == 0 { 0.7 } else { -0.7 };
            assert!((phi.at(x) - want).abs() < 1e-15);
        }
    }

    #[test]
    fn degenerate_rates_are_rejected() {
        let p = vec![0.5, 1.0, 0.5];
        let q = vec![0.5, 0.0, 0.5];
        match phi_from_rates(&p, &q, 0.0) {
            Err(Error::DegenerateRate { index: 1 }) => {}
            other => panic!("expected degenerate rate at 1, got {other:?}"),
        }
    }

    #[test]
    fn flat_coupling_potential_is_a_wall_well() {
        let phi = EdgeCoupling::new(vec![0.0; 12]).unwrap();
        let m = sos_from_phi(&phi);
        assert!((m.potential()[0] + (2.0f64).ln()).abs() < 1e-15);
        for x in 1..=12 {
            assert_eq!(m.potential()[x], 0.0);
        }
        assert!((m.energies().get(3, 4).unwrap() - (2.0f64).ln()).abs() < 1e-15);
        assert!(m.energies().get(3, 3).is_none());
        assert_eq!(m.log_step_factor(), 0.0);
    }

    #[test]
    fn power_tail_potential_values() {
        let phi = power_tail_phi(1.2, 0.0, 64);
        let m = sos_from_phi(&phi);
        assert!((m.potential()[0] - (-1.8931471805599451)).abs() < 1e-15);
        assert!((m.potential()[10] - 0.004815462843340352).abs() < 1e-15);
        // Leading tail coefficient delta(2+delta)/8.
        let x = 50.0f64;
        let ratio = 8.0 * x * x * m.potential()[50] / (1.2 * 3.2);
        assert!((ratio - 1.0).abs() < 3.0 / x, "ratio {ratio}");
    }

    #[test]
    fn walk_potential_reverses_the_power_tail_kernel() {
        let phi = power_tail_phi(1.2, 0.5, 48);
        let k = kernel_from_phi(&phi);
        let u = reversing_potential(&k).unwrap();
        assert!(detailed_balance_residual(&k, &u) < 1e-15);
    }

    #[test]
    fn reflect_acceptance_rows() {
        let u = log_potential(1.0, 12);
        let k = metropolis_reflect_kernel(&u, 0.5).unwrap();
        assert_eq!(k.prob(0, 1), 1.0);
        assert!((k.prob(1, 2) - 1.0 / 3.0).abs() < 1e-15);
        assert!((k.prob(1, 0) - 0.5).abs() < 1e-15);
        assert!((k.prob(1, 1) - 1.0 / 6.0).abs() < 1e-15);
        assert!(k.validate().is_empty());
        // Balance holds in the bulk; the reflecting row is exempt.
        assert!(detailed_balance_residual_above(&k, &u, 1) < 1e-16);
    }

    #[test]
    fn flat_potential_reflect_walk_has_no_holding() {
        let u = vec![0.0; 10];
        let k = metropolis_reflect_kernel(&u, 0.5).unwrap();
        for x in 1..9 {
            assert_eq!(k.prob(x, x + 1), 0.5);
            assert_eq!(k.prob(x, x - 1), 0.5);
            assert_eq!(k.prob(x, x), 0.0);
        }
    }

    #[test]
    fn full_wall_acceptance_rows() {
        let u = log_potential(1.0, 12);
        let k = metropolis_full_kernel(&u, 0.5).unwrap();
        assert!((k.prob(0, 1) - 0.25).abs() < 1e-15);
        assert!((k.prob(0, 0) - 0.75).abs() < 1e-15);
        assert!(k.validate().is_empty());
        assert!(detailed_balance_residual(&k, &u) < 1e-16);

        let flat = metropolis_full_kernel(&vec![0.0; 8], 0.5).unwrap();
        assert_eq!(flat.prob(0, 1), 0.5);
        assert_eq!(flat.prob(0, 0), 0.5);
    }

    #[test]
    fn hold_factor_domain() {
        let u = vec![0.0; 4];
        assert!(matches!(metropolis_reflect_kernel(&u, 0.6), Err(Error::BadHoldFactor(_))));
        assert!(matches!(metropolis_reflect_kernel(&u, 0.0), Err(Error::BadHoldFactor(_))));
        assert!(metropolis_reflect_kernel(&u, 0.25).is_ok());
    }

    #[test]
    fn acceptance_energies_match_known_values() {
        let u = log_potential(1.0, 12);
        let m = sos_from_metropolis(&u, WallMode::Reflect, 0.5).unwrap();
        assert!((m.potential()[0] - (-2.0 * (2.0f64).ln())).abs() < 1e-15);
        assert_eq!(m.potential()[1], 0.0);
        assert!((m.energies().get(1, 1).unwrap() - (3.0f64).ln()).abs() < 1e-15);
        assert!((m.energies().get(1, 2).unwrap() - 0.5 * (1.5f64).ln()).abs() < 1e-15);
        assert!(m.energies().get(0, 0).is_none());
        assert!((m.log_step_factor() - 0.5f64.ln()).abs() < 1e-15);

        let full = sos_from_metropolis(&u, WallMode::MetropolisWall, 0.5).unwrap();
        assert!((full.energies().get(0, 0).unwrap() - (-(1.5f64).ln())).abs() < 1e-15);
        assert!(full.potential().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn flat_lazy_walk_has_forbidden_diagonal() {
        // With theta = 1/2 and flat U the holding mass is exactly zero in
        // the bulk, so the diagonal energy must be forbidden, not huge.
        let m = sos_from_metropolis(&vec![0.0; 9], WallMode::Reflect, 0.5).unwrap();
        assert!(m.energies().get(3, 3).is_none());
        // The cutoff row still holds the redirected up-step.
        assert!(m.energies().get(8, 8).is_some());
    }

    #[test]
    fn nearest_neighbor_base_reproduces_the_acceptance_walk() {
        let u = log_potential(1.0, 10);
        let a = metropolis_full_kernel(&u, 0.5).unwrap();
        let b = general_metropolis_kernel(&BaseStepKernel::nearest_neighbor(), &u).unwrap();
        for x in 0..=10 {
            for y in 0..=10 {
                assert!((a.prob(x, y) - b.prob(x, y)).abs() < 1e-15, "({x},{y})");
            }
        }
    }

    #[test]
    fn geometric_base_walk_is_reversible_and_stochastic() {
        let base = BaseStepKernel::geometric(1.0, 4).unwrap();
        let total = base.weight(0) + 2.0 * (1..=4).map(|k| base.weight(k)).sum::<f64>();
        assert!((total - 1.0).abs() < 1e-15);
        let u = log_potential(2.0, 24);
        let k = general_metropolis_kernel(&base, &u).unwrap();
        assert!(k.validate().is_empty());
        assert!(detailed_balance_residual(&k, &u) < 1e-16);
    }

    #[test]
    fn general_energies_follow_the_split_rule() {
        let base = BaseStepKernel::geometric(1.0, 4).unwrap();
        let u = log_potential(2.0, 24);
        let m = sos_from_general(&base, &u).unwrap();
        // W(0,3) = W0(3) + |U(3) - U(0)| / 2 with U = 2 ln(X+1).
        let w03 = m.energies().get(0, 3).unwrap();
        assert!((w03 - (base.energy(3).unwrap() + (4.0f64).ln())).abs() < 1e-15);
        assert!((base.energy(3).unwrap() - 3.1333368791211407).abs() < 1e-12);
        // Flat potential leaves the base energies untouched off-diagonal.
        let flat = sos_from_general(&base, &vec![0.0; 12]).unwrap();
        assert_eq!(flat.energies().get(2, 4).unwrap(), base.energy(2).unwrap());
    }

    #[test]
    fn bad_base_kernels_are_rejected() {
        assert!(matches!(
            BaseStepKernel::new(vec![0.5, 0.5]),
            Err(Error::BadBaseKernel { .. })
        ));
        assert!(matches!(BaseStepKernel::new(vec![1.0, 0.0]), Err(Error::BadBaseKernel { .. })));
        assert!(BaseStepKernel::new(vec![0.0, 0.5]).is_ok());
        assert!(BaseStepKernel::new(vec![0.2, 0.25, 0.15]).is_ok());
    }
}
