//! Line -> walk inversions: the continued-fraction solution of the
//! potential equations, closed-form ansatz analysis for the square-well and
//! double-step wells, the Perron ground state of the symmetric transfer
//! kernel, and the constant-normalization walk it induces.

use crate::error::{Error, Result};
use crate::model::{
    EdgeCoupling, GroundState, KernelStructure, Regime, SosModel, WalkKernel, WallMode,
    reversing_potential,
};

/// Result of inverting a site potential into an up-weight sequence
/// a_X = e^{-phi(X+1/2)} at a fixed spectral parameter lambda.
#[derive(Debug, Clone)]
pub struct CfInversion {
    /// a[X] for X = 0..=M; all strictly positive on success.
    pub a: Vec<f64>,
    /// The edge coupling phi(X+1/2) = -ln a_X.
    pub phi: EdgeCoupling,
}

/// Solve the potential equations for the coupling by the continued
/// fraction: with b_X = e^{V(X)+lambda},
/// a_0 = 2 b_0 and a_X = 2 b_X - 1/a_{X-1},
/// which is exactly the evaluation order of the nested fraction. The
/// inversion is acceptable only while every a_X stays positive; the first
/// nonpositive index is reported otherwise.
///
/// The recursion's fixed point is repelling wherever the walk it encodes
/// drifts toward the wall, so in the pinned regime rounding errors grow
/// geometrically along X; callers validating against closed forms should
/// compare prefixes or recursion residuals, not deep tails.
pub fn continued_fraction_invert(v: &[f64], lambda: f64) -> Result<CfInversion> {
    if v.is_empty() {
        return Err(Error::InvalidInput("empty potential".into()));
    }
    let mut a = Vec::with_capacity(v.len());
    a.push(2.0 * (v[0] + lambda).exp());
    if a[0] <= 0.0 || !a[0].is_finite() {
        return Err(Error::PositivityFailure { index: 0 });
    }
    for x in 1..v.len() {
        let next = 2.0 * (v[x] + lambda).exp() - 1.0 / a[x - 1];
        if next <= 0.0 || !next.is_finite() {
            return Err(Error::PositivityFailure { index: x });
        }
        a.push(next);
    }
    let phi = EdgeCoupling::new(a.iter().map(|&c| -c.ln()).collect())?;
    Ok(CfInversion { a, phi })
}

/// Pointwise residuals of the potential equations for a candidate
/// up-weight sequence: r_0 = |2 b_0 - a_0| and
/// r_X = |2 b_X - a_X - 1/a_{X-1}| for X >= 1. An exact ground-state
/// sequence satisfies these identically, so small residuals certify
/// consistency without running the unstable forward recursion.
pub fn cf_recursion_residual(v: &[f64], lambda: f64, a: &[f64]) -> Vec<f64> {
    let n = v.len().min(a.len());
    let mut r = Vec::with_capacity(n);
    if n == 0 {
        return r;
    }
    r.push((2.0 * (v[0] + lambda).exp() - a[0]).abs());
    for x in 1..n {
        r.push((2.0 * (v[x] + lambda).exp() - a[x] - 1.0 / a[x - 1]).abs());
    }
    r
}

/// The linear-fractional solution of the square-well inversion at rho = 1:
/// a_X = ((2b0 - 1) X + 2b0) / ((2b0 - 1) X + 1) with b0 = e^{v0}.
/// Positive for every X exactly when 2b0 >= 1, i.e. v0 >= -ln 2; the
/// coupling behaves like phi(x) ~ -1/x, a transient walk.
#[derive(Debug, Clone, Copy)]
pub struct SquareWellFirstAnsatz {
    pub two_b0: f64,
}

impl SquareWellFirstAnsatz {
    pub fn a(&self, x: usize) -> f64 {
        let c = self.two_b0 - 1.0;
        (c * x as f64 + self.two_b0) / (c * x as f64 + 1.0)
    }
}

/// The constant solution of the square-well inversion:
/// a^{-2} = e^{-v0} - 1 (well-defined for v0 < 0), with
/// rho = (a + 1/a)/2; the sequence is a_X = a for every X including 0.
#[derive(Debug, Clone, Copy)]
pub struct SquareWellSecondAnsatz {
    pub a: f64,
    pub rho: f64,
}

/// Closed-form analysis of V = v0 at the wall, zero elsewhere.
#[derive(Debug, Clone)]
pub struct SquareWellAnalysis {
    pub v0: f64,
    /// Present iff v0 >= -ln 2.
    pub first_ansatz: Option<SquareWellFirstAnsatz>,
    /// Present iff v0 < 0.
    pub second_ansatz: Option<SquareWellSecondAnsatz>,
    pub regime: Regime,
    /// True on the transition point v0 = -ln 2.
    pub boundary: bool,
}

/// Classify the square well. The line unbinds (complete wetting) exactly
/// when v0 >= -ln 2; below that the constant solution has a < 1 and the
/// line is pinned.
pub fn square_well_analysis(v0: f64) -> SquareWellAnalysis {
    let ln2 = (2.0f64).ln();
    let first = if v0 >= -ln2 {
        Some(SquareWellFirstAnsatz { two_b0: 2.0 * v0.exp() })
    } else {
        None
    };
    let second = if v0 < 0.0 {
        let a = ((-v0).exp() - 1.0).powf(-0.5);
        Some(SquareWellSecondAnsatz { a, rho: 0.5 * (a + 1.0 / a) })
    } else {
        None
    };
    let regime = if v0 < -ln2 { Regime::PartialWetting } else { Regime::CompleteWetting };
    SquareWellAnalysis {
        v0,
        first_ansatz: first,
        second_ansatz: second,
        regime,
        boundary: (v0 + ln2).abs() <= 1e-12,
    }
}

/// One constant-tail solution of the double-step inversion: the value a of
/// a_X for X >= 1 and the spectral radius rho = (a + 1/a)/2 it implies
/// (the wall value is a_0 = 2 rho e^{v0}).
#[derive(Debug, Clone, Copy)]
pub struct DoubleStepRoot {
    pub a: f64,
    pub rho: f64,
}

/// Closed-form analysis of V = v0 at the wall and v1 one site above.
#[derive(Debug, Clone)]
pub struct DoubleStepAnalysis {
    pub v0: f64,
    pub v1: f64,
    /// Whether the rho = 1 solution stays positive: 4 e^{v1} >= 2 + e^{-v0}.
    pub first_ansatz_valid: bool,
    /// a_1 of the rho = 1 solution; the sequence is positive iff a_1 >= 1.
    pub first_a1: f64,
    /// Positive real roots a of
    /// a^4 (e^{v1} - 1) + a^2 (2 e^{v1} - e^{-v0} - 1) + e^{v1} = 0,
    /// ascending. In the pinned regime there is one for v1 <= 0 and two
    /// for v1 > 0.
    pub constant_roots: Vec<DoubleStepRoot>,
    /// Whether (v0, v1) lies in the constant-tail validity window:
    /// v1 <= 0 with any v0, or v1 >= 0, v0 <= 0, v1 <= 2 ln cosh(v0/2).
    pub constant_window: bool,
    pub regime: Regime,
    /// Signed distance proxy to the transition, v1 - ln((2 + e^{-v0})/4);
    /// negative in the pinned regime.
    pub boundary_distance: f64,
    pub boundary: bool,
}

/// Positive real roots in t of c4 t^2 + c2 t + c0 = 0, using the
/// cancellation-free quadratic formula; degenerates to the linear case
/// when c4 vanishes.
fn positive_quadratic_roots(c4: f64, c2: f64, c0: f64) -> Vec<f64> {
    let mut out = Vec::new();
    if c4 == 0.0 {
        if c2 != 0.0 {
            let t = -c0 / c2;
            if t > 0.0 {
                out.push(t);
            }
        }
        return out;
    }
    let disc = c2 * c2 - 4.0 * c4 * c0;
    if disc < 0.0 {
        return out;
    }
    let sq = disc.sqrt();
    let q = if c2 >= 0.0 { -0.5 * (c2 + sq) } else { -0.5 * (c2 - sq) };
    for t in [if q != 0.0 { q / c4 } else { 0.0 }, if q != 0.0 { c0 / q } else { 0.0 }] {
        if t > 0.0 && t.is_finite() {
            out.push(t);
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    out
}

/// Classify the double-step well. The transition sits at
/// 4 e^{v1} = 2 + e^{-v0}; below it (strict inequality reversed) the line
/// is pinned and only constant-tail solutions with a < 1 exist.
pub fn double_step_analysis(v0: f64, v1: f64) -> DoubleStepAnalysis {
    let e1 = v1.exp();
    let em0 = (-v0).exp();
    let first_a1 = 2.0 * e1 - 0.5 * em0;
    let lhs = 4.0 * e1;
    let rhs = 2.0 + em0;
    let roots: Vec<DoubleStepRoot> = positive_quadratic_roots(e1 - 1.0, 2.0 * e1 - em0 - 1.0, e1)
        .into_iter()
        .map(|t| {
            let a = t.sqrt();
            DoubleStepRoot { a, rho: 0.5 * (a + 1.0 / a) }
        })
        .collect();
    let constant_window = v1 <= 0.0
        || (v0 <= 0.0 && v1 <= 2.0 * (0.5 * v0).cosh().ln());
    let regime = if lhs < rhs { Regime::PartialWetting } else { Regime::CompleteWetting };
    DoubleStepAnalysis {
        v0,
        v1,
        first_ansatz_valid: lhs >= rhs,
        first_a1,
        constant_roots: roots,
        constant_window,
        regime,
        boundary_distance: v1 - (rhs / 4.0).ln(),
        boundary: (lhs - rhs).abs() <= 1e-12 * rhs,
    }
}

/// Number of eigenvalues of the symmetric tridiagonal matrix (d, e) that
/// lie strictly below sigma, by the standard pivoted recurrence.
fn sturm_count_below(d: &[f64], e: &[f64], sigma: f64) -> usize {
    let mut cnt = 0usize;
    let mut q = d[0] - sigma;
    if q < 0.0 {
        cnt += 1;
    }
    for i in 1..d.len() {
        let denom = if q == 0.0 { -f64::MIN_POSITIVE } else { q };
        q = d[i] - sigma - e[i - 1] * e[i - 1] / denom;
        if q < 0.0 {
            cnt += 1;
        }
    }
    cnt
}

/// Bisect for the largest eigenvalue of (d, e) to machine precision.
fn top_eigenvalue_bisect(d: &[f64], e: &[f64]) -> f64 {
    let n = d.len();
    if n == 1 {
        return d[0];
    }
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let left = if i > 0 { e[i - 1].abs() } else { 0.0 };
        let right = if i < n - 1 { e[i].abs() } else { 0.0 };
        hi = hi.max(d[i] + left + right);
        lo = lo.max(d[i]);
    }
    hi += 1e-12 * hi.abs().max(1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count_below(d, e, mid) >= n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solve (T - sigma I) x = b for tridiagonal T by LU with partial
/// pivoting. Exactly singular pivots are nudged so inverse iteration can
/// proceed; the caller renormalizes.
fn solve_shifted_tridiag(d: &[f64], e: &[f64], sigma: f64, b: &[f64]) -> Vec<f64> {
    let n = d.len();
    let tiny = 1e-300;
    let safe = |z: f64| if z == 0.0 { tiny } else { z };
    let mut dd: Vec<f64> = d.iter().map(|&x| x - sigma).collect();
    let mut du: Vec<f64> = e.to_vec();
    let mut dl: Vec<f64> = e.to_vec();
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    let mut swapped = vec![false; n.saturating_sub(1)];
    for i in 0..n - 1 {
        if dl[i].abs() <= dd[i].abs() {
            let f = dl[i] / safe(dd[i]);
            dl[i] = f;
            dd[i + 1] -= f * du[i];
            if i + 2 < n {
                du2[i] = 0.0;
            }
        } else {
            let f = dd[i] / dl[i];
            dd[i] = dl[i];
            dl[i] = f;
            let t = du[i];
            du[i] = dd[i + 1];
            dd[i + 1] = t - f * dd[i + 1];
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] *= -f;
            }
            swapped[i] = true;
        }
    }
    let mut x = b.to_vec();
    for i in 0..n - 1 {
        if swapped[i] {
            x.swap(i, i + 1);
        }
        let (xi, rest) = x.split_at_mut(i + 1);
        rest[0] -= dl[i] * xi[i];
    }
    x[n - 1] /= safe(dd[n - 1]);
    if n >= 2 {
        x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / safe(dd[n - 2]);
    }
    for i in (0..n.saturating_sub(2)).rev() {
        x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / safe(dd[i]);
    }
    x
}

fn tridiag_apply(d: &[f64], e: &[f64], v: &[f64], out: &mut [f64]) {
    let n = d.len();
    for i in 0..n {
        let mut acc = d[i] * v[i];
        if i > 0 {
            acc += e[i - 1] * v[i - 1];
        }
        if i + 1 < n {
            acc += e[i] * v[i + 1];
        }
        out[i] = acc;
    }
}

fn normalize_positive(v: &mut [f64]) {
    let mut idx = 0;
    let mut best = 0.0f64;
    for (i, &c) in v.iter().enumerate() {
        if c.abs() > best {
            best = c.abs();
            idx = i;
        }
    }
    let s = if v[idx] < 0.0 { -1.0 / best } else { 1.0 / best };
    for c in v.iter_mut() {
        *c *= s;
    }
}

/// Top eigenpair of a symmetric tridiagonal matrix with positive
/// off-diagonals: bisection on the inertia count isolates the eigenvalue,
/// inverse iteration recovers the eigenvector, and a Rayleigh quotient
/// sharpens the value.
fn perron_tridiagonal(d: &[f64], e: &[f64]) -> Result<(f64, Vec<f64>)> {
    let n = d.len();
    if n == 1 {
        return Ok((d[0], vec![1.0]));
    }
    if let Some(i) = e.iter().position(|&c| !(c > 0.0)) {
        return Err(Error::InvalidInput(format!(
            "transfer kernel is reducible: zero coupling between sites {i} and {}",
            i + 1
        )));
    }
    let lam = top_eigenvalue_bisect(d, e);
    let sigma = lam + 1e-13 * lam.abs().max(1.0);
    let mut v = vec![1.0; n];
    normalize_positive(&mut v);
    let mut rho = lam;
    let mut residual = f64::INFINITY;
    let mut tv = vec![0.0; n];
    // Each sweep damps non-dominant modes by about (sigma - lam) / gap.
    // The absolute residual converges after one or two sweeps, but entries
    // deep in the tail of a localized state need the contamination floor
    // pushed below their own magnitude, so iterate until consecutive
    // iterates agree entrywise down to the underflow region.
    const MAX_SWEEPS: usize = 60;
    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS {
        sweeps += 1;
        let mut w = solve_shifted_tridiag(d, e, sigma, &v);
        if w.iter().any(|c| !c.is_finite()) {
            // Overflowed solve: start over from a bland right-hand side.
            w = solve_shifted_tridiag(d, e, sigma, &vec![1.0 / n as f64; n]);
        }
        normalize_positive(&mut w);
        let settled = sweeps > 1
            && w
                .iter()
                .zip(&v)
                .all(|(a, b)| a.abs() <= 1e-280 || ((a - b) / a).abs() <= 1e-12);
        v = w;
        tridiag_apply(d, e, &v, &mut tv);
        let num: f64 = tv.iter().zip(&v).map(|(a, b)| a * b).sum();
        let den: f64 = v.iter().map(|c| c * c).sum();
        rho = num / den;
        residual = tv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - rho * b).abs())
            .fold(0.0f64, f64::max)
            / rho.abs().max(f64::MIN_POSITIVE);
        if settled && residual < 1e-12 {
            break;
        }
    }
    if residual > 1e-10 {
        return Err(Error::NoConvergence { iterations: sweeps, residual });
    }
    Ok((rho, v))
}

/// Top eigenpair of the banded symmetric kernel by shifted power
/// iteration; the +R/2 shift keeps bipartite kernels from oscillating.
fn perron_banded(m: &SosModel) -> Result<(f64, Vec<f64>)> {
    let n = m.cutoff() + 1;
    let band = m.band();
    let stride = 2 * band + 1;
    let mut k = vec![0.0; n * stride];
    let mut max_row = 0.0f64;
    for x in 0..n {
        let mut row_sum = 0.0;
        let lo = x.saturating_sub(band);
        let hi = (x + band).min(n - 1);
        for y in lo..=hi {
            let w = m.symmetric_kernel(x, y);
            k[x * stride + (band + y) - x] = w;
            row_sum += w;
        }
        max_row = max_row.max(row_sum);
    }
    let shift = 0.5 * max_row;
    let apply = |v: &[f64], out: &mut [f64]| {
        for x in 0..n {
            let lo = x.saturating_sub(band);
            let hi = (x + band).min(n - 1);
            let mut acc = shift * v[x];
            for y in lo..=hi {
                acc += k[x * stride + (band + y) - x] * v[y];
            }
            out[x] = acc;
        }
    };
    let mut v = vec![(n as f64).powf(-0.5); n];
    let mut w = vec![0.0; n];
    let mut prev = f64::INFINITY;
    const CAP: usize = 1_000_000;
    for it in 1..=CAP {
        apply(&v, &mut w);
        let num: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum();
        let norm = w.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidInput("transfer kernel annihilated the iterate".into()));
        }
        for (c, &s) in v.iter_mut().zip(w.iter()) {
            *c = s / norm;
        }
        let lam = num;
        if (lam - prev).abs() <= 1e-12 * lam.abs().max(1e-300) {
            apply(&v, &mut w);
            let rho = lam - shift;
            let residual = w
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - lam * b).abs())
                .fold(0.0f64, f64::max)
                / rho.abs().max(f64::MIN_POSITIVE);
            if residual < 1e-10 {
                normalize_positive(&mut v);
                return Ok((rho, v));
            }
            if it == CAP {
                return Err(Error::NoConvergence { iterations: it, residual });
            }
        }
        prev = lam;
    }
    Err(Error::NoConvergence { iterations: CAP, residual: f64::INFINITY })
}

/// Ground state of the symmetric transfer kernel
/// K(x,y) = e^{log_step_factor - W(x,y) - (V(x)+V(y))/2}: the largest
/// eigenvalue rho and the potential U of the positive eigenvector
/// e^{-U/2}, normalized by U(0) = 0. Eigenvector entries that underflow
/// come back as U = +inf; quantitative use should stay below cutoff/2.
pub fn perron_ground_state(m: &SosModel) -> Result<GroundState> {
    let (rho, v) = if m.band() <= 1 {
        let n = m.cutoff() + 1;
        let d: Vec<f64> = (0..n).map(|x| m.symmetric_kernel(x, x)).collect();
        let e: Vec<f64> = (0..n - 1).map(|x| m.symmetric_kernel(x, x + 1)).collect();
        perron_tridiagonal(&d, &e)?
    } else {
        perron_banded(m)?
    };
    GroundState::from_eigenvector(rho, &v)
}

/// Ground state certified by the walk itself: any row-stochastic reversible
/// kernel satisfies the transfer relation of its own reversibility energies
/// with rho = 1 and U the reversing potential, exactly.
pub fn ground_state_from_walk(k: &WalkKernel) -> Result<GroundState> {
    Ok(GroundState { rho: 1.0, u: reversing_potential(k)? })
}

/// A walk kernel rebuilt from a line model and a ground state, with the
/// per-row deviation diagnostics from before renormalization.
#[derive(Debug, Clone)]
pub struct TranslatedKernel {
    pub kernel: WalkKernel,
    /// |row sum - 1| of the raw constant-normalization rows; this is the
    /// pointwise eigen-relation residual, concentrated near the cutoff.
    /// Rows dropped for underflowed ground-state entries do not appear.
    pub row_sum_dev: Vec<f64>,
}

/// Constant-normalization walk induced by a ground state:
/// P(y|x) = e^{log_step_factor - W(x,y) - (V(x)+V(y))/2 - (U(y)-U(x))/2} / rho.
/// Rows are renormalized to machine-exact stochasticity after the deviation
/// is recorded; a bulk deviation beyond 1e-4 means the ground state does
/// not belong to this model. If the ground state underflows before the
/// cutoff the kernel is truncated to the finite prefix.
pub fn kernel_from_sos(m: &SosModel, g: &GroundState) -> Result<TranslatedKernel> {
    if g.u.len() != m.cutoff() + 1 {
        return Err(Error::InvalidInput(format!(
            "ground state covers {} sites but the model has {}",
            g.u.len(),
            m.cutoff() + 1
        )));
    }
    let finite_prefix = g.u.iter().position(|u| !u.is_finite()).unwrap_or(g.u.len());
    if finite_prefix < 2 {
        return Err(Error::InvalidInput("ground state unusable at the wall".into()));
    }
    let mm = finite_prefix - 1;
    if mm < m.cutoff() {
        log::warn!(
            "ground state underflows at site {}; translated kernel truncated there",
            finite_prefix
        );
    }
    let band = m.band();
    let stride = 2 * band + 1;
    let v = m.potential();
    let log_rho = g.rho.ln();
    let mut rows = vec![0.0; (mm + 1) * stride];
    let mut dev = Vec::with_capacity(mm + 1);
    for x in 0..=mm {
        let lo = x.saturating_sub(band);
        let hi = (x + band).min(mm);
        let mut sum = 0.0;
        for y in lo..=hi {
            if let Some(w) = m.energies().get(x, y) {
                let z = m.log_step_factor()
                    - w
                    - 0.5 * (v[x] + v[y])
                    - 0.5 * (g.u[y] - g.u[x])
                    - log_rho;
                let p = z.exp();
                rows[x * stride + (band + y) - x] = p;
                sum += p;
            }
        }
        if sum <= 0.0 {
            return Err(Error::InvalidInput(format!("site {x} has no allowed step")));
        }
        let deviation = (sum - 1.0).abs();
        if x <= mm / 2 && deviation > 1e-4 {
            return Err(Error::GroundStateMismatch { row: x, deviation });
        }
        dev.push(deviation);
        for y in lo..=hi {
            rows[x * stride + (band + y) - x] /= sum;
        }
    }
    let has_interior_diag = (0..mm).any(|x| m.energies().get(x, x).is_some());
    let structure = if band > 1 {
        KernelStructure::GeneralStep
    } else if has_interior_diag {
        KernelStructure::LazyNearestNeighbor
    } else {
        KernelStructure::NearestNeighbor
    };
    let wall_mode = if m.energies().get(0, 0).is_some() {
        WallMode::MetropolisWall
    } else {
        WallMode::Reflect
    };
    let kernel = WalkKernel::from_banded(mm, band, rows, structure, wall_mode)?;
    Ok(TranslatedKernel { kernel, row_sum_dev: dev })
}

/// Up-weight sequence implied by a ground state:
/// a_X = e^{-(U+V)(X+1)/2 + (U+V)(X)/2} for X = 0..cutoff-1. For an exact
/// eigenpair of a nearest-neighbor model this satisfies the continued
/// fraction recursion at lambda = ln rho identically; entries past an
/// underflowed U are +inf and should be ignored.
pub fn up_weight_sequence(m: &SosModel, g: &GroundState) -> Vec<f64> {
    let v = m.potential();
    (0..m.cutoff())
        .map(|x| (0.5 * (g.u[x] + v[x]) - 0.5 * (g.u[x + 1] + v[x + 1])).exp())
        .collect()
}
