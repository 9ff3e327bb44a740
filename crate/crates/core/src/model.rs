//! Shared model types: truncated walk kernels on {0..M}, edge couplings,
//! solid-on-solid energy tables, ground states, bridge paths, and the
//! reversibility primitives connecting them.
//!
//! Conventions used throughout the crate:
//!
//! * State space is always the truncated lattice {0, 1, ..., cutoff}.
//!   Probability mass that a formula would send above the cutoff is
//!   redirected to staying put, which preserves both row sums and
//!   reversibility; tests therefore restrict quantitative assertions to
//!   states at most cutoff/2.
//! * Energies may be "forbidden" (the step simply cannot occur). That is an
//!   explicit `None`, never a large float, so exp(-W) is exactly zero.
//! * A path of length N under an energy table has Gibbs weight
//!   exp(N * log_step_factor) * prod exp(-W(x_n, x_{n+1})) * prod exp(-V(x_n)),
//!   with the V-product over the sites 1..=N. `log_step_factor` carries the
//!   per-step convention constant for translations whose walk carries holding
//!   (each step of a hold-factor-theta walk contributes one factor theta).

use crate::error::{Error, Result};

/// Sparsity class of a walk kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum KernelStructure {
    /// Steps of exactly +-1; holding is allowed only at the cutoff row,
    /// where the redirected up-step has to land somewhere.
    NearestNeighbor,
    /// Steps in {-1, 0, +1}.
    LazyNearestNeighbor,
    /// Bounded steps of any size within the band.
    GeneralStep,
}

/// Behavior of the wall row x = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum WallMode {
    /// Deterministic reflection: P(1|0) = 1 regardless of any hold factor.
    Reflect,
    /// The wall row follows the same acceptance rule as the bulk, so the
    /// walk may hold at 0.
    MetropolisWall,
}

/// Row-stochastic transition kernel on {0..cutoff} with banded support.
///
/// Storage is dense within the band: entry (x, x+k) lives at
/// `rows[x * (2 band + 1) + band + k]`. Out-of-lattice slots are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkKernel {
    cutoff: usize,
    band: usize,
    rows: Vec<f64>,
    structure: KernelStructure,
    wall_mode: WallMode,
}

/// One failed kernel invariant, naming the offending row/column and how far
/// off it is.
#[derive(Debug, Clone)]
pub struct KernelViolation {
    pub row: usize,
    pub col: Option<usize>,
    pub magnitude: f64,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    RowSum,
    NegativeEntry,
    NonFinite,
    OffStructure,
    WallRow,
}

impl std::fmt::Display for KernelViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.kind {
            ViolationKind::RowSum => {
                write!(f, "row {}: sum deviates from 1 by {:.3e}", self.row, self.magnitude)
            }
            ViolationKind::NegativeEntry => write!(
                f,
                "row {}, col {}: negative entry {:.3e}",
                self.row,
                self.col.unwrap_or(0),
                self.magnitude
            ),
            ViolationKind::NonFinite => {
                write!(f, "row {}, col {}: non-finite entry", self.row, self.col.unwrap_or(0))
            }
            ViolationKind::OffStructure => write!(
                f,
                "row {}, col {}: entry {:.3e} outside declared structure",
                self.row,
                self.col.unwrap_or(0),
                self.magnitude
            ),
            ViolationKind::WallRow => {
                write!(f, "row 0: reflecting wall requires P(1|0)=1, off by {:.3e}", self.magnitude)
            }
        }
    }
}

/// Row sums must match 1 to this tolerance for a kernel to validate.
pub const ROW_SUM_TOL: f64 = 1e-12;

impl WalkKernel {
    /// Build from banded rows. `rows[x][band + k]` is P(x+k | x); slots that
    /// point off the lattice must be zero. Rows are taken as given; call
    /// [`WalkKernel::validate`] to check the invariants.
    pub fn from_banded(
        cutoff: usize,
        band: usize,
        rows: Vec<f64>,
        structure: KernelStructure,
        wall_mode: WallMode,
    ) -> Result<Self> {
        let stride = 2 * band + 1;
        if rows.len() != (cutoff + 1) * stride {
            return Err(Error::InvalidInput(format!(
                "banded storage needs {} entries, got {}",
                (cutoff + 1) * stride,
                rows.len()
            )));
        }
        Ok(WalkKernel { cutoff, band, rows, structure, wall_mode })
    }

    /// Build from full dense rows (used by the JSON loader); the band is
    /// inferred from the widest nonzero step.
    pub fn from_dense(
        rows: &[Vec<f64>],
        structure: KernelStructure,
        wall_mode: WallMode,
    ) -> Result<Self> {
        let m = rows.len();
        if m == 0 {
            return Err(Error::InvalidInput("empty kernel".into()));
        }
        let cutoff = m - 1;
        let mut band = 1usize;
        for (x, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(Error::InvalidInput("kernel rows must be square".into()));
            }
            for (y, &p) in row.iter().enumerate() {
                if p != 0.0 {
                    band = band.max(x.abs_diff(y));
                }
            }
        }
        let stride = 2 * band + 1;
        let mut banded = vec![0.0; m * stride];
        for (x, row) in rows.iter().enumerate() {
            for (y, &p) in row.iter().enumerate() {
                if p != 0.0 {
                    let k = y as i64 - x as i64;
                    banded[x * stride + (band as i64 + k) as usize] = p;
                }
            }
        }
        WalkKernel::from_banded(cutoff, band, banded, structure, wall_mode)
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn band(&self) -> usize {
        self.band
    }

    pub fn structure(&self) -> KernelStructure {
        self.structure
    }

    pub fn wall_mode(&self) -> WallMode {
        self.wall_mode
    }

    /// P(y | x); zero outside the band or the lattice.
    pub fn prob(&self, x: usize, y: usize) -> f64 {
        if x > self.cutoff || y > self.cutoff {
            return 0.0;
        }
        let k = y as i64 - x as i64;
        if k.unsigned_abs() as usize > self.band {
            return 0.0;
        }
        self.rows[x * (2 * self.band + 1) + (self.band as i64 + k) as usize]
    }

    /// Nonzero transitions out of `x` as (target, probability), ascending.
    pub fn row(&self, x: usize) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        let lo = x.saturating_sub(self.band);
        let hi = (x + self.band).min(self.cutoff);
        for y in lo..=hi {
            let p = self.prob(x, y);
            if p > 0.0 {
                out.push((y, p));
            }
        }
        out
    }

    /// Dense row, mostly for serialization.
    pub fn dense_row(&self, x: usize) -> Vec<f64> {
        (0..=self.cutoff).map(|y| self.prob(x, y)).collect()
    }

    /// Check every kernel invariant; empty result means the kernel is sound.
    pub fn validate(&self) -> Vec<KernelViolation> {
        let mut v = Vec::new();
        for x in 0..=self.cutoff {
            let mut sum = 0.0;
            let lo = x.saturating_sub(self.band);
            let hi = (x + self.band).min(self.cutoff);
            for y in lo..=hi {
                let p = self.prob(x, y);
                if !p.is_finite() {
                    v.push(KernelViolation {
                        row: x,
                        col: Some(y),
                        magnitude: p,
                        kind: ViolationKind::NonFinite,
                    });
                    continue;
                }
                if p < 0.0 {
                    v.push(KernelViolation {
                        row: x,
                        col: Some(y),
                        magnitude: p,
                        kind: ViolationKind::NegativeEntry,
                    });
                }
                if p > 0.0 {
                    let step = y as i64 - x as i64;
                    let ok = match self.structure {
                        // The cutoff row may hold: the redirected up-step
                        // lands on the diagonal there.
                        KernelStructure::NearestNeighbor => {
                            step.abs() == 1 || (x == self.cutoff && step == 0)
                        }
                        KernelStructure::LazyNearestNeighbor => step.abs() <= 1,
                        KernelStructure::GeneralStep => true,
                    };
                    if !ok {
                        v.push(KernelViolation {
                            row: x,
                            col: Some(y),
                            magnitude: p,
                            kind: ViolationKind::OffStructure,
                        });
                    }
                }
                sum += p;
            }
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                v.push(KernelViolation {
                    row: x,
                    col: None,
                    magnitude: (sum - 1.0).abs(),
                    kind: ViolationKind::RowSum,
                });
            }
        }
        if self.wall_mode == WallMode::Reflect {
            let dev = (self.prob(0, 1) - 1.0).abs().max(self.prob(0, 0));
            if dev > ROW_SUM_TOL {
                v.push(KernelViolation { row: 0, col: Some(1), magnitude: dev, kind: ViolationKind::WallRow });
            }
        }
        v
    }
}

/// `validate_kernel(k)` — free-function form of [`WalkKernel::validate`].
pub fn validate_kernel(k: &WalkKernel) -> Vec<KernelViolation> {
    k.validate()
}

/// Worst violation of reversibility of `k` with respect to the potential
/// `u`: max over ordered pairs of |e^{-u(x)} P(y|x) - e^{-u(y)} P(x|y)|.
pub fn detailed_balance_residual(k: &WalkKernel, u: &[f64]) -> f64 {
    detailed_balance_residual_above(k, u, 0)
}

/// Same residual restricted to pairs with both states >= `min_state`.
/// Reflecting-wall kernels satisfy balance in the bulk but not at the wall
/// row when measured against the energy that generated them.
pub fn detailed_balance_residual_above(k: &WalkKernel, u: &[f64], min_state: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for x in min_state..=k.cutoff() {
        for s in 1..=k.band() {
            let y = x + s;
            if y > k.cutoff() {
                break;
            }
            let fwd = (-u[x]).exp() * k.prob(x, y);
            let bwd = (-u[y]).exp() * k.prob(y, x);
            worst = worst.max((fwd - bwd).abs());
        }
    }
    worst
}

/// Potential of the reversing measure of `k`, telescoped along the edges
/// (x, x+1) and normalized so u(0) = 0: exp(-u) satisfies
/// exp(-u(x)) P(x+1|x) = exp(-u(x+1)) P(x|x+1).
///
/// Requires two-way support on every consecutive edge. For a birth-death
/// kernel the result makes the full residual vanish; for wider bands the
/// caller should check [`detailed_balance_residual`] afterwards.
pub fn reversing_potential(k: &WalkKernel) -> Result<Vec<f64>> {
    let m = k.cutoff();
    let mut u = vec![0.0; m + 1];
    for x in 0..m {
        let up = k.prob(x, x + 1);
        let down = k.prob(x + 1, x);
        if up == 0.0 || down == 0.0 {
            return Err(Error::AsymmetricSupport { x, y: x + 1 });
        }
        u[x + 1] = u[x] + down.ln() - up.ln();
    }
    Ok(u)
}

/// Symmetric edge energies W(x, y) on {0..cutoff} with |x - y| <= band.
///
/// Only the upper half is stored, so W(x, y) and W(y, x) are the same
/// memory and symmetry is exact by construction. `None` marks a forbidden
/// step (infinite energy).
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeEnergies {
    cutoff: usize,
    band: usize,
    upper: Vec<Option<f64>>,
}

impl EdgeEnergies {
    /// All-forbidden table; fill with [`EdgeEnergies::set`].
    pub fn new_forbidden(cutoff: usize, band: usize) -> Self {
        EdgeEnergies { cutoff, band, upper: vec![None; (cutoff + 1) * (band + 1)] }
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn band(&self) -> usize {
        self.band
    }

    /// W(x, y), or `None` if the step is forbidden (off-band included).
    pub fn get(&self, x: usize, y: usize) -> Option<f64> {
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        if hi > self.cutoff || hi - lo > self.band {
            return None;
        }
        self.upper[lo * (self.band + 1) + (hi - lo)]
    }

    /// Set W(x, y) = W(y, x) = w.
    pub fn set(&mut self, x: usize, y: usize, w: f64) {
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        assert!(hi <= self.cutoff && hi - lo <= self.band, "edge out of range");
        self.upper[lo * (self.band + 1) + (hi - lo)] = Some(w);
    }

    pub fn set_forbidden(&mut self, x: usize, y: usize) {
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        assert!(hi <= self.cutoff && hi - lo <= self.band, "edge out of range");
        self.upper[lo * (self.band + 1) + (hi - lo)] = None;
    }
}

/// Asymptotic tag for couplings of the family phi(x) = delta/(2x) + gamma/x^2.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TailCoupling {
    pub delta: f64,
    pub gamma: f64,
}

impl TailCoupling {
    /// Leading large-X site potential this family induces:
    /// V(X) ~ delta (2 + delta) / (8 X^2), independent of gamma.
    pub fn potential_prediction(&self, x: f64) -> f64 {
        self.delta * (2.0 + self.delta) / (8.0 * x * x)
    }
}

/// Edge coupling phi on the half-integers: `phi[k]` is phi(k + 1/2), the
/// drift weight of the edge (k, k+1). A kernel built from it lives on
/// {0..len}.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeCoupling {
    phi: Vec<f64>,
    tail: Option<TailCoupling>,
}

impl EdgeCoupling {
    pub fn new(phi: Vec<f64>) -> Result<Self> {
        if phi.is_empty() {
            return Err(Error::InvalidInput("edge coupling needs at least one edge".into()));
        }
        if let Some(i) = phi.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("edge coupling entry {i} is not finite")));
        }
        Ok(EdgeCoupling { phi, tail: None })
    }

    pub fn with_tail(phi: Vec<f64>, tail: TailCoupling) -> Result<Self> {
        let mut c = EdgeCoupling::new(phi)?;
        c.tail = Some(tail);
        Ok(c)
    }

    /// phi(k + 1/2).
    pub fn at(&self, k: usize) -> f64 {
        self.phi[k]
    }

    pub fn values(&self) -> &[f64] {
        &self.phi
    }

    /// Number of edges; the matching kernel cutoff.
    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    pub fn tail(&self) -> Option<TailCoupling> {
        self.tail
    }
}

/// Solid-on-solid line model on {0..cutoff}: site potential V, edge
/// energies W, optional tail tag, and the per-step convention constant.
#[derive(Debug, Clone, PartialEq)]
pub struct SosModel {
    cutoff: usize,
    v: Vec<f64>,
    w: EdgeEnergies,
    tail: Option<TailCoupling>,
    log_step_factor: f64,
}

impl SosModel {
    pub fn new(v: Vec<f64>, w: EdgeEnergies, log_step_factor: f64) -> Result<Self> {
        if v.len() != w.cutoff() + 1 {
            return Err(Error::InvalidInput(format!(
                "potential has {} sites but energy table covers {}",
                v.len(),
                w.cutoff() + 1
            )));
        }
        if let Some(i) = v.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!("site potential at {i} is not finite")));
        }
        Ok(SosModel { cutoff: w.cutoff(), v, w, tail: None, log_step_factor })
    }

    pub fn with_tail(mut self, tail: TailCoupling) -> Self {
        self.tail = Some(tail);
        self
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn band(&self) -> usize {
        self.w.band()
    }

    pub fn potential(&self) -> &[f64] {
        &self.v
    }

    pub fn energies(&self) -> &EdgeEnergies {
        &self.w
    }

    pub fn tail(&self) -> Option<TailCoupling> {
        self.tail
    }

    /// Per-step log convention constant (see the module notes).
    pub fn log_step_factor(&self) -> f64 {
        self.log_step_factor
    }

    /// Log Gibbs weight of one time step x -> y with the arrival-site
    /// potential attached: log_step_factor - W(x,y) - V(y). `None` if the
    /// step is forbidden.
    pub fn log_step_weight(&self, x: usize, y: usize) -> Option<f64> {
        self.w.get(x, y).map(|w| self.log_step_factor - w - self.v[y])
    }

    /// Entry of the symmetric transfer kernel with the potential split over
    /// both endpoints: exp(log_step_factor - W(x,y) - (V(x)+V(y))/2).
    /// Its top eigenpair is the ground state.
    pub fn symmetric_kernel(&self, x: usize, y: usize) -> f64 {
        match self.w.get(x, y) {
            None => 0.0,
            Some(w) => (self.log_step_factor - w - 0.5 * (self.v[x] + self.v[y])).exp(),
        }
    }
}

/// Top eigenpair of the symmetric transfer kernel, stored as (rho, U) with
/// the eigenvector represented through its potential: v(x) = e^{-U(x)/2},
/// normalized so U(0) = 0. Keeping U instead of v survives eigenvector
/// tails that underflow the linear scale.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundState {
    pub rho: f64,
    pub u: Vec<f64>,
}

impl GroundState {
    /// Normalize a positive eigenvector into potential form. Nonpositive
    /// entries (possible deep in an underflowed tail) map to +inf.
    pub fn from_eigenvector(rho: f64, v: &[f64]) -> Result<Self> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::InvalidInput(format!("nonpositive eigenvalue {rho}")));
        }
        if v.is_empty() || v[0] <= 0.0 {
            return Err(Error::InvalidInput("eigenvector must be positive at the wall".into()));
        }
        let base = v[0].ln();
        let u = v
            .iter()
            .map(|&c| if c > 0.0 { -2.0 * (c.ln() - base) } else { f64::INFINITY })
            .collect();
        Ok(GroundState { rho, u })
    }

    /// Residual of the eigen-relation in the symmetric representation:
    /// max_y |sum_x e^{-U(x)/2} K(x,y) - rho e^{-U(y)/2}| / rho, with the
    /// eigenvector scaled to unit maximum.
    pub fn residual(&self, m: &SosModel) -> f64 {
        let n = self.u.len();
        let umin = self.u.iter().cloned().fold(f64::INFINITY, f64::min);
        let v: Vec<f64> = self.u.iter().map(|&u| (-(u - umin) / 2.0).exp()).collect();
        let band = m.band();
        let mut worst: f64 = 0.0;
        for y in 0..n {
            let lo = y.saturating_sub(band);
            let hi = (y + band).min(n - 1);
            let mut acc = 0.0;
            for x in lo..=hi {
                acc += v[x] * m.symmetric_kernel(x, y);
            }
            worst = worst.max((acc - self.rho * v[y]).abs());
        }
        worst / self.rho
    }
}

/// A bridge path: heights x_0 = 0, x_1, ..., x_N = 0, all nonnegative.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BridgePath {
    heights: Vec<i64>,
}

impl BridgePath {
    pub fn new(heights: Vec<i64>) -> Result<Self> {
        if heights.len() < 2 {
            return Err(Error::InvalidPath("need at least one step".into()));
        }
        if heights[0] != 0 || *heights.last().unwrap() != 0 {
            return Err(Error::InvalidPath("endpoints must be pinned at 0".into()));
        }
        if heights.iter().any(|&x| x < 0) {
            return Err(Error::InvalidPath("heights must stay nonnegative".into()));
        }
        Ok(BridgePath { heights })
    }

    /// Number of steps N.
    pub fn len(&self) -> usize {
        self.heights.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn heights(&self) -> &[i64] {
        &self.heights
    }

    pub fn max_height(&self) -> i64 {
        *self.heights.iter().max().unwrap()
    }
}

/// Wetting regime of a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Line pinned to the wall; walk positive recurrent.
    PartialWetting,
    /// Line unbinds; walk null recurrent or transient.
    CompleteWetting,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Regime::PartialWetting => write!(f, "PARTIAL"),
            Regime::CompleteWetting => write!(f, "COMPLETE"),
        }
    }
}

/// Outcome of a finite-size numeric diagnostic; unlike [`Regime`] this may
/// decline to call the phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Partial,
    Complete,
    Undecided,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Partial => write!(f, "PARTIAL"),
            Verdict::Complete => write!(f, "COMPLETE"),
            Verdict::Undecided => write!(f, "UNDECIDED"),
        }
    }
}

/// Classification of a model with the evidence that produced it.
#[derive(Debug, Clone)]
pub struct RegimeReport {
    pub regime: Regime,
    /// True when the parameters sit on the transition itself.
    pub boundary: bool,
    /// Drift exponent estimate when one is available.
    pub delta_estimate: Option<f64>,
    /// Mean-height growth ratio when a numeric diagnostic ran.
    pub growth_ratio: Option<f64>,
    pub evidence: String,
}

/// Reversibility energy: W(x, y) = -(1/2) ln[P(y|x) P(x|y)], which needs no
/// knowledge of the stationary potential. Steps missing in both directions
/// become forbidden; one-sided support is an error.
pub fn w_from_detailed_balance(k: &WalkKernel) -> Result<SosModel> {
    let m = k.cutoff();
    let band = k.band();
    let mut w = EdgeEnergies::new_forbidden(m, band);
    for x in 0..=m {
        for s in 0..=band {
            let y = x + s;
            if y > m {
                break;
            }
            let fwd = k.prob(x, y);
            let bwd = k.prob(y, x);
            if fwd > 0.0 && bwd > 0.0 {
                w.set(x, y, -0.5 * (fwd.ln() + bwd.ln()));
            } else if fwd > 0.0 || bwd > 0.0 {
                return Err(Error::AsymmetricSupport { x, y });
            }
        }
    }
    SosModel::new(vec![0.0; m + 1], w, 0.0)
}
