//! Phase classification: tail-exponent fits, closed-form wall criteria,
//! and a finite-size growth diagnostic on bridge mid-heights.

use crate::bridge::{height_marginal, marginal_mean, BridgeSystem};
use crate::error::{Error, Result};
use crate::model::{EdgeCoupling, Regime, RegimeReport, Verdict};
use crate::presets::{double_step, nearest_neighbor_sos, power_tail_phi, square_well};
use crate::rw_to_sos::kernel_from_phi;
use crate::sos_to_rw::{double_step_analysis, square_well_analysis};

/// Result of extrapolating a tail observable to X -> infinity.
#[derive(Debug, Clone)]
pub struct TailFit {
    /// Drift exponent, resolved to the branch delta >= -1 when the
    /// observable only pins delta (2 + delta).
    pub delta_primary: f64,
    /// The other branch -2 - delta_primary, when the fit has one.
    pub delta_secondary: Option<f64>,
    /// Fitted limit of the windowed observable.
    pub limit: f64,
    /// Relative spread of the raw observable across the window.
    pub plateau_variation: f64,
    /// Site window [lo, hi] the fit used.
    pub window: (usize, usize),
}

/// Least squares for y = c0 + c1 / x + c2 / x^2, returning c0. The basis
/// is rescaled to u = x_lo / x in [~1/2, 1] so the normal equations stay
/// well conditioned; c0 is the u -> 0 extrapolation either way.
fn inverse_quadratic_limit(points: &[(f64, f64)]) -> f64 {
    let x_lo = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let mut g = [[0.0f64; 4]; 3];
    for &(x, y) in points {
        let u = x_lo / x;
        let basis = [1.0, u, u * u];
        for r in 0..3 {
            for c in 0..3 {
                g[r][c] += basis[r] * basis[c];
            }
            g[r][3] += basis[r] * y;
        }
    }
    // Gaussian elimination with partial pivoting on the 3x4 tableau.
    for col in 0..3 {
        let piv = (col..3).max_by(|&a, &b| g[a][col].abs().total_cmp(&g[b][col].abs())).unwrap();
        g.swap(col, piv);
        for row in col + 1..3 {
            let f = g[row][col] / g[col][col];
            for c in col..4 {
                g[row][c] -= f * g[col][c];
            }
        }
    }
    let c2 = g[2][3] / g[2][2];
    let c1 = (g[1][3] - g[1][2] * c2) / g[1][1];
    (g[0][3] - g[0][1] * c1 - g[0][2] * c2) / g[0][0]
}

/// Relative spread used to reject windows with no plateau.
const PLATEAU_SPREAD_LIMIT: f64 = 0.1;
/// Below this the observable is treated as identically zero.
const ZERO_FLOOR: f64 = 1e-9;

fn plateau_window(len: usize) -> Result<(usize, usize)> {
    let lo = (len / 4).max(2);
    let hi = len / 2;
    if hi < lo + 8 {
        return Err(Error::InvalidInput(format!(
            "tail window {lo}..{hi} too short; need more sites"
        )));
    }
    Ok((lo, hi))
}

fn check_plateau(values: &[f64]) -> Result<(f64, f64)> {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let scale = max.abs().max(min.abs());
    let variation = if scale > 0.0 { (max - min) / scale } else { 0.0 };
    if scale >= ZERO_FLOOR && variation > PLATEAU_SPREAD_LIMIT {
        return Err(Error::FitUnstable { variation });
    }
    Ok((scale, variation))
}

/// Estimate the drift exponent from the site potential: X^2 V(X) tends to
/// delta (2 + delta) / 8, fitted over the middle window of the lattice and
/// resolved to the branch delta >= -1. A potential indistinguishable from
/// zero in the window reports delta = 0; a window without a plateau (the
/// potential has no inverse-square tail) is `FitUnstable`, as is a plateau
/// below the branch point -1/8.
pub fn tail_delta_from_potential(v: &[f64]) -> Result<TailFit> {
    let (lo, hi) = plateau_window(v.len().saturating_sub(1))?;
    let points: Vec<(f64, f64)> =
        (lo..=hi).map(|x| (x as f64, (x as f64) * (x as f64) * v[x])).collect();
    let raw: Vec<f64> = points.iter().map(|p| p.1).collect();
    let (scale, variation) = check_plateau(&raw)?;
    if scale < ZERO_FLOOR {
        return Ok(TailFit {
            delta_primary: 0.0,
            delta_secondary: Some(-2.0),
            limit: 0.0,
            plateau_variation: variation,
            window: (lo, hi),
        });
    }
    let c0 = inverse_quadratic_limit(&points);
    let disc = 1.0 + 8.0 * c0;
    if disc < 0.0 {
        return Err(Error::FitUnstable { variation: -disc });
    }
    let delta = -1.0 + disc.sqrt();
    Ok(TailFit {
        delta_primary: delta,
        delta_secondary: Some(-2.0 - delta),
        limit: c0,
        plateau_variation: variation,
        window: (lo, hi),
    })
}

/// Estimate the drift exponent from the edge coupling: 2 x phi(x) tends to
/// delta directly, so this variant resolves the full range including
/// delta < -1 (the branch the potential alone cannot see).
pub fn tail_delta_from_coupling(phi: &EdgeCoupling) -> Result<TailFit> {
    let (lo, hi) = plateau_window(phi.len())?;
    let points: Vec<(f64, f64)> = (lo..=hi)
        .map(|k| {
            let x = k as f64 + 0.5;
            (x, 2.0 * x * phi.at(k))
        })
        .collect();
    let raw: Vec<f64> = points.iter().map(|p| p.1).collect();
    let (scale, variation) = check_plateau(&raw)?;
    let delta = if scale < ZERO_FLOOR { 0.0 } else { inverse_quadratic_limit(&points) };
    Ok(TailFit {
        delta_primary: delta,
        delta_secondary: None,
        limit: delta,
        plateau_variation: variation,
        window: (lo, hi),
    })
}

/// Turn a tail fit into a regime call: pinned exactly when delta > 1, with
/// delta = 1 on the complete side and flagged as the transition.
pub fn classify(fit: &TailFit) -> RegimeReport {
    let delta = fit.delta_primary;
    let regime = if delta > 1.0 { Regime::PartialWetting } else { Regime::CompleteWetting };
    RegimeReport {
        regime,
        boundary: (delta - 1.0).abs() <= 1e-6,
        delta_estimate: Some(delta),
        growth_ratio: None,
        evidence: format!(
            "tail exponent {:.6} from plateau {:.6e} over sites {}..{}",
            delta, fit.limit, fit.window.0, fit.window.1
        ),
    }
}

/// Closed-form regime of the wall wells. With only a wall term v0 the
/// transition sits at v0 = -ln 2; adding a step v1 one site up moves it to
/// 4 e^{v1} = 2 + e^{-v0}.
pub fn wall_phase_closed_form(v0: f64, v1: Option<f64>) -> RegimeReport {
    match v1 {
        None => {
            let a = square_well_analysis(v0);
            RegimeReport {
                regime: a.regime,
                boundary: a.boundary,
                delta_estimate: None,
                growth_ratio: None,
                evidence: format!(
                    "square well v0 = {v0:.6}; transition at -ln 2 = {:.6}",
                    -(2.0f64).ln()
                ),
            }
        }
        Some(v1) => {
            let a = double_step_analysis(v0, v1);
            RegimeReport {
                regime: a.regime,
                boundary: a.boundary,
                delta_estimate: None,
                growth_ratio: None,
                evidence: format!(
                    "double step (v0, v1) = ({v0:.6}, {v1:.6}); v1 distance to transition {:.6}",
                    a.boundary_distance
                ),
            }
        }
    }
}

/// Knobs for the finite-size growth diagnostic.
#[derive(Debug, Clone, Copy)]
pub struct DiagnosticOptions {
    /// Shorter bridge length; the longer one is scale times it.
    pub n_base: usize,
    pub scale: usize,
    /// Ratio below which the mid-height is called saturated (pinned).
    pub partial_ceiling: f64,
    /// Ratio above which it is called diffusive (unbound).
    pub complete_floor: f64,
    /// Marginal mass allowed in the top half of the lattice before the
    /// cutoff is declared too small to trust.
    pub overflow_mass: f64,
}

impl Default for DiagnosticOptions {
    fn default() -> Self {
        DiagnosticOptions {
            n_base: 400,
            scale: 4,
            partial_ceiling: 1.3,
            complete_floor: 1.7,
            overflow_mass: 1e-6,
        }
    }
}

/// Outcome of the growth diagnostic.
#[derive(Debug, Clone, Copy)]
pub struct HeightDiagnostic {
    /// Mean mid-height of the length n_base bridge.
    pub mean_base: f64,
    /// Mean mid-height of the length scale * n_base bridge.
    pub mean_long: f64,
    /// mean_long / mean_base; 1 when pinned, sqrt(scale) when diffusive.
    pub growth_ratio: f64,
    pub verdict: Verdict,
}

fn checked_mid_marginal(sys: &BridgeSystem, n: usize, overflow_mass: f64) -> Result<Vec<f64>> {
    let marg = height_marginal(sys, n, n / 2)?;
    // The marginal only covers heights reachable in n steps; when that
    // range stops short of cutoff/2 the truncation row was never in play.
    let start = (sys.cutoff() / 2).min(marg.len());
    let mass: f64 = marg[start..].iter().sum();
    if mass > overflow_mass {
        return Err(Error::CutoffTooSmall { mass });
    }
    Ok(marg)
}

/// Compare mean bridge mid-heights at two lengths. A pinned line saturates
/// (ratio near 1); an unbound one grows diffusively (ratio near
/// sqrt(scale)). Ratios between the two thresholds stay undecided rather
/// than guessing.
pub fn mean_height_diagnostic(
    sys: &BridgeSystem,
    opts: &DiagnosticOptions,
) -> Result<HeightDiagnostic> {
    if opts.n_base < 2 || opts.n_base % 2 != 0 || opts.scale < 2 {
        return Err(Error::InvalidInput(
            "diagnostic needs an even base length >= 2 and scale >= 2".into(),
        ));
    }
    let mean_base = marginal_mean(&checked_mid_marginal(sys, opts.n_base, opts.overflow_mass)?);
    let mean_long =
        marginal_mean(&checked_mid_marginal(sys, opts.n_base * opts.scale, opts.overflow_mass)?);
    if !(mean_base > 0.0) {
        return Err(Error::InvalidInput("degenerate bridge: mid-height never leaves 0".into()));
    }
    let growth_ratio = mean_long / mean_base;
    let verdict = if growth_ratio < opts.partial_ceiling {
        Verdict::Partial
    } else if growth_ratio > opts.complete_floor {
        Verdict::Complete
    } else {
        Verdict::Undecided
    };
    Ok(HeightDiagnostic { mean_base, mean_long, growth_ratio, verdict })
}

/// One parameter point of a phase scan.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "preset", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ScanPoint {
    SquareWell { v0: f64 },
    DoubleStep { v0: f64, v1: f64 },
    PowerTail { delta: f64, gamma: f64 },
}

impl std::fmt::Display for ScanPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScanPoint::SquareWell { v0 } => write!(f, "square-well({v0})"),
            ScanPoint::DoubleStep { v0, v1 } => write!(f, "double-step({v0},{v1})"),
            ScanPoint::PowerTail { delta, gamma } => write!(f, "power-tail({delta},{gamma})"),
        }
    }
}

/// Scan result row: the closed-form call, the numeric call, and whether
/// they agree.
#[derive(Debug, Clone)]
pub struct ScanRow {
    pub point: ScanPoint,
    pub closed_form: Regime,
    /// Signed distance to the transition in the natural parameter
    /// (negative on the pinned side).
    pub boundary_distance: f64,
    pub diagnostic: HeightDiagnostic,
    pub agreement: bool,
}

/// Lattice size and diagnostic knobs for a scan.
#[derive(Debug, Clone, Copy)]
pub struct ScanOptions {
    pub cutoff: usize,
    pub diagnostic: DiagnosticOptions,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { cutoff: 2000, diagnostic: DiagnosticOptions::default() }
    }
}

/// Classify one point both ways. Wells run on the Gibbs side of the
/// dictionary, power-tail couplings on the walk side, so a scan exercises
/// both directions.
pub fn scan_point(point: ScanPoint, opts: &ScanOptions) -> Result<ScanRow> {
    let (closed_form, boundary_distance, diagnostic) = match point {
        ScanPoint::SquareWell { v0 } => {
            let m = nearest_neighbor_sos(square_well(v0, opts.cutoff))?;
            let d = mean_height_diagnostic(&BridgeSystem::Gibbs(&m), &opts.diagnostic)?;
            (square_well_analysis(v0).regime, v0 + (2.0f64).ln(), d)
        }
        ScanPoint::DoubleStep { v0, v1 } => {
            let m = nearest_neighbor_sos(double_step(v0, v1, opts.cutoff))?;
            let d = mean_height_diagnostic(&BridgeSystem::Gibbs(&m), &opts.diagnostic)?;
            (double_step_analysis(v0, v1).regime, double_step_analysis(v0, v1).boundary_distance, d)
        }
        ScanPoint::PowerTail { delta, gamma } => {
            let k = kernel_from_phi(&power_tail_phi(delta, gamma, opts.cutoff));
            let d = mean_height_diagnostic(&BridgeSystem::Walk(&k), &opts.diagnostic)?;
            let regime =
                if delta > 1.0 { Regime::PartialWetting } else { Regime::CompleteWetting };
            (regime, 1.0 - delta, d)
        }
    };
    let agreement = matches!(
        (closed_form, diagnostic.verdict),
        (Regime::PartialWetting, Verdict::Partial) | (Regime::CompleteWetting, Verdict::Complete)
    );
    Ok(ScanRow { point, closed_form, boundary_distance, diagnostic, agreement })
}

/// Classify every point in order. Sequential by design; callers that want
/// parallelism can fan out over `scan_point` and reassemble by index.
pub fn phase_scan(points: &[ScanPoint], opts: &ScanOptions) -> Result<Vec<ScanRow>> {
    points.iter().map(|&p| scan_point(p, opts)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::log_potential;
    use crate::rw_to_sos::sos_from_phi;
    use crate::sos_to_rw::continued_fraction_invert;

    #[test]
    fn potential_fit_recovers_the_drift_exponent() {
        for &gamma in &[0.0, 1.0] {
            let m = sos_from_phi(&power_tail_phi(1.2, gamma, 400));
            let fit = tail_delta_from_potential(m.potential()).unwrap();
            assert!(
                (fit.delta_primary - 1.2).abs() < 1e-3,
                "gamma {gamma}: delta {}",
                fit.delta_primary
            );
            assert!((fit.delta_secondary.unwrap() + 3.2).abs() < 1e-3);
        }
    }

    #[test]
    fn zero_potential_fits_to_zero_exponent() {
        let fit = tail_delta_from_potential(&vec![0.0; 200]).unwrap();
        assert_eq!(fit.delta_primary, 0.0);
        assert_eq!(fit.limit, 0.0);
    }

    #[test]
    fn growing_potential_has_no_tail_exponent() {
        match tail_delta_from_potential(&log_potential(2.0, 200)) {
            Err(Error::FitUnstable { variation }) => assert!(variation > 0.1),
            other => panic!("expected unstable fit, got {other:?}"),
        }
    }

    #[test]
    fn coupling_fit_reaches_below_the_potential_branch_point() {
        // The zero-potential inversion drifts away from the wall like
        // phi ~ -1/x, i.e. delta = -2, invisible to the potential fit.
        let inv = continued_fraction_invert(&vec![0.0; 241], 0.0).unwrap();
        let fit = tail_delta_from_coupling(&inv.phi).unwrap();
        assert!((fit.delta_primary + 2.0).abs() < 0.05, "delta {}", fit.delta_primary);

        let fit = tail_delta_from_coupling(&power_tail_phi(0.7, 1.0, 400)).unwrap();
        assert!((fit.delta_primary - 0.7).abs() < 1e-3);
    }

    #[test]
    fn classification_thresholds() {
        let partial = tail_delta_from_potential(
            sos_from_phi(&power_tail_phi(1.5, 0.0, 400)).potential(),
        )
        .unwrap();
        assert_eq!(classify(&partial).regime, Regime::PartialWetting);
        let complete = tail_delta_from_potential(
            sos_from_phi(&power_tail_phi(0.5, 0.0, 400)).potential(),
        )
        .unwrap();
        let report = classify(&complete);
        assert_eq!(report.regime, Regime::CompleteWetting);
        assert!(!report.boundary);
    }

    #[test]
    fn wall_criteria_match_the_known_wells() {
        assert_eq!(wall_phase_closed_form(-1.0, None).regime, Regime::PartialWetting);
        assert_eq!(wall_phase_closed_form(-0.3, None).regime, Regime::CompleteWetting);
        assert_eq!(wall_phase_closed_form(0.0, Some(-1.0)).regime, Regime::PartialWetting);
        assert!(wall_phase_closed_form(-(2.0f64).ln(), None).boundary);
    }

    #[test]
    fn growth_diagnostic_separates_the_phases() {
        let opts = DiagnosticOptions { n_base: 64, ..DiagnosticOptions::default() };
        let free = kernel_from_phi(&power_tail_phi(0.0, 0.0, 200));
        let d = mean_height_diagnostic(&BridgeSystem::Walk(&free), &opts).unwrap();
        assert_eq!(d.verdict, Verdict::Complete, "ratio {}", d.growth_ratio);
        assert!(d.growth_ratio > 1.7 && d.growth_ratio < 2.3);

        let pinned = nearest_neighbor_sos(square_well(-1.0, 200)).unwrap();
        let d = mean_height_diagnostic(&BridgeSystem::Gibbs(&pinned), &opts).unwrap();
        assert_eq!(d.verdict, Verdict::Partial, "ratio {}", d.growth_ratio);
    }

    #[test]
    fn tight_cutoff_is_reported_not_silently_truncated() {
        let opts = DiagnosticOptions { n_base: 64, ..DiagnosticOptions::default() };
        let free = kernel_from_phi(&power_tail_phi(0.0, 0.0, 12));
        match mean_height_diagnostic(&BridgeSystem::Walk(&free), &opts) {
            Err(Error::CutoffTooSmall { mass }) => assert!(mass > 1e-6),
            other => panic!("expected cutoff complaint, got {other:?}"),
        }
    }

    #[test]
    fn scan_rows_carry_agreement() {
        let opts = ScanOptions {
            cutoff: 300,
            diagnostic: DiagnosticOptions { n_base: 64, ..DiagnosticOptions::default() },
        };
        let rows = phase_scan(
            &[
                ScanPoint::PowerTail { delta: 3.0, gamma: 0.0 },
                ScanPoint::SquareWell { v0: -1.0 },
                ScanPoint::DoubleStep { v0: 0.0, v1: -1.0 },
            ],
            &opts,
        )
        .unwrap();
        for row in &rows {
            assert_eq!(row.closed_form, Regime::PartialWetting);
            assert!(row.agreement, "{:?}: ratio {}", row.point, row.diagnostic.growth_ratio);
            assert!(row.boundary_distance < 0.0);
        }
    }
}
