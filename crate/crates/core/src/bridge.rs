//! Exact bridge computations shared by every verification in the crate:
//! path probabilities, partition functions, height marginals, exhaustive
//! enumeration, and exact conditional sampling.
//!
//! All dynamic programming is carried out on scaled vectors with an
//! accumulated log scale, so partition functions for paths thousands of
//! steps long neither underflow nor overflow. A bridge of length N with
//! steps of size at most b never climbs above bN, so the working state
//! space is {0..min(cutoff, bN)} without changing any answer.

use crate::error::{Error, Result};
use crate::model::{BridgePath, SosModel, WalkKernel};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Maximum number of paths [`enumerate_bridges`] will materialize.
pub const ENUMERATION_LIMIT: u64 = 10_000_000;

/// Maximum number of table cells the sampler will precompute.
const SAMPLER_CELL_LIMIT: u64 = 50_000_000;

/// A system whose bridges can be computed exactly: either a walk kernel
/// (step weight P(y|x)) or a line model (step weight
/// e^{log_step_factor - W(x,y) - V(y)}, the arrival-site convention).
/// For translated pairs the two step weights agree, so every quantity in
/// this module agrees as well.
#[derive(Clone, Copy)]
pub enum BridgeSystem<'a> {
    Walk(&'a WalkKernel),
    Gibbs(&'a SosModel),
}

impl<'a> BridgeSystem<'a> {
    pub fn cutoff(&self) -> usize {
        match self {
            BridgeSystem::Walk(k) => k.cutoff(),
            BridgeSystem::Gibbs(m) => m.cutoff(),
        }
    }

    pub fn band(&self) -> usize {
        match self {
            BridgeSystem::Walk(k) => k.band(),
            BridgeSystem::Gibbs(m) => m.band(),
        }
    }

    /// Log weight of one time step x -> y; `None` if the step is forbidden.
    pub fn log_step(&self, x: usize, y: usize) -> Option<f64> {
        match self {
            BridgeSystem::Walk(k) => {
                let p = k.prob(x, y);
                if p > 0.0 {
                    Some(p.ln())
                } else {
                    None
                }
            }
            BridgeSystem::Gibbs(m) => m.log_step_weight(x, y),
        }
    }

    /// Largest height a length-`n` bridge can use.
    fn effective_cutoff(&self, n: usize) -> usize {
        self.cutoff().min(self.band().saturating_mul(n))
    }
}

/// Dense banded table of step weights e^{log_step - shift}, max-shifted so
/// the largest weight is 1; the shift is restored in log-scale bookkeeping.
struct StepTable {
    m: usize,
    band: usize,
    w: Vec<f64>,
    shift: f64,
}

impl StepTable {
    fn new(sys: &BridgeSystem, m: usize) -> StepTable {
        let band = sys.band();
        let stride = 2 * band + 1;
        let mut logs = vec![f64::NEG_INFINITY; (m + 1) * stride];
        let mut shift = f64::NEG_INFINITY;
        for x in 0..=m {
            let lo = x.saturating_sub(band);
            let hi = (x + band).min(m);
            for y in lo..=hi {
                if let Some(ls) = sys.log_step(x, y) {
                    logs[x * stride + (band + y) - x] = ls;
                    shift = shift.max(ls);
                }
            }
        }
        if !shift.is_finite() {
            shift = 0.0;
        }
        let w = logs.iter().map(|&l| (l - shift).exp()).collect();
        StepTable { m, band, w, shift }
    }

    fn weight(&self, x: usize, y: usize) -> f64 {
        let stride = 2 * self.band + 1;
        self.w[x * stride + (self.band + y) - x]
    }

    /// out[y] = sum_x v[x] w(x, y).
    fn apply_forward(&self, v: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        let stride = 2 * self.band + 1;
        for x in 0..=self.m {
            let vx = v[x];
            if vx == 0.0 {
                continue;
            }
            let lo = x.saturating_sub(self.band);
            let hi = (x + self.band).min(self.m);
            for y in lo..=hi {
                out[y] += vx * self.w[x * stride + (self.band + y) - x];
            }
        }
    }

    /// out[x] = sum_y w(x, y) v[y].
    fn apply_backward(&self, v: &[f64], out: &mut [f64]) {
        let stride = 2 * self.band + 1;
        for x in 0..=self.m {
            let lo = x.saturating_sub(self.band);
            let hi = (x + self.band).min(self.m);
            let mut acc = 0.0;
            for y in lo..=hi {
                acc += self.w[x * stride + (self.band + y) - x] * v[y];
            }
            out[x] = acc;
        }
    }
}

/// Rescale `v` to unit maximum, returning ln(max); `None` if v vanished
/// (no bridge continues from here).
fn renormalize(v: &mut [f64]) -> Option<f64> {
    let mx = v.iter().cloned().fold(0.0f64, f64::max);
    if mx <= 0.0 {
        return None;
    }
    for c in v.iter_mut() {
        *c /= mx;
    }
    Some(mx.ln())
}

/// Log partition function of length-`n` bridges: for a walk this is the log
/// of the n-step return probability to 0; for a line model, the log of the
/// Gibbs normalizer with the same convention factors. Returns -inf when no
/// bridge exists (e.g. odd n with +-1 steps).
pub fn log_partition(sys: &BridgeSystem, n: usize) -> f64 {
    let m = sys.effective_cutoff(n);
    let table = StepTable::new(sys, m);
    let mut v = vec![0.0; m + 1];
    let mut next = vec![0.0; m + 1];
    v[0] = 1.0;
    let mut scale = 0.0;
    for _ in 0..n {
        table.apply_forward(&v, &mut next);
        std::mem::swap(&mut v, &mut next);
        match renormalize(&mut v) {
            Some(s) => scale += s + table.shift,
            None => return f64::NEG_INFINITY,
        }
    }
    if v[0] > 0.0 {
        scale + v[0].ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// Unconditioned log weight of a bridge path under the system's step
/// weights; `None` if any step is forbidden.
pub fn path_log_weight(sys: &BridgeSystem, path: &BridgePath) -> Option<f64> {
    let h = path.heights();
    let mut acc = 0.0;
    for n in 0..path.len() {
        acc += sys.log_step(h[n] as usize, h[n + 1] as usize)?;
    }
    Some(acc)
}

fn conditioned(sys: &BridgeSystem, path: &BridgePath) -> Result<f64> {
    let h = path.heights();
    for n in 0..path.len() {
        if sys.log_step(h[n] as usize, h[n + 1] as usize).is_none() {
            return Err(Error::ForbiddenStep { from: h[n], to: h[n + 1] });
        }
    }
    let w = path_log_weight(sys, path).expect("checked above");
    Ok(w - log_partition(sys, path.len()))
}

/// Log probability of `path` under the walk's bridge law (conditioned on
/// returning to 0 after its full length).
pub fn bridge_log_prob_rw(k: &WalkKernel, path: &BridgePath) -> Result<f64> {
    conditioned(&BridgeSystem::Walk(k), path)
}

/// Log probability of `path` under the line model's Gibbs bridge law.
pub fn bridge_log_weight_sos(m: &SosModel, path: &BridgePath) -> Result<f64> {
    conditioned(&BridgeSystem::Gibbs(m), path)
}

/// All nonnegative bridges of length `n` over the given step set, height
/// capped at `cutoff`, in lexicographic step order. The count is computed
/// first by dynamic programming and the walk refuses to materialize more
/// than [`ENUMERATION_LIMIT`] paths.
pub fn enumerate_bridges(n: usize, steps: &[i64], cutoff: usize) -> Result<Vec<BridgePath>> {
    if n == 0 || steps.is_empty() {
        return Err(Error::InvalidInput("need a positive length and a step set".into()));
    }
    let mut steps: Vec<i64> = steps.to_vec();
    steps.sort_unstable();
    steps.dedup();
    let band = steps.iter().map(|s| s.unsigned_abs()).max().unwrap() as usize;
    let m = cutoff.min(band * n);

    // completions[k][x] = number of ways to finish from height x with n-k
    // steps left; doubles as the pruning table for the walk below.
    let mut completions = vec![vec![0u128; m + 1]; n + 1];
    completions[n][0] = 1;
    for k in (0..n).rev() {
        for x in 0..=m {
            let mut acc: u128 = 0;
            for &s in &steps {
                let y = x as i64 + s;
                if y >= 0 && y as usize <= m {
                    acc += completions[k + 1][y as usize];
                }
            }
            completions[k][x] = acc;
        }
    }
    let total = completions[0][0];
    if total > ENUMERATION_LIMIT as u128 {
        return Err(Error::TooLarge { estimated: total, limit: ENUMERATION_LIMIT });
    }

    let mut out = Vec::with_capacity(total as usize);
    let mut heights = vec![0i64; n + 1];
    fn descend(
        heights: &mut Vec<i64>,
        depth: usize,
        n: usize,
        m: usize,
        steps: &[i64],
        completions: &[Vec<u128>],
        out: &mut Vec<BridgePath>,
    ) {
        if depth == n {
            out.push(BridgePath::new(heights.clone()).expect("walk preserves bridge invariants"));
            return;
        }
        let x = heights[depth];
        for &s in steps {
            let y = x + s;
            if y >= 0 && y as usize <= m && completions[depth + 1][y as usize] > 0 {
                heights[depth + 1] = y;
                descend(heights, depth + 1, n, m, steps, completions, out);
            }
        }
    }
    descend(&mut heights, 0, n, m, &steps, &completions, &mut out);
    Ok(out)
}

/// Exact conditional sampler for walk bridges. Construction runs the
/// backward dynamic program once; each sample then walks forward through
/// rows tilted by the return weights, P(y|x) h_{k+1}(y) / h_k(x).
pub struct BridgeSampler {
    n: usize,
    m: usize,
    band: usize,
    table: StepTable,
    /// Backward return vectors, one per level, each rescaled to unit max
    /// (the per-level scale cancels inside the tilted rows).
    back: Vec<Vec<f64>>,
}

impl BridgeSampler {
    pub fn new(k: &WalkKernel, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("need at least one step".into()));
        }
        let sys = BridgeSystem::Walk(k);
        let m = sys.effective_cutoff(n);
        let cells = (n as u64 + 1) * (m as u64 + 1);
        if cells > SAMPLER_CELL_LIMIT {
            return Err(Error::TooLarge { estimated: cells as u128, limit: SAMPLER_CELL_LIMIT });
        }
        let table = StepTable::new(&sys, m);
        let mut back = vec![vec![0.0; m + 1]; n + 1];
        back[n][0] = 1.0;
        for kk in (0..n).rev() {
            let (head, tail) = back.split_at_mut(kk + 1);
            table.apply_backward(&tail[0], &mut head[kk]);
            let _ = renormalize(&mut head[kk]);
        }
        if back[0][0] <= 0.0 {
            return Err(Error::ZeroBridgeProbability);
        }
        Ok(BridgeSampler { n, m, band: sys.band(), table, back })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Draw one exact bridge sample.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> BridgePath {
        let mut heights = Vec::with_capacity(self.n + 1);
        heights.push(0i64);
        let mut x = 0usize;
        for k in 0..self.n {
            let lo = x.saturating_sub(self.band);
            let hi = (x + self.band).min(self.m);
            let h = &self.back[k + 1];
            let mut total = 0.0;
            for y in lo..=hi {
                total += self.table.weight(x, y) * h[y];
            }
            debug_assert!(total > 0.0, "sampled into a dead state");
            let mut u = rng.random::<f64>() * total;
            let mut chosen = hi;
            for y in lo..=hi {
                let w = self.table.weight(x, y) * h[y];
                if u < w {
                    chosen = y;
                    break;
                }
                u -= w;
            }
            x = chosen;
            heights.push(x as i64);
        }
        BridgePath::new(heights).expect("sampler preserves bridge invariants")
    }
}

/// One exact bridge sample from a fixed seed (convenience over
/// [`BridgeSampler`]; building the sampler dominates, so batch callers
/// should construct it once).
pub fn sample_bridge(k: &WalkKernel, n: usize, seed: u64) -> Result<BridgePath> {
    let sampler = BridgeSampler::new(k, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(sampler.sample(&mut rng))
}

/// Exact marginal distribution of the height at time `t` under the
/// length-`n` bridge law, as a dense vector over {0..min(cutoff, band n)}.
pub fn height_marginal(sys: &BridgeSystem, n: usize, t: usize) -> Result<Vec<f64>> {
    if t > n {
        return Err(Error::InvalidInput(format!("time {t} beyond bridge length {n}")));
    }
    let m = sys.effective_cutoff(n);
    let table = StepTable::new(sys, m);
    let mut fwd = vec![0.0; m + 1];
    let mut tmp = vec![0.0; m + 1];
    fwd[0] = 1.0;
    for _ in 0..t {
        table.apply_forward(&fwd, &mut tmp);
        std::mem::swap(&mut fwd, &mut tmp);
        if renormalize(&mut fwd).is_none() {
            return Err(Error::InvalidInput("no bridge of this length".into()));
        }
    }
    let mut bwd = vec![0.0; m + 1];
    bwd[0] = 1.0;
    for _ in 0..(n - t) {
        table.apply_backward(&bwd, &mut tmp);
        std::mem::swap(&mut bwd, &mut tmp);
        if renormalize(&mut bwd).is_none() {
            return Err(Error::InvalidInput("no bridge of this length".into()));
        }
    }
    let mut marg: Vec<f64> = fwd.iter().zip(&bwd).map(|(&f, &b)| f * b).collect();
    let total: f64 = marg.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidInput("no bridge of this length".into()));
    }
    for p in marg.iter_mut() {
        *p /= total;
    }
    Ok(marg)
}

/// Mean of a height marginal.
pub fn marginal_mean(marginal: &[f64]) -> f64 {
    marginal.iter().enumerate().map(|(x, &p)| x as f64 * p).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{EdgeCoupling, WallMode};
    use crate::presets::{log_potential, power_tail_phi};
    use crate::rw_to_sos::{
        kernel_from_phi, metropolis_full_kernel, sos_from_metropolis, sos_from_phi,
    };

    fn simple_walk(m: usize) -> WalkKernel {
        kernel_from_phi(&EdgeCoupling::new(vec![0.0; m]).unwrap())
    }

    #[test]
    fn two_step_partition_and_unique_bridge() {
        let k = simple_walk(8);
        let sys = BridgeSystem::Walk(&k);
        assert!((log_partition(&sys, 2) - 0.5f64.ln()).abs() < 1e-15);
        let paths = enumerate_bridges(2, &[-1, 1], 8).unwrap();
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].heights(), &[0, 1, 0]);
        assert_eq!(bridge_log_prob_rw(&k, &paths[0]).unwrap(), 0.0);
    }

    #[test]
    fn four_step_bridge_law_by_hand() {
        // Unconditioned weights: (0,1,0,1,0) -> 1/4, (0,1,2,1,0) -> 1/8,
        // so Z_4 = 3/8 and the conditioned probabilities are 2/3 and 1/3.
        let k = simple_walk(8);
        let sys = BridgeSystem::Walk(&k);
        assert!((log_partition(&sys, 4) - (3.0f64 / 8.0).ln()).abs() < 1e-14);
        let paths = enumerate_bridges(4, &[-1, 1], 8).unwrap();
        assert_eq!(paths.len(), 2);
        let probs: Vec<f64> = paths
            .iter()
            .map(|p| bridge_log_prob_rw(&k, p).unwrap().exp())
            .collect();
        let low = paths.iter().position(|p| p.max_height() == 1).unwrap();
        assert!((probs[low] - 2.0 / 3.0).abs() < 1e-14);
        assert!((probs[1 - low] - 1.0 / 3.0).abs() < 1e-14);
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn odd_length_has_no_pm1_bridge() {
        let k = simple_walk(8);
        assert_eq!(log_partition(&BridgeSystem::Walk(&k), 5), f64::NEG_INFINITY);
    }

    #[test]
    fn enumeration_counts_match_lattice_path_combinatorics() {
        // +-1 bridges of length 2n are counted by the Catalan numbers.
        assert_eq!(enumerate_bridges(10, &[-1, 1], 10).unwrap().len(), 42);
        // Lazy bridges are counted by the Motzkin-like wall counts.
        assert_eq!(enumerate_bridges(6, &[-1, 0, 1], 6).unwrap().len(), 51);
        assert_eq!(enumerate_bridges(10, &[-1, 0, 1], 10).unwrap().len(), 2188);
    }

    #[test]
    fn enumeration_guard_trips_on_large_counts() {
        match enumerate_bridges(34, &[-1, 0, 1], 34) {
            Err(Error::TooLarge { estimated, limit }) => {
                assert!(estimated > limit as u128);
            }
            other => panic!("expected TooLarge, got {other:?}"),
        }
    }

    #[test]
    fn forbidden_steps_are_reported() {
        let k = simple_walk(8);
        let path = BridgePath::new(vec![0, 1, 1, 1, 0]).unwrap();
        match bridge_log_prob_rw(&k, &path) {
            Err(Error::ForbiddenStep { from: 1, to: 1 }) => {}
            other => panic!("expected forbidden step, got {other:?}"),
        }
    }

    #[test]
    fn translated_pair_has_equal_partitions_and_path_laws() {
        let phi = power_tail_phi(1.2, 0.0, 12);
        let k = kernel_from_phi(&phi);
        let m = sos_from_phi(&phi);
        let wsys = BridgeSystem::Walk(&k);
        let gsys = BridgeSystem::Gibbs(&m);
        for n in [2usize, 4, 6, 10] {
            let zw = log_partition(&wsys, n);
            let zg = log_partition(&gsys, n);
            assert!((zw - zg).abs() < 1e-13, "n={n}: {zw} vs {zg}");
        }
        let paths = enumerate_bridges(10, &[-1, 1], 12).unwrap();
        let mut worst = 0.0f64;
        for p in &paths {
            let a = bridge_log_prob_rw(&k, p).unwrap().exp();
            let b = bridge_log_weight_sos(&m, p).unwrap().exp();
            worst = worst.max((a - b).abs());
        }
        assert!(worst < 1e-12, "max path-law gap {worst}");
    }

    #[test]
    fn lazy_translated_pair_matches_including_holds() {
        let u = log_potential(1.0, 10);
        let k = metropolis_full_kernel(&u, 0.5).unwrap();
        let m = sos_from_metropolis(&u, WallMode::MetropolisWall, 0.5).unwrap();
        let paths = enumerate_bridges(6, &[-1, 0, 1], 10).unwrap();
        let mut total = 0.0;
        for p in &paths {
            let a = bridge_log_prob_rw(&k, p).unwrap().exp();
            let b = bridge_log_weight_sos(&m, p).unwrap().exp();
            assert!((a - b).abs() < 1e-13);
            total += a;
        }
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn marginal_matches_enumeration() {
        let k = simple_walk(8);
        let marg = height_marginal(&BridgeSystem::Walk(&k), 4, 2).unwrap();
        assert!((marg[0] - 2.0 / 3.0).abs() < 1e-14);
        assert!((marg[2] - 1.0 / 3.0).abs() < 1e-14);
        assert!((marg.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let end = height_marginal(&BridgeSystem::Walk(&k), 4, 4).unwrap();
        assert_eq!(end[0], 1.0);
    }

    #[test]
    fn sampler_is_deterministic_and_exact_on_the_forced_bridge() {
        let k = simple_walk(8);
        let p1 = sample_bridge(&k, 2, 7).unwrap();
        assert_eq!(p1.heights(), &[0, 1, 0]);
        let a = sample_bridge(&k, 8, 123).unwrap();
        let b = sample_bridge(&k, 8, 123).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sampler_matches_enumerated_law() {
        let phi = power_tail_phi(0.5, 0.0, 8);
        let k = kernel_from_phi(&phi);
        let paths = enumerate_bridges(8, &[-1, 1], 8).unwrap();
        let exact: Vec<f64> =
            paths.iter().map(|p| bridge_log_prob_rw(&k, p).unwrap().exp()).collect();
        let sampler = BridgeSampler::new(&k, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut counts = std::collections::HashMap::new();
        let trials = 40_000usize;
        for _ in 0..trials {
            *counts.entry(sampler.sample(&mut rng)).or_insert(0usize) += 1;
        }
        let mut tv = 0.0;
        for (p, &e) in paths.iter().zip(&exact) {
            let emp = counts.get(p).copied().unwrap_or(0) as f64 / trials as f64;
            tv += (emp - e).abs();
        }
        assert!(tv / 2.0 < 0.02, "tv {tv}");
    }

    #[test]
    fn long_bridge_partition_stays_finite_in_log_space() {
        // Massless line over {0..4000}: a length-8000 excursion never reaches
        // the cutoff, so Z_N counts Dyck paths exactly,
        //   Z_N = C_{N/2} / 2^N = binom(N, N/2) / ((N/2 + 1) 2^N),
        // whose log is a short exact sum. Naive weight products underflow
        // around N ~ 2000; the scaled recursion has to survive N = 8000.
        let m = crate::presets::nearest_neighbor_sos(vec![0.0; 4001]).unwrap();
        let n = 8000usize;
        let z = log_partition(&BridgeSystem::Gibbs(&m), n);
        assert!(z.is_finite());
        let h = n / 2;
        let mut expected = -(n as f64) * 2.0f64.ln() - ((h + 1) as f64).ln();
        for k in 1..=h {
            expected += (((h + k) as f64) / k as f64).ln();
        }
        assert!((z - expected).abs() < 1e-9, "log Z {z} vs {expected}");
    }
}
