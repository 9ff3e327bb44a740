//! Property tests: structural identities of the dictionary that should hold
//! across the parameter space, complementing the pinned-value unit tests.

use proptest::prelude::*;
use walkline_core::bridge::{
    enumerate_bridges, height_marginal, log_partition, marginal_mean, path_log_weight,
    BridgeSystem,
};
use walkline_core::model::{w_from_detailed_balance, BridgePath, SosModel, WallMode};
use walkline_core::presets::power_tail_phi;
use walkline_core::rw_to_sos::{
    general_metropolis_kernel, kernel_from_phi, metropolis_full_kernel, metropolis_reflect_kernel,
    phi_from_rates, sos_from_general, sos_from_metropolis, sos_from_phi, BaseStepKernel,
};

/// Conditional bridge law over an enumerated path list; forbidden paths get
/// probability zero.
fn law(sys: &BridgeSystem, n: usize, paths: &[BridgePath]) -> Vec<f64> {
    let z = log_partition(sys, n);
    paths.iter().map(|p| path_log_weight(sys, p).map_or(0.0, |w| (w - z).exp())).collect()
}

fn tv(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / 2.0
}

fn up_rates() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.05f64..0.95, 6..12)
}

fn site_potential() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-2.0f64..2.0, 5..10)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn coupling_roundtrip_recovers_rates(p in up_rates(), phi_half in -1.0f64..1.0) {
        let q: Vec<f64> = p.iter().map(|v| 1.0 - v).collect();
        let phi = phi_from_rates(&p, &q, phi_half).unwrap();
        let k = kernel_from_phi(&phi);
        prop_assert!(k.validate().is_empty());
        // Interior rates survive; only the wall row and the cutoff row are
        // rewritten by the construction.
        for x in 1..p.len() {
            prop_assert!((k.prob(x, x + 1) - p[x]).abs() <= 1e-12);
            prop_assert!((k.prob(x, x - 1) - q[x]).abs() <= 1e-12);
        }
    }

    #[test]
    fn gauge_choice_is_invisible(p in up_rates(), c1 in -1.0f64..1.0, c2 in -1.0f64..1.0) {
        let q: Vec<f64> = p.iter().map(|v| 1.0 - v).collect();
        let phi1 = phi_from_rates(&p, &q, c1).unwrap();
        let phi2 = phi_from_rates(&p, &q, c2).unwrap();
        let (k1, k2) = (kernel_from_phi(&phi1), kernel_from_phi(&phi2));
        // The cutoff row is exempt: its phantom edge copies phi(M - 1/2),
        // which is itself gauge-dependent. Everything interior is pinned by
        // the rate sums alone.
        for x in 0..k1.cutoff() {
            for y in x.saturating_sub(1)..=x + 1 {
                prop_assert!((k1.prob(x, y) - k2.prob(x, y)).abs() <= 1e-12);
            }
        }
        // The two line models differ site by site yet carry the same bridge
        // law: the gauge moves weight between V and the boundary term.
        let n = 6;
        let paths = enumerate_bridges(n, &[-1, 1], k1.cutoff()).unwrap();
        let (m1, m2) = (sos_from_phi(&phi1), sos_from_phi(&phi2));
        let l1 = law(&BridgeSystem::Gibbs(&m1), n, &paths);
        let l2 = law(&BridgeSystem::Gibbs(&m2), n, &paths);
        prop_assert!(tv(&l1, &l2) <= 1e-10);
    }

    #[test]
    fn detailed_balance_energies_reproduce_the_walk_law(
        p in up_rates(),
        phi_half in -1.0f64..1.0,
    ) {
        let q: Vec<f64> = p.iter().map(|v| 1.0 - v).collect();
        let phi = phi_from_rates(&p, &q, phi_half).unwrap();
        let k = kernel_from_phi(&phi);
        let m = w_from_detailed_balance(&k).unwrap();
        let n = 6;
        let paths = enumerate_bridges(n, &[-1, 1], k.cutoff()).unwrap();
        let lw = law(&BridgeSystem::Walk(&k), n, &paths);
        let lg = law(&BridgeSystem::Gibbs(&m), n, &paths);
        prop_assert!((lw.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        prop_assert!(tv(&lw, &lg) <= 1e-11);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn acceptance_walks_match_their_energies(
        u in site_potential(),
        theta in 0.05f64..0.5,
        soft_wall in any::<bool>(),
    ) {
        let mode = if soft_wall { WallMode::MetropolisWall } else { WallMode::Reflect };
        let k = if soft_wall {
            metropolis_full_kernel(&u, theta).unwrap()
        } else {
            metropolis_reflect_kernel(&u, theta).unwrap()
        };
        let m = sos_from_metropolis(&u, mode, theta).unwrap();
        let n = 6;
        let paths = enumerate_bridges(n, &[-1, 0, 1], k.cutoff()).unwrap();
        let lw = law(&BridgeSystem::Walk(&k), n, &paths);
        let lg = law(&BridgeSystem::Gibbs(&m), n, &paths);
        prop_assert!((lw.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        prop_assert!(tv(&lw, &lg) <= 1e-12);
        // The unnormalized weights agree path by path, so the partition
        // functions agree too, not only the conditional laws.
        let zw = log_partition(&BridgeSystem::Walk(&k), n);
        let zg = log_partition(&BridgeSystem::Gibbs(&m), n);
        prop_assert!((zw - zg).abs() <= 1e-10);
    }

    #[test]
    fn marginals_are_probability_vectors(
        u in site_potential(),
        theta in 0.05f64..0.5,
        n in 2usize..10,
    ) {
        let k = metropolis_full_kernel(&u, theta).unwrap();
        let sys = BridgeSystem::Walk(&k);
        for t in 0..=n {
            let marg = height_marginal(&sys, n, t).unwrap();
            prop_assert!((marg.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert!(marg.iter().all(|&w| w >= 0.0));
            let mean = marginal_mean(&marg);
            prop_assert!(mean >= 0.0 && mean <= k.cutoff() as f64);
            if t == 0 || t == n {
                // Pinned endpoints.
                prop_assert!((marg[0] - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn constant_shifts_of_v_and_w_are_gauges(
        u in site_potential(),
        theta in 0.05f64..0.5,
        c in -1.5f64..1.5,
    ) {
        let m = sos_from_metropolis(&u, WallMode::MetropolisWall, theta).unwrap();
        let n = 6;
        let paths = enumerate_bridges(n, &[-1, 0, 1], m.cutoff()).unwrap();
        let base_law = law(&BridgeSystem::Gibbs(&m), n, &paths);
        let z = log_partition(&BridgeSystem::Gibbs(&m), n);

        let shifted_v: Vec<f64> = m.potential().iter().map(|v| v + c).collect();
        let mv = SosModel::new(shifted_v, m.energies().clone(), m.log_step_factor()).unwrap();
        let zv = log_partition(&BridgeSystem::Gibbs(&mv), n);
        prop_assert!((zv - (z - n as f64 * c)).abs() <= 1e-9);
        prop_assert!(tv(&base_law, &law(&BridgeSystem::Gibbs(&mv), n, &paths)) <= 1e-11);

        let mut shifted_w = m.energies().clone();
        for x in 0..=m.cutoff() {
            for y in x..=(x + m.band()).min(m.cutoff()) {
                if let Some(w) = m.energies().get(x, y) {
                    shifted_w.set(x, y, w + c);
                }
            }
        }
        let mw = SosModel::new(m.potential().to_vec(), shifted_w, m.log_step_factor()).unwrap();
        let zw = log_partition(&BridgeSystem::Gibbs(&mw), n);
        prop_assert!((zw - (z - n as f64 * c)).abs() <= 1e-9);
        prop_assert!(tv(&base_law, &law(&BridgeSystem::Gibbs(&mw), n, &paths)) <= 1e-11);
    }

    #[test]
    fn enlarging_the_cutoff_does_not_move_short_bridges(
        delta in -1.5f64..2.5,
        gamma in -0.5f64..1.0,
        m in 8usize..16,
    ) {
        let n = 8;
        let k_small = kernel_from_phi(&power_tail_phi(delta, gamma, m));
        let k_large = kernel_from_phi(&power_tail_phi(delta, gamma, m + 5));
        let mid_small = height_marginal(&BridgeSystem::Walk(&k_small), n, n / 2).unwrap();
        let mid_large = height_marginal(&BridgeSystem::Walk(&k_large), n, n / 2).unwrap();
        prop_assert_eq!(mid_small.len(), mid_large.len());
        for (a, b) in mid_small.iter().zip(&mid_large) {
            prop_assert!((a - b).abs() <= 1e-14);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn banded_walks_match_their_energies(
        j in 0.3f64..2.0,
        band in 2usize..5,
        u in proptest::collection::vec(-1.5f64..1.5, 8..14),
    ) {
        let base = BaseStepKernel::geometric(j, band).unwrap();
        let k = general_metropolis_kernel(&base, &u).unwrap();
        let m = sos_from_general(&base, &u).unwrap();
        let n = 6;
        let steps: Vec<i64> = (-(band as i64)..=band as i64).collect();
        let paths = enumerate_bridges(n, &steps, k.cutoff()).unwrap();
        let lw = law(&BridgeSystem::Walk(&k), n, &paths);
        let lg = law(&BridgeSystem::Gibbs(&m), n, &paths);
        prop_assert!((lw.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        prop_assert!(tv(&lw, &lg) <= 1e-11);
        let zw = log_partition(&BridgeSystem::Walk(&k), n);
        let zg = log_partition(&BridgeSystem::Gibbs(&m), n);
        prop_assert!((zw - zg).abs() <= 1e-10);
    }
}

/// The sampler and the marginal engine must tell the same story: empirical
/// mid-bridge frequencies of an exact sampler converge to the transfer
/// matrix marginal. One seeded draw keeps this deterministic.
#[test]
fn sampled_heights_follow_the_computed_marginal() {
    let phi = power_tail_phi(0.8, 0.3, 32);
    let k = kernel_from_phi(&phi);
    let n = 16;
    let sampler = walkline_core::bridge::BridgeSampler::new(&k, n).unwrap();
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(7);
    let mut hist = vec![0usize; k.cutoff() + 1];
    let trials = 200_000;
    for _ in 0..trials {
        let path = sampler.sample(&mut rng);
        hist[path.heights()[n / 2] as usize] += 1;
    }
    let marg = height_marginal(&BridgeSystem::Walk(&k), n, n / 2).unwrap();
    let mut worst: f64 = 0.0;
    for (x, &w) in marg.iter().enumerate() {
        let emp = hist[x] as f64 / trials as f64;
        worst = worst.max((emp - w).abs());
    }
    assert!(worst < 4e-3, "worst marginal gap {worst}");
}

/// Forbidden paths stay forbidden on both sides of the dictionary.
#[test]
fn both_sides_reject_the_same_paths() {
    let u = vec![0.0, 0.4, 0.8, 1.2, 1.6];
    let k = metropolis_reflect_kernel(&u, 0.5).unwrap();
    let m = sos_from_metropolis(&u, WallMode::Reflect, 0.5).unwrap();
    // Holding at the wall is impossible under reflection.
    let path = BridgePath::new(vec![0, 0, 1, 0]).unwrap();
    assert!(path_log_weight(&BridgeSystem::Walk(&k), &path).is_none());
    assert!(path_log_weight(&BridgeSystem::Gibbs(&m), &path).is_none());
    // A +2 jump is off the nearest-neighbor structure.
    let jump = BridgePath::new(vec![0, 2, 1, 0]).unwrap();
    assert!(path_log_weight(&BridgeSystem::Walk(&k), &jump).is_none());
    assert!(path_log_weight(&BridgeSystem::Gibbs(&m), &jump).is_none());
}
