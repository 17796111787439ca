use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use replab_core::fss::jackknife;
use replab_core::lattice::Sign;
use replab_core::noise::{fundamental_probs, nishimori_couplings, CouplingOptions, EffectiveRates};
use replab_core::spin_glass::*;

#[test]
fn disorder_weight_is_boltzmann_weight_on_nishimori_line() {
    // Summing log pi over cells of the gauge-transformed disorder gives
    // N kappa0 - kappa_norm H(sigma) for every spin configuration.
    let rates = EffectiveRates::new(0.07, 0.04, 0.03).unwrap();
    let c = nishimori_couplings(&fundamental_probs(&rates), &CouplingOptions::default()).unwrap();
    let log_pi = fundamental_probs(&rates).pi.map(f64::ln);
    let l = 5;
    let lat = BondLattice::from_rates(l, &rates, &CouplingOptions::default(), 4).unwrap();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(8);
    for _ in 0..20 {
        let s: Vec<Sign> = (0..l * l).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
        let at = |x: usize, y: usize| s[lat.site(x, y)];
        let mut total = 0.0;
        for y in 0..l {
            for x in 0..l {
                let [h, v, _] = lat.signs[y * l + x];
                let v2 = v * at(x, y) * at(x + 1, y);
                let h2 = h * at(x + 1, y) * at(x + 1, y + 1);
                total += log_pi[match (v2, h2) {
                    (1, 1) => 0,
                    (-1, 1) => 1,
                    (1, -1) => 2,
                    _ => 3,
                }];
            }
        }
        let expect = (l * l) as f64 * c.kappa[0] - c.kappa_norm * lat.energy(&s);
        assert!((total - expect).abs() < 1e-9 * expect.abs(), "{total} vs {expect}");
    }
}

#[test]
fn two_by_two_stationary_distribution_is_boltzmann() {
    let signs = vec![[1, -1, -1], [1, 1, 1], [-1, 1, -1], [1, 1, 1]];
    let mut lat = BondLattice::with_signs(2, [1.0, 0.7, 0.4], signs).unwrap();
    let t = 1.7;
    let states: Vec<Vec<Sign>> = (0..16u32)
        .map(|m| (0..4).map(|b| if m >> b & 1 == 1 { -1 } else { 1 }).collect())
        .collect();
    let weights: Vec<f64> = states.iter().map(|s| (-lat.energy(s) / t).exp()).collect();
    let z: f64 = weights.iter().sum();

    let mut rng = Xoshiro256PlusPlus::seed_from_u64(21);
    let mut st = ReplicaState::random(&lat, &mut rng);
    let mut counts = [0f64; 16];
    let draws = 200_000;
    for _ in 0..draws {
        for _ in 0..3 {
            metropolis_sweep(&mut st, &mut lat, t, &mut rng);
        }
        let idx = st
            .spins
            .iter()
            .enumerate()
            .map(|(b, &s)| usize::from(s < 0) << b)
            .sum::<usize>();
        counts[idx] += 1.0;
    }
    let chi2: f64 = counts
        .iter()
        .zip(&weights)
        .map(|(&c, &w)| {
            let e = draws as f64 * w / z;
            (c - e).powi(2) / e
        })
        .sum();
    // 15 degrees of freedom: mean 15, sd sqrt(30).
    assert!(chi2 < 15.0 + 3.0 * 30f64.sqrt(), "chi2 = {chi2}");
}

#[test]
fn small_lattice_matches_enumeration() {
    let rates = EffectiveRates::new(0.1, 0.1, 0.1).unwrap();
    let temps = vec![0.9, 1.4, 2.2, 3.5];
    for sample in 0..3u64 {
        let lat = BondLattice::from_rates(4, &rates, &CouplingOptions::default(), 100 + sample).unwrap();
        let mut sched = McSchedule::desk(temps.clone());
        sched.n_met = 1;
        sched.swap_rounds = 200_000;
        sched.bins = 30;
        let series = run_disorder_sample(&lat, &sched, 7 + sample).unwrap();
        for (k, &t) in temps.iter().enumerate() {
            let exact = exhaustive_observables(&lat, t).unwrap();
            for (bins, want) in [(&series.g0_bins[k], exact.g0), (&series.gq_bins[k], exact.gq)] {
                let (mean, err) = jackknife(bins).unwrap();
                assert!(
                    (mean - want).abs() <= 3.0 * err,
                    "sample {sample} T={t}: {mean} ± {err} vs {want}"
                );
            }
        }
    }
}

#[test]
fn clean_lattice_orders_at_low_temperature() {
    let lat = BondLattice::uniform(8, [1.0, 1.0, 0.0]).unwrap();
    let mut sched = McSchedule::desk(vec![1.2, 2.27, 4.0]);
    sched.swap_rounds = 2000;
    let series = run_disorder_sample(&lat, &sched, 1).unwrap();
    let xi: Vec<f64> = (0..3)
        .map(|k| correlation_length(series.g0_mean(k), series.gq_mean(k), 8).unwrap() / 8.0)
        .collect();
    assert!(xi[0] > xi[1] && xi[1] > xi[2], "{xi:?}");
    assert!(xi[0] > 1.0 && xi[2] < 0.3, "{xi:?}");
}
