//! Property tests for the simulator and evaluator invariants.
#![allow(clippy::needless_range_loop)]

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use spikeopt::encode::*;
use spikeopt::problems::*;
use spikeopt::snn::*;
use spikeopt::wta::{build_tsp_network, decode_tour, tsp_default_city_penalty};

fn arb_network(seed: u64, n: usize, p_edge: f64, refractory: u32) -> Network {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut net = Network::new(seed);
    for _ in 0..n {
        net.add_neuron(NeuronParams::lif_proportional(1.0, 0.4, 0.0, refractory)).unwrap();
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.gen::<f64>() < p_edge {
                net.connect(i as NeuronId, j as NeuronId, rng.gen_range(-1.0..1.5), rng.gen_range(1..5))
                    .unwrap();
            }
        }
    }
    net
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Fixed seed and structure give identical traces, run after run.
    #[test]
    fn determinism(seed in 0u64..500, n in 2usize..12) {
        let noise = NoiseSchedule::new(0.3, 0.999).unwrap();
        let ta = arb_network(seed, n, 0.3, 1).run(300, Some(&noise)).unwrap();
        let tb = arb_network(seed, n, 0.3, 1).run(300, Some(&noise)).unwrap();
        prop_assert_eq!(ta, tb);
    }

    /// No neuron ever fires twice within its refractory window.
    #[test]
    fn refractory_law(seed in 0u64..500, refractory in 0u32..6) {
        let noise = NoiseSchedule::new(0.7, 1.0).unwrap();
        let trace = arb_network(seed, 6, 0.3, refractory).run(400, Some(&noise)).unwrap();
        for i in 0..6 {
            let ticks = trace.spikes_of(i as NeuronId);
            for w in ticks.windows(2) {
                prop_assert!(w[1] - w[0] > refractory as u64);
            }
        }
    }

    /// A spike on a synapse with delay d lands exactly d ticks later.
    #[test]
    fn delay_exactness(delay in 1u32..20, weight in 0.5f64..3.0) {
        let mut net = Network::new(0);
        let a = net.add_neuron(NeuronParams::lif_subtractive(0.4, 0.0, 0.0, 0)).unwrap();
        let b = net.add_neuron(NeuronParams::lif_subtractive(0.4, 0.0, 0.0, 0)).unwrap();
        net.connect(a, b, weight, delay).unwrap();
        net.force_spikes(&[a]);
        for t in 0..(delay as u64 + 3) {
            let spiked = net.step();
            let b_fired = spiked.contains(&b);
            prop_assert_eq!(b_fired, t == delay as u64, "tick {}", t);
        }
    }

    /// Readout marks exactly the neurons that spiked inside `(t - tau, t]`.
    #[test]
    fn readout_window(spike_at in 0u64..200, tau in 1u64..30, query in 0u64..200) {
        let trace = SpikeTrace {
            n_neurons: 2,
            ticks: 200,
            records: vec![(spike_at, 1)],
            per_tick: {
                let mut v = vec![0u32; 200];
                v[spike_at as usize] = 1;
                v
            },
            delivered_events: 0,
            injected_spikes: 0,
        };
        let state = readout_state(&trace, query, tau).unwrap();
        let in_window = spike_at <= query && query < spike_at + tau;
        prop_assert_eq!(state[1] == 1, in_window);
        prop_assert_eq!(state[0], 0);
    }

    /// Encode/decode round trips stay within the quantization bounds.
    #[test]
    fn encode_round_trips(value in 0.0f64..=1.0, len in 3u64..120) {
        let window = EncodingWindow::ticks(len).unwrap();
        let rate = rate_decode(&rate_encode(value, &window).unwrap(), &window).unwrap();
        prop_assert!((rate - value).abs() <= 0.5 / len as f64 + 1e-12);
        let ttfs = ttfs_decode(ttfs_encode(value, &window).unwrap(), &window).unwrap();
        prop_assert!((ttfs - value).abs() <= 0.5 / (len - 1) as f64 + 1e-12);
        let isi = isi_decode(&isi_encode(value, &window).unwrap(), &window).unwrap();
        prop_assert!((isi - value).abs() <= 0.5 / (len - 2) as f64 + 1e-12);
    }

    /// TTFS is non-increasing in the encoded value.
    #[test]
    fn ttfs_orders_values(a in 0.0f64..=1.0, b in 0.0f64..=1.0, len in 2u64..300) {
        let window = EncodingWindow::ticks(len).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(ttfs_encode(hi, &window).unwrap() <= ttfs_encode(lo, &window).unwrap());
    }

    /// QUBO objective equals the Ising energy plus offset on random assignments.
    #[test]
    fn qubo_ising_agreement(seed in 0u64..300, n in 1usize..10, mask in 0u32..1024) {
        let inst = gen_random_qubo(n, -7, 7, seed);
        let ising = qubo_to_ising(&inst);
        let x: Vec<u8> = (0..n).map(|i| (mask >> i & 1) as u8).collect();
        let s: Vec<i8> = x.iter().map(|&b| if b == 1 { 1 } else { -1 }).collect();
        let qv = qubo_objective(&inst, &x).unwrap();
        let iv = ising.energy(&s).unwrap() + ising.offset;
        prop_assert!((qv - iv).abs() <= 1e-9);
    }

    /// Flip deltas match objective differences exactly.
    #[test]
    fn qubo_flip_delta_consistency(seed in 0u64..300, n in 1usize..10, mask in 0u32..1024, flip in 0usize..10) {
        let flip = flip % n;
        let inst = gen_random_qubo(n, -7, 7, seed);
        let x: Vec<u8> = (0..n).map(|i| (mask >> i & 1) as u8).collect();
        let mut y = x.clone();
        y[flip] ^= 1;
        let delta = qubo_flip_delta(&inst, &x, flip);
        let direct = qubo_objective(&inst, &y).unwrap() - qubo_objective(&inst, &x).unwrap();
        prop_assert!((delta - direct).abs() <= 1e-9);
    }

    /// The tour decoder is total: arbitrary traces decode or report
    /// infeasibility, never panic.
    #[test]
    fn decode_tour_is_total(records in prop::collection::vec((0u64..50, 0u32..16), 0..64)) {
        let inst = gen_random_tsp(4, 1);
        let net = build_tsp_network(&inst, 1.0, tsp_default_city_penalty(4, 1.0)).unwrap();
        let mut sorted = records.clone();
        sorted.sort();
        let trace = SpikeTrace {
            n_neurons: 16,
            ticks: 50,
            records: sorted,
            per_tick: vec![0; 50],
            delivered_events: 0,
            injected_spikes: 0,
        };
        let decoded = decode_tour(&trace, &net, 49);
        if let Some(tour) = decoded {
            prop_assert!(tour_length(&inst, &tour).is_ok());
        }
    }

    /// Evaluators are pure: repeated evaluation gives identical results.
    #[test]
    fn evaluators_are_pure(seed in 0u64..200, mask in 0u32..4096) {
        let qubo = gen_random_qubo(12, -5, 5, seed);
        let x: Vec<u8> = (0..12).map(|i| (mask >> i & 1) as u8).collect();
        prop_assert_eq!(qubo_objective(&qubo, &x).unwrap(), qubo_objective(&qubo, &x).unwrap());
        let f = gen_random_3sat(12, 30, seed);
        prop_assert_eq!(cnf_eval(&f, &x).unwrap(), cnf_eval(&f, &x).unwrap());
    }
}

/// Per-neuron noise frequency stays within 3-sigma binomial bounds over a
/// million ticks at a t-independent probability.
#[test]
fn noise_frequency_binomial_bound() {
    let p = 0.05;
    let schedule = NoiseSchedule::new(p, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let n = 4usize;
    let ticks: u64 = 1_000_000;
    let mut counts = vec![0u64; n];
    for t in 0..ticks {
        for i in sample_noise(&schedule, n, t, &mut rng) {
            counts[i as usize] += 1;
        }
    }
    let sigma = (ticks as f64 * p * (1.0 - p)).sqrt();
    for (i, &c) in counts.iter().enumerate() {
        let deviation = (c as f64 - ticks as f64 * p).abs();
        assert!(
            deviation <= 3.0 * sigma,
            "neuron {i}: count {c} deviates {deviation:.0} (3 sigma = {:.0})",
            3.0 * sigma
        );
    }
}

/// Poisson spike counts pass a chi-square goodness-of-fit against
/// Binomial(T, value) at alpha = 0.01.
#[test]
fn poisson_chi_square_fit() {
    let value = 0.3;
    let t: u64 = 100_000;
    let window = EncodingWindow::ticks(t).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    // partition ticks into 1000 blocks of 100; block counts ~ Binomial(100, 0.3)
    let train = poisson_encode(value, &window, &mut rng).unwrap();
    let block = 100u64;
    let n_blocks = (t / block) as usize;
    let mut counts = vec![0u32; n_blocks];
    for tick in train {
        counts[(tick / block) as usize] += 1;
    }
    // bin the block counts; merge tails so every expected bin is >= 5
    let binom_pmf = |k: u64| -> f64 {
        let mut log_p = 0.0;
        for i in 0..k {
            log_p += ((block - i) as f64).ln() - ((i + 1) as f64).ln();
        }
        log_p += k as f64 * value.ln() + (block - k) as f64 * (1.0 - value).ln();
        log_p.exp()
    };
    let lo = 18u64;
    let hi = 42u64;
    let n_bins = (hi - lo + 3) as usize; // below-lo, each k in lo..=hi, above-hi
    let slot_of = |k: u64| -> usize {
        if k < lo {
            0
        } else if k > hi {
            n_bins - 1
        } else {
            (k - lo + 1) as usize
        }
    };
    let mut expected = vec![0.0f64; n_bins];
    let mut observed = vec![0.0f64; n_bins];
    for k in 0..=block {
        expected[slot_of(k)] += binom_pmf(k) * n_blocks as f64;
    }
    for &c in &counts {
        observed[slot_of(c as u64)] += 1.0;
    }
    let chi2: f64 = expected
        .iter()
        .zip(&observed)
        .filter(|(e, _)| **e > 0.0)
        .map(|(e, o)| (o - e) * (o - e) / e)
        .sum();
    let dof = expected.iter().filter(|&&e| e > 0.0).count() as f64 - 1.0;
    // chi-square critical value at alpha = 0.01 approximated by the
    // Wilson-Hilferty transform
    let z99 = 2.326_347_874;
    let critical = dof * (1.0 - 2.0 / (9.0 * dof) + z99 * (2.0 / (9.0 * dof)).sqrt()).powi(3);
    assert!(chi2 <= critical, "chi2 {chi2:.1} exceeds critical {critical:.1} (dof {dof})");
}

/// Inserting a silent neuron at the end never changes earlier neurons'
/// noise draws, across all ticks.
#[test]
fn rng_stream_discipline() {
    let schedule = NoiseSchedule::new(0.5, 0.9995).unwrap();
    let mut rng_small = ChaCha8Rng::seed_from_u64(21);
    let mut rng_large = ChaCha8Rng::seed_from_u64(21);
    for t in 0..2000 {
        let small = sample_noise(&schedule, 7, t, &mut rng_small);
        let large: Vec<_> = sample_noise(&schedule, 8, t, &mut rng_large)
            .into_iter()
            .filter(|&i| i < 7)
            .collect();
        assert_eq!(small, large, "tick {t}");
    }
}
