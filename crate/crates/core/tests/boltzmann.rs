//! Distributional check of the energy-net dynamics: tau-hold readouts of a
//! plain 8-neuron net must follow the Boltzmann distribution.
#![allow(clippy::needless_range_loop)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spikeopt::wta::{boltzmann_prob, EnergyNet};

fn eight_neuron_net(seed: u64, temperature: f64, hold: u64) -> EnergyNet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 8;
    let mut w = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v: f64 = rng.gen_range(-0.6..0.6);
            w[i][j] = v;
            w[j][i] = v;
        }
    }
    let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
    EnergyNet::new(w, b, temperature, hold).unwrap()
}

fn empirical_tv(net: &mut EnergyNet, samples: u64, seed: u64) -> f64 {
    let n = net.n_neurons();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    net.reset_state();
    for _ in 0..20_000 {
        net.sweep(&mut rng); // burn-in
    }
    let mut histogram = vec![0u64; 1 << n];
    for _ in 0..samples {
        net.sweep(&mut rng);
        let state = net.readout();
        let mut mask = 0usize;
        for (i, &b) in state.iter().enumerate() {
            mask |= (b as usize) << i;
        }
        histogram[mask] += 1;
    }
    let mut tv = 0.0;
    for mask in 0..(1usize << n) {
        let state: Vec<u8> = (0..n).map(|i| (mask >> i & 1) as u8).collect();
        let p = boltzmann_prob(&state, net).unwrap();
        let observed = histogram[mask] as f64 / samples as f64;
        tv += (p - observed).abs();
    }
    tv / 2.0
}

#[test]
fn tau_hold_readouts_sample_boltzmann() {
    let mut net = eight_neuron_net(7, 1.0, 2);
    let tv = empirical_tv(&mut net, 1_000_000, 42);
    println!("TV distance over 10^6 readouts (hold 2): {tv:.4}");
    assert!(tv <= 0.05, "TV distance {tv:.4} exceeds 0.05");
}

#[test]
fn hold_one_matches_plain_gibbs() {
    let mut net = eight_neuron_net(19, 0.8, 1);
    let tv = empirical_tv(&mut net, 400_000, 7);
    println!("TV distance (hold 1): {tv:.4}");
    assert!(tv <= 0.05, "TV distance {tv:.4} exceeds 0.05");
}

#[test]
fn longer_holds_stay_calibrated() {
    let mut net = eight_neuron_net(23, 1.2, 5);
    let tv = empirical_tv(&mut net, 600_000, 11);
    println!("TV distance (hold 5): {tv:.4}");
    assert!(tv <= 0.05, "TV distance {tv:.4} exceeds 0.05");
}
