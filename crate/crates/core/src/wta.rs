//! Winner-take-all energy networks for CSP and TSP.
//!
//! An [`EnergyNet`] couples binary neurons through a symmetric weight matrix
//! `W` and bias `b` with energy `E(x) = x^T W x - b^T x`. Dynamics are
//! asynchronous: one neuron updates per micro-step, and a firing neuron's
//! state bit holds at 1 for `hold` ticks. A free neuron fires with
//! probability `sigmoid(-dE/T - ln(hold))`; for a plain net (no WTA groups)
//! the readout then samples the Boltzmann distribution
//! `p(x) = exp(-E(x)/T) / z` in the stationary regime.
//!
//! CSP and TSP nets add hard winner-take-all groups: a spike inside a group
//! clears the other members beyond the `k` allowed winners, so every readout
//! is one-hot per group. Inhibitory couplings carry negative synaptic weight
//! (positive energy), excitatory couplings the opposite.

use std::cell::OnceCell;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::anneal::AnnealConfig;
use crate::error::{Error, Result};
use crate::problems::{tour_length, CspInstance, TspInstance};
use crate::snn::{Network, NeuronId, NeuronParams, SpikeTrace};

/// A lateral-inhibition group allowing at most `k` simultaneous winners.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WtaSubnetwork {
    pub members: Vec<NeuronId>,
    /// Synaptic weight between members; must be negative (inhibition).
    pub inhibition_weight: f64,
    pub k: usize,
}

impl WtaSubnetwork {
    pub fn validate(&self) -> Result<()> {
        if self.inhibition_weight >= 0.0 {
            return Err(Error::OutOfRange { what: "inhibition_weight", value: self.inhibition_weight });
        }
        if self.k == 0 || self.k > self.members.len() {
            return Err(Error::OutOfRange { what: "wta k", value: self.k as f64 });
        }
        Ok(())
    }
}

/// Quadratic form `sum_ij W_ij x_i x_j - sum_i b_i x_i`.
pub fn energy(state: &[u8], weights: &[Vec<f64>], bias: &[f64]) -> Result<f64> {
    let n = state.len();
    if weights.len() != n || bias.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: weights.len() });
    }
    let mut e = 0.0;
    for i in 0..n {
        if state[i] == 0 {
            continue;
        }
        e -= bias[i];
        for j in 0..n {
            if state[j] != 0 {
                e += weights[i][j];
            }
        }
    }
    Ok(e)
}

/// Stochastic binary network governed by an energy function.
#[derive(Debug, Clone)]
pub struct EnergyNet {
    network: Network,
    /// Symmetric, zero-diagonal energy weights (dense n x n).
    weights: Vec<f64>,
    bias: Vec<f64>,
    pub temperature: f64,
    /// Readout hold: ticks a bit stays 1 after its neuron fires.
    pub hold: u64,
    subnetworks: Vec<WtaSubnetwork>,
    groups_of: Vec<Vec<usize>>,
    /// `group_mates[i * n + j]`: i and j share a WTA group.
    group_mates: Vec<bool>,
    n: usize,
    normalizer: OnceCell<f64>,
    // dynamic state
    zeta: Vec<u64>,
    last_spike: Vec<Option<u64>>,
    active: Vec<NeuronId>,
    active_pos: Vec<usize>,
    sweep: u64,
}

const NOT_ACTIVE: usize = usize::MAX;

impl EnergyNet {
    /// Builds from a symmetric zero-diagonal weight matrix and bias vector.
    pub fn new(weights: Vec<Vec<f64>>, bias: Vec<f64>, temperature: f64, hold: u64) -> Result<Self> {
        let n = bias.len();
        if weights.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: weights.len() });
        }
        if temperature <= 0.0 {
            return Err(Error::OutOfRange { what: "temperature", value: temperature });
        }
        if hold == 0 {
            return Err(Error::OutOfRange { what: "hold", value: 0.0 });
        }
        let mut flat = vec![0.0; n * n];
        for i in 0..n {
            if weights[i].len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: weights[i].len() });
            }
            if weights[i][i] != 0.0 {
                return Err(Error::structure(format!("energy weight diagonal must be zero at {i}")));
            }
            for j in 0..n {
                if weights[i][j] != weights[j][i] {
                    return Err(Error::structure(format!("energy weights not symmetric at ({i},{j})")));
                }
                flat[i * n + j] = weights[i][j];
            }
        }
        // structural mirror: synaptic weight = -2 * energy weight
        let mut network = Network::new(0);
        for i in 0..n {
            network.add_neuron(NeuronParams::stochastic(1.0, 1.0, 0.0, 0))?;
            network.set_bias(i as NeuronId, bias[i]);
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let w = flat[i * n + j];
                if w != 0.0 {
                    network.connect(i as NeuronId, j as NeuronId, -2.0 * w, 1)?;
                    network.connect(j as NeuronId, i as NeuronId, -2.0 * w, 1)?;
                }
            }
        }
        Ok(Self {
            network,
            weights: flat,
            bias,
            temperature,
            hold,
            subnetworks: Vec::new(),
            groups_of: vec![Vec::new(); n],
            group_mates: vec![false; n * n],
            n,
            normalizer: OnceCell::new(),
            zeta: vec![0; n],
            last_spike: vec![None; n],
            active: Vec::new(),
            active_pos: vec![NOT_ACTIVE; n],
            sweep: 0,
        })
    }

    pub fn add_subnetwork(&mut self, subnet: WtaSubnetwork) -> Result<()> {
        subnet.validate()?;
        for &m in &subnet.members {
            if m as usize >= self.n {
                return Err(Error::structure(format!("WTA member {m} outside the net")));
            }
            self.groups_of[m as usize].push(self.subnetworks.len());
        }
        for &a in &subnet.members {
            for &b in &subnet.members {
                if a != b {
                    self.group_mates[a as usize * self.n + b as usize] = true;
                }
            }
        }
        self.subnetworks.push(subnet);
        Ok(())
    }

    pub fn n_neurons(&self) -> usize {
        self.n
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn subnetworks(&self) -> &[WtaSubnetwork] {
        &self.subnetworks
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }

    pub fn bias_of(&self, i: usize) -> f64 {
        self.bias[i]
    }

    /// Current readout: bit i is 1 while neuron i's hold is running.
    pub fn readout(&self) -> Vec<u8> {
        self.zeta.iter().map(|&z| (z > 0) as u8).collect()
    }

    pub fn last_spike_of(&self, i: usize) -> Option<u64> {
        self.last_spike[i]
    }

    pub fn energy_of(&self, state: &[u8]) -> Result<f64> {
        if state.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: state.len() });
        }
        Ok(self.energy_of_state(state))
    }

    /// Unchecked energy of a full state vector.
    pub fn energy_of_state(&self, state: &[u8]) -> f64 {
        debug_assert_eq!(state.len(), self.n);
        let mut e = 0.0;
        for i in 0..self.n {
            if state[i] == 0 {
                continue;
            }
            e -= self.bias[i];
            for j in 0..self.n {
                if state[j] != 0 {
                    e += self.weights[i * self.n + j];
                }
            }
        }
        e
    }

    fn energy_fast(&self, state_mask: u32) -> f64 {
        let mut e = 0.0;
        for i in 0..self.n {
            if state_mask >> i & 1 == 0 {
                continue;
            }
            e -= self.bias[i];
            for j in 0..self.n {
                if state_mask >> j & 1 == 1 {
                    e += self.weights[i * self.n + j];
                }
            }
        }
        e
    }

    /// Local field of neuron `i`: minus the energy change of setting its bit,
    /// over the current active set. Active group-mates are excluded — a spike
    /// displaces them via the hard WTA, so a challenger is weighed against
    /// the state it would create, not the incumbent it replaces.
    fn local_field(&self, i: usize) -> f64 {
        let mut coupling = 0.0;
        for &j in &self.active {
            if !self.group_mates[i * self.n + j as usize] {
                coupling += self.weights[i * self.n + j as usize];
            }
        }
        self.bias[i] - 2.0 * coupling
    }

    fn set_active(&mut self, i: usize, hold: u64) {
        if self.active_pos[i] == NOT_ACTIVE {
            self.active_pos[i] = self.active.len();
            self.active.push(i as NeuronId);
        }
        self.zeta[i] = hold;
    }

    fn clear_active(&mut self, i: usize) {
        self.zeta[i] = 0;
        let pos = self.active_pos[i];
        if pos != NOT_ACTIVE {
            self.active.swap_remove(pos);
            self.active_pos[i] = NOT_ACTIVE;
            if pos < self.active.len() {
                let moved = self.active[pos];
                self.active_pos[moved as usize] = pos;
            }
        }
    }

    /// One asynchronous site update; returns the neuron if it spiked.
    fn update_site(&mut self, i: usize, rng: &mut ChaCha8Rng) -> Option<NeuronId> {
        if self.zeta[i] > 1 {
            self.zeta[i] -= 1;
            return None;
        }
        // free: zeta is 0 or 1 (a held bit may refire as its hold ends)
        let v = self.local_field(i) / self.temperature - (self.hold as f64).ln();
        let p = 1.0 / (1.0 + (-v).exp());
        let draw: f64 = rng.gen();
        if draw < p {
            self.set_active(i, self.hold);
            self.last_spike[i] = Some(self.sweep);
            self.enforce_wta(i);
            Some(i as NeuronId)
        } else {
            if self.zeta[i] == 1 {
                self.clear_active(i);
            }
            None
        }
    }

    /// Clears over-quota members after `i` fired: oldest spikes go first,
    /// higher index breaking ties.
    fn enforce_wta(&mut self, i: usize) {
        for g in self.groups_of[i].clone() {
            let subnet = &self.subnetworks[g];
            let k = subnet.k;
            let mut actives: Vec<NeuronId> = subnet
                .members
                .iter()
                .copied()
                .filter(|&m| self.zeta[m as usize] > 0)
                .collect();
            if actives.len() <= k {
                continue;
            }
            actives.sort_by_key(|&m| {
                (
                    self.last_spike[m as usize].map_or(0, |t| t + 1),
                    std::cmp::Reverse(m),
                )
            });
            // never clear the neuron that just fired
            let victims: Vec<NeuronId> = actives
                .iter()
                .copied()
                .filter(|&m| m as usize != i)
                .take(actives.len() - k)
                .collect();
            for m in victims {
                self.clear_active(m as usize);
            }
        }
    }

    /// One tick of dynamics: `n` random single-site updates. Returns the
    /// neurons that spiked during the sweep.
    pub fn sweep(&mut self, rng: &mut ChaCha8Rng) -> Vec<NeuronId> {
        let mut spikes = Vec::new();
        for _ in 0..self.n {
            let site = rng.gen_range(0..self.n);
            if let Some(s) = self.update_site(site, rng) {
                spikes.push(s);
            }
        }
        self.sweep += 1;
        spikes
    }

    pub fn sweeps_done(&self) -> u64 {
        self.sweep
    }

    pub fn reset_state(&mut self) {
        self.zeta.iter_mut().for_each(|z| *z = 0);
        self.last_spike.iter_mut().for_each(|s| *s = None);
        self.active.clear();
        self.active_pos.iter_mut().for_each(|p| *p = NOT_ACTIVE);
        self.sweep = 0;
    }

    /// Maximum number of simultaneously active members over all subnetworks.
    pub fn max_active_winners(&self) -> usize {
        self.subnetworks
            .iter()
            .map(|s| s.members.iter().filter(|&&m| self.zeta[m as usize] > 0).count())
            .max()
            .unwrap_or(0)
    }
}

/// Boltzmann probability `exp(-E(state)/T) / z`; the normalizer enumerates
/// all states, so nets larger than 20 neurons are rejected.
pub fn boltzmann_prob(state: &[u8], net: &EnergyNet) -> Result<f64> {
    let n = net.n;
    if state.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: state.len() });
    }
    if n > 20 {
        return Err(Error::TooLarge(format!("Boltzmann normalizer capped at 20 neurons, got {n}")));
    }
    let z = *net.normalizer.get_or_init(|| {
        let mut total = 0.0;
        for mask in 0..(1u32 << n) {
            total += (-net.energy_fast(mask) / net.temperature).exp();
        }
        total
    });
    let e = net.energy_of(state)?;
    Ok((-e / net.temperature).exp() / z)
}

// ---------------------------------------------------------------------------
// CSP
// ---------------------------------------------------------------------------

/// One neuron per (variable, value) with per-variable hard WTA; forbidden
/// cross pairs carry an inhibitory penalty.
#[derive(Debug, Clone)]
pub struct CspNet {
    pub energy_net: EnergyNet,
    inst: CspInstance,
    /// variable -> value index -> neuron id
    neuron_of: Vec<Vec<NeuronId>>,
    pub constraint_penalty: f64,
}

const CSP_ACTIVATION_BIAS: f64 = 1.0;

/// The default penalty on a violated forbidden pair.
pub const CSP_DEFAULT_PENALTY: f64 = 3.0;

pub fn build_csp_network(inst: &CspInstance, penalty: f64) -> Result<CspNet> {
    if penalty <= 0.0 {
        return Err(Error::OutOfRange { what: "constraint penalty", value: penalty });
    }
    let n_vars = inst.n_vars();
    let mut neuron_of = Vec::with_capacity(n_vars);
    let mut total = 0usize;
    for d in &inst.domains {
        neuron_of.push((total..total + d.len()).map(|i| i as NeuronId).collect::<Vec<_>>());
        total += d.len();
    }
    let mut weights = vec![vec![0.0; total]; total];
    let bias = vec![CSP_ACTIVATION_BIAS; total];
    let add_pair = |weights: &mut Vec<Vec<f64>>, a: usize, b: usize, pair_energy: f64| {
        weights[a][b] += pair_energy / 2.0;
        weights[b][a] += pair_energy / 2.0;
    };
    // intra-variable inhibition (energy bookkeeping; the hard WTA enforces it)
    let inhibition_energy = 2.0 * (penalty + CSP_ACTIVATION_BIAS) + 1.0;
    for members in &neuron_of {
        for i in 0..members.len() {
            for j in (i + 1)..members.len() {
                add_pair(&mut weights, members[i] as usize, members[j] as usize, inhibition_energy);
            }
        }
    }
    for c in &inst.constraints {
        for &(va, vb) in &c.forbidden {
            let ia = inst.domains[c.a].iter().position(|&v| v == va).expect("validated");
            let ib = inst.domains[c.b].iter().position(|&v| v == vb).expect("validated");
            add_pair(
                &mut weights,
                neuron_of[c.a][ia] as usize,
                neuron_of[c.b][ib] as usize,
                penalty,
            );
        }
    }
    let mut energy_net = EnergyNet::new(weights, bias, 1.0, 1)?;
    for members in &neuron_of {
        energy_net.add_subnetwork(WtaSubnetwork {
            members: members.clone(),
            inhibition_weight: -inhibition_energy,
            k: 1,
        })?;
    }
    Ok(CspNet { energy_net, inst: inst.clone(), neuron_of, constraint_penalty: penalty })
}

impl CspNet {
    /// Decodes the per-variable winner: the active member if any, else the
    /// most recent spike (lowest value index on ties), else the first domain
    /// value.
    pub fn decode(&self) -> Vec<i32> {
        let mut assignment = Vec::with_capacity(self.inst.n_vars());
        for (var, members) in self.neuron_of.iter().enumerate() {
            let mut winner = 0usize;
            let mut winner_key = (0u64, 0i64);
            for (vi, &m) in members.iter().enumerate() {
                let active = self.energy_net.zeta[m as usize] > 0;
                let spike = self.energy_net.last_spike[m as usize];
                // rank: active beats held-expired; later spikes beat earlier;
                // lower value index beats higher on ties
                let key = (
                    spike.map_or(0, |t| t + 1) * 2 + active as u64,
                    -(vi as i64),
                );
                if vi == 0 || key > winner_key {
                    winner = vi;
                    winner_key = key;
                }
            }
            assignment.push(self.inst.domains[var][winner]);
        }
        assignment
    }

    pub fn instance(&self) -> &CspInstance {
        &self.inst
    }
}

/// Outcome of a CSP solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CspSolveResult {
    pub assignment: Vec<i32>,
    pub satisfied: bool,
    pub violations: usize,
    /// First sweep with a satisfying readout (or where the best was seen).
    pub tick_found: u64,
    pub spikes_total: u64,
    pub synaptic_events: u64,
    pub max_winners_observed: usize,
}

const WTA_TEMP_FLOOR_RATIO: f64 = 0.04;

fn wta_temperature(base: f64, config: &AnnealConfig, sweep: u64) -> f64 {
    let decayed = config.noise.beta.powi(sweep.min(i32::MAX as u64) as i32);
    base * decayed.max(WTA_TEMP_FLOOR_RATIO)
}

/// Anneals the net and returns the first satisfying assignment, or the
/// fewest-violations assignment seen when the budget runs out.
pub fn solve_csp(net: &mut CspNet, config: &AnnealConfig, seed: u64) -> Result<CspSolveResult> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ WTA_SEED_SALT);
    net.energy_net.reset_state();
    let base_temp = net.energy_net.temperature;
    let mut spikes_total = 0u64;
    let mut synaptic_events = 0u64;
    let mut best: Option<(Vec<i32>, usize, u64)> = None;
    let mut max_winners = 0usize;
    for sweep in 0..config.ticks {
        net.energy_net.temperature = wta_temperature(base_temp, config, sweep);
        let spikes = net.energy_net.sweep(&mut rng);
        spikes_total += spikes.len() as u64;
        for &s in &spikes {
            synaptic_events += net.energy_net.network().out_degree(s) as u64;
        }
        max_winners = max_winners.max(net.energy_net.max_active_winners());
        let assignment = net.decode();
        let violations = net.inst.violations(&assignment)?;
        let better = best.as_ref().is_none_or(|(_, bv, _)| violations < *bv);
        if better {
            best = Some((assignment, violations, sweep));
            if violations == 0 {
                break;
            }
        }
    }
    net.energy_net.temperature = base_temp;
    let (assignment, violations, tick_found) = best.expect("at least one sweep");
    Ok(CspSolveResult {
        satisfied: violations == 0,
        assignment,
        violations,
        tick_found,
        spikes_total,
        synaptic_events,
        max_winners_observed: max_winners,
    })
}

// keeps WTA solver streams apart from the annealer's noise streams
const WTA_SEED_SALT: u64 = 0x5DEE_CE66_D001_0001;

// ---------------------------------------------------------------------------
// TSP
// ---------------------------------------------------------------------------

/// N step-groups of N city neurons: adjacent steps excite near cities,
/// repeated cities across steps are penalized, each step is a hard WTA.
#[derive(Debug, Clone)]
pub struct TspNet {
    pub energy_net: EnergyNet,
    inst: TspInstance,
    pub excitation_scale: f64,
    pub city_penalty: f64,
}

/// Default penalty for visiting a city twice: `n * excitation_scale + 1`,
/// which puts every infeasible state strictly above every feasible one.
pub fn tsp_default_city_penalty(n: usize, excitation_scale: f64) -> f64 {
    n as f64 * excitation_scale + 1.0
}

pub fn build_tsp_network(inst: &TspInstance, excitation_scale: f64, city_penalty: f64) -> Result<TspNet> {
    let n = inst.n();
    if n < 2 {
        return Err(Error::structure("TSP net needs at least 2 cities"));
    }
    if excitation_scale <= 0.0 || city_penalty <= 0.0 {
        return Err(Error::OutOfRange { what: "tsp scales", value: excitation_scale.min(city_penalty) });
    }
    let total = n * n;
    let neuron = |step: usize, city: usize| step * n + city;
    let d_max = inst.max_dist();
    let activation_bias = (n as f64 - 1.0) * excitation_scale + 1.0;
    let inhibition_energy = city_penalty + activation_bias + 2.0 * excitation_scale + 1.0;

    let mut weights = vec![vec![0.0; total]; total];
    let bias = vec![activation_bias; total];
    let add_pair = |weights: &mut Vec<Vec<f64>>, a: usize, b: usize, pair_energy: f64| {
        weights[a][b] += pair_energy / 2.0;
        weights[b][a] += pair_energy / 2.0;
    };
    // same city at two different steps
    for city in 0..n {
        for s1 in 0..n {
            for s2 in (s1 + 1)..n {
                add_pair(&mut weights, neuron(s1, city), neuron(s2, city), city_penalty);
            }
        }
    }
    // adjacent-step excitation, stronger for nearer cities
    for step in 0..n {
        let next = (step + 1) % n;
        if next == step {
            continue;
        }
        for c1 in 0..n {
            for c2 in 0..n {
                if c1 == c2 {
                    continue;
                }
                let g = if d_max > 0.0 {
                    excitation_scale * (d_max - inst.dist(c1, c2)) / d_max
                } else {
                    0.0
                };
                if g != 0.0 {
                    add_pair(&mut weights, neuron(step, c1), neuron(next, c2), -g);
                }
            }
        }
    }
    // per-step WTA inhibition (energy bookkeeping; the hard WTA enforces it)
    for step in 0..n {
        for c1 in 0..n {
            for c2 in (c1 + 1)..n {
                add_pair(&mut weights, neuron(step, c1), neuron(step, c2), inhibition_energy);
            }
        }
    }
    let mut energy_net = EnergyNet::new(weights, bias, 1.0, 1)?;
    for step in 0..n {
        energy_net.add_subnetwork(WtaSubnetwork {
            members: (0..n).map(|c| neuron(step, c) as NeuronId).collect(),
            inhibition_weight: -inhibition_energy,
            k: 1,
        })?;
    }
    Ok(TspNet { energy_net, inst: inst.clone(), excitation_scale, city_penalty })
}

impl TspNet {
    pub fn n_cities(&self) -> usize {
        self.inst.n()
    }

    pub fn instance(&self) -> &TspInstance {
        &self.inst
    }

    /// Decodes from live state by the most-recent-spike rule.
    pub fn decode_live(&self) -> Option<Vec<usize>> {
        let n = self.inst.n();
        let mut tour = Vec::with_capacity(n);
        let mut used = vec![false; n];
        for step in 0..n {
            let mut winner: Option<(u64, usize)> = None;
            for city in 0..n {
                let id = step * n + city;
                if let Some(t) = self.energy_net.last_spike[id] {
                    // later spikes win; lowest city index on ties
                    let better = winner.is_none_or(|(bt, _)| t > bt);
                    if better {
                        winner = Some((t, city));
                    }
                }
            }
            let (_, city) = winner?;
            if used[city] {
                return None;
            }
            used[city] = true;
            tour.push(city);
        }
        Some(tour)
    }
}

/// Decodes the tour proposed by a spike trace at tick `t`: step `k`'s city is
/// the member of group `k` that fired most recently at or before `t` (lowest
/// city index on ties). Returns `None` when a step is silent or a city
/// repeats.
pub fn decode_tour(trace: &SpikeTrace, net: &TspNet, t: u64) -> Option<Vec<usize>> {
    let n = net.inst.n();
    let mut last: Vec<Option<(u64, usize)>> = vec![None; n]; // per step: (tick, city)
    for &(tick, id) in &trace.records {
        if tick > t {
            break;
        }
        let step = id as usize / n;
        let city = id as usize % n;
        let better = match last[step] {
            None => true,
            Some((bt, bc)) => tick > bt || (tick == bt && city < bc),
        };
        if better {
            last[step] = Some((tick, city));
        }
    }
    let mut used = vec![false; n];
    let mut tour = Vec::with_capacity(n);
    for slot in last {
        let (_, city) = slot?;
        if used[city] {
            return None;
        }
        used[city] = true;
        tour.push(city);
    }
    Some(tour)
}

/// Outcome of a TSP solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TspSolveResult {
    pub best_tour: Option<Vec<usize>>,
    pub best_length: f64,
    pub tick_found: u64,
    pub spikes_total: u64,
    pub synaptic_events: u64,
    pub feasible_decodes: u64,
    pub max_winners_observed: usize,
}

/// Anneals the net, decoding every sweep and tracking the best feasible tour.
pub fn solve_tsp(net: &mut TspNet, config: &AnnealConfig, seed: u64) -> Result<TspSolveResult> {
    solve_tsp_traced(net, config, seed).map(|(r, _)| r)
}

pub fn solve_tsp_traced(
    net: &mut TspNet,
    config: &AnnealConfig,
    seed: u64,
) -> Result<(TspSolveResult, SpikeTrace)> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ WTA_SEED_SALT);
    net.energy_net.reset_state();
    let base_temp = net.energy_net.temperature;
    let mut spikes_total = 0u64;
    let mut synaptic_events = 0u64;
    let mut best: Option<(Vec<usize>, f64, u64)> = None;
    let mut feasible_decodes = 0u64;
    let mut max_winners = 0usize;
    let mut trace = SpikeTrace {
        n_neurons: net.energy_net.n_neurons(),
        ticks: config.ticks,
        records: Vec::new(),
        per_tick: Vec::with_capacity(config.ticks as usize),
        delivered_events: 0,
        injected_spikes: 0,
    };
    for sweep in 0..config.ticks {
        net.energy_net.temperature = wta_temperature(base_temp, config, sweep);
        let spikes = net.energy_net.sweep(&mut rng);
        spikes_total += spikes.len() as u64;
        for &s in &spikes {
            synaptic_events += net.energy_net.network().out_degree(s) as u64;
        }
        trace.per_tick.push(spikes.len() as u32);
        trace.records.extend(spikes.iter().map(|&i| (sweep, i)));
        max_winners = max_winners.max(net.energy_net.max_active_winners());
        if let Some(tour) = net.decode_live() {
            feasible_decodes += 1;
            let len = tour_length(&net.inst, &tour)?;
            let better = best.as_ref().is_none_or(|(_, bl, _)| len < *bl);
            if better {
                best = Some((tour, len, sweep));
            }
        }
    }
    net.energy_net.temperature = base_temp;
    let result = match best {
        Some((tour, len, tick)) => TspSolveResult {
            best_tour: Some(tour),
            best_length: len,
            tick_found: tick,
            spikes_total,
            synaptic_events,
            feasible_decodes,
            max_winners_observed: max_winners,
        },
        None => TspSolveResult {
            best_tour: None,
            best_length: f64::INFINITY,
            tick_found: 0,
            spikes_total,
            synaptic_events,
            feasible_decodes: 0,
            max_winners_observed: max_winners,
        },
    };
    Ok((result, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{brute_force_tsp, gen_random_tsp, qubo_objective, QuboInstance};

    #[test]
    fn energy_examples() {
        let w4 = vec![vec![0.0; 4]; 4];
        let b1 = vec![1.0; 4];
        assert_eq!(energy(&[0, 0, 0, 0], &w4, &b1).unwrap(), 0.0);
        assert_eq!(energy(&[1, 1, 1, 1], &w4, &b1).unwrap(), -4.0);
        assert!(energy(&[1, 1], &w4, &b1).is_err());
    }

    #[test]
    fn energy_matches_qubo_embedding() {
        // E(x) = x^T W x - b^T x corresponds to Q with Q_ii = -b_i and
        // Q_ij = 2 W_ij for i < j
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 10;
        let mut w = vec![vec![0.0; n]; n];
        let mut b = vec![0.0; n];
        let mut entries = Vec::new();
        for i in 0..n {
            b[i] = rng.gen_range(-2.0..2.0);
            entries.push((i, i, -b[i]));
            for j in (i + 1)..n {
                let v: f64 = rng.gen_range(-1.0..1.0);
                w[i][j] = v;
                w[j][i] = v;
                entries.push((i, j, 2.0 * v));
            }
        }
        let qubo = QuboInstance::from_upper(n, &entries).unwrap();
        for mask in 0..(1u32 << n) {
            let x: Vec<u8> = (0..n).map(|i| (mask >> i & 1) as u8).collect();
            let e = energy(&x, &w, &b).unwrap();
            let q = qubo_objective(&qubo, &x).unwrap();
            assert!((e - q).abs() < 1e-9, "mask {mask}: {e} vs {q}");
        }
    }

    #[test]
    fn boltzmann_probabilities() {
        // single neuron, b = 0: both states have E = 0 -> 1/2 each
        let net = EnergyNet::new(vec![vec![0.0]], vec![0.0], 1.0, 1).unwrap();
        assert!((boltzmann_prob(&[0], &net).unwrap() - 0.5).abs() < 1e-12);
        assert!((boltzmann_prob(&[1], &net).unwrap() - 0.5).abs() < 1e-12);
        // dE = 1 at T = 1: probability ratio e
        let net = EnergyNet::new(vec![vec![0.0]], vec![1.0], 1.0, 1).unwrap();
        let p0 = boltzmann_prob(&[0], &net).unwrap();
        let p1 = boltzmann_prob(&[1], &net).unwrap();
        assert!((p1 / p0 - std::f64::consts::E).abs() < 1e-9);
    }

    #[test]
    fn boltzmann_sums_to_one_and_caps_size() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 8;
        let mut w = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v: f64 = rng.gen_range(-0.8..0.8);
                w[i][j] = v;
                w[j][i] = v;
            }
        }
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let net = EnergyNet::new(w, b, 0.9, 2).unwrap();
        let mut total = 0.0;
        let mut best_energy = f64::INFINITY;
        let mut best_prob = 0.0;
        let mut argmin = 0u32;
        let mut argmax = 0u32;
        for mask in 0..(1u32 << n) {
            let x: Vec<u8> = (0..n).map(|i| (mask >> i & 1) as u8).collect();
            let p = boltzmann_prob(&x, &net).unwrap();
            total += p;
            let e = net.energy_of(&x).unwrap();
            if e < best_energy {
                best_energy = e;
                argmin = mask;
            }
            if p > best_prob {
                best_prob = p;
                argmax = mask;
            }
        }
        assert!((total - 1.0).abs() < 1e-9, "probabilities sum to {total}");
        assert_eq!(argmin, argmax, "lowest energy state has the highest probability");

        let big = EnergyNet::new(vec![vec![0.0; 21]; 21], vec![0.0; 21], 1.0, 1).unwrap();
        assert!(boltzmann_prob(&[0u8; 21], &big).is_err());
    }

    #[test]
    fn k_wta_allows_up_to_k_winners() {
        // one group of six neurons with strong activation bias and k = 2
        let n = 6;
        let w = vec![vec![0.0; n]; n];
        let b = vec![2.0; n];
        let mut net = EnergyNet::new(w, b, 0.5, 3).unwrap();
        net.add_subnetwork(WtaSubnetwork {
            members: (0..n as NeuronId).collect(),
            inhibition_weight: -5.0,
            k: 2,
        })
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut max_active = 0;
        let mut saw_two = false;
        for _ in 0..2_000 {
            net.sweep(&mut rng);
            let active = net.max_active_winners();
            max_active = max_active.max(active);
            saw_two |= active == 2;
        }
        assert!(max_active <= 2, "k-WTA exceeded its quota: {max_active}");
        assert!(saw_two, "with strong bias two winners should occur");
    }

    #[test]
    fn csp_figure_structure() {
        // two variables, five values each, all-different
        let inst = CspInstance::graph_coloring(2, &[(0, 1)], 5).unwrap();
        let net = build_csp_network(&inst, CSP_DEFAULT_PENALTY).unwrap();
        assert_eq!(net.energy_net.n_neurons(), 10);
        assert_eq!(net.energy_net.subnetworks().len(), 2);
        assert_eq!(net.energy_net.subnetworks()[0].members.len(), 5);
        // pair counts from the weight matrix: 5 cross pairs + 2 * C(5,2) intra
        let mut cross = 0;
        let mut intra = 0;
        for i in 0..10 {
            for j in (i + 1)..10 {
                if net.energy_net.weight(i, j) != 0.0 {
                    if (i < 5) == (j < 5) {
                        intra += 1;
                    } else {
                        cross += 1;
                    }
                }
            }
        }
        assert_eq!(cross, 5);
        assert_eq!(intra, 20);
        // no constraints -> no cross synapses
        let free = CspInstance::new(vec![vec![0, 1]; 2], vec![]).unwrap();
        let net = build_csp_network(&free, 2.0).unwrap();
        let cross = (0..2)
            .flat_map(|i| (2..4).map(move |j| (i, j)))
            .filter(|&(i, j)| net.energy_net.weight(i, j) != 0.0)
            .count();
        assert_eq!(cross, 0);
    }

    #[test]
    fn csp_synapse_count_recount() {
        let inst = CspInstance::graph_coloring(6, &[(0, 1), (1, 2), (3, 4), (4, 5), (0, 5)], 3).unwrap();
        let net = build_csp_network(&inst, 2.5).unwrap();
        let forbidden_pairs: usize = inst.constraints.iter().map(|c| c.forbidden.len()).sum();
        let intra_pairs: usize = inst.domains.iter().map(|d| d.len() * (d.len() - 1) / 2).sum();
        // the structural mirror network has two directed synapses per pair
        assert_eq!(net.energy_net.network().n_synapses(), 2 * (forbidden_pairs + intra_pairs));
    }

    #[test]
    fn csp_single_variable_single_winner() {
        let inst = CspInstance::new(vec![vec![10, 20, 30]], vec![]).unwrap();
        let mut net = build_csp_network(&inst, 2.0).unwrap();
        let config = AnnealConfig { ticks: 200, ..Default::default() };
        let result = solve_csp(&mut net, &config, 5).unwrap();
        assert!(result.satisfied);
        assert!(result.max_winners_observed <= 1, "hard WTA law");
        assert!([10, 20, 30].contains(&result.assignment[0]));
    }

    #[test]
    fn csp_all_different_two_variables() {
        let inst = CspInstance::graph_coloring(2, &[(0, 1)], 5).unwrap();
        let config = AnnealConfig { ticks: 2_000, ..Default::default() };
        for seed in 0..10 {
            let mut net = build_csp_network(&inst, CSP_DEFAULT_PENALTY).unwrap();
            let result = solve_csp(&mut net, &config, seed).unwrap();
            assert!(result.satisfied, "seed {seed}");
            assert_ne!(result.assignment[0], result.assignment[1]);
            assert_eq!(inst.violations(&result.assignment).unwrap(), 0);
            assert!(result.max_winners_observed <= 1);
        }
    }

    #[test]
    fn csp_small_coloring() {
        // 8-vertex cycle plus chords, 3 colors
        let edges = vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 0), (0, 4), (2, 6)];
        let inst = CspInstance::graph_coloring(8, &edges, 3).unwrap();
        let config = AnnealConfig { ticks: 10_000, ..Default::default() };
        let mut hits = 0;
        for seed in 0..10 {
            let mut net = build_csp_network(&inst, CSP_DEFAULT_PENALTY).unwrap();
            let result = solve_csp(&mut net, &config, seed).unwrap();
            if result.satisfied {
                assert_eq!(inst.violations(&result.assignment).unwrap(), 0);
                hits += 1;
            }
        }
        assert!(hits >= 8, "only {hits}/10 seeds colored the graph");
    }

    #[test]
    fn tsp_structure_and_uniform_distances() {
        let two = TspInstance::new(&[vec![0.0, 3.0], vec![3.0, 0.0]]).unwrap();
        let net = build_tsp_network(&two, 1.0, tsp_default_city_penalty(2, 1.0)).unwrap();
        assert_eq!(net.energy_net.n_neurons(), 4);

        let uniform = TspInstance::new(&[
            vec![0.0, 5.0, 5.0],
            vec![5.0, 0.0, 5.0],
            vec![5.0, 5.0, 0.0],
        ])
        .unwrap();
        let net = build_tsp_network(&uniform, 1.0, tsp_default_city_penalty(3, 1.0)).unwrap();
        // uniform distances: every adjacent-step excitation equals zero
        let n = 3;
        for step in 0..n {
            let next = (step + 1) % n;
            for c1 in 0..n {
                for c2 in 0..n {
                    if c1 != c2 {
                        let w = net.energy_net.weight(step * n + c1, next * n + c2);
                        assert!(w.abs() < 1e-12, "({step},{c1})->({next},{c2}) = {w}");
                    }
                }
            }
        }
    }

    #[test]
    fn tsp_feasible_states_occupy_the_lowest_energy_stratum() {
        let inst = gen_random_tsp(4, 33);
        let net = build_tsp_network(&inst, 1.0, tsp_default_city_penalty(4, 1.0)).unwrap();
        let n = 4;
        let total = n * n;
        let mut max_feasible = f64::NEG_INFINITY;
        let mut min_infeasible = f64::INFINITY;
        for mask in 0..(1u32 << total) {
            let x: Vec<u8> = (0..total).map(|i| (mask >> i & 1) as u8).collect();
            // feasible: exactly one city per step, all cities distinct
            let mut tour = Vec::new();
            let mut feasible = true;
            for step in 0..n {
                let active: Vec<usize> = (0..n).filter(|&c| x[step * n + c] == 1).collect();
                if active.len() != 1 {
                    feasible = false;
                    break;
                }
                tour.push(active[0]);
            }
            if feasible {
                let mut seen = vec![false; n];
                for &c in &tour {
                    if seen[c] {
                        feasible = false;
                    }
                    seen[c] = true;
                }
            }
            let e = net.energy_net.energy_of_state(&x);
            if feasible {
                max_feasible = max_feasible.max(e);
            } else {
                min_infeasible = min_infeasible.min(e);
            }
        }
        assert!(
            min_infeasible > max_feasible,
            "penalty dominance failed: max feasible {max_feasible} vs min infeasible {min_infeasible}"
        );
    }

    #[test]
    fn tsp_energy_orders_tours_by_length() {
        let inst = gen_random_tsp(4, 7);
        let net = build_tsp_network(&inst, 1.0, tsp_default_city_penalty(4, 1.0)).unwrap();
        let n = 4;
        let mut perms = vec![vec![0, 1, 2, 3], vec![0, 2, 1, 3], vec![0, 1, 3, 2], vec![0, 3, 2, 1]];
        perms.push(vec![1, 0, 2, 3]);
        let as_state = |tour: &[usize]| {
            let mut x = vec![0u8; n * n];
            for (step, &c) in tour.iter().enumerate() {
                x[step * n + c] = 1;
            }
            x
        };
        for a in &perms {
            for b in &perms {
                let (la, lb) = (tour_length(&inst, a).unwrap(), tour_length(&inst, b).unwrap());
                let (ea, eb) = (net.energy_net.energy_of_state(&as_state(a)), net.energy_net.energy_of_state(&as_state(b)));
                if la < lb - 1e-9 {
                    assert!(ea < eb, "shorter tour must have lower energy: {a:?} vs {b:?}");
                }
            }
        }
    }

    #[test]
    fn decode_tour_identity_and_silence() {
        let inst = gen_random_tsp(3, 1);
        let net = build_tsp_network(&inst, 1.0, tsp_default_city_penalty(3, 1.0)).unwrap();
        // city k fires in step k
        let trace = SpikeTrace {
            n_neurons: 9,
            ticks: 5,
            records: vec![(0, 0), (1, 3 + 1), (2, 6 + 2)],
            per_tick: vec![1, 1, 1, 0, 0],
            delivered_events: 0,
            injected_spikes: 0,
        };
        assert_eq!(decode_tour(&trace, &net, 4), Some(vec![0, 1, 2]));
        let silent = SpikeTrace {
            records: vec![(0, 0), (1, 3 + 1)],
            per_tick: vec![1, 1, 0, 0, 0],
            ..trace.clone()
        };
        assert_eq!(decode_tour(&silent, &net, 4), None, "silent step is infeasible");
        // repeated city
        let repeated = SpikeTrace {
            records: vec![(0, 0), (1, 3), (2, 6 + 2)],
            per_tick: vec![1, 1, 1, 0, 0],
            ..trace
        };
        assert_eq!(decode_tour(&repeated, &net, 4), None);
    }

    #[test]
    fn tsp_triangle_returns_perimeter() {
        let inst = gen_random_tsp(3, 10);
        let perimeter = inst.dist(0, 1) + inst.dist(1, 2) + inst.dist(2, 0);
        let config = AnnealConfig { ticks: 2_000, ..Default::default() };
        for seed in 0..10 {
            let mut net = build_tsp_network(&inst, 1.0, tsp_default_city_penalty(3, 1.0)).unwrap();
            let result = solve_tsp(&mut net, &config, seed).unwrap();
            let tour = result.best_tour.expect("feasible decode");
            assert!((result.best_length - perimeter).abs() < 1e-9, "seed {seed}");
            assert_eq!(tour_length(&inst, &tour).unwrap(), result.best_length);
            assert!(result.max_winners_observed <= 1);
        }
    }

    #[test]
    fn tsp_four_cities_reach_optimum() {
        let inst = gen_random_tsp(4, 5);
        let (_, optimum) = brute_force_tsp(&inst).unwrap();
        let config = AnnealConfig { ticks: 5_000, ..Default::default() };
        let mut hits = 0;
        for seed in 0..20 {
            let mut net = build_tsp_network(&inst, 1.0, tsp_default_city_penalty(4, 1.0)).unwrap();
            let result = solve_tsp(&mut net, &config, seed).unwrap();
            let tour = result.best_tour.expect("feasible decode");
            assert_eq!(tour_length(&inst, &tour).unwrap(), result.best_length);
            if (result.best_length - optimum).abs() < 1e-9 {
                hits += 1;
            }
        }
        assert!(hits >= 16, "only {hits}/20 seeds found the optimum");
    }
}
