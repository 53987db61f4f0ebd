//! Tick-driven simulator for networks of IF/LIF/stochastic neurons.
//!
//! Time is discrete: all delays and refractory periods are integer ticks.
//! Updates are synchronous — every neuron integrates against the spikes of
//! the previous tick, delivered through per-tick delay queues. Runs are
//! deterministic: a fixed (network, seed, budget, noise schedule) always
//! produces the same spike trace.
//!
//! Membrane dynamics per kind, with `V` the potential and `I` the summed
//! weighted input of the tick:
//!
//! ```text
//! IF:                V <- V + I / C
//! LIF subtractive:   V <- V + I - leak
//! LIF proportional:  V <- V * (1 - decay) + I
//! stochastic:        proportional update; firing is probabilistic (escape noise)
//! ```
//!
//! Deterministic kinds fire when `V >= threshold`; on firing the potential
//! is hard-reset to the reset value and the refractory countdown starts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of a neuron within its network.
pub type NeuronId = u32;

/// Membrane dynamics of a neuron.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeuronKind {
    /// Integrate-and-fire: input scaled by capacitance, no leak.
    If,
    /// Leaky integrate-and-fire, fixed amount subtracted per tick.
    LifSubtractive,
    /// Leaky integrate-and-fire, potential decays by a factor per tick.
    LifProportional,
    /// Proportional-leak dynamics with probabilistic (escape noise) firing.
    Stochastic,
}

/// Static parameters of one neuron.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeuronParams {
    pub kind: NeuronKind,
    /// Firing threshold; crossing it (>=) emits a spike.
    pub threshold: f64,
    /// Potential subtracted each tick (`LifSubtractive` only).
    pub leak: f64,
    /// Fraction of the potential lost per tick, in [0, 1]
    /// (`LifProportional` and `Stochastic`).
    pub decay: f64,
    /// Potential after a spike (hard reset).
    pub reset: f64,
    /// Dormant ticks after a spike; the neuron absorbs no input and cannot fire.
    pub refractory: u32,
    /// Input scale for the `If` kind: effective input is `I / capacitance`.
    pub capacitance: f64,
}

impl NeuronParams {
    pub fn if_neuron(threshold: f64, reset: f64, capacitance: f64, refractory: u32) -> Self {
        Self { kind: NeuronKind::If, threshold, leak: 0.0, decay: 0.0, reset, refractory, capacitance }
    }

    pub fn lif_subtractive(threshold: f64, leak: f64, reset: f64, refractory: u32) -> Self {
        Self { kind: NeuronKind::LifSubtractive, threshold, leak, decay: 0.0, reset, refractory, capacitance: 1.0 }
    }

    pub fn lif_proportional(threshold: f64, decay: f64, reset: f64, refractory: u32) -> Self {
        Self { kind: NeuronKind::LifProportional, threshold, leak: 0.0, decay, reset, refractory, capacitance: 1.0 }
    }

    pub fn stochastic(threshold: f64, decay: f64, reset: f64, refractory: u32) -> Self {
        Self { kind: NeuronKind::Stochastic, threshold, leak: 0.0, decay, reset, refractory, capacitance: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        // negated form also rejects NaN parameters
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(self.threshold > self.reset) {
            return Err(Error::structure(format!(
                "threshold ({}) must exceed reset ({})",
                self.threshold, self.reset
            )));
        }
        if !(0.0..=1.0).contains(&self.decay) {
            return Err(Error::OutOfRange { what: "decay", value: self.decay });
        }
        if self.leak < 0.0 {
            return Err(Error::OutOfRange { what: "leak", value: self.leak });
        }
        if self.kind == NeuronKind::If && self.capacitance <= 0.0 {
            return Err(Error::OutOfRange { what: "capacitance", value: self.capacitance });
        }
        Ok(())
    }
}

/// Mutable per-neuron simulation state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeuronState {
    pub potential: f64,
    pub refractory_remaining: u32,
    pub last_spike: Option<u64>,
}

impl NeuronState {
    pub fn resting(params: &NeuronParams) -> Self {
        Self { potential: params.reset, refractory_remaining: 0, last_spike: None }
    }
}

/// A weighted, delayed connection between two neurons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Synapse {
    pub pre: NeuronId,
    pub post: NeuronId,
    pub weight: f64,
    /// Ticks between the presynaptic spike and input delivery; at least 1.
    pub delay: u32,
}

/// Decaying per-tick noise: at tick `t` each neuron fires spontaneously
/// with probability `mu * beta^t`, independently across neurons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSchedule {
    /// Initial spike probability, in [0, 1].
    pub mu: f64,
    /// Per-tick decay of the spike probability, in (0, 1].
    pub beta: f64,
}

impl NoiseSchedule {
    pub fn new(mu: f64, beta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&mu) {
            return Err(Error::OutOfRange { what: "noise mu", value: mu });
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::OutOfRange { what: "noise beta", value: beta });
        }
        Ok(Self { mu, beta })
    }

    /// Fire probability at tick `t`.
    pub fn probability(&self, tick: u64) -> f64 {
        self.mu * self.beta.powi(tick.min(i32::MAX as u64) as i32)
    }
}

/// Neuron ids that noise-fire at `tick`.
///
/// Draws one uniform per neuron, consumed in neuron-index order from a
/// tick-keyed substream of `rng`, so draws for a given (tick, neuron) pair
/// never depend on the network size or on other ticks.
pub fn sample_noise(
    schedule: &NoiseSchedule,
    n_neurons: usize,
    tick: u64,
    rng: &mut ChaCha8Rng,
) -> Vec<NeuronId> {
    rng.set_stream(tick.wrapping_mul(2));
    rng.set_word_pos(0);
    let p = schedule.probability(tick);
    let mut fired = Vec::new();
    for i in 0..n_neurons {
        let draw: f64 = rng.gen();
        if draw < p {
            fired.push(i as NeuronId);
        }
    }
    fired
}

fn updated_potential(state: &NeuronState, params: &NeuronParams, weighted_input: f64) -> f64 {
    match params.kind {
        NeuronKind::If => state.potential + weighted_input / params.capacitance,
        NeuronKind::LifSubtractive => state.potential + weighted_input - params.leak,
        NeuronKind::LifProportional | NeuronKind::Stochastic => {
            state.potential * (1.0 - params.decay) + weighted_input
        }
    }
}

/// One deterministic membrane update against the already-summed input of a tick.
///
/// Refractory neurons absorb no input, never fire, and count down by one.
/// The `Stochastic` kind follows the deterministic threshold rule here;
/// its escape-noise firing applies only inside [`Network::step`].
pub fn integrate(
    state: &NeuronState,
    params: &NeuronParams,
    weighted_input: f64,
) -> (NeuronState, bool) {
    let mut next = *state;
    if next.refractory_remaining > 0 {
        next.refractory_remaining -= 1;
        return (next, false);
    }
    next.potential = updated_potential(state, params, weighted_input);
    if next.potential >= params.threshold {
        next.potential = params.reset;
        next.refractory_remaining = params.refractory;
        return (next, true);
    }
    (next, false)
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 { 1.0 / (1.0 + (-x).exp()) } else { let e = x.exp(); e / (1.0 + e) }
}

/// Time-ordered record of every spike in a run, plus event totals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpikeTrace {
    pub n_neurons: usize,
    /// Ticks covered: records lie in `[0, ticks)`.
    pub ticks: u64,
    /// `(tick, neuron)` pairs, sorted by tick (ascending neuron id within a tick).
    pub records: Vec<(u64, NeuronId)>,
    /// Spike count per tick; length equals `ticks`.
    pub per_tick: Vec<u32>,
    /// Synaptic inputs actually delivered during the covered ticks.
    pub delivered_events: u64,
    /// Spikes that were injected (noise / external stimulation) rather than
    /// produced by threshold crossing alone.
    pub injected_spikes: u64,
}

impl SpikeTrace {
    pub fn total_spikes(&self) -> u64 {
        self.records.len() as u64
    }

    /// Ticks at which `neuron` spiked.
    pub fn spikes_of(&self, neuron: NeuronId) -> Vec<u64> {
        self.records.iter().filter(|(_, i)| *i == neuron).map(|(t, _)| *t).collect()
    }
}

/// Binary network state at tick `t`: component `i` is 1 iff neuron `i`
/// spiked within the window `(t - tau, t]`.
pub fn readout_state(trace: &SpikeTrace, t: u64, tau: u64) -> Result<Vec<u8>> {
    if tau == 0 {
        return Err(Error::OutOfRange { what: "readout tau", value: 0.0 });
    }
    if t >= trace.ticks {
        return Err(Error::TickOutOfRange { tick: t, end: trace.ticks });
    }
    let lo = t.saturating_sub(tau - 1); // window is (t - tau, t], i.e. [t - tau + 1, t]
    let start = trace.records.partition_point(|(rt, _)| *rt < lo);
    let end = trace.records.partition_point(|(rt, _)| *rt <= t);
    let mut state = vec![0u8; trace.n_neurons];
    for &(_, i) in &trace.records[start..end] {
        state[i as usize] = 1;
    }
    Ok(state)
}

/// A spiking network: neurons, delayed synapses, per-neuron constant bias
/// input, and a seed for all stochastic elements.
#[derive(Debug, Clone)]
pub struct Network {
    neurons: Vec<(NeuronParams, NeuronState)>,
    /// Outgoing synapses per neuron, in insertion order.
    adjacency: Vec<Vec<Synapse>>,
    /// Constant external input added to every neuron each tick.
    bias: Vec<f64>,
    /// Ring of pending deliveries: slot `t % ring.len()` holds inputs due at `t`.
    ring: Vec<Vec<(NeuronId, f64)>>,
    rng_seed: u64,
    tick: u64,
    /// Escape-noise temperature for `Stochastic` neurons.
    escape_temperature: f64,
    escape_rng: ChaCha8Rng,
    forced: Vec<bool>,
    blocked: Vec<bool>,
    any_forced: bool,
    any_blocked: bool,
    synapse_count: usize,
    delivered_events: u64,
    injected_spikes: u64,
}

impl Network {
    pub fn new(seed: u64) -> Self {
        Self {
            neurons: Vec::new(),
            adjacency: Vec::new(),
            bias: Vec::new(),
            ring: vec![Vec::new(); 2],
            rng_seed: seed,
            tick: 0,
            escape_temperature: 1.0,
            escape_rng: ChaCha8Rng::seed_from_u64(seed),
            forced: Vec::new(),
            blocked: Vec::new(),
            any_forced: false,
            any_blocked: false,
            synapse_count: 0,
            delivered_events: 0,
            injected_spikes: 0,
        }
    }

    pub fn add_neuron(&mut self, params: NeuronParams) -> Result<NeuronId> {
        params.validate()?;
        let id = self.neurons.len() as NeuronId;
        self.neurons.push((params, NeuronState::resting(&params)));
        self.adjacency.push(Vec::new());
        self.bias.push(0.0);
        self.forced.push(false);
        self.blocked.push(false);
        Ok(id)
    }

    /// Adds a synapse. Duplicate `(pre, post)` pairs and delays of zero are rejected;
    /// self-synapses are allowed.
    pub fn connect(&mut self, pre: NeuronId, post: NeuronId, weight: f64, delay: u32) -> Result<()> {
        let n = self.neurons.len() as u32;
        if pre >= n || post >= n {
            return Err(Error::structure(format!("synapse {pre}->{post} references missing neuron")));
        }
        if delay == 0 {
            return Err(Error::structure(format!("synapse {pre}->{post} has zero delay")));
        }
        if self.adjacency[pre as usize].iter().any(|s| s.post == post) {
            return Err(Error::structure(format!("duplicate synapse {pre}->{post}")));
        }
        if (delay as usize) + 1 > self.ring.len() {
            self.grow_ring(delay as usize + 1);
        }
        self.adjacency[pre as usize].push(Synapse { pre, post, weight, delay });
        self.synapse_count += 1;
        Ok(())
    }

    fn grow_ring(&mut self, new_len: usize) {
        // Re-slot pending events relative to the current tick.
        let old_len = self.ring.len();
        let mut fresh = vec![Vec::new(); new_len];
        for offset in 0..old_len {
            let t = self.tick + offset as u64;
            let old_slot = (t % old_len as u64) as usize;
            let events = std::mem::take(&mut self.ring[old_slot]);
            fresh[(t % new_len as u64) as usize].extend(events);
        }
        self.ring = fresh;
    }

    pub fn n_neurons(&self) -> usize {
        self.neurons.len()
    }

    pub fn n_synapses(&self) -> usize {
        self.synapse_count
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn seed(&self) -> u64 {
        self.rng_seed
    }

    pub fn params(&self, i: NeuronId) -> &NeuronParams {
        &self.neurons[i as usize].0
    }

    pub fn state(&self, i: NeuronId) -> &NeuronState {
        &self.neurons[i as usize].1
    }

    pub fn set_potential(&mut self, i: NeuronId, v: f64) {
        self.neurons[i as usize].1.potential = v;
    }

    pub fn set_bias(&mut self, i: NeuronId, bias: f64) {
        self.bias[i as usize] = bias;
    }

    pub fn bias(&self, i: NeuronId) -> f64 {
        self.bias[i as usize]
    }

    pub fn set_escape_temperature(&mut self, t: f64) {
        self.escape_temperature = t.max(1e-12);
    }

    pub fn out_degree(&self, i: NeuronId) -> usize {
        self.adjacency[i as usize].len()
    }

    pub fn synapses_from(&self, i: NeuronId) -> &[Synapse] {
        &self.adjacency[i as usize]
    }

    pub fn iter_synapses(&self) -> impl Iterator<Item = &Synapse> {
        self.adjacency.iter().flatten()
    }

    /// Cumulative count of delivered synaptic inputs.
    pub fn delivered_events(&self) -> u64 {
        self.delivered_events
    }

    /// Cumulative count of injected (forced) spikes.
    pub fn injected_spikes(&self) -> u64 {
        self.injected_spikes
    }

    /// True while synaptic inputs are still queued for future ticks.
    pub fn has_pending_events(&self) -> bool {
        self.ring.iter().any(|slot| !slot.is_empty())
    }

    /// Marks neurons to spike on the next `step`, regardless of potential.
    /// Refractory neurons stay dormant even when forced.
    pub fn force_spikes(&mut self, ids: &[NeuronId]) {
        for &i in ids {
            self.forced[i as usize] = true;
        }
        self.any_forced |= !ids.is_empty();
    }

    /// Suppresses spiking of the given neurons on the next `step`.
    pub fn block_spikes(&mut self, ids: &[NeuronId]) {
        for &i in ids {
            self.blocked[i as usize] = true;
        }
        self.any_blocked |= !ids.is_empty();
    }

    /// Clears all dynamic state (potentials, queues, clock, RNG position);
    /// structure and seed are kept.
    pub fn reset(&mut self) {
        for (params, state) in &mut self.neurons {
            *state = NeuronState::resting(params);
        }
        for slot in &mut self.ring {
            slot.clear();
        }
        self.tick = 0;
        self.escape_rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
        self.forced.iter_mut().for_each(|f| *f = false);
        self.blocked.iter_mut().for_each(|b| *b = false);
        self.any_forced = false;
        self.any_blocked = false;
        self.delivered_events = 0;
        self.injected_spikes = 0;
    }

    /// Advances the network by one tick and returns the neurons that spiked,
    /// in ascending id order.
    ///
    /// Delivery first (all queued inputs due this tick plus bias), then a
    /// synchronous integrate of every neuron, then outgoing spikes are queued
    /// at `tick + delay`. Force/block marks apply to this step only.
    pub fn step(&mut self) -> Vec<NeuronId> {
        let t = self.tick;
        let n = self.neurons.len();
        let ring_len = self.ring.len() as u64;
        let slot = (t % ring_len) as usize;

        let mut input = vec![0.0f64; n];
        for (post, w) in self.ring[slot].drain(..) {
            input[post as usize] += w;
            self.delivered_events += 1;
        }
        for i in 0..n {
            input[i] += self.bias[i];
        }

        // Escape draws for stochastic neurons come from a tick-keyed substream,
        // consumed in neuron-index order.
        let has_stochastic = self.neurons.iter().any(|(p, _)| p.kind == NeuronKind::Stochastic);
        if has_stochastic {
            self.escape_rng.set_stream(t.wrapping_mul(2).wrapping_add(1));
            self.escape_rng.set_word_pos(0);
        }

        let mut spiked: Vec<NeuronId> = Vec::new();
        for i in 0..n {
            let (params, state) = &mut self.neurons[i];
            if state.refractory_remaining > 0 {
                state.refractory_remaining -= 1;
                if params.kind == NeuronKind::Stochastic {
                    let _: f64 = self.escape_rng.gen(); // keep the stream aligned
                }
                continue;
            }
            state.potential = updated_potential(state, params, input[i]);
            let mut fire = match params.kind {
                NeuronKind::Stochastic => {
                    let draw: f64 = self.escape_rng.gen();
                    let p = sigmoid((state.potential - params.threshold) / self.escape_temperature);
                    draw < p
                }
                _ => state.potential >= params.threshold,
            };
            if self.any_blocked && self.blocked[i] {
                fire = false;
            }
            if self.any_forced && self.forced[i] {
                fire = true;
                self.injected_spikes += 1;
            }
            if fire {
                state.potential = params.reset;
                state.refractory_remaining = params.refractory;
                state.last_spike = Some(t);
                spiked.push(i as NeuronId);
            }
        }

        for &i in &spiked {
            for syn in &self.adjacency[i as usize] {
                let due = ((t + syn.delay as u64) % ring_len) as usize;
                self.ring[due].push((syn.post, syn.weight));
            }
        }

        if self.any_forced {
            self.forced.iter_mut().for_each(|f| *f = false);
            self.any_forced = false;
        }
        if self.any_blocked {
            self.blocked.iter_mut().for_each(|b| *b = false);
            self.any_blocked = false;
        }
        self.tick = t + 1;
        spiked
    }

    /// Runs `ticks` steps from a fresh network, injecting schedule noise
    /// before each integration, and returns the trace over `[0, ticks)`.
    pub fn run(&mut self, ticks: u64, noise: Option<&NoiseSchedule>) -> Result<SpikeTrace> {
        if ticks == 0 {
            return Err(Error::ZeroBudget);
        }
        if self.neurons.is_empty() {
            return Err(Error::structure("cannot run an empty network"));
        }
        if self.tick != 0 {
            return Err(Error::structure("network already advanced; call reset() before run()"));
        }
        let delivered_before = self.delivered_events;
        let injected_before = self.injected_spikes;
        let n = self.neurons.len();
        let mut noise_rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
        let mut trace = SpikeTrace {
            n_neurons: n,
            ticks,
            records: Vec::new(),
            per_tick: Vec::with_capacity(ticks as usize),
            delivered_events: 0,
            injected_spikes: 0,
        };
        for _ in 0..ticks {
            let t = self.tick;
            if let Some(schedule) = noise {
                let fired = sample_noise(schedule, n, t, &mut noise_rng);
                self.force_spikes(&fired);
            }
            let spiked = self.step();
            trace.per_tick.push(spiked.len() as u32);
            trace.records.extend(spiked.iter().map(|&i| (t, i)));
        }
        trace.delivered_events = self.delivered_events - delivered_before;
        trace.injected_spikes = self.injected_spikes - injected_before;
        Ok(trace)
    }

    /// Quantizes synapse weights and biases onto the signed 8-bit grid
    /// spanned by the largest magnitude, mirroring fixed-point hardware
    /// weight storage. Returns the grid scale (stored value = level * scale,
    /// level in -127..=127); zero when the network has no nonzero weights.
    pub fn quantize_weights_8bit(&mut self) -> f64 {
        let max = self
            .iter_synapses()
            .map(|s| s.weight.abs())
            .chain(self.bias.iter().map(|b| b.abs()))
            .fold(0.0, f64::max);
        if max == 0.0 {
            return 0.0;
        }
        let scale = max / 127.0;
        let snap = |w: f64| (w / scale).round().clamp(-127.0, 127.0) * scale;
        for list in &mut self.adjacency {
            for syn in list {
                syn.weight = snap(syn.weight);
            }
        }
        for b in &mut self.bias {
            *b = snap(*b);
        }
        scale
    }

    /// Serializes structure (neurons, synapses, biases, seed) to a versioned
    /// JSON document. Dynamic state is not captured.
    pub fn to_json(&self) -> String {
        let doc = NetworkDoc {
            version: NETWORK_DOC_VERSION,
            seed: self.rng_seed,
            neurons: self.neurons.iter().map(|(p, _)| *p).collect(),
            bias: self.bias.clone(),
            synapses: self.iter_synapses().copied().collect(),
        };
        serde_json::to_string_pretty(&doc).expect("network document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: NetworkDoc = serde_json::from_str(text)?;
        if doc.version != NETWORK_DOC_VERSION {
            return Err(Error::structure(format!("unsupported network document version {}", doc.version)));
        }
        if doc.bias.len() != doc.neurons.len() {
            return Err(Error::DimensionMismatch { expected: doc.neurons.len(), got: doc.bias.len() });
        }
        let mut net = Network::new(doc.seed);
        for params in doc.neurons {
            net.add_neuron(params)?;
        }
        for (i, b) in doc.bias.iter().enumerate() {
            net.set_bias(i as NeuronId, *b);
        }
        for syn in doc.synapses {
            net.connect(syn.pre, syn.post, syn.weight, syn.delay)?;
        }
        Ok(net)
    }
}

const NETWORK_DOC_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct NetworkDoc {
    version: u32,
    seed: u64,
    neurons: Vec<NeuronParams>,
    bias: Vec<f64>,
    synapses: Vec<Synapse>,
}
