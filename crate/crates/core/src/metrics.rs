//! Hardware-free energy estimation from spike traces and space/time
//! complexity reporting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::snn::{Network, NeuronId, SpikeTrace};

/// Per-event energy coefficients and static power terms. All coefficients
/// default to zero except where supplied; the model is a component structure,
/// not a calibrated chip profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnergyModel {
    /// Idle power of the whole system, watts.
    pub p_static: f64,
    /// Energy per virtual source (injected) spike, joules.
    pub e_source_spike: f64,
    /// Idle power per simulated neuron, watts.
    pub p_neuron_idle: f64,
    /// Energy per emitted spike, joules.
    pub e_spike_emit: f64,
    /// Energy per synapse traversal, joules.
    pub e_spike_transmit: f64,
    /// Energy per delivered synaptic input, joules.
    pub e_synaptic_event: f64,
    /// Power while plasticity is active, watts. Plasticity never runs in this
    /// framework, so the term is reported as zero.
    pub p_plasticity: f64,
    /// Wall-clock seconds represented by one tick.
    pub tick_duration: f64,
}

impl Default for EnergyModel {
    fn default() -> Self {
        Self {
            p_static: 0.0,
            e_source_spike: 0.0,
            p_neuron_idle: 0.0,
            e_spike_emit: 0.0,
            e_spike_transmit: 0.0,
            e_synaptic_event: 0.0,
            p_plasticity: 0.0,
            tick_duration: 1e-3,
        }
    }
}

impl EnergyModel {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("p_static", self.p_static),
            ("e_source_spike", self.e_source_spike),
            ("p_neuron_idle", self.p_neuron_idle),
            ("e_spike_emit", self.e_spike_emit),
            ("e_spike_transmit", self.e_spike_transmit),
            ("e_synaptic_event", self.e_synaptic_event),
            ("p_plasticity", self.p_plasticity),
            ("tick_duration", self.tick_duration),
        ];
        for (what, v) in fields {
            if v < 0.0 || !v.is_finite() {
                return Err(Error::OutOfRange { what, value: v });
            }
        }
        Ok(())
    }
}

/// Joule breakdown of one run; components sum exactly to `total`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub static_system: f64,
    pub neuron_idle: f64,
    pub spike_emission: f64,
    pub spike_transmission: f64,
    pub synaptic_events: f64,
    pub source_spikes: f64,
    pub plasticity: f64,
    pub total: f64,
}

/// Spike count and scheduled synaptic deliveries of a trace:
/// `deliveries = sum over spikes of the spiking neuron's out-degree`.
pub fn count_synaptic_ops(trace: &SpikeTrace, network: &Network) -> Result<(u64, u64)> {
    if trace.n_neurons != network.n_neurons() {
        return Err(Error::DimensionMismatch { expected: network.n_neurons(), got: trace.n_neurons });
    }
    let mut deliveries = 0u64;
    for &(_, i) in &trace.records {
        if i as usize >= network.n_neurons() {
            return Err(Error::structure(format!("trace references neuron {i} outside the network")));
        }
        deliveries += network.out_degree(i) as u64;
    }
    Ok((trace.total_spikes(), deliveries))
}

/// Component energy estimate:
///
/// ```text
/// E = p_static*T + p_neuron_idle*N*T
///   + spikes*e_spike_emit
///   + deliveries*(e_spike_transmit + e_synaptic_event)
///   + injected*e_source_spike
/// ```
///
/// with `T = ticks * tick_duration`.
pub fn estimate_energy(
    trace: &SpikeTrace,
    network: &Network,
    model: &EnergyModel,
    ticks: u64,
) -> Result<EnergyBreakdown> {
    let (spikes, deliveries) = count_synaptic_ops(trace, network)?;
    estimate_energy_from_counts(
        network.n_neurons(),
        ticks,
        spikes,
        deliveries,
        trace.injected_spikes,
        model,
    )
}

/// The same component estimate from raw event counts.
pub fn estimate_energy_from_counts(
    n_neurons: usize,
    ticks: u64,
    spikes: u64,
    deliveries: u64,
    injected: u64,
    model: &EnergyModel,
) -> Result<EnergyBreakdown> {
    model.validate()?;
    let seconds = ticks as f64 * model.tick_duration;
    let static_system = model.p_static * seconds;
    let neuron_idle = model.p_neuron_idle * n_neurons as f64 * seconds;
    let spike_emission = spikes as f64 * model.e_spike_emit;
    let spike_transmission = deliveries as f64 * model.e_spike_transmit;
    let synaptic_events = deliveries as f64 * model.e_synaptic_event;
    let source_spikes = injected as f64 * model.e_source_spike;
    let plasticity = 0.0;
    let total = static_system
        + neuron_idle
        + spike_emission
        + spike_transmission
        + synaptic_events
        + source_spikes
        + plasticity;
    Ok(EnergyBreakdown {
        static_system,
        neuron_idle,
        spike_emission,
        spike_transmission,
        synaptic_events,
        source_spikes,
        plasticity,
        total,
    })
}

/// Longest input-to-output path: hop count plus total synaptic delay.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathMetric {
    pub hops: u64,
    pub delay_total: u64,
    /// True when the network is cyclic and the metric is a lower-bound
    /// estimate over the acyclic condensation.
    pub estimated: bool,
}

/// Structure accounting for a network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub neurons: usize,
    pub synapses: usize,
    /// Setup cost class and its concrete count (neurons + synapses).
    pub setup_class: String,
    pub setup_ops: usize,
    /// Present only when input/output neurons were designated.
    pub run_time: Option<PathMetric>,
}

/// Builds the report; `io` optionally designates (inputs, outputs) for the
/// run-time path metric.
pub fn complexity(network: &Network, io: Option<(&[NeuronId], &[NeuronId])>) -> ComplexityReport {
    let neurons = network.n_neurons();
    let synapses = network.n_synapses();
    let run_time = io.map(|(inputs, outputs)| longest_path(network, inputs, outputs));
    ComplexityReport {
        neurons,
        synapses,
        setup_class: "O(neurons + synapses)".to_string(),
        setup_ops: neurons + synapses,
        run_time,
    }
}

fn longest_path(network: &Network, inputs: &[NeuronId], outputs: &[NeuronId]) -> PathMetric {
    let n = network.n_neurons();
    let scc = tarjan_scc(network);
    let cyclic = {
        let mut sizes = vec![0usize; n];
        for &c in &scc {
            sizes[c] += 1;
        }
        let multi = scc.iter().any(|&c| sizes[c] > 1);
        let self_loop = network.iter_synapses().any(|s| s.pre == s.post);
        multi || self_loop
    };

    // Longest (hops + delays) over the acyclic condensation; exact when the
    // network itself is acyclic.
    let n_comps = scc.iter().copied().max().map_or(0, |m| m + 1);
    let mut comp_edges: Vec<Vec<(usize, u64)>> = vec![Vec::new(); n_comps];
    let mut indegree = vec![0usize; n_comps];
    for syn in network.iter_synapses() {
        let (cu, cv) = (scc[syn.pre as usize], scc[syn.post as usize]);
        if cu != cv {
            comp_edges[cu].push((cv, syn.delay as u64));
            indegree[cv] += 1;
        }
    }
    // Tarjan numbers components in reverse topological order.
    let order: Vec<usize> = (0..n_comps).rev().collect();

    let neg = i64::MIN;
    let mut best_hops = vec![neg; n_comps];
    let mut best_delay = vec![neg; n_comps];
    for &i in inputs {
        best_hops[scc[i as usize]] = 0;
        best_delay[scc[i as usize]] = 0;
    }
    for &u in &order {
        if best_hops[u] == neg {
            continue;
        }
        for &(v, d) in &comp_edges[u] {
            let cand_h = best_hops[u] + 1;
            let cand_d = best_delay[u] + d as i64;
            // maximize hops + delay jointly
            if best_hops[v] == neg || cand_h + cand_d > best_hops[v] + best_delay[v] {
                best_hops[v] = cand_h;
                best_delay[v] = cand_d;
            }
        }
    }
    let mut metric = PathMetric { hops: 0, delay_total: 0, estimated: cyclic };
    let mut best = -1i64;
    for &o in outputs {
        let c = scc[o as usize];
        if best_hops[c] != neg && best_hops[c] + best_delay[c] > best {
            best = best_hops[c] + best_delay[c];
            metric.hops = best_hops[c] as u64;
            metric.delay_total = best_delay[c] as u64;
        }
    }
    metric
}

/// Iterative Tarjan strongly-connected components; returns the component id
/// per neuron, numbered in reverse topological order.
fn tarjan_scc(network: &Network) -> Vec<usize> {
    let n = network.n_neurons();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut comp = vec![usize::MAX; n];
    let mut next_index = 0usize;
    let mut next_comp = 0usize;

    for start in 0..n {
        if index[start] != usize::MAX {
            continue;
        }
        index[start] = next_index;
        low[start] = next_index;
        next_index += 1;
        stack.push(start);
        on_stack[start] = true;
        // explicit DFS: (node, next-child-cursor)
        let mut work: Vec<(usize, usize)> = vec![(start, 0)];
        while let Some(&(v, cursor)) = work.last() {
            let syns = network.synapses_from(v as NeuronId);
            if cursor < syns.len() {
                work.last_mut().expect("nonempty").1 += 1;
                let w = syns[cursor].post as usize;
                if index[w] == usize::MAX {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    work.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                work.pop();
                if let Some(&(parent, _)) = work.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().expect("scc stack underflow");
                        on_stack[w] = false;
                        comp[w] = next_comp;
                        if w == v {
                            break;
                        }
                    }
                    next_comp += 1;
                }
            }
        }
    }
    comp
}
