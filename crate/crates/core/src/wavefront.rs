//! Greedy spike-wavefront algorithms: delay-encoded single-source shortest
//! paths and grid path planning with obstacle-inhibited neurons.
//!
//! One neuron per graph node, one synapse per edge with delay equal to the
//! edge weight. The refractory period exceeds the sum of all edge weights,
//! so every neuron fires at most once per run; the first arrival wins and the
//! firing time of a neuron equals its shortest-path distance from the source.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::snn::{Network, NeuronId, NeuronParams, SpikeTrace};

/// Positive-integer-weight graph; undirected graphs store each edge once and
/// are expanded to both arcs at network build time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightedGraph {
    pub n: usize,
    pub edges: Vec<(usize, usize, u32)>,
    pub directed: bool,
}

impl WeightedGraph {
    pub fn new(n: usize, edges: Vec<(usize, usize, u32)>, directed: bool) -> Result<Self> {
        if n == 0 {
            return Err(Error::structure("graph needs at least one node"));
        }
        for &(u, v, w) in &edges {
            if u >= n || v >= n {
                return Err(Error::structure(format!("edge ({u},{v}) outside 0..{n}")));
            }
            if u == v {
                return Err(Error::structure(format!("self-loop at {u}")));
            }
            if w == 0 {
                return Err(Error::structure(format!("edge ({u},{v}) must have positive integer weight")));
            }
        }
        Ok(Self { n, edges, directed })
    }

    fn total_weight(&self) -> u64 {
        let sum: u64 = self.edges.iter().map(|&(_, _, w)| w as u64).sum();
        if self.directed { sum } else { sum * 2 }
    }
}

/// First-spike tick per node; `None` marks unreachable nodes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiringTimeTable {
    pub times: Vec<Option<u64>>,
}

/// One supra-threshold neuron per node, one synapse per arc with
/// `delay == weight`, refractory longer than the total edge weight.
pub fn build_graph_network(g: &WeightedGraph) -> Result<Network> {
    let refractory = (g.total_weight() + 2).min(u32::MAX as u64) as u32;
    let mut net = Network::new(0);
    for _ in 0..g.n {
        net.add_neuron(NeuronParams::lif_subtractive(1.0, 0.0, 0.0, refractory))?;
    }
    for &(u, v, w) in &g.edges {
        net.connect(u as NeuronId, v as NeuronId, 2.0, w)?;
        if !g.directed {
            net.connect(v as NeuronId, u as NeuronId, 2.0, w)?;
        }
    }
    Ok(net)
}

/// Stimulates `source` at tick 0, runs to quiescence, and returns both the
/// firing-time table and the spike trace.
pub fn sssp_traced(network: &mut Network, source: NeuronId) -> Result<(FiringTimeTable, SpikeTrace)> {
    let n = network.n_neurons();
    if source as usize >= n {
        return Err(Error::structure(format!("source {source} outside the network")));
    }
    network.reset();
    let mut times = vec![None; n];
    let mut records = Vec::new();
    network.force_spikes(&[source]);
    loop {
        let t = network.tick();
        let spiked = network.step();
        for &i in &spiked {
            if times[i as usize].is_none() {
                times[i as usize] = Some(t);
            }
            records.push((t, i));
        }
        if !network.has_pending_events() {
            break;
        }
    }
    let ticks = network.tick();
    let mut per_tick = vec![0u32; ticks as usize];
    for &(t, _) in &records {
        per_tick[t as usize] += 1;
    }
    let trace = SpikeTrace {
        n_neurons: n,
        ticks,
        records,
        per_tick,
        delivered_events: network.delivered_events(),
        injected_spikes: network.injected_spikes(),
    };
    Ok((FiringTimeTable { times }, trace))
}

/// Single-source shortest paths by wavefront propagation; the firing time of
/// every reachable node equals its graph distance from `source`.
pub fn sssp(network: &mut Network, source: NeuronId) -> Result<FiringTimeTable> {
    sssp_traced(network, source).map(|(table, _)| table)
}

/// Rectangular world with blocked cells; coordinates are `(x, y)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridWorld {
    pub width: usize,
    pub height: usize,
    pub obstacles: Vec<bool>,
    pub start: (usize, usize),
    pub goal: (usize, usize),
}

impl GridWorld {
    pub fn new(
        width: usize,
        height: usize,
        obstacle_cells: &[(usize, usize)],
        start: (usize, usize),
        goal: (usize, usize),
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::structure("grid must be non-empty"));
        }
        let mut obstacles = vec![false; width * height];
        for &(x, y) in obstacle_cells {
            if x >= width || y >= height {
                return Err(Error::structure(format!("obstacle ({x},{y}) outside the grid")));
            }
            obstacles[y * width + x] = true;
        }
        let world = Self { width, height, obstacles, start, goal };
        for (what, (x, y)) in [("start", start), ("goal", goal)] {
            if x >= width || y >= height {
                return Err(Error::structure(format!("{what} ({x},{y}) outside the grid")));
            }
            if world.blocked(x, y) {
                return Err(Error::structure(format!("{what} ({x},{y}) is an obstacle")));
            }
        }
        Ok(world)
    }

    pub fn blocked(&self, x: usize, y: usize) -> bool {
        self.obstacles[y * self.width + x]
    }

    /// 4-neighbors in the fixed tie-break order N, E, S, W.
    fn neighbors(&self, x: usize, y: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (w, h) = (self.width as i64, self.height as i64);
        let (x, y) = (x as i64, y as i64);
        [(x, y - 1), (x + 1, y), (x, y + 1), (x - 1, y)]
            .into_iter()
            .filter(move |&(nx, ny)| nx >= 0 && ny >= 0 && nx < w && ny < h)
            .map(|(nx, ny)| (nx as usize, ny as usize))
            .filter(|&(nx, ny)| !self.blocked(nx, ny))
    }
}

/// Parses an ASCII map: `#` obstacle, `S` start, `G` goal, `.` free.
pub fn parse_grid_str(text: &str) -> Result<GridWorld> {
    let rows: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    if rows.is_empty() {
        return Err(Error::parse(1, "empty map"));
    }
    let width = rows[0].chars().count();
    let mut obstacles = Vec::new();
    let mut start = None;
    let mut goal = None;
    for (y, row) in rows.iter().enumerate() {
        if row.chars().count() != width {
            return Err(Error::parse(y + 1, format!("ragged row: expected width {width}")));
        }
        for (x, c) in row.chars().enumerate() {
            match c {
                '#' => obstacles.push((x, y)),
                'S' => {
                    if start.replace((x, y)).is_some() {
                        return Err(Error::parse(y + 1, "duplicate start cell"));
                    }
                }
                'G' => {
                    if goal.replace((x, y)).is_some() {
                        return Err(Error::parse(y + 1, "duplicate goal cell"));
                    }
                }
                '.' => {}
                other => return Err(Error::parse(y + 1, format!("unexpected map character '{other}'"))),
            }
        }
    }
    let start = start.ok_or_else(|| Error::parse(1, "map has no start cell 'S'"))?;
    let goal = goal.ok_or_else(|| Error::parse(1, "map has no goal cell 'G'"))?;
    GridWorld::new(width, rows.len(), &obstacles, start, goal)
}

/// Edge-list text: `n m` header then `m` lines of `u v w`.
pub fn parse_graph_str(text: &str, directed: bool) -> Result<WeightedGraph> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "empty file"))?;
    let mut parts = header.split_whitespace();
    let n: usize = parts
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::parse(1, "bad node count"))?;
    let m: usize = parts
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::parse(1, "bad edge count"))?;
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| Error::parse(m + 1, format!("expected {m} edges, file ended early")))?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::parse(ln + 1, format!("expected 'u v w', got '{line}'")));
        }
        let parse_u = |s: &str| -> Result<usize> {
            s.parse().map_err(|_| Error::parse(ln + 1, format!("bad number '{s}'")))
        };
        let u = parse_u(fields[0])?;
        let v = parse_u(fields[1])?;
        let w: u32 = fields[2]
            .parse()
            .map_err(|_| Error::parse(ln + 1, format!("bad weight '{}'", fields[2])))?;
        edges.push((u, v, w));
    }
    WeightedGraph::new(n, edges, directed)
}

pub fn write_graph_str(g: &WeightedGraph) -> String {
    let mut out = format!("{} {}\n", g.n, g.edges.len());
    for &(u, v, w) in &g.edges {
        out.push_str(&format!("{u} {v} {w}\n"));
    }
    out
}

/// Goal-rooted wavefront plan: runs SSSP from the goal over the free cells
/// and walks from the start along strictly decreasing firing times
/// (tie-break N, E, S, W). Returns the cell path including both endpoints,
/// or `None` when the goal is unreachable.
pub fn plan_path(world: &GridWorld) -> Result<Option<Vec<(usize, usize)>>> {
    // compact node ids over free cells
    let mut node_of = vec![None; world.width * world.height];
    let mut cells = Vec::new();
    for y in 0..world.height {
        for x in 0..world.width {
            if !world.blocked(x, y) {
                node_of[y * world.width + x] = Some(cells.len());
                cells.push((x, y));
            }
        }
    }
    let mut edges = Vec::new();
    for (id, &(x, y)) in cells.iter().enumerate() {
        for (nx, ny) in world.neighbors(x, y) {
            let nid = node_of[ny * world.width + nx].expect("neighbor is free");
            if id < nid {
                edges.push((id, nid, 1));
            }
        }
    }
    let graph = WeightedGraph::new(cells.len(), edges, false)?;
    let mut net = build_graph_network(&graph)?;
    let goal_id = node_of[world.goal.1 * world.width + world.goal.0].expect("goal is free");
    let table = sssp(&mut net, goal_id as NeuronId)?;

    let start_id = node_of[world.start.1 * world.width + world.start.0].expect("start is free");
    let Some(mut remaining) = table.times[start_id] else {
        return Ok(None);
    };
    let mut path = vec![world.start];
    let (mut x, mut y) = world.start;
    while remaining > 0 {
        let mut advanced = false;
        for (nx, ny) in world.neighbors(x, y) {
            let nid = node_of[ny * world.width + nx].expect("neighbor is free");
            if table.times[nid] == Some(remaining - 1) {
                x = nx;
                y = ny;
                path.push((x, y));
                remaining -= 1;
                advanced = true;
                break;
            }
        }
        if !advanced {
            return Err(Error::structure(
                "wavefront table inconsistent: no descending neighbor".to_string(),
            ));
        }
    }
    Ok(Some(path))
}
