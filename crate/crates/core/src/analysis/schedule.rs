//! Static assignment of stages to workers and time slots.

use super::graph::StageGraph;
use crate::builders::{EmbeddedMethod, Family};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ScheduleError {
    #[error("at least one worker is required")]
    NoWorkers,
    #[error("stage {stage} runs in slot {slot} before its predecessor {pred} (slot {pred_slot})")]
    Precedence {
        stage: usize,
        pred: usize,
        slot: usize,
        pred_slot: usize,
    },
    #[error("worker {worker} has two stages in slot {slot}")]
    Overbooked { worker: usize, slot: usize },
    #[error("stage {0} is not scheduled or is out of range")]
    Unscheduled(usize),
}

/// Every stage gets a worker and a time slot; stages in one slot run
/// concurrently.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    workers: usize,
    slot: Vec<usize>,
    worker: Vec<usize>,
    makespan: usize,
    /// Extrapolation chains (1-based) carried by each worker.
    chains: Option<Vec<Vec<usize>>>,
}

impl Schedule {
    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn makespan(&self) -> usize {
        self.makespan
    }

    pub fn stages(&self) -> usize {
        self.slot.len()
    }

    pub fn slot(&self, stage: usize) -> usize {
        self.slot[stage]
    }

    pub fn worker(&self, stage: usize) -> usize {
        self.worker[stage]
    }

    /// Stages of each slot, in increasing stage index.
    pub fn levels(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.makespan];
        for (i, &t) in self.slot.iter().enumerate() {
            out[t].push(i);
        }
        out
    }

    /// Stages of each worker, in execution order.
    pub fn lanes(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.workers];
        let mut order: Vec<usize> = (0..self.slot.len()).collect();
        order.sort_by_key(|&i| (self.slot[i], i));
        for i in order {
            out[self.worker[i]].push(i);
        }
        out
    }

    pub fn chain_groups(&self) -> Option<&[Vec<usize>]> {
        self.chains.as_deref()
    }

    /// Checks precedence and worker exclusivity against `g`.
    pub fn validate(&self, g: &StageGraph) -> Result<(), ScheduleError> {
        if self.slot.len() != g.stages() {
            return Err(ScheduleError::Unscheduled(self.slot.len().min(g.stages())));
        }
        let mut busy = vec![vec![false; self.makespan]; self.workers];
        for i in 0..g.stages() {
            let (t, w) = (self.slot[i], self.worker[i]);
            if t >= self.makespan || w >= self.workers {
                return Err(ScheduleError::Unscheduled(i));
            }
            if std::mem::replace(&mut busy[w][t], true) {
                return Err(ScheduleError::Overbooked { worker: w, slot: t });
            }
            for &j in g.preds(i) {
                if self.slot[j] >= t {
                    return Err(ScheduleError::Precedence {
                        stage: i,
                        pred: j,
                        slot: t,
                        pred_slot: self.slot[j],
                    });
                }
            }
        }
        Ok(())
    }
}

/// Longest path from each stage to the output, counted in stages.
fn bottom_levels(g: &StageGraph) -> Vec<usize> {
    let s = g.stages();
    let order = g.topological_order().expect("stage graphs are acyclic");
    let mut bl = vec![0; g.node_count()];
    for &v in order.iter().rev() {
        if v == s {
            continue;
        }
        bl[v] = 1 + g.succs(v).iter().map(|&u| bl[u]).max().unwrap_or(0);
    }
    bl.truncate(s);
    bl
}

/// Critical-path list scheduling: each slot runs the ready stages with the
/// longest remaining path, ties going to the lower index.
pub fn list_schedule(g: &StageGraph, workers: usize) -> Result<Schedule, ScheduleError> {
    if workers == 0 {
        return Err(ScheduleError::NoWorkers);
    }
    let s = g.stages();
    let bl = bottom_levels(g);
    let mut missing: Vec<usize> = (0..s).map(|i| g.preds(i).len()).collect();
    let mut slot = vec![usize::MAX; s];
    let mut worker = vec![0; s];
    let mut ready: Vec<usize> = (0..s).filter(|&i| missing[i] == 0).collect();
    let mut t = 0;
    let mut done = 0;
    while done < s {
        ready.sort_by(|&a, &b| bl[b].cmp(&bl[a]).then(a.cmp(&b)));
        let take = ready.len().min(workers);
        let running: Vec<usize> = ready.drain(..take).collect();
        for (w, &i) in running.iter().enumerate() {
            slot[i] = t;
            worker[i] = w;
        }
        for &i in &running {
            for &u in g.succs(i) {
                if u < s {
                    missing[u] -= 1;
                    if missing[u] == 0 {
                        ready.push(u);
                    }
                }
            }
        }
        done += running.len();
        t += 1;
    }
    Ok(Schedule {
        workers,
        slot,
        worker,
        makespan: t,
        chains: None,
    })
}

/// Private stages of each extrapolation chain, if every stage other than
/// the shared first one belongs to a chain and depends only on its own chain
/// and the first stage.
fn extrapolation_chains(m: &EmbeddedMethod) -> Option<Vec<Vec<usize>>> {
    if !matches!(m.family(), Family::ExEuler | Family::ExMidpoint) {
        return None;
    }
    let info = m.stage_info();
    let n = info.iter().filter_map(|x| x.chain).max()?;
    let mut chains = vec![Vec::new(); n];
    for (i, x) in info.iter().enumerate().skip(1) {
        chains[x.chain? - 1].push(i);
    }
    let g = m.graph();
    let closed = (1..m.stages())
        .all(|i| g.preds(i).iter().all(|&j| j == 0 || info[j].chain == info[i].chain));
    (info[0].chain.is_none() && closed).then_some(chains)
}

/// Packs chain lengths into bins. First-fit decreasing when `capacity` is
/// given, otherwise longest-first into the least loaded of `bins` bins.
/// Returns chain indices per bin.
pub(crate) fn pack_chains(lengths: &[usize], capacity: Option<usize>, bins: usize) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..lengths.len()).filter(|&k| lengths[k] > 0).collect();
    order.sort_by(|&a, &b| lengths[b].cmp(&lengths[a]).then(a.cmp(&b)));
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut load: Vec<usize> = Vec::new();
    match capacity {
        Some(cap) => {
            for k in order {
                match (0..out.len()).find(|&b| load[b] + lengths[k] <= cap) {
                    Some(b) => {
                        out[b].push(k);
                        load[b] += lengths[k];
                    }
                    None => {
                        out.push(vec![k]);
                        load.push(lengths[k]);
                    }
                }
            }
        }
        None => {
            out = vec![Vec::new(); bins.max(1)];
            load = vec![0; bins.max(1)];
            for k in order {
                let b = (0..out.len()).min_by_key(|&b| (load[b], b)).expect("bins");
                out[b].push(k);
                load[b] += lengths[k];
            }
            out.retain(|b| !b.is_empty());
        }
    }
    if out.is_empty() {
        out.push(Vec::new());
    }
    out
}

fn chain_schedule(chains: &[Vec<usize>], groups: Vec<Vec<usize>>, workers: usize, s: usize) -> Schedule {
    let mut slot = vec![0; s];
    let mut worker = vec![0; s];
    let mut makespan = 1;
    for (w, group) in groups.iter().enumerate() {
        let mut t = 1;
        for &k in group {
            for &i in &chains[k] {
                slot[i] = t;
                worker[i] = w;
                t += 1;
            }
        }
        makespan = makespan.max(t);
    }
    Schedule {
        workers,
        slot,
        worker,
        makespan,
        chains: Some(
            groups
                .into_iter()
                .map(|g| {
                    let mut g: Vec<usize> = g.into_iter().map(|k| k + 1).collect();
                    g.sort_unstable();
                    g
                })
                .collect(),
        ),
    }
}

/// Extrapolation chains are packed onto workers (first-fit decreasing into
/// `s_seq - 1` slots when that fits, longest-first otherwise); every other
/// method uses list scheduling.
pub fn build_schedule(m: &EmbeddedMethod, workers: usize) -> Result<Schedule, ScheduleError> {
    if workers == 0 {
        return Err(ScheduleError::NoWorkers);
    }
    let Some(chains) = extrapolation_chains(m) else {
        return list_schedule(m.graph(), workers);
    };
    let lengths: Vec<usize> = chains.iter().map(Vec::len).collect();
    let s_seq = m.graph().seq_stages().expect("acyclic");
    let ffd = pack_chains(&lengths, Some(s_seq - 1), 0);
    let groups = if ffd.len() <= workers {
        ffd
    } else {
        pack_chains(&lengths, None, workers)
    };
    Ok(chain_schedule(&chains, groups, workers, m.stages()))
}

/// Number of bins first-fit decreasing needs for the extrapolation chains
/// of `m` at capacity `s_seq - 1`.
pub(crate) fn chain_processes(m: &EmbeddedMethod) -> Option<usize> {
    let chains = extrapolation_chains(m)?;
    let lengths: Vec<usize> = chains.iter().map(Vec::len).collect();
    let s_seq = m.graph().seq_stages().ok()?;
    Some(pack_chains(&lengths, Some(s_seq - 1), 0).len())
}
