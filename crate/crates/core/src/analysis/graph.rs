//! Stage dependency graph of an explicit tableau.

use crate::exact::{Scalar, Tableau};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("stage graph has a cycle through node {0}")]
    Cycle(usize),
    #[error("edge {from} -> {to} refers to a missing node")]
    BadEdge { from: usize, to: usize },
}

/// Nodes `0..s` are stages, node `s` is the output pair `(y_{n+1}, yhat_{n+1})`.
/// There is an edge `j -> i` when stage `i` reads `f(Y_j)`, and `j -> s` when
/// `b_j` or `bhat_j` is nonzero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageGraph {
    preds: Vec<Vec<usize>>,
    succs: Vec<Vec<usize>>,
    labels: Vec<String>,
}

impl StageGraph {
    pub fn from_tableau(t: &Tableau) -> Self {
        let s = t.stages();
        let mut edges = Vec::new();
        for i in 0..s {
            for (j, a) in t.a_row(i).iter().enumerate() {
                if !a.is_zero() {
                    edges.push((j, i));
                }
            }
        }
        for (j, (b, bh)) in t.b().iter().zip(t.b_hat()).enumerate() {
            if !b.is_zero() || !bh.is_zero() {
                edges.push((j, s));
            }
        }
        let mut labels: Vec<String> = (1..=s).map(|i| format!("stage {i}")).collect();
        labels.push("y_{n+1}".to_string());
        Self::from_edges(s + 1, &edges, labels).expect("tableau edges are in range")
    }

    /// General constructor; `labels` must have one entry per node.
    pub fn from_edges(
        nodes: usize,
        edges: &[(usize, usize)],
        labels: Vec<String>,
    ) -> Result<Self, GraphError> {
        assert_eq!(labels.len(), nodes, "one label per node");
        let mut preds = vec![Vec::new(); nodes];
        let mut succs = vec![Vec::new(); nodes];
        for &(from, to) in edges {
            if from >= nodes || to >= nodes {
                return Err(GraphError::BadEdge { from, to });
            }
            preds[to].push(from);
            succs[from].push(to);
        }
        for v in preds.iter_mut().chain(succs.iter_mut()) {
            v.sort_unstable();
            v.dedup();
        }
        Ok(Self {
            preds,
            succs,
            labels,
        })
    }

    pub fn with_labels(mut self, stage_labels: impl IntoIterator<Item = String>) -> Self {
        for (slot, l) in self.labels.iter_mut().zip(stage_labels) {
            *slot = l;
        }
        self
    }

    pub fn node_count(&self) -> usize {
        self.preds.len()
    }

    /// Number of stage nodes (excluding the output node).
    pub fn stages(&self) -> usize {
        self.node_count() - 1
    }

    pub fn output(&self) -> usize {
        self.stages()
    }

    pub fn preds(&self, node: usize) -> &[usize] {
        &self.preds[node]
    }

    pub fn succs(&self, node: usize) -> &[usize] {
        &self.succs[node]
    }

    pub fn label(&self, node: usize) -> &str {
        &self.labels[node]
    }

    pub fn edge_count(&self) -> usize {
        self.preds.iter().map(Vec::len).sum()
    }

    /// Kahn's algorithm; smallest ready node first, so the order is
    /// deterministic.
    pub fn topological_order(&self) -> Result<Vec<usize>, GraphError> {
        let n = self.node_count();
        let mut indeg: Vec<usize> = self.preds.iter().map(Vec::len).collect();
        let mut ready: std::collections::BTreeSet<usize> =
            (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = ready.pop_first() {
            order.push(i);
            for &j in &self.succs[i] {
                indeg[j] -= 1;
                if indeg[j] == 0 {
                    ready.insert(j);
                }
            }
        }
        if order.len() < n {
            let stuck = (0..n).find(|&i| indeg[i] > 0).unwrap_or(0);
            return Err(GraphError::Cycle(stuck));
        }
        Ok(order)
    }

    /// For each stage, the number of evaluations on the longest dependency
    /// chain ending with it (1 for stages with no predecessors). The output
    /// node gets the longest chain among its predecessors.
    pub fn depths(&self) -> Result<Vec<usize>, GraphError> {
        let order = self.topological_order()?;
        let out = self.output();
        let mut depth = vec![0usize; self.node_count()];
        for i in order {
            let longest = self.preds[i].iter().map(|&j| depth[j]).max().unwrap_or(0);
            depth[i] = if i == out { longest } else { longest + 1 };
        }
        Ok(depth)
    }

    /// Sequential evaluations per step: the longest path to the output,
    /// counted in stage nodes. At least 1.
    pub fn seq_stages(&self) -> Result<usize, GraphError> {
        Ok(self.depths()?[self.output()].max(1))
    }

    /// Longest dependency chain over all stages. Exceeds `seq_stages` when
    /// some stage feeds only the embedded weights.
    pub fn critical_path(&self) -> Result<usize, GraphError> {
        Ok(self.depths()?.into_iter().max().unwrap_or(0).max(1))
    }

    /// Nodes reachable from node 0.
    pub fn reachable_from_first(&self) -> Vec<bool> {
        let mut seen = vec![false; self.node_count()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for &j in &self.succs[i] {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rational, Coefficient};

    fn q(n: i64, d: i64) -> Coefficient {
        Coefficient::Exact(rational(n, d))
    }

    #[test]
    fn forward_euler_graph() {
        let t = Tableau::new("euler", vec![vec![]], vec![q(1, 1)], vec![q(1, 1)], 1, 1).unwrap();
        let g = StageGraph::from_tableau(&t);
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.seq_stages().unwrap(), 1);
    }

    #[test]
    fn cycle_detected() {
        let labels = vec!["a".into(), "b".into(), "out".into()];
        let g = StageGraph::from_edges(3, &[(0, 1), (1, 0), (1, 2)], labels).unwrap();
        assert!(matches!(g.seq_stages(), Err(GraphError::Cycle(_))));
    }

    #[test]
    fn longest_path() {
        // 0 -> 1 -> 3, 0 -> 2, output reads 2 and 3.
        let labels = (0..5).map(|i| i.to_string()).collect();
        let g = StageGraph::from_edges(5, &[(0, 1), (1, 3), (0, 2), (2, 4), (3, 4)], labels)
            .unwrap();
        assert_eq!(g.depths().unwrap(), vec![1, 2, 2, 3, 3]);
        assert_eq!(g.seq_stages().unwrap(), 3);
    }
}
