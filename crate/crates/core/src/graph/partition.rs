use alloc::vec;
use alloc::vec::Vec;

use super::Network;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionKind {
    ObservedComponents,
    CommunityDetected,
}

/// Assignment of every node to exactly one non-empty part.
///
/// Part ids are dense (`0..m`) and numbered by first appearance in node order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentPartition {
    assignment: Vec<usize>,
    parts: Vec<Vec<usize>>,
    kind: PartitionKind,
    cut_edges: usize,
}

impl ComponentPartition {
    /// Relabels `labels` densely and counts edges crossing parts.
    pub fn from_labels(net: &Network, labels: &[usize], kind: PartitionKind) -> Self {
        assert_eq!(labels.len(), net.n());
        let mut relabel = alloc::collections::BTreeMap::new();
        let mut assignment = Vec::with_capacity(labels.len());
        let mut parts: Vec<Vec<usize>> = Vec::new();
        for (i, &l) in labels.iter().enumerate() {
            let next = relabel.len();
            let id = *relabel.entry(l).or_insert(next);
            if id == parts.len() {
                parts.push(Vec::new());
            }
            parts[id].push(i);
            assignment.push(id);
        }
        let cut_edges = net
            .edges()
            .filter(|&(i, j)| assignment[i] != assignment[j])
            .count();
        Self {
            assignment,
            parts,
            kind,
            cut_edges,
        }
    }

    /// Every node in one part.
    pub fn single(net: &Network) -> Self {
        Self::from_labels(net, &vec![0; net.n()], PartitionKind::ObservedComponents)
    }

    pub fn m(&self) -> usize {
        self.parts.len()
    }

    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    pub fn part_of(&self, i: usize) -> usize {
        self.assignment[i]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn parts(&self) -> &[Vec<usize>] {
        &self.parts
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.parts.iter().map(Vec::len).collect()
    }

    pub fn kind(&self) -> PartitionKind {
        self.kind
    }

    pub fn cut_edges(&self) -> usize {
        self.cut_edges
    }

    /// Sample mean part size `n / m`.
    pub fn mean_size(&self) -> f64 {
        self.n() as f64 / self.m() as f64
    }
}

/// Maximal connected subgraphs, by breadth-first search in node order.
pub fn components(net: &Network) -> ComponentPartition {
    let n = net.n();
    let mut label = vec![usize::MAX; n];
    let mut queue = Vec::new();
    let mut next = 0;
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        label[start] = next;
        queue.clear();
        queue.push(start);
        let mut head = 0;
        while head < queue.len() {
            let v = queue[head];
            head += 1;
            for &w in net.neighbors(v) {
                if label[w] == usize::MAX {
                    label[w] = next;
                    queue.push(w);
                }
            }
        }
        next += 1;
    }
    ComponentPartition::from_labels(net, &label, PartitionKind::ObservedComponents)
}
