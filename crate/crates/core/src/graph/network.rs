use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Immutable undirected simple graph over opaque string identifiers.
///
/// Node indices are dense (`0..n`) in first-appearance order; neighbor lists
/// are sorted and symmetric.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    ids: Vec<String>,
    index: BTreeMap<String, usize>,
    adjacency: Vec<Vec<usize>>,
    edge_count: usize,
}

impl Network {
    /// Builds a network from `(from, to)` rows. Row numbers in errors are
    /// 1-based data rows (the header is not counted).
    pub fn from_edges<I, S>(rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, S)>,
        S: AsRef<str>,
    {
        let mut ids: Vec<String> = Vec::new();
        let mut index: BTreeMap<String, usize> = BTreeMap::new();
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        let mut intern = |id: &str, ids: &mut Vec<String>| -> usize {
            if let Some(&i) = index.get(id) {
                return i;
            }
            let i = ids.len();
            ids.push(id.to_string());
            index.insert(id.to_string(), i);
            i
        };
        for (row0, (a, b)) in rows.into_iter().enumerate() {
            let row = row0 + 1;
            let (a, b) = (a.as_ref().trim(), b.as_ref().trim());
            if a.is_empty() || b.is_empty() {
                return Err(Error::EmptyId { row });
            }
            if a == b {
                return Err(Error::SelfLoop {
                    row,
                    id: a.to_string(),
                });
            }
            let i = intern(a, &mut ids);
            let j = intern(b, &mut ids);
            pairs.push((i, j));
        }
        if pairs.is_empty() {
            return Err(Error::EmptyInput);
        }
        let index = ids.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        Ok(Self::assemble(ids, index, &pairs))
    }

    /// Builds a network over nodes labelled `"0".."n-1"` from index pairs.
    /// Self-loops are rejected; parallel edges collapse.
    pub fn from_index_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        for (row0, &(i, j)) in edges.iter().enumerate() {
            if i == j {
                return Err(Error::SelfLoop {
                    row: row0 + 1,
                    id: i.to_string(),
                });
            }
            assert!(i < n && j < n, "edge ({i}, {j}) out of range for {n} nodes");
        }
        let ids: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        let index = ids.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        Ok(Self::assemble(ids, index, edges))
    }

    /// Adds nodes that have no edges (e.g. isolates listed only in a data file).
    pub fn with_extra_nodes<S: AsRef<str>>(&self, extra: &[S]) -> Self {
        let mut out = self.clone();
        for id in extra {
            let id = id.as_ref();
            if !out.index.contains_key(id) {
                out.index.insert(id.to_string(), out.ids.len());
                out.ids.push(id.to_string());
                out.adjacency.push(Vec::new());
            }
        }
        out
    }

    fn assemble(ids: Vec<String>, index: BTreeMap<String, usize>, pairs: &[(usize, usize)]) -> Self {
        let n = ids.len();
        let mut adjacency = alloc::vec![Vec::new(); n];
        for &(i, j) in pairs {
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
        let mut twice_edges = 0;
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
            twice_edges += list.len();
        }
        Self {
            ids,
            index,
            adjacency,
            edge_count: twice_edges / 2,
        }
    }

    /// Subgraph induced by the nodes with `keep[i] == true`, preserving order.
    pub fn induced(&self, keep: &[bool]) -> Self {
        assert_eq!(keep.len(), self.n());
        let mut remap = alloc::vec![usize::MAX; self.n()];
        let mut ids = Vec::new();
        for (i, _) in keep.iter().enumerate().filter(|(_, k)| **k) {
            remap[i] = ids.len();
            ids.push(self.ids[i].clone());
        }
        let mut pairs = Vec::new();
        for (i, list) in self.adjacency.iter().enumerate() {
            if remap[i] == usize::MAX {
                continue;
            }
            for &j in list.iter().filter(|&&j| j > i && remap[j] != usize::MAX) {
                pairs.push((remap[i], remap[j]));
            }
        }
        let index = ids.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        Self::assemble(ids, index, &pairs)
    }

    pub fn n(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i].binary_search(&j).is_ok()
    }

    /// Undirected edges `(i, j)` with `i < j`, in index order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, list)| list.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    pub fn isolates(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n()).filter(|&i| self.adjacency[i].is_empty())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dedups_and_symmetrizes() {
        let net = Network::from_edges([("1", "2"), ("2", "1"), ("2", "3")]).unwrap();
        assert_eq!(net.n(), 3);
        assert_eq!(net.edge_count(), 2);
        assert_eq!(net.neighbors(1), &[0, 2]);
        assert_eq!(net.ids(), &["1", "2", "3"]);
    }

    #[test]
    fn single_edge() {
        let net = Network::from_edges([("a", "b")]).unwrap();
        assert_eq!(net.neighbors(0), &[1]);
        assert_eq!(net.neighbors(1), &[0]);
        assert_eq!((net.degree(0), net.degree(1)), (1, 1));
    }

    #[test]
    fn rejects_self_loop_with_row() {
        let err = Network::from_edges([("a", "b"), ("c", "c")]).unwrap_err();
        assert_eq!(
            err,
            Error::SelfLoop {
                row: 2,
                id: "c".into()
            }
        );
    }

    #[test]
    fn rejects_empty() {
        let rows: [(&str, &str); 0] = [];
        assert_eq!(Network::from_edges(rows).unwrap_err(), Error::EmptyInput);
        assert_eq!(
            Network::from_edges([("a", " ")]).unwrap_err(),
            Error::EmptyId { row: 1 }
        );
    }

    #[test]
    fn induced_subgraph_drops_incident_edges() {
        let net = Network::from_edges([("a", "b"), ("b", "c"), ("c", "a"), ("c", "d")]).unwrap();
        let sub = net.induced(&[true, false, true, true]);
        assert_eq!(sub.ids(), &["a", "c", "d"]);
        assert_eq!(sub.edge_count(), 2);
        assert!(sub.has_edge(0, 1) && sub.has_edge(1, 2) && !sub.has_edge(0, 2));
    }
}
