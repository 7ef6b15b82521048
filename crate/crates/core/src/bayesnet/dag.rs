use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng;

/// Directed acyclic graph over named nodes, stored as parent and child lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    names: Vec<String>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
}

impl Dag {
    pub fn from_parents(names: Vec<String>, parents: Vec<Vec<usize>>) -> Self {
        let mut children = vec![Vec::new(); names.len()];
        for (c, ps) in parents.iter().enumerate() {
            for &p in ps {
                children[p].push(c);
            }
        }
        Dag {
            names,
            parents,
            children,
        }
    }

    pub fn from_edges(names: Vec<String>, edges: &[(usize, usize)]) -> Self {
        let mut parents = vec![Vec::new(); names.len()];
        for &(a, b) in edges {
            parents[b].push(a);
        }
        for p in &mut parents {
            p.sort_unstable();
            p.dedup();
        }
        Dag::from_parents(names, parents)
    }

    /// Random DAG on `n` nodes named `V0..` with at most `max_edges` edges.
    /// Edges respect a random permutation, so the result is always acyclic.
    pub fn random<R: Rng>(n: usize, max_edges: usize, rng: &mut R) -> Self {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let mut candidates: Vec<(usize, usize)> = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                candidates.push((order[i], order[j]));
            }
        }
        candidates.shuffle(rng);
        let k = if candidates.is_empty() {
            0
        } else {
            rng.random_range(0..=max_edges.min(candidates.len()))
        };
        let names = (0..n).map(|i| format!("V{i}")).collect();
        Dag::from_edges(names, &candidates[..k])
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn parents(&self, i: usize) -> &[usize] {
        &self.parents[i]
    }

    pub fn children(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    pub fn parent_lists(&self) -> Vec<Vec<usize>> {
        self.parents.clone()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.parents
            .iter()
            .enumerate()
            .flat_map(|(c, ps)| ps.iter().map(move |&p| (p, c)))
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.parents.iter().map(Vec::len).sum()
    }

    /// Kahn's algorithm; `None` if the graph has a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.len();
        let mut indeg: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &c in &self.children[v] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    queue.push_back(c);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    /// Mask of the ancestors of `seeds`, seeds included.
    pub fn ancestors_of(&self, seeds: &[usize]) -> Vec<bool> {
        let mut mask = vec![false; self.len()];
        let mut stack: Vec<usize> = seeds.to_vec();
        while let Some(v) = stack.pop() {
            if !mask[v] {
                mask[v] = true;
                stack.extend(self.parents[v].iter().copied());
            }
        }
        mask
    }

    /// Whether `a` is a proper ancestor of `b`.
    pub fn is_ancestor(&self, a: usize, b: usize) -> bool {
        a != b && self.ancestors_of(&[b])[a]
    }

    /// d-separation of `x` and `y` given `z`, by reachability over
    /// (node, direction) states.
    pub fn d_separated(&self, x: usize, y: usize, z: &[usize]) -> bool {
        let n = self.len();
        let mut in_z = vec![false; n];
        for &v in z {
            in_z[v] = true;
        }
        let an_z = self.ancestors_of(z);
        // visited[v][0]: arrived from a child (moving up), [1]: from a parent
        let mut visited = vec![[false; 2]; n];
        let mut queue = VecDeque::from([(x, 0usize)]);
        while let Some((v, dir)) = queue.pop_front() {
            if visited[v][dir] {
                continue;
            }
            visited[v][dir] = true;
            if v == y {
                return false;
            }
            let up = dir == 0;
            if up && (!in_z[v] || v == x) {
                queue.extend(self.parents[v].iter().map(|&p| (p, 0)));
                queue.extend(self.children[v].iter().map(|&c| (c, 1)));
            } else if !up {
                if !in_z[v] {
                    queue.extend(self.children[v].iter().map(|&c| (c, 1)));
                }
                if an_z[v] {
                    queue.extend(self.parents[v].iter().map(|&p| (p, 0)));
                }
            }
        }
        true
    }
}
