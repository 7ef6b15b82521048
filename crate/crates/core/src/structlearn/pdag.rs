use std::collections::VecDeque;

/// Partially directed graph on `0..n`. `a -> b` is stored as the single
/// mark `(a, b)`, `a - b` as both `(a, b)` and `(b, a)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pdag {
    n: usize,
    marks: Vec<bool>,
}

impl Pdag {
    pub fn new(n: usize) -> Self {
        Pdag {
            n,
            marks: vec![false; n * n],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn mark(&self, a: usize, b: usize) -> bool {
        self.marks[a * self.n + b]
    }

    fn set(&mut self, a: usize, b: usize, v: bool) {
        self.marks[a * self.n + b] = v;
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.mark(a, b) || self.mark(b, a)
    }

    /// `a -> b`.
    pub fn directed(&self, a: usize, b: usize) -> bool {
        self.mark(a, b) && !self.mark(b, a)
    }

    pub fn undirected(&self, a: usize, b: usize) -> bool {
        self.mark(a, b) && self.mark(b, a)
    }

    pub fn add_directed(&mut self, a: usize, b: usize) {
        self.set(a, b, true);
        self.set(b, a, false);
    }

    pub fn add_undirected(&mut self, a: usize, b: usize) {
        self.set(a, b, true);
        self.set(b, a, true);
    }

    pub fn remove(&mut self, a: usize, b: usize) {
        self.set(a, b, false);
        self.set(b, a, false);
    }

    pub fn parents(&self, b: usize) -> Vec<usize> {
        (0..self.n).filter(|&a| self.directed(a, b)).collect()
    }

    pub fn children(&self, a: usize) -> Vec<usize> {
        (0..self.n).filter(|&b| self.directed(a, b)).collect()
    }

    pub fn undirected_neighbors(&self, a: usize) -> Vec<usize> {
        (0..self.n).filter(|&b| self.undirected(a, b)).collect()
    }

    pub fn neighbors(&self, a: usize) -> Vec<usize> {
        (0..self.n).filter(|&b| self.adjacent(a, b)).collect()
    }

    pub fn edge_count(&self) -> usize {
        (0..self.n)
            .flat_map(|a| (a + 1..self.n).map(move |b| (a, b)))
            .filter(|&(a, b)| self.adjacent(a, b))
            .count()
    }

    pub fn is_clique(&self, nodes: &[usize]) -> bool {
        nodes
            .iter()
            .enumerate()
            .all(|(i, &a)| nodes[i + 1..].iter().all(|&b| self.adjacent(a, b)))
    }

    /// Whether a path from `from` to `to` exists that only follows
    /// undirected edges or directed edges forwards, avoiding `blocked`.
    pub fn semi_directed_path(&self, from: usize, to: usize, blocked: &[usize]) -> bool {
        let mut seen = vec![false; self.n];
        for &b in blocked {
            seen[b] = true;
        }
        seen[from] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(u) = queue.pop_front() {
            for w in 0..self.n {
                if self.mark(u, w) && !seen[w] {
                    if w == to {
                        return true;
                    }
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        false
    }

    /// A consistent extension as parent lists, or `None` if none exists.
    /// Repeatedly removes a sink whose undirected neighbours are adjacent to
    /// all of its other neighbours.
    pub fn to_dag(&self) -> Option<Vec<Vec<usize>>> {
        let mut g = self.clone();
        let mut alive = vec![true; self.n];
        let mut parents = vec![Vec::new(); self.n];
        for _ in 0..self.n {
            let x = (0..self.n).find(|&x| {
                alive[x]
                    && (0..self.n).all(|y| !alive[y] || !g.directed(x, y))
                    && {
                        let adj: Vec<usize> = (0..self.n).filter(|&y| alive[y] && g.adjacent(x, y)).collect();
                        g.undirected_neighbors(x)
                            .into_iter()
                            .filter(|&y| alive[y])
                            .all(|y| adj.iter().all(|&z| z == y || g.adjacent(y, z)))
                    }
            })?;
            for y in 0..self.n {
                if alive[y] && g.adjacent(x, y) {
                    parents[x].push(y);
                    g.remove(x, y);
                }
            }
            alive[x] = false;
        }
        Some(parents)
    }

    /// Completed PDAG of the equivalence class of the DAG given by `parents`.
    pub fn cpdag_of(parents: &[Vec<usize>]) -> Pdag {
        let n = parents.len();
        let mut g = Pdag::new(n);
        for (b, ps) in parents.iter().enumerate() {
            for &a in ps {
                g.add_undirected(a, b);
            }
        }
        for (c, ps) in parents.iter().enumerate() {
            for (i, &a) in ps.iter().enumerate() {
                for &b in &ps[i + 1..] {
                    if !g.adjacent(a, b) {
                        g.add_directed(a, c);
                        g.add_directed(b, c);
                    }
                }
            }
        }
        g.apply_meek();
        g
    }

    /// Orientation rules 1 to 3 to a fixpoint.
    pub fn apply_meek(&mut self) {
        let n = self.n;
        loop {
            let mut changed = false;
            for a in 0..n {
                for b in 0..n {
                    if !self.undirected(a, b) {
                        continue;
                    }
                    // R1: c -> a - b, c and b nonadjacent
                    let r1 = (0..n).any(|c| self.directed(c, a) && !self.adjacent(c, b) && c != b);
                    // R2: a -> c -> b
                    let r2 = (0..n).any(|c| self.directed(a, c) && self.directed(c, b));
                    // R3: a - c -> b, a - d -> b, c and d nonadjacent
                    let r3 = {
                        let cs: Vec<usize> = (0..n)
                            .filter(|&c| self.undirected(a, c) && self.directed(c, b))
                            .collect();
                        cs.iter().enumerate().any(|(i, &c)| cs[i + 1..].iter().any(|&d| !self.adjacent(c, d)))
                    };
                    if r1 || r2 || r3 {
                        self.add_directed(a, b);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collider_is_compelled_chain_is_not() {
        // 0 -> 2 <- 1
        let g = Pdag::cpdag_of(&[vec![], vec![], vec![0, 1]]);
        assert!(g.directed(0, 2) && g.directed(1, 2));
        // 0 -> 1 -> 2
        let g = Pdag::cpdag_of(&[vec![], vec![0], vec![1]]);
        assert!(g.undirected(0, 1) && g.undirected(1, 2));
    }

    #[test]
    fn rule_one_propagates() {
        // 0 -> 2 <- 1, 2 -> 3
        let g = Pdag::cpdag_of(&[vec![], vec![], vec![0, 1], vec![2]]);
        assert!(g.directed(2, 3));
    }

    #[test]
    fn extension_round_trip() {
        let dag = vec![vec![], vec![0], vec![0, 1], vec![2]];
        let cp = Pdag::cpdag_of(&dag);
        let ext = cp.to_dag().unwrap();
        assert_eq!(Pdag::cpdag_of(&ext), cp);
    }

    #[test]
    fn semi_directed() {
        let mut g = Pdag::new(3);
        g.add_directed(0, 1);
        g.add_undirected(1, 2);
        assert!(g.semi_directed_path(0, 2, &[]));
        assert!(!g.semi_directed_path(0, 2, &[1]));
        assert!(!g.semi_directed_path(2, 0, &[]));
    }
}
