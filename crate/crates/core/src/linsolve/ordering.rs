//! Fill-reducing symmetric ordering by recursive level-set bisection.
//!
//! The graph of `A + Aᵀ` is split by a breadth-first level set from a
//! pseudo-peripheral vertex; both halves are ordered recursively and the
//! separator goes last. Dense rows (such as a global constraint) are removed
//! from the graph up front and ordered after everything else.
//!
//! Rows with a zero diagonal, such as the pressure block of a saddle-point
//! matrix, are not dissected. The graph is built on the remaining rows, with
//! the neighbours of each zero-diagonal row joined into a clique (the pattern
//! of `A + BᵀB`), and each zero-diagonal row is placed right after its last
//! neighbour. By then its Schur complement diagonal is nonzero, so the
//! factorization can keep diagonal pivots.

use std::collections::{HashSet, VecDeque};

use super::SparseMatrixCSR;

/// Subgraphs at or below this size are not split further.
const LEAF_SIZE: usize = 64;

/// Returns `perm` with `perm[new] = old`.
pub fn nested_dissection(a: &SparseMatrixCSR) -> Vec<usize> {
    let n = a.nrows();
    let adj = symmetric_adjacency(a);
    let dense_limit = (10.0 * (n as f64).sqrt()).max(32.0) as usize;
    let dense: Vec<bool> = adj.iter().map(|nb| nb.len() > dense_limit).collect();
    let zero_diag: Vec<bool> = (0..n).map(|i| !dense[i] && a.get(i, i) == 0.0).collect();
    let primary = |j: usize| !dense[j] && !zero_diag[j];

    // graph on the primary rows, with a clique per distinct zero-diagonal neighbourhood
    let mut graph: Vec<Vec<usize>> = (0..n)
        .map(|i| if primary(i) { adj[i].iter().copied().filter(|&j| primary(j)).collect() } else { Vec::new() })
        .collect();
    let mut cliques: HashSet<Vec<usize>> = HashSet::new();
    for i in (0..n).filter(|&i| zero_diag[i]) {
        let nb: Vec<usize> = adj[i].iter().copied().filter(|&j| primary(j)).collect();
        if nb.len() > 1 && cliques.insert(nb.clone()) {
            for &u in &nb {
                graph[u].extend(nb.iter().copied().filter(|&v| v != u));
            }
        }
    }
    for g in &mut graph {
        g.sort_unstable();
        g.dedup();
    }

    let mut ws = Workspace { adj: &graph, tag: vec![0; n], generation: 0, level: vec![usize::MAX; n] };
    let mut primary_order = Vec::with_capacity(n);
    ws.dissect((0..n).filter(|&i| primary(i)).collect(), &mut primary_order);

    let mut pos = vec![usize::MAX; n];
    for (p, &v) in primary_order.iter().enumerate() {
        pos[v] = p;
    }
    let mut after: Vec<Vec<usize>> = vec![Vec::new(); primary_order.len()];
    let mut isolated = Vec::new();
    for i in (0..n).filter(|&i| zero_diag[i]) {
        match adj[i].iter().filter(|&&j| primary(j)).map(|&j| pos[j]).max() {
            Some(p) => after[p].push(i),
            None => isolated.push(i),
        }
    }
    let mut order = Vec::with_capacity(n);
    for (&v, extra) in primary_order.iter().zip(&after) {
        order.push(v);
        order.extend(extra);
    }
    order.extend(isolated);
    order.extend((0..n).filter(|&i| dense[i]));
    debug_assert_eq!(order.len(), n);
    order
}

fn symmetric_adjacency(a: &SparseMatrixCSR) -> Vec<Vec<usize>> {
    let n = a.nrows();
    let mut adj = vec![Vec::new(); n];
    for i in 0..n {
        for &j in a.row(i).0 {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    for nb in &mut adj {
        nb.sort_unstable();
        nb.dedup();
    }
    adj
}

struct Workspace<'a> {
    adj: &'a [Vec<usize>],
    tag: Vec<u32>,
    generation: u32,
    level: Vec<usize>,
}

impl Workspace<'_> {
    fn mark(&mut self, set: &[usize]) -> u32 {
        self.generation += 1;
        for &v in set {
            self.tag[v] = self.generation;
        }
        self.generation
    }

    /// Breadth-first levels from `root` inside the marked set; returns the
    /// visit order and the number of levels.
    fn bfs(&mut self, root: usize, gen: u32, visited: &mut Vec<usize>) -> usize {
        visited.clear();
        let mut queue = VecDeque::from([root]);
        self.level[root] = 0;
        let mut depth = 0;
        let mark = gen.wrapping_add(u32::MAX / 2);
        self.tag[root] = mark;
        while let Some(v) = queue.pop_front() {
            visited.push(v);
            depth = depth.max(self.level[v] + 1);
            for &w in &self.adj[v] {
                if self.tag[w] == gen {
                    self.tag[w] = mark;
                    self.level[w] = self.level[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        for &v in visited.iter() {
            self.tag[v] = gen;
        }
        depth
    }

    fn dissect(&mut self, set: Vec<usize>, order: &mut Vec<usize>) {
        if set.len() <= LEAF_SIZE {
            order.extend(set);
            return;
        }
        let gen = self.mark(&set);
        // split into connected components first; visited vertices leave the set
        let mut visited = Vec::new();
        let mut components = Vec::new();
        for &v in &set {
            if self.tag[v] != gen {
                continue;
            }
            self.bfs(v, gen, &mut visited);
            for &w in &visited {
                self.tag[w] = 0;
            }
            components.push(std::mem::take(&mut visited));
        }
        if components.len() > 1 {
            for c in components {
                self.dissect(c, order);
            }
            return;
        }
        let comp = components.pop().unwrap();
        let gen = self.mark(&comp);

        // pseudo-peripheral root: restart from the last vertex reached while depth grows
        let mut root = comp[0];
        let mut depth = self.bfs(root, gen, &mut visited);
        for _ in 0..8 {
            let far = *visited.last().unwrap();
            let d = self.bfs(far, gen, &mut visited);
            if d <= depth {
                self.bfs(root, gen, &mut visited);
                break;
            }
            root = far;
            depth = d;
        }
        if depth < 3 {
            order.extend(comp);
            return;
        }
        let mut counts = vec![0usize; depth];
        for &v in &visited {
            counts[self.level[v]] += 1;
        }
        let half = comp.len() / 2;
        let mut acc = 0;
        let mut sep_level = 1;
        for (l, &c) in counts.iter().enumerate() {
            if acc + c > half {
                sep_level = l.clamp(1, depth - 2);
                break;
            }
            acc += c;
        }
        let (mut left, mut right, mut sep) = (Vec::new(), Vec::new(), Vec::new());
        for &v in &visited {
            let l = self.level[v];
            if l < sep_level {
                left.push(v);
            } else if l > sep_level {
                right.push(v);
            } else if self.adj[v].iter().any(|&w| self.tag[w] == gen && self.level[w] == sep_level + 1) {
                sep.push(v);
            } else {
                // touches no vertex beyond the separator, so it can join the left part
                left.push(v);
            }
        }
        self.dissect(left, order);
        self.dissect(right, order);
        order.extend(sep);
    }
}
