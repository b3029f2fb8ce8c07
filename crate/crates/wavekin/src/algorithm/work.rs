//! Mutable multigraph the reduction runs on. Atoms and bonds keep the
//! indices of the input molecule; removal only clears liveness flags.

use std::collections::VecDeque;

use crate::molecules::Molecule;

#[derive(Clone, Debug)]
pub(crate) struct Work {
    pub ids: Vec<u32>,
    pub ends: Vec<(usize, usize)>,
    pub bond_alive: Vec<bool>,
    pub atom_alive: Vec<bool>,
    /// Incident bond ids per atom; a loop is listed once.
    inc: Vec<Vec<usize>>,
}

impl Work {
    pub fn new(m: &Molecule) -> Self {
        let n = m.atom_count();
        let mut inc = vec![Vec::new(); n];
        for b in &m.bonds {
            inc[b.from].push(b.id);
            if b.to != b.from {
                inc[b.to].push(b.id);
            }
        }
        Work {
            ids: m.atoms.iter().map(|a| a.id).collect(),
            ends: m.bonds.iter().map(|b| (b.from, b.to)).collect(),
            bond_alive: vec![true; m.bond_count()],
            atom_alive: vec![true; n],
            inc,
        }
    }

    pub fn atoms(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.ids.len()).filter(|&v| self.atom_alive[v])
    }

    pub fn live_bonds(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.inc[v].iter().copied().filter(|&b| self.bond_alive[b])
    }

    pub fn is_loop(&self, b: usize) -> bool {
        self.ends[b].0 == self.ends[b].1
    }

    pub fn other(&self, b: usize, v: usize) -> usize {
        let (x, y) = self.ends[b];
        if x == v {
            y
        } else {
            x
        }
    }

    pub fn degree(&self, v: usize) -> usize {
        self.live_bonds(v).map(|b| if self.is_loop(b) { 2 } else { 1 }).sum()
    }

    pub fn loops(&self, v: usize) -> usize {
        self.live_bonds(v).filter(|&b| self.is_loop(b)).count()
    }

    /// Distinct neighbours with bond multiplicities, ascending by index.
    pub fn neighbours(&self, v: usize) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = Vec::with_capacity(4);
        for b in self.live_bonds(v).filter(|&b| !self.is_loop(b)) {
            let u = self.other(b, v);
            match out.iter_mut().find(|(w, _)| *w == u) {
                Some(e) => e.1 += 1,
                None => out.push((u, 1)),
            }
        }
        out.sort_unstable();
        out
    }

    pub fn multiplicity(&self, a: usize, b: usize) -> usize {
        self.live_bonds(a).filter(|&e| !self.is_loop(e) && self.other(e, a) == b).count()
    }

    pub fn has_double(&self, v: usize) -> bool {
        self.neighbours(v).iter().any(|&(_, k)| k == 2)
    }

    /// Degree-2 atom whose two bonds go to one neighbour.
    pub fn is_double_degree_two(&self, v: usize) -> bool {
        self.atom_alive[v] && self.loops(v) == 0 && matches!(self.neighbours(v).as_slice(), [(_, 2)])
    }

    pub fn count_double_degree_two(&self) -> usize {
        self.atoms().filter(|&v| self.is_double_degree_two(v)).count()
    }

    /// Remove `v` and its bonds; returns the removed bond ids, ascending.
    pub fn remove_atom(&mut self, v: usize) -> Vec<usize> {
        let mut gone: Vec<usize> = self.live_bonds(v).collect();
        gone.sort_unstable();
        for &b in &gone {
            self.bond_alive[b] = false;
        }
        self.atom_alive[v] = false;
        gone
    }

    pub fn remove_bond(&mut self, b: usize) {
        self.bond_alive[b] = false;
    }

    /// Atoms reachable from `start`, ignoring atom `skip_atom` and bond
    /// `skip_bond`.
    pub fn reach(&self, start: usize, skip_atom: Option<usize>, skip_bond: Option<usize>) -> Vec<usize> {
        let mut seen = vec![false; self.ids.len()];
        let mut out = Vec::new();
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(v) = queue.pop_front() {
            out.push(v);
            for b in self.live_bonds(v) {
                if Some(b) == skip_bond {
                    continue;
                }
                let u = self.other(b, v);
                if !seen[u] && Some(u) != skip_atom && self.atom_alive[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.ids.len()];
        let mut out = Vec::new();
        for v in self.atoms() {
            if !seen[v] {
                let c = self.reach(v, None, None);
                for &u in &c {
                    seen[u] = true;
                }
                out.push(c);
            }
        }
        out
    }

    /// Bridges of the live multigraph by low-link search; parallel bonds and
    /// loops are never bridges.
    pub fn bridges(&self) -> Vec<usize> {
        let n = self.ids.len();
        let mut disc = vec![usize::MAX; n];
        let mut low = vec![0usize; n];
        let mut time = 0usize;
        let mut out = Vec::new();
        for root in self.atoms() {
            if disc[root] != usize::MAX {
                continue;
            }
            // explicit stack of (atom, bond used to enter, incident cursor)
            let mut stack: Vec<(usize, Option<usize>, usize)> = vec![(root, None, 0)];
            disc[root] = time;
            low[root] = time;
            time += 1;
            while let Some(top) = stack.len().checked_sub(1) {
                let (v, via, cur) = stack[top];
                let bonds = &self.inc[v];
                if cur < bonds.len() {
                    let b = bonds[cur];
                    stack[top].2 += 1;
                    if !self.bond_alive[b] || self.is_loop(b) || Some(b) == via {
                        continue;
                    }
                    let u = self.other(b, v);
                    if disc[u] == usize::MAX {
                        disc[u] = time;
                        low[u] = time;
                        time += 1;
                        stack.push((u, Some(b), 0));
                    } else {
                        low[v] = low[v].min(disc[u]);
                    }
                } else {
                    stack.pop();
                    if let (Some(&(p, _, _)), Some(b)) = (stack.last(), via) {
                        low[p] = low[p].min(low[v]);
                        if low[v] > disc[p] {
                            out.push(b);
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}
