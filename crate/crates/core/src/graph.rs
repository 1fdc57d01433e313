//! Folded subgroup graphs for free groups.
//!
//! A based, edge-labelled graph represents a finitely generated subgroup:
//! reduced words in the subgroup are exactly the labels of reduced closed
//! paths at the basepoint. Building one is the classical construction:
//! wedge a loop per generator, then fold until no vertex carries two equal
//! labels in the same direction.

use std::collections::HashMap;

use crate::free::{Lit, SignedWord};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgroupGraph {
    rank: usize,
    /// fwd[v][g] = w encodes an edge v --g--> w.
    fwd: Vec<Vec<Option<u32>>>,
    bwd: Vec<Vec<Option<u32>>>,
    basepoint: u32,
}

/// Union-find with edge maps, used only during folding.
struct Folder {
    rank: usize,
    parent: Vec<u32>,
    out: Vec<HashMap<u8, u32>>,
    inc: Vec<HashMap<u8, u32>>,
    pending: Vec<(u32, u8, u32)>,
}

impl Folder {
    fn new(rank: usize) -> Self {
        Folder { rank, parent: Vec::new(), out: Vec::new(), inc: Vec::new(), pending: Vec::new() }
    }

    fn fresh(&mut self) -> u32 {
        let v = self.parent.len() as u32;
        self.parent.push(v);
        self.out.push(HashMap::new());
        self.inc.push(HashMap::new());
        v
    }

    fn find(&mut self, v: u32) -> u32 {
        let mut root = v;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        let mut cur = v;
        while self.parent[cur as usize] != root {
            let next = self.parent[cur as usize];
            self.parent[cur as usize] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: u32, b: u32) {
        let a = self.find(a);
        let b = self.find(b);
        if a == b {
            return;
        }
        // Absorb the vertex with fewer edges; its edges get requeued.
        let (keep, drop) =
            if self.out[a as usize].len() + self.inc[a as usize].len()
                >= self.out[b as usize].len() + self.inc[b as usize].len()
            {
                (a, b)
            } else {
                (b, a)
            };
        self.parent[drop as usize] = keep;
        let out = std::mem::take(&mut self.out[drop as usize]);
        let inc = std::mem::take(&mut self.inc[drop as usize]);
        for (g, w) in out {
            self.pending.push((drop, g, w));
        }
        for (g, v) in inc {
            self.pending.push((v, g, drop));
        }
    }

    fn process(&mut self) {
        while let Some((v, g, w)) = self.pending.pop() {
            let v = self.find(v);
            let w = self.find(w);
            if let Some(&w2) = self.out[v as usize].get(&g) {
                let w2 = self.find(w2);
                if w2 != w {
                    self.union(w, w2);
                    self.pending.push((v, g, w));
                } else {
                    self.out[v as usize].insert(g, w);
                    self.inc[w as usize].insert(g, v);
                }
                continue;
            }
            if let Some(&v2) = self.inc[w as usize].get(&g) {
                let v2 = self.find(v2);
                if v2 != v {
                    self.union(v, v2);
                    self.pending.push((v, g, w));
                } else {
                    self.out[v as usize].insert(g, w);
                    self.inc[w as usize].insert(g, v);
                }
                continue;
            }
            self.out[v as usize].insert(g, w);
            self.inc[w as usize].insert(g, v);
        }
    }

    /// BFS renumbering from the basepoint: deterministic vertex order, so
    /// equal subgroups always compact to identical graphs.
    fn compact(mut self, base: u32) -> SubgroupGraph {
        self.process();
        let base = self.find(base);
        let mut order: Vec<u32> = vec![base];
        let mut number: HashMap<u32, u32> = HashMap::from([(base, 0)]);
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            for g in 0..self.rank as u8 {
                let nexts = [
                    self.out[v as usize].get(&g).copied(),
                    self.inc[v as usize].get(&g).copied(),
                ];
                for n in nexts.into_iter().flatten() {
                    let n = self.find(n);
                    if !number.contains_key(&n) {
                        number.insert(n, order.len() as u32);
                        order.push(n);
                    }
                }
            }
        }
        let size = order.len();
        let mut fwd = vec![vec![None; self.rank]; size];
        let mut bwd = vec![vec![None; self.rank]; size];
        for (new_v, &old_v) in order.iter().enumerate() {
            for g in 0..self.rank as u8 {
                if let Some(&w) = self.out[old_v as usize].get(&g) {
                    let w = self.find(w);
                    let new_w = number[&w];
                    fwd[new_v][g as usize] = Some(new_w);
                    bwd[new_w as usize][g as usize] = Some(new_v as u32);
                }
            }
        }
        SubgroupGraph { rank: self.rank, fwd, bwd, basepoint: 0 }
    }
}

impl SubgroupGraph {
    /// Fold the wedge of loops spelling the given subgroup generators.
    pub fn from_generators(rank: usize, generators: &[SignedWord]) -> Self {
        let mut folder = Folder::new(rank);
        let base = folder.fresh();
        for gen in generators {
            if gen.is_empty() {
                continue;
            }
            let mut cur = base;
            let lits = gen.lits();
            for (i, l) in lits.iter().enumerate() {
                let next = if i + 1 == lits.len() { base } else { folder.fresh() };
                // An inverse letter is a backward traversal of a forward edge.
                if l.inv {
                    folder.pending.push((next, l.gen, cur));
                } else {
                    folder.pending.push((cur, l.gen, next));
                }
                cur = next;
            }
        }
        folder.compact(base)
    }

    pub fn rank_of_basis(&self) -> usize {
        self.rank
    }

    pub fn vertex_count(&self) -> usize {
        self.fwd.len()
    }

    pub fn edge_count(&self) -> usize {
        self.fwd.iter().map(|row| row.iter().flatten().count()).sum()
    }

    pub fn basepoint(&self) -> u32 {
        self.basepoint
    }

    fn step(&self, v: u32, l: Lit) -> Option<u32> {
        if l.inv {
            self.bwd[v as usize][l.gen as usize]
        } else {
            self.fwd[v as usize][l.gen as usize]
        }
    }

    /// Does the reduced form of `w` label a closed path at the basepoint?
    pub fn membership(&self, w: &SignedWord) -> bool {
        let mut cur = self.basepoint;
        for &l in SignedWord::from_lits(w.lits().iter().copied()).lits() {
            match self.step(cur, l) {
                Some(next) => cur = next,
                None => return false,
            }
        }
        cur == self.basepoint
    }

    /// Remove degree-one vertices other than the basepoint; the result
    /// accepts exactly the same words.
    pub fn trimmed_core(&self) -> SubgroupGraph {
        let mut fwd = self.fwd.clone();
        let mut bwd = self.bwd.clone();
        let mut alive: Vec<bool> = vec![true; fwd.len()];
        loop {
            let mut removed = false;
            for v in 0..fwd.len() {
                if !alive[v] || v as u32 == self.basepoint {
                    continue;
                }
                let degree = fwd[v].iter().flatten().count() + bwd[v].iter().flatten().count();
                if degree <= 1 {
                    alive[v] = false;
                    removed = true;
                    for g in 0..self.rank {
                        if let Some(w) = fwd[v][g] {
                            bwd[w as usize][g] = None;
                            fwd[v][g] = None;
                        }
                        if let Some(u) = bwd[v][g] {
                            fwd[u as usize][g] = None;
                            bwd[v][g] = None;
                        }
                    }
                }
            }
            if !removed {
                break;
            }
        }
        // Renumber the survivors, keeping the basepoint first.
        let mut number: HashMap<u32, u32> = HashMap::new();
        let mut order = Vec::new();
        for v in 0..fwd.len() as u32 {
            if alive[v as usize] {
                number.insert(v, order.len() as u32);
                order.push(v);
            }
        }
        let mut nfwd = vec![vec![None; self.rank]; order.len()];
        let mut nbwd = vec![vec![None; self.rank]; order.len()];
        for (nv, &v) in order.iter().enumerate() {
            for g in 0..self.rank {
                if let Some(w) = fwd[v as usize][g] {
                    nfwd[nv][g] = Some(number[&w]);
                    nbwd[number[&w] as usize][g] = Some(nv as u32);
                }
            }
        }
        SubgroupGraph { rank: self.rank, fwd: nfwd, bwd: nbwd, basepoint: number[&self.basepoint] }
    }

    /// Free rank of the represented subgroup: E - V + 1 on the core.
    pub fn subgroup_rank(&self) -> usize {
        let core = self.trimmed_core();
        core.edge_count() + 1 - core.vertex_count()
    }

    /// Search for a vertex carrying a `special`-labelled self-loop that is
    /// reachable from the basepoint without using `special` edges. The
    /// returned word `g` satisfies: `g⁻¹ · special · g` is accepted.
    pub fn find_special_loop(&self, special: u8) -> Option<SignedWord> {
        let mut parent: HashMap<u32, (u32, Lit)> = HashMap::new();
        let mut queue = vec![self.basepoint];
        let mut seen = vec![false; self.vertex_count()];
        seen[self.basepoint as usize] = true;
        let mut head = 0;
        while head < queue.len() {
            let v = queue[head];
            head += 1;
            if self.fwd[v as usize][special as usize] == Some(v) {
                // Path label from basepoint to v.
                let mut lits = Vec::new();
                let mut cur = v;
                while cur != self.basepoint {
                    let (prev, l) = parent[&cur];
                    lits.push(l);
                    cur = prev;
                }
                lits.reverse();
                let path = SignedWord::from_lits(lits);
                let g = path.inverse();
                let loop_word =
                    g.inverse().mul(&SignedWord::generator(special)).mul(&g);
                debug_assert!(self.membership(&loop_word));
                return Some(g);
            }
            for gen in 0..self.rank as u8 {
                if gen == special {
                    continue;
                }
                for l in [Lit::pos(gen), Lit::neg(gen)] {
                    if let Some(w) = self.step(v, l) {
                        if !seen[w as usize] {
                            seen[w as usize] = true;
                            parent.insert(w, (v, l));
                            queue.push(w);
                        }
                    }
                }
            }
        }
        None
    }

    /// All accepted reduced words of length at most `max_len`.
    pub fn accepted_words(&self, max_len: usize) -> Vec<SignedWord> {
        let mut out = Vec::new();
        let mut path: Vec<Lit> = Vec::new();
        self.accepted_rec(self.basepoint, max_len, &mut path, &mut out);
        out
    }

    fn accepted_rec(&self, v: u32, remaining: usize, path: &mut Vec<Lit>, out: &mut Vec<SignedWord>) {
        if v == self.basepoint {
            out.push(SignedWord::from_lits(path.iter().copied()));
        }
        if remaining == 0 {
            return;
        }
        for gen in 0..self.rank as u8 {
            for l in [Lit::pos(gen), Lit::neg(gen)] {
                if path.last().is_some_and(|&last| last.inverse() == l) {
                    continue;
                }
                if let Some(w) = self.step(v, l) {
                    path.push(l);
                    self.accepted_rec(w, remaining - 1, path, out);
                    path.pop();
                }
            }
        }
    }

    pub fn to_dot(&self) -> String {
        let letters = ['x', 'y', 'z', 't'];
        let mut s = String::from("digraph subgroup {\n  rankdir=LR;\n");
        s.push_str(&format!("  {} [shape=doublecircle];\n", self.basepoint));
        for v in 0..self.fwd.len() {
            for g in 0..self.rank {
                if let Some(w) = self.fwd[v][g] {
                    let label = letters.get(g).copied().unwrap_or('?');
                    s.push_str(&format!("  {} -> {} [label=\"{}\"];\n", v, w, label));
                }
            }
        }
        s.push_str("}\n");
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        let letters = ['x', 'y', 'z', 't'];
        let edges: Vec<serde_json::Value> = (0..self.fwd.len())
            .flat_map(|v| {
                (0..self.rank).filter_map(move |g| {
                    self.fwd[v][g].map(|w| {
                        serde_json::json!({
                            "from": v,
                            "label": letters.get(g).copied().unwrap_or('?').to_string(),
                            "to": w,
                        })
                    })
                })
            })
            .collect();
        serde_json::json!({
            "vertices": self.fwd.len(),
            "basepoint": self.basepoint,
            "edges": edges,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sw(s: &str) -> SignedWord {
        SignedWord::parse(3, s).unwrap()
    }

    #[test]
    fn membership_basics() {
        let g = SubgroupGraph::from_generators(3, &[sw("x"), sw("y")]);
        assert!(g.membership(&sw("xy")));
        assert!(g.membership(&sw("XY")));
        assert!(!g.membership(&sw("z")));

        let g = SubgroupGraph::from_generators(3, &[sw("xyX")]);
        assert!(!g.membership(&sw("xy")));
        assert!(g.membership(&sw("xyX")));
        assert!(g.membership(&sw("xyyX")));
    }

    #[test]
    fn generators_and_products_are_members() {
        let gens = [sw("xxY"), sw("zxZ"), sw("yzzy")];
        let g = SubgroupGraph::from_generators(3, &gens);
        for gen in &gens {
            assert!(g.membership(gen));
        }
        let prod = gens[0].mul(&gens[2].inverse()).mul(&gens[1]);
        assert!(g.membership(&prod));
    }

    #[test]
    fn folding_is_order_independent() {
        let gens = [sw("xyX"), sw("xzZy"), sw("zz")];
        let g1 = SubgroupGraph::from_generators(3, &gens);
        let mut rev = gens.to_vec();
        rev.reverse();
        let g2 = SubgroupGraph::from_generators(3, &rev);
        assert_eq!(g1, g2);
    }

    #[test]
    fn subgroup_rank_by_euler_characteristic() {
        // Free generators stay free.
        let g = SubgroupGraph::from_generators(3, &[sw("x"), sw("y")]);
        assert_eq!(g.subgroup_rank(), 2);
        // A redundant generator does not raise the rank.
        let g = SubgroupGraph::from_generators(3, &[sw("x"), sw("y"), sw("xy")]);
        assert_eq!(g.subgroup_rank(), 2);
        // The whole group.
        let g = SubgroupGraph::from_generators(3, &[sw("x"), sw("y"), sw("z")]);
        assert_eq!(g.subgroup_rank(), 3);
        // <x^2, xyx^-1, ...> style: rank counts independent loops.
        let g = SubgroupGraph::from_generators(3, &[sw("xx"), sw("xyX")]);
        assert_eq!(g.subgroup_rank(), 2);
    }

    #[test]
    fn special_loop_examples() {
        // <z>: loop at the basepoint, empty path.
        let g = SubgroupGraph::from_generators(3, &[sw("z")]);
        assert_eq!(g.find_special_loop(2), Some(SignedWord::identity()));

        // <x>: no z-loop anywhere.
        let g = SubgroupGraph::from_generators(3, &[sw("x")]);
        assert_eq!(g.find_special_loop(2), None);

        // <x⁻¹ z x>: the z-loop sits one x-step backwards; g = x.
        let g = SubgroupGraph::from_generators(3, &[sw("Xzx")]);
        let found = g.find_special_loop(2).unwrap();
        assert_eq!(found, sw("x"));
        assert!(g.membership(&found.inverse().mul(&sw("z")).mul(&found)));
    }

    #[test]
    fn accepted_words_roundtrip() {
        let g = SubgroupGraph::from_generators(3, &[sw("xy")]);
        let words = g.accepted_words(4);
        assert!(words.contains(&SignedWord::identity()));
        assert!(words.contains(&sw("xy")));
        assert!(words.contains(&sw("YX")));
        assert!(!words.contains(&sw("x")));
        for w in words {
            assert!(g.membership(&w));
        }
    }

    #[test]
    fn exports_mention_structure() {
        let g = SubgroupGraph::from_generators(3, &[sw("x")]);
        assert!(g.to_dot().contains("label=\"x\""));
        assert_eq!(g.to_json()["vertices"], 1);
    }
}
