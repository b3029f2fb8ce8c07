//! Couples: a `+` tree and a `-` tree with an opposite-sign pairing of all
//! leaves, stored as one node arena.

use serde::{Deserialize, Serialize};

use super::tree::{child_sign, enumerate_trees, Diagram, Node, NodeId, Sign, SignedTernaryTree};
use crate::error::{Error, Result};
use crate::io::SCHEMA_VERSION;

/// Largest total order accepted by [`enumerate_couples`].
pub const MAX_COUPLE_ORDER: usize = 6;

/// Record of a splicing step, kept for serialization.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpliceNote {
    pub node: NodeId,
    pub q: usize,
    pub kind: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Couple {
    nodes: Vec<Node>,
    roots: [NodeId; 2],
    partner: Vec<Option<NodeId>>,
    pub spliced_at: Vec<SpliceNote>,
}

impl Diagram for Couple {
    fn nodes(&self) -> &[Node] {
        &self.nodes
    }
}

impl Couple {
    /// Validate and assemble a couple from raw parts.
    pub fn from_parts(nodes: Vec<Node>, roots: [NodeId; 2], partner: Vec<Option<NodeId>>) -> Result<Self> {
        let c = Couple { nodes, roots, partner, spliced_at: Vec::new() };
        c.validate()?;
        Ok(c)
    }

    pub(crate) fn from_parts_unchecked(nodes: Vec<Node>, roots: [NodeId; 2], partner: Vec<Option<NodeId>>) -> Self {
        Couple { nodes, roots, partner, spliced_at: Vec::new() }
    }

    /// Join two trees; `pairs` use arena ids where the minus tree's nodes are
    /// offset by the plus tree's size.
    pub fn from_trees(plus: &SignedTernaryTree, minus: &SignedTernaryTree, pairs: &[(NodeId, NodeId)]) -> Result<Self> {
        let off = plus.nodes().len();
        let mut nodes: Vec<Node> = plus.nodes().to_vec();
        nodes.extend(minus.nodes().iter().map(|n| Node {
            parent: n.parent.map(|p| p + off),
            children: n.children.map(|c| c.map(|x| x + off)),
            sign: n.sign,
        }));
        let mut partner = vec![None; nodes.len()];
        for &(a, b) in pairs {
            if a >= nodes.len() || b >= nodes.len() {
                return Err(Error::Data(format!("pair ({a},{b}) out of range")));
            }
            if partner[a].is_some() || partner[b].is_some() {
                return Err(Error::Data(format!("leaf paired twice in ({a},{b})")));
            }
            partner[a] = Some(b);
            partner[b] = Some(a);
        }
        Couple::from_parts(nodes, [0, off], partner)
    }

    /// The couple of two trivial trees with the roots paired.
    pub fn trivial() -> Self {
        Couple::from_trees(&SignedTernaryTree::trivial(Sign::Plus), &SignedTernaryTree::trivial(Sign::Minus), &[(0, 1)])
            .expect("trivial couple is valid")
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.nodes.len();
        if self.partner.len() != n {
            return Err(Error::Data("partner table size mismatch".into()));
        }
        let [rp, rm] = self.roots;
        if rp >= n || rm >= n || rp == rm {
            return Err(Error::Data("bad roots".into()));
        }
        if self.nodes[rp].sign != Sign::Plus || self.nodes[rm].sign != Sign::Minus {
            return Err(Error::Data("roots must carry signs + and -".into()));
        }
        if self.nodes[rp].parent.is_some() || self.nodes[rm].parent.is_some() {
            return Err(Error::Data("roots must have no parent".into()));
        }
        let mut seen = vec![false; n];
        for &r in &self.roots {
            for v in self.preorder_from(r) {
                if v >= n || seen[v] {
                    return Err(Error::Data("node reachable twice or out of range".into()));
                }
                seen[v] = true;
                if let Some(ch) = self.nodes[v].children {
                    for (j, &c) in ch.iter().enumerate() {
                        if c >= n || self.nodes[c].parent != Some(v) {
                            return Err(Error::Data(format!("parent link of node {c} broken")));
                        }
                        if self.nodes[c].sign != child_sign(self.nodes[v].sign, j) {
                            return Err(Error::Data(format!("sign rule violated at node {c}")));
                        }
                    }
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Data("unreachable node in couple".into()));
        }
        for v in 0..n {
            match (self.nodes[v].is_leaf(), self.partner[v]) {
                (true, Some(u)) => {
                    if u >= n || self.partner[u] != Some(v) || u == v || !self.nodes[u].is_leaf() {
                        return Err(Error::Data(format!("pairing broken at leaf {v}")));
                    }
                    if self.nodes[u].sign == self.nodes[v].sign {
                        return Err(Error::Data(format!("leaves {v},{u} paired with equal signs")));
                    }
                }
                (true, None) => return Err(Error::Data(format!("leaf {v} unpaired"))),
                (false, Some(_)) => return Err(Error::Data(format!("branching node {v} paired"))),
                (false, None) => {}
            }
        }
        Ok(())
    }

    pub fn roots(&self) -> [NodeId; 2] {
        self.roots
    }

    pub fn partner(&self, leaf: NodeId) -> Option<NodeId> {
        self.partner[leaf]
    }

    pub fn partners(&self) -> &[Option<NodeId>] {
        &self.partner
    }

    pub fn is_trivial(&self) -> bool {
        self.order() == 0
    }

    /// Leaf pairs `(a, b)` with `a < b`, sorted.
    pub fn pairs(&self) -> Vec<(NodeId, NodeId)> {
        let mut out: Vec<_> = (0..self.nodes.len())
            .filter_map(|v| self.partner[v].filter(|&u| v < u).map(|u| (v, u)))
            .collect();
        out.sort_unstable();
        out
    }

    /// 0 for the plus tree, 1 for the minus tree.
    pub fn tree_of(&self, mut v: NodeId) -> usize {
        while let Some(p) = self.nodes[v].parent {
            v = p;
        }
        if v == self.roots[0] {
            0
        } else {
            1
        }
    }

    /// Orders of the plus and minus trees.
    pub fn tree_orders(&self) -> (usize, usize) {
        (self.subtree_order(self.roots[0]), self.subtree_order(self.roots[1]))
    }

    pub(crate) fn nodes_mut(&mut self) -> &mut Vec<Node> {
        &mut self.nodes
    }

    /// Relabel nodes as plus-tree preorder followed by minus-tree preorder.
    /// Returns the relabelled couple and the old-to-new id map.
    pub fn canonical(&self) -> (Couple, Vec<NodeId>) {
        let order: Vec<NodeId> = self
            .preorder_from(self.roots[0])
            .into_iter()
            .chain(self.preorder_from(self.roots[1]))
            .collect();
        let mut map = vec![usize::MAX; self.nodes.len()];
        for (new, &old) in order.iter().enumerate() {
            map[old] = new;
        }
        let nodes = order
            .iter()
            .map(|&old| {
                let n = self.nodes[old];
                Node { parent: n.parent.map(|p| map[p]), children: n.children.map(|c| c.map(|x| map[x])), sign: n.sign }
            })
            .collect();
        let partner = order.iter().map(|&old| self.partner[old].map(|u| map[u])).collect();
        let roots = [map[self.roots[0]], map[self.roots[1]]];
        let spliced_at = self
            .spliced_at
            .iter()
            .map(|s| SpliceNote { node: map[s.node], q: s.q, kind: s.kind.clone() })
            .collect();
        (Couple { nodes, roots, partner, spliced_at }, map)
    }

    /// Deterministic identity string: tree codes plus canonical pairing.
    pub fn canonical_key(&self) -> String {
        let (c, _) = self.canonical();
        let pairs: Vec<String> = c.pairs().iter().map(|(a, b)| format!("{a}-{b}")).collect();
        format!("{}|{}|{}", c.shape_code(c.roots[0]), c.shape_code(c.roots[1]), pairs.join(","))
    }

    pub fn to_json(&self) -> CoupleJson {
        let (c, _) = self.canonical();
        CoupleJson {
            schema_version: SCHEMA_VERSION,
            order: c.order(),
            plus: c.shape_code(c.roots[0]),
            minus: c.shape_code(c.roots[1]),
            pairing: c.pairs().into_iter().map(|(a, b)| [a, b]).collect(),
            spliced_at: c.spliced_at.clone(),
        }
    }

    pub fn from_json(j: &CoupleJson) -> Result<Self> {
        let plus = SignedTernaryTree::from_code(&j.plus, Sign::Plus)?;
        let minus = SignedTernaryTree::from_code(&j.minus, Sign::Minus)?;
        let pairs: Vec<(NodeId, NodeId)> = j.pairing.iter().map(|p| (p[0], p[1])).collect();
        let mut c = Couple::from_trees(&plus, &minus, &pairs)?;
        c.spliced_at = j.spliced_at.clone();
        Ok(c)
    }
}

/// Serialized couple: preorder arity codes and pairs of canonical ids
/// (plus-tree preorder, then minus-tree preorder).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CoupleJson {
    pub schema_version: u32,
    pub order: usize,
    pub plus: String,
    pub minus: String,
    pub pairing: Vec<[NodeId; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub spliced_at: Vec<SpliceNote>,
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..m).collect();
    fn rec(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == cur.len() {
            out.push(cur.clone());
            return;
        }
        for i in k..cur.len() {
            cur.swap(k, i);
            rec(k + 1, cur, out);
            cur.swap(k, i);
        }
    }
    rec(0, &mut cur, &mut out);
    out.sort();
    out
}

/// Lazy enumeration of all couples of a fixed total order.
pub struct CoupleIter {
    n: usize,
    split: usize,
    plus_trees: Vec<SignedTernaryTree>,
    minus_trees: Vec<SignedTernaryTree>,
    ip: usize,
    im: usize,
    perm: usize,
    perms: Vec<Vec<usize>>,
    base: Option<(Vec<Node>, Vec<NodeId>, Vec<NodeId>, NodeId)>,
}

impl CoupleIter {
    fn load_split(&mut self) -> Result<()> {
        self.plus_trees = enumerate_trees(self.split, Sign::Plus)?;
        self.minus_trees = enumerate_trees(self.n - self.split, Sign::Minus)?;
        self.ip = 0;
        self.im = 0;
        self.base = None;
        Ok(())
    }

    fn load_base(&mut self) {
        let plus = &self.plus_trees[self.ip];
        let minus = &self.minus_trees[self.im];
        let off = plus.nodes().len();
        let mut nodes: Vec<Node> = plus.nodes().to_vec();
        nodes.extend(minus.nodes().iter().map(|n| Node {
            parent: n.parent.map(|p| p + off),
            children: n.children.map(|c| c.map(|x| x + off)),
            sign: n.sign,
        }));
        let pl: Vec<NodeId> = (0..nodes.len()).filter(|&v| nodes[v].is_leaf() && nodes[v].sign == Sign::Plus).collect();
        let mi: Vec<NodeId> = (0..nodes.len()).filter(|&v| nodes[v].is_leaf() && nodes[v].sign == Sign::Minus).collect();
        self.base = Some((nodes, pl, mi, off));
        self.perm = 0;
    }
}

impl Iterator for CoupleIter {
    type Item = Couple;

    fn next(&mut self) -> Option<Couple> {
        loop {
            if self.split > self.n {
                return None;
            }
            if self.base.is_none() {
                if self.ip >= self.plus_trees.len() {
                    self.split += 1;
                    if self.split > self.n {
                        return None;
                    }
                    self.load_split().ok()?;
                    continue;
                }
                self.load_base();
            }
            if self.perm >= self.perms.len() {
                self.base = None;
                self.im += 1;
                if self.im >= self.minus_trees.len() {
                    self.im = 0;
                    self.ip += 1;
                }
                continue;
            }
            let (nodes, pl, mi, off) = self.base.as_ref().expect("loaded");
            let p = &self.perms[self.perm];
            self.perm += 1;
            let mut partner = vec![None; nodes.len()];
            for (i, &a) in pl.iter().enumerate() {
                let b = mi[p[i]];
                partner[a] = Some(b);
                partner[b] = Some(a);
            }
            return Some(Couple::from_parts_unchecked(nodes.clone(), [0, *off], partner));
        }
    }
}

/// All couples of total order `n`: every split, every tree pair and every
/// opposite-sign perfect matching of the leaves.
pub fn enumerate_couples(n: usize) -> Result<CoupleIter> {
    if n > MAX_COUPLE_ORDER {
        return Err(Error::Resource(format!("couple order {n} exceeds guard {MAX_COUPLE_ORDER}")));
    }
    let mut it = CoupleIter {
        n,
        split: 0,
        plus_trees: Vec::new(),
        minus_trees: Vec::new(),
        ip: 0,
        im: 0,
        perm: 0,
        perms: permutations(n + 1),
        base: None,
    };
    it.load_split()?;
    Ok(it)
}

/// Closed-form number of couples of order `n`.
pub fn couple_count(n: usize) -> u64 {
    let fact: u64 = (1..=(n as u64 + 1)).product();
    (0..=n).map(|a| super::tree::ternary_catalan(a) * super::tree::ternary_catalan(n - a)).sum::<u64>() * fact
}

/// A random couple of total order `n`: a uniform split, trees grown by
/// expanding uniformly chosen leaves, and a uniform opposite-sign pairing.
/// Not uniform over couples; meant for property tests beyond the
/// exhaustive range.
pub fn random_couple<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Couple> {
    let a = rng.random_range(0..=n);
    let plus = random_tree(a, Sign::Plus, rng)?;
    let minus = random_tree(n - a, Sign::Minus, rng)?;
    let off = plus.nodes().len();
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (i, node) in plus.nodes().iter().chain(minus.nodes()).enumerate() {
        if node.is_leaf() {
            match node.sign {
                Sign::Plus => pos.push(i),
                Sign::Minus => neg.push(i),
            }
        }
    }
    debug_assert!(off > 0 && pos.len() == neg.len());
    for i in (1..neg.len()).rev() {
        neg.swap(i, rng.random_range(0..=i));
    }
    let pairs: Vec<(NodeId, NodeId)> = pos.into_iter().zip(neg).collect();
    Couple::from_trees(&plus, &minus, &pairs)
}

fn random_tree<R: rand::Rng + ?Sized>(n: usize, sign: Sign, rng: &mut R) -> Result<SignedTernaryTree> {
    // children[i] = Some([c0, c1, c2]) once node i is expanded
    let mut children: Vec<Option<[usize; 3]>> = vec![None];
    let mut leaves = vec![0usize];
    for _ in 0..n {
        let v = leaves.swap_remove(rng.random_range(0..leaves.len()));
        let base = children.len();
        children.extend([None, None, None]);
        children[v] = Some([base, base + 1, base + 2]);
        leaves.extend([base, base + 1, base + 2]);
    }
    let mut shape = Vec::with_capacity(children.len());
    let mut stack = vec![0usize];
    while let Some(v) = stack.pop() {
        shape.push(children[v].is_some());
        if let Some(ch) = children[v] {
            stack.extend(ch.iter().rev());
        }
    }
    SignedTernaryTree::from_shape(&shape, sign)
}
