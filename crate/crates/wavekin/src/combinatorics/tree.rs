//! Signed ternary trees.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type NodeId = usize;

/// Largest tree order accepted by [`enumerate_trees`].
pub const MAX_TREE_ORDER: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn value(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn from_value(v: i64) -> Self {
        if v >= 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    /// `i * zeta`.
    pub fn i_factor(self) -> Complex64 {
        Complex64::new(0.0, self.value() as f64)
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

impl std::ops::Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// Sign of child `pos` (0, 1, 2) of a node with sign `parent`.
pub fn child_sign(parent: Sign, pos: usize) -> Sign {
    if pos == 1 {
        -parent
    } else {
        parent
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Node {
    pub parent: Option<NodeId>,
    pub children: Option<[NodeId; 3]>,
    pub sign: Sign,
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }
}

/// Shared read access for trees and couples.
pub trait Diagram {
    fn nodes(&self) -> &[Node];

    fn node(&self, id: NodeId) -> &Node {
        &self.nodes()[id]
    }

    fn is_leaf(&self, id: NodeId) -> bool {
        self.nodes()[id].is_leaf()
    }

    fn sign(&self, id: NodeId) -> Sign {
        self.nodes()[id].sign
    }

    /// Number of branching nodes.
    fn order(&self) -> usize {
        self.nodes().iter().filter(|n| !n.is_leaf()).count()
    }

    fn branching_nodes(&self) -> Vec<NodeId> {
        (0..self.nodes().len()).filter(|&i| !self.is_leaf(i)).collect()
    }

    fn leaves(&self) -> Vec<NodeId> {
        (0..self.nodes().len()).filter(|&i| self.is_leaf(i)).collect()
    }

    /// `prod over branching nodes of (i zeta_n)`.
    fn zeta_factor(&self) -> Complex64 {
        self.nodes()
            .iter()
            .filter(|n| !n.is_leaf())
            .fold(Complex64::new(1.0, 0.0), |acc, n| acc * n.sign.i_factor())
    }

    /// Preorder traversal of the subtree below `root`.
    fn preorder_from(&self, root: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            out.push(v);
            if let Some(ch) = self.node(v).children {
                stack.extend(ch.iter().rev());
            }
        }
        out
    }

    /// Branching nodes below `root` with every node after its children.
    fn postorder_branching_from(&self, root: NodeId) -> Vec<NodeId> {
        let mut pre: Vec<NodeId> = self.preorder_from(root).into_iter().filter(|&v| !self.is_leaf(v)).collect();
        pre.reverse();
        pre
    }

    /// Number of branching nodes in the subtree rooted at `v`.
    fn subtree_order(&self, v: NodeId) -> usize {
        self.preorder_from(v).into_iter().filter(|&u| !self.is_leaf(u)).count()
    }

    /// Arity code of the subtree at `root` in preorder: `3` branching, `0` leaf.
    fn shape_code(&self, root: NodeId) -> String {
        self.preorder_from(root).into_iter().map(|v| if self.is_leaf(v) { '0' } else { '3' }).collect()
    }
}

/// An ordered ternary tree with derived node signs; node ids are preorder.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignedTernaryTree {
    nodes: Vec<Node>,
}

impl Diagram for SignedTernaryTree {
    fn nodes(&self) -> &[Node] {
        &self.nodes
    }
}

impl SignedTernaryTree {
    pub fn trivial(sign: Sign) -> Self {
        SignedTernaryTree { nodes: vec![Node { parent: None, children: None, sign }] }
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn root_sign(&self) -> Sign {
        self.nodes[0].sign
    }

    /// Build from a preorder arity code such as `"3000"`.
    pub fn from_code(code: &str, sign: Sign) -> Result<Self> {
        let shape: Vec<bool> = code
            .chars()
            .map(|c| match c {
                '3' => Ok(true),
                '0' => Ok(false),
                _ => Err(Error::Data(format!("bad tree code character {c:?}"))),
            })
            .collect::<Result<_>>()?;
        Self::from_shape(&shape, sign)
    }

    /// Build from preorder flags (`true` = branching).
    pub fn from_shape(shape: &[bool], sign: Sign) -> Result<Self> {
        let mut nodes = Vec::with_capacity(shape.len());
        let mut pos = 0;
        fn build(shape: &[bool], pos: &mut usize, parent: Option<NodeId>, sign: Sign, nodes: &mut Vec<Node>) -> Result<NodeId> {
            let id = nodes.len();
            let branching = *shape.get(*pos).ok_or_else(|| Error::Data("truncated tree code".into()))?;
            *pos += 1;
            nodes.push(Node { parent, children: None, sign });
            if branching {
                let mut ch = [0; 3];
                for (j, slot) in ch.iter_mut().enumerate() {
                    *slot = build(shape, pos, Some(id), child_sign(sign, j), nodes)?;
                }
                nodes[id].children = Some(ch);
            }
            Ok(id)
        }
        build(shape, &mut pos, None, sign, &mut nodes)?;
        if pos != shape.len() {
            return Err(Error::Data("trailing symbols in tree code".into()));
        }
        Ok(SignedTernaryTree { nodes })
    }

    pub fn code(&self) -> String {
        self.shape_code(0)
    }

    /// The same shape with every sign negated.
    pub fn negated(&self) -> Self {
        let mut t = self.clone();
        for n in &mut t.nodes {
            n.sign = -n.sign;
        }
        t
    }
}

/// Number of ordered ternary trees of order `n`.
pub fn ternary_catalan(n: usize) -> u64 {
    // C(n) = binom(3n, n) / (2n + 1)
    let mut b: u128 = 1;
    for i in 0..n as u128 {
        b = b * (3 * n as u128 - i) / (i + 1);
    }
    (b / (2 * n as u128 + 1)) as u64
}

fn shapes(n: usize) -> Vec<Vec<bool>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Vec<Vec<bool>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().expect("shape cache").get(&n) {
        return v.clone();
    }
    let out = if n == 0 {
        vec![vec![false]]
    } else {
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n - a {
                let c = n - 1 - a - b;
                let (sa, sb, sc) = (shapes(a), shapes(b), shapes(c));
                for x in &sa {
                    for y in &sb {
                        for z in &sc {
                            let mut s = Vec::with_capacity(3 * n + 1);
                            s.push(true);
                            s.extend_from_slice(x);
                            s.extend_from_slice(y);
                            s.extend_from_slice(z);
                            out.push(s);
                        }
                    }
                }
            }
        }
        out
    };
    cache.lock().expect("shape cache").insert(n, out.clone());
    out
}

/// All ordered ternary trees of order `n` with root sign `sign`.
pub fn enumerate_trees(n: usize, sign: Sign) -> Result<Vec<SignedTernaryTree>> {
    if n > MAX_TREE_ORDER {
        return Err(Error::Resource(format!("tree order {n} exceeds guard {MAX_TREE_ORDER}")));
    }
    shapes(n).iter().map(|s| SignedTernaryTree::from_shape(s, sign)).collect()
}
