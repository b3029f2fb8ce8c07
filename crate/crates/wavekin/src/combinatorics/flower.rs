//! Couples with a distinguished cross-tree leaf pair and its stems.

use serde::Serialize;

use super::couple::Couple;
use super::tree::{Diagram, NodeId};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FlowerCouple {
    #[serde(skip)]
    pub base: Couple,
    pub flower_plus: NodeId,
    pub flower_minus: NodeId,
    /// Branching nodes from the plus root down to the flower.
    pub stem_plus: Vec<NodeId>,
    pub stem_minus: Vec<NodeId>,
    pub height_plus: usize,
    pub height_minus: usize,
    /// Largest order of a subtree hanging off either stem.
    pub max_attached_order: usize,
    pub bound: usize,
    pub admissible: bool,
}

impl FlowerCouple {
    pub fn height(&self) -> usize {
        self.height_plus.max(self.height_minus)
    }
}

fn stem(c: &Couple, leaf: NodeId) -> Vec<NodeId> {
    let mut out = Vec::new();
    let mut v = leaf;
    while let Some(p) = c.node(v).parent {
        out.push(p);
        v = p;
    }
    out.reverse();
    out
}

/// Stems and admissibility of the flower at plus-tree leaf `flower_plus`;
/// admissible iff every subtree attached along a stem has order `<= bound`.
pub fn flower_structure(c: &Couple, flower_plus: NodeId, bound: usize) -> Result<FlowerCouple> {
    if flower_plus >= c.nodes().len() || !c.is_leaf(flower_plus) || c.tree_of(flower_plus) != 0 {
        return Err(Error::Domain(format!("node {flower_plus} is not a plus-tree leaf")));
    }
    let flower_minus = c.partner(flower_plus).expect("leaves are paired");
    if c.tree_of(flower_minus) != 1 {
        return Err(Error::Domain("flower partner lies in the same tree".into()));
    }
    let stem_plus = stem(c, flower_plus);
    let stem_minus = stem(c, flower_minus);
    let mut max_attached = 0;
    for (st, flower) in [(&stem_plus, flower_plus), (&stem_minus, flower_minus)] {
        for (i, &v) in st.iter().enumerate() {
            let next = st.get(i + 1).copied().unwrap_or(flower);
            for &ch in c.node(v).children.expect("stem nodes branch").iter() {
                if ch != next {
                    max_attached = max_attached.max(c.subtree_order(ch));
                }
            }
        }
    }
    Ok(FlowerCouple {
        base: c.clone(),
        flower_plus,
        flower_minus,
        height_plus: stem_plus.len(),
        height_minus: stem_minus.len(),
        stem_plus,
        stem_minus,
        max_attached_order: max_attached,
        bound,
        admissible: max_attached <= bound,
    })
}
