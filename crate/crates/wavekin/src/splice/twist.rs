//! Admissible nodes, unit twists and congruence classes.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::combinatorics::{Couple, Decoration, Diagram, NodeId};
use crate::error::{Error, Result};

/// Local picture at an admissible node `n2` with parent `n1`: leaf
/// `n12` of `n1` is paired with leaf `n21` of `n2`, and these are the only
/// bonds between the two atoms besides the parent-child one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TwistSite {
    pub n1: NodeId,
    pub n2: NodeId,
    pub n12: NodeId,
    pub n21: NodeId,
    /// `n12` and `n2` carry opposite signs.
    pub twistable: bool,
}

/// The CL double bond joining `n2` to its parent, if there is one.
pub fn admissible_site(c: &Couple, n2: NodeId) -> Option<TwistSite> {
    if n2 >= c.nodes().len() {
        return None;
    }
    let node = c.node(n2);
    let (n1, kids2) = (node.parent?, node.children?);
    let kids1 = c.node(n1).children.expect("parent branches");
    let links: Vec<(NodeId, NodeId)> = kids1
        .iter()
        .filter(|&&x| c.is_leaf(x))
        .filter_map(|&x| c.partner(x).filter(|p| kids2.contains(p)).map(|p| (x, p)))
        .collect();
    match links.as_slice() {
        [(n12, n21)] => Some(TwistSite { n1, n2, n12: *n12, n21: *n21, twistable: c.sign(*n12) != c.sign(n2) }),
        _ => None,
    }
}

pub fn is_admissible(c: &Couple, n2: NodeId) -> bool {
    admissible_site(c, n2).is_some()
}

pub fn is_twist_admissible(c: &Couple, n2: NodeId) -> bool {
    admissible_site(c, n2).is_some_and(|s| s.twistable)
}

/// All twist-admissible nodes, ascending.
pub fn twist_admissible_nodes(c: &Couple) -> Vec<NodeId> {
    c.branching_nodes().into_iter().filter(|&v| is_twist_admissible(c, v)).collect()
}

/// Unit twist at `n2`: `n2` trades places with `n12`, the two children of
/// `n2` other than `n21` trade places, and `n2`, `n12`, `n21` change sign.
/// Node ids are preserved. A decoration is carried along with
/// `k(n2) <- k(n12)` and `k(n12) = k(n21) <- k(n2)`.
pub fn unit_twist(c: &Couple, n2: NodeId, dec: Option<&Decoration>) -> Result<(Couple, Option<Decoration>)> {
    let site = admissible_site(c, n2)
        .filter(|s| s.twistable)
        .ok_or_else(|| Error::Domain(format!("node {n2} is not twist-admissible")))?;
    let TwistSite { n1, n12, n21, .. } = site;
    let mut out = c.clone();
    let nodes = out.nodes_mut();
    let mut k1 = nodes[n1].children.expect("branching");
    let (i2, i12) = (pos(&k1, n2), pos(&k1, n12));
    k1.swap(i2, i12);
    nodes[n1].children = Some(k1);
    let mut k2 = nodes[n2].children.expect("branching");
    let rest: Vec<usize> = (0..3).filter(|&i| k2[i] != n21).collect();
    k2.swap(rest[0], rest[1]);
    nodes[n2].children = Some(k2);
    for v in [n2, n12, n21] {
        nodes[v].sign = -nodes[v].sign;
    }
    let dec = dec.map(|d| {
        let mut values = d.values.clone();
        let (a, b) = (d.values[n2], d.values[n12]);
        values[n2] = b;
        values[n12] = a;
        values[n21] = a;
        Decoration { l: d.l, values }
    });
    debug_assert!(out.validate().is_ok());
    Ok((out, dec))
}

fn pos(arr: &[NodeId; 3], x: NodeId) -> usize {
    arr.iter().position(|&y| y == x).expect("child present")
}

/// Apply unit twists at every node of `set`, in order.
pub fn twist_all(c: &Couple, set: &[NodeId], dec: Option<&Decoration>) -> Result<(Couple, Option<Decoration>)> {
    let mut cur = (c.clone(), dec.cloned());
    for &v in set {
        cur = unit_twist(&cur.0, v, cur.1.as_ref())?;
    }
    Ok(cur)
}

/// Largest twist set accepted by [`congruence_class`].
pub const MAX_TWIST_SET: usize = 16;

/// Images of `c` under twists at every subset of `set`, deduplicated up to
/// relabelling, in subset-mask order.
pub fn congruence_class(c: &Couple, set: &[NodeId]) -> Result<Vec<Couple>> {
    if set.len() > MAX_TWIST_SET {
        return Err(Error::Resource(format!("{} twist nodes exceed {MAX_TWIST_SET}", set.len())));
    }
    for &v in set {
        if !is_twist_admissible(c, v) {
            return Err(Error::Domain(format!("node {v} is not twist-admissible")));
        }
    }
    let images: Vec<Couple> = (0u32..1 << set.len())
        .into_par_iter()
        .map(|mask| {
            let sub: Vec<NodeId> = (0..set.len()).filter(|i| mask >> i & 1 == 1).map(|i| set[i]).collect();
            twist_all(c, &sub, None).map(|x| x.0)
        })
        .collect::<Result<_>>()?;
    let mut seen = HashSet::new();
    Ok(images.into_iter().filter(|x| seen.insert(x.canonical_key())).collect())
}
