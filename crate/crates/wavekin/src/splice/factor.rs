//! Cancellation over the congruence class of an irregular chain.
//!
//! A chain of length `q` is built as an explicit couple with every chain
//! node of sign `+`, link values `k_j` and paired leaves `k_j - h`. Summing
//! `prod_j (i zeta_{n_j}) n_in(k_{m_j})` over all `2^q` twist images (with
//! transported decorations) must give `i^q prod_j (n_in(k_j - h) - n_in(k_j))`.

use num_complex::Complex64;
use serde::Serialize;

use super::surgery::{cl_chain, ClChain};
use super::twist::twist_all;
use crate::combinatorics::{check_couple_decoration, local_factors, Couple, Decoration, Diagram, NodeId, Sign, SignedTernaryTree};
use crate::error::{Error, Result};
use crate::lattice::WaveNumber;
use crate::spectrum::Spectrum;

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TwistSumReport {
    pub q: usize,
    pub images: usize,
    pub direct: Complex64,
    pub factorized: Complex64,
    /// `|direct - factorized|` over the sum of term magnitudes.
    pub rel_err: f64,
    /// `zeta_n Omega_n` unchanged at every chain node in every image.
    pub phase_preserved: bool,
    pub pass: bool,
}

/// Tolerance on [`TwistSumReport::rel_err`].
pub const TWIST_SUM_TOL: f64 = 1e-12;

/// Plus tree `n_0 -> ... -> n_q` and a one-node minus tree. Slots:
/// `n_j = (n_{j+1}, m_{j+1}, p_j)`, `n_0 = (n_1, m_1, a)`,
/// `n_q = (b, c, p_q)`. Returns the couple and the chain.
pub fn irregular_chain_couple(q: usize) -> Result<(Couple, ClChain)> {
    if q == 0 {
        return Err(Error::Domain("chain length must be positive".into()));
    }
    // preorder: each n_j (j < q) is "3", the subtree of n_{j+1}, then two
    // leaves; n_q is "3000"
    let code = format!("{}3000{}", "3".repeat(q), "00".repeat(q));
    let plus = SignedTernaryTree::from_code(&code, Sign::Plus)?;
    let minus = SignedTernaryTree::from_code("3000", Sign::Minus)?;
    let off = plus.nodes().len();
    // locate nodes by walking slot 0
    let mut chain_nodes = vec![0];
    while chain_nodes.len() <= q {
        let last = *chain_nodes.last().expect("nonempty");
        chain_nodes.push(plus.node(last).children.expect("branching")[0]);
    }
    let kids = |v: NodeId| plus.node(v).children.expect("branching");
    let mut pairs = Vec::new();
    for j in 1..=q {
        let m = kids(chain_nodes[j - 1])[1];
        let p = if j == q { kids(chain_nodes[q])[2] } else { kids(chain_nodes[j])[2] };
        pairs.push((m, p));
    }
    let a = kids(0)[2];
    let [b, c, _] = kids(chain_nodes[q]);
    let r = minus.node(0).children.expect("branching").map(|x| x + off);
    pairs.extend([(a, r[0]), (b, r[2]), (c, r[1])]);
    let couple = Couple::from_trees(&plus, &minus, &pairs)?;
    let chain = cl_chain(&couple, &chain_nodes)?;
    debug_assert!(chain.irregular);
    Ok((couple, chain))
}

/// Decorate [`irregular_chain_couple`] so that `k(n_j) = ks[j-1]` and the
/// link leaves carry `ks[j-1] - h`.
pub fn decorate_chain(c: &Couple, chain: &ClChain, h: i64, ks: &[i64], l: i64) -> Result<Decoration> {
    let q = chain.q();
    if ks.len() != q {
        return Err(Error::Usage(format!("{} link values for a chain of length {q}", ks.len())));
    }
    let mut values = vec![0i64; c.nodes().len()];
    let tail = chain.tail.expect("q > 0");
    let top = chain.top_rest.expect("q > 0");
    // a = 0, b = h, c = 0
    for (leaf, val) in [(top, 0), (tail[0], h), (tail[1], 0)] {
        values[leaf] = val;
        values[c.partner(leaf).expect("paired")] = val;
    }
    for j in 0..q {
        let lj = ks[j] - h;
        values[chain.m[j]] = lj;
        values[chain.p[j]] = lj;
        values[chain.nodes[j + 1]] = ks[j];
    }
    values[chain.nodes[0]] = h;
    values[c.roots()[1]] = h;
    let dec = Decoration { l, values };
    check_couple_decoration(c, &dec)?;
    Ok(dec)
}

/// Sum the chain amplitude over all twist images and compare with the
/// factorized product.
pub fn twist_sum_factorization_check(
    q: usize,
    h: WaveNumber,
    ks: &[WaveNumber],
    nin: &Spectrum,
) -> Result<TwistSumReport> {
    if !(1..=4).contains(&q) {
        return Err(Error::Usage(format!("q = {q} outside 1..=4")));
    }
    if ks.iter().any(|k| k.l != h.l) {
        return Err(Error::Usage("all wavenumbers must share L".into()));
    }
    let l = h.l;
    let (c, chain) = irregular_chain_couple(q)?;
    let nums: Vec<i64> = ks.iter().map(|k| k.num).collect();
    let dec = decorate_chain(&c, &chain, h.num, &nums, l)?;
    let n = |x: i64| nin.eval(x as f64 / l as f64);
    let links = &chain.nodes[1..];
    let phase = |cc: &Couple, d: &Decoration| -> Result<Vec<f64>> {
        links
            .iter()
            .map(|&v| local_factors(cc, &d.values, l, v, 2.0).map(|(om, _)| cc.sign(v).value() as f64 * om))
            .collect()
    };
    let base_phase = phase(&c, &dec)?;
    let mut direct = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    let mut phase_preserved = true;
    for mask in 0u32..1 << q {
        let set: Vec<NodeId> = (0..q).filter(|j| mask >> j & 1 == 1).map(|j| links[j]).collect();
        let (tc, td) = twist_all(&c, &set, Some(&dec))?;
        let td = td.expect("decorated");
        check_couple_decoration(&tc, &td)?;
        let ph = phase(&tc, &td)?;
        phase_preserved &= ph.iter().zip(&base_phase).all(|(a, b)| (a - b).abs() <= 1e-9 * (1.0 + b.abs()));
        let mut term = Complex64::new(1.0, 0.0);
        for j in 0..q {
            term *= tc.sign(links[j]).i_factor() * n(td.values[chain.m[j]]);
        }
        scale += term.norm();
        direct += term;
    }
    let prod: f64 = nums.iter().map(|&k| n(k - h.num) - n(k)).product();
    let factorized = Complex64::new(0.0, 1.0).powu(q as u32) * prod;
    let rel_err = if scale == 0.0 { 0.0 } else { (direct - factorized).norm() / scale };
    Ok(TwistSumReport {
        q,
        images: 1 << q,
        direct,
        factorized,
        rel_err,
        phase_preserved,
        pass: rel_err <= TWIST_SUM_TOL && phase_preserved,
    })
}
