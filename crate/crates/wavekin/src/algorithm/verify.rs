//! Edge and Euler-characteristic identities for the operation counts.

use serde::Serialize;

use super::tree::OperationCounts;
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IdentityCheck {
    pub name: String,
    pub lhs: i64,
    pub rhs: i64,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IdentityReport {
    pub counts: OperationCounts,
    pub n: usize,
    pub strict: bool,
    pub checks: Vec<IdentityCheck>,
    /// The two-vector bound holds with equality.
    pub saturated: bool,
    pub pass: bool,
}

/// All identities and bounds, without failing. Self-loop removals enter
/// the relaxed forms; with `m4 = 0` they reduce to the strict ones. The
/// relaxed two-vector bound is not asserted for a single atom, and an
/// empty run (everything removed beforehand) is vacuous.
pub fn check_count_identities(c: &OperationCounts, n: usize, strict: bool) -> IdentityReport {
    let (m0, m2, m3, m4) = (c.m0 as i64, c.m2 as i64, c.m3 as i64, c.m4 as i64);
    if n == 0 {
        return IdentityReport { counts: *c, n, strict, checks: vec![], saturated: false, pass: *c == OperationCounts::default() };
    }
    let n = n as i64;
    let mut checks = Vec::new();
    let mut eq = |name: &str, lhs: i64, rhs: i64| checks.push(IdentityCheck { name: name.into(), lhs, rhs, holds: lhs == rhs });
    if strict {
        eq("3m3+2m2+m0=2n-1", 3 * m3 + 2 * m2 + m0, 2 * n - 1);
        eq("2m3+m2=n", 2 * m3 + m2, n);
    } else {
        eq("3m3+2m2+m0+m4=2n-1", 3 * m3 + 2 * m2 + m0 + m4, 2 * n - 1);
        eq("2m3+m2+m4=n", 2 * m3 + m2 + m4, n);
    }
    eq("m3+m2+m0=n-1", m3 + m2 + m0, n - 1);
    let bound = 3 * (m3 - 1) + if strict { 0 } else { 2 * m4 };
    if strict {
        checks.push(IdentityCheck { name: "m0<m3".into(), lhs: m0, rhs: m3, holds: m0 < m3 });
        checks.push(IdentityCheck { name: "m2<=3(m3-1)".into(), lhs: m2, rhs: bound, holds: m2 <= bound });
    } else {
        checks.push(IdentityCheck { name: "m0<m3+m4".into(), lhs: m0, rhs: m3 + m4, holds: m0 < m3 + m4 });
        if n >= 2 {
            checks.push(IdentityCheck { name: "m2<=3(m3-1)+2m4".into(), lhs: m2, rhs: bound, holds: m2 <= bound });
        }
    }
    let pass = checks.iter().all(|c| c.holds);
    IdentityReport { counts: *c, n: n as usize, strict, checks, saturated: m2 == bound, pass }
}

/// As [`check_count_identities`], failing with a theory violation naming
/// every identity that does not hold.
pub fn verify_count_identities(c: &OperationCounts, n: usize, strict: bool) -> Result<IdentityReport> {
    let rep = check_count_identities(c, n, strict);
    if rep.pass {
        return Ok(rep);
    }
    let failed: Vec<String> =
        rep.checks.iter().filter(|x| !x.holds).map(|x| format!("{} ({} vs {})", x.name, x.lhs, x.rhs)).collect();
    Err(Error::Theory(format!("counts {:?} with n = {n}: {}", c, failed.join(", "))))
}
