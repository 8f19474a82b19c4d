//! Exhaustive truth-table enumeration, used as a test oracle.

use crate::logic::GroundCnf;
use crate::{Error, Result};

pub const ENUMERATION_LIMIT: usize = 24;

/// All satisfying assignments (up to `limit` of them) by trying every
/// assignment of every variable, definition variables included.
pub fn enumerate_models(cnf: &GroundCnf, limit: usize) -> Result<Vec<Vec<bool>>> {
    let n = cnf.num_vars();
    if n > ENUMERATION_LIMIT {
        return Err(Error::EnumerationGuard {
            vars: n,
            limit: ENUMERATION_LIMIT,
        });
    }
    let clauses: Vec<(u32, u32)> = cnf
        .clauses()
        .iter()
        .map(|c| {
            // (positive mask, negative mask)
            c.lits.iter().fold((0u32, 0u32), |(p, q), l| {
                let bit = 1u32 << l.var().0;
                if l.is_neg() {
                    (p, q | bit)
                } else {
                    (p | bit, q)
                }
            })
        })
        .collect();
    let mut out = Vec::new();
    for bits in 0u32..(1u32 << n) {
        if out.len() >= limit {
            break;
        }
        if clauses.iter().all(|&(p, q)| bits & p != 0 || !bits & q != 0) {
            out.push((0..n).map(|i| bits >> i & 1 == 1).collect());
        }
    }
    Ok(out)
}

pub fn is_satisfiable_brute(cnf: &GroundCnf) -> Result<bool> {
    Ok(!enumerate_models(cnf, 1)?.is_empty())
}
