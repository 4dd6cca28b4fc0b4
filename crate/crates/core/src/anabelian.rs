//! Group-theoretic invariants of a stable type and the recovery formulas.
//!
//! `b2` flags the absence of marked points, `b1 = 2g + n - 1 + b2` is the
//! maximal elementary-abelian quotient rank, and `gamma_max = g + n - 2 + b2`
//! is the maximal first invariant over nontrivial prime-to-p cyclic
//! characters. Inverting: `g = b1 - gamma_max - 1` and
//! `n = 2 gamma_max - b1 - b2 + 3`.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TypeError {
    #[error("type ({0}, {1}) is not stable: 2g - 2 + n <= 0")]
    Unstable(u64, u64),
    #[error("invariants ({0}, {1}, {2}) do not come from a stable type")]
    Inconsistent(i64, i64, i64),
    #[error("the smooth-curve average formula does not apply to singular models")]
    SingularAverage,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub struct TypeInvariants {
    pub g: u64,
    pub n: u64,
    pub b1: u64,
    pub b2: u64,
    pub gamma_max: u64,
}

pub fn is_stable_type(g: u64, n: u64) -> bool {
    2 * g as i64 - 2 + n as i64 > 0
}

pub fn invariants_of(g: u64, n: u64) -> Result<TypeInvariants, TypeError> {
    if !is_stable_type(g, n) {
        return Err(TypeError::Unstable(g, n));
    }
    let b2 = if n == 0 { 1 } else { 0 };
    let b1 = 2 * g + n - 1 + b2;
    let gamma_max = g + n + b2 - 2; // stability makes this non-negative
    Ok(TypeInvariants { g, n, b1, b2, gamma_max })
}

pub fn recover_type(b1: u64, b2: u64, gamma_max: u64) -> Result<(u64, u64), TypeError> {
    let g = b1 as i64 - gamma_max as i64 - 1;
    let n = 2 * gamma_max as i64 - b1 as i64 - b2 as i64 + 3;
    if g < 0 || n < 0 || !is_stable_type(g as u64, n as u64) {
        return Err(TypeError::Inconsistent(b1 as i64, b2 as i64, gamma_max as i64));
    }
    // b2 must match the recovered type
    if (n == 0) != (b2 == 1) {
        return Err(TypeError::Inconsistent(b1 as i64, b2 as i64, gamma_max as i64));
    }
    Ok((g as u64, n as u64))
}

/// The limit of p-averages of a smooth model: `g - 1` for at most one
/// marked point, else `g`. Refuses singular models: their value depends on
/// the dual graph, not just the type.
pub fn avr_p(g: u64, n: u64, smooth: bool) -> Result<i64, TypeError> {
    if !is_stable_type(g, n) {
        return Err(TypeError::Unstable(g, n));
    }
    if !smooth {
        return Err(TypeError::SingularAverage);
    }
    Ok(if n <= 1 { g as i64 - 1 } else { g as i64 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formula_values() {
        let i = invariants_of(2, 3).unwrap();
        assert_eq!((i.b2, i.b1, i.gamma_max), (0, 6, 3));
        let i = invariants_of(2, 0).unwrap();
        assert_eq!((i.b2, i.b1, i.gamma_max), (1, 4, 1));
        let i = invariants_of(0, 3).unwrap();
        assert_eq!((i.b2, i.b1, i.gamma_max), (0, 2, 1));
        assert!(invariants_of(1, 0).is_err());
        assert!(invariants_of(0, 2).is_err());
    }

    #[test]
    fn recovery() {
        assert_eq!(recover_type(6, 0, 3).unwrap(), (2, 3));
        assert_eq!(recover_type(4, 1, 1).unwrap(), (2, 0));
        assert!(recover_type(0, 0, 5).is_err());
        // b2 inconsistent with the recovered type
        assert!(recover_type(6, 1, 3).is_err());
    }

    #[test]
    fn roundtrip_all_small_types() {
        for g in 0..=50u64 {
            for n in 0..=50u64 {
                if !is_stable_type(g, n) {
                    continue;
                }
                let i = invariants_of(g, n).unwrap();
                assert_eq!(recover_type(i.b1, i.b2, i.gamma_max).unwrap(), (g, n));
            }
        }
    }

    #[test]
    fn averages() {
        assert_eq!(avr_p(2, 0, true).unwrap(), 1);
        assert_eq!(avr_p(2, 5, true).unwrap(), 2);
        assert_eq!(avr_p(1, 1, true).unwrap(), 0);
        assert!(avr_p(2, 0, false).is_err());
    }
}
