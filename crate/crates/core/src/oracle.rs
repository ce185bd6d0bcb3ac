//! Exhaustive ground truth for small formulas.
//!
//! Everything here scans all `2^N` assignments in Gray-code order, so each
//! step flips one variable and only the clauses containing it are touched.
//! It is meant to be slow and obviously right.

use serde::Serialize;
use thiserror::Error;

use crate::formula::{Assignment, Formula};

/// Largest `N` the oracle accepts.
pub const MAX_ORACLE_VARS: usize = 24;

/// Default cap on the number of optima kept by [`enumerate`].
pub const DEFAULT_OPTIMA_CAP: usize = 1024;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("exhaustive search refused: N={n_vars} exceeds the cap of {max}")]
    TooManyVars { n_vars: usize, max: usize },
}

fn check_size(n_vars: usize) -> Result<(), OracleError> {
    if n_vars > MAX_ORACLE_VARS {
        Err(OracleError::TooManyVars {
            n_vars,
            max: MAX_ORACLE_VARS,
        })
    } else {
        Ok(())
    }
}

/// A CNF over at most [`MAX_ORACLE_VARS`] variables with clauses of any
/// width, including empty ones (always violated).
#[derive(Debug, Clone, Default)]
pub(crate) struct SmallCnf {
    pub n_vars: usize,
    clause_len: Vec<u32>,
    occ: Vec<Vec<(u32, bool)>>,
}

impl SmallCnf {
    pub fn new(n_vars: usize) -> Self {
        assert!(n_vars <= MAX_ORACLE_VARS);
        SmallCnf {
            n_vars,
            clause_len: Vec::new(),
            occ: vec![Vec::new(); n_vars],
        }
    }

    pub fn from_formula(f: &Formula) -> Self {
        let mut cnf = Self::new(f.n_vars());
        for c in f.clauses() {
            cnf.push_clause(c.iter().map(|l| (l.var(), l.is_positive())));
        }
        cnf
    }

    /// Adds a clause given as `(local var, positive)` pairs.
    pub fn push_clause(&mut self, lits: impl IntoIterator<Item = (usize, bool)>) {
        let c = self.clause_len.len() as u32;
        let mut len = 0;
        for (v, pos) in lits {
            self.occ[v].push((c, pos));
            len += 1;
        }
        self.clause_len.push(len);
    }

    pub fn n_clauses(&self) -> usize {
        self.clause_len.len()
    }
}

/// Calls `visit(bits, energy)` once for each of the `2^n` assignments, bit `v`
/// of `bits` being the value of variable `v`.
pub(crate) fn gray_scan(cnf: &SmallCnf, mut visit: impl FnMut(u32, usize)) {
    // all-FALSE start: negative literals are true
    let mut true_count = vec![0u32; cnf.n_clauses()];
    for occ in &cnf.occ {
        for &(c, pos) in occ {
            if !pos {
                true_count[c as usize] += 1;
            }
        }
    }
    let mut energy = true_count.iter().filter(|&&t| t == 0).count();
    let mut bits = 0u32;
    visit(bits, energy);
    for step in 1u64..(1u64 << cnf.n_vars) {
        let v = step.trailing_zeros() as usize;
        bits ^= 1 << v;
        let value = bits >> v & 1 == 1;
        for &(c, pos) in &cnf.occ[v] {
            let t = &mut true_count[c as usize];
            if pos == value {
                if *t == 0 {
                    energy -= 1;
                }
                *t += 1;
            } else {
                *t -= 1;
                if *t == 0 {
                    energy += 1;
                }
            }
        }
        visit(bits, energy);
    }
}

/// A minimizing assignment of `cnf` (as a bitmask) and its energy.
pub(crate) fn minimize(cnf: &SmallCnf) -> (u32, usize) {
    let mut best = (0u32, usize::MAX);
    gray_scan(cnf, |bits, e| {
        if e < best.1 {
            best = (bits, e);
        }
    });
    best
}

fn bits_to_assignment(bits: u32, n: usize) -> Assignment {
    let v: Vec<bool> = (0..n).map(|i| bits >> i & 1 == 1).collect();
    Assignment::from_bools(&v)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroundTruth {
    /// Minimal energy.
    pub e0: usize,
    /// Number of assignments achieving `e0`.
    pub g0: u64,
    /// Optimal assignments in scan order, at most the requested cap.
    #[serde(skip)]
    pub optima: Vec<Assignment>,
    /// Whether `optima` was cut short.
    pub truncated: bool,
}

pub fn enumerate(f: &Formula) -> Result<GroundTruth, OracleError> {
    enumerate_capped(f, DEFAULT_OPTIMA_CAP)
}

pub fn enumerate_capped(f: &Formula, cap: usize) -> Result<GroundTruth, OracleError> {
    check_size(f.n_vars())?;
    let cnf = SmallCnf::from_formula(f);
    let n = f.n_vars();
    let mut e0 = usize::MAX;
    let mut g0 = 0u64;
    let mut kept: Vec<u32> = Vec::new();
    gray_scan(&cnf, |bits, e| {
        if e < e0 {
            e0 = e;
            g0 = 0;
            kept.clear();
        }
        if e == e0 {
            g0 += 1;
            if kept.len() < cap {
                kept.push(bits);
            }
        }
    });
    Ok(GroundTruth {
        e0,
        g0,
        truncated: g0 > kept.len() as u64,
        optima: kept.into_iter().map(|b| bits_to_assignment(b, n)).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactFields {
    pub e0: usize,
    /// `z_i = min E(x_i = FALSE) - min E(x_i = TRUE)`.
    pub z: Vec<i64>,
    /// Fraction of variables with `z_i = 0`.
    pub zero_fraction: f64,
}

pub fn exact_fields(f: &Formula) -> Result<ExactFields, OracleError> {
    check_size(f.n_vars())?;
    let n = f.n_vars();
    let cnf = SmallCnf::from_formula(f);
    // best[i][b]: minimal energy with variable i set to b
    let mut best = vec![[usize::MAX; 2]; n];
    let mut worst = usize::MAX;
    gray_scan(&cnf, |bits, e| {
        if e >= worst {
            return;
        }
        for (i, slot) in best.iter_mut().enumerate() {
            let b = (bits >> i & 1) as usize;
            if e < slot[b] {
                slot[b] = e;
            }
        }
        worst = best.iter().map(|s| s[0].max(s[1])).max().unwrap_or(0);
    });
    if n == 0 {
        return Ok(ExactFields {
            e0: 0,
            z: Vec::new(),
            zero_fraction: 0.0,
        });
    }
    let e0 = best.iter().map(|s| s[0].min(s[1])).min().unwrap_or(0);
    let z: Vec<i64> = best.iter().map(|s| s[0] as i64 - s[1] as i64).collect();
    let zero_fraction = z.iter().filter(|&&x| x == 0).count() as f64 / n as f64;
    Ok(ExactFields {
        e0,
        z,
        zero_fraction,
    })
}

/// Whether some assignment satisfies every clause.
///
/// Assignments are processed 64 at a time: bit `t` of a word is the
/// assignment whose low six variables spell `t`.
pub fn is_satisfiable(f: &Formula) -> Result<bool, OracleError> {
    check_size(f.n_vars())?;
    let n = f.n_vars();
    const LOW: [u64; 6] = [
        0xAAAA_AAAA_AAAA_AAAA,
        0xCCCC_CCCC_CCCC_CCCC,
        0xF0F0_F0F0_F0F0_F0F0,
        0xFF00_FF00_FF00_FF00,
        0xFFFF_0000_FFFF_0000,
        0xFFFF_FFFF_0000_0000,
    ];
    let valid = if n >= 6 { u64::MAX } else { (1u64 << (1 << n)) - 1 };
    let words = 1u64 << n.saturating_sub(6);
    for w in 0..words {
        let mut alive = valid;
        for c in f.clauses() {
            let mut sat = 0u64;
            for l in c {
                let v = l.var();
                let m = if v < 6 {
                    LOW[v]
                } else if w >> (v - 6) & 1 == 1 {
                    u64::MAX
                } else {
                    0
                };
                sat |= if l.is_positive() { m } else { !m };
            }
            alive &= sat;
            if alive == 0 {
                break;
            }
        }
        if alive != 0 {
            return Ok(true);
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{energy, Literal};
    use crate::generators::{gen_planted, gen_uniform, GenConfig};
    use proptest::prelude::*;

    fn brute(f: &Formula) -> (usize, u64) {
        let n = f.n_vars();
        let mut e0 = usize::MAX;
        let mut g0 = 0;
        for bits in 0u32..1 << n {
            let x: Vec<bool> = (0..n).map(|i| bits >> i & 1 == 1).collect();
            let e = f.violated(&x);
            if e < e0 {
                e0 = e;
                g0 = 0;
            }
            if e == e0 {
                g0 += 1;
            }
        }
        (e0, g0)
    }

    #[test]
    fn empty_formula() {
        let g = enumerate(&Formula::empty(5, 3)).unwrap();
        assert_eq!((g.e0, g.g0), (0, 32));
        let fields = exact_fields(&Formula::empty(5, 3)).unwrap();
        assert!(fields.z.iter().all(|&z| z == 0));
        assert_eq!(fields.zero_fraction, 1.0);
    }

    #[test]
    fn two_opposite_clauses() {
        let f = Formula::new(
            3,
            3,
            vec![
                vec![Literal::pos(0), Literal::pos(1), Literal::pos(2)],
                vec![Literal::neg(0), Literal::neg(1), Literal::neg(2)],
            ],
        )
        .unwrap();
        let g = enumerate(&f).unwrap();
        assert_eq!((g.e0, g.g0), (0, 6));
        assert!(!g.truncated);
        for x in &g.optima {
            assert_eq!(energy(&f, x).unwrap(), 0);
        }
        let capped = enumerate_capped(&f, 2).unwrap();
        assert_eq!(capped.optima.len(), 2);
        assert!(capped.truncated);
    }

    #[test]
    fn single_clause_fields_vanish() {
        let f = Formula::new(3, 3, vec![vec![Literal::pos(0), Literal::pos(1), Literal::pos(2)]]).unwrap();
        let fields = exact_fields(&f).unwrap();
        assert_eq!(fields.z, vec![0, 0, 0]);
    }

    #[test]
    fn forced_variable_field() {
        // x1 must be TRUE in every solution
        let f = Formula::new(
            3,
            2,
            vec![
                vec![Literal::pos(0), Literal::pos(1)],
                vec![Literal::pos(0), Literal::neg(1)],
            ],
        )
        .unwrap();
        let fields = exact_fields(&f).unwrap();
        assert_eq!(fields.z, vec![1, 0, 0]);
    }

    #[test]
    fn refuses_large_instances() {
        let f = Formula::empty(25, 3);
        assert_eq!(
            enumerate(&f),
            Err(OracleError::TooManyVars { n_vars: 25, max: 24 })
        );
        assert!(exact_fields(&f).is_err());
        assert!(is_satisfiable(&f).is_err());
    }

    #[test]
    fn planted_instances_are_satisfiable() {
        for s in 0..20 {
            let inst = gen_planted(&GenConfig::planted(16, 3, 160, s)).unwrap();
            assert_eq!(enumerate(&inst.formula).unwrap().e0, 0);
            assert!(is_satisfiable(&inst.formula).unwrap());
        }
    }

    #[test]
    fn scan_agrees_with_energy() {
        let f = gen_uniform(&GenConfig::uniform(10, 3, 60, 4)).unwrap();
        let cnf = SmallCnf::from_formula(&f);
        let mut seen = 0;
        gray_scan(&cnf, |bits, e| {
            if bits % 7 == 0 {
                let x = bits_to_assignment(bits, 10);
                assert_eq!(energy(&f, &x).unwrap(), e);
            }
            seen += 1;
        });
        assert_eq!(seen, 1024);
    }

    proptest! {
        #[test]
        fn enumeration_matches_brute_force(n in 3usize..=10, m in 0usize..50, seed in any::<u64>()) {
            let f = gen_uniform(&GenConfig::uniform(n, 3, m, seed)).unwrap();
            let g = enumerate(&f).unwrap();
            prop_assert_eq!((g.e0, g.g0), brute(&f));
            prop_assert_eq!(is_satisfiable(&f).unwrap(), g.e0 == 0);
        }

        #[test]
        fn zero_field_iff_both_values_optimal(n in 3usize..=9, m in 0usize..40, seed in any::<u64>()) {
            let f = gen_uniform(&GenConfig::uniform(n, 3, m, seed)).unwrap();
            let g = enumerate_capped(&f, usize::MAX).unwrap();
            let fields = exact_fields(&f).unwrap();
            prop_assert_eq!(fields.e0, g.e0);
            for i in 0..n {
                let vals: Vec<bool> = g.optima.iter().map(|x| x.get(i).to_bool().unwrap()).collect();
                let both = vals.contains(&true) && vals.contains(&false);
                prop_assert_eq!(fields.z[i] == 0, both);
                if !both {
                    prop_assert_eq!(fields.z[i] > 0, vals[0]);
                }
            }
        }
    }
}
