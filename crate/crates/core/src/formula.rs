//! Formulas, assignments and the local measurements taken on them.
//!
//! A [`Formula`] stores its `M` clauses as one flat literal array (clause `a`
//! occupies `literals[a*K .. (a+1)*K]`) and an eagerly built occurrence index
//! in compressed-row form, so the neighbourhood of a variable is one slice.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("clause width must be at least 1")]
    ZeroWidth,
    #[error("clause {clause} has {found} literals, expected {expected}")]
    ClauseWidth {
        clause: usize,
        expected: usize,
        found: usize,
    },
    #[error("clause {clause} mentions variable {var} but the formula has {n_vars} variables")]
    VarOutOfRange {
        clause: usize,
        var: usize,
        n_vars: usize,
    },
    #[error("clause {clause} mentions variable {var} more than once")]
    DuplicateVar { clause: usize, var: usize },
    #[error("variable index {var} out of range for {n_vars} variables")]
    VarIndex { var: usize, n_vars: usize },
    #[error("assignment has length {found}, formula has {expected} variables")]
    AssignmentLength { expected: usize, found: usize },
    #[error("energy is only defined for total assignments ({unset} variables unset)")]
    PartialAssignment { unset: usize },
}

/// A variable or its negation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    var: u32,
    positive: bool,
}

impl Literal {
    pub fn new(var: usize, positive: bool) -> Self {
        Literal {
            var: u32::try_from(var).expect("variable index exceeds u32"),
            positive,
        }
    }

    pub fn pos(var: usize) -> Self {
        Self::new(var, true)
    }

    pub fn neg(var: usize) -> Self {
        Self::new(var, false)
    }

    #[inline]
    pub fn var(self) -> usize {
        self.var as usize
    }

    #[inline]
    pub fn is_positive(self) -> bool {
        self.positive
    }

    /// `+1` for an unnegated variable, `-1` for a negated one.
    #[inline]
    pub fn sign(self) -> i64 {
        if self.positive {
            1
        } else {
            -1
        }
    }

    /// Whether the literal is satisfied when its variable takes `value`.
    #[inline]
    pub fn satisfied_by(self, value: bool) -> bool {
        value == self.positive
    }

    /// DIMACS encoding: 1-based, negative when negated.
    pub fn to_dimacs(self) -> i64 {
        let v = self.var as i64 + 1;
        if self.positive {
            v
        } else {
            -v
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// One entry of the occurrence index: variable `i` sits in `slot` of `clause`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Occurrence {
    pub clause: u32,
    pub slot: u32,
    pub positive: bool,
}

impl Occurrence {
    #[inline]
    pub fn sign(self) -> i64 {
        if self.positive {
            1
        } else {
            -1
        }
    }
}

/// A K-SAT formula over `n_vars` Boolean variables.
///
/// Every clause has exactly `k` literals on pairwise distinct variables.
/// Clauses may repeat; their order is the order they were given in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Formula {
    n_vars: usize,
    k: usize,
    literals: Vec<Literal>,
    occ_start: Vec<u32>,
    occ: Vec<Occurrence>,
}

impl Formula {
    /// Builds a formula from a flat literal array of length `M*k`.
    pub fn from_flat(n_vars: usize, k: usize, literals: Vec<Literal>) -> Result<Self, FormulaError> {
        if k == 0 {
            return Err(FormulaError::ZeroWidth);
        }
        if !literals.len().is_multiple_of(k) {
            let m = literals.len() / k;
            return Err(FormulaError::ClauseWidth {
                clause: m,
                expected: k,
                found: literals.len() - m * k,
            });
        }
        for (a, clause) in literals.chunks_exact(k).enumerate() {
            for (p, lit) in clause.iter().enumerate() {
                if lit.var() >= n_vars {
                    return Err(FormulaError::VarOutOfRange {
                        clause: a,
                        var: lit.var(),
                        n_vars,
                    });
                }
                if clause[..p].iter().any(|l| l.var == lit.var) {
                    return Err(FormulaError::DuplicateVar {
                        clause: a,
                        var: lit.var(),
                    });
                }
            }
        }
        Ok(Self::build_index(n_vars, k, literals))
    }

    /// Builds a formula from one `Vec` per clause.
    pub fn new(n_vars: usize, k: usize, clauses: Vec<Vec<Literal>>) -> Result<Self, FormulaError> {
        if k == 0 {
            return Err(FormulaError::ZeroWidth);
        }
        let mut flat = Vec::with_capacity(clauses.len() * k);
        for (a, c) in clauses.into_iter().enumerate() {
            if c.len() != k {
                return Err(FormulaError::ClauseWidth {
                    clause: a,
                    expected: k,
                    found: c.len(),
                });
            }
            flat.extend(c);
        }
        Self::from_flat(n_vars, k, flat)
    }

    /// A formula with no clauses.
    pub fn empty(n_vars: usize, k: usize) -> Self {
        assert!(k > 0, "clause width must be positive");
        Self::build_index(n_vars, k, Vec::new())
    }

    fn build_index(n_vars: usize, k: usize, literals: Vec<Literal>) -> Self {
        let mut degree = vec![0u32; n_vars + 1];
        for lit in &literals {
            degree[lit.var() + 1] += 1;
        }
        for i in 0..n_vars {
            degree[i + 1] += degree[i];
        }
        let occ_start = degree;
        let mut fill = occ_start.clone();
        let mut occ = vec![
            Occurrence {
                clause: 0,
                slot: 0,
                positive: false
            };
            literals.len()
        ];
        for (e, lit) in literals.iter().enumerate() {
            let at = &mut fill[lit.var()];
            occ[*at as usize] = Occurrence {
                clause: (e / k) as u32,
                slot: (e % k) as u32,
                positive: lit.positive,
            };
            *at += 1;
        }
        Formula {
            n_vars,
            k,
            literals,
            occ_start,
            occ,
        }
    }

    #[inline]
    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    /// Clause width K.
    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn n_clauses(&self) -> usize {
        self.literals.len() / self.k
    }

    #[inline]
    pub fn clause(&self, a: usize) -> &[Literal] {
        &self.literals[a * self.k..(a + 1) * self.k]
    }

    pub fn clauses(&self) -> std::slice::ChunksExact<'_, Literal> {
        self.literals.chunks_exact(self.k)
    }

    /// All literals, clause after clause. Index `a*K + p` is edge `(a, p)`.
    #[inline]
    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    /// The clauses containing variable `i`, in clause order.
    #[inline]
    pub fn occurrences_of(&self, i: usize) -> &[Occurrence] {
        &self.occ[self.occ_start[i] as usize..self.occ_start[i + 1] as usize]
    }

    #[inline]
    pub fn degree(&self, i: usize) -> usize {
        (self.occ_start[i + 1] - self.occ_start[i]) as usize
    }

    /// Number of violated clauses under a total assignment given as booleans.
    ///
    /// Panics if `values.len() != n_vars`.
    pub fn violated(&self, values: &[bool]) -> usize {
        assert_eq!(values.len(), self.n_vars, "assignment length mismatch");
        self.clauses()
            .filter(|c| c.iter().all(|l| !l.satisfied_by(values[l.var()])))
            .count()
    }

    /// Signed field of variable `i` from the clauses containing it: the number
    /// of clauses broken by setting `i` FALSE minus those broken by setting it
    /// TRUE, everything else held at `values`.
    pub fn local_flip_field(&self, values: &[bool], i: usize) -> i64 {
        let mut z = 0;
        for o in self.occurrences_of(i) {
            let clause = self.clause(o.clause as usize);
            let others_false = clause
                .iter()
                .enumerate()
                .all(|(p, l)| p == o.slot as usize || !l.satisfied_by(values[l.var()]));
            if others_false {
                z += o.sign();
            }
        }
        z
    }

    fn check_var(&self, i: usize) -> Result<(), FormulaError> {
        if i < self.n_vars {
            Ok(())
        } else {
            Err(FormulaError::VarIndex {
                var: i,
                n_vars: self.n_vars,
            })
        }
    }
}

/// Value of one variable in a possibly partial assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Value {
    True,
    False,
    Unset,
}

impl Value {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Value::True
        } else {
            Value::False
        }
    }

    pub fn to_bool(self) -> Option<bool> {
        match self {
            Value::True => Some(true),
            Value::False => Some(false),
            Value::Unset => None,
        }
    }
}

/// A total or partial truth assignment.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    values: Vec<Value>,
}

impl Assignment {
    pub fn unset(n: usize) -> Self {
        Assignment {
            values: vec![Value::Unset; n],
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        Assignment {
            values: bits.iter().copied().map(Value::from_bool).collect(),
        }
    }

    pub fn from_values(values: Vec<Value>) -> Self {
        Assignment { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize) -> Value {
        self.values[i]
    }

    pub fn set(&mut self, i: usize, v: Value) {
        self.values[i] = v;
    }

    pub fn values(&self) -> &[Value] {
        &self.values
    }

    pub fn n_unset(&self) -> usize {
        self.values.iter().filter(|v| **v == Value::Unset).count()
    }

    pub fn n_assigned(&self) -> usize {
        self.len() - self.n_unset()
    }

    pub fn is_total(&self) -> bool {
        self.n_unset() == 0
    }

    /// The boolean vector of a total assignment, `None` if any entry is unset.
    pub fn to_bools(&self) -> Option<Vec<bool>> {
        self.values.iter().map(|v| v.to_bool()).collect()
    }

    /// `'1'` for TRUE, `'0'` for FALSE, `'*'` for unset.
    pub fn to_bitstring(&self) -> String {
        self.values
            .iter()
            .map(|v| match v {
                Value::True => '1',
                Value::False => '0',
                Value::Unset => '*',
            })
            .collect()
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bitstring())
    }
}

fn total_values(f: &Formula, x: &Assignment) -> Result<Vec<bool>, FormulaError> {
    if x.len() != f.n_vars() {
        return Err(FormulaError::AssignmentLength {
            expected: f.n_vars(),
            found: x.len(),
        });
    }
    x.to_bools().ok_or(FormulaError::PartialAssignment { unset: x.n_unset() })
}

/// Number of clauses with all K literals false under the total assignment `x`.
pub fn energy(f: &Formula, x: &Assignment) -> Result<usize, FormulaError> {
    Ok(f.violated(&total_values(f, x)?))
}

/// `energy(x with x_i = FALSE) - energy(x with x_i = TRUE)`.
///
/// Positive values mean TRUE is favoured. Only clauses containing `i` are
/// inspected.
pub fn flip_field(f: &Formula, x: &Assignment, i: usize) -> Result<i64, FormulaError> {
    f.check_var(i)?;
    let values = total_values(f, x)?;
    Ok(f.local_flip_field(&values, i))
}

/// Counts of clauses containing `x_i` and `¬x_i`.
pub fn occurrences(f: &Formula, i: usize) -> Result<(usize, usize), FormulaError> {
    f.check_var(i)?;
    let plus = f.occurrences_of(i).iter().filter(|o| o.positive).count();
    Ok((plus, f.degree(i) - plus))
}

/// Field and occurrence counts of one variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSample {
    pub var: usize,
    pub z: i64,
    pub ell_plus: usize,
    pub ell_minus: usize,
}

pub fn field_sample(f: &Formula, x: &Assignment, i: usize) -> Result<FieldSample, FormulaError> {
    let z = flip_field(f, x, i)?;
    let (ell_plus, ell_minus) = occurrences(f, i)?;
    Ok(FieldSample {
        var: i,
        z,
        ell_plus,
        ell_minus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lits(c: &[i64]) -> Vec<Literal> {
        c.iter()
            .map(|&d| Literal::new(d.unsigned_abs() as usize - 1, d > 0))
            .collect()
    }

    fn f_of(n: usize, cs: &[&[i64]]) -> Formula {
        let k = cs.first().map_or(3, |c| c.len());
        Formula::new(n, k, cs.iter().map(|c| lits(c)).collect()).unwrap()
    }

    /// Index-free scorer used as an oracle for `energy`.
    fn naive_energy(n: usize, clauses: &[Vec<i64>], x: &[bool]) -> usize {
        assert_eq!(x.len(), n);
        clauses
            .iter()
            .filter(|c| {
                c.iter().all(|&d| {
                    let v = x[d.unsigned_abs() as usize - 1];
                    if d > 0 {
                        !v
                    } else {
                        v
                    }
                })
            })
            .count()
    }

    #[test]
    fn empty_formula_has_zero_energy() {
        let f = Formula::empty(5, 3);
        let x = Assignment::from_bools(&[true, false, true, true, false]);
        assert_eq!(energy(&f, &x).unwrap(), 0);
    }

    #[test]
    fn all_false_violates_positive_clause() {
        let f = f_of(3, &[&[1, 2, 3]]);
        let x = Assignment::from_bools(&[false; 3]);
        assert_eq!(energy(&f, &x).unwrap(), 1);
    }

    #[test]
    fn energy_rejects_partial() {
        let f = f_of(3, &[&[1, 2, 3]]);
        let mut x = Assignment::from_bools(&[false; 3]);
        x.set(1, Value::Unset);
        assert_eq!(
            energy(&f, &x),
            Err(FormulaError::PartialAssignment { unset: 1 })
        );
        assert!(matches!(
            energy(&f, &Assignment::from_bools(&[true; 2])),
            Err(FormulaError::AssignmentLength { .. })
        ));
    }

    #[test]
    fn energy_matches_naive_scorer() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let (n, k, m) = (10, 3, 40);
            let raw: Vec<Vec<i64>> = (0..m)
                .map(|_| {
                    let mut c: Vec<i64> = Vec::new();
                    while c.len() < k {
                        let v = rng.gen_range(1..=n as i64);
                        if c.iter().all(|d| d.abs() != v) {
                            c.push(if rng.gen() { v } else { -v });
                        }
                    }
                    c
                })
                .collect();
            let f = Formula::new(n, k, raw.iter().map(|c| lits(c)).collect()).unwrap();
            let x: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
            assert_eq!(
                energy(&f, &Assignment::from_bools(&x)).unwrap(),
                naive_energy(n, &raw, &x)
            );
        }
    }

    #[test]
    fn flip_field_examples() {
        let f = f_of(4, &[&[1, 2, 3]]);
        let x = Assignment::from_bools(&[true, false, false, false]);
        assert_eq!(flip_field(&f, &x, 0).unwrap(), 1);
        // x4 appears nowhere
        assert_eq!(flip_field(&f, &x, 3).unwrap(), 0);
        assert_eq!(flip_field(&f, &x, 1).unwrap(), 0);
        assert!(matches!(
            flip_field(&f, &x, 4),
            Err(FormulaError::VarIndex { .. })
        ));
    }

    #[test]
    fn occurrences_examples() {
        let f = f_of(5, &[&[1, 2, 3], &[-1, 2, 4]]);
        assert_eq!(occurrences(&f, 0).unwrap(), (1, 1));
        assert_eq!(occurrences(&f, 1).unwrap(), (2, 0));
        assert_eq!(occurrences(&f, 4).unwrap(), (0, 0));
        assert!(occurrences(&f, 5).is_err());
    }

    #[test]
    fn construction_errors() {
        assert_eq!(
            Formula::new(3, 3, vec![lits(&[1, 1, 2])]),
            Err(FormulaError::DuplicateVar { clause: 0, var: 0 })
        );
        assert!(matches!(
            Formula::new(3, 3, vec![lits(&[1, 2])]),
            Err(FormulaError::ClauseWidth { .. })
        ));
        assert!(matches!(
            Formula::new(3, 3, vec![lits(&[1, 2, 4])]),
            Err(FormulaError::VarOutOfRange { var: 3, .. })
        ));
    }

    fn arb_formula() -> impl Strategy<Value = (Formula, Vec<bool>)> {
        (3usize..=12, 2usize..=3, 0usize..40).prop_flat_map(|(n, k, m)| {
            let clause = proptest::sample::subsequence((0..n).collect::<Vec<_>>(), k)
                .prop_shuffle()
                .prop_flat_map(move |vars| {
                    proptest::collection::vec(any::<bool>(), k).prop_map(move |signs| {
                        vars.iter()
                            .zip(signs)
                            .map(|(&v, s)| Literal::new(v, s))
                            .collect::<Vec<_>>()
                    })
                });
            (
                proptest::collection::vec(clause, m),
                proptest::collection::vec(any::<bool>(), n),
            )
                .prop_map(move |(cs, x)| (Formula::new(n, k, cs).unwrap(), x))
        })
    }

    proptest! {
        #[test]
        fn flip_field_matches_full_recount((f, x) in arb_formula()) {
            for i in 0..f.n_vars() {
                let mut xf = x.clone();
                xf[i] = false;
                let mut xt = x.clone();
                xt[i] = true;
                let z = f.violated(&xf) as i64 - f.violated(&xt) as i64;
                prop_assert_eq!(flip_field(&f, &Assignment::from_bools(&x), i).unwrap(), z);
            }
        }

        #[test]
        fn occurrence_totals_are_km((f, _x) in arb_formula()) {
            let mut total = 0;
            for i in 0..f.n_vars() {
                let (p, m) = occurrences(&f, i).unwrap();
                prop_assert_eq!(p + m, f.degree(i));
                total += p + m;
            }
            prop_assert_eq!(total, f.k() * f.n_clauses());
        }

        #[test]
        fn adjacency_reconstructs_clauses((f, _x) in arb_formula()) {
            let mut rebuilt = vec![None; f.literals().len()];
            for i in 0..f.n_vars() {
                for o in f.occurrences_of(i) {
                    let e = o.clause as usize * f.k() + o.slot as usize;
                    prop_assert!(rebuilt[e].is_none());
                    rebuilt[e] = Some(Literal::new(i, o.positive));
                }
            }
            let rebuilt: Vec<Literal> = rebuilt.into_iter().map(Option::unwrap).collect();
            prop_assert_eq!(rebuilt.as_slice(), f.literals());
        }
    }
}
