//! Completing a partial assignment.
//!
//! Clauses satisfied by an assigned variable are dropped and the rest are
//! restricted to their unassigned variables. The residual hypergraph is split
//! into connected components; each is solved exactly when small enough and by
//! focused greedy descent with restarts otherwise.

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::formula::{Assignment, Formula};
use crate::oracle::{minimize, SmallCnf, MAX_ORACLE_VARS};
use crate::rng::{derive_seed, rng_from_seed, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidualParams {
    /// Components up to this many variables are searched exhaustively
    /// (at most 24).
    pub exhaustive_cap: usize,
    /// Greedy budget per restart, in flips per component variable.
    pub steps_per_var: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for ResidualParams {
    fn default() -> Self {
        ResidualParams {
            exhaustive_cap: MAX_ORACLE_VARS,
            steps_per_var: 100,
            restarts: 10,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidualResult {
    pub assignment: Assignment,
    pub energy: usize,
    /// Unassigned variables in the input.
    pub residual_vars: usize,
    /// Clauses neither satisfied nor violated by the partial assignment.
    pub residual_clauses: usize,
    pub components: usize,
    pub largest_component: usize,
    /// Components too large for exhaustive search.
    pub heuristic_components: usize,
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra] = rb;
        }
    }
}

/// Residual clauses over local indices `0..n`.
struct Component {
    vars: Vec<usize>,
    clauses: Vec<Vec<(usize, bool)>>,
}

fn greedy(comp: &Component, params: &ResidualParams, rng: &mut Rng) -> Vec<bool> {
    let n = comp.vars.len();
    let mut occ: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (c, cl) in comp.clauses.iter().enumerate() {
        for &(v, _) in cl {
            occ[v].push(c);
        }
    }
    let sat = |x: &[bool], c: usize| comp.clauses[c].iter().any(|&(v, p)| x[v] == p);
    let mut best_x = vec![false; n];
    let mut best_e = usize::MAX;
    for _ in 0..params.restarts.max(1) {
        let mut x: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
        let mut true_count: Vec<usize> = (0..comp.clauses.len())
            .map(|c| comp.clauses[c].iter().filter(|&&(v, p)| x[v] == p).count())
            .collect();
        let mut unsat: Vec<usize> = (0..comp.clauses.len()).filter(|&c| true_count[c] == 0).collect();
        if unsat.len() < best_e {
            best_e = unsat.len();
            best_x.clone_from(&x);
        }
        for _ in 0..params.steps_per_var * n {
            if unsat.is_empty() {
                break;
            }
            let c = *unsat.choose(rng).expect("nonempty");
            // flip the variable of `c` whose flip leaves the fewest violated clauses
            let mut best_delta = i64::MAX;
            let mut cands: Vec<usize> = Vec::new();
            for &(v, _) in &comp.clauses[c] {
                let mut delta = 0i64;
                for &d in &occ[v] {
                    let lit_true = comp.clauses[d].iter().any(|&(u, p)| u == v && x[u] == p);
                    if lit_true && true_count[d] == 1 {
                        delta += 1;
                    } else if !lit_true && true_count[d] == 0 {
                        delta -= 1;
                    }
                }
                if delta < best_delta {
                    best_delta = delta;
                    cands.clear();
                }
                if delta == best_delta {
                    cands.push(v);
                }
            }
            let v = *cands.choose(rng).expect("clause has a variable");
            x[v] = !x[v];
            for &d in &occ[v] {
                true_count[d] = comp.clauses[d].iter().filter(|&&(u, p)| x[u] == p).count();
            }
            unsat.retain(|&d| true_count[d] == 0);
            for &d in &occ[v] {
                if true_count[d] == 0 && !unsat.contains(&d) {
                    unsat.push(d);
                }
            }
            if unsat.len() < best_e {
                best_e = unsat.len();
                best_x.clone_from(&x);
            }
        }
        if best_e == 0 {
            break;
        }
    }
    debug_assert!((0..comp.clauses.len()).filter(|&c| !sat(&best_x, c)).count() == best_e);
    best_x
}

/// Keeps every assigned variable of `partial` and chooses the unassigned ones
/// to minimize the energy of the result.
///
/// Exact whenever every residual component has at most
/// `params.exhaustive_cap` variables.
pub fn residual_optimize(f: &Formula, partial: &Assignment, params: &ResidualParams) -> ResidualResult {
    assert_eq!(partial.len(), f.n_vars(), "assignment length mismatch");
    let n = f.n_vars();
    let cap = params.exhaustive_cap.min(MAX_ORACLE_VARS);
    let mut residual: Vec<Vec<(usize, bool)>> = Vec::new();
    for clause in f.clauses() {
        let mut rest = Vec::new();
        let mut satisfied = false;
        for l in clause {
            match partial.get(l.var()).to_bool() {
                Some(v) if l.satisfied_by(v) => {
                    satisfied = true;
                    break;
                }
                Some(_) => {}
                None => rest.push((l.var(), l.is_positive())),
            }
        }
        if !satisfied && !rest.is_empty() {
            residual.push(rest);
        }
    }

    let mut dsu = Dsu((0..n).collect());
    for c in &residual {
        for w in c.windows(2) {
            dsu.union(w[0].0, w[1].0);
        }
    }
    // group by root, components in order of their smallest variable
    let mut comp_of = vec![usize::MAX; n];
    let mut comps: Vec<Component> = Vec::new();
    let mut local = vec![0usize; n];
    let mut touched = vec![false; n];
    for c in &residual {
        for &(v, _) in c {
            touched[v] = true;
        }
    }
    for v in 0..n {
        if !touched[v] {
            continue;
        }
        let r = dsu.find(v);
        if comp_of[r] == usize::MAX {
            comp_of[r] = comps.len();
            comps.push(Component {
                vars: Vec::new(),
                clauses: Vec::new(),
            });
        }
        let comp = &mut comps[comp_of[r]];
        local[v] = comp.vars.len();
        comp.vars.push(v);
    }
    for c in residual.iter() {
        let id = comp_of[dsu.find(c[0].0)];
        comps[id].clauses.push(c.iter().map(|&(v, p)| (local[v], p)).collect());
    }

    let mut values: Vec<bool> = (0..n)
        .map(|i| partial.get(i).to_bool().unwrap_or(false))
        .collect();
    let mut heuristic = 0;
    for (idx, comp) in comps.iter().enumerate() {
        let x: Vec<bool> = if comp.vars.len() <= cap {
            let mut cnf = SmallCnf::new(comp.vars.len());
            for c in &comp.clauses {
                cnf.push_clause(c.iter().copied());
            }
            let (bits, _) = minimize(&cnf);
            (0..comp.vars.len()).map(|b| bits >> b & 1 == 1).collect()
        } else {
            heuristic += 1;
            let mut rng = rng_from_seed(derive_seed(params.seed, idx as u64));
            greedy(comp, params, &mut rng)
        };
        for (b, &v) in comp.vars.iter().enumerate() {
            values[v] = x[b];
        }
    }

    let energy = f.violated(&values);
    ResidualResult {
        assignment: Assignment::from_bools(&values),
        energy,
        residual_vars: partial.n_unset(),
        residual_clauses: residual.len(),
        components: comps.len(),
        largest_component: comps.iter().map(|c| c.vars.len()).max().unwrap_or(0),
        heuristic_components: heuristic,
    }
}
