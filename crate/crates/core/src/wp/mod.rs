//! Warning Propagation.
//!
//! Each edge `(a, i)` carries one bit `u_{a->i}`: clause `a` warns `i` that it
//! must satisfy `a` because every other variable of `a` is being pushed away
//! from satisfying it. With `s_{a,j} = +1` for an unnegated occurrence,
//!
//! ```text
//! H_j        = sum_{b ∋ j} s_{b,j} u_{b->j}
//! h_{j->a}   = H_j - s_{a,j} u_{a->j}
//! u_{a->i}   = 1  iff  s_{a,j} h_{j->a} < 0 for every j in a, j != i
//! ```
//!
//! A positive `H_j` favours TRUE. Edge `(a, p)` is stored at index `a*K + p`,
//! the same index as the literal in [`Formula::literals`].

mod decide;
mod residual;

pub use decide::{wp_decide, DecideParams, Decision, RunRecord, Verdict};
pub use residual::{residual_optimize, ResidualParams, ResidualResult};

use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::formula::{Assignment, Formula, Value};
use crate::rng::{derive_seed, rng_from_seed, Rng};

/// Clauses per parallel chunk in a synchronous sweep.
const PAR_CHUNK: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Schedule {
    /// Every edge recomputed from the previous sweep's messages.
    #[default]
    Sync,
    /// Clauses updated one at a time in a fresh random order each sweep,
    /// each seeing the latest messages.
    RandomAsync,
}

impl std::str::FromStr for Schedule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sync" => Ok(Schedule::Sync),
            "random-async" => Ok(Schedule::RandomAsync),
            _ => Err(format!("unknown schedule `{s}` (expected sync or random-async)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WpState {
    k: usize,
    warnings: Vec<u8>,
    /// Sweeps applied so far.
    pub sweeps: usize,
    /// Edges changed by the last sweep.
    pub last_changed: usize,
}

impl WpState {
    pub fn zeros(f: &Formula) -> Self {
        WpState {
            k: f.k(),
            warnings: vec![0; f.literals().len()],
            sweeps: 0,
            last_changed: 0,
        }
    }

    pub fn n_edges(&self) -> usize {
        self.warnings.len()
    }

    pub fn warnings(&self) -> &[u8] {
        &self.warnings
    }

    pub fn warning(&self, clause: usize, slot: usize) -> bool {
        self.warnings[clause * self.k + slot] != 0
    }

    pub fn set_warning(&mut self, clause: usize, slot: usize, on: bool) {
        self.warnings[clause * self.k + slot] = u8::from(on);
    }

    fn check(&self, f: &Formula) {
        assert_eq!(self.k, f.k(), "state built for another formula");
        assert_eq!(self.warnings.len(), f.literals().len(), "state built for another formula");
    }
}

/// Independent uniform warning bits.
pub fn wp_init(f: &Formula, seed: u64) -> WpState {
    let mut rng = rng_from_seed(seed);
    let mut s = WpState::zeros(f);
    for w in &mut s.warnings {
        *w = rng.gen_range(0..2);
    }
    s
}

/// `H_i` for every variable.
pub fn local_fields(f: &Formula, state: &WpState) -> Vec<i64> {
    state.check(f);
    (0..f.n_vars())
        .map(|i| {
            f.occurrences_of(i)
                .iter()
                .map(|o| o.sign() * state.warnings[o.clause as usize * f.k() + o.slot as usize] as i64)
                .sum()
        })
        .collect()
}

/// New warnings of one clause from the fields `h` and its old warnings.
/// Returns the number of edges that changed.
#[inline]
fn update_clause(f: &Formula, a: usize, h: &[i64], old: &[u8], out: &mut [u8]) -> usize {
    let k = f.k();
    let clause = f.clause(a);
    // slot of the one variable not pushed away from `a`, if exactly one
    let mut free_slot = usize::MAX;
    let mut n_free = 0;
    for (p, l) in clause.iter().enumerate() {
        let s = l.sign();
        let cavity = h[l.var()] - s * old[p] as i64;
        if s * cavity >= 0 {
            n_free += 1;
            free_slot = p;
            if n_free > 1 {
                break;
            }
        }
    }
    let mut changed = 0;
    for p in 0..k {
        let u = u8::from(n_free == 0 || (n_free == 1 && p == free_slot));
        changed += usize::from(u != old[p]);
        out[p] = u;
    }
    changed
}

/// One synchronous sweep; returns the number of changed edges.
pub fn wp_sweep(f: &Formula, state: &mut WpState) -> usize {
    state.check(f);
    let k = f.k();
    let h = local_fields(f, state);
    let old = &state.warnings;
    let mut next = vec![0u8; old.len()];
    let changed: usize = next
        .par_chunks_mut(PAR_CHUNK * k)
        .enumerate()
        .map(|(chunk, out)| {
            let first = chunk * PAR_CHUNK;
            out.chunks_exact_mut(k)
                .enumerate()
                .map(|(off, o)| {
                    let a = first + off;
                    update_clause(f, a, &h, &old[a * k..(a + 1) * k], o)
                })
                .sum::<usize>()
        })
        .sum();
    state.warnings = next;
    state.sweeps += 1;
    state.last_changed = changed;
    changed
}

/// One asynchronous sweep over the clauses in random order.
pub fn wp_sweep_async(f: &Formula, state: &mut WpState, rng: &mut Rng) -> usize {
    state.check(f);
    let k = f.k();
    let mut h = local_fields(f, state);
    let mut order: Vec<usize> = (0..f.n_clauses()).collect();
    order.shuffle(rng);
    let mut changed = 0;
    let mut buf = vec![0u8; k];
    for a in order {
        let old = &state.warnings[a * k..(a + 1) * k];
        let c = update_clause(f, a, &h, old, &mut buf);
        if c > 0 {
            for (p, l) in f.clause(a).iter().enumerate() {
                h[l.var()] += l.sign() * (buf[p] as i64 - old[p] as i64);
            }
            state.warnings[a * k..(a + 1) * k].copy_from_slice(&buf);
            changed += c;
        }
    }
    state.sweeps += 1;
    state.last_changed = changed;
    changed
}

/// `max(10, ceil(2 ln N))`.
pub fn default_max_iters(n_vars: usize) -> usize {
    let t = (2.0 * (n_vars.max(1) as f64).ln()).ceil() as usize;
    t.max(10)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct WpParams {
    /// `None` means [`default_max_iters`].
    pub max_iters: Option<usize>,
    pub schedule: Schedule,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WpOutcome {
    pub converged: bool,
    /// Sweeps that changed at least one edge. On convergence the final,
    /// unchanged sweep is not counted; otherwise this equals the cutoff.
    pub iterations: usize,
    pub local_fields: Vec<i64>,
    /// TRUE where `H_i > 0`, FALSE where `H_i < 0`, UNSET where `H_i = 0`.
    pub partial: Assignment,
    pub state: WpState,
}

pub fn partial_from_fields(h: &[i64]) -> Assignment {
    Assignment::from_values(
        h.iter()
            .map(|&x| match x.signum() {
                1 => Value::True,
                -1 => Value::False,
                _ => Value::Unset,
            })
            .collect(),
    )
}

/// Synchronous WP from a random start; `max_iters` changing sweeps are
/// allowed before the run is declared non-convergent.
pub fn wp_run(f: &Formula, seed: u64, max_iters: usize) -> WpOutcome {
    wp_run_with(
        f,
        seed,
        &WpParams {
            max_iters: Some(max_iters),
            schedule: Schedule::Sync,
        },
    )
}

pub fn wp_run_with(f: &Formula, seed: u64, params: &WpParams) -> WpOutcome {
    let max_iters = params
        .max_iters
        .unwrap_or_else(|| default_max_iters(f.n_vars()))
        .max(1);
    let mut state = wp_init(f, derive_seed(seed, 0));
    let mut order_rng = rng_from_seed(derive_seed(seed, 1));
    let mut outcome = None;
    for t in 0..=max_iters {
        let changed = match params.schedule {
            Schedule::Sync => wp_sweep(f, &mut state),
            Schedule::RandomAsync => wp_sweep_async(f, &mut state, &mut order_rng),
        };
        if changed == 0 {
            outcome = Some(t);
            break;
        }
    }
    let local_fields = local_fields(f, &state);
    WpOutcome {
        converged: outcome.is_some(),
        iterations: outcome.unwrap_or(max_iters),
        partial: partial_from_fields(&local_fields),
        local_fields,
        state,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Literal;
    use crate::generators::{gen_planted, gen_uniform, GenConfig};
    use proptest::prelude::*;

    /// Edge-by-edge transcription of the update rule, no shortcuts.
    fn reference_sweep(f: &Formula, old: &[u8]) -> Vec<u8> {
        let k = f.k();
        let u = |b: usize, q: usize| old[b * k + q] as i64;
        let mut next = vec![0u8; old.len()];
        for a in 0..f.n_clauses() {
            for p in 0..k {
                let mut all = true;
                for (q, lj) in f.clause(a).iter().enumerate() {
                    if q == p {
                        continue;
                    }
                    let mut h = 0;
                    for (b, c) in f.clauses().enumerate() {
                        if b == a {
                            continue;
                        }
                        for (r, l) in c.iter().enumerate() {
                            if l.var() == lj.var() {
                                h += l.sign() * u(b, r);
                            }
                        }
                    }
                    if lj.sign() * h >= 0 {
                        all = false;
                    }
                }
                next[a * k + p] = u8::from(all);
            }
        }
        next
    }

    #[test]
    fn empty_formula_converges_immediately() {
        let f = Formula::empty(7, 3);
        let out = wp_run(&f, 1, 10);
        assert!(out.converged);
        assert_eq!(out.iterations, 0);
        assert_eq!(out.partial.n_unset(), 7);
        assert_eq!(wp_init(&f, 3).n_edges(), 0);
    }

    #[test]
    fn zero_messages_are_a_fixed_point() {
        let f = gen_uniform(&GenConfig::uniform(50, 3, 200, 2)).unwrap();
        let mut s = WpState::zeros(&f);
        assert_eq!(wp_sweep(&f, &mut s), 0);
        assert!(s.warnings().iter().all(|&w| w == 0));
    }

    #[test]
    fn lone_clause_warnings_die() {
        let f = Formula::new(3, 3, vec![vec![Literal::pos(0), Literal::neg(1), Literal::pos(2)]]).unwrap();
        let mut s = wp_init(&f, 0);
        for p in 0..3 {
            s.set_warning(0, p, true);
        }
        wp_sweep(&f, &mut s);
        assert!(s.warnings().iter().all(|&w| w == 0));
    }

    #[test]
    fn init_is_seeded_and_sized() {
        let inst = gen_planted(&GenConfig::planted(200, 3, 2000, 1)).unwrap();
        let a = wp_init(&inst.formula, 5);
        assert_eq!(a.n_edges(), 6000);
        assert_eq!(a, wp_init(&inst.formula, 5));
        assert_ne!(a, wp_init(&inst.formula, 6));
        let ones = a.warnings().iter().filter(|&&w| w == 1).count();
        assert!((2700..3300).contains(&ones));
    }

    #[test]
    fn converged_state_is_stable() {
        let inst = gen_planted(&GenConfig::planted(200, 3, 2000, 4)).unwrap();
        let out = wp_run(&inst.formula, 9, 50);
        assert!(out.converged);
        let mut again = out.state.clone();
        assert_eq!(wp_sweep(&inst.formula, &mut again), 0);
        assert_eq!(again.warnings(), out.state.warnings());
        for (i, &h) in out.local_fields.iter().enumerate() {
            assert!(h.unsigned_abs() as usize <= inst.formula.degree(i));
            assert_eq!(out.partial.get(i) == Value::Unset, h == 0);
        }
    }

    #[test]
    fn async_schedule_converges_on_planted() {
        let inst = gen_planted(&GenConfig::planted(200, 3, 2000, 8)).unwrap();
        let params = WpParams {
            max_iters: Some(30),
            schedule: Schedule::RandomAsync,
        };
        let out = wp_run_with(&inst.formula, 2, &params);
        assert!(out.converged);
        assert_eq!(out, wp_run_with(&inst.formula, 2, &params));
        let mut again = out.state.clone();
        assert_eq!(wp_sweep(&inst.formula, &mut again), 0);
    }

    #[test]
    fn cutoff_default() {
        assert_eq!(default_max_iters(200), 11);
        assert_eq!(default_max_iters(10), 10);
        assert_eq!(default_max_iters(100_000), 24);
        assert_eq!("random-async".parse::<Schedule>(), Ok(Schedule::RandomAsync));
        assert!("nope".parse::<Schedule>().is_err());
    }

    proptest! {
        #[test]
        fn sweep_matches_reference(n in 3usize..12, m in 0usize..30, seed in any::<u64>(), init in any::<u64>()) {
            let f = gen_uniform(&GenConfig::uniform(n, 3, m, seed)).unwrap();
            let mut s = wp_init(&f, init);
            for _ in 0..3 {
                let expected = reference_sweep(&f, s.warnings());
                let before = s.warnings().to_vec();
                let changed = wp_sweep(&f, &mut s);
                prop_assert_eq!(s.warnings(), expected.as_slice());
                let diff = before.iter().zip(s.warnings()).filter(|(a, b)| a != b).count();
                prop_assert_eq!(changed, diff);
            }
        }
    }
}
