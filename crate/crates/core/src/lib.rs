//! A random K-SAT laboratory.
//!
//! * [`formula`] and [`dimacs`]: instances, assignments and their text form.
//! * [`generators`]: uniform, planted and energy-planted ensembles.
//! * [`oracle`]: exhaustive ground truth for `N <= 24`.
//! * [`wp`]: Warning Propagation and the decision procedure built on it.
//! * [`theory`]: replica-symmetric cavity predictions.
//! * [`exp`]: experiments comparing the two.
//!
//! ```
//! use warpsat::generators::{gen_planted, GenConfig};
//! use warpsat::wp::{wp_decide, DecideParams};
//!
//! let inst = gen_planted(&GenConfig::planted(200, 3, 2000, 1)).unwrap();
//! let d = wp_decide(&inst.formula, 7, &DecideParams::default());
//! assert!(d.verdict.is_sat());
//! ```

pub mod dimacs;
pub mod exp;
pub mod formula;
pub mod generators;
pub mod oracle;
pub mod rng;
pub mod theory;
pub mod wp;

pub use formula::{energy, flip_field, occurrences, Assignment, Formula, Literal, Value};
