//! Evolutionary orderings of set families.
//!
//! A family of sets is *evolutionary* when its sets can be listed so that
//! every set contributes an element not covered by the sets before it, and
//! every set but the first shares an element with them. This crate provides:
//!
//! - [`setfam`]: the family/ordering data model, the linear-time verifier and
//!   the `.evoset` / ordering file formats;
//! - [`cnf`]: 3-CNF formulas, DIMACS I/O, clause duplication, a DPLL oracle
//!   and a random formula generator;
//! - [`reduction`]: the gadget compiler from 3-CNF to evolutionary ordering
//!   instances, plus the role-map file format;
//! - [`certificates`]: translation between satisfying assignments and
//!   evolutionary orderings of reduced instances;
//! - [`search`]: an exact memoized solver, a permutation brute-force oracle and
//!   a random family generator;
//! - [`cli`]: the `evoorder` command-line front end.

pub mod certificates;
pub mod cli;
pub mod cnf;
pub mod reduction;
pub mod search;
pub mod setfam;

pub use certificates::{assignment_from_ordering, ordering_from_assignment, ExtractionReport};
pub use cnf::{Assignment, CnfFormula, Literal, SatResult};
pub use reduction::{build_instance, ReductionInstance, SetRole};
pub use search::{brute_force, decide, precheck, Verdict};
pub use setfam::{check_evolutionary, CheckReport, Ordering, SetFamily};
