//! Certificate translation across the reduction.
//!
//! [`ordering_from_assignment`] turns a truth assignment into an ordering of
//! the compiled family; when the assignment satisfies the source formula the
//! ordering is evolutionary. [`assignment_from_ordering`] goes the other way:
//! variable `i` is true iff `L i` is placed before `V i`. For orderings the
//! verifier accepts, the derived assignment satisfies the source formula.

use thiserror::Error;

use crate::cnf::Assignment;
use crate::reduction::{ReductionInstance, SetRole};
use crate::setfam::{Ordering, OrderingError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertificateError {
    #[error("assignment covers {got} variables but the instance has {expected}")]
    ArityMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Ordering(#[from] OrderingError),
}

/// Builds the five-phase ordering for `assignment`:
///
/// 1. `T`, `Tprime`;
/// 2. for each variable, `L i` if true else `Lbar i`;
/// 3. for each clause, `C j` then `Cprime j`;
/// 4. every `V i`;
/// 5. for each variable, the variable set not chosen in phase 2.
///
/// The assignment is not checked against the formula; run the verifier on
/// the result.
pub fn ordering_from_assignment(
    instance: &ReductionInstance,
    assignment: &Assignment,
) -> Result<Ordering, CertificateError> {
    let n = instance.num_vars();
    if assignment.num_vars() != n {
        return Err(CertificateError::ArityMismatch { expected: n, got: assignment.num_vars() });
    }
    let chosen = |i: usize, first: bool| {
        if assignment.value(i) == first {
            SetRole::L(i)
        } else {
            SetRole::Lbar(i)
        }
    };
    let mut roles = vec![SetRole::T, SetRole::Tprime];
    roles.extend((1..=n).map(|i| chosen(i, true)));
    roles.extend((1..=instance.num_clauses()).flat_map(|j| [SetRole::C(j), SetRole::Cprime(j)]));
    roles.extend((1..=n).map(SetRole::V));
    roles.extend((1..=n).map(|i| chosen(i, false)));
    Ok(Ordering::new(roles.into_iter().map(|r| instance.index_of(r)).collect()))
}

/// Which variable sets of one variable precede its verification set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EarlySets {
    pub positive: bool,
    pub negative: bool,
}

/// Details of an extraction: the early variable sets, the position of every
/// set, and the derived assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractionReport {
    /// Entry `i - 1` describes variable `i`.
    pub early_variable_sets: Vec<EarlySets>,
    /// `positions[set]` is the position of `set` in the ordering.
    pub positions: Vec<usize>,
    pub derived_assignment: Assignment,
}

impl ExtractionReport {
    /// Position of the set holding `role`.
    pub fn position_of(&self, instance: &ReductionInstance, role: SetRole) -> usize {
        self.positions[instance.index_of(role)]
    }

    /// Table of early variable sets, one line per variable.
    pub fn render_table(&self) -> String {
        let mark = |early: bool| if early { "before" } else { "after" };
        self.early_variable_sets
            .iter()
            .enumerate()
            .map(|(k, e)| {
                let i = k + 1;
                format!(
                    "x{i}: L {} V, Lbar {} V => {}\n",
                    mark(e.positive),
                    mark(e.negative),
                    self.derived_assignment.value(i)
                )
            })
            .collect()
    }
}

/// Extracts an assignment from an ordering of a compiled instance.
///
/// Works on any permutation; only verifier-accepted orderings carry the
/// guarantee that the assignment satisfies the source formula.
pub fn assignment_from_ordering(
    instance: &ReductionInstance,
    ordering: &Ordering,
) -> Result<(Assignment, ExtractionReport), CertificateError> {
    ordering.validate(instance.family().num_sets())?;
    let positions = ordering.position_of_each();
    let at = |role| positions[instance.index_of(role)];
    let early_variable_sets: Vec<EarlySets> = (1..=instance.num_vars())
        .map(|i| {
            let v = at(SetRole::V(i));
            EarlySets { positive: at(SetRole::L(i)) < v, negative: at(SetRole::Lbar(i)) < v }
        })
        .collect();
    let assignment = Assignment::new(early_variable_sets.iter().map(|e| e.positive).collect());
    let report = ExtractionReport { early_variable_sets, positions, derived_assignment: assignment.clone() };
    Ok((assignment, report))
}
