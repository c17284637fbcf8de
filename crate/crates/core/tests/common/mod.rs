//! Oracles shared by the integration tests. None of them call into the
//! code paths they are used to check.

#![allow(dead_code)]

use std::collections::BTreeSet;

use evoorder::cnf::{Assignment, CnfFormula};
use evoorder::reduction::{ReductionInstance, SetRole};
use evoorder::setfam::SetFamily;

/// Every clause has a literal made true by `values` (`values[k]` is variable `k + 1`).
pub fn satisfies(formula: &CnfFormula, values: &[bool]) -> bool {
    formula.clauses().iter().all(|c| c.iter().any(|l| values[l.var - 1] == l.positive))
}

/// Satisfiability by trying all 2^n assignments.
pub fn truth_table_sat(formula: &CnfFormula) -> bool {
    let n = formula.num_vars();
    (0u32..1 << n).any(|bits| {
        let values: Vec<bool> = (0..n).map(|k| bits >> k & 1 == 1).collect();
        satisfies(formula, &values)
    })
}

/// All satisfying assignments, as bit masks.
pub fn satisfying_masks(formula: &CnfFormula) -> Vec<u32> {
    let n = formula.num_vars();
    (0u32..1 << n)
        .filter(|bits| {
            let values: Vec<bool> = (0..n).map(|k| bits >> k & 1 == 1).collect();
            satisfies(formula, &values)
        })
        .collect()
}

/// Outcome of re-evaluating the definition on a fixed order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefinitionOutcome {
    Accepted,
    /// First failing position and which condition failed first (new before old).
    Rejected {
        position: usize,
        missing_new: bool,
    },
}

/// Recomputes the prefix union from scratch at every position and evaluates
/// both set-inclusion conditions with ordered sets.
pub fn definition_check(sets: &[BTreeSet<usize>], order: &[usize]) -> DefinitionOutcome {
    for (i, &s) in order.iter().enumerate() {
        let prefix: BTreeSet<usize> = order[..i].iter().flat_map(|&p| sets[p].iter().copied()).collect();
        let current = &sets[s];
        if current.is_subset(&prefix) {
            return DefinitionOutcome::Rejected { position: i, missing_new: true };
        }
        if i > 0 && current.is_disjoint(&prefix) {
            return DefinitionOutcome::Rejected { position: i, missing_new: false };
        }
    }
    DefinitionOutcome::Accepted
}

pub fn sets_of(family: &SetFamily) -> Vec<BTreeSet<usize>> {
    family.sets().iter().map(|s| s.iter().copied().collect()).collect()
}

/// Heap's algorithm over all orders; true if any passes the definition.
pub fn any_order_accepted(sets: &[BTreeSet<usize>]) -> bool {
    fn heap(k: usize, a: &mut Vec<usize>, sets: &[BTreeSet<usize>]) -> bool {
        if k <= 1 {
            return definition_check(sets, a) == DefinitionOutcome::Accepted;
        }
        for i in 0..k {
            if heap(k - 1, a, sets) {
                return true;
            }
            if k.is_multiple_of(2) {
                a.swap(i, k - 1);
            } else {
                a.swap(0, k - 1);
            }
        }
        false
    }
    let mut a: Vec<usize> = (0..sets.len()).collect();
    if a.is_empty() {
        return true;
    }
    heap(a.len(), &mut a, sets)
}

/// Violations of the structural facts every accepted ordering of a compiled
/// instance must have. Empty when all hold.
pub fn only_if_fact_violations(instance: &ReductionInstance, order: &[usize]) -> Vec<String> {
    let mut pos = vec![0; order.len()];
    for (p, &s) in order.iter().enumerate() {
        pos[s] = p;
    }
    let at = |role: SetRole| pos[instance.index_of(role)];
    let n = instance.num_vars();
    let m = instance.num_clauses();
    let mut out = Vec::new();
    if at(SetRole::T) != 0 {
        out.push(format!("T at position {}", at(SetRole::T)));
    }
    for j in 1..=m {
        for i in 1..=n {
            if at(SetRole::Cprime(j)) > at(SetRole::V(i)) {
                out.push(format!("Cprime {j} after V {i}"));
            }
        }
        if at(SetRole::C(j)) > at(SetRole::Cprime(j)) {
            out.push(format!("C {j} after Cprime {j}"));
        }
    }
    for i in 1..=n {
        let v = at(SetRole::V(i));
        if at(SetRole::L(i)) < v && at(SetRole::Lbar(i)) < v {
            out.push(format!("both L {i} and Lbar {i} before V {i}"));
        }
    }
    out
}

/// The assignment read off an ordering: `x_i` true iff `L i` precedes `V i`.
pub fn read_assignment(instance: &ReductionInstance, order: &[usize]) -> Vec<bool> {
    let p = |role: SetRole| order.iter().position(|&s| s == instance.index_of(role)).unwrap();
    (1..=instance.num_vars()).map(|i| p(SetRole::L(i)) < p(SetRole::V(i))).collect()
}

pub fn assignment_values(a: &Assignment) -> Vec<bool> {
    a.values().to_vec()
}

/// Violations of the counting identities, element multiplicities and subset
/// relations of a compiled instance, checked by scanning the family.
pub fn structural_violations(instance: &ReductionInstance) -> Vec<String> {
    use evoorder::reduction::GadgetElement as E;

    let family = instance.family();
    let formula = instance.source();
    let n = formula.num_vars();
    let m = formula.num_clauses();
    let mut out = Vec::new();

    if family.num_sets() != 2 + 3 * n + 2 * m {
        out.push(format!("{} sets, expected {}", family.num_sets(), 2 + 3 * n + 2 * m));
    }
    if family.universe_size() != 6 * n + 1 + 5 * m {
        out.push(format!("{} elements, expected {}", family.universe_size(), 6 * n + 1 + 5 * m));
    }

    // Clause holding the h-th occurrence of each literal, counted afresh.
    let mut occurrence_clause = std::collections::HashMap::new();
    let mut counts = std::collections::HashMap::new();
    for (j, clause) in formula.clauses().iter().enumerate() {
        for lit in clause {
            let h = counts.entry((lit.var, lit.positive)).or_insert(0usize);
            *h += 1;
            occurrence_clause.insert((lit.var, lit.positive, *h), j + 1);
        }
    }

    let all_v: Vec<SetRole> = (1..=n).map(SetRole::V).collect();
    for element in family.universe() {
        let kind: E = match element.name.parse() {
            Ok(k) => k,
            Err(_) => {
                out.push(format!("unrecognized element {}", element.name));
                continue;
            }
        };
        let mut expected: Vec<SetRole> = match kind {
            E::Tau => vec![SetRole::T, SetRole::Tprime],
            E::Trigger(i) => vec![SetRole::Tprime, SetRole::L(i)],
            E::TriggerBar(i) => vec![SetRole::Tprime, SetRole::Lbar(i)],
            E::Free(i) => vec![SetRole::L(i)],
            E::FreeBar(i) => vec![SetRole::Lbar(i)],
            E::AssignPos(i) => vec![SetRole::L(i), SetRole::V(i)],
            E::AssignNeg(i) => vec![SetRole::Lbar(i), SetRole::V(i)],
            E::LitPos(i, h) | E::LitNeg(i, h) => {
                let positive = matches!(kind, E::LitPos(..));
                match occurrence_clause.get(&(i, positive, h)) {
                    Some(&j) => vec![if positive { SetRole::L(i) } else { SetRole::Lbar(i) }, SetRole::C(j)],
                    None => {
                        out.push(format!("literal element {} has no occurrence", element.name));
                        continue;
                    }
                }
            }
            E::Clause(j) => [SetRole::C(j), SetRole::Cprime(j)].into_iter().chain(all_v.iter().copied()).collect(),
            E::ClausePrime(j) => std::iter::once(SetRole::Cprime(j)).chain(all_v.iter().copied()).collect(),
        };
        let mut actual: Vec<SetRole> = (0..family.num_sets())
            .filter(|&s| family.set(s).contains(&element.id))
            .map(|s| instance.role_of(s))
            .collect();
        let key = |r: &SetRole| r.to_string();
        expected.sort_by_key(key);
        actual.sort_by_key(key);
        if expected != actual {
            out.push(format!("{} in {:?}, expected {:?}", element.name, actual, expected));
        }
    }

    let members = |role: SetRole| -> BTreeSet<usize> { family.set(instance.index_of(role)).iter().copied().collect() };
    let cprime_union: BTreeSet<usize> = (1..=m).flat_map(|j| members(SetRole::Cprime(j))).collect();
    for i in 1..=n {
        let v = members(SetRole::V(i));
        for j in 1..=m {
            let cp = members(SetRole::Cprime(j));
            if !(cp.is_subset(&v) && cp != v) {
                out.push(format!("Cprime {j} not a proper subset of V {i}"));
            }
        }
        let cover: BTreeSet<usize> = members(SetRole::L(i))
            .union(&members(SetRole::Lbar(i)))
            .copied()
            .chain(cprime_union.iter().copied())
            .collect();
        if !v.is_subset(&cover) {
            out.push(format!("V {i} not covered by L, Lbar and the Cprime sets"));
        }
    }

    // With a uniform occurrence count k for all 2n literals, 2kn = 3m.
    let per_literal: Vec<usize> =
        (1..=n).flat_map(|i| [true, false].map(|p| *counts.get(&(i, p)).unwrap_or(&0))).collect();
    if per_literal.windows(2).all(|w| w[0] == w[1]) {
        let k = per_literal[0];
        if 2 * k * n != 3 * m {
            out.push(format!("uniform k={k} but 2kn={} != 3m={}", 2 * k * n, 3 * m));
        }
    }
    out
}
