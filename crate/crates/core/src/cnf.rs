//! 3-CNF formulas: DIMACS I/O, clause duplication, a DPLL oracle and a
//! seeded random generator.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// A literal: a 1-based variable index and a polarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub var: usize,
    pub positive: bool,
}

impl Literal {
    pub fn pos(var: usize) -> Self {
        Literal { var, positive: true }
    }

    pub fn neg(var: usize) -> Self {
        Literal { var, positive: false }
    }

    /// DIMACS encoding: `var` or `-var`.
    pub fn to_dimacs(self) -> i64 {
        if self.positive {
            self.var as i64
        } else {
            -(self.var as i64)
        }
    }

    pub fn from_dimacs(value: i64) -> Option<Self> {
        if value == 0 {
            return None;
        }
        let var = usize::try_from(value.unsigned_abs()).ok()?;
        Some(Literal { var, positive: value > 0 })
    }

    pub fn is_true_under(self, assignment: &Assignment) -> bool {
        assignment.value(self.var) == self.positive
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// Exactly three literal occurrences; repeats are allowed.
pub type Clause = [Literal; 3];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CnfError {
    #[error("formula must have at least one variable")]
    NoVariables,
    #[error("clause {clause} uses variable {var} outside 1..={num_vars}")]
    VariableOutOfRange { clause: usize, var: usize, num_vars: usize },
    #[error("line {line}: {message}")]
    Dimacs { line: usize, message: String },
    #[error("line {line}: {message}")]
    AssignmentLine { line: usize, message: String },
}

fn dimacs_err(line: usize, message: impl Into<String>) -> CnfError {
    CnfError::Dimacs { line, message: message.into() }
}

/// A 3-CNF formula over variables `1..=num_vars`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CnfFormula {
    num_vars: usize,
    clauses: Vec<Clause>,
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<Clause>) -> Result<Self, CnfError> {
        if num_vars == 0 {
            return Err(CnfError::NoVariables);
        }
        for (clause, lits) in clauses.iter().enumerate() {
            if let Some(lit) = lits.iter().find(|l| l.var == 0 || l.var > num_vars) {
                return Err(CnfError::VariableOutOfRange { clause, var: lit.var, num_vars });
            }
        }
        Ok(CnfFormula { num_vars, clauses })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// True iff every clause has a literal made true by `assignment`.
    pub fn is_satisfied_by(&self, assignment: &Assignment) -> bool {
        assignment.num_vars() == self.num_vars
            && self.clauses.iter().all(|c| c.iter().any(|l| l.is_true_under(assignment)))
    }

    /// Index of the first clause falsified by `assignment`, if any.
    pub fn first_falsified(&self, assignment: &Assignment) -> Option<usize> {
        self.clauses.iter().position(|c| !c.iter().any(|l| l.is_true_under(assignment)))
    }
}

/// A total truth assignment for variables `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    values: Vec<bool>,
}

impl Assignment {
    /// `values[k]` is the value of variable `k + 1`.
    pub fn new(values: Vec<bool>) -> Self {
        Assignment { values }
    }

    pub fn num_vars(&self) -> usize {
        self.values.len()
    }

    /// Value of the 1-based variable `var`.
    pub fn value(&self, var: usize) -> bool {
        self.values[var - 1]
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    /// All `2^n` assignments, in binary counting order (variable 1 is the
    /// least significant bit).
    pub fn enumerate_all(num_vars: usize) -> impl Iterator<Item = Assignment> {
        assert!(num_vars < usize::BITS as usize, "too many variables to enumerate");
        (0..1usize << num_vars).map(move |bits| Assignment::new((0..num_vars).map(|k| bits >> k & 1 == 1).collect()))
    }
}

impl fmt::Display for Assignment {
    /// Assignment line: signed indices in variable order, then `0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, &v) in self.values.iter().enumerate() {
            let var = k + 1;
            if v {
                write!(f, "{var} ")?;
            } else {
                write!(f, "-{var} ")?;
            }
        }
        f.write_str("0")
    }
}

/// Parses an assignment line for a formula with `num_vars` variables.
///
/// Accepts signed variable indices in any order, optionally terminated by
/// `0`; every variable must be listed exactly once.
pub fn parse_assignment(text: &str, num_vars: usize) -> Result<Assignment, CnfError> {
    let mut values: Vec<Option<bool>> = vec![None; num_vars];
    let mut terminated = false;
    let mut last_line = 1;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let body = raw.trim();
        if body.is_empty() || body.starts_with('c') || body.starts_with('#') {
            continue;
        }
        if body == "UNSAT" {
            return Err(CnfError::AssignmentLine { line, message: "input is UNSAT, not an assignment".into() });
        }
        for token in body.split_whitespace() {
            let err = |message: String| CnfError::AssignmentLine { line, message };
            if terminated {
                return Err(err(format!("unexpected token {token:?} after terminating 0")));
            }
            let value: i64 = token.parse().map_err(|_| err(format!("invalid literal {token:?}")))?;
            let Some(lit) = Literal::from_dimacs(value) else {
                terminated = true;
                continue;
            };
            if lit.var > num_vars {
                return Err(err(format!("variable {} outside 1..={num_vars}", lit.var)));
            }
            if values[lit.var - 1].replace(lit.positive).is_some() {
                return Err(err(format!("variable {} assigned twice", lit.var)));
            }
        }
    }
    let mut out = Vec::with_capacity(num_vars);
    for (k, v) in values.into_iter().enumerate() {
        match v {
            Some(v) => out.push(v),
            None => {
                return Err(CnfError::AssignmentLine {
                    line: last_line,
                    message: format!("variable {} is unassigned", k + 1),
                })
            }
        }
    }
    Ok(Assignment::new(out))
}

/// Parses strict 3-SAT DIMACS CNF.
///
/// Clauses may span lines. `c` lines are comments and a lone `%` ends the
/// clause section, as in the SATLIB benchmark files.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula, CnfError> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<Clause> = Vec::new();
    let mut pending: Vec<Literal> = Vec::new();
    let mut pending_line = 0;
    let mut last_line = 0;

    'lines: for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let body = raw.trim();
        if body.is_empty() || body.starts_with('c') {
            continue;
        }
        if body.starts_with('p') {
            if header.is_some() {
                return Err(dimacs_err(line, "duplicate problem line"));
            }
            let fields: Vec<&str> = body.split_whitespace().collect();
            let parse = |s: &str| s.parse::<usize>().ok();
            match fields.as_slice() {
                ["p", "cnf", n, m] => match (parse(n), parse(m)) {
                    (Some(0), Some(_)) => return Err(dimacs_err(line, "formula must have at least one variable")),
                    (Some(n), Some(m)) => header = Some((n, m)),
                    _ => return Err(dimacs_err(line, format!("malformed problem line {body:?}"))),
                },
                _ => return Err(dimacs_err(line, format!("malformed problem line {body:?}"))),
            }
            continue;
        }
        if body == "%" {
            break 'lines;
        }
        let Some((num_vars, _)) = header else {
            return Err(dimacs_err(line, "clause before `p cnf` problem line"));
        };
        for token in body.split_whitespace() {
            let value: i64 = token.parse().map_err(|_| dimacs_err(line, format!("invalid literal {token:?}")))?;
            if pending.is_empty() {
                pending_line = line;
            }
            match Literal::from_dimacs(value) {
                None => {
                    let lits = std::mem::take(&mut pending);
                    let clause: Clause = lits.as_slice().try_into().map_err(|_| {
                        dimacs_err(pending_line, format!("clause has {} literals; exactly 3 are required", lits.len()))
                    })?;
                    clauses.push(clause);
                }
                Some(lit) => {
                    if lit.var > num_vars {
                        return Err(dimacs_err(line, format!("literal {value} outside declared {num_vars} variables")));
                    }
                    pending.push(lit);
                }
            }
        }
    }

    let Some((num_vars, num_clauses)) = header else {
        return Err(dimacs_err(last_line.max(1), "missing `p cnf` problem line"));
    };
    if !pending.is_empty() {
        return Err(dimacs_err(pending_line, "clause is not terminated by 0"));
    }
    if clauses.len() != num_clauses {
        return Err(dimacs_err(
            last_line.max(1),
            format!("header declares {num_clauses} clauses but {} were found", clauses.len()),
        ));
    }
    CnfFormula::new(num_vars, clauses)
}

/// Writes a formula as DIMACS CNF.
pub fn write_dimacs(formula: &CnfFormula) -> String {
    let mut out = format!("p cnf {} {}\n", formula.num_vars(), formula.num_clauses());
    for clause in formula.clauses() {
        for lit in clause {
            out.push_str(&lit.to_string());
            out.push(' ');
        }
        out.push_str("0\n");
    }
    out
}

/// Returns `Φ ∧ Φ`: the clause list followed by a copy of itself.
pub fn duplicate_clauses(formula: &CnfFormula) -> CnfFormula {
    let mut clauses = Vec::with_capacity(2 * formula.num_clauses());
    clauses.extend_from_slice(formula.clauses());
    clauses.extend_from_slice(formula.clauses());
    CnfFormula { num_vars: formula.num_vars, clauses }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatResult {
    Sat(Assignment),
    Unsat,
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Sat(_))
    }

    pub fn assignment(&self) -> Option<&Assignment> {
        match self {
            SatResult::Sat(a) => Some(a),
            SatResult::Unsat => None,
        }
    }
}

impl fmt::Display for SatResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SatResult::Sat(a) => write!(f, "{a}"),
            SatResult::Unsat => f.write_str("UNSAT"),
        }
    }
}

/// Plain DPLL with unit propagation.
///
/// Branches on the lowest unassigned variable, `true` first, so the result
/// is a deterministic function of the formula. Variables left free once all
/// clauses are satisfied are set to `true`.
pub fn dpll_sat(formula: &CnfFormula) -> SatResult {
    let mut solver = Dpll { clauses: formula.clauses(), values: vec![None; formula.num_vars() + 1], trail: Vec::new() };
    if solver.search() {
        let values = solver.values[1..].iter().map(|v| v.unwrap_or(true)).collect();
        SatResult::Sat(Assignment::new(values))
    } else {
        SatResult::Unsat
    }
}

struct Dpll<'a> {
    clauses: &'a [Clause],
    values: Vec<Option<bool>>,
    trail: Vec<usize>,
}

enum ClauseState {
    Satisfied,
    Conflict,
    Unit(Literal),
    Open,
}

impl Dpll<'_> {
    fn assign(&mut self, lit: Literal) {
        self.values[lit.var] = Some(lit.positive);
        self.trail.push(lit.var);
    }

    fn undo_to(&mut self, mark: usize) {
        for var in self.trail.drain(mark..) {
            self.values[var] = None;
        }
    }

    fn clause_state(&self, clause: &Clause) -> ClauseState {
        let mut unassigned: Option<Literal> = None;
        let mut distinct_unassigned = 0;
        for &lit in clause {
            match self.values[lit.var] {
                Some(v) if v == lit.positive => return ClauseState::Satisfied,
                Some(_) => {}
                None => {
                    if unassigned != Some(lit) {
                        if unassigned.is_none() {
                            unassigned = Some(lit);
                        }
                        distinct_unassigned += 1;
                    }
                }
            }
        }
        match (distinct_unassigned, unassigned) {
            (0, _) => ClauseState::Conflict,
            (1, Some(lit)) => ClauseState::Unit(lit),
            _ => ClauseState::Open,
        }
    }

    /// Runs unit propagation to a fixpoint; false on conflict.
    fn propagate(&mut self) -> bool {
        loop {
            let mut changed = false;
            for clause in self.clauses {
                match self.clause_state(clause) {
                    ClauseState::Conflict => return false,
                    ClauseState::Unit(lit) => {
                        self.assign(lit);
                        changed = true;
                    }
                    ClauseState::Satisfied | ClauseState::Open => {}
                }
            }
            if !changed {
                return true;
            }
        }
    }

    fn search(&mut self) -> bool {
        if !self.propagate() {
            return false;
        }
        let Some(var) = (1..self.values.len()).find(|&v| self.values[v].is_none()) else {
            return true;
        };
        for value in [true, false] {
            let mark = self.trail.len();
            self.assign(Literal { var, positive: value });
            if self.search() {
                return true;
            }
            self.undo_to(mark);
        }
        false
    }
}

/// Random 3-CNF: every literal drawn uniformly from the `2n` literals, with
/// replacement. Deterministic in `seed`.
pub fn gen_cnf(num_vars: usize, num_clauses: usize, seed: u64) -> Result<CnfFormula, CnfError> {
    if num_vars == 0 {
        return Err(CnfError::NoVariables);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || {
        let code = rng.random_range(0..2 * num_vars);
        Literal { var: code / 2 + 1, positive: code % 2 == 0 }
    };
    let clauses = (0..num_clauses).map(|_| [draw(), draw(), draw()]).collect();
    CnfFormula::new(num_vars, clauses)
}
