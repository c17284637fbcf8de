//! Gadget reduction from 3-CNF formulas to evolutionary ordering instances.
//!
//! For a formula over `n` variables with `m` clauses the compiled family has
//! `2 + 3n + 2m` sets:
//!
//! | role        | members                                                 |
//! |-------------|---------------------------------------------------------|
//! | `T`         | `tau`                                                   |
//! | `Tprime`    | `tau`, `t{i}`, `nt{i}` for every variable               |
//! | `L i`       | `x{i}`, `t{i}`, `f{i}`, one `l{i}.{h}` per positive occurrence |
//! | `Lbar i`    | `nx{i}`, `nt{i}`, `nf{i}`, one `nl{i}.{h}` per negative occurrence |
//! | `V i`       | `x{i}`, `nx{i}`, `c{j}`, `cp{j}` for every clause       |
//! | `C j`       | the three occurrence elements of clause `j`, `c{j}`     |
//! | `Cprime j`  | `c{j}`, `cp{j}`                                         |
//!
//! Sets are laid out as `T`, `Tprime`, then `(L i, Lbar i, V i)` for each
//! variable, then `(C j, Cprime j)` for each clause. Occurrence number `h`
//! counts the occurrences of one literal in clause order, starting at 1.
//!
//! The role map (see [`serialize_rolemap`]) records the layout and the
//! occurrence elements of every clause; it carries enough information to
//! rebuild the family.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::cnf::{Clause, CnfError, CnfFormula, Literal};
use crate::setfam::{FamilyError, SetFamily};

/// A universe element of a compiled instance. Indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GadgetElement {
    AssignPos(usize),
    AssignNeg(usize),
    Trigger(usize),
    TriggerBar(usize),
    Tau,
    Free(usize),
    FreeBar(usize),
    LitPos(usize, usize),
    LitNeg(usize, usize),
    Clause(usize),
    ClausePrime(usize),
}

impl GadgetElement {
    pub fn literal(occ: Occurrence) -> Self {
        if occ.positive {
            GadgetElement::LitPos(occ.var, occ.h)
        } else {
            GadgetElement::LitNeg(occ.var, occ.h)
        }
    }
}

impl fmt::Display for GadgetElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GadgetElement::AssignPos(i) => write!(f, "x{i}"),
            GadgetElement::AssignNeg(i) => write!(f, "nx{i}"),
            GadgetElement::Trigger(i) => write!(f, "t{i}"),
            GadgetElement::TriggerBar(i) => write!(f, "nt{i}"),
            GadgetElement::Tau => f.write_str("tau"),
            GadgetElement::Free(i) => write!(f, "f{i}"),
            GadgetElement::FreeBar(i) => write!(f, "nf{i}"),
            GadgetElement::LitPos(i, h) => write!(f, "l{i}.{h}"),
            GadgetElement::LitNeg(i, h) => write!(f, "nl{i}.{h}"),
            GadgetElement::Clause(j) => write!(f, "c{j}"),
            GadgetElement::ClausePrime(j) => write!(f, "cp{j}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("not a gadget element token: {0:?}")]
pub struct BadElementToken(pub String);

fn parse_index(s: &str) -> Option<usize> {
    if s.is_empty() || s.starts_with('0') || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

impl FromStr for GadgetElement {
    type Err = BadElementToken;

    fn from_str(token: &str) -> Result<Self, Self::Err> {
        let bad = || BadElementToken(token.to_string());
        if token == "tau" {
            return Ok(GadgetElement::Tau);
        }
        let pair = |rest: &str| -> Option<(usize, usize)> {
            let (i, h) = rest.split_once('.')?;
            Some((parse_index(i)?, parse_index(h)?))
        };
        // Longest prefixes first: "nl" before "nx", "cp" before "c".
        let parsed = if let Some(rest) = token.strip_prefix("nl") {
            pair(rest).map(|(i, h)| GadgetElement::LitNeg(i, h))
        } else if let Some(rest) = token.strip_prefix("nx") {
            parse_index(rest).map(GadgetElement::AssignNeg)
        } else if let Some(rest) = token.strip_prefix("nt") {
            parse_index(rest).map(GadgetElement::TriggerBar)
        } else if let Some(rest) = token.strip_prefix("nf") {
            parse_index(rest).map(GadgetElement::FreeBar)
        } else if let Some(rest) = token.strip_prefix("cp") {
            parse_index(rest).map(GadgetElement::ClausePrime)
        } else if let Some(rest) = token.strip_prefix('l') {
            pair(rest).map(|(i, h)| GadgetElement::LitPos(i, h))
        } else if let Some(rest) = token.strip_prefix('x') {
            parse_index(rest).map(GadgetElement::AssignPos)
        } else if let Some(rest) = token.strip_prefix('t') {
            parse_index(rest).map(GadgetElement::Trigger)
        } else if let Some(rest) = token.strip_prefix('f') {
            parse_index(rest).map(GadgetElement::Free)
        } else if let Some(rest) = token.strip_prefix('c') {
            parse_index(rest).map(GadgetElement::Clause)
        } else {
            None
        };
        parsed.ok_or_else(bad)
    }
}

/// The gadget role of one set. Indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SetRole {
    T,
    Tprime,
    L(usize),
    Lbar(usize),
    V(usize),
    C(usize),
    Cprime(usize),
}

impl fmt::Display for SetRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SetRole::T => f.write_str("T"),
            SetRole::Tprime => f.write_str("Tprime"),
            SetRole::L(i) => write!(f, "L {i}"),
            SetRole::Lbar(i) => write!(f, "Lbar {i}"),
            SetRole::V(i) => write!(f, "V {i}"),
            SetRole::C(j) => write!(f, "C {j}"),
            SetRole::Cprime(j) => write!(f, "Cprime {j}"),
        }
    }
}

/// The `h`-th occurrence of a literal in the formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Occurrence {
    pub var: usize,
    pub positive: bool,
    pub h: usize,
}

impl Occurrence {
    pub fn literal(self) -> Literal {
        Literal { var: self.var, positive: self.positive }
    }

    pub fn element(self) -> GadgetElement {
        GadgetElement::literal(self)
    }
}

/// Numbers literal occurrences: per (variable, polarity), in clause order,
/// starting at 1.
pub fn number_occurrences(formula: &CnfFormula) -> Vec<[Occurrence; 3]> {
    let mut counts = vec![[0usize; 2]; formula.num_vars() + 1];
    formula
        .clauses()
        .iter()
        .map(|clause| {
            clause.map(|lit| {
                let slot = &mut counts[lit.var][usize::from(!lit.positive)];
                *slot += 1;
                Occurrence { var: lit.var, positive: lit.positive, h: *slot }
            })
        })
        .collect()
}

/// Set index of every role, and the inverse.
#[derive(Debug, Clone, PartialEq, Eq)]
struct RoleIndex {
    t: usize,
    t_prime: usize,
    l: Vec<usize>,
    lbar: Vec<usize>,
    v: Vec<usize>,
    c: Vec<usize>,
    c_prime: Vec<usize>,
}

impl RoleIndex {
    fn from_roles(roles: &[SetRole], n: usize, m: usize) -> Result<Self, RoleMapError> {
        const UNSET: usize = usize::MAX;
        let mut idx = RoleIndex {
            t: UNSET,
            t_prime: UNSET,
            l: vec![UNSET; n],
            lbar: vec![UNSET; n],
            v: vec![UNSET; n],
            c: vec![UNSET; m],
            c_prime: vec![UNSET; m],
        };
        for (set, &role) in roles.iter().enumerate() {
            let out_of_range = |k: usize, bound: usize| k == 0 || k > bound;
            let slot = match role {
                SetRole::T => &mut idx.t,
                SetRole::Tprime => &mut idx.t_prime,
                SetRole::L(i) | SetRole::Lbar(i) | SetRole::V(i) if out_of_range(i, n) => {
                    return Err(RoleMapError::RoleOutOfRange { role })
                }
                SetRole::C(j) | SetRole::Cprime(j) if out_of_range(j, m) => {
                    return Err(RoleMapError::RoleOutOfRange { role })
                }
                SetRole::L(i) => &mut idx.l[i - 1],
                SetRole::Lbar(i) => &mut idx.lbar[i - 1],
                SetRole::V(i) => &mut idx.v[i - 1],
                SetRole::C(j) => &mut idx.c[j - 1],
                SetRole::Cprime(j) => &mut idx.c_prime[j - 1],
            };
            if *slot != UNSET {
                return Err(RoleMapError::DuplicateRole { role });
            }
            *slot = set;
        }
        let missing = std::iter::once((idx.t, SetRole::T))
            .chain(std::iter::once((idx.t_prime, SetRole::Tprime)))
            .chain((1..=n).flat_map(|i| {
                [(idx.l[i - 1], SetRole::L(i)), (idx.lbar[i - 1], SetRole::Lbar(i)), (idx.v[i - 1], SetRole::V(i))]
            }))
            .chain((1..=m).flat_map(|j| [(idx.c[j - 1], SetRole::C(j)), (idx.c_prime[j - 1], SetRole::Cprime(j))]))
            .find(|&(set, _)| set == UNSET);
        match missing {
            Some((_, role)) => Err(RoleMapError::MissingRole { role }),
            None => Ok(idx),
        }
    }
}

/// A compiled instance: the family plus the role of every set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionInstance {
    family: SetFamily,
    roles: Vec<SetRole>,
    source: CnfFormula,
    occurrences: Vec<[Occurrence; 3]>,
    duplicated: bool,
    index: RoleIndex,
}

impl ReductionInstance {
    pub fn family(&self) -> &SetFamily {
        &self.family
    }

    /// Role of every set, indexed by set.
    pub fn roles(&self) -> &[SetRole] {
        &self.roles
    }

    pub fn role_of(&self, set: usize) -> SetRole {
        self.roles[set]
    }

    /// The formula the instance was compiled from (after any duplication).
    pub fn source(&self) -> &CnfFormula {
        &self.source
    }

    /// Occurrence triple of every clause, in clause order.
    pub fn occurrences(&self) -> &[[Occurrence; 3]] {
        &self.occurrences
    }

    /// Whether the caller declared the source as clause-duplicated.
    pub fn duplicated(&self) -> bool {
        self.duplicated
    }

    pub fn num_vars(&self) -> usize {
        self.source.num_vars()
    }

    pub fn num_clauses(&self) -> usize {
        self.source.num_clauses()
    }

    /// Set index of a role. Panics if the role's index is out of range.
    pub fn index_of(&self, role: SetRole) -> usize {
        match role {
            SetRole::T => self.index.t,
            SetRole::Tprime => self.index.t_prime,
            SetRole::L(i) => self.index.l[i - 1],
            SetRole::Lbar(i) => self.index.lbar[i - 1],
            SetRole::V(i) => self.index.v[i - 1],
            SetRole::C(j) => self.index.c[j - 1],
            SetRole::Cprime(j) => self.index.c_prime[j - 1],
        }
    }
}

fn standard_layout(n: usize, m: usize) -> Vec<SetRole> {
    let mut roles = Vec::with_capacity(2 + 3 * n + 2 * m);
    roles.push(SetRole::T);
    roles.push(SetRole::Tprime);
    for i in 1..=n {
        roles.extend([SetRole::L(i), SetRole::Lbar(i), SetRole::V(i)]);
    }
    for j in 1..=m {
        roles.extend([SetRole::C(j), SetRole::Cprime(j)]);
    }
    roles
}

/// Members of one gadget set.
fn gadget_set(role: SetRole, n: usize, occurrences: &[[Occurrence; 3]]) -> Vec<GadgetElement> {
    use GadgetElement as E;
    let m = occurrences.len();
    let literal_elements = |var: usize, positive: bool| {
        occurrences.iter().flatten().filter(move |o| o.var == var && o.positive == positive).map(|&o| o.element())
    };
    match role {
        SetRole::T => vec![E::Tau],
        SetRole::Tprime => {
            std::iter::once(E::Tau).chain((1..=n).flat_map(|i| [E::Trigger(i), E::TriggerBar(i)])).collect()
        }
        SetRole::L(i) => {
            [E::AssignPos(i), E::Trigger(i), E::Free(i)].into_iter().chain(literal_elements(i, true)).collect()
        }
        SetRole::Lbar(i) => {
            [E::AssignNeg(i), E::TriggerBar(i), E::FreeBar(i)].into_iter().chain(literal_elements(i, false)).collect()
        }
        SetRole::V(i) => [E::AssignPos(i), E::AssignNeg(i)]
            .into_iter()
            .chain((1..=m).flat_map(|j| [E::Clause(j), E::ClausePrime(j)]))
            .collect(),
        SetRole::C(j) => occurrences[j - 1].iter().map(|o| o.element()).chain(std::iter::once(E::Clause(j))).collect(),
        SetRole::Cprime(j) => vec![E::Clause(j), E::ClausePrime(j)],
    }
}

fn assemble(
    source: CnfFormula,
    occurrences: Vec<[Occurrence; 3]>,
    roles: Vec<SetRole>,
    duplicated: bool,
) -> Result<ReductionInstance, RoleMapError> {
    let n = source.num_vars();
    let m = source.num_clauses();
    let index = RoleIndex::from_roles(&roles, n, m)?;
    let sets: Vec<Vec<String>> =
        roles.iter().map(|&role| gadget_set(role, n, &occurrences).iter().map(ToString::to_string).collect()).collect();
    let labels = roles.iter().map(|r| Some(r.to_string().replace(' ', ""))).collect();
    let family =
        SetFamily::from_named_sets(sets).and_then(|f| f.with_set_names(labels)).map_err(RoleMapError::Family)?;
    Ok(ReductionInstance { family, roles, source, occurrences, duplicated, index })
}

/// Compiles `formula` into an evolutionary ordering instance.
///
/// `duplicated` records whether the caller already applied
/// [`duplicate_clauses`](crate::cnf::duplicate_clauses); the construction
/// itself does not depend on it.
pub fn build_instance(formula: &CnfFormula, duplicated: bool) -> ReductionInstance {
    let occurrences = number_occurrences(formula);
    let roles = standard_layout(formula.num_vars(), formula.num_clauses());
    assemble(formula.clone(), occurrences, roles, duplicated).expect("standard layout covers every role once")
}

/// Duplicates the clauses of `formula` and compiles the result.
pub fn reduce(formula: &CnfFormula) -> ReductionInstance {
    build_instance(&crate::cnf::duplicate_clauses(formula), true)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RoleMapError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing `{0}` header line")]
    MissingHeader(&'static str),
    #[error("set index {index} is outside the family's {num_sets} sets")]
    SetOutOfRange { index: usize, num_sets: usize },
    #[error("set {0} has no role")]
    SetWithoutRole(usize),
    #[error("set {0} is given more than one role")]
    SetRoleRepeated(usize),
    #[error("role `{role}` is missing")]
    MissingRole { role: SetRole },
    #[error("role `{role}` is assigned to more than one set")]
    DuplicateRole { role: SetRole },
    #[error("role `{role}` is out of range for the declared vars/clauses")]
    RoleOutOfRange { role: SetRole },
    #[error("clause {0} has no `occ` line")]
    MissingOccurrences(usize),
    #[error("occurrence tokens of clause {clause} do not follow clause-order numbering")]
    InconsistentOccurrences { clause: usize },
    #[error("set {set} ({role}) does not match the family")]
    FamilyMismatch { set: usize, role: SetRole },
    #[error("family has {family} sets but the role map describes {map}")]
    SetCountMismatch { family: usize, map: usize },
    #[error(transparent)]
    Formula(#[from] CnfError),
    #[error(transparent)]
    Family(FamilyError),
}

/// Writes the role-map file for `instance`.
pub fn serialize_rolemap(instance: &ReductionInstance) -> String {
    let mut out = String::new();
    out.push_str(&format!("vars {}\n", instance.num_vars()));
    out.push_str(&format!("clauses {}\n", instance.num_clauses()));
    out.push_str(&format!("duplicated {}\n", if instance.duplicated { "yes" } else { "no" }));
    for (set, role) in instance.roles.iter().enumerate() {
        out.push_str(&format!("set {set} {role}\n"));
    }
    for (j, occ) in instance.occurrences.iter().enumerate() {
        out.push_str(&format!("occ {} {} {} {}\n", j + 1, occ[0].element(), occ[1].element(), occ[2].element()));
    }
    out
}

/// Parses a role map and rebuilds the instance it describes.
///
/// The source formula is recovered from the `occ` lines; the family is
/// rebuilt from the roles.
pub fn parse_rolemap_standalone(text: &str) -> Result<ReductionInstance, RoleMapError> {
    let mut vars = None;
    let mut clauses = None;
    let mut duplicated = false;
    let mut set_roles: Vec<(usize, usize, SetRole)> = Vec::new();
    let mut occ_lines: Vec<(usize, usize, [GadgetElement; 3])> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let syntax = |message: String| RoleMapError::Syntax { line, message };
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        let number = |s: &str| s.parse::<usize>().map_err(|_| syntax(format!("invalid number {s:?}")));
        match fields.as_slice() {
            ["vars", n] => vars = Some(number(n)?),
            ["clauses", m] => clauses = Some(number(m)?),
            ["duplicated", flag] => {
                duplicated = match *flag {
                    "yes" => true,
                    "no" => false,
                    other => return Err(syntax(format!("expected yes or no, got {other:?}"))),
                }
            }
            ["set", index, role @ ..] => {
                let index = number(index)?;
                let role = match role {
                    ["T"] => SetRole::T,
                    ["Tprime"] => SetRole::Tprime,
                    [kind, k] => {
                        let k = number(k)?;
                        match *kind {
                            "L" => SetRole::L(k),
                            "Lbar" => SetRole::Lbar(k),
                            "V" => SetRole::V(k),
                            "C" => SetRole::C(k),
                            "Cprime" => SetRole::Cprime(k),
                            other => return Err(syntax(format!("unknown role {other:?}"))),
                        }
                    }
                    _ => return Err(syntax(format!("malformed set line {body:?}"))),
                };
                set_roles.push((line, index, role));
            }
            ["occ", j, a, b, c] => {
                let j = number(j)?;
                let mut elements = [GadgetElement::Tau; 3];
                for (slot, tok) in elements.iter_mut().zip([a, b, c]) {
                    *slot = tok.parse().map_err(|e: BadElementToken| syntax(e.to_string()))?;
                    if !matches!(slot, GadgetElement::LitPos(..) | GadgetElement::LitNeg(..)) {
                        return Err(syntax(format!("{tok:?} is not a literal element")));
                    }
                }
                occ_lines.push((line, j, elements));
            }
            _ => return Err(syntax(format!("unrecognized line {body:?}"))),
        }
    }

    let n = vars.ok_or(RoleMapError::MissingHeader("vars"))?;
    let m = clauses.ok_or(RoleMapError::MissingHeader("clauses"))?;
    let num_sets = 2 + 3 * n + 2 * m;

    let mut roles: Vec<Option<SetRole>> = vec![None; num_sets];
    for &(_, index, role) in &set_roles {
        if index >= num_sets {
            return Err(RoleMapError::SetOutOfRange { index, num_sets });
        }
        if roles[index].replace(role).is_some() {
            return Err(RoleMapError::SetRoleRepeated(index));
        }
    }
    let roles: Vec<SetRole> = roles
        .into_iter()
        .enumerate()
        .map(|(set, role)| role.ok_or(RoleMapError::SetWithoutRole(set)))
        .collect::<Result<_, _>>()?;
    // Surface missing or duplicated roles before the occurrence checks.
    RoleIndex::from_roles(&roles, n, m)?;

    let mut by_clause: Vec<Option<[GadgetElement; 3]>> = vec![None; m];
    for &(line, j, elements) in &occ_lines {
        if j == 0 || j > m {
            return Err(RoleMapError::Syntax { line, message: format!("clause {j} outside 1..={m}") });
        }
        if by_clause[j - 1].replace(elements).is_some() {
            return Err(RoleMapError::Syntax { line, message: format!("clause {j} listed twice") });
        }
    }
    let mut source_clauses: Vec<Clause> = Vec::with_capacity(m);
    for (k, elements) in by_clause.iter().enumerate() {
        let elements = elements.ok_or(RoleMapError::MissingOccurrences(k + 1))?;
        source_clauses.push(elements.map(|e| match e {
            GadgetElement::LitPos(i, _) => Literal::pos(i),
            GadgetElement::LitNeg(i, _) => Literal::neg(i),
            _ => unreachable!("checked while parsing"),
        }));
    }
    let source = CnfFormula::new(n, source_clauses)?;
    let occurrences = number_occurrences(&source);
    for (k, (occ, listed)) in occurrences.iter().zip(&by_clause).enumerate() {
        let listed = listed.expect("checked above");
        if occ.map(Occurrence::element) != listed {
            return Err(RoleMapError::InconsistentOccurrences { clause: k + 1 });
        }
    }
    assemble(source, occurrences, roles, duplicated)
}

/// Parses a role map and checks it against an already-loaded family.
///
/// Sets are compared by element names; labels are ignored.
pub fn parse_rolemap(text: &str, family: &SetFamily) -> Result<ReductionInstance, RoleMapError> {
    let instance = parse_rolemap_standalone(text)?;
    let rebuilt = instance.family();
    if rebuilt.num_sets() != family.num_sets() {
        return Err(RoleMapError::SetCountMismatch { family: family.num_sets(), map: rebuilt.num_sets() });
    }
    for set in 0..family.num_sets() {
        let given: HashSet<&str> = family.set_element_names(set).collect();
        let expected: HashSet<&str> = rebuilt.set_element_names(set).collect();
        if given != expected {
            return Err(RoleMapError::FamilyMismatch { set, role: instance.role_of(set) });
        }
    }
    Ok(instance)
}
