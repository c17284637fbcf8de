//! Set families, orderings and the evolutionary-ordering verifier.
//!
//! A [`SetFamily`] is a universe of named elements (interned to dense ids)
//! together with an indexed list of element sets. An [`Ordering`] lists every
//! set index exactly once. [`check_evolutionary`] scans an ordering while
//! maintaining the running union of covered elements and reports, for every
//! step, the lowest-id new element and the lowest-id old element.
//!
//! # File formats
//!
//! Family files (`.evoset`) hold one set per line, elements separated by
//! whitespace. `#` starts a comment; blank lines are ignored. A comment
//! trailing a non-empty set line is kept as that set's label. The empty set is
//! written as the single token `{}`.
//!
//! Ordering files hold whitespace-separated 0-based set indices.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// Dense element id, `0..|U|`.
pub type ElementId = usize;

/// Token used in family files for a set with no elements.
pub const EMPTY_SET_TOKEN: &str = "{}";

/// A universe symbol.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Element {
    pub id: ElementId,
    pub name: String,
}

/// Errors raised while building or parsing a family.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FamilyError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("invalid element name {name:?}: {reason}")]
    InvalidName { name: String, reason: &'static str },
    #[error("duplicate element name {0:?} in universe")]
    DuplicateName(String),
    #[error("set {set} references element id {id} outside a universe of {size}")]
    ElementOutOfRange { set: usize, id: ElementId, size: usize },
    #[error("invalid label for set {set}: {reason}")]
    InvalidLabel { set: usize, reason: &'static str },
    #[error("expected {expected} set labels, got {got}")]
    LabelCount { expected: usize, got: usize },
}

/// Non-fatal observations made while parsing a family file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseWarning {
    DuplicateElement { line: usize, name: String },
}

impl fmt::Display for ParseWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseWarning::DuplicateElement { line, name } => {
                write!(f, "line {line}: duplicate element {name:?} ignored")
            }
        }
    }
}

fn validate_name(name: &str) -> Result<(), FamilyError> {
    let reason = if name.is_empty() {
        Some("empty")
    } else if name.chars().any(char::is_whitespace) {
        Some("contains whitespace")
    } else if name.contains('#') {
        Some("contains '#'")
    } else if name == EMPTY_SET_TOKEN {
        Some("reserved for the empty set")
    } else {
        None
    };
    match reason {
        Some(reason) => Err(FamilyError::InvalidName { name: name.to_string(), reason }),
        None => Ok(()),
    }
}

/// A family of subsets of a finite universe.
///
/// Sets are stored as strictly increasing element-id lists. Sets may repeat
/// and may be empty.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SetFamily {
    universe: Vec<Element>,
    sets: Vec<Vec<ElementId>>,
    set_names: Vec<Option<String>>,
    lookup: HashMap<String, ElementId>,
}

impl SetFamily {
    /// Builds a family from an explicit universe and element-id sets.
    pub fn new(universe: Vec<String>, sets: Vec<Vec<ElementId>>) -> Result<Self, FamilyError> {
        let mut lookup = HashMap::with_capacity(universe.len());
        let mut elements = Vec::with_capacity(universe.len());
        for (id, name) in universe.into_iter().enumerate() {
            validate_name(&name)?;
            if lookup.insert(name.clone(), id).is_some() {
                return Err(FamilyError::DuplicateName(name));
            }
            elements.push(Element { id, name });
        }
        let size = elements.len();
        let mut normalized = Vec::with_capacity(sets.len());
        for (set, mut members) in sets.into_iter().enumerate() {
            if let Some(&id) = members.iter().find(|&&id| id >= size) {
                return Err(FamilyError::ElementOutOfRange { set, id, size });
            }
            members.sort_unstable();
            members.dedup();
            normalized.push(members);
        }
        let set_names = vec![None; normalized.len()];
        Ok(SetFamily { universe: elements, sets: normalized, set_names, lookup })
    }

    /// Builds a family from sets of element names, interning elements in
    /// first-appearance order. Families built this way round-trip exactly
    /// through [`serialize_family`] and [`parse_family`].
    pub fn from_named_sets<I, S, N>(sets: I) -> Result<Self, FamilyError>
    where
        I: IntoIterator<Item = S>,
        S: IntoIterator<Item = N>,
        N: AsRef<str>,
    {
        let mut builder = Interner::default();
        let mut id_sets = Vec::new();
        for set in sets {
            let mut members = Vec::new();
            for name in set {
                members.push(builder.intern(name.as_ref())?);
            }
            id_sets.push(members);
        }
        SetFamily::new(builder.names, id_sets)
    }

    /// Attaches a label to every set. Labels must be single-line and free of
    /// surrounding whitespace so they survive serialization.
    pub fn with_set_names(mut self, names: Vec<Option<String>>) -> Result<Self, FamilyError> {
        if names.len() != self.sets.len() {
            return Err(FamilyError::LabelCount { expected: self.sets.len(), got: names.len() });
        }
        for (set, name) in names.iter().enumerate() {
            if let Some(name) = name {
                let reason = if name.is_empty() {
                    Some("empty")
                } else if name.contains('\n') || name.contains('\r') {
                    Some("contains a line break")
                } else if name.trim() != name {
                    Some("has surrounding whitespace")
                } else {
                    None
                };
                if let Some(reason) = reason {
                    return Err(FamilyError::InvalidLabel { set, reason });
                }
            }
        }
        self.set_names = names;
        Ok(self)
    }

    pub fn universe(&self) -> &[Element] {
        &self.universe
    }

    pub fn universe_size(&self) -> usize {
        self.universe.len()
    }

    pub fn sets(&self) -> &[Vec<ElementId>] {
        &self.sets
    }

    pub fn set(&self, index: usize) -> &[ElementId] {
        &self.sets[index]
    }

    pub fn num_sets(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn set_name(&self, index: usize) -> Option<&str> {
        self.set_names.get(index).and_then(|n| n.as_deref())
    }

    pub fn set_names(&self) -> &[Option<String>] {
        &self.set_names
    }

    pub fn element_name(&self, id: ElementId) -> &str {
        &self.universe[id].name
    }

    pub fn element_id(&self, name: &str) -> Option<ElementId> {
        self.lookup.get(name).copied()
    }

    /// Total number of element occurrences over all sets.
    pub fn total_size(&self) -> usize {
        self.sets.iter().map(Vec::len).sum()
    }

    /// Element names of one set, in id order.
    pub fn set_element_names(&self, index: usize) -> impl Iterator<Item = &str> + '_ {
        self.sets[index].iter().map(move |&id| self.element_name(id))
    }
}

#[derive(Default)]
struct Interner {
    names: Vec<String>,
    ids: HashMap<String, ElementId>,
}

impl Interner {
    fn intern(&mut self, name: &str) -> Result<ElementId, FamilyError> {
        if let Some(&id) = self.ids.get(name) {
            return Ok(id);
        }
        validate_name(name)?;
        let id = self.names.len();
        self.names.push(name.to_string());
        self.ids.insert(name.to_string(), id);
        Ok(id)
    }
}

/// Result of [`parse_family`]: the family and any warnings raised.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedFamily {
    pub family: SetFamily,
    pub warnings: Vec<ParseWarning>,
}

/// Parses the family file format. Line numbers in errors are 1-based.
pub fn parse_family(text: &str) -> Result<ParsedFamily, FamilyError> {
    let mut interner = Interner::default();
    let mut sets = Vec::new();
    let mut labels = Vec::new();
    let mut warnings = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let (body, comment) = match raw.split_once('#') {
            Some((body, comment)) => (body, Some(comment.trim())),
            None => (raw, None),
        };
        let tokens: Vec<&str> = body.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        let mut members = Vec::with_capacity(tokens.len());
        if tokens.contains(&EMPTY_SET_TOKEN) {
            if tokens.len() != 1 {
                return Err(FamilyError::Malformed {
                    line,
                    message: format!("`{EMPTY_SET_TOKEN}` must be the only token on its line"),
                });
            }
        } else {
            for token in tokens {
                let id = interner.intern(token).map_err(|e| FamilyError::Malformed { line, message: e.to_string() })?;
                if members.contains(&id) {
                    warnings.push(ParseWarning::DuplicateElement { line, name: token.to_string() });
                } else {
                    members.push(id);
                }
            }
        }
        sets.push(members);
        labels.push(comment.filter(|c| !c.is_empty()).map(str::to_string));
    }

    let family = SetFamily::new(interner.names, sets)?.with_set_names(labels)?;
    Ok(ParsedFamily { family, warnings })
}

/// Writes a family in the file format. Labels become trailing comments.
pub fn serialize_family(family: &SetFamily) -> String {
    let mut out = String::new();
    for (index, set) in family.sets().iter().enumerate() {
        if set.is_empty() {
            out.push_str(EMPTY_SET_TOKEN);
        } else {
            for (k, &id) in set.iter().enumerate() {
                if k > 0 {
                    out.push(' ');
                }
                out.push_str(family.element_name(id));
            }
        }
        if let Some(label) = family.set_name(index) {
            out.push_str(" # ");
            out.push_str(label);
        }
        out.push('\n');
    }
    out
}

/// Errors for orderings that are not permutations of the set indices, or
/// ordering files that fail to parse.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrderingError {
    #[error("ordering has {got} entries but the family has {expected} sets")]
    WrongLength { expected: usize, got: usize },
    #[error("set index {index} is out of range for {num_sets} sets")]
    OutOfRange { index: usize, num_sets: usize },
    #[error("set index {0} appears more than once")]
    Repeated(usize),
    #[error("line {line}: invalid set index {token:?}")]
    BadToken { line: usize, token: String },
}

/// A candidate evolutionary ordering: the sequence of set indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Ordering(pub Vec<usize>);

impl Ordering {
    pub fn new(positions: Vec<usize>) -> Self {
        Ordering(positions)
    }

    /// The identity ordering `0..num_sets`.
    pub fn identity(num_sets: usize) -> Self {
        Ordering((0..num_sets).collect())
    }

    pub fn positions(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Checks that this is a permutation of `0..num_sets`.
    pub fn validate(&self, num_sets: usize) -> Result<(), OrderingError> {
        let mut seen = vec![false; num_sets];
        for &index in &self.0 {
            if index >= num_sets {
                return Err(OrderingError::OutOfRange { index, num_sets });
            }
            if std::mem::replace(&mut seen[index], true) {
                return Err(OrderingError::Repeated(index));
            }
        }
        if self.0.len() != num_sets {
            return Err(OrderingError::WrongLength { expected: num_sets, got: self.0.len() });
        }
        Ok(())
    }

    /// Inverse permutation: `result[set] = position`. Assumes validity.
    pub fn position_of_each(&self) -> Vec<usize> {
        let mut pos = vec![usize::MAX; self.0.len()];
        for (p, &set) in self.0.iter().enumerate() {
            pos[set] = p;
        }
        pos
    }
}

impl fmt::Display for Ordering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, idx) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{idx}")?;
        }
        Ok(())
    }
}

/// Parses an ordering file. Permutation validity is checked separately.
pub fn parse_ordering(text: &str) -> Result<Ordering, OrderingError> {
    let mut positions = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("");
        for token in body.split_whitespace() {
            let value = token
                .parse::<usize>()
                .map_err(|_| OrderingError::BadToken { line: idx + 1, token: token.to_string() })?;
            positions.push(value);
        }
    }
    Ok(Ordering(positions))
}

/// Ordering file contents: indices on one line.
pub fn serialize_ordering(ordering: &Ordering) -> String {
    format!("{ordering}\n")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationReason {
    NoNewElement,
    NoOldElement,
}

impl fmt::Display for ViolationReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ViolationReason::NoNewElement => "no-new-element",
            ViolationReason::NoOldElement => "no-old-element",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    pub position: usize,
    pub set: usize,
    pub reason: ViolationReason,
}

/// Witnesses for one accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step {
    pub set: usize,
    pub new_witness: ElementId,
    /// `None` only for the first step.
    pub old_witness: Option<ElementId>,
}

/// Outcome of [`check_evolutionary`]. `steps` holds the accepted prefix; on
/// rejection it stops before the violating position.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CheckReport {
    pub steps: Vec<Step>,
    pub violation: Option<Violation>,
}

impl CheckReport {
    pub fn accepted(&self) -> bool {
        self.violation.is_none()
    }

    /// Renders the report in the CLI layout.
    pub fn render(&self, family: &SetFamily) -> String {
        let mut out = String::new();
        for (i, step) in self.steps.iter().enumerate() {
            let old = step.old_witness.map_or("-", |id| family.element_name(id));
            out.push_str(&format!(
                "step {i}: set {} new={} old={old}\n",
                step.set,
                family.element_name(step.new_witness)
            ));
        }
        match &self.violation {
            None => out.push_str("ACCEPTED\n"),
            Some(v) => out.push_str(&format!("REJECTED at step {}: {}\n", v.position, v.reason)),
        }
        out
    }
}

/// Verifies an ordering against both evolutionary conditions.
///
/// Runs in `O(|U| + sum of set sizes)`. Witnesses are the lowest-id
/// qualifying elements. A missing new element is reported ahead of a missing
/// old element at the same position.
pub fn check_evolutionary(family: &SetFamily, ordering: &Ordering) -> Result<CheckReport, OrderingError> {
    ordering.validate(family.num_sets())?;
    let mut covered = vec![false; family.universe_size()];
    let mut report = CheckReport { steps: Vec::with_capacity(ordering.len()), violation: None };

    for (position, &set) in ordering.positions().iter().enumerate() {
        let members = family.set(set);
        let new_witness = members.iter().copied().find(|&e| !covered[e]);
        let old_witness = members.iter().copied().find(|&e| covered[e]);
        let reason = match (new_witness, old_witness) {
            (None, _) => Some(ViolationReason::NoNewElement),
            (Some(_), None) if position > 0 => Some(ViolationReason::NoOldElement),
            _ => None,
        };
        if let Some(reason) = reason {
            report.violation = Some(Violation { position, set, reason });
            break;
        }
        report.steps.push(Step { set, new_witness: new_witness.expect("checked above"), old_witness });
        for &e in members {
            covered[e] = true;
        }
    }
    Ok(report)
}
