//! Exact decision procedure for evolutionary orderings.
//!
//! [`decide`] runs a depth-first search over partial orderings. The state of a
//! partial ordering is the set of sets already placed; the covered elements
//! are a function of it, so dead states are memoized on that bitset alone.
//! A state is also dead as soon as some unplaced set is fully covered, since
//! it can never contribute a new element again.
//!
//! [`brute_force`] enumerates permutations and runs the verifier on each; it
//! is the reference the solver is tested against.

use std::collections::HashSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::setfam::{check_evolutionary, Ordering, SetFamily};

/// Largest family [`brute_force`] accepts.
pub const MAX_BRUTE_FORCE_SETS: usize = 9;

/// Default bound on memoized dead states.
pub const DEFAULT_MEMO_CAPACITY: usize = 1 << 22;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SearchError {
    #[error("brute force is limited to {MAX_BRUTE_FORCE_SETS} sets, got {0}")]
    TooManySets(usize),
    #[error("density {0} is outside [0, 1]")]
    InvalidDensity(f64),
}

/// A necessary condition the family fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrecheckFailure {
    EmptySet { set: usize },
    TooFewElements { covered: usize, sets: usize },
    Disconnected { components: usize },
}

impl fmt::Display for PrecheckFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PrecheckFailure::EmptySet { .. } => "empty-set",
            PrecheckFailure::TooFewElements { .. } => "too-few-elements",
            PrecheckFailure::Disconnected { .. } => "disconnected",
        })
    }
}

/// Cheap necessary conditions. `Ok` is inconclusive.
pub fn precheck(family: &SetFamily) -> Result<(), PrecheckFailure> {
    if let Some(set) = family.sets().iter().position(Vec::is_empty) {
        return Err(PrecheckFailure::EmptySet { set });
    }

    let mut seen = vec![false; family.universe_size()];
    let mut covered = 0;
    for &e in family.sets().iter().flatten() {
        if !std::mem::replace(&mut seen[e], true) {
            covered += 1;
        }
    }
    if covered < family.num_sets() {
        return Err(PrecheckFailure::TooFewElements { covered, sets: family.num_sets() });
    }

    // Union-find over sets, joined through the first set seen holding each element.
    let mut parent: Vec<usize> = (0..family.num_sets()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut owner = vec![usize::MAX; family.universe_size()];
    for (set, members) in family.sets().iter().enumerate() {
        for &e in members {
            if owner[e] == usize::MAX {
                owner[e] = set;
            } else {
                let (a, b) = (find(&mut parent, owner[e]), find(&mut parent, set));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let components = (0..family.num_sets()).filter(|&s| find(&mut parent, s) == s).count();
    if components >= 2 {
        return Err(PrecheckFailure::Disconnected { components });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SearchStats {
    pub states_expanded: u64,
    pub memo_hits: u64,
    pub precheck: Option<PrecheckFailure>,
}

impl fmt::Display for SearchStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "states={} memo_hits={} precheck=", self.states_expanded, self.memo_hits)?;
        match self.precheck {
            Some(reason) => write!(f, "{reason}"),
            None => f.write_str("none"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub evolutionary: bool,
    pub witness: Option<Ordering>,
    pub stats: SearchStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    pub precheck: bool,
    pub memoize: bool,
    /// Dead states beyond this many are not recorded; the search stays exact.
    pub memo_capacity: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { precheck: true, memoize: true, memo_capacity: DEFAULT_MEMO_CAPACITY }
    }
}

/// Decides whether `family` is evolutionary, with default options.
pub fn decide(family: &SetFamily) -> Verdict {
    decide_with(family, &SearchOptions::default())
}

/// Decides whether `family` is evolutionary.
///
/// Candidates are expanded in increasing set index, so the witness is the
/// lexicographically first evolutionary ordering.
pub fn decide_with(family: &SetFamily, options: &SearchOptions) -> Verdict {
    let mut stats = SearchStats::default();
    if options.precheck {
        if let Err(reason) = precheck(family) {
            stats.precheck = Some(reason);
            return Verdict { evolutionary: false, witness: None, stats };
        }
    }
    let mut dfs = Dfs {
        family,
        options,
        used: vec![0; family.num_sets().div_ceil(64)],
        cover_count: vec![0; family.universe_size()],
        path: Vec::with_capacity(family.num_sets()),
        dead: HashSet::new(),
        stats,
    };
    let evolutionary = dfs.run();
    let witness = evolutionary.then(|| Ordering::new(dfs.path.clone()));
    Verdict { evolutionary, witness, stats: dfs.stats }
}

struct Dfs<'a> {
    family: &'a SetFamily,
    options: &'a SearchOptions,
    used: Vec<u64>,
    cover_count: Vec<u32>,
    path: Vec<usize>,
    dead: HashSet<Box<[u64]>>,
    stats: SearchStats,
}

impl Dfs<'_> {
    fn is_used(&self, set: usize) -> bool {
        self.used[set / 64] >> (set % 64) & 1 == 1
    }

    fn place(&mut self, set: usize) {
        self.used[set / 64] |= 1 << (set % 64);
        for &e in self.family.set(set) {
            self.cover_count[e] += 1;
        }
        self.path.push(set);
    }

    fn unplace(&mut self, set: usize) {
        self.used[set / 64] &= !(1 << (set % 64));
        for &e in self.family.set(set) {
            self.cover_count[e] -= 1;
        }
        self.path.pop();
    }

    fn mark_dead(&mut self) {
        if self.options.memoize && self.dead.len() < self.options.memo_capacity {
            self.dead.insert(self.used.clone().into_boxed_slice());
        }
    }

    fn run(&mut self) -> bool {
        let num_sets = self.family.num_sets();
        if self.path.len() == num_sets {
            return true;
        }
        if self.options.memoize && self.dead.contains(self.used.as_slice()) {
            self.stats.memo_hits += 1;
            return false;
        }
        self.stats.states_expanded += 1;

        let first = self.path.is_empty();
        let mut candidates = Vec::new();
        for set in 0..num_sets {
            if self.is_used(set) {
                continue;
            }
            let members = self.family.set(set);
            if members.iter().all(|&e| self.cover_count[e] > 0) {
                self.mark_dead();
                return false;
            }
            if first || members.iter().any(|&e| self.cover_count[e] > 0) {
                candidates.push(set);
            }
        }
        for set in candidates {
            self.place(set);
            if self.run() {
                return true;
            }
            self.unplace(set);
        }
        self.mark_dead();
        false
    }
}

/// Rearranges `perm` into the next permutation in lexicographic order.
/// Returns false once `perm` is the last one.
fn next_permutation(perm: &mut [usize]) -> bool {
    let Some(i) = perm.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = perm.iter().rposition(|&x| x > perm[i]).expect("perm[i + 1] qualifies");
    perm.swap(i, j);
    perm[i + 1..].reverse();
    true
}

/// Checks every permutation with the verifier and returns the
/// lexicographically first accepted one. `states_expanded` counts the
/// permutations checked.
pub fn brute_force(family: &SetFamily) -> Result<Verdict, SearchError> {
    let num_sets = family.num_sets();
    if num_sets > MAX_BRUTE_FORCE_SETS {
        return Err(SearchError::TooManySets(num_sets));
    }
    let mut stats = SearchStats::default();
    let mut perm: Vec<usize> = (0..num_sets).collect();
    loop {
        stats.states_expanded += 1;
        let ordering = Ordering::new(perm.clone());
        let report = check_evolutionary(family, &ordering).expect("permutations are valid orderings");
        if report.accepted() {
            return Ok(Verdict { evolutionary: true, witness: Some(ordering), stats });
        }
        if !next_permutation(&mut perm) {
            return Ok(Verdict { evolutionary: false, witness: None, stats });
        }
    }
}

/// Random family: each of `universe_size` elements (`e0`, `e1`, ...) joins
/// each set independently with probability `density`. Elements are interned
/// in first-appearance order, so unused elements are not part of the
/// universe.
pub fn gen_family(num_sets: usize, universe_size: usize, density: f64, seed: u64) -> Result<SetFamily, SearchError> {
    if !(0.0..=1.0).contains(&density) {
        return Err(SearchError::InvalidDensity(density));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sets: Vec<Vec<String>> = (0..num_sets)
        .map(|_| (0..universe_size).filter(|_| rng.random_bool(density)).map(|e| format!("e{e}")).collect())
        .collect();
    Ok(SetFamily::from_named_sets(sets).expect("generated names are valid"))
}
