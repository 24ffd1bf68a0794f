//! Thread-local coverage trace written by instrumentation sites.
//!
//! Built-in targets mark every conditional arm with `br!(id)`, every raise
//! with `raise!("Kind", id)` and every function entry with `func!(id)`. Ids
//! are literals, unique per target, numbered from 0. Targets defined outside
//! this crate call [`branch`] and [`function`] directly.

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::time::Instant;

/// Deadline checks happen once per this many probe hits.
const DEADLINE_STRIDE: u64 = 1024;

#[derive(Debug, Default)]
struct BitSet(Vec<u64>);

impl BitSet {
    fn insert(&mut self, i: u32) {
        let (w, b) = ((i / 64) as usize, i % 64);
        if self.0.len() <= w {
            self.0.resize(w + 1, 0);
        }
        self.0[w] |= 1 << b;
    }

    fn to_set(&self) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        for (w, word) in self.0.iter().enumerate() {
            let mut bits = *word;
            while bits != 0 {
                let b = bits.trailing_zeros();
                out.insert(w as u32 * 64 + b);
                bits &= bits - 1;
            }
        }
        out
    }
}

#[derive(Debug, Default)]
struct Trace {
    branches: BitSet,
    lines: BitSet,
    functions: BitSet,
    events: u64,
    last_site: Option<u32>,
    deadline: Option<Instant>,
}

thread_local! {
    static TRACE: RefCell<Trace> = RefCell::new(Trace::default());
}

/// Unwind payload used to abandon an execution that ran out of time.
pub(crate) struct DeadlineExceeded;

/// Raised by an instrumented target at a branch site.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raise {
    pub kind: &'static str,
    pub site: u32,
}

impl Raise {
    /// Records the site as hit and builds the error.
    pub fn at(kind: &'static str, site: u32, line: u32) -> Self {
        branch(site, line);
        Raise { kind, site }
    }
}

pub(crate) struct Collected {
    pub branches: BTreeSet<u32>,
    pub lines: BTreeSet<u32>,
    pub functions: BTreeSet<u32>,
    pub events: u64,
    pub last_site: Option<u32>,
}

pub(crate) fn begin(deadline: Option<Instant>) {
    TRACE.with(|t| {
        *t.borrow_mut() = Trace {
            deadline,
            ..Trace::default()
        }
    });
}

pub(crate) fn finish() -> Collected {
    TRACE.with(|t| {
        let t = std::mem::take(&mut *t.borrow_mut());
        Collected {
            branches: t.branches.to_set(),
            lines: t.lines.to_set(),
            functions: t.functions.to_set(),
            events: t.events,
            last_site: t.last_site,
        }
    })
}

/// Records a hit of branch site `id` on source line `line`.
pub fn branch(id: u32, line: u32) {
    let expired = TRACE.with(|t| {
        let mut t = t.borrow_mut();
        t.branches.insert(id);
        t.lines.insert(line);
        t.last_site = Some(id);
        t.events += 1;
        t.events % DEADLINE_STRIDE == 0 && t.deadline.is_some_and(|d| Instant::now() >= d)
    });
    if expired {
        std::panic::resume_unwind(Box::new(DeadlineExceeded));
    }
}

/// Records entry into function `id` on source line `line`.
pub fn function(id: u32, line: u32) {
    TRACE.with(|t| {
        let mut t = t.borrow_mut();
        t.functions.insert(id);
        t.lines.insert(line);
    });
}

macro_rules! br {
    ($id:literal) => {
        $crate::harness::probe::branch($id, line!())
    };
}

macro_rules! func {
    ($id:literal) => {
        $crate::harness::probe::function($id, line!())
    };
}

macro_rules! raise {
    ($kind:literal, $id:literal) => {{
        return Err($crate::harness::probe::Raise::at($kind, $id, line!()));
    }};
}

pub(crate) use {br, func, raise};

/// Lines of `source` that hold an instrumentation site.
pub(crate) fn probe_lines(source: &str) -> BTreeSet<u32> {
    source
        .lines()
        .enumerate()
        .filter(|(_, l)| {
            let code = l.split("//").next().unwrap_or("");
            code.contains("br!(") || code.contains("raise!(") || code.contains("func!(")
        })
        .map(|(i, _)| i as u32 + 1)
        .collect()
}
