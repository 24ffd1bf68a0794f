//! The five built-in instrumented targets.

use crate::harness::probe::Raise;

pub(crate) mod flattener;
pub(crate) mod lenient;
pub(crate) mod numbers;
pub(crate) mod serializer;
pub(crate) mod strict;

pub(crate) struct Builtin {
    pub name: &'static str,
    pub run: fn(&str) -> Result<(), Raise>,
    pub branches: u32,
    pub functions: u32,
    pub source: &'static str,
}

pub(crate) const BUILTINS: [Builtin; 5] = [
    Builtin {
        name: "strict-parser",
        run: strict::run,
        branches: strict::BRANCHES,
        functions: strict::FUNCTIONS,
        source: strict::SOURCE,
    },
    Builtin {
        name: "lenient-parser",
        run: lenient::run,
        branches: lenient::BRANCHES,
        functions: lenient::FUNCTIONS,
        source: lenient::SOURCE,
    },
    Builtin {
        name: "flattener",
        run: flattener::run,
        branches: flattener::BRANCHES,
        functions: flattener::FUNCTIONS,
        source: flattener::SOURCE,
    },
    Builtin {
        name: "serializer",
        run: serializer::run,
        branches: serializer::BRANCHES,
        functions: serializer::FUNCTIONS,
        source: serializer::SOURCE,
    },
    Builtin {
        name: "number-validator",
        run: numbers::run,
        branches: numbers::BRANCHES,
        functions: numbers::FUNCTIONS,
        source: numbers::SOURCE,
    },
];
