//! Spec-file parsing, task execution and output writing for the `siet`
//! command-line tool.

// Negated float comparisons reject NaN on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod output;
pub mod run;
pub mod spec;
