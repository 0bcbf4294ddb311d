//! Text formats: the CAO description language, canonical output, DOT
//! export, and trace/schedule files.
//!
//! ```text
//! cao NAME {
//!     entity NAME [initial|intermediate|final];
//!     operator [L|D|F|M] (input:radix, ...) -> (output:coefficient, ...);
//!     init NAME = VALUE, ...;
//! }
//! ```
//!
//! Entity declaration order is significant: it fixes the row and column
//! order of every matrix and the component order of state vectors. The form
//! keyword and the role are optional; when present they are checked against
//! the topology. `#` starts a comment that runs to the end of the line.

mod parse;
mod trace;
mod write;

pub use parse::{parse, parse_with, Diagnostic, DiagnosticKind, ParseError, SourceSpan};
pub use trace::{export_trace, parse_schedule, parse_trace, write_schedule, FormatError, TraceFormat, FORMAT_VERSION};
pub use write::{export_dot, serialize};
