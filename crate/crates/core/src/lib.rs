//! Accessibility auditing for computational notebooks.
//!
//! The crate is organised as a pipeline: notebooks are parsed and coerced
//! ([`nbmodel`]), their code is analysed ([`codeanalysis`]), optimistic
//! accessibility measurements are taken ([`metrics`]), they are exported to
//! themed standalone HTML ([`htmlexport`]) and scanned with a rule engine
//! ([`a11y`]). Results are aggregated per corpus ([`report`]) and the
//! [`audit`] module wires everything together for the command-line tool.
//! [`altpng`] embeds and reads alt text stored in PNG metadata.

pub mod a11y;
pub mod altpng;
pub mod audit;
pub mod codeanalysis;
pub mod htmlexport;
mod htmlutil;
pub mod markdown;
pub mod metrics;
pub mod nbmodel;
pub mod report;
pub mod synth;

pub use a11y::{A11yFinding, Impact, RuleCode, Ruleset, ScanResult, Severity};
pub use codeanalysis::{CallRecord, CleanedSource, ImportRecord};
pub use htmlexport::{HtmlDocument, Theme};
pub use metrics::{FigureContextFlags, NotebookMetrics, SizeRisk, SizeThresholds};
pub use report::CorpusReport;
pub use nbmodel::{
    Cell, CellKind, ImageArtifact, ImageFormat, MimeCategory, MimeClass, Notebook, OutputBundle,
    OutputKind, Provenance, ValidityError,
};
