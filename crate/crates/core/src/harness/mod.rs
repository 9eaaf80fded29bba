//! Executable soundness checks: trace re-typing, an independent dispatch
//! oracle, lookup lemmas over finite grids, bounded enumeration, and the
//! fixture corpus.

pub mod differential;
pub mod enumerate;
pub mod fixtures;
pub mod lemmas;
pub mod oracle;
pub mod provenance;
pub mod soundness;

pub use differential::{run_differential, DifferentialSummary};
pub use enumerate::{enumerate_mains, enumerate_programs};
pub use fixtures::{Expectation, Fixture};
pub use lemmas::{lemma_suite, oracle_equivalence};
pub use oracle::resolve_oracle;
pub use soundness::{run_soundness, SoundnessConfig, SoundnessReport, Verdict};
