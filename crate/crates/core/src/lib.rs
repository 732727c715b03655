//! School choice under several priority orders per school.
//!
//! The crate covers binary relations over students ([`relations`]), the
//! combination of a school's orders into one relation ([`combine`]),
//! instances and stability predicates ([`market`]), student-proposing
//! deferred acceptance ([`spda`]), the efficiency-adjusted variant over
//! partial orders ([`eada`]), improvement analysis ([`improvements`]) and an
//! exhaustive checker for small instances ([`oracle`]). [`format`] reads and
//! writes the JSON documents and [`gen`] produces seeded random inputs.

pub mod combine;
pub mod eada;
pub mod format;
pub mod gen;
pub mod improvements;
pub mod market;
pub mod oracle;
pub mod relations;
pub mod spda;

pub use combine::{CombineError, MultiProfile, PrioritySet};
pub use eada::{run_ea_multi, run_eada, EadaError, EadaOptions, EadaTrace, ExtensionProfile};
pub use improvements::{phi_star, ImprovementError};
pub use market::{Instance, Matching, MarketError, Priorities, School, SchoolId, ViolationWitness};
pub use oracle::OracleError;
pub use relations::{OrderKind, Relation, RelationClass, RelationError, StudentId};
pub use spda::{run_da, DaError, DaOutcome};
