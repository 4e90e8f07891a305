//! Voting procedures, social choice axioms, and the social disappointment
//! criterion, with bounded exhaustive search for axiom violations.
//!
//! ```
//! use votelab::ballot::parse_profile;
//! use votelab::criteria::socially_disappointing;
//! use votelab::rules::{lpr, plurality};
//!
//! let p = parse_profile(
//!     "alternatives: milk beer wine\n4: milk > wine > beer\n3: beer > wine > milk\n2: wine > beer > milk\n",
//! )
//! .unwrap();
//! let first = plurality(&p);
//! assert_eq!(first.winners[0].as_str(), "milk");
//! assert!(socially_disappointing(&p, first.set).unwrap());
//! assert_eq!(lpr(&p).winners[0].as_str(), "wine");
//! ```

pub mod ballot;
pub mod corpus;
pub mod criteria;
pub mod model;
pub mod rules;
pub mod table;

pub use model::{AltSet, Alternative, Profile, TallySummary};
pub use rules::{Outcome, RuleKind, RuleSpec};
