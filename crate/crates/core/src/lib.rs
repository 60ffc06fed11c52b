//! Simultaneous-bidding protocols for two-player XOS combinatorial auctions:
//! (k, α)-sketches, welfare oracles, one- and two-round protocols, a truthful priced
//! mechanism and adversarial instance generators.

pub mod error;
pub mod exact;
pub mod hardness;
pub mod instance;
pub mod itemset;
pub mod mechanism;
pub mod protocols;
pub mod random;
pub mod sketch;
pub mod valuation;
pub mod welfare;

pub use error::{Error, Result};
pub use exact::Rational;
pub use instance::{Instance, Provenance};
pub use itemset::ItemSet;
pub use mechanism::{MechanismOutcome, Report};
pub use num_rational::Rational64;
pub use protocols::{Answer, DecisionSpec, Mode, ProtocolConfig, ProtocolId, ProtocolOutcome};
pub use random::{derive_seed, Family, FamilySpec};
pub use sketch::{Sketch, SketchMethod, SketchParams};
pub use valuation::{Allocation, Clause, Valuation};
pub use welfare::WelfareResult;
