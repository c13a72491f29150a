pub mod cache;
pub mod chain;
pub mod datum;
pub mod error;
pub mod fp;
pub mod lab;
pub mod suite;
pub mod tree;
pub mod word;

pub use datum::{Classification, CspStatus, DefiningVector, Dependency, ExceptionalPair, NumericalDatum};
pub use error::{Error, Result};
pub use tree::{Perm, Portrait, Vertex};
pub use word::{BranchElement, GroupWord, GuardExceeded, Guards, OrderResult, Syllable};
pub use chain::{FiniteQuotient, SubgroupChain};
pub use lab::{CheckReport, Lab, Part, Verdict};
