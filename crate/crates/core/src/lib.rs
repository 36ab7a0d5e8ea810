pub mod axioms;
pub mod error;
pub mod finstoch;
pub mod gauss;
pub mod generate;
pub mod independence;
pub mod ip;
pub mod markov;
pub mod namepool;
pub mod report;
pub mod setmulti;
pub mod sheaves;
pub mod spaces;
pub mod strongname;

pub use error::{Error, Result};
pub use markov::{Fallback, Markov, MarkovOps, SplitSupport};
