//! Safety-aware task temporal logic over finite traces.
//!
//! Formulas are built from atomic tasks `cond U goal` with sequencing `;`
//! and choice `++`. This crate parses and prints them, decides satisfaction
//! on finite traces, translates them into LTLf, and runs the symbolic module
//! that turns labelled environment steps into rewards.

pub mod error;
pub mod gen;
pub mod ltlf;
pub mod parse;
pub mod semantics;
pub mod symbolic;
pub mod syntax;
pub mod trace;

pub use error::{SizeGuardError, SmError, SyntaxError, TraceError};
pub use ltlf::{check_truth_preservation, enumerate_traces, eval_ltlf, normalize, translate, LtlfFormula};
pub use parse::{format_formula, parse_formula, parse_task};
pub use semantics::{literal_holds, satisfies, satisfies_naive, satisfies_with_restarts, SatReport};
pub use symbolic::{
    episode_return, extract, reward_of, sm_init, sm_step, EpisodeReturn, Outcome, Reward, RewardEvent,
    RewardStatus, SmState, TaskList,
};
pub use syntax::{Atom, AtomicTask, Literal, Sign, SignedAtom, TemporalFormula};
pub use trace::{LabelSet, Trace};
