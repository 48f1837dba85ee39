//! Procedural gridworlds for instruction-following agents.
//!
//! Two benchmarks share one engine: a Minecraft-style world with four moves
//! and a fully visible map, and a MiniGrid-style world where the agent turns,
//! moves forward and sees a 7x7 window ahead. Each step is labelled with the
//! atom of the occupied cell and scored by the symbolic module.

pub mod catalog;
pub mod env;
pub mod features;
pub mod map;
pub mod render;
pub mod tasks;

pub use catalog::{build_catalog, Mode, ObjectCatalog, ObjectId};
pub use env::{actions, transition, Action, EnvConfig, EnvError, GridEnv, InstructionView, Observation, Step};
pub use features::FeatureView;
pub use map::{generate_map, CountRange, Dir, GridMap, MapConfig, MapError, MapSnapshot, Pos};
pub use tasks::{deceive, occlude, sample_task, sample_task_from, Split, TaskCategory};
