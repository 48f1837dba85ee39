//! Agents for the SATTL gridworlds: a random walker, an optimal planner
//! that serves as ground truth, and an advantage actor-critic learner with a
//! standard and a latent-goal network.

pub mod a2c;
pub mod checkpoint;
pub mod episodes;
pub mod eval;
pub mod instr;
pub mod net;
pub mod optim;
pub mod oracle;
pub mod policy;
pub mod verify;

pub use a2c::{a2c_train, a2c_train_with, desk_recipe, net_config_for, train_gridworld, train_gridworld_with, AgentEnv, UpdateInfo, LearningCurve, TrainConfig, TrainError, TrainResult};
pub use episodes::{EnvSpec, SizeSpec};
pub use eval::{control_experiment, evaluate, normalize, ControlTable, ResultTable};
pub use instr::{encode_instruction, instr_width};
pub use net::{net_backward, rollout_loss, Arch, LossWeights, NetConfig, NetParams, Rollout, Transition};
pub use optim::{LrSchedule, RmsProp};
pub use oracle::{plan_from, plan_oracle, OracleError, Plan};
pub use policy::{run_episode, NetPolicy, OraclePolicy, Policy, RandomPolicy};
