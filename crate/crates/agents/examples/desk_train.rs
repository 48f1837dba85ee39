//! Train a latent-goal agent on 5x5 Minecraft reachability with three
//! training objects and compare it with the planner and a random walker.
//! Usage: `desk_train [steps] [seed]`.

use std::sync::Arc;
use std::time::Instant;

use agents::eval::episode_returns;
use agents::{desk_recipe, EnvSpec, NetPolicy, OraclePolicy, Policy, RandomPolicy, SizeSpec};
use gridworld::{Mode, TaskCategory};

fn main() {
    let args: Vec<u64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let steps = args.first().copied().unwrap_or(200_000);
    let seed = args.get(1).copied().unwrap_or(0);
    let mut spec = EnvSpec::new(Mode::Minecraft);
    spec.categories = vec![TaskCategory::Reachability];
    spec.objects = Some(3);
    let (net, cfg) = desk_recipe(&spec, steps, seed);

    let t = Instant::now();
    let res = agents::train_gridworld(&spec, SizeSpec::Fixed(5), &net, &cfg).expect("training");
    println!("trained {} steps in {:.1}s, {} episodes", res.steps, t.elapsed().as_secs_f64(), res.episodes);
    for p in &res.curve.points {
        println!("{:>8} {:>8.3} {:>6}", p.step, p.mean_return, p.episodes);
    }
    let agent = NetPolicy::new(Arc::new(res.params), "latent-goal");
    let policies: [&dyn Policy; 3] = [&OraclePolicy::new(), &agent, &RandomPolicy];
    for p in policies {
        let r = episode_returns(p, &spec, 5, 200, 12345).expect("evaluation");
        println!("{:<12} {:.3}", p.name(), r.iter().sum::<f64>() / r.len() as f64);
    }
}
