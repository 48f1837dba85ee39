//! Root-mean-square gradient scaling and learning-rate schedules.

use serde::{Deserialize, Serialize};

use crate::net::NetParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LrSchedule {
    Constant(f64),
    /// `(from_step, rate)` pairs with increasing steps; the first starts at 0.
    Piecewise(Vec<(u64, f64)>),
    /// Linear from `from` at step 0 to `to` at `steps`, constant after.
    Linear { from: f64, to: f64, steps: u64 },
}

impl LrSchedule {
    /// 8e-5, then 6e-5 from 30M steps, then 4e-5 from 55M steps.
    pub fn long_run() -> Self {
        LrSchedule::Piecewise(vec![(0, 8e-5), (30_000_000, 6e-5), (55_000_000, 4e-5)])
    }

    pub fn at(&self, step: u64) -> f64 {
        match self {
            LrSchedule::Constant(r) => *r,
            LrSchedule::Linear { from, to, steps } => {
                let f = (step as f64 / (*steps).max(1) as f64).min(1.0);
                from + (to - from) * f
            }
            LrSchedule::Piecewise(v) => v.iter().take_while(|(s, _)| *s <= step).last().or(v.first()).map_or(0.0, |p| p.1),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RmsProp {
    pub decay: f64,
    pub eps: f64,
    ms: NetParams,
}

impl RmsProp {
    /// `ms0` seeds every squared-gradient accumulator; 0 gives the plain update.
    pub fn new(params: &NetParams, decay: f64, eps: f64, ms0: f64) -> Self {
        let mut ms = params.zeros_like();
        for (_, l) in ms.layers_mut() {
            l.values_mut().for_each(|v| *v = ms0);
        }
        RmsProp { decay, eps, ms }
    }

    /// `ms = decay * ms + (1 - decay) * g^2; p -= lr * g / (sqrt(ms) + eps)`.
    pub fn step(&mut self, params: &mut NetParams, grads: &NetParams, lr: f64) {
        let (d, eps) = (self.decay, self.eps);
        let gl = grads.layers();
        for (((_, p), (_, m)), (_, g)) in params.layers_mut().into_iter().zip(self.ms.layers_mut()).zip(gl) {
            for ((pv, mv), gv) in p.values_mut().zip(m.values_mut()).zip(g.values()) {
                *mv = d * *mv + (1.0 - d) * gv * gv;
                *pv -= lr * gv / (mv.sqrt() + eps);
            }
        }
    }
}

pub fn grad_norm(g: &NetParams) -> f64 {
    g.layers().iter().flat_map(|(_, l)| l.values()).map(|v| v * v).sum::<f64>().sqrt()
}

pub fn scale(g: &mut NetParams, f: f64) {
    for (_, l) in g.layers_mut() {
        l.values_mut().for_each(|v| *v *= f);
    }
}
