//! Actor-critic network with hand-written forward and backward passes.
//!
//! Standard: `[feature ++ instr] -> cm1 -> act -> cell -> heads`.
//! LatentGoal: `[feature ++ instr] -> cm1 -> act -> bottleneck` gives the
//! latent goal, `feature -> cm2 -> act` gives the task-agnostic state, and the
//! cell consumes `[state ++ latent goal]`.
//!
//! The cell is a gated update: with `x = [u ++ h]`,
//! `z = sigmoid(Wz x)`, `c = tanh(Wc x)`, `h' = h + z * (c - h)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Arch {
    Standard,
    LatentGoal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Activation {
    Tanh,
    Relu,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Relu => x.max(0.0),
        }
    }

    /// Derivative given the pre-activation and the activation value.
    fn grad(self, pre: f64, post: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - post * post,
            Activation::Relu => (pre > 0.0) as u8 as f64,
        }
    }
}

/// Largest bottleneck width that is not flagged as wide.
pub const NARROW_BOTTLENECK: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetConfig {
    pub feature_width: usize,
    pub instr_width: usize,
    pub h1: usize,
    pub h2: usize,
    pub bottleneck: usize,
    pub hidden: usize,
    pub actions: usize,
    pub arch: Arch,
    pub activation: Activation,
    pub seed: u64,
    /// Multiplies the init bound of the sparse-input layers (cm1, cm2).
    #[serde(default = "one")]
    pub input_scale: f64,
    /// When set, cm1 rows fed by the instruction are drawn from `[-b, b]` instead.
    #[serde(default)]
    pub instr_init: Option<f64>,
}

fn one() -> f64 {
    1.0
}

impl NetConfig {
    pub fn new(feature_width: usize, instr_width: usize, actions: usize, arch: Arch) -> Self {
        NetConfig {
            feature_width,
            instr_width,
            h1: 64,
            h2: 64,
            bottleneck: NARROW_BOTTLENECK,
            hidden: 64,
            actions,
            arch,
            activation: Activation::Tanh,
            seed: 0,
            input_scale: 1.0,
            instr_init: None,
        }
    }

    pub fn validate(&self) -> Result<(), NetError> {
        let widths = [self.feature_width, self.instr_width, self.h1, self.h2, self.bottleneck, self.hidden, self.actions];
        if widths.contains(&0) {
            return Err(NetError::Config("every width must be at least 1".into()));
        }
        if self.arch == Arch::LatentGoal && self.bottleneck > self.h1 {
            return Err(NetError::Config(format!("bottleneck {} exceeds cm1 width {}", self.bottleneck, self.h1)));
        }
        Ok(())
    }

    /// Set when the latent goal is wider than the narrow default.
    pub fn wide_bottleneck(&self) -> bool {
        self.arch == Arch::LatentGoal && self.bottleneck > NARROW_BOTTLENECK
    }

    /// Width of the cell's non-recurrent input.
    pub fn cell_input(&self) -> usize {
        match self.arch {
            Arch::Standard => self.h1,
            Arch::LatentGoal => self.h2 + self.bottleneck,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetError {
    #[error("invalid network config: {0}")]
    Config(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Affine map stored as an `n_in x n_out` row-major weight matrix and a bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Linear {
    pub n_in: usize,
    pub n_out: usize,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl Linear {
    pub fn zeros(n_in: usize, n_out: usize) -> Self {
        Linear { n_in, n_out, w: vec![0.0; n_in * n_out], b: vec![0.0; n_out] }
    }

    fn uniform(n_in: usize, n_out: usize, scale: f64, rng: &mut ChaCha8Rng) -> Self {
        let bound = scale / (n_in as f64).sqrt();
        let w = (0..n_in * n_out).map(|_| rng.gen_range(-bound..=bound)).collect();
        Linear { n_in, n_out, w, b: vec![0.0; n_out] }
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.b.clone();
        for (i, &xi) in x.iter().enumerate() {
            if xi != 0.0 {
                let row = &self.w[i * self.n_out..(i + 1) * self.n_out];
                for (yo, wo) in y.iter_mut().zip(row) {
                    *yo += xi * wo;
                }
            }
        }
        y
    }

    /// Forward pass for a 0/1 input given by the indices of its ones.
    pub fn forward_ones(&self, idx: &[u32]) -> Vec<f64> {
        let mut y = self.b.clone();
        for &i in idx {
            let i = i as usize;
            for (yo, wo) in y.iter_mut().zip(&self.w[i * self.n_out..(i + 1) * self.n_out]) {
                *yo += wo;
            }
        }
        y
    }

    /// Accumulate parameter gradients into `g` and return `dL/dx`.
    pub fn backward(&self, x: &[f64], dy: &[f64], g: &mut Linear) -> Vec<f64> {
        let mut dx = vec![0.0; self.n_in];
        for (gb, d) in g.b.iter_mut().zip(dy) {
            *gb += d;
        }
        for i in 0..self.n_in {
            let row = &self.w[i * self.n_out..(i + 1) * self.n_out];
            let grow = &mut g.w[i * self.n_out..(i + 1) * self.n_out];
            let xi = x[i];
            let mut acc = 0.0;
            for o in 0..self.n_out {
                grow[o] += xi * dy[o];
                acc += row[o] * dy[o];
            }
            dx[i] = acc;
        }
        dx
    }

    /// Parameter gradients for a 0/1 input; no input gradient.
    pub fn backward_ones(&self, idx: &[u32], dy: &[f64], g: &mut Linear) {
        for (gb, d) in g.b.iter_mut().zip(dy) {
            *gb += d;
        }
        for &i in idx {
            let i = i as usize;
            for (gw, d) in g.w[i * self.n_out..(i + 1) * self.n_out].iter_mut().zip(dy) {
                *gw += d;
            }
        }
    }

    pub fn values(&self) -> impl Iterator<Item = &f64> {
        self.w.iter().chain(&self.b)
    }

    pub fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.w.iter_mut().chain(self.b.iter_mut())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetParams {
    pub cfg: NetConfig,
    pub cm1: Linear,
    pub bottleneck: Option<Linear>,
    pub cm2: Option<Linear>,
    pub gate: Linear,
    pub cand: Linear,
    pub actor: Linear,
    pub critic: Linear,
}

/// Initial bias of the update gate; positive so the cell starts close to
/// tracking its input.
const GATE_BIAS: f64 = 2.0;

impl NetParams {
    pub fn init(cfg: &NetConfig) -> Result<Self, NetError> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let input = cfg.feature_width + cfg.instr_width;
        let sc = cfg.input_scale;
        let mut cm1 = Linear::uniform(input, cfg.h1, sc, &mut rng);
        if let Some(b) = cfg.instr_init {
            for v in &mut cm1.w[cfg.feature_width * cfg.h1..] {
                *v = rng.gen_range(-b..=b);
            }
        }
        let (bottleneck, cm2) = match cfg.arch {
            Arch::Standard => (None, None),
            Arch::LatentGoal => (
                Some(Linear::uniform(cfg.h1, cfg.bottleneck, 1.0, &mut rng)),
                Some(Linear::uniform(cfg.feature_width, cfg.h2, sc, &mut rng)),
            ),
        };
        let x = cfg.cell_input() + cfg.hidden;
        let mut gate = Linear::uniform(x, cfg.hidden, 1.0, &mut rng);
        gate.b.iter_mut().for_each(|b| *b = GATE_BIAS);
        let cand = Linear::uniform(x, cfg.hidden, 1.0, &mut rng);
        let actor = Linear::uniform(cfg.hidden, cfg.actions, 0.01, &mut rng);
        let critic = Linear::uniform(cfg.hidden, 1, 0.01, &mut rng);
        Ok(NetParams { cfg: cfg.clone(), cm1, bottleneck, cm2, gate, cand, actor, critic })
    }

    pub fn zeros_like(&self) -> Self {
        let z = |l: &Linear| Linear::zeros(l.n_in, l.n_out);
        NetParams {
            cfg: self.cfg.clone(),
            cm1: z(&self.cm1),
            bottleneck: self.bottleneck.as_ref().map(z),
            cm2: self.cm2.as_ref().map(z),
            gate: z(&self.gate),
            cand: z(&self.cand),
            actor: z(&self.actor),
            critic: z(&self.critic),
        }
    }

    /// Named layers in a fixed order.
    pub fn layers(&self) -> Vec<(&'static str, &Linear)> {
        let mut v = vec![("cm1", &self.cm1)];
        if let Some(b) = &self.bottleneck {
            v.push(("bottleneck", b));
        }
        if let Some(c) = &self.cm2 {
            v.push(("cm2", c));
        }
        v.extend([("gate", &self.gate), ("cand", &self.cand), ("actor", &self.actor), ("critic", &self.critic)]);
        v
    }

    pub fn layers_mut(&mut self) -> Vec<(&'static str, &mut Linear)> {
        let mut v = vec![("cm1", &mut self.cm1)];
        if let Some(b) = &mut self.bottleneck {
            v.push(("bottleneck", b));
        }
        if let Some(c) = &mut self.cm2 {
            v.push(("cm2", c));
        }
        v.extend([
            ("gate", &mut self.gate),
            ("cand", &mut self.cand),
            ("actor", &mut self.actor),
            ("critic", &mut self.critic),
        ]);
        v
    }

    pub fn param_count(&self) -> usize {
        self.layers().iter().map(|(_, l)| l.w.len() + l.b.len()).sum()
    }

    pub fn initial_hidden(&self) -> Vec<f64> {
        vec![0.0; self.cfg.hidden]
    }

    fn check(&self, feat: &[u32], instr: &[u32], h: &[f64]) -> Result<(), NetError> {
        let c = &self.cfg;
        if let Some(&i) = feat.iter().find(|&&i| i as usize >= c.feature_width) {
            return Err(NetError::DimensionMismatch(format!("feature index {i} >= {}", c.feature_width)));
        }
        if let Some(&i) = instr.iter().find(|&&i| i as usize >= c.instr_width) {
            return Err(NetError::DimensionMismatch(format!("instruction index {i} >= {}", c.instr_width)));
        }
        if h.len() != c.hidden {
            return Err(NetError::DimensionMismatch(format!("hidden length {} != {}", h.len(), c.hidden)));
        }
        Ok(())
    }

    /// Indices of the ones of `[feature ++ instr]`.
    fn joint_input(&self, feat: &[u32], instr: &[u32]) -> Vec<u32> {
        let off = self.cfg.feature_width as u32;
        feat.iter().copied().chain(instr.iter().map(|i| i + off)).collect()
    }

    /// The task-agnostic stream: its only input is the feature view.
    pub fn state_stream(&self, feat: &[u32]) -> Option<(Vec<f64>, Vec<f64>)> {
        let cm2 = self.cm2.as_ref()?;
        let pre = cm2.forward_ones(feat);
        let post = pre.iter().map(|&x| self.cfg.activation.apply(x)).collect();
        Some((pre, post))
    }

    pub fn forward_cached(&self, feat: &[u32], instr: &[u32], h_prev: &[f64]) -> Result<StepCache, NetError> {
        self.check(feat, instr, h_prev)?;
        let act = self.cfg.activation;
        let joint = self.joint_input(feat, instr);
        let pre1 = self.cm1.forward_ones(&joint);
        let a1: Vec<f64> = pre1.iter().map(|&x| act.apply(x)).collect();
        let (latent, pre2, s, u) = match self.cfg.arch {
            Arch::Standard => (Vec::new(), Vec::new(), Vec::new(), a1.clone()),
            Arch::LatentGoal => {
                let latent = self.bottleneck.as_ref().expect("latent-goal layer").forward(&a1);
                let (pre2, s) = self.state_stream(feat).expect("latent-goal layer");
                let u = s.iter().chain(&latent).copied().collect();
                (latent, pre2, s, u)
            }
        };
        let x: Vec<f64> = u.iter().chain(h_prev).copied().collect();
        let z: Vec<f64> = self.gate.forward(&x).into_iter().map(sigmoid).collect();
        let c: Vec<f64> = self.cand.forward(&x).into_iter().map(f64::tanh).collect();
        let h: Vec<f64> = (0..self.cfg.hidden).map(|k| h_prev[k] + z[k] * (c[k] - h_prev[k])).collect();
        let logits = self.actor.forward(&h);
        let probs = softmax(&logits);
        let value = self.critic.forward(&h)[0];
        Ok(StepCache { joint, feat: feat.to_vec(), pre1, a1, latent, pre2, s, x, z, c, h_prev: h_prev.to_vec(), h, logits, probs, value })
    }

    pub fn forward(&self, feat: &[u32], instr: &[u32], h_prev: &[f64]) -> Result<Output, NetError> {
        let c = self.forward_cached(feat, instr, h_prev)?;
        let latent = (self.cfg.arch == Arch::LatentGoal).then(|| c.latent.clone());
        let state = (self.cfg.arch == Arch::LatentGoal).then(|| c.s.clone());
        Ok(Output { logits: c.logits, probs: c.probs, value: c.value, hidden: c.h, latent, state })
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|&l| (l - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + logits.iter().map(|&l| (l - m).exp()).sum::<f64>().ln();
    logits.iter().map(|&l| l - lse).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub logits: Vec<f64>,
    pub probs: Vec<f64>,
    pub value: f64,
    pub hidden: Vec<f64>,
    /// The bottleneck output, LatentGoal only.
    pub latent: Option<Vec<f64>>,
    /// The cm2 activations before fusion, LatentGoal only.
    pub state: Option<Vec<f64>>,
}

/// Intermediate values of one forward step, kept for the backward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct StepCache {
    joint: Vec<u32>,
    feat: Vec<u32>,
    pre1: Vec<f64>,
    a1: Vec<f64>,
    latent: Vec<f64>,
    pre2: Vec<f64>,
    pub s: Vec<f64>,
    x: Vec<f64>,
    z: Vec<f64>,
    c: Vec<f64>,
    h_prev: Vec<f64>,
    pub h: Vec<f64>,
    pub logits: Vec<f64>,
    pub probs: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub feat: Vec<u32>,
    pub instr: Vec<u32>,
    pub action: usize,
    pub reward: f64,
    pub done: bool,
}

/// Consecutive steps of one environment. The hidden state is reset to zero
/// after a `done` step; `bootstrap` values the state after the last step
/// and is ignored when that step is terminal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rollout {
    pub h0: Vec<f64>,
    pub steps: Vec<Transition>,
    pub bootstrap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub gamma: f64,
    pub value_weight: f64,
    pub entropy: f64,
}

/// n-step returns `R_t = r_t + gamma * R_{t+1}`, cut at terminal steps.
pub fn returns(r: &Rollout, gamma: f64) -> Vec<f64> {
    let mut out = vec![0.0; r.steps.len()];
    let mut acc = r.bootstrap;
    for (t, s) in r.steps.iter().enumerate().rev() {
        if s.done {
            acc = 0.0;
        }
        acc = s.reward + gamma * acc;
        out[t] = acc;
    }
    out
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LossParts {
    pub policy: f64,
    pub value: f64,
    pub entropy: f64,
}

impl LossParts {
    pub fn total(&self, w: &LossWeights) -> f64 {
        self.policy + w.value_weight * self.value - w.entropy * self.entropy
    }
}

fn run_forward(p: &NetParams, r: &Rollout) -> Result<Vec<StepCache>, NetError> {
    let mut caches: Vec<StepCache> = Vec::with_capacity(r.steps.len());
    let mut h = r.h0.clone();
    for s in &r.steps {
        let c = p.forward_cached(&s.feat, &s.instr, &h)?;
        h = if s.done { p.initial_hidden() } else { c.h.clone() };
        caches.push(c);
    }
    Ok(caches)
}

/// Loss summed over the rollout: `-A log pi(a) + value_weight * (R - V)^2 -
/// entropy * H(pi)`. The advantages `A = R - V` are computed here unless
/// given, and are constants of the loss either way.
pub fn rollout_loss(
    p: &NetParams,
    r: &Rollout,
    w: &LossWeights,
    advantages: Option<&[f64]>,
) -> Result<(f64, Vec<f64>, LossParts), NetError> {
    let caches = run_forward(p, r)?;
    let ret = returns(r, w.gamma);
    let mut parts = LossParts::default();
    let mut adv = Vec::with_capacity(caches.len());
    for (t, (c, s)) in caches.iter().zip(&r.steps).enumerate() {
        check_action(p, s.action)?;
        let a = advantages.map_or(ret[t] - c.value, |v| v[t]);
        let logp = log_softmax(&c.logits);
        parts.policy -= a * logp[s.action];
        parts.value += (ret[t] - c.value).powi(2);
        parts.entropy -= c.probs.iter().zip(&logp).map(|(p, l)| p * l).sum::<f64>();
        adv.push(a);
    }
    Ok((parts.total(w), adv, parts))
}

fn check_action(p: &NetParams, a: usize) -> Result<(), NetError> {
    if a >= p.cfg.actions {
        return Err(NetError::DimensionMismatch(format!("action {a} >= {}", p.cfg.actions)));
    }
    Ok(())
}

/// Gradient of [`rollout_loss`] by backpropagation through time over the
/// rollout; the initial hidden state and the bootstrap value are constants.
pub fn net_backward(p: &NetParams, r: &Rollout, w: &LossWeights) -> Result<(NetParams, LossParts), NetError> {
    let mut g = p.zeros_like();
    let parts = net_backward_into(p, r, w, &mut g)?;
    Ok((g, parts))
}

/// [`net_backward`] accumulating into an existing gradient.
pub fn net_backward_into(p: &NetParams, r: &Rollout, w: &LossWeights, g: &mut NetParams) -> Result<LossParts, NetError> {
    let caches = run_forward(p, r)?;
    let ret = returns(r, w.gamma);
    let mut parts = LossParts::default();
    let act = p.cfg.activation;
    let hid = p.cfg.hidden;
    let u_len = p.cfg.cell_input();
    let mut dh_next = vec![0.0; hid];

    for t in (0..caches.len()).rev() {
        let c = &caches[t];
        let s = &r.steps[t];
        check_action(p, s.action)?;
        let adv = ret[t] - c.value;
        let logp = log_softmax(&c.logits);
        let ent = -c.probs.iter().zip(&logp).map(|(p, l)| p * l).sum::<f64>();
        parts.policy -= adv * logp[s.action];
        parts.value += adv * adv;
        parts.entropy += ent;

        // Heads.
        let dlogits: Vec<f64> = (0..c.probs.len())
            .map(|k| {
                let onehot = (k == s.action) as u8 as f64;
                adv * (c.probs[k] - onehot) + w.entropy * c.probs[k] * (logp[k] + ent)
            })
            .collect();
        let dv = 2.0 * w.value_weight * (c.value - ret[t]);
        let mut dh = p.actor.backward(&c.h, &dlogits, &mut g.actor);
        let dh_v = p.critic.backward(&c.h, &[dv], &mut g.critic);
        for k in 0..hid {
            dh[k] += dh_v[k] + dh_next[k];
        }

        // Cell.
        let dz_pre: Vec<f64> =
            (0..hid).map(|k| dh[k] * (c.c[k] - c.h_prev[k]) * c.z[k] * (1.0 - c.z[k])).collect();
        let dc_pre: Vec<f64> = (0..hid).map(|k| dh[k] * c.z[k] * (1.0 - c.c[k] * c.c[k])).collect();
        let dx_z = p.gate.backward(&c.x, &dz_pre, &mut g.gate);
        let dx_c = p.cand.backward(&c.x, &dc_pre, &mut g.cand);
        let du: Vec<f64> = (0..u_len).map(|i| dx_z[i] + dx_c[i]).collect();
        let dh_prev: Vec<f64> =
            (0..hid).map(|k| dh[k] * (1.0 - c.z[k]) + dx_z[u_len + k] + dx_c[u_len + k]).collect();
        dh_next = if t > 0 && !r.steps[t - 1].done { dh_prev } else { vec![0.0; hid] };

        // Central modules.
        let da1 = match p.cfg.arch {
            Arch::Standard => du,
            Arch::LatentGoal => {
                let h2 = p.cfg.h2;
                let ds_pre: Vec<f64> = (0..h2).map(|k| du[k] * act.grad(c.pre2[k], c.s[k])).collect();
                p.cm2.as_ref().expect("latent-goal layer").backward_ones(&c.feat, &ds_pre, g.cm2.as_mut().expect("latent-goal layer"));
                p.bottleneck.as_ref().expect("latent-goal layer").backward(
                    &c.a1,
                    &du[h2..],
                    g.bottleneck.as_mut().expect("latent-goal layer"),
                )
            }
        };
        let da1_pre: Vec<f64> = (0..p.cfg.h1).map(|k| da1[k] * act.grad(c.pre1[k], c.a1[k])).collect();
        p.cm1.backward_ones(&c.joint, &da1_pre, &mut g.cm1);
    }
    Ok(parts)
}
