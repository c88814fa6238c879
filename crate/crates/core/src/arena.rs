//! The attention arena: a fixed population of item slots whose visibility
//! shares live on the probability simplex.
//!
//! Each iteration computes a potential visibility for every slot,
//!
//! ```text
//! p_i = current_i + alpha * (current_i - previous_i) + noise_i
//! ```
//!
//! clamps it at zero and renormalizes so the shares sum to one. A slot
//! whose potential falls to zero or below while it still held attention is
//! retired and handed to a fresh item that enters with zero visibility and
//! no momentum.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::params::ModelParams;

pub type ItemId = u64;

/// Random stream used by [`run`]: one per run, seeded from the parameters.
pub type RunRng = ChaCha8Rng;

pub fn run_rng(seed: u64) -> RunRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Source of the per-slot exogenous noise. Draws for one iteration are
/// written in slot order.
pub trait NoiseSource {
    fn fill<R: Rng + ?Sized>(&mut self, rng: &mut R, out: &mut [f64]);
}

/// Gaussian noise with standard deviation `1 / (n sqrt(c))`.
#[derive(Debug, Clone, Copy)]
pub struct GaussianNoise {
    normal: Normal<f64>,
}

impl GaussianNoise {
    pub fn new(params: &ModelParams) -> Self {
        GaussianNoise::with_sigma(params.noise_sigma())
    }

    pub fn with_sigma(sigma: f64) -> Self {
        // sigma is positive and finite for validated params
        let normal = Normal::new(0.0, sigma).expect("noise sigma must be finite and non-negative");
        GaussianNoise { normal }
    }

    pub fn sigma(&self) -> f64 {
        self.normal.std_dev()
    }
}

impl NoiseSource for GaussianNoise {
    fn fill<R: Rng + ?Sized>(&mut self, rng: &mut R, out: &mut [f64]) {
        for x in out.iter_mut() {
            *x = rng.sample(self.normal);
        }
    }
}

/// Noise that is identically zero. Leaves the random stream untouched.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroNoise;

impl NoiseSource for ZeroNoise {
    fn fill<R: Rng + ?Sized>(&mut self, _rng: &mut R, out: &mut [f64]) {
        out.fill(0.0);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplacementEvent {
    /// Iteration whose row first shows the new item.
    pub t: usize,
    pub slot: usize,
    pub old_id: ItemId,
    pub new_id: ItemId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArenaState {
    /// Index of the iteration held in `current` (1-based).
    pub t: usize,
    pub current: Vec<f64>,
    pub previous: Vec<f64>,
    pub identities: Vec<ItemId>,
    pub next_id: ItemId,
}

/// Result of advancing the arena by one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub state: ArenaState,
    pub events: Vec<ReplacementEvent>,
    /// Every clamped potential was zero and the shares were reset to uniform.
    pub degenerate: bool,
}

impl ArenaState {
    pub fn n(&self) -> usize {
        self.current.len()
    }

    /// Advances in place, appending any replacements to `events`.
    /// Returns `true` when the all-zero fallback fired.
    ///
    /// # Panics
    ///
    /// If `noise.len()` differs from the number of slots.
    pub fn advance(&mut self, alpha: f64, noise: &[f64], events: &mut Vec<ReplacementEvent>) -> bool {
        let n = self.n();
        assert_eq!(noise.len(), n, "noise vector length must equal the number of slots");
        let t_next = self.t + 1;

        // `previous` is overwritten with the clamped potentials, then the
        // two buffers swap roles.
        let mut total = 0.0;
        for ((prev, &cur), &eps) in self.previous.iter_mut().zip(&self.current).zip(noise) {
            let clamped = (cur + alpha * (cur - *prev) + eps).max(0.0);
            *prev = clamped;
            total += clamped;
        }
        std::mem::swap(&mut self.current, &mut self.previous);
        self.t = t_next;

        if total <= 0.0 {
            self.current.fill(1.0 / n as f64);
            return true;
        }

        for i in 0..n {
            // zero clamped potential coming from a live slot: retire it
            if self.current[i] == 0.0 && self.previous[i] > 0.0 {
                let new_id = self.next_id;
                self.next_id += 1;
                events.push(ReplacementEvent {
                    t: t_next,
                    slot: i,
                    old_id: self.identities[i],
                    new_id,
                });
                self.identities[i] = new_id;
                self.previous[i] = 0.0;
            }
            self.current[i] /= total;
        }
        false
    }

    /// Pure form of [`ArenaState::advance`].
    pub fn step(&self, params: &ModelParams, noise: &[f64]) -> StepOutcome {
        let mut state = self.clone();
        let mut events = Vec::new();
        let degenerate = state.advance(params.alpha, noise, &mut events);
        StepOutcome {
            state,
            events,
            degenerate,
        }
    }
}

/// Clamps at zero and normalizes in place; falls back to the uniform vector
/// when nothing survives. Returns `true` on fallback.
fn clamp_normalize(values: &mut [f64]) -> bool {
    let mut total = 0.0;
    for v in values.iter_mut() {
        *v = v.max(0.0);
        total += *v;
    }
    if total <= 0.0 {
        let u = 1.0 / values.len() as f64;
        values.fill(u);
        return true;
    }
    for v in values.iter_mut() {
        *v /= total;
    }
    false
}

/// The two initialization rows and the state positioned at `t = 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Initialized {
    pub state: ArenaState,
    pub first: Vec<f64>,
    pub second: Vec<f64>,
    pub degenerate: bool,
}

/// Row 1 is normalized uniform draws; row 2 adds one noise draw per item
/// and clamps and renormalizes. Initialization never issues replacements.
pub fn init_arena<R, N>(params: &ModelParams, rng: &mut R, noise: &mut N) -> Initialized
where
    R: Rng + ?Sized,
    N: NoiseSource,
{
    let n = params.n;
    let mut first: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Open01)).collect();
    let total: f64 = first.iter().sum();
    first.iter_mut().for_each(|v| *v /= total);

    let mut eps = vec![0.0; n];
    noise.fill(rng, &mut eps);
    let mut second: Vec<f64> = first.iter().zip(&eps).map(|(p, e)| p + e).collect();
    let degenerate = clamp_normalize(&mut second);

    let state = ArenaState {
        t: 2,
        current: second.clone(),
        previous: first.clone(),
        identities: (0..n as ItemId).collect(),
        next_id: n as ItemId,
    };
    Initialized {
        state,
        first,
        second,
        degenerate,
    }
}

/// Complete record of one run. Rows are indexed by iteration `t` in
/// `1..=iterations`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub params: ModelParams,
    /// Row-major `iterations x n` visibility shares.
    pub visibility: Vec<f64>,
    /// Row-major `iterations x n` item ids.
    pub identity: Vec<ItemId>,
    pub events: Vec<ReplacementEvent>,
    pub degenerate_resets: Vec<usize>,
}

impl RunTrace {
    pub fn n(&self) -> usize {
        self.params.n
    }

    /// Number of rows.
    pub fn len(&self) -> usize {
        self.visibility.len() / self.params.n
    }

    pub fn is_empty(&self) -> bool {
        self.visibility.is_empty()
    }

    pub fn row(&self, t: usize) -> &[f64] {
        let n = self.n();
        &self.visibility[(t - 1) * n..t * n]
    }

    pub fn ids(&self, t: usize) -> &[ItemId] {
        let n = self.n();
        &self.identity[(t - 1) * n..t * n]
    }

    /// Visibility rows in iteration order.
    pub fn rows(&self) -> std::slice::Chunks<'_, f64> {
        self.visibility.chunks(self.n())
    }
}

/// Runs the model with Gaussian noise from a stream seeded by `params.seed`.
pub fn run(params: &ModelParams) -> RunTrace {
    run_with_noise(params, &mut GaussianNoise::new(params))
}

pub fn run_with_noise<N: NoiseSource>(params: &ModelParams, noise: &mut N) -> RunTrace {
    let n = params.n;
    let iterations = params.iterations;
    let mut rng = run_rng(params.seed);

    let init = init_arena(params, &mut rng, noise);
    let mut visibility = Vec::with_capacity(iterations * n);
    let mut identity = Vec::with_capacity(iterations * n);
    let mut degenerate_resets = Vec::new();
    visibility.extend_from_slice(&init.first);
    visibility.extend_from_slice(&init.second);
    identity.extend_from_slice(&init.state.identities);
    identity.extend_from_slice(&init.state.identities);
    if init.degenerate {
        degenerate_resets.push(2);
    }

    let mut state = init.state;
    let mut events = Vec::new();
    let mut eps = vec![0.0; n];
    for _ in 2..iterations {
        noise.fill(&mut rng, &mut eps);
        if state.advance(params.alpha, &eps, &mut events) {
            degenerate_resets.push(state.t);
        }
        visibility.extend_from_slice(&state.current);
        identity.extend_from_slice(&state.identities);
    }

    RunTrace {
        params: *params,
        visibility,
        identity,
        events,
        degenerate_resets,
    }
}
