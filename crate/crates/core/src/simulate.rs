//! The Lorenz-type map `f(x, y, z) = (y, z, M₁ + B·x + M₂·y − z²)`: frozen
//! orbits, bifurcation scans over `M₂`, and slow sweeps of `M₂` with additive
//! Gaussian noise.
//!
//! Noise is drawn from a ChaCha20 stream seeded with the run seed, converted
//! to standard normal variates by `rand_distr`'s ziggurat sampler, scaled by
//! the noise intensity, and added to each coordinate after the deterministic
//! step.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

use crate::timeseries::TimeSeries;

/// Orbits leaving `[-DIVERGENCE_BOUND, DIVERGENCE_BOUND]³` are abandoned.
pub const DIVERGENCE_BOUND: f64 = 1e6;

/// Names the random source behind [`sweep_series`], for run metadata.
pub const NOISE_GENERATOR: &str = "ChaCha20Rng(seed_from_u64) + rand_distr::StandardNormal (ziggurat)";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimulateError {
    #[error("orbit diverged at step {step}")]
    Diverged { step: usize },
    #[error("invalid parameter range: {lo} is not below {hi}")]
    InvalidRange { lo: f64, hi: f64 },
    #[error("{0} must be at least 1")]
    ZeroLength(&'static str),
    #[error("noise intensity must be non-negative, got {0}")]
    NegativeNoise(f64),
    #[error("series too short: need at least 2 values, got {0}")]
    TooShort(usize),
}

pub type State = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapParams {
    pub m1: f64,
    pub b: f64,
    pub m2: f64,
}

impl MapParams {
    pub fn new(m1: f64, b: f64, m2: f64) -> Self {
        Self { m1, b, m2 }
    }
}

#[inline]
pub fn step(state: State, params: MapParams) -> State {
    let [x, y, z] = state;
    [y, z, params.m1 + params.b * x + params.m2 * y - z * z]
}

/// `x` values of the fixed points on the diagonal `x = y = z`,
/// roots of `x² − (B + M₂ − 1)·x − M₁ = 0`.
pub fn diagonal_fixed_points(params: MapParams) -> Vec<f64> {
    let s = params.b + params.m2 - 1.0;
    let disc = s * s + 4.0 * params.m1;
    if disc < 0.0 {
        return Vec::new();
    }
    let r = disc.sqrt();
    if r == 0.0 {
        vec![0.5 * s]
    } else {
        vec![0.5 * (s - r), 0.5 * (s + r)]
    }
}

fn diverged(state: &State) -> bool {
    state.iter().any(|v| !(v.abs() <= DIVERGENCE_BOUND))
}

/// Iterates `burn_in` discarded steps, then returns `n` successive states
/// starting with the state reached after burn-in.
pub fn orbit_fixed(
    params: MapParams,
    initial: State,
    n: usize,
    burn_in: usize,
) -> Result<Vec<State>, SimulateError> {
    if n == 0 {
        return Err(SimulateError::ZeroLength("orbit length"));
    }
    let mut state = initial;
    for s in 0..burn_in {
        state = step(state, params);
        if diverged(&state) {
            return Err(SimulateError::Diverged { step: s + 1 });
        }
    }
    let mut out = Vec::with_capacity(n);
    out.push(state);
    for s in 1..n {
        state = step(state, params);
        if diverged(&state) {
            return Err(SimulateError::Diverged { step: burn_in + s });
        }
        out.push(state);
    }
    Ok(out)
}

/// One column of a bifurcation diagram.
#[derive(Debug, Clone, PartialEq)]
pub struct BifurcationColumn {
    pub m2: f64,
    pub xs: Result<Vec<f64>, SimulateError>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanConfig {
    pub m1: f64,
    pub b: f64,
    pub m2_range: (f64, f64),
    pub n_params: usize,
    pub points_per_param: usize,
    pub burn_in: usize,
    pub initial: State,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            m1: 0.0,
            b: 0.7,
            m2_range: (0.7, 0.85),
            n_params: 300,
            points_per_param: 200,
            burn_in: 1000,
            initial: [0.5, 0.5, 0.5],
        }
    }
}

/// `x`-projections of the attractor on a uniform `M₂` grid. A diverging
/// parameter is recorded in its column and the scan continues.
pub fn bifurcation_scan(config: &ScanConfig) -> Result<Vec<BifurcationColumn>, SimulateError> {
    let (lo, hi) = config.m2_range;
    if !(lo < hi) {
        return Err(SimulateError::InvalidRange { lo, hi });
    }
    if config.n_params == 0 {
        return Err(SimulateError::ZeroLength("parameter count"));
    }
    let grid: Vec<f64> = if config.n_params == 1 {
        vec![lo]
    } else {
        (0..config.n_params)
            .map(|i| lo + (hi - lo) * i as f64 / (config.n_params - 1) as f64)
            .collect()
    };
    Ok(grid
        .into_par_iter()
        .map(|m2| {
            let params = MapParams::new(config.m1, config.b, m2);
            let xs = orbit_fixed(params, config.initial, config.points_per_param, config.burn_in)
                .map(|orbit| orbit.iter().map(|s| s[0]).collect());
            BifurcationColumn { m2, xs }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    pub params0: MapParams,
    pub delta_m2: f64,
    pub noise_eps: f64,
    pub n_steps: usize,
    /// Steps taken at the frozen `params0` (with noise) before recording.
    pub burn_in: usize,
    pub seed: u64,
    pub initial_state: State,
}

impl SweepConfig {
    /// `M₁ = 0`, `B = 0.7`, `ΔM₂ = 2.8·10⁻⁵`, noise `10⁻³`, 2100 points whose
    /// last one is recorded at `M₂ ≈ 0.81`.
    pub fn standard(seed: u64) -> Self {
        let n_steps = 2100;
        let delta_m2 = 2.8e-5;
        Self {
            params0: MapParams::new(0.0, 0.7, 0.81 - n_steps as f64 * delta_m2),
            delta_m2,
            noise_eps: 1e-3,
            n_steps,
            burn_in: 1000,
            seed,
            initial_state: [0.5, 0.5, 0.5],
        }
    }

    pub fn noiseless(mut self) -> Self {
        self.noise_eps = 0.0;
        self
    }

    /// `M₂` in effect when the `t`-th recorded value was observed.
    pub fn m2_at(&self, t: usize) -> f64 {
        self.params0.m2 + t as f64 * self.delta_m2
    }
}

/// `x`-series of the slowly swept, noisy map, indexed by ticks `0..n_steps`.
pub fn sweep_series(config: &SweepConfig) -> Result<TimeSeries, SimulateError> {
    if config.n_steps == 0 {
        return Err(SimulateError::ZeroLength("step count"));
    }
    if !(config.noise_eps >= 0.0) {
        return Err(SimulateError::NegativeNoise(config.noise_eps));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let eps = config.noise_eps;
    let mut perturb = |state: &mut State| {
        if eps > 0.0 {
            for v in state.iter_mut() {
                let w: f64 = rng.sample(StandardNormal);
                *v += eps * w;
            }
        }
    };

    let mut state = config.initial_state;
    for s in 0..config.burn_in {
        state = step(state, config.params0);
        perturb(&mut state);
        if diverged(&state) {
            return Err(SimulateError::Diverged { step: s + 1 });
        }
    }
    let mut xs = Vec::with_capacity(config.n_steps);
    xs.push(state[0]);
    for t in 1..config.n_steps {
        let params = MapParams {
            m2: config.m2_at(t - 1),
            ..config.params0
        };
        state = step(state, params);
        perturb(&mut state);
        if diverged(&state) {
            return Err(SimulateError::Diverged {
                step: config.burn_in + t,
            });
        }
        xs.push(state[0]);
    }
    Ok(TimeSeries::from_values(xs).expect("bounded orbit values are finite"))
}

/// Whether every consecutive difference of `norms` is below `delta` in
/// absolute value; otherwise the index of the first offending difference.
pub fn increment_smallness_check(norms: &TimeSeries, delta: f64) -> Result<(bool, Option<usize>), SimulateError> {
    if norms.len() < 2 {
        return Err(SimulateError::TooShort(norms.len()));
    }
    let first_violation = norms
        .values()
        .windows(2)
        .position(|w| !((w[1] - w[0]).abs() < delta));
    Ok((first_violation.is_none(), first_violation))
}
