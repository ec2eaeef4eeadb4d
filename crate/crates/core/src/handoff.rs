//! Per-SU handoff chain over `(transmitted, collided, frame)` states.
//!
//! A SU packet is `h` frames of `c` slots. A slot is Idle, Transmitting
//! (clean data slot), Collided (data slot inside a frame already hit by a
//! PU) or Backlogged (waiting for a channel). A collided frame keeps
//! occupying the channel until the collision is detected, then the SU falls
//! back to the backlog of the same frame and retransmits it.
//!
//! Two solution paths share one state indexing: the closed form for the base
//! model (detection at frame end, random or pseudo-random selection) and a
//! numeric solve of the explicit one-step matrix, which also covers greedy
//! selection and short sensing delays.

use std::collections::HashMap;

use crate::chain::{stationary_distribution, StationaryDistribution, TransitionMatrix};
use crate::contention::{collision_q, ContentionParams, Scheme};
use crate::error::{Error, Result};
use crate::pu::{availability, PuParams};

/// Every scalar of the model in one validated record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Licensed channels, `M`.
    pub channels: usize,
    /// SU pairs, `N`.
    pub pairs: usize,
    /// Slots per frame, `c`.
    pub frame_slots: usize,
    /// Frames per packet, `h`.
    pub frames: usize,
    /// PU arrival probability per slot and channel, `p`.
    pub pu_arrival: f64,
    /// SU packet arrival probability per idle slot, `s`.
    pub su_arrival: f64,
    /// PU completion probability per slot, `v`.
    pub pu_completion: f64,
    /// Overlap slots before a PU collision is detected, `T_s`.
    pub sensing_delay: usize,
    pub scheme: Scheme,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            channels: 10,
            pairs: 2,
            frame_slots: 10,
            frames: 1,
            pu_arrival: 0.05,
            su_arrival: 1.0,
            pu_completion: 0.1,
            sensing_delay: 10,
            scheme: Scheme::Random,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if self.channels == 0 {
            return Err(Error::invalid("M", self.channels, "an integer >= 1"));
        }
        if self.pairs == 0 {
            return Err(Error::invalid("N", self.pairs, "an integer >= 1"));
        }
        if self.frame_slots == 0 {
            return Err(Error::invalid("c", self.frame_slots, "an integer >= 1"));
        }
        if self.frames == 0 {
            return Err(Error::invalid("h", self.frames, "an integer >= 1"));
        }
        for (key, value) in [("p", self.pu_arrival), ("s", self.su_arrival)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::invalid(key, value, "range [0,1]"));
            }
        }
        if !(self.pu_completion > 0.0 && self.pu_completion <= 1.0) {
            return Err(Error::invalid("v", self.pu_completion, "range (0,1]"));
        }
        if self.sensing_delay == 0 || self.sensing_delay > self.frame_slots {
            return Err(Error::invalid(
                "Ts",
                self.sensing_delay,
                &format!("an integer in [1, c = {}]", self.frame_slots),
            ));
        }
        Ok(())
    }

    pub fn pu_params(&self) -> Result<PuParams> {
        PuParams::new(self.channels, self.pu_arrival, self.pu_completion)
    }

    /// Detection at frame end, the unmodified model.
    pub fn is_base_sensing(&self) -> bool {
        self.sensing_delay == self.frame_slots
    }
}

/// `(N_t, N_c, N_f)`: clean slots and collided slots in the current frame,
/// and the frame index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HandoffState {
    pub transmitted: usize,
    pub collided: usize,
    pub frame: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StateClass {
    Idle,
    Transmitting,
    Collided,
    Backlogged,
}

impl HandoffState {
    pub const IDLE: HandoffState = HandoffState::new(0, 0, 0);

    pub const fn new(transmitted: usize, collided: usize, frame: usize) -> Self {
        Self {
            transmitted,
            collided,
            frame,
        }
    }

    pub fn backlogged(frame: usize) -> Self {
        Self::new(0, 0, frame)
    }

    pub fn class(&self) -> StateClass {
        match (self.transmitted, self.collided, self.frame) {
            (0, 0, 0) => StateClass::Idle,
            (0, 0, _) => StateClass::Backlogged,
            (_, 0, _) => StateClass::Transmitting,
            _ => StateClass::Collided,
        }
    }
}

/// Enumerated valid states with a stable index.
///
/// Order: Idle, then per frame the backlog state, the transmitting states
/// and the collided runs grouped by `N_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    frame_slots: usize,
    frames: usize,
    sensing_delay: usize,
    states: Vec<HandoffState>,
    index: HashMap<HandoffState, usize>,
}

impl StateSpace {
    pub fn new(frame_slots: usize, frames: usize, sensing_delay: usize) -> Self {
        let c = frame_slots;
        let mut states = vec![HandoffState::IDLE];
        for k in 1..=frames {
            states.push(HandoffState::backlogged(k));
            states.extend((1..=c).map(|i| HandoffState::new(i, 0, k)));
            for i in 0..c {
                let cap = sensing_delay.min(c - i);
                states.extend((1..=cap).map(|j| HandoffState::new(i, j, k)));
            }
        }
        let index = states.iter().enumerate().map(|(n, s)| (*s, n)).collect();
        Self {
            frame_slots,
            frames,
            sensing_delay,
            states,
            index,
        }
    }

    pub fn for_params(params: &ModelParams) -> Self {
        Self::new(params.frame_slots, params.frames, params.sensing_delay)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[HandoffState] {
        &self.states
    }

    pub fn index_of(&self, state: HandoffState) -> Option<usize> {
        self.index.get(&state).copied()
    }

    /// Longest collided run after `transmitted` clean slots.
    pub fn collided_cap(&self, transmitted: usize) -> usize {
        self.sensing_delay.min(self.frame_slots - transmitted)
    }

    pub fn count(&self, class: StateClass) -> usize {
        self.states.iter().filter(|s| s.class() == class).count()
    }

    pub fn frame_slots(&self) -> usize {
        self.frame_slots
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn sensing_delay(&self) -> usize {
        self.sensing_delay
    }
}

/// Number of collided states, `[T_s(c − T_s + 1) + T_s(T_s − 1)/2]·h`.
pub fn collided_state_count(frame_slots: usize, frames: usize, sensing_delay: usize) -> usize {
    let (c, t) = (frame_slots, sensing_delay);
    (t * (c - t + 1) + t * (t - 1) / 2) * frames
}

/// Stationary mass over a [`StateSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct HandoffDistribution {
    space: StateSpace,
    dist: StationaryDistribution,
}

impl HandoffDistribution {
    pub fn new(space: StateSpace, dist: StationaryDistribution) -> Self {
        assert_eq!(
            space.len(),
            dist.len(),
            "distribution does not match state space"
        );
        Self { space, dist }
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn distribution(&self) -> &StationaryDistribution {
        &self.dist
    }

    /// Probability of `state`; zero for states outside the space.
    pub fn prob(&self, state: HandoffState) -> f64 {
        self.space.index_of(state).map_or(0.0, |i| self.dist.get(i))
    }

    /// Total mass on states of one class.
    pub fn mass(&self, class: StateClass) -> f64 {
        self.space
            .states()
            .iter()
            .zip(self.dist.probs())
            .filter(|(s, _)| s.class() == class)
            .map(|(_, p)| p)
            .sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.space, other.space, "state spaces differ");
        self.dist.max_abs_diff(&other.dist)
    }
}

/// Normalized throughput: total mass of the Transmitting states.
pub fn throughput(dist: &HandoffDistribution) -> f64 {
    dist.mass(StateClass::Transmitting)
}

/// SU–PU collision probability: total mass of the Collided states.
pub fn collision_probability(dist: &HandoffDistribution) -> f64 {
    dist.mass(StateClass::Collided)
}

/// Per-slot probability of staying backlogged, `q·u + (1 − u)`.
pub fn backlog_stay_probability(q: f64, u: f64) -> f64 {
    q * u + (1.0 - u)
}

/// Mean backlog dwell `1 / (1 − p_d)` in slots.
pub fn handoff_delay(q: f64, u: f64) -> Result<f64> {
    let p_d = backlog_stay_probability(q, u);
    if p_d >= 1.0 {
        return Err(Error::InfiniteDelay { p_d });
    }
    Ok(1.0 / (1.0 - p_d))
}

fn check_probability(key: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::invalid(key, x, "range [0,1]"));
    }
    Ok(())
}

/// Point mass used when the backlog can never be left or no packet ever
/// arrives.
fn degenerate(params: &ModelParams, q: f64, u: f64) -> Option<HandoffDistribution> {
    let space = StateSpace::for_params(params);
    let target = if params.su_arrival == 0.0 {
        HandoffState::IDLE
    } else if u * (1.0 - q) == 0.0 {
        HandoffState::backlogged(1)
    } else {
        return None;
    };
    let at = space.index_of(target).expect("state exists");
    let n = space.len();
    Some(HandoffDistribution::new(
        space,
        StationaryDistribution::delta(n, at),
    ))
}

/// Closed-form stationary distribution of the base model.
///
/// Every state is expressed through the tier-1 backlog probability
/// `P(0,0,1)`, tiers chained through the frame-end state `P(c,0,k−1)`, and
/// the whole vector is normalized at the end.
pub fn closed_form_stationary(params: &ModelParams, q: f64, u: f64) -> Result<HandoffDistribution> {
    params.validate()?;
    check_probability("q", q)?;
    check_probability("u", u)?;
    if params.scheme == Scheme::Greedy {
        return Err(Error::Unsupported(
            "greedy selection has no closed form; use the numeric chain".into(),
        ));
    }
    if !params.is_base_sensing() {
        return Err(Error::Unsupported(
            "sensing delay below the frame length has no closed form; use the numeric chain".into(),
        ));
    }
    if let Some(dist) = degenerate(params, q, u) {
        return Ok(dist);
    }

    let space = StateSpace::for_params(params);
    let (c, h) = (params.frame_slots, params.frames);
    let (p, s) = (params.pu_arrival, params.su_arrival);
    let access = u * (1.0 - q);
    let mut w = vec![0.0; space.len()];
    let mut set = |state: HandoffState, value: f64| {
        let i = space
            .index_of(state)
            .expect("closed form touches only valid states");
        w[i] = value;
    };

    // Unnormalized, with P(0,0,1) = 1.
    let last_clean;
    if p == 0.0 {
        // No PU: no collided mass, every transmitting state carries the
        // access weight u(1 − q) (u = 1 without PUs), later tiers have no backlog.
        for k in 1..=h {
            for i in 1..=c {
                set(HandoffState::new(i, 0, k), access);
            }
        }
        set(HandoffState::backlogged(1), 1.0);
        last_clean = access;
    } else {
        let clean = 1.0 - p;
        set(HandoffState::backlogged(1), 1.0);
        for i in 1..=c {
            set(HandoffState::new(i, 0, 1), access * clean.powi(i as i32));
        }
        for j in 1..=c {
            set(HandoffState::new(0, j, 1), access * p);
        }
        for i in 1..c {
            let value = access * p * clean.powi(i as i32);
            for j in 1..=(c - i) {
                set(HandoffState::new(i, j, 1), value);
            }
        }
        let mut frame_end = access * clean.powi(c as i32);
        for k in 2..=h {
            // Tier k fed by the clean end of frame k−1.
            let (first_clean, first_collided, backlog) = if frame_end == 0.0 {
                (0.0, 0.0, 0.0)
            } else {
                let full = clean.powi(c as i32);
                (
                    frame_end / clean.powi(c as i32 - 1),
                    p * frame_end / full,
                    (1.0 - full) / (access * full) * frame_end,
                )
            };
            set(HandoffState::backlogged(k), backlog);
            for i in 1..=c {
                set(
                    HandoffState::new(i, 0, k),
                    clean.powi(i as i32 - 1) * first_clean,
                );
            }
            for j in 1..=c {
                set(HandoffState::new(0, j, k), first_collided);
            }
            for i in 1..c {
                let value = p * clean.powi(i as i32 - 1) * first_clean;
                for j in 1..=(c - i) {
                    set(HandoffState::new(i, j, k), value);
                }
            }
            frame_end = clean.powi(c as i32 - 1) * first_clean;
        }
        last_clean = frame_end;
    }
    set(HandoffState::IDLE, (1.0 - s) / s * last_clean);

    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    Ok(HandoffDistribution::new(
        space,
        StationaryDistribution::new(w)?,
    ))
}

/// Explicit one-step matrix, covering greedy selection and short sensing
/// delays as well as the base model.
pub fn build_full_chain(
    params: &ModelParams,
    q: f64,
    u: f64,
) -> Result<(TransitionMatrix, StateSpace)> {
    params.validate()?;
    check_probability("q", q)?;
    check_probability("u", u)?;
    let space = StateSpace::for_params(params);
    let n = space.len();
    let (c, h) = (params.frame_slots, params.frames);
    let (p, s) = (params.pu_arrival, params.su_arrival);
    let greedy = params.scheme == Scheme::Greedy;
    let mut data = vec![0.0; n * n];
    let idx = |state: HandoffState| space.index_of(state).expect("valid target state");

    for (from, state) in space.states().iter().enumerate() {
        let row = &mut data[from * n..(from + 1) * n];
        let HandoffState {
            transmitted: i,
            collided: j,
            frame: k,
        } = *state;
        match state.class() {
            StateClass::Idle => {
                row[idx(HandoffState::IDLE)] += 1.0 - s;
                row[idx(HandoffState::backlogged(1))] += s;
            }
            StateClass::Backlogged => {
                row[from] += backlog_stay_probability(q, u);
                row[idx(HandoffState::new(1, 0, k))] += u * (1.0 - p) * (1.0 - q);
                row[idx(HandoffState::new(0, 1, k))] += u * p * (1.0 - q);
            }
            StateClass::Transmitting if i < c => {
                row[idx(HandoffState::new(i + 1, 0, k))] += 1.0 - p;
                row[idx(HandoffState::new(i, 1, k))] += p;
            }
            StateClass::Transmitting if k < h => {
                row[idx(HandoffState::new(1, 0, k + 1))] += 1.0 - p;
                row[idx(HandoffState::new(0, 1, k + 1))] += p;
            }
            StateClass::Transmitting => {
                row[idx(HandoffState::IDLE)] += 1.0 - s;
                row[idx(HandoffState::backlogged(1))] += s;
            }
            StateClass::Collided if j < space.collided_cap(i) => {
                row[idx(HandoffState::new(i, j + 1, k))] += 1.0;
            }
            StateClass::Collided if greedy => {
                // The greedy channel is known to both ends, so the frame is
                // retried at once whenever some channel is idle.
                row[idx(HandoffState::backlogged(k))] += 1.0 - u;
                row[idx(HandoffState::new(1, 0, k))] += u * (1.0 - p);
                row[idx(HandoffState::new(0, 1, k))] += u * p;
            }
            StateClass::Collided => {
                row[idx(HandoffState::backlogged(k))] += 1.0;
            }
        }
    }
    let matrix = TransitionMatrix::new(n, data)?;
    Ok((matrix, space))
}

/// Numeric stationary distribution of [`build_full_chain`].
pub fn numeric_stationary(params: &ModelParams, q: f64, u: f64) -> Result<HandoffDistribution> {
    let (matrix, space) = build_full_chain(params, q, u)?;
    if let Some(dist) = degenerate(params, q, u) {
        return Ok(dist);
    }
    let dist = stationary_distribution(&matrix)?;
    Ok(HandoffDistribution::new(space, dist))
}

/// Throughput, collision probability and backlog dwell of one solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedMetrics {
    pub theta: f64,
    pub pr_collision: f64,
    /// Mean backlog dwell in slots; infinite when the backlog is absorbing.
    pub ds: f64,
    pub pd: f64,
}

impl DerivedMetrics {
    pub fn from_distribution(dist: &HandoffDistribution, q: f64, u: f64) -> Self {
        Self {
            theta: throughput(dist),
            pr_collision: collision_probability(dist),
            ds: handoff_delay(q, u).unwrap_or(f64::INFINITY),
            pd: backlog_stay_probability(q, u),
        }
    }
}

/// Full analytic evaluation of one parameter point.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub params: ModelParams,
    pub u: f64,
    pub q: f64,
    pub distribution: HandoffDistribution,
    pub metrics: DerivedMetrics,
}

/// Availability from the PU chain, `q` from the contention model, then the
/// handoff chain (closed form where it applies, numeric otherwise).
pub fn analyze(params: &ModelParams) -> Result<Analysis> {
    params.validate()?;
    let avail = availability(&params.pu_params()?)?;
    let u = avail.u();
    let contention = ContentionParams::new(
        params.pairs,
        params.frame_slots,
        params.frames,
        params.pu_arrival,
        avail,
    )?;
    let q = collision_q(&contention, params.scheme)?;
    let distribution = if params.scheme != Scheme::Greedy && params.is_base_sensing() {
        closed_form_stationary(params, q, u)?
    } else {
        numeric_stationary(params, q, u)?
    };
    let metrics = DerivedMetrics::from_distribution(&distribution, q, u);
    Ok(Analysis {
        params: *params,
        u,
        q,
        distribution,
        metrics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::BALANCE_TOLERANCE;
    use approx::assert_abs_diff_eq;

    fn base(c: usize, h: usize, p: f64, s: f64) -> ModelParams {
        ModelParams {
            channels: 10,
            pairs: 1,
            frame_slots: c,
            frames: h,
            pu_arrival: p,
            su_arrival: s,
            pu_completion: 0.1,
            sensing_delay: c,
            scheme: Scheme::Random,
        }
    }

    #[test]
    fn state_classes() {
        assert_eq!(HandoffState::IDLE.class(), StateClass::Idle);
        assert_eq!(HandoffState::new(0, 0, 2).class(), StateClass::Backlogged);
        assert_eq!(HandoffState::new(3, 0, 1).class(), StateClass::Transmitting);
        assert_eq!(HandoffState::new(3, 2, 1).class(), StateClass::Collided);
        assert_eq!(HandoffState::new(0, 1, 1).class(), StateClass::Collided);
    }

    #[test]
    fn state_counts() {
        let space = StateSpace::new(10, 1, 10);
        assert_eq!(space.len(), 67);
        assert_eq!(space.count(StateClass::Collided), 55);
        assert_eq!(space.count(StateClass::Transmitting), 10);
        let space = StateSpace::new(10, 1, 3);
        assert_eq!(space.len(), 39);
        assert_eq!(space.count(StateClass::Collided), 27);
        for c in 1..=12 {
            assert_eq!(collided_state_count(c, 1, c), c * (c + 1) / 2);
            for t in 1..=c {
                assert_eq!(
                    StateSpace::new(c, 2, t).count(StateClass::Collided),
                    collided_state_count(c, 2, t)
                );
            }
        }
    }

    #[test]
    fn no_pu_closed_form() {
        let dist = closed_form_stationary(&base(10, 1, 0.0, 1.0), 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(
            dist.prob(HandoffState::backlogged(1)),
            1.0 / 11.0,
            epsilon = 1e-12
        );
        for i in 1..=10 {
            assert_abs_diff_eq!(
                dist.prob(HandoffState::new(i, 0, 1)),
                1.0 / 11.0,
                epsilon = 1e-12
            );
        }
        assert_eq!(dist.prob(HandoffState::IDLE), 0.0);
        assert_abs_diff_eq!(throughput(&dist), 10.0 / 11.0, epsilon = 1e-12);
        assert_eq!(collision_probability(&dist), 0.0);
    }

    #[test]
    fn frame_end_mass_is_tier_invariant() {
        let dist = closed_form_stationary(&base(10, 3, 0.05, 0.7), 0.1, 0.9).unwrap();
        let first = dist.prob(HandoffState::new(10, 0, 1));
        for k in 2..=3 {
            assert_abs_diff_eq!(
                dist.prob(HandoffState::new(10, 0, k)),
                first,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn closed_form_normalizes() {
        let dist = closed_form_stationary(&base(10, 1, 0.05, 1.0), 0.0, 0.95).unwrap();
        let total: f64 = dist.distribution().probs().iter().sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        let parts = [
            StateClass::Idle,
            StateClass::Transmitting,
            StateClass::Collided,
            StateClass::Backlogged,
        ]
        .iter()
        .map(|&c| dist.mass(c))
        .sum::<f64>();
        assert_abs_diff_eq!(parts, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn closed_form_matches_numeric() {
        let params = base(10, 1, 0.05, 1.0);
        let closed = closed_form_stationary(&params, 0.1, 0.9).unwrap();
        let numeric = numeric_stationary(&params, 0.1, 0.9).unwrap();
        assert!(closed.max_abs_diff(&numeric) <= 1e-9);
        let params = base(10, 2, 0.0, 0.6);
        let closed = closed_form_stationary(&params, 0.2, 1.0).unwrap();
        let numeric = numeric_stationary(&params, 0.2, 1.0).unwrap();
        assert!(closed.max_abs_diff(&numeric) <= 1e-9);
    }

    #[test]
    fn backlog_balance_on_numeric_solution() {
        let params = base(4, 3, 0.1, 0.5);
        let (q, u) = (0.3, 0.8);
        let (matrix, space) = build_full_chain(&params, q, u).unwrap();
        let dist = numeric_stationary(&params, q, u).unwrap();
        assert!(dist.distribution().balance_residual(&matrix) <= BALANCE_TOLERANCE);
        // Tier 1 also receives new packets; the identity holds for later tiers.
        for k in 2..=3 {
            let inflow: f64 = (0..4)
                .map(|i| dist.prob(HandoffState::new(i, 4 - i, k)))
                .sum();
            let outflow = u * (1.0 - q) * dist.prob(HandoffState::backlogged(k));
            assert_abs_diff_eq!(inflow, outflow, epsilon = 1e-9);
        }
        assert_eq!(space.len(), dist.space().len());
    }

    #[test]
    fn greedy_closed_form_is_refused() {
        let mut params = base(10, 1, 0.05, 1.0);
        params.scheme = Scheme::Greedy;
        assert!(matches!(
            closed_form_stationary(&params, 0.0, 0.9),
            Err(Error::Unsupported(_))
        ));
        params.scheme = Scheme::Random;
        params.sensing_delay = 3;
        assert!(closed_form_stationary(&params, 0.0, 0.9).is_err());
    }

    #[test]
    fn greedy_with_certain_su_collision_never_transmits() {
        for h in [1, 3] {
            let mut params = base(10, h, 0.05, 1.0);
            params.scheme = Scheme::Greedy;
            params.pairs = 3;
            let dist = numeric_stationary(&params, 1.0, 0.99).unwrap();
            assert_eq!(throughput(&dist), 0.0);
            assert_eq!(dist.prob(HandoffState::backlogged(1)), 1.0);
        }
    }

    #[test]
    fn greedy_rows_are_stochastic() {
        let mut params = base(6, 2, 0.2, 0.5);
        params.scheme = Scheme::Greedy;
        params.sensing_delay = 2;
        let (matrix, _) = build_full_chain(&params, 0.0, 0.7).unwrap();
        matrix.validate().unwrap();
    }

    #[test]
    fn no_arrivals_parks_in_idle() {
        let dist = closed_form_stationary(&base(10, 1, 0.05, 0.0), 0.0, 0.9).unwrap();
        assert_eq!(dist.prob(HandoffState::IDLE), 1.0);
        let dist = numeric_stationary(&base(10, 1, 0.05, 0.0), 0.0, 0.9).unwrap();
        assert_eq!(dist.prob(HandoffState::IDLE), 1.0);
    }

    #[test]
    fn certain_pu_arrival() {
        let params = base(4, 1, 1.0, 1.0);
        let closed = closed_form_stationary(&params, 0.0, 0.5).unwrap();
        let numeric = numeric_stationary(&params, 0.0, 0.5).unwrap();
        assert!(closed.max_abs_diff(&numeric) <= 1e-9);
        assert_eq!(throughput(&closed), 0.0);

        // Every frame collides, so each tier is its own closed class.
        let params = base(4, 3, 1.0, 1.0);
        assert!(matches!(
            numeric_stationary(&params, 0.0, 0.5),
            Err(Error::MultipleRecurrentClasses { ref classes }) if classes.len() == 3
        ));
    }

    #[test]
    fn handoff_delay_values() {
        assert_abs_diff_eq!(handoff_delay(0.0, 1.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(handoff_delay(0.5, 1.0).unwrap(), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            handoff_delay(0.25, 0.8).unwrap(),
            5.0 / 3.0,
            epsilon = 1e-12
        );
        assert!(matches!(
            handoff_delay(1.0, 0.7),
            Err(Error::InfiniteDelay { .. })
        ));
    }

    #[test]
    fn params_validation() {
        let mut params = ModelParams::default();
        params.validate().unwrap();
        params.sensing_delay = 11;
        assert!(params.validate().is_err());
        params.sensing_delay = 0;
        assert!(params.validate().is_err());
        let params = ModelParams {
            pu_arrival: 1.5,
            ..ModelParams::default()
        };
        assert!(
            matches!(params.validate(), Err(Error::InvalidParam { ref key, .. }) if key == "p")
        );
    }

    #[test]
    fn throughput_falls_with_pu_load() {
        let mut params = ModelParams {
            pairs: 1,
            ..ModelParams::default()
        };
        params.pu_arrival = 0.02;
        let low = analyze(&params).unwrap().metrics.theta;
        params.pu_arrival = 0.2;
        let high = analyze(&params).unwrap().metrics.theta;
        assert!(high < low);
    }
}
