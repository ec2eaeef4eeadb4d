//! Slot-level Monte Carlo simulator of `N` SU pairs over `M` ON/OFF PU
//! channels.
//!
//! Per slot:
//! 1. every PU channel updates, finish-then-arrive;
//! 2. every SU pair plays its slot: an idle pair may get a packet, a pair on
//!    a data channel sends one data slot (clean, or collided if the PU is ON
//!    or the frame was already hit), a backlogged pair sits on the common
//!    hopping channel and exchanges RTS/CTS;
//! 3. backlogged pairs pick a data channel among those available this slot;
//!    a pair alone on its pick starts data next slot, pairs sharing a pick
//!    all stay backlogged.
//!
//! A collided frame is detected after `min(T_s, remaining frame slots)`
//! overlap slots and retried from the backlog. Clean frames advance on the
//! same channel until the packet's `h` frames are through.
//!
//! # Random streams
//!
//! All randomness comes from ChaCha8 seeded with the run seed, split by
//! stream id: stream 0 draws SU packet arrivals, stream 1 the shared
//! per-slot channel permutation of pseudo-random selection, streams
//! `2..2+M` drive the PU channels and streams `2+M..2+M+N` the SU pairs'
//! own channel picks. Results are bit-identical across platforms for a
//! given seed.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::contention::Scheme;
use crate::error::{Error, Result};
use crate::handoff::{ModelParams, StateClass};

/// Slot count below which a run is too short for acceptance comparisons.
pub const ACCEPTANCE_MIN_SLOTS: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub params: ModelParams,
    pub slots: u64,
    pub warmup: u64,
    pub seed: u64,
    /// Treat channels held by other SU pairs as unavailable when selecting.
    pub exclude_su_occupied: bool,
    /// Every pair always has a packet queued.
    pub saturated: bool,
    /// Record a per-slot trace.
    pub trace: bool,
}

impl SimConfig {
    pub fn new(params: ModelParams) -> Self {
        Self {
            params,
            slots: 1_000_000,
            warmup: 100_000,
            seed: 1,
            exclude_su_occupied: true,
            saturated: false,
            trace: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.warmup >= self.slots {
            return Err(Error::invalid(
                "warmup",
                self.warmup,
                &format!("fewer than slots = {}", self.slots),
            ));
        }
        Ok(())
    }

    pub fn counted_slots(&self) -> u64 {
        self.slots - self.warmup
    }
}

/// Stream ids of the run's random generators.
pub mod streams {
    pub const ARRIVALS: u64 = 0;
    pub const COORDINATION: u64 = 1;

    pub fn pu_channel(channel: usize) -> u64 {
        2 + channel as u64
    }

    pub fn su_pair(channels: usize, pair: usize) -> u64 {
        2 + channels as u64 + pair as u64
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Slot accounting for one SU pair (or the sum over pairs).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SuCounts {
    pub idle: u64,
    pub transmitting: u64,
    pub collided: u64,
    pub backlogged: u64,
    /// Frames delivered clean, counted only when every slot of the frame
    /// fell after warmup.
    pub delivered_frames: u64,
    /// Clean slots belonging to those delivered frames.
    pub delivered_frame_slots: u64,
    /// Clean slots of frames later hit by a PU.
    pub aborted_clean_slots: u64,
    /// Clean slots of frames that straddle warmup or were still running at
    /// the end of the run.
    pub boundary_clean_slots: u64,
    pub packets_delivered: u64,
    /// Completed backlog episodes and their total length in slots.
    pub backlog_episodes: u64,
    pub backlog_episode_slots: u64,
    /// Channel picks made, and how many of them clashed with another pair.
    pub selections: u64,
    pub selection_collisions: u64,
}

impl SuCounts {
    pub fn total(&self) -> u64 {
        self.idle + self.transmitting + self.collided + self.backlogged
    }

    fn add(&mut self, other: &SuCounts) {
        self.idle += other.idle;
        self.transmitting += other.transmitting;
        self.collided += other.collided;
        self.backlogged += other.backlogged;
        self.delivered_frames += other.delivered_frames;
        self.delivered_frame_slots += other.delivered_frame_slots;
        self.aborted_clean_slots += other.aborted_clean_slots;
        self.boundary_clean_slots += other.boundary_clean_slots;
        self.packets_delivered += other.packets_delivered;
        self.backlog_episodes += other.backlog_episodes;
        self.backlog_episode_slots += other.backlog_episode_slots;
        self.selections += other.selections;
        self.selection_collisions += other.selection_collisions;
    }
}

/// One line of the optional per-slot trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceRecord {
    pub slot: u64,
    pub su: usize,
    pub status: StateClass,
    pub channel: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub seed: u64,
    pub counted_slots: u64,
    pub per_su: Vec<SuCounts>,
    pub aggregate: SuCounts,
    /// Clean data slots over counted slots, averaged over pairs.
    pub throughput: f64,
    /// Collided data slots over counted slots, averaged over pairs.
    pub pr_collision: f64,
    /// Mean length of a backlog episode in slots.
    pub mean_backlog_dwell: f64,
    /// Fraction of channel picks that clashed with another pair's pick.
    pub q_hat: f64,
    /// Per-slot share of clashing picks among that slot's selectors,
    /// averaged over all counted slots (zero in slots without selectors).
    pub q_slot_mean: f64,
    /// Per channel, counted slots with the PU ON.
    pub channel_busy_slots: Vec<u64>,
    /// `busy_histogram[i]`: counted slots with exactly `i` busy channels.
    pub busy_histogram: Vec<u64>,
    pub trace: Option<Vec<TraceRecord>>,
}

impl SimResult {
    pub fn status_fraction(&self, class: StateClass) -> f64 {
        let total = self.aggregate.total() as f64;
        let count = match class {
            StateClass::Idle => self.aggregate.idle,
            StateClass::Transmitting => self.aggregate.transmitting,
            StateClass::Collided => self.aggregate.collided,
            StateClass::Backlogged => self.aggregate.backlogged,
        };
        count as f64 / total
    }

    /// Writes the trace, if recorded, as `slot,su,status,channel` CSV.
    pub fn write_trace_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "slot,su,status,channel")?;
        for r in self.trace.iter().flatten() {
            let status = match r.status {
                StateClass::Idle => "idle",
                StateClass::Transmitting => "transmitting",
                StateClass::Collided => "collided",
                StateClass::Backlogged => "backlogged",
            };
            let channel = r.channel.map(|c| c.to_string()).unwrap_or_default();
            writeln!(out, "{},{},{},{}", r.slot, r.su, status, channel)?;
        }
        Ok(())
    }
}

/// Picks a data channel for one backlogged pair.
///
/// `available` lists the channels usable this slot. For pseudo-random
/// selection it must already be in the slot's shared permutation order and
/// `rank` is the pair's position among this slot's selectors; the other
/// schemes ignore `rank`.
pub fn select_channel<R: Rng + ?Sized>(
    scheme: Scheme,
    available: &[usize],
    rank: usize,
    rng: &mut R,
) -> Option<usize> {
    if available.is_empty() {
        return None;
    }
    match scheme {
        Scheme::Random => Some(available[rng.random_range(0..available.len())]),
        Scheme::Greedy => available.iter().copied().min(),
        Scheme::PseudoRandom => available.get(rank).copied(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Phase {
    /// No packet queued.
    Free,
    Backlogged {
        frame: usize,
    },
    Active(Frame),
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Frame {
    channel: usize,
    frame: usize,
    clean: usize,
    collided: usize,
    /// Clean slots of this frame that fell in the counted window.
    clean_counted: u64,
    started_counted: bool,
}

impl Frame {
    fn start(channel: usize, frame: usize, counted: bool) -> Self {
        Self {
            channel,
            frame,
            clean: 0,
            collided: 0,
            clean_counted: 0,
            started_counted: counted,
        }
    }
}

struct Pair {
    phase: Phase,
    rng: ChaCha8Rng,
    counts: SuCounts,
    /// Slots spent in the current backlog episode and whether it began in
    /// the counted window.
    episode: Option<(u64, bool)>,
}

/// Runs one simulation.
pub fn run(config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    let params = &config.params;
    let (m, n) = (params.channels, params.pairs);
    let (c, h) = (params.frame_slots, params.frames);
    let (p, v) = (params.pu_arrival, params.pu_completion);
    let s = if config.saturated {
        1.0
    } else {
        params.su_arrival
    };

    let mut arrivals = stream(config.seed, streams::ARRIVALS);
    let mut coordination = stream(config.seed, streams::COORDINATION);
    let mut pu_rngs: Vec<ChaCha8Rng> = (0..m)
        .map(|ch| stream(config.seed, streams::pu_channel(ch)))
        .collect();
    let mut pu_on = vec![false; m];
    let mut pairs: Vec<Pair> = (0..n)
        .map(|i| Pair {
            phase: Phase::Free,
            rng: stream(config.seed, streams::su_pair(m, i)),
            counts: SuCounts::default(),
            episode: None,
        })
        .collect();

    let mut channel_busy_slots = vec![0u64; m];
    let mut busy_histogram = vec![0u64; m + 1];
    let mut trace = config.trace.then(Vec::new);
    let mut q_slot_sum = 0.0;

    let mut selectors: Vec<usize> = Vec::with_capacity(n);
    let mut su_held = vec![false; m];
    let mut available: Vec<usize> = Vec::with_capacity(m);
    let mut order: Vec<usize> = (0..m).collect();
    let mut picks: Vec<Option<usize>> = vec![None; n];
    let mut pick_count = vec![0usize; m];

    for slot in 0..config.slots {
        let counted = slot >= config.warmup;

        for (on, rng) in pu_on.iter_mut().zip(pu_rngs.iter_mut()) {
            if *on && rng.random_bool(v) {
                *on = false;
            }
            if !*on {
                *on = rng.random_bool(p);
            }
        }
        if counted {
            let mut busy = 0;
            for (ch, &on) in pu_on.iter().enumerate() {
                if on {
                    channel_busy_slots[ch] += 1;
                    busy += 1;
                }
            }
            busy_histogram[busy] += 1;
        }

        selectors.clear();
        su_held.iter_mut().for_each(|x| *x = false);
        for (id, pair) in pairs.iter_mut().enumerate() {
            if pair.phase == Phase::Free && arrivals.random_bool(s) {
                pair.phase = Phase::Backlogged { frame: 1 };
            }
            let (status, channel) = match &mut pair.phase {
                Phase::Free => (StateClass::Idle, None),
                Phase::Backlogged { .. } => {
                    selectors.push(id);
                    pair.episode.get_or_insert((0, counted)).0 += 1;
                    (StateClass::Backlogged, None)
                }
                Phase::Active(frame) => {
                    let status = if frame.collided > 0 || pu_on[frame.channel] {
                        frame.collided += 1;
                        StateClass::Collided
                    } else {
                        frame.clean += 1;
                        if counted {
                            frame.clean_counted += 1;
                        }
                        StateClass::Transmitting
                    };
                    (status, Some(frame.channel))
                }
            };
            if counted {
                match status {
                    StateClass::Idle => pair.counts.idle += 1,
                    StateClass::Transmitting => pair.counts.transmitting += 1,
                    StateClass::Collided => pair.counts.collided += 1,
                    StateClass::Backlogged => pair.counts.backlogged += 1,
                }
            }
            if let Some(rec) = trace.as_mut() {
                rec.push(TraceRecord {
                    slot,
                    su: id,
                    status,
                    channel,
                });
            }

            // End-of-slot transitions of data-channel pairs.
            if let Phase::Active(frame) = pair.phase {
                if frame.collided > 0 {
                    let cap = params.sensing_delay.min(c - frame.clean);
                    if frame.collided >= cap {
                        pair.counts.aborted_clean_slots += frame.clean_counted;
                        pair.phase = Phase::Backlogged { frame: frame.frame };
                    }
                } else if frame.clean == c {
                    if frame.started_counted {
                        pair.counts.delivered_frames += 1;
                        pair.counts.delivered_frame_slots += frame.clean_counted;
                    } else {
                        pair.counts.boundary_clean_slots += frame.clean_counted;
                    }
                    if frame.frame < h {
                        pair.phase =
                            Phase::Active(Frame::start(frame.channel, frame.frame + 1, counted));
                    } else {
                        if counted {
                            pair.counts.packets_delivered += 1;
                        }
                        pair.phase = Phase::Free;
                    }
                }
            }
            if let Phase::Active(frame) = pair.phase {
                su_held[frame.channel] = true;
            }
        }

        if selectors.is_empty() {
            continue;
        }
        available.clear();
        if params.scheme == Scheme::PseudoRandom {
            order.shuffle(&mut coordination);
            available.extend(order.iter().copied());
        } else {
            available.extend(0..m);
        }
        available.retain(|&ch| !pu_on[ch] && !(config.exclude_su_occupied && su_held[ch]));

        pick_count.iter_mut().for_each(|x| *x = 0);
        for (rank, &id) in selectors.iter().enumerate() {
            let pick = select_channel(params.scheme, &available, rank, &mut pairs[id].rng);
            if let Some(ch) = pick {
                pick_count[ch] += 1;
            }
            picks[id] = pick;
        }
        let mut clashes = 0usize;
        for &id in &selectors {
            let pair = &mut pairs[id];
            let Some(ch) = picks[id] else { continue };
            let alone = pick_count[ch] == 1;
            if counted {
                pair.counts.selections += 1;
                if !alone {
                    pair.counts.selection_collisions += 1;
                }
            }
            if !alone {
                clashes += 1;
                continue;
            }
            let Phase::Backlogged { frame } = pair.phase else {
                unreachable!("selectors are backlogged")
            };
            pair.phase = Phase::Active(Frame::start(ch, frame, slot + 1 >= config.warmup));
            if let Some((len, started)) = pair.episode.take() {
                if started && counted {
                    pair.counts.backlog_episodes += 1;
                    pair.counts.backlog_episode_slots += len;
                }
            }
        }
        if counted {
            q_slot_sum += clashes as f64 / selectors.len() as f64;
        }
    }

    for pair in pairs.iter_mut() {
        if let Phase::Active(frame) = pair.phase {
            if frame.collided == 0 {
                pair.counts.boundary_clean_slots += frame.clean_counted;
            } else {
                pair.counts.aborted_clean_slots += frame.clean_counted;
            }
        }
    }

    let counted_slots = config.counted_slots();
    let per_su: Vec<SuCounts> = pairs.iter().map(|p| p.counts).collect();
    let mut aggregate = SuCounts::default();
    per_su.iter().for_each(|c| aggregate.add(c));
    let mean_rate = |f: fn(&SuCounts) -> u64| {
        per_su
            .iter()
            .map(|c| f(c) as f64 / counted_slots as f64)
            .sum::<f64>()
            / n as f64
    };
    let ratio = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };

    Ok(SimResult {
        seed: config.seed,
        counted_slots,
        throughput: mean_rate(|c| c.transmitting),
        pr_collision: mean_rate(|c| c.collided),
        mean_backlog_dwell: ratio(aggregate.backlog_episode_slots, aggregate.backlog_episodes),
        q_hat: ratio(aggregate.selection_collisions, aggregate.selections),
        q_slot_mean: q_slot_sum / counted_slots as f64,
        per_su,
        aggregate,
        channel_busy_slots,
        busy_histogram,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(n: usize, p: f64, scheme: Scheme) -> SimConfig {
        let params = ModelParams {
            pairs: n,
            pu_arrival: p,
            scheme,
            ..ModelParams::default()
        };
        SimConfig {
            slots: 200_000,
            warmup: 10_000,
            seed: 7,
            ..SimConfig::new(params)
        }
    }

    #[test]
    fn random_pick_from_single_channel() {
        let mut rng = stream(3, 0);
        for _ in 0..10 {
            assert_eq!(select_channel(Scheme::Random, &[4], 0, &mut rng), Some(4));
        }
        assert_eq!(select_channel(Scheme::Random, &[], 0, &mut rng), None);
    }

    #[test]
    fn greedy_pairs_clash() {
        let mut rng = stream(3, 0);
        let a = select_channel(Scheme::Greedy, &[3, 7], 0, &mut rng);
        let b = select_channel(Scheme::Greedy, &[3, 7], 1, &mut rng);
        assert_eq!((a, b), (Some(3), Some(3)));
    }

    #[test]
    fn pseudorandom_pairs_split() {
        let mut rng = stream(3, 0);
        let a = select_channel(Scheme::PseudoRandom, &[3, 7], 0, &mut rng);
        let b = select_channel(Scheme::PseudoRandom, &[3, 7], 1, &mut rng);
        assert_eq!((a, b), (Some(3), Some(7)));
        assert_eq!(
            select_channel(Scheme::PseudoRandom, &[3, 7], 2, &mut rng),
            None
        );
    }

    #[test]
    fn same_seed_same_result() {
        let cfg = config(3, 0.05, Scheme::Random);
        assert_eq!(run(&cfg).unwrap(), run(&cfg).unwrap());
        let other = SimConfig { seed: 8, ..cfg };
        assert_ne!(run(&cfg).unwrap().aggregate, run(&other).unwrap().aggregate);
    }

    #[test]
    fn statuses_partition_counted_slots() {
        for scheme in Scheme::ALL {
            let mut cfg = config(4, 0.05, scheme);
            cfg.params.su_arrival = 0.3;
            let res = run(&cfg).unwrap();
            for c in &res.per_su {
                assert_eq!(c.total(), res.counted_slots);
                assert_eq!(c.delivered_frames * 10, c.delivered_frame_slots);
                assert_eq!(
                    c.transmitting,
                    c.delivered_frame_slots + c.aborted_clean_slots + c.boundary_clean_slots
                );
            }
            for rate in [res.throughput, res.pr_collision, res.q_hat] {
                assert!((0.0..=1.0).contains(&rate));
            }
        }
    }

    #[test]
    fn sensing_delay_shortens_collided_runs() {
        let mut cfg = config(1, 0.1, Scheme::Random);
        cfg.params.sensing_delay = 1;
        cfg.trace = true;
        cfg.slots = 20_000;
        cfg.warmup = 0;
        let res = run(&cfg).unwrap();
        let trace = res.trace.unwrap();
        for w in trace.windows(2) {
            if w[0].status == StateClass::Collided {
                assert_eq!(w[1].status, StateClass::Backlogged);
            }
        }
    }

    #[test]
    fn pseudorandom_never_clashes() {
        let res = run(&config(6, 0.05, Scheme::PseudoRandom)).unwrap();
        assert!(res.aggregate.selections > 0);
        assert_eq!(res.aggregate.selection_collisions, 0);
        assert_eq!(res.q_hat, 0.0);
    }

    #[test]
    fn greedy_pairs_starve_each_other() {
        let mut cfg = config(3, 0.05, Scheme::Greedy);
        cfg.saturated = true;
        let res = run(&cfg).unwrap();
        // Once every pair is backlogged they keep clashing on the same channel.
        assert!(res.throughput < 0.01, "throughput {}", res.throughput);
    }

    #[test]
    fn idle_without_arrivals() {
        let mut cfg = config(2, 0.05, Scheme::Random);
        cfg.params.su_arrival = 0.0;
        let res = run(&cfg).unwrap();
        assert_eq!(res.aggregate.idle, 2 * res.counted_slots);
        assert_eq!(res.throughput, 0.0);
    }

    #[test]
    fn trace_csv_has_one_line_per_pair_slot() {
        let mut cfg = config(2, 0.05, Scheme::Random);
        cfg.slots = 50;
        cfg.warmup = 0;
        cfg.trace = true;
        let res = run(&cfg).unwrap();
        let mut buf = Vec::new();
        res.write_trace_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 2 * 50);
        assert!(text.starts_with("slot,su,status,channel\n"));
    }

    #[test]
    fn rejects_warmup_past_end() {
        let mut cfg = config(1, 0.05, Scheme::Random);
        cfg.warmup = cfg.slots;
        assert!(run(&cfg).is_err());
    }
}
