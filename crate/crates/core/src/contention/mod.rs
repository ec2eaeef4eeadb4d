//! SU–SU collision probability `q` for each channel-selection scheme.
//!
//! Random selection needs the saturated system chain over
//! `(backlogged, collided)` SU counts; greedy and pseudo-random selection
//! have closed forms.

pub mod counts;

use std::fmt;
use std::str::FromStr;

use crate::chain::{
    stationary_distribution, StationaryDistribution, TransitionMatrix, ROW_SUM_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::pu::Availability;

pub use counts::{gen_binomial, s_count, s_count_oracle, s_counts, t_access, u_count, AccessTable};

/// Channel-selection scheme used by backlogged SU pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Scheme {
    /// Uniform choice among available channels.
    #[default]
    Random,
    /// Minimum-service-time choice; every pair lands on the same channel.
    Greedy,
    /// Shared pseudo-random selecting sequence; pairs never pick alike.
    PseudoRandom,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Random, Scheme::Greedy, Scheme::PseudoRandom];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Random => "random",
            Scheme::Greedy => "greedy",
            Scheme::PseudoRandom => "pseudorandom",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "random" => Ok(Scheme::Random),
            "greedy" => Ok(Scheme::Greedy),
            "pseudorandom" | "pseudo-random" | "pseudo_random" => Ok(Scheme::PseudoRandom),
            other => Err(Error::invalid(
                "scheme",
                other,
                "one of random, greedy, pseudorandom",
            )),
        }
    }
}

/// `C(n, k) r^k (1 − r)^(n−k)`, with `0^0 = 1`.
pub fn binomial_pmf(n: usize, k: usize, r: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k_small = k.min(n - k);
    let mut coeff = 1.0;
    for i in 0..k_small {
        coeff = coeff * (n - i) as f64 / (i + 1) as f64;
    }
    coeff * r.powi(k as i32) * (1.0 - r).powi((n - k) as i32)
}

/// Inputs of the saturated system chain.
#[derive(Debug, Clone)]
pub struct ContentionParams {
    pairs: usize,
    frame_slots: usize,
    frames: usize,
    pu_arrival: f64,
    availability: Availability,
}

impl ContentionParams {
    pub fn new(
        pairs: usize,
        frame_slots: usize,
        frames: usize,
        pu_arrival: f64,
        availability: Availability,
    ) -> Result<Self> {
        if pairs == 0 {
            return Err(Error::invalid("N", pairs, "an integer >= 1"));
        }
        if frame_slots == 0 {
            return Err(Error::invalid("c", frame_slots, "an integer >= 1"));
        }
        if frames == 0 {
            return Err(Error::invalid("h", frames, "an integer >= 1"));
        }
        if !(0.0..=1.0).contains(&pu_arrival) {
            return Err(Error::invalid("p", pu_arrival, "range [0,1]"));
        }
        Ok(Self {
            pairs,
            frame_slots,
            frames,
            pu_arrival,
            availability,
        })
    }

    pub fn pairs(&self) -> usize {
        self.pairs
    }

    pub fn channels(&self) -> usize {
        self.availability.channels()
    }

    /// Per-slot packet completion probability `σ = 1/(c·h)`.
    pub fn completion_prob(&self) -> f64 {
        1.0 / (self.frame_slots * self.frames) as f64
    }

    /// Per-slot frame-end probability `1/c`.
    pub fn frame_end_prob(&self) -> f64 {
        1.0 / self.frame_slots as f64
    }

    pub fn availability(&self) -> &Availability {
        &self.availability
    }

    /// Number of flattened `(n1, n3)` states, `(N+1)(N+2)/2`.
    pub fn state_count(&self) -> usize {
        (self.pairs + 1) * (self.pairs + 2) / 2
    }

    /// Flattened index of `(backlogged, collided)`.
    pub fn flat_index(&self, backlogged: usize, collided: usize) -> usize {
        debug_assert!(backlogged + collided <= self.pairs);
        (2 * self.pairs + 3 - backlogged) * backlogged / 2 + collided
    }
}

/// Stationary result of the system chain plus the scheme's `q`.
#[derive(Debug, Clone)]
pub struct ContentionResult {
    pub scheme: Scheme,
    /// Stationary distribution over flattened `(n1, n3)` states.
    pub pi: StationaryDistribution,
    /// `rho[k]`: probability that `k` SUs are backlogged.
    pub rho: Vec<f64>,
    /// SU–SU collision probability.
    pub q: f64,
}

/// Saturated `(backlogged, collided)` chain, flattened to one dimension.
///
/// In one slot `w` transmitters finish their packet and `e` collided SUs reach
/// a frame end (all of them rejoin the backlog), `r` of the remaining
/// transmitters hit a PU, and `d` backlogged SUs win a channel.
pub fn system_chain(params: &ContentionParams) -> Result<TransitionMatrix> {
    let n = params.pairs;
    let size = params.state_count();
    let sigma = params.completion_prob();
    let frame_end = params.frame_end_prob();
    let p = params.pu_arrival;

    // Access pmf averaged over the number of idle channels.
    let mut table = AccessTable::new();
    let mut access: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    for n1 in 0..=n {
        let mut row = vec![0.0; n1 + 1];
        for theta in 0..=params.channels() {
            let weight = params.availability.pr_theta(theta);
            if weight == 0.0 {
                continue;
            }
            for (d, t) in table.row(n1 as i64, theta as i64).iter().enumerate() {
                row[d] += weight * t;
            }
        }
        access.push(row);
    }

    let mut data = vec![0.0; size * size];
    #[allow(clippy::needless_range_loop)]
    for n1 in 0..=n {
        for n3 in 0..=(n - n1) {
            let n2 = n - n1 - n3;
            let from = params.flat_index(n1, n3);
            let row = &mut data[from * size..(from + 1) * size];
            for w in 0..=n2 {
                let x = binomial_pmf(n2, w, sigma);
                for r in 0..=(n2 - w) {
                    let y = binomial_pmf(n2 - w, r, p);
                    for e in 0..=n3 {
                        let z = binomial_pmf(n3, e, frame_end);
                        let weight = x * y * z;
                        if weight == 0.0 {
                            continue;
                        }
                        for (d, &t) in access[n1].iter().enumerate() {
                            if t == 0.0 {
                                continue;
                            }
                            let to_backlogged = n1 - d + w + e;
                            let to_collided = n3 - e + r;
                            row[params.flat_index(to_backlogged, to_collided)] += weight * t;
                        }
                    }
                }
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::NotStochastic {
                    row: from,
                    reason: format!("system chain state ({n1},{n3}) sums to {sum:.17}"),
                });
            }
        }
    }
    TransitionMatrix::new(size, data)
}

/// `q` for the given scheme together with the backlog distribution of the
/// saturated system chain.
pub fn contention_result(params: &ContentionParams, scheme: Scheme) -> Result<ContentionResult> {
    let n = params.pairs;
    let pi = stationary_distribution(&system_chain(params)?)?;
    let rho: Vec<f64> = (0..=n)
        .map(|k| (0..=(n - k)).map(|j| pi.get(params.flat_index(k, j))).sum())
        .collect();
    let q = match scheme {
        Scheme::Random => random_q(&rho, params.availability()),
        Scheme::Greedy => greedy_q(n),
        Scheme::PseudoRandom => 0.0,
    };
    Ok(ContentionResult { scheme, pi, rho, q })
}

/// `q` without solving the system chain where a closed form exists.
pub fn collision_q(params: &ContentionParams, scheme: Scheme) -> Result<f64> {
    match scheme {
        Scheme::Random => Ok(contention_result(params, scheme)?.q),
        Scheme::Greedy => Ok(greedy_q(params.pairs)),
        Scheme::PseudoRandom => Ok(0.0),
    }
}

fn greedy_q(pairs: usize) -> f64 {
    if pairs > 1 {
        1.0
    } else {
        0.0
    }
}

/// `Σ_θ Σ_k (k−1)/(θ+k−2) ρ_k Pr(θ)` over `θ ≥ 1`; the `k = 1` term is 0.
fn random_q(rho: &[f64], availability: &Availability) -> f64 {
    let mut q = 0.0;
    for theta in 1..=availability.channels() {
        let weight = availability.pr_theta(theta);
        for (k, &rho_k) in rho.iter().enumerate().skip(2) {
            q += (k - 1) as f64 / (theta + k - 2) as f64 * rho_k * weight;
        }
    }
    q.clamp(0.0, 1.0)
}
