//! Primary-user channel occupancy.
//!
//! Each of the `M` channels carries one PU with a single-packet buffer, so a
//! channel is a two-state ON/OFF process. Per slot boundary a busy PU first
//! finishes with probability `v`, then every idle PU (including one that just
//! finished) starts a packet with probability `p`. The number of busy
//! channels is itself a Markov chain on `0..=M`.

use crate::chain::{stationary_distribution, StationaryDistribution, TransitionMatrix};
use crate::contention::binomial_pmf;
use crate::error::{Error, Result};

/// PU traffic parameters, identical on every channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PuParams {
    channels: usize,
    arrival: f64,
    completion: f64,
}

impl PuParams {
    /// `channels ≥ 1`, `arrival ∈ [0, 1]`, `completion ∈ (0, 1]`.
    pub fn new(channels: usize, arrival: f64, completion: f64) -> Result<Self> {
        if channels == 0 {
            return Err(Error::invalid("M", channels, "an integer >= 1"));
        }
        if !(0.0..=1.0).contains(&arrival) {
            return Err(Error::invalid("p", arrival, "range [0,1]"));
        }
        if !(completion > 0.0 && completion <= 1.0) {
            return Err(Error::invalid("v", completion, "range (0,1]"));
        }
        Ok(Self {
            channels,
            arrival,
            completion,
        })
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn arrival(&self) -> f64 {
        self.arrival
    }

    pub fn completion(&self) -> f64 {
        self.completion
    }

    /// Mean PU packet length in slots, `1 / v`.
    pub fn mean_packet_len(&self) -> f64 {
        1.0 / self.completion
    }

    /// Stationary probability that a single channel is busy.
    pub fn busy_probability(&self) -> f64 {
        let (p, v) = (self.arrival, self.completion);
        p / (p + v * (1.0 - p))
    }
}

/// Geometric OFF-period pmf, `p (1 − p)^n`.
pub fn off_pmf(p: f64, n: i64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::invalid(
            "p",
            p,
            "range (0,1]; the OFF period is unbounded at p = 0",
        ));
    }
    if n < 0 {
        return Err(Error::invalid("n", n, "a nonnegative slot count"));
    }
    Ok(p * (1.0 - p).powi(n as i32))
}

/// One-step matrix of the busy-channel count.
///
/// From `a` busy channels, `l` finish (binomial in `v`), then
/// `b − a + l` of the `M − a + l` idle channels start (binomial in `p`).
pub fn build_pu_chain(params: &PuParams) -> TransitionMatrix {
    let m = params.channels;
    let (p, v) = (params.arrival, params.completion);
    let mut data = vec![0.0; (m + 1) * (m + 1)];
    for a in 0..=m {
        for b in 0..=m {
            let l_min = a.saturating_sub(b);
            let mut entry = 0.0;
            for l in l_min..=a {
                let idle = m - a + l;
                let starts = b + l - a;
                if starts > idle {
                    continue;
                }
                entry += binomial_pmf(a, l, v) * binomial_pmf(idle, starts, p);
            }
            data[a * (m + 1) + b] = entry;
        }
    }
    // Each row is a convolution of two pmfs; renormalize away round-off.
    for row in data.chunks_mut(m + 1) {
        let sum: f64 = row.iter().sum();
        row.iter_mut().for_each(|x| *x /= sum);
    }
    TransitionMatrix::new(m + 1, data).expect("PU chain rows are pmfs")
}

/// `g[i]`: stationary probability of `i` busy channels.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyDistribution {
    busy: StationaryDistribution,
}

impl OccupancyDistribution {
    pub fn busy(&self, i: usize) -> f64 {
        self.busy.get(i)
    }

    pub fn as_slice(&self) -> &[f64] {
        self.busy.probs()
    }

    pub fn channels(&self) -> usize {
        self.busy.len() - 1
    }
}

/// Solves the busy-count chain.
pub fn occupancy(params: &PuParams) -> Result<OccupancyDistribution> {
    let busy = stationary_distribution(&build_pu_chain(params))?;
    Ok(OccupancyDistribution { busy })
}

/// Availability view over the occupancy distribution.
///
/// Idle-channel probabilities are read through `g` by index; they are not
/// stored separately.
#[derive(Debug, Clone, PartialEq)]
pub struct Availability {
    occupancy: OccupancyDistribution,
    u: f64,
}

impl Availability {
    pub fn from_occupancy(occupancy: OccupancyDistribution) -> Self {
        let m = occupancy.channels();
        let u = occupancy.as_slice()[..m].iter().sum();
        Self { occupancy, u }
    }

    /// Probability that at least one channel is idle.
    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn channels(&self) -> usize {
        self.occupancy.channels()
    }

    /// `Pr(θ)`: probability of exactly `theta` idle channels, `g[M − θ]`.
    pub fn pr_theta(&self, theta: usize) -> f64 {
        let m = self.channels();
        if theta > m {
            0.0
        } else {
            self.occupancy.busy(m - theta)
        }
    }

    /// `Pr(θ)` for `θ = 0..=M`.
    pub fn pr_theta_vec(&self) -> Vec<f64> {
        (0..=self.channels()).map(|t| self.pr_theta(t)).collect()
    }

    pub fn occupancy(&self) -> &OccupancyDistribution {
        &self.occupancy
    }
}

pub fn availability(params: &PuParams) -> Result<Availability> {
    Ok(Availability::from_occupancy(occupancy(params)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn off_pmf_values() {
        assert_abs_diff_eq!(off_pmf(0.1, 0).unwrap(), 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(off_pmf(0.1, 1).unwrap(), 0.09, epsilon = 1e-15);
        assert!(off_pmf(0.0, 3).is_err());
        assert!(off_pmf(0.2, -1).is_err());
    }

    #[test]
    fn off_pmf_normalizes() {
        // Partial sum is 1 − (1 − p)^(n+1); the tail beyond 200 is below 1e-30.
        let total: f64 = (0..200).map(|n| off_pmf(0.3, n).unwrap()).sum();
        assert_abs_diff_eq!(total, 1.0 - 0.7f64.powi(200), epsilon = 1e-12);
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn single_channel_matrix() {
        let (p, v) = (0.1, 0.1);
        let m = build_pu_chain(&PuParams::new(1, p, v).unwrap());
        assert_abs_diff_eq!(m.get(0, 0), 1.0 - p, epsilon = 1e-15);
        assert_abs_diff_eq!(m.get(0, 1), p, epsilon = 1e-15);
        assert_abs_diff_eq!(m.get(1, 0), v * (1.0 - p), epsilon = 1e-15);
        assert_abs_diff_eq!(m.get(1, 1), 1.0 - v * (1.0 - p), epsilon = 1e-15);
    }

    #[test]
    fn no_arrivals_single_channel() {
        let m = build_pu_chain(&PuParams::new(1, 0.0, 0.3).unwrap());
        assert_eq!(m.row(0), &[1.0, 0.0]);
        assert_abs_diff_eq!(m.get(1, 0), 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(m.get(1, 1), 0.7, epsilon = 1e-15);
    }

    #[test]
    fn no_arrivals_keeps_idle_band_idle() {
        for channels in [2, 5, 10] {
            let m = build_pu_chain(&PuParams::new(channels, 0.0, 0.2).unwrap());
            assert_eq!(m.get(0, 0), 1.0);
            assert!(m.row(0)[1..].iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn single_channel_availability() {
        let a = availability(&PuParams::new(1, 0.1, 0.1).unwrap()).unwrap();
        assert_abs_diff_eq!(a.u(), 0.09 / 0.19, epsilon = 1e-12);
    }

    #[test]
    fn no_arrivals_means_always_available() {
        let a = availability(&PuParams::new(10, 0.0, 0.1).unwrap()).unwrap();
        assert_abs_diff_eq!(a.u(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a.pr_theta(10), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn pr_theta_reindexes_g() {
        let a = availability(&PuParams::new(10, 0.05, 0.1).unwrap()).unwrap();
        let total: f64 = a.pr_theta_vec().iter().sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        for theta in 0..=10 {
            assert_eq!(a.pr_theta(theta), a.occupancy().busy(10 - theta));
        }
        let u: f64 = a.occupancy().as_slice()[..10].iter().sum();
        assert_abs_diff_eq!(a.u(), u, epsilon = 1e-12);
    }

    #[test]
    fn occupancy_is_binomial_in_busy_probability() {
        // Channels are independent, so g is Binomial(M, busy probability).
        let params = PuParams::new(6, 0.07, 0.25).unwrap();
        let g = occupancy(&params).unwrap();
        let b = params.busy_probability();
        for i in 0..=6 {
            assert_abs_diff_eq!(g.busy(i), binomial_pmf(6, i, b), epsilon = 1e-12);
        }
    }

    #[test]
    fn u_non_increasing_in_p() {
        for channels in [1, 2, 5, 10] {
            for v in [0.05, 0.1, 0.5] {
                let mut last = f64::INFINITY;
                for step in 1..=50 {
                    let p = step as f64 * 0.01;
                    let u = availability(&PuParams::new(channels, p, v).unwrap())
                        .unwrap()
                        .u();
                    assert!(u <= last + 1e-12, "M={channels} v={v} p={p}");
                    last = u;
                }
            }
        }
    }

    #[test]
    fn rejects_bad_params() {
        assert!(PuParams::new(0, 0.1, 0.1).is_err());
        assert!(PuParams::new(3, 1.5, 0.1).is_err());
        assert!(PuParams::new(3, 0.1, 0.0).is_err());
    }
}
