//! Exact occupancy counts for simultaneous channel selection.
//!
//! `n1` backlogged SUs pick among `theta` available channels. Selections are
//! counted as occupancy vectors (how many SUs land on each channel), so there
//! are `C(theta + n1 - 1, n1)` outcomes. `S_d` is the number of outcomes in
//! which exactly `d` channels hold a single SU.
//!
//! Counts are carried in `i128`; the subtractive recursion for `S_d` would
//! lose exactness in floating point long before the counts overflow.

use std::collections::HashMap;

/// Largest `n1` and `theta` accepted by the enumeration oracle.
pub const ORACLE_BOUND: i64 = 8;

/// Generalized binomial coefficient with the falling-factorial convention:
/// `b < 0 → 0`, `b = 0 → 1`, otherwise `a(a-1)…(a-b+1) / b!` for any `a`.
pub fn gen_binomial(a: i64, b: i64) -> i128 {
    if b < 0 {
        return 0;
    }
    let mut acc: i128 = 1;
    for i in 0..b {
        // i+1 consecutive integers always divide by (i+1)!
        acc = acc * (a - i) as i128 / (i + 1) as i128;
        if acc == 0 {
            break;
        }
    }
    acc
}

/// Outcomes with a chosen set of `d` single-occupancy channels, the other
/// `n1 - d` SUs spread freely over the remaining `theta - d` channels.
///
/// Every outcome with exactly `j ≥ d` singletons is counted `C(j, d)` times.
pub fn u_count(n1: i64, theta: i64, d: i64) -> i128 {
    gen_binomial(theta, d) * gen_binomial(theta + n1 - 2 * d - 1, n1 - d)
}

/// `S_d(n1, θ)` for every `d` in `0..=n1`, by the top-down recursion
/// `S_d = U_d − U_{d+1} − Σ_{i≥1} [C(d+i, d) − C(d+i, d+1)] S_{d+i}`.
pub fn s_counts(n1: i64, theta: i64) -> Vec<i128> {
    assert!(n1 >= 0 && theta >= 0, "n1 and theta must be nonnegative");
    let top = n1 as usize;
    let mut s = vec![0i128; top + 1];
    for d in (0..=n1).rev() {
        let next_u = if d < n1 { u_count(n1, theta, d + 1) } else { 0 };
        let mut value = u_count(n1, theta, d) - next_u;
        for i in 1..=(n1 - d) {
            let weight = gen_binomial(d + i, d) - gen_binomial(d + i, d + 1);
            value -= weight * s[(d + i) as usize];
        }
        s[d as usize] = value;
    }
    s
}

/// Single `S_d(n1, θ)`; `0` for `d` outside `0..=n1`.
pub fn s_count(n1: i64, theta: i64, d: i64) -> i128 {
    if d < 0 || d > n1 {
        return 0;
    }
    s_counts(n1, theta)[d as usize]
}

/// Brute-force `S_d`: enumerate every occupancy vector and count those with
/// exactly `d` entries equal to one. Returns `None` beyond [`ORACLE_BOUND`].
pub fn s_count_oracle(n1: i64, theta: i64, d: i64) -> Option<u64> {
    if !(0..=ORACLE_BOUND).contains(&n1) || !(0..=ORACLE_BOUND).contains(&theta) {
        return None;
    }
    let mut count = 0u64;
    let mut vector = vec![0i64; theta as usize];
    enumerate(&mut vector, 0, n1, &mut |v| {
        if v.iter().filter(|&&x| x == 1).count() as i64 == d {
            count += 1;
        }
    });
    Some(count)
}

fn enumerate(vector: &mut [i64], pos: usize, remaining: i64, visit: &mut impl FnMut(&[i64])) {
    if pos == vector.len() {
        if remaining == 0 {
            visit(vector);
        }
        return;
    }
    for x in 0..=remaining {
        vector[pos] = x;
        enumerate(vector, pos + 1, remaining - x, visit);
    }
    vector[pos] = 0;
}

/// Probability that exactly `d` of `n1` selectors get a channel to themselves
/// when `theta` channels are available.
pub fn t_access(n1: i64, theta: i64, d: i64) -> f64 {
    if theta == 0 {
        return if d == 0 { 1.0 } else { 0.0 };
    }
    let total = gen_binomial(theta + n1 - 1, n1);
    s_count(n1, theta, d) as f64 / total as f64
}

/// Memoized `T_d(n1, θ)` rows, keyed by `(n1, θ)`.
#[derive(Debug, Default)]
pub struct AccessTable {
    rows: HashMap<(i64, i64), Vec<f64>>,
}

impl AccessTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// `T_d(n1, θ)` for `d` in `0..=n1`.
    pub fn row(&mut self, n1: i64, theta: i64) -> &[f64] {
        self.rows.entry((n1, theta)).or_insert_with(|| {
            if theta == 0 {
                let mut row = vec![0.0; n1 as usize + 1];
                row[0] = 1.0;
                return row;
            }
            let total = gen_binomial(theta + n1 - 1, n1) as f64;
            s_counts(n1, theta)
                .into_iter()
                .map(|s| s as f64 / total)
                .collect()
        })
    }
}
