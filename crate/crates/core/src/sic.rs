//! Successive-interference-cancellation rates for degraded channels.
//!
//! With receivers ordered so that `a_1^2 <= ... <= a_K^2`, receiver `i` can
//! decode the messages of users `1..=i` in order, subtracting each decoded
//! signal. User `i`'s codeword then survives interference only from users
//! `i+1..=K`, giving the rate
//!
//! ```text
//! R_i = 1/2 log2(1 + a_i^2 b_i^2 P / (a_i^2 (sum_{j>i} b_j^2) P + N))
//! ```
//!
//! and the sum telescopes into the closed form evaluated by
//! [`telescoped_sum_rate`]. All rates are in bits per real channel use
//! (base-2 logarithms).

use crate::channel::DegradedChannel;
use crate::error::{Error, Result};

/// Per-user rates together with their sum, in bits per channel use.
#[derive(Debug, Clone, PartialEq)]
pub struct RateAllocation {
    /// Rate of user `i` (canonical receiver order).
    pub rates: Vec<f64>,
    /// Total of `rates`.
    pub sum: f64,
}

impl RateAllocation {
    fn from_rates(rates: Vec<f64>) -> Self {
        let sum = rates.iter().sum();
        Self { rates, sum }
    }
}

/// SIC rate of user `user` (zero-based) in bits per channel use.
pub fn sic_rate(dc: &DegradedChannel, user: usize) -> Result<f64> {
    let k = dc.k();
    if user >= k {
        return Err(Error::IndexOutOfRange { index: user, k });
    }
    let a2 = dc.a()[user] * dc.a()[user];
    let b2 = dc.b()[user] * dc.b()[user];
    let trailing: f64 = (user + 1..k).map(|j| dc.b()[j] * dc.b()[j]).sum();
    let numer = a2 * b2 * dc.p();
    let denom = a2 * trailing * dc.p() + dc.n();
    Ok(0.5 * (1.0 + numer / denom).log2())
}

/// All SIC rates and their sum.
///
/// The sum must agree with the telescoped closed form
/// ([`telescoped_sum_rate`]) to within 1e-10; this identity is asserted in
/// debug builds and exercised by the test suites.
pub fn sic_sum_rate(dc: &DegradedChannel) -> RateAllocation {
    let rates: Vec<f64> = (0..dc.k())
        .map(|i| sic_rate(dc, i).expect("index in range"))
        .collect();
    let alloc = RateAllocation::from_rates(rates);
    debug_assert!(
        (alloc.sum - telescoped_sum_rate(dc)).abs() <= 1e-10 * (1.0 + alloc.sum.abs()),
        "per-user SIC rates and telescoped sum diverged"
    );
    alloc
}

/// Telescoped form of the SIC sum rate,
/// `1/2 sum_i log2(1 + (a_i^2 - a_{i-1}^2) B_i P / (a_{i-1}^2 B_i P + N))`
/// with `a_0 = 0` and `B_i = sum_{j>=i} b_j^2`.
pub fn telescoped_sum_rate(dc: &DegradedChannel) -> f64 {
    let k = dc.k();
    let mut tail = 0.0_f64;
    let mut tails = vec![0.0_f64; k];
    for i in (0..k).rev() {
        tail += dc.b()[i] * dc.b()[i];
        tails[i] = tail;
    }
    let mut sum = 0.0;
    let mut prev_a2 = 0.0;
    for (ai, tail) in dc.a().iter().zip(&tails) {
        let a2 = ai * ai;
        let delta = a2 - prev_a2;
        // A repeated gain contributes exactly zero; skipping the division
        // keeps the term clean when B_i is also zero.
        if delta > 0.0 {
            let numer = delta * tail * dc.p();
            let denom = prev_a2 * tail * dc.p() + dc.n();
            sum += 0.5 * (1.0 + numer / denom).log2();
        }
        prev_a2 = a2;
    }
    sum
}
