//! Polylogarithm `Li_s(z)` for integer `s ≥ 2` on `[-1, 1]`, and the
//! Riemann zeta function at integer arguments.

use std::f64::consts::LN_2;

/// `B_{2n}` for `n = 1..=15`.
#[allow(clippy::excessive_precision)]
const BERNOULLI_EVEN: [f64; 15] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
    -23749461029.0 / 870.0,
    8615841276005.0 / 14322.0,
];

fn bernoulli_even(two_n: usize) -> f64 {
    BERNOULLI_EVEN[two_n / 2 - 1]
}

/// `ζ(s)` for integer `s ≠ 1`, with `s ≥ −29`.
pub fn zeta(s: i32) -> f64 {
    assert!(s != 1, "zeta has a pole at 1");
    if s == 0 {
        return -0.5;
    }
    if s < 0 {
        let n = (-s) as usize;
        if n.is_multiple_of(2) {
            return 0.0;
        }
        // ζ(−n) = −B_{n+1}/(n+1)
        return -bernoulli_even(n + 1) / (n as f64 + 1.0);
    }
    // Direct sum plus Euler–Maclaurin tail from N.
    const N: usize = 20;
    let sf = s as f64;
    let head: f64 = (1..N).rev().map(|k| (k as f64).powi(-s)).sum();
    let nf = N as f64;
    let mut tail = nf.powf(1.0 - sf) / (sf - 1.0) + 0.5 * nf.powi(-s);
    // B_{2j}/(2j)! · s(s+1)…(s+2j−2) · N^{−s−2j+1}
    let mut rising = sf;
    let mut fact = 2.0;
    for j in 1..=8 {
        let two_j = 2 * j;
        tail += bernoulli_even(two_j) / fact * rising * nf.powf(-sf - two_j as f64 + 1.0);
        rising *= (sf + two_j as f64 - 1.0) * (sf + two_j as f64);
        fact *= (two_j as f64 + 1.0) * (two_j as f64 + 2.0);
    }
    head + tail
}

/// `Li_s(z) = Σ_{k≥1} z^k / k^s` for `s ≥ 2`, `-1 ≤ z ≤ 1`.
pub fn polylog(s: u32, z: f64) -> f64 {
    assert!(s >= 2, "order must be at least 2");
    assert!((-1.0..=1.0).contains(&z), "argument {z} outside [-1, 1]");
    if z == 0.0 {
        0.0
    } else if z.abs() <= 0.5 {
        series(s, z)
    } else if z < 0.0 {
        // Li_s(−x) = 2^{1−s} Li_s(x²) − Li_s(x)
        let x = -z;
        2f64.powi(1 - s as i32) * polylog(s, x * x) - polylog(s, x)
    } else if z == 1.0 {
        zeta(s as i32)
    } else {
        near_one(s, z)
    }
}

fn series(s: u32, z: f64) -> f64 {
    let mut sum = 0.0;
    let mut zk = 1.0;
    for k in 1..200u32 {
        zk *= z;
        let term = zk / (k as f64).powi(s as i32);
        sum += term;
        if term.abs() <= f64::EPSILON * 1e-2 * sum.abs() {
            break;
        }
    }
    sum
}

/// Expansion in `μ = ln z` (valid for `|μ| < 2π`; used for `z ∈ (½, 1)`):
/// `Li_s(e^μ) = μ^{s−1}/(s−1)! [H_{s−1} − ln(−μ)] + Σ_{k≠s−1} ζ(s−k) μ^k/k!`.
fn near_one(s: u32, z: f64) -> f64 {
    let mu = z.ln();
    debug_assert!(mu < 0.0 && mu > -LN_2 - 1e-12);
    let s_i = s as i32;
    let mut sum = 0.0;
    let mut pow_over_fact = 1.0; // μ^k / k!
    for k in 0..(s_i + 28) {
        if k > 0 {
            pow_over_fact *= mu / k as f64;
        }
        if k == s_i - 1 {
            let harmonic: f64 = (1..s).map(|j| 1.0 / j as f64).sum();
            sum += pow_over_fact * (harmonic - (-mu).ln());
        } else {
            sum += zeta(s_i - k) * pow_over_fact;
        }
    }
    sum
}
