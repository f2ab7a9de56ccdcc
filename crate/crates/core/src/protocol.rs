//! Exact assisted single-bit coding: simulating a deterministic protocol
//! through a device-plus-channel pipeline, and the optimal deterministic
//! protocol by exhaustive encoder enumeration with per-output optimal
//! decoding.
//!
//! For fixed encoders the success probability decomposes per channel
//! output: `Succ = (1/2) sum_y max_s sum_q max_a sum_p D(p,q|e1(a),s)
//! N(y|e2(a,p))`, so decoders never need to be enumerated. That
//! decomposition is property-tested against full decoder enumeration at
//! tiny alphabet sizes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{succ_unassisted, Channel};
use crate::correlations::{local_fraction, BinaryBox, Correlation};
use crate::error::{Error, Result};

/// Encoder-pair enumeration cap.
const ENUMERATION_BUDGET: u64 = 1 << 24;

/// A deterministic assisted protocol: `e1` picks Alice's device input from
/// the message bit, `e2` picks the channel input from the bit and Alice's
/// device output, `d1` picks Bob's device input from the channel output,
/// `d2` guesses the bit from the channel and device outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProtocolStrategy {
    pub e1: [usize; 2],
    pub e2: [Vec<usize>; 2],
    pub d1: Vec<usize>,
    pub d2: Vec<Vec<u8>>,
}

impl ProtocolStrategy {
    fn validate(&self, ch: &Channel, d: &Correlation) -> Result<()> {
        let (nr, ns, np, nq) = d.sizes();
        let (nx, ny) = (ch.num_inputs(), ch.num_outputs());
        if self.e1.iter().any(|&r| r >= nr) {
            return Err(Error::AlphabetMismatch(format!(
                "e1 targets a device input outside 0..{nr}"
            )));
        }
        for side in &self.e2 {
            if side.len() != np {
                return Err(Error::AlphabetMismatch(format!(
                    "e2 table has {} rows, expected {np}",
                    side.len()
                )));
            }
            if side.iter().any(|&x| x >= nx) {
                return Err(Error::AlphabetMismatch(format!(
                    "e2 targets a channel input outside 0..{nx}"
                )));
            }
        }
        if self.d1.len() != ny || self.d1.iter().any(|&s| s >= ns) {
            return Err(Error::AlphabetMismatch(format!(
                "d1 must map all {ny} channel outputs into 0..{ns}"
            )));
        }
        if self.d2.len() != ny {
            return Err(Error::AlphabetMismatch(format!(
                "d2 has {} rows, expected {ny}",
                self.d2.len()
            )));
        }
        for row in &self.d2 {
            if row.len() != nq || row.iter().any(|&g| g > 1) {
                return Err(Error::AlphabetMismatch(format!(
                    "d2 rows must map all {nq} device outputs to a bit"
                )));
            }
        }
        Ok(())
    }

    pub fn to_json_string(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(format!("strategy file: {e}")))
    }
}

/// Flattened correlation table for inner-loop indexing.
struct FlatBox {
    ns: usize,
    np: usize,
    nq: usize,
    data: Vec<f64>,
}

impl FlatBox {
    fn new(d: &Correlation) -> Self {
        let (nr, ns, np, nq) = d.sizes();
        let mut data = Vec::with_capacity(nr * ns * np * nq);
        for r in 0..nr {

            for s in 0..ns {
                for p in 0..np {
                    for q in 0..nq {
                        data.push(d.prob(r, s, p, q));
                    }
                }
            }
        }
        Self { ns, np, nq, data }
    }

    #[inline]
    fn get(&self, r: usize, s: usize, p: usize, q: usize) -> f64 {
        self.data[((r * self.ns + s) * self.np + p) * self.nq + q]
    }
}

/// Exact success probability of a concrete strategy:
/// `(1/2) sum_{a,p,q,y} D(p,q | e1(a), d1(y)) N(y | e2(a,p)) [d2(y,q) = a]`.
pub fn simulate(ch: &Channel, d: &Correlation, strat: &ProtocolStrategy) -> Result<f64> {
    strat.validate(ch, d)?;
    let flat = FlatBox::new(d);
    let mut acc = 0.0;
    for a in 0..2usize {
        let r = strat.e1[a];
        for (p, &x) in strat.e2[a].iter().enumerate() {
            for (y, &s) in strat.d1.iter().enumerate() {
                let n = ch.matrix[x][y];
                if n == 0.0 {
                    continue;
                }
                for q in 0..flat.nq {
                    if strat.d2[y][q] as usize == a {
                        acc += flat.get(r, s, p, q) * n;
                    }
                }
            }
        }
    }
    Ok(0.5 * acc)
}

/// Optimal deterministic assisted protocol with its witness strategy and
/// the closed-form bounds it must respect.
#[derive(Debug, Clone)]
pub struct AssistedResult {
    pub value: f64,
    pub strategy: ProtocolStrategy,
    /// `1/2 + (2 - 1/m)(succ - 1/2)` where `m` counts the device outputs
    /// Alice can actually produce per message (see
    /// [`effective_output_count`]).
    pub alphabet_bound: f64,
    /// Local-fraction bound, available for binary devices.
    pub local_fraction_bound: Option<f64>,
}

/// The largest number of Alice-side outputs reachable from any single
/// device input: a deterministic protocol can steer at most `2 m` distinct
/// channel inputs, so this is the `m` entering the alphabet bound. Using
/// the reachable count (not the declared alphabet size) keeps the bound
/// tight for devices whose outputs partition by input.
pub fn effective_output_count(d: &Correlation) -> usize {
    let (nr, _, np, nq) = d.sizes();
    let mut best = 1;
    for r in 0..nr {
        let support = (0..np)
            .filter(|&p| (0..nq).map(|q| d.prob(r, 0, p, q)).sum::<f64>() > 1e-12)
            .count();
        best = best.max(support);
    }
    best
}

/// Per-output decoder value for fixed encoders: `max_s sum_q max_a T(y,s,q,a)`
/// where `T = sum_p D(p,q|e1(a),s) N(y|e2(a,p))`. Returns the winning inner
/// (value, s) with lowest-index tie-breaking.
#[inline]
fn decoder_value_for_output(
    flat: &FlatBox,
    n_col: &[f64],
    e1: &[usize; 2],
    e2: &[&[usize]; 2],
) -> (f64, usize) {
    let mut best = f64::NEG_INFINITY;
    let mut best_s = 0;
    for s in 0..flat.ns {
        let mut total = 0.0;
        for q in 0..flat.nq {
            let mut best_a = f64::NEG_INFINITY;
            for a in 0..2 {
                let mut t = 0.0;
                for (p, &x) in e2[a].iter().enumerate() {
                    t += flat.get(e1[a], s, p, q) * n_col[x];
                }
                if t > best_a {
                    best_a = t;
                }
            }
            total += best_a;
        }
        if total > best {
            best = total;
            best_s = s;
        }
    }
    (best, best_s)
}

fn encoder_value(
    flat: &FlatBox,
    n_cols: &[Vec<f64>],
    e1: &[usize; 2],
    e2: &[&[usize]; 2],
) -> f64 {
    let mut acc = 0.0;
    for n_col in n_cols {
        acc += decoder_value_for_output(flat, n_col, e1, e2).0;
    }
    0.5 * acc
}

fn decode_e2(mut idx: u64, np: usize, nx: u64) -> [Vec<usize>; 2] {
    // Mixed-radix digits, most significant first: (a=0,p=0), (a=0,p=1), ...
    let digits = 2 * np;
    let mut flat = vec![0usize; digits];
    for k in (0..digits).rev() {
        flat[k] = (idx % nx) as usize;
        idx /= nx;
    }
    let second = flat.split_off(np);
    [flat, second]
}

/// Exhaustive optimum over deterministic protocols. Encoders are
/// enumerated (e1 outer, e2 in mixed-radix lexicographic order); decoders
/// are chosen optimally per channel output in closed form. Ties break
/// toward the lexicographically smallest strategy.
pub fn optimal_assisted_succ(ch: &Channel, d: &Correlation) -> Result<AssistedResult> {
    ch.validate()?;
    d.validate()?;
    let (nr, _, np, _) = d.sizes();
    let nx = ch.num_inputs();
    if nr > 4 || np > 16 || nx > 16 {
        return Err(Error::BudgetExceeded(format!(
            "enumeration supports |R| <= 4, |P| <= 16, |X| <= 16; got ({nr}, {np}, {nx})"
        )));
    }
    let n_e2 = (nx as u64).checked_pow(2 * np as u32).ok_or_else(|| {
        Error::BudgetExceeded(format!("encoder count {nx}^{} overflows", 2 * np))
    })?;
    if n_e2 > ENUMERATION_BUDGET {
        return Err(Error::BudgetExceeded(format!(
            "encoder enumeration needs {nx}^{} = {n_e2} cases, budget is {ENUMERATION_BUDGET}",
            2 * np
        )));
    }

    let flat = FlatBox::new(d);
    let ny = ch.num_outputs();
    // Channel columns N(y|.) indexed by y for cache-friendly inner loops.
    let n_cols: Vec<Vec<f64>> = (0..ny)
        .map(|y| (0..nx).map(|x| ch.matrix[x][y]).collect())
        .collect();

    // (value, e1 index, e2 index), maximized by value then minimized by
    // encoder order; the reduction is associative so any partitioning and
    // thread count produces the same winner.
    let mut best: Option<(f64, usize, u64)> = None;
    for e1_idx in 0..nr * nr {
        let e1 = [e1_idx / nr, e1_idx % nr];
        let chunk = (0..n_e2)
            .into_par_iter()
            .map(|e2_idx| {
                let e2 = decode_e2(e2_idx, np, nx as u64);
                let e2_ref = [&e2[0][..], &e2[1][..]];
                (encoder_value(&flat, &n_cols, &e1, &e2_ref), e2_idx)
            })
            .reduce(
                || (f64::NEG_INFINITY, u64::MAX),
                |a, b| {
                    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                        b
                    } else {
                        a
                    }
                },
            );
        let replace = match &best {
            None => true,
            Some((bv, _, _)) => chunk.0 > *bv,
        };
        if replace {
            best = Some((chunk.0, e1_idx, chunk.1));
        }
    }
    let (value, e1_idx, e2_idx) = best.ok_or_else(|| {
        Error::Validation("no encoder candidates (empty alphabets)".into())
    })?;

    // Rebuild the witness strategy with its optimal decoder.
    let e1 = [e1_idx / nr, e1_idx % nr];
    let e2 = decode_e2(e2_idx, np, nx as u64);
    let e2_ref = [&e2[0][..], &e2[1][..]];
    let mut d1 = Vec::with_capacity(ny);
    let mut d2 = Vec::with_capacity(ny);
    for n_col in &n_cols {
        let (_, s) = decoder_value_for_output(&flat, n_col, &e1, &e2_ref);
        d1.push(s);
        let mut guesses = Vec::with_capacity(flat.nq);
        for q in 0..flat.nq {
            let mut best_a = 0u8;
            let mut best_t = f64::NEG_INFINITY;
            for a in 0..2 {
                let mut t = 0.0;
                for (p, &x) in e2[a].iter().enumerate() {
                    t += flat.get(e1[a], s, p, q) * n_col[x];
                }
                if t > best_t {
                    best_t = t;
                    best_a = a as u8;
                }
            }
            guesses.push(best_a);
        }
        d2.push(guesses);
    }
    let strategy = ProtocolStrategy { e1, e2, d1, d2 };

    let m_eff = effective_output_count(d) as f64;
    let alphabet_bound = 0.5 + (2.0 - 1.0 / m_eff) * (succ_unassisted(ch) - 0.5);
    let local_fraction_bound = match BinaryBox::new(d.clone()) {
        Ok(b) => {
            let (alpha, _) = local_fraction(&b)?;
            Some(
                0.5 + (1.0 + 0.5 * (1.0 - alpha)) * (succ_unassisted(ch) - 0.5),
            )
        }
        Err(_) => None,
    };
    Ok(AssistedResult {
        value,
        strategy,
        alphabet_bound,
        local_fraction_bound,
    })
}

/// Outcome of a closed-form bound comparison.
#[derive(Debug, Clone, Copy)]
pub struct ProtocolBound {
    pub bound: f64,
    pub holds: bool,
}

/// Device-alphabet bound: assisted advantage at most `(2 - 1/m)` times
/// the unassisted advantage, with `m` the reachable per-input output count.
pub fn check_alphabet_bound(ch: &Channel, d: &Correlation, value: f64) -> ProtocolBound {
    let m_eff = effective_output_count(d) as f64;
    let bound = 0.5 + (2.0 - 1.0 / m_eff) * (succ_unassisted(ch) - 0.5);
    ProtocolBound {
        bound,
        holds: value <= bound + 1e-9,
    }
}

/// Local-fraction bound for binary devices: the assisted advantage ratio is
/// at most `1 + (1 - 1/m)(1 - loc)` with `m = 2`.
pub fn check_local_fraction_bound(
    ch: &Channel,
    d: &BinaryBox,
    value: f64,
) -> Result<ProtocolBound> {
    let (alpha, _) = local_fraction(d)?;
    let bound = 0.5 + (1.0 + 0.5 * (1.0 - alpha)) * (succ_unassisted(ch) - 0.5);
    Ok(ProtocolBound {
        bound,
        holds: value <= bound + 1e-6,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{make_hashing_channel, make_prevedel};
    use crate::correlations::{device_e, pr_box, tsirelson_box, Sign};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn uniform_device(nr: usize, ns: usize, np: usize, nq: usize) -> Correlation {
        let p = 1.0 / (np * nq) as f64;
        let table = vec![vec![vec![vec![p; nq]; np]; ns]; nr];
        let labels = |n: usize| (0..n).map(|i| i.to_string()).collect::<Vec<_>>();
        Correlation::new(
            "uniform-device",
            [labels(nr), labels(ns), labels(np), labels(nq)],
            table,
        )
        .unwrap()
    }

    fn fixed_output_device(nr: usize, ns: usize, np: usize, nq: usize) -> Correlation {
        let mut table = vec![vec![vec![vec![0.0; nq]; np]; ns]; nr];
        for r in 0..nr {
            for s in 0..ns {
                table[r][s][0][0] = 1.0;
            }
        }
        let labels = |n: usize| (0..n).map(|i| i.to_string()).collect::<Vec<_>>();
        Correlation::new(
            "fixed-device",
            [labels(nr), labels(ns), labels(np), labels(nq)],
            table,
        )
        .unwrap()
    }

    fn identity_channel() -> Channel {
        Channel::new(
            "id",
            vec!["0".into(), "1".into()],
            vec!["0".into(), "1".into()],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        )
        .unwrap()
    }

    /// The strategy that routes the message through the device exactly as
    /// the assisted construction intends for the hashing channel.
    fn passthrough_strategy(m: u32) -> ProtocolStrategy {
        let np = 1usize << m;
        let ny = 2 * (np - 1);
        ProtocolStrategy {
            e1: [0, 1],
            e2: [(0..np).collect(), (0..np).collect()],
            d1: (0..ny).collect(),
            d2: (0..ny).map(|_| vec![0, 1]).collect(),
        }
    }

    #[test]
    fn simulate_uncorrelated_device_is_half() {
        let ch = make_prevedel();
        let d = uniform_device(2, 2, 3, 2);
        let strat = ProtocolStrategy {
            e1: [0, 0],
            e2: [vec![0; 3], vec![1; 3]],
            d1: vec![0; 6],
            d2: (0..6).map(|_| vec![0, 1]).collect(),
        };
        let v = simulate(&ch, &d, &strat).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn simulate_identity_channel_reaches_one() {
        let ch = identity_channel();
        let d = uniform_device(2, 2, 2, 2);
        // Send the bit straight through the channel, ignore the device.
        let strat = ProtocolStrategy {
            e1: [0, 0],
            e2: [vec![0, 0], vec![1, 1]],
            d1: vec![0, 0],
            d2: vec![vec![0, 0], vec![1, 1]],
        };
        let v = simulate(&ch, &d, &strat).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn perfect_protocol_on_hashing_channel() {
        for m in 1..=3u32 {
            let ch = make_hashing_channel(m).unwrap();
            let d = device_e(m).unwrap();
            let v = simulate(&ch, &d, &passthrough_strategy(m)).unwrap();
            assert!((v - 1.0).abs() < 1e-12, "m={m}: {v}");
        }
    }

    #[test]
    fn simulate_validates_alphabets() {
        let ch = identity_channel();
        let d = uniform_device(2, 2, 2, 2);
        let mut bad = passthrough_strategy(1);
        bad.d1 = vec![5, 0];
        assert!(matches!(
            simulate(&ch, &d, &bad),
            Err(Error::AlphabetMismatch(_))
        ));
    }

    #[test]
    fn optimal_with_fixed_output_device_equals_unassisted() {
        let ch = make_prevedel();
        let d = fixed_output_device(2, 2, 2, 2);
        let r = optimal_assisted_succ(&ch, &d).unwrap();
        assert!(
            (r.value - succ_unassisted(&ch)).abs() < 1e-12,
            "assisted {} vs unassisted {}",
            r.value,
            succ_unassisted(&ch)
        );
        // The witness reproduces the value exactly.
        let v = simulate(&ch, &d, &r.strategy).unwrap();
        assert!((v - r.value).abs() < 1e-12);
    }

    #[test]
    fn optimal_on_noiseless_bit_with_its_device() {
        let ch = make_hashing_channel(1).unwrap();
        let d = device_e(1).unwrap();
        let r = optimal_assisted_succ(&ch, &d).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        assert!((r.alphabet_bound - 1.0).abs() < 1e-12);
        let v = simulate(&ch, &d, &r.strategy).unwrap();
        assert!((v - r.value).abs() < 1e-12);
    }

    #[test]
    fn prevedel_with_pr_box_respects_bounds() {
        let ch = make_prevedel();
        let d = pr_box(1, Sign::Plus).unwrap();
        let r = optimal_assisted_succ(&ch, d.correlation()).unwrap();
        // Theorem bound with |P| = 2 and the NS ceiling.
        let b = check_alphabet_bound(&ch, d.correlation(), r.value);
        assert!(b.holds, "value {} above bound {}", r.value, b.bound);
        let ns = crate::assist::succ_ns(&ch).unwrap().value;
        assert!(r.value <= ns + 1e-8, "value {} above NS {}", r.value, ns);
        assert!(r.value >= succ_unassisted(&ch) - 1e-9);
        let v = simulate(&ch, d.correlation(), &r.strategy).unwrap();
        assert!((v - r.value).abs() < 1e-12);
    }

    #[test]
    fn local_fraction_bound_cases() {
        let ch = make_prevedel();
        // Local deterministic device: bound collapses to the unassisted value.
        let locals = crate::correlations::deterministic_boxes();
        let det = &locals[10];
        let r = optimal_assisted_succ(&ch, det.correlation()).unwrap();
        let b = check_local_fraction_bound(&ch, det, r.value).unwrap();
        assert!((b.bound - succ_unassisted(&ch)).abs() < 1e-9);
        assert!(b.holds);
        assert!((r.value - succ_unassisted(&ch)).abs() < 1e-9);

        // PR box: local fraction 0 makes this the alphabet bound at m = 2.
        let pr = pr_box(1, Sign::Plus).unwrap();
        let r = optimal_assisted_succ(&ch, pr.correlation()).unwrap();
        let b = check_local_fraction_bound(&ch, &pr, r.value).unwrap();
        let alphabet = check_alphabet_bound(&ch, pr.correlation(), r.value);
        assert!((b.bound - alphabet.bound).abs() < 1e-9);
        assert!(b.holds);

        // Tsirelson box bound value: 1/2 + (1 + (sqrt(2)-1)/2)/3.
        let ts = tsirelson_box();
        let r = optimal_assisted_succ(&ch, ts.correlation()).unwrap();
        let b = check_local_fraction_bound(&ch, &ts, r.value).unwrap();
        let expected = 0.5
            + (1.0 + 0.5 * (std::f64::consts::SQRT_2 - 1.0)) * (1.0 / 3.0);
        assert!((b.bound - expected).abs() < 1e-6, "bound {}", b.bound);
        assert!(b.holds);
    }

    #[test]
    fn decoder_decomposition_matches_full_enumeration() {
        // Tiny instances: enumerate every (d1, d2) explicitly and compare.
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for trial in 0..8 {
            let ny = rng.random_range(1..=3usize);
            let ns = rng.random_range(1..=3usize);
            let nx = rng.random_range(1..=2usize);
            let np = rng.random_range(1..=2usize);
            let ch = crate::testutil::random_channel(&mut rng, nx, ny);
            let d = random_ns_device(&mut rng, 2, ns, np, 2);
            let r = optimal_assisted_succ(&ch, &d).unwrap();

            // Full enumeration over decoders for every encoder.
            let mut best = f64::NEG_INFINITY;
            let n_e2 = (nx as u64).pow(2 * np as u32);
            for e1_idx in 0..4usize {
                let e1 = [e1_idx / 2, e1_idx % 2];
                for e2_idx in 0..n_e2 {
                    let e2 = decode_e2(e2_idx, np, nx as u64);
                    for d1_idx in 0..(ns as u64).pow(ny as u32) {
                        let mut rem = d1_idx;
                        let d1: Vec<usize> = (0..ny)
                            .map(|_| {
                                let s = (rem % ns as u64) as usize;
                                rem /= ns as u64;
                                s
                            })
                            .collect();
                        for d2_idx in 0..(1u64 << (2 * ny)) {
                            let d2: Vec<Vec<u8>> = (0..ny)
                                .map(|y| {
                                    (0..2)
                                        .map(|q| ((d2_idx >> (2 * y + q)) & 1) as u8)
                                        .collect()
                                })
                                .collect();
                            let strat = ProtocolStrategy {
                                e1,
                                e2: e2.clone(),
                                d1: d1.clone(),
                                d2,
                            };
                            let v = simulate(&ch, &d, &strat).unwrap();
                            if v > best {
                                best = v;
                            }
                        }
                    }
                }
            }
            assert!(
                (r.value - best).abs() < 1e-10,
                "trial {trial}: closed form {} vs enumerated {best}",
                r.value
            );
        }
    }

    pub(crate) fn random_ns_device(
        rng: &mut impl Rng,
        nr: usize,
        ns: usize,
        np: usize,
        nq: usize,
    ) -> Correlation {
        // Product of independent random local channels is non-signaling.
        let alice: Vec<Vec<f64>> = (0..nr)
            .map(|_| {
                let mut row: Vec<f64> = (0..np).map(|_| rng.random_range(0.01..1.0)).collect();
                let t: f64 = row.iter().sum();
                row.iter_mut().for_each(|v| *v /= t);
                row
            })
            .collect();
        let bob: Vec<Vec<f64>> = (0..ns)
            .map(|_| {
                let mut row: Vec<f64> = (0..nq).map(|_| rng.random_range(0.01..1.0)).collect();
                let t: f64 = row.iter().sum();
                row.iter_mut().for_each(|v| *v /= t);
                row
            })
            .collect();
        let mut table = vec![vec![vec![vec![0.0; nq]; np]; ns]; nr];
        for r in 0..nr {
            for s in 0..ns {
                for p in 0..np {
                    for q in 0..nq {
                        table[r][s][p][q] = alice[r][p] * bob[s][q];
                    }
                }
            }
        }
        let labels = |n: usize| (0..n).map(|i| i.to_string()).collect::<Vec<_>>();
        Correlation::new(
            "random-product",
            [labels(nr), labels(ns), labels(np), labels(nq)],
            table,
        )
        .unwrap()
    }

    #[test]
    fn assisted_never_below_unassisted_or_above_ns() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10 {
            let ch = crate::testutil::random_channel(&mut rng, 3, 3);
            let d = random_ns_device(&mut rng, 2, 2, 2, 2);
            let r = optimal_assisted_succ(&ch, &d).unwrap();
            assert!(r.value >= succ_unassisted(&ch) - 1e-9);
            let ns = crate::assist::succ_ns(&ch).unwrap().value;
            assert!(r.value <= ns + 1e-8);
        }
    }

    #[test]
    fn budget_guard_reports_cardinality() {
        let ch = crate::testutil::random_channel(&mut ChaCha8Rng::seed_from_u64(1), 16, 2);
        let d = uniform_device(2, 2, 16, 2);
        let err = optimal_assisted_succ(&ch, &d).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("16^32"), "message: {msg}");
    }

    #[test]
    fn strategy_json_roundtrip() {
        let s = passthrough_strategy(2);
        let text = s.to_json_string().unwrap();
        let back = ProtocolStrategy::from_json_str(&text).unwrap();
        assert_eq!(back.e1, s.e1);
        assert_eq!(back.e2, s.e2);
        assert_eq!(back.d1, s.d1);
        assert_eq!(back.d2, s.d2);
    }
}
