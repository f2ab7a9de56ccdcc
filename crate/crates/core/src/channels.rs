//! Discrete memoryless channels, the benchmark channel constructions, and
//! the unassisted one-shot single-bit success probability.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-sum tolerance for accepting a conditional-probability matrix.
const ROW_SUM_TOL: f64 = 1e-9;
/// Entry range tolerance.
const ENTRY_TOL: f64 = 1e-12;
/// Input-alphabet cap for the exhaustive encoder-pair oracle.
const BRUTE_FORCE_MAX_INPUTS: usize = 64;

/// A channel `N(y|x)` over finite input/output alphabets; rows are the
/// conditional distributions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Channel {
    pub name: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub matrix: Vec<Vec<f64>>,
}

/// Whether ingestion should repair rows whose sums drift from 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Renormalize {
    No,
    Yes,
}

impl Channel {
    pub fn new(
        name: impl Into<String>,
        inputs: Vec<String>,
        outputs: Vec<String>,
        matrix: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let ch = Self {
            name: name.into(),
            inputs,
            outputs,
            matrix,
        };
        ch.validate()?;
        Ok(ch)
    }

    pub fn validate(&self) -> Result<()> {
        if self.inputs.is_empty() || self.outputs.is_empty() {
            return Err(Error::Validation(
                "channel alphabets must be nonempty".into(),
            ));
        }
        if self.matrix.len() != self.inputs.len() {
            return Err(Error::Validation(format!(
                "channel '{}' has {} matrix rows but {} inputs",
                self.name,
                self.matrix.len(),
                self.inputs.len()
            )));
        }
        for (i, row) in self.matrix.iter().enumerate() {
            if row.len() != self.outputs.len() {
                return Err(Error::Validation(format!(
                    "row {i} has {} entries but {} outputs",
                    row.len(),
                    self.outputs.len()
                )));
            }
            for (j, &p) in row.iter().enumerate() {
                if !p.is_finite() || p < -ENTRY_TOL || p > 1.0 + ENTRY_TOL {
                    return Err(Error::Validation(format!(
                        "entry ({i}, {j}) = {p} outside [0, 1]"
                    )));
                }
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::Validation(format!(
                    "row {i} sums to {sum}, expected 1"
                )));
            }
        }
        Ok(())
    }

    pub fn num_inputs(&self) -> usize {
        self.inputs.len()
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    pub fn to_json_string(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json_str(s: &str, renormalize: Renormalize) -> Result<Self> {
        let mut ch: Channel = serde_json::from_str(s)
            .map_err(|e| Error::Parse(format!("channel file: {e}")))?;
        if renormalize == Renormalize::Yes {
            for row in ch.matrix.iter_mut() {
                let sum: f64 = row.iter().sum();
                if sum > 0.0 {
                    for v in row.iter_mut() {
                        *v /= sum;
                    }
                }
            }
        }
        ch.validate()?;
        Ok(ch)
    }
}

/// The 4-input, 6-output channel with three equally likely outputs per
/// input, arranged so any two rows overlap in exactly one output.
pub fn make_prevedel() -> Channel {
    let t = 1.0 / 3.0;
    let matrix = vec![
        vec![t, 0.0, t, 0.0, t, 0.0],
        vec![t, 0.0, 0.0, t, 0.0, t],
        vec![0.0, t, t, 0.0, 0.0, t],
        vec![0.0, t, 0.0, t, t, 0.0],
    ];
    Channel {
        name: "prevedel".into(),
        inputs: (1..=4).map(|i| i.to_string()).collect(),
        outputs: (1..=6).map(|i| i.to_string()).collect(),
        matrix,
    }
}

/// Parity of the F_2 inner product of the bit vectors of `i` and `j`.
pub(crate) fn dot_f2(i: usize, j: usize) -> usize {
    (i & j).count_ones() as usize & 1
}

/// Hashing channel on m-bit inputs: on input `i`, outputs a uniformly random
/// nonzero vector `j` together with the inner product `b_i . b_j` (mod 2).
///
/// Labels use the little-endian integer value of each bit vector; outputs
/// `(j, t)` are ordered lexicographically by `(j, t)`.
pub fn make_hashing_channel(m: u32) -> Result<Channel> {
    if !(1..=8).contains(&m) {
        return Err(Error::Validation(format!(
            "hashing channel parameter m = {m} outside 1..=8"
        )));
    }
    let n_in = 1usize << m;
    let n_nonzero = n_in - 1;
    let p = 1.0 / n_nonzero as f64;
    let inputs: Vec<String> = (0..n_in).map(|i| i.to_string()).collect();
    let mut outputs = Vec::with_capacity(2 * n_nonzero);
    for j in 1..n_in {
        for t in 0..2 {
            outputs.push(format!("{j},{t}"));
        }
    }
    let matrix = (0..n_in)
        .map(|i| {
            let mut row = vec![0.0; 2 * n_nonzero];
            for j in 1..n_in {
                let t = dot_f2(i, j);
                row[(j - 1) * 2 + t] = p;
            }
            row
        })
        .collect();
    Ok(Channel {
        name: format!("hashing-m{m}"),
        inputs,
        outputs,
        matrix,
    })
}

pub(crate) fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Maximum pairwise 1-norm distance of a set of equal-length vectors.
pub fn diam1(rows: &[Vec<f64>]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..rows.len() {
        for j in (i + 1)..rows.len() {
            d = d.max(l1_distance(&rows[i], &rows[j]));
        }
    }
    d
}

/// Unassisted one-shot success probability `1/2 + Diam_1 / 4`.
pub fn succ_unassisted(ch: &Channel) -> f64 {
    0.5 + 0.25 * diam1(ch.rows())
}

/// Exhaustive oracle: best deterministic encoder pair `(x0, x1)` with
/// maximum-likelihood decoding. Ties break to the lexicographically
/// smallest pair. Single-input channels return `1/2` with pair `(0, 0)`.
pub fn brute_force_succ(ch: &Channel) -> Result<(f64, (usize, usize))> {
    let n = ch.num_inputs();
    if n > BRUTE_FORCE_MAX_INPUTS {
        return Err(Error::BudgetExceeded(format!(
            "brute-force oracle limited to {BRUTE_FORCE_MAX_INPUTS} inputs, got {n}"
        )));
    }
    if n == 1 {
        return Ok((0.5, (0, 0)));
    }
    let mut best = (f64::NEG_INFINITY, (0, 0));
    for x0 in 0..n {
        for x1 in 0..n {
            if x0 == x1 {
                continue;
            }
            let v: f64 = ch.matrix[x0]
                .iter()
                .zip(&ch.matrix[x1])
                .map(|(a, b)| a.max(*b))
                .sum::<f64>()
                * 0.5;
            if v > best.0 + 1e-15 {
                best = (v, (x0, x1));
            }
        }
    }
    Ok(best)
}

/// Closed-form unassisted success of the hashing channel.
pub fn hashing_succ_expected(m: u32) -> f64 {
    let p = 2f64.powi(m as i32);
    (p + p / 2.0 - 1.0) / (2.0 * p - 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::random_channel;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn prevedel_matrix_rows() {
        let ch = make_prevedel();
        let t = 1.0 / 3.0;
        assert_eq!(ch.matrix[0], vec![t, 0.0, t, 0.0, t, 0.0]);
        assert_eq!(ch.matrix[2], vec![0.0, t, t, 0.0, 0.0, t]);
        for row in ch.rows() {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        ch.validate().unwrap();
    }

    #[test]
    fn hashing_m1_is_noiseless_bit() {
        let ch = make_hashing_channel(1).unwrap();
        assert_eq!(ch.num_inputs(), 2);
        assert_eq!(ch.num_outputs(), 2);
        // N((1,0)|0) = 1 and N((1,1)|1) = 1.
        assert_eq!(ch.matrix[0], vec![1.0, 0.0]);
        assert_eq!(ch.matrix[1], vec![0.0, 1.0]);
    }

    #[test]
    fn hashing_m2_row_zero_uniform_on_zero_parity() {
        let ch = make_hashing_channel(2).unwrap();
        assert_eq!(ch.num_inputs(), 4);
        assert_eq!(ch.num_outputs(), 6);
        let third = 1.0 / 3.0;
        // Input 0: b_0 . b_j = 0 for all j, so outputs (1,0),(2,0),(3,0).
        assert_eq!(ch.matrix[0], vec![third, 0.0, third, 0.0, third, 0.0]);
    }

    #[test]
    fn hashing_rows_have_expected_support() {
        for m in 1..=4u32 {
            let ch = make_hashing_channel(m).unwrap();
            let nz = (1usize << m) - 1;
            for row in ch.rows() {
                let support = row.iter().filter(|&&v| v > 0.0).count();
                assert_eq!(support, nz);
                for &v in row.iter().filter(|&&v| v > 0.0) {
                    assert!((v - 1.0 / nz as f64).abs() < 1e-15);
                }
            }
            ch.validate().unwrap();
        }
    }

    #[test]
    fn hashing_m_out_of_range() {
        assert!(make_hashing_channel(0).is_err());
        assert!(make_hashing_channel(9).is_err());
    }

    #[test]
    fn diam1_examples() {
        let rows = vec![vec![0.5, 0.5], vec![0.5, 0.5]];
        assert_eq!(diam1(&rows), 0.0);
        // Rows of the prevedel channel are pairwise 4/3 apart.
        let ch = make_prevedel();
        assert!((diam1(ch.rows()) - 4.0 / 3.0).abs() < 1e-12);
        for i in 0..4 {
            for j in (i + 1)..4 {
                assert!((l1_distance(&ch.matrix[i], &ch.matrix[j]) - 4.0 / 3.0).abs() < 1e-12);
            }
        }
        // Hashing diameter 2^m / (2^m - 1).
        for m in 1..=4u32 {
            let ch = make_hashing_channel(m).unwrap();
            let p = 2f64.powi(m as i32);
            assert!((diam1(ch.rows()) - p / (p - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn succ_examples() {
        let uniform = Channel::new(
            "uniform",
            vec!["a".into(), "b".into()],
            vec!["0".into(), "1".into()],
            vec![vec![0.5, 0.5], vec![0.5, 0.5]],
        )
        .unwrap();
        assert_eq!(succ_unassisted(&uniform), 0.5);

        let ch = make_prevedel();
        assert!((succ_unassisted(&ch) - 5.0 / 6.0).abs() < 1e-12);

        for m in 1..=4u32 {
            let ch = make_hashing_channel(m).unwrap();
            assert!((succ_unassisted(&ch) - hashing_succ_expected(m)).abs() < 1e-12);
        }
    }

    #[test]
    fn brute_force_examples() {
        let identity = Channel::new(
            "id",
            vec!["0".into(), "1".into()],
            vec!["0".into(), "1".into()],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        )
        .unwrap();
        let (v, pair) = brute_force_succ(&identity).unwrap();
        assert_eq!(v, 1.0);
        assert_eq!(pair, (0, 1));

        let (v, _) = brute_force_succ(&make_prevedel()).unwrap();
        assert!((v - 5.0 / 6.0).abs() < 1e-12);

        let single = Channel::new(
            "single",
            vec!["x".into()],
            vec!["0".into(), "1".into()],
            vec![vec![0.25, 0.75]],
        )
        .unwrap();
        assert_eq!(brute_force_succ(&single).unwrap(), (0.5, (0, 0)));
    }

    #[test]
    fn oracle_agrees_with_formula_on_random_channels() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let nx = rng.random_range(1..=8);
            let ny = rng.random_range(1..=8);
            let ch = random_channel(&mut rng, nx, ny);
            let formula = succ_unassisted(&ch);
            let (oracle, _) = brute_force_succ(&ch).unwrap();
            assert!(
                (formula - oracle).abs() < 1e-9,
                "formula {formula} vs oracle {oracle}"
            );
            assert!((0.5..=1.0 + 1e-12).contains(&formula));
        }
    }

    #[test]
    fn succ_invariant_under_permutations() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let ch = random_channel(&mut rng, 5, 6);
            let base = succ_unassisted(&ch);
            let mut rows = ch.matrix.clone();
            rows.shuffle(&mut rng);
            let mut perm: Vec<usize> = (0..6).collect();
            perm.shuffle(&mut rng);
            let permuted: Vec<Vec<f64>> = rows
                .iter()
                .map(|r| perm.iter().map(|&j| r[j]).collect())
                .collect();
            let ch2 = Channel::new(
                "perm",
                ch.inputs.clone(),
                ch.outputs.clone(),
                permuted,
            )
            .unwrap();
            assert!((succ_unassisted(&ch2) - base).abs() < 1e-12);
        }
    }

    #[test]
    fn validation_rejects_bad_rows() {
        let bad = Channel {
            name: "bad".into(),
            inputs: vec!["0".into()],
            outputs: vec!["0".into(), "1".into()],
            matrix: vec![vec![0.5, 0.4]],
        };
        let err = bad.validate().unwrap_err();
        assert!(err.to_string().contains("row 0"));
    }

    #[test]
    fn json_roundtrip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let ch = random_channel(&mut rng, 4, 5);
        let s = ch.to_json_string().unwrap();
        let back = Channel::from_json_str(&s, Renormalize::No).unwrap();
        assert_eq!(ch.matrix, back.matrix);
        assert_eq!(ch.inputs, back.inputs);
        // Emission is deterministic.
        assert_eq!(s, back.to_json_string().unwrap());
    }

    #[test]
    fn renormalization_repairs_drifted_rows() {
        let s = r#"{"name":"drift","inputs":["0"],"outputs":["0","1"],"matrix":[[0.45,0.45]]}"#;
        assert!(Channel::from_json_str(s, Renormalize::No).is_err());
        let ch = Channel::from_json_str(s, Renormalize::Yes).unwrap();
        assert!((ch.matrix[0][0] - 0.5).abs() < 1e-12);
    }
}
