//! Two-part input-output boxes: non-signaling validation, the local
//! polytope, CHSH functionals, PR boxes, quantum boxes from states and
//! measurements, and the local-fraction decomposition.
//!
//! Index conventions: a box table is `p(p, q | r, s)` stored as
//! `table[r][s][p][q]`, with `r`/`p` Alice's input/output and `s`/`q`
//! Bob's. The CHSH functionals follow the same roles, writing `(a, y)` for
//! the inputs and `(x, b)` for the outputs.

use serde::{Deserialize, Serialize};

use crate::channels::dot_f2;
use crate::error::{Error, Result};
use crate::hermitian::HermitianOp;
use crate::lp::{self, LinearProgram, LpStatus};

const ENTRY_TOL: f64 = 1e-12;
const NORM_TOL: f64 = 1e-9;
const NS_TOL: f64 = 1e-9;
const PSD_TOL: f64 = 1e-9;

/// A finite-alphabet correlation `p(pq|rs)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Correlation {
    pub name: String,
    /// Label lists in the order R, S, P, Q.
    pub alphabets: [Vec<String>; 4],
    /// Probabilities indexed `[r][s][p][q]`.
    pub table: Vec<Vec<Vec<Vec<f64>>>>,
}

impl Correlation {
    pub fn new(
        name: impl Into<String>,
        alphabets: [Vec<String>; 4],
        table: Vec<Vec<Vec<Vec<f64>>>>,
    ) -> Result<Self> {
        let mut c = Self {
            name: name.into(),
            alphabets,
            table,
        };
        c.sanitize();
        c.validate()?;
        Ok(c)
    }

    pub fn sizes(&self) -> (usize, usize, usize, usize) {
        (
            self.alphabets[0].len(),
            self.alphabets[1].len(),
            self.alphabets[2].len(),
            self.alphabets[3].len(),
        )
    }

    pub fn prob(&self, r: usize, s: usize, p: usize, q: usize) -> f64 {
        self.table[r][s][p][q]
    }

    /// Clamps entries in `[-1e-12, 0)` to zero, returning how many were hit
    /// (decimal truncation in files produces such values).
    pub fn sanitize(&mut self) -> usize {
        let mut clamped = 0;
        for block in self.table.iter_mut().flatten().flatten() {
            for v in block.iter_mut() {
                if *v < 0.0 && *v >= -ENTRY_TOL {
                    *v = 0.0;
                    clamped += 1;
                }
            }
        }
        clamped
    }

    pub fn validate(&self) -> Result<()> {
        let (nr, ns, np, nq) = self.sizes();
        if nr == 0 || ns == 0 || np == 0 || nq == 0 {
            return Err(Error::Validation("correlation alphabets must be nonempty".into()));
        }
        if self.table.len() != nr {
            return Err(Error::Validation(format!(
                "table has {} r-slices, expected {nr}",
                self.table.len()
            )));
        }
        for (r, slice_s) in self.table.iter().enumerate() {
            if slice_s.len() != ns {
                return Err(Error::Validation(format!(
                    "table[{r}] has {} s-slices, expected {ns}",
                    slice_s.len()
                )));
            }
            for (s, slice_p) in slice_s.iter().enumerate() {
                if slice_p.len() != np {
                    return Err(Error::Validation(format!(
                        "table[{r}][{s}] has {} p-rows, expected {np}",
                        slice_p.len()
                    )));
                }
                let mut total = 0.0;
                for (p, row) in slice_p.iter().enumerate() {
                    if row.len() != nq {
                        return Err(Error::Validation(format!(
                            "table[{r}][{s}][{p}] has {} entries, expected {nq}",
                            row.len()
                        )));
                    }
                    for (q, &v) in row.iter().enumerate() {
                        if !v.is_finite() || v < -ENTRY_TOL {
                            return Err(Error::Validation(format!(
                                "entry ({r},{s},{p},{q}) = {v} is negative"
                            )));
                        }
                        total += v;
                    }
                }
                if (total - 1.0).abs() > NORM_TOL {
                    return Err(Error::Validation(format!(
                        "outputs for inputs ({r},{s}) sum to {total}, expected 1"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_json_string(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Parses and validates; also reports how many slightly-negative entries
    /// were clamped to zero.
    pub fn from_json_str(s: &str) -> Result<(Self, usize)> {
        let mut c: Correlation =
            serde_json::from_str(s).map_err(|e| Error::Parse(format!("correlation file: {e}")))?;
        let clamped = c.sanitize();
        c.validate()?;
        Ok((c, clamped))
    }
}

/// `true` when neither marginal depends on the far party's input.
pub fn is_nonsignaling(d: &Correlation) -> bool {
    let (nr, ns, np, nq) = d.sizes();
    // Bob's marginal must not depend on r.
    for s in 0..ns {
        for q in 0..nq {
            let reference: f64 = (0..np).map(|p| d.prob(0, s, p, q)).sum();
            for r in 1..nr {
                let m: f64 = (0..np).map(|p| d.prob(r, s, p, q)).sum();
                if (m - reference).abs() > NS_TOL {
                    return false;
                }
            }
        }
    }
    // Alice's marginal must not depend on s.
    for r in 0..nr {
        for p in 0..np {
            let reference: f64 = (0..nq).map(|q| d.prob(r, 0, p, q)).sum();
            for s in 1..ns {
                let m: f64 = (0..nq).map(|q| d.prob(r, s, p, q)).sum();
                if (m - reference).abs() > NS_TOL {
                    return false;
                }
            }
        }
    }
    true
}

/// A correlation whose four alphabets all have size 2.
#[derive(Debug, Clone)]
pub struct BinaryBox(Correlation);

impl BinaryBox {
    pub fn new(c: Correlation) -> Result<Self> {
        let (nr, ns, np, nq) = c.sizes();
        if (nr, ns, np, nq) != (2, 2, 2, 2) {
            return Err(Error::Validation(format!(
                "binary box requires all alphabets of size 2, got ({nr},{ns},{np},{nq})"
            )));
        }
        Ok(Self(c))
    }

    pub fn from_table(name: &str, table: [[[[f64; 2]; 2]; 2]; 2]) -> Result<Self> {
        let bits = || vec!["0".to_string(), "1".to_string()];
        let nested: Vec<Vec<Vec<Vec<f64>>>> = table
            .iter()
            .map(|s| {
                s.iter()
                    .map(|p| p.iter().map(|q| q.to_vec()).collect())
                    .collect()
            })
            .collect();
        Ok(Self(Correlation::new(
            name,
            [bits(), bits(), bits(), bits()],
            nested,
        )?))
    }

    pub fn correlation(&self) -> &Correlation {
        &self.0
    }

    pub fn into_correlation(self) -> Correlation {
        self.0
    }

    pub fn prob(&self, r: usize, s: usize, p: usize, q: usize) -> f64 {
        self.0.prob(r, s, p, q)
    }
}

/// All 16 local-deterministic binary boxes: output functions `f: R -> P`
/// for Alice and `g: S -> Q` for Bob. Box `i` encodes
/// `f(r) = bit r of (i / 4)` and `g(s) = bit s of (i % 4)`.
pub fn deterministic_boxes() -> Vec<BinaryBox> {
    let mut boxes = Vec::with_capacity(16);
    for f_idx in 0..4usize {
        for g_idx in 0..4usize {
            let mut table = [[[[0.0; 2]; 2]; 2]; 2];
            for (r, row_s) in table.iter_mut().enumerate() {
                for (s, row_p) in row_s.iter_mut().enumerate() {
                    let p = (f_idx >> r) & 1;
                    let q = (g_idx >> s) & 1;
                    row_p[p][q] = 1.0;
                }
            }
            boxes.push(
                BinaryBox::from_table(&format!("det-{f_idx}{g_idx}"), table)
                    .expect("deterministic tables are valid"),
            );
        }
    }
    boxes
}

#[inline]
fn parity_fn(k: usize, a: usize, y: usize) -> usize {
    match k {
        0 => a & y,
        1 => (1 - a) & y,
        2 => a & (1 - y),
        _ => (1 - a) & (1 - y),
    }
}

/// The four signed CHSH sums `f_1..f_4`:
/// `f_k = sum (-1)^(x + b + pi_k(a,y)) p(xb|ay)` with `pi_1 = a AND y` and
/// `pi_2..pi_4` its input-negated variants.
pub fn chsh_values(d: &BinaryBox) -> [f64; 4] {
    let mut f = [0.0; 4];
    for (k, fk) in f.iter_mut().enumerate() {
        for a in 0..2 {
            for y in 0..2 {
                for x in 0..2 {
                    for b in 0..2 {
                        let sign = if (x + b + parity_fn(k, a, y)) % 2 == 0 {
                            1.0
                        } else {
                            -1.0
                        };
                        *fk += sign * d.prob(a, y, x, b);
                    }
                }
            }
        }
    }
    f
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// The PR box with `f_j = +-4` and the other three functionals zero:
/// outputs satisfy `x XOR b = pi_j(a, y)` (negated for `Minus`) with
/// uniform marginals.
pub fn pr_box(j: usize, sign: Sign) -> Result<BinaryBox> {
    if !(1..=4).contains(&j) {
        return Err(Error::Validation(format!("PR box index {j} outside 1..=4")));
    }
    let flip = if sign == Sign::Minus { 1 } else { 0 };
    let mut table = [[[[0.0; 2]; 2]; 2]; 2];
    for a in 0..2 {
        for y in 0..2 {
            for x in 0..2 {
                for b in 0..2 {
                    if (x + b) % 2 == (parity_fn(j - 1, a, y) + flip) % 2 {
                        table[a][y][x][b] = 0.5;
                    }
                }
            }
        }
    }
    let tag = if sign == Sign::Plus { "plus" } else { "minus" };
    BinaryBox::from_table(&format!("pr-{j}-{tag}"), table)
}

fn check_povm(povm: &[HermitianOp], dim: usize, who: &str) -> Result<()> {
    if povm.is_empty() {
        return Err(Error::Validation(format!("{who} POVM has no elements")));
    }
    let mut sum = HermitianOp::zero(dim);
    for e in povm {
        if e.dim() != dim {
            return Err(Error::Dimension {
                expected: dim,
                found: e.dim(),
            });
        }
        if e.min_eigenvalue() < -PSD_TOL {
            return Err(Error::Validation(format!(
                "{who} POVM element has negative eigenvalue {}",
                e.min_eigenvalue()
            )));
        }
        sum.axpy(1.0, e);
    }
    if sum.max_entrywise_diff(&HermitianOp::identity(dim)) > NORM_TOL {
        return Err(Error::Validation(format!("{who} POVM does not sum to identity")));
    }
    Ok(())
}

/// Box induced by local measurements on a shared bipartite state:
/// `p(pq|rs) = Tr((A_r^p kron B_s^q) state)`.
pub fn quantum_correlation(
    state: &HermitianOp,
    alice_povms: &[Vec<HermitianOp>],
    bob_povms: &[Vec<HermitianOp>],
) -> Result<Correlation> {
    if alice_povms.is_empty() || bob_povms.is_empty() {
        return Err(Error::Validation("each party needs at least one input".into()));
    }
    let da = alice_povms[0][0].dim();
    let db = bob_povms[0][0].dim();
    if state.dim() != da * db {
        return Err(Error::Dimension {
            expected: da * db,
            found: state.dim(),
        });
    }
    if state.min_eigenvalue() < -PSD_TOL {
        return Err(Error::Validation(format!(
            "state has negative eigenvalue {}",
            state.min_eigenvalue()
        )));
    }
    if (state.trace() - 1.0).abs() > NORM_TOL {
        return Err(Error::Validation(format!(
            "state trace {} differs from 1",
            state.trace()
        )));
    }
    for povm in alice_povms {
        check_povm(povm, da, "Alice")?;
    }
    for povm in bob_povms {
        check_povm(povm, db, "Bob")?;
    }

    let nr = alice_povms.len();
    let ns = bob_povms.len();
    let np = alice_povms[0].len();
    let nq = bob_povms[0].len();
    if alice_povms.iter().any(|p| p.len() != np) || bob_povms.iter().any(|p| p.len() != nq) {
        return Err(Error::Validation(
            "all POVMs of a party must share one outcome alphabet".into(),
        ));
    }

    let mut table = vec![vec![vec![vec![0.0; nq]; np]; ns]; nr];
    for r in 0..nr {
        for s in 0..ns {
            for p in 0..np {
                for q in 0..nq {
                    let joint = alice_povms[r][p].kron(&bob_povms[s][q]);
                    table[r][s][p][q] = joint.trace_product(state)?;
                }
            }
        }
    }
    let labels = |n: usize| (0..n).map(|i| i.to_string()).collect::<Vec<_>>();
    let corr = Correlation::new(
        "quantum",
        [labels(nr), labels(ns), labels(np), labels(nq)],
        table,
    )?;
    if !is_nonsignaling(&corr) {
        return Err(Error::CertificateMismatch(
            "quantum box failed the non-signaling check".into(),
        ));
    }
    Ok(corr)
}

/// Measurement element `(I + u . sigma)/2` for a Bloch direction.
fn direction_element(u: [f64; 3], outcome: usize) -> HermitianOp {
    let sign = if outcome == 0 { 1.0 } else { -1.0 };
    crate::hermitian::BlochForm {
        trace: 1.0,
        vec: [0.5 * sign * u[0], 0.5 * sign * u[1], 0.5 * sign * u[2]],
    }
    .reconstruct()
}

fn projective_binary_povm(u: [f64; 3]) -> Vec<HermitianOp> {
    vec![direction_element(u, 0), direction_element(u, 1)]
}

/// Maximally entangled two-qubit state measured along the standard
/// CHSH-optimal directions; reaches `f_1 = 2 sqrt(2)`.
pub fn tsirelson_box() -> BinaryBox {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut data = vec![num_complex::Complex64::ZERO; 16];
    for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
        data[i * 4 + j] = num_complex::Complex64::new(0.5, 0.0);
    }
    let state = HermitianOp::new(4, data).expect("maximally entangled state");
    let alice = vec![
        projective_binary_povm([0.0, 0.0, 1.0]),
        projective_binary_povm([1.0, 0.0, 0.0]),
    ];
    let bob = vec![
        projective_binary_povm([s, 0.0, s]),
        projective_binary_povm([-s, 0.0, s]),
    ];
    let corr = quantum_correlation(&state, &alice, &bob).expect("valid construction");
    BinaryBox::new(corr).expect("binary alphabets")
}

/// Largest weight of a local component: maximize `sum q_i` subject to
/// `sum q_i L_i <= d` entrywise over the 16 deterministic boxes. The
/// leftover `(d - sum q_i L_i)/(1 - alpha)` is itself non-signaling, which
/// is re-checked at runtime rather than assumed.
pub fn local_fraction(d: &BinaryBox) -> Result<(f64, Vec<f64>)> {
    if !is_nonsignaling(d.correlation()) {
        return Err(Error::Validation(
            "local fraction requires a non-signaling box".into(),
        ));
    }
    let locals = deterministic_boxes();
    let objective = vec![1.0; locals.len()];
    let mut rows = Vec::with_capacity(16);
    let mut bounds = Vec::with_capacity(16);
    for r in 0..2 {
        for s in 0..2 {
            for p in 0..2 {
                for q in 0..2 {
                    rows.push(locals.iter().map(|l| l.prob(r, s, p, q)).collect());
                    bounds.push(d.prob(r, s, p, q));
                }
            }
        }
    }
    let sol = lp::solve(&LinearProgram::new(objective, rows, bounds))?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::SolverFailure(format!(
            "local-fraction LP status {:?}",
            sol.status
        )));
    }
    let alpha = sol.objective_value.clamp(0.0, 1.0);
    let weights = sol.x;

    // Residual soundness check.
    if alpha < 1.0 - 1e-9 {
        let scale = 1.0 / (1.0 - alpha);
        let mut residual = [[[[0.0; 2]; 2]; 2]; 2];
        for (r, rs) in residual.iter_mut().enumerate() {
            for (s, rp) in rs.iter_mut().enumerate() {
                for (p, rq) in rp.iter_mut().enumerate() {
                    for (q, v) in rq.iter_mut().enumerate() {
                        let mixed: f64 = weights
                            .iter()
                            .zip(&locals)
                            .map(|(w, l)| w * l.prob(r, s, p, q))
                            .sum();
                        *v = (d.prob(r, s, p, q) - mixed) * scale;
                        if *v < -1e-8 {
                            return Err(Error::CertificateMismatch(format!(
                                "local-fraction residual entry ({r},{s},{p},{q}) = {v}"
                            )));
                        }
                        *v = v.max(0.0);
                    }
                }
            }
        }
        let res_box = BinaryBox::from_table("residual", residual)?;
        if !is_nonsignaling(res_box.correlation()) {
            return Err(Error::CertificateMismatch(
                "local-fraction residual is signaling".into(),
            ));
        }
    }
    Ok((alpha, weights))
}

/// The non-signaling device that sends a random extension of Alice's bit
/// and answers Bob's parity query: Alice's part maps `a` to a uniform
/// m-bit vector with first coordinate `a`; Bob's part on input `(w, r)`
/// outputs `a XOR r XOR (w . avec)`.
///
/// Vectors are labeled by little-endian integer value (first coordinate =
/// bit 0); `w` ranges over `1..2^m`, paired with `r` in `{0, 1}` in the
/// same lexicographic order as the hashing channel's outputs.
pub fn device_e(m: u32) -> Result<Correlation> {
    if !(1..=6).contains(&m) {
        return Err(Error::Validation(format!(
            "device parameter m = {m} outside 1..=6"
        )));
    }
    let np = 1usize << m;
    let half = (np / 2) as f64;
    let r_labels = vec!["0".to_string(), "1".to_string()];
    let p_labels: Vec<String> = (0..np).map(|i| i.to_string()).collect();
    let mut s_labels = Vec::with_capacity(2 * (np - 1));
    for w in 1..np {
        for r in 0..2 {
            s_labels.push(format!("{w},{r}"));
        }
    }
    let q_labels = vec!["0".to_string(), "1".to_string()];

    let mut table = vec![vec![vec![vec![0.0; 2]; np]; s_labels.len()]; 2];
    for a in 0..2usize {
        for (s_idx, _) in s_labels.iter().enumerate() {
            let w = s_idx / 2 + 1;
            let r = s_idx % 2;
            for avec in 0..np {
                if avec & 1 != a {
                    continue;
                }
                let q = (a + r + dot_f2(w, avec)) % 2;
                table[a][s_idx][avec][q] = 1.0 / half;
            }
        }
    }
    Correlation::new(
        format!("device-e-m{m}"),
        [r_labels, s_labels, p_labels, q_labels],
        table,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::random_hermitian;
    use num_complex::Complex64;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    fn uniform_box() -> BinaryBox {
        BinaryBox::from_table("uniform", [[[[0.25; 2]; 2]; 2]; 2]).unwrap()
    }

    pub(crate) fn random_unit(rng: &mut impl Rng) -> [f64; 3] {
        loop {
            let v = [
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            ];
            let n = crate::hermitian::norm3(&v);
            if n > 1e-3 {
                return [v[0] / n, v[1] / n, v[2] / n];
            }
        }
    }

    pub(crate) fn random_pure_state(rng: &mut impl Rng, dim: usize) -> HermitianOp {
        let amps: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let mut data = vec![Complex64::ZERO; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                data[i * dim + j] = amps[i] * amps[j].conj() / (norm * norm);
            }
        }
        HermitianOp::new(dim, data).unwrap()
    }

    pub(crate) fn random_binary_quantum_box(rng: &mut impl Rng) -> BinaryBox {
        let state = random_pure_state(rng, 4);
        let alice = vec![
            projective_binary_povm(random_unit(rng)),
            projective_binary_povm(random_unit(rng)),
        ];
        let bob = vec![
            projective_binary_povm(random_unit(rng)),
            projective_binary_povm(random_unit(rng)),
        ];
        BinaryBox::new(quantum_correlation(&state, &alice, &bob).unwrap()).unwrap()
    }

    #[test]
    fn product_box_is_nonsignaling() {
        // Independent local channels: Alice outputs r biased, Bob fixed.
        let mut table = [[[[0.0; 2]; 2]; 2]; 2];
        for (r, rs) in table.iter_mut().enumerate() {
            for rp in rs.iter_mut() {
                rp[r][0] = 0.7;
                rp[1 - r][0] = 0.3;
            }
        }
        let b = BinaryBox::from_table("product", table).unwrap();
        assert!(is_nonsignaling(b.correlation()));
    }

    #[test]
    fn copying_far_input_signals() {
        // Alice's output copies Bob's input: maximally signaling.
        let mut table = [[[[0.0; 2]; 2]; 2]; 2];
        for rs in table.iter_mut() {
            for (s, rp) in rs.iter_mut().enumerate() {
                rp[s][0] = 1.0;
            }
        }
        let b = BinaryBox::from_table("copycat", table).unwrap();
        assert!(!is_nonsignaling(b.correlation()));
    }

    #[test]
    fn deterministic_boxes_enumerate_all_function_pairs() {
        let boxes = deterministic_boxes();
        assert_eq!(boxes.len(), 16);
        // Constant-0/constant-0 is the first box.
        for r in 0..2 {
            for s in 0..2 {
                assert_eq!(boxes[0].prob(r, s, 0, 0), 1.0);
            }
        }
        // Identity/identity box: f_idx = 0b10 = 2, g_idx = 2 -> index 10.
        let ident = &boxes[10];
        for r in 0..2 {
            for s in 0..2 {
                for p in 0..2 {
                    for q in 0..2 {
                        let expected = if p == r && q == s { 1.0 } else { 0.0 };
                        assert_eq!(ident.prob(r, s, p, q), expected);
                    }
                }
            }
        }
        // All distinct.
        for i in 0..16 {
            for j in (i + 1)..16 {
                let same = (0..16).all(|e| {
                    let (r, s, p, q) = (e / 8, (e / 4) % 2, (e / 2) % 2, e % 2);
                    boxes[i].prob(r, s, p, q) == boxes[j].prob(r, s, p, q)
                });
                assert!(!same, "boxes {i} and {j} coincide");
            }
        }
        // Every deterministic box is non-signaling and local (all |f| <= 2).
        for b in &boxes {
            assert!(is_nonsignaling(b.correlation()));
            for f in chsh_values(b) {
                assert!(f.abs() <= 2.0 + 1e-12);
            }
        }
    }

    #[test]
    fn chsh_uniform_box_vanishes() {
        assert_eq!(chsh_values(&uniform_box()), [0.0; 4]);
    }

    #[test]
    fn pr_boxes_hit_four_on_their_functional() {
        for j in 1..=4 {
            for sign in [Sign::Plus, Sign::Minus] {
                let b = pr_box(j, sign).unwrap();
                assert!(is_nonsignaling(b.correlation()));
                let f = chsh_values(&b);
                for (k, fk) in f.iter().enumerate() {
                    let expected = if k + 1 == j {
                        if sign == Sign::Plus {
                            4.0
                        } else {
                            -4.0
                        }
                    } else {
                        0.0
                    };
                    assert!(
                        (fk - expected).abs() < 1e-12,
                        "pr({j},{sign:?}) f_{} = {fk}",
                        k + 1
                    );
                }
            }
        }
        assert!(pr_box(0, Sign::Plus).is_err());
        assert!(pr_box(5, Sign::Plus).is_err());
    }

    #[test]
    fn quantum_trivial_povm_gives_single_outcome() {
        let state = random_pure_state(&mut ChaCha8Rng::seed_from_u64(1), 4);
        let alice = vec![vec![HermitianOp::identity(2)]];
        let bob = vec![vec![HermitianOp::identity(2)]];
        let c = quantum_correlation(&state, &alice, &bob).unwrap();
        assert!((c.prob(0, 0, 0, 0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn entangled_same_basis_correlates_perfectly() {
        let mut data = vec![Complex64::ZERO; 16];
        for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            data[i * 4 + j] = Complex64::new(0.5, 0.0);
        }
        let state = HermitianOp::new(4, data).unwrap();
        let z_basis = vec![projective_binary_povm([0.0, 0.0, 1.0])];
        let c = quantum_correlation(&state, &z_basis, &z_basis).unwrap();
        assert!((c.prob(0, 0, 0, 0) - 0.5).abs() < 1e-12);
        assert!((c.prob(0, 0, 1, 1) - 0.5).abs() < 1e-12);
        assert!(c.prob(0, 0, 0, 1).abs() < 1e-12);
        assert!(c.prob(0, 0, 1, 0).abs() < 1e-12);
    }

    #[test]
    fn tsirelson_box_reaches_two_sqrt_two() {
        let b = tsirelson_box();
        let f = chsh_values(&b);
        assert!((f[0] - 2.0 * SQRT2).abs() < 1e-9, "f1 = {}", f[0]);
        assert!(is_nonsignaling(b.correlation()));
    }

    #[test]
    fn quantum_boxes_are_nonsignaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let b = random_binary_quantum_box(&mut rng);
            assert!(is_nonsignaling(b.correlation()));
        }
    }

    #[test]
    fn local_fraction_of_deterministic_box_is_one() {
        for b in deterministic_boxes().iter().take(4) {
            let (alpha, _) = local_fraction(b).unwrap();
            assert!((alpha - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn local_fraction_of_pr_box_is_zero() {
        let (alpha, _) = local_fraction(&pr_box(1, Sign::Plus).unwrap()).unwrap();
        assert!(alpha.abs() < 1e-9);
    }

    #[test]
    fn local_fraction_of_tsirelson_box() {
        let (alpha, _) = local_fraction(&tsirelson_box()).unwrap();
        assert!((alpha - (2.0 - SQRT2)).abs() < 1e-6, "alpha = {alpha}");
    }

    #[test]
    fn local_mixtures_have_full_local_fraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let locals = deterministic_boxes();
        for _ in 0..20 {
            let mut weights: Vec<f64> = (0..16).map(|_| rng.random_range(0.0..1.0)).collect();
            let total: f64 = weights.iter().sum();
            for w in weights.iter_mut() {
                *w /= total;
            }
            let mut table = [[[[0.0; 2]; 2]; 2]; 2];
            for (r, rs) in table.iter_mut().enumerate() {
                for (s, rp) in rs.iter_mut().enumerate() {
                    for (p, rq) in rp.iter_mut().enumerate() {
                        for (q, v) in rq.iter_mut().enumerate() {
                            *v = weights
                                .iter()
                                .zip(&locals)
                                .map(|(w, l)| w * l.prob(r, s, p, q))
                                .sum();
                        }
                    }
                }
            }
            let b = BinaryBox::from_table("mix", table).unwrap();
            for f in chsh_values(&b) {
                assert!(f.abs() <= 2.0 + 1e-9);
            }
            let (alpha, _) = local_fraction(&b).unwrap();
            assert!((alpha - 1.0).abs() < 1e-6, "alpha = {alpha}");
        }
    }

    #[test]
    fn decomposition_reconstructs_the_box() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let locals = deterministic_boxes();
        for trial in 0..20 {
            // Random NS box: mixture of deterministic boxes and one PR box.
            let pr = pr_box(rng.random_range(1..=4), Sign::Plus).unwrap();
            let pr_w: f64 = rng.random_range(0.0..1.0);
            let mut weights: Vec<f64> = (0..16).map(|_| rng.random_range(0.0..1.0)).collect();
            let total: f64 = weights.iter().sum::<f64>() / (1.0 - pr_w);
            for w in weights.iter_mut() {
                *w /= total;
            }
            let mut table = [[[[0.0; 2]; 2]; 2]; 2];
            for (r, rs) in table.iter_mut().enumerate() {
                for (s, rp) in rs.iter_mut().enumerate() {
                    for (p, rq) in rp.iter_mut().enumerate() {
                        for (q, v) in rq.iter_mut().enumerate() {
                            *v = pr_w * pr.prob(r, s, p, q)
                                + weights
                                    .iter()
                                    .zip(&locals)
                                    .map(|(w, l)| w * l.prob(r, s, p, q))
                                    .sum::<f64>();
                        }
                    }
                }
            }
            let b = BinaryBox::from_table("ns-mix", table).unwrap();
            let (alpha, q_weights) = local_fraction(&b).unwrap();
            // alpha L + (1 - alpha) residual reproduces the box entrywise.
            if alpha < 1.0 - 1e-9 {
                for r in 0..2 {
                    for s in 0..2 {
                        for p in 0..2 {
                            for q in 0..2 {
                                let mixed: f64 = q_weights
                                    .iter()
                                    .zip(&locals)
                                    .map(|(w, l)| w * l.prob(r, s, p, q))
                                    .sum();
                                let residual = b.prob(r, s, p, q) - mixed;
                                let recon = mixed + residual;
                                assert!(
                                    (recon - b.prob(r, s, p, q)).abs() < 1e-8,
                                    "trial {trial}"
                                );
                            }
                        }
                    }
                }
            }
            // The mixture construction proves alpha >= 1 - pr_w.
            assert!(alpha >= 1.0 - pr_w - 1e-7, "alpha {alpha} vs {}", 1.0 - pr_w);
        }
    }

    #[test]
    fn quantum_boxes_meet_the_local_fraction_floor() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..25 {
            let b = random_binary_quantum_box(&mut rng);
            let (alpha, _) = local_fraction(&b).unwrap();
            assert!(alpha >= 2.0 - SQRT2 - 1e-6, "alpha = {alpha}");
        }
    }

    #[test]
    fn device_e_m1_is_identity_and_parity() {
        let d = device_e(1).unwrap();
        let (nr, ns, np, nq) = d.sizes();
        assert_eq!((nr, ns, np, nq), (2, 2, 2, 2));
        // Alice's output equals her input; Bob's output is r when w = 1.
        for a in 0..2 {
            for s_idx in 0..2 {
                let r = s_idx % 2;
                for avec in 0..2 {
                    for q in 0..2 {
                        // q = a + r + (1 . avec) = a + r + avec = r (mod 2) given avec = a.
                        let expected = if avec == a && q == r { 1.0 } else { 0.0 };
                        assert_eq!(d.prob(a, s_idx, avec, q), expected);
                    }
                }
            }
        }
    }

    #[test]
    fn device_e_marginal_uniform_and_nonsignaling() {
        for m in 1..=4u32 {
            let d = device_e(m).unwrap();
            assert!(is_nonsignaling(&d), "m = {m}");
            let np = 1usize << m;
            // Alice's marginal: uniform over vectors with first bit a.
            for a in 0..2usize {
                for avec in 0..np {
                    let marginal: f64 = (0..2).map(|q| d.prob(a, 0, avec, q)).sum();
                    let expected = if avec & 1 == a {
                        2.0 / np as f64
                    } else {
                        0.0
                    };
                    assert!((marginal - expected).abs() < 1e-12);
                }
            }
        }
        assert!(device_e(0).is_err());
        assert!(device_e(7).is_err());
    }

    #[test]
    fn json_roundtrip_preserves_table() {
        let b = tsirelson_box();
        let s = b.correlation().to_json_string().unwrap();
        let (back, clamped) = Correlation::from_json_str(&s).unwrap();
        assert_eq!(clamped, 0);
        assert_eq!(back.table, b.correlation().table);
    }

    #[test]
    fn sanitize_clamps_tiny_negatives() {
        let mut table = [[[[0.25; 2]; 2]; 2]; 2];
        table[0][0][0][0] = 0.25 + 1e-13;
        table[0][0][0][1] = 0.25 - 1e-13;
        table[0][0][1][0] = -1e-13;
        table[0][0][1][1] = 0.5 + 2e-13;
        let b = BinaryBox::from_table("near", table).unwrap();
        assert_eq!(b.prob(0, 0, 1, 0), 0.0);
    }

    #[test]
    fn random_mixed_states_also_satisfy_the_floor() {
        // Mixed two-qubit states from random PSD combinations.
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..10 {
            let h = random_hermitian(&mut rng, 4);
            let sq = HermitianOp::new(4, h.matmul_raw(&h)).unwrap();
            let state = sq.scale(1.0 / sq.trace());
            let alice = vec![
                projective_binary_povm(random_unit(&mut rng)),
                projective_binary_povm(random_unit(&mut rng)),
            ];
            let bob = vec![
                projective_binary_povm(random_unit(&mut rng)),
                projective_binary_povm(random_unit(&mut rng)),
            ];
            let b = BinaryBox::new(quantum_correlation(&state, &alice, &bob).unwrap()).unwrap();
            let (alpha, _) = local_fraction(&b).unwrap();
            assert!(alpha >= 2.0 - SQRT2 - 1e-6);
        }
    }
}
