//! Strong and weak conformality of inner product matrices.
//!
//! Strong conformality is the largest `M`-correlation between vectors that are
//! orthogonal in the standard inner product; weak conformality restricts to
//! vectors with disjoint supports. The former has a closed form in the extreme
//! eigenvalues. The latter is computed exactly by enumerating index
//! partitions, which is exponential in the dimension.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{gen_eig, jacobi, submatrix, SpdMatrix};
use crate::report::Verdict;

/// Largest dimension (of an irreducible block) enumerated without `force`.
pub const DEFAULT_WEAK_CAP: usize = 20;

/// Additive slack for the sandwich bounds.
pub const BOUND_SLACK: f64 = 1e-10;

/// Tolerance for the inverse-invariance check.
pub const INVERSE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WeakOptions {
    pub cap: usize,
    pub force: bool,
    pub threads: usize,
}

impl Default for WeakOptions {
    fn default() -> Self {
        Self {
            cap: DEFAULT_WEAK_CAP,
            force: false,
            threads: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformalityResult {
    pub rho_strong: f64,
    pub rho_weak: f64,
    /// Index set containing `x`'s support; `y` lives on its complement.
    #[serde(rename = "witness_S")]
    pub witness_s: Vec<usize>,
    pub witness_x: Vec<f64>,
    pub witness_y: Vec<f64>,
}

/// `(λ_max − λ_min)/(λ_max + λ_min)`.
pub fn strong_conformality(m: &SpdMatrix) -> Result<f64> {
    if m.dim() < 2 {
        return Err(Error::Domain("conformality needs dimension at least 2".into()));
    }
    let (lo, hi) = (m.eig().min(), m.eig().max());
    Ok((hi - lo) / (hi + lo))
}

pub fn weak_conformality(m: &SpdMatrix) -> Result<ConformalityResult> {
    weak_conformality_with(m, &WeakOptions::default())
}

/// Exact weak conformality by partition enumeration.
///
/// The matrix is first split into the irreducible diagonal blocks of its
/// sparsity pattern. Vectors supported on different blocks are `M`-orthogonal,
/// so by Cauchy-Schwarz the weak conformality is the maximum over blocks, and
/// only the largest block is subject to the cap.
pub fn weak_conformality_with(m: &SpdMatrix, opts: &WeakOptions) -> Result<ConformalityResult> {
    let k = m.dim();
    let rho_strong = strong_conformality(m)?;
    let blocks = irreducible_blocks(m.matrix());
    let largest = blocks.iter().map(Vec::len).max().unwrap_or(0);
    if largest > opts.cap && !opts.force {
        return Err(Error::CapExceeded {
            what: "weak conformality enumeration",
            size: largest,
            cap: opts.cap,
        });
    }

    let mut best: Option<(f64, Vec<usize>, usize)> = None;
    for (b, block) in blocks.iter().enumerate() {
        if block.len() < 2 {
            continue;
        }
        let local = m.principal(block);
        let (value, s_local) = enumerate_block(&local, opts.threads.max(1))?;
        let s: Vec<usize> = s_local.iter().map(|&i| block[i]).collect();
        if best.as_ref().is_none_or(|(v, _, _)| value > *v) {
            best = Some((value, s, b));
        }
    }

    match best {
        Some((value, s_block, b)) if value > 0.0 => {
            let block = &blocks[b];
            let t_block: Vec<usize> = block.iter().copied().filter(|i| !s_block.contains(i)).collect();
            let (x, y) = witness_pair(m, &s_block, &t_block)?;
            let mut s = s_block.clone();
            if !s.contains(&0) {
                s.extend((0..k).filter(|i| !block.contains(i)));
                s.sort_unstable();
            }
            Ok(ConformalityResult {
                rho_strong,
                rho_weak: value.min(rho_strong),
                witness_s: s,
                witness_x: x.as_slice().to_vec(),
                witness_y: y.as_slice().to_vec(),
            })
        }
        _ => {
            // No correlated split: any singleton works.
            let mut x = vec![0.0; k];
            let mut y = vec![0.0; k];
            x[0] = 1.0 / m.matrix()[(0, 0)].sqrt();
            y[1] = 1.0 / m.matrix()[(1, 1)].sqrt();
            Ok(ConformalityResult {
                rho_strong,
                rho_weak: 0.0,
                witness_s: vec![0],
                witness_x: x,
                witness_y: y,
            })
        }
    }
}

/// Connected components of the off-diagonal nonzero pattern, each sorted.
fn irreducible_blocks(m: &DMatrix<f64>) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut seen = vec![false; n];
    let mut blocks = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![start];
        let mut block = Vec::new();
        while let Some(u) = stack.pop() {
            block.push(u);
            for v in 0..n {
                if !seen[v] && m[(u, v)] != 0.0 {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        block.sort_unstable();
        blocks.push(block);
    }
    blocks
}

/// Index 0 is always in `S`; bit `j` of `mask` puts index `j + 1` in `S`.
fn split_from_mask(k: usize, mask: u64) -> (Vec<usize>, Vec<usize>) {
    let mut s = vec![0];
    let mut t = Vec::new();
    for j in 1..k {
        if mask >> (j - 1) & 1 == 1 {
            s.push(j);
        } else {
            t.push(j);
        }
    }
    (s, t)
}

/// `√λ_max` of `λ·M_SS·v = M_ST·M_TT⁻¹·M_TS·v`, via the singular values of
/// `L_S⁻¹·M_ST·L_T⁻ᵀ` with `L` the Cholesky factors.
fn split_value(m: &DMatrix<f64>, s: &[usize], t: &[usize]) -> Result<f64> {
    let fail = || Error::Numerical("Cholesky failed on a principal submatrix".into());
    let ls = Cholesky::new(submatrix(m, s, s)).ok_or_else(fail)?.l();
    let lt = Cholesky::new(submatrix(m, t, t)).ok_or_else(fail)?.l();
    let a = ls.solve_lower_triangular(&submatrix(m, s, t)).ok_or_else(fail)?;
    let ct = lt.solve_lower_triangular(&a.transpose()).ok_or_else(fail)?;
    let gram = if s.len() <= t.len() {
        ct.transpose() * &ct
    } else {
        &ct * ct.transpose()
    };
    let lmax = if gram.nrows() == 1 {
        gram[(0, 0)]
    } else {
        let sym = (&gram + gram.transpose()) * 0.5;
        jacobi(&sym)?.max()
    };
    Ok(lmax.max(0.0).sqrt())
}

/// `(value, S)` better than `(other, S')`: larger value, then lexicographically
/// smaller `S`.
fn better(value: f64, s: &[usize], other: &(f64, Vec<usize>)) -> bool {
    value > other.0 || (value == other.0 && s < other.1.as_slice())
}

fn enumerate_range(m: &DMatrix<f64>, lo: u64, hi: u64, full: u64) -> Result<(f64, Vec<usize>)> {
    let k = m.nrows();
    let mut best: Option<(f64, Vec<usize>)> = None;
    for i in lo..hi {
        let mask = i ^ (i >> 1);
        if mask == full {
            continue;
        }
        let (s, t) = split_from_mask(k, mask);
        let value = split_value(m, &s, &t)?;
        if best.as_ref().is_none_or(|b| better(value, &s, b)) {
            best = Some((value, s));
        }
    }
    Ok(best.unwrap_or((f64::NEG_INFINITY, Vec::new())))
}

/// Maximizes over the `2^{k−1} − 1` splits of one irreducible block, walking
/// masks in Gray-code order.
fn enumerate_block(m: &DMatrix<f64>, threads: usize) -> Result<(f64, Vec<usize>)> {
    let k = m.nrows();
    let count = 1u64 << (k - 1);
    let full = count - 1;
    let threads = (threads as u64).clamp(1, count);
    let results: Vec<Result<(f64, Vec<usize>)>> = if threads == 1 {
        vec![enumerate_range(m, 0, count, full)]
    } else {
        let chunk = count.div_ceil(threads);
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..threads)
                .map(|t| {
                    let lo = t * chunk;
                    let hi = ((t + 1) * chunk).min(count);
                    scope.spawn(move || enumerate_range(m, lo, hi, full))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("enumeration worker panicked"))
                .collect()
        })
    };
    let mut best: Option<(f64, Vec<usize>)> = None;
    for r in results {
        let (v, s) = r?;
        if s.is_empty() {
            continue;
        }
        if best.as_ref().is_none_or(|b| better(v, &s, b)) {
            best = Some((v, s));
        }
    }
    best.ok_or_else(|| Error::Numerical("empty enumeration".into()))
}

/// Recovers a maximizing disjoint-support pair for the split `(S, T)`, each
/// normalized to unit `M`-norm and embedded in the full dimension.
fn witness_pair(m: &SpdMatrix, s: &[usize], t: &[usize]) -> Result<(DVector<f64>, DVector<f64>)> {
    let mm = m.matrix();
    let mss = SpdMatrix::new(submatrix(mm, s, s))?;
    let mtt = SpdMatrix::new(submatrix(mm, t, t))?;
    let mst = submatrix(mm, s, t);
    let rhs = &mst * mtt.solve(&mst.transpose())?;
    let eig = gen_eig(&rhs, &mss)?;
    let v = eig.vectors.column(eig.dim() - 1).into_owned();
    let yt = mtt.solve_vec(&(mst.transpose() * &v))?;
    let k = m.dim();
    let mut x = DVector::zeros(k);
    let mut y = DVector::zeros(k);
    for (a, &i) in s.iter().enumerate() {
        x[i] = v[a];
    }
    for (a, &j) in t.iter().enumerate() {
        y[j] = yt[a];
    }
    let nx = m.inner(&x, &x).sqrt();
    let ny = m.inner(&y, &y).sqrt();
    Ok((x / nx, y / ny))
}

/// `xᵀMy / √(xᵀMx · yᵀMy)`.
pub fn correlation(m: &SpdMatrix, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    m.inner(x, y) / (m.inner(x, x) * m.inner(y, y)).sqrt()
}

/// Lower-bound oracle: best correlation over random disjoint-support pairs.
pub fn weak_conformality_sampled(m: &SpdMatrix, trials: usize, seed: u64) -> Result<f64> {
    let k = m.dim();
    if k < 2 {
        return Err(Error::Domain("conformality needs dimension at least 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx: Vec<usize> = (0..k).collect();
    let mut best = 0.0f64;
    for _ in 0..trials {
        let size = rng.gen_range(1..k);
        idx.shuffle(&mut rng);
        let mut x = DVector::zeros(k);
        let mut y = DVector::zeros(k);
        for (pos, &i) in idx.iter().enumerate() {
            let z: f64 = rng.sample(StandardNormal);
            if pos < size {
                x[i] = z;
            } else {
                y[i] = z;
            }
        }
        let c = correlation(m, &x, &y).abs();
        if c.is_finite() {
            best = best.max(c);
        }
    }
    Ok(best)
}

/// Best `M`-correlation over random standard-orthogonal pairs, a lower-bound
/// oracle for strong conformality.
pub fn strong_conformality_sampled(m: &SpdMatrix, trials: usize, seed: u64) -> Result<f64> {
    let k = m.dim();
    if k < 2 {
        return Err(Error::Domain("conformality needs dimension at least 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0f64;
    for _ in 0..trials {
        let x = DVector::from_fn(k, |_, _| rng.sample::<f64, _>(StandardNormal));
        let mut y = DVector::from_fn(k, |_, _| rng.sample::<f64, _>(StandardNormal));
        y -= &x * (x.dot(&y) / x.dot(&x));
        let c = correlation(m, &x, &y).abs();
        if c.is_finite() {
            best = best.max(c);
        }
    }
    Ok(best)
}

fn pair_strong(alpha: f64, rho_w: f64) -> f64 {
    let d = alpha - 1.0 / alpha;
    (d * d + 4.0 * rho_w * rho_w).sqrt() / (alpha + 1.0 / alpha)
}

/// Builds `diag([[α, ρ_w],[ρ_w, 1/α]], I_{k−2})` with weak conformality `ρ_w`
/// and strong conformality `ρ_s`.
pub fn make_conformality_pair(rho_w: f64, rho_s: f64, k: usize) -> Result<SpdMatrix> {
    if k < 2 {
        return Err(Error::Domain("dimension must be at least 2".into()));
    }
    if !(0.0..1.0).contains(&rho_w) || !(0.0..1.0).contains(&rho_s) || rho_w > rho_s {
        return Err(Error::Domain(format!(
            "need 0 <= rho_w <= rho_s < 1, got rho_w = {rho_w}, rho_s = {rho_s}"
        )));
    }
    let alpha = if pair_strong(1.0, rho_w) >= rho_s {
        1.0
    } else {
        let (mut lo, mut hi) = (1.0f64, 1e8f64);
        if pair_strong(hi, rho_w) < rho_s {
            return Err(Error::Numerical(format!("rho_s = {rho_s} needs alpha beyond 1e8")));
        }
        let mut found = None;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let f = pair_strong(mid, rho_w);
            if (f - rho_s).abs() <= 1e-10 {
                found = Some(mid);
                break;
            }
            if f < rho_s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        found.ok_or_else(|| Error::Numerical("bisection for alpha did not converge".into()))?
    };
    let mut m = DMatrix::identity(k, k);
    m[(0, 0)] = alpha;
    m[(1, 1)] = 1.0 / alpha;
    m[(0, 1)] = rho_w;
    m[(1, 0)] = rho_w;
    let m = SpdMatrix::new(m)?;
    let got_s = strong_conformality(&m)?;
    let got_w = weak_conformality_with(
        &m,
        &WeakOptions {
            force: true,
            ..Default::default()
        },
    )?
    .rho_weak;
    if (got_s - rho_s).abs() > 1e-8 || (got_w - rho_w).abs() > 1e-8 {
        return Err(Error::Numerical(format!(
            "constructed pair measures (rho_w, rho_s) = ({got_w}, {got_s})"
        )));
    }
    Ok(m)
}

/// `M = xxᵀ + I` with `x_i = √instance_i`, used to encode Partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionGadget {
    pub instance: Vec<u64>,
    pub gadget_matrix: SpdMatrix,
    /// `X` with `2X = Σ instance`.
    pub half_sum: f64,
    /// `X / (X + 1)`, attained iff the instance splits evenly.
    pub affirmative_value: f64,
}

pub fn partition_gadget(instance: &[u64]) -> Result<PartitionGadget> {
    if instance.len() < 2 {
        return Err(Error::Domain("partition instance needs at least 2 entries".into()));
    }
    if instance.contains(&0) {
        return Err(Error::Domain("partition entries must be positive".into()));
    }
    let x = DVector::from_iterator(instance.len(), instance.iter().map(|&v| (v as f64).sqrt()));
    let mut m = &x * x.transpose();
    for i in 0..instance.len() {
        m[(i, i)] = instance[i] as f64 + 1.0;
    }
    let half_sum = instance.iter().map(|&v| v as f64).sum::<f64>() / 2.0;
    Ok(PartitionGadget {
        instance: instance.to_vec(),
        gadget_matrix: SpdMatrix::new(m)?,
        half_sum,
        affirmative_value: half_sum / (half_sum + 1.0),
    })
}

/// Closed-form value of the gadget's split problem for part sums `a`, `b`:
/// `√(ab / ((a+1)(b+1)))`.
pub fn gadget_split_value(a: f64, b: f64) -> f64 {
    (a * b / ((a + 1.0) * (b + 1.0))).sqrt()
}

/// Subset-sum solver for Partition: indices of one half of an even split.
pub fn solve_partition(instance: &[u64]) -> Option<Vec<usize>> {
    let total: u64 = instance.iter().sum();
    if total % 2 == 1 {
        return None;
    }
    let target = (total / 2) as usize;
    // reach[i][s]: some subset of the first i entries sums to s.
    let n = instance.len();
    let mut reach = vec![vec![false; target + 1]; n + 1];
    reach[0][0] = true;
    for i in 0..n {
        let w = instance[i] as usize;
        for s in 0..=target {
            reach[i + 1][s] = reach[i][s] || (s >= w && reach[i][s - w]);
        }
    }
    if !reach[n][target] {
        return None;
    }
    let mut picked = Vec::new();
    let mut s = target;
    for i in (0..n).rev() {
        if !reach[i][s] {
            picked.push(i);
            s -= instance[i] as usize;
        }
    }
    picked.reverse();
    Some(picked)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformalityBoundsReport {
    pub rho_weak: f64,
    pub quadratic_form: f64,
    pub abs_quadratic_form: f64,
    pub diagonal_form: f64,
    pub sign_lower: f64,
    pub sign_upper: f64,
    pub trace_lower: f64,
    pub trace_upper: f64,
    pub sign_pass: bool,
    pub trace_pass: bool,
    pub pass: bool,
}

impl Verdict for ConformalityBoundsReport {
    fn passed(&self) -> bool {
        self.pass
    }
}

/// Checks that `xᵀMx` lies within `(1∓ρ)/(1±ρ)` of both `|x|ᵀM|x|` and
/// `Σ x_i² M_ii`, with `ρ` the weak conformality.
pub fn verify_conformality_bounds(
    m: &SpdMatrix,
    x: &DVector<f64>,
    opts: &WeakOptions,
) -> Result<ConformalityBoundsReport> {
    if x.len() != m.dim() {
        return Err(Error::Dimension(format!(
            "vector has length {}, matrix has dimension {}",
            x.len(),
            m.dim()
        )));
    }
    let rho = weak_conformality_with(m, opts)?.rho_weak;
    let q = m.inner(x, x);
    let ax = x.abs();
    let aq = m.inner(&ax, &ax);
    let dq: f64 = (0..x.len()).map(|i| x[i] * x[i] * m.matrix()[(i, i)]).sum();
    let lo = (1.0 - rho) / (1.0 + rho);
    let hi = (1.0 + rho) / (1.0 - rho);
    let sign_lower = lo * aq;
    let sign_upper = hi * aq;
    let trace_lower = lo * dq;
    let trace_upper = hi * dq;
    let sign_pass = sign_lower <= q + BOUND_SLACK && q <= sign_upper + BOUND_SLACK;
    let trace_pass = trace_lower <= q + BOUND_SLACK && q <= trace_upper + BOUND_SLACK;
    Ok(ConformalityBoundsReport {
        rho_weak: rho,
        quadratic_form: q,
        abs_quadratic_form: aq,
        diagonal_form: dq,
        sign_lower,
        sign_upper,
        trace_lower,
        trace_upper,
        sign_pass,
        trace_pass,
        pass: sign_pass && trace_pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InverseConformalityReport {
    pub rho_strong: f64,
    pub rho_weak: f64,
    pub rho_strong_inverse: f64,
    pub rho_weak_inverse: f64,
    pub strong_gap: f64,
    pub weak_gap: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Verdict for InverseConformalityReport {
    fn passed(&self) -> bool {
        self.pass
    }
}

/// Compares both conformalities of `M` and `M⁻¹`.
pub fn inverse_conformality_check(m: &SpdMatrix, opts: &WeakOptions) -> Result<InverseConformalityReport> {
    let inv = m.inverse_spd()?;
    let a = weak_conformality_with(m, opts)?;
    let b = weak_conformality_with(&inv, opts)?;
    let strong_gap = (a.rho_strong - b.rho_strong).abs();
    let weak_gap = (a.rho_weak - b.rho_weak).abs();
    Ok(InverseConformalityReport {
        rho_strong: a.rho_strong,
        rho_weak: a.rho_weak,
        rho_strong_inverse: b.rho_strong,
        rho_weak_inverse: b.rho_weak,
        strong_gap,
        weak_gap,
        tolerance: INVERSE_TOL,
        pass: strong_gap <= INVERSE_TOL && weak_gap <= INVERSE_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::identity_plus_ones;
    use approx::assert_relative_eq;

    fn spd(rows: &[&[f64]]) -> SpdMatrix {
        SpdMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn strong_examples() {
        assert_eq!(strong_conformality(&SpdMatrix::identity(4)).unwrap(), 0.0);
        assert_relative_eq!(
            strong_conformality(&SpdMatrix::from_diagonal(&[3.0, 1.0]).unwrap()).unwrap(),
            0.5
        );
        assert_relative_eq!(
            strong_conformality(&spd(&[&[2.0, 1.0], &[1.0, 2.0]])).unwrap(),
            0.5,
            epsilon = 1e-14
        );
        assert!(strong_conformality(&SpdMatrix::identity(1)).is_err());
    }

    #[test]
    fn weak_diagonal_is_zero() {
        let r = weak_conformality(&SpdMatrix::from_diagonal(&[1.0, 5.0, 2.0]).unwrap()).unwrap();
        assert_eq!(r.rho_weak, 0.0);
        assert_eq!(r.witness_s, vec![0]);
    }

    #[test]
    fn weak_two_by_two() {
        let m = spd(&[&[2.0, 0.3], &[0.3, 0.5]]);
        let r = weak_conformality(&m).unwrap();
        assert_relative_eq!(r.rho_weak, 0.3, epsilon = 1e-12);
        assert_eq!(r.witness_s, vec![0]);
        let c = correlation(&m, &DVector::from_vec(r.witness_x), &DVector::from_vec(r.witness_y));
        assert_relative_eq!(c, 0.3, epsilon = 1e-10);
    }

    #[test]
    fn weak_tightness_family_even() {
        let m = SpdMatrix::new(identity_plus_ones(4, 0.5)).unwrap();
        let r = weak_conformality(&m).unwrap();
        assert_relative_eq!(r.rho_weak, 0.5, epsilon = 1e-12);
        let m = SpdMatrix::new(identity_plus_ones(4, -0.5 / 4.0)).unwrap();
        assert_relative_eq!(weak_conformality(&m).unwrap().rho_weak, 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn witness_matches_value_on_dense() {
        let m = spd(&[
            &[4.0, 1.0, 0.5, 0.2],
            &[1.0, 3.0, 0.7, 0.1],
            &[0.5, 0.7, 2.0, 0.4],
            &[0.2, 0.1, 0.4, 1.5],
        ]);
        let r = weak_conformality(&m).unwrap();
        let x = DVector::from_vec(r.witness_x.clone());
        let y = DVector::from_vec(r.witness_y.clone());
        assert_relative_eq!(correlation(&m, &x, &y), r.rho_weak, epsilon = 1e-8);
        for i in 0..4 {
            if r.witness_s.contains(&i) {
                assert_eq!(y[i], 0.0);
            } else {
                assert_eq!(x[i], 0.0);
            }
        }
        assert!(r.rho_weak <= r.rho_strong + 1e-10);
        let threaded = weak_conformality_with(
            &m,
            &WeakOptions {
                threads: 3,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(threaded, r);
    }

    #[test]
    fn block_diagonal_uses_best_block() {
        let mut a = DMatrix::identity(5, 5);
        a[(1, 3)] = 0.4;
        a[(3, 1)] = 0.4;
        let m = SpdMatrix::new(a).unwrap();
        let r = weak_conformality(&m).unwrap();
        assert_relative_eq!(r.rho_weak, 0.4, epsilon = 1e-12);
        assert!(r.witness_s.contains(&0));
        let c = correlation(&m, &DVector::from_vec(r.witness_x), &DVector::from_vec(r.witness_y));
        assert_relative_eq!(c, 0.4, epsilon = 1e-10);
    }

    #[test]
    fn cap_refusal_and_force() {
        let m = SpdMatrix::new(identity_plus_ones(6, 0.1)).unwrap();
        let opts = WeakOptions {
            cap: 5,
            ..Default::default()
        };
        assert!(matches!(
            weak_conformality_with(&m, &opts),
            Err(Error::CapExceeded { size: 6, cap: 5, .. })
        ));
        assert!(weak_conformality_with(&m, &WeakOptions { force: true, ..opts }).is_ok());
        // A diagonal matrix of any size has only singleton blocks.
        assert!(weak_conformality_with(&SpdMatrix::identity(30), &WeakOptions::default()).is_ok());
    }

    #[test]
    fn sampled_examples() {
        assert_eq!(
            weak_conformality_sampled(&SpdMatrix::identity(3), 1000, 3).unwrap(),
            0.0
        );
        let s = weak_conformality_sampled(&spd(&[&[2.0, 1.0], &[1.0, 2.0]]), 1000, 7).unwrap();
        assert_relative_eq!(s, 0.5, epsilon = 1e-12);
        let g = partition_gadget(&[1, 1]).unwrap();
        let s = weak_conformality_sampled(&g.gadget_matrix, 10_000, 1).unwrap();
        assert!(s <= 0.5 + 1e-9);
        assert!(s > 0.49);
    }

    #[test]
    fn pair_examples() {
        let m = make_conformality_pair(0.3, 0.3, 2).unwrap();
        assert_eq!(m.matrix()[(0, 0)], 1.0);
        assert_eq!(m.matrix()[(0, 1)], 0.3);
        let m = make_conformality_pair(0.0, 0.0, 5).unwrap();
        assert_eq!(m.matrix(), &DMatrix::<f64>::identity(5, 5));
        let m = make_conformality_pair(0.2, 0.6, 4).unwrap();
        assert!((strong_conformality(&m).unwrap() - 0.6).abs() <= 1e-8);
        assert!((weak_conformality(&m).unwrap().rho_weak - 0.2).abs() <= 1e-8);
        assert!(make_conformality_pair(0.5, 0.4, 3).is_err());
        assert!(make_conformality_pair(0.5, 1.0, 3).is_err());
    }

    #[test]
    fn gadget_examples() {
        let g = partition_gadget(&[1, 1]).unwrap();
        assert_eq!(
            g.gadget_matrix.matrix(),
            &DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0])
        );
        assert_eq!(g.half_sum, 1.0);
        assert_eq!(g.affirmative_value, 0.5);

        let g = partition_gadget(&[2, 2, 2, 2]).unwrap();
        let r = weak_conformality(&g.gadget_matrix).unwrap();
        assert_relative_eq!(r.rho_weak, 0.8, epsilon = 1e-9);
        assert_eq!(r.witness_s.len(), 2);

        let g = partition_gadget(&[1, 2]).unwrap();
        let r = weak_conformality(&g.gadget_matrix).unwrap();
        assert_relative_eq!(r.rho_weak, (2.0f64 / 6.0).sqrt(), epsilon = 1e-12);
        assert!(r.rho_weak < 0.6);

        assert!(partition_gadget(&[1, 0]).is_err());
        assert!(partition_gadget(&[3]).is_err());
    }

    #[test]
    fn partition_solver() {
        assert_eq!(
            solve_partition(&[1, 2, 3]).map(|s| s.iter().map(|&i| [1, 2, 3][i]).sum::<u64>()),
            Some(3)
        );
        assert!(solve_partition(&[1, 2]).is_none());
        assert!(solve_partition(&[1, 1, 3]).is_none());
        let s = solve_partition(&[3, 1, 1, 2, 2, 1]).unwrap();
        assert_eq!(s.iter().map(|&i| [3, 1, 1, 2, 2, 1][i]).sum::<u64>(), 5);
    }

    #[test]
    fn bounds_examples() {
        let r = verify_conformality_bounds(
            &SpdMatrix::identity(3),
            &DVector::from_vec(vec![1.0, -2.0, 0.5]),
            &WeakOptions::default(),
        )
        .unwrap();
        assert!(r.pass);
        assert_eq!(r.sign_lower, r.quadratic_form);
        assert_eq!(r.trace_upper, r.quadratic_form);

        let r = verify_conformality_bounds(
            &spd(&[&[2.0, 1.0], &[1.0, 2.0]]),
            &DVector::from_vec(vec![1.0, -1.0]),
            &WeakOptions::default(),
        )
        .unwrap();
        assert_relative_eq!(r.quadratic_form, 2.0);
        assert_relative_eq!(r.rho_weak, 0.5, epsilon = 1e-12);
        assert_relative_eq!(r.sign_lower, 2.0, epsilon = 1e-12);
        assert_relative_eq!(r.sign_upper, 18.0, epsilon = 1e-10);
        assert!(r.pass);
    }

    #[test]
    fn inverse_examples() {
        let r = inverse_conformality_check(&SpdMatrix::from_diagonal(&[4.0, 1.0]).unwrap(), &WeakOptions::default())
            .unwrap();
        assert_relative_eq!(r.rho_strong, 0.6, epsilon = 1e-14);
        assert_relative_eq!(r.rho_strong_inverse, 0.6, epsilon = 1e-14);
        assert!(r.pass);
    }
}
