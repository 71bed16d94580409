//! Paving search, paving extraction from factorizations, and the closest-pair
//! lower-bound witness.
//!
//! The search is a heuristic: randomized balanced starts improved by greedy
//! index swaps, reporting measured central-submatrix norms with no guarantee
//! asserted. The extraction from a factorization and the pigeonhole witness
//! are theorem-backed and their inequalities are checked exactly.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mat::{frobnorm, opnorm, ComplexMatrix};

/// Disjoint index sets with measured central-submatrix norms.
#[derive(Debug, Clone, Serialize)]
pub struct PavingPartition {
    pub sigma: Vec<Vec<usize>>,
    pub block_norms: Vec<f64>,
    pub covered: Vec<usize>,
    /// Advisory goal of the K * 2^{-l} form: 1/sqrt(num_blocks).
    pub target_ratio: f64,
}

/// One cell of a spectral-grid paving.
#[derive(Debug, Clone, Serialize)]
pub struct Claim3Cell {
    pub re_bin: usize,
    pub im_bin: usize,
    pub members: Vec<usize>,
    pub block_norm: f64,
}

/// Paving of a commutator [diag(b), C] by spectral grid cells.
#[derive(Debug, Clone, Serialize)]
pub struct Claim3Paving {
    pub eps: f64,
    pub num_intervals: usize,
    pub cells: Vec<Claim3Cell>,
    /// Certified cell-norm bound sqrt(2) * eps * ||C||.
    pub bound: f64,
    pub norm_c: f64,
}

impl Claim3Paving {
    /// Cells whose measured norm exceeds the certified bound (beyond 1e-9).
    pub fn violations(&self) -> Vec<usize> {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, cell)| cell.block_norm > self.bound + 1e-9)
            .map(|(k, _)| k)
            .collect()
    }
}

/// Closest pair of spectrum points and the entry lower bound it forces.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GapWitness {
    pub i: usize,
    pub j: usize,
    pub gap: f64,
    pub c_entry_lower_bound: f64,
    pub pigeonhole_bound: f64,
}

const SEARCH_OPNORM_TOL: f64 = 1e-8;
const SEARCH_OPNORM_ITERS: usize = 10_000;

fn block_norm(a: &ComplexMatrix, idx: &[usize]) -> f64 {
    let sub = a.principal_submatrix(idx);
    opnorm(&sub, SEARCH_OPNORM_TOL, SEARCH_OPNORM_ITERS)
        .map(|r| r.op_norm)
        .unwrap_or(f64::MAX)
}

fn check_zero_diag(a: &ComplexMatrix) -> Result<()> {
    let fro = frobnorm(a);
    for i in 0..a.dim() {
        let v = a.get(i, i).norm();
        if v > 1e-12 * fro {
            return Err(Error::NonZeroDiagonal { index: i, value: v });
        }
    }
    Ok(())
}

/// Deterministic per-trial seed derivation from a master seed.
fn trial_seed(seed: u64, trial: usize) -> u64 {
    seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(trial as u64 + 1))
}

struct SearchState {
    blocks: Vec<Vec<usize>>,
    unassigned: Vec<usize>,
    norms: Vec<f64>,
}

impl SearchState {
    fn max_norm(&self) -> (usize, f64) {
        let mut best = (0usize, f64::MIN);
        for (k, &n) in self.norms.iter().enumerate() {
            if n > best.1 {
                best = (k, n);
            }
        }
        best
    }
}

/// Greedy improvement: repeatedly take the worst block and look for the index
/// swap (with another block or with an unassigned index) that most reduces
/// the global maximum block norm; stop at a local optimum. Only swaps
/// touching a maximal block can lower the maximum, so candidates are
/// restricted to it.
fn greedy_improve(a: &ComplexMatrix, state: &mut SearchState) {
    loop {
        let (crit, cur_max) = state.max_norm();
        let mut best: Option<(f64, usize, SwapTarget, Vec<usize>, Option<Vec<usize>>)> = None;

        let other_max = |skip_a: usize, skip_b: Option<usize>, norms: &[f64]| -> f64 {
            norms
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != skip_a && Some(*k) != skip_b)
                .map(|(_, &n)| n)
                .fold(0.0, f64::max)
        };

        for u_pos in 0..state.blocks[crit].len() {
            // Swap with a member of another block.
            for v_blk in 0..state.blocks.len() {
                if v_blk == crit {
                    continue;
                }
                for v_pos in 0..state.blocks[v_blk].len() {
                    let mut cand_crit = state.blocks[crit].clone();
                    let mut cand_other = state.blocks[v_blk].clone();
                    std::mem::swap(&mut cand_crit[u_pos], &mut cand_other[v_pos]);
                    cand_crit.sort_unstable();
                    cand_other.sort_unstable();
                    let n_crit = block_norm(a, &cand_crit);
                    if n_crit >= cur_max {
                        continue;
                    }
                    let n_other = block_norm(a, &cand_other);
                    let new_max = n_crit
                        .max(n_other)
                        .max(other_max(crit, Some(v_blk), &state.norms));
                    if new_max < cur_max && best.as_ref().map_or(true, |b| new_max < b.0) {
                        best = Some((
                            new_max,
                            u_pos,
                            SwapTarget::Block { blk: v_blk, norm: n_other },
                            cand_crit,
                            Some(cand_other),
                        ));
                    }
                }
            }
            // Swap with an unassigned index.
            for v_pos in 0..state.unassigned.len() {
                let mut cand_crit = state.blocks[crit].clone();
                let evicted = cand_crit[u_pos];
                cand_crit[u_pos] = state.unassigned[v_pos];
                cand_crit.sort_unstable();
                let n_crit = block_norm(a, &cand_crit);
                if n_crit >= cur_max {
                    continue;
                }
                let new_max = n_crit.max(other_max(crit, None, &state.norms));
                if new_max < cur_max && best.as_ref().map_or(true, |b| new_max < b.0) {
                    best = Some((
                        new_max,
                        u_pos,
                        SwapTarget::Unassigned { pos: v_pos, evicted },
                        cand_crit,
                        None,
                    ));
                }
            }
        }

        match best {
            None => break,
            Some((_, _, target, cand_crit, cand_other)) => {
                state.norms[crit] = block_norm(a, &cand_crit);
                state.blocks[crit] = cand_crit;
                match target {
                    SwapTarget::Block { blk, norm } => {
                        state.blocks[blk] = cand_other.expect("block swap carries the new block");
                        state.norms[blk] = norm;
                    }
                    SwapTarget::Unassigned { pos, evicted } => {
                        state.unassigned[pos] = evicted;
                    }
                }
            }
        }
    }
}

enum SwapTarget {
    Block { blk: usize, norm: f64 },
    Unassigned { pos: usize, evicted: usize },
}

/// Randomized + greedy search for `num_blocks` disjoint index sets of size
/// `block_size` minimizing the maximum central-submatrix norm. Deterministic
/// for a fixed seed; ties between trials break toward the lowest trial index.
pub fn search_paving(
    a: &ComplexMatrix,
    num_blocks: usize,
    block_size: usize,
    trials: usize,
    seed: u64,
) -> Result<PavingPartition> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch("search_paving needs a square matrix".into()));
    }
    check_zero_diag(a)?;
    let m = a.dim();
    if num_blocks == 0 || block_size == 0 {
        return Err(Error::InfeasiblePaving("block count and size must be positive".into()));
    }
    if num_blocks * block_size > m {
        return Err(Error::InfeasiblePaving(format!(
            "{num_blocks} blocks of size {block_size} exceed dimension {m}"
        )));
    }
    if trials == 0 {
        return Err(Error::InfeasiblePaving("at least one trial is required".into()));
    }

    let mut best: Option<(f64, SearchState)> = None;
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, trial));
        let mut indices: Vec<usize> = (0..m).collect();
        indices.shuffle(&mut rng);
        let mut blocks: Vec<Vec<usize>> = indices[..num_blocks * block_size]
            .chunks(block_size)
            .map(|chunk| {
                let mut b = chunk.to_vec();
                b.sort_unstable();
                b
            })
            .collect();
        blocks.sort();
        let unassigned: Vec<usize> = indices[num_blocks * block_size..].to_vec();
        let norms: Vec<f64> = blocks.iter().map(|b| block_norm(a, b)).collect();
        let mut state = SearchState { blocks, unassigned, norms };
        greedy_improve(a, &mut state);
        let (_, max_norm) = state.max_norm();
        if best.as_ref().map_or(true, |(bn, _)| max_norm < *bn) {
            best = Some((max_norm, state));
        }
    }

    let (_, mut state) = best.expect("at least one trial ran");
    // Canonical order: blocks sorted by smallest member.
    state.blocks.sort_by_key(|b| b[0]);
    let block_norms: Vec<f64> = state.blocks.iter().map(|b| block_norm(a, b)).collect();
    let mut covered: Vec<usize> = state.blocks.iter().flatten().copied().collect();
    covered.sort_unstable();
    Ok(PavingPartition {
        sigma: state.blocks,
        block_norms,
        covered,
        target_ratio: 1.0 / (num_blocks as f64).sqrt(),
    })
}

/// Nested 4-ary grouping of the partition blocks: level s holds 4^s groups,
/// each the union of consecutive blocks in canonical order; the deepest level
/// is the blocks themselves.
pub fn nested_grouping(partition: &PavingPartition, arity: usize) -> Result<Vec<Vec<Vec<usize>>>> {
    if arity != 4 {
        return Err(Error::InvalidArgument(format!("grouping arity must be 4, got {arity}")));
    }
    let nb = partition.sigma.len();
    let mut l = 0u32;
    while 4usize.pow(l) < nb {
        l += 1;
    }
    if 4usize.pow(l) != nb {
        return Err(Error::NotPowerOfFour { dim: nb });
    }
    let mut levels = Vec::with_capacity(l as usize + 1);
    for s in 0..=l {
        let group_count = 4usize.pow(s);
        let per_group = nb / group_count;
        let level: Vec<Vec<usize>> = (0..group_count)
            .map(|g| {
                partition.sigma[g * per_group..(g + 1) * per_group]
                    .iter()
                    .flatten()
                    .copied()
                    .collect()
            })
            .collect();
        levels.push(level);
    }
    Ok(levels)
}

/// Partition [-1, 1] x [-i, i] into a floor(2/eps) x floor(2/eps) grid of
/// half-open cells (last interval closed), assign each index by its spectrum
/// point, and measure every nonempty central submatrix of [diag(b), C]
/// against the bound sqrt(2) * eps * ||C||.
pub fn claim3_pave(
    b_diag: &[Complex64],
    c: &ComplexMatrix,
    eps: f64,
) -> Result<Claim3Paving> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidArgument(format!("claim3 eps must lie in (0, 1], got {eps}")));
    }
    if c.dim() != b_diag.len() {
        return Err(Error::DimensionMismatch(format!(
            "claim3_pave: C is {}x{} but spectrum has {} points",
            c.rows(),
            c.cols(),
            b_diag.len()
        )));
    }
    for (k, z) in b_diag.iter().enumerate() {
        if z.re.abs() > 1.0 + 1e-12 || z.im.abs() > 1.0 + 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "spectrum point {k} = {z} lies outside the closed unit square"
            )));
        }
    }
    let q = (2.0 / eps).floor() as usize;
    let width = 2.0 / q as f64;
    let bin = |t: f64| -> usize { (((t + 1.0) / width).floor() as isize).clamp(0, q as isize - 1) as usize };

    let mut cell_members: std::collections::BTreeMap<(usize, usize), Vec<usize>> =
        std::collections::BTreeMap::new();
    for (k, z) in b_diag.iter().enumerate() {
        cell_members.entry((bin(z.re), bin(z.im))).or_default().push(k);
    }

    // A = [diag(b), C] has entries (b_i - b_j) c_ij.
    let m = b_diag.len();
    let a = ComplexMatrix::from_fn(m, m, |i, j| (b_diag[i] - b_diag[j]) * c.get(i, j));
    let norm_c = opnorm(c, SEARCH_OPNORM_TOL, SEARCH_OPNORM_ITERS)?.op_norm;

    let cells: Vec<Claim3Cell> = cell_members
        .into_iter()
        .map(|((re_bin, im_bin), members)| {
            let block_norm = block_norm(&a, &members);
            Claim3Cell { re_bin, im_bin, members, block_norm }
        })
        .collect();

    Ok(Claim3Paving {
        eps,
        num_intervals: q,
        cells,
        bound: std::f64::consts::SQRT_2 * eps * norm_c,
        norm_c,
    })
}

/// Exact closest pair among spectrum points in the closed unit square, with
/// the grid-pigeonhole bound 2 sqrt(2) / floor(sqrt(m - 1)) it must satisfy.
pub fn gap_witness(b_diag: &[Complex64]) -> Result<GapWitness> {
    let m = b_diag.len();
    if m < 2 {
        return Err(Error::InvalidArgument(format!(
            "gap witness needs at least 2 spectrum points, got {m}"
        )));
    }
    for (k, z) in b_diag.iter().enumerate() {
        if z.re.abs() > 1.0 + 1e-12 || z.im.abs() > 1.0 + 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "spectrum point {k} = {z} lies outside the closed unit square"
            )));
        }
    }
    let mut best = (0usize, 1usize, f64::MAX);
    for i in 0..m {
        for j in (i + 1)..m {
            let g = (b_diag[i] - b_diag[j]).norm();
            if g < best.2 {
                best = (i, j, g);
            }
        }
    }
    let (i, j, gap) = best;
    let k = isqrt(m - 1);
    Ok(GapWitness {
        i,
        j,
        gap,
        c_entry_lower_bound: if gap > 0.0 { 1.0 / gap } else { f64::INFINITY },
        pigeonhole_bound: 2.0 * std::f64::consts::SQRT_2 / k as f64,
    })
}

fn isqrt(n: usize) -> usize {
    let mut k = (n as f64).sqrt() as usize;
    while (k + 1) * (k + 1) <= n {
        k += 1;
    }
    while k * k > n {
        k -= 1;
    }
    k.max(1)
}

/// The matrix with a 1 in the witness position and zeros elsewhere. Any C
/// solving [diag(b), C] = that matrix has |C[i][j]| = 1/gap exactly.
pub fn witness_matrix(w: &GapWitness, m: usize) -> Result<ComplexMatrix> {
    if w.i == w.j {
        return Err(Error::InvalidArgument("witness indices must differ".into()));
    }
    if w.i >= m || w.j >= m {
        return Err(Error::InvalidArgument(format!(
            "witness indices ({}, {}) out of range for dimension {m}",
            w.i, w.j
        )));
    }
    let mut a = ComplexMatrix::zeros(m, m);
    a.set(w.i, w.j, Complex64::new(1.0, 0.0));
    Ok(a)
}
