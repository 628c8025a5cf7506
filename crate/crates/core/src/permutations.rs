//! Basis permutations with pull semantics, the structured machine families,
//! exhaustive enumeration, and the bistochastic/convex-mixture layer.
//!
//! Pull semantics: `map[i]` is the source index whose population lands at
//! index `i`, so applying a permutation is a gather,
//! `out[i] = in[map[i]]`. A bra-ket term |a⟩⟨b| therefore reads `map[a] = b`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{basis_index, JointState};
use crate::{Error, Result};

/// Largest dimension for exhaustive enumeration (8! = 40320 maps).
pub const MAX_ENUM_DIM: usize = 8;

/// Row/column sum tolerance for bistochastic matrices and mixture weights.
pub const STOCHASTIC_TOL: f64 = 1e-10;

/// A permutation of basis indices, stored as its pull map.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    map: Vec<usize>,
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;
    fn try_from(map: Vec<usize>) -> Result<Self> {
        Permutation::from_map(map)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.map
    }
}

impl Permutation {
    /// Validates that `map` is a bijection on 0..len.
    pub fn from_map(map: Vec<usize>) -> Result<Self> {
        if map.is_empty() {
            return Err(Error::InvalidPermutation("map must be nonempty".into()));
        }
        let dim = map.len();
        let mut seen = vec![false; dim];
        for &v in &map {
            if v >= dim {
                return Err(Error::InvalidPermutation(format!(
                    "entry {v} out of range for dimension {dim}"
                )));
            }
            if seen[v] {
                return Err(Error::InvalidPermutation(format!("entry {v} repeated")));
            }
            seen[v] = true;
        }
        Ok(Permutation { map })
    }

    pub fn identity(dim: usize) -> Self {
        Permutation {
            map: (0..dim).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.map.len()
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    /// Gather: `out[i] = in[map[i]]`. The population multiset is preserved
    /// exactly (no arithmetic happens).
    pub fn apply(&self, state: &JointState) -> Result<JointState> {
        if state.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: state.dim(),
            });
        }
        let pop = self.gather(state.populations());
        JointState::from_populations(pop)
    }

    pub(crate) fn gather(&self, input: &[f64]) -> Vec<f64> {
        self.map.iter().map(|&s| input[s]).collect()
    }

    /// `g.compose(&f)` applies `f` first, then `g`:
    /// `apply(g.compose(f), s) = apply(g, apply(f, s))`.
    pub fn compose(&self, f: &Permutation) -> Result<Permutation> {
        if self.dim() != f.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: f.dim(),
            });
        }
        Ok(Permutation {
            map: self.map.iter().map(|&i| f.map[i]).collect(),
        })
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.dim()];
        for (i, &v) in self.map.iter().enumerate() {
            inv[v] = i;
        }
        Permutation { map: inv }
    }

    /// Decomposes an involution into its transpositions (i, map[i]) with
    /// i < map[i], sorted by the smaller element. Errors if any cycle is
    /// longer than 2.
    pub fn transpositions(&self) -> Result<Vec<(usize, usize)>> {
        let mut out = Vec::new();
        for (i, &v) in self.map.iter().enumerate() {
            if self.map[v] != i {
                return Err(Error::NotInvolution(format!(
                    "index {i} maps to {v} but {v} maps to {}",
                    self.map[v]
                )));
            }
            if i < v {
                out.push((i, v));
            }
        }
        Ok(out)
    }
}

/// The d = 1 optimum: swap |01⟩ ↔ |10⟩, map (0, 2, 1, 3).
pub fn pi_opt() -> Permutation {
    Permutation {
        map: vec![0, 2, 1, 3],
    }
}

/// The single-loop catalytic family on d levels: swaps
/// idx(m,0,0) ↔ idx(m+1,0,1) for m = 1..d-1 and idx(1,0,1) ↔ idx(d,1,0).
/// For d = 1 this reduces to [`pi_opt`].
pub fn pi_1(d: usize) -> Result<Permutation> {
    if d == 0 {
        return Err(Error::InvalidArgument("pi_1 needs d >= 1".into()));
    }
    let mut map: Vec<usize> = (0..4 * d).collect();
    for m in 1..d {
        map.swap(basis_index(m, 0, 0), basis_index(m + 1, 0, 1));
    }
    map.swap(basis_index(1, 0, 1), basis_index(d, 1, 0));
    Ok(Permutation { map })
}

/// The two-segment catalytic family with d = n + n' levels: swaps
/// idx(m,0,0) ↔ idx(m+1,1,0) for m = 1..n,
/// idx(m',0,1) ↔ idx(m'+1,1,0) for m' = n+1..n+n'-1,
/// and idx(n+n',0,1) ↔ idx(1,1,0).
pub fn pi_2(n: usize, n_prime: usize) -> Result<Permutation> {
    if n_prime == 0 {
        return Err(Error::InvalidArgument("pi_2 needs n_prime >= 1".into()));
    }
    let d = n + n_prime;
    let mut map: Vec<usize> = (0..4 * d).collect();
    for m in 1..=n {
        map.swap(basis_index(m, 0, 0), basis_index(m + 1, 1, 0));
    }
    for mp in n + 1..n + n_prime {
        map.swap(basis_index(mp, 0, 1), basis_index(mp + 1, 1, 0));
    }
    map.swap(basis_index(n + n_prime, 0, 1), basis_index(1, 1, 0));
    Ok(Permutation { map })
}

/// All permutations of a dimension, in lexicographic order of the pull map.
///
/// Index-addressable so callers can partition the range: `get(i)` unranks the
/// i-th map directly via the factorial number system.
#[derive(Debug, Clone, Copy)]
pub struct PermutationSet {
    dim: usize,
    count: usize,
}

impl PermutationSet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Unranks the lexicographically `index`-th permutation.
    pub fn get(&self, index: usize) -> Option<Permutation> {
        if index >= self.count {
            return None;
        }
        let mut avail: Vec<usize> = (0..self.dim).collect();
        let mut rem = index;
        let mut map = Vec::with_capacity(self.dim);
        for pos in (0..self.dim).rev() {
            let f = factorial(pos);
            let digit = rem / f;
            rem %= f;
            map.push(avail.remove(digit));
        }
        Some(Permutation { map })
    }

    pub fn iter(&self) -> impl Iterator<Item = Permutation> + '_ {
        (0..self.count).map(move |i| self.get(i).expect("index in range"))
    }
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// Enumerates all `dim`! permutations lexicographically; `dim` is capped at
/// [`MAX_ENUM_DIM`].
pub fn enumerate_all(dim: usize) -> Result<PermutationSet> {
    if dim == 0 || dim > MAX_ENUM_DIM {
        return Err(Error::EnumerationCap {
            dim,
            cap: MAX_ENUM_DIM,
        });
    }
    Ok(PermutationSet {
        dim,
        count: factorial(dim),
    })
}

/// Doubly stochastic matrix, row-major storage.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BistochasticMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl BistochasticMatrix {
    /// Validates shape, nonnegativity, and row/column sums (1 within 1e-10).
    /// Entries within -1e-10 of zero are clamped to 0.
    pub fn new(dim: usize, mut entries: Vec<f64>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        for v in &mut entries {
            if !v.is_finite() || *v < -STOCHASTIC_TOL {
                return Err(Error::NotBistochastic(format!(
                    "entry {v} is negative or not finite"
                )));
            }
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        for i in 0..dim {
            let row: f64 = entries[i * dim..(i + 1) * dim].iter().sum();
            let col: f64 = (0..dim).map(|r| entries[r * dim + i]).sum();
            if (row - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::NotBistochastic(format!(
                    "row {i} sums to {row}, expected 1 within {STOCHASTIC_TOL:e}"
                )));
            }
            if (col - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::NotBistochastic(format!(
                    "column {i} sums to {col}, expected 1 within {STOCHASTIC_TOL:e}"
                )));
            }
        }
        Ok(BistochasticMatrix { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.dim + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.entries[row * self.dim..(row + 1) * self.dim]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }
}

/// Convex combination of permutations: positive weights summing to 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexMixture {
    terms: Vec<(f64, Permutation)>,
}

impl ConvexMixture {
    pub fn new(terms: Vec<(f64, Permutation)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidArgument(
                "mixture needs at least one term".into(),
            ));
        }
        let dim = terms[0].1.dim();
        let mut sum = 0.0;
        for (alpha, perm) in &terms {
            if perm.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: perm.dim(),
                });
            }
            if !alpha.is_finite() || *alpha <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "mixture weight {alpha} must be strictly positive"
                )));
            }
            sum += alpha;
        }
        if (sum - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::InvalidArgument(format!(
                "mixture weights sum to {sum}, expected 1 within {STOCHASTIC_TOL:e}"
            )));
        }
        Ok(ConvexMixture { terms })
    }

    pub fn dim(&self) -> usize {
        self.terms[0].1.dim()
    }

    pub fn terms(&self) -> &[(f64, Permutation)] {
        &self.terms
    }

    /// Sum of weighted permutation matrices (entry (i, map[i]) per term).
    pub fn to_matrix(&self) -> BistochasticMatrix {
        let dim = self.dim();
        let mut entries = vec![0.0; dim * dim];
        for (alpha, perm) in &self.terms {
            for (i, &s) in perm.map().iter().enumerate() {
                entries[i * dim + s] += alpha;
            }
        }
        BistochasticMatrix { dim, entries }
    }
}

/// Greedy Birkhoff decomposition: repeatedly finds a perfect matching on the
/// bipartite graph of entries above `tol` (augmenting paths, rows and columns
/// scanned in increasing order), subtracts the minimum matched entry, and
/// stops once the residual's largest entry is at most `tol`.
pub fn birkhoff_decompose(matrix: &BistochasticMatrix, tol: f64) -> Result<ConvexMixture> {
    if tol <= 0.0 || !tol.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be strictly positive, got {tol}"
        )));
    }
    let dim = matrix.dim;
    let mut residual = matrix.entries.clone();
    let mut terms: Vec<(f64, Permutation)> = Vec::new();
    loop {
        let max = residual.iter().cloned().fold(0.0f64, f64::max);
        if max <= tol {
            break;
        }
        let matched = perfect_matching(dim, &residual, tol).ok_or_else(|| {
            Error::NotBistochastic(format!(
                "no perfect matching on entries above {tol:e} while {max:e} mass remains"
            ))
        })?;
        let mut alpha = f64::INFINITY;
        for (r, &c) in matched.iter().enumerate() {
            let v = residual[r * dim + c];
            if v < alpha {
                alpha = v;
            }
        }
        for (r, &c) in matched.iter().enumerate() {
            residual[r * dim + c] -= alpha;
        }
        terms.push((alpha, Permutation { map: matched }));
    }
    ConvexMixture::new(terms).map_err(|e| {
        Error::NotBistochastic(format!("decomposition left too much residual mass: {e}"))
    })
}

/// Kuhn's algorithm; deterministic because rows are processed in increasing
/// order and each DFS scans columns in increasing order. Returns
/// `match_row[r] = c` on success.
fn perfect_matching(dim: usize, entries: &[f64], tol: f64) -> Option<Vec<usize>> {
    fn try_augment(
        r: usize,
        dim: usize,
        entries: &[f64],
        tol: f64,
        visited: &mut [bool],
        col_match: &mut [Option<usize>],
    ) -> bool {
        for c in 0..dim {
            if entries[r * dim + c] > tol && !visited[c] {
                visited[c] = true;
                let free = match col_match[c] {
                    None => true,
                    Some(prev) => try_augment(prev, dim, entries, tol, visited, col_match),
                };
                if free {
                    col_match[c] = Some(r);
                    return true;
                }
            }
        }
        false
    }

    let mut col_match: Vec<Option<usize>> = vec![None; dim];
    for r in 0..dim {
        let mut visited = vec![false; dim];
        if !try_augment(r, dim, entries, tol, &mut visited, &mut col_match) {
            return None;
        }
    }
    let mut match_row = vec![0; dim];
    for (c, rm) in col_match.iter().enumerate() {
        match_row[(*rm)?] = c;
    }
    Some(match_row)
}

/// Seeded random convex mixture of `k` permutations on `dim` indices.
///
/// Generator (pinned by this source, not by rand internals): a ChaCha8 stream
/// seeded with `seed`; each permutation is an in-place Fisher-Yates shuffle of
/// the identity map drawing `gen_range(0..=i)` for i = dim-1..1; weights are
/// k draws of -ln(u), u uniform in (0,1), normalized to sum 1.
pub fn random_mixture(seed: u64, dim: usize, k: usize) -> Result<ConvexMixture> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be >= 1".into()));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perms = Vec::with_capacity(k);
    for _ in 0..k {
        let mut map: Vec<usize> = (0..dim).collect();
        for i in (1..dim).rev() {
            let j = rng.gen_range(0..=i);
            map.swap(i, j);
        }
        perms.push(Permutation { map });
    }
    let mut weights = Vec::with_capacity(k);
    for _ in 0..k {
        let u = loop {
            let u: f64 = rng.gen();
            if u > 0.0 {
                break u;
            }
        };
        weights.push(-u.ln());
    }
    let total: f64 = weights.iter().sum();
    let terms = weights
        .into_iter()
        .map(|w| w / total)
        .zip(perms)
        .collect::<Vec<_>>();
    ConvexMixture::new(terms)
}
