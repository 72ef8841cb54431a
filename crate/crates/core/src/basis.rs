//! Computational-basis bookkeeping: fixed-magnetization sector bases, the
//! action of Pauli strings on basis states, sparse state vectors and sparse
//! operator matrices.
//!
//! Bit `α` of a basis state is set when site `α` is spin-up. The all-down
//! state `0` is the ferromagnetic vacuum, and the number of set bits is the
//! magnon number.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::pauli::{PauliError, PauliString, PauliSum, SiteOp, MAX_SITES};
use crate::{map_indices, Execution};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BasisError {
    #[error("sector with {magnons} magnons is invalid for {n_sites} sites")]
    InvalidSector { n_sites: usize, magnons: usize },
    #[error("full basis on {n_sites} sites is too large to enumerate")]
    TooLarge { n_sites: usize },
    #[error("term {term} does not conserve the magnon number")]
    SectorViolation { term: String },
    #[error("operator acts on {operator} sites but the basis has {basis}")]
    SiteMismatch { operator: usize, basis: usize },
    #[error("vector length {got} does not match basis dimension {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("malformed operator matrix: {0}")]
    Malformed(String),
    #[error(transparent)]
    Pauli(#[from] PauliError),
}

/// Largest site count for which the full `2^n` basis is enumerated.
pub const MAX_FULL_SITES: usize = 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BasisState(pub u64);

impl BasisState {
    pub const VACUUM: BasisState = BasisState(0);

    pub fn from_up_sites(sites: impl IntoIterator<Item = usize>) -> Self {
        BasisState(sites.into_iter().fold(0u64, |acc, s| acc | (1u64 << s)))
    }

    pub fn magnons(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_up(self, site: usize) -> bool {
        (self.0 >> site) & 1 == 1
    }
}

/// `p|s> = amplitude |t>`; `t` flips the X-mask bits and the amplitude
/// collects the Z signs, the `i` from each `Y = iXZ`, the stored phase and
/// the coefficient.
pub fn apply_pauli(p: &PauliString, s: BasisState) -> (Complex64, BasisState) {
    let down_z = (p.z_mask() & !s.0).count_ones();
    let y_count = (p.x_mask() & p.z_mask()).count_ones();
    let exponent = (p.phase().exponent() as u32 + y_count + 2 * down_z) % 4;
    let unit = match exponent {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    (p.coeff() * unit, BasisState(s.0 ^ p.x_mask()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sector {
    All,
    Magnons(usize),
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sector::All => write!(f, "all"),
            Sector::Magnons(m) => write!(f, "{m}"),
        }
    }
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

/// Basis states of one sector, ordered by increasing integer value.
///
/// Ranks use the combinatorial number system: a state with up-spins at
/// positions `c_0 < c_1 < ...` has rank `Σ C(c_i, i + 1)`, which coincides with
/// its position in increasing-integer order.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorBasis {
    n_sites: usize,
    sector: Sector,
    states: Vec<u64>,
    // binom[n][k] for n <= n_sites, k <= magnons
    binom: Vec<Vec<u64>>,
}

impl SectorBasis {
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }
    pub fn sector(&self) -> Sector {
        self.sector
    }
    pub fn len(&self) -> usize {
        self.states.len()
    }
    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
    pub fn states(&self) -> impl Iterator<Item = BasisState> + '_ {
        self.states.iter().map(|&b| BasisState(b))
    }

    pub fn unrank(&self, i: usize) -> BasisState {
        BasisState(self.states[i])
    }

    pub fn rank(&self, s: BasisState) -> Option<usize> {
        if self.n_sites < 64 && s.0 >> self.n_sites != 0 {
            return None;
        }
        match self.sector {
            Sector::All => Some(s.0 as usize),
            Sector::Magnons(m) => {
                if s.magnons() as usize != m {
                    return None;
                }
                let mut bits = s.0;
                let mut r = 0u64;
                let mut i = 0;
                while bits != 0 {
                    let c = bits.trailing_zeros() as usize;
                    r += self.binom[c][i + 1];
                    bits &= bits - 1;
                    i += 1;
                }
                Some(r as usize)
            }
        }
    }

    pub fn contains(&self, s: BasisState) -> bool {
        self.rank(s).is_some()
    }
}

pub fn build_sector_basis(n_sites: usize, sector: Sector) -> Result<SectorBasis, BasisError> {
    if n_sites == 0 || n_sites > MAX_SITES {
        return Err(PauliError::TooManySites { n_sites }.into());
    }
    match sector {
        Sector::All => {
            if n_sites > MAX_FULL_SITES {
                return Err(BasisError::TooLarge { n_sites });
            }
            Ok(SectorBasis { n_sites, sector, states: (0..1u64 << n_sites).collect(), binom: Vec::new() })
        }
        Sector::Magnons(m) => {
            if m > n_sites {
                return Err(BasisError::InvalidSector { n_sites, magnons: m });
            }
            let dim = binomial(n_sites, m);
            if dim > 1u64 << MAX_FULL_SITES {
                return Err(BasisError::TooLarge { n_sites });
            }
            let mut states = Vec::with_capacity(dim as usize);
            if m == 0 {
                states.push(0);
            } else {
                // Gosper's hack walks weight-m words in increasing order.
                let limit = 1u128 << n_sites;
                let mut v: u128 = (1u128 << m) - 1;
                while v < limit {
                    states.push(v as u64);
                    let t = v | (v - 1);
                    v = (t + 1) | (((!t & (t + 1)) - 1) >> (v.trailing_zeros() + 1));
                }
            }
            let binom = (0..=n_sites).map(|n| (0..=m + 1).map(|k| binomial(n, k)).collect()).collect();
            Ok(SectorBasis { n_sites, sector, states, binom })
        }
    }
}

/// Total `S_z` in unit Paulis, `Σ_α Z_α`. Commuting with it is the
/// magnon-number conservation test used by [`assemble`].
pub fn total_z(n_sites: usize) -> Result<PauliSum, PauliError> {
    let mut s = PauliSum::zero(n_sites)?;
    for site in 0..n_sites {
        s.push(crate::pauli::single_site(site, SiteOp::Z, n_sites)?[0])?;
    }
    Ok(s)
}

/// Sparse state vector keyed by basis bits.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StateVector {
    amps: BTreeMap<u64, Complex64>,
}

impl StateVector {
    pub fn basis(s: BasisState) -> Self {
        let mut amps = BTreeMap::new();
        amps.insert(s.0, Complex64::new(1.0, 0.0));
        Self { amps }
    }

    pub fn vacuum() -> Self {
        Self::basis(BasisState::VACUUM)
    }

    pub fn from_dense(basis: &SectorBasis, v: &[Complex64]) -> Result<Self, BasisError> {
        if v.len() != basis.len() {
            return Err(BasisError::LengthMismatch { expected: basis.len(), got: v.len() });
        }
        let amps = basis.states().zip(v).filter(|(_, a)| a.norm() > 0.0).map(|(s, &a)| (s.0, a)).collect();
        Ok(Self { amps })
    }

    pub fn amplitude(&self, s: BasisState) -> Complex64 {
        self.amps.get(&s.0).copied().unwrap_or_default()
    }

    pub fn set(&mut self, s: BasisState, a: Complex64) {
        self.amps.insert(s.0, a);
    }

    pub fn entries(&self) -> impl Iterator<Item = (BasisState, Complex64)> + '_ {
        self.amps.iter().map(|(&b, &a)| (BasisState(b), a))
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn apply(&self, h: &PauliSum) -> StateVector {
        let mut out: BTreeMap<u64, Complex64> = BTreeMap::new();
        for (&bits, &a) in &self.amps {
            for t in h.terms() {
                let (amp, target) = apply_pauli(t, BasisState(bits));
                *out.entry(target.0).or_default() += amp * a;
            }
        }
        out.retain(|_, a| a.norm() > 0.0);
        StateVector { amps: out }
    }

    pub fn scale(&self, c: Complex64) -> StateVector {
        StateVector { amps: self.amps.iter().map(|(&b, &a)| (b, a * c)).collect() }
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: Complex64, other: &StateVector) -> StateVector {
        let mut amps = self.amps.clone();
        for (&b, &a) in &other.amps {
            *amps.entry(b).or_default() += c * a;
        }
        StateVector { amps }
    }

    pub fn sub(&self, other: &StateVector) -> StateVector {
        self.axpy(Complex64::new(-1.0, 0.0), other)
    }

    pub fn norm(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps.iter().filter_map(|(b, a)| other.amps.get(b).map(|o| a.conj() * o)).sum()
    }

    /// Dense coefficients in `basis`; entries outside the basis are an error.
    pub fn to_dense(&self, basis: &SectorBasis) -> Result<Vec<Complex64>, BasisError> {
        let mut v = vec![Complex64::default(); basis.len()];
        for (&b, &a) in &self.amps {
            match basis.rank(BasisState(b)) {
                Some(r) => v[r] = a,
                None if a.norm() == 0.0 => {}
                None => {
                    return Err(BasisError::Malformed(format!("state {b:#b} lies outside sector {}", basis.sector())))
                }
            }
        }
        Ok(v)
    }
}

/// Sparse matrix in compressed-row form over a [`SectorBasis`].
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    basis: SectorBasis,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<Complex64>,
    term_hash: String,
}

/// SHA-256 over the canonical text of `h`.
pub fn term_hash(h: &PauliSum) -> String {
    let mut hasher = Sha256::new();
    hasher.update(h.n_sites().to_le_bytes());
    hasher.update(h.canonicalize().to_string().as_bytes());
    hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn check_sector_preserving(h: &PauliSum, basis: &SectorBasis) -> Result<(), BasisError> {
    if basis.sector() == Sector::All {
        return Ok(());
    }
    let sz = total_z(h.n_sites())?;
    let comm = h.commutator(&sz)?;
    let Some(bad) = comm.terms().iter().find(|t| t.coeff().norm() > 1e-12) else {
        return Ok(());
    };
    // [t, Z_a] is proportional to t with one Z bit toggled; name the source term
    let culprit = h
        .terms()
        .iter()
        .find(|t| t.x_mask() == bad.x_mask() && (t.z_mask() ^ bad.z_mask()).count_ones() == 1)
        .unwrap_or(bad);
    Err(BasisError::SectorViolation { term: culprit.to_string() })
}

/// Matrix of `h` in `basis`. In a magnon sector, `h` must commute with the
/// total `S_z`; individual terms may leave the sector as long as those
/// contributions cancel in the sum.
pub fn assemble(h: &PauliSum, basis: &SectorBasis) -> Result<OperatorMatrix, BasisError> {
    assemble_with(h, basis, Execution::default())
}

pub fn assemble_with(h: &PauliSum, basis: &SectorBasis, exec: Execution) -> Result<OperatorMatrix, BasisError> {
    if h.n_sites() != basis.n_sites() {
        return Err(BasisError::SiteMismatch { operator: h.n_sites(), basis: basis.n_sites() });
    }
    check_sector_preserving(h, basis)?;
    let h = h.canonicalize();
    let adj = h.adjoint();
    // Row i of h is the conjugate of column i of h†, so each row is built
    // from one basis state independently.
    let rows: Vec<Vec<(usize, Complex64)>> = map_indices(exec, basis.len(), |i| {
        let s = basis.unrank(i);
        let mut contrib: Vec<(u64, Complex64)> = adj
            .terms()
            .iter()
            .map(|t| {
                let (a, target) = apply_pauli(t, s);
                (target.0, a.conj())
            })
            .collect();
        contrib.sort_by_key(|&(b, _)| b);
        let mut row: Vec<(usize, Complex64)> = Vec::with_capacity(contrib.len());
        let mut last: Option<u64> = None;
        for (b, a) in contrib {
            if last == Some(b) {
                row.last_mut().expect("nonempty").1 += a;
            } else if let Some(j) = basis.rank(BasisState(b)) {
                row.push((j, a));
                last = Some(b);
            } else {
                // out-of-sector pieces cancel in total; skip them
                last = None;
            }
        }
        row.retain(|(_, a)| a.norm() >= crate::pauli::ZERO_TOL);
        row
    });
    let mut row_ptr = Vec::with_capacity(basis.len() + 1);
    row_ptr.push(0);
    let nnz: usize = rows.iter().map(Vec::len).sum();
    let mut cols = Vec::with_capacity(nnz);
    let mut values = Vec::with_capacity(nnz);
    for row in rows {
        for (j, a) in row {
            cols.push(j);
            values.push(a);
        }
        row_ptr.push(cols.len());
    }
    Ok(OperatorMatrix { basis: basis.clone(), row_ptr, cols, values, term_hash: term_hash(&h) })
}

impl OperatorMatrix {
    pub fn basis(&self) -> &SectorBasis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn term_hash(&self) -> &str {
        &self.term_hash
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        match self.cols[lo..hi].binary_search(&j) {
            Ok(k) => self.values[lo + k],
            Err(_) => Complex64::default(),
        }
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.cols[lo..hi].iter().copied().zip(self.values[lo..hi].iter().copied())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (0..self.dim()).all(|i| self.row(i).all(|(j, v)| (v - self.get(j, i).conj()).norm() <= tol))
    }

    /// Largest absolute row sum; bounds the spectral norm from above.
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim()).map(|i| self.row(i).map(|(_, v)| v.norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn matvec(&self, x: &[Complex64], y: &mut [Complex64]) {
        self.matvec_with(x, y, Execution::default())
    }

    pub fn matvec_with(&self, x: &[Complex64], y: &mut [Complex64], exec: Execution) {
        assert_eq!(x.len(), self.dim());
        assert_eq!(y.len(), self.dim());
        let row = |i: usize| -> Complex64 {
            let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let mut acc = Complex64::default();
            for k in lo..hi {
                acc += self.values[k] * x[self.cols[k]];
            }
            acc
        };
        match exec.effective() {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                y.par_iter_mut().enumerate().for_each(|(i, yi)| *yi = row(i));
            }
            _ => y.iter_mut().enumerate().for_each(|(i, yi)| *yi = row(i)),
        }
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::default(); self.dim()];
        self.matvec(x, &mut y);
        y
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn to_triplets(&self) -> MatrixTriplets {
        let mut t = MatrixTriplets {
            n_sites: self.basis.n_sites(),
            sector: self.basis.sector(),
            term_hash: self.term_hash.clone(),
            dim: self.dim(),
            rows: Vec::with_capacity(self.nnz()),
            cols: self.cols.clone(),
            re: Vec::with_capacity(self.nnz()),
            im: Vec::with_capacity(self.nnz()),
        };
        for i in 0..self.dim() {
            for (_, v) in self.row(i) {
                t.rows.push(i);
                t.re.push(v.re);
                t.im.push(v.im);
            }
        }
        t
    }

    pub fn from_triplets(t: &MatrixTriplets) -> Result<Self, BasisError> {
        let basis = build_sector_basis(t.n_sites, t.sector)?;
        let nnz = t.rows.len();
        if basis.len() != t.dim || t.cols.len() != nnz || t.re.len() != nnz || t.im.len() != nnz {
            return Err(BasisError::Malformed("inconsistent triplet lengths".into()));
        }
        let mut entries: Vec<(usize, usize, Complex64)> =
            (0..nnz).map(|k| (t.rows[k], t.cols[k], Complex64::new(t.re[k], t.im[k]))).collect();
        if entries.iter().any(|&(i, j, _)| i >= t.dim || j >= t.dim) {
            return Err(BasisError::Malformed("index outside basis".into()));
        }
        entries.sort_by_key(|&(i, j, _)| (i, j));
        entries.dedup_by(|b, a| {
            if (a.0, a.1) == (b.0, b.1) {
                a.2 += b.2;
                true
            } else {
                false
            }
        });
        let mut row_ptr = vec![0usize; t.dim + 1];
        for &(i, _, _) in &entries {
            row_ptr[i + 1] += 1;
        }
        for i in 0..t.dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(OperatorMatrix {
            basis,
            row_ptr,
            cols: entries.iter().map(|e| e.1).collect(),
            values: entries.iter().map(|e| e.2).collect(),
            term_hash: t.term_hash.clone(),
        })
    }
}

/// Coordinate-triplet form used for caching matrices on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixTriplets {
    pub n_sites: usize,
    pub sector: Sector,
    pub term_hash: String,
    pub dim: usize,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}
