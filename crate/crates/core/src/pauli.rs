//! Multi-site Pauli operators in binary symplectic form.
//!
//! A [`PauliString`] stores one X bit and one Z bit per site together with an
//! exact power of `i` and a complex coefficient. The operator it denotes is
//!
//! ```text
//! coeff * i^phase * σ(x_0, z_0) ⊗ σ(x_1, z_1) ⊗ ...
//! ```
//!
//! with `σ(0,0) = I`, `σ(1,0) = X`, `σ(0,1) = Z` and `σ(1,1) = Y`. Paulis are
//! unit-normalized (`X² = Y² = Z² = 1`); half-normalized spin operators are
//! obtained by scaling coefficients.
//!
//! Site `α` is spin-up when bit `α` of a basis state is set, and `Z` measures
//! `+1` on spin-up. With this convention `Y = iXZ` as matrices, which is the
//! identity the phase bookkeeping below relies on.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg};

use num_complex::Complex64;
use thiserror::Error;

/// Largest number of sites a mask word can carry.
pub const MAX_SITES: usize = 64;

/// Coefficients below this magnitude are dropped by [`PauliSum::canonicalize`].
pub const ZERO_TOL: f64 = 1e-15;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PauliError {
    #[error("site {site} out of range for a {n_sites}-site operator")]
    SiteOutOfRange { site: usize, n_sites: usize },
    #[error("site count mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("{n_sites} sites requested, at most {MAX_SITES} supported")]
    TooManySites { n_sites: usize },
    #[error("cannot parse Pauli string {input:?}: {reason}")]
    Parse { input: String, reason: String },
}

/// Exact power of `i`, stored modulo 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_exponent(e: i64) -> Self {
        Phase(e.rem_euclid(4) as u8)
    }

    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn conj(self) -> Self {
        Phase::from_exponent(-(self.0 as i64))
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    fn symbol(self) -> &'static str {
        match self.0 {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        }
    }
}

impl Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

/// Single-site operator kinds accepted by [`single_site`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SiteOp {
    X,
    Y,
    Z,
    /// `X + iY`, which maps spin-down to twice spin-up.
    Plus,
    /// `X - iY`.
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliString {
    n_sites: usize,
    x_mask: u64,
    z_mask: u64,
    phase: Phase,
    coeff: Complex64,
}

fn site_mask(n_sites: usize) -> u64 {
    if n_sites >= 64 {
        u64::MAX
    } else {
        (1u64 << n_sites) - 1
    }
}

fn check_sites(n_sites: usize) -> Result<(), PauliError> {
    if n_sites == 0 || n_sites > MAX_SITES {
        // zero sites is never meaningful; report it the same way
        return Err(PauliError::TooManySites { n_sites });
    }
    Ok(())
}

impl PauliString {
    pub fn identity(n_sites: usize) -> Result<Self, PauliError> {
        check_sites(n_sites)?;
        Ok(Self { n_sites, x_mask: 0, z_mask: 0, phase: Phase::ONE, coeff: Complex64::new(1.0, 0.0) })
    }

    /// Builds a string from raw masks. Bits above `n_sites` are rejected.
    pub fn from_masks(n_sites: usize, x_mask: u64, z_mask: u64, phase: Phase) -> Result<Self, PauliError> {
        check_sites(n_sites)?;
        let outside = (x_mask | z_mask) & !site_mask(n_sites);
        if outside != 0 {
            return Err(PauliError::SiteOutOfRange { site: outside.trailing_zeros() as usize, n_sites });
        }
        Ok(Self { n_sites, x_mask, z_mask, phase, coeff: Complex64::new(1.0, 0.0) })
    }

    /// X-string on the given sites (each site toggles, so repeats cancel).
    pub fn x_on(n_sites: usize, sites: impl IntoIterator<Item = usize>) -> Result<Self, PauliError> {
        let mask = mask_of(n_sites, sites)?;
        Self::from_masks(n_sites, mask, 0, Phase::ONE)
    }

    /// Z-string on the given sites (each site toggles, so repeats cancel).
    pub fn z_on(n_sites: usize, sites: impl IntoIterator<Item = usize>) -> Result<Self, PauliError> {
        let mask = mask_of(n_sites, sites)?;
        Self::from_masks(n_sites, 0, mask, Phase::ONE)
    }

    pub fn with_coeff(mut self, coeff: Complex64) -> Self {
        self.coeff = coeff;
        self
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }
    pub fn x_mask(&self) -> u64 {
        self.x_mask
    }
    pub fn z_mask(&self) -> u64 {
        self.z_mask
    }
    pub fn phase(&self) -> Phase {
        self.phase
    }
    pub fn coeff(&self) -> Complex64 {
        self.coeff
    }

    /// `coeff * i^phase`, the full scalar in front of the bare Pauli product.
    pub fn scalar(&self) -> Complex64 {
        self.coeff * self.phase.to_complex()
    }

    /// Number of sites acted on non-trivially.
    pub fn weight(&self) -> u32 {
        (self.x_mask | self.z_mask).count_ones()
    }

    pub fn is_identity(&self) -> bool {
        self.x_mask == 0 && self.z_mask == 0
    }

    /// Same operator content with the coefficient reset to 1.
    pub fn bare(&self) -> Self {
        Self { coeff: Complex64::new(1.0, 0.0), ..*self }
    }

    /// Phase exponent in the `X^x Z^z` ordering, where `Y = i X Z`.
    fn xz_exponent(&self) -> i64 {
        self.phase.0 as i64 + (self.x_mask & self.z_mask).count_ones() as i64
    }

    pub fn multiply(&self, rhs: &PauliString) -> Result<PauliString, PauliError> {
        if self.n_sites != rhs.n_sites {
            return Err(PauliError::DimensionMismatch { left: self.n_sites, right: rhs.n_sites });
        }
        let x = self.x_mask ^ rhs.x_mask;
        let z = self.z_mask ^ rhs.z_mask;
        // Z^a X^b = (-1)^(a.b) X^b Z^a
        let swap = 2 * (self.z_mask & rhs.x_mask).count_ones() as i64;
        let e = self.xz_exponent() + rhs.xz_exponent() + swap - (x & z).count_ones() as i64;
        Ok(PauliString {
            n_sites: self.n_sites,
            x_mask: x,
            z_mask: z,
            phase: Phase::from_exponent(e),
            coeff: self.coeff * rhs.coeff,
        })
    }

    /// Symplectic inner product modulo 2; `true` means the operators commute.
    pub fn commutes(&self, rhs: &PauliString) -> Result<bool, PauliError> {
        if self.n_sites != rhs.n_sites {
            return Err(PauliError::DimensionMismatch { left: self.n_sites, right: rhs.n_sites });
        }
        Ok(self.symplectic(rhs) == 0)
    }

    pub(crate) fn symplectic(&self, rhs: &PauliString) -> u32 {
        ((self.x_mask & rhs.z_mask).count_ones() + (self.z_mask & rhs.x_mask).count_ones()) & 1
    }

    pub fn adjoint(&self) -> PauliString {
        PauliString { phase: self.phase.conj(), coeff: self.coeff.conj(), ..*self }
    }

    /// Single-site factor at `site` as `'I'`, `'X'`, `'Y'` or `'Z'`.
    pub fn factor(&self, site: usize) -> char {
        let x = (self.x_mask >> site) & 1;
        let z = (self.z_mask >> site) & 1;
        match (x, z) {
            (0, 0) => 'I',
            (1, 0) => 'X',
            (0, 1) => 'Z',
            _ => 'Y',
        }
    }

    /// Parses the text form produced by `Display`, e.g. `+i * X0 Z3 Y5` or
    /// `(0.5,-0.25) - * Z1`.
    pub fn parse(input: &str, n_sites: usize) -> Result<PauliString, PauliError> {
        let err = |reason: &str| PauliError::Parse { input: input.to_string(), reason: reason.to_string() };
        let s = input.trim();
        let (coeff, rest) = if let Some(stripped) = s.strip_prefix('(') {
            let close = stripped.find(')').ok_or_else(|| err("unclosed coefficient"))?;
            let (re, im) = stripped[..close].split_once(',').ok_or_else(|| err("coefficient must be (re,im)"))?;
            let re: f64 = re.trim().parse().map_err(|_| err("bad real part"))?;
            let im: f64 = im.trim().parse().map_err(|_| err("bad imaginary part"))?;
            (Complex64::new(re, im), stripped[close + 1..].trim_start())
        } else {
            (Complex64::new(1.0, 0.0), s)
        };
        let (phase_str, factors) = rest.split_once('*').ok_or_else(|| err("missing '*'"))?;
        let phase = match phase_str.trim() {
            "+" => Phase::ONE,
            "+i" => Phase::I,
            "-" => Phase::MINUS_ONE,
            "-i" => Phase::MINUS_I,
            _ => return Err(err("phase must be one of + +i - -i")),
        };
        let mut x = 0u64;
        let mut z = 0u64;
        for tok in factors.split_whitespace() {
            if tok == "I" {
                continue;
            }
            let mut chars = tok.chars();
            let kind = chars.next().ok_or_else(|| err("empty factor"))?;
            let site: usize = chars.as_str().parse().map_err(|_| err("bad site index"))?;
            if site >= n_sites {
                return Err(PauliError::SiteOutOfRange { site, n_sites });
            }
            let bit = 1u64 << site;
            if (x | z) & bit != 0 {
                return Err(err("site repeated"));
            }
            match kind {
                'X' => x |= bit,
                'Z' => z |= bit,
                'Y' => {
                    x |= bit;
                    z |= bit;
                }
                _ => return Err(err("factor must be X, Y or Z")),
            }
        }
        Ok(PauliString::from_masks(n_sites, x, z, phase)?.with_coeff(coeff))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeff != Complex64::new(1.0, 0.0) {
            write!(f, "({:?},{:?}) ", self.coeff.re, self.coeff.im)?;
        }
        write!(f, "{} *", self.phase.symbol())?;
        if self.is_identity() {
            return write!(f, " I");
        }
        for site in 0..self.n_sites {
            let c = self.factor(site);
            if c != 'I' {
                write!(f, " {c}{site}")?;
            }
        }
        Ok(())
    }
}

fn mask_of(n_sites: usize, sites: impl IntoIterator<Item = usize>) -> Result<u64, PauliError> {
    check_sites(n_sites)?;
    let mut mask = 0u64;
    for s in sites {
        if s >= n_sites {
            return Err(PauliError::SiteOutOfRange { site: s, n_sites });
        }
        mask ^= 1u64 << s;
    }
    Ok(mask)
}

/// Unit-normalized single-site operator. `Plus` and `Minus` are not Pauli
/// strings themselves and come back as the two terms `X` and `±iY`.
pub fn single_site(site: usize, kind: SiteOp, n_sites: usize) -> Result<Vec<PauliString>, PauliError> {
    check_sites(n_sites)?;
    if site >= n_sites {
        return Err(PauliError::SiteOutOfRange { site, n_sites });
    }
    let bit = 1u64 << site;
    let x = PauliString::from_masks(n_sites, bit, 0, Phase::ONE)?;
    let y = PauliString::from_masks(n_sites, bit, bit, Phase::ONE)?;
    let z = PauliString::from_masks(n_sites, 0, bit, Phase::ONE)?;
    Ok(match kind {
        SiteOp::X => vec![x],
        SiteOp::Y => vec![y],
        SiteOp::Z => vec![z],
        SiteOp::Plus => vec![x, y.with_coeff(Complex64::new(0.0, 1.0))],
        SiteOp::Minus => vec![x, y.with_coeff(Complex64::new(0.0, -1.0))],
    })
}

/// A linear combination of Pauli strings on a fixed number of sites.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n_sites: usize,
    terms: Vec<PauliString>,
}

impl PauliSum {
    pub fn zero(n_sites: usize) -> Result<Self, PauliError> {
        check_sites(n_sites)?;
        Ok(Self { n_sites, terms: Vec::new() })
    }

    pub fn identity(n_sites: usize) -> Result<Self, PauliError> {
        Ok(Self { n_sites, terms: vec![PauliString::identity(n_sites)?] })
    }

    pub fn from_terms(n_sites: usize, terms: impl IntoIterator<Item = PauliString>) -> Result<Self, PauliError> {
        let mut sum = Self::zero(n_sites)?;
        for t in terms {
            sum.push(t)?;
        }
        Ok(sum)
    }

    /// `coeff * (X ± iY)/2`-style helper: one site operator scaled by `coeff`.
    pub fn site(site: usize, kind: SiteOp, n_sites: usize, coeff: Complex64) -> Result<Self, PauliError> {
        let terms = single_site(site, kind, n_sites)?;
        Ok(Self { n_sites, terms: terms.into_iter().map(|t| t.with_coeff(t.coeff * coeff)).collect() })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn terms(&self) -> &[PauliString] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn push(&mut self, term: PauliString) -> Result<(), PauliError> {
        if term.n_sites != self.n_sites {
            return Err(PauliError::DimensionMismatch { left: self.n_sites, right: term.n_sites });
        }
        self.terms.push(term);
        Ok(())
    }

    /// Adds `c * identity`.
    pub fn add_constant(&mut self, c: f64) {
        let id = PauliString::identity(self.n_sites).expect("validated at construction");
        self.terms.push(id.with_coeff(Complex64::new(c, 0.0)));
    }

    /// Folds phases into coefficients, merges equal masks and drops
    /// near-zero terms. Output order is by `(x_mask, z_mask)`.
    pub fn canonicalize(&self) -> PauliSum {
        let mut merged: BTreeMap<(u64, u64), Complex64> = BTreeMap::new();
        for t in &self.terms {
            *merged.entry((t.x_mask, t.z_mask)).or_default() += t.scalar();
        }
        let terms = merged
            .into_iter()
            .filter(|(_, c)| c.norm() >= ZERO_TOL)
            .map(|((x, z), c)| PauliString { n_sites: self.n_sites, x_mask: x, z_mask: z, phase: Phase::ONE, coeff: c })
            .collect();
        PauliSum { n_sites: self.n_sites, terms }
    }

    pub fn scale(&self, c: Complex64) -> PauliSum {
        PauliSum { n_sites: self.n_sites, terms: self.terms.iter().map(|t| t.with_coeff(t.coeff * c)).collect() }
    }

    pub fn try_add(&self, rhs: &PauliSum) -> Result<PauliSum, PauliError> {
        if self.n_sites != rhs.n_sites {
            return Err(PauliError::DimensionMismatch { left: self.n_sites, right: rhs.n_sites });
        }
        let mut out = self.clone();
        out.terms.extend_from_slice(&rhs.terms);
        Ok(out.canonicalize())
    }

    pub fn try_mul(&self, rhs: &PauliSum) -> Result<PauliSum, PauliError> {
        if self.n_sites != rhs.n_sites {
            return Err(PauliError::DimensionMismatch { left: self.n_sites, right: rhs.n_sites });
        }
        let mut out = PauliSum::zero(self.n_sites)?;
        for a in &self.terms {
            for b in &rhs.terms {
                out.terms.push(a.multiply(b)?);
            }
        }
        Ok(out.canonicalize())
    }

    /// `[self, rhs]`, built only from anticommuting term pairs.
    pub fn commutator(&self, rhs: &PauliSum) -> Result<PauliSum, PauliError> {
        if self.n_sites != rhs.n_sites {
            return Err(PauliError::DimensionMismatch { left: self.n_sites, right: rhs.n_sites });
        }
        let mut out = PauliSum::zero(self.n_sites)?;
        for a in &self.terms {
            for b in &rhs.terms {
                if a.symplectic(b) == 1 {
                    let ab = a.multiply(b)?;
                    out.terms.push(ab.with_coeff(ab.coeff * 2.0));
                }
            }
        }
        Ok(out.canonicalize())
    }

    pub fn adjoint(&self) -> PauliSum {
        PauliSum { n_sites: self.n_sites, terms: self.terms.iter().map(PauliString::adjoint).collect() }
    }

    /// After canonicalization every coefficient must be real within `tol`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.canonicalize().terms.iter().all(|t| t.coeff.im.abs() <= tol)
    }

    /// Canonical forms agree term by term within `tol`.
    pub fn approx_eq(&self, rhs: &PauliSum, tol: f64) -> bool {
        match self.try_add(&rhs.scale(Complex64::new(-1.0, 0.0))) {
            Ok(diff) => diff.terms.iter().all(|t| t.coeff.norm() <= tol),
            Err(_) => false,
        }
    }

    /// Sum of absolute coefficients; an upper bound on the operator norm.
    pub fn coefficient_norm(&self) -> f64 {
        self.canonicalize().terms.iter().map(|t| t.coeff.norm()).sum()
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

impl Add for &PauliSum {
    type Output = PauliSum;
    fn add(self, rhs: &PauliSum) -> PauliSum {
        self.try_add(rhs).expect("site count mismatch in PauliSum addition")
    }
}

impl Mul for &PauliSum {
    type Output = PauliSum;
    fn mul(self, rhs: &PauliSum) -> PauliSum {
        self.try_mul(rhs).expect("site count mismatch in PauliSum product")
    }
}

impl Neg for &PauliSum {
    type Output = PauliSum;
    fn neg(self) -> PauliSum {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}
