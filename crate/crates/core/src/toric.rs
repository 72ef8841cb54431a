//! Toric code on a bicolored square lattice.
//!
//! Spins live on the vertices of an `Lx × Ly` torus. Face `(x, y)` has
//! corners `(x, y), (x+1, y), (x, y+1), (x+1, y+1)` and is white when `x + y`
//! is even. White plaquettes are `X⁴`, black plaquettes `Z⁴`, and
//! `H = −Σ_w h_w − Σ_b h_b`.
//!
//! Line operators follow bishop paths: `W` is an X-string along a path of
//! black faces, `B` a Z-string along a path of white faces. A path's sites
//! are the vertices shared by consecutive faces.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::basis::{assemble, build_sector_basis, BasisError, Sector};
use crate::eigen::{degeneracy_and_gap, spectrum, EigenError, SolverConfig};
use crate::gf2::Gf2Matrix;
use crate::pauli::{PauliError, PauliString, PauliSum, MAX_SITES};
use crate::{map_indices, Complex64, Execution};

pub type Face = (usize, usize);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ToricError {
    #[error("torus dimensions must be even and >= 2, got {lx}x{ly}")]
    InvalidSize { lx: usize, ly: usize },
    #[error("{lx}x{ly} torus has {n} sites, more than {max}", max = MAX_SITES)]
    TooLarge { lx: usize, ly: usize, n: usize },
    #[error("face ({x}, {y}) is outside the {lx}x{ly} torus")]
    InvalidFace { x: usize, y: usize, lx: usize, ly: usize },
    #[error("face ({x}, {y}) is {actual}, path is {expected}")]
    ColorMismatch { x: usize, y: usize, expected: Color, actual: Color },
    #[error("faces {a:?} and {b:?} share {shared} vertices, bishop steps share exactly one")]
    NotDiagonal { a: Face, b: Face, shared: usize },
    #[error("path has no faces")]
    EmptyPath,
    #[error("degenerate lattice: {lx}x{ly} torus has no proper bishop steps")]
    DegenerateLattice { lx: usize, ly: usize },
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    White,
    Black,
}

impl Color {
    pub fn other(self) -> Color {
        match self {
            Color::White => Color::Black,
            Color::Black => Color::White,
        }
    }
}

impl std::fmt::Display for Color {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Color::White => "white",
            Color::Black => "black",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToricLattice {
    lx: usize,
    ly: usize,
}

impl ToricLattice {
    pub fn new(lx: usize, ly: usize) -> Result<Self, ToricError> {
        if lx < 2 || ly < 2 || lx % 2 == 1 || ly % 2 == 1 {
            return Err(ToricError::InvalidSize { lx, ly });
        }
        let n = lx * ly;
        if n > MAX_SITES {
            return Err(ToricError::TooLarge { lx, ly, n });
        }
        Ok(Self { lx, ly })
    }

    pub fn lx(&self) -> usize {
        self.lx
    }

    pub fn ly(&self) -> usize {
        self.ly
    }

    pub fn n_sites(&self) -> usize {
        self.lx * self.ly
    }

    /// True when a side of length 2 makes diagonal faces share an edge.
    pub fn is_degenerate(&self) -> bool {
        self.lx == 2 || self.ly == 2
    }

    /// Vertex index with periodic wrapping.
    pub fn site(&self, x: i64, y: i64) -> usize {
        let x = x.rem_euclid(self.lx as i64) as usize;
        let y = y.rem_euclid(self.ly as i64) as usize;
        y * self.lx + x
    }

    pub fn vertex(&self, site: usize) -> (usize, usize) {
        (site % self.lx, site / self.lx)
    }

    pub fn color(&self, (x, y): Face) -> Color {
        if (x + y) % 2 == 0 {
            Color::White
        } else {
            Color::Black
        }
    }

    pub fn check_face(&self, (x, y): Face) -> Result<(), ToricError> {
        if x >= self.lx || y >= self.ly {
            return Err(ToricError::InvalidFace { x, y, lx: self.lx, ly: self.ly });
        }
        Ok(())
    }

    /// Face coordinates reduced onto the torus.
    pub fn wrap_face(&self, x: i64, y: i64) -> Face {
        (x.rem_euclid(self.lx as i64) as usize, y.rem_euclid(self.ly as i64) as usize)
    }

    pub fn faces(&self) -> impl Iterator<Item = Face> + '_ {
        (0..self.ly).flat_map(move |y| (0..self.lx).map(move |x| (x, y)))
    }

    pub fn faces_of(&self, color: Color) -> Vec<Face> {
        self.faces().filter(|&f| self.color(f) == color).collect()
    }

    pub fn corners(&self, (x, y): Face) -> [usize; 4] {
        let (x, y) = (x as i64, y as i64);
        [self.site(x, y), self.site(x + 1, y), self.site(x, y + 1), self.site(x + 1, y + 1)]
    }

    pub fn corner_mask(&self, f: Face) -> u64 {
        self.corners(f).iter().fold(0, |m, &s| m | 1 << s)
    }

    /// The four diagonal neighbours of a face.
    pub fn diagonal_neighbors(&self, (x, y): Face) -> [Face; 4] {
        let (x, y) = (x as i64, y as i64);
        [
            self.wrap_face(x + 1, y + 1),
            self.wrap_face(x + 1, y - 1),
            self.wrap_face(x - 1, y + 1),
            self.wrap_face(x - 1, y - 1),
        ]
    }

    fn step_site(&self, a: Face, b: Face) -> Result<usize, ToricError> {
        let shared = self.corner_mask(a) & self.corner_mask(b);
        if shared.count_ones() != 1 {
            return Err(ToricError::NotDiagonal { a, b, shared: shared.count_ones() as usize });
        }
        Ok(shared.trailing_zeros() as usize)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BishopPath {
    color: Color,
    faces: Vec<Face>,
    closed: bool,
    sites: Vec<usize>,
}

impl BishopPath {
    pub fn new(l: &ToricLattice, color: Color, faces: Vec<Face>, closed: bool) -> Result<Self, ToricError> {
        if faces.is_empty() {
            return Err(ToricError::EmptyPath);
        }
        for &f in &faces {
            l.check_face(f)?;
            let actual = l.color(f);
            if actual != color {
                return Err(ToricError::ColorMismatch { x: f.0, y: f.1, expected: color, actual });
            }
        }
        let mut sites: Vec<usize> = faces.windows(2).map(|w| l.step_site(w[0], w[1])).collect::<Result<_, _>>()?;
        if closed && faces.len() > 1 {
            sites.push(l.step_site(faces[faces.len() - 1], faces[0])?);
        }
        Ok(Self { color, faces, closed, sites })
    }

    /// Random bishop walk of `steps` moves from a random face of `color`.
    pub fn random_walk<R: Rng + ?Sized>(
        l: &ToricLattice,
        color: Color,
        steps: usize,
        rng: &mut R,
    ) -> Result<Self, ToricError> {
        if l.is_degenerate() && steps > 0 {
            return Err(ToricError::DegenerateLattice { lx: l.lx, ly: l.ly });
        }
        let pool = l.faces_of(color);
        let mut faces = vec![pool[rng.gen_range(0..pool.len())]];
        for _ in 0..steps {
            let next = l.diagonal_neighbors(*faces.last().unwrap());
            faces.push(next[rng.gen_range(0..4)]);
        }
        Self::new(l, color, faces, false)
    }

    pub fn color(&self) -> Color {
        self.color
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Shared vertices in path order, repeats kept.
    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    /// Sites visited an odd number of times.
    pub fn support(&self) -> u64 {
        self.sites.iter().fold(0, |m, &s| m ^ (1 << s))
    }

    /// Faces at the two ends of an open path (empty when closed).
    pub fn endpoints(&self) -> Vec<Face> {
        if self.closed {
            Vec::new()
        } else {
            vec![self.faces[0], self.faces[self.faces.len() - 1]]
        }
    }
}

pub fn plaquette_operator(l: &ToricLattice, face: Face) -> Result<PauliString, ToricError> {
    l.check_face(face)?;
    let mask = l.corner_mask(face);
    Ok(match l.color(face) {
        Color::White => PauliString::x_on(l.n_sites(), bits(mask))?,
        Color::Black => PauliString::z_on(l.n_sites(), bits(mask))?,
    })
}

fn identity(l: &ToricLattice) -> PauliString {
    PauliString::identity(l.n_sites()).expect("lattice size checked on construction")
}

fn bits(mask: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |i| (mask >> i) & 1 == 1)
}

pub fn plaquettes(l: &ToricLattice) -> Vec<(Face, PauliString)> {
    l.faces().map(|f| (f, plaquette_operator(l, f).expect("lattice face"))).collect()
}

pub fn build_toric_hamiltonian(l: &ToricLattice) -> PauliSum {
    let terms = plaquettes(l).into_iter().map(|(_, p)| p.with_coeff(Complex64::new(-1.0, 0.0)));
    PauliSum::from_terms(l.n_sites(), terms).expect("lattice sites").canonicalize()
}

/// `(Π h_w, Π h_b)`; both are the identity on an even torus.
pub fn constraint_products(l: &ToricLattice) -> (PauliString, PauliString) {
    let mut white = identity(l);
    let mut black = identity(l);
    for (f, p) in plaquettes(l) {
        match l.color(f) {
            Color::White => white = white.multiply(&p).expect("same lattice"),
            Color::Black => black = black.multiply(&p).expect("same lattice"),
        }
    }
    (white, black)
}

/// `W` (X-string) on black paths, `B` (Z-string) on white paths.
pub fn line_operator(l: &ToricLattice, path: &BishopPath) -> Result<PauliString, ToricError> {
    let sites = path.sites().iter().copied();
    Ok(match path.color() {
        Color::Black => PauliString::x_on(l.n_sites(), sites)?,
        Color::White => PauliString::z_on(l.n_sites(), sites)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Braiding {
    /// Number of sites in both supports.
    pub intersections: u32,
    /// `(−1)^intersections`.
    pub phase: i8,
    /// Sign from the symplectic form of the two operators.
    pub symplectic_sign: i8,
}

/// Exchange phase of a `W` path and a `B` path, by site intersection parity,
/// alongside the sign read off the operators themselves.
pub fn braiding_phase(l: &ToricLattice, w_path: &BishopPath, b_path: &BishopPath) -> Result<Braiding, ToricError> {
    if w_path.color() != Color::Black {
        return Err(ToricError::ColorMismatch {
            x: w_path.faces[0].0,
            y: w_path.faces[0].1,
            expected: Color::Black,
            actual: w_path.color(),
        });
    }
    if b_path.color() != Color::White {
        return Err(ToricError::ColorMismatch {
            x: b_path.faces[0].0,
            y: b_path.faces[0].1,
            expected: Color::White,
            actual: b_path.color(),
        });
    }
    let intersections = (w_path.support() & b_path.support()).count_ones();
    let phase = if intersections.is_multiple_of(2) { 1 } else { -1 };
    let w = line_operator(l, w_path)?;
    let b = line_operator(l, b_path)?;
    let symplectic_sign = if w.commutes(&b)? { 1 } else { -1 };
    Ok(Braiding { intersections, phase, symplectic_sign })
}

/// Plaquettes anticommuting with `op`.
pub fn flipped_plaquettes(l: &ToricLattice, op: &PauliString) -> Result<Vec<Face>, ToricError> {
    let mut out = Vec::new();
    for (f, p) in plaquettes(l) {
        if !p.commutes(op)? {
            out.push(f);
        }
    }
    Ok(out)
}

/// Energy above the ground space after applying the product of `ops`:
/// 2 per flipped plaquette.
pub fn excitation_energy(l: &ToricLattice, ops: &[PauliString]) -> Result<f64, ToricError> {
    let mut total = identity(l);
    for op in ops {
        total = total.multiply(op)?;
    }
    Ok(2.0 * flipped_plaquettes(l, &total)?.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Winding {
    X,
    Y,
}

/// Closed zigzag path of `color` faces winding once around `axis`.
pub fn winding_path(l: &ToricLattice, color: Color, axis: Winding) -> Result<BishopPath, ToricError> {
    if l.is_degenerate() {
        return Err(ToricError::DegenerateLattice { lx: l.lx, ly: l.ly });
    }
    let x0 = match color {
        Color::White => 0,
        Color::Black => 1,
    };
    let faces = match axis {
        Winding::X => (0..l.lx).map(|i| l.wrap_face((x0 + i) as i64, (i % 2) as i64)).collect(),
        Winding::Y => (0..l.ly).map(|i| l.wrap_face((x0 + i % 2) as i64, i as i64)).collect(),
    };
    BishopPath::new(l, color, faces, true)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogicalAlgebraReport {
    pub lx: usize,
    pub ly: usize,
    /// `W_X, W_Y, B_X, B_Y` in canonical text form.
    pub generators: BTreeMap<String, String>,
    pub relations_verified: BTreeMap<String, bool>,
    pub degeneracy: usize,
}

impl LogicalAlgebraReport {
    pub fn all_verified(&self) -> bool {
        self.relations_verified.values().all(|&v| v)
    }
}

pub fn logical_generators(l: &ToricLattice) -> Result<[(String, PauliString); 4], ToricError> {
    let op = |c, a| winding_path(l, c, a).and_then(|p| line_operator(l, &p));
    Ok([
        ("W_X".into(), op(Color::Black, Winding::X)?),
        ("W_Y".into(), op(Color::Black, Winding::Y)?),
        ("B_X".into(), op(Color::White, Winding::X)?),
        ("B_Y".into(), op(Color::White, Winding::Y)?),
    ])
}

pub fn logical_algebra(l: &ToricLattice) -> Result<LogicalAlgebraReport, ToricError> {
    let gens = logical_generators(l)?;
    let [wx, wy, bx, by] = [&gens[0].1, &gens[1].1, &gens[2].1, &gens[3].1];
    let identity = identity(l);
    let squares = |p: &PauliString| -> Result<bool, ToricError> { Ok(p.multiply(p)? == identity) };
    let anti = |a: &PauliString, b: &PauliString| -> Result<bool, ToricError> { Ok(!a.commutes(b)?) };
    let comm = |a: &PauliString, b: &PauliString| -> Result<bool, ToricError> { Ok(a.commutes(b)?) };

    let mut rel = BTreeMap::new();
    rel.insert("W_X^2 = 1".into(), squares(wx)?);
    rel.insert("W_Y^2 = 1".into(), squares(wy)?);
    rel.insert("B_X^2 = 1".into(), squares(bx)?);
    rel.insert("B_Y^2 = 1".into(), squares(by)?);
    rel.insert("W_X B_Y = -B_Y W_X".into(), anti(wx, by)?);
    rel.insert("W_Y B_X = -B_X W_Y".into(), anti(wy, bx)?);
    rel.insert("[W_X, B_X] = 0".into(), comm(wx, bx)?);
    rel.insert("[W_Y, B_Y] = 0".into(), comm(wy, by)?);
    rel.insert("[W_X, W_Y] = 0".into(), comm(wx, wy)?);
    rel.insert("[B_X, B_Y] = 0".into(), comm(bx, by)?);
    let mut local = true;
    for (_, h) in plaquettes(l) {
        for (_, g) in &gens {
            local &= h.commutes(g)?;
        }
    }
    rel.insert("[line, h] = 0 for every plaquette".into(), local);

    // irreducible dimension 2^(r/2), r = rank of the commutation form
    let mut form = Gf2Matrix::new(4);
    for (_, a) in &gens {
        let row: Vec<bool> = gens.iter().map(|(_, b)| !a.commutes(b).expect("same lattice")).collect();
        form.push_row(&row);
    }
    let degeneracy = 1usize << (form.rank() / 2);

    Ok(LogicalAlgebraReport {
        lx: l.lx,
        ly: l.ly,
        generators: gens.iter().map(|(k, p)| (k.clone(), p.to_string())).collect(),
        relations_verified: rel,
        degeneracy,
    })
}

/// `2^(n − rank)` of the symplectic plaquette generator matrix.
pub fn stabilizer_degeneracy(l: &ToricLattice) -> DegeneracyCertificate {
    let gens: Vec<PauliString> = plaquettes(l).into_iter().map(|(_, p)| p).collect();
    let rank = Gf2Matrix::symplectic(&gens).rank();
    let n = l.n_sites();
    DegeneracyCertificate { method: DegeneracyMethod::Gf2Rank, n, rank: Some(rank), degeneracy: 1u128 << (n - rank) }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegeneracyMethod {
    Ed,
    Gf2Rank,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegeneracyCertificate {
    pub method: DegeneracyMethod,
    pub n: usize,
    pub rank: Option<usize>,
    pub degeneracy: u128,
}

/// ED sizes at or below this many vertices; larger tori use the rank method.
pub const ED_MAX_SITES: usize = 16;

/// Ground degeneracy by exact diagonalization of the full space.
pub fn ed_degeneracy(l: &ToricLattice, cfg: &SolverConfig) -> Result<DegeneracyCertificate, ToricError> {
    let n = l.n_sites();
    let h = build_toric_hamiltonian(l);
    let basis = build_sector_basis(n, Sector::All)?;
    let m = assemble(&h, &basis)?;
    // ground space is 4-fold with gap 4 on every even torus; 5 levels suffice,
    // and a full dense solve is only worth it on small spaces
    let mut cfg = *cfg;
    cfg.dense_threshold = cfg.dense_threshold.min(512);
    let levels = spectrum(&m, Some(5.min(m.dim())), &cfg)?;
    let (deg, _) = degeneracy_and_gap(&levels.eigenvalues, cfg.cluster_tol.max(1e-8));
    Ok(DegeneracyCertificate { method: DegeneracyMethod::Ed, n, rank: None, degeneracy: deg as u128 })
}

/// Chooses ED up to [`ED_MAX_SITES`] vertices unless a method is forced.
pub fn degeneracy_certificate(
    l: &ToricLattice,
    method: Option<DegeneracyMethod>,
    cfg: &SolverConfig,
) -> Result<DegeneracyCertificate, ToricError> {
    let method =
        method.unwrap_or(if l.n_sites() <= ED_MAX_SITES { DegeneracyMethod::Ed } else { DegeneracyMethod::Gf2Rank });
    match method {
        DegeneracyMethod::Ed => ed_degeneracy(l, cfg),
        DegeneracyMethod::Gf2Rank => Ok(stabilizer_degeneracy(l)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommutationSweep {
    pub pairs: usize,
    pub anticommuting: usize,
}

/// Checks every unordered plaquette pair.
pub fn plaquette_commutation_sweep(l: &ToricLattice, exec: Execution) -> CommutationSweep {
    let ops = plaquettes(l);
    let per_row = map_indices(exec, ops.len(), |i| {
        ops[i + 1..].iter().filter(|(_, q)| !ops[i].1.commutes(q).expect("same lattice")).count()
    });
    CommutationSweep { pairs: ops.len() * (ops.len() - 1) / 2, anticommuting: per_row.into_iter().sum() }
}

/// Levels `−#faces + 2(f_w + f_b)` with multiplicity `4·C(F/2, f_w)·C(F/2, f_b)`
/// for even flip counts: the spectrum when the two product constraints are
/// the only relations among plaquettes.
pub fn combinatorial_spectrum(l: &ToricLattice) -> Vec<(f64, u128)> {
    let half = l.n_sites() / 2;
    let binom = |n: usize, k: usize| crate::basis::binomial(n, k) as u128;
    let faces = l.n_sites() as f64;
    let mut out = BTreeMap::new();
    for fw in (0..=half).step_by(2) {
        for fb in (0..=half).step_by(2) {
            let e = -faces + 2.0 * (fw + fb) as f64;
            *out.entry((fw + fb, e.to_bits())).or_insert(0) += 4 * binom(half, fw) * binom(half, fb);
        }
    }
    out.into_iter().map(|((_, bits), m)| (f64::from_bits(bits), m)).collect()
}

/// JSON description of a lattice with paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub lx: usize,
    pub ly: usize,
    #[serde(default)]
    pub paths: Vec<PathSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSpec {
    pub color: Color,
    pub faces: Vec<Face>,
    #[serde(default)]
    pub closed: bool,
}

impl LatticeSpec {
    pub fn build(&self) -> Result<(ToricLattice, Vec<BishopPath>), ToricError> {
        let l = ToricLattice::new(self.lx, self.ly)?;
        let paths = self
            .paths
            .iter()
            .map(|p| BishopPath::new(&l, p.color, p.faces.clone(), p.closed))
            .collect::<Result<_, _>>()?;
        Ok((l, paths))
    }
}
