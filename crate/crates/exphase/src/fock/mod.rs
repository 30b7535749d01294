//! Exact second-quantized algebra for two identical particles over labeled
//! modes (lattice site x pseudo-spin x vibrational level).
//!
//! States are stored as sparse maps from canonically ordered mode pairs to
//! complex amplitudes. Reordering a pair multiplies the amplitude by the
//! exchange sign, which is where the quantum statistics enter: the sign is
//! +1 for bosons and -1 for fermions, and fermionic double occupancy
//! vanishes identically.

mod text;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::Matrix2;
use num_complex::Complex64 as C64;

/// Amplitudes below this absolute value are dropped after every operation so
/// the term maps do not accumulate numerical dust.
pub const AMP_PRUNE: f64 = 1e-14;

/// Column-orthonormality tolerance for mode maps.
pub const ISOMETRY_TOL: f64 = 1e-9;

/// Unitarity tolerance for local spin rotations.
pub const UNITARY_TOL: f64 = 1e-12;

/// Pseudo-spin state of one particle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    /// +1 for up, -1 for down; the sign a differential Zeeman shift couples to.
    pub fn sign(self) -> f64 {
        match self {
            Spin::Up => 1.0,
            Spin::Down => -1.0,
        }
    }

    pub fn flipped(self) -> Spin {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }
}

/// Lattice site, one- or two-dimensional (y stays 0 in 1D).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Site {
    pub x: i32,
    pub y: i32,
}

impl Site {
    pub fn new(x: i32, y: i32) -> Self {
        Site { x, y }
    }

    /// 1D site on the transport axis.
    pub fn at(x: i32) -> Self {
        Site { x, y: 0 }
    }

    pub fn offset(self, dx: i32, dy: i32) -> Self {
        Site { x: self.x + dx, y: self.y + dy }
    }
}

impl std::fmt::Display for Site {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.y == 0 {
            write!(f, "{}", self.x)
        } else {
            write!(f, "{}:{}", self.x, self.y)
        }
    }
}

/// Full single-particle mode label. Total ordering is lexicographic on
/// (site, spin, vib), which fixes the canonical pair order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeLabel {
    pub site: Site,
    pub spin: Spin,
    pub vib: u32,
}

impl ModeLabel {
    pub fn new(site: Site, spin: Spin, vib: u32) -> Self {
        ModeLabel { site, spin, vib }
    }

    /// Ground-band mode at a 1D site.
    pub fn at(x: i32, spin: Spin) -> Self {
        ModeLabel { site: Site::at(x), spin, vib: 0 }
    }
}

/// Exchange statistics of the particle pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistics {
    Boson,
    Fermion,
}

impl Statistics {
    /// Phase acquired by the two-particle wavefunction under position swap.
    pub fn exchange_phase(self) -> f64 {
        match self {
            Statistics::Boson => 0.0,
            Statistics::Fermion => PI,
        }
    }

    /// exp(i * exchange_phase), exactly +1 or -1.
    pub fn exchange_sign(self) -> f64 {
        match self {
            Statistics::Boson => 1.0,
            Statistics::Fermion => -1.0,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FockError {
    #[error("mode map is not an isometry on the occupied subspace (deviation {deviation:.3e})")]
    NonIsometricMap { deviation: f64 },
    #[error("spin rotation is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },
    #[error("post-selected subspace carries negligible weight ({weight:.3e})")]
    EmptyPostSelection { weight: f64 },
    #[error("states carry different statistics tags")]
    StatisticsMismatch,
    #[error("cannot parse state text: {0}")]
    ParseState(String),
}

/// Linear map sending each mode label to a complex combination of labels.
/// Labels without an explicit column map to themselves.
#[derive(Clone, Debug, Default)]
pub struct ModeMap {
    columns: BTreeMap<ModeLabel, Vec<(ModeLabel, C64)>>,
}

impl ModeMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, from: ModeLabel, image: Vec<(ModeLabel, C64)>) {
        self.columns.insert(from, image);
    }

    /// Convenience: map `from` to a single target with a phase factor.
    pub fn relabel(&mut self, from: ModeLabel, to: ModeLabel, amp: C64) {
        self.columns.insert(from, vec![(to, amp)]);
    }

    fn image(&self, mode: ModeLabel) -> Vec<(ModeLabel, C64)> {
        match self.columns.get(&mode) {
            Some(col) => col.clone(),
            None => vec![(mode, C64::new(1.0, 0.0))],
        }
    }

    /// Largest deviation from column orthonormality over `modes`.
    fn isometry_defect(&self, modes: &[ModeLabel]) -> f64 {
        let mut worst = 0.0f64;
        for (i, &a) in modes.iter().enumerate() {
            let col_a = self.image(a);
            let norm: f64 = col_a.iter().map(|(_, c)| c.norm_sqr()).sum();
            worst = worst.max((norm - 1.0).abs());
            for &b in modes.iter().skip(i + 1) {
                let col_b = self.image(b);
                let mut dot = C64::new(0.0, 0.0);
                for (m, ca) in &col_a {
                    for (mb, cb) in &col_b {
                        if m == mb {
                            dot += ca.conj() * cb;
                        }
                    }
                }
                worst = worst.max(dot.norm());
            }
        }
        worst
    }
}

/// Result of a spin-parity measurement restricted to one particle at each of
/// two chosen sites.
#[derive(Clone, Copy, Debug)]
pub struct ParityOutcome {
    /// Expectation of the spin-parity operator on the post-selected subspace.
    pub parity: f64,
    /// Weight of that subspace (the post-selection probability for a
    /// normalized state).
    pub probability: f64,
}

/// Superposition of ordered two-mode occupancies with a statistics tag.
///
/// Invariants: every stored pair `(m1, m2)` satisfies `m1 <= m2`; fermionic
/// states never contain `m1 == m2`; amplitudes below [`AMP_PRUNE`] are
/// dropped.
#[derive(Clone, Debug)]
pub struct TwoParticleState {
    terms: BTreeMap<(ModeLabel, ModeLabel), C64>,
    stats: Statistics,
}

impl TwoParticleState {
    /// Empty (zero) state.
    pub fn zero(stats: Statistics) -> Self {
        TwoParticleState { terms: BTreeMap::new(), stats }
    }

    /// Normal-order a list of raw terms: each pair is sorted, swaps pick up
    /// the exchange sign, fermionic equal-mode terms vanish, like terms
    /// merge, and tiny amplitudes are pruned.
    pub fn from_raw_terms<I>(raw: I, stats: Statistics) -> Self
    where
        I: IntoIterator<Item = (ModeLabel, ModeLabel, C64)>,
    {
        let mut state = TwoParticleState::zero(stats);
        for (m1, m2, amp) in raw {
            state.accumulate(m1, m2, amp);
        }
        state.prune();
        state
    }

    /// Product state `a\u{2020}(m1) a\u{2020}(m2) |0>` with unit amplitude.
    pub fn product(m1: ModeLabel, m2: ModeLabel, stats: Statistics) -> Self {
        Self::from_raw_terms([(m1, m2, C64::new(1.0, 0.0))], stats)
    }

    fn accumulate(&mut self, m1: ModeLabel, m2: ModeLabel, amp: C64) {
        use std::cmp::Ordering;
        let (key, signed) = match m1.cmp(&m2) {
            Ordering::Less => ((m1, m2), amp),
            Ordering::Greater => ((m2, m1), amp * self.stats.exchange_sign()),
            Ordering::Equal => {
                if self.stats == Statistics::Fermion {
                    return;
                }
                ((m1, m2), amp)
            }
        };
        *self.terms.entry(key).or_insert(C64::new(0.0, 0.0)) += signed;
    }

    fn prune(&mut self) {
        self.terms.retain(|_, a| a.norm() > AMP_PRUNE);
    }

    pub fn statistics(&self) -> Statistics {
        self.stats
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Iterate canonical terms `((m1, m2), amplitude)` in label order.
    pub fn terms(&self) -> impl Iterator<Item = (ModeLabel, ModeLabel, C64)> + '_ {
        self.terms.iter().map(|(&(a, b), &c)| (a, b, c))
    }

    /// Amplitude of an unordered pair (zero if absent). The query pair is
    /// canonicalized first, including the exchange sign.
    pub fn amplitude(&self, m1: ModeLabel, m2: ModeLabel) -> C64 {
        use std::cmp::Ordering;
        match m1.cmp(&m2) {
            Ordering::Less => self.terms.get(&(m1, m2)).copied().unwrap_or_default(),
            Ordering::Greater => {
                self.terms.get(&(m2, m1)).copied().unwrap_or_default()
                    * self.stats.exchange_sign()
            }
            Ordering::Equal => self.terms.get(&(m1, m2)).copied().unwrap_or_default(),
        }
    }

    /// Squared norm, counting bosonic double occupancy with weight 2.
    pub fn norm_sq(&self) -> f64 {
        self.terms
            .iter()
            .map(|(&(a, b), c)| c.norm_sqr() * if a == b { 2.0 } else { 1.0 })
            .sum()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm_sq().sqrt();
        if n > 0.0 {
            for amp in self.terms.values_mut() {
                *amp /= n;
            }
        }
        self
    }

    /// Multiply every amplitude by a global factor.
    pub fn scaled(mut self, factor: C64) -> Self {
        for amp in self.terms.values_mut() {
            *amp *= factor;
        }
        self.prune();
        self
    }

    /// Sum of two states with the same statistics tag.
    pub fn add(&self, other: &Self) -> Result<Self, FockError> {
        if self.stats != other.stats {
            return Err(FockError::StatisticsMismatch);
        }
        let raw = self.terms().chain(other.terms());
        Ok(Self::from_raw_terms(raw, self.stats))
    }

    /// Occupied single-particle modes, deduplicated and sorted.
    pub fn occupied_modes(&self) -> Vec<ModeLabel> {
        let mut modes: Vec<ModeLabel> =
            self.terms.keys().flat_map(|&(a, b)| [a, b]).collect();
        modes.sort();
        modes.dedup();
        modes
    }

    /// Replace every creation operator by its image under `map` and
    /// re-canonicalize. The map must be an isometry on the occupied modes.
    pub fn apply_mode_map(&self, map: &ModeMap) -> Result<Self, FockError> {
        let occupied = self.occupied_modes();
        let defect = map.isometry_defect(&occupied);
        if defect > ISOMETRY_TOL {
            return Err(FockError::NonIsometricMap { deviation: defect });
        }
        let mut out = TwoParticleState::zero(self.stats);
        for (m1, m2, amp) in self.terms() {
            for (u, cu) in map.image(m1) {
                for (v, cv) in map.image(m2) {
                    out.accumulate(u, v, amp * cu * cv);
                }
            }
        }
        out.prune();
        Ok(out)
    }

    /// Apply a 2x2 spin rotation to every mode at `site`, leaving all other
    /// modes untouched. Column convention: the image of the spin-up operator
    /// is `u[(0,0)] a\u{2020}(up) + u[(1,0)] a\u{2020}(down)`.
    pub fn apply_local_unitary(
        &self,
        site: Site,
        u: &Matrix2<C64>,
    ) -> Result<Self, FockError> {
        let defect = unitary_defect(u);
        if defect > UNITARY_TOL {
            return Err(FockError::NotUnitary { deviation: defect });
        }
        let mut map = ModeMap::new();
        for mode in self.occupied_modes() {
            if mode.site != site {
                continue;
            }
            let col = match mode.spin {
                Spin::Up => 0,
                Spin::Down => 1,
            };
            map.insert(
                mode,
                vec![
                    (ModeLabel::new(site, Spin::Up, mode.vib), u[(0, col)]),
                    (ModeLabel::new(site, Spin::Down, mode.vib), u[(1, col)]),
                ],
            );
        }
        // A unitary spin rotation is an isometry by construction; the defect
        // check above already bounded it tighter than the map gate.
        self.apply_mode_map(&map)
    }

    /// Spin-parity expectation restricted to configurations with exactly one
    /// particle at each of the two (distinct) sites, together with the weight
    /// of that subspace. Parity is +1 for aligned spins and -1 otherwise.
    pub fn spin_parity(&self, a: Site, b: Site) -> Result<ParityOutcome, FockError> {
        let mut weight = 0.0;
        let mut signed = 0.0;
        for (m1, m2, amp) in self.terms() {
            let hit = (m1.site == a && m2.site == b) || (m1.site == b && m2.site == a);
            if !hit || a == b {
                continue;
            }
            let w = amp.norm_sqr();
            weight += w;
            signed += if m1.spin == m2.spin { w } else { -w };
        }
        if weight < 1e-15 {
            return Err(FockError::EmptyPostSelection { weight });
        }
        Ok(ParityOutcome { parity: signed / weight, probability: weight })
    }

    /// Sesquilinear inner product in the canonical pair basis.
    pub fn overlap(&self, other: &Self) -> Result<C64, FockError> {
        if self.stats != other.stats {
            return Err(FockError::StatisticsMismatch);
        }
        let mut acc = C64::new(0.0, 0.0);
        for (&key, amp) in &self.terms {
            if let Some(b) = other.terms.get(&key) {
                let mult = if key.0 == key.1 { 2.0 } else { 1.0 };
                acc += amp.conj() * b * mult;
            }
        }
        Ok(acc)
    }
}

/// Deviation of a 2x2 matrix from unitarity, max-norm of `u^H u - 1`.
pub fn unitary_defect(u: &Matrix2<C64>) -> f64 {
    let g = u.adjoint() * u;
    let id = Matrix2::<C64>::identity();
    (g - id).iter().map(|c| c.norm()).fold(0.0, f64::max)
}
