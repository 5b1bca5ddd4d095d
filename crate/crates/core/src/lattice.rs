//! Finite lattice geometry: boxes in `Z^d`, tori `(Z/nZ)^d`, dense edge
//! indexing and L1 balls.
//!
//! Sites of a region are indexed row-major (the first coordinate varies
//! slowest). Edges of a torus are indexed `site_index * d + axis`. Edges of a
//! box are grouped by axis: all axis-0 edges come first, in row-major order
//! of their base site, then all axis-1 edges, and so on. Both layouts are
//! dense, so a weight configuration is a flat array.

use std::fmt;

use thiserror::Error;

pub const MIN_DIM: usize = 2;
pub const MAX_DIM: usize = 4;

/// Coordinates must fit the 15-bit zigzag fields of [`EdgeId::lattice_key`].
pub const COORD_LIMIT: i64 = 16_383;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("dimension {0} outside supported range {MIN_DIM}..={MAX_DIM}")]
    Dimension(usize),
    #[error("empty box: lo {lo} is not <= hi {hi}")]
    EmptyBox { lo: Site, hi: Site },
    #[error("torus side {0} must be at least 3")]
    TorusSide(i64),
    #[error("coordinate {0} outside supported range +/-{COORD_LIMIT}")]
    CoordinateRange(i64),
    #[error("site {site} is outside the region")]
    OutsideRegion { site: Site },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// A point of `Z^d`, `2 <= d <= 4`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Site {
    dim: u8,
    coords: [i64; MAX_DIM],
}

impl Site {
    pub fn new(coords: &[i64]) -> Result<Self, LatticeError> {
        let d = coords.len();
        if !(MIN_DIM..=MAX_DIM).contains(&d) {
            return Err(LatticeError::Dimension(d));
        }
        let mut c = [0i64; MAX_DIM];
        c[..d].copy_from_slice(coords);
        Ok(Site {
            dim: d as u8,
            coords: c,
        })
    }

    pub fn origin(dim: usize) -> Self {
        assert!((MIN_DIM..=MAX_DIM).contains(&dim), "dimension {dim}");
        Site {
            dim: dim as u8,
            coords: [0; MAX_DIM],
        }
    }

    /// `k * e_axis`.
    pub fn axis_point(dim: usize, axis: usize, k: i64) -> Self {
        Site::origin(dim).offset(axis, k)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn coords(&self) -> &[i64] {
        &self.coords[..self.dim as usize]
    }

    #[inline]
    pub fn coord(&self, axis: usize) -> i64 {
        self.coords[axis]
    }

    #[inline]
    pub fn offset(mut self, axis: usize, delta: i64) -> Self {
        self.coords[axis] += delta;
        self
    }

    pub fn translate(mut self, by: &Site) -> Self {
        for a in 0..self.dim() {
            self.coords[a] += by.coords[a];
        }
        self
    }

    fn with_offsets(mut self, off: &[i64]) -> Self {
        for (c, o) in self.coords.iter_mut().zip(off) {
            *c += o;
        }
        self
    }

    pub fn l1_norm(&self) -> i64 {
        self.coords().iter().map(|c| c.abs()).sum()
    }

    pub fn l1_distance(&self, other: &Site) -> i64 {
        (0..self.dim()).map(|a| (self.coords[a] - other.coords[a]).abs()).sum()
    }
}

impl fmt::Debug for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// A nearest-neighbour edge, oriented from `base` to `base + e_axis`.
/// On a torus the head wraps around.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct EdgeId {
    pub base: Site,
    pub axis: usize,
}

impl EdgeId {
    pub fn new(base: Site, axis: usize) -> Self {
        debug_assert!(axis < base.dim());
        EdgeId { base, axis }
    }

    /// Head in `Z^d` (no wrapping).
    pub fn head(&self) -> Site {
        self.base.offset(self.axis, 1)
    }

    /// Window-independent 64-bit key of the lattice edge: the axis in the two
    /// low bits, then each coordinate zigzag-encoded in a 15-bit field.
    /// Used as the counter of the per-edge random stream so that the weight
    /// of an edge does not depend on the window it is sampled in.
    pub fn lattice_key(&self) -> u64 {
        let mut key = self.axis as u64;
        for (i, &c) in self.base.coords().iter().enumerate() {
            let z = ((c << 1) ^ (c >> 63)) as u64 & 0x7FFF;
            key |= z << (2 + 15 * i);
        }
        key
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum RegionKind {
    /// All sites `x` with `lo <= x <= hi` coordinatewise.
    Box { lo: Site, hi: Site },
    /// `(Z/nZ)^d` with coordinates in `[0, n)`.
    Torus { side: i64 },
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Region {
    kind: RegionKind,
    dim: usize,
    /// Number of sites along each axis.
    lens: [i64; MAX_DIM],
}

impl Region {
    pub fn boxed(lo: Site, hi: Site) -> Result<Self, LatticeError> {
        let d = lo.dim();
        if hi.dim() != d {
            return Err(LatticeError::DimensionMismatch {
                expected: d,
                got: hi.dim(),
            });
        }
        let mut lens = [1i64; MAX_DIM];
        for a in 0..d {
            for c in [lo.coord(a), hi.coord(a)] {
                if c.abs() > COORD_LIMIT {
                    return Err(LatticeError::CoordinateRange(c));
                }
            }
            if lo.coord(a) > hi.coord(a) {
                return Err(LatticeError::EmptyBox { lo, hi });
            }
            lens[a] = hi.coord(a) - lo.coord(a) + 1;
        }
        Ok(Region {
            kind: RegionKind::Box { lo, hi },
            dim: d,
            lens,
        })
    }

    /// The box `[0, side)^d`.
    pub fn cube(dim: usize, side: i64) -> Result<Self, LatticeError> {
        if !(MIN_DIM..=MAX_DIM).contains(&dim) {
            return Err(LatticeError::Dimension(dim));
        }
        let lo = Site::origin(dim);
        let mut hi = lo;
        for a in 0..dim {
            hi = hi.offset(a, side - 1);
        }
        Region::boxed(lo, hi)
    }

    pub fn torus(dim: usize, side: i64) -> Result<Self, LatticeError> {
        if !(MIN_DIM..=MAX_DIM).contains(&dim) {
            return Err(LatticeError::Dimension(dim));
        }
        if side < 3 {
            return Err(LatticeError::TorusSide(side));
        }
        if side > COORD_LIMIT {
            return Err(LatticeError::CoordinateRange(side));
        }
        let mut lens = [1i64; MAX_DIM];
        lens[..dim].fill(side);
        Ok(Region {
            kind: RegionKind::Torus { side },
            dim,
            lens,
        })
    }

    #[inline]
    pub fn kind(&self) -> &RegionKind {
        &self.kind
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_torus(&self) -> bool {
        matches!(self.kind, RegionKind::Torus { .. })
    }

    pub fn side_lengths(&self) -> &[i64] {
        &self.lens[..self.dim]
    }

    fn lo(&self) -> Site {
        match self.kind {
            RegionKind::Box { lo, .. } => lo,
            RegionKind::Torus { .. } => Site::origin(self.dim),
        }
    }

    pub fn site_count(&self) -> usize {
        self.side_lengths().iter().product::<i64>() as usize
    }

    pub fn edge_count(&self) -> usize {
        match self.kind {
            RegionKind::Torus { .. } => self.dim * self.site_count(),
            RegionKind::Box { .. } => (0..self.dim).map(|a| self.axis_block_len(a)).sum(),
        }
    }

    /// Number of axis-`a` edges of a box.
    fn axis_block_len(&self, axis: usize) -> usize {
        (0..self.dim)
            .map(|b| if b == axis { self.lens[b] - 1 } else { self.lens[b] })
            .product::<i64>() as usize
    }

    pub fn contains(&self, site: &Site) -> bool {
        if site.dim() != self.dim {
            return false;
        }
        let lo = self.lo();
        (0..self.dim).all(|a| {
            let c = site.coord(a) - lo.coord(a);
            c >= 0 && c < self.lens[a]
        })
    }

    /// Reduce coordinates modulo the side on a torus; identity on a box.
    pub fn normalize(&self, site: Site) -> Site {
        match self.kind {
            RegionKind::Torus { side } => {
                let mut s = site;
                for a in 0..self.dim {
                    s.coords[a] = s.coords[a].rem_euclid(side);
                }
                s
            }
            RegionKind::Box { .. } => site,
        }
    }

    pub fn site_index(&self, site: &Site) -> Option<usize> {
        if !self.contains(site) {
            return None;
        }
        let lo = self.lo();
        let mut idx = 0i64;
        for a in 0..self.dim {
            idx = idx * self.lens[a] + (site.coord(a) - lo.coord(a));
        }
        Some(idx as usize)
    }

    pub fn site_at(&self, index: usize) -> Site {
        debug_assert!(index < self.site_count());
        let mut rem = index as i64;
        let mut s = self.lo();
        for a in (0..self.dim).rev() {
            s.coords[a] += rem % self.lens[a];
            rem /= self.lens[a];
        }
        s
    }

    /// Dense index of an edge, or `None` if the edge is not in the region.
    /// On a torus the base is normalised first.
    pub fn edge_index(&self, edge: &EdgeId) -> Option<usize> {
        if edge.axis >= self.dim || edge.base.dim() != self.dim {
            return None;
        }
        match self.kind {
            RegionKind::Torus { .. } => {
                let base = self.normalize(edge.base);
                Some(self.site_index(&base)? * self.dim + edge.axis)
            }
            RegionKind::Box { lo, hi } => {
                let axis = edge.axis;
                if !self.contains(&edge.base) || edge.base.coord(axis) >= hi.coord(axis) {
                    return None;
                }
                let offset: usize = (0..axis).map(|a| self.axis_block_len(a)).sum();
                let mut idx = 0i64;
                for a in 0..self.dim {
                    let len = if a == axis { self.lens[a] - 1 } else { self.lens[a] };
                    idx = idx * len + (edge.base.coord(a) - lo.coord(a));
                }
                Some(offset + idx as usize)
            }
        }
    }

    pub fn edge_at(&self, index: usize) -> EdgeId {
        debug_assert!(index < self.edge_count());
        match self.kind {
            RegionKind::Torus { .. } => EdgeId::new(self.site_at(index / self.dim), index % self.dim),
            RegionKind::Box { lo, .. } => {
                let mut rem = index;
                let mut axis = 0;
                while rem >= self.axis_block_len(axis) {
                    rem -= self.axis_block_len(axis);
                    axis += 1;
                }
                let mut rem = rem as i64;
                let mut base = lo;
                for a in (0..self.dim).rev() {
                    let len = if a == axis { self.lens[a] - 1 } else { self.lens[a] };
                    base.coords[a] += rem % len;
                    rem /= len;
                }
                EdgeId::new(base, axis)
            }
        }
    }

    /// Both endpoints of an edge as site indices `(base, head)`.
    pub fn edge_endpoints(&self, index: usize) -> (usize, usize) {
        let e = self.edge_at(index);
        let head = self.normalize(e.head());
        (
            self.site_index(&e.base).expect("edge base in region"),
            self.site_index(&head).expect("edge head in region"),
        )
    }

    /// Every edge, in index order.
    pub fn enumerate_edges(&self) -> Vec<EdgeId> {
        let mut out = Vec::with_capacity(self.edge_count());
        self.for_each_edge(|e| out.push(e));
        out
    }

    /// Visit every edge in index order.
    pub fn for_each_edge(&self, mut f: impl FnMut(EdgeId)) {
        let d = self.dim;
        let lo = self.lo();
        match self.kind {
            RegionKind::Torus { .. } => odometer(&self.lens[..d], |off| {
                let base = lo.with_offsets(off);
                for axis in 0..d {
                    f(EdgeId::new(base, axis));
                }
            }),
            RegionKind::Box { .. } => {
                for axis in 0..d {
                    let mut lens = self.lens;
                    lens[axis] -= 1;
                    odometer(&lens[..d], |off| f(EdgeId::new(lo.with_offsets(off), axis)));
                }
            }
        }
    }

    /// Adjacent sites with the connecting edges: at most `2d`, exactly `2d`
    /// on a torus.
    pub fn neighbors(&self, site: &Site) -> Result<Vec<(Site, EdgeId)>, LatticeError> {
        if !self.contains(site) {
            return Err(LatticeError::OutsideRegion { site: *site });
        }
        let mut out = Vec::with_capacity(2 * self.dim);
        for axis in 0..self.dim {
            for delta in [-1i64, 1] {
                let raw = site.offset(axis, delta);
                let nb = self.normalize(raw);
                if !self.contains(&nb) {
                    continue;
                }
                let base = if delta == 1 { *site } else { nb };
                out.push((nb, EdgeId::new(base, axis)));
            }
        }
        Ok(out)
    }

    /// Whether a site lies on the boundary of a box. Tori have no boundary.
    pub fn is_boundary(&self, site: &Site) -> bool {
        match self.kind {
            RegionKind::Torus { .. } => false,
            RegionKind::Box { lo, hi } => {
                (0..self.dim).any(|a| site.coord(a) == lo.coord(a) || site.coord(a) == hi.coord(a))
            }
        }
    }
}

/// Row-major walk over `[0, lens)`, last axis fastest.
fn odometer(lens: &[i64], mut f: impl FnMut(&[i64])) {
    if lens.iter().any(|&l| l <= 0) {
        return;
    }
    let mut cur = vec![0i64; lens.len()];
    loop {
        f(&cur);
        let mut a = lens.len();
        loop {
            if a == 0 {
                return;
            }
            a -= 1;
            cur[a] += 1;
            if cur[a] < lens[a] {
                break;
            }
            cur[a] = 0;
        }
    }
}

/// `B_m = { x in Z^d : |x|_1 <= m }`, in lexicographic order.
pub fn ball(m: i64, dim: usize) -> Vec<Site> {
    assert!((MIN_DIM..=MAX_DIM).contains(&dim), "dimension {dim}");
    let mut out = Vec::new();
    let mut coords = [0i64; MAX_DIM];
    fn rec(axis: usize, dim: usize, budget: i64, coords: &mut [i64; MAX_DIM], out: &mut Vec<Site>) {
        if axis == dim {
            out.push(Site::new(&coords[..dim]).expect("valid dimension"));
            return;
        }
        for c in -budget..=budget {
            coords[axis] = c;
            rec(axis + 1, dim, budget - c.abs(), coords, out);
        }
        coords[axis] = 0;
    }
    if m >= 0 {
        rec(0, dim, m, &mut coords, &mut out);
    }
    out
}

/// `|B_m|` in dimension `dim`, by the closed form
/// `sum_k 2^k C(d,k) C(m,k)`.
pub fn ball_size(m: i64, dim: usize) -> usize {
    if m < 0 {
        return 0;
    }
    let mut total = 0u128;
    for k in 0..=dim.min(m as usize) {
        total += (1u128 << k) * binom(dim as u128, k as u128) * binom(m as u128, k as u128);
    }
    total as usize
}

fn binom(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

pub(crate) const NO_NEIGHBOR: u32 = u32::MAX;

/// Flat adjacency table: for node `u` and slot `s < 2d`, the neighbour and
/// the index of the connecting edge (or [`NO_NEIGHBOR`]).
#[derive(Debug, Clone)]
pub struct Adjacency {
    degree: usize,
    nbr: Vec<u32>,
    edge: Vec<u32>,
}

impl Adjacency {
    pub fn of_region(region: &Region) -> Self {
        let d = region.dim();
        let deg = 2 * d;
        let v = region.site_count();
        let mut nbr = vec![NO_NEIGHBOR; v * deg];
        let mut edge = vec![NO_NEIGHBOR; v * deg];
        for e in 0..region.edge_count() {
            let (a, b) = region.edge_endpoints(e);
            let axis = region.edge_at(e).axis;
            // slot 2*axis+1: forward (+e_axis); slot 2*axis: backward
            nbr[a * deg + 2 * axis + 1] = b as u32;
            edge[a * deg + 2 * axis + 1] = e as u32;
            nbr[b * deg + 2 * axis] = a as u32;
            edge[b * deg + 2 * axis] = e as u32;
        }
        Adjacency { degree: deg, nbr, edge }
    }

    /// Build from raw tables (used for covering spaces).
    pub(crate) fn from_raw(degree: usize, nbr: Vec<u32>, edge: Vec<u32>) -> Self {
        debug_assert_eq!(nbr.len(), edge.len());
        Adjacency { degree, nbr, edge }
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.nbr.len() / self.degree
    }

    #[inline]
    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let start = u * self.degree;
        self.nbr[start..start + self.degree]
            .iter()
            .zip(&self.edge[start..start + self.degree])
            .filter(|(n, _)| **n != NO_NEIGHBOR)
            .map(|(n, e)| (*n as usize, *e as usize))
    }
}
