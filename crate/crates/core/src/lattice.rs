//! Torus geometry, edge classes, directed-edge indexing and the turning-angle table.
//!
//! Sites are stored zero-based: `Site { x, y }` with `0 <= x < L`, `0 <= y < M`.
//! `Site::one_based(i, j)` converts from the usual `(i, j)` labelling.

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TorusSpec {
    l: usize,
    m: usize,
}

impl TorusSpec {
    pub const MIN_EXTENT: usize = 2;

    pub fn new(l: usize, m: usize) -> Result<Self> {
        if l < Self::MIN_EXTENT || m < Self::MIN_EXTENT {
            return Err(Error::TorusTooSmall {
                l,
                m,
                min: Self::MIN_EXTENT,
            });
        }
        Ok(Self { l, m })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn sites(&self) -> usize {
        self.l * self.m
    }

    pub fn undirected_edge_count(&self) -> usize {
        3 * self.sites()
    }

    pub fn directed_edge_count(&self) -> usize {
        6 * self.sites()
    }

    pub fn site_index(&self, s: Site) -> usize {
        s.x + self.l * s.y
    }

    pub fn site(&self, index: usize) -> Site {
        Site {
            x: index % self.l,
            y: index / self.l,
        }
    }

    pub fn step(&self, s: Site, d: Direction) -> Site {
        let (dx, dy) = d.delta();
        Site {
            x: (s.x as i64 + dx).rem_euclid(self.l as i64) as usize,
            y: (s.y as i64 + dy).rem_euclid(self.m as i64) as usize,
        }
    }

    pub fn flatten(&self, e: DirectedEdge) -> usize {
        6 * self.site_index(e.site) + e.dir.index()
    }

    pub fn unflatten(&self, flat: usize) -> DirectedEdge {
        DirectedEdge {
            site: self.site(flat / 6),
            dir: Direction::ALL[flat % 6],
        }
    }

    pub fn endpoint(&self, e: DirectedEdge) -> Site {
        self.step(e.site, e.dir)
    }

    pub fn reverse(&self, e: DirectedEdge) -> DirectedEdge {
        DirectedEdge {
            site: self.endpoint(e),
            dir: e.dir.reverse(),
        }
    }

    pub fn directed_edges(&self) -> impl Iterator<Item = DirectedEdge> + '_ {
        (0..self.directed_edge_count()).map(move |f| self.unflatten(f))
    }

    /// The undirected edge traversed by `e`.
    pub fn undirected(&self, e: DirectedEdge) -> UndirectedEdge {
        let base = if e.dir.is_forward() {
            e.site
        } else {
            self.endpoint(e)
        };
        UndirectedEdge {
            base,
            class: e.dir.class(),
        }
    }

    pub fn undirected_index(&self, u: UndirectedEdge) -> usize {
        3 * self.site_index(u.base) + u.class as usize
    }

    pub fn undirected_from_index(&self, index: usize) -> UndirectedEdge {
        UndirectedEdge {
            base: self.site(index / 3),
            class: EdgeClass::ALL[index % 3],
        }
    }

    /// Endpoints `(base, base + step)` of an undirected edge.
    pub fn endpoints(&self, u: UndirectedEdge) -> (Site, Site) {
        (u.base, self.step(u.base, u.class.forward()))
    }

    /// Whether the edge wraps around the torus, i.e. is drawn as a handle.
    pub fn is_wrap(&self, u: UndirectedEdge) -> bool {
        let (dx, dy) = u.class.forward().delta();
        (dx != 0 && u.base.x == self.l - 1) || (dy != 0 && u.base.y == self.m - 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Site {
    pub x: usize,
    pub y: usize,
}

impl Site {
    pub fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }

    /// From one-based coordinates `(i, j)`.
    pub fn one_based(i: usize, j: usize) -> Self {
        assert!(i >= 1 && j >= 1, "one-based coordinates start at 1");
        Self { x: i - 1, y: j - 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Couplings {
    pub j1: f64,
    pub j2: f64,
    pub j3: f64,
}

impl Couplings {
    pub fn new(j1: f64, j2: f64, j3: f64) -> Self {
        Self { j1, j2, j3 }
    }

    pub fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.j1, self.j2, self.j3]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn class(&self, c: EdgeClass) -> f64 {
        match c {
            EdgeClass::Horizontal => self.j1,
            EdgeClass::Vertical => self.j2,
            EdgeClass::Oblique => self.j3,
        }
    }

    pub fn scaled(&self, beta: f64) -> Self {
        Self::new(beta * self.j1, beta * self.j2, beta * self.j3)
    }

    pub fn max_abs(&self) -> f64 {
        self.j1.abs().max(self.j2.abs()).max(self.j3.abs())
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|v| v.is_finite())
    }

    pub fn tanh(&self) -> [f64; 3] {
        self.as_array().map(f64::tanh)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeClass {
    Horizontal = 0,
    Vertical = 1,
    Oblique = 2,
}

impl EdgeClass {
    pub const ALL: [EdgeClass; 3] = [EdgeClass::Horizontal, EdgeClass::Vertical, EdgeClass::Oblique];

    pub fn forward(self) -> Direction {
        match self {
            EdgeClass::Horizontal => Direction::E,
            EdgeClass::Vertical => Direction::N,
            EdgeClass::Oblique => Direction::NE,
        }
    }
}

/// The six lattice directions, in the row order of the 6x6 Fourier block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    E,
    W,
    N,
    S,
    NE,
    SW,
}

impl Direction {
    pub const ALL: [Direction; 6] = [
        Direction::E,
        Direction::W,
        Direction::N,
        Direction::S,
        Direction::NE,
        Direction::SW,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn reverse(self) -> Self {
        use Direction::*;
        match self {
            E => W,
            W => E,
            N => S,
            S => N,
            NE => SW,
            SW => NE,
        }
    }

    pub fn is_forward(self) -> bool {
        matches!(self, Direction::E | Direction::N | Direction::NE)
    }

    pub fn class(self) -> EdgeClass {
        use Direction::*;
        match self {
            E | W => EdgeClass::Horizontal,
            N | S => EdgeClass::Vertical,
            NE | SW => EdgeClass::Oblique,
        }
    }

    pub fn delta(self) -> (i64, i64) {
        use Direction::*;
        match self {
            E => (1, 0),
            W => (-1, 0),
            N => (0, 1),
            S => (0, -1),
            NE => (1, 1),
            SW => (-1, -1),
        }
    }

    /// Planar direction angle in units of pi/4.
    pub fn angle_quarters(self) -> i32 {
        use Direction::*;
        match self {
            E => 0,
            NE => 1,
            N => 2,
            W => 4,
            SW => -3,
            S => -2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DirectedEdge {
    pub site: Site,
    pub dir: Direction,
}

impl DirectedEdge {
    pub fn new(site: Site, dir: Direction) -> Self {
        Self { site, dir }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UndirectedEdge {
    pub base: Site,
    pub class: EdgeClass,
}

/// An angle stored exactly as an integer multiple of pi/8.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct EighthPi(pub i32);

impl EighthPi {
    pub fn radians(self) -> f64 {
        self.0 as f64 * PI / 8.0
    }
}

impl std::ops::Add for EighthPi {
    type Output = EighthPi;
    fn add(self, o: EighthPi) -> EighthPi {
        EighthPi(self.0 + o.0)
    }
}

impl std::ops::Neg for EighthPi {
    type Output = EighthPi;
    fn neg(self) -> EighthPi {
        EighthPi(-self.0)
    }
}

pub fn coupling_of(e: DirectedEdge, j: &Couplings) -> f64 {
    j.class(e.dir.class())
}

/// `e` ends where `f` starts and `f` does not backtrack along `e`.
pub fn is_consecutive(spec: &TorusSpec, e: DirectedEdge, f: DirectedEdge) -> bool {
    spec.endpoint(e) == f.site && f != spec.reverse(e)
}

/// Signed turning angle from `a` to `b`, in `(-pi, pi)`.
pub fn turning_angle(a: Direction, b: Direction) -> Result<EighthPi> {
    if b == a.reverse() {
        return Err(Error::Precondition(format!(
            "turning angle from {a:?} to its reverse {b:?} is undefined"
        )));
    }
    let d = (b.angle_quarters() - a.angle_quarters()).rem_euclid(8);
    let d = if d > 4 { d - 8 } else { d };
    Ok(EighthPi(2 * d))
}
