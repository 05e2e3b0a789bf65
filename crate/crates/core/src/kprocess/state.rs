use std::fmt;

use crate::env::NodePath;

/// One coordinate of a K-process state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coord {
    Finite(u32),
    Infinity,
}

impl Coord {
    fn reciprocal(self) -> f64 {
        match self {
            Coord::Finite(x) => 1.0 / f64::from(x),
            Coord::Infinity => 0.0,
        }
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coord::Finite(x) => write!(f, "{x}"),
            Coord::Infinity => f.write_str("inf"),
        }
    }
}

/// Point of ℕ̄_*^k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct State(Vec<Coord>);

impl State {
    pub fn new(coords: Vec<Coord>) -> Self {
        Self(coords)
    }

    pub fn from_path(path: &NodePath) -> Self {
        Self(path.coords().iter().map(|&x| Coord::Finite(x)).collect())
    }

    pub fn coords(&self) -> &[Coord] {
        &self.0
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn has_infinity(&self) -> bool {
        self.0.contains(&Coord::Infinity)
    }

    /// True when the first `prefix.depth()` coordinates are finite and equal `prefix`.
    pub fn matches(&self, prefix: &NodePath) -> bool {
        prefix.depth() <= self.0.len()
            && prefix
                .coords()
                .iter()
                .zip(&self.0)
                .all(|(&p, c)| *c == Coord::Finite(p))
    }

    /// The finite prefix before the first INFINITY coordinate.
    pub fn finite_prefix(&self) -> NodePath {
        let coords: Vec<u32> = self
            .0
            .iter()
            .map_while(|c| match c {
                Coord::Finite(x) => Some(*x),
                Coord::Infinity => None,
            })
            .collect();
        NodePath::new(coords).expect("finite coordinates are positive")
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// ρ(a, b) = Σ_k 2^{−k} ρ_0(a_k, b_k), with ρ_0(x, y) = |1/x − 1/y|
/// (1/∞ = 0) and the shorter state padded by a symbol ζ at distance 1
/// from every coordinate.
pub fn rho_distance(a: &State, b: &State) -> f64 {
    let len = a.depth().max(b.depth());
    let mut weight = 1.0;
    let mut total = 0.0;
    for k in 0..len {
        weight *= 0.5;
        let term = match (a.0.get(k), b.0.get(k)) {
            (Some(x), Some(y)) => (x.reciprocal() - y.reciprocal()).abs(),
            (None, None) => 0.0,
            _ => 1.0,
        };
        total += weight * term;
    }
    total
}
