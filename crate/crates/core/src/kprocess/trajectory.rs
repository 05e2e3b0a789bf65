use std::fmt::Write as _;

use super::state::State;

/// Maximal interval on which X_n is constant.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub state: State,
}

/// [θ_j^n(σ−), θ_j^n(σ)) ∩ [0, T] for one level-j event σ, with the
/// flat index of the level-j node it visits. May be empty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Span {
    pub start: f64,
    pub end: f64,
    pub node: usize,
}

/// Piecewise-constant record of X_n on [0, horizon].
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    depth: usize,
    breadth: usize,
    horizon: f64,
    segments: Vec<Segment>,
    spans: Vec<Vec<Span>>,
}

impl Trajectory {
    pub fn new(depth: usize, breadth: usize, horizon: f64, segments: Vec<Segment>, spans: Vec<Vec<Span>>) -> Self {
        Self {
            depth,
            breadth,
            horizon,
            segments,
            spans,
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn breadth(&self) -> usize {
        self.breadth
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Spans of the level-j events, j = 1..=depth.
    pub fn level_spans(&self, j: usize) -> &[Span] {
        &self.spans[j - 1]
    }

    /// X_n(t) for t in [0, horizon).
    pub fn state_at(&self, t: f64) -> Option<&State> {
        let i = self.segments.partition_point(|s| s.end <= t);
        self.segments.get(i).filter(|s| s.start <= t).map(|s| &s.state)
    }

    /// Lebesgue time on [0, horizon] not covered by finite states.
    pub fn infinity_time(&self) -> f64 {
        let finite: f64 = self
            .segments
            .iter()
            .filter(|s| !s.state.has_infinity())
            .map(|s| s.end - s.start)
            .sum();
        (self.horizon - finite).max(0.0)
    }

    /// One line per segment: start, end and the coordinates.
    pub fn dump(&self, header: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {header} depth={} horizon={:.16e}", self.depth, self.horizon);
        for s in &self.segments {
            let _ = writeln!(out, "{:.16e} {:.16e} {}", s.start, s.end, s.state);
        }
        out
    }
}
