//! Open ground and parallel-wall corridors.

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Corridor centred on the world x axis with a piecewise-linear width
/// profile. Outside the sampled range the end widths extend indefinitely.
#[derive(Debug, Clone, PartialEq)]
pub struct CorridorProfile<T> {
    samples: Vec<(T, T)>,
    pub entry_x: T,
    pub exit_x: T,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Terrain<T> {
    Open,
    Corridor(CorridorProfile<T>),
}

impl<T: Real> CorridorProfile<T> {
    /// Profile from `(x_mm, width_mm)` samples; entry and exit default to the
    /// first and last sample.
    pub fn new(samples: Vec<(T, T)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Domain("corridor profile needs at least two samples".to_string()));
        }
        for w in samples.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::Domain(format!(
                    "corridor x positions must be strictly increasing ({} then {})",
                    w[0].0, w[1].0
                )));
            }
        }
        if let Some(&(x, w)) = samples.iter().find(|(_, w)| !(*w > T::zero())) {
            return Err(Error::Domain(format!("corridor width at x = {x} must be positive, got {w}")));
        }
        let entry_x = samples[0].0;
        let exit_x = samples[samples.len() - 1].0;
        Ok(Self {
            samples,
            entry_x,
            exit_x,
        })
    }

    pub fn with_entry_exit(mut self, entry_x: T, exit_x: T) -> Result<Self> {
        if !(exit_x > entry_x) {
            return Err(Error::Domain(format!("corridor exit {exit_x} must lie past entry {entry_x}")));
        }
        self.entry_x = entry_x;
        self.exit_x = exit_x;
        Ok(self)
    }

    /// A symmetric throat: `approach` mm of `outer` width, a linear taper of
    /// `taper` mm down to `throat`, `throat_len` mm at the throat, and the
    /// mirror image back out. Starts at x = 0.
    pub fn throat(outer: T, throat: T, approach: T, taper: T, throat_len: T) -> Result<Self> {
        let mut x = T::zero();
        let mut pts = vec![(x, outer)];
        x = x + approach;
        pts.push((x, outer));
        x = x + taper;
        pts.push((x, throat));
        x = x + throat_len;
        pts.push((x, throat));
        x = x + taper;
        pts.push((x, outer));
        Self::new(pts)
    }

    pub fn samples(&self) -> &[(T, T)] {
        &self.samples
    }

    pub fn width_at(&self, x: T) -> T {
        let s = &self.samples;
        if x <= s[0].0 {
            return s[0].1;
        }
        let last = s[s.len() - 1];
        if x >= last.0 {
            return last.1;
        }
        let i = s.partition_point(|p| p.0 <= x);
        let (x0, w0) = s[i - 1];
        let (x1, w1) = s[i];
        w0 + (w1 - w0) * (x - x0) / (x1 - x0)
    }

    pub fn min_width(&self) -> T {
        self.samples
            .iter()
            .map(|p| p.1)
            .fold(T::infinity(), |a, b| a.min(b))
    }

    /// Parses the two-column text format `x_mm,width_mm`. A header line,
    /// blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pts = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() || line.starts_with("x_mm") {
                continue;
            }
            let mut cols = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|c| !c.is_empty());
            let (Some(a), Some(b), None) = (cols.next(), cols.next(), cols.next()) else {
                return Err(Error::Config(format!("corridor line {}: expected `x_mm,width_mm`", n + 1)));
            };
            let num = |s: &str| {
                s.parse::<f64>()
                    .map(lit::<T>)
                    .map_err(|e| Error::Config(format!("corridor line {}: {e}", n + 1)))
            };
            pts.push((num(a)?, num(b)?));
        }
        Self::new(pts)
    }
}

impl<T: Real> Terrain<T> {
    pub fn width_at(&self, x: T) -> Option<T> {
        match self {
            Terrain::Open => None,
            Terrain::Corridor(c) => Some(c.width_at(x)),
        }
    }
}
