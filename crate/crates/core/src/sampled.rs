//! Uniform staggered grids, sampled functions with prefix sums, and the
//! finite interval families every sup-over-intervals estimator sweeps.
//!
//! The grid on `[-L, L]` with `n` cells places node `i` at the cell midpoint
//! `-L + (i + 1/2) h`, `h = 2L / n`. For even `n` no node sits at the origin,
//! so integrands singular at `0` are always evaluable. Interval `(i, j)`
//! denotes the node range `i..j`, i.e. the physical interval
//! `[x_i - h/2, x_{j-1} + h/2]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    #[serde(rename = "L")]
    half_width: f64,
    n: usize,
}

impl UniformGrid {
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if !half_width.is_finite() || half_width <= 0.0 {
            return Err(Error::InvalidGrid(format!(
                "half width must be positive and finite, got {half_width}"
            )));
        }
        if n < 4 {
            return Err(Error::InvalidGrid(format!("need at least 4 nodes, got {n}")));
        }
        if !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!("node count must be even, got {n}")));
        }
        Ok(Self { half_width, n })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 0.5) * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Left edge of the cell of node `i` (`i == n` gives the right edge of the grid).
    pub fn edge(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    /// Index interval whose cells cover `[a, b]` exactly, if `a` and `b` fall on cell edges.
    pub fn interval_for(&self, a: f64, b: f64) -> Result<(usize, usize)> {
        let h = self.spacing();
        let ia = (a + self.half_width) / h;
        let ib = (b + self.half_width) / h;
        let (i, j) = (ia.round(), ib.round());
        if (ia - i).abs() > 1e-9 || (ib - j).abs() > 1e-9 || i < 0.0 || j > self.n as f64 || i >= j {
            return Err(Error::param(
                "interval",
                format!("[{a}, {b}] does not align with the cell edges of the grid"),
            ));
        }
        Ok((i as usize, j as usize))
    }

    pub fn descriptor(&self) -> GridDescriptor {
        GridDescriptor {
            half_width: self.half_width,
            n: self.n,
        }
    }
}

/// Compact `(L, n)` record embedded in every estimate and report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridDescriptor {
    #[serde(rename = "L")]
    pub half_width: f64,
    pub n: usize,
}

/// Real samples on a [`UniformGrid`] with compensated prefix sums.
///
/// `prefix[j]` is the cumulative sum of the first `j` samples; `prefix_lo`
/// carries the rounding residue so that interval sums are accurate to a few
/// ulps of the interval sum itself rather than of the running total.
#[derive(Debug, Clone)]
pub struct SampledFunction {
    grid: UniformGrid,
    values: Vec<f64>,
    prefix: Vec<f64>,
    prefix_lo: Vec<f64>,
}

impl SampledFunction {
    pub fn new(grid: UniformGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Mismatch(format!(
                "{} samples for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        let mut prefix = Vec::with_capacity(values.len() + 1);
        let mut prefix_lo = Vec::with_capacity(values.len() + 1);
        let (mut hi, mut lo) = (0.0f64, 0.0f64);
        prefix.push(0.0);
        prefix_lo.push(0.0);
        for &v in &values {
            // two-sum
            let s = hi + v;
            let bp = s - hi;
            let err = (hi - (s - bp)) + (v - bp);
            hi = s;
            lo += err;
            prefix.push(hi);
            prefix_lo.push(lo);
        }
        Ok(Self {
            grid,
            values,
            prefix,
            prefix_lo,
        })
    }

    pub fn from_fn(grid: UniformGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(grid.node(i))).collect();
        Self::new(grid, values)
    }

    pub fn try_from_fn(grid: UniformGrid, f: impl Fn(f64) -> Result<f64>) -> Result<Self> {
        let values = (0..grid.len())
            .map(|i| f(grid.node(i)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn prefix(&self) -> &[f64] {
        &self.prefix
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Pointwise image `g(f(x_i))` on the same grid.
    pub fn map(&self, g: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|&v| g(v)).collect())
    }

    pub(crate) fn check_range(&self, i: usize, j: usize) -> Result<()> {
        if i >= j || j > self.values.len() {
            return Err(Error::IndexOutOfRange {
                i,
                j,
                n: self.values.len(),
            });
        }
        Ok(())
    }

    #[inline]
    pub(crate) fn sum_unchecked(&self, i: usize, j: usize) -> f64 {
        (self.prefix[j] - self.prefix[i]) + (self.prefix_lo[j] - self.prefix_lo[i])
    }

    #[inline]
    pub(crate) fn mean_unchecked(&self, i: usize, j: usize) -> f64 {
        self.sum_unchecked(i, j) / (j - i) as f64
    }

    /// Average of the samples on nodes `i..j`, in constant time.
    pub fn interval_mean(&self, i: usize, j: usize) -> Result<f64> {
        self.check_range(i, j)?;
        Ok(self.mean_unchecked(i, j))
    }

    /// Midpoint-rule integral over the cells of nodes `i..j`.
    pub fn interval_integral(&self, i: usize, j: usize) -> Result<f64> {
        self.check_range(i, j)?;
        Ok(self.sum_unchecked(i, j) * self.grid.spacing())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(48 * self.values.len() + 8);
        out.push_str("x,value\n");
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{:.17e},{:.17e}\n", self.grid.node(i), v));
        }
        out
    }

    /// Parses the `x,value` CSV written by [`to_csv`](Self::to_csv). The grid is
    /// recovered from the node positions, which must be a staggered uniform grid.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty CSV".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols != ["x", "value"] {
            return Err(Error::Parse(format!("expected header `x,value`, got `{header}`")));
        }
        let mut xs = Vec::new();
        let mut vs = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let mut parts = line.split(',');
            let parse = |s: Option<&str>| -> Result<f64> {
                s.map(str::trim)
                    .ok_or_else(|| Error::Parse(format!("row {}: missing column", lineno + 2)))?
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("row {}: {e}", lineno + 2)))
            };
            xs.push(parse(parts.next())?);
            vs.push(parse(parts.next())?);
            if parts.next().is_some() {
                return Err(Error::Parse(format!("row {}: too many columns", lineno + 2)));
            }
        }
        let n = xs.len();
        if n < 4 {
            return Err(Error::Parse(format!("need at least 4 rows, got {n}")));
        }
        let h = (xs[n - 1] - xs[0]) / (n - 1) as f64;
        let half_width = n as f64 * h / 2.0;
        let grid = UniformGrid::new(half_width, n)?;
        for (i, &x) in xs.iter().enumerate() {
            if (x - grid.node(i)).abs() > 1e-9 * half_width.max(1.0) {
                return Err(Error::Parse(format!(
                    "row {}: x = {x} is not on the staggered uniform grid",
                    i + 2
                )));
            }
        }
        Self::new(grid, vs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyStrategy {
    Dyadic,
    Sliding,
    Exhaustive,
}

impl std::str::FromStr for FamilyStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dyadic" => Ok(Self::Dyadic),
            "sliding" => Ok(Self::Sliding),
            "exhaustive" => Ok(Self::Exhaustive),
            other => Err(Error::param(
                "family.strategy",
                format!("`{other}` is not one of dyadic, sliding, exhaustive"),
            )),
        }
    }
}

impl std::fmt::Display for FamilyStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Dyadic => "dyadic",
            Self::Sliding => "sliding",
            Self::Exhaustive => "exhaustive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyDescriptor {
    pub strategy: FamilyStrategy,
    pub min_length: usize,
}

/// A finite set of node intervals `(i, j)`, `j - i >= min_length`.
///
/// The family is stored by its membership rule and enumerated lazily in
/// lexicographic `(i, j)` order; the exhaustive family on `2^12` nodes has
/// over eight million members.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalFamily {
    n: usize,
    strategy: FamilyStrategy,
    min_length: usize,
}

impl IntervalFamily {
    pub fn new(grid: &UniformGrid, strategy: FamilyStrategy, min_length: usize) -> Result<Self> {
        Self::for_len(grid.len(), strategy, min_length)
    }

    pub(crate) fn for_len(n: usize, strategy: FamilyStrategy, min_length: usize) -> Result<Self> {
        if min_length < 2 {
            return Err(Error::InvalidFamily(format!(
                "min_length must be at least 2, got {min_length}"
            )));
        }
        if min_length > n {
            return Err(Error::InvalidFamily(format!(
                "min_length {min_length} exceeds the {n} grid nodes"
            )));
        }
        Ok(Self {
            n,
            strategy,
            min_length,
        })
    }

    /// The default estimator family: sliding power-of-two windows, length at least 4.
    pub fn default_for(grid: &UniformGrid) -> Result<Self> {
        Self::new(grid, FamilyStrategy::Sliding, 4)
    }

    pub fn strategy(&self) -> FamilyStrategy {
        self.strategy
    }

    pub fn min_length(&self) -> usize {
        self.min_length
    }

    pub fn grid_len(&self) -> usize {
        self.n
    }

    pub fn descriptor(&self) -> FamilyDescriptor {
        FamilyDescriptor {
            strategy: self.strategy,
            min_length: self.min_length,
        }
    }

    /// Power-of-two lengths used by the dyadic and sliding strategies.
    pub fn dyadic_lengths(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut len = 1usize;
        while len <= self.n {
            if len >= self.min_length {
                out.push(len);
            }
            len <<= 1;
        }
        out
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        if i >= j || j > self.n {
            return false;
        }
        let len = j - i;
        if len < self.min_length {
            return false;
        }
        match self.strategy {
            FamilyStrategy::Exhaustive => true,
            FamilyStrategy::Sliding => len.is_power_of_two(),
            FamilyStrategy::Dyadic => len.is_power_of_two() && i.is_multiple_of(len),
        }
    }

    /// Members with left endpoint `i`, ordered by increasing `j`.
    pub fn intervals_from(&self, i: usize) -> Box<dyn Iterator<Item = (usize, usize)> + '_> {
        let n = self.n;
        match self.strategy {
            FamilyStrategy::Exhaustive => {
                let start = i + self.min_length;
                Box::new((start..=n).map(move |j| (i, j)))
            }
            FamilyStrategy::Sliding => Box::new(
                self.dyadic_lengths()
                    .into_iter()
                    .filter(move |&len| i + len <= n)
                    .map(move |len| (i, i + len)),
            ),
            FamilyStrategy::Dyadic => Box::new(
                self.dyadic_lengths()
                    .into_iter()
                    .filter(move |&len| i.is_multiple_of(len) && i + len <= n)
                    .map(move |len| (i, i + len)),
            ),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| self.intervals_from(i))
    }

    pub fn len(&self) -> usize {
        let n = self.n;
        match self.strategy {
            FamilyStrategy::Exhaustive => {
                let m = n - self.min_length + 1;
                m * (m + 1) / 2
            }
            FamilyStrategy::Sliding => self.dyadic_lengths().iter().map(|&l| n - l + 1).sum(),
            FamilyStrategy::Dyadic => self.dyadic_lengths().iter().map(|&l| n / l).sum(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_vec(&self) -> Vec<(usize, usize)> {
        self.iter().collect()
    }
}
