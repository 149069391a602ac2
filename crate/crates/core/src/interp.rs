//! Monotone piecewise-cubic Hermite interpolation (Fritsch–Carlson slopes).
//! Monotone data give a monotone interpolant, so interpolation adds no
//! oscillation that a BMO estimate would pick up.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Pchip {
    /// `x` strictly increasing, at least two nodes.
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() || x.len() < 2 {
            return Err(Error::Mismatch(format!(
                "interpolation needs >= 2 matching nodes, got {} and {}",
                x.len(),
                y.len()
            )));
        }
        if let Some(k) = x.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::Parse(format!("interpolation nodes not increasing at {k}")));
        }
        if let Some(index) = x.iter().chain(&y).position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index: index % x.len() });
        }
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = delta[0];
            d[1] = delta[0];
        } else {
            for k in 1..n - 1 {
                if delta[k - 1] * delta[k] > 0.0 {
                    let w1 = 2.0 * h[k] + h[k - 1];
                    let w2 = h[k] + 2.0 * h[k - 1];
                    d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
                }
            }
            d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
            d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Ok(Self { x, y, d })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    fn segment(&self, t: f64) -> Option<usize> {
        let (lo, hi) = self.range();
        if !(t >= lo && t <= hi) {
            return None;
        }
        Some(self.x.partition_point(|&v| v <= t).clamp(1, self.x.len() - 1) - 1)
    }

    /// `None` outside the node range.
    pub fn eval(&self, t: f64) -> Option<f64> {
        let k = self.segment(t)?;
        let h = self.x[k + 1] - self.x[k];
        let s = (t - self.x[k]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        Some(h00 * self.y[k] + h10 * h * self.d[k] + h01 * self.y[k + 1] + h11 * h * self.d[k + 1])
    }

    /// Piecewise-linear interpolant on the same nodes.
    pub fn eval_linear(&self, t: f64) -> Option<f64> {
        let k = self.segment(t)?;
        let w = (t - self.x[k]) / (self.x[k + 1] - self.x[k]);
        Some(self.y[k] * (1.0 - w) + self.y[k + 1] * w)
    }

    /// `|cubic - linear|` at `t`: the interpolation error proxy.
    pub fn error_estimate(&self, t: f64) -> Option<f64> {
        Some((self.eval(t)? - self.eval_linear(t)?).abs())
    }
}

/// Shape-preserving three-point end slope.
fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if s * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && s.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        s
    }
}
