//! Exact-arithmetic mean oscillation.
//!
//! Samples are centered and quantized to 53-bit integers once. For an
//! interval of `m` nodes with integer sum `S`, the numerator
//! `sum |m q_k - S|` is computed exactly in `i128`, so the per-interval
//! value is independent of summation order and of the sweep strategy.
//! Sliding and exhaustive sweeps maintain a Fenwick tree over value ranks
//! holding counts and sums, giving each interval in `O(log n)`.

use rayon::prelude::*;

use crate::sampled::{FamilyStrategy, IntervalFamily};

const QUANT_BITS: i32 = 53;

pub(crate) struct QuantizedSamples {
    q: Vec<i64>,
    /// Value of one quantization unit.
    unit: f64,
    sorted: Vec<i64>,
    rank: Vec<usize>,
}

impl QuantizedSamples {
    pub(crate) fn new(values: &[f64]) -> Self {
        let n = values.len().max(1);
        let center = values.iter().sum::<f64>() / n as f64;
        let max_abs = values
            .iter()
            .map(|v| (v - center).abs())
            .fold(0.0f64, f64::max);
        let unit = if max_abs > 0.0 {
            max_abs / 2f64.powi(QUANT_BITS - 1)
        } else {
            1.0
        };
        let q: Vec<i64> = values
            .iter()
            .map(|v| ((v - center) / unit).round() as i64)
            .collect();
        let mut order: Vec<usize> = (0..q.len()).collect();
        order.sort_by_key(|&k| (q[k], k));
        let mut rank = vec![0usize; q.len()];
        for (pos, &k) in order.iter().enumerate() {
            rank[k] = pos;
        }
        let sorted = order.iter().map(|&k| q[k]).collect();
        Self {
            q,
            unit,
            sorted,
            rank,
        }
    }

    fn finish(&self, numerator: i128, len: usize) -> f64 {
        let m = len as f64;
        numerator as f64 / (m * m) * self.unit
    }

    /// Mean of `|f - f_I|` over nodes `i..j`, by direct summation.
    pub(crate) fn mean_oscillation(&self, i: usize, j: usize) -> f64 {
        let len = (j - i) as i128;
        let s: i128 = self.q[i..j].iter().map(|&v| v as i128).sum();
        let num: i128 = self.q[i..j]
            .iter()
            .map(|&v| (len * v as i128 - s).abs())
            .sum();
        self.finish(num, j - i)
    }

    /// Maximum mean oscillation over the family; smallest `(i, j)` wins ties.
    pub(crate) fn sweep(&self, family: &IntervalFamily) -> Option<(f64, (usize, usize))> {
        match family.strategy() {
            FamilyStrategy::Dyadic => family
                .iter()
                .collect::<Vec<_>>()
                .into_par_iter()
                .map(|(i, j)| (self.mean_oscillation(i, j), (i, j)))
                .reduce_with(better),
            FamilyStrategy::Sliding => self.sweep_sliding(family),
            FamilyStrategy::Exhaustive => self.sweep_exhaustive(family),
        }
    }

    fn sweep_sliding(&self, family: &IntervalFamily) -> Option<(f64, (usize, usize))> {
        const CHUNK: usize = 2048;
        let n = self.q.len();
        let mut tasks = Vec::new();
        for len in family.dyadic_lengths() {
            let last = n - len;
            let mut start = 0;
            while start <= last {
                let end = (start + CHUNK).min(last + 1);
                tasks.push((len, start, end));
                start = end;
            }
        }
        tasks
            .into_par_iter()
            .map(|(len, start, end)| {
                let mut fw = Fenwick::new(n);
                for k in start..start + len {
                    fw.add(self.rank[k], self.q[k], 1);
                }
                let mut sum: i128 = self.q[start..start + len].iter().map(|&v| v as i128).sum();
                let mut best = (self.query(&fw, sum, len), (start, start + len));
                for i in start + 1..end {
                    let out = i - 1;
                    let inn = i + len - 1;
                    fw.add(self.rank[out], self.q[out], -1);
                    fw.add(self.rank[inn], self.q[inn], 1);
                    sum += self.q[inn] as i128 - self.q[out] as i128;
                    best = better(best, (self.query(&fw, sum, len), (i, i + len)));
                }
                best
            })
            .reduce_with(better)
    }

    fn sweep_exhaustive(&self, family: &IntervalFamily) -> Option<(f64, (usize, usize))> {
        let n = self.q.len();
        let min_len = family.min_length();
        (0..=n - min_len)
            .into_par_iter()
            .map_init(
                || Fenwick::new(n),
                |fw, i| {
                    fw.clear();
                    let mut sum: i128 = 0;
                    let mut best: Option<(f64, (usize, usize))> = None;
                    for k in i..n {
                        fw.add(self.rank[k], self.q[k], 1);
                        sum += self.q[k] as i128;
                        let len = k + 1 - i;
                        if len >= min_len {
                            let cand = (self.query(fw, sum, len), (i, k + 1));
                            best = Some(match best {
                                Some(b) => better(b, cand),
                                None => cand,
                            });
                        }
                    }
                    best
                },
            )
            .flatten()
            .reduce_with(better)
    }

    fn query(&self, fw: &Fenwick, sum: i128, len: usize) -> f64 {
        let m = len as i128;
        let thr = sum.div_euclid(m);
        let r = self.sorted.partition_point(|&v| (v as i128) <= thr);
        let (cnt_le, sum_le) = fw.prefix(r);
        let cnt_le = cnt_le as i128;
        let cnt_gt = m - cnt_le;
        let sum_gt = sum - sum_le;
        let num = m * (sum_gt - sum_le) - sum * (cnt_gt - cnt_le);
        self.finish(num, len)
    }
}

/// Larger value wins; on equal values the lexicographically smaller interval.
pub(crate) fn better(a: (f64, (usize, usize)), b: (f64, (usize, usize))) -> (f64, (usize, usize)) {
    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

struct Fenwick {
    count: Vec<i64>,
    sum: Vec<i128>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Self {
            count: vec![0; n + 1],
            sum: vec![0; n + 1],
        }
    }

    fn clear(&mut self) {
        self.count.iter_mut().for_each(|c| *c = 0);
        self.sum.iter_mut().for_each(|s| *s = 0);
    }

    fn add(&mut self, pos: usize, value: i64, sign: i64) {
        let mut k = pos + 1;
        let v = value as i128 * sign as i128;
        while k < self.count.len() {
            self.count[k] += sign;
            self.sum[k] += v;
            k += k & k.wrapping_neg();
        }
    }

    /// Count and sum over ranks `0..r`.
    fn prefix(&self, r: usize) -> (i64, i128) {
        let (mut c, mut s) = (0i64, 0i128);
        let mut k = r;
        while k > 0 {
            c += self.count[k];
            s += self.sum[k];
            k &= k - 1;
        }
        (c, s)
    }
}
