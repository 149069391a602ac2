//! Static range queries over node samples: windowed maxima and order
//! statistics, so sweeps that ask about every member of a family (and every
//! member inside it) stay near-linear in the family size.

/// Range maximum with the smallest position winning ties.
pub(crate) struct WindowMax {
    levels: Vec<Vec<(f64, usize)>>,
}

fn larger(a: (f64, usize), b: (f64, usize)) -> (f64, usize) {
    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

impl WindowMax {
    pub(crate) fn new(values: Vec<f64>) -> Self {
        let mut levels = vec![values.into_iter().enumerate().map(|(p, v)| (v, p)).collect::<Vec<_>>()];
        let mut span = 1;
        while 2 * span <= levels[0].len() {
            let prev = levels.last().unwrap();
            let next = (0..prev.len() - span).map(|p| larger(prev[p], prev[p + span])).collect();
            levels.push(next);
            span *= 2;
        }
        Self { levels }
    }

    /// `(max, argmax)` over positions `lo..=hi`.
    pub(crate) fn query(&self, lo: usize, hi: usize) -> (f64, usize) {
        let k = (usize::BITS - 1 - (hi - lo + 1).leading_zeros()) as usize;
        let row = &self.levels[k];
        larger(row[lo], row[hi + 1 - (1 << k)])
    }
}

/// Persistent segment tree over value ranks: version `p` holds the first
/// `p` samples, so any node range is the difference of two versions.
pub(crate) struct RankTree {
    values: Vec<f64>,
    roots: Vec<u32>,
    left: Vec<u32>,
    right: Vec<u32>,
    count: Vec<u32>,
    sum: Vec<f64>,
}

impl RankTree {
    pub(crate) fn new(samples: &[f64]) -> Self {
        let mut values = samples.to_vec();
        values.sort_by(f64::total_cmp);
        values.dedup();
        let m = values.len();
        let cap = 1 + samples.len() * (usize::BITS - m.leading_zeros() + 1) as usize;
        let mut t = Self {
            values,
            roots: Vec::with_capacity(samples.len() + 1),
            left: Vec::with_capacity(cap),
            right: Vec::with_capacity(cap),
            count: Vec::with_capacity(cap),
            sum: Vec::with_capacity(cap),
        };
        t.push(0, 0, 0, 0.0);
        t.roots.push(0);
        for &v in samples {
            let r = t.values.partition_point(|&u| u < v);
            let prev = *t.roots.last().unwrap();
            let root = t.insert(prev, 0, m, r, v);
            t.roots.push(root);
        }
        t
    }

    fn push(&mut self, l: u32, r: u32, c: u32, s: f64) -> u32 {
        self.left.push(l);
        self.right.push(r);
        self.count.push(c);
        self.sum.push(s);
        (self.count.len() - 1) as u32
    }

    fn insert(&mut self, prev: u32, lo: usize, hi: usize, rank: usize, v: f64) -> u32 {
        let p = prev as usize;
        let (c, s) = (self.count[p] + 1, self.sum[p] + v);
        if hi - lo == 1 {
            return self.push(0, 0, c, s);
        }
        let mid = (lo + hi) / 2;
        let (mut l, mut r) = (self.left[p], self.right[p]);
        if rank < mid {
            l = self.insert(l, lo, mid, rank, v);
        } else {
            r = self.insert(r, mid, hi, rank, v);
        }
        self.push(l, r, c, s)
    }

    /// For samples `i..j`: the `k`-th smallest (1-based) and the count and
    /// sum of the samples strictly above it.
    pub(crate) fn above_kth(&self, i: usize, j: usize, mut k: u32) -> (f64, usize, f64) {
        let (mut a, mut b) = (self.roots[i] as usize, self.roots[j] as usize);
        let (mut lo, mut hi) = (0, self.values.len());
        let (mut cnt, mut sum) = (0u32, 0.0);
        while hi - lo > 1 {
            let (la, lb) = (self.left[a] as usize, self.left[b] as usize);
            let in_left = self.count[lb] - self.count[la];
            let mid = (lo + hi) / 2;
            if k <= in_left {
                let (ra, rb) = (self.right[a] as usize, self.right[b] as usize);
                cnt += self.count[rb] - self.count[ra];
                sum += self.sum[rb] - self.sum[ra];
                a = la;
                b = lb;
                hi = mid;
            } else {
                k -= in_left;
                a = self.right[a] as usize;
                b = self.right[b] as usize;
                lo = mid;
            }
        }
        (self.values[lo], cnt as usize, sum)
    }
}
