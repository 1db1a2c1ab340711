//! Compensated accumulation.
//!
//! Every Birkhoff sum in the crate goes through one of these accumulators so
//! that averages computed along different routes (whole orbit vs. orbit split
//! into portions, measure integral vs. time average) agree to ~1e-15 relative.

/// Neumaier's variant of Kahan summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Sum of a sequence with compensation.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// Fixed-width vector of running sums, accumulated in short plain blocks that
/// are folded into compensated totals. Used for moment vectors along long
/// orbits, where the per-step cost matters.
#[derive(Clone, Debug)]
pub struct BlockedVectorSum {
    block: Vec<f64>,
    totals: Vec<CompensatedSum>,
    in_block: usize,
    block_len: usize,
}

impl BlockedVectorSum {
    pub fn new(width: usize, block_len: usize) -> Self {
        Self {
            block: vec![0.0; width],
            totals: vec![CompensatedSum::new(); width],
            in_block: 0,
            block_len: block_len.max(1),
        }
    }

    /// Adds one term per coordinate.
    #[inline]
    pub fn add(&mut self, terms: &[f64]) {
        for (b, t) in self.block.iter_mut().zip(terms) {
            *b += *t;
        }
        self.in_block += 1;
        if self.in_block == self.block_len {
            self.flush();
        }
    }

    fn flush(&mut self) {
        for (total, b) in self.totals.iter_mut().zip(self.block.iter_mut()) {
            total.add(*b);
            *b = 0.0;
        }
        self.in_block = 0;
    }

    /// Current totals (flushes the pending block).
    pub fn totals(&mut self) -> Vec<f64> {
        self.flush();
        self.totals.iter().map(CompensatedSum::value).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_terms() {
        let terms = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(compensated_sum(terms), 2.0);
        let naive: f64 = terms.iter().sum();
        assert_ne!(naive, 2.0);
    }

    #[test]
    fn many_small_terms() {
        let n = 1_000_000;
        let s = compensated_sum(std::iter::repeat(0.1).take(n));
        assert!((s - 100_000.0).abs() < 1e-9);
    }

    #[test]
    fn blocked_matches_scalar() {
        let mut v = BlockedVectorSum::new(2, 7);
        let mut a = CompensatedSum::new();
        for i in 0..1000 {
            let x = (i as f64).sin();
            v.add(&[x, 2.0 * x]);
            a.add(x);
        }
        let t = v.totals();
        assert!((t[0] - a.value()).abs() < 1e-12);
        assert!((t[1] - 2.0 * a.value()).abs() < 1e-12);
    }
}
