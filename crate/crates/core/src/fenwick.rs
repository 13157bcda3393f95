//! Binary indexed tree over non-negative rates with prefix-sum search.

#[derive(Clone, Debug)]
pub struct Fenwick {
    /// 1-based tree of length `size + 1`; `size` is a power of two so the
    /// root `tree[size]` is the total.
    tree: Vec<f64>,
    values: Vec<f64>,
    size: usize,
}

impl Fenwick {
    pub fn new(values: &[f64]) -> Self {
        let size = values.len().max(1).next_power_of_two();
        let mut f = Fenwick { tree: vec![0.0; size + 1], values: values.to_vec(), size };
        f.rebuild();
        f
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Recomputes every node from the stored leaf values, discarding
    /// accumulated rounding from incremental updates.
    pub fn rebuild(&mut self) {
        self.tree.iter_mut().for_each(|t| *t = 0.0);
        for (i, &v) in self.values.iter().enumerate() {
            self.tree[i + 1] = v;
        }
        for i in 1..=self.size {
            let parent = i + (i & i.wrapping_neg());
            if parent <= self.size {
                self.tree[parent] += self.tree[i];
            }
        }
    }

    #[inline]
    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: f64) {
        let delta = v - self.values[i];
        if delta == 0.0 {
            return;
        }
        self.values[i] = v;
        let mut j = i + 1;
        while j <= self.size {
            self.tree[j] += delta;
            j += j & j.wrapping_neg();
        }
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.tree[self.size]
    }

    /// Sum of the first `i` values.
    pub fn prefix(&self, i: usize) -> f64 {
        let mut s = 0.0;
        let mut j = i;
        while j > 0 {
            s += self.tree[j];
            j &= j - 1;
        }
        s
    }

    /// Finds `i` with `prefix(i) <= target < prefix(i + 1)` and returns it with
    /// the offset `target - prefix(i)`. Rounding can land on a zero-rate slot or
    /// past the end; the nearest positive slot is returned in that case.
    #[inline]
    pub fn find(&self, mut target: f64) -> (usize, f64) {
        let mut pos = 0;
        let mut step = self.size;
        while step > 0 {
            let next = pos + step;
            if next <= self.size && self.tree[next] <= target {
                target -= self.tree[next];
                pos = next;
            }
            step >>= 1;
        }
        if pos < self.values.len() && self.values[pos] > 0.0 {
            return (pos, target.min(self.values[pos]));
        }
        self.nearest_positive(pos)
    }

    #[cold]
    fn nearest_positive(&self, pos: usize) -> (usize, f64) {
        let start = pos.min(self.values.len().saturating_sub(1));
        for i in (0..=start).rev() {
            if self.values[i] > 0.0 {
                return (i, self.values[i] * (1.0 - f64::EPSILON));
            }
        }
        for i in start + 1..self.values.len() {
            if self.values[i] > 0.0 {
                return (i, 0.0);
            }
        }
        (start, 0.0)
    }
}
