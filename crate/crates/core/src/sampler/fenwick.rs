//! Fenwick (binary indexed) tree over nonnegative weights, supporting
//! O(log m) point updates and weighted selection.

#[derive(Debug, Clone)]
pub struct FenwickTree {
    // 1-indexed; tree[i] holds the sum of the range it covers.
    tree: Vec<f64>,
    len: usize,
}

impl FenwickTree {
    pub fn from_weights(weights: &[f64]) -> Self {
        let len = weights.len();
        let mut tree = vec![0.0; len + 1];
        tree[1..].copy_from_slice(weights);
        for i in 1..=len {
            let j = i + (i & i.wrapping_neg());
            if j <= len {
                tree[j] += tree[i];
            }
        }
        FenwickTree { tree, len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    /// Sum of the first `count` weights.
    pub fn prefix_sum(&self, count: usize) -> f64 {
        debug_assert!(count <= self.len);
        let mut i = count;
        let mut sum = 0.0;
        while i > 0 {
            sum += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        sum
    }

    pub fn total(&self) -> f64 {
        self.prefix_sum(self.len)
    }

    /// Adds `delta` to the weight at 0-based `index`.
    pub fn add(&mut self, index: usize, delta: f64) {
        debug_assert!(index < self.len);
        let mut i = index + 1;
        while i <= self.len {
            self.tree[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    /// Returns the smallest 0-based index whose cumulative weight
    /// exceeds `value`, i.e. the item a uniform draw in `[0, total)`
    /// lands on. Values at or beyond the total clamp to the last item.
    pub fn select(&self, value: f64) -> usize {
        let mut pos = 0usize;
        let mut rem = value;
        let mut step = self.len.next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next <= self.len && self.tree[next] <= rem {
                rem -= self.tree[next];
                pos = next;
            }
            step >>= 1;
        }
        pos.min(self.len - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefix_sums_match_naive() {
        let w = [2.0, 0.5, 1.25, 3.0, 0.25, 4.0, 1.0];
        let t = FenwickTree::from_weights(&w);
        let mut acc = 0.0;
        for i in 0..w.len() {
            acc += w[i];
            assert!((t.prefix_sum(i + 1) - acc).abs() < 1e-12);
        }
        assert!((t.total() - acc).abs() < 1e-12);
    }

    #[test]
    fn select_matches_linear_scan() {
        let w = [2.0, 3.0, 0.5, 1.5];
        let t = FenwickTree::from_weights(&w);
        let linear = |u: f64| {
            let mut acc = 0.0;
            for (i, &wi) in w.iter().enumerate() {
                acc += wi;
                if u < acc {
                    return i;
                }
            }
            w.len() - 1
        };
        for &u in &[0.0, 1.999, 2.0, 4.999, 5.0, 5.4999, 5.5, 6.9, 6.999] {
            assert_eq!(t.select(u), linear(u), "u={u}");
        }
    }

    #[test]
    fn add_updates_selection_boundaries() {
        let mut t = FenwickTree::from_weights(&[1.0, 1.0, 1.0]);
        t.add(1, 2.0); // weights now 1, 3, 1
        assert_eq!(t.select(0.5), 0);
        assert_eq!(t.select(1.0), 1);
        assert_eq!(t.select(3.999), 1);
        assert_eq!(t.select(4.0), 2);
        assert!((t.total() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_value_clamps_to_last() {
        let t = FenwickTree::from_weights(&[1.0, 1.0]);
        assert_eq!(t.select(2.0), 1);
        assert_eq!(t.select(100.0), 1);
    }
}
