//! Equal-width histograms of sampled costs.

use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Bin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// `bins` equal-width bins spanning `[min, max]` of `xs`; the last bin is
/// closed. A single bin when every value is equal, none when `xs` is empty.
pub fn histogram(xs: &[f64], bins: usize) -> Vec<Bin> {
    let Some(lo) = xs.iter().copied().min_by(f64::total_cmp) else {
        return Vec::new();
    };
    let hi = xs.iter().copied().max_by(f64::total_cmp).expect("nonempty");
    if lo == hi || bins <= 1 {
        return vec![Bin { lo, hi, count: xs.len() }];
    }
    let width = hi - lo;
    let edge = |i: usize| if i == bins { hi } else { lo + width * i as f64 / bins as f64 };
    let mut out: Vec<Bin> = (0..bins).map(|i| Bin { lo: edge(i), hi: edge(i + 1), count: 0 }).collect();
    for &x in xs {
        let mut i = (((x - lo) / width) * bins as f64).floor() as usize;
        i = i.min(bins - 1);
        while i > 0 && x < out[i].lo {
            i -= 1;
        }
        while i + 1 < bins && x >= out[i + 1].lo {
            i += 1;
        }
        out[i].count += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_everything_once() {
        let xs: Vec<f64> = (0..=100).map(|i| i as f64 * 0.37).collect();
        let h = histogram(&xs, 7);
        assert_eq!(h.len(), 7);
        assert_eq!(h.iter().map(|b| b.count).sum::<usize>(), xs.len());
        assert_eq!((h[0].lo, h[6].hi), (0.0, 37.0));
        for b in &h[..6] {
            assert_eq!(b.count, xs.iter().filter(|x| b.lo <= **x && **x < b.hi).count());
        }
    }

    #[test]
    fn degenerate_inputs() {
        assert!(histogram(&[], 5).is_empty());
        assert_eq!(histogram(&[2.0, 2.0], 5), vec![Bin { lo: 2.0, hi: 2.0, count: 2 }]);
        assert_eq!(histogram(&[1.0, 3.0], 2)[1].count, 1);
    }
}
