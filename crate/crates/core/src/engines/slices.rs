//! X-axis slab bounds for the Slices strategy.

use crate::error::{Error, Result};

/// Splits `ncells_x` cell columns into `nslices` contiguous slabs of
/// near-equal width. Returns `nslices + 1` bounds from 0 to `ncells_x`.
pub fn even_slices(ncells_x: usize, nslices: usize) -> Result<Vec<usize>> {
    if nslices == 0 {
        return Err(Error::InvalidParam {
            field: "slices",
            reason: "need at least one slice".into(),
        });
    }
    if ncells_x < nslices {
        return Err(Error::InvalidParam {
            field: "slices",
            reason: format!("{nslices} slices over {ncells_x} cell columns"),
        });
    }
    Ok((0..=nslices).map(|k| k * ncells_x / nslices).collect())
}

/// Moves slab bounds so that each slab gets an equal share of the measured
/// time. Each slab's time is spread evenly over its cells; bound `k` goes
/// where the cumulative time reaches `k / S` of the total, rounded to the
/// nearest cell. Every slab keeps at least one cell.
pub fn rebalance_slices(bounds: &[usize], times: &[f64]) -> Result<Vec<usize>> {
    let s = times.len();
    if s == 0 || bounds.len() != s + 1 {
        return Err(Error::Inconsistent(format!(
            "{} bounds for {s} slice times",
            bounds.len()
        )));
    }
    if bounds[0] != 0 || bounds.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Inconsistent(format!("slice bounds not increasing: {bounds:?}")));
    }
    if let Some(t) = times.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
        return Err(Error::InvalidParam {
            field: "slice time",
            reason: format!("must be positive and finite, got {t}"),
        });
    }
    let nx = bounds[s];
    let total: f64 = times.iter().sum();
    let mut out = Vec::with_capacity(s + 1);
    out.push(0);
    let mut slab = 0;
    let mut before = 0.0;
    for k in 1..s {
        let target = total * k as f64 / s as f64;
        while slab < s - 1 && before + times[slab] < target {
            before += times[slab];
            slab += 1;
        }
        let width = (bounds[slab + 1] - bounds[slab]) as f64;
        let frac = ((target - before) / times[slab]).clamp(0.0, 1.0);
        let x = (bounds[slab] as f64 + frac * width).round() as usize;
        out.push(x);
    }
    out.push(nx);
    for k in 1..s {
        out[k] = out[k].max(out[k - 1] + 1);
    }
    for k in (1..s).rev() {
        out[k] = out[k].min(out[k + 1] - 1);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn even_split() {
        assert_eq!(even_slices(12, 3).unwrap(), vec![0, 4, 8, 12]);
        assert_eq!(even_slices(10, 4).unwrap(), vec![0, 2, 5, 7, 10]);
        assert!(even_slices(2, 3).is_err());
        assert!(even_slices(5, 0).is_err());
    }

    #[test]
    fn slow_slice_shrinks() {
        assert_eq!(rebalance_slices(&[0, 6, 12], &[3.0, 1.0]).unwrap(), vec![0, 4, 12]);
    }

    #[test]
    fn one_heavy_slice_of_ten() {
        // First slab three times slower: its new width is w (S + 2) / (3 S).
        let bounds: Vec<usize> = (0..=10).map(|k| 30 * k).collect();
        let mut times = vec![1.0; 10];
        times[0] = 3.0;
        let out = rebalance_slices(&bounds, &times).unwrap();
        assert_eq!(out[1], 12);
        assert_eq!(out[10], 300);
    }

    #[test]
    fn equal_times_keep_bounds() {
        let b = vec![0, 3, 4, 10, 11, 20];
        assert_eq!(rebalance_slices(&b, &[2.0; 5]).unwrap(), b);
    }

    #[test]
    fn widths_stay_positive() {
        let out = rebalance_slices(&[0, 1, 2, 3, 100], &[100.0, 100.0, 100.0, 1e-6]).unwrap();
        assert!(out.windows(2).all(|w| w[1] > w[0]), "{out:?}");
        assert_eq!(out[4], 100);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(rebalance_slices(&[0, 5, 10], &[1.0]).is_err());
        assert!(rebalance_slices(&[0, 5, 10], &[1.0, 0.0]).is_err());
        assert!(rebalance_slices(&[0, 5, 5], &[1.0, 1.0]).is_err());
        assert!(rebalance_slices(&[0, 5, 10], &[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn one_cell_per_slice_is_fixed() {
        let b = even_slices(8, 8).unwrap();
        assert_eq!(b, (0..=8).collect::<Vec<_>>());
        let times = [9.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 5.0];
        assert_eq!(rebalance_slices(&b, &times).unwrap(), b);
        assert!(even_slices(7, 8).is_err());
    }
}
