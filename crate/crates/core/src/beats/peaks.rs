//! Peak-picking primitives shared by the detectors.

/// Strict local maxima; a flat top yields its middle sample.
pub(crate) fn local_maxima(x: &[f64]) -> Vec<usize> {
    let n = x.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if x[i - 1] < x[i] {
            let mut j = i;
            while j + 1 < n && x[j + 1] == x[i] {
                j += 1;
            }
            if j + 1 < n && x[j + 1] < x[i] {
                out.push((i + j) / 2);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Keeps the tallest peaks such that no two are closer than `min_dist` samples.
/// Equal heights are resolved in favour of the earlier peak.
pub(crate) fn suppress_by_distance(x: &[f64], peaks: &[usize], min_dist: usize) -> Vec<usize> {
    if min_dist <= 1 {
        return peaks.to_vec();
    }
    let mut order: Vec<usize> = (0..peaks.len()).collect();
    order.sort_by(|&a, &b| x[peaks[b]].total_cmp(&x[peaks[a]]).then(a.cmp(&b)));
    let mut keep = vec![true; peaks.len()];
    for &k in &order {
        if !keep[k] {
            continue;
        }
        let mut j = k;
        while j > 0 && peaks[k] - peaks[j - 1] < min_dist {
            j -= 1;
            keep[j] = false;
        }
        let mut j = k + 1;
        while j < peaks.len() && peaks[j] - peaks[k] < min_dist {
            keep[j] = false;
            j += 1;
        }
    }
    peaks
        .iter()
        .zip(keep)
        .filter_map(|(&p, k)| k.then_some(p))
        .collect()
}

/// Topographic prominence of each peak.
pub(crate) fn prominences(x: &[f64], peaks: &[usize]) -> Vec<f64> {
    peaks
        .iter()
        .map(|&p| {
            let h = x[p];
            let mut left_min = h;
            let mut i = p;
            while i > 0 {
                i -= 1;
                if x[i] > h {
                    break;
                }
                left_min = left_min.min(x[i]);
            }
            let mut right_min = h;
            let mut i = p;
            while i + 1 < x.len() {
                i += 1;
                if x[i] > h {
                    break;
                }
                right_min = right_min.min(x[i]);
            }
            h - left_min.max(right_min)
        })
        .collect()
}

/// Sub-sample vertex of the parabola through the peak and its neighbours.
pub(crate) fn refine(x: &[f64], i: usize) -> f64 {
    if i == 0 || i + 1 >= x.len() {
        return i as f64;
    }
    let (a, b, c) = (x[i - 1], x[i], x[i + 1]);
    let denom = a - 2.0 * b + c;
    if denom >= 0.0 {
        return i as f64;
    }
    i as f64 + (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
}

pub(crate) use crate::stats::percentile;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maxima_and_plateaus() {
        let x = [0.0, 1.0, 0.0, 2.0, 2.0, 2.0, 1.0, 3.0, 3.0];
        assert_eq!(local_maxima(&x), vec![1, 4]);
    }

    #[test]
    fn distance_prefers_taller() {
        let x = [0.0, 1.0, 0.0, 3.0, 0.0, 2.0, 0.0, 0.0, 0.0, 1.5, 0.0];
        let p = local_maxima(&x);
        assert_eq!(p, vec![1, 3, 5, 9]);
        assert_eq!(suppress_by_distance(&x, &p, 3), vec![3, 9]);
    }

    #[test]
    fn prominence_of_nested_peaks() {
        let x = [0.0, 5.0, 2.0, 3.0, 1.0, 0.0];
        let p = local_maxima(&x);
        assert_eq!(prominences(&x, &p), vec![5.0, 1.0]);
    }

    #[test]
    fn parabola_vertex() {
        let f = |t: f64| -(t - 3.3) * (t - 3.3);
        let x: Vec<f64> = (0..8).map(|i| f(i as f64)).collect();
        assert!((refine(&x, 3) - 3.3).abs() < 1e-12);
    }
}
