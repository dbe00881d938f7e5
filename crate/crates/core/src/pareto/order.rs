use super::ParetoPoint;

/// Visiting order for the members of one front, most balanced point first.
///
/// With two objectives the front is sorted by the first coordinate and
/// visited from the median position `⌊(len−1)/2⌋`, alternating one step
/// right, one step left, two right, two left, and so on. With more
/// objectives, members are ordered by the variance of their coordinates
/// after per-axis min-max scaling over `points`. A single objective falls
/// back to item index order. Remaining ties go to the smaller item index.
///
/// `front` holds positions into `points`.
pub fn middle_out_order(front: &[usize], points: &[ParetoPoint]) -> Vec<usize> {
    let Some(&first) = front.first() else {
        return Vec::new();
    };
    let t = points[first].dim();
    let by_item = |a: &usize, b: &usize| points[*a].item_index.cmp(&points[*b].item_index);
    match t {
        1 => {
            let mut out = front.to_vec();
            out.sort_by(by_item);
            out
        }
        2 => {
            let mut sorted = front.to_vec();
            sorted.sort_by(|a, b| {
                let (pa, pb) = (&points[*a].coords, &points[*b].coords);
                pa[0].total_cmp(&pb[0]).then(pa[1].total_cmp(&pb[1])).then(by_item(a, b))
            });
            alternate_from_middle(sorted.len())
                .into_iter()
                .map(|i| sorted[i])
                .collect()
        }
        _ => {
            let (lo, span) = axis_ranges(points, t);
            let imbalance = |i: usize| {
                let z: Vec<f64> = points[i]
                    .coords
                    .iter()
                    .enumerate()
                    .map(|(a, v)| if span[a] > 0.0 { (v - lo[a]) / span[a] } else { 0.0 })
                    .collect();
                let mean = z.iter().sum::<f64>() / t as f64;
                z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / t as f64
            };
            let mut keyed: Vec<(f64, usize)> = front.iter().map(|&i| (imbalance(i), i)).collect();
            keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(by_item(&a.1, &b.1)));
            keyed.into_iter().map(|(_, i)| i).collect()
        }
    }
}

/// Positions `0..len` in middle-out order, e.g. `len = 5` gives `[2, 3, 1, 4, 0]`.
pub(crate) fn alternate_from_middle(len: usize) -> Vec<usize> {
    if len == 0 {
        return Vec::new();
    }
    let mid = (len - 1) / 2;
    let mut out = Vec::with_capacity(len);
    out.push(mid);
    let mut step = 1;
    while out.len() < len {
        if mid + step < len {
            out.push(mid + step);
        }
        if step <= mid {
            out.push(mid - step);
        }
        step += 1;
    }
    out
}

fn axis_ranges(points: &[ParetoPoint], t: usize) -> (Vec<f64>, Vec<f64>) {
    let mut lo = vec![f64::INFINITY; t];
    let mut hi = vec![f64::NEG_INFINITY; t];
    for p in points {
        for (a, &v) in p.coords.iter().enumerate() {
            lo[a] = lo[a].min(v);
            hi[a] = hi[a].max(v);
        }
    }
    let span = lo.iter().zip(&hi).map(|(l, h)| h - l).collect();
    (lo, span)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pareto::points_from_rows;

    #[test]
    fn five_point_front() {
        // Positions are given out of d1 order to exercise the sort.
        let rows = vec![
            vec![0.4, 0.1],
            vec![0.0, 0.5],
            vec![0.2, 0.3],
            vec![0.1, 0.4],
            vec![0.3, 0.2],
        ];
        let pts = points_from_rows(&rows).unwrap();
        let order = middle_out_order(&[0, 1, 2, 3, 4], &pts);
        // Sorted by d1: [1, 3, 2, 4, 0]; visit positions [2, 3, 1, 4, 0].
        assert_eq!(order, vec![2, 4, 3, 0, 1]);
        assert_eq!(alternate_from_middle(5), vec![2, 3, 1, 4, 0]);
        assert_eq!(alternate_from_middle(4), vec![1, 2, 0, 3]);
        assert_eq!(alternate_from_middle(1), vec![0]);
    }

    #[test]
    fn singleton_and_empty() {
        let pts = points_from_rows(&[vec![0.3, 0.3], vec![0.5, 0.1]]).unwrap();
        assert_eq!(middle_out_order(&[1], &pts), vec![1]);
        assert!(middle_out_order(&[], &pts).is_empty());
    }

    #[test]
    fn symmetric_front_starts_balanced() {
        let pts = points_from_rows(&[vec![0.1, 0.9], vec![0.9, 0.1], vec![0.5, 0.5]]).unwrap();
        assert_eq!(middle_out_order(&[0, 1, 2], &pts)[0], 2);
    }

    #[test]
    fn three_objectives_use_balance() {
        let pts = points_from_rows(&[
            vec![0.0, 1.0, 0.5],
            vec![0.5, 0.5, 0.5],
            vec![1.0, 0.0, 0.5],
            vec![0.2, 0.6, 0.4],
        ])
        .unwrap();
        let order = middle_out_order(&[0, 1, 2, 3], &pts);
        assert_eq!(order[0], 1);
        assert_eq!(order.len(), 4);
        let mut sorted = order.clone();
        sorted.sort();
        assert_eq!(sorted, vec![0, 1, 2, 3]);
    }
}
