//! HAP placement: weighted centroids, weighted k-means and pattern search.

use crate::error::{Error, Result};
use crate::model::{Position3D, Rect};

/// Weighted centroid of `points` on the ground, lifted to `altitude`.
pub fn place_haps_weighted_centroid(points: &[(Position3D, f64)], altitude: f64) -> Result<Position3D> {
    if points.iter().any(|(_, w)| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::domain("weights must be finite and non-negative"));
    }
    let total: f64 = points.iter().map(|(_, w)| w).sum();
    if total <= 0.0 {
        return Err(Error::domain("weighted centroid needs a positive total weight"));
    }
    let x = points.iter().map(|(p, w)| p.x * w).sum::<f64>() / total;
    let y = points.iter().map(|(p, w)| p.y * w).sum::<f64>() / total;
    Ok(Position3D::new(x, y, altitude))
}

/// Lloyd iterations of weighted k-means seeded at `initial`. Centres in
/// `pinned` stay put but still claim their nearest points. A centre that
/// loses all its weight keeps its previous position.
pub fn weighted_kmeans(
    points: &[(Position3D, f64)],
    initial: &[Position3D],
    pinned: &[bool],
    iterations: usize,
) -> Vec<Position3D> {
    let mut centres = initial.to_vec();
    for _ in 0..iterations {
        let mut members: Vec<Vec<(Position3D, f64)>> = vec![Vec::new(); centres.len()];
        for (p, w) in points {
            let nearest = (0..centres.len())
                .min_by(|&a, &b| {
                    p.horizontal_distance(&centres[a]).total_cmp(&p.horizontal_distance(&centres[b])).then(a.cmp(&b))
                })
                .expect("at least one centre");
            members[nearest].push((*p, *w));
        }
        let mut moved = false;
        for (k, m) in members.iter().enumerate() {
            if pinned.get(k).copied().unwrap_or(false) {
                continue;
            }
            if let Ok(c) = place_haps_weighted_centroid(m, centres[k].z) {
                moved |= c != centres[k];
                centres[k] = c;
            }
        }
        if !moved {
            break;
        }
    }
    centres
}

/// Outcome of a pattern search.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult<S> {
    pub positions: Vec<Position3D>,
    pub value: S,
    pub evaluations: usize,
    /// Objective after every accepted move, starting with the initial value.
    pub trace: Vec<S>,
}

/// Coordinate pattern search over HAP ground positions.
///
/// For each step size in `schedule`, sweeps the HAPs in order; each HAP probes
/// `+-step` along x and y (clamped to `bounds`) and takes its best strictly
/// improving probe. Sweeps repeat until one changes nothing or
/// `max_sweeps` is reached, then the step shrinks. Altitudes are unchanged.
pub fn place_haps_localsearch<S: PartialOrd + Copy>(
    initial: &[Position3D],
    mut objective: impl FnMut(&[Position3D]) -> S,
    schedule: &[f64],
    bounds: Rect,
    max_sweeps: usize,
) -> SearchResult<S> {
    let mut pos = initial.to_vec();
    let mut value = objective(&pos);
    let mut evaluations = 1;
    let mut trace = vec![value];
    for &step in schedule {
        for _ in 0..max_sweeps {
            let mut changed = false;
            for h in 0..pos.len() {
                let here = pos[h];
                let probes = [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)];
                let mut best: Option<(Position3D, S)> = None;
                for (dx, dy) in probes {
                    let x = (here.x + dx).clamp(bounds.x_min, bounds.x_max);
                    let y = (here.y + dy).clamp(bounds.y_min, bounds.y_max);
                    if x == here.x && y == here.y {
                        continue;
                    }
                    pos[h] = Position3D::new(x, y, here.z);
                    let v = objective(&pos);
                    evaluations += 1;
                    let bar = best.map_or(value, |(_, b)| b);
                    if v > bar {
                        best = Some((pos[h], v));
                    }
                }
                match best {
                    Some((p, v)) => {
                        pos[h] = p;
                        value = v;
                        trace.push(v);
                        changed = true;
                    }
                    None => pos[h] = here,
                }
            }
            if !changed {
                break;
            }
        }
    }
    SearchResult { positions: pos, value, evaluations, trace }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centroid_examples() {
        let a = Position3D::ground(0.0, 0.0);
        let b = Position3D::ground(2.0, 0.0);
        assert_eq!(place_haps_weighted_centroid(&[(a, 1.0), (b, 1.0)], 18.0).unwrap(), Position3D::new(1.0, 0.0, 18.0));
        let c = Position3D::ground(7.0, -3.0);
        assert_eq!(place_haps_weighted_centroid(&[(c, 2.5)], 19.0).unwrap(), Position3D::new(7.0, -3.0, 19.0));
        let d = Position3D::ground(4.0, 0.0);
        assert_eq!(place_haps_weighted_centroid(&[(a, 3.0), (d, 1.0)], 18.0).unwrap(), Position3D::new(1.0, 0.0, 18.0));
        assert!(place_haps_weighted_centroid(&[(a, 0.0)], 18.0).is_err());
        assert!(place_haps_weighted_centroid(&[], 18.0).is_err());
    }

    #[test]
    fn constant_objective_leaves_positions() {
        let init = vec![Position3D::new(10.0, 20.0, 18.0), Position3D::new(50.0, 60.0, 18.0)];
        let r = place_haps_localsearch(&init, |_| 1.0, &[10.0, 5.0], Rect::new(0.0, 100.0, 0.0, 100.0), 10);
        assert_eq!(r.positions, init);
        assert_eq!(r.trace, vec![1.0]);
    }

    #[test]
    fn climbs_towards_target_and_trace_is_monotone() {
        let target = (37.3, 81.9);
        let obj = |p: &[Position3D]| -(p[0].x - target.0).hypot(p[0].y - target.1);
        let init = [Position3D::new(90.0, 10.0, 18.0)];
        let r = place_haps_localsearch(&init, obj, &[10.0, 5.0, 2.0, 1.0, 0.5], Rect::new(0.0, 180.0, 0.0, 180.0), 100);
        assert!(r.trace.windows(2).all(|w| w[1] > w[0]));
        assert!((r.positions[0].x - target.0).abs() <= 0.5 && (r.positions[0].y - target.1).abs() <= 0.5);
        assert_eq!(r.positions[0].z, 18.0);
    }

    #[test]
    fn kmeans_splits_two_clusters() {
        let pts: Vec<(Position3D, f64)> = [(0.0, 0.0), (1.0, 0.0), (100.0, 0.0), (101.0, 0.0)]
            .iter()
            .map(|(x, y)| (Position3D::ground(*x, *y), 1.0))
            .collect();
        let init = [Position3D::new(10.0, 0.0, 18.0), Position3D::new(90.0, 0.0, 18.0)];
        let c = weighted_kmeans(&pts, &init, &[false, false], 20);
        assert_eq!(c, vec![Position3D::new(0.5, 0.0, 18.0), Position3D::new(100.5, 0.0, 18.0)]);
        let c = weighted_kmeans(&pts, &init, &[true, false], 20);
        assert_eq!(c[0], init[0]);
    }
}
