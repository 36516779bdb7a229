//! Pareto ranking utilities over minimization-oriented objective points.

use num_traits::Num;

use crate::scalar::Scalar;

/// `a` dominates `b`: no worse in every objective and better in at least one.
pub fn dominates<T: PartialOrd>(a: &[T], b: &[T]) -> bool {
    debug_assert_eq!(a.len(), b.len());
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

/// Fast nondominated sort. Returns fronts of indices into `points`; front 0
/// is the nondominated set. Indices within a front are ascending.
pub fn nondominated_sort<T: PartialOrd, P: AsRef<[T]>>(points: &[P]) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut counts = vec![0usize; n];
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (points[i].as_ref(), points[j].as_ref());
            if dominates(a, b) {
                dominated_by[i].push(j);
                counts[j] += 1;
            } else if dominates(b, a) {
                dominated_by[j].push(i);
                counts[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| counts[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_by[i] {
                counts[j] -= 1;
                if counts[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(std::mem::replace(&mut current, next));
    }
    fronts
}

/// Crowding distance of each member of `front` (same order as `front`).
/// Boundary members of every objective get infinity; objectives with zero
/// range contribute nothing.
pub fn crowding_distance<T: Scalar, P: AsRef<[T]>>(points: &[P], front: &[usize]) -> Vec<T> {
    let n = front.len();
    let mut dist = vec![T::zero(); n];
    if n == 0 {
        return dist;
    }
    let m = points[front[0]].as_ref().len();
    let mut idx: Vec<usize> = (0..n).collect();
    for k in 0..m {
        let val = |i: usize| points[front[i]].as_ref()[k];
        idx.sort_by(|&a, &b| val(a).partial_cmp(&val(b)).expect("comparable objectives"));
        dist[idx[0]] = T::infinity();
        dist[idx[n - 1]] = T::infinity();
        let range = val(idx[n - 1]) - val(idx[0]);
        if range <= T::zero() {
            continue;
        }
        for w in 1..n.saturating_sub(1) {
            let i = idx[w];
            if dist[i].is_finite() {
                dist[i] = dist[i] + (val(idx[w + 1]) - val(idx[w - 1])) / range;
            }
        }
    }
    dist
}

/// Two-dimensional staircase of mutually nondominated points, sorted by `x`
/// ascending (and therefore `y` descending), with its dominated area.
struct Staircase<T> {
    steps: Vec<(T, T)>,
    area: T,
    rx: T,
    ry: T,
}

impl<T: Copy + PartialOrd + Num> Staircase<T> {
    fn new(rx: T, ry: T) -> Self {
        Staircase {
            steps: Vec::new(),
            area: T::zero(),
            rx,
            ry,
        }
    }

    fn insert(&mut self, x: T, y: T) {
        let pos = self.steps.partition_point(|s| s.0 < x);
        let mut h = if pos > 0 {
            let prev = self.steps[pos - 1].1;
            if prev <= y {
                return;
            }
            prev
        } else {
            self.ry
        };
        if let Some(s) = self.steps.get(pos) {
            if s.0 == x && s.1 <= y {
                return;
            }
        }
        let mut cur = x;
        let mut end = pos;
        let mut added = T::zero();
        while end < self.steps.len() && self.steps[end].1 >= y {
            let (sx, sy) = self.steps[end];
            added = added + (sx - cur) * (h - y);
            cur = sx;
            h = sy;
            end += 1;
        }
        let next_x = self.steps.get(end).map_or(self.rx, |s| s.0);
        added = added + (next_x - cur) * (h - y);
        self.area = self.area + added;
        self.steps.splice(pos..end, std::iter::once((x, y)));
    }
}

fn hv3<T: Copy + PartialOrd + Num>(pts: &mut [[T; 3]], r: [T; 3]) -> T {
    pts.sort_by(|a, b| a[2].partial_cmp(&b[2]).expect("comparable objectives"));
    let mut stair = Staircase::new(r[0], r[1]);
    let mut vol = T::zero();
    for i in 0..pts.len() {
        stair.insert(pts[i][0], pts[i][1]);
        let top = pts.get(i + 1).map_or(r[2], |p| p[2]);
        vol = vol + stair.area * (top - pts[i][2]);
    }
    vol
}

/// Volume of the region dominated by `points` and bounded by `reference`,
/// for four minimization objectives. Points not strictly better than the
/// reference in every objective are ignored.
pub fn hypervolume<T: Copy + PartialOrd + Num>(points: &[[T; 4]], reference: [T; 4]) -> T {
    let mut pts: Vec<[T; 4]> = points
        .iter()
        .filter(|p| p.iter().zip(&reference).all(|(a, r)| a < r))
        .copied()
        .collect();
    pts.sort_by(|a, b| a[3].partial_cmp(&b[3]).expect("comparable"));
    let r3 = [reference[0], reference[1], reference[2]];
    let mut vol = T::zero();
    let mut slice: Vec<[T; 3]> = Vec::with_capacity(pts.len());
    for i in 0..pts.len() {
        let top = pts.get(i + 1).map_or(reference[3], |p| p[3]);
        let depth = top - pts[i][3];
        if depth <= T::zero() {
            continue;
        }
        slice.clear();
        slice.extend(pts[..=i].iter().map(|p| [p[0], p[1], p[2]]));
        vol = vol + hv3(&mut slice, r3) * depth;
    }
    vol
}
