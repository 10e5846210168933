//! Continuum domains, their lattice discretizations, boundaries, and parity.

use std::collections::{HashMap, VecDeque};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rat::{self, Rat};
use crate::simplicial::SimplexId;

/// A point of Z^m.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint(pub Vec<i64>);

impl LatticePoint {
    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Coordinate-sum parity: 0 (even) or 1 (odd).
    pub fn parity(&self) -> u8 {
        (self.0.iter().sum::<i64>().rem_euclid(2)) as u8
    }

    pub fn l1_dist(&self, other: &LatticePoint) -> i64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }

    /// The point scaled by 1/n, as exact rationals.
    pub fn scaled(&self, n: u32) -> Vec<Rat> {
        self.0.iter().map(|&c| Rat::new(c, n as i64)).collect()
    }
}

impl std::fmt::Debug for LatticePoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Half-space a·x <= b with rational coefficients.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct HalfSpace {
    #[serde(with = "rat::rat_vec_string")]
    pub a: Vec<Rat>,
    #[serde(with = "rat::rat_string")]
    pub b: Rat,
}

impl HalfSpace {
    pub fn contains(&self, x: &[Rat]) -> bool {
        let dot: Rat = self.a.iter().zip(x).map(|(a, x)| *a * *x).sum();
        dot <= self.b
    }

    pub fn is_tight(&self, x: &[Rat]) -> bool {
        let dot: Rat = self.a.iter().zip(x).map(|(a, x)| *a * *x).sum();
        dot == self.b
    }
}

/// Supported continuum shapes. All membership tests are exact.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum Shape {
    Box {
        #[serde(with = "rat::rat_vec_string")]
        lo: Vec<Rat>,
        #[serde(with = "rat::rat_vec_string")]
        hi: Vec<Rat>,
    },
    Polytope { halfspaces: Vec<HalfSpace> },
    SimplexUnion {
        #[serde(with = "rat::rat_string")]
        scale: Rat,
        simplices: Vec<SimplexId>,
    },
}

/// A compact, connected region R equal to the closure of its interior.
///
/// The supported shapes guarantee those properties by construction; rational
/// coordinates keep membership tests exact.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ContinuumDomain {
    pub dim: usize,
    pub shape: Shape,
}

impl ContinuumDomain {
    pub fn unit_box(dim: usize) -> Self {
        ContinuumDomain {
            dim,
            shape: Shape::Box {
                lo: vec![Rat::zero(); dim],
                hi: vec![Rat::one(); dim],
            },
        }
    }

    pub fn new_box(lo: Vec<Rat>, hi: Vec<Rat>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::InvalidInput("box bounds of mismatched dimension".into()));
        }
        if lo.iter().zip(&hi).any(|(l, h)| l >= h) {
            return Err(Error::InvalidInput("box must have positive extent".into()));
        }
        Ok(ContinuumDomain {
            dim: lo.len(),
            shape: Shape::Box { lo, hi },
        })
    }

    pub fn polytope(dim: usize, halfspaces: Vec<HalfSpace>) -> Result<Self> {
        if halfspaces.iter().any(|h| h.a.len() != dim) {
            return Err(Error::InvalidInput("half-space dimension mismatch".into()));
        }
        Ok(ContinuumDomain {
            dim,
            shape: Shape::Polytope { halfspaces },
        })
    }

    /// The standard simplex {x_i >= 0, sum x_i <= 1} as a polytope.
    pub fn unit_simplex(dim: usize) -> Self {
        let mut halfspaces = Vec::with_capacity(dim + 1);
        for i in 0..dim {
            let mut a = vec![Rat::zero(); dim];
            a[i] = -Rat::one();
            halfspaces.push(HalfSpace { a, b: Rat::zero() });
        }
        halfspaces.push(HalfSpace {
            a: vec![Rat::one(); dim],
            b: Rat::one(),
        });
        ContinuumDomain {
            dim,
            shape: Shape::Polytope { halfspaces },
        }
    }

    /// The l1 ball {|x|_1 <= radius}, an "aztec diamond" shape in 2D.
    pub fn l1_ball(dim: usize, radius: Rat) -> Self {
        let mut halfspaces = Vec::new();
        for signs in 0..(1u32 << dim) {
            let a: Vec<Rat> = (0..dim)
                .map(|i| {
                    if signs >> i & 1 == 1 {
                        -Rat::one()
                    } else {
                        Rat::one()
                    }
                })
                .collect();
            halfspaces.push(HalfSpace { a, b: radius });
        }
        ContinuumDomain {
            dim,
            shape: Shape::Polytope { halfspaces },
        }
    }

    pub fn contains(&self, x: &[Rat]) -> bool {
        debug_assert_eq!(x.len(), self.dim);
        match &self.shape {
            Shape::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(xi, (l, h))| l <= xi && xi <= h),
            Shape::Polytope { halfspaces } => halfspaces.iter().all(|h| h.contains(x)),
            Shape::SimplexUnion { scale, simplices } => simplices
                .iter()
                .any(|id| crate::simplicial::simplex_contains(id, *scale, x)),
        }
    }

    /// Whether x lies on the topological boundary of the shape.
    pub fn on_boundary(&self, x: &[Rat]) -> bool {
        if !self.contains(x) {
            return false;
        }
        match &self.shape {
            Shape::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .any(|(xi, (l, h))| xi == l || xi == h),
            Shape::Polytope { halfspaces } => halfspaces.iter().any(|h| h.is_tight(x)),
            // For simplex unions, boundary sampling goes through the face
            // structure instead; treat membership conservatively here.
            Shape::SimplexUnion { .. } => false,
        }
    }

    /// Axis-aligned rational bounding box.
    pub fn bounding_box(&self) -> (Vec<Rat>, Vec<Rat>) {
        match &self.shape {
            Shape::Box { lo, hi } => (lo.clone(), hi.clone()),
            Shape::Polytope { halfspaces } => {
                // Exact LP would be overkill: all shipped polytopes are
                // bounded intersections of axis and diagonal half-spaces, so a
                // coarse bound from single-coordinate half-spaces plus the l1
                // ones suffices. Fall back to scanning tight constraints.
                let mut lo = vec![Rat::from_integer(i32::MIN as i64); self.dim];
                let mut hi = vec![Rat::from_integer(i32::MAX as i64); self.dim];
                let mut radius: Option<Rat> = None;
                for h in halfspaces {
                    let nonzero: Vec<usize> = (0..self.dim).filter(|&i| !h.a[i].is_zero()).collect();
                    if nonzero.len() == 1 {
                        let i = nonzero[0];
                        let bound = h.b / h.a[i];
                        if h.a[i].is_positive() {
                            if bound < hi[i] {
                                hi[i] = bound;
                            }
                        } else if bound > lo[i] {
                            lo[i] = bound;
                        }
                    } else if h.a.iter().all(|c| c.abs() == Rat::one()) {
                        let r = h.b;
                        radius = Some(match radius {
                            Some(cur) if cur < r => cur,
                            _ => r,
                        });
                    }
                }
                if let Some(r) = radius {
                    for i in 0..self.dim {
                        if lo[i] < -r {
                            lo[i] = -r;
                        }
                        if hi[i] > r {
                            hi[i] = r;
                        }
                    }
                }
                (lo, hi)
            }
            Shape::SimplexUnion { scale, simplices } => {
                let mut lo = vec![Rat::from_integer(i64::MAX / 4); self.dim];
                let mut hi = vec![Rat::from_integer(i64::MIN / 4); self.dim];
                for id in simplices {
                    for v in crate::simplicial::simplex_vertices_at(id, *scale) {
                        for i in 0..self.dim {
                            if v[i] < lo[i] {
                                lo[i] = v[i];
                            }
                            if v[i] > hi[i] {
                                hi[i] = v[i];
                            }
                        }
                    }
                }
                (lo, hi)
            }
        }
    }

    /// Exact volume where the shape admits one directly (boxes and simplex
    /// unions); None for general polytopes.
    pub fn volume(&self) -> Option<Rat> {
        match &self.shape {
            Shape::Box { lo, hi } => Some(
                lo.iter()
                    .zip(hi)
                    .map(|(l, h)| *h - *l)
                    .fold(Rat::one(), |a, b| a * b),
            ),
            Shape::SimplexUnion { scale, simplices } => {
                let m = self.dim as u32;
                let mut factorial = Rat::one();
                for k in 2..=m as i64 {
                    factorial *= Rat::from_integer(k);
                }
                let vol_one = scale.pow(m as i32) / factorial;
                Some(vol_one * Rat::from_integer(simplices.len() as i64))
            }
            Shape::Polytope { .. } => None,
        }
    }

    /// All points of the grid pitch·Z^m inside the domain.
    pub fn grid_samples(&self, pitch: Rat) -> Vec<Vec<Rat>> {
        let (lo, hi) = self.bounding_box();
        let ranges: Vec<(i64, i64)> = lo
            .iter()
            .zip(&hi)
            .map(|(l, h)| (rat::ceil_rat(&(*l / pitch)), rat::floor_rat(&(*h / pitch))))
            .collect();
        let mut out = Vec::new();
        let mut idx: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        if ranges.iter().any(|r| r.0 > r.1) {
            return out;
        }
        loop {
            let x: Vec<Rat> = idx.iter().map(|&k| Rat::from_integer(k) * pitch).collect();
            if self.contains(&x) {
                out.push(x);
            }
            let mut axis = 0;
            loop {
                idx[axis] += 1;
                if idx[axis] <= ranges[axis].1 {
                    break;
                }
                idx[axis] = ranges[axis].0;
                axis += 1;
                if axis == self.dim {
                    return out;
                }
            }
        }
    }

    /// Sample points on the boundary of the shape at the given pitch: grid
    /// points on each facet hyperplane, solved exactly for one coordinate.
    pub fn boundary_samples(&self, pitch: Rat) -> Vec<Vec<Rat>> {
        let mut out: Vec<Vec<Rat>> = self
            .grid_samples(pitch)
            .into_iter()
            .filter(|x| self.on_boundary(x))
            .collect();
        if let Shape::Polytope { halfspaces } = &self.shape {
            // Facets need not be axis-aligned; solve a·x = b for one
            // coordinate with the others on the sample grid.
            let (lo, hi) = self.bounding_box();
            for h in halfspaces {
                let Some(solve_axis) = (0..self.dim).find(|&i| !h.a[i].is_zero()) else {
                    continue;
                };
                let free: Vec<usize> = (0..self.dim).filter(|&i| i != solve_axis).collect();
                let ranges: Vec<(i64, i64)> = free
                    .iter()
                    .map(|&i| {
                        (
                            rat::ceil_rat(&(lo[i] / pitch)),
                            rat::floor_rat(&(hi[i] / pitch)),
                        )
                    })
                    .collect();
                if ranges.iter().any(|r| r.0 > r.1) {
                    continue;
                }
                let mut idx: Vec<i64> = ranges.iter().map(|r| r.0).collect();
                'outer: loop {
                    let mut x = vec![Rat::zero(); self.dim];
                    for (k, &i) in free.iter().enumerate() {
                        x[i] = Rat::from_integer(idx[k]) * pitch;
                    }
                    let partial: Rat = free.iter().map(|&i| h.a[i] * x[i]).sum();
                    x[solve_axis] = (h.b - partial) / h.a[solve_axis];
                    if self.contains(&x) {
                        out.push(x);
                    }
                    if free.is_empty() {
                        break;
                    }
                    let mut axis = 0;
                    loop {
                        idx[axis] += 1;
                        if idx[axis] <= ranges[axis].1 {
                            break;
                        }
                        idx[axis] = ranges[axis].0;
                        axis += 1;
                        if axis == free.len() {
                            break 'outer;
                        }
                    }
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }
}

/// A finite lattice domain R_n at scale n with its inner boundary.
///
/// Points are stored sorted lexicographically; that order doubles as the
/// sweep order of the counting engine.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscreteDomain {
    n: u32,
    dim: usize,
    points: Vec<LatticePoint>,
    index: HashMap<Vec<i64>, usize>,
    boundary: Vec<bool>,
}

impl DiscreteDomain {
    /// Builds from an explicit point set; computes the inner boundary and
    /// rejects empty or disconnected sets.
    pub fn from_points(n: u32, dim: usize, mut points: Vec<LatticePoint>) -> Result<Self> {
        points.sort();
        points.dedup();
        if points.is_empty() {
            return Err(Error::EmptyDiscretization(n));
        }
        let index: HashMap<Vec<i64>, usize> = points
            .iter()
            .enumerate()
            .map(|(i, p)| (p.0.clone(), i))
            .collect();
        // inner boundary: a lattice neighbor falls outside the set
        let mut boundary = vec![false; points.len()];
        for (i, p) in points.iter().enumerate() {
            let mut nbrs_inside = 0usize;
            for axis in 0..dim {
                for step in [-1i64, 1] {
                    let mut q = p.0.clone();
                    q[axis] += step;
                    if index.contains_key(&q) {
                        nbrs_inside += 1;
                    }
                }
            }
            boundary[i] = nbrs_inside < 2 * dim;
        }
        let domain = DiscreteDomain {
            n,
            dim,
            points,
            index,
            boundary,
        };
        let components = domain.component_count();
        if components != 1 {
            return Err(Error::DisconnectedDiscretization { n, components });
        }
        Ok(domain)
    }

    /// The cube [0,n)^m ∩ Z^m used for the local surface tension.
    pub fn cube(dim: usize, n: u32) -> Self {
        assert!(n >= 1);
        let mut points = Vec::with_capacity((n as usize).pow(dim as u32));
        let mut idx = vec![0i64; dim];
        loop {
            points.push(LatticePoint(idx.clone()));
            let mut axis = dim;
            loop {
                if axis == 0 {
                    points.sort();
                    let index = points
                        .iter()
                        .enumerate()
                        .map(|(i, p)| (p.0.clone(), i))
                        .collect();
                    let boundary = points
                        .iter()
                        .map(|p| p.0.iter().any(|&c| c == 0 || c == n as i64 - 1))
                        .collect();
                    return DiscreteDomain {
                        n,
                        dim,
                        points,
                        index,
                        boundary,
                    };
                }
                axis -= 1;
                idx[axis] += 1;
                if idx[axis] < n as i64 {
                    break;
                }
                idx[axis] = 0;
            }
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn site_count(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    pub fn position(&self, coords: &[i64]) -> Option<usize> {
        self.index.get(coords).copied()
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        self.boundary[idx]
    }

    pub fn boundary_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.points.len()).filter(move |&i| self.boundary[i])
    }

    pub fn interior_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.points.len()).filter(move |&i| !self.boundary[i])
    }

    /// In-domain neighbor indices of the site, in axis order (-e1, +e1, ...).
    pub fn neighbor_indices(&self, idx: usize) -> Vec<usize> {
        let p = &self.points[idx];
        let mut out = Vec::with_capacity(2 * self.dim);
        for axis in 0..self.dim {
            for step in [-1i64, 1] {
                let mut q = p.0.clone();
                q[axis] += step;
                if let Some(&j) = self.index.get(&q) {
                    out.push(j);
                }
            }
        }
        out
    }

    fn component_count(&self) -> usize {
        let mut seen = vec![false; self.points.len()];
        let mut components = 0;
        for start in 0..self.points.len() {
            if seen[start] {
                continue;
            }
            components += 1;
            let mut queue = VecDeque::from([start]);
            seen[start] = true;
            while let Some(i) = queue.pop_front() {
                for j in self.neighbor_indices(i) {
                    if !seen[j] {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        components
    }

    /// CSV export: one row per point, `z1,...,zm,is_boundary`.
    pub fn to_csv(&self, header_comment: &str) -> String {
        let mut out = String::new();
        if !header_comment.is_empty() {
            out.push_str(header_comment);
            out.push('\n');
        }
        let cols: Vec<String> = (1..=self.dim).map(|i| format!("z{i}")).collect();
        out.push_str(&cols.join(","));
        out.push_str(",is_boundary\n");
        for (i, p) in self.points.iter().enumerate() {
            let coords: Vec<String> = p.0.iter().map(|c| c.to_string()).collect();
            out.push_str(&coords.join(","));
            out.push_str(if self.boundary[i] { ",1\n" } else { ",0\n" });
        }
        out
    }
}

/// R_n := { z in Z^m | z/n in R }, per-point membership tested exactly.
pub fn discretize(r: &ContinuumDomain, n: u32) -> Result<DiscreteDomain> {
    assert!(n >= 1, "scale must be positive");
    let (lo, hi) = r.bounding_box();
    let n_rat = Rat::from_integer(n as i64);
    let ranges: Vec<(i64, i64)> = lo
        .iter()
        .zip(&hi)
        .map(|(l, h)| (rat::ceil_rat(&(*l * n_rat)), rat::floor_rat(&(*h * n_rat))))
        .collect();
    if ranges.iter().any(|r| r.0 > r.1) {
        return Err(Error::EmptyDiscretization(n));
    }
    let mut points = Vec::new();
    let mut idx: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    loop {
        let x: Vec<Rat> = idx.iter().map(|&k| Rat::new(k, n as i64)).collect();
        if r.contains(&x) {
            points.push(LatticePoint(idx.clone()));
        }
        let mut axis = 0;
        loop {
            idx[axis] += 1;
            if idx[axis] <= ranges[axis].1 {
                break;
            }
            idx[axis] = ranges[axis].0;
            axis += 1;
            if axis == r.dim {
                if points.is_empty() {
                    return Err(Error::EmptyDiscretization(n));
                }
                return DiscreteDomain::from_points(n, r.dim, points);
            }
        }
    }
}

/// Sampled value of the Hausdorff gap d_H((1/n)R_n, R) in the l1 norm.
///
/// Since (1/n)R_n ⊆ R, only the direction sup_{x in R} dist(x, (1/n)R_n)
/// contributes. That supremum is evaluated exactly on a sample grid of the
/// given pitch (default 1/(2n)); for axis-aligned boxes the l1 distance to the
/// full scaled lattice is separable across axes and attains its maximum on
/// that grid, so the sampled value is the exact gap there.
pub fn hausdorff_gap(r: &ContinuumDomain, d: &DiscreteDomain, pitch: Option<Rat>) -> Rat {
    let pitch = pitch.unwrap_or_else(|| Rat::new(1, 2 * d.n() as i64));
    let mut worst = Rat::zero();
    for x in r.grid_samples(pitch) {
        let mut best: Option<Rat> = None;
        for p in d.points() {
            let dist = rat::l1_dist(&x, &p.scaled(d.n()));
            if best.as_ref().map_or(true, |b| dist < *b) {
                best = Some(dist);
            }
        }
        if let Some(b) = best {
            if b > worst {
                worst = b;
            }
        }
    }
    worst
}

/// The (at most 2m) in-domain lattice neighbors of z, in axis order.
pub fn graph_neighbors(z: &LatticePoint, d: &DiscreteDomain) -> Result<Vec<LatticePoint>> {
    let idx = d
        .position(z.coords())
        .ok_or_else(|| Error::PointOutsideDomain(z.0.clone()))?;
    Ok(d.neighbor_indices(idx)
        .into_iter()
        .map(|j| d.points()[j].clone())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rat_int};

    #[test]
    fn discretize_unit_interval() {
        let r = ContinuumDomain::unit_box(1);
        let d = discretize(&r, 4).unwrap();
        let coords: Vec<i64> = d.points().iter().map(|p| p.0[0]).collect();
        assert_eq!(coords, vec![0, 1, 2, 3, 4]);
        let boundary: Vec<i64> = d
            .boundary_indices()
            .map(|i| d.points()[i].0[0])
            .collect();
        assert_eq!(boundary, vec![0, 4]);
    }

    #[test]
    fn discretize_unit_square() {
        let r = ContinuumDomain::unit_box(2);
        let d = discretize(&r, 2).unwrap();
        assert_eq!(d.site_count(), 9);
        assert_eq!(d.boundary_indices().count(), 8);
        let interior: Vec<&LatticePoint> =
            d.interior_indices().map(|i| &d.points()[i]).collect();
        assert_eq!(interior.len(), 1);
        assert_eq!(interior[0].coords(), &[1, 1]);
    }

    #[test]
    fn discretize_simplex() {
        // {x >= 0, y >= 0, x + y <= 1} at n = 3: the 10 points with i+j <= 3
        let r = ContinuumDomain::unit_simplex(2);
        let d = discretize(&r, 3).unwrap();
        assert_eq!(d.site_count(), 10);
        for p in d.points() {
            assert!(p.0[0] >= 0 && p.0[1] >= 0 && p.0[0] + p.0[1] <= 3);
        }
    }

    #[test]
    fn boundary_neighbor_counts() {
        let r = ContinuumDomain::unit_box(2);
        let d = discretize(&r, 3).unwrap();
        for i in 0..d.site_count() {
            let nbrs = d.neighbor_indices(i).len();
            if d.is_boundary(i) {
                assert!(nbrs < 4);
            } else {
                assert_eq!(nbrs, 4);
            }
        }
    }

    #[test]
    fn corner_neighbors_in_order() {
        let r = ContinuumDomain::new_box(vec![rat_int(0); 2], vec![rat_int(2); 2]).unwrap();
        let d = discretize(&r, 1).unwrap();
        let nbrs = graph_neighbors(&LatticePoint(vec![0, 0]), &d).unwrap();
        assert_eq!(
            nbrs,
            vec![LatticePoint(vec![1, 0]), LatticePoint(vec![0, 1])]
        );
        let center = graph_neighbors(&LatticePoint(vec![1, 1]), &d).unwrap();
        assert_eq!(center.len(), 4);
        assert!(graph_neighbors(&LatticePoint(vec![5, 5]), &d).is_err());
    }

    #[test]
    fn one_dim_interior_neighbors() {
        let r = ContinuumDomain::unit_box(1);
        let d = discretize(&r, 4).unwrap();
        let nbrs = graph_neighbors(&LatticePoint(vec![2]), &d).unwrap();
        assert_eq!(nbrs, vec![LatticePoint(vec![1]), LatticePoint(vec![3])]);
    }

    #[test]
    fn parity_is_bipartite() {
        let r = ContinuumDomain::unit_box(2);
        let d = discretize(&r, 3).unwrap();
        for i in 0..d.site_count() {
            for j in d.neighbor_indices(i) {
                assert_ne!(d.points()[i].parity(), d.points()[j].parity());
            }
        }
    }

    #[test]
    fn hausdorff_gap_values() {
        // 1D at n = 4: farthest point of [0,1] from the scaled lattice is a
        // ridge midpoint such as 1/8, which lies on the sample grid.
        let r = ContinuumDomain::unit_box(1);
        let d = discretize(&r, 4).unwrap();
        let gap = hausdorff_gap(&r, &d, None);
        assert_eq!(gap, rat(1, 8));
        // bounded by the sampling pitch
        assert!(gap <= rat(1, 8));

        let r2 = ContinuumDomain::unit_box(2);
        let d2 = discretize(&r2, 2).unwrap();
        let gap2 = hausdorff_gap(&r2, &d2, None);
        assert!(gap2 <= rat(1, 2));

        let rs = ContinuumDomain::unit_simplex(2);
        let ds = discretize(&rs, 1).unwrap();
        let gaps = hausdorff_gap(&rs, &ds, None);
        assert!(gaps <= rat_int(1));
    }

    #[test]
    fn hausdorff_gap_decreases_with_n() {
        for r in [ContinuumDomain::unit_box(1), ContinuumDomain::unit_box(2)] {
            let mut last: Option<Rat> = None;
            for n in [2u32, 4, 8, 16] {
                let d = discretize(&r, n).unwrap();
                let gap = hausdorff_gap(&r, &d, None);
                if let Some(prev) = last {
                    assert!(gap <= prev, "gap grew from {prev} to {gap} at n={n}");
                }
                last = Some(gap);
            }
        }
    }

    #[test]
    fn disconnected_rejected() {
        let pts = vec![LatticePoint(vec![0]), LatticePoint(vec![2])];
        match DiscreteDomain::from_points(1, 1, pts) {
            Err(Error::DisconnectedDiscretization { components, .. }) => {
                assert_eq!(components, 2)
            }
            other => panic!("expected disconnected error, got {other:?}"),
        }
    }

    #[test]
    fn cube_domain_layout() {
        let q = DiscreteDomain::cube(2, 3);
        assert_eq!(q.site_count(), 9);
        assert_eq!(q.boundary_indices().count(), 8);
        let q1 = DiscreteDomain::cube(1, 4);
        let coords: Vec<i64> = q1.points().iter().map(|p| p.0[0]).collect();
        assert_eq!(coords, vec![0, 1, 2, 3]);
    }
}
