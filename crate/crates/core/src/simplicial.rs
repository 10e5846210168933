//! Kuhn simplices, simplex domains, piecewise-affine profiles, and the
//! simplicial approximation of Lipschitz profiles.
//!
//! A Kuhn simplex of scale l is determined by a base lattice point v and a
//! permutation of the axes; the m! simplices with a common base tile the
//! hypercube l·(v + [0,1]^m). Their shared-vertex structure makes linear
//! interpolation of 1-Lipschitz (l1) functions 1-Lipschitz again, which is
//! what the approximation algorithm exploits.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::height::LipschitzProfile;
use crate::lattice::ContinuumDomain;
use crate::rat::{self, Rat};

/// Identifier of a Kuhn simplex: base point `v` and axis permutation `perm`
/// (1-based axis indices, as serialized). The scale is carried by the
/// enclosing domain or passed explicitly.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SimplexId {
    pub v: Vec<i64>,
    pub perm: Vec<u8>,
}

impl SimplexId {
    pub fn dim(&self) -> usize {
        self.v.len()
    }

    fn check(&self) -> Result<()> {
        let m = self.dim();
        let mut seen = vec![false; m];
        if self.perm.len() != m {
            return Err(Error::InvalidInput("permutation length mismatch".into()));
        }
        for &p in &self.perm {
            if p == 0 || p as usize > m || seen[p as usize - 1] {
                return Err(Error::InvalidInput(format!(
                    "invalid permutation {:?}",
                    self.perm
                )));
            }
            seen[p as usize - 1] = true;
        }
        Ok(())
    }

    /// Vertex path in grid units (multiples of the scale): v, v + e_{perm(1)},
    /// v + e_{perm(1)} + e_{perm(2)}, ...
    pub fn vertex_units(&self) -> Vec<Vec<i64>> {
        let mut out = Vec::with_capacity(self.dim() + 1);
        let mut cur = self.v.clone();
        out.push(cur.clone());
        for &axis in &self.perm {
            cur[axis as usize - 1] += 1;
            out.push(cur.clone());
        }
        out
    }
}

/// Ordered vertices x(0)..x(m) of the simplex at the given scale.
pub fn simplex_vertices_at(id: &SimplexId, scale: Rat) -> Vec<Vec<Rat>> {
    id.vertex_units()
        .into_iter()
        .map(|u| u.iter().map(|&k| Rat::from_integer(k) * scale).collect())
        .collect()
}

/// Exact membership test for the closed simplex.
pub fn simplex_contains(id: &SimplexId, scale: Rat, x: &[Rat]) -> bool {
    let m = id.dim();
    debug_assert_eq!(x.len(), m);
    // y = x/scale - v must lie in [0,1]^m with coordinates ordered by perm
    let y: Vec<Rat> = (0..m)
        .map(|i| x[i] / scale - Rat::from_integer(id.v[i]))
        .collect();
    if y.iter().any(|c| c < &Rat::zero() || c > &Rat::one()) {
        return false;
    }
    for w in id.perm.windows(2) {
        let (a, b) = (w[0] as usize - 1, w[1] as usize - 1);
        if y[a] < y[b] {
            return false;
        }
    }
    true
}

/// Locates the simplex whose closure contains `w`: base = floor(w/scale),
/// permutation = rank order of the fractional parts (descending), ties broken
/// toward the smaller axis index so that points on shared faces resolve
/// deterministically.
pub fn simplex_containing(w: &[Rat], scale: Rat) -> SimplexId {
    let m = w.len();
    let scaled: Vec<Rat> = w.iter().map(|c| *c / scale).collect();
    let v: Vec<i64> = scaled.iter().map(rat::floor_rat).collect();
    let frac: Vec<Rat> = scaled
        .iter()
        .zip(&v)
        .map(|(s, &f)| *s - Rat::from_integer(f))
        .collect();
    let mut axes: Vec<u8> = (1..=m as u8).collect();
    axes.sort_by(|&a, &b| {
        frac[b as usize - 1]
            .cmp(&frac[a as usize - 1])
            .then(a.cmp(&b))
    });
    SimplexId { v, perm: axes }
}

/// Exact volume of a scale-l Kuhn simplex, l^m / m!.
pub fn simplex_volume(dim: usize, scale: Rat) -> Rat {
    let mut factorial = Rat::one();
    for k in 2..=dim as i64 {
        factorial *= Rat::from_integer(k);
    }
    scale.pow(dim as i32) / factorial
}

/// A connected finite union of Kuhn simplices of a common scale.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexDomain {
    scale: Rat,
    simplices: Vec<SimplexId>,
}

impl SimplexDomain {
    pub fn new(scale: Rat, mut simplices: Vec<SimplexId>) -> Result<Self> {
        if !scale.is_positive() {
            return Err(Error::InvalidInput("scale must be positive".into()));
        }
        if simplices.is_empty() {
            return Err(Error::NoSimplexFits(rat::fmt_rat(&scale)));
        }
        for s in &simplices {
            s.check()?;
        }
        simplices.sort();
        simplices.dedup();
        let domain = SimplexDomain { scale, simplices };
        if !domain.is_connected() {
            return Err(Error::DisconnectedMesh);
        }
        Ok(domain)
    }

    pub fn scale(&self) -> Rat {
        self.scale
    }

    pub fn dim(&self) -> usize {
        self.simplices[0].dim()
    }

    pub fn simplices(&self) -> &[SimplexId] {
        &self.simplices
    }

    /// Mesh vertices in grid units (multiply by scale for coordinates).
    pub fn vertex_units(&self) -> BTreeSet<Vec<i64>> {
        let mut out = BTreeSet::new();
        for s in &self.simplices {
            for v in s.vertex_units() {
                out.insert(v);
            }
        }
        out
    }

    pub fn vertex_coords(&self, unit: &[i64]) -> Vec<Rat> {
        unit.iter()
            .map(|&k| Rat::from_integer(k) * self.scale)
            .collect()
    }

    pub fn contains(&self, x: &[Rat]) -> bool {
        let located = simplex_containing(x, self.scale);
        if self.simplices.binary_search(&located).is_ok() {
            return true;
        }
        // On shared faces the located simplex may be a neighbor outside the
        // domain; fall back to scanning.
        self.simplices
            .iter()
            .any(|s| simplex_contains(s, self.scale, x))
    }

    /// Simplex of this domain containing x, preferring the canonical location.
    pub fn find_containing(&self, x: &[Rat]) -> Option<&SimplexId> {
        let located = simplex_containing(x, self.scale);
        if let Ok(i) = self.simplices.binary_search(&located) {
            return Some(&self.simplices[i]);
        }
        self.simplices
            .iter()
            .find(|s| simplex_contains(s, self.scale, x))
    }

    pub fn total_volume(&self) -> Rat {
        simplex_volume(self.dim(), self.scale) * Rat::from_integer(self.simplices.len() as i64)
    }

    /// Axis-aligned mesh edges (pairs of vertex units differing by one step).
    /// These are exactly the consecutive vertex pairs of the simplices, so a
    /// vertex function is feasible (per-simplex max-norm gradient <= 1) iff
    /// its increments along these edges are bounded by the scale.
    pub fn edges(&self) -> BTreeSet<(Vec<i64>, Vec<i64>)> {
        let mut out = BTreeSet::new();
        for s in &self.simplices {
            let path = s.vertex_units();
            for w in path.windows(2) {
                let (a, b) = (w[0].clone(), w[1].clone());
                out.insert(if a < b { (a, b) } else { (b, a) });
            }
        }
        out
    }

    fn is_connected(&self) -> bool {
        // simplices sharing at least one vertex are connected as closed sets
        let mut vertex_owner: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        for (i, s) in self.simplices.iter().enumerate() {
            for v in s.vertex_units() {
                vertex_owner.entry(v).or_default().push(i);
            }
        }
        let mut seen = vec![false; self.simplices.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut reached = 1;
        while let Some(i) = queue.pop_front() {
            for v in self.simplices[i].vertex_units() {
                for &j in &vertex_owner[&v] {
                    if !seen[j] {
                        seen[j] = true;
                        reached += 1;
                        queue.push_back(j);
                    }
                }
            }
        }
        reached == self.simplices.len()
    }
}

/// All scale-l Kuhn simplices contained in R (vertices and barycenter tested
/// exactly; for the convex shapes this is equivalent to full containment).
pub fn simplices_inside(r: &ContinuumDomain, scale: Rat) -> Result<SimplexDomain> {
    let m = r.dim;
    let (lo, hi) = r.bounding_box();
    let ranges: Vec<(i64, i64)> = lo
        .iter()
        .zip(&hi)
        .map(|(l, h)| {
            (
                rat::floor_rat(&(*l / scale)) - 1,
                rat::ceil_rat(&(*h / scale)) + 1,
            )
        })
        .collect();
    let perms = permutations(m);
    let mut found = Vec::new();
    let mut v: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    'cells: loop {
        for perm in &perms {
            let id = SimplexId {
                v: v.clone(),
                perm: perm.clone(),
            };
            let vertices = simplex_vertices_at(&id, scale);
            let all_in = vertices.iter().all(|x| r.contains(x));
            if all_in {
                let dim_plus_1 = Rat::from_integer(m as i64 + 1);
                let barycenter: Vec<Rat> = (0..m)
                    .map(|i| {
                        vertices
                            .iter()
                            .map(|x| x[i])
                            .fold(Rat::zero(), |a, b| a + b)
                            / dim_plus_1
                    })
                    .collect();
                if r.contains(&barycenter) {
                    found.push(id);
                }
            }
        }
        let mut axis = 0;
        loop {
            v[axis] += 1;
            if v[axis] <= ranges[axis].1 {
                break;
            }
            v[axis] = ranges[axis].0;
            axis += 1;
            if axis == m {
                break 'cells;
            }
        }
    }
    if found.is_empty() {
        return Err(Error::NoSimplexFits(rat::fmt_rat(&scale)));
    }
    SimplexDomain::new(scale, found)
}

pub fn permutations(m: usize) -> Vec<Vec<u8>> {
    let mut out = vec![vec![]];
    for _ in 0..m {
        let mut next = Vec::new();
        for p in &out {
            for axis in 1..=m as u8 {
                if !p.contains(&axis) {
                    let mut q = p.clone();
                    q.push(axis);
                    next.push(q);
                }
            }
        }
        out = next;
    }
    out
}

/// A piecewise-affine profile: rational values on the vertices of a simplex
/// domain, extended by linear interpolation. Per-simplex gradients have
/// max-norm at most 1 (checked at construction).
#[derive(Clone, Debug, PartialEq)]
pub struct PwaProfile {
    domain: SimplexDomain,
    values: BTreeMap<Vec<i64>, Rat>,
}

impl PwaProfile {
    pub fn new(domain: SimplexDomain, values: BTreeMap<Vec<i64>, Rat>) -> Result<Self> {
        for v in domain.vertex_units() {
            if !values.contains_key(&v) {
                return Err(Error::InvalidInput(format!(
                    "missing value at mesh vertex {v:?}"
                )));
            }
        }
        let profile = PwaProfile { domain, values };
        let lip = profile.max_grad_inf();
        if lip > Rat::one() {
            return Err(Error::InvalidInput(format!(
                "per-simplex gradient max-norm {} exceeds 1",
                rat::fmt_rat(&lip)
            )));
        }
        Ok(profile)
    }

    pub fn domain(&self) -> &SimplexDomain {
        &self.domain
    }

    pub fn vertex_values(&self) -> &BTreeMap<Vec<i64>, Rat> {
        &self.values
    }

    pub fn value_at_unit(&self, unit: &[i64]) -> Option<Rat> {
        self.values.get(unit).copied()
    }

    /// Exact gradient on one simplex, from the vertex path differences.
    pub fn gradient(&self, id: &SimplexId) -> Vec<Rat> {
        let path = id.vertex_units();
        let scale = self.domain.scale;
        let mut grad = vec![Rat::zero(); id.dim()];
        for (i, &axis) in id.perm.iter().enumerate() {
            let lo = self.values[&path[i]];
            let hi = self.values[&path[i + 1]];
            grad[axis as usize - 1] = (hi - lo) / scale;
        }
        grad
    }

    pub fn max_grad_inf(&self) -> Rat {
        let mut worst = Rat::zero();
        for s in &self.domain.simplices {
            for g in self.gradient(s) {
                let a = g.abs();
                if a > worst {
                    worst = a;
                }
            }
        }
        worst
    }

    /// Exact evaluation by affine extension on the containing simplex.
    pub fn eval(&self, x: &[Rat]) -> Option<Rat> {
        let id = self.domain.find_containing(x)?;
        let base_unit = &id.vertex_units()[0];
        let base = self.domain.vertex_coords(base_unit);
        let grad = self.gradient(id);
        let mut val = self.values[base_unit];
        for i in 0..x.len() {
            val += grad[i] * (x[i] - base[i]);
        }
        Some(val)
    }

    /// Adds a constant to every vertex value (gradients unchanged).
    pub fn shifted(&self, c: Rat) -> PwaProfile {
        let values = self.values.iter().map(|(k, v)| (k.clone(), *v + c)).collect();
        PwaProfile {
            domain: self.domain.clone(),
            values,
        }
    }
}

/// Interpolates a profile on the mesh: vertex values are exact evaluations of
/// `p`, so the result agrees with `p` on every mesh vertex.
pub fn interpolate_on_mesh(p: &LipschitzProfile, k: &SimplexDomain) -> Result<PwaProfile> {
    let mut values = BTreeMap::new();
    for unit in k.vertex_units() {
        let x = k.vertex_coords(&unit);
        let v = p.eval_exact(&x).ok_or(Error::MeshOutsideDomain)?;
        values.insert(unit, v);
    }
    PwaProfile::new(k.clone(), values)
}

/// Measured conclusions of one simplicial approximation attempt.
#[derive(Clone, Debug, Serialize)]
pub struct ApproxReport {
    /// |R \ K| when |R| is exactly known, else None.
    pub uncovered_volume: Option<f64>,
    /// Sampled bound on d_H(K, R) (l1).
    pub hausdorff_gap: f64,
    /// max over vertices and a pitch scale/8 sample grid of |h_K - p|.
    pub max_value_gap: f64,
    /// volume fraction of K where |grad h_K - grad p|_2 >= eps.
    pub bad_gradient_fraction: f64,
    pub simplex_count: usize,
    #[serde(with = "rat::rat_string")]
    pub scale: Rat,
}

impl ApproxReport {
    /// Conclusions (a)-(c) at tolerance eps: small uncovered volume and
    /// Hausdorff gap, values within eps*scale/2, gradient agreement off a
    /// small-volume set.
    pub fn passes(&self, eps: f64, scale: f64) -> bool {
        let vol_ok = self.uncovered_volume.map_or(true, |v| v < eps) && self.hausdorff_gap < eps;
        vol_ok && self.max_value_gap < 0.5 * eps * scale && self.bad_gradient_fraction < eps
    }
}

/// One attempt at the simplicial approximation: mesh all simplices inside R,
/// interpolate, and measure the three conclusions.
pub fn rademacher_approx(
    p: &LipschitzProfile,
    r: &ContinuumDomain,
    eps: Rat,
    scale: Rat,
) -> Result<(SimplexDomain, PwaProfile, ApproxReport)> {
    let mesh = simplices_inside(r, scale)?;
    let pwa = interpolate_on_mesh(p, &mesh)?;

    let covered = mesh.total_volume();
    let uncovered_volume = r
        .volume()
        .map(|total| rat::rat_to_f64(&(total - covered)));

    // Hausdorff gap: sample R, bound the distance to K by the nearest mesh
    // vertex (the min over a subset of K upper-bounds the true distance).
    let pitch = scale / Rat::from_integer(4);
    let vertices: Vec<Vec<Rat>> = mesh
        .vertex_units()
        .iter()
        .map(|u| mesh.vertex_coords(u))
        .collect();
    let mut hausdorff = Rat::zero();
    for x in r.grid_samples(pitch) {
        if mesh.contains(&x) {
            continue;
        }
        let mut best: Option<Rat> = None;
        for v in &vertices {
            let d = rat::l1_dist(&x, v);
            if best.as_ref().map_or(true, |b| d < *b) {
                best = Some(d);
            }
        }
        if let Some(b) = best {
            if b > hausdorff {
                hausdorff = b;
            }
        }
    }

    // (b) value gap at mesh vertices plus a pitch scale/8 grid inside K
    let mut value_gap = Rat::zero();
    let fine = scale / Rat::from_integer(8);
    let mut sample_points: Vec<Vec<Rat>> = vertices.clone();
    for x in r.grid_samples(fine) {
        if mesh.contains(&x) {
            sample_points.push(x);
        }
    }
    for x in &sample_points {
        let (Some(a), Some(b)) = (pwa.eval(x), p.eval_exact(x)) else {
            continue;
        };
        let gap = (a - b).abs();
        if gap > value_gap {
            value_gap = gap;
        }
    }

    // (c) per-simplex gradient agreement at barycenters, exact l2 comparison
    let eps_sq = eps * eps;
    let mut bad = 0usize;
    for s in mesh.simplices() {
        let verts = simplex_vertices_at(s, scale);
        let dim_plus_1 = Rat::from_integer(s.dim() as i64 + 1);
        let bary: Vec<Rat> = (0..s.dim())
            .map(|i| verts.iter().map(|x| x[i]).fold(Rat::zero(), |a, b| a + b) / dim_plus_1)
            .collect();
        let gp = p.gradient_exact(&bary).ok_or(Error::UnsupportedProfile)?;
        let gk = pwa.gradient(s);
        let dist_sq: Rat = gk
            .iter()
            .zip(&gp)
            .map(|(a, b)| (*a - *b) * (*a - *b))
            .fold(Rat::zero(), |acc, d| acc + d);
        if dist_sq >= eps_sq {
            bad += 1;
        }
    }
    let report = ApproxReport {
        uncovered_volume,
        hausdorff_gap: rat::rat_to_f64(&hausdorff),
        max_value_gap: rat::rat_to_f64(&value_gap),
        bad_gradient_fraction: bad as f64 / mesh.simplices().len() as f64,
        simplex_count: mesh.simplices().len(),
        scale,
    };
    Ok((mesh, pwa, report))
}

/// Outcome of a geometric sweep over candidate scales.
pub struct SweepOutcome {
    pub passing: Option<(SimplexDomain, PwaProfile, ApproxReport)>,
    pub attempts: Vec<ApproxReport>,
}

/// Tries the scales in order and returns the first one whose report passes.
/// An exhausted sweep is inconclusive, not a failure.
pub fn rademacher_sweep(
    p: &LipschitzProfile,
    r: &ContinuumDomain,
    eps: Rat,
    scales: &[Rat],
) -> Result<SweepOutcome> {
    let eps_f = rat::rat_to_f64(&eps);
    let mut attempts = Vec::new();
    for &scale in scales {
        let (mesh, pwa, report) = rademacher_approx(p, r, eps, scale)?;
        let ok = report.passes(eps_f, rat::rat_to_f64(&scale));
        attempts.push(report.clone());
        if ok {
            return Ok(SweepOutcome {
                passing: Some((mesh, pwa, report)),
                attempts,
            });
        }
    }
    Ok(SweepOutcome {
        passing: None,
        attempts,
    })
}

/// Normalized macroscopic entropy of a piecewise-affine profile:
/// (1/|K|) sum_i vol(D_i) ent(s_i); all simplices share the volume l^m/m!.
pub fn macro_entropy(
    h: &PwaProfile,
    model: &crate::enumeration::SurfaceTensionModel,
) -> Result<f64> {
    let mut total = 0.0;
    for s in h.domain().simplices() {
        let grad = h.gradient(s);
        let gf: Vec<f64> = grad.iter().map(rat::rat_to_f64).collect();
        total += model.eval(&gf)?;
    }
    Ok(total / h.domain().simplices().len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rat_int};

    #[test]
    fn locate_matches_rank_order() {
        // fractional parts (0.1, 0.5, 0.3) rank-order to axes (2, 3, 1)
        let w = vec![rat(11, 10), rat(-1, 2), rat(23, 10)];
        let id = simplex_containing(&w, rat_int(1));
        assert_eq!(id.v, vec![1, -1, 2]);
        assert_eq!(id.perm, vec![2, 3, 1]);

        let id2 = simplex_containing(&[rat(7, 10), rat(2, 10)], rat_int(1));
        assert_eq!(id2.v, vec![0, 0]);
        assert_eq!(id2.perm, vec![1, 2]);

        // tie on a shared face resolves toward the smaller index
        let id3 = simplex_containing(&[rat(1, 2), rat(1, 2)], rat_int(1));
        assert_eq!(id3.perm, vec![1, 2]);
    }

    #[test]
    fn vertex_paths() {
        let id = SimplexId {
            v: vec![0, 0],
            perm: vec![2, 1],
        };
        let verts = simplex_vertices_at(&id, rat_int(1));
        assert_eq!(
            verts,
            vec![
                vec![rat_int(0), rat_int(0)],
                vec![rat_int(0), rat_int(1)],
                vec![rat_int(1), rat_int(1)],
            ]
        );
        let id2 = SimplexId {
            v: vec![0, 0],
            perm: vec![1, 2],
        };
        let verts2 = simplex_vertices_at(&id2, rat_int(1));
        assert_eq!(
            verts2,
            vec![
                vec![rat_int(0), rat_int(0)],
                vec![rat_int(1), rat_int(0)],
                vec![rat_int(1), rat_int(1)],
            ]
        );
    }

    #[test]
    fn consecutive_differences_are_basis_vectors() {
        for m in [2usize, 3] {
            for perm in permutations(m) {
                for scale in [rat_int(1), rat(1, 2)] {
                    let id = SimplexId {
                        v: vec![1, -2, 3][..m].to_vec(),
                        perm: perm.clone(),
                    };
                    let verts = simplex_vertices_at(&id, scale);
                    for (i, w) in verts.windows(2).enumerate() {
                        let diff: Vec<Rat> =
                            w[1].iter().zip(&w[0]).map(|(a, b)| *a - *b).collect();
                        for (axis, d) in diff.iter().enumerate() {
                            let expect = if axis == id.perm[i] as usize - 1 {
                                scale
                            } else {
                                Rat::zero()
                            };
                            assert_eq!(*d, expect);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn tiling_volume_identity() {
        for m in [2usize, 3] {
            let total: Rat = permutations(m)
                .into_iter()
                .map(|perm| {
                    simplex_volume(m, rat_int(1))
                        * Rat::from_integer(i64::from(
                            SimplexId {
                                v: vec![0; m],
                                perm,
                            }
                            .check()
                            .is_ok(),
                        ))
                })
                .sum();
            assert_eq!(total, rat_int(1));
        }
    }

    #[test]
    fn unit_square_meshes() {
        let r = ContinuumDomain::unit_box(2);
        let k1 = simplices_inside(&r, rat_int(1)).unwrap();
        assert_eq!(k1.simplices().len(), 2);
        let k2 = simplices_inside(&r, rat(1, 2)).unwrap();
        assert_eq!(k2.simplices().len(), 8);
        assert_eq!(k2.total_volume(), rat_int(1));
    }

    #[test]
    fn min_profile_reproduced_exactly() {
        let r = ContinuumDomain::unit_box(2);
        let k = simplices_inside(&r, rat_int(1)).unwrap();
        let p = LipschitzProfile::min_coords();
        let pwa = interpolate_on_mesh(&p, &k).unwrap();
        // min(x,y) is affine on each Kuhn triangle: y below the diagonal, x above
        for (x, y) in [(rat(1, 3), rat(1, 5)), (rat(1, 7), rat(2, 3)), (rat(1, 2), rat(1, 2))] {
            let got = pwa.eval(&[x, y]).unwrap();
            assert_eq!(got, x.min(y));
        }
        assert_eq!(pwa.max_grad_inf(), rat_int(1));
    }
}
