//! Height functions, parity rounding, affine height functions, and Lipschitz
//! profiles (the continuum-scale objects height functions converge to).

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::lattice::{hausdorff_gap, ContinuumDomain, DiscreteDomain, LatticePoint};
use crate::rat::{self, Rat};
use crate::simplicial::{PwaProfile, SimplexDomain, SimplexId};

/// Rounds y to the closest integer of the same parity as z; an exact tie
/// (y an integer of the opposite parity) rounds up to y + 1. The tie rule is
/// load-bearing: rounding must be consistent across sites.
pub fn parity_round(y: Rat, z: &LatticePoint) -> i64 {
    parity_round_to(y, z.parity())
}

pub fn parity_round_to(y: Rat, parity: u8) -> i64 {
    let floor = rat::floor_rat(&y);
    // lower candidate of the required parity
    let lo = if floor.rem_euclid(2) == parity as i64 {
        floor
    } else {
        floor - 1
    };
    let hi = lo + 2;
    let d_lo = (y - Rat::from_integer(lo)).abs();
    let d_hi = (Rat::from_integer(hi) - y).abs();
    if d_lo < d_hi {
        lo
    } else {
        hi
    }
}

/// Slope/intercept of an affine asymptotic height function s·x + b with
/// |s_i| <= 1 componentwise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineSpec {
    pub s: Vec<Rat>,
    pub b: Rat,
}

impl AffineSpec {
    pub fn new(s: Vec<Rat>, b: Rat) -> Result<Self> {
        if s.iter().any(|c| c.abs() > Rat::from_integer(1)) {
            return Err(Error::InvalidInput(format!(
                "slope {:?} outside [-1,1]^m",
                s.iter().map(rat::fmt_rat).collect::<Vec<_>>()
            )));
        }
        Ok(AffineSpec { s, b })
    }

    pub fn eval(&self, x: &[Rat]) -> Rat {
        self.s.iter().zip(x).map(|(s, x)| *s * *x).sum::<Rat>() + self.b
    }

    pub fn eval_lattice(&self, z: &LatticePoint) -> Rat {
        self.s
            .iter()
            .zip(z.coords())
            .map(|(s, &c)| *s * Rat::from_integer(c))
            .sum::<Rat>()
            + self.b
    }

    /// The parity-rounded value [s·z + b]_{z mod 2}; independent of any domain.
    pub fn rounded_at(&self, z: &LatticePoint) -> i64 {
        parity_round(self.eval_lattice(z), z)
    }
}

/// A parity-preserving graph homomorphism into Z on a discrete domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeightFunction {
    domain: Arc<DiscreteDomain>,
    values: Vec<i64>,
}

impl HeightFunction {
    /// Validates the homomorphism and parity invariants before accepting.
    pub fn new(domain: Arc<DiscreteDomain>, values: Vec<i64>) -> Result<Self> {
        if let Err(v) = validate_values(&domain, &values) {
            return Err(Error::InvalidInput(format!("invalid height function: {v}")));
        }
        Ok(HeightFunction { domain, values })
    }

    /// Accepts values without validation; for engine-internal construction
    /// where validity is guaranteed by the producing algorithm.
    pub(crate) fn from_raw(domain: Arc<DiscreteDomain>, values: Vec<i64>) -> Self {
        debug_assert!(validate_values(&domain, &values).is_ok());
        HeightFunction { domain, values }
    }

    pub fn domain(&self) -> &Arc<DiscreteDomain> {
        &self.domain
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn value_at(&self, idx: usize) -> i64 {
        self.values[idx]
    }

    pub fn value_at_point(&self, coords: &[i64]) -> Option<i64> {
        self.domain.position(coords).map(|i| self.values[i])
    }

    /// CSV export: one row per point, `z1,...,zm,h`.
    pub fn to_csv(&self, header_comment: &str) -> String {
        let mut out = String::new();
        if !header_comment.is_empty() {
            out.push_str(header_comment);
            out.push('\n');
        }
        let cols: Vec<String> = (1..=self.domain.dim()).map(|i| format!("z{i}")).collect();
        out.push_str(&cols.join(","));
        out.push_str(",h\n");
        for (p, v) in self.domain.points().iter().zip(&self.values) {
            let coords: Vec<String> = p.coords().iter().map(|c| c.to_string()).collect();
            out.push_str(&coords.join(","));
            out.push_str(&format!(",{v}\n"));
        }
        out
    }
}

/// First violation found in a candidate value assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Parity { point: LatticePoint, value: i64 },
    Edge {
        a: LatticePoint,
        b: LatticePoint,
        va: i64,
        vb: i64,
    },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::Parity { point, value } =>

                write!(f, "parity violation at {:?}: {}", point.coords(), value),
            Violation::Edge { a, b, va, vb } => write!(
                f,
                "edge ({:?}, {:?}) has |{} - {}| != 1",
                a.coords(),
                b.coords(),
                va,
                vb
            ),
        }
    }
}

/// Checks the two height-function invariants: adjacent values differ by
/// exactly 1 and every value has the parity of its site.
pub fn validate_values(domain: &DiscreteDomain, values: &[i64]) -> std::result::Result<(), Violation> {
    assert_eq!(values.len(), domain.site_count());
    for (i, p) in domain.points().iter().enumerate() {
        if values[i].rem_euclid(2) != p.parity() as i64 {
            return Err(Violation::Parity {
                point: p.clone(),
                value: values[i],
            });
        }
    }
    for (i, p) in domain.points().iter().enumerate() {
        for j in domain.neighbor_indices(i) {
            if j > i && (values[i] - values[j]).abs() != 1 {
                return Err(Violation::Edge {
                    a: p.clone(),
                    b: domain.points()[j].clone(),
                    va: values[i],
                    vb: values[j],
                });
            }
        }
    }
    Ok(())
}

/// The affine height function h^{s·x+b}: parity rounding of s·z + b at every
/// site. Always a valid height function.
pub fn affine_height_function(spec: &AffineSpec, domain: &Arc<DiscreteDomain>) -> HeightFunction {
    let values: Vec<i64> = domain.points().iter().map(|z| spec.rounded_at(z)).collect();
    HeightFunction::from_raw(domain.clone(), values)
}

/// Closed-form profiles with declared Lipschitz certificates. The registry is
/// fixed: arbitrary closures cannot be certified 1-Lipschitz.
#[derive(Clone, Debug, PartialEq)]
pub enum BuiltinProfile {
    /// 1D tent on [0,1]: a·x up to x = 1/2, then a·(1-x). Lipschitz bound |a|.
    Tent { amplitude: Rat },
    /// min over coordinates; gradient is a basis vector, bound 1.
    MinCoords,
    /// c·|x|_2^2 on the unit box; gradient 2c·x, bound 2c there.
    ScaledQuadratic { coeff: Rat },
}

impl BuiltinProfile {
    pub fn eval(&self, x: &[Rat]) -> Rat {
        match self {
            BuiltinProfile::Tent { amplitude } => {
                let half = Rat::new(1, 2);
                if x[0] <= half {
                    *amplitude * x[0]
                } else {
                    *amplitude * (Rat::from_integer(1) - x[0])
                }
            }
            BuiltinProfile::MinCoords => x.iter().copied().min().unwrap(),
            BuiltinProfile::ScaledQuadratic { coeff } => {
                *coeff * x.iter().map(|c| *c * *c).sum::<Rat>()
            }
        }
    }

    /// Analytic gradient at points where it exists; on ties (tent apex, equal
    /// coordinates of min) returns the gradient of the lexicographically
    /// first affine piece, matching the simplex location tie-break.
    pub fn gradient(&self, x: &[Rat]) -> Vec<Rat> {
        match self {
            BuiltinProfile::Tent { amplitude } => {
                if x[0] <= Rat::new(1, 2) {
                    vec![*amplitude]
                } else {
                    vec![-*amplitude]
                }
            }
            BuiltinProfile::MinCoords => {
                let min = x.iter().copied().min().unwrap();
                let arg = x.iter().position(|c| *c == min).unwrap();
                let mut g = vec![Rat::zero(); x.len()];
                g[arg] = Rat::from_integer(1);
                g
            }
            BuiltinProfile::ScaledQuadratic { coeff } => {
                x.iter().map(|c| Rat::from_integer(2) * *coeff * *c).collect()
            }
        }
    }

    pub fn lipschitz_bound(&self) -> Rat {
        match self {
            BuiltinProfile::Tent { amplitude } => amplitude.abs(),
            BuiltinProfile::MinCoords => Rat::from_integer(1),
            BuiltinProfile::ScaledQuadratic { coeff } => Rat::from_integer(2) * *coeff,
        }
    }
}

/// An asymptotic height function: 1-Lipschitz with respect to l1 on its
/// continuum domain.
#[derive(Clone, Debug, PartialEq)]
pub enum LipschitzProfile {
    Affine(AffineSpec),
    PiecewiseAffine(PwaProfile),
    Builtin(BuiltinProfile),
}

impl LipschitzProfile {
    pub fn affine(s: Vec<Rat>, b: Rat) -> Result<Self> {
        Ok(LipschitzProfile::Affine(AffineSpec::new(s, b)?))
    }

    pub fn tent(amplitude: Rat) -> Result<Self> {
        if amplitude.abs() > Rat::from_integer(1) {
            return Err(Error::InvalidInput("tent amplitude above 1".into()));
        }
        Ok(LipschitzProfile::Builtin(BuiltinProfile::Tent { amplitude }))
    }

    pub fn min_coords() -> Self {
        LipschitzProfile::Builtin(BuiltinProfile::MinCoords)
    }

    pub fn quadratic(coeff: Rat) -> Result<Self> {
        if (Rat::from_integer(2) * coeff).abs() > Rat::from_integer(1) {
            return Err(Error::InvalidInput(
                "quadratic coefficient certifies Lipschitz bound above 1".into(),
            ));
        }
        Ok(LipschitzProfile::Builtin(BuiltinProfile::ScaledQuadratic { coeff }))
    }

    /// Exact rational evaluation; None outside the profile's domain (only
    /// piecewise-affine profiles carry a bounded domain).
    pub fn eval_exact(&self, x: &[Rat]) -> Option<Rat> {
        match self {
            LipschitzProfile::Affine(a) => Some(a.eval(x)),
            LipschitzProfile::PiecewiseAffine(p) => p.eval(x),
            LipschitzProfile::Builtin(b) => Some(b.eval(x)),
        }
    }

    /// Exact gradient where defined (piecewise-affine: gradient of the piece
    /// containing x).
    pub fn gradient_exact(&self, x: &[Rat]) -> Option<Vec<Rat>> {
        match self {
            LipschitzProfile::Affine(a) => Some(a.s.clone()),
            LipschitzProfile::PiecewiseAffine(p) => {
                let id = p.domain().find_containing(x)?;
                Some(p.gradient(id))
            }
            LipschitzProfile::Builtin(b) => Some(b.gradient(x)),
        }
    }
}

/// Exact Lipschitz constant for affine and piecewise-affine profiles; the
/// declared certificate for builtins.
pub fn lipschitz_constant(p: &LipschitzProfile) -> Result<Rat> {
    match p {
        LipschitzProfile::Affine(a) => Ok(a
            .s
            .iter()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(Rat::zero)),
        LipschitzProfile::PiecewiseAffine(pwa) => Ok(pwa.max_grad_inf()),
        LipschitzProfile::Builtin(b) => Ok(b.lipschitz_bound()),
    }
}

/// Finite-n boundary convergence gap: sup over boundary sites z of
/// sup over boundary samples x with |x - z/n|_1 <= d_n of |h(z)/n - p(x)|.
///
/// d_n is the sampled Hausdorff gap; the nearest boundary sample is always
/// admitted so the inner supremum is never vacuous.
pub fn boundary_gap(
    h_boundary: &HeightFunction,
    p: &LipschitzProfile,
    r: &ContinuumDomain,
) -> Rat {
    let d = h_boundary.domain();
    let n = d.n();
    let d_n = hausdorff_gap(r, d, None);
    let pitch = Rat::new(1, 2 * n as i64);
    let samples = r.boundary_samples(pitch);
    let mut worst = Rat::zero();
    for idx in d.boundary_indices() {
        let z = &d.points()[idx];
        let zx = z.scaled(n);
        let hz = Rat::new(h_boundary.value_at(idx), n as i64);
        let mut nearest: Option<(Rat, Rat)> = None; // (distance, |gap|)
        for x in &samples {
            let Some(px) = p.eval_exact(x) else { continue };
            let dist = rat::l1_dist(&zx, x);
            let gap = (hz - px).abs();
            if dist <= d_n && gap > worst {
                worst = gap;
            }
            if nearest.as_ref().map_or(true, |(nd, _)| dist < *nd) {
                nearest = Some((dist, gap));
            }
        }
        if let Some((_, gap)) = nearest {
            if gap > worst {
                worst = gap;
            }
        }
    }
    worst
}

/// Rescales and interpolates a height function into a piecewise-affine
/// profile p with p(z/n) = h(z)/n, linear on the Kuhn simplices of the
/// lattice cells. The result is automatically 1-Lipschitz.
pub fn kirszbraun_interpolate(h: &HeightFunction) -> Result<LipschitzProfile> {
    let d = h.domain();
    let m = d.dim();
    let n = d.n();
    let scale = Rat::new(1, n as i64);
    let mut simplices = Vec::new();
    let perms = crate::simplicial::permutations(m);
    for p in d.points() {
        // cells are keyed by their low corner; all 2^m corners must be present
        let mut corners_present = true;
        let mut corner = vec![0i64; m];
        'corner: for mask in 0..(1u32 << m) {
            for (i, c) in corner.iter_mut().enumerate() {
                *c = p.coords()[i] + ((mask >> i) & 1) as i64;
            }
            if d.position(&corner).is_none() {
                corners_present = false;
                break 'corner;
            }
        }
        if corners_present {
            for perm in &perms {
                simplices.push(SimplexId {
                    v: p.coords().to_vec(),
                    perm: perm.clone(),
                });
            }
        }
    }
    if simplices.is_empty() {
        return Err(Error::DomainNotCellCovered);
    }
    let mesh = SimplexDomain::new(scale, simplices).map_err(|e| match e {
        Error::DisconnectedMesh => Error::DomainNotCellCovered,
        other => other,
    })?;
    let mut values = BTreeMap::new();
    for unit in mesh.vertex_units() {
        let idx = d.position(&unit).ok_or(Error::DomainNotCellCovered)?;
        values.insert(unit, Rat::new(h.value_at(idx), n as i64));
    }
    Ok(LipschitzProfile::PiecewiseAffine(PwaProfile::new(mesh, values)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::discretize;
    use crate::rat::{rat, rat_int};

    fn pt(coords: &[i64]) -> LatticePoint {
        LatticePoint(coords.to_vec())
    }

    #[test]
    fn parity_round_reference_values() {
        let even = pt(&[1, 2, 3]);
        let odd = pt(&[4, -6, 7]);
        assert_eq!(parity_round(rat(27, 5), &even), 6); // 5.4 -> 6
        assert_eq!(parity_round(rat(27, 5), &odd), 5); // 5.4 -> 5
        assert_eq!(parity_round(rat_int(-3), &even), -2); // tie rounds up
        assert_eq!(parity_round(rat_int(-3), &odd), -3);
        assert_eq!(parity_round(rat_int(0), &pt(&[0, 0])), 0);
    }

    #[test]
    fn affine_line_example() {
        // s = 1/2, b = 1/2 on {-5..5}
        let r = crate::lattice::ContinuumDomain::new_box(vec![rat_int(-5)], vec![rat_int(5)])
            .unwrap();
        let d = Arc::new(discretize(&r, 1).unwrap());
        let spec = AffineSpec::new(vec![rat(1, 2)], rat(1, 2)).unwrap();
        let h = affine_height_function(&spec, &d);
        let got: Vec<i64> = d
            .points()
            .iter()
            .map(|p| h.value_at_point(p.coords()).unwrap())
            .collect();
        assert_eq!(got, vec![-1, -2, -1, 0, 1, 0, 1, 2, 3, 2, 3]);
    }

    #[test]
    fn affine_zero_slope_and_integer_slope() {
        let r = crate::lattice::ContinuumDomain::unit_box(2);
        let d = Arc::new(discretize(&r, 3).unwrap());
        let zero = AffineSpec::new(vec![rat_int(0); 2], rat_int(0)).unwrap();
        let h = affine_height_function(&zero, &d);
        for (p, v) in d.points().iter().zip(h.values()) {
            assert_eq!(*v, i64::from(p.parity())); // ties round up to +1
        }
        let ones = AffineSpec::new(vec![rat_int(1); 2], rat_int(0)).unwrap();
        let h2 = affine_height_function(&ones, &d);
        for (p, v) in d.points().iter().zip(h2.values()) {
            assert_eq!(*v, p.coords().iter().sum::<i64>());
        }
    }

    #[test]
    fn affine_rounding_error_bounded_by_one() {
        let d = Arc::new(DiscreteDomain::cube(2, 5));
        for (s1, s2, b) in [
            (rat(1, 2), rat(-1, 4), rat(1, 3)),
            (rat(-1, 1), rat(1, 1), rat_int(0)),
            (rat(3, 4), rat(2, 3), rat(-5, 2)),
        ] {
            let spec = AffineSpec::new(vec![s1, s2], b).unwrap();
            let h = affine_height_function(&spec, &d);
            for (p, v) in d.points().iter().zip(h.values()) {
                let target = spec.eval_lattice(p);
                assert!((Rat::from_integer(*v) - target).abs() <= Rat::from_integer(1));
            }
        }
    }

    #[test]
    fn validate_reports_first_bad_edge() {
        let r = crate::lattice::ContinuumDomain::new_box(vec![rat_int(0)], vec![rat_int(2)])
            .unwrap();
        let d = discretize(&r, 1).unwrap();
        assert!(validate_values(&d, &[0, 1, 0]).is_ok());
        match validate_values(&d, &[0, 2, 0]) {
            Err(Violation::Parity { value, .. }) => assert_eq!(value, 2),
            other => panic!("expected parity violation, got {other:?}"),
        }
        // right parity, wrong step size
        match validate_values(&d, &[0, 3, 0]) {
            Err(Violation::Edge { va, vb, .. }) => {
                assert_eq!((va, vb), (0, 3));
            }
            other => panic!("expected edge violation, got {other:?}"),
        }
    }

    #[test]
    fn lipschitz_constants() {
        let aff = LipschitzProfile::affine(vec![rat(1, 2), rat(-1, 4)], rat_int(0)).unwrap();
        assert_eq!(lipschitz_constant(&aff).unwrap(), rat(1, 2));
        let steep = LipschitzProfile::affine(vec![rat_int(1), rat_int(0)], rat_int(0)).unwrap();
        assert_eq!(lipschitz_constant(&steep).unwrap(), rat_int(1));
        let min = LipschitzProfile::min_coords();
        assert_eq!(lipschitz_constant(&min).unwrap(), rat_int(1));
    }

    #[test]
    fn min_profile_on_mesh_has_unit_constant() {
        let r = crate::lattice::ContinuumDomain::unit_box(2);
        let mesh = crate::simplicial::simplices_inside(&r, rat(1, 2)).unwrap();
        let pwa = crate::simplicial::interpolate_on_mesh(&LipschitzProfile::min_coords(), &mesh)
            .unwrap();
        assert_eq!(
            lipschitz_constant(&LipschitzProfile::PiecewiseAffine(pwa)).unwrap(),
            rat_int(1)
        );
    }

    #[test]
    fn interpolation_is_a_section_of_discretization() {
        let r = crate::lattice::ContinuumDomain::unit_box(2);
        let d = Arc::new(discretize(&r, 3).unwrap());
        let spec = AffineSpec::new(vec![rat(1, 2), rat(-1, 3)], rat(1, 5)).unwrap();
        let h = affine_height_function(&spec, &d);
        let p = kirszbraun_interpolate(&h).unwrap();
        for (z, v) in d.points().iter().zip(h.values()) {
            let x = z.scaled(3);
            assert_eq!(p.eval_exact(&x).unwrap(), Rat::new(*v, 3));
        }
        assert!(lipschitz_constant(&p).unwrap() <= rat_int(1));
    }

    #[test]
    fn interpolate_affine_slope_two_coords() {
        let r = crate::lattice::ContinuumDomain::unit_box(2);
        let d = Arc::new(discretize(&r, 2).unwrap());
        let spec = AffineSpec::new(vec![rat_int(1), rat_int(1)], rat_int(0)).unwrap();
        let h = affine_height_function(&spec, &d);
        let p = kirszbraun_interpolate(&h).unwrap();
        // interpolation of x1 + x2 is exactly affine
        let x = vec![rat(1, 3), rat(1, 4)];
        assert_eq!(p.eval_exact(&x).unwrap(), rat(1, 3) + rat(1, 4));
    }

    #[test]
    fn tent_from_one_dim_interpolation() {
        let r = crate::lattice::ContinuumDomain::new_box(vec![rat_int(0)], vec![rat_int(2)])
            .unwrap();
        let d = Arc::new(discretize(&r, 1).unwrap());
        // height (0,1,0) on {0,1,2}; as a profile at n = 2... here n = 1, so
        // the tent peaks at x = 1 with value 1
        let h = HeightFunction::new(d, vec![0, 1, 0]).unwrap();
        let p = kirszbraun_interpolate(&h).unwrap();
        assert_eq!(p.eval_exact(&[rat(1, 2)]).unwrap(), rat(1, 2));
        assert_eq!(p.eval_exact(&[rat_int(1)]).unwrap(), rat_int(1));
        assert_eq!(p.eval_exact(&[rat(3, 2)]).unwrap(), rat(1, 2));
    }

    #[test]
    fn boundary_gap_affine_self_consistency() {
        // h(z) = [s·z]; the matching profile at scale n is s·x (intercept 0,
        // so the microscopic and rescaled intercepts coincide)
        let r = crate::lattice::ContinuumDomain::unit_box(1);
        let spec = AffineSpec::new(vec![rat(1, 2)], rat_int(0)).unwrap();
        let p = LipschitzProfile::Affine(spec.clone());
        let mut gaps = Vec::new();
        for n in [4u32, 8] {
            let d = Arc::new(discretize(&r, n).unwrap());
            let h = affine_height_function(&spec, &d);
            let gap = boundary_gap(&h, &p, &r);
            assert!(
                gap <= Rat::new(2, n as i64),
                "gap {} exceeds 2/n at n={n}",
                rat::fmt_rat(&gap)
            );
            // shifting the profile by 1 forces a gap near 1
            let shifted = LipschitzProfile::Affine(
                AffineSpec::new(vec![rat(1, 2)], rat_int(1)).unwrap(),
            );
            let gap_shift = boundary_gap(&h, &shifted, &r);
            assert!(gap_shift >= Rat::from_integer(1) - Rat::new(2, n as i64));
            gaps.push(gap);
        }
        // doubling n does not worsen the self-gap
        assert!(gaps[1] <= gaps[0]);
    }
}
