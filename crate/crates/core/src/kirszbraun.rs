//! Discrete Kirszbraun theorem: a parity-preserving partial height function
//! extends to the whole domain iff it is 1-Lipschitz for the ambient l1
//! metric, and the minimal/maximal extensions have closed forms.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::enumeration::{count_constrained, CountOptions, CountResult, SiteConstraint};
use crate::error::{Error, ExtendWitness, Result};
use crate::height::HeightFunction;
use crate::lattice::{DiscreteDomain, LatticePoint};

/// Values prescribed on a carrier subset S of a discrete domain.
#[derive(Clone, Debug)]
pub struct PartialHeightFunction {
    domain: Arc<DiscreteDomain>,
    pins: BTreeMap<usize, i64>,
}

impl PartialHeightFunction {
    pub fn new(domain: Arc<DiscreteDomain>, pins: BTreeMap<usize, i64>) -> Self {
        PartialHeightFunction { domain, pins }
    }

    pub fn from_points(
        domain: Arc<DiscreteDomain>,
        values: &[(LatticePoint, i64)],
    ) -> Result<Self> {
        let mut pins = BTreeMap::new();
        for (p, v) in values {
            let idx = domain
                .position(p.coords())
                .ok_or_else(|| Error::PointOutsideDomain(p.0.clone()))?;
            pins.insert(idx, *v);
        }
        Ok(PartialHeightFunction::new(domain, pins))
    }

    pub fn domain(&self) -> &Arc<DiscreteDomain> {
        &self.domain
    }

    pub fn pins(&self) -> &BTreeMap<usize, i64> {
        &self.pins
    }

    /// Extendable iff parity holds on S and |h(x) - h(y)| <= |x - y|_1 for
    /// all pairs. Returns the first witness otherwise. Large carriers switch
    /// from the quadratic pairwise scan to l1 distance-transform sweeps over
    /// the bounding box.
    pub fn check_extendable(&self) -> std::result::Result<(), ExtendWitness> {
        for (&idx, &v) in &self.pins {
            let p = &self.domain.points()[idx];
            if v.rem_euclid(2) != p.parity() as i64 {
                return Err(ExtendWitness::Parity {
                    point: p.clone(),
                    value: v,
                });
            }
        }
        if self.pins.len() <= 4096 {
            let entries: Vec<(&LatticePoint, i64)> = self
                .pins
                .iter()
                .map(|(&i, &v)| (&self.domain.points()[i], v))
                .collect();
            for (a, (pa, va)) in entries.iter().enumerate() {
                for (pb, vb) in entries.iter().skip(a + 1) {
                    let dist = pa.l1_dist(pb);
                    if (va - vb).abs() > dist {
                        return Err(ExtendWitness::Pair {
                            x: (*pa).clone(),
                            y: (*pb).clone(),
                            hx: *va,
                            hy: *vb,
                            dist,
                        });
                    }
                }
            }
            Ok(())
        } else {
            self.check_extendable_by_propagation()
        }
    }

    /// Chamfer-style check: the lower envelope L(z) = max_p (h(p) - |z - p|_1)
    /// is computed over the bounding box by one directional sweep per axis
    /// orientation; feasibility is L(p) <= h(p) at every pin.
    fn check_extendable_by_propagation(&self) -> std::result::Result<(), ExtendWitness> {
        let dim = self.domain.dim();
        let pts = self.domain.points();
        let mut lo = vec![i64::MAX; dim];
        let mut hi = vec![i64::MIN; dim];
        for &idx in self.pins.keys() {
            for (a, &c) in pts[idx].coords().iter().enumerate() {
                lo[a] = lo[a].min(c);
                hi[a] = hi[a].max(c);
            }
        }
        let extents: Vec<usize> = (0..dim).map(|a| (hi[a] - lo[a] + 1) as usize).collect();
        let total: usize = extents.iter().product();
        let strides: Vec<usize> = {
            let mut s = vec![1usize; dim];
            for a in (0..dim.saturating_sub(1)).rev() {
                s[a] = s[a + 1] * extents[a + 1];
            }
            s
        };
        const NEG: i64 = i64::MIN / 4;
        let mut lower = vec![NEG; total];
        for (&idx, &v) in &self.pins {
            let flat: usize = pts[idx]
                .coords()
                .iter()
                .enumerate()
                .map(|(a, &c)| (c - lo[a]) as usize * strides[a])
                .sum();
            lower[flat] = lower[flat].max(v);
        }
        // forward/backward sweep per axis: L[z] >= L[z -/+ e_a] - 1
        for a in 0..dim {
            for flat in 0..total {
                let coord = flat / strides[a] % extents[a];
                if coord > 0 {
                    lower[flat] = lower[flat].max(lower[flat - strides[a]] - 1);
                }
            }
            for flat in (0..total).rev() {
                let coord = flat / strides[a] % extents[a];
                if coord + 1 < extents[a] {
                    lower[flat] = lower[flat].max(lower[flat + strides[a]] - 1);
                }
            }
        }
        for (&idx, &v) in &self.pins {
            let flat: usize = pts[idx]
                .coords()
                .iter()
                .enumerate()
                .map(|(a, &c)| (c - lo[a]) as usize * strides[a])
                .sum();
            if lower[flat] > v {
                // recover a concrete witness pair by scanning
                for (&j, &w) in &self.pins {
                    let dist = pts[idx].l1_dist(&pts[j]);
                    if (w - v).abs() > dist {
                        return Err(ExtendWitness::Pair {
                            x: pts[j].clone(),
                            y: pts[idx].clone(),
                            hx: w,
                            hy: v,
                            dist,
                        });
                    }
                }
                unreachable!("propagation found a violation without a pair");
            }
        }
        Ok(())
    }

    fn extend_with(&self, minimal: bool) -> Result<HeightFunction> {
        if self.pins.is_empty() {
            return Err(Error::EmptyCarrier);
        }
        self.check_extendable().map_err(Error::NotExtendable)?;
        let pts = self.domain.points();
        let entries: Vec<(&LatticePoint, i64)> = self
            .pins
            .iter()
            .map(|(&i, &v)| (&pts[i], v))
            .collect();
        let values: Vec<i64> = pts
            .iter()
            .map(|y| {
                if minimal {
                    entries
                        .iter()
                        .map(|(x, v)| v - x.l1_dist(y))
                        .max()
                        .unwrap()
                } else {
                    entries
                        .iter()
                        .map(|(x, v)| v + x.l1_dist(y))
                        .min()
                        .unwrap()
                }
            })
            .collect();
        Ok(HeightFunction::from_raw(self.domain.clone(), values))
    }

    /// Pointwise minimal extension h(y) = max_x (h(x) - |x - y|_1).
    pub fn extend_min(&self) -> Result<HeightFunction> {
        self.extend_with(true)
    }

    /// Pointwise maximal extension h(y) = min_x (h(x) + |x - y|_1).
    pub fn extend_max(&self) -> Result<HeightFunction> {
        self.extend_with(false)
    }

    /// Exact number of extensions; at least 1 whenever the instance is
    /// extendable.
    pub fn count_extensions(&self, opts: &CountOptions) -> Result<CountResult> {
        self.check_extendable().map_err(Error::NotExtendable)?;
        let mut c = SiteConstraint::unconstrained(&self.domain);
        for (&idx, &v) in &self.pins {
            c.pin(&self.domain, idx, v)?;
        }
        count_constrained(&self.domain, &c, opts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::height::validate_values;
    use crate::lattice::{discretize, ContinuumDomain};
    use crate::rat::rat_int;
    use num_bigint::BigUint;
    use num_traits::One;

    fn line(len: i64) -> Arc<DiscreteDomain> {
        let r = ContinuumDomain::new_box(vec![rat_int(0)], vec![rat_int(len)]).unwrap();
        Arc::new(discretize(&r, 1).unwrap())
    }

    fn grid(w: i64, h: i64) -> Arc<DiscreteDomain> {
        let r =
            ContinuumDomain::new_box(vec![rat_int(0), rat_int(0)], vec![rat_int(w), rat_int(h)])
                .unwrap();
        Arc::new(discretize(&r, 1).unwrap())
    }

    #[test]
    fn parity_counterexample_rejected() {
        // h(0) = 0, h(2) = 1 on {0, 2} violates parity at 2
        let d = line(2);
        let p = PartialHeightFunction::from_points(
            d,
            &[(LatticePoint(vec![0]), 0), (LatticePoint(vec![2]), 1)],
        )
        .unwrap();
        match p.check_extendable() {
            Err(ExtendWitness::Parity { value, .. }) => assert_eq!(value, 1),
            other => panic!("expected parity witness, got {other:?}"),
        }
    }

    #[test]
    fn lipschitz_counterexample_rejected() {
        let d = line(2);
        let p = PartialHeightFunction::from_points(
            d,
            &[(LatticePoint(vec![0]), 0), (LatticePoint(vec![2]), 4)],
        )
        .unwrap();
        match p.check_extendable() {
            Err(ExtendWitness::Pair { hx, hy, dist, .. }) => {
                assert_eq!((hx, hy, dist), (0, 4, 2));
            }
            other => panic!("expected pair witness, got {other:?}"),
        }
    }

    #[test]
    fn diagonal_pair_is_feasible() {
        let d = grid(1, 1);
        let p = PartialHeightFunction::from_points(
            d,
            &[(LatticePoint(vec![0, 0]), 0), (LatticePoint(vec![1, 1]), 2)],
        )
        .unwrap();
        assert!(p.check_extendable().is_ok());
    }

    #[test]
    fn forced_middle_value() {
        let d = line(2);
        let p = PartialHeightFunction::from_points(
            d,
            &[(LatticePoint(vec![0]), 0), (LatticePoint(vec![2]), 2)],
        )
        .unwrap();
        let hmin = p.extend_min().unwrap();
        let hmax = p.extend_max().unwrap();
        assert_eq!(hmin.value_at_point(&[1]), Some(1));
        assert_eq!(hmax.value_at_point(&[1]), Some(1));
    }

    #[test]
    fn single_pin_cone() {
        let d = line(1);
        let p =
            PartialHeightFunction::from_points(d, &[(LatticePoint(vec![0]), 0)]).unwrap();
        assert_eq!(p.extend_min().unwrap().value_at_point(&[1]), Some(-1));
        assert_eq!(p.extend_max().unwrap().value_at_point(&[1]), Some(1));

        // 3x3 grid pinned at the corner: min extension is -|z|_1, max is +|z|_1
        let g = grid(2, 2);
        let q =
            PartialHeightFunction::from_points(g.clone(), &[(LatticePoint(vec![0, 0]), 0)])
                .unwrap();
        let hmin = q.extend_min().unwrap();
        let hmax = q.extend_max().unwrap();
        for pt in g.points() {
            let l1: i64 = pt.coords().iter().sum();
            assert_eq!(hmin.value_at_point(pt.coords()), Some(-l1));
            assert_eq!(hmax.value_at_point(pt.coords()), Some(l1));
        }
        assert!(validate_values(&g, hmin.values()).is_ok());
        assert!(validate_values(&g, hmax.values()).is_ok());
    }

    #[test]
    fn empty_carrier_is_an_error() {
        let d = line(2);
        let p = PartialHeightFunction::new(d, BTreeMap::new());
        assert!(matches!(p.extend_min(), Err(Error::EmptyCarrier)));
    }

    #[test]
    fn count_extensions_examples() {
        let d = line(2);
        let p = PartialHeightFunction::from_points(
            d.clone(),
            &[(LatticePoint(vec![0]), 0), (LatticePoint(vec![2]), 0)],
        )
        .unwrap();
        let res = p.count_extensions(&CountOptions::default()).unwrap();
        assert_eq!(res.count, BigUint::from(2u32));

        // rigid slope-1 instance
        let q = PartialHeightFunction::from_points(
            d,
            &[(LatticePoint(vec![0]), 0), (LatticePoint(vec![2]), 2)],
        )
        .unwrap();
        assert_eq!(
            q.count_extensions(&CountOptions::default()).unwrap().count,
            BigUint::one()
        );

        // infeasible instance propagates the witness
        let d2 = line(2);
        let bad = PartialHeightFunction::from_points(
            d2,
            &[(LatticePoint(vec![0]), 0), (LatticePoint(vec![2]), 4)],
        )
        .unwrap();
        assert!(matches!(
            bad.count_extensions(&CountOptions::default()),
            Err(Error::NotExtendable(_))
        ));
    }

    #[test]
    fn propagation_matches_pairwise_check() {
        // force the distance-transform path by exercising it directly
        let g = grid(5, 5);
        let mut pins = BTreeMap::new();
        for (i, p) in g.points().iter().enumerate() {
            if g.is_boundary(i) {
                pins.insert(i, p.coords().iter().sum::<i64>());
            }
        }
        let part = PartialHeightFunction::new(g.clone(), pins.clone());
        assert!(part.check_extendable().is_ok());
        assert!(part.check_extendable_by_propagation().is_ok());

        // introduce a violation and confirm both paths reject
        let some_idx = *pins.keys().next().unwrap();
        pins.insert(some_idx, pins[&some_idx] + 20);
        let bad = PartialHeightFunction::new(g, pins);
        assert!(bad.check_extendable().is_err());
        assert!(bad.check_extendable_by_propagation().is_err());
    }
}
