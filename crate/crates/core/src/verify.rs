//! Numerical verification of the model's limit theorems on exhaustively
//! countable instances: the simplicial and general profile identities, the
//! variational principle, large-deviation quantities, and the robustness
//! lemmas behind them.
//!
//! The theorems are asymptotic; the checks pin declared tolerances and trend
//! conditions instead of limits, and every count on the microscopic side is
//! exact.

use std::sync::Arc;
use std::time::Instant;

use num_bigint::BigUint;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::enumeration::{
    self, ball_constraint, count_ball, count_delta_boundary, count_exact_boundary,
    CountOptions, SiteConstraint, SurfaceTensionModel,
};
use crate::error::{Error, Result};
use crate::height::{
    affine_height_function, parity_round, AffineSpec, HeightFunction, LipschitzProfile,
};
use crate::lattice::{discretize, ContinuumDomain, DiscreteDomain, LatticePoint};
use crate::minimize::{minimize_macro_entropy, MinimizeOptions};
use crate::rat::{self, Rat};
use crate::simplicial::{interpolate_on_mesh, macro_entropy, simplices_inside, PwaProfile, SimplexDomain};

/// One measured instance of a claim: the two sides and their gap.
#[derive(Clone, Debug, Serialize)]
pub struct InstanceResult {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

/// Deterministic verdict for one claim over a family of instances.
#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub claim: String,
    pub tolerance: f64,
    pub instances: Vec<InstanceResult>,
    /// |gap| per instance, in instance order
    pub trend: Vec<f64>,
    pub verdict: bool,
    pub runtime_seconds: f64,
    pub notes: Vec<String>,
}

impl VerificationReport {
    fn new(claim: &str, tolerance: f64) -> Self {
        VerificationReport {
            claim: claim.to_string(),
            tolerance,
            instances: Vec::new(),
            trend: Vec::new(),
            verdict: false,
            runtime_seconds: 0.0,
            notes: Vec::new(),
        }
    }

    fn push(&mut self, label: impl Into<String>, lhs: f64, rhs: f64) {
        let gap = lhs - rhs;
        self.instances.push(InstanceResult {
            label: label.into(),
            lhs,
            rhs,
            gap,
        });
        self.trend.push(gap.abs());
    }

    /// Trending verdict: the signed gap moves monotonically toward its limit
    /// over the last `window` instances (the absolute gap may cross zero on
    /// the way, since the fixed-radius ball carries a genuine bias term) and
    /// the final absolute gap is within tolerance.
    fn verdict_trend(&mut self, window: usize) {
        let gaps: Vec<f64> = self.instances.iter().map(|i| i.gap).collect();
        let tail = &gaps[gaps.len().saturating_sub(window)..];
        let down = tail.windows(2).all(|w| w[1] <= w[0] + 1e-12);
        let up = tail.windows(2).all(|w| w[1] >= w[0] - 1e-12);
        let last_ok = self.trend.last().map_or(false, |g| *g <= self.tolerance);
        self.verdict = (down || up) && last_ok;
    }

    fn verdict_all_within(&mut self) {
        self.verdict = self.trend.iter().all(|g| *g <= self.tolerance);
    }
}

/// K_n := { z | z/n in K } as a discrete domain.
pub fn discretize_mesh(k: &SimplexDomain, n: u32) -> Result<DiscreteDomain> {
    let m = k.dim();
    let mut lo = vec![i64::MAX; m];
    let mut hi = vec![i64::MIN; m];
    for s in k.simplices() {
        for u in s.vertex_units() {
            for a in 0..m {
                let x = k.scale() * Rat::from_integer(u[a]) * Rat::from_integer(n as i64);
                lo[a] = lo[a].min(rat::floor_rat(&x));
                hi[a] = hi[a].max(rat::ceil_rat(&x));
            }
        }
    }
    let mut points = Vec::new();
    let mut idx = lo.clone();
    loop {
        let x: Vec<Rat> = idx.iter().map(|&c| Rat::new(c, n as i64)).collect();
        if k.contains(&x) {
            points.push(LatticePoint(idx.clone()));
        }
        let mut axis = 0;
        loop {
            idx[axis] += 1;
            if idx[axis] <= hi[axis] {
                break;
            }
            idx[axis] = lo[axis];
            axis += 1;
            if axis == m {
                if points.is_empty() {
                    return Err(Error::EmptyDiscretization(n));
                }
                return DiscreteDomain::from_points(n, m, points);
            }
        }
    }
}

/// Parity rounding of n·p(z/n) at every site; valid because p is 1-Lipschitz.
pub fn rounded_profile_height(
    d: &Arc<DiscreteDomain>,
    p: &LipschitzProfile,
) -> Result<HeightFunction> {
    let n = d.n();
    let scaled = Rat::from_integer(n as i64);
    let mut values = Vec::with_capacity(d.site_count());
    for z in d.points() {
        let x = z.scaled(n);
        let target = p.eval_exact(&x).ok_or(Error::MeshOutsideDomain)? * scaled;
        values.push(parity_round(target, z));
    }
    HeightFunction::new(d.clone(), values)
}

/// Simplicial profile check: Ent_{K_n}(B(K_n, h_K, eps*l)) against the
/// normalized entropy integral, per n. Passes when the absolute gap is
/// non-increasing over the last three sizes and the final gap is within
/// tolerance.
pub fn check_simplicial_profile(
    h_k: &PwaProfile,
    model: &SurfaceTensionModel,
    eps: Rat,
    n_list: &[u32],
    tolerance: f64,
    opts: &CountOptions,
) -> Result<VerificationReport> {
    let start = Instant::now();
    let mut report = VerificationReport::new("simplicial-profile", tolerance);
    let rhs = macro_entropy(h_k, model)?;
    let delta = eps * h_k.domain().scale();
    let profile = LipschitzProfile::PiecewiseAffine(h_k.clone());
    for &n in n_list {
        let kn = discretize_mesh(h_k.domain(), n)?;
        let count = count_ball(&kn, &profile, delta, opts)?;
        let lhs = count.entropy_or_err()?;
        report.push(format!("n={n}"), lhs, rhs);
    }
    report.verdict_trend(3);
    report.runtime_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

/// General profile check: the macroscopic side goes through the simplicial
/// approximation sweep, the microscopic side is a counted ball on R_n.
pub fn check_general_profile(
    p: &LipschitzProfile,
    r: &ContinuumDomain,
    model: &SurfaceTensionModel,
    delta: Rat,
    n: u32,
    eps: Rat,
    scales: &[Rat],
    tolerance: f64,
    opts: &CountOptions,
) -> Result<VerificationReport> {
    let start = Instant::now();
    let mut report = VerificationReport::new("general-profile", tolerance);
    let sweep = crate::simplicial::rademacher_sweep(p, r, eps, scales)?;
    let Some((_, pwa, approx_report)) = sweep.passing else {
        report
            .notes
            .push("approximation sweep exhausted its scales: inconclusive".into());
        report.runtime_seconds = start.elapsed().as_secs_f64();
        return Ok(report);
    };
    report.notes.push(format!(
        "approximation at scale {} with value gap {:.3e}",
        rat::fmt_rat(&approx_report.scale),
        approx_report.max_value_gap
    ));
    let lhs = macro_entropy(&pwa, model)?;
    let d = Arc::new(discretize(r, n)?);
    let rhs = count_ball(&d, p, delta, opts)?.entropy_or_err()?;
    report.push(format!("n={n}"), lhs, rhs);
    report.verdict_all_within();
    report.runtime_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Variational principle check: minimized macroscopic entropy against the
/// entropy of the delta-boundary count, with the boundary height function
/// taken as the parity rounding of the boundary profile.
pub fn check_variational(
    r: &ContinuumDomain,
    boundary: &LipschitzProfile,
    model: &SurfaceTensionModel,
    delta: Rat,
    n: u32,
    mesh_scale: Rat,
    tolerance: f64,
    opts: &CountOptions,
) -> Result<VerificationReport> {
    let start = Instant::now();
    let mut report = VerificationReport::new("variational", tolerance);
    let convex_model = model.convexified();
    let (_, lhs) = minimize_macro_entropy(
        r,
        boundary,
        mesh_scale,
        &convex_model,
        None,
        &MinimizeOptions::default(),
    )?;
    let d = Arc::new(discretize(r, n)?);
    let hb = rounded_profile_height(&d, boundary)?;
    let rhs = count_delta_boundary(&d, &hb, delta, opts)?.entropy_or_err()?;
    report.push(format!("n={n}"), lhs, rhs);
    report.verdict_all_within();
    report.runtime_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

/// A sup-norm ball event around a profile whose breakpoints are compatible
/// with the 1/n lattice (so membership reduces to per-site windows).
pub struct EventBall {
    pub center: LipschitzProfile,
    pub radius: Rat,
    pub open: bool,
}

impl EventBall {
    /// Per-site windows |h(z) - n·c(z/n)| <= rn (strict when open).
    fn constrain(&self, d: &DiscreteDomain, c: &mut SiteConstraint) -> Result<()> {
        let n = Rat::from_integer(d.n() as i64);
        for (idx, z) in d.points().iter().enumerate() {
            let x = z.scaled(d.n());
            let center = self
                .center
                .eval_exact(&x)
                .ok_or(Error::MeshOutsideDomain)?;
            let lo_r = n * (center - self.radius);
            let hi_r = n * (center + self.radius);
            let (lo, hi) = if self.open {
                (rat::strict_ceil(&lo_r), rat::strict_floor(&hi_r))
            } else {
                (rat::ceil_rat(&lo_r), rat::floor_rat(&hi_r))
            };
            c.restrict(idx, lo, hi);
        }
        Ok(())
    }
}

/// mu_{delta,n}(A) for A a finite union of sup-norm balls: exact rational
/// probability via inclusion-exclusion over ball intersections (an
/// intersection of balls is again a per-site window family).
pub struct MuResult {
    pub numerator: BigUint,
    pub denominator: BigUint,
    pub site_count: usize,
}

impl MuResult {
    pub fn mu(&self) -> f64 {
        if self.denominator.is_zero() {
            return f64::NAN;
        }
        if self.numerator.is_zero() {
            return 0.0;
        }
        (enumeration::ln_big(&self.numerator) - enumeration::ln_big(&self.denominator)).exp()
    }

    /// Empirical rate -(1/|R_n|) ln mu; +infinity on mu = 0.
    pub fn rate(&self) -> f64 {
        if self.numerator.is_zero() {
            return f64::INFINITY;
        }
        (enumeration::ln_big(&self.denominator) - enumeration::ln_big(&self.numerator))
            / self.site_count as f64
    }
}

pub fn measure_mu(
    d: &Arc<DiscreteDomain>,
    h_boundary: &HeightFunction,
    delta: Rat,
    event: &[EventBall],
    opts: &CountOptions,
) -> Result<MuResult> {
    assert!(
        event.len() <= 3,
        "inclusion-exclusion implemented for up to 3 balls"
    );
    let base = enumeration::delta_boundary_constraint(d, h_boundary, delta);
    let denominator = enumeration::count_constrained(d, &base, opts)?.count;
    let mut numerator = BigUint::zero();
    let mut subtract = BigUint::zero();
    for mask in 1u32..(1 << event.len()) {
        let mut c = base.clone();
        for (i, ball) in event.iter().enumerate() {
            if mask >> i & 1 == 1 {
                ball.constrain(d, &mut c)?;
            }
        }
        let count = enumeration::count_constrained(d, &c, opts)?.count;
        if mask.count_ones() % 2 == 1 {
            numerator += count;
        } else {
            subtract += count;
        }
    }
    // inclusion-exclusion never goes negative on a real union
    assert!(numerator >= subtract);
    Ok(MuResult {
        numerator: numerator - subtract,
        denominator,
        site_count: d.site_count(),
    })
}

/// LDP ordering check: mu of a ball around the minimizer against mu of a
/// ball around a competitor, with empirical rates compared to the rate
/// function values of the centers. The infimum of I over a ball is bracketed
/// by its value at the center, as recorded in the report notes.
pub struct LdpOutcome {
    pub report: VerificationReport,
    pub mu_minimizer: MuResult,
    pub mu_competitor: MuResult,
    pub i_minimizer: f64,
    pub i_competitor: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn check_ldp_ordering(
    r: &ContinuumDomain,
    boundary: &LipschitzProfile,
    minimizer_center: &LipschitzProfile,
    competitor_center: &LipschitzProfile,
    radius: Rat,
    model: &SurfaceTensionModel,
    delta: Rat,
    n: u32,
    mesh_scale: Rat,
    opts: &CountOptions,
) -> Result<LdpOutcome> {
    let start = Instant::now();
    let mut report = VerificationReport::new("ldp-ordering", 1e-3);
    report.notes.push(
        "inf over the open ball is approximated by I at the ball center; \
         the reported rates are brackets, not exact infima"
            .into(),
    );
    let convex_model = model.convexified();
    let (_, e) = minimize_macro_entropy(
        r,
        boundary,
        mesh_scale,
        &convex_model,
        None,
        &MinimizeOptions::default(),
    )?;
    let d = Arc::new(discretize(r, n)?);
    let hb = rounded_profile_height(&d, boundary)?;

    let mu_min = measure_mu(
        &d,
        &hb,
        delta,
        &[EventBall {
            center: minimizer_center.clone(),
            radius,
            open: false,
        }],
        opts,
    )?;
    let mu_comp = measure_mu(
        &d,
        &hb,
        delta,
        &[EventBall {
            center: competitor_center.clone(),
            radius,
            open: false,
        }],
        opts,
    )?;

    let ent_of = |p: &LipschitzProfile| -> Result<f64> {
        let mesh = simplices_inside(r, mesh_scale)?;
        let pwa = interpolate_on_mesh(p, &mesh)?;
        macro_entropy(&pwa, &convex_model)
    };
    let i_min = ent_of(minimizer_center)? - e;
    let i_comp = ent_of(competitor_center)? - e;

    report.push("I(minimizer) vs 0", i_min, 0.0);
    report.push(
        "rate ordering: competitor - minimizer",
        mu_comp.rate() - mu_min.rate(),
        (i_comp - i_min).max(0.0),
    );
    // verdict: mass ordering, rate ordering consistent with I, I(min) ~ 0
    let ordering = mu_min.numerator > mu_comp.numerator;
    let rates_consistent =
        (mu_comp.rate() > mu_min.rate()) == (i_comp > i_min) || i_comp == i_min;
    report.verdict = ordering && rates_consistent && i_min.abs() <= 1e-3;
    report.runtime_seconds = start.elapsed().as_secs_f64();
    Ok(LdpOutcome {
        report,
        mu_minimizer: mu_min,
        mu_competitor: mu_comp,
        i_minimizer: i_min,
        i_competitor: i_comp,
    })
}

/// Robustness desk checks: set inclusions verified as exact count
/// inequalities, approximation bounds verified numerically.
pub fn check_robustness_lemmas(seed: u64, opts: &CountOptions) -> Result<VerificationReport> {
    use rand::{Rng, SeedableRng};
    let start = Instant::now();
    let mut report = VerificationReport::new("robustness-lemmas", 0.0);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut all_ok = true;

    // (1) profile change: max|h - h~| <= eps implies
    //     B(R_n, h, 2 eps) >= B(R_n, h~, eps), 50 random 1D pairs
    {
        let r = ContinuumDomain::unit_box(1);
        let n = 12u32;
        let d = Arc::new(discretize(&r, n)?);
        let mesh = simplices_inside(&r, rat::rat(1, 4))?;
        let mut random_pwa = |rng: &mut rand_chacha::ChaCha8Rng| -> PwaProfile {
            // random 1-Lipschitz vertex values: cumulative sums of bounded steps
            loop {
                let mut values = std::collections::BTreeMap::new();
                let mut level = Rat::new(rng.gen_range(-2..=2), 4);
                for unit in mesh.vertex_units() {
                    values.insert(unit.clone(), level);
                    let step = Rat::new(rng.gen_range(-4..=4), 4) * rat::rat(1, 4);
                    level += step;
                }
                if let Ok(p) = PwaProfile::new(mesh.clone(), values) {
                    return p;
                }
            }
        };
        let mut pass = 0;
        for _ in 0..50 {
            let h = random_pwa(&mut rng);
            let ht = random_pwa(&mut rng);
            // exact sup distance on the common mesh vertices
            let eps = h
                .vertex_values()
                .iter()
                .map(|(k, v)| (*v - ht.vertex_values()[k]).abs())
                .max()
                .unwrap()
                .max(rat::rat(1, 8));
            let big = count_ball(
                &d,
                &LipschitzProfile::PiecewiseAffine(h.clone()),
                eps * rat::rat_int(2),
                opts,
            )?;
            let small = count_ball(&d, &LipschitzProfile::PiecewiseAffine(ht.clone()), eps, opts)?;
            if big.count >= small.count {
                pass += 1;
            }
        }
        report.push("profile-change inclusion (50 random pairs)", pass as f64, 50.0);
        all_ok &= pass == 50;
    }

    // (2) domain shrink, overcount direction: |B(R_n, h, eps)| >=
    //     |B(R~_n, h, (c/3) eps^2)| for nested intervals, Lip(h) <= 1 - c eps
    {
        let eps = rat::rat(1, 4);
        let c = rat::rat_int(1);
        let n = 16u32;
        let big_r = ContinuumDomain::unit_box(1);
        let small_r =
            ContinuumDomain::new_box(vec![rat::rat(1, 8)], vec![rat::rat(7, 8)]).unwrap();
        let p = LipschitzProfile::affine(vec![rat::rat(1, 2)], Rat::zero())?;
        let d_big = Arc::new(discretize(&big_r, n)?);
        let d_small = Arc::new(discretize(&small_r, n)?);
        let lhs = count_ball(&d_big, &p, eps, opts)?;
        let rhs = count_ball(&d_small, &p, c / rat::rat_int(3) * eps * eps, opts)?;
        let ok = lhs.count >= rhs.count;
        report.push(
            "domain-shrink overcount (nested intervals)",
            f64::from(u8::from(ok)),
            1.0,
        );
        all_ok &= ok;
    }

    // (3) restriction undercount: |B(R_n, h, eps)| <= 2^{|R_n \ R~_n|} |B(R~_n, h, eps)|
    {
        let eps = rat::rat(1, 4);
        let n = 16u32;
        let big_r = ContinuumDomain::unit_box(1);
        let small_r =
            ContinuumDomain::new_box(vec![rat::rat(1, 8)], vec![rat::rat(7, 8)]).unwrap();
        let p = LipschitzProfile::affine(vec![rat::rat(1, 2)], Rat::zero())?;
        let d_big = Arc::new(discretize(&big_r, n)?);
        let d_small = Arc::new(discretize(&small_r, n)?);
        let lhs = count_ball(&d_big, &p, eps, opts)?;
        let rhs = count_ball(&d_small, &p, eps, opts)?;
        let missing = (d_big.site_count() - d_small.site_count()) as u32;
        let bound = rhs.count.clone() << missing;
        let ok = lhs.count <= bound;
        report.push(
            "restriction undercount (2^missing factor)",
            f64::from(u8::from(ok)),
            1.0,
        );
        all_ok &= ok;
    }

    // (4) macro robustness: profiles with identical gradients off a small
    //     fraction of simplices have entropies within fraction * 2 ln 2
    {
        let r = ContinuumDomain::unit_box(1);
        let mesh = simplices_inside(&r, rat::rat(1, 8))?;
        let model = SurfaceTensionModel::ClosedForm1D;
        let base = interpolate_on_mesh(
            &LipschitzProfile::affine(vec![rat::rat(1, 2)], Rat::zero())?,
            &mesh,
        )?;
        // perturb one interior vertex: two incident simplices change slope
        let mut values = base.vertex_values().clone();
        let key = vec![4i64];
        values.insert(key, base.vertex_values()[&vec![4i64]] + rat::rat(1, 16));
        let perturbed = PwaProfile::new(mesh.clone(), values)?;
        let e1 = macro_entropy(&base, &model)?;
        let e2 = macro_entropy(&perturbed, &model)?;
        let fraction = 2.0 / mesh.simplices().len() as f64;
        let ok = (e1 - e2).abs() <= fraction * 2.0 * std::f64::consts::LN_2 + 1e-12;
        report.push("macro-entropy robustness", f64::from(u8::from(ok)), 1.0);
        all_ok &= ok;
    }

    // (5) box-growth count inequality via the Kirszbraun injection, m = 1:
    //     with feasible (n, delta) and nearby slopes, the bigger cube with
    //     the nearby affine boundary has at least as many states
    {
        let mut checked = 0;
        let mut ok_count = 0;
        for (n, delta_num, delta_den) in [(20u32, 1i64, 4i64), (24, 1, 4), (32, 1, 4), (48, 1, 5)]
        {
            let delta = Rat::new(delta_num, delta_den);
            // feasibility of the paper-internal step requires delta^2 n > 1
            if delta * delta * Rat::from_integer(n as i64) <= Rat::one() {
                continue;
            }
            let n_hat = rat::ceil_rat(
                &((Rat::one() + delta) * Rat::from_integer(n as i64)),
            ) as u32;
            let s = rat::rat(1, 8); // |s| <= 1 - 3 delta for these deltas
            let s_hat = s + delta * delta / (Rat::one() + delta) / rat::rat_int(2);
            if s_hat.abs() > Rat::one() - rat::rat_int(3) * delta {
                continue;
            }
            let d_small = Arc::new(DiscreteDomain::cube(1, n));
            let d_large = Arc::new(DiscreteDomain::cube(1, n_hat));
            let h_small =
                affine_height_function(&AffineSpec::new(vec![s], Rat::zero())?, &d_small);
            let h_large =
                affine_height_function(&AffineSpec::new(vec![s_hat], Rat::zero())?, &d_large);
            let c_small = count_exact_boundary(&d_small, &h_small, opts)?;
            let c_large = count_exact_boundary(&d_large, &h_large, opts)?;
            checked += 1;
            if c_large.count >= c_small.count {
                ok_count += 1;
            }
        }
        report.push(
            "box-growth count inequality (feasible m=1 grid)",
            ok_count as f64,
            checked as f64,
        );
        all_ok &= ok_count == checked && checked > 0;
    }

    // (6) near-slope-one entropy bound: |ent_n(1-delta)| within the binomial
    //     envelope H(delta) + ln(n+1)/n
    {
        let mut ok = true;
        for n in [8u32, 16, 32, 64] {
            for delta in [rat::rat(1, 8), rat::rat(1, 4)] {
                let s = Rat::one() - delta;
                let ent = enumeration::ent_local_n(1, &[s], n, opts)?;
                let df = rat::rat_to_f64(&delta);
                let envelope = -df * df.ln() - (1.0 - df) * (1.0 - df).ln()
                    + ((n
                        as f64)
                        + 1.0)
                        .ln()
                        / n as f64;
                ok &= ent.abs() <= envelope + 1e-12;
            }
        }
        report.push("near-slope-one entropy envelope", f64::from(u8::from(ok)), 1.0);
        all_ok &= ok;
    }

    report.verdict = all_ok;
    report.runtime_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rat_int};

    fn opts() -> CountOptions {
        CountOptions::default()
    }

    #[test]
    fn simplicial_profile_one_dim_affine() {
        let r = ContinuumDomain::unit_box(1);
        let mesh = simplices_inside(&r, rat_int(1)).unwrap();
        let h_k = interpolate_on_mesh(
            &LipschitzProfile::affine(vec![rat(1, 2)], rat_int(0)).unwrap(),
            &mesh,
        )
        .unwrap();
        let report = check_simplicial_profile(
            &h_k,
            &SurfaceTensionModel::ClosedForm1D,
            rat(1, 4),
            &[8, 16, 32, 64],
            0.15,
            &opts(),
        )
        .unwrap();
        assert!(report.verdict, "report: {report:?}");
        // rhs is sigma(1/2) for every instance
        for inst in &report.instances {
            assert!((inst.rhs - enumeration::sigma_1d(0.5)).abs() < 1e-12);
        }
    }

    #[test]
    fn simplicial_profile_rigid_slope() {
        let r = ContinuumDomain::unit_box(1);
        let mesh = simplices_inside(&r, rat_int(1)).unwrap();
        let h_k = interpolate_on_mesh(
            &LipschitzProfile::affine(vec![rat_int(1)], rat_int(0)).unwrap(),
            &mesh,
        )
        .unwrap();
        let report = check_simplicial_profile(
            &h_k,
            &SurfaceTensionModel::ClosedForm1D,
            rat(1, 8),
            &[4, 8, 12],
            1e-9,
            &opts(),
        )
        .unwrap();
        assert!(report.verdict);
        for inst in &report.instances {
            assert_eq!(inst.lhs, 0.0);
            assert_eq!(inst.rhs, 0.0);
        }
    }

    #[test]
    fn variational_one_dim() {
        let r = ContinuumDomain::unit_box(1);
        let boundary = LipschitzProfile::affine(vec![rat(1, 2)], rat_int(0)).unwrap();
        let report = check_variational(
            &r,
            &boundary,
            &SurfaceTensionModel::ClosedForm1D,
            rat(1, 10),
            64,
            rat(1, 8),
            0.1,
            &opts(),
        )
        .unwrap();
        assert!(report.verdict, "{report:?}");
    }

    #[test]
    fn variational_rigid() {
        // slope-1 boundary: the minimizer is pinned at 0 exactly. The counted
        // side is exactly 0 only once the delta window collapses to the pins
        // (delta * n <= 1); a wide window re-admits sub-maximal slopes.
        let r = ContinuumDomain::unit_box(1);
        let boundary = LipschitzProfile::affine(vec![rat_int(1)], rat_int(0)).unwrap();
        let collapsed = check_variational(
            &r,
            &boundary,
            &SurfaceTensionModel::ClosedForm1D,
            rat(1, 100),
            32,
            rat(1, 8),
            1e-9,
            &opts(),
        )
        .unwrap();
        assert!(collapsed.verdict, "{collapsed:?}");
        assert_eq!(collapsed.instances[0].lhs, 0.0);
        assert_eq!(collapsed.instances[0].rhs, 0.0);

        let wide = check_variational(
            &r,
            &boundary,
            &SurfaceTensionModel::ClosedForm1D,
            rat(1, 10),
            32,
            rat(1, 8),
            1e-9,
            &opts(),
        )
        .unwrap();
        assert_eq!(wide.instances[0].lhs, 0.0);
        assert!(wide.instances[0].rhs < -0.1, "{wide:?}");
    }

    #[test]
    fn mu_is_a_probability() {
        let r = ContinuumDomain::unit_box(1);
        let d = Arc::new(discretize(&r, 16).unwrap());
        let boundary = LipschitzProfile::affine(vec![rat(1, 2)], rat_int(0)).unwrap();
        let hb = rounded_profile_height(&d, &boundary).unwrap();
        // the whole space: a ball of huge radius
        let all = measure_mu(
            &d,
            &hb,
            rat(1, 10),
            &[EventBall {
                center: boundary.clone(),
                radius: rat_int(10),
                open: false,
            }],
            &opts(),
        )
        .unwrap();
        assert_eq!(all.numerator, all.denominator);
        assert!((all.mu() - 1.0).abs() < 1e-12);
        assert_eq!(all.rate(), 0.0);

        // disjoint event: a ball around a far-shifted profile
        let far = LipschitzProfile::affine(vec![rat(1, 2)], rat_int(5)).unwrap();
        let none = measure_mu(
            &d,
            &hb,
            rat(1, 10),
            &[EventBall {
                center: far,
                radius: rat(1, 20),
                open: true,
            }],
            &opts(),
        )
        .unwrap();
        assert!(none.numerator.is_zero());
        assert_eq!(none.mu(), 0.0);
        assert_eq!(none.rate(), f64::INFINITY);
    }

    #[test]
    fn mu_union_additivity() {
        // two disjoint balls: counts add exactly
        let r = ContinuumDomain::unit_box(1);
        let d = Arc::new(discretize(&r, 16).unwrap());
        let boundary = LipschitzProfile::affine(vec![rat_int(0)], rat_int(0)).unwrap();
        let hb = rounded_profile_height(&d, &boundary).unwrap();
        let delta = rat(1, 2);
        let b1 = EventBall {
            center: LipschitzProfile::affine(vec![rat(1, 2)], rat_int(0)).unwrap(),
            radius: rat(1, 10),
            open: false,
        };
        let b2 = EventBall {
            center: LipschitzProfile::affine(vec![rat(-1, 2)], rat_int(0)).unwrap(),
            radius: rat(1, 10),
            open: false,
        };
        let mu1 = measure_mu(&d, &hb, delta, &[b1], &opts()).unwrap();
        let b1 = EventBall {
            center: LipschitzProfile::affine(vec![rat(1, 2)], rat_int(0)).unwrap(),
            radius: rat(1, 10),
            open: false,
        };
        let mu2 = measure_mu(&d, &hb, delta, &[b2], &opts()).unwrap();
        let b2 = EventBall {
            center: LipschitzProfile::affine(vec![rat(-1, 2)], rat_int(0)).unwrap(),
            radius: rat(1, 10),
            open: false,
        };
        let mu12 = measure_mu(&d, &hb, delta, &[b1, b2], &opts()).unwrap();
        assert_eq!(mu12.numerator, &mu1.numerator + &mu2.numerator);
    }

    #[test]
    fn robustness_lemmas_pass() {
        let report = check_robustness_lemmas(11, &opts()).unwrap();
        assert!(report.verdict, "{report:?}");
    }
}
