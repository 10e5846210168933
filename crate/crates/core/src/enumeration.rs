//! Exact big-integer counting of constrained height functions, microscopic
//! entropy, and the local surface tension.
//!
//! Counting sweeps the sites in lexicographic order. Because every lattice
//! predecessor z - e_k precedes z in that order, the set of already-assigned
//! sites with unassigned neighbors (the frontier) is a thin slice, and the
//! count factors over value assignments on it. States store absolute values;
//! the per-site windows (tightened through Lipschitz-cone propagation from
//! the pins) keep them in a small range.

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::height::{HeightFunction, LipschitzProfile};
use crate::lattice::DiscreteDomain;
use crate::rat::{self, Rat};

const UNBOUNDED: i64 = i64::MAX / 4;

/// Per-site admissible windows (inclusive, parity-snapped lazily).
#[derive(Clone, Debug)]
pub struct SiteConstraint {
    lo: Vec<i64>,
    hi: Vec<i64>,
    pins: Vec<Option<i64>>,
}

impl SiteConstraint {
    pub fn unconstrained(d: &DiscreteDomain) -> Self {
        SiteConstraint {
            lo: vec![-UNBOUNDED; d.site_count()],
            hi: vec![UNBOUNDED; d.site_count()],
            pins: vec![None; d.site_count()],
        }
    }

    /// Pins the site to an exact value; fails if the value has the wrong
    /// parity for the site.
    pub fn pin(&mut self, d: &DiscreteDomain, idx: usize, value: i64) -> Result<()> {
        let p = &d.points()[idx];
        if value.rem_euclid(2) != p.parity() as i64 {
            return Err(Error::UnsatisfiableParity {
                point: p.coords().to_vec(),
                value,
            });
        }
        self.lo[idx] = self.lo[idx].max(value);
        self.hi[idx] = self.hi[idx].min(value);
        self.pins[idx] = Some(value);
        Ok(())
    }

    /// Intersects the site window with [lo, hi] (inclusive).
    pub fn restrict(&mut self, idx: usize, lo: i64, hi: i64) {
        self.lo[idx] = self.lo[idx].max(lo);
        self.hi[idx] = self.hi[idx].min(hi);
    }

    pub fn window(&self, idx: usize) -> (i64, i64) {
        (self.lo[idx], self.hi[idx])
    }

    pub fn pins(&self) -> impl Iterator<Item = (usize, i64)> + '_ {
        self.pins
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.map(|v| (i, v)))
    }

    /// All windows and pins shifted by c. Shifting by an even integer is a
    /// bijection on height functions, so counts are unchanged.
    pub fn translated(&self, c: i64) -> Self {
        SiteConstraint {
            lo: self.lo.iter().map(|v| v.saturating_add(c).min(UNBOUNDED)).collect(),
            hi: self.hi.iter().map(|v| v.saturating_add(c).min(UNBOUNDED)).collect(),
            pins: self.pins.iter().map(|p| p.map(|v| v + c)).collect(),
        }
    }
}

/// Pins every boundary site to the values of the given height function.
pub fn exact_boundary_constraint(d: &DiscreteDomain, h: &HeightFunction) -> Result<SiteConstraint> {
    let mut c = SiteConstraint::unconstrained(d);
    for idx in d.boundary_indices() {
        c.pin(d, idx, h.value_at(idx))?;
    }
    Ok(c)
}

/// Boundary windows |h(z) - hB(z)| < delta * n (strict).
pub fn delta_boundary_constraint(
    d: &DiscreteDomain,
    h_boundary: &HeightFunction,
    delta: Rat,
) -> SiteConstraint {
    let mut c = SiteConstraint::unconstrained(d);
    let bound = delta * Rat::from_integer(d.n() as i64);
    // largest integer strictly below delta*n
    let t = rat::strict_floor(&bound).max(0);
    for idx in d.boundary_indices() {
        let center = h_boundary.value_at(idx);
        c.restrict(idx, center - t, center + t);
    }
    c
}

/// Sup-ball windows |p(z/n) - h(z)/n| < delta (strict) at every site.
pub fn ball_constraint(
    d: &DiscreteDomain,
    p: &LipschitzProfile,
    delta: Rat,
) -> Result<SiteConstraint> {
    let mut c = SiteConstraint::unconstrained(d);
    let n = Rat::from_integer(d.n() as i64);
    for (idx, z) in d.points().iter().enumerate() {
        let x = z.scaled(d.n());
        let center = p
            .eval_exact(&x)
            .ok_or(Error::MeshOutsideDomain)?;
        let lo = rat::strict_ceil(&(n * (center - delta)));
        let hi = rat::strict_floor(&(n * (center + delta)));
        c.restrict(idx, lo, hi);
    }
    Ok(c)
}

/// Exact cardinality plus derived entropy of a set of height functions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountResult {
    pub count: BigUint,
    pub site_count: usize,
}

impl CountResult {
    /// -ln(count)/|R_n|; None on the empty set.
    pub fn entropy(&self) -> Option<f64> {
        if self.count.is_zero() {
            None
        } else {
            Some(-ln_big(&self.count) / self.site_count as f64)
        }
    }

    pub fn entropy_or_err(&self) -> Result<f64> {
        self.entropy().ok_or(Error::EmptySet)
    }
}

/// Natural log of a big integer with ~53-bit precision: top mantissa bits
/// plus an exact power-of-two exponent.
pub fn ln_big(x: &BigUint) -> f64 {
    assert!(!x.is_zero());
    let bits = x.bits();
    if bits <= 53 {
        return (x.to_u64().unwrap() as f64).ln();
    }
    let shift = bits - 53;
    let top = (x >> shift).to_u64().unwrap();
    (top as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

#[derive(Clone, Copy, Debug)]
pub struct CountOptions {
    /// Maximum number of distinct frontier states at any level.
    pub state_budget: usize,
    /// Parallelize level expansion past a size threshold.
    pub parallel: bool,
}

impl Default for CountOptions {
    fn default() -> Self {
        CountOptions {
            state_budget: 4_000_000,
            parallel: true,
        }
    }
}

/// Per-site step of the sweep, precomputed once per instance.
struct StepPlan {
    lo: i64,
    hi: i64,
    /// positions within the incoming frontier of the already-assigned
    /// neighbors of this site
    pred_positions: Vec<usize>,
    /// positions of the incoming frontier kept in the outgoing frontier
    keep_positions: Vec<usize>,
    /// whether this site itself joins the outgoing frontier
    include_new: bool,
}

pub(crate) struct Engine {
    plans: Vec<StepPlan>,
    site_count: usize,
}

type State = Box<[i32]>;
type Level = HashMap<State, BigUint>;

impl Engine {
    /// Tightens windows and lays out the sweep. Returns None when window
    /// propagation proves the count is zero.
    pub(crate) fn prepare(d: &DiscreteDomain, c: &SiteConstraint) -> Result<Option<Engine>> {
        let n_sites = d.site_count();
        let mut lo = c.lo.clone();
        let mut hi = c.hi.clone();
        let neighbors: Vec<Vec<usize>> = (0..n_sites).map(|i| d.neighbor_indices(i)).collect();

        // parity snap: windows only contain integers of the site parity
        let snap = |lo: &mut Vec<i64>, hi: &mut Vec<i64>| {
            for i in 0..n_sites {
                let parity = d.points()[i].parity() as i64;
                if lo[i] > -UNBOUNDED && lo[i].rem_euclid(2) != parity {
                    lo[i] += 1;
                }
                if hi[i] < UNBOUNDED && hi[i].rem_euclid(2) != parity {
                    hi[i] -= 1;
                }
            }
        };
        snap(&mut lo, &mut hi);

        // Lipschitz-cone propagation to a fixpoint; every pass only tightens
        let mut changed = true;
        while changed {
            changed = false;
            for i in 0..n_sites {
                for &j in &neighbors[i] {
                    if hi[j] < UNBOUNDED && hi[j] + 1 < hi[i] {
                        hi[i] = hi[j] + 1;
                        changed = true;
                    }
                    if lo[j] > -UNBOUNDED && lo[j] - 1 > lo[i] {
                        lo[i] = lo[j] - 1;
                        changed = true;
                    }
                }
            }
        }
        snap(&mut lo, &mut hi);

        for i in 0..n_sites {
            if lo[i] > hi[i] {
                return Ok(None);
            }
            if lo[i] <= -UNBOUNDED / 2 || hi[i] >= UNBOUNDED / 2 {
                return Err(Error::InstanceTooLarge(
                    "windows unbounded: no pin or finite window reaches every site".into(),
                ));
            }
        }

        // frontier membership: site j stays needed while an unprocessed
        // neighbor remains
        let last_use: Vec<usize> = (0..n_sites)
            .map(|i| neighbors[i].iter().copied().max().unwrap_or(i).max(i))
            .collect();
        let mut frontier: Vec<usize> = Vec::new();
        let mut plans = Vec::with_capacity(n_sites);
        for i in 0..n_sites {
            let pred_positions: Vec<usize> = frontier
                .iter()
                .enumerate()
                .filter(|(_, &j)| neighbors[i].contains(&j))
                .map(|(pos, _)| pos)
                .collect();
            debug_assert_eq!(
                pred_positions.len(),
                neighbors[i].iter().filter(|&&j| j < i).count(),
                "a processed neighbor fell off the frontier early"
            );
            let keep_positions: Vec<usize> = frontier
                .iter()
                .enumerate()
                .filter(|(_, &j)| last_use[j] > i)
                .map(|(pos, _)| pos)
                .collect();
            let include_new = last_use[i] > i;
            plans.push(StepPlan {
                lo: lo[i],
                hi: hi[i],
                pred_positions,
                keep_positions,
                include_new,
            });
            frontier = frontier
                .iter()
                .copied()
                .filter(|&j| last_use[j] > i)
                .collect();
            if include_new {
                frontier.push(i);
            }
        }
        Ok(Some(Engine {
            plans,
            site_count: n_sites,
        }))
    }

    fn candidates(plan: &StepPlan, state: &[i32]) -> Vec<i32> {
        if plan.pred_positions.is_empty() {
            // windows are parity-snapped: admissible values step by 2
            let mut out = Vec::with_capacity(((plan.hi - plan.lo) / 2 + 1) as usize);
            let mut v = plan.lo;
            while v <= plan.hi {
                out.push(v as i32);
                v += 2;
            }
            return out;
        }
        let a = state[plan.pred_positions[0]];
        let mut out = Vec::with_capacity(2);
        'cand: for v in [a - 1, a + 1] {
            if (v as i64) < plan.lo || (v as i64) > plan.hi {
                continue;
            }
            for &p in &plan.pred_positions[1..] {
                if (v - state[p]).abs() != 1 {
                    continue 'cand;
                }
            }
            out.push(v);
        }
        out
    }

    fn next_state(plan: &StepPlan, state: &[i32], v: i32) -> State {
        let mut out = Vec::with_capacity(plan.keep_positions.len() + 1);
        for &p in &plan.keep_positions {
            out.push(state[p]);
        }
        if plan.include_new {
            out.push(v);
        }
        out.into_boxed_slice()
    }

    fn expand(plan: &StepPlan, level: &Level, opts: &CountOptions) -> Level {
        let merge = |mut acc: Level, (state, count): (State, BigUint)| {
            *acc.entry(state).or_insert_with(BigUint::zero) += count;
            acc
        };
        if opts.parallel && level.len() > 8192 {
            let entries: Vec<(&State, &BigUint)> = level.iter().collect();
            entries
                .par_chunks(2048)
                .map(|chunk| {
                    let mut local = Level::new();
                    for (state, count) in chunk {
                        for v in Self::candidates(plan, state) {
                            let next = Self::next_state(plan, state, v);
                            *local.entry(next).or_insert_with(BigUint::zero) += *count;
                        }
                    }
                    local
                })
                .reduce(Level::new, |mut a, b| {
                    for (k, v) in b {
                        *a.entry(k).or_insert_with(BigUint::zero) += v;
                    }
                    a
                })
        } else {
            let mut next_level = Level::new();
            for (state, count) in level {
                for v in Self::candidates(plan, state) {
                    let next = Self::next_state(plan, state, v);
                    next_level = merge(next_level, (next, count.clone()));
                }
            }
            next_level
        }
    }

    /// Counts without retaining levels.
    pub(crate) fn count(&self, opts: &CountOptions) -> Result<BigUint> {
        let mut level: Level = HashMap::from([(Vec::new().into_boxed_slice(), BigUint::one())]);
        for plan in &self.plans {
            level = Self::expand(plan, &level, opts);
            if level.len() > opts.state_budget {
                return Err(Error::InstanceTooLarge(format!(
                    "frontier states {} exceed budget {}",
                    level.len(),
                    opts.state_budget
                )));
            }
            if level.is_empty() {
                return Ok(BigUint::zero());
            }
        }
        Ok(level.into_values().sum())
    }

    /// Backward messages for exact sampling: `messages[i]` maps each frontier
    /// state before site i to the number of completions of sites i..N.
    /// One forward pass collects reachable states, one backward pass fills in
    /// the suffix counts; every conditional distribution then comes for free.
    pub(crate) fn suffix_messages(&self, opts: &CountOptions) -> Result<Vec<Level>> {
        let n = self.plans.len();
        let mut reachable: Vec<Vec<State>> = Vec::with_capacity(n + 1);
        let mut level: Level = HashMap::from([(Vec::new().into_boxed_slice(), BigUint::one())]);
        reachable.push(level.keys().cloned().collect());
        for plan in &self.plans {
            level = Self::expand(plan, &level, opts);
            if level.len() > opts.state_budget {
                return Err(Error::InstanceTooLarge(format!(
                    "frontier states {} exceed budget {}",
                    level.len(),
                    opts.state_budget
                )));
            }
            reachable.push(level.keys().cloned().collect());
        }

        let mut messages: Vec<Level> = vec![Level::new(); n + 1];
        for state in &reachable[n] {
            messages[n].insert(state.clone(), BigUint::one());
        }
        for i in (0..n).rev() {
            let plan = &self.plans[i];
            let mut msg = Level::with_capacity(reachable[i].len());
            for state in &reachable[i] {
                let mut total = BigUint::zero();
                for v in Self::candidates(plan, state) {
                    let next = Self::next_state(plan, state, v);
                    if let Some(c) = messages[i + 1].get(&next) {
                        total += c;
                    }
                }
                msg.insert(state.clone(), total);
            }
            messages[i] = msg;
        }
        Ok(messages)
    }

    pub(crate) fn candidates_at(&self, site: usize, state: &[i32]) -> Vec<i32> {
        Self::candidates(&self.plans[site], state)
    }

    pub(crate) fn advance(&self, site: usize, state: &[i32], v: i32) -> State {
        Self::next_state(&self.plans[site], state, v)
    }

    pub(crate) fn sites(&self) -> usize {
        self.site_count
    }
}

/// Exact count of height functions satisfying the constraint, by frontier
/// dynamic programming. The result does not depend on thread count.
pub fn count_constrained(
    d: &DiscreteDomain,
    c: &SiteConstraint,
    opts: &CountOptions,
) -> Result<CountResult> {
    let count = match Engine::prepare(d, c)? {
        None => BigUint::zero(),
        Some(engine) => engine.count(opts)?,
    };
    Ok(CountResult {
        count,
        site_count: d.site_count(),
    })
}

/// |M(R_n, h_boundary)|: exact boundary values.
pub fn count_exact_boundary(
    d: &DiscreteDomain,
    h_boundary: &HeightFunction,
    opts: &CountOptions,
) -> Result<CountResult> {
    let c = exact_boundary_constraint(d, h_boundary)?;
    count_constrained(d, &c, opts)
}

/// |M(R_n, h_boundary, delta)|: boundary values within delta*n (strict).
pub fn count_delta_boundary(
    d: &DiscreteDomain,
    h_boundary: &HeightFunction,
    delta: Rat,
    opts: &CountOptions,
) -> Result<CountResult> {
    let c = delta_boundary_constraint(d, h_boundary, delta);
    count_constrained(d, &c, opts)
}

/// |B(R_n, p, delta)|: the sup-ball around a rescaled profile.
pub fn count_ball(
    d: &DiscreteDomain,
    p: &LipschitzProfile,
    delta: Rat,
    opts: &CountOptions,
) -> Result<CountResult> {
    let c = ball_constraint(d, p, delta)?;
    count_constrained(d, &c, opts)
}

/// ent_n(s): entropy of the cube [0,n)^m with boundary pinned to the affine
/// rounding of slope s (intercept 0).
pub fn ent_local_n(m: usize, s: &[Rat], n: u32, opts: &CountOptions) -> Result<f64> {
    let d = Arc::new(DiscreteDomain::cube(m, n));
    let spec = crate::height::AffineSpec::new(s.to_vec(), Rat::zero())?;
    let h = crate::height::affine_height_function(&spec, &d);
    let result = count_exact_boundary(&d, &h, opts)?;
    result.entropy_or_err()
}

/// The 1D closed form sigma(s) = ((1+s)/2)ln((1+s)/2) + ((1-s)/2)ln((1-s)/2),
/// with the 0 ln 0 = 0 convention at |s| = 1.
pub fn sigma_1d(s: f64) -> f64 {
    let mut total = 0.0;
    for p in [(1.0 + s) / 2.0, (1.0 - s) / 2.0] {
        if p > 0.0 {
            total += p * p.ln();
        }
    }
    total
}

/// One tabulated slope: the measured ent_n values and the extrapolated limit.
#[derive(Clone, Debug, PartialEq)]
pub struct TableRow {
    pub s: Vec<Rat>,
    pub per_n: Vec<f64>,
    pub extrapolated: f64,
}

/// Evaluable local surface tension: the 1D closed form, or a table built by
/// exhaustive counting plus extrapolation over a slope grid.
#[derive(Clone, Debug, PartialEq)]
pub enum SurfaceTensionModel {
    ClosedForm1D,
    Table {
        m: usize,
        axis: Vec<Rat>,
        n_list: Vec<u32>,
        rows: Vec<TableRow>,
    },
}

impl SurfaceTensionModel {
    /// Value at slope s, clamped into [-ln 2, 0]; table models interpolate
    /// multilinearly on the grid.
    pub fn eval(&self, s: &[f64]) -> Result<f64> {
        const TOL: f64 = 1e-12;
        if s.iter().any(|c| c.abs() > 1.0 + TOL) {
            return Err(Error::SlopeOutOfRange(s.to_vec()));
        }
        let raw = match self {
            SurfaceTensionModel::ClosedForm1D => {
                if s.len() != 1 {
                    return Err(Error::SlopeOutOfRange(s.to_vec()));
                }
                sigma_1d(s[0].clamp(-1.0, 1.0))
            }
            SurfaceTensionModel::Table { m, axis, rows, .. } => {
                if s.len() != *m {
                    return Err(Error::SlopeOutOfRange(s.to_vec()));
                }
                let grid: Vec<f64> = axis.iter().map(rat::rat_to_f64).collect();
                // per-axis cell index and interpolation weight
                let mut cell = Vec::with_capacity(*m);
                for &coord in s {
                    let coord = coord.clamp(grid[0], grid[grid.len() - 1]);
                    let mut k = grid.len() - 2;
                    for i in 0..grid.len() - 1 {
                        if coord <= grid[i + 1] {
                            k = i;
                            break;
                        }
                    }
                    let w = (coord - grid[k]) / (grid[k + 1] - grid[k]);
                    cell.push((k, w.clamp(0.0, 1.0)));
                }
                let stride: Vec<usize> = {
                    let mut s = vec![1usize; *m];
                    for i in (0..*m - 1).rev() {
                        s[i] = s[i + 1] * grid.len();
                    }
                    s
                };
                let mut value = 0.0;
                for corner in 0..(1usize << *m) {
                    let mut weight = 1.0;
                    let mut idx = 0usize;
                    for axis_i in 0..*m {
                        let (k, w) = cell[axis_i];
                        let up = (corner >> axis_i) & 1 == 1;
                        weight *= if up { w } else { 1.0 - w };
                        idx += (k + usize::from(up)) * stride[axis_i];
                    }
                    value += weight * rows[idx].extrapolated;
                }
                value
            }
        };
        Ok(raw.clamp(-std::f64::consts::LN_2, 0.0))
    }

    /// Lower convex envelope of a 1D table (no-op for the closed form, which
    /// is already convex). Used before variational minimization.
    pub fn convexified(&self) -> SurfaceTensionModel {
        match self {
            SurfaceTensionModel::Table { m: 1, axis, n_list, rows } => {
                let pts: Vec<(f64, f64)> = axis
                    .iter()
                    .zip(rows)
                    .map(|(s, r)| (rat::rat_to_f64(s), r.extrapolated))
                    .collect();
                let env = lower_convex_envelope(&pts);
                let rows = rows
                    .iter()
                    .zip(env)
                    .map(|(r, v)| TableRow {
                        s: r.s.clone(),
                        per_n: r.per_n.clone(),
                        extrapolated: v,
                    })
                    .collect();
                SurfaceTensionModel::Table {
                    m: 1,
                    axis: axis.clone(),
                    n_list: n_list.clone(),
                    rows,
                }
            }
            other => other.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            SurfaceTensionModel::ClosedForm1D => 1,
            SurfaceTensionModel::Table { m, .. } => *m,
        }
    }
}

/// Values of the lower convex envelope of (x, y) points at the same x's.
fn lower_convex_envelope(pts: &[(f64, f64)]) -> Vec<f64> {
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for &(x, y) in pts {
        while hull.len() >= 2 {
            let (x1, y1) = hull[hull.len() - 2];
            let (x2, y2) = hull[hull.len() - 1];
            // drop the middle point when it lies above the chord
            if (y2 - y1) * (x - x1) >= (y - y1) * (x2 - x1) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push((x, y));
    }
    pts.iter()
        .map(|&(x, _)| {
            let seg = hull.windows(2).find(|w| x >= w[0].0 && x <= w[1].0);
            match seg {
                Some(w) => {
                    let t = if w[1].0 > w[0].0 {
                        (x - w[0].0) / (w[1].0 - w[0].0)
                    } else {
                        0.0
                    };
                    w[0].1 + t * (w[1].1 - w[0].1)
                }
                None => hull.last().unwrap().1,
            }
        })
        .collect()
}

/// Uniformly spaced rational grid of the given size on [-1, 1].
pub fn slope_grid(points: usize) -> Vec<Rat> {
    assert!(points >= 2);
    let steps = points as i64 - 1;
    (0..points as i64)
        .map(|k| Rat::new(2 * k - steps, steps))
        .collect()
}

/// Builds the surface-tension table: for each slope on grid^m, counts
/// ent_n(s) for each n, then extrapolates by least squares against
/// a + b (ln n)/n. The (s, n) instances run in parallel; ordering of the
/// output is the lexicographic grid order, so results are deterministic.
pub fn build_surface_tension_table(
    m: usize,
    axis: Vec<Rat>,
    n_list: Vec<u32>,
    opts: &CountOptions,
) -> Result<SurfaceTensionModel> {
    let mut slopes: Vec<Vec<Rat>> = vec![vec![]];
    for _ in 0..m {
        let mut next = Vec::with_capacity(slopes.len() * axis.len());
        for s in &slopes {
            for &a in &axis {
                let mut t = s.clone();
                t.push(a);
                next.push(t);
            }
        }
        slopes = next;
    }
    let jobs: Vec<(usize, u32)> = slopes
        .iter()
        .enumerate()
        .flat_map(|(i, _)| n_list.iter().map(move |&n| (i, n)))
        .collect();
    let results: Vec<Result<f64>> = jobs
        .par_iter()
        .map(|&(i, n)| ent_local_n(m, &slopes[i], n, opts))
        .collect();
    let mut per_slope: Vec<Vec<f64>> = vec![Vec::new(); slopes.len()];
    for (&(i, _), r) in jobs.iter().zip(results) {
        per_slope[i].push(r?);
    }
    let rows: Vec<TableRow> = slopes
        .into_iter()
        .zip(per_slope)
        .map(|(s, per_n)| {
            let extrapolated = extrapolate_log_over_n(&n_list, &per_n);
            TableRow {
                s,
                per_n,
                extrapolated,
            }
        })
        .collect();
    Ok(SurfaceTensionModel::Table {
        m,
        axis,
        n_list,
        rows,
    })
}

/// Least-squares fit of y ~ a + b (ln n)/n; returns a clamped to [-ln 2, 0].
/// Exactly zero data (rigid slopes) extrapolates to exactly zero.
fn extrapolate_log_over_n(n_list: &[u32], values: &[f64]) -> f64 {
    if values.iter().all(|v| *v == 0.0) {
        return 0.0;
    }
    if values.len() == 1 {
        return values[0].clamp(-std::f64::consts::LN_2, 0.0);
    }
    let xs: Vec<f64> = n_list
        .iter()
        .map(|&n| (n as f64).ln() / n as f64)
        .collect();
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = values.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(values) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let a = mean_y - b * mean_x;
    a.clamp(-std::f64::consts::LN_2, 0.0)
}
