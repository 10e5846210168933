//! Random height functions: exact uniform sampling through the counting
//! engine's conditional counts, and Glauber dynamics for larger lattices.
//!
//! Reproducibility: every random decision is a pure function of
//! (seed, site index, step counter) through a counter-based ChaCha stream, so
//! samples are identical regardless of thread count or scheduling.

use std::io::Write;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::Zero;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::enumeration::{CountOptions, Engine, SiteConstraint};
use crate::error::{Error, Result};
use crate::height::HeightFunction;
use crate::kirszbraun::PartialHeightFunction;
use crate::lattice::DiscreteDomain;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampleMode {
    Exact,
    Glauber { sweeps: u32 },
}

#[derive(Clone, Copy, Debug)]
pub struct SamplerConfig {
    pub mode: SampleMode,
    pub seed: u64,
}

/// RNG identity recorded in output metadata.
pub const RNG_ALGORITHM: &str = "chacha8-site-stream";

fn seed_bytes(seed: u64) -> [u8; 32] {
    let mut out = [0u8; 32];
    out[..8].copy_from_slice(&seed.to_le_bytes());
    out
}

/// The unit uniform for a (site, step) pair: ChaCha8 keyed by the seed, with
/// the site index selecting the stream and the step the word position.
fn site_unit(seed: u64, site: u64, step: u64) -> f64 {
    let mut rng = ChaCha8Rng::from_seed(seed_bytes(seed));
    rng.set_stream(site);
    rng.set_word_pos(step as u128 * 4);
    rng.gen::<f64>()
}

/// Uniform BigUint below `bound` by rejection on the top bit-window.
fn big_below(rng: &mut ChaCha8Rng, bound: &BigUint) -> BigUint {
    assert!(!bound.is_zero());
    let bits = bound.bits();
    let bytes = bits.div_ceil(8) as usize;
    loop {
        let mut buf = vec![0u8; bytes];
        rng.fill_bytes(&mut buf);
        // mask excess high bits
        let excess = (bytes as u64 * 8 - bits) as u32;
        if excess > 0 {
            buf[bytes - 1] &= 0xffu8 >> excess;
        }
        let candidate = BigUint::from_bytes_le(&buf);
        if candidate < *bound {
            return candidate;
        }
    }
}

/// Exactly uniform sample from the set of height functions satisfying the
/// constraint. One backward pass of the counting engine yields every
/// conditional distribution; the forward walk then draws site values
/// proportionally to their completion counts.
pub fn sample_exact(
    d: &Arc<DiscreteDomain>,
    c: &SiteConstraint,
    seed: u64,
    opts: &CountOptions,
) -> Result<HeightFunction> {
    let engine = Engine::prepare(d, c)?.ok_or(Error::EmptySet)?;
    let messages = engine.suffix_messages(opts)?;
    let empty: Box<[i32]> = Vec::new().into_boxed_slice();
    let total = messages[0].get(&empty).cloned().unwrap_or_default();
    if total.is_zero() {
        return Err(Error::EmptySet);
    }
    let mut rng = ChaCha8Rng::from_seed(seed_bytes(seed));
    rng.set_stream(u64::MAX); // exact sampler uses its own stream
    let mut state = empty;
    let mut values = Vec::with_capacity(engine.sites());
    for site in 0..engine.sites() {
        let weights: Vec<(i32, BigUint)> = engine
            .candidates_at(site, &state)
            .into_iter()
            .map(|v| {
                let next = engine.advance(site, &state, v);
                let w = messages[site + 1].get(&next).cloned().unwrap_or_default();
                (v, w)
            })
            .filter(|(_, w)| !w.is_zero())
            .collect();
        let total_here: BigUint = weights.iter().map(|(_, w)| w.clone()).sum();
        debug_assert!(!total_here.is_zero());
        let mut draw = big_below(&mut rng, &total_here);
        let mut chosen = weights[0].0;
        for (v, w) in &weights {
            if draw < *w {
                chosen = *v;
                break;
            }
            draw -= w;
        }
        values.push(chosen as i64);
        state = engine.advance(site, &state, chosen);
    }
    HeightFunction::new(d.clone(), values)
}

/// A feasible initial state: extend the pins (or, with no pins, the
/// parity-rounded window midpoints on constrained sites) by the minimal
/// Kirszbraun extension, then verify the windows.
fn initial_state(d: &Arc<DiscreteDomain>, c: &SiteConstraint) -> Result<HeightFunction> {
    let mut anchors = std::collections::BTreeMap::new();
    for (idx, v) in c.pins() {
        anchors.insert(idx, v);
    }
    if anchors.is_empty() {
        for (idx, p) in d.points().iter().enumerate() {
            let (lo, hi) = c.window(idx);
            if lo > i64::MIN / 8 && hi < i64::MAX / 8 {
                let mid = crate::rat::Rat::new(lo + hi, 2);
                anchors.insert(idx, crate::height::parity_round(mid, p));
            }
        }
    }
    if anchors.is_empty() {
        return Err(Error::EmptySet);
    }
    let partial = PartialHeightFunction::new(d.clone(), anchors);
    let h = partial.extend_min()?;
    for idx in 0..d.site_count() {
        let (lo, hi) = c.window(idx);
        let v = h.value_at(idx);
        if v < lo || v > hi {
            return Err(Error::EmptySet);
        }
    }
    Ok(h)
}

/// Single-site heat-bath dynamics, reversible for the uniform law on the
/// constrained set. Sites update in checkerboard order (parity classes), so
/// parallel updates never touch adjacent sites; the chain is deterministic in
/// the seed. Mixing is not certified: outputs are approximate.
pub fn sample_glauber(
    d: &Arc<DiscreteDomain>,
    c: &SiteConstraint,
    seed: u64,
    sweeps: u32,
) -> Result<HeightFunction> {
    let init = initial_state(d, c)?;
    let mut values = init.values().to_vec();
    let pinned: Vec<bool> = {
        let mut p = vec![false; d.site_count()];
        for (idx, _) in c.pins() {
            p[idx] = true;
        }
        p
    };
    let classes: [Vec<usize>; 2] = {
        let mut even = Vec::new();
        let mut odd = Vec::new();
        for (i, p) in d.points().iter().enumerate() {
            if p.parity() == 0 {
                even.push(i);
            } else {
                odd.push(i);
            }
        }
        [even, odd]
    };
    let neighbor_cache: Vec<Vec<usize>> = (0..d.site_count())
        .map(|i| d.neighbor_indices(i))
        .collect();
    for sweep in 0..sweeps {
        for class in &classes {
            let updates: Vec<(usize, i64)> = class
                .par_iter()
                .filter(|&&i| !pinned[i])
                .map(|&i| {
                    let (lo, hi) = c.window(i);
                    let nbrs = &neighbor_cache[i];
                    // candidate values adjacent to every neighbor
                    let candidates: Vec<i64> = if nbrs.is_empty() {
                        vec![values[i]]
                    } else {
                        let a = values[nbrs[0]];
                        [a - 1, a + 1]
                            .into_iter()
                            .filter(|v| *v >= lo && *v <= hi)
                            .filter(|v| nbrs.iter().all(|&j| (values[j] - v).abs() == 1))
                            .collect()
                    };
                    if candidates.is_empty() {
                        return (i, values[i]);
                    }
                    // each site updates once per sweep, so (site, sweep) is a
                    // unique counter pair
                    let u = site_unit(seed, i as u64, sweep as u64);
                    let pick = ((u * candidates.len() as f64) as usize)
                        .min(candidates.len() - 1);
                    (i, candidates[pick])
                })
                .collect();
            let mut next = values.clone();
            for (i, v) in updates {
                next[i] = v;
            }
            values = next;
        }
    }
    HeightFunction::new(d.clone(), values)
}

/// Fixed five-stop palette (dark violet to yellow), linearly interpolated.
fn palette(t: f64) -> [u8; 3] {
    const STOPS: [[u8; 3]; 5] = [
        [68, 1, 84],
        [59, 82, 139],
        [33, 145, 140],
        [94, 201, 98],
        [253, 231, 37],
    ];
    let t = t.clamp(0.0, 1.0) * (STOPS.len() - 1) as f64;
    let k = (t as usize).min(STOPS.len() - 2);
    let frac = t - k as f64;
    let mut out = [0u8; 3];
    for i in 0..3 {
        let a = STOPS[k][i] as f64;
        let b = STOPS[k + 1][i] as f64;
        out[i] = (a + (b - a) * frac).round() as u8;
    }
    out
}

/// Writes the field as CSV and, for m = 2, optionally as a binary PPM (P6)
/// heatmap. Output bytes are a pure function of the input.
pub fn emit_field(
    h: &HeightFunction,
    header_comment: &str,
    csv: &mut dyn Write,
    ppm: Option<&mut dyn Write>,
) -> Result<()> {
    csv.write_all(h.to_csv(header_comment).as_bytes())?;
    let Some(ppm) = ppm else {
        return Ok(());
    };
    let d = h.domain();
    if d.dim() != 2 {
        return Err(Error::UnsupportedDimension(d.dim()));
    }
    let (mut lo, mut hi) = ([i64::MAX; 2], [i64::MIN; 2]);
    for p in d.points() {
        for a in 0..2 {
            lo[a] = lo[a].min(p.coords()[a]);
            hi[a] = hi[a].max(p.coords()[a]);
        }
    }
    let (w, ht) = (
        (hi[0] - lo[0] + 1) as usize,
        (hi[1] - lo[1] + 1) as usize,
    );
    let vmin = *h.values().iter().min().unwrap();
    let vmax = *h.values().iter().max().unwrap();
    write!(ppm, "P6\n{w} {ht}\n255\n")?;
    let mut row = Vec::with_capacity(w * 3);
    for y in 0..ht {
        row.clear();
        for x in 0..w {
            // image rows run top-down; lattice y runs bottom-up
            let coords = [lo[0] + x as i64, hi[1] - y as i64];
            let rgb = match h.value_at_point(&coords) {
                None => [0u8; 3],
                Some(v) => {
                    // a collapsed range maps everything to mid-palette
                    let t = if vmax > vmin {
                        (v - vmin) as f64 / (vmax - vmin) as f64
                    } else {
                        0.5
                    };
                    palette(t)
                }
            };
            row.extend_from_slice(&rgb);
        }
        ppm.write_all(&row)?;
    }
    Ok(())
}

/// Brute-force distribution support for small instances: all height
/// functions satisfying the constraint, in lexicographic value order.
pub fn enumerate_all(d: &Arc<DiscreteDomain>, c: &SiteConstraint) -> Result<Vec<HeightFunction>> {
    let engine = Engine::prepare(d, c)?.ok_or(Error::EmptySet)?;
    let messages = engine.suffix_messages(&CountOptions::default())?;
    let mut out = Vec::new();
    let empty: Box<[i32]> = Vec::new().into_boxed_slice();
    let mut stack: Vec<(usize, Box<[i32]>, Vec<i64>)> = vec![(0, empty, Vec::new())];
    while let Some((site, state, prefix)) = stack.pop() {
        if site == engine.sites() {
            out.push(HeightFunction::new(d.clone(), prefix)?);
            continue;
        }
        // reverse order keeps the stack producing lexicographic output
        for v in engine.candidates_at(site, &state).into_iter().rev() {
            let next = engine.advance(site, &state, v);
            if messages[site + 1]
                .get(&next)
                .map_or(false, |w| !w.is_zero())
            {
                let mut p = prefix.clone();
                p.push(v as i64);
                stack.push((site + 1, next, p));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::height::{affine_height_function, validate_values, AffineSpec};
    use crate::lattice::{discretize, ContinuumDomain};
    use crate::rat::{rat, rat_int, Rat};
    use std::collections::HashMap;

    fn opts() -> CountOptions {
        CountOptions::default()
    }

    fn line_domain(len: i64) -> Arc<DiscreteDomain> {
        let r = ContinuumDomain::new_box(vec![rat_int(0)], vec![rat_int(len)]).unwrap();
        Arc::new(discretize(&r, 1).unwrap())
    }

    #[test]
    fn exact_sampler_two_state_instance() {
        let d = line_domain(2);
        let mut c = SiteConstraint::unconstrained(&d);
        c.pin(&d, 0, 0).unwrap();
        c.pin(&d, 2, 0).unwrap();
        let mut counts: HashMap<i64, usize> = HashMap::new();
        for seed in 0..2000u64 {
            let h = sample_exact(&d, &c, seed, &opts()).unwrap();
            assert!(validate_values(&d, h.values()).is_ok());
            *counts.entry(h.value_at(1)).or_default() += 1;
        }
        let up = counts[&1];
        let down = counts[&-1];
        assert_eq!(up + down, 2000);
        // crude 4-sigma band for a fair coin over 2000 draws
        assert!((up as f64 - 1000.0).abs() < 4.0 * (2000.0f64 * 0.25).sqrt());
    }

    #[test]
    fn exact_sampler_is_deterministic_in_seed() {
        let d = line_domain(6);
        let mut c = SiteConstraint::unconstrained(&d);
        c.pin(&d, 0, 0).unwrap();
        c.pin(&d, 6, 0).unwrap();
        let a = sample_exact(&d, &c, 42, &opts()).unwrap();
        let b = sample_exact(&d, &c, 42, &opts()).unwrap();
        assert_eq!(a.values(), b.values());
        let c2 = sample_exact(&d, &c, 43, &opts()).unwrap();
        // different seeds usually differ; just check both are valid
        assert!(validate_values(&d, c2.values()).is_ok());
    }

    #[test]
    fn exact_sampler_rigid_instance() {
        let d = line_domain(3);
        let mut c = SiteConstraint::unconstrained(&d);
        c.pin(&d, 0, 0).unwrap();
        c.pin(&d, 3, 3).unwrap();
        for seed in 0..5 {
            let h = sample_exact(&d, &c, seed, &opts()).unwrap();
            assert_eq!(h.values(), &[0, 1, 2, 3]);
        }
    }

    #[test]
    fn empty_set_reported() {
        let d = line_domain(2);
        let mut c = SiteConstraint::unconstrained(&d);
        c.pin(&d, 0, 0).unwrap();
        c.pin(&d, 2, 0).unwrap();
        c.restrict(1, 5, 7);
        assert!(matches!(
            sample_exact(&d, &c, 1, &opts()),
            Err(Error::EmptySet)
        ));
    }

    #[test]
    fn enumerate_all_matches_count() {
        let d = Arc::new(DiscreteDomain::cube(2, 3));
        let spec = AffineSpec::new(vec![rat_int(0), rat_int(0)], rat_int(0)).unwrap();
        let h = affine_height_function(&spec, &d);
        let c = crate::enumeration::exact_boundary_constraint(&d, &h).unwrap();
        let all = enumerate_all(&d, &c).unwrap();
        assert_eq!(all.len(), 2);
        for f in &all {
            assert!(validate_values(&d, f.values()).is_ok());
        }
    }

    #[test]
    fn glauber_single_free_site_uniform() {
        // one free site resamples exactly uniformly in one sweep
        let d = line_domain(2);
        let mut c = SiteConstraint::unconstrained(&d);
        c.pin(&d, 0, 0).unwrap();
        c.pin(&d, 2, 0).unwrap();
        let mut ups = 0;
        let trials = 4000;
        for seed in 0..trials {
            let h = sample_glauber(&d, &c, seed, 1).unwrap();
            assert!(validate_values(&d, h.values()).is_ok());
            if h.value_at(1) == 1 {
                ups += 1;
            }
        }
        let expect = trials as f64 / 2.0;
        assert!((ups as f64 - expect).abs() < 4.0 * (trials as f64 * 0.25).sqrt());
    }

    #[test]
    fn glauber_preserves_feasibility_and_seed_determinism() {
        let d = Arc::new(DiscreteDomain::cube(2, 4));
        let spec = AffineSpec::new(vec![rat(1, 2), rat_int(0)], rat_int(0)).unwrap();
        let h = affine_height_function(&spec, &d);
        let c = crate::enumeration::exact_boundary_constraint(&d, &h).unwrap();
        let a = sample_glauber(&d, &c, 9, 20).unwrap();
        let b = sample_glauber(&d, &c, 9, 20).unwrap();
        assert_eq!(a.values(), b.values());
        assert!(validate_values(&d, a.values()).is_ok());
        for (idx, v) in c.pins() {
            assert_eq!(a.value_at(idx), v);
        }
    }

    #[test]
    fn diamond_sample_respects_lipschitz_cone() {
        // aztec-like diamond with flat boundary rounding: |h| stays within
        // the cone from the boundary pins
        let r = ContinuumDomain::l1_ball(2, Rat::from_integer(8));
        let d = Arc::new(discretize(&r, 1).unwrap());
        let spec = AffineSpec::new(vec![rat_int(0), rat_int(0)], rat_int(0)).unwrap();
        let hb = affine_height_function(&spec, &d);
        let c = crate::enumeration::exact_boundary_constraint(&d, &hb).unwrap();
        let h = sample_glauber(&d, &c, 3, 10).unwrap();
        let max_abs = h.values().iter().map(|v| v.abs()).max().unwrap();
        assert!(max_abs <= 9); // boundary values 0/1, diameter cone bound
    }

    #[test]
    fn ppm_output_is_deterministic_and_well_formed() {
        let d = Arc::new(DiscreteDomain::cube(2, 3));
        let spec = AffineSpec::new(vec![rat_int(0), rat_int(0)], rat_int(0)).unwrap();
        let h = affine_height_function(&spec, &d);
        let mut csv1 = Vec::new();
        let mut ppm1 = Vec::new();
        emit_field(&h, "# test", &mut csv1, Some(&mut ppm1)).unwrap();
        let mut csv2 = Vec::new();
        let mut ppm2 = Vec::new();
        emit_field(&h, "# test", &mut csv2, Some(&mut ppm2)).unwrap();
        assert_eq!(csv1, csv2);
        assert_eq!(ppm1, ppm2);
        assert!(ppm1.starts_with(b"P6\n3 3\n255\n"));
        assert_eq!(ppm1.len(), b"P6\n3 3\n255\n".len() + 27);
        assert_eq!(String::from_utf8(csv1.clone()).unwrap().lines().count(), 11); // comment + header + 9 rows
    }

    #[test]
    fn ppm_degenerate_range_and_dimension_guard() {
        // a single-site domain has a collapsed height range; the pixel maps
        // to mid-palette instead of dividing by zero
        let d = Arc::new(
            crate::lattice::DiscreteDomain::from_points(
                1,
                2,
                vec![crate::lattice::LatticePoint(vec![0, 0])],
            )
            .unwrap(),
        );
        let h = HeightFunction::new(d, vec![0]).unwrap();
        let mut ppm = Vec::new();
        emit_field(&h, "", &mut Vec::new(), Some(&mut ppm)).unwrap();
        assert!(ppm.starts_with(b"P6\n1 1\n255\n"));
        assert_eq!(&ppm[ppm.len() - 3..], &palette(0.5));

        let rejected = emit_field(
            &affine_height_function(
                &AffineSpec::new(vec![rat_int(0)], rat_int(0)).unwrap(),
                &line_domain(2),
            ),
            "",
            &mut Vec::new(),
            Some(&mut Vec::new()),
        );
        assert!(matches!(rejected, Err(Error::UnsupportedDimension(1))));
    }
}
