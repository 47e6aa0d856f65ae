//! Enforcing a plane-group setting on an indexed Fourier-coefficient set:
//! orbit computation with glide phase shifts, amplitude and phase
//! symmetrization, phase-origin refinement, reflection conditions, and
//! Fourier synthesis of the symmetrized cell.

use std::collections::BTreeMap;

use rustfft::num_complex::Complex;

use crate::error::{Error, Result};
use crate::groups::PlaneGroup;
use crate::imageio::GrayImage;
use crate::spectrum::{idft2_centered, wrap_deg, IndexedFc, Spectrum};

/// One member of a symmetry orbit in index space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrbitElement {
    pub h: i32,
    pub k: i32,
    /// Degrees, relative to the orbit source: an ideal coefficient satisfies
    /// `phase(h', k') = phase(source) + shift`.
    pub shift_deg: i32,
}

/// Orbit of an index under all point/site operations of a group.
#[derive(Debug, Clone)]
pub struct Orbit {
    pub members: Vec<OrbitElement>,
    /// True when some operation maps an index onto itself (or another orbit
    /// member) with inconsistent phase shifts, forcing the coefficient to
    /// vanish. These are the systematically absent reflections.
    pub forbidden: bool,
}

/// Closure of `(h, k)` under the group operations with accumulated phase
/// shifts, derived from the generators. Conflicting shifts on one index mark
/// the orbit forbidden.
pub fn orbit(group: PlaneGroup, h: i32, k: i32) -> Result<Orbit> {
    if group.is_centered() {
        return Err(Error::UnsupportedGroup(group));
    }
    let mut seen: BTreeMap<(i32, i32), i32> = BTreeMap::new();
    let mut forbidden = false;
    for op in group.ops() {
        let (hh, kk) = op.map_index(h, k);
        let shift = op.phase_shift_deg(h, k);
        match seen.get(&(hh, kk)) {
            Some(&s) if s != shift => forbidden = true,
            Some(_) => {}
            None => {
                seen.insert((hh, kk), shift);
            }
        }
    }
    Ok(Orbit {
        members: seen
            .into_iter()
            .map(|((hh, kk), shift)| OrbitElement {
                h: hh,
                k: kk,
                shift_deg: shift,
            })
            .collect(),
        forbidden,
    })
}

/// Systematic-absence predicate implied by the glide translations of a
/// group, derived from the generators rather than tabulated.
pub struct ReflectionConditions {
    group: PlaneGroup,
    has_any: bool,
}

impl ReflectionConditions {
    pub fn group(&self) -> PlaneGroup {
        self.group
    }

    /// Whether the group forbids any index class at all.
    pub fn has_conditions(&self) -> bool {
        self.has_any
    }

    /// True when F(h, k) must vanish under this group.
    pub fn is_forbidden(&self, h: i32, k: i32) -> bool {
        if h == 0 && k == 0 {
            return false;
        }
        orbit(self.group, h, k).map(|o| o.forbidden).unwrap_or(false)
    }

    /// True when (h, k) lies in an index class that carries a condition
    /// (the class of some glide-invariant reciprocal line), whether or not
    /// this particular index is forbidden.
    pub fn in_condition_class(&self, h: i32, k: i32) -> bool {
        if h == 0 && k == 0 {
            return false;
        }
        let g = gcd(h.unsigned_abs(), k.unsigned_abs()) as i32;
        let (h0, k0) = (h / g, k / g);
        for op in self.group.ops() {
            if op.m == crate::groups::Op::IDENTITY.m {
                continue;
            }
            if op.map_index(h0, k0) != (h0, k0) {
                continue;
            }
            // The fixed line {m·(h0,k0)} carries a condition iff the
            // primitive index picks up an odd half-turn from the glide.
            if (h0 * op.t_half[0] + k0 * op.t_half[1]).rem_euclid(2) == 1 {
                return true;
            }
        }
        false
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}

/// Build the reflection-condition predicate for a group.
pub fn reflection_conditions(group: PlaneGroup) -> Result<ReflectionConditions> {
    if group.is_centered() {
        return Err(Error::UnsupportedGroup(group));
    }
    let mut probe = ReflectionConditions {
        group,
        has_any: false,
    };
    probe.has_any = (-4..=4).any(|h| {
        (-4..=4).any(|k| (h, k) != (0, 0) && probe.is_forbidden(h, k))
    });
    Ok(probe)
}

/// Orbit partition of an observed coefficient list. Built once per group and
/// reused by origin refinement and symmetrization.
pub struct OrbitTable {
    /// For each orbit: indices into the observed list plus per-member shifts
    /// (degrees, relative to the orbit representative).
    pub orbits: Vec<OrbitSlots>,
}

pub struct OrbitSlots {
    pub slots: Vec<(usize, i32)>,
    pub forbidden: bool,
}

impl OrbitTable {
    pub fn build(group: PlaneGroup, fcs: &[IndexedFc]) -> Result<OrbitTable> {
        let index_of: BTreeMap<(i32, i32), usize> = fcs
            .iter()
            .enumerate()
            .map(|(i, f)| ((f.h, f.k), i))
            .collect();
        let mut assigned = vec![false; fcs.len()];
        let mut orbits = Vec::new();
        for (i, fc) in fcs.iter().enumerate() {
            if assigned[i] {
                continue;
            }
            let orb = orbit(group, fc.h, fc.k)?;
            let mut slots = Vec::new();
            for m in &orb.members {
                if let Some(&j) = index_of.get(&(m.h, m.k)) {
                    if !assigned[j] {
                        assigned[j] = true;
                        slots.push((j, m.shift_deg));
                    }
                }
            }
            orbits.push(OrbitSlots {
                slots,
                forbidden: orb.forbidden,
            });
        }
        Ok(OrbitTable { orbits })
    }
}

/// Replace each orbit's amplitudes by their arithmetic mean (absent orbit
/// members contribute nothing). Forbidden orbits symmetrize to zero.
pub fn symmetrize_amplitudes(fcs: &[IndexedFc], group: PlaneGroup) -> Result<Vec<f64>> {
    let table = OrbitTable::build(group, fcs)?;
    Ok(symmetrize_amplitudes_with(&table, fcs))
}

fn symmetrize_amplitudes_with(table: &OrbitTable, fcs: &[IndexedFc]) -> Vec<f64> {
    let mut out = vec![0.0; fcs.len()];
    for orb in &table.orbits {
        if orb.forbidden {
            continue;
        }
        let mean = orb.slots.iter().map(|&(j, _)| fcs[j].amplitude).sum::<f64>()
            / orb.slots.len() as f64;
        for &(j, _) in &orb.slots {
            out[j] = mean;
        }
    }
    out
}

/// Amplitude-weighted phase symmetrization in complex form: the symmetrized
/// phase is the argument of `Σ_j |F_j| exp(i (φ_j - shift_j))`, broadcast
/// back to each member with its own shift. A vanishing complex sum yields
/// phase 0 and a raised flag.
pub fn symmetrize_phases(fcs: &[IndexedFc], group: PlaneGroup) -> Result<(Vec<f64>, bool)> {
    let table = OrbitTable::build(group, fcs)?;
    Ok(symmetrize_phases_with(&table, fcs))
}

const VANISHING_SUM: f64 = 1e-12;

fn symmetrize_phases_with(table: &OrbitTable, fcs: &[IndexedFc]) -> (Vec<f64>, bool) {
    let mut out = vec![0.0; fcs.len()];
    let mut flagged = false;
    for orb in &table.orbits {
        if orb.forbidden {
            continue;
        }
        let mut sum = Complex::new(0.0, 0.0);
        let mut weight = 0.0;
        for &(j, shift) in &orb.slots {
            let fc = &fcs[j];
            sum += Complex::from_polar(
                fc.amplitude,
                (fc.phase_deg - shift as f64).to_radians(),
            );
            weight += fc.amplitude;
        }
        let rep = if sum.norm() <= VANISHING_SUM * weight.max(1.0) {
            flagged = true;
            0.0
        } else {
            sum.arg().to_degrees()
        };
        for &(j, shift) in &orb.slots {
            out[j] = wrap_deg(rep + shift as f64);
        }
    }
    (out, flagged)
}

/// A plane-group model of an observed coefficient set: the refined origin,
/// the origin-shifted observations, and their symmetrized counterpart.
#[derive(Debug, Clone)]
pub struct GroupModel {
    pub group: PlaneGroup,
    pub origin_shift: (f64, f64),
    pub fcs_obs: Vec<IndexedFc>,
    pub fcs_sym: Vec<IndexedFc>,
    pub n: usize,
}

/// Apply a fractional origin shift to all phases:
/// `φ -> φ + 360 (h x0 + k y0)`.
pub fn apply_origin_shift(fcs: &[IndexedFc], x0: f64, y0: f64) -> Vec<IndexedFc> {
    fcs.iter()
        .map(|f| IndexedFc {
            phase_deg: wrap_deg(f.phase_deg + 360.0 * (f.h as f64 * x0 + f.k as f64 * y0)),
            ..*f
        })
        .collect()
}

/// Amplitude-weighted mean absolute wrapped phase difference between the
/// shifted observations and their symmetrized phases (the CRISP phase
/// residual), evaluated at origin shift `(x0, y0)` without materializing the
/// shifted list.
fn phase_residual_at(table: &OrbitTable, fcs: &[IndexedFc], x0: f64, y0: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for orb in &table.orbits {
        if orb.forbidden {
            // Model says F = 0; phase deviation is undefined, amplitude
            // carries the penalty instead. Skip, as CRISP does.
            continue;
        }
        let mut sum = Complex::new(0.0, 0.0);
        let mut aligned = Vec::with_capacity(orb.slots.len());
        for &(j, shift) in &orb.slots {
            let fc = &fcs[j];
            let phase = fc.phase_deg + 360.0 * (fc.h as f64 * x0 + fc.k as f64 * y0)
                - shift as f64;
            let z = Complex::from_polar(fc.amplitude, phase.to_radians());
            sum += z;
            aligned.push((fc.amplitude, z));
        }
        if sum.norm() <= VANISHING_SUM {
            for &(amp, _) in &aligned {
                num += amp * 180.0;
                den += amp;
            }
            continue;
        }
        let sum_arg = sum.arg();
        for &(amp, z) in &aligned {
            let mut d = (z.arg() - sum_arg).to_degrees();
            d = wrap_deg(d).abs();
            num += amp * d;
            den += amp;
        }
    }
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Grid resolution of the exhaustive origin search (cell fractions).
pub const ORIGIN_GRID: usize = 200;

/// Find the fractional cell shift minimizing the phase residual: exhaustive
/// search on a 200 x 200 grid followed by golden-section refinement, ties
/// broken toward the smallest shift norm. Returns `(x0, y0, residual)` with
/// shifts wrapped to [-1/2, 1/2).
pub fn refine_origin(fcs: &[IndexedFc], group: PlaneGroup) -> Result<(f64, f64, f64)> {
    if group == PlaneGroup::P1 {
        return Err(Error::InvalidArgument(
            "origin refinement is undefined for p1".into(),
        ));
    }
    let table = OrbitTable::build(group, fcs)?;
    if fcs.is_empty() {
        return Ok((0.0, 0.0, 0.0));
    }

    let wrap_frac = |v: f64| {
        let mut w = v.rem_euclid(1.0);
        if w >= 0.5 {
            w -= 1.0;
        }
        w
    };

    let step = 1.0 / ORIGIN_GRID as f64;
    let mut best = (f64::INFINITY, f64::INFINITY, 0.0, 0.0); // residual, norm, x0, y0
    for iy in 0..ORIGIN_GRID {
        for ix in 0..ORIGIN_GRID {
            let x0 = ix as f64 * step;
            let y0 = iy as f64 * step;
            let r = phase_residual_at(&table, fcs, x0, y0);
            let (wx, wy) = (wrap_frac(x0), wrap_frac(y0));
            let n = wx.hypot(wy);
            if r < best.0 - 1e-12 || ((r - best.0).abs() <= 1e-12 && n < best.1 - 1e-12) {
                best = (r, n, wx, wy);
            }
        }
    }

    // Golden-section descent around the winning grid cell, one axis at a
    // time, a few sweeps; the residual is smooth near its minima.
    let (mut x0, mut y0) = (best.2, best.3);
    let mut res = best.0;
    let golden = |f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64| -> (f64, f64) {
        let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
        let mut c = hi - phi * (hi - lo);
        let mut d = lo + phi * (hi - lo);
        let (mut fc_, mut fd) = (f(c), f(d));
        for _ in 0..40 {
            if fc_ < fd {
                hi = d;
                d = c;
                fd = fc_;
                c = hi - phi * (hi - lo);
                fc_ = f(c);
            } else {
                lo = c;
                c = d;
                fc_ = fd;
                d = lo + phi * (hi - lo);
                fd = f(d);
            }
        }
        if fc_ < fd {
            (c, fc_)
        } else {
            (d, fd)
        }
    };
    for _ in 0..3 {
        let fy = y0;
        let fx = |x: f64| phase_residual_at(&table, fcs, x, fy);
        let (nx, rx) = golden(&fx, x0 - step, x0 + step);
        if rx <= res {
            x0 = nx;
            res = rx;
        }
        let gx = x0;
        let fyf = |y: f64| phase_residual_at(&table, fcs, gx, y);
        let (ny, ry) = golden(&fyf, y0 - step, y0 + step);
        if ry <= res {
            y0 = ny;
            res = ry;
        }
    }
    Ok((wrap_frac(x0), wrap_frac(y0), res))
}

/// Build the full symmetry-enforced model of an observed set: refine the
/// phase origin (except for p1), shift, and symmetrize amplitudes and
/// phases.
pub fn build_group_model(group: PlaneGroup, fcs: &[IndexedFc]) -> Result<GroupModel> {
    if group.is_centered() {
        return Err(Error::UnsupportedGroup(group));
    }
    let (x0, y0) = if group == PlaneGroup::P1 {
        (0.0, 0.0)
    } else {
        let (x0, y0, _) = refine_origin(fcs, group)?;
        (x0, y0)
    };
    let obs = apply_origin_shift(fcs, x0, y0);
    let table = OrbitTable::build(group, &obs)?;
    let amps = symmetrize_amplitudes_with(&table, &obs);
    let (phases, _) = symmetrize_phases_with(&table, &obs);
    let fcs_sym: Vec<IndexedFc> = obs
        .iter()
        .zip(amps.iter().zip(&phases))
        .map(|(f, (&a, &p))| IndexedFc {
            h: f.h,
            k: f.k,
            amplitude: a,
            phase_deg: p,
        })
        .collect();
    Ok(GroupModel {
        group,
        origin_shift: (x0, y0),
        n: obs.len(),
        fcs_obs: obs,
        fcs_sym,
    })
}

/// Real-valued inverse synthesis of a Friedel-closed coefficient list onto a
/// Q x Q cell raster (centered coordinates, Eq.-style normalization 1/Q²).
pub fn synthesize_image(fcs: &[IndexedFc], q: usize) -> Result<GrayImage> {
    if !q.is_power_of_two() || q < 4 {
        return Err(Error::NonPowerOfTwoSize(q));
    }
    let half = (q / 2) as i32;
    let mut grid = vec![Complex::new(0.0, 0.0); q * q];
    let mut seen: BTreeMap<(i32, i32), Complex<f64>> = BTreeMap::new();
    for fc in fcs {
        if fc.h.abs() >= half || fc.k.abs() >= half {
            return Err(Error::IndexOutOfRange {
                h: fc.h,
                k: fc.k,
                q,
            });
        }
        seen.insert((fc.h, fc.k), fc.to_complex());
    }
    for (&(h, k), &z) in &seen {
        let mate = seen.get(&(-h, -k)).copied();
        match mate {
            Some(m) if (m - z.conj()).norm() <= 1e-9 * (1.0 + z.norm()) => {}
            _ => return Err(Error::NotFriedelClosed),
        }
        grid[((k + half) as usize) * q + (h + half) as usize] = z;
    }
    Ok(idft2_centered(&Spectrum::from_raw(q, grid)))
}
