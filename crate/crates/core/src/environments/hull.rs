use super::{CylinderSpec, EnvPoint, MATCH_TOL, MAX_WINDOW};
use crate::{Error, Result};

/// Does `(a − d/2) ∩ B_r(0)` coincide with `(b + d/2) ∩ B_r(0)`?
fn agree_on_ball(a: &[f64], b: &[f64], d: f64, r: f64) -> bool {
    let left = a.iter().map(|x| x - d / 2.0).filter(|x| x.abs() < r);
    let mut right = b.iter().map(|y| y + d / 2.0).filter(|y| y.abs() < r);
    for x in left {
        match right.next() {
            Some(y) if (x - y).abs() <= MATCH_TOL => {}
            _ => return false,
        }
    }
    right.next().is_none()
}

fn ladder(r_max: f64) -> Vec<f64> {
    let mut rungs = Vec::new();
    let mut r = 1.0;
    while r < r_max {
        rungs.push(r);
        r *= 2.0;
    }
    rungs.push(r_max);
    rungs
}

/// Ladder approximation of the hull metric
/// `D(ω, ω') = inf { 1/(r+1) : ∃ |t|, |t'| < 1/r, (ω+t) ∩ B_r = (ω'+t') ∩ B_r }`.
///
/// Radii are scanned over `{1, 2, 4, …} ∪ {r_max}` and translates are taken
/// from point alignments, so the result is an upper bound of `D` on the
/// ladder. Returns 1 when no rung is certified.
pub fn hull_distance(a: &EnvPoint, b: &EnvPoint, r_max: f64) -> Result<f64> {
    let (sa, sb) = (a.point_set()?, b.point_set()?);
    if sa.alpha != sb.alpha {
        return Err(Error::domain("hull distance between different alphas"));
    }
    if !(r_max >= 1.0) {
        return Err(Error::domain(format!("r_max = {r_max} must be at least 1")));
    }
    let pa = sa.points_in(-r_max - 2.0, r_max + 2.0)?;
    let pb = sb.points_in(-r_max - 2.0, r_max + 2.0)?;

    for &r in ladder(r_max).iter().rev() {
        let reach = 2.0 / r;
        let mut candidates = vec![0.0];
        for &x in pa.iter().filter(|x| x.abs() < r + 1.0) {
            let start = pb.partition_point(|&y| y <= x - reach);
            candidates.extend(pb[start..].iter().take_while(|&&y| y < x + reach).map(|y| x - y));
        }
        if candidates.iter().any(|&d| d.abs() < reach && agree_on_ball(&pa, &pb, d, r)) {
            return Ok(1.0 / (r + 1.0));
        }
    }
    Ok(1.0)
}

/// Times `t ∈ [t_lo, t_hi]` with `τ_t ω` in the cylinder, ascending.
///
/// A return aligns some point `s` of `ω` with the first anchor point `p0`,
/// so only `t = s − p0` is tested.
pub fn return_times(env: &EnvPoint, section: &CylinderSpec, t_lo: f64, t_hi: f64) -> Result<Vec<f64>> {
    let set = env.point_set()?;
    if t_hi < t_lo {
        return Ok(Vec::new());
    }
    if t_hi - t_lo > MAX_WINDOW {
        return Err(Error::resource(format!("return-time window of length {} too large", t_hi - t_lo)));
    }
    let anchor = &section.anchor.points;
    let rho = section.radius();
    let &p0 = anchor
        .first()
        .ok_or_else(|| Error::domain("cylinder with an empty anchor pattern has no point alignments"))?;

    let pts = set.points_in(t_lo + p0 - rho - 2.0, t_hi + p0 + 2.0 * rho + 2.0)?;
    let mut out = Vec::new();
    for &s in &pts {
        let t = s - p0;
        if t < t_lo || t > t_hi {
            continue;
        }
        let first = pts.partition_point(|&p| p - t < -rho - MATCH_TOL);
        let mut seen = pts[first..].iter().map(|&p| p - t).take_while(|d| *d <= rho + MATCH_TOL);
        let ok = anchor.iter().all(|&q| matches!(seen.next(), Some(d) if (d - q).abs() <= MATCH_TOL))
            && seen.next().is_none();
        if ok {
            out.push(t);
        }
    }
    Ok(out)
}

/// `#(return times in B_T(0)) / 2T`.
pub fn transverse_frequency(env: &EnvPoint, section: &CylinderSpec, big_t: f64) -> Result<f64> {
    if !(big_t > 0.0) {
        return Err(Error::domain(format!("T = {big_t} must be positive")));
    }
    let count = return_times(env, section, -big_t, big_t)?
        .into_iter()
        .filter(|t| t.abs() < big_t)
        .count();
    Ok(count as f64 / (2.0 * big_t))
}
