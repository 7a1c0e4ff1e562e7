//! Synthetic mod-p de Rham / truncated Dieudonné data with PEL decorations,
//! their deterministic samplers, and Hodge / Pappas-Rapoport / Newton
//! polygon computations.

mod fv;
mod pel;
pub mod poly;
mod polygon;

pub use fv::{
    flat_gram, h_eps_coeff, is_max_kr, kr_type, max_kr_valuations, sample_fv, validate_fv,
    DatumRepr, FVDatum, FactorLift, FvBlock, FvFactor, FvViolation, SampleError, WireError,
    FORMAT_TAG,
};
pub use pel::{Kind, PELDatum, PelError, PelFactor};
pub use polygon::{Polygon, PolygonError};

use num_rational::Rational64;
use num_traits::Zero;

use poly::PolyMat;

/// Hodge polygon of factor i: per residue block, partial sums of the
/// elementary-divisor valuations of ω (equivalently of H_j / Frob(H_{j-1})),
/// averaged over blocks.
pub fn hodge_polygon(datum: &FVDatum, i: usize) -> Polygon {
    let fac = &datum.factors[i];
    let h = fac.block_rank();
    let types = kr_type(datum, i);
    let per: Vec<Polygon> = types
        .iter()
        .map(|t| Polygon::from_valuations(&t.valuations(h), h))
        .collect();
    Polygon::average(&per).expect("uniform block rank")
}

/// Pappas-Rapoport polygon of factor i: PR_j(s) = Σ_l min(s, d^l), averaged
/// over residue blocks. This is the reflected, integer-slope hull of the
/// signature, normalized so the maximal KR type attains it exactly.
pub fn pr_polygon(pel: &PELDatum, i: usize) -> Polygon {
    let fac = &pel.factors[i];
    let h = fac.block_rank();
    let per: Vec<Polygon> = (0..fac.f)
        .map(|j| {
            let y: Vec<Rational64> = (0..=h)
                .map(|s| {
                    let v: usize = (1..=fac.e).map(|l| s.min(fac.sig(j, l))).sum();
                    Rational64::from_integer(v as i64)
                })
                .collect();
            Polygon { h, y }
        })
        .collect();
    Polygon::average(&per).expect("uniform block rank")
}

/// Hodge polygon computed from a KR type given as per-block dominant
/// valuation vectors.
pub fn hdg_of_kr(kr: &[Vec<usize>], h: usize) -> Result<Polygon, PolygonError> {
    for v in kr {
        if v.windows(2).any(|w| w[0] < w[1]) {
            return Err(PolygonError::NotConvex(0));
        }
    }
    let per: Vec<Polygon> = kr.iter().map(|v| Polygon::from_valuations(v, h)).collect();
    Polygon::average(&per)
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum NewtonError {
    #[error("datum carries no lift")]
    MissingLift,
    #[error("t-adic precision exhausted; increase the precision parameter")]
    PrecisionExhausted,
    #[error("lifted verschiebung not invertible (corrupt datum)")]
    Singular,
}

/// Newton polygon of factor i from the lifted Frobenius: t-adic valuations
/// of the eigenvalues of the full Frobenius cycle iterated through the
/// working field degree, divided by m·f.
pub fn newton_polygon(datum: &FVDatum, i: usize, prec: Option<usize>) -> Result<Polygon, NewtonError> {
    let fac = &datum.factors[i];
    let lift = fac.lift.as_ref().ok_or(NewtonError::MissingLift)?;
    let h = fac.block_rank();
    let e = fac.e;
    let f = fac.f;
    let m = datum.field.degree() as usize;
    let prec = prec.unwrap_or(4 * e * h * m * f);

    let frobs: Vec<PolyMat> = (0..f)
        .map(|j| lift.ver[j].frobenius(1).scaled_inverse(e, prec).ok_or(NewtonError::Singular))
        .collect::<Result<_, _>>()?;

    // one full residue cycle starting from block 0; frobs[j]: block j-1 -> j
    let mut mat = PolyMat::identity(datum.field.clone(), h);
    let mut twist: i64 = 0;
    for step in 1..=f {
        let j = step % f;
        // (A, 1) o (B, twist) = (A B^(p), twist + 1)
        mat = frobs[j].mul(&mat.frobenius(1), prec);
        twist += 1;
    }
    // iterate the cycle m times
    let base = mat.clone();
    let base_twist = twist;
    let mut total = base.clone();
    let mut total_twist = base_twist;
    for _ in 1..m {
        total = base.mul(&total.frobenius(base_twist), prec);
        total_twist += base_twist;
    }
    debug_assert_eq!(total_twist % m as i64, 0);

    let cp = total.char_poly(prec);
    // lower Newton hull of (k, val c_k); root valuations are the negated slopes
    let pts: Vec<(i64, i64, bool)> = (0..=h)
        .map(|k| match cp[k].val() {
            Some(v) => (k as i64, v as i64, true),
            None => (k as i64, prec as i64, false),
        })
        .collect();
    let hull = lower_hull(&pts);
    // reject if an unresolved coefficient sits on the hull
    for &(k, _v) in &hull {
        if !pts[k as usize].2 {
            return Err(NewtonError::PrecisionExhausted);
        }
    }
    let mut slopes: Vec<Rational64> = Vec::with_capacity(h);
    for w in hull.windows(2) {
        let (k1, v1) = w[0];
        let (k2, v2) = w[1];
        let lam = Rational64::new(v1 - v2, k2 - k1); // root valuation
        for _ in 0..(k2 - k1) {
            slopes.push(lam / Rational64::from_integer((m * f) as i64));
        }
    }
    slopes.sort_unstable_by(|a, b| b.cmp(a));
    let poly = Polygon::from_slopes(&slopes);
    if poly.endpoint() < Rational64::zero() {
        return Err(NewtonError::PrecisionExhausted);
    }
    Ok(poly)
}

fn lower_hull(pts: &[(i64, i64, bool)]) -> Vec<(i64, i64)> {
    let mut hull: Vec<(i64, i64)> = Vec::new();
    for &(x, y, _) in pts {
        while hull.len() >= 2 {
            let (x1, y1) = hull[hull.len() - 2];
            let (x2, y2) = hull[hull.len() - 1];
            // drop (x2,y2) if it lies on or above segment (x1,y1)-(x,y)
            if (y2 - y1) * (x - x1) >= (y - y1) * (x2 - x1) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push((x, y));
    }
    hull
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dieudonne::pel::PELDatum;
    use num_rational::Rational64;

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn pr_polygon_examples() {
        // e = 1: PR(s) = min(s, d^1), the minuscule hull
        let pel = PELDatum::hilbert(3, 1, 1, 1);
        let pr = pr_polygon(&pel, 0);
        assert_eq!(pr.slopes(), vec![r(1, 1), r(0, 1)]);
        // e = 2, d^1 = d^2 = 1, h = 2: slopes (2, 0)
        let pel = PELDatum::hilbert(3, 1, 2, 1);
        let pr = pr_polygon(&pel, 0);
        assert_eq!(pr.slopes(), vec![r(2, 1), r(0, 1)]);
    }

    #[test]
    fn hodge_equals_pr_on_max_kr() {
        // all signatures' maximal KR valuation vectors give exactly PR
        for pel in [
            PELDatum::hilbert(3, 1, 2, 1),
            PELDatum::hilbert(3, 1, 3, 1),
            PELDatum::siegel(3, 1, 2, 2, 1),
            PELDatum::unitary(3, 1, Kind::AU, 3, 1, vec![vec![1, 2]]),
        ] {
            let fac = &pel.factors[0];
            let kr: Vec<Vec<usize>> =
                (0..fac.f).map(|j| max_kr_valuations(fac, j)).collect();
            let hdg = hdg_of_kr(&kr, fac.block_rank()).unwrap();
            let pr = pr_polygon(&pel, 0);
            assert_eq!(hdg, pr, "pel {:?}", pel);
        }
    }

    #[test]
    fn newton_ordinary_and_supersingular() {
        // e = f = 1, d = 1: scan seeds until both Newton shapes appear
        let pel = PELDatum::hilbert(3, 1, 1, 1);
        let mut saw_ord = false;
        let mut saw_ss = false;
        for s in 0..60 {
            let datum = sample_fv(&pel, s).unwrap();
            let newt = newton_polygon(&datum, 0, None).unwrap();
            let sl = newt.slopes();
            if sl == vec![r(1, 1), r(0, 1)] {
                saw_ord = true;
            } else if sl == vec![r(1, 2), r(1, 2)] {
                saw_ss = true;
            } else {
                panic!("unexpected Newton slopes {:?}", sl);
            }
            if saw_ord && saw_ss {
                break;
            }
        }
        assert!(saw_ord && saw_ss);
    }

    #[test]
    fn polygon_chain_on_samples() {
        for pel in [
            PELDatum::hilbert(3, 1, 2, 1),
            PELDatum::hilbert(2, 1, 2, 2),
            PELDatum::siegel(3, 1, 2, 2, 1),
            PELDatum::unitary(3, 1, Kind::AU, 3, 1, vec![vec![1, 2]]),
        ] {
            for s in 0..12 {
                let datum = sample_fv(&pel, s).unwrap();
                let newt = newton_polygon(&datum, 0, None).unwrap();
                let hdg = hodge_polygon(&datum, 0);
                let pr = pr_polygon(&pel, 0);
                assert!(newt.leq(&hdg).unwrap(), "seed {}: {:?} vs {:?}", s, newt, hdg);
                assert!(hdg.leq(&pr).unwrap(), "seed {}", s);
                if is_max_kr(&datum, 0) {
                    assert_eq!(hdg, pr, "seed {}", s);
                }
                assert!(newt.check_convex().is_ok());
                assert!(hdg.check_convex().is_ok());
            }
        }
    }

    #[test]
    fn hodge_constant_on_kr_fibers() {
        let pel = PELDatum::hilbert(3, 1, 2, 1);
        let mut by_type: std::collections::HashMap<Vec<Vec<usize>>, Polygon> =
            std::collections::HashMap::new();
        for s in 0..30 {
            let datum = sample_fv(&pel, s).unwrap();
            let key: Vec<Vec<usize>> =
                kr_type(&datum, 0).iter().map(|t| t.parts().to_vec()).collect();
            let hdg = hodge_polygon(&datum, 0);
            if let Some(prev) = by_type.get(&key) {
                assert_eq!(prev, &hdg);
            } else {
                by_type.insert(key, hdg);
            }
        }
        assert!(by_type.len() >= 2);
    }
}
