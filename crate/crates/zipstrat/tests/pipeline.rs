//! Cross-module integration: sampler -> semi-simplification -> classifier
//! consistency, symplectic desk cases, and wire-format determinism.

use rand::Rng;
use zipstrat::dieudonne::{is_max_kr, sample_fv, validate_fv, DatumRepr, FVDatum, Kind, PELDatum};
use zipstrat::epsmod::module_type;
use zipstrat::ffalg::{make_field, Field, Matrix};
use zipstrat::seed::child;
use zipstrat::zipclass::{self, FactorPoset, ZipView};
use zipstrat::zipify::{assemble_zip, hilbert_partial_hasse};

/// Random symplectic similitude of GSp_2g over the field: a product of
/// symplectic transvections times a similitude scaling.
fn random_gsp(field: &Field, g: usize, rng: &mut impl Rng) -> Matrix {
    let n = 2 * g;
    let q = field.order();
    let pair = |x: &[u32], y: &[u32]| -> u32 {
        let mut acc = 0u32;
        for k in 0..g {
            acc = field.add(acc, field.mul(x[k], y[g + k]));
            acc = field.sub(acc, field.mul(x[g + k], y[k]));
        }
        acc
    };
    let mut m = Matrix::identity(field.clone(), n);
    for _ in 0..6 * n {
        let v: Vec<u32> = (0..n).map(|_| rng.gen_range(0..q) as u32).collect();
        let c = rng.gen_range(0..q) as u32;
        if c == 0 || v.iter().all(|&x| x == 0) {
            continue;
        }
        // tau(x) = x + c <x, v> v applied to each column of m
        let mut next = Matrix::zero(field.clone(), n, n);
        for col in 0..n {
            let x = m.col(col);
            let s = field.mul(c, pair(&x, &v));
            for r in 0..n {
                next.set(r, col, field.add(x[r], field.mul(s, v[r])));
            }
        }
        m = next;
    }
    // similitude scaling on the first half
    let c = 1 + rng.gen_range(0..q - 1) as u32;
    let mut scale = Matrix::identity(field.clone(), n);
    for k in 0..g {
        scale.set(k, k, c);
    }
    scale.mul(&m)
}

fn is_symplectic_similitude(field: &Field, g: usize, m: &Matrix) -> bool {
    let n = 2 * g;
    let mut j = Matrix::zero(field.clone(), n, n);
    for k in 0..g {
        j.set(k, g + k, 1);
        j.set(g + k, k, field.neg(1));
    }
    let gram = m.transpose().mul(&j).mul(m);
    // gram must be c * j for a single nonzero c
    let mut c = 0u32;
    for a in 0..n {
        for b in 0..n {
            let expect = j.get(a, b);
            let got = gram.get(a, b);
            if expect == 0 {
                if got != 0 {
                    return false;
                }
            } else {
                let ratio = field.mul(got, field.inv(expect));
                if c == 0 {
                    c = ratio;
                } else if ratio != c {
                    return false;
                }
            }
        }
    }
    c != 0
}

#[test]
fn gsp4_surjective_and_orbit_constant() {
    // GSp4 desk case: the classifier attains all 4 types on random
    // symplectic twists and is invariant under 200 random E-conjugations
    let field = make_field(2, 2).unwrap(); // F4 = F_{q^2} with q = 2
    let fp = FactorPoset::gsp(2);
    assert_eq!(fp.poset.len(), 4);
    let mut rng = child(5, 0);
    let mut seen = std::collections::HashSet::new();
    for _ in 0..400 {
        let m = random_gsp(&field, 2, &mut rng);
        assert!(is_symplectic_similitude(&field, 2, &m));
        let view = ZipView::standard_twisted(&field, 4, 2, &m);
        let w = zipclass::zip_type(&view, &fp).expect("symplectic twist classifies");
        seen.insert(w);
    }
    assert_eq!(seen.len(), 4, "not all GSp4 types attained: {:?}", seen);
    // E-conjugation with symplectic Levi pieces: l block-diagonal in GL_g
    // doubled symplectically, unipotents upper/lower Lagrangian blocks
    let mut done = 0;
    while done < 200 {
        let g0 = random_gsp(&field, 2, &mut rng);
        let view = ZipView::standard_twisted(&field, 4, 2, &g0);
        let w0 = zipclass::zip_type(&view, &fp).unwrap();
        // p+ = l u+, p- = l^(p) u-
        let l = random_levi_gsp(&field, 2, &mut rng);
        let up = random_unipotent(&field, 2, true, &mut rng);
        let um = random_unipotent(&field, 2, false, &mut rng);
        let pplus = l.mul(&up);
        let pminus = l.frobenius(1).mul(&um);
        let moved = pplus.mul(&g0).mul(&pminus.inverse().unwrap());
        let view = ZipView::standard_twisted(&field, 4, 2, &moved);
        let w1 = zipclass::zip_type(&view, &fp).unwrap();
        assert_eq!(w0, w1);
        done += 1;
    }
}

/// Block-diagonal Levi of the Siegel parabolic: diag(a, (a^T)^{-1} c).
fn random_levi_gsp(field: &Field, g: usize, rng: &mut impl Rng) -> Matrix {
    let q = field.order();
    loop {
        let a = Matrix::from_fn(field.clone(), g, g, |_, _| rng.gen_range(0..q) as u32);
        if a.rank() != g {
            continue;
        }
        let c = 1 + rng.gen_range(0..q - 1) as u32;
        let dual = a.transpose().inverse().unwrap().scale(c);
        let mut l = Matrix::zero(field.clone(), 2 * g, 2 * g);
        for r in 0..g {
            for s in 0..g {
                l.set(r, s, a.get(r, s));
                l.set(g + r, g + s, dual.get(r, s));
            }
        }
        return l;
    }
}

/// I + symmetric block in the (upper or lower) Lagrangian position.
fn random_unipotent(field: &Field, g: usize, upper: bool, rng: &mut impl Rng) -> Matrix {
    let q = field.order();
    let mut b = Matrix::from_fn(field.clone(), g, g, |_, _| rng.gen_range(0..q) as u32);
    // symmetrize so the block lands in the symplectic unipotent radical
    for r in 0..g {
        for s in 0..r {
            let v = b.get(s, r);
            b.set(r, s, v);
        }
    }
    let mut u = Matrix::identity(field.clone(), 2 * g);
    for r in 0..g {
        for s in 0..g {
            if upper {
                u.set(r, g + s, b.get(r, s));
            } else {
                u.set(g + r, s, b.get(r, s));
            }
        }
    }
    u
}

#[test]
fn minimal_eo_iff_filtration_conditions() {
    // Hilbert: zip_type minimal <=> F^1 = Ker V^1 and eps F^l = F^{l-2},
    // both sides computed independently
    let pel = PELDatum::hilbert(3, 1, 2, 1);
    let fp = FactorPoset::build(Kind::C, 1, &[1, 1]);
    let mut seen_min = false;
    for seed in 0..400 {
        let datum = sample_fv(&pel, seed).unwrap();
        let zip = assemble_zip(&datum).unwrap();
        let view = ZipView::of_factor(&zip, 0);
        let w = zipclass::zip_type(&view, &fp).unwrap();
        let minimal = fp.length(w) == 0;
        let hasse = hilbert_partial_hasse(&zip, 0).unwrap();
        let all_zero = hasse.iter().flatten().all(|h| h.zero);
        assert_eq!(minimal, all_zero, "seed {}", seed);
        seen_min |= minimal;
    }
    assert!(seen_min, "no minimal sample in range");
}

#[test]
fn max_kr_splitting_is_unique() {
    // on the maximal KR stratum the splitting structure is forced:
    // F^l = omega[eps^l]
    for pel in [PELDatum::hilbert(3, 1, 2, 1), PELDatum::siegel(3, 1, 2, 2, 1)] {
        let mut found = 0;
        for seed in 0..200 {
            let datum = sample_fv(&pel, seed).unwrap();
            if !is_max_kr(&datum, 0) {
                continue;
            }
            found += 1;
            let fac = &datum.factors[0];
            for j in 0..fac.f {
                let host = &fac.blocks[j].host;
                let omega = fac.blocks[j].splitting.top();
                for l in 1..=fac.e {
                    let torsion = omega.intersect(&host.eps_power_kernel(l));
                    assert_eq!(
                        fac.blocks[j].splitting.step(l),
                        &torsion,
                        "splitting not forced at (j={}, l={})",
                        j,
                        l
                    );
                }
            }
            if found > 20 {
                break;
            }
        }
        assert!(found > 0, "no maximal-KR sample found");
    }
}

#[test]
fn pipeline_surjective_on_hilbert_eo_types() {
    let pel = PELDatum::hilbert(3, 1, 2, 1);
    let fp = FactorPoset::build(Kind::C, 1, &[1, 1]);
    let mut seen = std::collections::HashSet::new();
    for seed in 0..600 {
        let datum = sample_fv(&pel, seed).unwrap();
        let zip = assemble_zip(&datum).unwrap();
        let view = ZipView::of_factor(&zip, 0);
        seen.insert(zipclass::zip_type(&view, &fp).unwrap());
        if seen.len() == fp.poset.len() {
            break;
        }
    }
    assert_eq!(seen.len(), fp.poset.len(), "sampler misses EO types: {:?}", seen);
}

#[test]
fn classification_agrees_without_lift() {
    // stripping the lift forces the flagged non-canonical g; the EO type
    // must not change (checked empirically, per the classifier contract)
    let pel = PELDatum::hilbert(3, 1, 2, 1);
    let fp = FactorPoset::build(Kind::C, 1, &[1, 1]);
    for seed in 0..80 {
        let datum = sample_fv(&pel, seed).unwrap();
        let zip = assemble_zip(&datum).unwrap();
        let w_lifted = zipclass::zip_type(&ZipView::of_factor(&zip, 0), &fp).unwrap();
        let mut repr = datum.to_repr();
        repr.factors[0].lift = None;
        let stripped = FVDatum::from_repr(&repr).unwrap();
        assert!(validate_fv(&stripped).is_empty());
        let zip2 = assemble_zip(&stripped).unwrap();
        assert!(!zip2.factors[0].g_canonical);
        let w_subst = zipclass::zip_type(&ZipView::of_factor(&zip2, 0), &fp).unwrap();
        assert_eq!(w_lifted, w_subst, "seed {}: EO type depends on the g substitute", seed);
    }
}

#[test]
fn wire_format_is_deterministic() {
    let pel = PELDatum::hilbert(3, 1, 2, 2);
    let a = serde_json::to_string(&sample_fv(&pel, 11).unwrap().to_repr()).unwrap();
    let b = serde_json::to_string(&sample_fv(&pel, 11).unwrap().to_repr()).unwrap();
    assert_eq!(a, b);
    // fail-closed parsing: unknown fields rejected
    let mut v: serde_json::Value = serde_json::from_str(&a).unwrap();
    v.as_object_mut().unwrap().insert("extra".into(), serde_json::json!(1));
    let res: Result<DatumRepr, _> = serde_json::from_value(v);
    assert!(res.is_err(), "unknown fields must be rejected");
    // format tag enforced
    let mut v: serde_json::Value = serde_json::from_str(&a).unwrap();
    v["format"] = serde_json::json!("zipstrat/0");
    let repr: DatumRepr = serde_json::from_value(v).unwrap();
    assert!(FVDatum::from_repr(&repr).is_err());
}

#[test]
fn verify_suite_extension_fields() {
    // the full invariant suite over genuinely twisted ground fields
    for pel in [
        PELDatum::hilbert(3, 2, 2, 1),
        PELDatum::hilbert(2, 2, 2, 2),
        PELDatum::unitary(5, 2, Kind::AU, 3, 1, vec![vec![1, 2]]),
    ] {
        let rep = zipstrat::cli::run_verify(&pel, 3, 30, None);
        assert!(rep.failed.is_empty(), "{:?}", rep.failed.first().map(|f| &f.checks));
    }
}

#[test]
fn hodge_constant_on_kr_fibers_across_configs() {
    use std::collections::HashMap;
    for pel in [PELDatum::hilbert(3, 1, 3, 1), PELDatum::siegel(3, 1, 2, 2, 1)] {
        let mut by_type: HashMap<Vec<Vec<usize>>, zipstrat::dieudonne::Polygon> = HashMap::new();
        for seed in 0..60 {
            let datum = sample_fv(&pel, seed).unwrap();
            let key: Vec<Vec<usize>> = zipstrat::dieudonne::kr_type(&datum, 0)
                .iter()
                .map(|t| t.parts().to_vec())
                .collect();
            let hdg = zipstrat::dieudonne::hodge_polygon(&datum, 0);
            if let Some(prev) = by_type.get(&key) {
                assert_eq!(prev, &hdg, "Hodge polygon not constant on KR fiber {:?}", key);
            } else {
                by_type.insert(key, hdg);
            }
        }
    }
}

#[test]
fn omega_module_type_matches_quotient_by_frobenius_image() {
    // omega ≅ H / Frob(H) as k[ε]-modules: elementary divisors agree
    let pel = PELDatum::hilbert(3, 1, 2, 2);
    for seed in 0..40 {
        let datum = sample_fv(&pel, seed).unwrap();
        let fac = &datum.factors[0];
        for j in 0..fac.f {
            let jp = (j + fac.f - 1) % fac.f;
            let host = &fac.blocks[j].host;
            // valuation data of H_j / Frob(H_{jp}): dims of eps^k on the quotient
            let im = fac.blocks[j].frob.image();
            let mut dims = Vec::new();
            let mut cur = host.full_subspace();
            for _ in 0..=host.e {
                dims.push(cur.sum(&im).dim() - im.dim());
                cur = host.eps_power_image(&cur, 1);
            }
            let jumps: Vec<usize> = (1..=host.e).map(|k| dims[k - 1] - dims[k]).collect();
            let mut parts = Vec::new();
            if let Some(&j1) = jumps.first() {
                for idx in 0..j1 {
                    parts.push(jumps.iter().take_while(|&&x| x > idx).count());
                }
            }
            parts.sort_unstable_by(|a, b| b.cmp(a));
            let omega_type = module_type(host, fac.blocks[jp].splitting.top()).unwrap();
            assert_eq!(parts, omega_type.parts(), "seed {} block {}", seed, j);
        }
    }
}

#[test]
fn max_kr_type_is_determined_by_reduced_data() {
    // on the maximal KR stratum the splitting is unique, every partial
    // Hasse value above the wrap is nonzero, and the EO type is a function
    // of the wrap-level (reduced) bits alone
    let pel = PELDatum::hilbert(3, 1, 2, 1);
    let fp = FactorPoset::build(Kind::C, 1, &[1, 1]);
    let mut by_reduced: std::collections::HashMap<Vec<bool>, usize> =
        std::collections::HashMap::new();
    let mut found = 0;
    for seed in 0..400 {
        let datum = sample_fv(&pel, seed).unwrap();
        if !is_max_kr(&datum, 0) {
            continue;
        }
        found += 1;
        let zip = assemble_zip(&datum).unwrap();
        let hasse = hilbert_partial_hasse(&zip, 0).unwrap();
        for per in &hasse {
            for h in per.iter().skip(1) {
                assert!(!h.zero, "l >= 2 Hasse value vanished on maximal KR");
            }
        }
        let reduced: Vec<bool> = hasse.iter().map(|per| per[0].zero).collect();
        let w = zipclass::zip_type(&ZipView::of_factor(&zip, 0), &fp).unwrap();
        if let Some(&prev) = by_reduced.get(&reduced) {
            assert_eq!(prev, w, "seed {}: equal reduced data, different EO type", seed);
        } else {
            by_reduced.insert(reduced, w);
        }
    }
    assert!(found > 10 && by_reduced.len() >= 2, "found {} classes {}", found, by_reduced.len());
}

#[test]
fn multi_factor_datum_verifies_and_classifies() {
    // two local factors of different kinds in one datum
    let pel = PELDatum {
        p: 3,
        m: 1,
        factors: vec![
            PELDatum::hilbert(3, 1, 2, 1).factors.remove(0),
            PELDatum::unitary(3, 1, Kind::AU, 3, 1, vec![vec![1, 2]]).factors.remove(0),
        ],
    };
    let rep = zipstrat::cli::run_verify(&pel, 1, 25, None);
    assert!(rep.failed.is_empty(), "{:?}", rep.failed.first().map(|f| &f.checks));
    let datum = sample_fv(&pel, 9).unwrap();
    let zip = assemble_zip(&datum).unwrap();
    assert_eq!(zip.factors.len(), 2);
    for (i, fac) in zip.factors.iter().enumerate() {
        let sigs = zipclass::factor_sigs(&pel.factors[i]);
        let fp = FactorPoset::build(fac.kind, fac.d, &sigs);
        zipclass::zip_type(&ZipView::of_factor(&zip, i), &fp).unwrap();
    }
}

#[test]
fn hilbert_e4_kr_types_and_eo_sizes() {
    let t = zipstrat::affine::hilbert_ekor(&[4], &[1]);
    assert_eq!(t.kr_types.len(), 3); // a in {0, 1, 2}
    assert_eq!(t.kr_dims, vec![4, 2, 0]);
    assert_eq!(t.ekor_counts, vec![2, 2, 1]);
    assert_eq!(t.eo_count, 16);
    let fp = FactorPoset::build(Kind::C, 1, &[1; 4]);
    assert_eq!(fp.poset.len(), 16);
    // the sampler reaches all three KR types
    let pel = PELDatum::hilbert(3, 1, 4, 1);
    let mut seen = std::collections::HashSet::new();
    for seed in 0..200 {
        let datum = sample_fv(&pel, seed).unwrap();
        assert!(validate_fv(&datum).is_empty());
        let kt = zipstrat::dieudonne::kr_type(&datum, 0);
        seen.insert(kt[0].parts().to_vec());
        if seen.len() == 3 {
            break;
        }
    }
    assert_eq!(seen.len(), 3, "KR types seen: {:?}", seen);
}
