//! Synthetic mod-p de Rham / truncated Dieudonné data with PEL decorations.
//!
//! The sampler works at the lifted level: it places everything in free
//! modules over k[t], chooses a Verschiebung onto the lifted Hodge lattice
//! through a standard basis adapted to the filtration, derives Frobenius as
//! t^e times the inverse, and reduces mod t^e. All validator identities then
//! hold by construction and are re-checked exactly.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::epsmod::{
    module_type, sample_splitting, EpsModule, EpsModuleType, SplittingReport, SplittingStructure,
};
use crate::ffalg::{make_field, Field, Matrix, SemilinearMap, Subspace};
use crate::seed::child;

use super::pel::{Kind, PELDatum, PelFactor};
use super::poly::{lattice_basis, Poly, PolyMat};

/// One residue block: the ε-module, its splitting structure, and the two
/// semilinear maps touching it. frob maps block j-1 into this block j;
/// ver maps this block j into block j-1 (indices mod f).
#[derive(Clone, Debug)]
pub struct FvBlock {
    pub host: EpsModule,
    pub splitting: SplittingStructure,
    pub frob: SemilinearMap,
    pub ver: SemilinearMap,
}

/// Exact polynomial Verschiebung lifts, one per residue block.
#[derive(Clone, Debug)]
pub struct FactorLift {
    pub ver: Vec<PolyMat>,
}

#[derive(Clone, Debug)]
pub struct FvFactor {
    pub kind: Kind,
    pub e: usize,
    pub f: usize,
    pub d: usize,
    pub blocks: Vec<FvBlock>,
    pub lift: Option<FactorLift>,
}

#[derive(Clone, Debug)]
pub struct FVDatum {
    pub pel: PELDatum,
    pub field: Field,
    pub factors: Vec<FvFactor>,
}

impl FvFactor {
    pub fn block_rank(&self) -> usize {
        match self.kind {
            Kind::C => 2 * self.d,
            Kind::AL | Kind::AU => self.d,
        }
    }
    pub fn block_dim(&self) -> usize {
        self.block_rank() * self.e
    }
    pub fn omega(&self, j: usize) -> &Subspace {
        self.blocks[j].splitting.top()
    }
    /// Flat k-valued symplectic Gram on a block (kind C only).
    pub fn gram(&self, field: &Field) -> Option<Matrix> {
        match self.kind {
            Kind::C => Some(flat_gram(field, self.d, self.e)),
            _ => None,
        }
    }
}

/// Flat Gram matrix of coeff_{e-1} of the k[ε]-valued standard symplectic
/// form: <(g,k) , (g',k')> = J[g][g'] for k + k' = e - 1, else 0.
pub fn flat_gram(field: &Field, d: usize, e: usize) -> Matrix {
    let n = 2 * d * e;
    let mut p = Matrix::zero(field.clone(), n, n);
    let one = 1u32;
    let neg = field.neg(one);
    for g in 0..d {
        for k in 0..e {
            let kp = e - 1 - k;
            p.set(g * e + k, (d + g) * e + kp, one);
            p.set((d + g) * e + k, g * e + kp, neg);
        }
    }
    p
}

/// Coefficient c of the k[ε]-valued symplectic form on flat vectors.
pub fn h_eps_coeff(field: &Field, d: usize, e: usize, x: &[u32], y: &[u32], c: usize) -> u32 {
    let mut acc = 0u32;
    for g in 0..d {
        for k in 0..=c.min(e - 1) {
            let kp = c - k;
            if kp >= e {
                continue;
            }
            // J pairs g with d+g positively, d+g with g negatively
            let a = field.mul(x[g * e + k], y[(d + g) * e + kp]);
            acc = field.add(acc, a);
            let b = field.mul(x[(d + g) * e + k], y[g * e + kp]);
            acc = field.sub(acc, b);
        }
    }
    acc
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SampleError {
    #[error("invalid PEL datum: {0}")]
    Pel(String),
    #[error("field construction failed: {0}")]
    Field(String),
    #[error("splitting constraints infeasible for factor {factor} block {block}")]
    Infeasible { factor: usize, block: usize },
    #[error("sampled verschiebung lift was not invertible (internal bug)")]
    BadLift,
}

/// Validation report entries; content, not panics.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FvViolation {
    Splitting { factor: usize, block: usize, report: SplittingReport },
    OmegaNotIsotropic { factor: usize, block: usize },
    KerFrobNeImVer { factor: usize, block: usize },
    KerVerNeImFrob { factor: usize, block: usize },
    VerImageNotOmega { factor: usize, block: usize },
    PairingAdjointness { factor: usize, block: usize },
    LiftReduction { factor: usize, block: usize },
}

pub fn validate_fv(datum: &FVDatum) -> Vec<FvViolation> {
    let mut out = Vec::new();
    let field = &datum.field;
    for (i, fac) in datum.factors.iter().enumerate() {
        let f = fac.f;
        for j in 0..f {
            let blk = &fac.blocks[j];
            let rep = blk.splitting.validate();
            if rep != SplittingReport::Pass {
                out.push(FvViolation::Splitting { factor: i, block: j, report: rep });
            }
            if fac.kind == Kind::C {
                let omega = blk.splitting.top();
                let basis = omega.basis_vectors();
                let mut iso = true;
                'outer: for a in &basis {
                    for b in &basis {
                        for c in 0..fac.e {
                            if h_eps_coeff(field, fac.d, fac.e, a, b, c) != 0 {
                                iso = false;
                                break 'outer;
                            }
                        }
                    }
                }
                if !iso {
                    out.push(FvViolation::OmegaNotIsotropic { factor: i, block: j });
                }
            }
            // frob of block j : H_{j-1} -> H_j ; ver of block j : H_j -> H_{j-1}
            if blk.frob.kernel() != blk.ver.image() {
                out.push(FvViolation::KerFrobNeImVer { factor: i, block: j });
            }
            let jn = (j + 1) % f;
            let frob_next = &fac.blocks[jn].frob; // H_j -> H_{j+1}
            if fac.blocks[jn].ver.kernel() != frob_next.image() {
                // ker(Ver_{j+1}: H_{j+1} -> H_j)? No: ver of block jn maps H_jn -> H_j.
                // Compare within H_jn: ker(ver_{jn}) vs im(frob_{jn}).
                out.push(FvViolation::KerVerNeImFrob { factor: i, block: jn });
            }
            let jp = (j + f - 1) % f;
            if blk.ver.image() != *fac.omega(jp) {
                out.push(FvViolation::VerImageNotOmega { factor: i, block: j });
            }
            if fac.kind == Kind::C {
                // <Ver x, y> = <x, Frob y>^(1/p) on standard basis vectors
                let gram = fac.gram(field).unwrap();
                let n = fac.block_dim();
                let mut ok = true;
                'adj: for a in 0..n {
                    let mut ea = vec![0u32; n];
                    ea[a] = 1;
                    let vx = blk.ver.apply(&ea);
                    for b in 0..n {
                        let mut eb = vec![0u32; n];
                        eb[b] = 1;
                        let fy = blk.frob.apply(&eb);
                        let lhs = bilinear(field, &gram, &vx, &eb);
                        let rhs = field.frob_pow(bilinear(field, &gram, &ea, &fy), -1);
                        if lhs != rhs {
                            ok = false;
                            break 'adj;
                        }
                    }
                }
                if !ok {
                    out.push(FvViolation::PairingAdjointness { factor: i, block: j });
                }
            }
        }
        if let Some(lift) = &fac.lift {
            for j in 0..f {
                let reduced = lift.ver[j].flatten_mod(fac.e);
                if &reduced != fac.blocks[j].ver.matrix() {
                    out.push(FvViolation::LiftReduction { factor: i, block: j });
                    continue;
                }
                // the stored Frobenius must be the reduction of t^e Ver^{-1}
                match lift.ver[j].frobenius(1).scaled_inverse(fac.e, 2 * fac.e) {
                    Some(frob_poly) => {
                        if &frob_poly.flatten_mod(fac.e) != fac.blocks[j].frob.matrix() {
                            out.push(FvViolation::LiftReduction { factor: i, block: j });
                        }
                    }
                    None => out.push(FvViolation::LiftReduction { factor: i, block: j }),
                }
            }
        }
    }
    out
}

fn bilinear(field: &Field, gram: &Matrix, x: &[u32], y: &[u32]) -> u32 {
    let gy = gram.apply(y);
    let mut acc = 0u32;
    for (a, b) in x.iter().zip(gy.iter()) {
        acc = field.add(acc, field.mul(*a, *b));
    }
    acc
}

const FLAG_RETRIES: usize = 200;

/// Samples a valid FVDatum (with lift) for the given PEL datum and seed.
pub fn sample_fv(pel: &PELDatum, seed: u64) -> Result<FVDatum, SampleError> {
    pel.validate().map_err(|e| SampleError::Pel(e.to_string()))?;
    let field = make_field(pel.p, pel.m).map_err(|e| SampleError::Field(e.to_string()))?;
    let mut factors = Vec::new();
    for (i, fac) in pel.factors.iter().enumerate() {
        let mut rng = child(seed, i as u64);
        factors.push(sample_factor(&field, fac, i, &mut rng)?);
    }
    Ok(FVDatum { pel: pel.clone(), field, factors })
}

fn sample_factor(
    field: &Field,
    fac: &PelFactor,
    fidx: usize,
    rng: &mut impl Rng,
) -> Result<FvFactor, SampleError> {
    let e = fac.e;
    let f = fac.f;
    let rank = fac.block_rank();
    let host = EpsModule::new(field.clone(), e, rank);

    // 1. splitting flags per residue block
    let mut flags: Vec<SplittingStructure> = Vec::with_capacity(f);
    for j in 0..f {
        let ranks: Vec<usize> = (1..=e).map(|l| fac.sig(j, l)).collect();
        let flag = match fac.kind {
            Kind::C => sample_isotropic_flag(&host, fac.d, &ranks, rng)
                .ok_or(SampleError::Infeasible { factor: fidx, block: j })?,
            Kind::AL | Kind::AU => {
                let mut got = None;
                for _ in 0..FLAG_RETRIES {
                    if let Ok(s) = sample_splitting(&host, &ranks, rng) {
                        got = Some(s);
                        break;
                    }
                }
                got.ok_or(SampleError::Infeasible { factor: fidx, block: j })?
            }
        };
        flags.push(flag);
    }

    // 2. lattice bases of the lifted tops, shaped for the pairing when present
    let prec = 2 * e;
    let mut tops: Vec<PolyMat> = Vec::with_capacity(f);
    for flag in flags.iter() {
        let omega = flag.top();
        let gens = poly_cols_from_flat(field, &omega.basis_vectors(), rank, e);
        let basis = lattice_basis(&gens, e, prec);
        let shaped = match fac.kind {
            Kind::C => symplectic_smith(&basis, fac.d, e, prec).ok_or(SampleError::BadLift)?,
            _ => basis,
        };
        tops.push(shaped);
    }

    // 3. Ver lift: standard map onto the lifted top, twisted by a random unit
    let mut ver_polys: Vec<PolyMat> = Vec::with_capacity(f);
    for j in 0..f {
        let jp = (j + f - 1) % f;
        let g = match fac.kind {
            Kind::C => random_symplectic_unit(field, fac.d, prec, rng),
            _ => random_unit(field, rank, prec, rng),
        };
        let n = tops[jp].mul(&g.frobenius(-1), prec);
        ver_polys.push(n);
    }

    // 4. Frob := t^e Ver^{-1}; reduce everything mod t^e
    let mut blocks = Vec::with_capacity(f);
    for j in 0..f {
        // Frob = t^e Ver^{-1} as a semilinear pair: matrix t^e (N^(p))^{-1}
        let frob_poly =
            ver_polys[j].frobenius(1).scaled_inverse(e, prec).ok_or(SampleError::BadLift)?;
        let ver_flat = ver_polys[j].flatten_mod(e);
        let frob_flat = frob_poly.flatten_mod(e);
        blocks.push(FvBlock {
            host: host.clone(),
            splitting: flags[j].clone(),
            frob: SemilinearMap::new(frob_flat, 1),
            ver: SemilinearMap::new(ver_flat, -1),
        });
    }

    Ok(FvFactor {
        kind: fac.kind,
        e,
        f,
        d: fac.d,
        blocks,
        lift: Some(FactorLift { ver: ver_polys }),
    })
}

/// Columns = polynomial lifts of flat vectors (degree < e).
fn poly_cols_from_flat(field: &Field, vecs: &[Vec<u32>], rank: usize, e: usize) -> PolyMat {
    let mut out = PolyMat::zero(field.clone(), rank, vecs.len());
    for (j, v) in vecs.iter().enumerate() {
        let col = PolyMat::lift_flat_vector(v, e);
        for (g, p) in col.into_iter().enumerate() {
            *out.get_mut(g, j) = p;
        }
    }
    out
}

/// Type-C flag sampling: a plain Pappas-Rapoport flag whose vectors all pair
/// to zero under the full k[ε]-valued symplectic form. The top step is then
/// the reduction of a t^e-self-dual lattice, which is what the symplectic
/// Verschiebung construction needs.
fn sample_isotropic_flag(
    host: &EpsModule,
    d: usize,
    ranks: &[usize],
    rng: &mut impl Rng,
) -> Option<SplittingStructure> {
    let field = host.field.clone();
    let e = host.e;
    let dim = host.dim();
    'retry: for _ in 0..FLAG_RETRIES {
        let mut steps: Vec<Subspace> = vec![host.zero_subspace()];
        let mut chosen: Vec<(usize, Vec<u32>)> = Vec::new();
        for l in 1..=e {
            let window = host.eps_preimage(&steps[l - 1]);
            let mut cur = steps[l - 1].clone();
            for _k in 0..ranks[l - 1] {
                // isotropy against every flag vector chosen so far; below the
                // top step also the t^e coefficient of the lifted form (the
                // duality condition on the next-to-top filtration step)
                let mut w = window.clone();
                let mut rows: Vec<Vec<u32>> = Vec::new();
                for (lr, r) in &chosen {
                    for c in 0..e {
                        rows.push(pairing_row(&field, d, e, r, c));
                    }
                    if e >= 2 && l <= e - 1 && *lr <= e - 1 {
                        rows.push(pairing_row(&field, d, e, r, e));
                    }
                }
                if !rows.is_empty() {
                    let mat = Matrix::from_rows(field.clone(), &rows);
                    w = w.intersect(&mat.null_space_subspace());
                }
                let mut found = None;
                for _try in 0..24 {
                    let x = random_vector_in(&w, rng);
                    if x.iter().any(|&v| v != 0) && !cur.contains_vector(&x) {
                        found = Some(x);
                        break;
                    }
                }
                let Some(x) = found else { continue 'retry };
                chosen.push((l, x.clone()));
                cur = cur.sum(&Subspace::from_vectors(field.clone(), dim, &[x]));
            }
            steps.push(cur);
        }
        let s = SplittingStructure { host: host.clone(), steps, ranks: ranks.to_vec() };
        if s.validate() == SplittingReport::Pass {
            return Some(s);
        }
    }
    None
}

/// Row of the linear condition coeff_c H(x, r) = 0 as a functional in x.
fn pairing_row(field: &Field, d: usize, e: usize, r: &[u32], c: usize) -> Vec<u32> {
    let dim = 2 * d * e;
    let mut row = vec![0u32; dim];
    for g in 0..d {
        for k in 0..e {
            if c >= k && c - k < e {
                let kp = c - k;
                // x[(g,k)] pairs +r[(d+g, kp)], x[(d+g,k)] pairs -r[(g, kp)]
                row[g * e + k] = field.add(row[g * e + k], r[(d + g) * e + kp]);
                row[(d + g) * e + k] = field.sub(row[(d + g) * e + k], r[g * e + kp]);
            }
        }
    }
    row
}

fn random_vector_in(space: &Subspace, rng: &mut impl Rng) -> Vec<u32> {
    let f = space.field().clone();
    let q = f.order();
    let mut v = vec![0u32; space.ambient()];
    for i in 0..space.dim() {
        let c = rng.gen_range(0..q) as u32;
        if c == 0 {
            continue;
        }
        for (slot, b) in v.iter_mut().zip(space.basis().row(i).iter()) {
            *slot = f.add(*slot, f.mul(c, *b));
        }
    }
    v
}

/// Symplectic Smith basis: columns span the same lattice as `basis` and the
/// Gram of the output is exactly t^e J (mod t^prec). Requires the lattice to
/// be t^e-self-dual; returns None otherwise.
fn symplectic_smith(basis: &PolyMat, d: usize, e: usize, prec: usize) -> Option<PolyMat> {
    let field = basis.field.clone();
    let n = 2 * d;
    let mut cols: Vec<Vec<Poly>> = (0..n)
        .map(|j| (0..n).map(|i| basis.get(i, j).truncate(prec)).collect())
        .collect();
    let mut xs: Vec<Vec<Poly>> = Vec::new();
    let mut ys: Vec<Vec<Poly>> = Vec::new();
    while !cols.is_empty() {
        // find a pair with pairing of valuation exactly e
        let mut hit = None;
        'find: for a in 0..cols.len() {
            for b in 0..cols.len() {
                if a == b {
                    continue;
                }
                let h = poly_pair(&field, d, &cols[a], &cols[b], prec);
                match h.val() {
                    Some(v) if v < e => return None, // not self-dual
                    Some(v) if v == e => {
                        hit = Some((a, b));
                        break 'find;
                    }
                    _ => {}
                }
            }
        }
        let (a, b) = hit?;
        let (x, mut y) = if a < b {
            let y = cols.remove(b);
            let x = cols.remove(a);
            (x, y)
        } else {
            let x = cols.remove(a);
            let y = cols.remove(b);
            (x, y)
        };
        // normalize H(x, y) = t^e
        let h = poly_pair(&field, d, &x, &y, prec);
        let unit = h.shift_down(e);
        let uinv = unit.series_inv(&field, prec);
        for slot in y.iter_mut() {
            *slot = slot.mul(&uinv, &field, prec);
        }
        // split the rest off the hyperbolic plane
        for z in cols.iter_mut() {
            let hy = poly_pair(&field, d, z, &y, prec);
            let hx = poly_pair(&field, d, z, &x, prec);
            if hy.val().map(|v| v < e).unwrap_or(false) || hx.val().map(|v| v < e).unwrap_or(false)
            {
                return None;
            }
            let alpha = if hy.is_zero() { Poly::zero() } else { hy.shift_down(e) };
            let beta = if hx.is_zero() { Poly::zero() } else { hx.shift_down(e) };
            for (i, slot) in z.iter_mut().enumerate() {
                let t1 = x[i].mul(&alpha, &field, prec);
                let t2 = y[i].mul(&beta, &field, prec);
                *slot = slot.sub(&t1, &field).add(&t2, &field).truncate(prec);
            }
        }
        xs.push(x);
        ys.push(y);
    }
    let mut t = PolyMat::zero(field, n, n);
    for (k, x) in xs.iter().enumerate() {
        for i in 0..n {
            *t.get_mut(i, k) = x[i].clone();
        }
    }
    for (k, y) in ys.iter().enumerate() {
        for i in 0..n {
            *t.get_mut(i, d + k) = y[i].clone();
        }
    }
    Some(t)
}

/// H_t(x, y) = x^T J y for polynomial column vectors of length 2d.
fn poly_pair(field: &Field, d: usize, x: &[Poly], y: &[Poly], prec: usize) -> Poly {
    let mut acc = Poly::zero();
    for g in 0..d {
        let a = x[g].mul(&y[d + g], field, prec);
        let b = x[d + g].mul(&y[g], field, prec);
        acc = acc.add(&a.sub(&b, field), field);
    }
    acc
}

/// Random exactly-symplectic unit: a product of symplectic transvections
/// x -> x + c <x, v> v with polynomial v and c, truncated at prec.
fn random_symplectic_unit(field: &Field, d: usize, prec: usize, rng: &mut impl Rng) -> PolyMat {
    let n = 2 * d;
    let q = field.order();
    let mut g = PolyMat::identity(field.clone(), n);
    let count = 4 * n + 4;
    for _ in 0..count {
        let v: Vec<Poly> = (0..n)
            .map(|_| {
                Poly((0..2).map(|_| rng.gen_range(0..q) as u32).collect()).trim()
            })
            .collect();
        let c = Poly(vec![rng.gen_range(0..q) as u32, rng.gen_range(0..q) as u32]).trim();
        if c.is_zero() || v.iter().all(|p| p.is_zero()) {
            continue;
        }
        // tau = I + c * v * (J v)^T
        let mut tau = PolyMat::identity(field.clone(), n);
        let jv: Vec<Poly> = (0..n)
            .map(|i| {
                // (J v)_i: J[[0,I],[-I,0]] -> (Jv)_g = v_{d+g}, (Jv)_{d+g} = -v_g
                if i < d {
                    v[d + i].clone()
                } else {
                    v[i - d].neg(field)
                }
            })
            .collect();
        for i in 0..n {
            for j in 0..n {
                let add = v[i].mul(&jv[j], field, prec).mul(&c, field, prec);
                let cur = tau.get(i, j).add(&add, field);
                *tau.get_mut(i, j) = cur;
            }
        }
        g = tau.mul(&g, prec);
    }
    g
}

fn random_unit(field: &Field, n: usize, prec: usize, rng: &mut impl Rng) -> PolyMat {
    let q = field.order();
    loop {
        let mut g = PolyMat::zero(field.clone(), n, n);
        for i in 0..n {
            for j in 0..n {
                let coeffs: Vec<u32> = (0..prec.min(4)).map(|_| rng.gen_range(0..q) as u32).collect();
                *g.get_mut(i, j) = Poly(coeffs).trim();
            }
        }
        // unit iff the constant term matrix is invertible
        let c0 = Matrix::from_fn(field.clone(), n, n, |i, j| g.get(i, j).coeff(0));
        if c0.rank() == n {
            return g;
        }
    }
}

/// KR type: isomorphism class of ω as a k[ε]-module, per residue block.
pub fn kr_type(datum: &FVDatum, i: usize) -> Vec<EpsModuleType> {
    let fac = &datum.factors[i];
    (0..fac.f)
        .map(|j| module_type(&fac.blocks[j].host, fac.omega(j)).expect("omega is eps-stable"))
        .collect()
}

/// Valuation vector of the maximal KR type: conjugate partition of the
/// sorted signature, per residue block.
pub fn max_kr_valuations(fac: &PelFactor, j: usize) -> Vec<usize> {
    let mut sig: Vec<usize> = (1..=fac.e).map(|l| fac.sig(j, l)).collect();
    sig.sort_unstable_by(|a, b| b.cmp(a));
    let h = fac.block_rank();
    (1..=h).map(|k| sig.iter().filter(|&&a| a >= k).count()).collect()
}

pub fn is_max_kr(datum: &FVDatum, i: usize) -> bool {
    let fac = &datum.factors[i];
    let kt = kr_type(datum, i);
    (0..fac.f).all(|j| {
        let h = fac.block_rank();
        kt[j].valuations(h) == max_kr_valuations(&datum.pel.factors[i], j)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dieudonne::pel::PELDatum;

    fn assert_valid(pel: &PELDatum, seeds: u64) {
        for s in 0..seeds {
            let datum = sample_fv(pel, s).unwrap();
            let report = validate_fv(&datum);
            assert!(report.is_empty(), "seed {}: {:?}", s, report);
        }
    }

    #[test]
    fn hilbert_samples_validate() {
        assert_valid(&PELDatum::hilbert(3, 1, 1, 1), 25);
        assert_valid(&PELDatum::hilbert(3, 1, 2, 1), 25);
        assert_valid(&PELDatum::hilbert(2, 1, 2, 2), 10);
        assert_valid(&PELDatum::hilbert(5, 1, 3, 1), 10);
    }

    #[test]
    fn siegel_samples_validate() {
        assert_valid(&PELDatum::siegel(3, 1, 2, 2, 1), 10);
    }

    #[test]
    fn unitary_samples_validate() {
        assert_valid(&PELDatum::unitary(3, 1, Kind::AU, 3, 1, vec![vec![1, 2]]), 10);
        assert_valid(&PELDatum::unitary(3, 1, Kind::AL, 3, 1, vec![vec![2, 1]]), 10);
    }

    #[test]
    fn unramified_kr_type_is_constant() {
        // e = 1: ω is killed by ε, so its type is always (1, ..., 1)
        let pel = PELDatum::hilbert(3, 1, 1, 1);
        for s in 0..10 {
            let datum = sample_fv(&pel, s).unwrap();
            let kt = kr_type(&datum, 0);
            assert_eq!(kt[0].parts(), &[1]);
        }
    }

    #[test]
    fn hilbert_hits_multiple_kr_types() {
        let pel = PELDatum::hilbert(3, 1, 2, 1);
        let mut seen = std::collections::HashSet::new();
        for s in 0..40 {
            let datum = sample_fv(&pel, s).unwrap();
            let kt = kr_type(&datum, 0);
            seen.insert(kt[0].parts().to_vec());
        }
        // both KR types of the e=2 Hilbert block: (1,1) and (2)
        assert!(seen.contains(&vec![1usize, 1]), "saw {:?}", seen);
        assert!(seen.contains(&vec![2usize]), "saw {:?}", seen);
    }
}

// ---------------------------------------------------------------------------
// wire format
// ---------------------------------------------------------------------------

/// Versioned JSON shape of an FVDatum. Unknown fields are rejected.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatumRepr {
    pub format: String,
    pub pel: PELDatum,
    pub factors: Vec<FactorRepr>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorRepr {
    pub blocks: Vec<BlockRepr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lift: Option<LiftRepr>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockRepr {
    pub j: usize,
    pub rank: usize,
    pub splitting: crate::epsmod::SplittingRepr,
    pub frob: crate::ffalg::SemilinearRepr,
    pub ver: crate::ffalg::SemilinearRepr,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiftRepr {
    pub tmod: usize,
    /// Per residue block: rows x cols of low-degree-first coefficient vectors.
    pub ver: Vec<Vec<Vec<Vec<u32>>>>,
}

pub const FORMAT_TAG: &str = "zipstrat/1";

#[derive(Debug, thiserror::Error)]
pub enum WireError {
    #[error("unsupported format tag {0:?} (expected {expected:?})", expected = FORMAT_TAG)]
    Format(String),
    #[error("field rebuild failed: {0}")]
    Field(String),
    #[error("malformed component: {0}")]
    Malformed(String),
}

impl FVDatum {
    pub fn to_repr(&self) -> DatumRepr {
        let factors = self
            .factors
            .iter()
            .map(|fac| FactorRepr {
                blocks: fac
                    .blocks
                    .iter()
                    .enumerate()
                    .map(|(j, blk)| BlockRepr {
                        j,
                        rank: blk.host.rank,
                        splitting: crate::epsmod::SplittingRepr {
                            e: blk.host.e,
                            rank: blk.host.rank,
                            steps: blk
                                .splitting
                                .steps
                                .iter()
                                .map(|s| s.basis().repr())
                                .collect(),
                        },
                        frob: blk.frob.repr(),
                        ver: blk.ver.repr(),
                    })
                    .collect(),
                lift: fac.lift.as_ref().map(|l| LiftRepr {
                    tmod: 2 * fac.e,
                    ver: l
                        .ver
                        .iter()
                        .map(|pm| {
                            (0..pm.rows)
                                .map(|i| {
                                    (0..pm.cols).map(|jj| pm.get(i, jj).0.clone()).collect()
                                })
                                .collect()
                        })
                        .collect(),
                }),
            })
            .collect();
        DatumRepr { format: FORMAT_TAG.to_string(), pel: self.pel.clone(), factors }
    }

    pub fn from_repr(repr: &DatumRepr) -> Result<FVDatum, WireError> {
        if repr.format != FORMAT_TAG {
            return Err(WireError::Format(repr.format.clone()));
        }
        repr.pel.validate().map_err(|e| WireError::Malformed(e.to_string()))?;
        let field =
            make_field(repr.pel.p, repr.pel.m).map_err(|e| WireError::Field(e.to_string()))?;
        if repr.factors.len() != repr.pel.factors.len() {
            return Err(WireError::Malformed("factor count mismatch".into()));
        }
        let mut factors = Vec::new();
        for (pf, fr) in repr.pel.factors.iter().zip(repr.factors.iter()) {
            if fr.blocks.len() != pf.f {
                return Err(WireError::Malformed("block count mismatch".into()));
            }
            let host = EpsModule::new(field.clone(), pf.e, pf.block_rank());
            let mut blocks = Vec::new();
            for (j, br) in fr.blocks.iter().enumerate() {
                if br.j != j || br.rank != pf.block_rank() {
                    return Err(WireError::Malformed(format!("block {} header", j)));
                }
                if br.splitting.steps.len() != pf.e + 1 {
                    return Err(WireError::Malformed(format!("block {} splitting", j)));
                }
                let steps: Vec<Subspace> = br
                    .splitting
                    .steps
                    .iter()
                    .map(|m| {
                        Matrix::from_repr(field.clone(), m)
                            .map(|mm| Subspace::from_span(&mm))
                            .map_err(|e| WireError::Malformed(e.to_string()))
                    })
                    .collect::<Result<_, _>>()?;
                let ranks: Vec<usize> = (1..=pf.e).map(|l| pf.sig(j, l)).collect();
                let splitting =
                    SplittingStructure { host: host.clone(), steps, ranks };
                let frob = SemilinearMap::from_repr(field.clone(), &br.frob)
                    .map_err(|e| WireError::Malformed(e.to_string()))?;
                let ver = SemilinearMap::from_repr(field.clone(), &br.ver)
                    .map_err(|e| WireError::Malformed(e.to_string()))?;
                let dim = host.dim();
                if frob.domain_dim() != dim
                    || frob.codomain_dim() != dim
                    || ver.domain_dim() != dim
                    || ver.codomain_dim() != dim
                {
                    return Err(WireError::Malformed(format!("block {} map shapes", j)));
                }
                blocks.push(FvBlock { host: host.clone(), splitting, frob, ver });
            }
            let lift = match &fr.lift {
                None => None,
                Some(lr) => {
                    if lr.ver.len() != pf.f {
                        return Err(WireError::Malformed("lift block count".into()));
                    }
                    let mut mats = Vec::new();
                    for entry in &lr.ver {
                        let rank = pf.block_rank();
                        if entry.len() != rank || entry.iter().any(|row| row.len() != rank) {
                            return Err(WireError::Malformed("lift matrix shape".into()));
                        }
                        let mut pm = PolyMat::zero(field.clone(), rank, rank);
                        for (i, row) in entry.iter().enumerate() {
                            for (jj, coeffs) in row.iter().enumerate() {
                                if coeffs.iter().any(|&c| c as u64 >= field.order()) {
                                    return Err(WireError::Malformed(
                                        "lift coefficient out of range".into(),
                                    ));
                                }
                                *pm.get_mut(i, jj) = Poly(coeffs.clone()).trim();
                            }
                        }
                        mats.push(pm);
                    }
                    Some(FactorLift { ver: mats })
                }
            };
            factors.push(FvFactor { kind: pf.kind, e: pf.e, f: pf.f, d: pf.d, blocks, lift });
        }
        Ok(FVDatum { pel: repr.pel.clone(), field, factors })
    }
}
