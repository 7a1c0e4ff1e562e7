//! Classification of graded F-zips (with genuine F and V operators) into
//! their Ekedahl-Oort types, plus the brute-force E-orbit and point-counting
//! oracles used to validate the classifier.
//!
//! The classifier refines the canonical filtration (closure of {0, full}
//! under F-image and V-preimage) into full flags, then reads off the jump
//! positions of each C-step. The resulting per-block subsets index the
//! minimal coset representatives in ᴶW.

use std::collections::{HashMap, VecDeque};

use crate::coxeter::{subset_rep_a, subset_rep_c, FactorKind, JWPoset, WElem, WeylCtx};
use crate::dieudonne::Kind;
use crate::ffalg::{Field, Matrix, SemilinearMap, Subspace};
use crate::zipify::{FZipPlus, ZipFactor};

/// A cyclic system of graded blocks with exact zip operators:
/// ker f[b] = C_b, im f[b] = D_{b+1}, ker v[b] = D_b, im v[b] = C_{b-1}.
#[derive(Clone, Debug)]
pub struct ZipView {
    pub field: Field,
    pub dims: Vec<usize>,
    pub f: Vec<SemilinearMap>,
    pub v: Vec<SemilinearMap>,
    pub c: Vec<Subspace>,
    pub d: Vec<Subspace>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ClassifyError {
    #[error("stable closed set contains incomparable subspaces in block {0}")]
    NotAChain(usize),
    #[error("closure failed to terminate (invariant violation upstream)")]
    NonTermination,
    #[error("relative position is not a coset pattern: {0:?}")]
    BadPattern(Vec<Vec<usize>>),
    #[error("group size {0} exceeds the enumeration bound")]
    SizeBound(u64),
}

impl ZipView {
    pub fn blocks(&self) -> usize {
        self.dims.len()
    }

    /// View of one factor of an assembled zip. The wrap-around F is
    /// normalized by g so that Im F = Ker V holds on every block.
    pub fn of_factor(zip: &FZipPlus, i: usize) -> ZipView {
        let fac: &ZipFactor = &zip.factors[i];
        let e = fac.e;
        let f = fac.f;
        let mut fs = Vec::with_capacity(e * f);
        let mut vs = Vec::with_capacity(e * f);
        let mut cs = Vec::with_capacity(e * f);
        let mut ds = Vec::with_capacity(e * f);
        let mut dims = Vec::with_capacity(e * f);
        for b in 0..e * f {
            let blk = &fac.blocks[b];
            fs.push(fac.f_zip(b));
            vs.push(blk.v_out.clone());
            cs.push(blk.c.clone());
            ds.push(blk.d.clone());
            dims.push(blk.dim);
        }
        ZipView { field: zip.field.clone(), dims, f: fs, v: vs, c: cs, d: ds }
    }

    /// The standard zip of type (n, d) twisted by a group element: the
    /// Hodge step is the first d coordinates, F pushes the complement
    /// through g, V pulls back through g⁻¹.
    pub fn standard_twisted(field: &Field, n: usize, d: usize, g: &Matrix) -> ZipView {
        let mut projs = Matrix::zero(field.clone(), n, n);
        for k in d..n {
            projs.set(k, k, 1);
        }
        let fmat = g.mul(&projs);
        let ginv = g.inverse().expect("group element");
        let mut projc = Matrix::zero(field.clone(), n, n);
        for k in 0..d {
            projc.set(k, k, 1);
        }
        let vmat = projc.mul(&ginv).frobenius(-1);
        let c = Subspace::from_vectors(
            field.clone(),
            n,
            &(0..d)
                .map(|k| {
                    let mut v = vec![0u32; n];
                    v[k] = 1;
                    v
                })
                .collect::<Vec<_>>(),
        );
        let fmap = SemilinearMap::new(fmat, 1);
        let dsub = fmap.image();
        ZipView {
            field: field.clone(),
            dims: vec![n],
            f: vec![fmap],
            v: vec![SemilinearMap::new(vmat, -1)],
            c: vec![c],
            d: vec![dsub],
        }
    }
}

/// Canonical filtration and its refinement to stable full flags.
#[derive(Clone, Debug)]
pub struct CanonicalFlag {
    /// Coarse canonical chains (closure of {0, full} under F, V⁻¹).
    pub chains: Vec<Vec<Subspace>>,
    /// Stable full flags refining them.
    pub full: Vec<Vec<Subspace>>,
}

fn insert_into_chain(
    chain: &mut Vec<Subspace>,
    x: Subspace,
    block: usize,
) -> Result<bool, ClassifyError> {
    for existing in chain.iter() {
        if *existing == x {
            return Ok(false);
        }
    }
    for existing in chain.iter() {
        let (small, large) = if existing.dim() <= x.dim() { (existing, &x) } else { (&x, existing) };
        if !large.contains(small) {
            return Err(ClassifyError::NotAChain(block));
        }
    }
    chain.push(x);
    chain.sort_by_key(|s| s.dim());
    Ok(true)
}

#[cfg(test)]
fn close_once(view: &ZipView, chains: &mut [Vec<Subspace>]) -> Result<bool, ClassifyError> {
    let nb = view.blocks();
    let mut changed = false;
    for b in 0..nb {
        let bn = (b + 1) % nb;
        let snapshot = chains[b].clone();
        for n in snapshot {
            let img = view.f[b].image_of(&n);
            changed |= insert_into_chain(&mut chains[bn], img, bn)?;
            let pre = view.v[bn].preimage_of(&n);
            changed |= insert_into_chain(&mut chains[bn], pre, bn)?;
        }
    }
    Ok(changed)
}

/// Closure of {0 ⊂ full} under F-image and V-preimage per block. The result
/// is totally ordered: every new element is either an F-image (inside
/// Im F = D) or a V-preimage (containing Ker V = D), so any two closure
/// elements are comparable; the chain check turns an upstream invariant
/// violation into a structured error instead of silence.
pub fn canonical_chains(view: &ZipView) -> Result<Vec<Vec<Subspace>>, ClassifyError> {
    let nb = view.blocks();
    let total: usize = view.dims.iter().sum();
    let mut chains: Vec<Vec<Subspace>> = (0..nb)
        .map(|b| {
            vec![
                Subspace::zero(view.field.clone(), view.dims[b]),
                Subspace::full(view.field.clone(), view.dims[b]),
            ]
        })
        .collect();
    // worklist of (block, element) pairs whose images are unpropagated
    let mut work: VecDeque<(usize, Subspace)> = VecDeque::new();
    for (b, chain) in chains.iter().enumerate() {
        for s in chain {
            work.push_back((b, s.clone()));
        }
    }
    let mut steps = 0usize;
    while let Some((b, n)) = work.pop_front() {
        steps += 1;
        if steps > 8 * total * total + 64 {
            return Err(ClassifyError::NonTermination);
        }
        let bn = (b + 1) % nb;
        let img = view.f[b].image_of(&n);
        if insert_into_chain(&mut chains[bn], img.clone(), bn)? {
            work.push_back((bn, img));
        }
        let pre = view.v[bn].preimage_of(&n);
        if insert_into_chain(&mut chains[bn], pre.clone(), bn)? {
            work.push_back((bn, pre));
        }
    }
    Ok(chains)
}

/// Canonical chains plus explicit full flags: within each gap the flag cuts
/// along C first (one dimension at a time), then fills with deterministic
/// rows of the upper step, so the C-jumps sit at the bottom of every gap.
pub fn canonical_filtration(view: &ZipView) -> Result<CanonicalFlag, ClassifyError> {
    let chains = canonical_chains(view)?;
    let nb = view.blocks();
    let mut full = Vec::with_capacity(nb);
    for b in 0..nb {
        let mut flag: Vec<Subspace> = vec![chains[b][0].clone()];
        for s in 0..chains[b].len() - 1 {
            let low = &chains[b][s];
            let high = &chains[b][s + 1];
            let mut cur = low.clone();
            let ccut = view.c[b].intersect(high);
            for r in 0..ccut.dim() {
                let v = ccut.basis().row(r).to_vec();
                if !cur.contains_vector(&v) {
                    cur = cur.sum(&Subspace::from_vectors(view.field.clone(), view.dims[b], &[v]));
                    flag.push(cur.clone());
                }
            }
            for r in 0..high.dim() {
                let v = high.basis().row(r).to_vec();
                if !cur.contains_vector(&v) {
                    cur = cur.sum(&Subspace::from_vectors(view.field.clone(), view.dims[b], &[v]));
                    flag.push(cur.clone());
                }
            }
        }
        full.push(flag);
    }
    Ok(CanonicalFlag { chains, full })
}

/// Jump positions of each C-step along the canonically refined full flag:
/// within each gap of the canonical chain the C-jumps are bottom-aligned,
/// so the subset is a function of the canonical dimension data alone.
pub fn class_subsets(view: &ZipView) -> Result<Vec<Vec<usize>>, ClassifyError> {
    let chains = canonical_chains(view)?;
    let mut out = Vec::with_capacity(view.blocks());
    for b in 0..view.blocks() {
        let chain = &chains[b];
        let mut subset = Vec::new();
        let mut offset = 0usize;
        let mut prev_c = 0usize;
        for s in 1..chain.len() {
            let width = chain[s].dim() - chain[s - 1].dim();
            let cdim = view.c[b].intersect(&chain[s]).dim();
            for t in 0..cdim - prev_c {
                subset.push(offset + t + 1);
            }
            offset += width;
            prev_c = cdim;
        }
        out.push(subset);
    }
    Ok(out)
}

/// Weyl-group data of one factor: the product context (one Coxeter factor
/// per graded block), its ᴶW poset, and the subset lookup used by the
/// classifier.
#[derive(Clone, Debug)]
pub struct FactorPoset {
    pub kind: Kind,
    pub poset: JWPoset,
    pub subset_of: Vec<Vec<Vec<usize>>>,
    pub index: HashMap<Vec<Vec<usize>>, usize>,
}

impl FactorPoset {
    /// blocks: per graded block the signature d^l; kind C uses half-rank d.
    pub fn build(kind: Kind, d: usize, sigs: &[usize]) -> FactorPoset {
        let nb = sigs.len();
        let phi: Vec<usize> = (0..nb).map(|b| (b + 1) % nb).collect();
        let (factors, j): (Vec<FactorKind>, Vec<Vec<usize>>) = match kind {
            Kind::C => (
                vec![FactorKind::C { g: d }; nb],
                (0..nb).map(|_| (1..d).collect()).collect(),
            ),
            Kind::AL | Kind::AU => (
                sigs.iter().map(|_| FactorKind::A { n: d }).collect(),
                sigs.iter()
                    .map(|&sig| (0..d.saturating_sub(1)).filter(|&s| s + 1 != sig).collect())
                    .collect(),
            ),
        };
        let ctx = WeylCtx::new(factors, phi);
        let poset = JWPoset::build(ctx, j, None);
        let subset_of: Vec<Vec<Vec<usize>>> = poset
            .elements
            .iter()
            .map(|w| {
                w.iter()
                    .enumerate()
                    .map(|(b, part)| match kind {
                        Kind::C => subset_rep_c(part, d),
                        Kind::AL | Kind::AU => subset_rep_a(part, sigs[b]),
                    })
                    .collect()
            })
            .collect();
        let index = subset_of.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        FactorPoset { kind, poset, subset_of, index }
    }

    pub fn for_factor(zip_factor: &ZipFactor, sigs: &[usize]) -> FactorPoset {
        FactorPoset::build(zip_factor.kind, zip_factor.d, sigs)
    }

    /// Single GL_n block of type (n, d) with the absolute Frobenius.
    pub fn gl(n: usize, d: usize) -> FactorPoset {
        let j: Vec<usize> = (0..n.saturating_sub(1)).filter(|&s| s + 1 != d).collect();
        let ctx = WeylCtx::new(vec![FactorKind::A { n }], vec![0]);
        let poset = JWPoset::build(ctx, vec![j], None);
        let subset_of: Vec<Vec<Vec<usize>>> =
            poset.elements.iter().map(|w| vec![subset_rep_a(&w[0], d)]).collect();
        let index = subset_of.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        FactorPoset { kind: Kind::AL, poset, subset_of, index }
    }

    /// Single GSp_2g block with the absolute Frobenius.
    pub fn gsp(g: usize) -> FactorPoset {
        let ctx = WeylCtx::new(vec![FactorKind::C { g }], vec![0]);
        let poset = JWPoset::build(ctx, vec![(1..g).collect()], None);
        let subset_of: Vec<Vec<Vec<usize>>> =
            poset.elements.iter().map(|w| vec![subset_rep_c(&w[0], g)]).collect();
        let index = subset_of.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        FactorPoset { kind: Kind::C, poset, subset_of, index }
    }

    pub fn length(&self, idx: usize) -> usize {
        self.poset.lengths[idx]
    }

    pub fn max_length(&self) -> usize {
        *self.poset.lengths.iter().max().unwrap()
    }

    pub fn element(&self, idx: usize) -> &WElem {
        &self.poset.elements[idx]
    }
}

/// EO type of a zip view: index into the factor poset.
pub fn zip_type(view: &ZipView, fp: &FactorPoset) -> Result<usize, ClassifyError> {
    let subsets = class_subsets(view)?;
    fp.index.get(&subsets).copied().ok_or(ClassifyError::BadPattern(subsets))
}

/// Flattened per-block signatures of a PEL factor, in block order.
pub fn factor_sigs(fac: &crate::dieudonne::PelFactor) -> Vec<usize> {
    let mut out = Vec::new();
    for j in 0..fac.f {
        for l in 1..=fac.e {
            out.push(fac.sig(j, l));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// brute-force oracles
// ---------------------------------------------------------------------------

/// Decode an odometer index into an n×n matrix over the field.
pub fn decode_matrix(field: &Field, n: usize, mut idx: u64) -> Matrix {
    let q = field.order();
    let mut m = Matrix::zero(field.clone(), n, n);
    for r in 0..n {
        for c in 0..n {
            m.set(r, c, (idx % q) as u32);
            idx /= q;
        }
    }
    m
}

fn pack_matrix(field: &Field, m: &Matrix) -> u64 {
    let q = field.order();
    let n = m.rows();
    let mut idx = 0u64;
    for r in (0..n).rev() {
        for c in (0..n).rev() {
            idx = idx * q + m.get(r, c) as u64;
        }
    }
    idx
}

pub fn gl_order(q: u64, n: usize) -> u64 {
    let qn = q.pow(n as u32);
    (0..n).map(|k| qn - q.pow(k as u32)).product()
}

/// Exhaustive E(F_q)-orbit partition of GL_n(F_q) under (p+, p-)·g = p+ g p-⁻¹.
pub struct OrbitPartition {
    pub orbits: Vec<Vec<u64>>,
}

/// All (p+, p-) in the standard zip group of type (n, d) over the field.
pub fn zip_group_elements(field: &Field, n: usize, d: usize) -> Vec<(Matrix, Matrix)> {
    let q = field.order();
    let mut levis = Vec::new();
    let dd = (d * d) as u32;
    let cc = ((n - d) * (n - d)) as u32;
    for i1 in 0..q.pow(dd) {
        let a = decode_matrix(field, d, i1);
        if d > 0 && a.rank() != d {
            continue;
        }
        for i2 in 0..q.pow(cc) {
            let b = decode_matrix(field, n - d, i2);
            if n - d > 0 && b.rank() != n - d {
                continue;
            }
            let mut l = Matrix::zero(field.clone(), n, n);
            for r in 0..d {
                for c in 0..d {
                    l.set(r, c, a.get(r, c));
                }
            }
            for r in 0..n - d {
                for c in 0..n - d {
                    l.set(d + r, d + c, b.get(r, c));
                }
            }
            levis.push(l);
        }
    }
    let blocks = (d * (n - d)) as u32;
    let mut out = Vec::new();
    for l in &levis {
        let lp = l.frobenius(1);
        for iu in 0..q.pow(blocks) {
            let mut up = Matrix::identity(field.clone(), n);
            let mut rest = iu;
            for r in 0..d {
                for c in 0..n - d {
                    up.set(r, d + c, (rest % q) as u32);
                    rest /= q;
                }
            }
            let pplus = l.mul(&up);
            for iv in 0..q.pow(blocks) {
                let mut um = Matrix::identity(field.clone(), n);
                let mut rest = iv;
                for r in 0..n - d {
                    for c in 0..d {
                        um.set(d + r, c, (rest % q) as u32);
                        rest /= q;
                    }
                }
                let pminus = lp.mul(&um);
                out.push((pplus.clone(), pminus));
            }
        }
    }
    out
}

/// Union-find E-orbit oracle over all of GL_n(F_q); desk sizes only.
pub fn orbit_oracle(field: &Field, n: usize, d: usize) -> Result<OrbitPartition, ClassifyError> {
    let q = field.order();
    let total = q.pow((n * n) as u32);
    let gl = gl_order(q, n);
    if gl > 10_000_000 {
        return Err(ClassifyError::SizeBound(gl));
    }
    let egens = zip_group_elements(field, n, d);
    if gl.saturating_mul(egens.len() as u64) > 400_000_000 {
        return Err(ClassifyError::SizeBound(gl.saturating_mul(egens.len() as u64)));
    }
    let mut index_of: HashMap<u64, usize> = HashMap::new();
    let mut elems: Vec<(u64, Matrix)> = Vec::new();
    for idx in 0..total {
        let m = decode_matrix(field, n, idx);
        if m.rank() == n {
            index_of.insert(idx, elems.len());
            elems.push((idx, m));
        }
    }
    let mut parent: Vec<usize> = (0..elems.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let inverses: Vec<Matrix> =
        egens.iter().map(|(_, pm)| pm.inverse().expect("group element")).collect();
    for pidx in 0..elems.len() {
        let g = elems[pidx].1.clone();
        for ((pp, _), pminv) in egens.iter().zip(inverses.iter()) {
            let moved = pp.mul(&g).mul(pminv);
            let key = pack_matrix(field, &moved);
            let qidx = index_of[&key];
            let (ra, rb) = (find(&mut parent, pidx), find(&mut parent, qidx));
            if ra != rb {
                parent[ra] = rb;
            }
        }
    }
    let mut buckets: HashMap<usize, Vec<u64>> = HashMap::new();
    for i in 0..elems.len() {
        let r = find(&mut parent, i);
        buckets.entry(r).or_default().push(elems[i].0);
    }
    let mut orbits: Vec<Vec<u64>> = buckets.into_values().collect();
    for o in orbits.iter_mut() {
        o.sort_unstable();
    }
    orbits.sort();
    Ok(OrbitPartition { orbits })
}

/// |{g in GL_n(F_q) : zip_type(standard zip twisted by g) = w}| for every w.
pub fn point_count(field: &Field, n: usize, d: usize, fp: &FactorPoset) -> Vec<u64> {
    use rayon::prelude::*;
    let q = field.order();
    let total = q.pow((n * n) as u32);
    let chunk: u64 = 1 << 14;
    let nchunks = total.div_ceil(chunk);
    (0..nchunks)
        .into_par_iter()
        .map(|ci| {
            let mut counts = vec![0u64; fp.poset.len()];
            let start = ci * chunk;
            let end = (start + chunk).min(total);
            for idx in start..end {
                let g = decode_matrix(field, n, idx);
                if g.rank() != n {
                    continue;
                }
                let view = ZipView::standard_twisted(field, n, d, &g);
                let w = zip_type(&view, fp).expect("standard zip classifies");
                counts[w] += 1;
            }
            counts
        })
        .reduce(
            || vec![0u64; fp.poset.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b.iter()) {
                    *x += y;
                }
                a
            },
        )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dieudonne::{sample_fv, PELDatum};
    use crate::ffalg::make_field;
    use crate::zipify::assemble_zip;

    #[test]
    fn gl2_standard_zip_types() {
        let field = make_field(2, 1).unwrap();
        let fp = FactorPoset::gl(2, 1);
        assert_eq!(fp.poset.len(), 2);
        let id = Matrix::identity(field.clone(), 2);
        let view = ZipView::standard_twisted(&field, 2, 1, &id);
        let w = zip_type(&view, &fp).unwrap();
        assert_eq!(fp.length(w), 1, "identity twist is ordinary");
        let sw = Matrix::from_rows(field.clone(), &[vec![0, 1], vec![1, 0]]);
        let view = ZipView::standard_twisted(&field, 2, 1, &sw);
        let w = zip_type(&view, &fp).unwrap();
        assert_eq!(fp.length(w), 0, "swap twist is supersingular");
    }

    #[test]
    fn point_counts_partition_the_group() {
        for (p, n, d) in [(2u64, 2usize, 1usize), (3, 2, 1), (2, 3, 1), (3, 3, 2)] {
            let field = make_field(p, 1).unwrap();
            let fp = FactorPoset::gl(n, d);
            let counts = point_count(&field, n, d, &fp);
            let total: u64 = counts.iter().sum();
            assert_eq!(total, gl_order(p, n));
            assert!(counts.iter().all(|&c| c > 0), "{:?}", counts);
        }
    }

    #[test]
    fn orbit_oracle_gl2() {
        let field = make_field(2, 1).unwrap();
        let part = orbit_oracle(&field, 2, 1).unwrap();
        let total: usize = part.orbits.iter().map(|o| o.len()).sum();
        assert_eq!(total as u64, gl_order(2, 2));
        let fp = FactorPoset::gl(2, 1);
        for orbit in &part.orbits {
            let types: Vec<usize> = orbit
                .iter()
                .map(|&idx| {
                    let g = decode_matrix(&field, 2, idx);
                    zip_type(&ZipView::standard_twisted(&field, 2, 1, &g), &fp).unwrap()
                })
                .collect();
            assert!(types.windows(2).all(|w| w[0] == w[1]));
        }
    }

    #[test]
    fn classifier_stable_under_reclosure() {
        let field = make_field(3, 1).unwrap();
        let g = Matrix::from_rows(field.clone(), &[vec![1, 2, 0], vec![0, 1, 1], vec![1, 0, 2]]);
        let view = ZipView::standard_twisted(&field, 3, 1, &g);
        let flag = canonical_filtration(&view).unwrap();
        // idempotence: the canonical chains are a closure fixed point
        let mut again = flag.chains.clone();
        let changed = super::close_once(&view, &mut again).unwrap();
        assert!(!changed, "canonical chain must be a fixed point");
        // the full flags refine the chain, one dimension at a time
        for (chain, full) in flag.chains.iter().zip(flag.full.iter()) {
            assert_eq!(full.len(), view.dims[0] + 1);
            for step in chain {
                assert!(full.iter().any(|z| z == step));
            }
        }
    }

    #[test]
    fn fast_matches_generic() {
        for (p, n, d) in [(2u64, 2usize, 1usize), (3, 2, 1), (5, 2, 1), (2, 3, 1), (3, 3, 1), (3, 3, 2)] {
            let field = make_field(p, 1).unwrap();
            let fp = FactorPoset::gl(n, d);
            let a = point_count(&field, n, d, &fp);
            let b = super::fast::point_count_fast(&field, n, d, &fp);
            assert_eq!(a, b, "p={} n={} d={}", p, n, d);
        }
    }

    #[test]
    fn pipeline_hilbert_classification() {
        let pel = PELDatum::hilbert(3, 1, 2, 1);
        let sigs = factor_sigs(&pel.factors[0]);
        let fp = FactorPoset::build(Kind::C, 1, &sigs);
        assert_eq!(fp.poset.len(), 4);
        let mut seen = std::collections::HashSet::new();
        for s in 0..60 {
            let datum = sample_fv(&pel, s).unwrap();
            let zip = assemble_zip(&datum).unwrap();
            let view = ZipView::of_factor(&zip, 0);
            let w = zip_type(&view, &fp).unwrap();
            seen.insert(w);
            // maximal EO <=> μ-ordinary Hasse nonzero
            let mu = crate::zipify::mu_ordinary_hasse(&zip, 0).unwrap();
            let maximal = fp.length(w) == fp.max_length();
            assert_eq!(!mu.zero, maximal, "seed {}", s);
        }
        assert!(seen.len() >= 2);
    }
}

/// Allocation-free classification for single-block zips over prime fields
/// with n ≤ 4: the workhorse behind exhaustive point counts. Mirrors the
/// generic path exactly; `fast_matches_generic` pins the agreement.
pub mod fast {
    use super::FactorPoset;
    use crate::ffalg::Field;

    const NMAX: usize = 4;

    #[derive(Clone, Copy, PartialEq, Eq)]
    pub struct Sub {
        rows: [[u32; NMAX]; NMAX],
        dim: usize,
    }

    #[inline]
    fn rref(rows: &mut [[u32; NMAX]], nrows: usize, n: usize, p: u64, inv: &[u32]) -> usize {
        let mut r = 0usize;
        for c in 0..n {
            let mut piv = None;
            for i in r..nrows {
                if rows[i][c] != 0 {
                    piv = Some(i);
                    break;
                }
            }
            let Some(pi) = piv else { continue };
            rows.swap(r, pi);
            let f = inv[rows[r][c] as usize] as u64;
            for x in rows[r].iter_mut().take(n) {
                *x = (*x as u64 * f % p) as u32;
            }
            for i in 0..nrows {
                if i != r && rows[i][c] != 0 {
                    let m = rows[i][c] as u64;
                    for k in 0..n {
                        let v = (rows[i][k] as u64 + p * p - m * rows[r][k] as u64) % p;
                        rows[i][k] = v as u32;
                    }
                }
            }
            r += 1;
            if r == nrows {
                break;
            }
        }
        r
    }

    impl Sub {
        fn from_rows(mut rows: [[u32; NMAX]; NMAX], nrows: usize, n: usize, p: u64, inv: &[u32]) -> Sub {
            let dim = rref(&mut rows[..nrows], nrows, n, p, inv);
            for i in dim..NMAX {
                rows[i] = [0; NMAX];
            }
            Sub { rows, dim }
        }
        #[inline]
        fn contains_vec(&self, v: &[u32; NMAX], n: usize, p: u64) -> bool {
            let mut w = *v;
            for r in 0..self.dim {
                let pc = (0..n).find(|&c| self.rows[r][c] != 0).unwrap();
                let m = w[pc] as u64;
                if m != 0 {
                    for k in 0..n {
                        w[k] = ((w[k] as u64 + p * p - m * self.rows[r][k] as u64) % p) as u32;
                    }
                }
            }
            w.iter().take(n).all(|&x| x == 0)
        }
        fn contains(&self, other: &Sub, n: usize, p: u64) -> bool {
            (0..other.dim).all(|r| self.contains_vec(&other.rows[r], n, p))
        }
    }

    /// dim(C0 ∩ S) for the coordinate space C0 = span{e_1..e_d}:
    /// dim S minus the rank of S's rows restricted to the tail coordinates.
    #[inline]
    fn c_intersection_dim(s: &Sub, n: usize, d: usize, p: u64, inv: &[u32]) -> usize {
        let mut tail = [[0u32; NMAX]; NMAX];
        for r in 0..s.dim {
            for c in d..n {
                tail[r][c - d] = s.rows[r][c];
            }
        }
        let rank = rref(&mut tail[..s.dim], s.dim, n - d, p, inv);
        s.dim - rank
    }

    #[inline]
    fn mat_apply(m: &[[u32; NMAX]; NMAX], v: &[u32; NMAX], n: usize, p: u64) -> [u32; NMAX] {
        let mut out = [0u32; NMAX];
        for (i, slot) in out.iter_mut().enumerate().take(n) {
            let mut acc = 0u64;
            for k in 0..n {
                acc += m[i][k] as u64 * v[k] as u64;
            }
            *slot = (acc % p) as u32;
        }
        out
    }

    fn image(m: &[[u32; NMAX]; NMAX], s: &Sub, n: usize, p: u64, inv: &[u32]) -> Sub {
        let mut rows = [[0u32; NMAX]; NMAX];
        for r in 0..s.dim {
            rows[r] = mat_apply(m, &s.rows[r], n, p);
        }
        Sub::from_rows(rows, s.dim, n, p, inv)
    }

    /// {v : M v ∈ S} via the kernel of (reduce mod S) ∘ M.
    fn preimage(m: &[[u32; NMAX]; NMAX], s: &Sub, n: usize, p: u64, inv: &[u32]) -> Sub {
        // residual columns: M e_k reduced against S
        let mut resid = [[0u32; NMAX]; NMAX]; // resid[row = reduced coord][col = k]
        for k in 0..n {
            let mut col = [0u32; NMAX];
            for i in 0..n {
                col[i] = m[i][k];
            }
            for r in 0..s.dim {
                let pc = (0..n).find(|&c| s.rows[r][c] != 0).unwrap();
                let mu = col[pc] as u64;
                if mu != 0 {
                    for c in 0..n {
                        col[c] = ((col[c] as u64 + p * p - mu * s.rows[r][c] as u64) % p) as u32;
                    }
                }
            }
            for i in 0..n {
                resid[i][k] = col[i];
            }
        }
        // kernel of resid (n x n): standard rref null space
        let mut work = resid;
        let rank = rref(&mut work[..n], n, n, p, inv);
        let mut pivots = [usize::MAX; NMAX];
        let mut is_pivot = [false; NMAX];
        for r in 0..rank {
            let pc = (0..n).find(|&c| work[r][c] != 0).unwrap();
            pivots[r] = pc;
            is_pivot[pc] = true;
        }
        let mut rows = [[0u32; NMAX]; NMAX];
        let mut nr = 0;
        for fc in 0..n {
            if is_pivot[fc] {
                continue;
            }
            let mut v = [0u32; NMAX];
            v[fc] = 1;
            for r in 0..rank {
                let val = work[r][fc];
                if val != 0 {
                    v[pivots[r]] = ((p - val as u64) % p) as u32;
                }
            }
            rows[nr] = v;
            nr += 1;
        }
        Sub::from_rows(rows, nr, n, p, inv)
    }

    struct Chain {
        subs: [Sub; NMAX + 2],
        len: usize,
    }

    impl Chain {
        fn insert(&mut self, x: Sub, n: usize, p: u64) -> Option<bool> {
            for i in 0..self.len {
                if self.subs[i].dim == x.dim {
                    if self.subs[i] == x {
                        return Some(false);
                    }
                    return None; // incomparable same-dim: not a chain
                }
            }
            for i in 0..self.len {
                let (small, large) =
                    if self.subs[i].dim < x.dim { (&self.subs[i], &x) } else { (&x, &self.subs[i]) };
                if !large.contains(small, n, p) {
                    return None;
                }
            }
            let mut pos = self.len;
            for i in 0..self.len {
                if self.subs[i].dim > x.dim {
                    pos = i;
                    break;
                }
            }
            for i in (pos..self.len).rev() {
                self.subs[i + 1] = self.subs[i];
            }
            self.subs[pos] = x;
            self.len += 1;
            Some(true)
        }
    }

    /// Classify the standard zip twisted by g (entries row-major); returns
    /// the poset index, or None on a singular matrix.
    #[allow(clippy::too_many_arguments)]
    pub fn classify_twist(
        g: &[[u32; NMAX]; NMAX],
        n: usize,
        d: usize,
        p: u64,
        inv: &[u32],
        lookup: &[usize],
    ) -> Option<usize> {
        // invert g
        let mut aug = [[0u32; 2 * NMAX]; NMAX];
        for i in 0..n {
            for j in 0..n {
                aug[i][j] = g[i][j];
            }
            aug[i][n + i] = 1;
        }
        // gaussian elimination
        let mut r = 0;
        for c in 0..n {
            let mut piv = None;
            for i in r..n {
                if aug[i][c] != 0 {
                    piv = Some(i);
                    break;
                }
            }
            let Some(pi) = piv else { return None };
            aug.swap(r, pi);
            let f = inv[aug[r][c] as usize] as u64;
            for x in aug[r].iter_mut().take(2 * n) {
                *x = (*x as u64 * f % p) as u32;
            }
            for i in 0..n {
                if i != r && aug[i][c] != 0 {
                    let m = aug[i][c] as u64;
                    for k in 0..2 * n {
                        aug[i][k] = ((aug[i][k] as u64 + p * p - m * aug[r][k] as u64) % p) as u32;
                    }
                }
            }
            r += 1;
        }
        if r != n {
            return None;
        }
        let mut ginv = [[0u32; NMAX]; NMAX];
        for i in 0..n {
            for j in 0..n {
                ginv[i][j] = aug[i][n + j];
            }
        }
        // F = g · proj_S, V = proj_C · g⁻¹ (prime field: Frobenius is trivial)
        let mut fm = [[0u32; NMAX]; NMAX];
        for i in 0..n {
            for j in d..n {
                fm[i][j] = g[i][j];
            }
        }
        let mut vm = [[0u32; NMAX]; NMAX];
        vm[..d].copy_from_slice(&ginv[..d]);
        // canonical chain closure
        let zero = Sub { rows: [[0; NMAX]; NMAX], dim: 0 };
        let mut full_rows = [[0u32; NMAX]; NMAX];
        for (i, row) in full_rows.iter_mut().enumerate().take(n) {
            row[i] = 1;
        }
        let full = Sub { rows: full_rows, dim: n };
        let mut chain = Chain { subs: [zero; NMAX + 2], len: 0 };
        chain.insert(zero, n, p).unwrap();
        chain.insert(full, n, p).unwrap();
        let mut work = [zero; 4 * (NMAX + 2)];
        work[0] = zero;
        work[1] = full;
        let mut head = 0usize;
        let mut tail = 2usize;
        while head < tail {
            let cur = work[head];
            head += 1;
            let img = image(&fm, &cur, n, p, inv);
            match chain.insert(img, n, p) {
                Some(true) => {
                    work[tail] = img;
                    tail += 1;
                }
                Some(false) => {}
                None => panic!("canonical closure left the chain"),
            }
            let pre = preimage(&vm, &cur, n, p, inv);
            match chain.insert(pre, n, p) {
                Some(true) => {
                    work[tail] = pre;
                    tail += 1;
                }
                Some(false) => {}
                None => panic!("canonical closure left the chain"),
            }
        }
        // bottom-aligned C-jump subset as a bitmask
        let mut mask = 0usize;
        let mut offset = 0usize;
        let mut prev_c = 0usize;
        for s in 1..chain.len {
            let width = chain.subs[s].dim - chain.subs[s - 1].dim;
            let cdim = c_intersection_dim(&chain.subs[s], n, d, p, inv);
            for t in 0..cdim - prev_c {
                mask |= 1 << (offset + t);
            }
            offset += width;
            prev_c = cdim;
        }
        Some(lookup[mask])
    }

    /// Subset-bitmask -> poset index lookup table for a single-block poset.
    pub fn subset_lookup(fp: &FactorPoset, n: usize) -> Vec<usize> {
        let mut table = vec![usize::MAX; 1 << n];
        for (i, subs) in fp.subset_of.iter().enumerate() {
            let mut mask = 0usize;
            for &s in &subs[0] {
                mask |= 1 << (s - 1);
            }
            table[mask] = i;
        }
        table
    }

    /// Exhaustive per-stratum counts over GL_n(F_p), prime fields, n ≤ 4.
    pub fn point_count_fast(field: &Field, n: usize, d: usize, fp: &FactorPoset) -> Vec<u64> {
        use rayon::prelude::*;
        assert!(n <= NMAX && field.degree() == 1);
        let p = field.order();
        let inv: Vec<u32> = (0..p).map(|a| if a == 0 { 0 } else { field.inv(a as u32) }).collect();
        let lookup = subset_lookup(fp, n);
        let total = p.pow((n * n) as u32);
        let chunk: u64 = 1 << 16;
        let nchunks = total.div_ceil(chunk);
        (0..nchunks)
            .into_par_iter()
            .map(|ci| {
                let mut counts = vec![0u64; fp.poset.len()];
                let start = ci * chunk;
                let end = (start + chunk).min(total);
                for idx in start..end {
                    let mut g = [[0u32; NMAX]; NMAX];
                    let mut rest = idx;
                    for row in g.iter_mut().take(n) {
                        for x in row.iter_mut().take(n) {
                            *x = (rest % p) as u32;
                            rest /= p;
                        }
                    }
                    if let Some(w) = classify_twist(&g, n, d, p, &inv, &lookup) {
                        counts[w] += 1;
                    }
                }
                counts
            })
            .reduce(
                || vec![0u64; fp.poset.len()],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b.iter()) {
                        *x += y;
                    }
                    a
                },
            )
    }
}
