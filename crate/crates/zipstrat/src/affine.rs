//! Extended affine Weyl groups W̃ = X ⋊ W₀ of type A products, translation
//! elements, affine Bruhat order, μ-admissible sets at Iwahori and very
//! special level, and the fully explicit Hilbert Kottwitz-Rapoport /
//! Ekedahl-Kottwitz-Oort-Rapoport tables.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::Serialize;

use crate::coxeter::{factor_identity, factor_inv, factor_mul, FactorElem, FactorKind};
use crate::dieudonne::Polygon;

/// W̃ = Z^n ⋊ S_n for one GL_n-shaped block.
#[derive(Clone, Debug)]
pub struct AffineCtx {
    pub n: usize,
}

/// t^λ · w with λ a coweight and w a finite Weyl element (one-line).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AffElem {
    pub lambda: Vec<i64>,
    pub w: FactorElem,
}

impl AffineCtx {
    pub fn new(n: usize) -> Self {
        AffineCtx { n }
    }

    fn kind(&self) -> FactorKind {
        FactorKind::A { n: self.n }
    }

    pub fn identity(&self) -> AffElem {
        AffElem { lambda: vec![0; self.n], w: factor_identity(&self.kind()) }
    }

    pub fn translation(&self, lambda: &[i64]) -> AffElem {
        AffElem { lambda: lambda.to_vec(), w: factor_identity(&self.kind()) }
    }

    /// (t^λ u)(t^μ v) = t^{λ + u(μ)} (u v).
    pub fn mul(&self, a: &AffElem, b: &AffElem) -> AffElem {
        let mut lam = a.lambda.clone();
        for (i, slot) in lam.iter_mut().enumerate() {
            // u(μ)_i = μ_{u^{-1}(i)}
            let src = (factor_inv(&a.w)[i] - 1) as usize;
            *slot += b.lambda[src];
        }
        AffElem { lambda: lam, w: factor_mul(&a.w, &b.w) }
    }

    /// Iwahori-Matsumoto length:
    /// Σ_{α>0, w⁻¹α>0} |⟨λ,α⟩| + Σ_{α>0, w⁻¹α<0} |⟨λ,α⟩−1|.
    pub fn length(&self, x: &AffElem) -> usize {
        let n = self.n;
        let winv = factor_inv(&x.w);
        let mut total: i64 = 0;
        for i in 0..n {
            for j in i + 1..n {
                // α = e_i − e_j (i < j); w⁻¹α > 0 iff w⁻¹(i) < w⁻¹(j)
                let pairing = x.lambda[i] - x.lambda[j];
                let pos = winv[i] < winv[j];
                total += if pos { pairing.abs() } else { (pairing - 1).abs() };
            }
        }
        total as usize
    }

    /// Affine reflection s_{α,k} = t^{k α∨} s_α for α = e_i − e_j.
    pub fn reflection(&self, i: usize, j: usize, k: i64) -> AffElem {
        let mut lam = vec![0i64; self.n];
        lam[i] = k;
        lam[j] = -k;
        let mut w = factor_identity(&self.kind());
        w.swap(i, j);
        AffElem { lambda: lam, w }
    }

    /// All reflections with |k| bounded by the window.
    pub fn reflections(&self, window: i64) -> Vec<AffElem> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                for k in -window..=window {
                    out.push(self.reflection(i, j, k));
                }
            }
        }
        out
    }
}

/// μ-admissible set at Iwahori level: downward Bruhat closure of the
/// translations by the W₀-orbit of μ, generated by covers x ⋗ x·r.
#[derive(Clone, Debug)]
pub struct AdmSet {
    pub ctx: AffineCtx,
    pub mu: Vec<i64>,
    pub elements: Vec<AffElem>,
    pub lengths: Vec<usize>,
    /// leq[a][b] in Bruhat order, restricted to the admissible set.
    pub leq: Vec<Vec<bool>>,
}

/// All distinct permutations of μ.
fn orbit_of(mu: &[i64]) -> Vec<Vec<i64>> {
    let mut sorted = mu.to_vec();
    sorted.sort_unstable();
    let mut out: BTreeSet<Vec<i64>> = BTreeSet::new();
    permute_rec(&mut sorted.clone(), 0, &mut out);
    // simple approach: collect all permutations via heap-style recursion
    fn permute_rec(v: &mut Vec<i64>, k: usize, out: &mut BTreeSet<Vec<i64>>) {
        if k == v.len() {
            out.insert(v.clone());
            return;
        }
        for i in k..v.len() {
            v.swap(k, i);
            permute_rec(v, k + 1, out);
            v.swap(k, i);
        }
    }
    out.into_iter().collect()
}

/// Dominant (weakly decreasing) representative.
pub fn dominant(v: &[i64]) -> Vec<i64> {
    let mut out = v.to_vec();
    out.sort_unstable_by(|a, b| b.cmp(a));
    out
}

pub fn adm(ctx: &AffineCtx, mu: &[i64]) -> AdmSet {
    assert_eq!(mu.len(), ctx.n);
    let mu_dom = dominant(mu);
    let translations: Vec<AffElem> =
        orbit_of(&mu_dom).into_iter().map(|lam| ctx.translation(&lam)).collect();
    let lmax = ctx.length(&ctx.translation(&mu_dom));
    let window = lmax as i64 + 1;
    let refs = ctx.reflections(window);
    // BFS downward closure under covers x -> x r with ℓ drop exactly 1
    let mut seen: BTreeMap<AffElem, usize> = BTreeMap::new();
    let mut queue: VecDeque<AffElem> = VecDeque::new();
    for t in &translations {
        if !seen.contains_key(t) {
            seen.insert(t.clone(), ctx.length(t));
            queue.push_back(t.clone());
        }
    }
    while let Some(x) = queue.pop_front() {
        let lx = seen[&x];
        if lx == 0 {
            continue;
        }
        for r in &refs {
            let y = ctx.mul(&x, r);
            let ly = ctx.length(&y);
            if ly + 1 == lx && !seen.contains_key(&y) {
                seen.insert(y.clone(), ly);
                queue.push_back(y.clone());
            }
        }
    }
    let mut keyed: Vec<(usize, AffElem)> = seen.into_iter().map(|(x, l)| (l, x)).collect();
    keyed.sort();
    let elements: Vec<AffElem> = keyed.into_iter().map(|(_, x)| x).collect();
    let lengths: Vec<usize> = elements.iter().map(|x| ctx.length(x)).collect();
    // Bruhat order on the set: reachability through covers inside the set
    let index: HashMap<AffElem, usize> =
        elements.iter().enumerate().map(|(i, x)| (x.clone(), i)).collect();
    let nelem = elements.len();
    let mut leq = vec![vec![false; nelem]; nelem];
    for (a, _) in elements.iter().enumerate() {
        leq[a][a] = true;
    }
    // downward edges by single reflections, then transitive closure
    for (b, x) in elements.iter().enumerate() {
        for r in &refs {
            let y = ctx.mul(x, r);
            if ctx.length(&y) + 1 == lengths[b] {
                if let Some(&a) = index.get(&y) {
                    leq[a][b] = true;
                }
            }
        }
    }
    for k in 0..nelem {
        for a in 0..nelem {
            if leq[a][k] {
                for b in 0..nelem {
                    if leq[k][b] {
                        leq[a][b] = true;
                    }
                }
            }
        }
    }
    AdmSet { ctx: ctx.clone(), mu: mu_dom, elements, lengths, leq }
}

impl AdmSet {
    /// Very special level: classes of the translation parts, ordered by
    /// dominance; the very-special-level projection of Adm(μ) to W₀ \ W̃ / W₀.
    pub fn special_level_classes(&self) -> Vec<Vec<i64>> {
        let mut out: BTreeSet<Vec<i64>> = BTreeSet::new();
        for x in &self.elements {
            out.insert(dominant(&x.lambda));
        }
        out.into_iter().collect()
    }

    pub fn maximal_elements(&self) -> Vec<usize> {
        (0..self.elements.len())
            .filter(|&a| (0..self.elements.len()).all(|b| b == a || !self.leq[a][b]))
            .collect()
    }
}

/// λ ≤ μ in the dominance order (equal totals, partial sums dominated).
pub fn dominance_leq(lam: &[i64], mu: &[i64]) -> bool {
    let a = dominant(lam);
    let b = dominant(mu);
    if a.len() != b.len() || a.iter().sum::<i64>() != b.iter().sum::<i64>() {
        return false;
    }
    let mut pa = 0i64;
    let mut pb = 0i64;
    for (x, y) in a.iter().zip(b.iter()) {
        pa += x;
        pb += y;
        if pa > pb {
            return false;
        }
    }
    true
}

/// Very special level admissible classes of μ: dominant coweights below μ.
/// Enumerated directly through the dominance order.
pub fn adm_special(mu: &[i64]) -> Vec<Vec<i64>> {
    let mu_dom = dominant(mu);
    let total: i64 = mu_dom.iter().sum();
    let n = mu_dom.len();
    let lo = *mu_dom.iter().min().unwrap();
    let hi = *mu_dom.iter().max().unwrap();
    let mut out = Vec::new();
    // weakly decreasing vectors with entries in [lo, hi] and the same total
    let mut cur = vec![0i64; n];
    fn rec(
        cur: &mut Vec<i64>,
        idx: usize,
        lo: i64,
        hi: i64,
        rem: i64,
        mu: &[i64],
        out: &mut Vec<Vec<i64>>,
    ) {
        let n = cur.len();
        if idx == n {
            if rem == 0 && dominance_leq(cur, mu) {
                out.push(cur.clone());
            }
            return;
        }
        let cap = if idx == 0 { hi } else { cur[idx - 1] };
        let slots = (n - idx) as i64;
        for v in lo..=cap {
            // feasibility: remaining total must be reachable
            if rem - v < lo * (slots - 1) || rem - v > cap.min(v) * (slots - 1) {
                continue;
            }
            cur[idx] = v;
            rec(cur, idx + 1, lo, hi, rem - v, mu, out);
        }
    }
    rec(&mut cur, 0, lo, hi, total, &mu_dom, &mut out);
    out.sort();
    out
}

/// KR type as an element of the special-level admissible set: the dominant
/// valuation vector per residue block, checked against μ.
pub fn kr_to_coweight(
    valuations: &[Vec<usize>],
    mu_dom: &[Vec<usize>],
) -> Result<Vec<Vec<i64>>, String> {
    let mut out = Vec::new();
    for (vals, mu) in valuations.iter().zip(mu_dom.iter()) {
        let lam: Vec<i64> = vals.iter().map(|&v| v as i64).collect();
        let muv: Vec<i64> = mu.iter().map(|&v| v as i64).collect();
        if !dominance_leq(&lam, &muv) {
            return Err(format!("coweight {:?} is not admissible for {:?}", lam, muv));
        }
        out.push(lam);
    }
    Ok(out)
}

/// Hilbert EKOR table: KR types a = (a_{i,j}), dimensions, closure covers,
/// and the EKOR refinement counts per stratum.
#[derive(Clone, Debug, Serialize)]
pub struct HilbertEkor {
    pub e: Vec<usize>,
    pub f: Vec<usize>,
    pub kr_types: Vec<Vec<usize>>,
    pub kr_dims: Vec<usize>,
    pub t_a: Vec<usize>,
    pub ekor_counts: Vec<usize>,
    /// EKOR stratum dims per KR type: dim(a) - t_x for t_x = 0..t_a.
    pub ekor_dims: Vec<Vec<usize>>,
    /// Closure covers between KR types (a covers b when b ≤ a minimally).
    pub kr_covers: Vec<(usize, usize)>,
    pub total_ekor: usize,
    pub eo_count: usize,
}

/// Full enumeration of the Hilbert (g = 1) KR/EKOR combinatorics.
pub fn hilbert_ekor(e_list: &[usize], f_list: &[usize]) -> HilbertEkor {
    assert_eq!(e_list.len(), f_list.len());
    // index pairs (i, j): per factor i, f_i residue slots, each with bound ⌊e_i/2⌋
    let mut bounds = Vec::new();
    let mut e_of = Vec::new();
    for (i, (&e, &f)) in e_list.iter().zip(f_list.iter()).enumerate() {
        let _ = i;
        for _ in 0..f {
            bounds.push(e / 2);
            e_of.push(e);
        }
    }
    let mut kr_types: Vec<Vec<usize>> = vec![vec![]];
    for &b in &bounds {
        let mut next = Vec::new();
        for base in &kr_types {
            for a in 0..=b {
                let mut t = base.clone();
                t.push(a);
                next.push(t);
            }
        }
        kr_types = next;
    }
    kr_types.sort();
    let kr_dims: Vec<usize> = kr_types
        .iter()
        .map(|a| a.iter().zip(e_of.iter()).map(|(&aij, &e)| e - 2 * aij).sum())
        .collect();
    let delta = |u: usize| -> usize { usize::from(u != 0) };
    let t_a: Vec<usize> = kr_types
        .iter()
        .map(|a| a.iter().zip(e_of.iter()).map(|(&aij, &e)| delta(e - 2 * aij)).sum())
        .collect();
    let ekor_counts: Vec<usize> = t_a.iter().map(|&t| t + 1).collect();
    let ekor_dims: Vec<Vec<usize>> = kr_dims
        .iter()
        .zip(t_a.iter())
        .map(|(&dim, &t)| (0..=t).map(|tx| dim - tx).collect())
        .collect();
    // closure: a ≤ a' iff a_{ij} ≥ a'_{ij} for all slots; covers = one-step
    let leq = |a: &Vec<usize>, b: &Vec<usize>| a.iter().zip(b.iter()).all(|(x, y)| x >= y);
    let mut kr_covers = Vec::new();
    for (x, a) in kr_types.iter().enumerate() {
        for (y, b) in kr_types.iter().enumerate() {
            if x != y && leq(a, b) {
                let through = kr_types.iter().enumerate().any(|(z, c)| {
                    z != x && z != y && leq(a, c) && leq(c, b)
                });
                if !through {
                    kr_covers.push((x, y));
                }
            }
        }
    }
    kr_covers.sort_unstable();
    let total_ekor = ekor_counts.iter().sum();
    let eo_count = eo_count_hilbert(e_list, f_list);
    HilbertEkor {
        e: e_list.to_vec(),
        f: f_list.to_vec(),
        kr_types,
        kr_dims,
        t_a,
        ekor_counts,
        ekor_dims,
        kr_covers,
        total_ekor,
        eo_count,
    }
}

/// Number of Hilbert EO strata: 2^{Σ e_i f_i}.
pub fn eo_count_hilbert(e_list: &[usize], f_list: &[usize]) -> usize {
    let total: usize = e_list.iter().zip(f_list.iter()).map(|(&e, &f)| e * f).sum();
    1usize << total
}

impl HilbertEkor {
    /// CSV rows: kr type label; dim; t_a; ekor dims.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kr_type,dim,t_a,ekor_dims\n");
        for (i, a) in self.kr_types.iter().enumerate() {
            let label = a.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("|");
            let dims =
                self.ekor_dims[i].iter().map(|x| x.to_string()).collect::<Vec<_>>().join("|");
            out.push_str(&format!("{},{},{},{}\n", label, self.kr_dims[i], self.t_a[i], dims));
        }
        out
    }

    /// Deterministic DOT of the KR closure poset.
    pub fn kr_dot(&self) -> String {
        let mut s = String::from("digraph kr_poset {\n  rankdir=BT;\n");
        for (i, a) in self.kr_types.iter().enumerate() {
            let label = a.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
            s.push_str(&format!(
                "  n{} [label=\"a=({}) | dim={} | ekor={}\"];\n",
                i, label, self.kr_dims[i], self.ekor_counts[i]
            ));
        }
        // edges point from smaller stratum to the one whose closure contains it
        for &(x, y) in &self.kr_covers {
            s.push_str(&format!("  n{} -> n{};\n", y, x));
        }
        s.push_str("}\n");
        s
    }
}

/// Monotonicity helper: dominance of coweights gives pointwise polygon order.
pub fn dominance_implies_polygon_leq(a: &[i64], b: &[i64], h: usize) -> bool {
    let pa = Polygon::from_valuations(&a.iter().map(|&v| v as usize).collect::<Vec<_>>(), h);
    let pb = Polygon::from_valuations(&b.iter().map(|&v| v as usize).collect::<Vec<_>>(), h);
    match pa.leq(&pb) {
        Ok(v) => v,
        Err(_) => false,
    }
}
