//! Finite Weyl groups of classical types A and C as products of factors,
//! with Frobenius label-cycling, minimal coset representatives, Bruhat
//! order, the orbit-closure partial order on ᴶW, and DOT export.
//!
//! Elements are stored in signed one-line notation per factor (type A
//! entries all positive). Lengths come from inversion-style counting and are
//! cross-checked against breadth-first word length in tests.

use std::collections::{BTreeMap, HashMap, VecDeque};

/// One factor of the product Weyl group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FactorKind {
    /// Symmetric group S_n (Weyl group of GL_n).
    A { n: usize },
    /// Hyperoctahedral group of rank g (Weyl group of GSp_2g).
    C { g: usize },
}

impl FactorKind {
    pub fn rank(&self) -> usize {
        match self {
            FactorKind::A { n } => *n,
            FactorKind::C { g } => *g,
        }
    }

    /// Number of simple reflections.
    pub fn num_simples(&self) -> usize {
        match self {
            FactorKind::A { n } => n.saturating_sub(1),
            FactorKind::C { g } => *g,
        }
    }

    pub fn order(&self) -> usize {
        match self {
            FactorKind::A { n } => (1..=*n).product(),
            FactorKind::C { g } => (1..=*g).product::<usize>() << g,
        }
    }
}

/// Signed one-line notation: entry i holds the image of i+1, sign included.
/// Type A elements keep every entry positive.
pub type FactorElem = Vec<i32>;

pub fn factor_identity(kind: &FactorKind) -> FactorElem {
    (1..=kind.rank() as i32).collect()
}

/// Image of signed point x (1-based, either sign).
#[inline]
fn act(w: &FactorElem, x: i32) -> i32 {
    if x > 0 {
        w[(x - 1) as usize]
    } else {
        -w[(-x - 1) as usize]
    }
}

/// Composition (u * w)(x) = u(w(x)).
pub fn factor_mul(u: &FactorElem, w: &FactorElem) -> FactorElem {
    w.iter().map(|&wx| act(u, wx)).collect()
}

pub fn factor_inv(w: &FactorElem) -> FactorElem {
    let mut out = vec![0; w.len()];
    for (i, &wi) in w.iter().enumerate() {
        let (pos, neg) = if wi > 0 { ((wi - 1) as usize, false) } else { ((-wi - 1) as usize, true) };
        out[pos] = if neg { -(i as i32 + 1) } else { i as i32 + 1 };
    }
    out
}

/// Simple reflection `k` (0-based) as an element. For type A, s_k swaps
/// k+1 and k+2. For type C, s_0 flips the sign of the first coordinate and
/// s_1..s_{g-1} are the adjacent swaps (Björner-Brenti numbering).
pub fn factor_simple(kind: &FactorKind, k: usize) -> FactorElem {
    let mut w = factor_identity(kind);
    match kind {
        FactorKind::A { .. } => {
            w.swap(k, k + 1);
        }
        FactorKind::C { .. } => {
            if k == 0 {
                w[0] = -1;
            } else {
                w.swap(k - 1, k);
            }
        }
    }
    w
}

/// Coxeter length: inversion count for type A; for the hyperoctahedral
/// group, inv(w) + sum of |w(i)| over negative entries (Björner-Brenti).
pub fn factor_length(kind: &FactorKind, w: &FactorElem) -> usize {
    match kind {
        FactorKind::A { .. } => {
            let mut inv = 0;
            for i in 0..w.len() {
                for j in i + 1..w.len() {
                    if w[i] > w[j] {
                        inv += 1;
                    }
                }
            }
            inv
        }
        FactorKind::C { .. } => {
            let n = w.len();
            let mut inv = 0usize;
            let mut negsum = 0usize;
            for i in 0..n {
                if w[i] < 0 {
                    negsum += (-w[i]) as usize;
                }
                for j in i + 1..n {
                    if w[i] > w[j] {
                        inv += 1;
                    }
                }
            }
            inv + negsum
        }
    }
}

/// All factor elements, enumerated deterministically.
pub fn factor_elements(kind: &FactorKind) -> Vec<FactorElem> {
    let mut out = Vec::with_capacity(kind.order());
    let rank = kind.rank();
    let mut perm: Vec<usize> = (0..rank).collect();
    let signed = matches!(kind, FactorKind::C { .. });
    loop {
        let sign_count = if signed { 1usize << rank } else { 1 };
        for mask in 0..sign_count {
            let w: FactorElem = perm
                .iter()
                .enumerate()
                .map(|(i, &p)| {
                    let v = (p + 1) as i32;
                    if signed && (mask >> i) & 1 == 1 {
                        -v
                    } else {
                        v
                    }
                })
                .collect();
            out.push(w);
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    out.sort();
    out
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Product Weyl group with a Frobenius action by factor-label permutation.
#[derive(Clone, Debug)]
pub struct WeylCtx {
    pub factors: Vec<FactorKind>,
    /// phi sends the content of factor b to factor phi[b] (a label cycle).
    pub phi: Vec<usize>,
}

/// An element of the product group.
pub type WElem = Vec<FactorElem>;

impl WeylCtx {
    pub fn new(factors: Vec<FactorKind>, phi: Vec<usize>) -> Self {
        assert_eq!(factors.len(), phi.len());
        for (b, &t) in phi.iter().enumerate() {
            assert_eq!(factors[b].rank(), factors[t].rank(), "phi must respect factor shapes");
            assert!(
                std::mem::discriminant(&factors[b]) == std::mem::discriminant(&factors[t]),
                "phi must respect factor kinds"
            );
        }
        WeylCtx { factors, phi }
    }

    /// Product group with trivial Frobenius.
    pub fn split(factors: Vec<FactorKind>) -> Self {
        let phi = (0..factors.len()).collect();
        WeylCtx::new(factors, phi)
    }

    pub fn identity(&self) -> WElem {
        self.factors.iter().map(factor_identity).collect()
    }

    pub fn mul(&self, u: &WElem, w: &WElem) -> WElem {
        u.iter().zip(w.iter()).map(|(a, b)| factor_mul(a, b)).collect()
    }

    pub fn inv(&self, w: &WElem) -> WElem {
        w.iter().map(factor_inv).collect()
    }

    pub fn length(&self, w: &WElem) -> usize {
        self.factors.iter().zip(w.iter()).map(|(k, f)| factor_length(k, f)).sum()
    }

    pub fn order(&self) -> usize {
        self.factors.iter().map(|k| k.order()).product()
    }

    /// Simple reflections as (factor, local index) pairs.
    pub fn simples(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (b, k) in self.factors.iter().enumerate() {
            for s in 0..k.num_simples() {
                out.push((b, s));
            }
        }
        out
    }

    pub fn simple_elem(&self, s: (usize, usize)) -> WElem {
        let mut w = self.identity();
        w[s.0] = factor_simple(&self.factors[s.0], s.1);
        w
    }

    /// Frobenius action: relabel components along phi.
    pub fn phi_apply(&self, w: &WElem) -> WElem {
        let mut out = self.identity();
        for (b, f) in w.iter().enumerate() {
            out[self.phi[b]] = f.clone();
        }
        out
    }

    /// Longest element (componentwise).
    pub fn longest(&self) -> WElem {
        self.factors
            .iter()
            .map(|k| match k {
                FactorKind::A { n } => (1..=*n as i32).rev().collect(),
                FactorKind::C { g } => (1..=*g as i32).map(|v| -v).collect(),
            })
            .collect()
    }

    /// Bruhat order, componentwise over factors.
    pub fn bruhat_leq(&self, u: &WElem, w: &WElem) -> bool {
        self.factors
            .iter()
            .zip(u.iter().zip(w.iter()))
            .all(|(k, (a, b))| factor_bruhat_leq(k, a, b))
    }

    /// All group elements. Intended for desk-scale products only.
    pub fn elements(&self) -> Vec<WElem> {
        let per: Vec<Vec<FactorElem>> = self.factors.iter().map(factor_elements).collect();
        cartesian(&per)
    }
}

fn cartesian(per: &[Vec<FactorElem>]) -> Vec<WElem> {
    let mut out: Vec<WElem> = vec![Vec::new()];
    for fac in per {
        let mut next = Vec::with_capacity(out.len() * fac.len());
        for base in &out {
            for f in fac {
                let mut w = base.clone();
                w.push(f.clone());
                next.push(w);
            }
        }
        out = next;
    }
    out
}

/// Standard subword recursion for Bruhat order within one factor.
pub fn factor_bruhat_leq(kind: &FactorKind, u: &FactorElem, w: &FactorElem) -> bool {
    let lw = factor_length(kind, w);
    if factor_length(kind, u) > lw {
        return false;
    }
    if lw == 0 {
        return u == w;
    }
    let s = (0..kind.num_simples())
        .find(|&k| {
            let ws = factor_mul(w, &factor_simple(kind, k));
            factor_length(kind, &ws) < lw
        })
        .expect("nonzero length has a descent");
    let sref = factor_simple(kind, s);
    let ws = factor_mul(w, &sref);
    let us = factor_mul(u, &sref);
    if factor_length(kind, &us) < factor_length(kind, u) {
        factor_bruhat_leq(kind, &us, &ws)
    } else {
        factor_bruhat_leq(kind, u, &ws)
    }
}

/// The poset ᴶW of minimal-length representatives of W_J \ W, carrying the
/// orbit-closure order ≼: w' ≼ w iff some y ∈ W_J has y·w'·x·φ(y)⁻¹·x⁻¹ ≤ w
/// in Bruhat order. The distinguished element x defaults to w₀·w_{0,J}.
#[derive(Clone, Debug)]
pub struct JWPoset {
    pub ctx: WeylCtx,
    /// Per factor, local indices of the simple reflections in J.
    pub j: Vec<Vec<usize>>,
    pub elements: Vec<WElem>,
    pub lengths: Vec<usize>,
    pub x: WElem,
    /// leq[a][b] = (elements[a] ≼ elements[b]).
    pub leq: Vec<Vec<bool>>,
    index: HashMap<WElem, usize>,
}

impl JWPoset {
    pub fn build(ctx: WeylCtx, j: Vec<Vec<usize>>, x_override: Option<WElem>) -> Self {
        let per_factor: Vec<Vec<FactorElem>> = ctx
            .factors
            .iter()
            .enumerate()
            .map(|(b, kind)| {
                factor_elements(kind)
                    .into_iter()
                    .filter(|w| {
                        j[b].iter().all(|&s| {
                            let sw = factor_mul(&factor_simple(kind, s), w);
                            factor_length(kind, &sw) > factor_length(kind, w)
                        })
                    })
                    .collect()
            })
            .collect();
        let elements = cartesian(&per_factor);
        let mut keyed: Vec<(usize, WElem)> =
            elements.into_iter().map(|w| (ctx.length(&w), w)).collect();
        keyed.sort();
        let elements: Vec<WElem> = keyed.into_iter().map(|(_, w)| w).collect();
        let lengths: Vec<usize> = elements.iter().map(|w| ctx.length(w)).collect();

        let x = x_override.unwrap_or_else(|| {
            // w0 * w_{0, phi(J)}: conjugation by x then carries W_phi(J) into
            // W_J whenever the signature pattern is phi-balanced, which keeps
            // the twisted conjugation inside the Levi. Coincides with
            // w0 * w_{0,J} whenever phi fixes J.
            let mut jphi: Vec<Vec<usize>> = vec![Vec::new(); j.len()];
            for (b, js) in j.iter().enumerate() {
                jphi[ctx.phi[b]] = js.clone();
            }
            let w0 = ctx.longest();
            let w0j = longest_in_wj(&ctx, &jphi);
            ctx.mul(&w0, &w0j)
        });

        let wj = wj_elements(&ctx, &j);
        let n = elements.len();
        let mut leq = vec![vec![false; n]; n];
        let xinv = ctx.inv(&x);
        for (a, wa) in elements.iter().enumerate() {
            for (b, wb) in elements.iter().enumerate() {
                let hit = wj.iter().any(|y| {
                    let phin = ctx.phi_apply(y);
                    let cand = ctx.mul(
                        &ctx.mul(y, wa),
                        &ctx.mul(&x, &ctx.mul(&ctx.inv(&phin), &xinv)),
                    );
                    ctx.bruhat_leq(&cand, wb)
                });
                leq[a][b] = hit;
            }
        }
        let index: HashMap<WElem, usize> =
            elements.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        JWPoset { ctx, j, elements, lengths, x, leq, index }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn index_of(&self, w: &WElem) -> Option<usize> {
        self.index.get(w).copied()
    }

    pub fn preceq(&self, a: usize, b: usize) -> bool {
        self.leq[a][b]
    }

    pub fn maximal_elements(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&a| (0..self.len()).all(|b| b == a || !self.leq[a][b]))
            .collect()
    }

    pub fn minimal_elements(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&a| (0..self.len()).all(|b| b == a || !self.leq[b][a]))
            .collect()
    }

    /// Cover relations (transitive reduction of ≼).
    pub fn covers(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if a == b || !self.leq[a][b] {
                    continue;
                }
                let through = (0..n)
                    .any(|c| c != a && c != b && self.leq[a][c] && self.leq[c][b]);
                if !through {
                    out.push((a, b));
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Canonical reduced word from repeated smallest left descents.
    pub fn reduced_word(&self, w: &WElem) -> Vec<(usize, usize)> {
        let mut word = Vec::new();
        let mut cur = w.clone();
        let mut len = self.ctx.length(&cur);
        while len > 0 {
            let s = self
                .ctx
                .simples()
                .into_iter()
                .find(|&s| {
                    let sw = self.ctx.mul(&self.ctx.simple_elem(s), &cur);
                    self.ctx.length(&sw) < len
                })
                .expect("descent exists");
            word.push(s);
            cur = self.ctx.mul(&self.ctx.simple_elem(s), &cur);
            len = self.ctx.length(&cur);
        }
        word.reverse();
        word
    }

    fn node_label(&self, i: usize) -> String {
        let word = self.reduced_word(&self.elements[i]);
        let wtxt = if word.is_empty() {
            "e".to_string()
        } else {
            word.iter().map(|(b, k)| format!("s{}_{}", b, k)).collect::<Vec<_>>().join(" ")
        };
        format!("{} | l={}", wtxt, self.lengths[i])
    }

    /// Deterministic DOT text of the closure diagram.
    pub fn dot_export(&self) -> String {
        let mut s = String::from("digraph jw_poset {\n  rankdir=BT;\n");
        for i in 0..self.len() {
            s.push_str(&format!("  n{} [label=\"{}\"];\n", i, self.node_label(i)));
        }
        for (a, b) in self.covers() {
            s.push_str(&format!("  n{} -> n{};\n", a, b));
        }
        s.push_str("}\n");
        s
    }

    /// JSON poset dump: elements with reduced words and lengths, plus covers.
    pub fn json_dump(&self) -> serde_json::Value {
        let nodes: Vec<serde_json::Value> = (0..self.len())
            .map(|i| {
                let word: Vec<String> = self
                    .reduced_word(&self.elements[i])
                    .into_iter()
                    .map(|(b, k)| format!("s{}_{}", b, k))
                    .collect();
                serde_json::json!({"word": word, "length": self.lengths[i]})
            })
            .collect();
        serde_json::json!({ "elements": nodes, "covers": self.covers() })
    }
}

/// Elements of W_J (product of per-factor parabolic subgroups).
pub fn wj_elements(ctx: &WeylCtx, j: &[Vec<usize>]) -> Vec<WElem> {
    let per: Vec<Vec<FactorElem>> = ctx
        .factors
        .iter()
        .enumerate()
        .map(|(b, kind)| parabolic_elements(kind, &j[b]))
        .collect();
    cartesian(&per)
}

fn parabolic_elements(kind: &FactorKind, j: &[usize]) -> Vec<FactorElem> {
    let id = factor_identity(kind);
    let mut seen: BTreeMap<FactorElem, ()> = BTreeMap::new();
    seen.insert(id.clone(), ());
    let mut queue = VecDeque::from([id]);
    while let Some(w) = queue.pop_front() {
        for &s in j {
            let next = factor_mul(&w, &factor_simple(kind, s));
            if !seen.contains_key(&next) {
                seen.insert(next.clone(), ());
                queue.push_back(next);
            }
        }
    }
    seen.into_keys().collect()
}

fn longest_in_wj(ctx: &WeylCtx, j: &[Vec<usize>]) -> WElem {
    ctx.factors
        .iter()
        .enumerate()
        .map(|(b, kind)| {
            parabolic_elements(kind, &j[b])
                .into_iter()
                .max_by_key(|w| factor_length(kind, w))
                .unwrap()
        })
        .collect()
}

/// Minimal coset representative of (S_d × S_{n-d}) \ S_n whose positions
/// mapping into {1..d} are exactly `subset` (sorted ascending, size d).
pub fn min_rep_from_subset_a(n: usize, subset: &[usize]) -> FactorElem {
    let mut w = vec![0i32; n];
    let d = subset.len();
    let mut inset = vec![false; n + 1];
    for &s in subset {
        inset[s] = true;
    }
    let mut low = 1i32;
    let mut high = (d + 1) as i32;
    for k in 1..=n {
        if inset[k] {
            w[k - 1] = low;
            low += 1;
        } else {
            w[k - 1] = high;
            high += 1;
        }
    }
    w
}

/// Positions of {1..d}-values for a type-A element.
pub fn subset_rep_a(w: &FactorElem, d: usize) -> Vec<usize> {
    (1..=w.len())
        .filter(|&k| {
            let v = act(w, k as i32);
            v > 0 && (v as usize) <= d
        })
        .collect()
}

/// Positions mapped into the first half by a hyperoctahedral element acting
/// on {1..2g} through the standard symplectic embedding: position k ≤ g is
/// the point +k, position k > g is the point -(2g+1-k).
pub fn subset_rep_c(w: &FactorElem, g: usize) -> Vec<usize> {
    let mut out = Vec::new();
    for k in 1..=2 * g {
        let x = if k <= g { k as i32 } else { -((2 * g + 1 - k) as i32) };
        let y = act(w, x);
        let pos = if y > 0 { y as usize } else { 2 * g + 1 - (-y) as usize };
        if pos <= g {
            out.push(k);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn bfs_lengths(kind: &FactorKind) -> HashMap<FactorElem, usize> {
        let id = factor_identity(kind);
        let mut dist = HashMap::new();
        dist.insert(id.clone(), 0usize);
        let mut queue = VecDeque::from([id]);
        while let Some(w) = queue.pop_front() {
            let dw = dist[&w];
            for k in 0..kind.num_simples() {
                let next = factor_mul(&w, &factor_simple(kind, k));
                if !dist.contains_key(&next) {
                    dist.insert(next.clone(), dw + 1);
                    queue.push_back(next);
                }
            }
        }
        dist
    }

    #[test]
    fn lengths_match_word_length_type_a() {
        for n in 1..=5 {
            let kind = FactorKind::A { n };
            let bfs = bfs_lengths(&kind);
            assert_eq!(bfs.len(), kind.order());
            for (w, d) in bfs {
                assert_eq!(factor_length(&kind, &w), d, "w = {:?}", w);
            }
        }
    }

    #[test]
    fn lengths_match_word_length_type_c() {
        for g in 1..=3 {
            let kind = FactorKind::C { g };
            let bfs = bfs_lengths(&kind);
            assert_eq!(bfs.len(), kind.order());
            for (w, d) in bfs {
                assert_eq!(factor_length(&kind, &w), d, "w = {:?}", w);
            }
        }
    }

    #[test]
    fn bruhat_s3_examples() {
        let kind = FactorKind::A { n: 3 };
        let s1 = factor_simple(&kind, 0);
        let s2 = factor_simple(&kind, 1);
        let s1s2 = factor_mul(&s1, &s2);
        let e = factor_identity(&kind);
        assert!(factor_bruhat_leq(&kind, &e, &s1s2));
        assert!(factor_bruhat_leq(&kind, &s1, &s1s2));
        assert!(!factor_bruhat_leq(&kind, &s1, &s2));
    }

    #[test]
    fn bruhat_s4_is_a_partial_order() {
        let kind = FactorKind::A { n: 4 };
        let els = factor_elements(&kind);
        let leq: Vec<Vec<bool>> = els
            .iter()
            .map(|u| els.iter().map(|w| factor_bruhat_leq(&kind, u, w)).collect())
            .collect();
        let n = els.len();
        for a in 0..n {
            assert!(leq[a][a]);
            for b in 0..n {
                if a != b && leq[a][b] {
                    assert!(!leq[b][a], "antisymmetry");
                    assert!(factor_length(&kind, &els[a]) < factor_length(&kind, &els[b]));
                }
                for c in 0..n {
                    if leq[a][b] && leq[b][c] {
                        assert!(leq[a][c], "transitivity");
                    }
                }
            }
        }
    }

    #[test]
    fn coset_decomposition_is_length_additive() {
        let kind = FactorKind::A { n: 4 };
        let ctx = WeylCtx::split(vec![kind.clone()]);
        for j in [vec![vec![0usize]], vec![vec![0, 1]], vec![vec![1, 2]]] {
            let poset = JWPoset::build(ctx.clone(), j.clone(), None);
            let wj = wj_elements(&ctx, &j);
            assert_eq!(poset.len() * wj.len(), ctx.order());
            let mut seen = HashSet::new();
            for y in &wj {
                for r in &poset.elements {
                    let w = ctx.mul(y, r);
                    assert_eq!(ctx.length(&w), ctx.length(y) + ctx.length(r));
                    assert!(seen.insert(w));
                }
            }
            assert_eq!(seen.len(), ctx.order());
        }
    }

    #[test]
    fn jw_sizes_match_binomials() {
        for d in 2..=5usize {
            for a in 0..=d {
                let kind = FactorKind::A { n: d };
                let mut j = Vec::new();
                for s in 0..d - 1 {
                    if s + 1 != a {
                        j.push(s);
                    }
                }
                let ctx = WeylCtx::split(vec![kind]);
                let poset = JWPoset::build(ctx, vec![j], None);
                let binom = (0..a).fold(1usize, |acc, i| acc * (d - i) / (i + 1));
                assert_eq!(poset.len(), binom, "d={} a={}", d, a);
            }
        }
    }

    #[test]
    fn jw_full_j_is_trivial() {
        let kind = FactorKind::A { n: 4 };
        let ctx = WeylCtx::split(vec![kind]);
        let poset = JWPoset::build(ctx.clone(), vec![vec![0, 1, 2]], None);
        assert_eq!(poset.len(), 1);
        assert_eq!(poset.elements[0], ctx.identity());
    }

    #[test]
    fn hilbert_siegel_index_set_size() {
        for g in 1..=2usize {
            for nblocks in 1..=2usize {
                let factors = vec![FactorKind::C { g }; nblocks];
                let phi: Vec<usize> = (0..nblocks).map(|b| (b + 1) % nblocks).collect();
                let ctx = WeylCtx::new(factors, phi);
                let j: Vec<Vec<usize>> =
                    (0..nblocks).map(|_| (1..g).collect()).collect();
                let poset = JWPoset::build(ctx, j, None);
                assert_eq!(poset.len(), 1usize << (g * nblocks));
            }
        }
    }

    #[test]
    fn preceq_refines_length_and_has_unique_extremes() {
        let configs: Vec<(Vec<FactorKind>, Vec<usize>, Vec<Vec<usize>>)> = vec![
            (vec![FactorKind::A { n: 2 }], vec![0], vec![vec![]]),
            (vec![FactorKind::C { g: 1 }, FactorKind::C { g: 1 }], vec![1, 0], vec![vec![], vec![]]),
            (vec![FactorKind::C { g: 2 }, FactorKind::C { g: 2 }], vec![1, 0], vec![vec![1], vec![1]]),
            (vec![FactorKind::A { n: 3 }, FactorKind::A { n: 3 }], vec![1, 0], vec![vec![1], vec![0]]),
        ];
        for (factors, phi, j) in configs {
            let ctx = WeylCtx::new(factors, phi);
            let poset = JWPoset::build(ctx, j, None);
            let n = poset.len();
            for a in 0..n {
                assert!(poset.preceq(a, a));
                for b in 0..n {
                    if a != b && poset.preceq(a, b) {
                        assert!(poset.lengths[a] <= poset.lengths[b]);
                        assert!(!poset.preceq(b, a), "antisymmetry");
                    }
                    for c in 0..n {
                        if poset.preceq(a, b) && poset.preceq(b, c) {
                            assert!(poset.preceq(a, c), "transitivity");
                        }
                    }
                }
            }
            assert_eq!(poset.maximal_elements().len(), 1, "unique maximal");
            assert_eq!(poset.minimal_elements().len(), 1, "unique minimal");
        }
    }

    #[test]
    fn rank_one_chain() {
        let ctx = WeylCtx::split(vec![FactorKind::A { n: 2 }]);
        let poset = JWPoset::build(ctx, vec![vec![]], None);
        assert_eq!(poset.len(), 2);
        assert!(poset.preceq(0, 1));
        assert_eq!(poset.covers(), vec![(0, 1)]);
        let dot = poset.dot_export();
        assert_eq!(dot.matches(" -> ").count(), 1);
    }

    #[test]
    fn covers_regenerate_order() {
        let ctx =
            WeylCtx::new(vec![FactorKind::C { g: 1 }, FactorKind::C { g: 1 }], vec![1, 0]);
        let poset = JWPoset::build(ctx, vec![vec![], vec![]], None);
        let n = poset.len();
        let covers = poset.covers();
        let mut reach = vec![vec![false; n]; n];
        for a in 0..n {
            reach[a][a] = true;
        }
        for &(a, b) in &covers {
            reach[a][b] = true;
        }
        for k in 0..n {
            for a in 0..n {
                for b in 0..n {
                    if reach[a][k] && reach[k][b] {
                        reach[a][b] = true;
                    }
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                assert_eq!(reach[a][b], poset.preceq(a, b));
            }
        }
    }

    #[test]
    fn hilbert_preceq_is_coordinatewise() {
        let n = 3usize;
        let ctx = WeylCtx::new(
            vec![FactorKind::C { g: 1 }; n],
            (0..n).map(|b| (b + 1) % n).collect(),
        );
        let poset = JWPoset::build(ctx, vec![vec![]; n], None);
        assert_eq!(poset.len(), 1 << n);
        let bits = |w: &WElem| -> Vec<bool> { w.iter().map(|f| f[0] < 0).collect() };
        for a in 0..poset.len() {
            for b in 0..poset.len() {
                let ba = bits(&poset.elements[a]);
                let bb = bits(&poset.elements[b]);
                let coordwise = ba.iter().zip(bb.iter()).all(|(x, y)| !*x || *y);
                assert_eq!(poset.preceq(a, b), coordwise, "{:?} vs {:?}", ba, bb);
            }
        }
    }

    #[test]
    fn phi_preserves_length_and_simples() {
        let ctx =
            WeylCtx::new(vec![FactorKind::A { n: 3 }, FactorKind::A { n: 3 }], vec![1, 0]);
        for w in ctx.elements() {
            assert_eq!(ctx.length(&ctx.phi_apply(&w)), ctx.length(&w));
        }
        for s in ctx.simples() {
            let img = ctx.phi_apply(&ctx.simple_elem(s));
            assert_eq!(ctx.length(&img), 1);
        }
    }

    #[test]
    fn subset_roundtrip_type_a() {
        let n = 4usize;
        for d in 0..=n {
            let mut subsets: Vec<Vec<usize>> = vec![vec![]];
            for k in 1..=n {
                let mut next = Vec::new();
                for s in &subsets {
                    next.push(s.clone());
                    let mut t = s.clone();
                    t.push(k);
                    next.push(t);
                }
                subsets = next;
            }
            for s in subsets.into_iter().filter(|s| s.len() == d) {
                let w = min_rep_from_subset_a(n, &s);
                assert_eq!(subset_rep_a(&w, d), s);
                let kind = FactorKind::A { n };
                for k in 0..n - 1 {
                    if k + 1 != d {
                        let sw = factor_mul(&factor_simple(&kind, k), &w);
                        assert!(factor_length(&kind, &sw) > factor_length(&kind, &w));
                    }
                }
                let expect: usize = s.iter().enumerate().map(|(i, &v)| v - (i + 1)).sum();
                assert_eq!(factor_length(&kind, &w), expect);
            }
        }
    }

    #[test]
    fn subset_rep_c_separates_cosets() {
        // the 2^g symplectic subsets distinguish the minimal reps of the
        // GL_g-Levi cosets in the hyperoctahedral group
        for g in 1..=2usize {
            let kind = FactorKind::C { g };
            let ctx = WeylCtx::split(vec![kind.clone()]);
            let j: Vec<usize> = (1..g).collect();
            let poset = JWPoset::build(ctx, vec![j], None);
            assert_eq!(poset.len(), 1 << g);
            let mut seen = HashSet::new();
            for w in &poset.elements {
                let s = subset_rep_c(&w[0], g);
                assert_eq!(s.len(), g);
                // symplectic admissibility: k in S iff 2g+1-k not in S
                for k in 1..=2 * g {
                    assert_ne!(s.contains(&k), s.contains(&(2 * g + 1 - k)));
                }
                assert!(seen.insert(s));
            }
        }
    }
}
