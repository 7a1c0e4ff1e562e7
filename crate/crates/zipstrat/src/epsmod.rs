//! Free modules over k[ε]/(εᵉ), their submodules, and Pappas-Rapoport
//! splitting filtrations in characteristic p.
//!
//! The standard basis is generator-major, ε-power-minor: the flat index of
//! εᵏ·v_g is g·e + k, which makes the ε-action a block shift and module-type
//! extraction a pure rank computation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ffalg::{Field, Matrix, SemilinearMap, Subspace};

/// Free module of rank `rank` over k[ε]/(εᵉ), with underlying k-dimension
/// rank·e.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpsModule {
    pub field: Field,
    pub e: usize,
    pub rank: usize,
}

impl EpsModule {
    pub fn new(field: Field, e: usize, rank: usize) -> Self {
        assert!(e >= 1);
        EpsModule { field, e, rank }
    }

    pub fn dim(&self) -> usize {
        self.e * self.rank
    }

    /// Matrix of the ε-action in the standard basis (block shift).
    pub fn nil(&self) -> Matrix {
        let n = self.dim();
        let mut m = Matrix::zero(self.field.clone(), n, n);
        for g in 0..self.rank {
            for k in 0..self.e - 1 {
                m.set(g * self.e + k + 1, g * self.e + k, 1);
            }
        }
        m
    }

    pub fn nil_map(&self) -> SemilinearMap {
        SemilinearMap::linear(self.nil())
    }

    pub fn eps_apply(&self, v: &[u32]) -> Vec<u32> {
        let mut out = vec![0u32; self.dim()];
        for g in 0..self.rank {
            for k in 0..self.e - 1 {
                out[g * self.e + k + 1] = v[g * self.e + k];
            }
        }
        out
    }

    /// ε^k · U.
    pub fn eps_power_image(&self, u: &Subspace, k: usize) -> Subspace {
        let mut cur = u.clone();
        for _ in 0..k {
            let vecs: Vec<Vec<u32>> = cur.basis_vectors().iter().map(|v| self.eps_apply(v)).collect();
            cur = Subspace::from_vectors(self.field.clone(), self.dim(), &vecs);
        }
        cur
    }

    /// ε⁻¹(U) = {x : εx ∈ U}.
    pub fn eps_preimage(&self, u: &Subspace) -> Subspace {
        self.nil_map().preimage_of(u)
    }

    /// ker(ε^k) = ε^{e-k}·(whole module) for a free module.
    pub fn eps_power_kernel(&self, k: usize) -> Subspace {
        let k = k.min(self.e);
        let mut vecs = Vec::new();
        for g in 0..self.rank {
            for j in self.e - k..self.e {
                let mut v = vec![0u32; self.dim()];
                v[g * self.e + j] = 1;
                vecs.push(v);
            }
        }
        Subspace::from_vectors(self.field.clone(), self.dim(), &vecs)
    }

    pub fn zero_subspace(&self) -> Subspace {
        Subspace::zero(self.field.clone(), self.dim())
    }

    pub fn full_subspace(&self) -> Subspace {
        Subspace::full(self.field.clone(), self.dim())
    }

    pub fn is_eps_stable(&self, u: &Subspace) -> bool {
        self.eps_power_image(u, 1).dim() == 0 || u.contains(&self.eps_power_image(u, 1))
    }
}

/// Isomorphism type of a finite k[ε]-module: the multiset of ε-orders of its
/// cyclic summands, stored as a partition with parts sorted decreasing.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EpsModuleType(pub Vec<usize>);

impl EpsModuleType {
    pub fn total_dim(&self) -> usize {
        self.0.iter().sum()
    }
    pub fn parts(&self) -> &[usize] {
        &self.0
    }
    /// Valuation vector padded with zeros to length `h`, sorted decreasing.
    pub fn valuations(&self, h: usize) -> Vec<usize> {
        let mut v = self.0.clone();
        assert!(v.len() <= h, "more parts than the padding length");
        v.resize(h, 0);
        v
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum EpsError {
    #[error("subspace is not ε-stable")]
    NotStable,
    #[error("infeasible ranks at step {step}: requested jump {requested}, available {available}")]
    Infeasible { step: usize, requested: usize, available: usize },
}

/// ε-order multiset of an ε-stable subspace M, via dims of εᵏM.
pub fn module_type(host: &EpsModule, m: &Subspace) -> Result<EpsModuleType, EpsError> {
    if !host.is_eps_stable(m) {
        return Err(EpsError::NotStable);
    }
    let mut dims = Vec::with_capacity(host.e + 1);
    let mut cur = m.clone();
    dims.push(cur.dim());
    for _ in 0..host.e {
        cur = host.eps_power_image(&cur, 1);
        dims.push(cur.dim());
    }
    // jumps j_k = dim ε^{k-1}M - dim ε^k M count parts of order >= k;
    // the part multiset is the conjugate of the jump sequence
    let jumps: Vec<usize> = (1..=host.e).map(|k| dims[k - 1] - dims[k]).collect();
    let mut parts = Vec::new();
    if let Some(&j1) = jumps.first() {
        for idx in 0..j1 {
            let order = jumps.iter().take_while(|&&j| j > idx).count();
            parts.push(order);
        }
    }
    parts.sort_unstable_by(|a, b| b.cmp(a));
    Ok(EpsModuleType(parts))
}

/// A Pappas-Rapoport filtration 𝓕⁰ ⊆ 𝓕¹ ⊆ … ⊆ 𝓕ᵉ inside an EpsModule,
/// with ε·𝓕ˡ ⊆ 𝓕ˡ⁻¹ and prescribed graded ranks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplittingStructure {
    pub host: EpsModule,
    /// steps[l] = 𝓕ˡ for l = 0..=e.
    pub steps: Vec<Subspace>,
    pub ranks: Vec<usize>,
}

/// Validation outcome; violations are report content, not faults.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplittingReport {
    Pass,
    FailContainment { step: usize },
    FailEpsStability { step: usize },
    FailRank { step: usize, expected: usize, got: usize },
}

impl SplittingStructure {
    pub fn top(&self) -> &Subspace {
        &self.steps[self.host.e]
    }

    pub fn step(&self, l: usize) -> &Subspace {
        &self.steps[l]
    }

    pub fn validate(&self) -> SplittingReport {
        let e = self.host.e;
        if self.steps.len() != e + 1 || !self.steps[0].is_zero() {
            return SplittingReport::FailContainment { step: 0 };
        }
        for l in 1..=e {
            if !self.steps[l].contains(&self.steps[l - 1]) {
                return SplittingReport::FailContainment { step: l };
            }
        }
        for l in 1..=e {
            let moved = self.host.eps_power_image(&self.steps[l], 1);
            if !self.steps[l - 1].contains(&moved) {
                return SplittingReport::FailEpsStability { step: l };
            }
        }
        for l in 1..=e {
            let got = self.steps[l].dim() - self.steps[l - 1].dim();
            if got != self.ranks[l - 1] {
                return SplittingReport::FailRank { step: l, expected: self.ranks[l - 1], got };
            }
        }
        SplittingReport::Pass
    }
}

/// Draws a valid splitting structure with the given graded ranks:
/// each 𝓕ˡ is a random dˡ-dimensional extension of 𝓕ˡ⁻¹ inside ε⁻¹𝓕ˡ⁻¹.
pub fn sample_splitting(
    host: &EpsModule,
    ranks: &[usize],
    rng: &mut impl Rng,
) -> Result<SplittingStructure, EpsError> {
    sample_splitting_capped(host, ranks, &host.full_subspace(), rng)
}

/// As `sample_splitting`, but every step is confined to `cap` (used to force
/// 𝓕ᵉ into a prescribed top module).
pub fn sample_splitting_capped(
    host: &EpsModule,
    ranks: &[usize],
    cap: &Subspace,
    rng: &mut impl Rng,
) -> Result<SplittingStructure, EpsError> {
    assert_eq!(ranks.len(), host.e);
    let mut steps = vec![host.zero_subspace()];
    for l in 1..=host.e {
        let window = host.eps_preimage(&steps[l - 1]).intersect(cap);
        let mut cur = steps[l - 1].clone();
        if !window.contains(&cur) {
            return Err(EpsError::Infeasible { step: l, requested: ranks[l - 1], available: 0 });
        }
        for _ in 0..ranks[l - 1] {
            if window.dim() <= cur.dim() {
                return Err(EpsError::Infeasible {
                    step: l,
                    requested: ranks[l - 1],
                    available: window.dim() - steps[l - 1].dim(),
                });
            }
            let v = cur.random_extension_within(&window, rng).expect("room checked");
            cur = cur.sum(&Subspace::from_vectors(host.field.clone(), host.dim(), &[v]));
        }
        steps.push(cur);
    }
    Ok(SplittingStructure { host: host.clone(), steps, ranks: ranks.to_vec() })
}

/// JSON shape of a splitting structure: step bases as row-major matrices.
#[derive(Serialize, Deserialize)]
pub struct SplittingRepr {
    pub e: usize,
    pub rank: usize,
    pub steps: Vec<crate::ffalg::MatrixRepr>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffalg::make_field;
    use crate::seed::child;

    fn host(p: u64, m: u32, e: usize, r: usize) -> EpsModule {
        EpsModule::new(make_field(p, m).unwrap(), e, r)
    }

    #[test]
    fn nil_is_nilpotent_of_exact_order() {
        let h = host(3, 1, 3, 2);
        let n = h.nil();
        let mut pow = n.clone();
        for _ in 1..h.e {
            assert!(!pow.is_zero());
            pow = pow.mul(&n);
        }
        assert!(pow.is_zero());
    }

    #[test]
    fn e1_any_subspace_passes() {
        let h = host(2, 1, 1, 3);
        let f1 = Subspace::from_vectors(h.field.clone(), 3, &[vec![1, 0, 1]]);
        let s = SplittingStructure { host: h.clone(), steps: vec![h.zero_subspace(), f1], ranks: vec![1] };
        assert_eq!(s.validate(), SplittingReport::Pass);
    }

    #[test]
    fn eps_instability_detected() {
        // e=2, r=1: a step with ε𝓕¹ ≠ 0 must fail, since ε𝓕¹ ⊆ 𝓕⁰ = 0
        let h = host(2, 1, 2, 1);
        let f1 = Subspace::from_vectors(h.field.clone(), 2, &[vec![1, 0]]); // generator, ε·v ≠ 0
        let f2 = h.full_subspace();
        let s = SplittingStructure {
            host: h.clone(),
            steps: vec![h.zero_subspace(), f1, f2],
            ranks: vec![1, 1],
        };
        assert_eq!(s.validate(), SplittingReport::FailEpsStability { step: 1 });
    }

    #[test]
    fn forced_step_when_preimage_is_tight() {
        // e=2, r=2, ranks (2,0): 𝓕¹ = ker(ε) is forced
        let h = host(3, 1, 2, 2);
        let mut rng = child(1, 0);
        let s = sample_splitting(&h, &[2, 0], &mut rng).unwrap();
        assert_eq!(s.steps[1], h.eps_power_kernel(1));
        assert_eq!(s.validate(), SplittingReport::Pass);
    }

    #[test]
    fn sampler_validator_roundtrip() {
        for (p, m, e, r, ranks) in [
            (2u64, 1u32, 2usize, 2usize, vec![1usize, 1]),
            (3, 1, 2, 2, vec![1, 1]),
            (2, 2, 3, 2, vec![2, 1, 1]),
            (5, 1, 1, 3, vec![2]),
        ] {
            let h = host(p, m, e, r);
            for i in 0..200 {
                let mut rng = child(7, i);
                let s = sample_splitting(&h, &ranks, &mut rng).unwrap();
                assert_eq!(s.validate(), SplittingReport::Pass);
                // top step is ε-stable with at most r parts
                let t = module_type(&h, s.top()).unwrap();
                assert!(t.parts().len() <= r);
            }
        }
    }

    #[test]
    fn module_type_examples() {
        let h = host(2, 1, 2, 2);
        // whole free module: (e, e)
        let t = module_type(&h, &h.full_subspace()).unwrap();
        assert_eq!(t.parts(), &[2, 2]);
        // ker(ε): (1, 1)
        let t = module_type(&h, &h.eps_power_kernel(1)).unwrap();
        assert_eq!(t.parts(), &[1, 1]);
        // span{v, εv, εw}: type (2, 1)
        let m = Subspace::from_vectors(
            h.field.clone(),
            4,
            &[vec![1, 0, 0, 0], vec![0, 1, 0, 0], vec![0, 0, 0, 1]],
        );
        let t = module_type(&h, &m).unwrap();
        assert_eq!(t.parts(), &[2, 1]);
    }

    #[test]
    fn conjugate_partition_identity() {
        let h = host(3, 1, 3, 2);
        for i in 0..100 {
            let mut rng = child(13, i);
            let s = sample_splitting(&h, &[2, 2, 2], &mut rng).unwrap();
            let m = s.top();
            let t = module_type(&h, m).unwrap();
            assert_eq!(t.total_dim(), m.dim());
        }
    }

    #[test]
    fn feasibility_is_monotone() {
        // whenever sampling succeeds for a rank vector, it succeeds for any
        // componentwise-smaller one
        let h = host(3, 1, 2, 2);
        for i in 0..40 {
            let mut rng = child(29, i);
            if sample_splitting(&h, &[2, 1], &mut rng).is_ok() {
                for smaller in [[2, 0], [1, 1], [1, 0], [0, 0]] {
                    let mut rng = child(31, i);
                    assert!(
                        sample_splitting(&h, &smaller, &mut rng).is_ok(),
                        "ranks {:?}",
                        smaller
                    );
                }
            }
        }
    }

    #[test]
    fn non_stable_rejected() {
        let h = host(2, 1, 2, 1);
        let m = Subspace::from_vectors(h.field.clone(), 2, &[vec![1, 0]]);
        assert_eq!(module_type(&h, &m), Err(EpsError::NotStable));
    }
}
