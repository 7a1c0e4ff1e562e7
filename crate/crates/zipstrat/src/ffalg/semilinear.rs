//! Frobenius-semilinear maps v -> A v^(p^s).

use serde::{Deserialize, Serialize};

use super::field::Field;
use super::matrix::{Matrix, MatrixRepr};
use super::subspace::Subspace;
use super::LinAlgError;

/// A map k^c -> k^r of the form v |-> A * v^(p^s). Twist 0 is an ordinary
/// linear map. The twist is normalized modulo the field degree, since the
/// Frobenius of GF(p^m) has order m.
#[derive(Clone, PartialEq, Eq)]
pub struct SemilinearMap {
    mat: Matrix,
    twist: i64,
}

impl std::fmt::Debug for SemilinearMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SemilinearMap(twist {})\n{:?}", self.twist, self.mat)
    }
}

#[derive(Serialize, Deserialize)]
pub struct SemilinearRepr {
    pub matrix: MatrixRepr,
    pub twist: i64,
}

impl SemilinearMap {
    pub fn new(mat: Matrix, twist: i64) -> Self {
        let twist = mat.field.normalize_twist(twist);
        SemilinearMap { mat, twist }
    }

    pub fn linear(mat: Matrix) -> Self {
        SemilinearMap::new(mat, 0)
    }

    pub fn field(&self) -> &Field {
        &self.mat.field
    }

    pub fn matrix(&self) -> &Matrix {
        &self.mat
    }

    pub fn twist(&self) -> i64 {
        self.twist
    }

    pub fn domain_dim(&self) -> usize {
        self.mat.cols()
    }

    pub fn codomain_dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn repr(&self) -> SemilinearRepr {
        SemilinearRepr { matrix: self.mat.repr(), twist: self.twist }
    }

    pub fn from_repr(field: Field, r: &SemilinearRepr) -> Result<Self, LinAlgError> {
        Ok(SemilinearMap::new(Matrix::from_repr(field, &r.matrix)?, r.twist))
    }

    pub fn apply(&self, v: &[u32]) -> Vec<u32> {
        let f = self.field();
        let tw: Vec<u32> = v.iter().map(|&x| f.frob_pow(x, self.twist)).collect();
        self.mat.apply(&tw)
    }

    /// (A, s) o (B, t) = (A B^(p^s), s + t).
    pub fn compose(&self, inner: &SemilinearMap) -> SemilinearMap {
        assert_eq!(self.domain_dim(), inner.codomain_dim(), "compose dims");
        let b_tw = inner.mat.frobenius(self.twist);
        SemilinearMap::new(self.mat.mul(&b_tw), self.twist + inner.twist)
    }

    pub fn kernel(&self) -> Subspace {
        // {v : A v^(p^s) = 0} = (lin ker A)^(p^-s)
        self.mat.null_space_subspace().twist(-self.twist)
    }

    pub fn image(&self) -> Subspace {
        Subspace::from_span(&self.mat.transpose())
    }

    pub fn image_of(&self, u: &Subspace) -> Subspace {
        let vecs: Vec<Vec<u32>> = u.basis_vectors().iter().map(|v| self.apply(v)).collect();
        Subspace::from_vectors(self.field().clone(), self.codomain_dim(), &vecs)
    }

    pub fn preimage_of(&self, w: &Subspace) -> Subspace {
        assert_eq!(w.ambient(), self.codomain_dim());
        // linear preimage first: {u : A u in W} = kernel of (reduce-mod-W o A)
        let f = self.field().clone();
        let n = self.codomain_dim();
        // rows of complement projector: reduce A's columns against W's RREF
        let mut residual_rows: Vec<Vec<u32>> = Vec::new();
        for j in 0..self.domain_dim() {
            let col = self.mat.col(j);
            residual_rows.push(reduce_mod(&col, w, &f, n));
        }
        // residual(j) is linear in u; kernel of the stacked residual matrix
        let resid = Matrix::from_rows(f, &residual_rows).transpose();
        let lin = resid.null_space_subspace();
        lin.twist(-self.twist)
    }

    /// One solution of A v^(p^s) = b, if any.
    pub fn solve(&self, b: &[u32]) -> Option<Vec<u32>> {
        let f = self.field();
        let u = self.mat.solve(b)?;
        Some(u.iter().map(|&x| f.frob_pow(x, -self.twist)).collect())
    }
}

fn reduce_mod(v: &[u32], w: &Subspace, f: &Field, n: usize) -> Vec<u32> {
    let mut out = v.to_vec();
    for r in 0..w.dim() {
        let pivot_col = (0..n).find(|&c| w.basis().get(r, c) != 0).unwrap();
        let c = out[pivot_col];
        if c != 0 {
            for j in 0..n {
                out[j] = f.sub(out[j], f.mul(c, w.basis().get(r, j)));
            }
        }
    }
    out
}

impl Matrix {
    pub fn null_space_subspace(&self) -> Subspace {
        let ker = self.null_space();
        if ker.rows() == 0 {
            return Subspace::zero(self.field.clone(), self.cols());
        }
        Subspace::from_span(&ker)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffalg::make_field;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn composition_law_matches_sequential_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (p, m) in [(2u64, 2u32), (3, 2), (2, 3)] {
            let f = make_field(p, m).unwrap();
            for _ in 0..100 {
                let a = Matrix::from_fn(f.clone(), 3, 3, |_, _| rng.gen_range(0..f.order()) as u32);
                let b = Matrix::from_fn(f.clone(), 3, 3, |_, _| rng.gen_range(0..f.order()) as u32);
                let s = rng.gen_range(0..m as i64 + 1);
                let t = rng.gen_range(0..m as i64 + 1);
                let fa = SemilinearMap::new(a, s);
                let fb = SemilinearMap::new(b, t);
                let comp = fa.compose(&fb);
                for _ in 0..5 {
                    let v: Vec<u32> = (0..3).map(|_| rng.gen_range(0..f.order()) as u32).collect();
                    assert_eq!(comp.apply(&v), fa.apply(&fb.apply(&v)));
                }
            }
        }
    }

    #[test]
    fn rank_nullity_with_twist() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for (p, m) in [(2u64, 1u32), (3, 2), (2, 2)] {
            let f = make_field(p, m).unwrap();
            for _ in 0..100 {
                let r = rng.gen_range(1..5);
                let c = rng.gen_range(1..5);
                let a = Matrix::from_fn(f.clone(), r, c, |_, _| rng.gen_range(0..f.order()) as u32);
                let s = rng.gen_range(0..m as i64 + 1);
                let map = SemilinearMap::new(a, s);
                assert_eq!(map.kernel().dim() + map.image().dim(), c);
            }
        }
    }

    #[test]
    fn solve_particular_solution() {
        let f = make_field(3, 2).unwrap();
        let a = Matrix::from_rows(f.clone(), &[vec![1, 2, 0], vec![0, 1, 1]]);
        let map = SemilinearMap::new(a, 1);
        let b = vec![2, f.gen()];
        let x = map.solve(&b).expect("consistent system");
        assert_eq!(map.apply(&x), b);
    }

    #[test]
    fn preimage_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = make_field(3, 2).unwrap();
        for _ in 0..50 {
            let a = Matrix::from_fn(f.clone(), 4, 4, |_, _| rng.gen_range(0..f.order()) as u32);
            let map = SemilinearMap::new(a, 1);
            let w = Subspace::from_vectors(
                f.clone(),
                4,
                &(0..2)
                    .map(|_| (0..4).map(|_| rng.gen_range(0..f.order()) as u32).collect())
                    .collect::<Vec<_>>(),
            );
            let pre = map.preimage_of(&w);
            for v in pre.basis_vectors() {
                assert!(w.contains_vector(&map.apply(&v)));
            }
            // maximality: preimage dim = dim ker + dim(W cap im)
            let expect = map.kernel().dim() + w.intersect(&map.image()).dim();
            assert_eq!(pre.dim(), expect);
        }
    }
}
