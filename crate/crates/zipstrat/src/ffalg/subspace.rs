//! Subspaces of k^n in canonical reduced-row-echelon form.
//!
//! RREF with zero rows stripped is a unique representation of the row space,
//! so subspace equality is plain data equality. Every operation returns the
//! canonical form.

use rand::Rng;

use super::field::Field;
use super::matrix::Matrix;

#[derive(Clone, PartialEq, Eq)]
pub struct Subspace {
    ambient: usize,
    /// RREF basis, rows are basis vectors, no zero rows.
    basis: Matrix,
}

impl std::fmt::Debug for Subspace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Subspace(dim {} of k^{})", self.dim(), self.ambient)?;
        for r in 0..self.basis.rows() {
            write!(f, " {:?}", self.basis.row(r))?;
        }
        Ok(())
    }
}

impl Subspace {
    pub fn zero(field: Field, ambient: usize) -> Self {
        Subspace { ambient, basis: Matrix::zero(field, 0, ambient) }
    }

    pub fn full(field: Field, ambient: usize) -> Self {
        Subspace { ambient, basis: Matrix::identity(field, ambient) }
    }

    /// Canonicalizes the row span of `gens`.
    pub fn from_span(gens: &Matrix) -> Self {
        let mut m = gens.clone();
        let pivots = m.rref_in_place();
        let rank = pivots.len();
        if rank == 0 {
            return Subspace::zero(gens.field.clone(), gens.cols());
        }
        let mut rows = Vec::with_capacity(rank);
        for r in 0..rank {
            rows.push(m.row(r).to_vec());
        }
        Subspace { ambient: gens.cols(), basis: Matrix::from_rows(gens.field.clone(), &rows) }
    }

    pub fn from_vectors(field: Field, ambient: usize, vecs: &[Vec<u32>]) -> Self {
        if vecs.is_empty() {
            return Subspace::zero(field, ambient);
        }
        Subspace::from_span(&Matrix::from_rows(field, vecs))
    }

    pub fn field(&self) -> &Field {
        &self.basis.field
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn basis_vectors(&self) -> Vec<Vec<u32>> {
        (0..self.dim()).map(|i| self.basis.row(i).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn contains_vector(&self, v: &[u32]) -> bool {
        assert_eq!(v.len(), self.ambient);
        // reduce v against the RREF basis
        let f = self.field().clone();
        let mut w = v.to_vec();
        for r in 0..self.basis.rows() {
            let pivot_col = (0..self.ambient).find(|&c| self.basis.get(r, c) != 0).unwrap();
            let c = w[pivot_col];
            if c != 0 {
                for j in 0..self.ambient {
                    w[j] = f.sub(w[j], f.mul(c, self.basis.get(r, j)));
                }
            }
        }
        w.iter().all(|&x| x == 0)
    }

    pub fn contains(&self, other: &Subspace) -> bool {
        assert_eq!(self.ambient, other.ambient);
        (0..other.dim()).all(|i| self.contains_vector(other.basis.row(i)))
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        assert_eq!(self.ambient, other.ambient, "ambient mismatch");
        Subspace::from_span(&self.basis.vstack(&other.basis))
    }

    pub fn intersect(&self, other: &Subspace) -> Subspace {
        assert_eq!(self.ambient, other.ambient, "ambient mismatch");
        if self.is_zero() || other.is_zero() {
            return Subspace::zero(self.field().clone(), self.ambient);
        }
        // coefficient vectors (a, b) with a U = b V give intersection points a U
        let stacked = self.basis.vstack(&other.basis.neg()).transpose();
        let ker = stacked.null_space();
        let mut vecs = Vec::new();
        for r in 0..ker.rows() {
            let coeff = &ker.row(r)[..self.dim()];
            let f = self.field();
            let mut v = vec![0u32; self.ambient];
            for (i, &c) in coeff.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                for j in 0..self.ambient {
                    v[j] = f.add(v[j], f.mul(c, self.basis.get(i, j)));
                }
            }
            vecs.push(v);
        }
        Subspace::from_vectors(self.field().clone(), self.ambient, &vecs)
    }

    /// Coordinates of v in the basis of this subspace; None if v is outside.
    pub fn coordinates(&self, v: &[u32]) -> Option<Vec<u32>> {
        self.basis.transpose().solve(v)
    }

    /// Extends the subspace by one vector outside it, drawn uniformly-ish.
    pub fn random_extension_within(&self, within: &Subspace, rng: &mut impl Rng) -> Option<Vec<u32>> {
        assert!(within.contains(self));
        if within.dim() == self.dim() {
            return None;
        }
        let f = self.field().clone();
        let q = f.order();
        loop {
            let mut v = vec![0u32; self.ambient];
            for i in 0..within.dim() {
                let c = (rng.gen_range(0..q)) as u32;
                if c == 0 {
                    continue;
                }
                for j in 0..self.ambient {
                    v[j] = f.add(v[j], f.mul(c, within.basis.get(i, j)));
                }
            }
            if !self.contains_vector(&v) {
                return Some(v);
            }
        }
    }

    /// Entrywise x -> x^(p^s) on a basis; Frobenius powers fix RREF shape.
    pub fn twist(&self, s: i64) -> Subspace {
        Subspace { ambient: self.ambient, basis: self.basis.frobenius(s) }
    }
}
