//! Polynomial and truncated power-series matrices over k[t], the substrate
//! for lifted Frobenius/Verschiebung data and t-adic Newton polygons.
//!
//! Polynomials are exact (coefficient vectors, low-degree-first); products
//! that conceptually live in k[[t]] carry an explicit truncation order.

use crate::ffalg::{Field, Matrix};

/// Dense polynomial over the field, exact.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Poly(pub Vec<u32>);

impl Poly {
    pub fn zero() -> Self {
        Poly(Vec::new())
    }
    pub fn constant(c: u32) -> Self {
        if c == 0 {
            Poly(Vec::new())
        } else {
            Poly(vec![c])
        }
    }
    pub fn t_power(k: usize) -> Self {
        let mut v = vec![0; k + 1];
        v[k] = 1;
        Poly(v)
    }
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }
    pub fn coeff(&self, k: usize) -> u32 {
        self.0.get(k).copied().unwrap_or(0)
    }
    pub fn trim(mut self) -> Self {
        while self.0.last() == Some(&0) {
            self.0.pop();
        }
        self
    }
    /// t-adic valuation; None for the zero polynomial.
    pub fn val(&self) -> Option<usize> {
        self.0.iter().position(|&c| c != 0)
    }
    pub fn add(&self, other: &Poly, f: &Field) -> Poly {
        let n = self.0.len().max(other.0.len());
        let mut out = vec![0u32; n];
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = f.add(self.coeff(k), other.coeff(k));
        }
        Poly(out).trim()
    }
    pub fn neg(&self, f: &Field) -> Poly {
        Poly(self.0.iter().map(|&c| f.neg(c)).collect())
    }
    pub fn sub(&self, other: &Poly, f: &Field) -> Poly {
        self.add(&other.neg(f), f)
    }
    /// Product truncated below t^trunc (usize::MAX for exact).
    pub fn mul(&self, other: &Poly, f: &Field, trunc: usize) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let deg = (self.0.len() + other.0.len() - 1).min(trunc);
        let mut out = vec![0u32; deg];
        for (i, &a) in self.0.iter().enumerate() {
            if a == 0 || i >= deg {
                continue;
            }
            for (j, &b) in other.0.iter().enumerate() {
                if b == 0 || i + j >= deg {
                    continue;
                }
                out[i + j] = f.add(out[i + j], f.mul(a, b));
            }
        }
        Poly(out).trim()
    }
    pub fn scale(&self, c: u32, f: &Field) -> Poly {
        Poly(self.0.iter().map(|&a| f.mul(a, c)).collect()).trim()
    }
    /// Multiply by t^k.
    pub fn shift_up(&self, k: usize) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut v = vec![0u32; k];
        v.extend_from_slice(&self.0);
        Poly(v)
    }
    /// Divide by t^k; panics if not divisible.
    pub fn shift_down(&self, k: usize) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        assert!(self.val().unwrap_or(usize::MAX) >= k, "not divisible by t^{}", k);
        Poly(self.0[k..].to_vec()).trim()
    }
    pub fn truncate(&self, trunc: usize) -> Poly {
        Poly(self.0.iter().copied().take(trunc).collect()).trim()
    }
    /// Entrywise Frobenius power on coefficients.
    pub fn frobenius(&self, f: &Field, s: i64) -> Poly {
        Poly(self.0.iter().map(|&c| f.frob_pow(c, s)).collect())
    }
    /// Inverse of a unit power series mod t^trunc.
    pub fn series_inv(&self, f: &Field, trunc: usize) -> Poly {
        let c0 = self.coeff(0);
        assert!(c0 != 0, "series_inv of a non-unit");
        let c0i = f.inv(c0);
        let mut out = vec![0u32; trunc];
        out[0] = c0i;
        for k in 1..trunc {
            // sum_{i=1..k} a_i * b_{k-i} = -a_0 b_k
            let mut acc = 0u32;
            for i in 1..=k {
                let ai = self.coeff(i);
                if ai != 0 && out[k - i] != 0 {
                    acc = f.add(acc, f.mul(ai, out[k - i]));
                }
            }
            out[k] = f.neg(f.mul(acc, c0i));
        }
        Poly(out).trim()
    }
    /// Reduce modulo t^e into the epsilon-module coefficient convention.
    pub fn coeffs_mod(&self, e: usize) -> Vec<u32> {
        (0..e).map(|k| self.coeff(k)).collect()
    }
}

/// Dense matrix of polynomials.
#[derive(Clone, PartialEq, Eq)]
pub struct PolyMat {
    pub field: Field,
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Poly>,
}

impl std::fmt::Debug for PolyMat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "PolyMat {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            for j in 0..self.cols {
                write!(f, "  [{},{}] {:?}", i, j, self.get(i, j).0)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl PolyMat {
    pub fn zero(field: Field, rows: usize, cols: usize) -> Self {
        PolyMat { field, rows, cols, entries: vec![Poly::zero(); rows * cols] }
    }
    pub fn identity(field: Field, n: usize) -> Self {
        let mut m = PolyMat::zero(field, n, n);
        for i in 0..n {
            *m.get_mut(i, i) = Poly::constant(1);
        }
        m
    }
    pub fn get(&self, i: usize, j: usize) -> &Poly {
        &self.entries[i * self.cols + j]
    }
    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut Poly {
        &mut self.entries[i * self.cols + j]
    }
    pub fn from_scalar(field: Field, m: &Matrix) -> Self {
        let mut out = PolyMat::zero(field, m.rows(), m.cols());
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                *out.get_mut(i, j) = Poly::constant(m.get(i, j));
            }
        }
        out
    }
    pub fn mul(&self, other: &PolyMat, trunc: usize) -> PolyMat {
        assert_eq!(self.cols, other.rows);
        let f = &self.field;
        let mut out = PolyMat::zero(self.field.clone(), self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let prod = a.mul(b, f, trunc);
                    let cur = out.get(i, j).add(&prod, f);
                    *out.get_mut(i, j) = cur;
                }
            }
        }
        out
    }
    pub fn add(&self, other: &PolyMat) -> PolyMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let f = &self.field;
        let mut out = self.clone();
        for (o, b) in out.entries.iter_mut().zip(other.entries.iter()) {
            *o = o.add(b, f);
        }
        out
    }
    pub fn scale_poly(&self, p: &Poly, trunc: usize) -> PolyMat {
        let f = &self.field;
        let mut out = self.clone();
        for o in out.entries.iter_mut() {
            *o = o.mul(p, f, trunc);
        }
        out
    }
    pub fn shift_up(&self, k: usize) -> PolyMat {
        let mut out = self.clone();
        for o in out.entries.iter_mut() {
            *o = o.shift_up(k);
        }
        out
    }
    pub fn shift_down(&self, k: usize) -> PolyMat {
        let mut out = self.clone();
        for o in out.entries.iter_mut() {
            *o = o.shift_down(k);
        }
        out
    }
    pub fn truncate(&self, trunc: usize) -> PolyMat {
        let mut out = self.clone();
        for o in out.entries.iter_mut() {
            *o = o.truncate(trunc);
        }
        out
    }
    pub fn frobenius(&self, s: i64) -> PolyMat {
        let f = self.field.clone();
        let mut out = self.clone();
        for o in out.entries.iter_mut() {
            *o = o.frobenius(&f, s);
        }
        out
    }
    pub fn max_deg(&self) -> usize {
        self.entries.iter().map(|p| p.0.len()).max().unwrap_or(0)
    }

    /// Division-free characteristic polynomial (Berkowitz), coefficients in
    /// (k[t])[X] given low-degree-first in X. Polynomial products truncated
    /// at `trunc`.
    pub fn char_poly(&self, trunc: usize) -> Vec<Poly> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let f = &self.field;
        if n == 0 {
            return vec![Poly::constant(1)];
        }
        // Berkowitz: iteratively build the char poly vector via Toeplitz products.
        let mut cp: Vec<Poly> = vec![Poly::constant(1)];
        for r in 1..=n {
            // principal r x r leading submatrix pieces
            let a = self.get(r - 1, r - 1).clone();
            // row vector R = M[r-1, 0..r-1], column S = M[0..r-1, r-1], block B = M[0..r-1,0..r-1]
            let rv: Vec<Poly> = (0..r - 1).map(|j| self.get(r - 1, j).clone()).collect();
            let sv: Vec<Poly> = (0..r - 1).map(|i| self.get(i, r - 1).clone()).collect();
            // powers: c_0 = -a? Build the Toeplitz column: [1, -a, -(R S), -(R B S), ...]
            let mut col: Vec<Poly> = Vec::with_capacity(r + 1);
            col.push(Poly::constant(1));
            col.push(a.neg(f));
            let mut cur = sv.clone();
            for _k in 2..=r {
                // entry = - R . cur
                let mut dot = Poly::zero();
                for (x, y) in rv.iter().zip(cur.iter()) {
                    dot = dot.add(&x.mul(y, f, trunc), f);
                }
                col.push(dot.neg(f));
                // cur = B * cur
                let mut next = vec![Poly::zero(); r - 1];
                for i in 0..r - 1 {
                    let mut acc = Poly::zero();
                    for j in 0..r - 1 {
                        let b = self.get(i, j);
                        if !b.is_zero() && !cur[j].is_zero() {
                            acc = acc.add(&b.mul(&cur[j], f, trunc), f);
                        }
                    }
                    next[i] = acc;
                }
                cur = next;
            }
            // cp_new(X) has degree r: Toeplitz multiply
            let mut next_cp = vec![Poly::zero(); r + 1];
            for (i, c) in col.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                for (j, old) in cp.iter().enumerate() {
                    if i + j <= r && !old.is_zero() {
                        next_cp[i + j] = next_cp[i + j].add(&c.mul(old, f, trunc), f);
                    }
                }
            }
            cp = next_cp;
        }
        // cp holds coefficients with cp[0] = leading (X^n) ... normalize order:
        // Berkowitz as built yields [1, c_{n-1}, ..., c_0] top-down; reverse to low-first.
        cp.reverse();
        cp
    }

    /// Exact determinant via char_poly (entries must be exact; pass a trunc
    /// at least 1 + max attainable degree).
    pub fn det_exact(&self) -> Poly {
        let bound = self.rows * self.max_deg() + 1;
        let cp = self.char_poly(bound.max(2));
        // det = (-1)^n * charpoly(0)
        let c0 = cp[0].clone();
        if self.rows % 2 == 1 {
            c0.neg(&self.field)
        } else {
            c0
        }
    }

    /// t^shift * self^{-1} mod t^trunc. Requires the result to be integral
    /// (every entry of t^shift * adj / det lands in k[[t]]).
    pub fn scaled_inverse(&self, shift: usize, trunc: usize) -> Option<PolyMat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let f = &self.field;
        let det = self.det_exact();
        let v = det.val()?;
        let unit = det.shift_down(v);
        // the product c·u⁻¹ must be known mod t^{trunc+v} so that dividing
        // by t^v still leaves trunc valid coefficients
        let p_int = trunc + v;
        let uinv = unit.series_inv(f, p_int);
        let mut out = PolyMat::zero(self.field.clone(), n, n);
        for i in 0..n {
            for j in 0..n {
                // cofactor expansion: adj[i][j] = (-1)^{i+j} det(minor_{j,i})
                let minor = self.minor(j, i);
                let mut c = minor.det_exact();
                if (i + j) % 2 == 1 {
                    c = c.neg(f);
                }
                // t^shift * c / (t^v * unit)
                let scaled = c.mul(&uinv, f, p_int).shift_up(shift);
                if scaled.val().map(|w| w < v).unwrap_or(false) {
                    return None; // non-integral
                }
                *out.get_mut(i, j) = scaled.shift_down(v).truncate(trunc);
            }
        }
        Some(out)
    }

    fn minor(&self, drop_row: usize, drop_col: usize) -> PolyMat {
        let n = self.rows;
        let mut out = PolyMat::zero(self.field.clone(), n - 1, n - 1);
        let mut ii = 0;
        for i in 0..n {
            if i == drop_row {
                continue;
            }
            let mut jj = 0;
            for j in 0..n {
                if j == drop_col {
                    continue;
                }
                *out.get_mut(ii, jj) = self.get(i, j).clone();
                jj += 1;
            }
            ii += 1;
        }
        out
    }

    /// Flattens the action x(t) -> M(t) x(t) mod t^e into the block k-matrix
    /// on generator-major, power-minor coordinates.
    pub fn flatten_mod(&self, e: usize) -> Matrix {
        let r = self.rows;
        let c = self.cols;
        let mut out = Matrix::zero(self.field.clone(), r * e, c * e);
        for g2 in 0..r {
            for g in 0..c {
                let p = self.get(g2, g);
                for kin in 0..e {
                    for kd in 0..e - kin {
                        let coeff = p.coeff(kd);
                        if coeff != 0 {
                            out.set(g2 * e + kin + kd, g * e + kin, coeff);
                        }
                    }
                }
            }
        }
        out
    }

    /// Lifts a flat epsilon-module vector (generator-major, power-minor) to a
    /// polynomial column vector of degree < e.
    pub fn lift_flat_vector(v: &[u32], e: usize) -> Vec<Poly> {
        let rank = v.len() / e;
        (0..rank)
            .map(|g| Poly(v[g * e..(g + 1) * e].to_vec()).trim())
            .collect()
    }

    pub fn apply_poly_vec(&self, v: &[Poly], trunc: usize) -> Vec<Poly> {
        assert_eq!(v.len(), self.cols);
        let f = &self.field;
        (0..self.rows)
            .map(|i| {
                let mut acc = Poly::zero();
                for (j, x) in v.iter().enumerate() {
                    let a = self.get(i, j);
                    if !a.is_zero() && !x.is_zero() {
                        acc = acc.add(&a.mul(x, f, trunc), f);
                    }
                }
                acc
            })
            .collect()
    }
}

/// Column-style lattice basis: given generator columns of a k[[t]]-lattice L
/// with t^e * (full module) ⊆ L, returns a square matrix whose columns are a
/// basis of L, entries reduced to degree < prec.
pub fn lattice_basis(gens: &PolyMat, e: usize, prec: usize) -> PolyMat {
    let n = gens.rows;
    let f = gens.field.clone();
    // augment with t^e I to saturate
    let mut cols: Vec<Vec<Poly>> = Vec::new();
    for j in 0..gens.cols {
        cols.push((0..n).map(|i| gens.get(i, j).truncate(prec)).collect());
    }
    for i in 0..n {
        let mut c = vec![Poly::zero(); n];
        c[i] = Poly::t_power(e);
        cols.push(c);
    }
    let mut basis: Vec<Vec<Poly>> = Vec::new();
    for row in 0..n {
        // find column with minimal valuation in this row
        let mut best: Option<(usize, usize)> = None;
        for (cj, col) in cols.iter().enumerate() {
            if let Some(v) = col[row].val() {
                if best.map(|(_, bv)| v < bv).unwrap_or(true) {
                    best = Some((cj, v));
                }
            }
        }
        let (pj, pv) = best.expect("lattice saturated by t^e I");
        let pivot = cols.swap_remove(pj);
        let pid_unit = pivot[row].shift_down(pv);
        let pinv = pid_unit.series_inv(&f, prec);
        for col in cols.iter_mut() {
            if let Some(v) = col[row].val() {
                debug_assert!(v >= pv);
                let q = col[row].shift_down(pv).mul(&pinv, &f, prec);
                for (i, slot) in col.iter_mut().enumerate() {
                    let sub = pivot[i].mul(&q, &f, prec);
                    *slot = slot.sub(&sub, &f).truncate(prec);
                }
            }
        }
        basis.push(pivot);
    }
    let mut out = PolyMat::zero(f, n, n);
    for (j, col) in basis.iter().enumerate() {
        for i in 0..n {
            *out.get_mut(i, j) = col[i].truncate(prec);
        }
    }
    out
}
