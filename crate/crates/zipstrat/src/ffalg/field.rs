//! Deterministic construction of GF(p^m) with packed element representation.
//!
//! Elements are residues of GF(p)[X] modulo the lexicographically smallest
//! monic irreducible of degree m (coefficients compared low-degree-first),
//! packed into a `u32` as sum c_i * p^i. Multiplication is schoolbook plus
//! table-driven reduction; small fields additionally get full lookup tables.

use std::sync::Arc;

/// Shared handle to a field context. Cheap to clone, safe across threads.
pub type Field = Arc<FieldCtx>;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum FieldError {
    #[error("p = {0} is not prime")]
    NotPrime(u64),
    #[error("extension degree must be >= 1")]
    BadDegree,
    #[error("field size p^m = {0} exceeds the supported bound 2^31")]
    TooLarge(u128),
    #[error("no irreducible polynomial found (internal bug)")]
    NoIrreducible,
}

/// Arithmetic context for GF(p^m).
pub struct FieldCtx {
    p: u32,
    m: u32,
    q: u64,
    /// Monic modulus, coefficients low-degree-first, length m+1.
    modulus: Vec<u32>,
    /// reduction[k] = X^{m+k} mod modulus as a coefficient vector of length m.
    reduction: Vec<Vec<u32>>,
    /// Lookup tables, populated when q is small enough.
    mul_table: Vec<u32>,
    inv_table: Vec<u32>,
    frob_table: Vec<u32>,
}

const TABLE_LIMIT: u64 = 1 << 12;

impl std::fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GF({}^{})", self.p, self.m)
    }
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.m == other.m
    }
}
impl Eq for FieldCtx {}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

// --- dense polynomial helpers over GF(p), coefficients low-degree-first ---

fn poly_trim(v: &mut Vec<u32>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn poly_mul_mod(a: &[u32], b: &[u32], f: &[u32], p: u64) -> Vec<u32> {
    let mut prod = vec![0u64; a.len() + b.len()];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + ai as u64 * bj as u64) % p;
        }
    }
    poly_rem(&prod.iter().map(|&x| x as u32).collect::<Vec<_>>(), f, p)
}

fn poly_rem(a: &[u32], f: &[u32], p: u64) -> Vec<u32> {
    let mut r: Vec<u32> = a.to_vec();
    poly_trim(&mut r);
    let df = f.len() - 1;
    let lead_inv = mod_inv(f[df] as u64, p);
    while r.len() > df {
        let c = r[r.len() - 1] as u64 * lead_inv % p;
        let shift = r.len() - 1 - df;
        if c != 0 {
            for k in 0..=df {
                let idx = shift + k;
                let sub = c * f[k] as u64 % p;
                r[idx] = ((r[idx] as u64 + p - sub) % p) as u32;
            }
        }
        r.pop();
        poly_trim(&mut r);
        if r.is_empty() {
            break;
        }
    }
    r
}

fn poly_gcd(a: &[u32], b: &[u32], p: u64) -> Vec<u32> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    poly_trim(&mut x);
    poly_trim(&mut y);
    while !y.is_empty() {
        let r = poly_rem(&x, &y, p);
        x = y;
        y = r;
    }
    x
}

fn mod_inv(a: u64, p: u64) -> u64 {
    mod_pow(a, p - 2, p)
}

fn mod_pow(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

/// X^(p^k) mod f, computed by binary exponentiation. p^k must fit in u64.
fn x_pow_pk_mod(f: &[u32], p: u64, k: u32) -> Vec<u32> {
    let mut exp: u64 = 1;
    for _ in 0..k {
        exp = exp.checked_mul(p).expect("exponent overflow");
    }
    let mut base = vec![0u32, 1]; // X
    let mut acc = vec![1u32];
    while exp > 0 {
        if exp & 1 == 1 {
            acc = poly_mul_mod(&acc, &base, f, p);
        }
        base = poly_mul_mod(&base, &base, f, p);
        exp >>= 1;
    }
    acc
}

fn prime_divisors(mut n: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn is_irreducible(f: &[u32], p: u64) -> bool {
    let m = (f.len() - 1) as u32;
    if m == 0 {
        return false;
    }
    // X^{p^m} == X mod f
    let xq = x_pow_pk_mod(f, p, m);
    let mut x_minus = xq.clone();
    while x_minus.len() < 2 {
        x_minus.push(0);
    }
    x_minus[1] = ((x_minus[1] as u64 + p - 1) % p) as u32;
    poly_trim(&mut x_minus);
    if !x_minus.is_empty() {
        return false;
    }
    // gcd(X^{p^{m/r}} - X, f) == 1 for every prime r | m
    for r in prime_divisors(m) {
        let mut g = x_pow_pk_mod(f, p, m / r);
        while g.len() < 2 {
            g.push(0);
        }
        g[1] = ((g[1] as u64 + p - 1) % p) as u32;
        poly_trim(&mut g);
        let gcd = poly_gcd(&g, f, p);
        if gcd.len() != 1 {
            return false;
        }
    }
    true
}

/// Builds GF(p^m) with the lexicographically smallest monic irreducible
/// modulus of degree m (coefficient tuples (c_0,...,c_{m-1}) compared
/// low-degree-first).
pub fn make_field(p: u64, m: u32) -> Result<Field, FieldError> {
    if !is_prime(p) {
        return Err(FieldError::NotPrime(p));
    }
    if m == 0 {
        return Err(FieldError::BadDegree);
    }
    let q: u128 = (p as u128).pow(m);
    if q > 1 << 31 {
        return Err(FieldError::TooLarge(q));
    }
    let q = q as u64;

    let modulus = if m == 1 {
        vec![0, 1] // X itself: GF(p) = GF(p)[X]/(X)
    } else {
        // Odometer over (c_0,...,c_{m-1}) in lexicographic order, c_0 most
        // significant so that the scan respects low-degree-first comparison.
        let mut found = None;
        let total = q;
        'scan: for idx in 0..total {
            let mut digits = vec![0u32; m as usize];
            let mut rest = idx;
            for slot in (0..m as usize).rev() {
                digits[slot] = (rest % p) as u32;
                rest /= p;
            }
            // digits holds (c_0,...,c_{m-1}) with c_0 = most significant digit of idx
            let mut f = digits.clone();
            f.push(1); // monic
            if is_irreducible(&f, p) {
                found = Some(f);
                break 'scan;
            }
        }
        found.ok_or(FieldError::NoIrreducible)?
    };

    let mp = p as u32;
    // reduction[k] = X^{m+k} mod modulus
    let mut reduction: Vec<Vec<u32>> = Vec::new();
    if m > 1 {
        let mut cur: Vec<u32> = (0..m).map(|i| {
            // X^m mod f = -(c_0 + ... + c_{m-1} X^{m-1})
            ((p - modulus[i as usize] as u64) % p) as u32
        }).collect();
        reduction.push(cur.clone());
        for _ in 1..m {
            // multiply by X and reduce
            let mut next = vec![0u32; m as usize];
            let top = cur[m as usize - 1] as u64;
            for i in (1..m as usize).rev() {
                next[i] = cur[i - 1];
            }
            next[0] = 0;
            if top != 0 {
                for i in 0..m as usize {
                    let sub = top * modulus[i] as u64 % p;
                    next[i] = ((next[i] as u64 + p - sub) % p) as u32;
                }
            }
            reduction.push(next.clone());
            cur = next;
        }
    }

    let mut ctx = FieldCtx {
        p: mp,
        m,
        q,
        modulus,
        reduction,
        mul_table: Vec::new(),
        inv_table: Vec::new(),
        frob_table: Vec::new(),
    };

    if q <= TABLE_LIMIT {
        let qs = q as usize;
        let mut mul = vec![0u32; qs * qs];
        for a in 0..qs {
            for b in a..qs {
                let v = ctx.mul_slow(a as u32, b as u32);
                mul[a * qs + b] = v;
                mul[b * qs + a] = v;
            }
        }
        ctx.mul_table = mul;
        let mut inv = vec![0u32; qs];
        for a in 1..qs {
            inv[a] = ctx.pow(a as u32, q - 2);
        }
        ctx.inv_table = inv;
        let mut frob = vec![0u32; qs];
        for a in 0..qs {
            frob[a] = ctx.pow(a as u32, p);
        }
        ctx.frob_table = frob;
    }

    Ok(Arc::new(ctx))
}

impl FieldCtx {
    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn degree(&self) -> u32 {
        self.m
    }
    pub fn order(&self) -> u64 {
        self.q
    }
    /// Modulus coefficients, low-degree-first, length m+1.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }
    pub fn zero(&self) -> u32 {
        0
    }
    pub fn one(&self) -> u32 {
        1
    }
    /// The class of X (a generator of the extension as an algebra).
    pub fn gen(&self) -> u32 {
        if self.m == 1 {
            0
        } else {
            self.p
        }
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> u32 {
        let mut acc = 0u64;
        for (i, &c) in coeffs.iter().enumerate().take(self.m as usize) {
            acc += (c as u64 % self.p as u64) * (self.p as u64).pow(i as u32);
        }
        acc as u32
    }

    pub fn coeffs(&self, a: u32) -> Vec<u32> {
        let mut out = vec![0u32; self.m as usize];
        let mut rest = a;
        for slot in out.iter_mut() {
            *slot = rest % self.p;
            rest /= self.p;
        }
        out
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        if self.m == 1 {
            let s = a + b;
            if s >= self.p {
                s - self.p
            } else {
                s
            }
        } else {
            let (mut acc, mut mult, mut x, mut y) = (0u32, 1u32, a, b);
            for _ in 0..self.m {
                let s = (x % self.p + y % self.p) % self.p;
                acc += s * mult;
                x /= self.p;
                y /= self.p;
                mult *= self.p;
            }
            acc
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        if self.m == 1 {
            if a == 0 {
                0
            } else {
                self.p - a
            }
        } else {
            let (mut acc, mut mult, mut x) = (0u32, 1u32, a);
            for _ in 0..self.m {
                let c = x % self.p;
                acc += if c == 0 { 0 } else { self.p - c } * mult;
                x /= self.p;
                mult *= self.p;
            }
            acc
        }
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if self.m == 1 {
            (a as u64 * b as u64 % self.p as u64) as u32
        } else if !self.mul_table.is_empty() {
            self.mul_table[a as usize * self.q as usize + b as usize]
        } else {
            self.mul_slow(a, b)
        }
    }

    fn mul_slow(&self, a: u32, b: u32) -> u32 {
        if self.m == 1 {
            return (a as u64 * b as u64 % self.p as u64) as u32;
        }
        let p = self.p as u64;
        let m = self.m as usize;
        let ca = self.coeffs(a);
        let cb = self.coeffs(b);
        let mut prod = vec![0u64; 2 * m - 1];
        for i in 0..m {
            if ca[i] == 0 {
                continue;
            }
            for j in 0..m {
                prod[i + j] = (prod[i + j] + ca[i] as u64 * cb[j] as u64) % p;
            }
        }
        // fold X^{m+k} via the reduction table
        let mut out = vec![0u64; m];
        for i in 0..m {
            out[i] = prod[i];
        }
        for k in 0..m - 1 {
            let c = prod[m + k];
            if c == 0 {
                continue;
            }
            for i in 0..m {
                out[i] = (out[i] + c * self.reduction[k][i] as u64) % p;
            }
        }
        let mut acc = 0u64;
        let mut mult = 1u64;
        for v in out {
            acc += v * mult;
            mult *= p;
        }
        acc as u32
    }

    pub fn pow(&self, a: u32, mut exp: u64) -> u32 {
        let mut base = a;
        let mut acc = 1u32;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul_slow(acc, base);
            }
            base = self.mul_slow(base, base);
            exp >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: u32) -> u32 {
        assert!(a != 0, "inverse of zero");
        if !self.inv_table.is_empty() {
            self.inv_table[a as usize]
        } else {
            self.pow(a, self.q - 2)
        }
    }

    /// Frobenius a -> a^p.
    #[inline]
    pub fn frob(&self, a: u32) -> u32 {
        if self.m == 1 {
            a
        } else if !self.frob_table.is_empty() {
            self.frob_table[a as usize]
        } else {
            self.pow(a, self.p as u64)
        }
    }

    /// a -> a^(p^s) for any integer s (negative s walks the inverse).
    pub fn frob_pow(&self, a: u32, s: i64) -> u32 {
        let m = self.m as i64;
        let s = s.rem_euclid(m) as u32;
        let mut out = a;
        for _ in 0..s {
            out = self.frob(out);
        }
        out
    }

    /// Normalizes a twist exponent modulo the field degree.
    pub fn normalize_twist(&self, s: i64) -> i64 {
        s.rem_euclid(self.m as i64)
    }

    /// All field elements, in packed order. Intended for small fields only.
    pub fn elements(&self) -> impl Iterator<Item = u32> + '_ {
        0..self.q as u32
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gf2_modulus_is_x() {
        let f = make_field(2, 1).unwrap();
        assert_eq!(f.modulus(), &[0, 1]);
        assert_eq!(f.order(), 2);
    }

    #[test]
    fn gf9_modulus_and_frobenius() {
        // exhaustive scan of monic degree-2 polynomials over GF(3),
        // lexicographic by (c0, c1): X^2 + 1 is the first irreducible
        let f = make_field(3, 2).unwrap();
        assert_eq!(f.modulus(), &[1, 0, 1]);
        let omega = f.gen(); // class of X
        assert_eq!(f.frob(omega), f.neg(omega));
    }

    #[test]
    fn gf4_modulus_and_frobenius() {
        let f = make_field(2, 2).unwrap();
        assert_eq!(f.modulus(), &[1, 1, 1]); // X^2 + X + 1
        let omega = f.gen();
        // omega^2 = omega + 1
        assert_eq!(f.mul(omega, omega), f.add(omega, 1));
        assert_eq!(f.frob(omega), f.add(omega, 1));
        // Frobenius has order 2
        assert_eq!(f.frob(f.frob(omega)), omega);
    }

    #[test]
    fn rejects_composite_characteristic() {
        assert_eq!(make_field(6, 1).unwrap_err(), FieldError::NotPrime(6));
    }

    #[test]
    fn field_axioms_small() {
        for (p, m) in [(2u64, 1u32), (3, 1), (2, 2), (3, 2), (5, 1), (2, 3)] {
            let f = make_field(p, m).unwrap();
            let els: Vec<u32> = f.elements().collect();
            for &a in &els {
                assert_eq!(f.add(a, f.neg(a)), 0);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a)), 1);
                }
                // Frobenius is a field automorphism of order m
                assert_eq!(f.frob_pow(a, m as i64), a);
                for &b in &els {
                    assert_eq!(f.frob(f.mul(a, b)), f.mul(f.frob(a), f.frob(b)));
                    assert_eq!(f.frob(f.add(a, b)), f.add(f.frob(a), f.frob(b)));
                }
            }
        }
    }
}
