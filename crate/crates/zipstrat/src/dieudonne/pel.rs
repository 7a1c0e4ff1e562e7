//! Combinatorial PEL data: local factors with ramification/inertia degrees
//! and signatures.

use serde::{Deserialize, Serialize};

/// Local factor kind. C carries a symplectic pairing; AL/AU are modeled on
/// the primed half of the ambient module (the dual half is recovered by
/// duality and carries no independent information).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kind {
    C,
    AL,
    AU,
}

/// One local factor: ramification index e, residue degree f, half-rank d,
/// and the signature d^l for each residue embedding j and splitting slot l.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PelFactor {
    pub kind: Kind,
    pub e: usize,
    pub f: usize,
    pub d: usize,
    #[serde(default = "default_mult")]
    pub mult: usize,
    /// signature[j][l-1] = d^l_{i,j}.
    pub signature: Vec<Vec<usize>>,
}

fn default_mult() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PELDatum {
    pub p: u64,
    /// Working field degree: all computations run over GF(p^m).
    pub m: u32,
    pub factors: Vec<PelFactor>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum PelError {
    #[error("factor {0}: e, f, d must all be >= 1")]
    BadShape(usize),
    #[error("factor {0}: signature must have f rows of e entries")]
    BadSignatureShape(usize),
    #[error("factor {factor}: kind C forces d^l = d, found {found} at (j={j}, l={l})")]
    KindCSignature { factor: usize, j: usize, l: usize, found: usize },
    #[error("factor {factor}: signature entry {found} at (j={j}, l={l}) exceeds d = {d}")]
    SignatureRange { factor: usize, j: usize, l: usize, found: usize, d: usize },
}

impl PelFactor {
    /// k[ε]-rank of one residue block: 2d for kind C, d (primed half) else.
    pub fn block_rank(&self) -> usize {
        match self.kind {
            Kind::C => 2 * self.d,
            Kind::AL | Kind::AU => self.d,
        }
    }

    pub fn block_dim(&self) -> usize {
        self.block_rank() * self.e
    }

    pub fn sig(&self, j: usize, l: usize) -> usize {
        self.signature[j][l - 1]
    }

    /// Hilbert shape: one-dimensional symplectic blocks.
    pub fn is_hilbert(&self) -> bool {
        self.kind == Kind::C && self.d == 1
    }
}

impl PELDatum {
    pub fn validate(&self) -> Result<(), PelError> {
        for (i, fac) in self.factors.iter().enumerate() {
            if fac.e < 1 || fac.f < 1 || fac.d < 1 {
                return Err(PelError::BadShape(i));
            }
            if fac.signature.len() != fac.f
                || fac.signature.iter().any(|row| row.len() != fac.e)
            {
                return Err(PelError::BadSignatureShape(i));
            }
            for (j, row) in fac.signature.iter().enumerate() {
                for (l0, &dl) in row.iter().enumerate() {
                    match fac.kind {
                        Kind::C => {
                            if dl != fac.d {
                                return Err(PelError::KindCSignature {
                                    factor: i,
                                    j,
                                    l: l0 + 1,
                                    found: dl,
                                });
                            }
                        }
                        Kind::AL | Kind::AU => {
                            if dl > fac.d {
                                return Err(PelError::SignatureRange {
                                    factor: i,
                                    j,
                                    l: l0 + 1,
                                    found: dl,
                                    d: fac.d,
                                });
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Convenience constructor for a Hilbert-type datum (kind C, d = 1).
    pub fn hilbert(p: u64, m: u32, e: usize, f: usize) -> Self {
        PELDatum {
            p,
            m,
            factors: vec![PelFactor {
                kind: Kind::C,
                e,
                f,
                d: 1,
                mult: 1,
                signature: vec![vec![1; e]; f],
            }],
        }
    }

    /// Siegel-type datum: kind C with half-rank g.
    pub fn siegel(p: u64, m: u32, g: usize, e: usize, f: usize) -> Self {
        PELDatum {
            p,
            m,
            factors: vec![PelFactor {
                kind: Kind::C,
                e,
                f,
                d: g,
                mult: 1,
                signature: vec![vec![g; e]; f],
            }],
        }
    }

    /// Unitary-type datum on the primed half: kind AL/AU with rank d and an
    /// explicit signature per (j, l).
    pub fn unitary(p: u64, m: u32, kind: Kind, d: usize, f: usize, sig: Vec<Vec<usize>>) -> Self {
        let e = sig[0].len();
        PELDatum {
            p,
            m,
            factors: vec![PelFactor { kind, e, f, d, mult: 1, signature: sig }],
        }
    }
}
