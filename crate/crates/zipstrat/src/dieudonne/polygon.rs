//! Upper-convex polygons from valuations, signatures and Frobenius slopes.
//!
//! All polygons start at (0, 0), run over integer x in [0, h], and have
//! weakly decreasing rational slopes. "P ≤ Q" is the pointwise comparison.

use num_rational::Rational64;
use num_traits::Zero;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polygon {
    pub h: usize,
    /// y[s] for s = 0..=h; y[0] = 0.
    pub y: Vec<Rational64>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum PolygonError {
    #[error("x-ranges differ: {0} vs {1}")]
    RangeMismatch(usize, usize),
    #[error("slopes are not weakly decreasing at s = {0}")]
    NotConvex(usize),
}

impl Polygon {
    /// Partial sums of a weakly decreasing slope sequence.
    pub fn from_slopes(slopes: &[Rational64]) -> Self {
        let mut y = Vec::with_capacity(slopes.len() + 1);
        let mut acc = Rational64::zero();
        y.push(acc);
        for &s in slopes {
            acc += s;
            y.push(acc);
        }
        Polygon { h: slopes.len(), y }
    }

    /// Partial sums of integer valuations sorted decreasing, padded to h.
    pub fn from_valuations(vals: &[usize], h: usize) -> Self {
        let mut v: Vec<i64> = vals.iter().map(|&x| x as i64).collect();
        v.sort_unstable_by(|a, b| b.cmp(a));
        v.resize(h, 0);
        let slopes: Vec<Rational64> = v.into_iter().map(Rational64::from_integer).collect();
        Polygon::from_slopes(&slopes)
    }

    pub fn zero(h: usize) -> Self {
        Polygon { h, y: vec![Rational64::zero(); h + 1] }
    }

    pub fn slopes(&self) -> Vec<Rational64> {
        (1..=self.h).map(|s| self.y[s] - self.y[s - 1]).collect()
    }

    pub fn endpoint(&self) -> Rational64 {
        *self.y.last().unwrap()
    }

    pub fn check_convex(&self) -> Result<(), PolygonError> {
        let sl = self.slopes();
        for s in 1..sl.len() {
            if sl[s] > sl[s - 1] {
                return Err(PolygonError::NotConvex(s + 1));
            }
        }
        Ok(())
    }

    /// Pointwise average.
    pub fn average(polys: &[Polygon]) -> Result<Polygon, PolygonError> {
        assert!(!polys.is_empty());
        let h = polys[0].h;
        for p in polys {
            if p.h != h {
                return Err(PolygonError::RangeMismatch(h, p.h));
            }
        }
        let n = Rational64::from_integer(polys.len() as i64);
        let y = (0..=h)
            .map(|s| polys.iter().map(|p| p.y[s]).sum::<Rational64>() / n)
            .collect();
        Ok(Polygon { h, y })
    }

    /// P ≤ Q pointwise at every integer (upper-convex: "below" is smaller).
    pub fn leq(&self, other: &Polygon) -> Result<bool, PolygonError> {
        if self.h != other.h {
            return Err(PolygonError::RangeMismatch(self.h, other.h));
        }
        Ok((0..=self.h).all(|s| self.y[s] <= other.y[s]))
    }

    /// CSV rows "s,y" with exact rational y.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (s, v) in self.y.iter().enumerate() {
            if *v.denom() == 1 {
                out.push_str(&format!("{},{}\n", s, v.numer()));
            } else {
                out.push_str(&format!("{},{}/{}\n", s, v.numer(), v.denom()));
            }
        }
        out
    }
}
