//! Exact linear algebra: fraction-free (Bareiss) elimination over the
//! integers for rank and row-space membership, and rational reduced row
//! echelon form for solving and null spaces.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Integer arithmetic that may refuse to overflow.
pub trait ExactInt: Clone + PartialEq + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn is_zero(&self) -> bool;
    /// `a * b - c * d`, or `None` on overflow.
    fn mul_sub(a: &Self, b: &Self, c: &Self, d: &Self) -> Option<Self>;
    fn div_exact(&self, d: &Self) -> Self;
    fn gcd(&self, other: &Self) -> Self;
    fn is_unit(&self) -> bool;
}

impl ExactInt for i64 {
    fn zero() -> Self {
        0
    }
    fn one() -> Self {
        1
    }
    fn from_i64(v: i64) -> Self {
        v
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn mul_sub(a: &Self, b: &Self, c: &Self, d: &Self) -> Option<Self> {
        a.checked_mul(*b)?.checked_sub(c.checked_mul(*d)?)
    }
    fn div_exact(&self, d: &Self) -> Self {
        debug_assert_eq!(self % d, 0);
        self / d
    }
    fn gcd(&self, other: &Self) -> Self {
        Integer::gcd(self, other)
    }
    fn is_unit(&self) -> bool {
        self.abs() == 1
    }
}

impl ExactInt for BigInt {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn mul_sub(a: &Self, b: &Self, c: &Self, d: &Self) -> Option<Self> {
        Some(a * b - c * d)
    }
    fn div_exact(&self, d: &Self) -> Self {
        self / d
    }
    fn gcd(&self, other: &Self) -> Self {
        Integer::gcd(self, other)
    }
    fn is_unit(&self) -> bool {
        self.abs().is_one()
    }
}

/// Row echelon form from Bareiss elimination.
#[derive(Debug, Clone)]
pub struct Echelon<T> {
    pub rows: Vec<Vec<T>>,
    pub pivots: Vec<usize>,
    pub width: usize,
}

impl<T: ExactInt> Echelon<T> {
    /// Fraction-free elimination; `None` if an intermediate overflows `T`.
    pub fn new(matrix: &[Vec<i64>], width: usize) -> Option<Self> {
        let mut m: Vec<Vec<T>> = matrix
            .iter()
            .map(|r| r.iter().map(|&x| T::from_i64(x)).collect())
            .collect();
        let mut prev = T::one();
        let mut pivots = Vec::new();
        let mut r = 0;
        for col in 0..width {
            if r == m.len() {
                break;
            }
            let Some(p) = (r..m.len()).find(|&i| !m[i][col].is_zero()) else {
                continue;
            };
            m.swap(r, p);
            let (top, rest) = m.split_at_mut(r + 1);
            let pivot_row = &top[r];
            let pv = pivot_row[col].clone();
            for row in rest.iter_mut() {
                let lead = row[col].clone();
                for j in col + 1..width {
                    let v = T::mul_sub(&pv, &row[j], &lead, &pivot_row[j])?;
                    row[j] = v.div_exact(&prev);
                }
                row[col] = T::zero();
            }
            prev = pv;
            pivots.push(col);
            r += 1;
        }
        m.truncate(r);
        Some(Self {
            rows: m,
            pivots,
            width,
        })
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Whether `v` lies in the row space, i.e. appending it keeps the rank.
    pub fn contains(&self, v: &[i64]) -> Option<bool> {
        let mut v: Vec<T> = v.iter().map(|&x| T::from_i64(x)).collect();
        for (row, &c) in self.rows.iter().zip(&self.pivots) {
            if v[c].is_zero() {
                continue;
            }
            let lead = v[c].clone();
            let pv = row[c].clone();
            let mut g = T::zero();
            for j in 0..self.width {
                let x = T::mul_sub(&pv, &v[j], &lead, &row[j])?;
                g = g.gcd(&x);
                v[j] = x;
            }
            if !g.is_zero() && !g.is_unit() {
                for x in v.iter_mut() {
                    *x = x.div_exact(&g);
                }
            }
        }
        Some(v.iter().all(ExactInt::is_zero))
    }
}

/// Rank and row-space membership with an `i64` fast path and a `BigInt`
/// fallback when an intermediate would overflow.
pub enum IntEchelon {
    Small(Echelon<i64>),
    Big(Echelon<BigInt>),
}

impl IntEchelon {
    pub fn new(matrix: &[Vec<i64>], width: usize) -> Self {
        match Echelon::<i64>::new(matrix, width) {
            Some(e) => IntEchelon::Small(e),
            None => IntEchelon::Big(Echelon::new(matrix, width).expect("BigInt never overflows")),
        }
    }

    pub fn rank(&self) -> usize {
        match self {
            IntEchelon::Small(e) => e.rank(),
            IntEchelon::Big(e) => e.rank(),
        }
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        match self {
            IntEchelon::Small(e) => match e.contains(v) {
                Some(b) => b,
                None => {
                    let rows: Vec<Vec<BigInt>> = e
                        .rows
                        .iter()
                        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                        .collect();
                    let big = Echelon {
                        rows,
                        pivots: e.pivots.clone(),
                        width: e.width,
                    };
                    big.contains(v).expect("BigInt never overflows")
                }
            },
            IntEchelon::Big(e) => e.contains(v).expect("BigInt never overflows"),
        }
    }
}

/// Rank of an integer matrix by fraction-free elimination.
pub fn rank(matrix: &[Vec<i64>], width: usize) -> usize {
    IntEchelon::new(matrix, width).rank()
}

/// Reduced row echelon form over the rationals.
#[derive(Debug, Clone)]
pub struct Rref {
    pub rows: Vec<Vec<BigRational>>,
    pub pivots: Vec<usize>,
    pub width: usize,
}

impl Rref {
    /// Reduces `matrix`; only the first `width` columns are pivot candidates,
    /// any further columns ride along (augmented right-hand sides).
    pub fn new(matrix: &[Vec<BigRational>], width: usize) -> Self {
        let mut m: Vec<Vec<BigRational>> = matrix.to_vec();
        let total = m.first().map_or(width, Vec::len);
        let mut pivots = Vec::new();
        let mut r = 0;
        for col in 0..width {
            if r == m.len() {
                break;
            }
            let Some(p) = (r..m.len()).find(|&i| !m[i][col].is_zero()) else {
                continue;
            };
            m.swap(r, p);
            let inv = m[r][col].recip();
            for x in m[r].iter_mut() {
                *x *= &inv;
            }
            let pivot_row = m[r].clone();
            for (i, row) in m.iter_mut().enumerate() {
                if i == r || row[col].is_zero() {
                    continue;
                }
                let f = row[col].clone();
                for j in 0..total {
                    if !pivot_row[j].is_zero() {
                        row[j] -= &f * &pivot_row[j];
                    }
                }
            }
            pivots.push(col);
            r += 1;
        }
        Self {
            rows: m,
            pivots,
            width,
        }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Basis of `{x : M x = 0}`, one vector per free column.
    pub fn null_space(&self) -> Vec<Vec<BigRational>> {
        let free: Vec<usize> = (0..self.width).filter(|c| !self.pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut x = vec![BigRational::zero(); self.width];
                x[f] = BigRational::one();
                for (row, &p) in self.rows.iter().zip(&self.pivots) {
                    x[p] = -row[f].clone();
                }
                x
            })
            .collect()
    }

    /// For an augmented system `[M | b]`: a particular solution with free
    /// variables at zero, or `None` if inconsistent.
    pub fn particular_solution(&self) -> Option<Vec<BigRational>> {
        let rhs = self.width;
        for row in self.rows.iter().skip(self.rank()) {
            if row.len() > rhs && !row[rhs].is_zero() {
                return None;
            }
        }
        let mut x = vec![BigRational::zero(); self.width];
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            x[p] = row.get(rhs).cloned().unwrap_or_else(BigRational::zero);
        }
        Some(x)
    }
}
