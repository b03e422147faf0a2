//! Smith normal form over the integers with unimodular transforms.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Dense integer matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl IntegerMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntegerMatrix { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// Builds a matrix from rows; `cols` fixes the width when there are no rows.
    pub fn from_rows(rows: &[Vec<i64>], cols: usize) -> Self {
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged integer matrix");
            m.data[i * cols..(i + 1) * cols].copy_from_slice(r);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[i64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, x: &[i64]) -> Vec<i64> {
        (0..self.rows).map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    fn to_generic<T: SnfInt>(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).iter().map(|&v| T::from_i64(v)).collect()).collect()
    }
}

/// Integer types the elimination can run on. Checked operations report overflow as `None`.
pub trait SnfInt: Clone + Debug + PartialEq + Zero + One + Signed + Integer {
    fn from_i64(v: i64) -> Self;
    fn to_big(&self) -> BigInt;
    fn cmul(&self, o: &Self) -> Option<Self>;
    fn csub(&self, o: &Self) -> Option<Self>;
}

impl SnfInt for i64 {
    fn from_i64(v: i64) -> Self {
        v
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
    fn cmul(&self, o: &Self) -> Option<Self> {
        self.checked_mul(*o)
    }
    fn csub(&self, o: &Self) -> Option<Self> {
        self.checked_sub(*o)
    }
}

impl SnfInt for BigInt {
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
    fn cmul(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn csub(&self, o: &Self) -> Option<Self> {
        Some(self - o)
    }
}

/// Unimodular transforms with `left · M · right = D`.
#[derive(Debug, Clone, PartialEq)]
pub struct Transforms {
    pub left: Vec<Vec<BigInt>>,
    pub left_inv: Vec<Vec<BigInt>>,
    pub right: Vec<Vec<BigInt>>,
    pub right_inv: Vec<Vec<BigInt>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnfResult {
    pub rows: usize,
    pub cols: usize,
    /// Nonzero diagonal entries `d1 | d2 | ...`, all positive.
    pub factors: Vec<BigInt>,
    pub transforms: Option<Transforms>,
}

impl SnfResult {
    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    /// Invariant factors greater than one.
    pub fn torsion(&self) -> Vec<BigInt> {
        self.factors.iter().filter(|d| !d.is_one()).cloned().collect()
    }

    /// The diagonal matrix `D` (rows x cols).
    pub fn diagonal(&self) -> Vec<Vec<BigInt>> {
        let mut d = vec![vec![BigInt::zero(); self.cols]; self.rows];
        for (i, f) in self.factors.iter().enumerate() {
            d[i][i] = f.clone();
        }
        d
    }
}

struct Work<T> {
    m: Vec<Vec<T>>,
    t: Option<[Vec<Vec<T>>; 4]>,
}

fn eye<T: SnfInt>(n: usize) -> Vec<Vec<T>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { T::one() } else { T::zero() }).collect()).collect()
}

fn axpy<T: SnfInt>(dst: &mut [T], src: &[T], c: &T) -> Option<()> {
    for (d, s) in dst.iter_mut().zip(src) {
        if !s.is_zero() {
            *d = d.csub(&c.cmul(s)?)?;
        }
    }
    Some(())
}

impl<T: SnfInt> Work<T> {
    /// row_i -= c · row_j
    fn row_op(&mut self, i: usize, j: usize, c: &T) -> Option<()> {
        let src = self.m[j].clone();
        axpy(&mut self.m[i], &src, c)?;
        if let Some([l, li, _, _]) = &mut self.t {
            let src = l[j].clone();
            axpy(&mut l[i], &src, c)?;
            // inverse: col_j += c · col_i
            for row in li.iter_mut() {
                let v = c.cmul(&row[i])?;
                row[j] = row[j].csub(&v.neg())?;
            }
        }
        Some(())
    }

    /// col_j -= c · col_i
    fn col_op(&mut self, j: usize, i: usize, c: &T) -> Option<()> {
        for row in self.m.iter_mut() {
            if !row[i].is_zero() {
                row[j] = row[j].csub(&c.cmul(&row[i])?)?;
            }
        }
        if let Some([_, _, r, ri]) = &mut self.t {
            for row in r.iter_mut() {
                if !row[i].is_zero() {
                    row[j] = row[j].csub(&c.cmul(&row[i])?)?;
                }
            }
            // inverse: row_i += c · row_j
            let src = ri[j].clone();
            axpy(&mut ri[i], &src, &(-c.clone()))?;
        }
        Some(())
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        self.m.swap(a, b);
        if let Some([l, li, _, _]) = &mut self.t {
            l.swap(a, b);
            li.iter_mut().for_each(|r| r.swap(a, b));
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        self.m.iter_mut().for_each(|r| r.swap(a, b));
        if let Some([_, _, r, ri]) = &mut self.t {
            r.iter_mut().for_each(|row| row.swap(a, b));
            ri.swap(a, b);
        }
    }

    fn negate_row(&mut self, a: usize) {
        self.m[a].iter_mut().for_each(|v| *v = -v.clone());
        if let Some([l, li, _, _]) = &mut self.t {
            l[a].iter_mut().for_each(|v| *v = -v.clone());
            li.iter_mut().for_each(|r| r[a] = -r[a].clone());
        }
    }
}

fn reduce<T: SnfInt>(m: Vec<Vec<T>>, rows: usize, cols: usize, track: bool) -> Option<(Vec<T>, Option<[Vec<Vec<T>>; 4]>)> {
    let t = track.then(|| [eye(rows), eye(rows), eye(cols), eye(cols)]);
    let mut w = Work { m, t };
    let mut factors = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                let v = &w.m[i][j];
                if !v.is_zero() && best.map_or(true, |(a, b)| v.abs() < w.m[a][b].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        w.swap_rows(t, pi);
        w.swap_cols(t, pj);
        loop {
            let mut clean = true;
            for i in t + 1..rows {
                if !w.m[i][t].is_zero() {
                    let q = w.m[i][t].div_floor(&w.m[t][t]);
                    w.row_op(i, t, &q)?;
                    clean &= w.m[i][t].is_zero();
                }
            }
            for j in t + 1..cols {
                if !w.m[t][j].is_zero() {
                    let q = w.m[t][j].div_floor(&w.m[t][t]);
                    w.col_op(j, t, &q)?;
                    clean &= w.m[t][j].is_zero();
                }
            }
            if !clean {
                let mut best = (t, t);
                for i in t + 1..rows {
                    if !w.m[i][t].is_zero() && w.m[i][t].abs() < w.m[best.0][best.1].abs() {
                        best = (i, t);
                    }
                }
                for j in t + 1..cols {
                    if !w.m[t][j].is_zero() && w.m[t][j].abs() < w.m[best.0][best.1].abs() {
                        best = (t, j);
                    }
                }
                if best.0 != t {
                    w.swap_rows(t, best.0);
                }
                if best.1 != t {
                    w.swap_cols(t, best.1);
                }
                continue;
            }
            let p = w.m[t][t].clone();
            let bad = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !w.m[i][j].is_multiple_of(&p)));
            match bad {
                Some(i) => w.row_op(t, i, &T::one().neg())?,
                None => break,
            }
        }
        if w.m[t][t].is_negative() {
            w.negate_row(t);
        }
        factors.push(w.m[t][t].clone());
        t += 1;
    }
    Some((factors, w.t))
}

fn big(m: Vec<Vec<impl SnfInt>>) -> Vec<Vec<BigInt>> {
    m.into_iter().map(|r| r.iter().map(SnfInt::to_big).collect()).collect()
}

fn finish<T: SnfInt>(rows: usize, cols: usize, (factors, t): (Vec<T>, Option<[Vec<Vec<T>>; 4]>)) -> SnfResult {
    SnfResult {
        rows,
        cols,
        factors: factors.iter().map(SnfInt::to_big).collect(),
        transforms: t.map(|[l, li, r, ri]| Transforms { left: big(l), left_inv: big(li), right: big(r), right_inv: big(ri) }),
    }
}

/// Smith normal form by exact elimination, pivoting on the entry of least absolute value.
///
/// Runs in `i64` and reruns in arbitrary precision if an intermediate overflows.
pub fn smith_normal_form(m: &IntegerMatrix, track: bool) -> SnfResult {
    let (r, c) = (m.rows, m.cols);
    match reduce::<i64>(m.to_generic(), r, c, track) {
        Some(out) => finish(r, c, out),
        None => finish(r, c, reduce::<BigInt>(m.to_generic(), r, c, track).expect("bigint elimination cannot overflow")),
    }
}

pub fn big_matmul(a: &[Vec<BigInt>], b: &[Vec<BigInt>], inner: usize, cols: usize) -> Vec<Vec<BigInt>> {
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).filter(|&k| !row[k].is_zero()).map(|k| &row[k] * &b[k][j]).sum())
                .collect()
        })
        .collect()
}

pub fn to_big_matrix(m: &IntegerMatrix) -> Vec<Vec<BigInt>> {
    (0..m.rows).map(|i| m.row(i).iter().map(|&v| BigInt::from(v)).collect()).collect()
}

/// Determinant by fraction-free (Bareiss) elimination.
pub fn determinant(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a = m.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

/// An integer solution of `M x = b`, if one exists.
pub fn solve_integer(m: &IntegerMatrix, b: &[i64]) -> Option<Vec<i64>> {
    assert_eq!(b.len(), m.rows);
    let snf = smith_normal_form(m, true);
    let t = snf.transforms.as_ref().expect("tracked");
    let bb: Vec<BigInt> = b.iter().map(|&v| BigInt::from(v)).collect();
    let lb: Vec<BigInt> = t.left.iter().map(|row| row.iter().zip(&bb).map(|(a, c)| a * c).sum()).collect();
    let mut y = vec![BigInt::zero(); m.cols];
    for (i, v) in lb.iter().enumerate() {
        if i < snf.rank() {
            let (q, r) = v.div_rem(&snf.factors[i]);
            if !r.is_zero() {
                return None;
            }
            y[i] = q;
        } else if !v.is_zero() {
            return None;
        }
    }
    t.right
        .iter()
        .map(|row| row.iter().zip(&y).map(|(a, c)| a * c).sum::<BigInt>().to_i64())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn check(m: &IntegerMatrix) -> SnfResult {
        let s = smith_normal_form(m, true);
        let t = s.transforms.as_ref().unwrap();
        let lm = big_matmul(&t.left, &to_big_matrix(m), m.rows(), m.cols());
        let lmr = big_matmul(&lm, &t.right, m.cols(), m.cols());
        assert_eq!(lmr, s.diagonal());
        assert!(determinant(&t.left).abs().is_one());
        assert!(determinant(&t.right).abs().is_one());
        let id_r = big_matmul(&t.left, &t.left_inv, m.rows(), m.rows());
        let id_c = big_matmul(&t.right, &t.right_inv, m.cols(), m.cols());
        assert_eq!(id_r, to_big_matrix(&IntegerMatrix::identity(m.rows())));
        assert_eq!(id_c, to_big_matrix(&IntegerMatrix::identity(m.cols())));
        for w in s.factors.windows(2) {
            assert!(w[1].is_multiple_of(&w[0]));
        }
        s
    }

    #[test]
    fn identity_and_zero() {
        let s = check(&IntegerMatrix::identity(4));
        assert_eq!(s.factors, vec![BigInt::one(); 4]);
        let z = check(&IntegerMatrix::zeros(3, 5));
        assert!(z.factors.is_empty());
        let e = check(&IntegerMatrix::zeros(0, 3));
        assert_eq!(e.rank(), 0);
    }

    #[test]
    fn two_by_two_example() {
        let m = IntegerMatrix::from_rows(&[vec![2, 4], vec![6, 8]], 2);
        let s = check(&m);
        assert_eq!(s.factors, vec![BigInt::from(2), BigInt::from(4)]);
        assert_eq!(determinant(&to_big_matrix(&m)), BigInt::from(-8));
    }

    #[test]
    fn integer_solve() {
        let m = IntegerMatrix::from_rows(&[vec![2, 4], vec![6, 8]], 2);
        let x = solve_integer(&m, &[2, 2]).unwrap();
        assert_eq!(m.mul_vec(&x), vec![2, 2]);
        assert!(solve_integer(&m, &[1, 0]).is_none());
    }

    #[test]
    fn overflow_falls_back_to_bigint() {
        let big = i64::MAX / 3;
        let m = IntegerMatrix::from_rows(&[vec![big, big - 1], vec![big - 7, big + 5]], 2);
        check(&m);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn reconstruction_is_exact(rows in 1usize..40, cols in 1usize..40, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let data: Vec<Vec<i64>> = (0..rows).map(|_| (0..cols).map(|_| if rng.gen_bool(0.4) { rng.gen_range(-9..10) } else { 0 }).collect()).collect();
            check(&IntegerMatrix::from_rows(&data, cols));
        }
    }
}
