//! Sparse exact matrices, Smith normal form over the integers, and the
//! linear solvers used by homology and homotopy search.

use crate::ring::{Coeff, CoefficientRing};
use num::bigint::BigInt;
use num::{Integer, One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// Sparse matrix over `Coeff`. Rows index the target basis, columns the
/// source basis, matching the convention `image(v) = M * v`.
/// No stored zero entries.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct SparseMatrix {
    pub rows: usize,
    pub cols: usize,
    entries: BTreeMap<(usize, usize), Coeff>,
}

impl SparseMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        SparseMatrix { rows, cols, entries: BTreeMap::new() }
    }
    pub fn identity(n: usize) -> Self {
        let mut m = SparseMatrix::zero(n, n);
        for i in 0..n {
            m.set(i, i, Coeff::one());
        }
        m
    }
    pub fn get(&self, r: usize, c: usize) -> Coeff {
        self.entries.get(&(r, c)).cloned().unwrap_or_else(Coeff::zero)
    }
    pub fn set(&mut self, r: usize, c: usize, v: Coeff) {
        assert!(r < self.rows && c < self.cols, "index out of range");
        if v.is_zero() {
            self.entries.remove(&(r, c));
        } else {
            self.entries.insert((r, c), v);
        }
    }
    pub fn add_to(&mut self, r: usize, c: usize, v: Coeff) {
        if v.is_zero() {
            return;
        }
        let cur = self.get(r, c);
        self.set(r, c, cur + v);
    }
    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }
    pub fn iter(&self) -> impl Iterator<Item = (&(usize, usize), &Coeff)> {
        self.entries.iter()
    }
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut m = SparseMatrix::zero(self.cols, self.rows);
        for ((r, c), v) in &self.entries {
            m.set(*c, *r, v.clone());
        }
        m
    }

    pub fn mul(&self, rhs: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in matrix product");
        let mut m = SparseMatrix::zero(self.rows, rhs.cols);
        // group rhs entries by row for the sparse product
        let mut by_row: BTreeMap<usize, Vec<(usize, &Coeff)>> = BTreeMap::new();
        for ((r, c), v) in &rhs.entries {
            by_row.entry(*r).or_default().push((*c, v));
        }
        for ((r, k), a) in &self.entries {
            if let Some(row) = by_row.get(k) {
                for (c, b) in row {
                    m.add_to(*r, *c, a.clone() * (*b).clone());
                }
            }
        }
        m
    }

    pub fn add(&self, rhs: &SparseMatrix) -> SparseMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut m = self.clone();
        for ((r, c), v) in &rhs.entries {
            m.add_to(*r, *c, v.clone());
        }
        m
    }

    pub fn scale(&self, k: &Coeff) -> SparseMatrix {
        let mut m = SparseMatrix::zero(self.rows, self.cols);
        for ((r, c), v) in &self.entries {
            m.set(*r, *c, k.clone() * v.clone());
        }
        m
    }

    pub fn neg(&self) -> SparseMatrix {
        self.scale(&Coeff::from_int(-1))
    }

    pub fn apply(&self, v: &[Coeff]) -> Vec<Coeff> {
        assert_eq!(v.len(), self.cols);
        let mut out = vec![Coeff::zero(); self.rows];
        for ((r, c), a) in &self.entries {
            if !v[*c].is_zero() {
                out[*r] += a.clone() * v[*c].clone();
            }
        }
        out
    }

    /// All entries integral?
    pub fn is_integral(&self) -> bool {
        self.entries.values().all(|v| v.is_integer())
    }

    /// Rank over the rationals, by fraction-free Gaussian elimination.
    pub fn rank_rational(&self) -> usize {
        let mut dense: Vec<Vec<Coeff>> =
            vec![vec![Coeff::zero(); self.cols]; self.rows];
        for ((r, c), v) in &self.entries {
            dense[*r][*c] = v.clone();
        }
        let mut rank = 0;
        let mut row = 0;
        for col in 0..self.cols {
            if row >= self.rows {
                break;
            }
            let piv = (row..self.rows).find(|&r| !dense[r][col].is_zero());
            let Some(p) = piv else { continue };
            dense.swap(row, p);
            let inv = dense[row][col].inv();
            for c in col..self.cols {
                let v = dense[row][c].clone() * inv.clone();
                dense[row][c] = v;
            }
            for r in 0..self.rows {
                if r != row && !dense[r][col].is_zero() {
                    let f = dense[r][col].clone();
                    for c in col..self.cols {
                        let sub = f.clone() * dense[row][c].clone();
                        dense[r][c] = dense[r][c].clone() - sub;
                    }
                }
            }
            rank += 1;
            row += 1;
        }
        rank
    }
}

impl fmt::Debug for SparseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[{}x{}]", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                write!(f, "{} ", self.get(r, c))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Dense integer matrix used internally by the Smith normal form.
#[derive(Clone, PartialEq, Eq)]
pub struct IntMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<BigInt>,
}

impl IntMat {
    pub fn zero(rows: usize, cols: usize) -> Self {
        IntMat { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }
    pub fn identity(n: usize) -> Self {
        let mut m = IntMat::zero(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }
    pub fn from_sparse(m: &SparseMatrix) -> Option<Self> {
        let mut out = IntMat::zero(m.rows, m.cols);
        for ((r, c), v) in m.iter() {
            out.data[r * m.cols + c] = v.as_bigint()?;
        }
        Some(out)
    }
    pub fn get(&self, r: usize, c: usize) -> &BigInt {
        &self.data[r * self.cols + c]
    }
    pub fn set(&mut self, r: usize, c: usize, v: BigInt) {
        self.data[r * self.cols + c] = v;
    }
    pub fn mul(&self, rhs: &IntMat) -> IntMat {
        assert_eq!(self.cols, rhs.rows);
        let mut m = IntMat::zero(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..rhs.cols {
                    let b = rhs.get(k, c);
                    if !b.is_zero() {
                        let cur = m.get(r, c) + a * b;
                        m.set(r, c, cur);
                    }
                }
            }
        }
        m
    }
    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }
    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for r in 0..self.rows {
            self.data.swap(r * self.cols + a, r * self.cols + b);
        }
    }
    fn add_row_multiple(&mut self, dst: usize, src: usize, k: &BigInt) {
        for c in 0..self.cols {
            let v = self.get(dst, c) + k * self.get(src, c);
            self.set(dst, c, v);
        }
    }
    fn add_col_multiple(&mut self, dst: usize, src: usize, k: &BigInt) {
        for r in 0..self.rows {
            let v = self.get(r, dst) + k * self.get(r, src);
            self.set(r, dst, v);
        }
    }
    fn negate_row(&mut self, r: usize) {
        for c in 0..self.cols {
            let v = -self.get(r, c).clone();
            self.set(r, c, v);
        }
    }
}

impl fmt::Debug for IntMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[{}x{}]", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                write!(f, "{} ", self.get(r, c))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Result of the Smith normal form: `u * m * v = d` with `u`, `v`
/// unimodular and `d` diagonal, each diagonal entry dividing the next.
/// `u_inv` and `v_inv` are maintained alongside for solver use.
pub struct Snf {
    pub d: IntMat,
    pub u: IntMat,
    pub u_inv: IntMat,
    pub v: IntMat,
    pub v_inv: IntMat,
}

impl Snf {
    pub fn diagonal(&self) -> Vec<BigInt> {
        let n = self.d.rows.min(self.d.cols);
        (0..n).map(|i| self.d.get(i, i).clone()).collect()
    }
    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|x| !x.is_zero()).count()
    }
}

/// Smith normal form of an integer matrix, with change of basis.
pub fn smith_normal_form(m: &IntMat) -> Snf {
    let mut d = m.clone();
    let (rows, cols) = (d.rows, d.cols);
    let mut u = IntMat::identity(rows);
    let mut u_inv = IntMat::identity(rows);
    let mut v = IntMat::identity(cols);
    let mut v_inv = IntMat::identity(cols);

    // Row op on d must be mirrored on u (same op) and u_inv (inverse op,
    // applied on columns). Likewise for column ops with v.
    let mut t = 0usize;
    while t < rows.min(cols) {
        // find a pivot: smallest nonzero |entry| in the remaining block
        let mut piv: Option<(usize, usize)> = None;
        for r in t..rows {
            for c in t..cols {
                if !d.get(r, c).is_zero() {
                    match piv {
                        None => piv = Some((r, c)),
                        Some((pr, pc)) => {
                            if d.get(r, c).abs() < d.get(pr, pc).abs() {
                                piv = Some((r, c));
                            }
                        }
                    }
                }
            }
        }
        let Some((pr, pc)) = piv else { break };
        d.swap_rows(t, pr);
        u.swap_rows(t, pr);
        u_inv.swap_cols(t, pr);
        d.swap_cols(t, pc);
        v.swap_cols(t, pc);
        v_inv.swap_rows(t, pc);

        // reduce column and row below/right of pivot until clean
        loop {
            let mut dirty = false;
            for r in t + 1..rows {
                if !d.get(r, t).is_zero() {
                    let q = floor_div(d.get(r, t), d.get(t, t));
                    if !q.is_zero() {
                        let nq = -q.clone();
                        d.add_row_multiple(r, t, &nq);
                        u.add_row_multiple(r, t, &nq);
                        u_inv.add_col_multiple(t, r, &q);
                    }
                    if !d.get(r, t).is_zero() {
                        // remainder nonzero: swap up (it is smaller) and retry
                        d.swap_rows(t, r);
                        u.swap_rows(t, r);
                        u_inv.swap_cols(t, r);
                        dirty = true;
                    }
                }
            }
            for c in t + 1..cols {
                if !d.get(t, c).is_zero() {
                    let q = floor_div(d.get(t, c), d.get(t, t));
                    if !q.is_zero() {
                        let nq = -q.clone();
                        d.add_col_multiple(c, t, &nq);
                        v.add_col_multiple(c, t, &nq);
                        v_inv.add_row_multiple(t, c, &q);
                    }
                    if !d.get(t, c).is_zero() {
                        d.swap_cols(t, c);
                        v.swap_cols(t, c);
                        v_inv.swap_rows(t, c);
                        dirty = true;
                    }
                }
            }
            if !dirty {
                break;
            }
        }

        // enforce divisibility of the remaining block by the pivot
        let mut needs_restart = false;
        'outer: for r in t + 1..rows {
            for c in t + 1..cols {
                if !(d.get(r, c) % d.get(t, t)).is_zero() {
                    // add row r to row t, reprocess this pivot
                    let one = BigInt::one();
                    let neg_one = -BigInt::one();
                    d.add_row_multiple(t, r, &one);
                    u.add_row_multiple(t, r, &one);
                    u_inv.add_col_multiple(r, t, &neg_one);
                    needs_restart = true;
                    break 'outer;
                }
            }
        }
        if needs_restart {
            continue;
        }

        if d.get(t, t).is_negative() {
            d.negate_row(t);
            u.negate_row(t);
            // inverse of row negation is column negation on u_inv
            for r in 0..rows {
                let x = -u_inv.get(r, t).clone();
                u_inv.set(r, t, x);
            }
        }
        t += 1;
    }
    Snf { d, u, u_inv, v, v_inv }
}

fn floor_div(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_floor(b)
}

/// Solve `m x = b` over the integers. Returns `None` if no integral
/// solution exists.
pub fn solve_integer(m: &IntMat, b: &[BigInt]) -> Option<Vec<BigInt>> {
    assert_eq!(b.len(), m.rows);
    let snf = smith_normal_form(m);
    // u m v = d, so m x = b  <=>  d (v^{-1} x) = u b
    let ub: Vec<BigInt> = (0..m.rows)
        .map(|r| (0..m.rows).map(|c| snf.u.get(r, c) * &b[c]).sum())
        .collect();
    let mut y = vec![BigInt::zero(); m.cols];
    for i in 0..m.rows.min(m.cols) {
        let di = snf.d.get(i, i);
        if di.is_zero() {
            if !ub[i].is_zero() {
                return None;
            }
        } else {
            if !(&ub[i] % di).is_zero() {
                return None;
            }
            y[i] = &ub[i] / di;
        }
    }
    for i in m.cols.min(m.rows)..m.rows {
        if !ub[i].is_zero() {
            return None;
        }
    }
    // x = v y
    let x: Vec<BigInt> = (0..m.cols)
        .map(|r| (0..m.cols).map(|c| snf.v.get(r, c) * &y[c]).sum())
        .collect();
    Some(x)
}

/// Solve `m x = b` over the rationals by dense elimination.
pub fn solve_rational(m: &SparseMatrix, b: &[Coeff]) -> Option<Vec<Coeff>> {
    assert_eq!(b.len(), m.rows);
    let rows = m.rows;
    let cols = m.cols;
    let mut aug: Vec<Vec<Coeff>> = vec![vec![Coeff::zero(); cols + 1]; rows];
    for ((r, c), v) in m.iter() {
        aug[*r][*c] = v.clone();
    }
    for (r, v) in b.iter().enumerate() {
        aug[r][cols] = v.clone();
    }
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        if row >= rows {
            break;
        }
        let piv = (row..rows).find(|&r| !aug[r][col].is_zero());
        let Some(p) = piv else { continue };
        aug.swap(row, p);
        let inv = aug[row][col].inv();
        for c in col..=cols {
            aug[row][c] = aug[row][c].clone() * inv.clone();
        }
        for r in 0..rows {
            if r != row && !aug[r][col].is_zero() {
                let f = aug[r][col].clone();
                for c in col..=cols {
                    let sub = f.clone() * aug[row][c].clone();
                    aug[r][c] = aug[r][c].clone() - sub;
                }
            }
        }
        pivots.push((row, col));
        row += 1;
    }
    // inconsistent?
    for r in row..rows {
        if !aug[r][cols].is_zero() {
            return None;
        }
    }
    let mut x = vec![Coeff::zero(); cols];
    for (r, c) in pivots {
        x[c] = aug[r][cols].clone();
    }
    Some(x)
}

/// Solve `m x = b` in the requested ring.
pub fn solve(m: &SparseMatrix, b: &[Coeff], ring: CoefficientRing) -> Option<Vec<Coeff>> {
    match ring {
        CoefficientRing::Integers => {
            let im = IntMat::from_sparse(m)?;
            let ib: Option<Vec<BigInt>> = b.iter().map(|c| c.as_bigint()).collect();
            let x = solve_integer(&im, &ib?)?;
            Some(x.into_iter().map(|v| Coeff(num::BigRational::from_integer(v))).collect())
        }
        _ => {
            let x = solve_rational(m, b)?;
            if ring == CoefficientRing::IntegersWithHalf {
                // scale-free: rational solution whose denominators are powers
                // of two is accepted; otherwise retry over scaled lattice.
                if x.iter().all(|c| ring.contains(c)) {
                    Some(x)
                } else {
                    solve_dyadic(m, b)
                }
            } else {
                Some(x)
            }
        }
    }
}

/// Solve over Z[1/2]: clear denominators by powers of two and solve over Z
/// with scaled right-hand sides until the power is large enough.
fn solve_dyadic(m: &SparseMatrix, b: &[Coeff]) -> Option<Vec<Coeff>> {
    // common denominator of m and b is a power of two times odd part; with
    // entries in Z[1/2], scaling by 2^k makes everything integral
    let mut k = 0u32;
    let scaled = |c: &Coeff, k: u32| -> Option<BigInt> {
        let mut v = c.0.clone();
        for _ in 0..k {
            v *= num::BigRational::from_integer(BigInt::from(2));
        }
        if v.is_integer() {
            Some(v.to_integer())
        } else {
            None
        }
    };
    // find k making matrix and rhs integral; entries are dyadic by contract
    'grow: while k < 64 {
        for ((_, _), v) in m.iter() {
            if scaled(v, k).is_none() {
                k += 1;
                continue 'grow;
            }
        }
        for v in b {
            if scaled(v, k).is_none() {
                k += 1;
                continue 'grow;
            }
        }
        break;
    }
    assert!(k < 64, "solve_dyadic called with non-dyadic data");
    // With M' = 2^k M integral: solve M' x = 2^{k+j} b over Z for growing j;
    // then x / 2^j solves M x = b in Z[1/2].
    let mut im = IntMat::zero(m.rows, m.cols);
    for ((r, c), v) in m.iter() {
        im.set(*r, *c, scaled(v, k).unwrap());
    }
    for j in 0..16u32 {
        let ib: Vec<BigInt> = b.iter().map(|c| scaled(c, k + j).unwrap()).collect();
        if let Some(x) = solve_integer(&im, &ib) {
            let half = Coeff::from_frac(1, 2);
            let mut scale = Coeff::one();
            for _ in 0..j {
                scale *= half.clone();
            }
            return Some(
                x.into_iter()
                    .map(|v| Coeff(num::BigRational::from_integer(v)) * scale.clone())
                    .collect(),
            );
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int_mat(rows: usize, cols: usize, vals: &[i64]) -> IntMat {
        let mut m = IntMat::zero(rows, cols);
        for (i, v) in vals.iter().enumerate() {
            m.set(i / cols, i % cols, BigInt::from(*v));
        }
        m
    }

    fn check_snf(m: &IntMat) {
        let snf = smith_normal_form(m);
        // u m v = d
        let umv = snf.u.mul(m).mul(&snf.v);
        assert_eq!(umv, snf.d, "u*m*v != d");
        // u * u_inv = id, v * v_inv = id
        assert_eq!(snf.u.mul(&snf.u_inv), IntMat::identity(m.rows));
        assert_eq!(snf.v.mul(&snf.v_inv), IntMat::identity(m.cols));
        // diagonal, divisibility
        for r in 0..snf.d.rows {
            for c in 0..snf.d.cols {
                if r != c {
                    assert!(snf.d.get(r, c).is_zero(), "off-diagonal in SNF");
                }
            }
        }
        let diag = snf.diagonal();
        for w in diag.windows(2) {
            if !w[0].is_zero() && !w[1].is_zero() {
                assert!((&w[1] % &w[0]).is_zero(), "divisibility broken");
            }
            if w[0].is_zero() {
                assert!(w[1].is_zero());
            }
        }
    }

    #[test]
    fn snf_diag_2_3() {
        let m = int_mat(2, 2, &[2, 0, 0, 3]);
        let snf = smith_normal_form(&m);
        assert_eq!(snf.diagonal(), vec![BigInt::from(1), BigInt::from(6)]);
        check_snf(&m);
    }

    #[test]
    fn snf_zero() {
        let m = int_mat(2, 3, &[0; 6]);
        let snf = smith_normal_form(&m);
        assert_eq!(snf.rank(), 0);
        assert_eq!(snf.u, IntMat::identity(2));
        assert_eq!(snf.v, IntMat::identity(3));
    }

    #[test]
    fn snf_2468() {
        let m = int_mat(2, 2, &[2, 4, 6, 8]);
        let snf = smith_normal_form(&m);
        assert_eq!(snf.diagonal(), vec![BigInt::from(2), BigInt::from(4)]);
        check_snf(&m);
    }

    #[test]
    fn snf_randomized() {
        // deterministic pseudo-random matrices up to 20x20
        let mut seed = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            seed
        };
        for trial in 0..25 {
            let rows = 1 + (next() % 20) as usize;
            let cols = 1 + (next() % 20) as usize;
            let mut m = IntMat::zero(rows, cols);
            for r in 0..rows {
                for c in 0..cols {
                    if next() % 3 == 0 {
                        let v = (next() % 19) as i64 - 9;
                        m.set(r, c, BigInt::from(v));
                    }
                }
            }
            check_snf(&m);
            let _ = trial;
        }
    }

    #[test]
    fn integer_solver() {
        let m = int_mat(2, 2, &[2, 0, 0, 3]);
        let b = vec![BigInt::from(4), BigInt::from(9)];
        let x = solve_integer(&m, &b).unwrap();
        assert_eq!(x, vec![BigInt::from(2), BigInt::from(3)]);
        let b_bad = vec![BigInt::from(1), BigInt::from(0)];
        assert!(solve_integer(&m, &b_bad).is_none());
    }

    #[test]
    fn rational_solver() {
        let mut m = SparseMatrix::zero(2, 3);
        m.set(0, 0, Coeff::from_int(2));
        m.set(0, 2, Coeff::from_int(1));
        m.set(1, 1, Coeff::from_int(3));
        let b = vec![Coeff::from_int(1), Coeff::from_int(1)];
        let x = solve_rational(&m, &b).unwrap();
        let lhs = m.apply(&x);
        assert_eq!(lhs, b);
    }
}
