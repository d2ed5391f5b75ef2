//! Exact linear algebra over Z, Z/m and Q.
//!
//! Everything is built on sparse integer matrices and Smith normal form.
//! Homology over Z/m is computed from the lifted integer matrices, homology
//! over Q from integer ranks; no floating point appears anywhere.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LinalgError {
    #[error("composition d_out . d_in is nonzero at entry ({0}, {1})")]
    CompositionNonzero(usize, usize),
    #[error("Poincare series truncation mismatch: {0} vs {1}")]
    TruncationMismatch(usize, usize),
    #[error("no integral solution")]
    NoSolution,
}

/// Coefficient ring tag. `mu` is the additive exponent: m for Z/m, 0 otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoefficientRing {
    Integers,
    Rationals,
    ModM(u64),
}

impl CoefficientRing {
    pub fn mu(&self) -> u64 {
        match self {
            CoefficientRing::ModM(m) => *m,
            _ => 0,
        }
    }

    pub fn is_field(&self) -> bool {
        match self {
            CoefficientRing::Rationals => true,
            CoefficientRing::ModM(m) => is_prime(*m),
            CoefficientRing::Integers => false,
        }
    }

    /// Normalize an integer coefficient in this ring; None when it is zero.
    pub fn normalize(&self, c: BigInt) -> Option<BigInt> {
        match self {
            CoefficientRing::ModM(m) => {
                let m = BigInt::from(*m);
                let mut r = c % &m;
                if r.is_negative() {
                    r += &m;
                }
                if r.is_zero() {
                    None
                } else {
                    Some(r)
                }
            }
            _ => {
                if c.is_zero() {
                    None
                } else {
                    Some(c)
                }
            }
        }
    }
}

impl fmt::Display for CoefficientRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoefficientRing::Integers => write!(f, "Z"),
            CoefficientRing::Rationals => write!(f, "Q"),
            CoefficientRing::ModM(m) => write!(f, "Z/{m}"),
        }
    }
}

pub fn is_prime(n: u64) -> bool {
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

pub fn smallest_prime_factor(n: u64) -> Option<u64> {
    if n < 2 {
        return None;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return Some(d);
        }
        d += 1;
    }
    Some(n)
}

/// Sparse matrix with arbitrary-precision integer entries.
///
/// Stored entries are always nonzero; row/column counts are explicit so zero
/// matrices of any shape are representable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: BTreeMap<(usize, usize), BigInt>,
}

impl IntMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, entries: BTreeMap::new() }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn from_rows(data: &[&[i64]]) -> Self {
        let rows = data.len();
        let cols = data.first().map_or(0, |r| r.len());
        let mut m = Self::zero(rows, cols);
        for (i, row) in data.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                m.set(i, j, BigInt::from(*v));
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, r: usize, c: usize) -> BigInt {
        self.entries.get(&(r, c)).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn set(&mut self, r: usize, c: usize, v: BigInt) {
        assert!(r < self.rows && c < self.cols, "index out of bounds");
        if v.is_zero() {
            self.entries.remove(&(r, c));
        } else {
            self.entries.insert((r, c), v);
        }
    }

    pub fn add_to(&mut self, r: usize, c: usize, v: &BigInt) {
        if v.is_zero() {
            return;
        }
        let cur = self.get(r, c);
        self.set(r, c, cur + v);
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(usize, usize), &BigInt)> {
        self.entries.iter()
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut t = IntMatrix::zero(self.cols, self.rows);
        for (&(r, c), v) in &self.entries {
            t.set(c, r, v.clone());
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "shape mismatch in matrix product");
        let mut by_row: Vec<Vec<(usize, &BigInt)>> = vec![Vec::new(); other.rows];
        for (&(r, c), v) in &other.entries {
            by_row[r].push((c, v));
        }
        let mut out = IntMatrix::zero(self.rows, other.cols);
        for (&(r, k), v) in &self.entries {
            for &(c, w) in &by_row[k] {
                out.add_to(r, c, &(v * w));
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len());
        let mut out = vec![BigInt::zero(); self.rows];
        for (&(r, c), e) in &self.entries {
            if !v[c].is_zero() {
                out[r] += e * &v[c];
            }
        }
        out
    }

    pub fn column(&self, c: usize) -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); self.rows];
        for (&(r, cc), v) in &self.entries {
            if cc == c {
                out[r] = v.clone();
            }
        }
        out
    }

    pub fn hstack(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.rows, other.rows);
        let mut m = IntMatrix::zero(self.rows, self.cols + other.cols);
        for (&(r, c), v) in &self.entries {
            m.set(r, c, v.clone());
        }
        for (&(r, c), v) in &other.entries {
            m.set(r, self.cols + c, v.clone());
        }
        m
    }

    pub fn scale(&self, k: &BigInt) -> IntMatrix {
        let mut m = IntMatrix::zero(self.rows, self.cols);
        if k.is_zero() {
            return m;
        }
        for (&(r, c), v) in &self.entries {
            m.set(r, c, v * k);
        }
        m
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let keys: Vec<(usize, usize)> = self
            .entries
            .keys()
            .filter(|&&(r, _)| r == a || r == b)
            .cloned()
            .collect();
        let mut stash: Vec<((usize, usize), BigInt)> = Vec::new();
        for k in keys {
            let v = self.entries.remove(&k).unwrap();
            let nr = if k.0 == a { b } else { a };
            stash.push(((nr, k.1), v));
        }
        for (k, v) in stash {
            self.entries.insert(k, v);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let keys: Vec<(usize, usize)> = self
            .entries
            .keys()
            .filter(|&&(_, c)| c == a || c == b)
            .cloned()
            .collect();
        let mut stash: Vec<((usize, usize), BigInt)> = Vec::new();
        for k in keys {
            let v = self.entries.remove(&k).unwrap();
            let nc = if k.1 == a { b } else { a };
            stash.push(((k.0, nc), v));
        }
        for (k, v) in stash {
            self.entries.insert(k, v);
        }
    }

    /// row[dst] += k * row[src]
    fn row_axpy(&mut self, dst: usize, src: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        let src_entries: Vec<(usize, BigInt)> = self
            .entries
            .range((src, 0)..(src + 1, 0))
            .map(|(&(_, c), v)| (c, v.clone()))
            .collect();
        for (c, v) in src_entries {
            self.add_to(dst, c, &(k * v));
        }
    }

    /// col[dst] += k * col[src]
    fn col_axpy(&mut self, dst: usize, src: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        let src_entries: Vec<(usize, BigInt)> = self
            .entries
            .iter()
            .filter(|(&(_, c), _)| c == src)
            .map(|(&(r, _), v)| (r, v.clone()))
            .collect();
        for (r, v) in src_entries {
            self.add_to(r, dst, &(k * v));
        }
    }

    fn negate_row(&mut self, r: usize) {
        let keys: Vec<(usize, usize)> = self.entries.range((r, 0)..(r + 1, 0)).map(|(&k, _)| k).collect();
        for k in keys {
            let v = self.entries.get_mut(&k).unwrap();
            *v = -v.clone();
        }
    }

    fn negate_col(&mut self, c: usize) {
        let keys: Vec<(usize, usize)> = self.entries.keys().filter(|&&(_, cc)| cc == c).cloned().collect();
        for k in keys {
            let v = self.entries.get_mut(&k).unwrap();
            *v = -v.clone();
        }
    }
}

/// Result of a Smith normal form computation: u * m * v = s with u, v
/// unimodular and s diagonal with the divisibility chain d1 | d2 | ...
/// `vinv` and `uinv` are the inverses, kept because kernel and image
/// coordinates need them.
pub struct SmithForm {
    pub s: IntMatrix,
    pub u: IntMatrix,
    pub v: IntMatrix,
    pub vinv: IntMatrix,
    pub uinv: IntMatrix,
    pub rank: usize,
}

impl SmithForm {
    pub fn diagonal(&self) -> Vec<BigInt> {
        let n = self.s.rows().min(self.s.cols());
        (0..n).map(|i| self.s.get(i, i)).collect()
    }
}

/// Smith normal form with minimal-absolute-value pivoting to keep
/// intermediate entries small.
pub fn smith_normal_form(m: &IntMatrix) -> SmithForm {
    let rows = m.rows();
    let cols = m.cols();
    let mut s = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);
    let mut vinv = IntMatrix::identity(cols);
    let mut uinv = IntMatrix::identity(rows);

    let mut t = 0usize;
    while t < rows && t < cols {
        // locate minimal nonzero |entry| in the remaining block
        let mut pivot: Option<(usize, usize)> = None;
        let mut best: Option<BigInt> = None;
        for (&(r, c), val) in s.iter() {
            if r < t || c < t {
                continue;
            }
            let a = val.abs();
            if best.as_ref().map_or(true, |b| &a < b) {
                best = Some(a);
                pivot = Some((r, c));
            }
        }
        let (pr, pc) = match pivot {
            Some(p) => p,
            None => break,
        };
        // move pivot to (t, t)
        if pr != t {
            s.swap_rows(pr, t);
            u.swap_rows(pr, t);
            uinv.swap_cols(pr, t);
        }
        if pc != t {
            s.swap_cols(pc, t);
            v.swap_cols(pc, t);
            vinv.swap_rows(pc, t);
        }

        loop {
            let p = s.get(t, t);
            debug_assert!(!p.is_zero());
            let mut dirty = false;
            // clear column t below/above
            let col_rows: Vec<usize> = s
                .iter()
                .filter(|(&(r, c), _)| c == t && r != t)
                .map(|(&(r, _), _)| r)
                .collect();
            for r in col_rows {
                let a = s.get(r, t);
                if a.is_zero() {
                    continue;
                }
                let q = div_round(&a, &p);
                if !q.is_zero() {
                    let nq = -&q;
                    s.row_axpy(r, t, &nq);
                    u.row_axpy(r, t, &nq);
                    uinv.col_axpy(t, r, &q);
                }
                if !s.get(r, t).is_zero() {
                    // remainder smaller than pivot: swap it up and restart
                    s.swap_rows(r, t);
                    u.swap_rows(r, t);
                    uinv.swap_cols(r, t);
                    dirty = true;
                    break;
                }
            }
            if dirty {
                continue;
            }
            let row_cols: Vec<usize> = s
                .iter()
                .filter(|(&(r, c), _)| r == t && c != t)
                .map(|(&(_, c), _)| c)
                .collect();
            for c in row_cols {
                let a = s.get(t, c);
                if a.is_zero() {
                    continue;
                }
                let p = s.get(t, t);
                let q = div_round(&a, &p);
                if !q.is_zero() {
                    let nq = -&q;
                    s.col_axpy(c, t, &nq);
                    v.col_axpy(c, t, &nq);
                    vinv.row_axpy(t, c, &q);
                }
                if !s.get(t, c).is_zero() {
                    s.swap_cols(c, t);
                    v.swap_cols(c, t);
                    vinv.swap_rows(c, t);
                    dirty = true;
                    break;
                }
            }
            if dirty {
                continue;
            }
            break;
        }
        t += 1;
    }

    // enforce the divisibility chain
    let n = rows.min(cols);
    let mut i = 0usize;
    while i + 1 < n {
        let a = s.get(i, i);
        if a.is_zero() {
            break;
        }
        let mut fixed = true;
        for j in (i + 1)..n {
            let b = s.get(j, j);
            if b.is_zero() {
                continue;
            }
            if !(&b % &a).is_zero() {
                // fold column j into column i and re-reduce the 2x2 block
                s.col_axpy(i, j, &BigInt::one());
                v.col_axpy(i, j, &BigInt::one());
                vinv.row_axpy(j, i, &(-BigInt::one()));
                reduce_two(&mut s, &mut u, &mut uinv, &mut v, &mut vinv, i, j);
                fixed = false;
                break;
            }
        }
        if fixed {
            i += 1;
        }
    }

    // normalize diagonal signs
    for i in 0..n {
        if s.get(i, i).is_negative() {
            s.negate_row(i);
            u.negate_row(i);
            uinv.negate_col(i);
        }
    }

    let rank = (0..n).filter(|&i| !s.get(i, i).is_zero()).count();
    SmithForm { s, u, v, vinv, uinv, rank }
}

/// gcd-style reduction of the 2x2 diagonal block (i, j) after a fold.
fn reduce_two(s: &mut IntMatrix, u: &mut IntMatrix, uinv: &mut IntMatrix, v: &mut IntMatrix, vinv: &mut IntMatrix, i: usize, j: usize) {
    loop {
        let a = s.get(i, i);
        if a.is_zero() {
            s.swap_rows(i, j);
            u.swap_rows(i, j);
            uinv.swap_cols(i, j);
            s.swap_cols(i, j);
            v.swap_cols(i, j);
            vinv.swap_rows(i, j);
            continue;
        }
        // clear column i
        let b = s.get(j, i);
        if !b.is_zero() {
            let q = div_round(&b, &a);
            let nq = -&q;
            s.row_axpy(j, i, &nq);
            u.row_axpy(j, i, &nq);
            uinv.col_axpy(i, j, &q);
            if !s.get(j, i).is_zero() {
                s.swap_rows(i, j);
                u.swap_rows(i, j);
                uinv.swap_cols(i, j);
                continue;
            }
        }
        let c = s.get(i, j);
        if !c.is_zero() {
            let q = div_round(&c, &a);
            let nq = -&q;
            s.col_axpy(j, i, &nq);
            v.col_axpy(j, i, &nq);
            vinv.row_axpy(i, j, &q);
            if !s.get(i, j).is_zero() {
                s.swap_cols(i, j);
                v.swap_cols(i, j);
                vinv.swap_rows(i, j);
                continue;
            }
        }
        break;
    }
}

/// Rounded division: quotient q minimizing |a - q b|.
fn div_round(a: &BigInt, b: &BigInt) -> BigInt {
    let (q, r) = a.div_rem(b);
    let two_r = BigInt::from(2) * r.abs();
    if two_r > b.abs() {
        if (a.is_negative()) ^ (b.is_negative()) {
            q - 1
        } else {
            q + 1
        }
    } else {
        q
    }
}

/// A finitely generated module over the coefficient ring presented as
/// free rank plus the invariant-factor torsion chain d1 | d2 | ...
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct HomologyGroup {
    pub free_rank: usize,
    pub torsion: Vec<BigInt>,
}

impl HomologyGroup {
    pub fn free(rank: usize) -> Self {
        HomologyGroup { free_rank: rank, torsion: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }

    /// Cardinality of a minimal generating set over the given ring.
    pub fn generators(&self) -> usize {
        self.free_rank + self.torsion.len()
    }
}

impl fmt::Display for HomologyGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        if self.free_rank > 0 {
            if self.free_rank == 1 {
                parts.push("Z".to_string());
            } else {
                parts.push(format!("Z^{}", self.free_rank));
            }
        }
        for t in &self.torsion {
            parts.push(format!("Z/{}", t));
        }
        write!(f, "{}", parts.join(" + "))
    }
}

/// Homology ker(d_out) / im(d_in) of a three-term complex over `ring`.
///
/// Matrices are the integral lifts; over Z/m the composite only has to vanish
/// mod m, over Z and Q it must vanish exactly.
pub fn homology_at(
    d_in: &IntMatrix,
    d_out: &IntMatrix,
    ring: CoefficientRing,
) -> Result<HomologyGroup, LinalgError> {
    assert_eq!(d_out.cols(), d_in.rows(), "middle dimension mismatch");
    let comp = d_out.mul(d_in);
    let mu = ring.mu();
    for (&(r, c), v) in comp.iter() {
        let bad = if mu == 0 { !v.is_zero() } else { !(v % BigInt::from(mu)).is_zero() };
        if bad {
            return Err(LinalgError::CompositionNonzero(r, c));
        }
    }
    let mid = d_in.rows();
    match ring {
        CoefficientRing::Rationals => {
            let r_out = rank_rational(d_out);
            let r_in = rank_rational(d_in);
            Ok(HomologyGroup::free(mid - r_out - r_in))
        }
        CoefficientRing::Integers => {
            let out_snf = smith_normal_form(d_out);
            // kernel coordinates: columns of V at free indices
            let free_idx: Vec<usize> = (0..d_out.cols())
                .filter(|&i| i >= out_snf.rank)
                .collect();
            let k = free_idx.len();
            // express the image in kernel coordinates: W = Vinv * d_in restricted
            let w_full = out_snf.vinv.mul(d_in);
            let mut w = IntMatrix::zero(k, d_in.cols());
            for (pos, &i) in free_idx.iter().enumerate() {
                for c in 0..d_in.cols() {
                    let val = w_full.get(i, c);
                    if !val.is_zero() {
                        w.set(pos, c, val);
                    }
                }
            }
            Ok(cokernel(&w, k))
        }
        CoefficientRing::ModM(m) => {
            let m_big = BigInt::from(m);
            let out_snf = smith_normal_form(d_out);
            let diag = out_snf.diagonal();
            // kernel of (d_out mod m): columns V_i scaled by m / gcd(s_i, m)
            let mut mult: Vec<BigInt> = Vec::with_capacity(d_out.cols());
            for i in 0..d_out.cols() {
                let s_i = if i < diag.len() { diag[i].clone() } else { BigInt::zero() };
                let g = s_i.gcd(&m_big);
                mult.push(&m_big / g);
            }
            // generators of the submodule to quotient by, in kernel coordinates:
            // columns of Vinv*d_in and Vinv*mI, each row i divided by mult[i]
            let w_in = out_snf.vinv.mul(d_in);
            let n_cols = d_in.cols() + d_out.cols();
            let mut w = IntMatrix::zero(d_out.cols(), n_cols);
            for (&(r, c), v) in w_in.iter() {
                let q = exact_div(v, &mult[r]);
                w.set(r, c, q);
            }
            for i in 0..d_out.cols() {
                // m * Vinv column i, scaled
                for r in 0..d_out.cols() {
                    let v = out_snf.vinv.get(r, i);
                    if v.is_zero() {
                        continue;
                    }
                    let q = exact_div(&(v * &m_big), &mult[r]);
                    w.set(r, d_in.cols() + i, q);
                }
            }
            let group = cokernel(&w, d_out.cols());
            // all invariant factors divide m; report factors equal to m as free
            let mut free = group.free_rank;
            let mut torsion = Vec::new();
            for t in group.torsion {
                if t == m_big {
                    free += 1;
                } else {
                    torsion.push(t);
                }
            }
            Ok(HomologyGroup { free_rank: free, torsion })
        }
    }
}

fn exact_div(a: &BigInt, b: &BigInt) -> BigInt {
    let (q, r) = a.div_rem(b);
    assert!(r.is_zero(), "non-exact division in homology reduction");
    q
}

/// Cokernel Z^rows / im(w) as free rank + invariant factors > 1.
fn cokernel(w: &IntMatrix, rows: usize) -> HomologyGroup {
    let snf = smith_normal_form(w);
    let diag = snf.diagonal();
    let mut torsion = Vec::new();
    let mut rank_hit = 0usize;
    for d in diag {
        if d.is_zero() {
            continue;
        }
        rank_hit += 1;
        if !d.is_one() {
            torsion.push(d);
        }
    }
    HomologyGroup { free_rank: rows - rank_hit, torsion }
}

/// Rank of an integer matrix over Q via fraction-free elimination.
pub fn rank_rational(m: &IntMatrix) -> usize {
    // sparse fraction-free Gaussian elimination; rows held as maps
    let mut rows: Vec<BTreeMap<usize, BigInt>> = vec![BTreeMap::new(); m.rows()];
    for (&(r, c), v) in m.iter() {
        rows[r].insert(c, v.clone());
    }
    let mut rank = 0usize;
    let mut used = vec![false; m.rows()];
    for col in 0..m.cols() {
        // pick the unused row with a nonzero entry in `col` of minimal support
        let mut pick: Option<usize> = None;
        let mut best = usize::MAX;
        for (ri, row) in rows.iter().enumerate() {
            if used[ri] || !row.contains_key(&col) {
                continue;
            }
            if row.len() < best {
                best = row.len();
                pick = Some(ri);
            }
        }
        let p = match pick {
            Some(p) => p,
            None => continue,
        };
        used[p] = true;
        rank += 1;
        let pv = rows[p].get(&col).unwrap().clone();
        let prow: Vec<(usize, BigInt)> = rows[p].iter().map(|(&c, v)| (c, v.clone())).collect();
        for ri in 0..rows.len() {
            if used[ri] || !rows[ri].contains_key(&col) {
                continue;
            }
            let rv = rows[ri].get(&col).unwrap().clone();
            // row_i := pv * row_i - rv * prow, then divide by content
            let mut newrow: BTreeMap<usize, BigInt> = BTreeMap::new();
            for (c, v) in rows[ri].iter() {
                newrow.insert(*c, v * &pv);
            }
            for (c, v) in &prow {
                let e = newrow.entry(*c).or_insert_with(BigInt::zero);
                *e -= v * &rv;
            }
            newrow.retain(|_, v| !v.is_zero());
            if !newrow.is_empty() {
                let mut g = BigInt::zero();
                for v in newrow.values() {
                    g = g.gcd(v);
                }
                if !g.is_one() {
                    for v in newrow.values_mut() {
                        *v = exact_div(v, &g);
                    }
                }
            }
            rows[ri] = newrow;
        }
    }
    rank
}

/// Rank of an integer matrix over Z/p, p prime.
pub fn rank_mod_p(m: &IntMatrix, p: u64) -> usize {
    let pb = BigInt::from(p);
    let mut rows: Vec<BTreeMap<usize, u64>> = vec![BTreeMap::new(); m.rows()];
    for (&(r, c), v) in m.iter() {
        let mut red = v % &pb;
        if red.is_negative() {
            red += &pb;
        }
        let red: u64 = red.try_into().unwrap();
        if red != 0 {
            rows[r].insert(c, red);
        }
    }
    let mut rank = 0;
    let mut used = vec![false; m.rows()];
    for col in 0..m.cols() {
        let mut pick = None;
        let mut best = usize::MAX;
        for (ri, row) in rows.iter().enumerate() {
            if used[ri] || !row.contains_key(&col) {
                continue;
            }
            if row.len() < best {
                best = row.len();
                pick = Some(ri);
            }
        }
        let pi = match pick {
            Some(pi) => pi,
            None => continue,
        };
        used[pi] = true;
        rank += 1;
        let pv = rows[pi][&col];
        let pinv = mod_inverse(pv, p);
        let prow: Vec<(usize, u64)> = rows[pi].iter().map(|(&c, &v)| (c, v)).collect();
        for ri in 0..rows.len() {
            if used[ri] || !rows[ri].contains_key(&col) {
                continue;
            }
            let rv = rows[ri][&col];
            let factor = (rv as u128 * pinv as u128 % p as u128) as u64;
            let mut newrow = rows[ri].clone();
            for &(c, v) in &prow {
                let sub = (v as u128 * factor as u128 % p as u128) as u64;
                let e = newrow.entry(c).or_insert(0);
                *e = ((*e as u128 + p as u128 - sub as u128) % p as u128) as u64;
                if *e == 0 {
                    newrow.remove(&c);
                }
            }
            rows[ri] = newrow;
        }
    }
    rank
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    // extended Euclid
    let (mut t, mut newt) = (0i128, 1i128);
    let (mut r, mut newr) = (p as i128, a as i128);
    while newr != 0 {
        let q = r / newr;
        (t, newt) = (newt, t - q * newt);
        (r, newr) = (newr, r - q * newr);
    }
    assert_eq!(r, 1, "not invertible");
    (((t % p as i128) + p as i128) % p as i128) as u64
}

/// Solve m x = b over Z. Returns None when no integral solution exists.
pub fn solve_integer(m: &IntMatrix, b: &[BigInt]) -> Option<Vec<BigInt>> {
    assert_eq!(m.rows(), b.len());
    let snf = smith_normal_form(m);
    let ub = snf.u.mul_vec(b);
    let mut y = vec![BigInt::zero(); m.cols()];
    let diag = snf.diagonal();
    for i in 0..m.rows() {
        let s_i = if i < diag.len() { diag[i].clone() } else { BigInt::zero() };
        if s_i.is_zero() {
            if !ub[i].is_zero() {
                return None;
            }
        } else {
            let (q, r) = ub[i].div_rem(&s_i);
            if !r.is_zero() {
                return None;
            }
            if i < m.cols() {
                y[i] = q;
            } else if !q.is_zero() {
                return None;
            }
        }
    }
    Some(snf.v.mul_vec(&y))
}

/// Solve m x = b modulo `modulus` (x integral, m x ≡ b). modulus 0 means exact.
pub fn solve_mod(m: &IntMatrix, b: &[BigInt], modulus: u64) -> Option<Vec<BigInt>> {
    if modulus == 0 {
        return solve_integer(m, b);
    }
    let aug = m.hstack(&IntMatrix::identity(m.rows()).scale(&BigInt::from(modulus)));
    solve_integer(&aug, b).map(|mut x| {
        x.truncate(m.cols());
        x
    })
}

/// Integral kernel basis of m (columns spanning ker as a direct summand).
pub fn kernel_basis(m: &IntMatrix) -> Vec<Vec<BigInt>> {
    let snf = smith_normal_form(m);
    let mut out = Vec::new();
    for i in snf.rank..m.cols() {
        out.push(snf.v.column(i));
    }
    out
}

/// Quotient of lattices L1/L2, both given by spanning column sets, with
/// ambient representatives for a minimal generating set.
pub struct LatticeQuotient {
    pub group: HomologyGroup,
    /// (ambient vector, order) per minimal generator; order 0 means free
    pub representatives: Vec<(Vec<BigInt>, BigInt)>,
}

/// L1 = span(a), L2 = span(b) with L2 ⊆ L1 required.
pub fn lattice_quotient(a: &IntMatrix, b: &IntMatrix) -> Result<LatticeQuotient, LinalgError> {
    assert_eq!(a.rows(), b.rows(), "ambient dimension mismatch");
    let snf_a = smith_normal_form(a);
    let diag = snf_a.diagonal();
    let rank = snf_a.rank;
    // basis of L1: s_i * (Uinv column i), i < rank
    let ub = snf_a.u.mul(b);
    // L2 in L1-basis coordinates: row i of ub divided by s_i; rows >= rank must vanish
    let mut c = IntMatrix::zero(rank, b.cols());
    for (&(r, cc), v) in ub.iter() {
        if r >= rank {
            return Err(LinalgError::NoSolution);
        }
        let (q, rem) = v.div_rem(&diag[r]);
        if !rem.is_zero() {
            return Err(LinalgError::NoSolution);
        }
        c.set(r, cc, q);
    }
    let snf_c = smith_normal_form(&c);
    let cd = snf_c.diagonal();
    let mut reps = Vec::new();
    let mut torsion = Vec::new();
    let mut free = 0usize;
    for i in 0..rank {
        let order = if i < cd.len() { cd[i].clone() } else { BigInt::zero() };
        if order.is_one() {
            continue;
        }
        // ambient representative of the i-th quotient generator
        let coeffs = snf_c.uinv.column(i);
        let mut vec = vec![BigInt::zero(); a.rows()];
        for (j, cj) in coeffs.iter().enumerate() {
            if cj.is_zero() {
                continue;
            }
            // basis vector j of L1 = s_j * Uinv col j
            for r in 0..a.rows() {
                let v = snf_a.uinv.get(r, j);
                if !v.is_zero() {
                    vec[r] += cj * v * &diag[j];
                }
            }
        }
        if order.is_zero() {
            free += 1;
        } else {
            torsion.push(order.clone());
        }
        reps.push((vec, order));
    }
    torsion.retain(|t| !t.is_one());
    Ok(LatticeQuotient {
        group: HomologyGroup { free_rank: free, torsion },
        representatives: reps,
    })
}

/// Truncated Poincare series: coefficient list indexed by degree 0..=N.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoincareSeries {
    pub coefficients: Vec<usize>,
}

impl PoincareSeries {
    pub fn new(coefficients: Vec<usize>) -> Self {
        PoincareSeries { coefficients }
    }

    pub fn truncation(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    /// Multiply by (1 + T^k), truncated to the same length.
    pub fn mul_one_plus_tk(&self, k: usize) -> PoincareSeries {
        let n = self.coefficients.len();
        let mut out = self.coefficients.clone();
        for d in 0..n {
            if d >= k {
                out[d] += self.coefficients[d - k];
            }
        }
        PoincareSeries::new(out)
    }
}

/// Coefficient-wise `lhs <= rhs`; errors when truncations differ.
pub fn poincare_compare(lhs: &PoincareSeries, rhs: &PoincareSeries) -> Result<bool, LinalgError> {
    if lhs.coefficients.len() != rhs.coefficients.len() {
        return Err(LinalgError::TruncationMismatch(
            lhs.coefficients.len(),
            rhs.coefficients.len(),
        ));
    }
    Ok(lhs
        .coefficients
        .iter()
        .zip(&rhs.coefficients)
        .all(|(a, b)| a <= b))
}

/// Minimal generator count of `h` after passing to `ring`.
///
/// Over Z the group is taken as already integral; over a field or Z/m the
/// group must have been computed over that ring.
pub fn generalized_betti(h: &HomologyGroup, ring: CoefficientRing) -> usize {
    let _ = ring;
    h.generators()
}

/// Universal-coefficient splitting: (H^n ⊗ k, Tor(H^{n+1}, k)) for integral
/// inputs h_n, h_next and k = Q or Z/m.
pub fn uct_split(
    h_n: &HomologyGroup,
    h_next: &HomologyGroup,
    ring: CoefficientRing,
) -> (HomologyGroup, HomologyGroup) {
    match ring {
        CoefficientRing::Rationals => (HomologyGroup::free(h_n.free_rank), HomologyGroup::default()),
        CoefficientRing::Integers => (h_n.clone(), HomologyGroup::default()),
        CoefficientRing::ModM(m) => {
            let m_big = BigInt::from(m);
            let mut tensor = HomologyGroup::free(h_n.free_rank);
            for d in &h_n.torsion {
                let g = d.gcd(&m_big);
                if g == m_big {
                    tensor.free_rank += 1;
                } else if !g.is_one() {
                    tensor.torsion.push(g);
                }
            }
            tensor.torsion.sort();
            let mut tor = HomologyGroup::default();
            for d in &h_next.torsion {
                let g = d.gcd(&m_big);
                if g == m_big {
                    tor.free_rank += 1;
                } else if !g.is_one() {
                    tor.torsion.push(g);
                }
            }
            tor.torsion.sort();
            (tensor, tor)
        }
    }
}

/// Combine a UCT splitting into the homology group over the ring.
pub fn uct_combine(h_n: &HomologyGroup, h_next: &HomologyGroup, ring: CoefficientRing) -> HomologyGroup {
    let (a, b) = uct_split(h_n, h_next, ring);
    let mut out = HomologyGroup {
        free_rank: a.free_rank + b.free_rank,
        torsion: a.torsion,
    };
    out.torsion.extend(b.torsion);
    out.torsion.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_snf(m: &IntMatrix) -> SmithForm {
        let snf = smith_normal_form(m);
        assert_eq!(snf.u.mul(m).mul(&snf.v), snf.s, "U M V != S");
        assert_eq!(snf.v.mul(&snf.vinv), IntMatrix::identity(m.cols()), "V Vinv != I");
        assert_eq!(snf.u.mul(&snf.uinv), IntMatrix::identity(m.rows()), "U Uinv != I");
        let diag = snf.diagonal();
        for w in diag.windows(2) {
            if !w[1].is_zero() {
                assert!(!w[0].is_zero(), "zero before nonzero in diagonal");
                assert!((&w[1] % &w[0]).is_zero(), "divisibility chain broken");
            }
        }
        // off-diagonal zero
        for (&(r, c), v) in snf.s.iter() {
            assert!(r == c, "off-diagonal entry {} at ({},{})", v, r, c);
        }
        snf
    }

    #[test]
    fn snf_zero_matrix() {
        let m = IntMatrix::zero(3, 4);
        let snf = check_snf(&m);
        assert!(snf.s.is_zero());
        assert_eq!(snf.u, IntMatrix::identity(3));
        assert_eq!(snf.v, IntMatrix::identity(4));
    }

    #[test]
    fn snf_identity() {
        let m = IntMatrix::identity(4);
        let snf = check_snf(&m);
        assert_eq!(snf.s, IntMatrix::identity(4));
    }

    #[test]
    fn snf_diag_2_3_gives_1_6() {
        let m = IntMatrix::from_rows(&[&[2, 0], &[0, 3]]);
        let snf = check_snf(&m);
        assert_eq!(snf.diagonal(), vec![BigInt::from(1), BigInt::from(6)]);
    }

    #[test]
    fn snf_random_small() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..40 {
            let rows = rng.gen_range(1..6);
            let cols = rng.gen_range(1..6);
            let mut m = IntMatrix::zero(rows, cols);
            for r in 0..rows {
                for c in 0..cols {
                    if rng.gen_bool(0.7) {
                        m.set(r, c, BigInt::from(rng.gen_range(-9i64..10)));
                    }
                }
            }
            check_snf(&m);
        }
    }

    #[test]
    fn homology_free_rank3() {
        let d_in = IntMatrix::zero(3, 0);
        let d_out = IntMatrix::zero(0, 3);
        let h = homology_at(&d_in, &d_out, CoefficientRing::Integers).unwrap();
        assert_eq!(h, HomologyGroup::free(3));
    }

    #[test]
    fn homology_z_mod_2() {
        // Z --x2--> Z, then 0
        let d_in = IntMatrix::from_rows(&[&[2]]);
        let d_out = IntMatrix::zero(0, 1);
        let h = homology_at(&d_in, &d_out, CoefficientRing::Integers).unwrap();
        assert_eq!(h.free_rank, 0);
        assert_eq!(h.torsion, vec![BigInt::from(2)]);
    }

    #[test]
    fn homology_simplicial_circle() {
        // cochain complex of the triangle: C^0 = Z^3 -> C^1 = Z^3
        // delta(v)(e) = e_end(v) - e_start(v); edges (01),(12),(20)
        let delta = IntMatrix::from_rows(&[&[-1, 1, 0], &[0, -1, 1], &[1, 0, -1]]);
        let d_in0 = IntMatrix::zero(3, 0);
        let h0 = homology_at(&d_in0, &delta, CoefficientRing::Integers).unwrap();
        assert_eq!(h0, HomologyGroup::free(1), "H^0 of circle");
        let d_out1 = IntMatrix::zero(0, 3);
        let h1 = homology_at(&delta, &d_out1, CoefficientRing::Integers).unwrap();
        assert_eq!(h1, HomologyGroup::free(1), "H^1 of circle");
    }

    #[test]
    fn homology_composition_guard() {
        let d_in = IntMatrix::from_rows(&[&[1]]);
        let d_out = IntMatrix::from_rows(&[&[1]]);
        assert!(matches!(
            homology_at(&d_in, &d_out, CoefficientRing::Integers),
            Err(LinalgError::CompositionNonzero(0, 0))
        ));
    }

    #[test]
    fn homology_matches_rational_oracle_on_random() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for _ in 0..25 {
            let a = rng.gen_range(1..8);
            let b = rng.gen_range(1..8);
            let c = rng.gen_range(1..8);
            // random d_out: c x b
            let mut d_out = IntMatrix::zero(c, b);
            for r in 0..c {
                for cc in 0..b {
                    if rng.gen_bool(0.5) {
                        d_out.set(r, cc, BigInt::from(rng.gen_range(-4i64..5)));
                    }
                }
            }
            // d_in: columns from kernel of d_out so the composite vanishes
            let ker = kernel_basis(&d_out);
            let n_in = a.min(ker.len());
            let mut d_in = IntMatrix::zero(b, n_in);
            for (j, kv) in ker.iter().take(n_in).enumerate() {
                let scale = BigInt::from(rng.gen_range(-3i64..4));
                for (i, v) in kv.iter().enumerate() {
                    let val = v * &scale;
                    if !val.is_zero() {
                        d_in.set(i, j, val);
                    }
                }
            }
            let h = homology_at(&d_in, &d_out, CoefficientRing::Rationals).unwrap();
            // dense oracle over Q: nullity(d_out) - rank(d_in)
            let expect = b - rank_rational(&d_out) - rank_rational(&d_in);
            assert_eq!(h.free_rank, expect);
            // integral free rank agrees with rational dimension
            let hz = homology_at(&d_in, &d_out, CoefficientRing::Integers).unwrap();
            assert_eq!(hz.free_rank, expect);
        }
    }

    #[test]
    fn betti_counts_cyclic_summands() {
        let h = HomologyGroup { free_rank: 1, torsion: vec![BigInt::from(4)] };
        assert_eq!(generalized_betti(&h, CoefficientRing::Integers), 2);
        let h2 = HomologyGroup { free_rank: 2, torsion: vec![] };
        assert_eq!(generalized_betti(&h2, CoefficientRing::ModM(2)), 2);
    }

    #[test]
    fn betti_mod2_of_z6_via_uct() {
        // H^n = Z/6: over Z/2 the tensor is Z/2 (one generator), Tor from
        // the next degree is separate. Brute-force oracle: Z/6 (x) Z/2 = Z/2.
        let h = HomologyGroup { free_rank: 0, torsion: vec![BigInt::from(6)] };
        let (t, _) = uct_split(&h, &HomologyGroup::default(), CoefficientRing::ModM(2));
        assert_eq!(t.free_rank, 1);
        assert!(t.torsion.is_empty());
        assert_eq!(generalized_betti(&t, CoefficientRing::ModM(2)), 1);
    }

    #[test]
    fn uct_split_examples() {
        // (Z, 0) over Z/2 -> (Z/2, 0)
        let (a, b) = uct_split(&HomologyGroup::free(1), &HomologyGroup::default(), CoefficientRing::ModM(2));
        assert_eq!((a.free_rank, a.torsion.len(), b.generators()), (1, 0, 0));
        // (0, Z/2) over Z/2 -> (0, Z/2)
        let tor_next = HomologyGroup { free_rank: 0, torsion: vec![BigInt::from(2)] };
        let (a, b) = uct_split(&HomologyGroup::default(), &tor_next, CoefficientRing::ModM(2));
        assert_eq!(a.generators(), 0);
        assert_eq!(b.free_rank, 1);
        // (Z + Z/4, Z/2) over Z/2 -> ((Z/2)^2, Z/2)
        let hn = HomologyGroup { free_rank: 1, torsion: vec![BigInt::from(4)] };
        let (a, b) = uct_split(&hn, &tor_next, CoefficientRing::ModM(2));
        assert_eq!(a.free_rank + a.torsion.len(), 2);
        assert_eq!(b.free_rank + b.torsion.len(), 1);
    }

    #[test]
    fn poincare_comparison() {
        let a = PoincareSeries::new(vec![1, 1, 1]);
        let b = PoincareSeries::new(vec![1, 2, 1]);
        assert!(poincare_compare(&a, &b).unwrap());
        let c = PoincareSeries::new(vec![1, 2]);
        let d = PoincareSeries::new(vec![1, 1]);
        assert!(!poincare_compare(&c, &d).unwrap());
        assert!(poincare_compare(&a, &c).is_err());
    }

    #[test]
    fn solve_and_kernel() {
        let m = IntMatrix::from_rows(&[&[2, 4], &[1, 3]]);
        let b = vec![BigInt::from(2), BigInt::from(2)];
        let x = solve_integer(&m, &b).unwrap();
        assert_eq!(m.mul_vec(&x), b);
        // 2x = 1 has no integral solution but works mod 3
        let m2 = IntMatrix::from_rows(&[&[2]]);
        let b2 = vec![BigInt::one()];
        assert!(solve_integer(&m2, &b2).is_none());
        let x = solve_mod(&m2, &b2, 3).unwrap();
        let r = (m2.mul_vec(&x)[0].clone() - BigInt::one()) % BigInt::from(3);
        assert!(r.is_zero());
    }

    #[test]
    fn rank_mod_p_matches_oracle() {
        let m = IntMatrix::from_rows(&[&[2, 4], &[1, 3]]);
        assert_eq!(rank_rational(&m), 2);
        assert_eq!(rank_mod_p(&m, 2), 1); // mod 2: [[0,0],[1,1]]
        assert_eq!(rank_mod_p(&m, 3), 2);
    }

    #[test]
    fn lattice_quotient_examples() {
        // L1 = Z^2, L2 = span{(2,0)}: quotient Z/2 + Z
        let a = IntMatrix::identity(2);
        let b = IntMatrix::from_rows(&[&[2], &[0]]);
        let q = lattice_quotient(&a, &b).unwrap();
        assert_eq!(q.group.free_rank, 1);
        assert_eq!(q.group.torsion, vec![BigInt::from(2)]);
        // torsion representative maps to a vector of order 2 in the quotient
        let tor = q.representatives.iter().find(|(_, o)| *o == BigInt::from(2)).unwrap();
        assert!(!tor.0.iter().all(|v| v.is_zero()));
        // L2 not inside L1 is rejected
        let a2 = IntMatrix::from_rows(&[&[2], &[0]]);
        let b2 = IntMatrix::from_rows(&[&[1], &[0]]);
        assert!(lattice_quotient(&a2, &b2).is_err());
        // equal lattices give the zero quotient
        let q = lattice_quotient(&a, &IntMatrix::identity(2)).unwrap();
        assert!(q.group.is_zero());
        assert!(q.representatives.is_empty());
    }

    #[test]
    fn homology_mod_m_examples() {
        // Z/4 --x2--> Z/4 --0--> 0: middle homology ker(0)/im(x2) = Z/4 / {0,2} = Z/2
        let d = IntMatrix::from_rows(&[&[2]]);
        let z_out = IntMatrix::zero(0, 1);
        let h = homology_at(&d, &z_out, CoefficientRing::ModM(4)).unwrap();
        assert_eq!(h.free_rank, 0);
        assert_eq!(h.torsion, vec![BigInt::from(2)]);
        // Z/4 --x2--> Z/4 --x2--> Z/4: exact in the middle
        let h = homology_at(&d, &d, CoefficientRing::ModM(4)).unwrap();
        assert!(h.is_zero());
        // zero differentials: free module of rank 2 over Z/3
        let z = IntMatrix::zero(2, 2);
        let h = homology_at(&z, &z, CoefficientRing::ModM(3)).unwrap();
        assert_eq!(h.free_rank, 2);
        assert!(h.torsion.is_empty());
    }
}
