//! Exact rational dense linear algebra.
//!
//! Every vector space in this crate carries a Gram matrix, so adjoints and
//! pseudo-inverses are taken with respect to those Gram matrices rather than
//! the standard dot product. Nothing here uses floating point.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Arbitrary precision rational, always in lowest terms with positive denominator.
pub type Rat = BigRational;

/// `n / d` as a rational.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Integer as a rational.
pub fn ri(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Render a rational as `"p/q"` (or `"p"` for integers).
pub fn rat_to_string(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parse `"p/q"`, `"p"` or `"-p/q"`.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        Some(Rat::new(n, d))
    } else {
        let n: BigInt = s.parse().ok()?;
        Some(Rat::from_integer(n))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinAlgError {
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },
    #[error("map is not surjective: rank {rank} < {rows} rows")]
    NotSurjective { rank: usize, rows: usize },
    #[error("gram matrix is not symmetric")]
    NotSymmetric,
    #[error("gram matrix is not positive definite (pivot {pivot} is not positive)")]
    NotPositiveDefinite { pivot: usize },
    #[error("matrix is singular")]
    Singular,
}

/// Dense row-major rational matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(rat_to_string).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = Rat;
    fn index(&self, (r, c): (usize, usize)) -> &Rat {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Rat {
        &mut self.data[r * self.cols + c]
    }
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![Rat::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rat::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        Mat { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Mat::from_rows(rows.iter().map(|r| r.iter().map(|&x| ri(x)).collect()).collect())
    }

    /// Matrix whose columns are the given vectors; `rows` fixes the height when empty.
    pub fn from_columns(rows: usize, cols: &[Vec<Rat>]) -> Self {
        let mut m = Mat::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), rows);
            for (i, v) in c.iter().enumerate() {
                m[(i, j)] = v.clone();
            }
        }
        m
    }

    pub fn column_vector(v: &[Rat]) -> Self {
        Mat::from_columns(v.len(), &[v.to_vec()])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn row(&self, r: usize) -> &[Rat] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Rat> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)].clone();
            }
        }
        t
    }

    /// Product; zero entries of `self` are skipped, which matters for the
    /// very sparse operator matrices built by the cochain module.
    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "mul shape mismatch");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(self.cols, v.len(), "mul_vec shape mismatch");
        (0..self.rows)
            .map(|i| {
                let mut acc = Rat::zero();
                for (a, b) in self.row(i).iter().zip(v) {
                    if !a.is_zero() && !b.is_zero() {
                        acc += a * b;
                    }
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!(self.shape(), other.shape(), "add shape mismatch");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Mat { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        assert_eq!(self.shape(), other.shape(), "sub shape mismatch");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Mat { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, s: &Rat) -> Mat {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * s).collect() }
    }

    pub fn neg(&self) -> Mat {
        self.scale(&ri(-1))
    }

    pub fn pow(&self, e: usize) -> Mat {
        assert!(self.is_square());
        let mut out = Mat::identity(self.rows);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    pub fn select_rows(&self, idx: &[usize]) -> Mat {
        let mut m = Mat::zeros(idx.len(), self.cols);
        for (i, &r) in idx.iter().enumerate() {
            for c in 0..self.cols {
                m[(i, c)] = self[(r, c)].clone();
            }
        }
        m
    }

    pub fn select_cols(&self, idx: &[usize]) -> Mat {
        let mut m = Mat::zeros(self.rows, idx.len());
        for r in 0..self.rows {
            for (j, &c) in idx.iter().enumerate() {
                m[(r, j)] = self[(r, c)].clone();
            }
        }
        m
    }

    pub fn vstack(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.cols, "vstack shape mismatch");
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Mat { rows: self.rows + other.rows, cols: self.cols, data }
    }

    pub fn hstack(&self, other: &Mat) -> Mat {
        assert_eq!(self.rows, other.rows, "hstack shape mismatch");
        let mut m = Mat::zeros(self.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m[(r, c)] = self[(r, c)].clone();
            }
            for c in 0..other.cols {
                m[(r, self.cols + c)] = other[(r, c)].clone();
            }
        }
        m
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn trace(&self) -> Rat {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)].clone()).sum()
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (Mat, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&r| !m[(r, col)].is_zero()) else {
                continue;
            };
            m.swap_rows(p, row);
            let inv = m[(row, col)].recip();
            for c in col..m.cols {
                let v = &m[(row, c)] * &inv;
                m[(row, c)] = v;
            }
            for r in 0..m.rows {
                if r == row || m[(r, col)].is_zero() {
                    continue;
                }
                let f = m[(r, col)].clone();
                for c in col..m.cols {
                    if m[(row, c)].is_zero() {
                        continue;
                    }
                    let v = &m[(row, c)] * &f;
                    m[(r, c)] -= v;
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    pub fn inverse(&self) -> Result<Mat, LinAlgError> {
        if !self.is_square() {
            return Err(LinAlgError::ShapeMismatch {
                expected: "square".into(),
                got: format!("{}x{}", self.rows, self.cols),
            });
        }
        let n = self.rows;
        let (r, piv) = self.hstack(&Mat::identity(n)).rref();
        if piv.len() < n || piv[n - 1] != n - 1 {
            return Err(LinAlgError::Singular);
        }
        Ok(r.select_cols(&(n..2 * n).collect::<Vec<_>>()))
    }

    /// Determinant by fraction Gaussian elimination.
    pub fn det(&self) -> Rat {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut det = Rat::one();
        for k in 0..n {
            let Some(p) = (k..n).find(|&r| !a[(r, k)].is_zero()) else {
                return Rat::zero();
            };
            if p != k {
                for c in 0..n {
                    a.data.swap(p * n + c, k * n + c);
                }
                det = -det;
            }
            let piv = a[(k, k)].clone();
            det *= &piv;
            for r in k + 1..n {
                if a[(r, k)].is_zero() {
                    continue;
                }
                let f = &a[(r, k)] / &piv;
                for c in k..n {
                    let v = &f * &a[(k, c)];
                    a[(r, c)] -= v;
                }
            }
        }
        det
    }

    /// Some solution of `self * x = b`, or `None` when the system is inconsistent.
    pub fn solve(&self, b: &[Rat]) -> Option<Vec<Rat>> {
        assert_eq!(b.len(), self.rows);
        let (r, piv) = self.hstack(&Mat::column_vector(b)).rref();
        if piv.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![Rat::zero(); self.cols];
        for (i, &p) in piv.iter().enumerate() {
            x[p] = r[(i, self.cols)].clone();
        }
        Some(x)
    }

    /// Kronecker product.
    pub fn kron(&self, other: &Mat) -> Mat {
        let mut m = Mat::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = &self[(i, j)];
                if a.is_zero() {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        m[(i * other.rows + k, j * other.cols + l)] = a * &other[(k, l)];
                    }
                }
            }
        }
        m
    }

    pub fn entries(&self) -> &[Rat] {
        &self.data
    }
}

/// A vector space `Q^dim` with an inner product given by its Gram matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IPSpace {
    gram: Mat,
    gram_inv: Mat,
}

impl IPSpace {
    /// Validates symmetry and positive definiteness (exact LDLᵀ pivots).
    pub fn new(gram: Mat) -> Result<Self, LinAlgError> {
        if !gram.is_symmetric() {
            return Err(LinAlgError::NotSymmetric);
        }
        ldl_pivots(&gram)?;
        let gram_inv = gram.inverse()?;
        Ok(IPSpace { gram, gram_inv })
    }

    /// Pairs a gram with an inverse already known in closed form; the caller
    /// guarantees `gram · gram_inv = id`.
    pub fn from_parts(gram: Mat, gram_inv: Mat) -> Self {
        debug_assert!(gram.mul(&gram_inv) == Mat::identity(gram.rows()));
        IPSpace { gram, gram_inv }
    }

    pub fn standard(n: usize) -> Self {
        IPSpace { gram: Mat::identity(n), gram_inv: Mat::identity(n) }
    }

    pub fn dim(&self) -> usize {
        self.gram.rows()
    }

    pub fn gram(&self) -> &Mat {
        &self.gram
    }

    pub fn gram_inv(&self) -> &Mat {
        &self.gram_inv
    }

    pub fn inner(&self, u: &[Rat], v: &[Rat]) -> Rat {
        let gv = self.gram.mul_vec(v);
        u.iter().zip(&gv).map(|(a, b)| a * b).sum()
    }

    /// Orthogonal direct sum.
    pub fn direct_sum(&self, other: &IPSpace) -> IPSpace {
        IPSpace {
            gram: block_diag(&self.gram, &other.gram),
            gram_inv: block_diag(&self.gram_inv, &other.gram_inv),
        }
    }
}

pub fn block_diag(a: &Mat, b: &Mat) -> Mat {
    let mut m = Mat::zeros(a.rows() + b.rows(), a.cols() + b.cols());
    for r in 0..a.rows() {
        for c in 0..a.cols() {
            m[(r, c)] = a[(r, c)].clone();
        }
    }
    for r in 0..b.rows() {
        for c in 0..b.cols() {
            m[(a.rows() + r, a.cols() + c)] = b[(r, c)].clone();
        }
    }
    m
}

/// Diagonal of the exact LDLᵀ factorisation; every pivot must be positive.
pub fn ldl_pivots(g: &Mat) -> Result<Vec<Rat>, LinAlgError> {
    let n = g.rows();
    let mut a = g.clone();
    let mut d = Vec::with_capacity(n);
    for k in 0..n {
        let p = a[(k, k)].clone();
        if !p.is_positive() {
            return Err(LinAlgError::NotPositiveDefinite { pivot: k });
        }
        for i in k + 1..n {
            if a[(i, k)].is_zero() {
                continue;
            }
            let f = &a[(i, k)] / &p;
            for j in k + 1..n {
                let v = &f * &a[(k, j)];
                a[(i, j)] -= v;
            }
        }
        d.push(p);
    }
    Ok(d)
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    pub rank: usize,
    /// Columns span `ker M`.
    pub kernel_basis: Mat,
    /// Columns span `im M`.
    pub image_basis: Mat,
}

pub fn decompose(m: &Mat) -> Decomposition {
    let (r, piv) = m.rref();
    let free: Vec<usize> = (0..m.cols()).filter(|c| !piv.contains(c)).collect();
    let mut kernel = Mat::zeros(m.cols(), free.len());
    for (k, &f) in free.iter().enumerate() {
        kernel[(f, k)] = Rat::one();
        for (i, &p) in piv.iter().enumerate() {
            kernel[(p, k)] = -r[(i, f)].clone();
        }
    }
    Decomposition { rank: piv.len(), kernel_basis: kernel, image_basis: m.select_cols(&piv) }
}

fn check_shape(m: &Mat, dom: &IPSpace, cod: &IPSpace) -> Result<(), LinAlgError> {
    if m.cols() != dom.dim() || m.rows() != cod.dim() {
        return Err(LinAlgError::ShapeMismatch {
            expected: format!("{}x{}", cod.dim(), dom.dim()),
            got: format!("{}x{}", m.rows(), m.cols()),
        });
    }
    Ok(())
}

/// `M* = G_dom⁻¹ Mᵀ G_cod`.
pub fn gram_adjoint(m: &Mat, dom: &IPSpace, cod: &IPSpace) -> Result<Mat, LinAlgError> {
    check_shape(m, dom, cod)?;
    Ok(dom.gram_inv().mul(&m.transpose()).mul(cod.gram()))
}

/// Pseudo-inverse vanishing on the `cod`-orthogonal complement of the image
/// and landing in the `dom`-orthogonal complement of the kernel.
pub fn gram_pinv(m: &Mat, dom: &IPSpace, cod: &IPSpace) -> Result<Mat, LinAlgError> {
    check_shape(m, dom, cod)?;
    let (r, piv) = m.rref();
    let rank = piv.len();
    if rank == 0 {
        return Ok(Mat::zeros(m.cols(), m.rows()));
    }
    // rank factorisation M = C R
    let rr = r.select_rows(&(0..rank).collect::<Vec<_>>());
    let c = m.select_cols(&piv);
    let gd_inv_rt = dom.gram_inv().mul(&rr.transpose());
    let r_plus = gd_inv_rt.mul(&rr.mul(&gd_inv_rt).inverse()?);
    let ct_gc = c.transpose().mul(cod.gram());
    let c_plus = ct_gc.mul(&c).inverse()?.mul(&ct_gc);
    Ok(r_plus.mul(&c_plus))
}

/// Inner product on the codomain of a surjection `L` induced from its domain.
pub fn induced_gram(l: &Mat, dom: &IPSpace) -> Result<IPSpace, LinAlgError> {
    if l.cols() != dom.dim() {
        return Err(LinAlgError::ShapeMismatch {
            expected: format!("{} columns", dom.dim()),
            got: format!("{} columns", l.cols()),
        });
    }
    let rank = l.rank();
    if rank < l.rows() {
        return Err(LinAlgError::NotSurjective { rank, rows: l.rows() });
    }
    let pinv = gram_pinv(l, dom, &IPSpace::standard(l.rows()))?;
    IPSpace::new(pinv.transpose().mul(dom.gram()).mul(&pinv))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ip(rows: &[&[i64]]) -> IPSpace {
        IPSpace::new(Mat::from_i64(rows)).unwrap()
    }

    #[test]
    fn decompose_examples() {
        let d = decompose(&Mat::from_i64(&[&[1, 0], &[0, 0]]));
        assert_eq!(d.rank, 1);
        assert_eq!(d.kernel_basis, Mat::from_i64(&[&[0], &[1]]));

        let d = decompose(&Mat::identity(2));
        assert_eq!(d.rank, 2);
        assert_eq!(d.kernel_basis.cols(), 0);

        let m = Mat::from_i64(&[&[1, 2], &[2, 4]]);
        let d = decompose(&m);
        assert_eq!(d.rank, 1);
        // kernel is spanned by (2, -1), normalised by rref to (-2, 1)
        let k = d.kernel_basis.column(0);
        assert_eq!(&k[0] * ri(-1), &k[1] * ri(2));
        assert!(m.mul(&d.kernel_basis).is_zero());
    }

    #[test]
    fn adjoint_examples() {
        let s1 = IPSpace::standard(1);
        let s2 = IPSpace::standard(2);
        assert_eq!(gram_adjoint(&Mat::identity(2), &s2, &s2).unwrap(), Mat::identity(2));
        let m = Mat::from_i64(&[&[1, 1]]);
        assert_eq!(gram_adjoint(&m, &s2, &s1).unwrap(), Mat::from_i64(&[&[1], &[1]]));
        let adj = gram_adjoint(&Mat::identity(1), &ip(&[&[4]]), &s1).unwrap();
        assert_eq!(adj[(0, 0)], rat(1, 4));
        assert!(gram_adjoint(&m, &s1, &s1).is_err());
    }

    #[test]
    fn pinv_examples() {
        let s1 = IPSpace::standard(1);
        let s2 = IPSpace::standard(2);
        assert_eq!(gram_pinv(&Mat::identity(2), &s2, &s2).unwrap(), Mat::identity(2));
        let p = gram_pinv(&Mat::from_i64(&[&[1, 1]]), &s2, &s1).unwrap();
        assert_eq!(p, Mat::from_rows(vec![vec![rat(1, 2)], vec![rat(1, 2)]]));
        let proj = Mat::from_i64(&[&[1, 0], &[0, 0]]);
        assert_eq!(gram_pinv(&proj, &s2, &s2).unwrap(), proj);
    }

    #[test]
    fn pinv_of_surjection_ignores_codomain_gram() {
        let m = Mat::from_i64(&[&[1, 2, 0], &[0, 1, 1]]);
        let dom = ip(&[&[2, 1, 0], &[1, 2, 0], &[0, 0, 1]]);
        let a = gram_pinv(&m, &dom, &IPSpace::standard(2)).unwrap();
        let b = gram_pinv(&m, &dom, &ip(&[&[3, 1], &[1, 5]])).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn induced_gram_examples() {
        let s2 = IPSpace::standard(2);
        assert_eq!(induced_gram(&Mat::identity(2), &s2).unwrap().gram(), &Mat::identity(2));
        assert_eq!(induced_gram(&Mat::from_i64(&[&[1, 0]]), &s2).unwrap().gram()[(0, 0)], ri(1));
        assert_eq!(induced_gram(&Mat::from_i64(&[&[1, 1]]), &s2).unwrap().gram()[(0, 0)], rat(1, 2));
        assert!(matches!(
            induced_gram(&Mat::from_i64(&[&[1, 1], &[1, 1]]), &s2),
            Err(LinAlgError::NotSurjective { rank: 1, rows: 2 })
        ));
    }

    #[test]
    fn spd_check() {
        assert!(IPSpace::new(Mat::from_i64(&[&[1, 2], &[2, 1]])).is_err());
        assert!(matches!(IPSpace::new(Mat::from_i64(&[&[1, 2], &[0, 1]])), Err(LinAlgError::NotSymmetric)));
        assert_eq!(ldl_pivots(&Mat::from_i64(&[&[2, 1], &[1, 2]])).unwrap(), vec![ri(2), rat(3, 2)]);
    }

    #[test]
    fn rational_strings() {
        assert_eq!(parse_rat("-3/6"), Some(rat(-1, 2)));
        assert_eq!(parse_rat(" 7 "), Some(ri(7)));
        assert_eq!(parse_rat("1/0"), None);
        assert_eq!(rat_to_string(&rat(4, -6)), "-2/3");
    }
}
