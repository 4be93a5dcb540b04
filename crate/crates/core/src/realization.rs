//! State-space realizations `C (sI − A)⁻¹ B + D` and their algebra.

use crate::error::{Error, Result};
use crate::numerics::{
    block_diag, ensure_finite, fnorm, householder_hessenberg, solve, svd, CMatrix, Rot, C64,
    ONE, ZERO,
};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq)]
pub struct Realization {
    a: CMatrix,
    b: CMatrix,
    c: CMatrix,
    d: CMatrix,
}

impl Realization {
    pub fn new(a: CMatrix, b: CMatrix, c: CMatrix, d: CMatrix) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n
            || b.nrows() != n
            || c.ncols() != n
            || d.nrows() != c.nrows()
            || d.ncols() != b.ncols()
        {
            return Err(Error::Dimension(format!(
                "A {:?}, B {:?}, C {:?}, D {:?}",
                a.shape(),
                b.shape(),
                c.shape(),
                d.shape()
            )));
        }
        for (m, what) in [(&a, "A"), (&b, "B"), (&c, "C"), (&d, "D")] {
            ensure_finite(m, what)?;
        }
        Ok(Realization { a, b, c, d })
    }

    /// Strictly proper realization (`D = 0`).
    pub fn strictly_proper(a: CMatrix, b: CMatrix, c: CMatrix) -> Result<Self> {
        let d = CMatrix::zeros(c.nrows(), b.ncols());
        Realization::new(a, b, c, d)
    }

    /// Scalar first-order realization `c b / (s − a) + d`.
    pub fn scalar(a: C64, b: C64, c: C64, d: C64) -> Self {
        Realization {
            a: CMatrix::from_element(1, 1, a),
            b: CMatrix::from_element(1, 1, b),
            c: CMatrix::from_element(1, 1, c),
            d: CMatrix::from_element(1, 1, d),
        }
    }

    /// Constant function with no states.
    pub fn constant(d: CMatrix) -> Self {
        let (p, m) = d.shape();
        Realization {
            a: CMatrix::zeros(0, 0),
            b: CMatrix::zeros(0, m),
            c: CMatrix::zeros(p, 0),
            d,
        }
    }

    pub fn a(&self) -> &CMatrix {
        &self.a
    }
    pub fn b(&self) -> &CMatrix {
        &self.b
    }
    pub fn c(&self) -> &CMatrix {
        &self.c
    }
    pub fn d(&self) -> &CMatrix {
        &self.d
    }
    pub fn states(&self) -> usize {
        self.a.nrows()
    }
    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }
    pub fn outputs(&self) -> usize {
        self.c.nrows()
    }
    pub fn is_scalar(&self) -> bool {
        self.inputs() == 1 && self.outputs() == 1
    }
    pub fn is_strictly_proper(&self) -> bool {
        self.d.iter().all(|z| *z == ZERO)
    }
    pub fn feedthrough(&self) -> C64 {
        self.d[(0, 0)]
    }

    pub fn evaluate(&self, s: C64) -> Result<CMatrix> {
        let n = self.states();
        if n == 0 {
            return Ok(self.d.clone());
        }
        let mut m = -self.a.clone();
        for i in 0..n {
            m[(i, i)] += s;
        }
        let x = solve(&m, &self.b).map_err(|_| Error::Pole(format!("{s}")))?;
        Ok(&self.c * x + &self.d)
    }

    /// Scalar value at `s`; uses the (0, 0) channel.
    pub fn eval(&self, s: C64) -> Result<C64> {
        Ok(self.evaluate(s)?[(0, 0)])
    }

    /// Realization of `G*(s) = G(−s̄)*`.
    pub fn adjoint(&self) -> Realization {
        Realization {
            a: -self.a.adjoint(),
            b: self.c.adjoint(),
            c: -self.b.adjoint(),
            d: self.d.adjoint(),
        }
    }

    pub fn add(&self, other: &Realization) -> Result<Realization> {
        if self.inputs() != other.inputs() || self.outputs() != other.outputs() {
            return Err(Error::Dimension("add: channel dimensions differ".into()));
        }
        let mut b = CMatrix::zeros(self.states() + other.states(), self.inputs());
        b.rows_mut(0, self.states()).copy_from(&self.b);
        b.rows_mut(self.states(), other.states()).copy_from(&other.b);
        let mut c = CMatrix::zeros(self.outputs(), self.states() + other.states());
        c.columns_mut(0, self.states()).copy_from(&self.c);
        c.columns_mut(self.states(), other.states()).copy_from(&other.c);
        Ok(Realization {
            a: block_diag(&self.a, &other.a),
            b,
            c,
            d: &self.d + &other.d,
        })
    }

    /// Series connection `self · other`.
    pub fn multiply(&self, other: &Realization) -> Result<Realization> {
        if self.inputs() != other.outputs() {
            return Err(Error::Dimension("multiply: inner dimensions differ".into()));
        }
        let (n1, n2) = (self.states(), other.states());
        let mut a = CMatrix::zeros(n1 + n2, n1 + n2);
        a.view_mut((0, 0), (n1, n1)).copy_from(&self.a);
        a.view_mut((0, n1), (n1, n2)).copy_from(&(&self.b * &other.c));
        a.view_mut((n1, n1), (n2, n2)).copy_from(&other.a);
        let mut b = CMatrix::zeros(n1 + n2, other.inputs());
        b.rows_mut(0, n1).copy_from(&(&self.b * &other.d));
        b.rows_mut(n1, n2).copy_from(&other.b);
        let mut c = CMatrix::zeros(self.outputs(), n1 + n2);
        c.columns_mut(0, n1).copy_from(&self.c);
        c.columns_mut(n1, n2).copy_from(&(&self.d * &other.c));
        Ok(Realization {
            a,
            b,
            c,
            d: &self.d * &other.d,
        })
    }

    pub fn scale_output(&self, k: C64) -> Realization {
        Realization {
            a: self.a.clone(),
            b: self.b.clone(),
            c: self.c.map(|z| z * k),
            d: self.d.map(|z| z * k),
        }
    }

    /// Realization of `G(ys)·s` for strictly proper `G`.
    pub fn arg_scale_times_s(&self, y: C64) -> Result<Realization> {
        if y == ZERO {
            return Err(Error::DegenerateArgument("argument scale y = 0".into()));
        }
        if !self.is_strictly_proper() {
            return Err(Error::DegenerateArgument("G(ys)s needs a strictly proper G".into()));
        }
        let ab = &self.a * &self.b;
        Ok(Realization {
            a: self.a.map(|z| z / y),
            b: ab.map(|z| z / (y * y)),
            c: self.c.clone(),
            d: (&self.c * &self.b).map(|z| z / y),
        })
    }

    /// State transformation `x ↦ t x`, given `t` and its inverse.
    pub fn transform(&self, t: &CMatrix, t_inv: &CMatrix) -> Realization {
        Realization {
            a: t * &self.a * t_inv,
            b: t * &self.b,
            c: &self.c * t_inv,
            d: self.d.clone(),
        }
    }

    /// Co-degree (order of the zero at infinity) of a scalar channel, with the
    /// staircase transformations of the pencil `[λI − A, B; −C, 0]`.
    pub fn staircase_codegree(&self, rank_tol: f64) -> Result<CoDegreeReport> {
        let st = Staircase::new(&self.a, &self.b, &self.c, rank_tol)?;
        Ok(CoDegreeReport {
            codegree: st.codegree,
            basis: st.z.columns(0, st.codegree + 1).into_owned(),
            staircase_q: st.q,
            staircase_z: st.z,
        })
    }

    pub fn codegree(&self, rank_tol: f64) -> Result<usize> {
        Ok(Staircase::new(&self.a, &self.b, &self.c, rank_tol)?.codegree)
    }

    /// Removes uncontrollable and unobservable states by orthogonal staircase
    /// compressions with relative threshold `rel_tol`.
    pub fn minimal_reduce(&self, rel_tol: f64) -> Result<Realization> {
        let v = controllable_basis(&self.a, &self.b, rel_tol)?;
        let a1 = v.adjoint() * &self.a * &v;
        let b1 = v.adjoint() * &self.b;
        let c1 = &self.c * &v;
        let w = controllable_basis(&a1.adjoint(), &c1.adjoint(), rel_tol)?;
        Realization::new(
            w.adjoint() * &a1 * &w,
            w.adjoint() * b1,
            c1 * &w,
            self.d.clone(),
        )
    }

    pub fn to_json(&self) -> RealizationJson {
        RealizationJson {
            n: self.states(),
            m: self.inputs(),
            p: self.outputs(),
            a: ReIm::from(&self.a),
            b: ReIm::from(&self.b),
            c: ReIm::from(&self.c),
            d: ReIm::from(&self.d),
        }
    }

    pub fn from_json(j: &RealizationJson) -> Result<Realization> {
        Realization::new(
            j.a.to_matrix(j.n, j.n)?,
            j.b.to_matrix(j.n, j.m)?,
            j.c.to_matrix(j.p, j.n)?,
            j.d.to_matrix(j.p, j.m)?,
        )
    }
}

/// Orthonormal basis of the controllable subspace of `(a, b)`.
fn controllable_basis(a: &CMatrix, b: &CMatrix, rel_tol: f64) -> Result<CMatrix> {
    let n = a.nrows();
    let mut basis = CMatrix::zeros(n, 0);
    if n == 0 {
        return Ok(basis);
    }
    let anorm = fnorm(a);
    let mut scale = fnorm(b);
    let mut r = b.clone();
    while basis.ncols() < n && r.ncols() > 0 {
        for _ in 0..2 {
            if basis.ncols() > 0 {
                let proj = basis.adjoint() * &r;
                r -= &basis * proj;
            }
        }
        let (u, s, _) = svd(&r)?;
        let room = n - basis.ncols();
        let keep = s
            .iter()
            .filter(|&&x| x > rel_tol * scale && x > 0.0)
            .count()
            .min(room);
        if keep == 0 {
            break;
        }
        let mut fresh = u.columns(0, keep).into_owned();
        if basis.ncols() > 0 {
            let proj = basis.adjoint() * &fresh;
            fresh -= &basis * proj;
            fresh = fresh.qr().q();
        }
        let k0 = basis.ncols();
        basis = basis.resize_horizontally(k0 + keep, ZERO);
        basis.columns_mut(k0, keep).copy_from(&fresh);
        r = a * fresh;
        scale = anorm;
    }
    Ok(basis)
}

#[derive(Clone, Debug)]
pub struct CoDegreeReport {
    pub codegree: usize,
    /// Orthonormal basis of the deflating subspace carrying the infinite divisor.
    pub basis: CMatrix,
    pub staircase_q: CMatrix,
    pub staircase_z: CMatrix,
}

/// Staircase form of the scalar pencil `λE − N`, `E = diag(I, 0)`,
/// `N = [[A, −B], [C, 0]]`: `q E z` and `q N z` have a leading
/// `(codegree + 1)`-dimensional infinite block and a trailing
/// Hessenberg-triangular block.
#[derive(Clone, Debug)]
pub(crate) struct Staircase {
    pub codegree: usize,
    pub q: CMatrix,
    pub z: CMatrix,
    pub e: CMatrix,
    pub n: CMatrix,
}

impl Staircase {
    pub fn new(a: &CMatrix, b: &CMatrix, c: &CMatrix, rank_tol: f64) -> Result<Staircase> {
        let n = a.nrows();
        if b.ncols() != 1 || c.nrows() != 1 || n == 0 {
            return Err(Error::Dimension("staircase needs a scalar channel and n ≥ 1".into()));
        }
        let bnorm = fnorm(b);
        let cnorm = fnorm(c);
        if bnorm == 0.0 || cnorm == 0.0 {
            return Err(Error::ZeroFunction);
        }
        let anorm = fnorm(a);
        let (u, h) = householder_hessenberg(a, Some(b));
        let ch = c * &u;
        let ub = u.adjoint() * b;
        let mut j = None;
        for k in 0..n {
            if ch[(0, k)].norm() > rank_tol * cnorm {
                j = Some(k);
                break;
            }
            if k + 1 < n && h[(k + 1, k)].norm() <= rank_tol * anorm {
                break;
            }
        }
        let j = j.ok_or(Error::ZeroFunction)?;
        let codegree = j + 1;
        let dim = n + 1;

        // columns: B-column first, then the states; rows: H row moved to position j + 1
        let col_src = |k: usize| if k == 0 { n } else { k - 1 };
        let row_src = |r: usize| {
            if r <= j {
                r
            } else if r == j + 1 {
                n
            } else {
                r - 1
            }
        };
        let mut z0 = CMatrix::zeros(dim, dim);
        z0.view_mut((0, 0), (n, n)).copy_from(&u);
        z0[(n, n)] = ONE;
        let mut q0 = CMatrix::zeros(dim, dim);
        q0.view_mut((0, 0), (n, n)).copy_from(&u.adjoint());
        q0[(n, n)] = ONE;
        let mut nt = CMatrix::zeros(dim, dim);
        nt.view_mut((0, 0), (n, n)).copy_from(&h);
        for i in 0..n {
            nt[(i, n)] = -ub[(i, 0)];
            nt[(n, i)] = ch[(0, i)];
        }
        let mut et = CMatrix::zeros(dim, dim);
        for i in 0..n {
            et[(i, i)] = ONE;
        }
        let z = CMatrix::from_fn(dim, dim, |i, k| z0[(i, col_src(k))]);
        let mut q = CMatrix::from_fn(dim, dim, |r, i| q0[(row_src(r), i)]);
        let mut nn = CMatrix::from_fn(dim, dim, |r, k| nt[(row_src(r), col_src(k))]);
        let mut ee = CMatrix::from_fn(dim, dim, |r, k| et[(row_src(r), col_src(k))]);
        if j + 2 < dim {
            let (rot, _) = Rot::zeroing(nn[(j + 1, j + 1)], nn[(j + 2, j + 1)]);
            rot.left(&mut nn, j + 1, j + 2, 0..dim);
            rot.left(&mut ee, j + 1, j + 2, 0..dim);
            rot.left(&mut q, j + 1, j + 2, 0..dim);
        }
        let lead = j + 2;
        for k in 0..dim {
            for i in 0..dim {
                let in_lead = k < lead;
                if (in_lead && i > k) || (!in_lead && i > k + 1) {
                    nn[(i, k)] = ZERO;
                }
                if (in_lead && i >= k) || (!in_lead && i > k) {
                    ee[(i, k)] = ZERO;
                }
            }
        }
        Ok(Staircase {
            codegree,
            q,
            z,
            e: ee,
            n: nn,
        })
    }

    /// Size of the leading infinite block.
    pub fn lead(&self) -> usize {
        self.codegree + 1
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ReIm {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl From<&CMatrix> for ReIm {
    fn from(m: &CMatrix) -> Self {
        let mut re = Vec::with_capacity(m.len());
        let mut im = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                re.push(m[(i, j)].re);
                im.push(m[(i, j)].im);
            }
        }
        ReIm { re, im }
    }
}

impl ReIm {
    pub fn to_matrix(&self, rows: usize, cols: usize) -> Result<CMatrix> {
        if self.re.len() != rows * cols || self.im.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "expected {} entries, got {}/{}",
                rows * cols,
                self.re.len(),
                self.im.len()
            )));
        }
        let entries: Vec<C64> = self
            .re
            .iter()
            .zip(&self.im)
            .map(|(&r, &i)| C64::new(r, i))
            .collect();
        crate::numerics::cmatrix(rows, cols, &entries)
    }
}

/// Row-major JSON form of a realization.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RealizationJson {
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub a: ReIm,
    pub b: ReIm,
    pub c: ReIm,
    pub d: ReIm,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::testing::*;
    use crate::numerics::{c, rmatrix, I};
    use std::f64::consts::PI;

    fn first_order(a: f64) -> Realization {
        Realization::scalar(c(a), ONE, ONE, ZERO)
    }

    fn close(x: C64, y: C64, tol: f64) -> bool {
        (x - y).norm() <= tol * y.norm().max(1.0)
    }

    fn random_realization(r: &mut rand_chacha::ChaCha8Rng, n: usize) -> Realization {
        Realization::new(
            random_matrix(r, n, n),
            random_matrix(r, n, 1),
            random_matrix(r, 1, n),
            random_matrix(r, 1, 1),
        )
        .unwrap()
    }

    fn random_points(r: &mut rand_chacha::ChaCha8Rng, k: usize) -> Vec<C64> {
        random_matrix(r, k, 1).iter().map(|z| z * 3.0 + C64::new(0.0, 0.3)).collect()
    }

    #[test]
    fn evaluate_examples() {
        let r = first_order(-1.0);
        assert!(close(r.eval(ZERO).unwrap(), ONE, 1e-15));
        assert!(close(r.eval(ONE).unwrap(), c(0.5), 1e-15));
        let z = Realization::scalar(c(-1.0), c(0.5 / PI), ONE, ZERO);
        assert!(close(z.eval(I).unwrap(), ONE / (c(2.0 * PI) * (ONE + I)), 1e-14));
        assert!(matches!(r.eval(c(-1.0)), Err(Error::Pole(_))));
    }

    #[test]
    fn adjoint_examples() {
        let r = first_order(-1.0);
        let adj = r.adjoint();
        assert_eq!(adj.a()[(0, 0)], c(1.0));
        assert_eq!(adj.c()[(0, 0)], c(-1.0));
        let x = 0.7;
        let lhs = adj.eval(C64::new(0.0, x)).unwrap();
        assert!(close(lhs, ONE / (ONE - I * x), 1e-14));
        let k = Realization::scalar(c(-1.0), c(1.0 / PI.sqrt()), ONE, ZERO);
        assert!(close(k.adjoint().eval(ZERO).unwrap(), c(1.0 / PI.sqrt()), 1e-14));

        let mut rg = rng(41);
        let g = random_realization(&mut rg, 4);
        let gg = g.adjoint().adjoint();
        for s in random_points(&mut rg, 20) {
            assert!(close(gg.eval(s).unwrap(), g.eval(s).unwrap(), 1e-9));
            let lhs = g.adjoint().eval(s).unwrap();
            let rhs = g.eval(-s.conj()).unwrap().conj();
            assert!(close(lhs, rhs, 1e-9));
        }
    }

    #[test]
    fn add_and_multiply() {
        let s = first_order(-1.0).add(&first_order(-2.0)).unwrap();
        assert!(close(s.eval(ZERO).unwrap(), c(1.5), 1e-15));
        let p = first_order(-1.0).multiply(&first_order(-2.0)).unwrap();
        assert!(close(p.eval(ZERO).unwrap(), c(0.5), 1e-15));

        let mut rg = rng(42);
        let g1 = random_realization(&mut rg, 3);
        let g2 = random_realization(&mut rg, 4);
        let zero = g1.add(&g1.scale_output(c(-1.0))).unwrap();
        let sum = g1.add(&g2).unwrap();
        let prod = g1.multiply(&g2).unwrap();
        let one = Realization::constant(CMatrix::from_element(1, 1, ONE));
        let id = g1.multiply(&one).unwrap();
        for s in random_points(&mut rg, 20) {
            let (a, b) = (g1.eval(s).unwrap(), g2.eval(s).unwrap());
            assert!(zero.eval(s).unwrap().norm() < 1e-12);
            assert!(close(sum.eval(s).unwrap(), a + b, 1e-9));
            assert!(close(prod.eval(s).unwrap(), a * b, 1e-9));
            assert!(close(id.eval(s).unwrap(), a, 1e-12));
        }

        // K K* for the Cauchy factor at s = i gives the standard Cauchy pdf at 1
        let k = Realization::scalar(c(-1.0), c(1.0 / PI.sqrt()), ONE, ZERO);
        let kk = k.multiply(&k.adjoint()).unwrap();
        assert!(close(kk.eval(I).unwrap(), c(0.5 / PI), 1e-14));

        // Z + Z* for the Cauchy summand at s = 0.5i
        let z = Realization::scalar(c(-1.0), c(0.5 / PI), ONE, ZERO);
        let phi = z.add(&z.adjoint()).unwrap();
        assert!(close(phi.eval(C64::new(0.0, 0.5)).unwrap(), c(1.0 / (PI * 1.25)), 1e-14));
    }

    #[test]
    fn scale_output_examples() {
        let z = Realization::scalar(c(-1.0), c(0.5 / PI), ONE, ZERO);
        assert_eq!(z.scale_output(ONE), z);
        assert_eq!(z.scale_output(ZERO).eval(c(0.3)).unwrap(), ZERO);
        assert!(close(z.scale_output(c(2.0 * PI)).eval(ZERO).unwrap(), ONE, 1e-15));
    }

    #[test]
    fn arg_scale_examples() {
        let r = first_order(-1.0);
        let g = r.arg_scale_times_s(ONE).unwrap();
        assert!(close(g.eval(ONE).unwrap(), c(0.5), 1e-15));
        let r2 = first_order(-1.0).multiply(&first_order(-1.0)).unwrap();
        let g2 = r2.arg_scale_times_s(ONE).unwrap();
        assert!(g2.is_strictly_proper());
        assert!(close(g2.eval(ONE).unwrap(), c(0.25), 1e-15));
        let g3 = r2.arg_scale_times_s(c(2.0)).unwrap();
        assert!(close(g3.eval(ONE).unwrap(), c(1.0 / 9.0), 1e-15));
        assert!(r.arg_scale_times_s(ZERO).is_err());

        let k2 = r2.codegree(1e-10).unwrap();
        assert_eq!(k2, 2);
        assert_eq!(g2.codegree(1e-10).unwrap(), 1);

        let mut rg = rng(43);
        let mut g = random_realization(&mut rg, 4);
        g = Realization::strictly_proper(g.a().clone(), g.b().clone(), g.c().clone()).unwrap();
        let y = C64::new(0.7, -0.4);
        let gs = g.arg_scale_times_s(y).unwrap();
        for s in random_points(&mut rg, 20) {
            assert!(close(gs.eval(s).unwrap(), g.eval(y * s).unwrap() * s, 1e-9));
        }
    }

    #[test]
    fn staircase_examples() {
        // Cauchy density Φ = Z + Z*, co-degree 2
        let z = Realization::scalar(c(-1.0), c(0.5 / PI), ONE, ZERO);
        let phi = z.add(&z.adjoint()).unwrap();
        let rep = phi.staircase_codegree(1e-10).unwrap();
        assert_eq!(rep.codegree, 2);
        assert_eq!(rep.basis.ncols(), 3);
        let k = Realization::scalar(c(-1.0), c(1.0 / PI.sqrt()), ONE, ZERO);
        assert_eq!(k.codegree(1e-10).unwrap(), 1);
        // 2/(π(1−s²)²) = K K* with K = √(2/π)/(s+1)²
        let k2 = first_order(-1.0).multiply(&first_order(-1.0)).unwrap().scale_output(c((2.0 / PI).sqrt()));
        let phi_t3 = k2.multiply(&k2.adjoint()).unwrap();
        assert_eq!(phi_t3.states(), 4);
        assert_eq!(phi_t3.codegree(1e-10).unwrap(), 4);
        let zero = Realization::strictly_proper(rmatrix(1, 1, &[-1.0]), CMatrix::zeros(1, 1), CMatrix::identity(1, 1)).unwrap();
        assert!(matches!(zero.codegree(1e-10), Err(Error::ZeroFunction)));
    }

    #[test]
    fn staircase_structure_and_markov_oracle() {
        let mut rg = rng(44);
        for n in 2..=6 {
            for planted in 1..=n {
                // Markov parameters vanish below `planted`: chain 1/(s+a)^planted plus noise realization
                let mut g = first_order(-1.3);
                for _ in 1..planted {
                    g = g.multiply(&first_order(-0.8)).unwrap();
                }
                let t = random_unitary(&mut rg, planted);
                let g = g.transform(&t, &t.adjoint());
                let rep = g.staircase_codegree(1e-10).unwrap();
                // brute-force Markov oracle
                let mut ak = CMatrix::identity(planted, planted);
                let scale = fnorm(g.c()) * fnorm(g.b());
                let mut oracle = 0;
                for k in 1..=planted {
                    let mk = (g.c() * &ak * g.b())[(0, 0)].norm();
                    if mk > 1e-10 * scale * fnorm(g.a()).powi(k as i32 - 1) {
                        oracle = k;
                        break;
                    }
                    ak = &ak * g.a();
                }
                assert_eq!(rep.codegree, oracle);
                assert_eq!(rep.codegree, planted);
                let dim = planted + 1;
                let q = &rep.staircase_q;
                let zz = &rep.staircase_z;
                assert!(fnorm(&(q * q.adjoint() - CMatrix::identity(dim, dim))) < 1e-12);
                assert!(fnorm(&(zz * zz.adjoint() - CMatrix::identity(dim, dim))) < 1e-12);
            }
            let _ = n;
        }
    }

    #[test]
    fn staircase_pencil_form() {
        let mut rg = rng(45);
        let g = random_realization(&mut rg, 6);
        let g = Realization::strictly_proper(g.a().clone(), g.b().clone(), g.c().clone()).unwrap();
        let st = Staircase::new(g.a(), g.b(), g.c(), 1e-10).unwrap();
        let dim = 7;
        let mut e = CMatrix::identity(dim, dim);
        e[(6, 6)] = ZERO;
        let mut nmat = CMatrix::zeros(dim, dim);
        nmat.view_mut((0, 0), (6, 6)).copy_from(g.a());
        for i in 0..6 {
            nmat[(i, 6)] = -g.b()[(i, 0)];
            nmat[(6, i)] = g.c()[(0, i)];
        }
        assert!(fnorm(&(&st.q * &e * &st.z - &st.e)) < 1e-12);
        assert!(fnorm(&(&st.q * &nmat * &st.z - &st.n)) < 1e-12 * fnorm(&nmat));
        let lead = st.lead();
        for i in 0..lead {
            assert_eq!(st.e[(i, i)], ZERO);
            assert!(st.n[(i, i)].norm() > 1e-8);
        }
    }

    #[test]
    fn minimal_reduce_examples() {
        let mut rg = rng(46);
        let g = random_realization(&mut rg, 3);
        let zero3 = Realization::new(
            random_matrix(&mut rg, 3, 3),
            CMatrix::zeros(3, 1),
            CMatrix::zeros(1, 3),
            CMatrix::zeros(1, 1),
        )
        .unwrap();
        let padded = g.add(&zero3).unwrap();
        let red = padded.minimal_reduce(1e-12).unwrap();
        assert_eq!(red.states(), 3);
        assert_eq!(g.minimal_reduce(1e-12).unwrap().states(), 3);

        // 1/(s+2) · (s+2)/(s+3): the pole at −2 cancels
        let r1 = first_order(-2.0);
        let r2 = Realization::scalar(c(-3.0), ONE, c(-1.0), ONE);
        let casc = r1.multiply(&r2).unwrap();
        let red = casc.minimal_reduce(1e-12).unwrap();
        assert_eq!(red.states(), 1);
        for s in random_points(&mut rg, 10) {
            assert!(close(red.eval(s).unwrap(), casc.eval(s).unwrap(), 1e-12));
            assert!(close(red.eval(s).unwrap(), ONE / (s + 3.0), 1e-12));
        }
        // unobservable state after a similarity scramble
        let t = random_matrix(&mut rg, 6, 6) + CMatrix::identity(6, 6).scale(3.0);
        let ti = crate::numerics::inverse(&t).unwrap();
        let scrambled = padded.transform(&t, &ti);
        assert_eq!(scrambled.minimal_reduce(1e-12).unwrap().states(), 3);
    }

    #[test]
    fn json_roundtrip() {
        let mut rg = rng(47);
        let g = random_realization(&mut rg, 3);
        let txt = serde_json::to_string(&g.to_json()).unwrap();
        let back: RealizationJson = serde_json::from_str(&txt).unwrap();
        assert_eq!(Realization::from_json(&back).unwrap(), g);
    }
}
