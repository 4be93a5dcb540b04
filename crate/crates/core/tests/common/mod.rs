#![allow(dead_code)]

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use ratvol::numerics::CMatrix;
use std::collections::BinaryHeap;
use std::cmp::Ordering;

// Gauss–Kronrod 7/15 nodes and weights on [-1, 1]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

struct Seg {
    a: f64,
    b: f64,
    val: f64,
    err: f64,
}

impl PartialEq for Seg {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Seg {}
impl PartialOrd for Seg {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Seg {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// Globally adaptive Gauss–Kronrod quadrature on `[a, b]`.
pub fn integrate(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, rel_tol: f64, max_segs: usize) -> f64 {
    let mut heap = BinaryHeap::new();
    let init = 16;
    for i in 0..init {
        let lo = a + (b - a) * i as f64 / init as f64;
        let hi = a + (b - a) * (i + 1) as f64 / init as f64;
        let (val, err) = gk15(f, lo, hi);
        heap.push(Seg { a: lo, b: hi, val, err });
    }
    loop {
        let total: f64 = heap.iter().map(|s| s.val).sum();
        let err: f64 = heap.iter().map(|s| s.err).sum();
        if err <= rel_tol * total.abs() || heap.len() >= max_segs {
            return total;
        }
        let s = heap.pop().unwrap();
        let m = 0.5 * (s.a + s.b);
        for (lo, hi) in [(s.a, m), (m, s.b)] {
            let (val, err) = gk15(f, lo, hi);
            heap.push(Seg { a: lo, b: hi, val, err });
        }
    }
}

/// `∫_ℝ f` through `x = center + scale·tan θ`.
pub fn integrate_line(f: &mut dyn FnMut(f64) -> f64, center: f64, scale: f64, rel_tol: f64) -> f64 {
    let half = std::f64::consts::FRAC_PI_2;
    let mut g = |t: f64| {
        let c = t.cos();
        f(center + scale * t.tan()) * scale / (c * c)
    };
    integrate(&mut g, -half, half, rel_tol, 4000)
}

pub fn random_complex(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> CMatrix {
    CMatrix::from_fn(r, c, |_, _| random_complex(rng))
}

/// Random matrix whose eigenvalues have real parts in `[-3, -0.2]`.
pub fn random_stable(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let mut t = random_matrix(rng, n, n).scale(0.5);
    for i in 0..n {
        for j in 0..i {
            t[(i, j)] = C64::new(0.0, 0.0);
        }
        t[(i, i)] = C64::new(-rng.random_range(0.2..3.0), rng.random_range(-3.0..3.0));
    }
    let q = random_matrix(rng, n, n).qr().q();
    &q * t * q.adjoint()
}

/// Relative difference of two reals.
pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
