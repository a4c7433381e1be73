use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_complex::Complex64;
use num_traits::Zero;

use super::{ComplexMatrix, Matrix, Scalar, MAX_EIG_DIM};
use crate::{Error, Result};

const RESIDUAL_TOL: f64 = 1e-10;
/// Components below this fraction of the largest one count as zero when
/// fixing the phase.
pub(crate) const LEAD_THRESHOLD: f64 = 1e-10;
const JACOBI_SWEEPS: usize = 64;
const QR_ITERATIONS_PER_DIM: usize = 60;

/// Eigenvalue with its unit-norm eigenvector.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenPair {
    pub value: Complex64,
    pub vector: Vec<Complex64>,
}

impl EigenPair {
    /// Real parts of the eigenvector components.
    pub fn real_vector(&self) -> Vec<f64> {
        self.vector.iter().map(|c| c.re).collect()
    }
}

/// Eigen-decomposition of a matrix of dimension at most 8.
///
/// Dimension 2 is solved in closed form. Larger Hermitian inputs use cyclic
/// Jacobi rotations, anything else a Hessenberg reduction followed by shifted
/// QR sweeps and back-substitution on the Schur form.
///
/// Pairs are sorted ascending by real part, then by imaginary part. Vectors
/// have unit Euclidean norm with the first nonzero component real and
/// positive. Every pair satisfies `‖M·v − λ·v‖∞ ≤ 1e-10·‖M‖∞`, otherwise
/// [`Error::NoConvergence`] is returned with the worst residual.
pub fn eig<T: Scalar>(m: &Matrix<T>) -> Result<Vec<EigenPair>> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows();
    if n == 0 || n > MAX_EIG_DIM {
        return Err(Error::UnsupportedDimension(n));
    }
    if !m.is_finite() {
        return Err(Error::NonFinite("eig input"));
    }
    let a = m.map(|x| x.to_complex());
    let scale = a.norm_inf();
    let mut pairs = match n {
        1 => vec![EigenPair {
            value: a[(0, 0)],
            vector: vec![Complex64::new(1.0, 0.0)],
        }],
        2 => analytic_2x2(&a),
        _ if is_hermitian(&a, scale) => jacobi(&a)?,
        _ => schur_qr(&a)?,
    };
    for p in &mut pairs {
        normalize(&mut p.vector);
    }
    let tie = 1e-12 * scale.max(f64::MIN_POSITIVE);
    pairs.sort_by(|x, y| order(x.value, y.value, tie));

    let residual = pairs.iter().map(|p| residual(&a, p)).fold(0.0, f64::max);
    if !(residual <= RESIDUAL_TOL * scale) {
        return Err(Error::NoConvergence { residual });
    }
    Ok(pairs)
}

fn order(a: Complex64, b: Complex64, tie: f64) -> Ordering {
    if (a.re - b.re).abs() > tie {
        a.re.total_cmp(&b.re)
    } else {
        a.im.total_cmp(&b.im)
    }
}

fn residual(a: &ComplexMatrix, p: &EigenPair) -> f64 {
    let av = a.mul_vec(&p.vector);
    av.iter()
        .zip(&p.vector)
        .map(|(x, v)| (*x - p.value * *v).norm())
        .fold(0.0, f64::max)
}

fn is_hermitian(a: &ComplexMatrix, scale: f64) -> bool {
    let n = a.rows();
    (0..n).all(|i| (i..n).all(|j| (a[(i, j)] - a[(j, i)].conj()).norm() <= 1e-14 * scale))
}

fn normalize(v: &mut [Complex64]) {
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return;
    }
    let big = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let lead = v
        .iter()
        .position(|c| c.norm() > LEAD_THRESHOLD * big)
        .unwrap_or(0);
    let phase = v[lead].conj() / v[lead].norm();
    for c in v.iter_mut() {
        *c = *c * phase / norm;
    }
    v[lead] = Complex64::new(v[lead].norm(), 0.0);
}

fn analytic_2x2(m: &ComplexMatrix) -> Vec<EigenPair> {
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let mean = (a + d) * 0.5;
    let half = (a - d) * 0.5;
    let root = (half * half + b * c).sqrt();
    [mean - root, mean + root]
        .into_iter()
        .enumerate()
        .map(|(k, value)| {
            let from_row0 = [b, value - a];
            let from_row1 = [value - d, c];
            let n0 = from_row0[0].norm_sqr() + from_row0[1].norm_sqr();
            let n1 = from_row1[0].norm_sqr() + from_row1[1].norm_sqr();
            let vector = if n0 == 0.0 && n1 == 0.0 {
                let mut e = vec![Complex64::zero(); 2];
                e[k] = Complex64::new(1.0, 0.0);
                e
            } else if n0 >= n1 {
                from_row0.to_vec()
            } else {
                from_row1.to_vec()
            };
            EigenPair { value, vector }
        })
        .collect()
}

/// Cyclic Jacobi for Hermitian input.
fn jacobi(m: &ComplexMatrix) -> Result<Vec<EigenPair>> {
    let n = m.rows();
    let mut a = m.clone();
    let mut v = ComplexMatrix::identity(n);
    let frob = a
        .as_slice()
        .iter()
        .map(|c| c.norm_sqr())
        .sum::<f64>()
        .sqrt();
    let target = f64::EPSILON * frob;
    for _ in 0..JACOBI_SWEEPS {
        let off = off_diagonal(&a);
        if off <= target {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let h = a[(p, q)];
                let mag = h.norm();
                if mag <= f64::MIN_POSITIVE {
                    continue;
                }
                let e = h / mag;
                let tau = (a[(q, q)].re - a[(p, p)].re) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let se = e * s;
                let sec = se.conj();
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = akp * c - akq * sec;
                    a[(k, q)] = akp * se + akq * c;
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = vkp * c - vkq * sec;
                    v[(k, q)] = vkp * se + vkq * c;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = apk * c - aqk * se;
                    a[(q, k)] = apk * sec + aqk * c;
                }
                a[(p, q)] = Complex64::zero();
                a[(q, p)] = Complex64::zero();
                a[(p, p)].im = 0.0;
                a[(q, q)].im = 0.0;
            }
        }
    }
    if off_diagonal(&a) > 1e3 * target.max(f64::MIN_POSITIVE) {
        let residual = off_diagonal(&a);
        return Err(Error::NoConvergence { residual });
    }
    Ok((0..n)
        .map(|k| EigenPair {
            value: Complex64::new(a[(k, k)].re, 0.0),
            vector: v.column(k),
        })
        .collect())
}

fn off_diagonal(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Householder reduction to upper Hessenberg form; returns `(H, Q)` with
/// `M = Q·H·Q†`.
fn hessenberg(m: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n = m.rows();
    let mut h = m.clone();
    let mut q = ComplexMatrix::identity(n);
    for k in 0..n.saturating_sub(2) {
        let x: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let tail = x[1..].iter().map(|c| c.norm_sqr()).sum::<f64>();
        if tail == 0.0 {
            continue;
        }
        let xnorm = (x[0].norm_sqr() + tail).sqrt();
        let phase = if x[0].norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x[0] / x[0].norm()
        };
        let mut u = x;
        u[0] += phase * xnorm;
        let unorm = u.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        for c in &mut u {
            *c /= unorm;
        }
        // H ← (I − 2uu†) H (I − 2uu†), acting on indices k+1..n
        for j in 0..n {
            let dot = (0..u.len()).fold(Complex64::zero(), |acc, i| {
                acc + u[i].conj() * h[(k + 1 + i, j)]
            });
            for i in 0..u.len() {
                h[(k + 1 + i, j)] -= u[i] * dot * 2.0;
            }
        }
        for target in [&mut h, &mut q] {
            for i in 0..n {
                let dot = (0..u.len()).fold(Complex64::zero(), |acc, l| {
                    acc + target[(i, k + 1 + l)] * u[l]
                });
                for l in 0..u.len() {
                    target[(i, k + 1 + l)] -= dot * u[l].conj() * 2.0;
                }
            }
        }
        for i in k + 2..n {
            h[(i, k)] = Complex64::zero();
        }
    }
    (h, q)
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let mean = (a + d) * 0.5;
    let root = ((a - d) * (a - d) * 0.25 + b * c).sqrt();
    let (l1, l2) = (mean + root, mean - root);
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Complex Schur form by explicitly shifted QR on the Hessenberg matrix,
/// followed by back-substitution for the eigenvectors.
fn schur_qr(m: &ComplexMatrix) -> Result<Vec<EigenPair>> {
    let n = m.rows();
    let (mut h, mut z) = hessenberg(m);
    let budget = QR_ITERATIONS_PER_DIM * n;
    let mut hi = n - 1;
    let mut since_deflation = 0;
    let mut iterations = 0;
    while hi > 0 {
        for i in 1..=hi {
            let sub = h[(i, i - 1)].norm();
            if sub <= f64::EPSILON * (h[(i - 1, i - 1)].norm() + h[(i, i)].norm())
                || sub < f64::MIN_POSITIVE
            {
                h[(i, i - 1)] = Complex64::zero();
            }
        }
        if h[(hi, hi - 1)] == Complex64::zero() {
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        let mut lo = hi - 1;
        while lo > 0 && h[(lo, lo - 1)] != Complex64::zero() {
            lo -= 1;
        }
        iterations += 1;
        if iterations > budget {
            break;
        }
        since_deflation += 1;
        let mu = if since_deflation % 11 == 0 {
            h[(hi, hi)] + Complex64::new(h[(hi, hi - 1)].norm(), 0.0) * 0.75
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };
        qr_sweep(&mut h, &mut z, lo, hi, mu);
    }
    if hi > 0 {
        let residual = (1..n).map(|i| h[(i, i - 1)].norm()).fold(0.0, f64::max);
        return Err(Error::NoConvergence { residual });
    }

    let tnorm = h.max_abs().max(f64::MIN_POSITIVE);
    let smin = f64::EPSILON * tnorm;
    let mut pairs = Vec::with_capacity(n);
    for k in 0..n {
        let lambda = h[(k, k)];
        let mut y = vec![Complex64::zero(); n];
        y[k] = Complex64::new(1.0, 0.0);
        for j in (0..k).rev() {
            let s = (j + 1..=k).fold(Complex64::zero(), |acc, l| acc + h[(j, l)] * y[l]);
            let mut denom = h[(j, j)] - lambda;
            if denom.norm() < smin {
                denom = Complex64::new(smin, 0.0);
            }
            y[j] = -s / denom;
        }
        pairs.push(EigenPair {
            value: lambda,
            vector: z.mul_vec(&y),
        });
    }
    Ok(pairs)
}

fn qr_sweep(h: &mut ComplexMatrix, z: &mut ComplexMatrix, lo: usize, hi: usize, mu: Complex64) {
    let n = h.rows();
    for i in lo..=hi {
        h[(i, i)] -= mu;
    }
    let mut rotations = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let (x, y) = (h[(k, k)], h[(k + 1, k)]);
        let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
        let (c, s) = if r == 0.0 {
            (1.0, Complex64::zero())
        } else if x.norm() == 0.0 {
            (0.0, y.conj() / y.norm())
        } else {
            (x.norm() / r, (x / x.norm()) * y.conj() / r)
        };
        for j in k..n {
            let (a, b) = (h[(k, j)], h[(k + 1, j)]);
            h[(k, j)] = a * c + s * b;
            h[(k + 1, j)] = -s.conj() * a + b * c;
        }
        rotations.push((k, c, s));
    }
    for &(k, c, s) in &rotations {
        let rows = (k + 2).min(hi) + 1;
        for i in 0..rows {
            let (a, b) = (h[(i, k)], h[(i, k + 1)]);
            h[(i, k)] = a * c + b * s.conj();
            h[(i, k + 1)] = -a * s + b * c;
        }
        for i in 0..n {
            let (a, b) = (z[(i, k)], z[(i, k + 1)]);
            z[(i, k)] = a * c + b * s.conj();
            z[(i, k + 1)] = -a * s + b * c;
        }
    }
    for i in lo..=hi {
        h[(i, i)] += mu;
    }
}
