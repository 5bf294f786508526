// SPDX-License-Identifier: Apache-2.0

use num_complex::Complex64;
use serde::Serialize;

use super::Mat;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// An eigenvalue with a unit eigenvector.
///
/// `reliable` is false when the eigenvalue belongs to a defective cluster; the
/// vector is then only a member of the (too small) eigenspace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenPair<const N: usize> {
    pub value: Complex64,
    #[serde(skip)]
    pub vector: [Complex64; N],
    pub reliable: bool,
}

/// Roots of `η² − t η + d`, ordered so the first has the larger modulus.
fn quadratic_roots(t: Complex64, d: Complex64) -> [Complex64; 2] {
    let disc = (t * t - d * 4.0).sqrt();
    // Pick the sign that avoids cancellation, recover the other from the product.
    let big = if (t + disc).norm() >= (t - disc).norm() { (t + disc) * 0.5 } else { (t - disc) * 0.5 };
    if big.norm() == 0.0 {
        return [ZERO, ZERO];
    }
    [big, d / big]
}

/// Eigenvalues of a 2×2 matrix in closed form, ordered to continue a previous
/// choice: the first returned value is the root closest to `prev`.
pub fn eigen2_continuous(m: &Mat<2>, prev: Option<Complex64>) -> [Complex64; 2] {
    let [a, b] = quadratic_roots(m.trace(), m.det());
    match prev {
        Some(p) if (b - p).norm() < (a - p).norm() => [b, a],
        _ => [a, b],
    }
}

fn normalize<const N: usize>(v: [Complex64; N]) -> [Complex64; N] {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if n == 0.0 {
        return v;
    }
    v.map(|z| z / n)
}

fn residual<const N: usize>(m: &Mat<N>, value: Complex64, v: &[Complex64; N]) -> f64 {
    let mv = m.apply(v);
    mv.iter().zip(v).map(|(a, b)| (a - value * b).norm_sqr()).sum::<f64>().sqrt()
}

fn eigen2(m: &Mat<2>, tol: f64) -> Vec<EigenPair<2>> {
    let [l1, l2] = quadratic_roots(m.trace(), m.det());
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    let close = (l1 - l2).norm() <= tol * scale.max(1.0);
    let [[a, b], [c, d]] = m.0;
    let vec_for = |l: Complex64| -> Option<[Complex64; 2]> {
        let v1 = [b, l - a];
        let v2 = [l - d, c];
        let n1 = v1[0].norm() + v1[1].norm();
        let n2 = v2[0].norm() + v2[1].norm();
        let (v, n) = if n1 >= n2 { (v1, n1) } else { (v2, n2) };
        if n <= 1e-13 * scale {
            None
        } else {
            Some(normalize(v))
        }
    };
    if close {
        let mean = (l1 + l2) * 0.5;
        let scalar = (*m - Mat::<2>::identity().scale(mean)).max_abs() <= tol * scale.max(1.0);
        if scalar {
            return vec![
                EigenPair { value: l1, vector: [ONE, ZERO], reliable: true },
                EigenPair { value: l2, vector: [ZERO, ONE], reliable: true },
            ];
        }
        let v = vec_for(mean).unwrap_or([ONE, ZERO]);
        return vec![
            EigenPair { value: l1, vector: v, reliable: false },
            EigenPair { value: l2, vector: v, reliable: false },
        ];
    }
    [l1, l2]
        .into_iter()
        .map(|l| EigenPair { value: l, vector: vec_for(l).unwrap_or([ONE, ZERO]), reliable: true })
        .collect()
}

/// Householder reduction to upper Hessenberg form (similarity, eigenvalues only).
fn hessenberg<const N: usize>(m: &Mat<N>) -> Mat<N> {
    let mut h = *m;
    for k in 0..N.saturating_sub(2) {
        let alpha_norm = (k + 1..N).map(|i| h.0[i][k].norm_sqr()).sum::<f64>().sqrt();
        if alpha_norm == 0.0 {
            continue;
        }
        let x0 = h.0[k + 1][k];
        let phase = if x0.norm() == 0.0 { ONE } else { x0 / x0.norm() };
        let mut v = [ZERO; N];
        for i in k + 1..N {
            v[i] = h.0[i][k];
        }
        v[k + 1] += phase * alpha_norm;
        let vn = v.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if vn == 0.0 {
            continue;
        }
        // h ← (I − 2vv†/‖v‖²) h (I − 2vv†/‖v‖²)
        for j in 0..N {
            let s: Complex64 = (k + 1..N).map(|i| v[i].conj() * h.0[i][j]).sum();
            let s = s * (2.0 / vn);
            for i in k + 1..N {
                h.0[i][j] -= v[i] * s;
            }
        }
        for i in 0..N {
            let s: Complex64 = (k + 1..N).map(|j| h.0[i][j] * v[j]).sum();
            let s = s * (2.0 / vn);
            for j in k + 1..N {
                h.0[i][j] -= s * v[j].conj();
            }
        }
    }
    h
}

/// Eigenvalues by shifted QR iteration on the Hessenberg form.
pub fn eigenvalues<const N: usize>(m: &Mat<N>) -> [Complex64; N] {
    if N == 2 {
        let [a, b] = quadratic_roots(m.trace(), m.det());
        let mut out = [ZERO; N];
        out[0] = a;
        out[1] = b;
        return out;
    }
    let mut h = hessenberg(m);
    let mut out = [ZERO; N];
    let mut hi = N as isize - 1;
    let mut iters = 0usize;
    while hi >= 0 {
        let hiu = hi as usize;
        if hiu == 0 {
            out[0] = h.0[0][0];
            break;
        }
        // Deflate: find the start of the active unreduced block.
        let mut l = hiu;
        while l > 0 {
            let s = h.0[l - 1][l - 1].norm() + h.0[l][l].norm();
            let s = if s == 0.0 { h.max_abs() } else { s };
            if h.0[l][l - 1].norm() <= f64::EPSILON * s {
                h.0[l][l - 1] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hiu {
            out[hiu] = h.0[hiu][hiu];
            hi -= 1;
            iters = 0;
            continue;
        }
        iters += 1;
        if iters > 200 {
            // Give up refining; report the current diagonal.
            for i in 0..=hiu {
                out[i] = h.0[i][i];
            }
            break;
        }
        let shift = if iters % 11 == 0 {
            // Exceptional shift to break cycles.
            h.0[hiu][hiu] + Complex64::new(0.75, 0.5) * h.0[hiu][hiu - 1].norm()
        } else {
            let a = h.0[hiu - 1][hiu - 1];
            let b = h.0[hiu - 1][hiu];
            let c = h.0[hiu][hiu - 1];
            let d = h.0[hiu][hiu];
            let [r1, r2] = quadratic_roots(a + d, a * d - b * c);
            if (r1 - d).norm() < (r2 - d).norm() {
                r1
            } else {
                r2
            }
        };
        for i in l..=hiu {
            h.0[i][i] -= shift;
        }
        let mut rots = Vec::with_capacity(hiu - l);
        for k in l..hiu {
            let a = h.0[k][k];
            let b = h.0[k + 1][k];
            let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
            let (c, s) = if r == 0.0 { (ONE, ZERO) } else { (a / r, b / r) };
            // G = [[c̄, s̄], [−s, c]] applied to rows k, k+1.
            for j in k..=hiu {
                let (x, y) = (h.0[k][j], h.0[k + 1][j]);
                h.0[k][j] = c.conj() * x + s.conj() * y;
                h.0[k + 1][j] = -s * x + c * y;
            }
            rots.push((c, s));
        }
        for (idx, k) in (l..hiu).enumerate() {
            let (c, s) = rots[idx];
            for i in l..=(k + 1).min(hiu) {
                let (x, y) = (h.0[i][k], h.0[i][k + 1]);
                h.0[i][k] = x * c + y * s;
                h.0[i][k + 1] = -x * s.conj() + y * c.conj();
            }
        }
        for i in l..=hiu {
            h.0[i][i] += shift;
        }
    }
    out
}

/// Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order with the eigenvectors as the
/// columns of the returned unitary matrix.
pub fn hermitian_eigen<const N: usize>(m: &Mat<N>) -> ([f64; N], Mat<N>) {
    let mut a = (*m + m.adjoint()).scale_re(0.5);
    let mut v = Mat::<N>::identity();
    for _sweep in 0..60 {
        let off: f64 = (0..N)
            .flat_map(|i| (0..N).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a.0[i][j].norm_sqr())
            .sum();
        let diag: f64 = (0..N).map(|i| a.0[i][i].norm_sqr()).sum();
        if off <= 1e-32 * diag.max(f64::MIN_POSITIVE) || off == 0.0 {
            break;
        }
        for p in 0..N {
            for q in p + 1..N {
                let apq = a.0[p][q];
                if apq.norm() == 0.0 {
                    continue;
                }
                let phase = apq / apq.norm();
                let app = a.0[p][p].re;
                let aqq = a.0[q][q].re;
                let zeta = (aqq - app) / (2.0 * apq.norm());
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // U = D R with D = diag(.., e^{-iφ} at q), R real rotation.
                let mut u = Mat::<N>::identity();
                u.0[p][p] = Complex64::new(c, 0.0);
                u.0[p][q] = Complex64::new(s, 0.0);
                u.0[q][p] = -phase.conj() * s;
                u.0[q][q] = phase.conj() * c;
                a = u.adjoint() * a * u;
                v = v * u;
            }
        }
    }
    let mut idx: Vec<usize> = (0..N).collect();
    idx.sort_by(|&i, &j| a.0[i][i].re.total_cmp(&a.0[j][j].re));
    let mut vals = [0.0; N];
    let mut vecs = Mat::<N>::zero();
    for (k, &i) in idx.iter().enumerate() {
        vals[k] = a.0[i][i].re;
        for r in 0..N {
            vecs.0[r][k] = v.0[r][i];
        }
    }
    (vals, vecs)
}

/// Singular values in ascending order with the matching right singular vectors.
fn right_singular<const N: usize>(b: &Mat<N>) -> ([f64; N], Mat<N>) {
    let (vals, vecs) = hermitian_eigen(&(b.adjoint() * *b));
    (vals.map(|x| x.max(0.0).sqrt()), vecs)
}

/// Number of singular values of `M − ηI` below `tol · max(1, ‖M‖)`.
pub fn eigenspace_dim<const N: usize>(m: &Mat<N>, eta: Complex64, tol: f64) -> usize {
    let b = *m - Mat::<N>::identity().scale(eta);
    let (sv, _) = right_singular(&b);
    let bound = tol * m.norm().max(1.0);
    sv.iter().filter(|&&s| s <= bound).count()
}

/// Dimension of the joint eigenspace `{v : M_k v = η v for all k}`.
pub fn common_eigenspace_dim<const N: usize>(ms: &[Mat<N>], eta: Complex64, tol: f64) -> usize {
    let mut gram = Mat::<N>::zero();
    let mut scale = 1.0f64;
    for m in ms {
        let b = *m - Mat::<N>::identity().scale(eta);
        gram += b.adjoint() * b;
        scale = scale.max(m.norm());
    }
    let (vals, _) = hermitian_eigen(&gram);
    let bound = tol * scale;
    vals.iter().filter(|&&s| s.max(0.0).sqrt() <= bound).count()
}

/// Solves `b x = rhs` by Gaussian elimination, replacing vanishing pivots by a
/// tiny value (the inverse-iteration convention).
fn solve_regularized<const N: usize>(b: &Mat<N>, rhs: [Complex64; N]) -> [Complex64; N] {
    let mut a = b.0;
    let mut x = rhs;
    let tiny = f64::EPSILON * b.max_abs().max(f64::MIN_POSITIVE);
    for col in 0..N {
        let piv = (col..N).max_by(|&p, &q| a[p][col].norm().total_cmp(&a[q][col].norm())).unwrap_or(col);
        a.swap(piv, col);
        x.swap(piv, col);
        if a[col][col].norm() < tiny {
            a[col][col] = Complex64::new(tiny, 0.0);
        }
        for r in col + 1..N {
            let f = a[r][col] / a[col][col];
            for c in col..N {
                let v = a[col][c];
                a[r][c] -= f * v;
            }
            let xv = x[col];
            x[r] -= f * xv;
        }
    }
    for col in (0..N).rev() {
        let mut s = x[col];
        for c in col + 1..N {
            s -= a[col][c] * x[c];
        }
        x[col] = s / a[col][col];
    }
    x
}

/// Eigenvalues and eigenvectors of a 2×2 or 4×4 matrix.
///
/// The 2×2 case is closed form. Larger sizes use Hessenberg QR for the
/// eigenvalues, then null vectors of `M − ηI` refined by inverse iteration.
/// Clusters whose eigenspace is smaller than their algebraic multiplicity are
/// flagged unreliable.
pub fn eigen<const N: usize>(m: &Mat<N>) -> Vec<EigenPair<N>> {
    const CLUSTER: f64 = 1e-7;
    if N == 2 {
        let m2 = Mat::<2>::from_fn(|i, j| m.0[i][j]);
        return eigen2(&m2, CLUSTER)
            .into_iter()
            .map(|p| {
                let mut v = [ZERO; N];
                v[0] = p.vector[0];
                v[1] = p.vector[1];
                EigenPair { value: p.value, vector: v, reliable: p.reliable }
            })
            .collect();
    }
    let vals = eigenvalues(m);
    let scale = m.max_abs().max(1.0);
    let mut assigned = [false; N];
    let mut out: Vec<Option<EigenPair<N>>> = vec![None; N];
    for i in 0..N {
        if assigned[i] {
            continue;
        }
        let cluster: Vec<usize> =
            (i..N).filter(|&j| !assigned[j] && (vals[j] - vals[i]).norm() <= CLUSTER * scale).collect();
        let mean: Complex64 = cluster.iter().map(|&j| vals[j]).sum::<Complex64>() / cluster.len() as f64;
        let b = *m - Mat::<N>::identity().scale(mean);
        let (sv, vecs) = right_singular(&b);
        let null_bound = 1e-6 * scale;
        let geom = sv.iter().filter(|&&s| s <= null_bound).count().max(1);
        let reliable = geom >= cluster.len();
        for (k, &j) in cluster.iter().enumerate() {
            let col = k.min(geom - 1);
            let mut v = [ZERO; N];
            for r in 0..N {
                v[r] = vecs.0[r][col];
            }
            if cluster.len() == 1 {
                let bj = *m - Mat::<N>::identity().scale(vals[j]);
                for _ in 0..3 {
                    let next = normalize(solve_regularized(&bj, v));
                    if next.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                        v = next;
                    }
                }
            }
            out[j] = Some(EigenPair { value: vals[j], vector: normalize(v), reliable });
            assigned[j] = true;
        }
    }
    out.into_iter().flatten().collect()
}

/// Residual `‖M v − η v‖` of an eigenpair.
pub fn pair_residual<const N: usize>(m: &Mat<N>, p: &EigenPair<N>) -> f64 {
    residual(m, p.value, &p.vector)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::mat_exp;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample4(seed: u64) -> Mat<4> {
        let mut x = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        Mat::<4>::from_fn(|_, _| {
            let mut next = || {
                x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((x >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
            };
            c(next(), next())
        })
    }

    #[test]
    fn identity_has_unit_eigenvalues() {
        for p in eigen(&Mat::<4>::identity()) {
            assert!((p.value - 1.0).norm() < 1e-14);
            assert!(p.reliable);
        }
        assert_eq!(eigenspace_dim(&Mat::<4>::identity(), c(1.0, 0.0), 1e-8), 4);
    }

    #[test]
    fn diagonal_2x2() {
        let m = Mat::<2>::diag([c(2.0, 0.0), c(0.5, 0.0)]);
        let mut v: Vec<f64> = eigen(&m).iter().map(|p| p.value.re).collect();
        v.sort_by(f64::total_cmp);
        assert!((v[0] - 0.5).abs() < 1e-15 && (v[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn random_4x4_residuals_and_invariants() {
        for seed in 0..50 {
            let m = sample4(seed);
            let pairs = eigen(&m);
            assert_eq!(pairs.len(), 4);
            let sum: Complex64 = pairs.iter().map(|p| p.value).sum();
            let prod: Complex64 = pairs.iter().map(|p| p.value).product();
            assert!((sum - m.trace()).norm() < 1e-9 * m.norm());
            assert!((prod - m.det()).norm() < 1e-9 * m.norm().powi(4));
            for p in &pairs {
                assert!(pair_residual(&m, p) < 1e-10 * m.norm(), "seed {seed}");
            }
        }
    }

    #[test]
    fn defective_is_flagged() {
        let m = Mat::<2>::new(c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0));
        assert!(eigen(&m).iter().all(|p| !p.reliable));
        let mut j4 = Mat::<4>::identity();
        j4[(0, 1)] = c(1.0, 0.0);
        let pairs = eigen(&j4);
        assert!(pairs.iter().any(|p| !p.reliable));
    }

    #[test]
    fn unitary_spectrum_on_circle() {
        let a = sample4(7);
        let skew = (a - a.adjoint()).scale_re(0.5);
        let u = mat_exp(&skew).unwrap();
        for p in eigen(&u) {
            assert!((p.value.norm() - 1.0).abs() < 1e-12);
            assert!(pair_residual(&u, &p) < 1e-10);
        }
    }

    #[test]
    fn hermitian_jacobi_reconstructs() {
        let a = sample4(3);
        let h = a + a.adjoint();
        let (vals, v) = hermitian_eigen(&h);
        let rec = v * Mat::<4>::diag(vals.map(|x| c(x, 0.0))) * v.adjoint();
        assert!((rec - h).max_abs() < 1e-12);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn continuous_branch_follows_previous() {
        let m = Mat::<2>::diag([c(3.0, 0.0), c(1.0 / 3.0, 0.0)]);
        let [a, _] = eigen2_continuous(&m, Some(c(0.3, 0.0)));
        assert!((a - 1.0 / 3.0).norm() < 1e-15);
    }

    #[test]
    fn common_eigenspace_of_commuting_pair() {
        let m1 = Mat::<4>::diag([c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(0.5, 0.0)]);
        let m2 = Mat::<4>::diag([c(1.0, 0.0), c(1.0, 0.0), c(0.5, 0.0), c(2.0, 0.0)]);
        assert_eq!(common_eigenspace_dim(&[m1, m2], c(1.0, 0.0), 1e-8), 2);
        let m3 = Mat::<4>::diag([c(1.0, 0.0), c(3.0, 0.0), c(2.0, 0.0), c(0.5, 0.0)]);
        assert_eq!(common_eigenspace_dim(&[m1, m3], c(1.0, 0.0), 1e-8), 1);
    }
}
