use crate::error::{Error, Result};
use crate::C64;

pub fn cdot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn cnorm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy)]
pub struct IterativeReport {
    pub iterations: usize,
    pub residual: f64,
}

/// Restarted GMRES for `A x = b` with a matrix-free `A`. Relative residual
/// tolerance `tol`.
pub fn gmres<F>(apply: F, b: &[C64], x0: &[C64], tol: f64, restart: usize, max_iter: usize) -> Result<(Vec<C64>, IterativeReport)>
where
    F: Fn(&[C64]) -> Vec<C64>,
{
    let n = b.len();
    let bnorm = cnorm(b).max(f64::MIN_POSITIVE);
    let mut x = x0.to_vec();
    let mut total = 0;
    loop {
        let ax = apply(&x);
        let r: Vec<C64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let beta = cnorm(&r);
        if beta / bnorm <= tol {
            return Ok((x, IterativeReport { iterations: total, residual: beta / bnorm }));
        }
        if total >= max_iter {
            return Err(Error::NonConvergence {
                iterations: total,
                residual: beta / bnorm,
                contraction: f64::NAN,
            });
        }
        let m = restart;
        let mut v: Vec<Vec<C64>> = Vec::with_capacity(m + 1);
        v.push(r.iter().map(|z| z / beta).collect());
        let mut h = vec![vec![C64::new(0.0, 0.0); m]; m + 1];
        let mut cs = vec![C64::new(0.0, 0.0); m];
        let mut sn = vec![C64::new(0.0, 0.0); m];
        let mut g = vec![C64::new(0.0, 0.0); m + 1];
        g[0] = C64::new(beta, 0.0);
        let mut used = 0;
        for j in 0..m {
            let mut w = apply(&v[j]);
            for i in 0..=j {
                let hij = cdot(&v[i], &w);
                h[i][j] = hij;
                w.iter_mut().zip(&v[i]).for_each(|(w, vi)| *w -= hij * vi);
            }
            let wn = cnorm(&w);
            h[j + 1][j] = C64::new(wn, 0.0);
            for i in 0..j {
                let t = cs[i].conj() * h[i][j] + sn[i].conj() * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let a = h[j][j];
            let bb = h[j + 1][j];
            let den = (a.norm_sqr() + bb.norm_sqr()).sqrt();
            if den == 0.0 {
                cs[j] = C64::new(1.0, 0.0);
                sn[j] = C64::new(0.0, 0.0);
            } else {
                cs[j] = a / den;
                sn[j] = bb / den;
            }
            h[j][j] = cs[j].conj() * a + sn[j].conj() * bb;
            h[j + 1][j] = C64::new(0.0, 0.0);
            g[j + 1] = -sn[j] * g[j];
            g[j] = cs[j].conj() * g[j];
            used = j + 1;
            total += 1;
            if g[j + 1].norm() / bnorm <= tol * 0.5 || wn == 0.0 || total >= max_iter {
                break;
            }
            v.push(w.iter().map(|z| z / wn).collect());
        }
        let mut y = vec![C64::new(0.0, 0.0); used];
        for i in (0..used).rev() {
            let mut s = g[i];
            for k in i + 1..used {
                s -= h[i][k] * y[k];
            }
            y[i] = s / h[i][i];
        }
        for (i, yi) in y.iter().enumerate() {
            x.iter_mut().zip(&v[i]).for_each(|(x, vi)| *x += yi * vi);
        }
        if n == 0 {
            return Ok((x, IterativeReport { iterations: 0, residual: 0.0 }));
        }
    }
}

/// Conjugate gradients for a symmetric positive definite real operator.
pub fn conjugate_gradient<F>(apply: F, b: &[f64], tol: f64, max_iter: usize) -> Result<(Vec<f64>, IterativeReport)>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let n = b.len();
    let bnorm = dot(b, b).sqrt();
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((x, IterativeReport { iterations: 0, residual: 0.0 }));
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    for it in 0..max_iter {
        if rr.sqrt() / bnorm <= tol {
            return Ok((x, IterativeReport { iterations: it, residual: rr.sqrt() / bnorm }));
        }
        let ap = apply(&p);
        let alpha = rr / dot(&p, &ap);
        x.iter_mut().zip(&p).for_each(|(x, p)| *x += alpha * p);
        r.iter_mut().zip(&ap).for_each(|(r, a)| *r -= alpha * a);
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        p.iter_mut().zip(&r).for_each(|(p, r)| *p = r + beta * *p);
    }
    if rr.sqrt() / bnorm <= tol {
        return Ok((x, IterativeReport { iterations: max_iter, residual: rr.sqrt() / bnorm }));
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        residual: rr.sqrt() / bnorm,
        contraction: f64::NAN,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gmres_solves_nonsymmetric_system() {
        let n = 30;
        let a = |i: usize, j: usize| -> C64 {
            if i == j {
                C64::new(3.0, 0.5)
            } else {
                C64::new(((i * 7 + j * 3) % 5) as f64 * 0.02, ((i + 2 * j) % 3) as f64 * 0.03)
            }
        };
        let apply = |x: &[C64]| -> Vec<C64> { (0..n).map(|i| (0..n).map(|j| a(i, j) * x[j]).sum()).collect() };
        let xt: Vec<C64> = (0..n).map(|i| C64::new(i as f64, 1.0)).collect();
        let b = apply(&xt);
        let (x, rep) = gmres(apply, &b, &vec![C64::new(0.0, 0.0); n], 1e-12, 8, 500).unwrap();
        assert!(rep.residual <= 1e-12);
        let err: f64 = x.iter().zip(&xt).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-9, "{err}");
    }

    #[test]
    fn cg_solves_spd_system() {
        let n = 50;
        let apply = |x: &[f64]| -> Vec<f64> {
            (0..n)
                .map(|i| {
                    let l = if i > 0 { x[i - 1] } else { 0.0 };
                    let r = if i + 1 < n { x[i + 1] } else { 0.0 };
                    2.5 * x[i] - l - r
                })
                .collect()
        };
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let (x, _) = conjugate_gradient(apply, &b, 1e-13, 500).unwrap();
        let res: f64 = apply(&x).iter().zip(&b).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(res < 1e-10);
    }
}
