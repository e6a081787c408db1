//! Polynomial helpers: Chebyshev series on an affine window, monomial
//! conversions, companion-matrix roots.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C64 = Complex64;

/// The affine map x = center + half·t taking [-1, 1] onto a window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub center: f64,
    pub half: f64,
}

impl Window {
    pub fn new(lo: f64, hi: f64) -> Self {
        Window {
            center: 0.5 * (lo + hi),
            half: 0.5 * (hi - lo),
        }
    }

    pub fn to_unit(&self, x: f64) -> f64 {
        (x - self.center) / self.half
    }

    pub fn to_unit_c(&self, z: C64) -> C64 {
        (z - self.center) / self.half
    }

    pub fn from_unit(&self, t: f64) -> f64 {
        self.center + self.half * t
    }
}

/// A real polynomial Σ c_k T_k(t) in the Chebyshev basis of the unit variable.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebSeries {
    pub coeffs: Vec<f64>,
}

impl ChebSeries {
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let c = &self.coeffs;
        match c.len() {
            0 => 0.0,
            1 => c[0],
            _ => {
                let mut b1 = 0.0;
                let mut b2 = 0.0;
                for &ck in c[1..].iter().rev() {
                    let tmp = 2.0 * t * b1 - b2 + ck;
                    b2 = b1;
                    b1 = tmp;
                }
                t * b1 - b2 + c[0]
            }
        }
    }

    pub fn eval_c(&self, t: C64) -> C64 {
        let c = &self.coeffs;
        match c.len() {
            0 => C64::new(0.0, 0.0),
            1 => C64::new(c[0], 0.0),
            _ => {
                let mut b1 = C64::new(0.0, 0.0);
                let mut b2 = C64::new(0.0, 0.0);
                for &ck in c[1..].iter().rev() {
                    let tmp = 2.0 * t * b1 - b2 + ck;
                    b2 = b1;
                    b1 = tmp;
                }
                t * b1 - b2 + c[0]
            }
        }
    }

    pub fn derivative(&self) -> ChebSeries {
        let n = self.coeffs.len();
        if n <= 1 {
            return ChebSeries { coeffs: vec![0.0] };
        }
        let mut d = vec![0.0; n - 1];
        for k in (0..n - 1).rev() {
            let next = if k + 2 < n - 1 { d[k + 2] } else { 0.0 };
            d[k] = next + 2.0 * (k + 1) as f64 * self.coeffs[k + 1];
        }
        d[0] *= 0.5;
        ChebSeries { coeffs: d }
    }

    /// Monomial coefficients in t, lowest degree first.
    pub fn to_monomial(&self) -> Vec<f64> {
        let n = self.coeffs.len();
        let mut out = vec![0.0; n.max(1)];
        // T_0 = 1, T_1 = t, T_{k+1} = 2t T_k - T_{k-1}
        let mut prev = vec![1.0];
        let mut cur = vec![0.0, 1.0];
        for (k, &c) in self.coeffs.iter().enumerate() {
            let basis: &[f64] = match k {
                0 => &prev,
                1 => &cur,
                _ => {
                    let mut next = vec![0.0; k + 1];
                    for (j, &v) in cur.iter().enumerate() {
                        next[j + 1] += 2.0 * v;
                    }
                    for (j, &v) in prev.iter().enumerate() {
                        next[j] -= v;
                    }
                    prev = std::mem::replace(&mut cur, next);
                    &cur
                }
            };
            for (j, &v) in basis.iter().enumerate() {
                out[j] += c * v;
            }
        }
        out
    }

    pub fn from_monomial(mono: &[f64]) -> ChebSeries {
        // t^k expanded in Chebyshev polynomials via repeated multiplication by t
        let n = mono.len();
        let mut out = vec![0.0; n.max(1)];
        let mut power = vec![1.0];
        for (k, &c) in mono.iter().enumerate() {
            if k > 0 {
                let mut next = vec![0.0; k + 1];
                for (j, &v) in power.iter().enumerate() {
                    if j == 0 {
                        next[1] += v;
                    } else {
                        next[j + 1] += 0.5 * v;
                        next[j - 1] += 0.5 * v;
                    }
                }
                power = next;
            }
            for (j, &v) in power.iter().enumerate() {
                out[j] += c * v;
            }
        }
        ChebSeries { coeffs: out }
    }
}

impl ChebSeries {
    /// Roots from the balanced colleague matrix, Newton-polished on the series.
    pub fn roots(&self) -> Option<Vec<C64>> {
        let mut c = self.coeffs.clone();
        while c.len() > 1 && c.last() == Some(&0.0) {
            c.pop();
        }
        let n = c.len() - 1;
        if n == 0 {
            return Some(vec![]);
        }
        if n == 1 {
            return Some(vec![C64::new(-c[0] / c[1], 0.0)]);
        }
        let zero = C64::new(0.0, 0.0);
        let mut m = DMatrix::from_element(n, n, zero);
        m[(0, 1)] = C64::new(1.0, 0.0);
        for i in 1..n {
            m[(i, i - 1)] = C64::new(0.5, 0.0);
            if i + 1 < n {
                m[(i, i + 1)] = C64::new(0.5, 0.0);
            }
        }
        for k in 0..n {
            m[(n - 1, k)] -= C64::new(c[k] / (2.0 * c[n]), 0.0);
        }
        balance(&mut m);
        let mut roots = eigenvalues_c(m)?;
        let series = ChebSeries { coeffs: c };
        let d = series.derivative();
        for r in roots.iter_mut() {
            let mut z = *r;
            let mut best = (series.eval_c(z).norm(), z);
            for _ in 0..6 {
                let dp = d.eval_c(z);
                if dp.norm() == 0.0 {
                    break;
                }
                z -= series.eval_c(z) / dp;
                let v = series.eval_c(z).norm();
                if v < best.0 {
                    best = (v, z);
                }
            }
            *r = best.1;
        }
        Some(roots)
    }
}

/// First-form barycentric interpolant p(t) = ℓ(t) Σ w_i f_i / (t - t_i) through
/// n + 1 distinct nodes. Evaluation error scales with max |f_i| times the
/// Lebesgue function, not with the size of p between the nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Barycentric {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub values: Vec<f64>,
}

impl Barycentric {
    pub fn weights_for(nodes: &[f64]) -> Vec<f64> {
        (0..nodes.len())
            .map(|i| {
                let mut p = 1.0;
                for (j, &x) in nodes.iter().enumerate() {
                    if j != i {
                        p *= nodes[i] - x;
                    }
                }
                1.0 / p
            })
            .collect()
    }

    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Self {
        let weights = Self::weights_for(&nodes);
        Barycentric { nodes, weights, values }
    }

    pub fn degree(&self) -> usize {
        self.nodes.len().saturating_sub(1)
    }

    /// Coefficient of t^degree.
    pub fn leading(&self) -> f64 {
        self.weights.iter().zip(&self.values).map(|(w, f)| w * f).sum()
    }

    pub fn eval(&self, t: f64) -> f64 {
        let mut l = 1.0;
        let mut s = 0.0;
        for ((&x, &w), &f) in self.nodes.iter().zip(&self.weights).zip(&self.values) {
            let d = t - x;
            if d == 0.0 {
                return f;
            }
            l *= d;
            s += w * f / d;
        }
        l * s
    }

    pub fn eval_c(&self, z: C64) -> C64 {
        let mut l = C64::new(1.0, 0.0);
        let mut s = C64::new(0.0, 0.0);
        for ((&x, &w), &f) in self.nodes.iter().zip(&self.weights).zip(&self.values) {
            let d = z - x;
            if d == C64::new(0.0, 0.0) {
                return C64::new(f, 0.0);
            }
            l *= d;
            s += w * f / d;
        }
        l * s
    }

    /// p'(t) = ℓ(t) Σ w_i (p(t) - f_i) / (t - t_i)².
    pub fn derivative(&self, t: f64) -> f64 {
        if let Some(k) = self.nodes.iter().position(|&x| x == t) {
            let (wk, fk) = (self.weights[k], self.values[k]);
            return (0..self.nodes.len())
                .filter(|&i| i != k)
                .map(|i| self.weights[i] / wk * (self.values[i] - fk) / (t - self.nodes[i]))
                .sum();
        }
        let p = self.eval(t);
        let mut l = 1.0;
        let mut s = 0.0;
        for ((&x, &w), &f) in self.nodes.iter().zip(&self.weights).zip(&self.values) {
            let d = t - x;
            l *= d;
            s += w * (p - f) / (d * d);
        }
        l * s
    }

    /// Chebyshev coefficients from samples at the Chebyshev–Lobatto points.
    pub fn to_cheb(&self) -> ChebSeries {
        let n = self.degree();
        if n == 0 {
            return ChebSeries { coeffs: vec![self.values.first().copied().unwrap_or(0.0)] };
        }
        let nf = n as f64;
        let f: Vec<f64> = (0..=n).map(|j| self.eval((PI * j as f64 / nf).cos())).collect();
        let coeffs = (0..=n)
            .map(|k| {
                let mut s = 0.0;
                for (j, &v) in f.iter().enumerate() {
                    let h = if j == 0 || j == n { 0.5 } else { 1.0 };
                    s += h * v * (PI * (j * k) as f64 / nf).cos();
                }
                let c = 2.0 * s / nf;
                if k == 0 || k == n {
                    0.5 * c
                } else {
                    c
                }
            })
            .collect();
        ChebSeries { coeffs }
    }
}

/// Rewrites Σ a_k t^k with t = (x - center)/half as Σ b_k x^k.
pub fn unit_monomial_to_x<T>(a: &[T], center: T, half: T) -> Vec<T>
where
    T: Copy
        + std::ops::Add<Output = T>
        + std::ops::Mul<Output = T>
        + std::ops::Div<Output = T>
        + std::ops::Neg<Output = T>
        + Default,
{
    // scale: Σ a_k/half^k (x - center)^k, then Taylor shift by -center
    let n = a.len();
    let mut scaled: Vec<T> = Vec::with_capacity(n);
    let mut p: Option<T> = None;
    for &ak in a {
        let v = match p {
            None => ak,
            Some(hp) => ak / hp,
        };
        scaled.push(v);
        p = Some(match p {
            None => half,
            Some(hp) => hp * half,
        });
    }
    // Horner-style expansion of Σ s_k (x - c)^k
    let mut out = vec![T::default(); n];
    let shift = -center;
    for k in (0..n).rev() {
        // out <- out*(x + shift) + s_k
        let mut next = vec![T::default(); n];
        for j in 0..n {
            if j + 1 < n {
                next[j + 1] = next[j + 1] + out[j];
            }
            next[j] = next[j] + out[j] * shift;
        }
        next[0] = next[0] + scaled[k];
        out = next;
    }
    out
}

pub fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

pub fn horner_c(coeffs: &[C64], z: C64) -> C64 {
    coeffs
        .iter()
        .rev()
        .fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Value and derivative of a complex monomial polynomial.
pub fn horner_c_with_derivative(coeffs: &[C64], z: C64) -> (C64, C64) {
    let mut p = C64::new(0.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Eigenvalues of a complex square matrix via Schur decomposition.
pub fn eigenvalues_c(m: DMatrix<C64>) -> Option<Vec<C64>> {
    let n = m.nrows();
    if n == 0 {
        return Some(vec![]);
    }
    if n == 1 {
        return Some(vec![m[(0, 0)]]);
    }
    let schur = nalgebra::linalg::Schur::try_new(m, 1e-15, 10_000)?;
    let (_, t) = schur.unpack();
    Some((0..n).map(|i| t[(i, i)]).collect())
}

/// Parlett–Reinsch diagonal balancing (in place, powers of two).
pub fn balance(m: &mut DMatrix<C64>) {
    let n = m.nrows();
    let radix = 2.0f64;
    let sqrdx = radix * radix;
    let mut done = false;
    let mut sweeps = 0;
    while !done && sweeps < 100 {
        done = true;
        sweeps += 1;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].norm();
                    r += m[(i, j)].norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / radix;
            while c < g {
                f *= radix;
                c *= sqrdx;
            }
            g = r * radix;
            while c > g {
                f /= radix;
                c /= sqrdx;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
    }
}

/// Roots of a monic-normalizable complex polynomial (lowest degree first)
/// from its balanced companion matrix, Newton-polished.
pub fn roots_monomial(coeffs: &[C64]) -> Option<Vec<C64>> {
    let mut c: Vec<C64> = coeffs.to_vec();
    while c.len() > 1 && c.last().map(|v| v.norm() == 0.0).unwrap_or(false) {
        c.pop();
    }
    let n = c.len() - 1;
    if n == 0 {
        return Some(vec![]);
    }
    let lead = c[n];
    let mut m = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for i in 1..n {
        m[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    for i in 0..n {
        m[(i, n - 1)] = -c[i] / lead;
    }
    balance(&mut m);
    let mut roots = eigenvalues_c(m)?;
    for r in roots.iter_mut() {
        *r = newton_polish(&c, *r);
    }
    Some(roots)
}

pub fn newton_polish(coeffs: &[C64], z0: C64) -> C64 {
    let mut z = z0;
    let (p0, _) = horner_c_with_derivative(coeffs, z);
    let mut best = (p0.norm(), z);
    for _ in 0..8 {
        let (p, dp) = horner_c_with_derivative(coeffs, z);
        if dp.norm() == 0.0 {
            break;
        }
        let step = p / dp;
        z -= step;
        let v = horner_c_with_derivative(coeffs, z).0.norm();
        if v < best.0 {
            best = (v, z);
        }
        if step.norm() <= 1e-16 * z.norm().max(1e-300) {
            break;
        }
    }
    best.1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clenshaw_matches_cosine_definition() {
        let s = ChebSeries {
            coeffs: vec![0.0, 0.0, 0.0, 0.0, 1.0],
        };
        for &t in &[-0.9, -0.2, 0.3, 0.77] {
            let want = (4.0 * f64::acos(t)).cos();
            assert!((s.eval(t) - want).abs() < 1e-14);
        }
    }

    #[test]
    fn monomial_round_trip() {
        let s = ChebSeries {
            coeffs: vec![0.3, -1.2, 0.5, 2.0, -0.25],
        };
        let m = s.to_monomial();
        let back = ChebSeries::from_monomial(&m);
        for (a, b) in s.coeffs.iter().zip(&back.coeffs) {
            assert!((a - b).abs() < 1e-13);
        }
        for &t in &[-0.5, 0.1, 0.9] {
            assert!((horner(&m, t) - s.eval(t)).abs() < 1e-13);
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let s = ChebSeries {
            coeffs: vec![0.1, 0.4, -0.3, 0.2, 0.05, -0.7],
        };
        let d = s.derivative();
        for &t in &[-0.8, 0.0, 0.45] {
            let h = 1e-6;
            let fd = (s.eval(t + h) - s.eval(t - h)) / (2.0 * h);
            assert!((d.eval(t) - fd).abs() < 1e-8);
        }
    }

    #[test]
    fn affine_change_of_variable() {
        // t^2 with t = (x - 1)/2  ->  (x^2 - 2x + 1)/4
        let b: Vec<f64> = unit_monomial_to_x(&[0.0, 0.0, 1.0], 1.0, 2.0);
        assert!((b[0] - 0.25).abs() < 1e-15);
        assert!((b[1] + 0.5).abs() < 1e-15);
        assert!((b[2] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn companion_roots() {
        // (z - 1)(z + 2)(z - i)
        let r1 = C64::new(1.0, 0.0);
        let r2 = C64::new(-2.0, 0.0);
        let r3 = C64::new(0.0, 1.0);
        let c = vec![
            -r1 * r2 * r3,
            r1 * r2 + r1 * r3 + r2 * r3,
            -(r1 + r2 + r3),
            C64::new(1.0, 0.0),
        ];
        let mut roots = roots_monomial(&c).unwrap();
        roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        assert!((roots[0] - r2).norm() < 1e-12);
        assert!((roots[1] - r3).norm() < 1e-12);
        assert!((roots[2] - r1).norm() < 1e-12);
    }

    #[test]
    fn colleague_roots_of_chebyshev_polynomial() {
        let mut c = vec![0.0; 9];
        c[8] = 1.0;
        let mut r: Vec<f64> = ChebSeries { coeffs: c }.roots().unwrap().iter().map(|z| z.re).collect();
        r.sort_by(f64::total_cmp);
        for (k, x) in r.iter().enumerate() {
            let want = -((2 * k + 1) as f64 * std::f64::consts::PI / 16.0).cos();
            assert!((x - want).abs() < 1e-14);
        }
    }

    #[test]
    fn barycentric_interpolant_of_the_chebyshev_polynomial() {
        // 2^{1-n} T_n levels at ±2^{1-n} on its n + 1 extrema
        let n = 7;
        let nodes: Vec<f64> = (0..=n).map(|i| -(PI * i as f64 / n as f64).cos()).collect();
        let h = 2f64.powi(1 - n as i32);
        let values = (0..=n).map(|i| if (n - i) % 2 == 0 { h } else { -h }).collect();
        let b = Barycentric::new(nodes, values);
        assert!((b.leading() - 1.0).abs() < 1e-13);
        let mut c = vec![0.0; n + 1];
        c[n] = h;
        let t = ChebSeries { coeffs: c };
        for x in [-1.3, -0.42, 0.0, 0.31, 0.99, 2.0] {
            assert!((b.eval(x) - t.eval(x)).abs() < 1e-14 * (1.0 + t.eval(x).abs()));
            let d = t.derivative().eval(x);
            assert!((b.derivative(x) - d).abs() < 1e-13 * (1.0 + d.abs()), "{x}");
        }
        let z = C64::new(0.3, 0.8);
        assert!((b.eval_c(z) - t.eval_c(z)).norm() < 1e-14);
        for (u, v) in b.to_cheb().coeffs.iter().zip(&t.coeffs) {
            assert!((u - v).abs() < 1e-15);
        }
    }
}
