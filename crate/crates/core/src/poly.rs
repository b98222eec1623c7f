//! Real polynomial helpers. Coefficients are stored in ascending order,
//! `c[0] + c[1] x + c[2] x^2 + ...`.


/// Horner evaluation.
pub fn eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

/// Sum of absolute term magnitudes at `x`, used as the rounding scale of `eval`.
pub fn magnitude(c: &[f64], x: f64) -> f64 {
    let ax = x.abs();
    c.iter().rev().fold(0.0, |acc, &ci| acc * ax + ci.abs())
}

pub fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &ck)| k as f64 * ck)
        .collect()
}

/// Drops vanishing leading coefficients.
pub fn trim(c: &[f64]) -> &[f64] {
    let mut n = c.len();
    while n > 0 && c[n - 1] == 0.0 {
        n -= 1;
    }
    &c[..n]
}

/// Coefficients of `x -> c(u0 + r x)`.
pub fn compose_affine(c: &[f64], u0: f64, r: f64) -> Vec<f64> {
    // Taylor expansion about u0, then scale by powers of r.
    let mut shifted = c.to_vec();
    let n = shifted.len();
    for i in 0..n {
        for j in (i..n.saturating_sub(1)).rev() {
            shifted[j] += u0 * shifted[j + 1];
        }
    }
    let mut scale = 1.0;
    for s in shifted.iter_mut() {
        *s *= scale;
        scale *= r;
    }
    shifted
}

pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, v) in a.iter().enumerate() {
        out[i] += v;
    }
    for (i, v) in b.iter().enumerate() {
        out[i] += v;
    }
    out
}

/// Upper bound on the modulus of every root (Cauchy).
pub fn cauchy_bound(c: &[f64]) -> f64 {
    let c = trim(c);
    match c.split_last() {
        None | Some((_, [])) => 0.0,
        Some((lead, rest)) => 1.0 + rest.iter().map(|x| (x / lead).abs()).fold(0.0, f64::max),
    }
}

/// Real roots of `a x^2 + b x + c`, sorted. Degenerates to the linear case when `a == 0`.
pub fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    if a == 0.0 {
        return if b == 0.0 { Vec::new() } else { vec![-c / b] };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    if disc == 0.0 {
        return vec![-b / (2.0 * a)];
    }
    let t = -0.5 * (b + b.signum() * disc.sqrt());
    let (r1, r2) = if t == 0.0 {
        let s = (-c / a).sqrt();
        (-s, s)
    } else {
        (t / a, c / t)
    };
    if r1 <= r2 {
        vec![r1, r2]
    } else {
        vec![r2, r1]
    }
}

/// Real roots of `a x^3 + b x^2 + c x + d`, sorted. Isolated between the
/// critical points rather than by Cardano's formula, which cancels badly
/// when the leading coefficient is small.
pub fn cubic_roots(a: f64, b: f64, c: f64, d: f64) -> Vec<f64> {
    let coeffs = [d, c, b, a];
    let bound = cauchy_bound(&coeffs);
    real_roots_in(&coeffs, -bound, bound)
}

/// All real roots in `[lo, hi]`, sorted. Degrees up to two use closed forms;
/// higher degrees isolate roots between the critical points (roots of the
/// derivative, found recursively) and bisect each monotone bracket.
pub fn real_roots_in(c: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let c = trim(c);
    let in_range = |x: &f64| *x >= lo && *x <= hi;
    match c.len() {
        0 | 1 => Vec::new(),
        2 => [-c[0] / c[1]].into_iter().filter(in_range).collect(),
        3 => quadratic_roots(c[2], c[1], c[0]).into_iter().filter(in_range).collect(),
        _ => {
            // Every root lies inside the Cauchy bound; keeps the brackets finite.
            let bound = cauchy_bound(c);
            let (lo, hi) = (lo.max(-bound), hi.min(bound));
            if lo > hi {
                return Vec::new();
            }
            let crit = real_roots_in(&derivative(c), lo, hi);
            let mut knots = Vec::with_capacity(crit.len() + 2);
            knots.push(lo);
            knots.extend(crit.iter().copied().filter(|&x| x > lo && x < hi));
            knots.push(hi);

            let mut roots = Vec::new();
            for &k in &knots {
                if eval(c, k).abs() <= 1e-13 * magnitude(c, k) {
                    roots.push(k);
                }
            }
            for w in knots.windows(2) {
                let (a, b) = (w[0], w[1]);
                let (fa, fb) = (eval(c, a), eval(c, b));
                if fa.signum() * fb.signum() < 0.0 && fa != 0.0 && fb != 0.0 {
                    roots.push(bisect(c, a, b, fa));
                }
            }
            roots.sort_by(f64::total_cmp);
            roots.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * (1.0 + y.abs()));
            roots
        }
    }
}

fn bisect(c: &[f64], mut a: f64, mut b: f64, fa: f64) -> f64 {
    let sa = fa.signum();
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = eval(c, m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == sa {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}
