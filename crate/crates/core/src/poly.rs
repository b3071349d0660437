//! Cubic polynomials in a segment-local coordinate `u = s - start`.

/// Coefficients `c[0] + c[1] u + c[2] u^2 + c[3] u^3`.
pub type Cubic = [f64; 4];

pub fn eval(c: &Cubic, u: f64) -> f64 {
    ((c[3] * u + c[2]) * u + c[1]) * u + c[0]
}

/// `∫_0^u p`.
pub fn integral(c: &Cubic, u: f64) -> f64 {
    (((c[3] / 4.0 * u + c[2] / 3.0) * u + c[1] / 2.0) * u + c[0]) * u
}

pub fn is_zero(c: &Cubic) -> bool {
    c.iter().all(|&x| x == 0.0)
}

pub fn degree(c: &Cubic) -> Option<usize> {
    (0..4).rev().find(|&k| c[k] != 0.0)
}

pub fn add(a: &Cubic, b: &Cubic) -> Cubic {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
}

pub fn sub(a: &Cubic, b: &Cubic) -> Cubic {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]]
}

/// Re-expands `p(u)` as a polynomial in `v = u - d`, i.e. returns `q` with `q(v) = p(v + d)`.
pub fn shift(c: &Cubic, d: f64) -> Cubic {
    if d == 0.0 {
        return *c;
    }
    [
        c[0] + d * (c[1] + d * (c[2] + d * c[3])),
        c[1] + d * (2.0 * c[2] + 3.0 * d * c[3]),
        c[2] + 3.0 * d * c[3],
        c[3],
    ]
}

/// Roots of `p'` strictly inside `(0, len)`.
fn critical_points(c: &Cubic, len: f64) -> Vec<f64> {
    let (a, b, q) = (3.0 * c[3], 2.0 * c[2], c[1]);
    let mut out = Vec::with_capacity(2);
    if a == 0.0 {
        if b != 0.0 {
            out.push(-q / b);
        }
    } else {
        let disc = b * b - 4.0 * a * q;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            // numerically stable pair
            let t = -0.5 * (b + b.signum() * sq);
            if t != 0.0 {
                out.push(t / a);
                out.push(q / t);
            } else {
                out.push(0.0);
            }
        }
    }
    out.retain(|&u| u > 0.0 && u < len);
    out
}

/// Maximum of `p` over `[0, len]` (`len` may be infinite) and the smallest `u` attaining it.
pub fn max_on(c: &Cubic, len: f64) -> (f64, f64) {
    if len.is_infinite() {
        if let Some(d) = degree(c) {
            if d >= 1 && c[d] > 0.0 {
                return (f64::INFINITY, f64::INFINITY);
            }
        }
    }
    let mut best = (eval(c, 0.0), 0.0);
    let mut cands = critical_points(c, len);
    if len.is_finite() {
        cands.push(len);
    }
    for u in cands {
        let v = eval(c, u);
        if v > best.0 {
            best = (v, u);
        }
    }
    best
}

/// Minimum of `p` over `[0, len]` and the smallest `u` attaining it.
pub fn min_on(c: &Cubic, len: f64) -> (f64, f64) {
    let neg = [-c[0], -c[1], -c[2], -c[3]];
    let (v, u) = max_on(&neg, len);
    (-v, u)
}
