//! Real roots of cubic polynomials.

use std::f64::consts::PI;

/// Real root of the depressed cubic `y^3 + p y + q = 0` by Cardano's formula
/// with sign-preserving real cube roots. `None` when the discriminant
/// `(q/2)^2 + (p/3)^3` is negative (three real roots, Cardano's radical is
/// complex).
pub fn cardano_depressed(p: f64, q: f64) -> Option<f64> {
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    if !(disc >= 0.0) {
        return None;
    }
    let u = disc.sqrt();
    let a = (-q / 2.0 + u).cbrt();
    let b = (-q / 2.0 - u).cbrt();
    Some(a + b)
}

/// All real roots of `a x^3 + b x^2 + c x + d`, ascending. Degenerate leading
/// coefficients fall through to the quadratic and linear cases. Each root is
/// polished with two Newton steps.
pub fn real_roots(a: f64, b: f64, c: f64, d: f64) -> Vec<f64> {
    let scale = [a, b, c, d].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Vec::new();
    }
    let mut roots = if a.abs() <= 1e-14 * scale {
        quadratic_roots(b, c, d)
    } else {
        let (b, c, d) = (b / a, c / a, d / a);
        let shift = b / 3.0;
        let p = c - b * b / 3.0;
        let q = 2.0 * b.powi(3) / 27.0 - b * c / 3.0 + d;
        let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
        let ys = if disc >= 0.0 {
            vec![cardano_depressed(p, q).unwrap_or(0.0)]
        } else {
            // three real roots: trigonometric form, p < 0 here
            let r = 2.0 * (-p / 3.0).sqrt();
            let arg = (3.0 * q / (p * r)).clamp(-1.0, 1.0);
            let theta = arg.acos() / 3.0;
            (0..3)
                .map(|k| r * (theta - 2.0 * PI * k as f64 / 3.0).cos())
                .collect()
        };
        ys.into_iter().map(|y| y - shift).collect()
    };
    let poly = |x: f64| ((a * x + b) * x + c) * x + d;
    let deriv = |x: f64| (3.0 * a * x + 2.0 * b) * x + c;
    for r in &mut roots {
        for _ in 0..2 {
            let dv = deriv(*r);
            if dv != 0.0 {
                let next = *r - poly(*r) / dv;
                if next.is_finite() && poly(next).abs() <= poly(*r).abs() {
                    *r = next;
                }
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots
}

fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if a.abs() <= 1e-14 * scale {
        return if b != 0.0 { vec![-c / b] } else { Vec::new() };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    // stable form avoids cancellation in the smaller root
    let s = disc.sqrt();
    let q = -0.5 * (b + b.signum() * s);
    if q == 0.0 {
        return vec![0.0];
    }
    let mut r = vec![q / a, c / q];
    r.sort_by(f64::total_cmp);
    r
}
