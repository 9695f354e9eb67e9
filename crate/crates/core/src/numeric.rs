//! Small numerical kernels shared by the quadrature and the knot chain.
//!
//! Every integral of the form `∫ e^{c + k u} du` over a segment is written in
//! terms of `exprel(z) = (e^z - 1) / z`, which stays accurate for `z → 0` and
//! has a closed-form logarithm for large `|z|`.

/// `(e^z - 1) / z`, continuous at 0.
pub fn exprel(z: f64) -> f64 {
    if z.abs() < 1e-5 {
        1.0 + z * (0.5 + z / 6.0)
    } else {
        z.exp_m1() / z
    }
}

/// `ln((e^z - 1) / z)` without overflow for large `|z|`.
pub fn ln_exprel(z: f64) -> f64 {
    if z > 30.0 {
        z + (-(-z).exp()).ln_1p() - z.ln()
    } else if z < -30.0 {
        (-z.exp()).ln_1p() - (-z).ln()
    } else {
        exprel(z).ln()
    }
}

/// `(exprel(z) - 1) / z`, the normalised second moment `∫_0^1 (e^{zu} - 1)/z du`.
pub fn exprel2(z: f64) -> f64 {
    if z.abs() < 1e-3 {
        0.5 + z * (1.0 / 6.0 + z * (1.0 / 24.0 + z * (1.0 / 120.0 + z / 720.0)))
    } else {
        (exprel(z) - 1.0) / z
    }
}

/// `ln(e^a + e^b)`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(e^a - e^b)` for `a >= b`.
pub fn log_sub_exp(a: f64, b: f64) -> f64 {
    if b == f64::NEG_INFINITY {
        return a;
    }
    a + (-(b - a).exp()).ln_1p()
}

/// Log-sum-exp over a slice of log-magnitudes; `-inf` for an empty slice.
pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}
