//! Integer-order Bessel functions of the first kind.

/// `J_n(x)` for integer `n` and real `x`.
///
/// Uses Miller's backward recurrence normalised by
/// `J_0 + 2 sum_k J_{2k} = 1`, which is stable for every order.
pub fn bessel_j(n: i32, x: f64) -> f64 {
    if n < 0 {
        let v = bessel_j(-n, x);
        return if n % 2 == 0 { v } else { -v };
    }
    if x < 0.0 {
        let v = bessel_j(n, -x);
        return if n % 2 == 0 { v } else { -v };
    }
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    bessel_j_all(n as usize, x)[n as usize]
}

/// `[J_0(x), ..., J_n(x)]` for `x >= 0`.
pub fn bessel_j_all(n: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    // Start well above both n and x so the seeded tail is negligible.
    let start = {
        let m = n.max(ax as usize) + 20 + (40.0 * ax.sqrt()) as usize;
        m + (m % 2)
    };
    let mut jp1 = 0.0;
    let mut j = 1e-300;
    let mut norm = 0.0;
    for k in (0..=start).rev() {
        if k <= n {
            out[k] = j;
        }
        if k % 2 == 0 {
            norm += if k == 0 { j } else { 2.0 * j };
        }
        if k == 0 {
            break;
        }
        let jm1 = 2.0 * k as f64 / ax * j - jp1;
        jp1 = j;
        j = jm1;
        if j.abs() > 1e250 {
            jp1 *= 1e-250;
            j *= 1e-250;
            norm *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    for v in out.iter_mut() {
        *v /= norm;
    }
    if x < 0.0 {
        for (k, v) in out.iter_mut().enumerate() {
            if k % 2 == 1 {
                *v = -*v;
            }
        }
    }
    out
}

/// Smallest `k >= min_k` with `|J_k(x)| < tol`, used to truncate Jacobi-Anger sums.
pub fn bessel_cutoff(x: f64, tol: f64, min_k: usize) -> usize {
    let mut k = min_k;
    loop {
        let vals = bessel_j_all(k + 32, x.abs());
        if let Some(i) = (k..vals.len()).find(|&i| vals[i].abs() < tol) {
            return i;
        }
        k += 32;
    }
}
