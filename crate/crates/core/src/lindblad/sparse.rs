//! Compressed-row operators acting on dense column-major density matrices.
//!
//! The public API stays dense; these kernels only exist so the integrator
//! does not pay `O(n^3)` per right-hand-side evaluation.

use crate::operators::{CMatrix, C64};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Row pattern shared by several operators.
#[derive(Clone, Debug)]
pub(crate) struct Pattern {
    pub n: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
}

impl Pattern {
    /// Union of the non-zero structures of `mats`.
    pub fn union(n: usize, mats: &[&CMatrix]) -> Self {
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::new();
        indptr.push(0);
        for i in 0..n {
            for j in 0..n {
                if mats.iter().any(|m| m[(i, j)] != ZERO) {
                    indices.push(j);
                }
            }
            indptr.push(indices.len());
        }
        Pattern { n, indptr, indices }
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    /// Values of `m` laid out on this pattern. Entries of `m` outside the
    /// pattern must be zero.
    pub fn gather(&self, m: &CMatrix) -> Vec<C64> {
        let mut v = Vec::with_capacity(self.nnz());
        for i in 0..self.n {
            for p in self.indptr[i]..self.indptr[i + 1] {
                v.push(m[(i, self.indices[p])]);
            }
        }
        v
    }
}

/// A single sparse operator.
#[derive(Clone, Debug)]
pub(crate) struct Csr {
    pub pattern: Pattern,
    pub values: Vec<C64>,
}

impl Csr {
    pub fn from_dense(m: &CMatrix) -> Self {
        let pattern = Pattern::union(m.nrows(), &[m]);
        let values = pattern.gather(m);
        Csr { pattern, values }
    }
}

/// `out = A rho` with `A` given by `(pattern, vals)`.
pub(crate) fn mul_left(pattern: &Pattern, vals: &[C64], rho: &CMatrix, out: &mut CMatrix) {
    let n = pattern.n;
    let r = rho.as_slice();
    let o = out.as_mut_slice();
    for j in 0..n {
        let col = &r[j * n..(j + 1) * n];
        let dst = &mut o[j * n..(j + 1) * n];
        for (i, d) in dst.iter_mut().enumerate() {
            let mut s = ZERO;
            for p in pattern.indptr[i]..pattern.indptr[i + 1] {
                s += vals[p] * col[pattern.indices[p]];
            }
            *d = s;
        }
    }
}

/// `out += alpha * Y L^dagger`.
pub(crate) fn add_mul_right_adjoint(y: &CMatrix, l: &Csr, alpha: f64, out: &mut CMatrix) {
    add_mul_right_adjoint_vals(&l.pattern, &l.values, y, alpha, out);
}

/// `out += alpha * Y A^dagger` with `A` given by `(pattern, vals)`. Each
/// output column is a contiguous combination of columns of `Y`.
pub(crate) fn add_mul_right_adjoint_vals(pattern: &Pattern, vals: &[C64], y: &CMatrix, alpha: f64, out: &mut CMatrix) {
    let n = pattern.n;
    let ys = as_f64(y.as_slice());
    let o = as_f64_mut(out.as_mut_slice());
    let col = |k: usize| &ys[2 * k * n..2 * (k + 1) * n];
    for j in 0..n {
        let dst = &mut o[2 * j * n..2 * (j + 1) * n];
        let row = pattern.indptr[j]..pattern.indptr[j + 1];
        let coef = |p: usize| vals[p].conj() * alpha;
        let mut p = row.start;
        while p + 4 <= row.end {
            let idx = &pattern.indices[p..p + 4];
            axpy4(
                dst,
                [coef(p), coef(p + 1), coef(p + 2), coef(p + 3)],
                [col(idx[0]), col(idx[1]), col(idx[2]), col(idx[3])],
            );
            p += 4;
        }
        for q in p..row.end {
            axpy(dst, coef(q), col(pattern.indices[q]));
        }
    }
}

/// `dst += sum_m c_m * src_m` on interleaved complex data.
#[inline]
fn axpy4(dst: &mut [f64], c: [C64; 4], src: [&[f64]; 4]) {
    let len = dst.len();
    let [s0, s1, s2, s3] = src.map(|s| &s[..len]);
    for i in (0..len).step_by(2) {
        let mut re = dst[i];
        let mut im = dst[i + 1];
        for (cm, sm) in c.iter().zip([s0, s1, s2, s3]) {
            re += cm.re * sm[i] - cm.im * sm[i + 1];
            im += cm.re * sm[i + 1] + cm.im * sm[i];
        }
        dst[i] = re;
        dst[i + 1] = im;
    }
}

/// `dst += c * src` on interleaved complex data.
#[inline]
fn axpy(dst: &mut [f64], c: C64, src: &[f64]) {
    let (cr, ci) = (c.re, c.im);
    for (d, s) in dst.chunks_exact_mut(2).zip(src.chunks_exact(2)) {
        d[0] += cr * s[0] - ci * s[1];
        d[1] += cr * s[1] + ci * s[0];
    }
}

fn as_f64(z: &[C64]) -> &[f64] {
    // Complex<f64> is repr(C) with two f64 fields.
    unsafe { std::slice::from_raw_parts(z.as_ptr() as *const f64, 2 * z.len()) }
}

fn as_f64_mut(z: &mut [C64]) -> &mut [f64] {
    unsafe { std::slice::from_raw_parts_mut(z.as_mut_ptr() as *mut f64, 2 * z.len()) }
}

/// `Tr(O rho)`.
pub(crate) fn trace_product(o: &Csr, rho: &CMatrix) -> C64 {
    let n = o.pattern.n;
    let r = rho.as_slice();
    let mut s = ZERO;
    for i in 0..n {
        let col = &r[i * n..(i + 1) * n];
        for p in o.pattern.indptr[i]..o.pattern.indptr[i + 1] {
            s += o.values[p] * col[o.pattern.indices[p]];
        }
    }
    s
}

/// `m <- m + m^dagger`, exactly Hermitian afterwards. Works on square tiles
/// so both the column and the row walk stay in cache.
pub(crate) fn hermitize(m: &mut CMatrix) {
    const TILE: usize = 32;
    let n = m.nrows();
    let d = m.as_mut_slice();
    for jb in (0..n).step_by(TILE) {
        let je = (jb + TILE).min(n);
        for ib in (jb..n).step_by(TILE) {
            let ie = (ib + TILE).min(n);
            for j in jb..je {
                let i0 = if ib == jb { j + 1 } else { ib };
                for i in i0..ie {
                    let v = d[i + j * n] + d[j + i * n].conj();
                    d[i + j * n] = v;
                    d[j + i * n] = v.conj();
                }
            }
        }
        for j in jb..je {
            let v = d[j + j * n].re;
            d[j + j * n] = C64::new(2.0 * v, 0.0);
        }
    }
}
