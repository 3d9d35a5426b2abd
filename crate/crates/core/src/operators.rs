//! Dense operators on truncated qubit/Fock tensor-product spaces.
//!
//! Slot 0 is the most significant factor of the Kronecker product. Qubit
//! slots use index 0 for the excited state, so `sigma_z |e> = +|e>`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Squeezed Fock basis of a bosonic slot: basis state `n` is `S(xi)|n>` with
/// `xi = r e^{i theta}`, so the slot's lowering operator reads
/// `cosh(r) a - e^{i theta} sinh(r) a^dag` in that basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqueezeFrame {
    pub r: f64,
    pub theta: f64,
}

impl SqueezeFrame {
    pub fn new(r: f64, theta: f64) -> Result<Self> {
        if !(r.is_finite() && r >= 0.0 && theta.is_finite()) {
            return Err(Error::Domain(format!("invalid squeeze frame r={r}, theta={theta}")));
        }
        Ok(SqueezeFrame { r, theta })
    }

    /// Matrix of the physical lowering operator in this basis, truncated to `dim` levels.
    pub fn lowering(&self, dim: usize) -> Result<Operator> {
        let a = annihilation(dim)?;
        let ad = a.dagger();
        Ok(a * self.r.cosh() - ad * (C64::from_polar(self.r.sinh(), self.theta)))
    }

    /// Amplitudes of the physical vacuum `S(xi)^dag |0>` on the first `dim`
    /// basis states, renormalized after truncation.
    pub fn vacuum(&self, dim: usize) -> DVector<C64> {
        let mut v = DVector::zeros(dim);
        v[0] = ONE;
        let q = C64::from_polar(self.r.tanh(), self.theta);
        let mut n = 1;
        while n + 1 < dim {
            v[n + 1] = v[n - 1] * q * ((n as f64) / (n as f64 + 1.0)).sqrt();
            n += 2;
        }
        let norm = v.norm();
        v / C64::new(norm, 0.0)
    }
}

/// Ordered subsystem dimensions, with an optional squeeze frame per slot.
#[derive(Clone, Debug, PartialEq)]
pub struct HilbertSpec {
    dims: Vec<usize>,
    frames: Vec<Option<SqueezeFrame>>,
}

impl HilbertSpec {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Domain("Hilbert space needs at least one slot".into()));
        }
        if let Some(d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::Domain(format!("slot dimension {d} < 2")));
        }
        let frames = vec![None; dims.len()];
        Ok(HilbertSpec { dims, frames })
    }

    pub fn single(dim: usize) -> Result<Self> {
        Self::new(vec![dim])
    }

    /// Same frames, new dimensions.
    pub fn with_dims(&self, dims: Vec<usize>) -> Result<Self> {
        if dims.len() != self.dims.len() {
            return Err(Error::DimensionMismatch {
                expected: self.dims.len(),
                found: dims.len(),
            });
        }
        let mut out = Self::new(dims)?;
        out.frames = self.frames.clone();
        Ok(out)
    }

    pub fn with_frame(mut self, slot: usize, frame: Option<SqueezeFrame>) -> Result<Self> {
        if slot >= self.dims.len() {
            return Err(Error::DimensionMismatch {
                expected: slot + 1,
                found: self.dims.len(),
            });
        }
        self.frames[slot] = frame;
        Ok(self)
    }

    pub fn frame(&self, slot: usize) -> Option<SqueezeFrame> {
        self.frames.get(slot).copied().flatten()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n_slots(&self) -> usize {
        self.dims.len()
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    /// Product of the dimensions after `slot` (the index stride of that slot).
    pub fn stride(&self, slot: usize) -> usize {
        self.dims[slot + 1..].iter().product()
    }

    /// Level of `slot` in flat basis index `index`.
    pub fn level(&self, index: usize, slot: usize) -> usize {
        (index / self.stride(slot)) % self.dims[slot]
    }

    /// Flat index of a product basis state.
    pub fn index_of(&self, levels: &[usize]) -> Result<usize> {
        if levels.len() != self.dims.len() {
            return Err(Error::DimensionMismatch {
                expected: self.dims.len(),
                found: levels.len(),
            });
        }
        let mut idx = 0;
        for (&l, &d) in levels.iter().zip(&self.dims) {
            if l >= d {
                return Err(Error::Domain(format!("level {l} outside slot of dimension {d}")));
            }
            idx = idx * d + l;
        }
        Ok(idx)
    }
}

impl fmt::Display for HilbertSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .dims
            .iter()
            .zip(&self.frames)
            .map(|(d, fr)| match fr {
                Some(fr) if fr.r > 0.0 => format!("{d}(r={:.3})", fr.r),
                _ => d.to_string(),
            })
            .collect();
        write!(f, "[{}]", parts.join("x"))
    }
}

/// A square complex matrix tied to a [`HilbertSpec`].
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    matrix: CMatrix,
    spec: HilbertSpec,
}

impl Operator {
    pub fn new(matrix: CMatrix, spec: HilbertSpec) -> Result<Self> {
        let n = spec.total();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Operator { matrix, spec })
    }

    pub fn identity(spec: &HilbertSpec) -> Self {
        let n = spec.total();
        Operator {
            matrix: CMatrix::identity(n, n),
            spec: spec.clone(),
        }
    }

    pub fn zeros(spec: &HilbertSpec) -> Self {
        let n = spec.total();
        Operator {
            matrix: CMatrix::zeros(n, n),
            spec: spec.clone(),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn spec(&self) -> &HilbertSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn dagger(&self) -> Self {
        Operator {
            matrix: self.matrix.adjoint(),
            spec: self.spec.clone(),
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        Operator {
            matrix: &self.matrix * c,
            spec: self.spec.clone(),
        }
    }

    pub fn commutator(&self, other: &Operator) -> Self {
        self * other - other * self
    }

    pub fn anticommutator(&self, other: &Operator) -> Self {
        self * other + other * self
    }

    /// Largest entry modulus of `A - A^dagger`.
    pub fn hermiticity_defect(&self) -> f64 {
        max_abs_diff(&self.matrix, &self.matrix.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Spectral (largest singular value) norm.
    pub fn norm(&self) -> f64 {
        self.matrix.clone().svd(false, false).singular_values.max()
    }

    /// Number of non-zero entries.
    pub fn nnz(&self) -> usize {
        self.matrix.iter().filter(|z| **z != ZERO).count()
    }

    /// `P A P` for the projector onto the given basis indices.
    pub fn project(&self, indices: &[usize]) -> Self {
        let n = self.dim();
        let mut keep = vec![false; n];
        for &i in indices {
            keep[i] = true;
        }
        let m = CMatrix::from_fn(n, n, |i, j| if keep[i] && keep[j] { self.matrix[(i, j)] } else { ZERO });
        Operator {
            matrix: m,
            spec: self.spec.clone(),
        }
    }

    fn check_same(&self, other: &Operator) {
        assert_eq!(
            self.spec, other.spec,
            "operator algebra requires identical Hilbert specs"
        );
    }
}

impl<'a> Mul<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        self.check_same(rhs);
        Operator {
            matrix: &self.matrix * &rhs.matrix,
            spec: self.spec.clone(),
        }
    }
}

impl Mul for Operator {
    type Output = Operator;
    fn mul(self, rhs: Operator) -> Operator {
        &self * &rhs
    }
}

impl<'a> Add<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        self.check_same(rhs);
        Operator {
            matrix: &self.matrix + &rhs.matrix,
            spec: self.spec.clone(),
        }
    }
}

impl Add for Operator {
    type Output = Operator;
    fn add(self, rhs: Operator) -> Operator {
        &self + &rhs
    }
}

impl<'a> Sub<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        self.check_same(rhs);
        Operator {
            matrix: &self.matrix - &rhs.matrix,
            spec: self.spec.clone(),
        }
    }
}

impl Sub for Operator {
    type Output = Operator;
    fn sub(self, rhs: Operator) -> Operator {
        &self - &rhs
    }
}

impl Neg for Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale(-ONE)
    }
}

impl Mul<C64> for &Operator {
    type Output = Operator;
    fn mul(self, c: C64) -> Operator {
        self.scale(c)
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, c: f64) -> Operator {
        self.scale(C64::new(c, 0.0))
    }
}

impl Mul<C64> for Operator {
    type Output = Operator;
    fn mul(self, c: C64) -> Operator {
        self.scale(c)
    }
}

impl Mul<f64> for Operator {
    type Output = Operator;
    fn mul(self, c: f64) -> Operator {
        self.scale(C64::new(c, 0.0))
    }
}

/// Bosonic lowering operator with `sqrt(n)` on the superdiagonal.
pub fn annihilation(dim: usize) -> Result<Operator> {
    let spec = HilbertSpec::single(dim)?;
    let mut m = CMatrix::zeros(dim, dim);
    for n in 1..dim {
        m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    Operator::new(m, spec)
}

/// `a^dagger a`.
pub fn number(dim: usize) -> Result<Operator> {
    let a = annihilation(dim)?;
    Ok(&a.dagger() * &a)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
    /// `|e><g|`
    Plus,
    /// `|g><e|`
    Minus,
}

pub fn pauli(which: Pauli) -> Operator {
    let m = match which {
        Pauli::X => [ZERO, ONE, ONE, ZERO],
        Pauli::Y => [ZERO, -I, I, ZERO],
        Pauli::Z => [ONE, ZERO, ZERO, -ONE],
        Pauli::Plus => [ZERO, ONE, ZERO, ZERO],
        Pauli::Minus => [ZERO, ZERO, ONE, ZERO],
    };
    Operator {
        matrix: CMatrix::from_row_slice(2, 2, &m),
        spec: HilbertSpec {
            dims: vec![2],
            frames: vec![None],
        },
    }
}

/// Lifts a single-slot operator into `spec` with identities on every other slot.
pub fn embed(op: &Operator, slot: usize, spec: &HilbertSpec) -> Result<Operator> {
    if slot >= spec.n_slots() {
        return Err(Error::Domain(format!(
            "slot {slot} outside a {}-slot space",
            spec.n_slots()
        )));
    }
    let d = spec.dims()[slot];
    if op.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: op.dim(),
        });
    }
    let left: usize = spec.dims()[..slot].iter().product();
    let right = spec.stride(slot);
    let m = CMatrix::identity(left, left)
        .kronecker(&op.matrix)
        .kronecker(&CMatrix::identity(right, right));
    Operator::new(m, spec.clone())
}

/// Kronecker product of one operator per slot, in slot order.
pub fn tensor(ops: &[&Operator]) -> Result<Operator> {
    let mut dims = Vec::new();
    let mut m = CMatrix::identity(1, 1);
    for op in ops {
        dims.extend_from_slice(op.spec().dims());
        m = m.kronecker(op.matrix());
    }
    Operator::new(m, HilbertSpec::new(dims)?)
}

/// A density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
    spec: HilbertSpec,
}

/// Tolerances used by [`DensityMatrix::validate`].
pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-8;
pub const POSITIVITY_TOL: f64 = 1e-8;

impl DensityMatrix {
    /// Wraps and validates a matrix.
    pub fn new(matrix: CMatrix, spec: HilbertSpec) -> Result<Self> {
        let rho = Self::new_unchecked(matrix, spec)?;
        rho.validate(HERMITIAN_TOL, TRACE_TOL, POSITIVITY_TOL)?;
        Ok(rho)
    }

    /// Wraps a matrix checking only its shape. Used for integrator states.
    pub fn new_unchecked(matrix: CMatrix, spec: HilbertSpec) -> Result<Self> {
        let n = spec.total();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: matrix.nrows(),
            });
        }
        Ok(DensityMatrix { matrix, spec })
    }

    /// `|psi><psi|` for a normalized copy of `psi`.
    pub fn pure(psi: &DVector<C64>, spec: &HilbertSpec) -> Result<Self> {
        if psi.len() != spec.total() {
            return Err(Error::DimensionMismatch {
                expected: spec.total(),
                found: psi.len(),
            });
        }
        let norm = psi.norm();
        if norm == 0.0 {
            return Err(Error::Domain("zero state vector".into()));
        }
        let v = psi / C64::new(norm, 0.0);
        Ok(DensityMatrix {
            matrix: &v * v.adjoint(),
            spec: spec.clone(),
        })
    }

    /// Product basis state with the given level per slot.
    pub fn basis(spec: &HilbertSpec, levels: &[usize]) -> Result<Self> {
        let idx = spec.index_of(levels)?;
        let n = spec.total();
        let mut m = CMatrix::zeros(n, n);
        m[(idx, idx)] = ONE;
        Ok(DensityMatrix {
            matrix: m,
            spec: spec.clone(),
        })
    }

    /// Truncated geometric thermal state with mean occupation `nbar`, renormalized.
    pub fn thermal(dim: usize, nbar: f64) -> Result<Self> {
        if nbar < 0.0 {
            return Err(Error::Domain(format!("thermal occupation {nbar} < 0")));
        }
        let spec = HilbertSpec::single(dim)?;
        let q = if nbar == 0.0 { 0.0 } else { nbar / (1.0 + nbar) };
        let weights: Vec<f64> = (0..dim).map(|n| q.powi(n as i32)).collect();
        let z: f64 = weights.iter().sum();
        let m = CMatrix::from_diagonal(&DVector::from_iterator(
            dim,
            weights.iter().map(|w| C64::new(w / z, 0.0)),
        ));
        Ok(DensityMatrix { matrix: m, spec })
    }

    /// `rho_1 (x) rho_2 (x) ...`.
    /// Slot frames are carried over.
    pub fn product(parts: &[&DensityMatrix]) -> Result<Self> {
        let mut dims = Vec::new();
        let mut frames = Vec::new();
        let mut m = CMatrix::identity(1, 1);
        for p in parts {
            dims.extend_from_slice(p.spec.dims());
            frames.extend(p.spec.frames.iter().copied());
            m = m.kronecker(&p.matrix);
        }
        let mut spec = HilbertSpec::new(dims)?;
        spec.frames = frames;
        Ok(DensityMatrix { matrix: m, spec })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn spec(&self) -> &HilbertSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        max_abs_diff(&self.matrix, &self.matrix.adjoint())
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        h.symmetric_eigenvalues().min()
    }

    pub fn validate(&self, herm_tol: f64, trace_tol: f64, pos_tol: f64) -> Result<()> {
        let h = self.hermiticity_defect();
        if h > herm_tol {
            return Err(Error::Domain(format!("density matrix not Hermitian (defect {h:e})")));
        }
        let tr = self.trace();
        if (tr - ONE).norm() > trace_tol {
            return Err(Error::Domain(format!("density matrix trace {tr} != 1")));
        }
        let e = self.min_eigenvalue();
        if e < -pos_tol {
            return Err(Error::Domain(format!("density matrix eigenvalue {e:e} < 0")));
        }
        Ok(())
    }

    /// Populations of each level of one slot (diagonal of the reduced state).
    pub fn level_populations(&self, slot: usize) -> Vec<f64> {
        level_populations(&self.matrix, &self.spec, slot)
    }
}

pub(crate) fn level_populations(m: &CMatrix, spec: &HilbertSpec, slot: usize) -> Vec<f64> {
    let d = spec.dims()[slot];
    let mut pops = vec![0.0; d];
    for i in 0..m.nrows() {
        pops[spec.level(i, slot)] += m[(i, i)].re;
    }
    pops
}

fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).fold(0.0, |m, (x, y)| m.max((x - y).norm()))
}

/// `L rho L^dagger - {L^dagger L, rho}/2`.
pub fn dissipator(l: &Operator, rho: &DensityMatrix) -> Result<CMatrix> {
    if l.spec() != rho.spec() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: l.dim(),
        });
    }
    let lm = l.matrix();
    let ld = lm.adjoint();
    let r = rho.matrix();
    let ldl = &ld * lm;
    let half = C64::new(0.5, 0.0);
    Ok(lm * r * &ld - (&ldl * r + r * &ldl) * half)
}

/// `Tr(op rho)`.
pub fn expect(op: &Operator, rho: &DensityMatrix) -> Result<C64> {
    if op.spec() != rho.spec() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: op.dim(),
        });
    }
    Ok(trace_product(op.matrix(), rho.matrix()))
}

/// `Tr(A B)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for j in 0..n {
        for i in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}
