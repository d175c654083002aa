//! Operator basis of the coupled spin pair.
//!
//! The working medium is two coupled two-level systems. All observables of
//! interest live in the span of five orthonormal Hermitian operators
//! B₁,…,B₅ plus the identity, written in the "polarization representation"
//! (tensor-product eigenbasis of σ_z¹⊗σ_z², ordered ↑↑, ↑↓, ↓↑, ↓↓):
//!
//! ```text
//! B₁ = 2^(-3/2)(σz⊗I + I⊗σz)      polarization
//! B₂ = 2^(-3/2)(σx⊗σx − σy⊗σy)    x/y spin-spin correlation
//! B₃ = 2^(-3/2)(σy⊗σx + σx⊗σy)    conjugate correlation
//! B₄ = 2^(-3/2)(σz⊗I − I⊗σz)      polarization difference
//! B₅ = ½ σz⊗σz                    zz correlation
//! ```
//!
//! {B₁,B₂,B₃} close under commutation as an SU(2) algebra,
//! `[B₁,B₂] = i√2·B₃` and cyclic, and the Hamiltonian is H = ω·B₁ + J·B₂ with
//! eigenvalues {−Ω/√2, 0, 0, Ω/√2}, Ω = √(ω²+J²).

use std::f64::consts::SQRT_2;
use std::ops::{Add, Mul, Neg, Sub};

pub use num_complex::Complex64;

use crate::{OttoError, Result};

const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
const C_ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense 4×4 complex matrix with value semantics.
///
/// The Hilbert space is fixed at dimension 4, so operators are plain stack
/// arrays; no sparsity, no allocation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Operator4 {
    pub m: [[Complex64; 4]; 4],
}

impl Operator4 {
    pub const fn new(m: [[Complex64; 4]; 4]) -> Self {
        Self { m }
    }

    pub fn zero() -> Self {
        Self::new([[C_ZERO; 4]; 4])
    }

    pub fn identity() -> Self {
        let mut m = [[C_ZERO; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = C_ONE;
        }
        Self::new(m)
    }

    /// Real diagonal matrix.
    pub fn diag(d: [f64; 4]) -> Self {
        let mut m = [[C_ZERO; 4]; 4];
        for i in 0..4 {
            m[i][i] = Complex64::new(d[i], 0.0);
        }
        Self::new(m)
    }

    pub fn from_real(r: [[f64; 4]; 4]) -> Self {
        let mut m = [[C_ZERO; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] = Complex64::new(r[i][j], 0.0);
            }
        }
        Self::new(m)
    }

    /// |row⟩⟨col| basis matrix (0-indexed).
    pub fn ketbra(row: usize, col: usize) -> Self {
        let mut m = [[C_ZERO; 4]; 4];
        m[row][col] = C_ONE;
        Self::new(m)
    }

    pub fn dagger(&self) -> Self {
        let mut r = [[C_ZERO; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                r[i][j] = self.m[j][i].conj();
            }
        }
        Self::new(r)
    }

    pub fn trace(&self) -> Complex64 {
        self.m[0][0] + self.m[1][1] + self.m[2][2] + self.m[3][3]
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut r = self.m;
        for row in r.iter_mut() {
            for x in row.iter_mut() {
                *x *= s;
            }
        }
        Self::new(r)
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn commutator(&self, other: &Operator4) -> Operator4 {
        *self * *other - *other * *self
    }

    pub fn anticommutator(&self, other: &Operator4) -> Operator4 {
        *self * *other + *other * *self
    }

    /// Hilbert-Schmidt scalar product ⟨A,B⟩ = Tr{A†B}.
    pub fn hs_inner(&self, other: &Operator4) -> Complex64 {
        let mut s = C_ZERO;
        for i in 0..4 {
            for j in 0..4 {
                s += self.m[i][j].conj() * other.m[i][j];
            }
        }
        s
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.hs_inner(self).re.sqrt()
    }

    pub fn max_abs_diff(&self, other: &Operator4) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                d = d.max((self.m[i][j] - other.m[i][j]).norm());
            }
        }
        d
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.dagger())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// Eigenvalues of a Hermitian matrix, ascending, by cyclic complex Jacobi
    /// rotations. Also returns the accumulated unitary V with A·V = V·diag(λ).
    pub fn hermitian_eigen(&self) -> ([f64; 4], Operator4) {
        let mut a = self.m;
        let mut v = Operator4::identity().m;
        for _sweep in 0..60 {
            let mut off = 0.0f64;
            for p in 0..4 {
                for q in p + 1..4 {
                    off = off.max(a[p][q].norm());
                }
            }
            if off < 1e-300 || off < 1e-16 * self.frobenius_norm().max(1.0) {
                break;
            }
            for p in 0..3 {
                for q in p + 1..4 {
                    let apq = a[p][q];
                    if apq.norm() < 1e-300 {
                        continue;
                    }
                    // Unitary 2x2 rotation zeroing a[p][q]; the phase of the
                    // off-diagonal entry is absorbed into the rotation.
                    let phase = apq / apq.norm();
                    let app = a[p][p].re;
                    let aqq = a[q][q].re;
                    let tau = (aqq - app) / (2.0 * apq.norm());
                    // smaller-magnitude root of t² − 2τt − 1 = 0 zeroing A'[p][q]
                    let t = if tau >= 0.0 {
                        -1.0 / (tau + (1.0 + tau * tau).sqrt())
                    } else {
                        1.0 / (-tau + (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    // columns p,q of A and V: A ← J† A J, V ← V J with
                    // J[p][p]=c, J[p][q]=-s·phase, J[q][p]=s·conj(phase), J[q][q]=c
                    let jpq = -phase * s;
                    let jqp = phase.conj() * s;
                    // A ← A J (columns)
                    for r in 0..4 {
                        let arp = a[r][p];
                        let arq = a[r][q];
                        a[r][p] = arp * c + arq * jqp;
                        a[r][q] = arp * jpq + arq * c;
                    }
                    // A ← J† A (rows): J†[p][q] = conj(J[q][p]), J†[q][p] = conj(J[p][q])
                    for cidx in 0..4 {
                        let apc = a[p][cidx];
                        let aqc = a[q][cidx];
                        a[p][cidx] = apc * c + aqc * jqp.conj();
                        a[q][cidx] = apc * jpq.conj() + aqc * c;
                    }
                    for r in 0..4 {
                        let vrp = v[r][p];
                        let vrq = v[r][q];
                        v[r][p] = vrp * c + vrq * jqp;
                        v[r][q] = vrp * jpq + vrq * c;
                    }
                }
            }
        }
        let mut order = [0usize, 1, 2, 3];
        order.sort_by(|&i, &j| a[i][i].re.partial_cmp(&a[j][j].re).unwrap());
        let mut eig = [0.0; 4];
        let mut vs = [[C_ZERO; 4]; 4];
        for (k, &i) in order.iter().enumerate() {
            eig[k] = a[i][i].re;
            for r in 0..4 {
                vs[r][k] = v[r][i];
            }
        }
        (eig, Operator4::new(vs))
    }

    pub fn hermitian_eigenvalues(&self) -> [f64; 4] {
        self.hermitian_eigen().0
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.hermitian_eigenvalues()[0]
    }
}

impl Add for Operator4 {
    type Output = Operator4;
    fn add(self, rhs: Operator4) -> Operator4 {
        let mut r = self.m;
        for i in 0..4 {
            for j in 0..4 {
                r[i][j] += rhs.m[i][j];
            }
        }
        Operator4::new(r)
    }
}

impl Sub for Operator4 {
    type Output = Operator4;
    fn sub(self, rhs: Operator4) -> Operator4 {
        let mut r = self.m;
        for i in 0..4 {
            for j in 0..4 {
                r[i][j] -= rhs.m[i][j];
            }
        }
        Operator4::new(r)
    }
}

impl Mul for Operator4 {
    type Output = Operator4;
    fn mul(self, rhs: Operator4) -> Operator4 {
        let mut r = [[C_ZERO; 4]; 4];
        for i in 0..4 {
            for k in 0..4 {
                let aik = self.m[i][k];
                if aik == C_ZERO {
                    continue;
                }
                for j in 0..4 {
                    r[i][j] += aik * rhs.m[k][j];
                }
            }
        }
        Operator4::new(r)
    }
}

impl Neg for Operator4 {
    type Output = Operator4;
    fn neg(self) -> Operator4 {
        self.scale_re(-1.0)
    }
}

/// A point of the external control: field ω and internal coupling J.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldPoint {
    pub omega: f64,
    pub j_coupling: f64,
}

impl FieldPoint {
    pub fn new(omega: f64, j_coupling: f64) -> Self {
        Self { omega, j_coupling }
    }

    /// Ω = √(ω² + J²), the single-excitation energy scale.
    pub fn big_omega(&self) -> f64 {
        self.omega.hypot(self.j_coupling)
    }

    /// Eigenvector parameters μ = √((Ω−ω)/2Ω), χ = √((Ω+ω)/2Ω).
    ///
    /// μ² + χ² = 1 by construction.
    pub fn mu_chi(&self) -> Result<(f64, f64)> {
        let om = self.big_omega();
        if om <= 0.0 {
            return Err(OttoError::DegenerateField);
        }
        let mu = ((om - self.omega) / (2.0 * om)).max(0.0).sqrt();
        let chi = ((om + self.omega) / (2.0 * om)).max(0.0).sqrt();
        Ok((mu, chi))
    }
}

/// The five orthonormal basis operators plus the identity.
#[derive(Debug, Clone)]
pub struct OperatorBasis {
    pub b1: Operator4,
    pub b2: Operator4,
    pub b3: Operator4,
    pub b4: Operator4,
    pub b5: Operator4,
    pub identity: Operator4,
}

impl OperatorBasis {
    pub fn ops(&self) -> [&Operator4; 5] {
        [&self.b1, &self.b2, &self.b3, &self.b4, &self.b5]
    }
}

/// Construct the operator basis in the polarization representation.
pub fn build_basis() -> OperatorBasis {
    let inv_sqrt2 = 1.0 / SQRT_2;
    let b1 = Operator4::diag([inv_sqrt2, 0.0, 0.0, -inv_sqrt2]);
    let mut b2 = Operator4::zero();
    b2.m[0][3] = Complex64::new(inv_sqrt2, 0.0);
    b2.m[3][0] = Complex64::new(inv_sqrt2, 0.0);
    let mut b3 = Operator4::zero();
    b3.m[0][3] = Complex64::new(0.0, -inv_sqrt2);
    b3.m[3][0] = Complex64::new(0.0, inv_sqrt2);
    let b4 = Operator4::diag([0.0, inv_sqrt2, -inv_sqrt2, 0.0]);
    let b5 = Operator4::diag([0.5, -0.5, -0.5, 0.5]);
    OperatorBasis {
        b1,
        b2,
        b3,
        b4,
        b5,
        identity: Operator4::identity(),
    }
}

/// H = ω·B₁ + J·B₂.
pub fn hamiltonian(fp: &FieldPoint) -> Operator4 {
    let basis = build_basis();
    basis.b1.scale_re(fp.omega) + basis.b2.scale_re(fp.j_coupling)
}

/// Energy eigenvalues {−Ω/√2, 0, 0, +Ω/√2} and the real orthogonal matrix C
/// with C·H·C = diag(−Ω/√2, 0, 0, Ω/√2).
///
/// C is symmetric and involutory (C² = I), built from μ and χ:
///
/// ```text
///     ( -μ  0  0  χ )
/// C = (  0  1  0  0 )
///     (  0  0  1  0 )
///     (  χ  0  0  μ )
/// ```
pub fn energy_eigensystem(fp: &FieldPoint) -> Result<([f64; 4], Operator4)> {
    let (mu, chi) = fp.mu_chi()?;
    let om = fp.big_omega();
    let eig = [-om / SQRT_2, 0.0, 0.0, om / SQRT_2];
    let mut c = [[0.0; 4]; 4];
    c[0][0] = -mu;
    c[0][3] = chi;
    c[1][1] = 1.0;
    c[2][2] = 1.0;
    c[3][0] = chi;
    c[3][3] = mu;
    Ok((eig, Operator4::from_real(c)))
}
