//! Small fixed-size real linear algebra used by the reduced dynamics.
//!
//! The reduced state lives in a 3-dimensional (b₁,b₂,b₃) space plus two
//! slaved components (b₄,b₅); nothing here is larger than 5×5, so everything
//! is dense, stack-allocated and hand-rolled.

/// 3-vector of expectation values (b₁,b₂,b₃) or a direction in that space.
pub type Vec3 = [f64; 3];

pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn add(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn scale(a: &Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

/// Dense 3×3 real matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3 {
    pub m: [[f64; 3]; 3],
}

impl Mat3 {
    pub const fn new(m: [[f64; 3]; 3]) -> Self {
        Self { m }
    }

    pub const fn zero() -> Self {
        Self::new([[0.0; 3]; 3])
    }

    pub const fn identity() -> Self {
        Self::new([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    }

    pub fn transpose(&self) -> Mat3 {
        let mut r = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                r[i][j] = self.m[j][i];
            }
        }
        Mat3::new(r)
    }

    pub fn mul(&self, other: &Mat3) -> Mat3 {
        let mut r = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for k in 0..3 {
                    s += self.m[i][k] * other.m[k][j];
                }
                r[i][j] = s;
            }
        }
        Mat3::new(r)
    }

    pub fn apply(&self, v: &Vec3) -> Vec3 {
        let mut r = [0.0; 3];
        for i in 0..3 {
            r[i] = dot(&self.m[i], v);
        }
        r
    }

    pub fn scale(&self, s: f64) -> Mat3 {
        let mut r = self.m;
        for row in r.iter_mut() {
            for x in row.iter_mut() {
                *x *= s;
            }
        }
        Mat3::new(r)
    }

    pub fn add(&self, other: &Mat3) -> Mat3 {
        let mut r = self.m;
        for i in 0..3 {
            for j in 0..3 {
                r[i][j] += other.m[i][j];
            }
        }
        Mat3::new(r)
    }

    pub fn det(&self) -> f64 {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Largest absolute entry of (self − other).
    pub fn max_abs_diff(&self, other: &Mat3) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                d = d.max((self.m[i][j] - other.m[i][j]).abs());
            }
        }
        d
    }

    /// Deviation from orthogonality, max |(MᵀM − I)_ij|.
    pub fn orthogonality_defect(&self) -> f64 {
        self.transpose().mul(self).max_abs_diff(&Mat3::identity())
    }
}

/// Affine map x ↦ M·x + d on the five-component reduced state.
///
/// Every cycle branch is affine on (b₁,…,b₅), so a full period composes into
/// a single such map whose fixed point is the limit cycle.
#[derive(Debug, Clone, Copy)]
pub struct AffineMap5 {
    pub matrix: [[f64; 5]; 5],
    pub offset: [f64; 5],
}

impl AffineMap5 {
    pub fn identity() -> Self {
        let mut m = [[0.0; 5]; 5];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Self {
            matrix: m,
            offset: [0.0; 5],
        }
    }

    pub fn apply(&self, x: &[f64; 5]) -> [f64; 5] {
        let mut r = self.offset;
        for i in 0..5 {
            for j in 0..5 {
                r[i] += self.matrix[i][j] * x[j];
            }
        }
        r
    }

    /// `other ∘ self`: apply `self` first, then `other`.
    pub fn then(&self, other: &AffineMap5) -> AffineMap5 {
        let mut m = [[0.0; 5]; 5];
        for i in 0..5 {
            for j in 0..5 {
                let mut s = 0.0;
                for k in 0..5 {
                    s += other.matrix[i][k] * self.matrix[k][j];
                }
                m[i][j] = s;
            }
        }
        let mut d = other.offset;
        for i in 0..5 {
            for k in 0..5 {
                d[i] += other.matrix[i][k] * self.offset[k];
            }
        }
        AffineMap5 {
            matrix: m,
            offset: d,
        }
    }

    /// Solve x = M·x + d, i.e. (I − M)·x = d, by Gaussian elimination with
    /// partial pivoting. Returns `None` if (I − M) is numerically singular.
    pub fn fixed_point(&self) -> Option<[f64; 5]> {
        let mut a = [[0.0; 6]; 5];
        for i in 0..5 {
            for j in 0..5 {
                a[i][j] = -self.matrix[i][j];
            }
            a[i][i] += 1.0;
            a[i][5] = self.offset[i];
        }
        for col in 0..5 {
            let mut piv = col;
            for r in col + 1..5 {
                if a[r][col].abs() > a[piv][col].abs() {
                    piv = r;
                }
            }
            if a[piv][col].abs() < 1e-300 {
                return None;
            }
            a.swap(col, piv);
            for r in 0..5 {
                if r == col {
                    continue;
                }
                let f = a[r][col] / a[col][col];
                for c in col..6 {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
        let mut x = [0.0; 5];
        for i in 0..5 {
            x[i] = a[i][5] / a[i][i];
        }
        Some(x)
    }

    /// Upper bound on the spectral radius via Gelfand's formula: computes
    /// ‖M^(2^k)‖_F^(1/2^k) by repeated squaring. The bound converges to the
    /// spectral radius from above, so a return value < 1 proves contraction.
    pub fn spectral_radius_bound(&self, squarings: u32) -> f64 {
        let mut m = self.matrix;
        for _ in 0..squarings {
            let mut r = [[0.0; 5]; 5];
            for i in 0..5 {
                for j in 0..5 {
                    let mut s = 0.0;
                    for k in 0..5 {
                        s += m[i][k] * m[k][j];
                    }
                    r[i][j] = s;
                }
            }
            // renormalizing would be needed for huge powers; 5x5 contractions
            // stay comfortably inside f64 range for the squarings used here
            m = r;
        }
        let mut frob = 0.0;
        for row in &m {
            for x in row {
                frob += x * x;
            }
        }
        frob.sqrt().powf(1.0 / f64::from(1u32 << squarings))
    }

    pub fn max_abs_diff(&self, other: &AffineMap5) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..5 {
            for j in 0..5 {
                d = d.max((self.matrix[i][j] - other.matrix[i][j]).abs());
            }
            d = d.max((self.offset[i] - other.offset[i]).abs());
        }
        d
    }
}

pub fn sub5(a: &[f64; 5], b: &[f64; 5]) -> [f64; 5] {
    let mut r = [0.0; 5];
    for i in 0..5 {
        r[i] = a[i] - b[i];
    }
    r
}

pub fn norm5(a: &[f64; 5]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_point_solves_contraction() {
        let map = AffineMap5 {
            matrix: [
                [0.5, 0.1, 0.0, 0.0, 0.0],
                [0.0, 0.3, 0.2, 0.0, 0.0],
                [0.1, 0.0, 0.4, 0.0, 0.0],
                [0.0, 0.0, 0.0, 0.6, 0.0],
                [0.2, 0.0, 0.0, 0.0, 0.1],
            ],
            offset: [1.0, -0.5, 0.25, 2.0, 0.0],
        };
        let x = map.fixed_point().unwrap();
        let y = map.apply(&x);
        assert!(norm5(&sub5(&x, &y)) < 1e-13);
        assert!(map.spectral_radius_bound(9) < 1.0);
    }

    #[test]
    fn compose_matches_sequential_application() {
        let a = AffineMap5 {
            matrix: [[0.1; 5]; 5],
            offset: [1.0, 2.0, 3.0, 4.0, 5.0],
        };
        let mut b = AffineMap5::identity();
        b.matrix[0][4] = -0.7;
        b.offset = [0.5; 5];
        let x = [1.0, -1.0, 2.0, 0.0, 3.0];
        let direct = b.apply(&a.apply(&x));
        let composed = a.then(&b).apply(&x);
        assert!(norm5(&sub5(&direct, &composed)) < 1e-14);
    }
}
