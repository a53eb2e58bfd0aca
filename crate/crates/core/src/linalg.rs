//! Minimal dense 2x2 complex linear algebra: everything in this crate lives
//! in a two-dimensional state space, so the closed-form Hermitian
//! eigendecomposition is exact and no external solver is needed.

use num_complex::Complex64;

/// Two-component complex vector.
pub type Vec2 = [Complex64; 2];

/// Eigenvalue separation below which a Hermitian matrix is reported as
/// degenerate and any orthonormal basis is returned.
pub const DEGENERATE_SPECTRUM_TOL: f64 = 1e-12;

/// Standard inner product `(a, b) = sum_x a(x) conj(b(x))`.
pub fn inner(a: &Vec2, b: &Vec2) -> Complex64 {
    a[0] * b[0].conj() + a[1] * b[1].conj()
}

/// Euclidean norm of a two-component complex vector.
pub fn norm(v: &Vec2) -> f64 {
    (v[0].norm_sqr() + v[1].norm_sqr()).sqrt()
}

/// Scale a vector by a complex factor.
pub fn scale(v: &Vec2, c: Complex64) -> Vec2 {
    [v[0] * c, v[1] * c]
}

/// Componentwise sum.
pub fn add(a: &Vec2, b: &Vec2) -> Vec2 {
    [a[0] + b[0], a[1] + b[1]]
}

/// 2x2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub e: [[Complex64; 2]; 2],
}

/// Eigendecomposition of a Hermitian 2x2 matrix.
#[derive(Debug, Clone)]
pub struct Eigh {
    /// Real eigenvalues in ascending order.
    pub values: [f64; 2],
    /// Orthonormal eigenvectors, `vectors[j]` belonging to `values[j]`.
    pub vectors: [Vec2; 2],
    /// Set when the spectrum is degenerate and the basis choice is arbitrary.
    pub degenerate: bool,
}

impl Mat2 {
    pub fn new(e: [[Complex64; 2]; 2]) -> Self {
        Self { e }
    }

    pub fn zero() -> Self {
        Self::new([[Complex64::ZERO; 2]; 2])
    }

    pub fn identity() -> Self {
        Self::diag_re(1.0, 1.0)
    }

    /// Real diagonal matrix.
    pub fn diag_re(d0: f64, d1: f64) -> Self {
        Self::new([
            [Complex64::new(d0, 0.0), Complex64::ZERO],
            [Complex64::ZERO, Complex64::new(d1, 0.0)],
        ])
    }

    /// Rank-one projector `|v><v|`.
    pub fn outer(v: &Vec2) -> Self {
        Self::new([
            [v[0] * v[0].conj(), v[0] * v[1].conj()],
            [v[1] * v[0].conj(), v[1] * v[1].conj()],
        ])
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = *self;
        for row in out.e.iter_mut() {
            for x in row.iter_mut() {
                *x *= c;
            }
        }
        out
    }

    pub fn scale_re(&self, c: f64) -> Self {
        self.scale(Complex64::new(c, 0.0))
    }

    pub fn adjoint(&self) -> Self {
        Self::new([
            [self.e[0][0].conj(), self.e[1][0].conj()],
            [self.e[0][1].conj(), self.e[1][1].conj()],
        ])
    }

    pub fn trace(&self) -> Complex64 {
        self.e[0][0] + self.e[1][1]
    }

    pub fn mul_vec(&self, v: &Vec2) -> Vec2 {
        [
            self.e[0][0] * v[0] + self.e[0][1] * v[1],
            self.e[1][0] * v[0] + self.e[1][1] * v[1],
        ]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.e
            .iter()
            .flatten()
            .map(|x| x.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Largest deviation from Hermitian symmetry, `max |m - m^dagger|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let adj = self.adjoint();
        self.e
            .iter()
            .flatten()
            .zip(adj.e.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// Closed-form eigendecomposition. The matrix is assumed Hermitian; the
    /// imaginary parts of the diagonal are ignored.
    pub fn eigh(&self) -> Eigh {
        let a = self.e[0][0].re;
        let b = self.e[1][1].re;
        let c = self.e[0][1];
        let mean = 0.5 * (a + b);
        let half_gap = 0.5 * (a - b);
        let s = (half_gap * half_gap + c.norm_sqr()).sqrt();
        let values = [mean - s, mean + s];
        let degenerate = 2.0 * s < DEGENERATE_SPECTRUM_TOL;

        if degenerate {
            return Eigh {
                values,
                vectors: [basis(0), basis(1)],
                degenerate: true,
            };
        }
        if c.norm_sqr() == 0.0 {
            // Diagonal: eigenvectors are the basis, ordered by eigenvalue.
            let vectors = if a <= b {
                [basis(0), basis(1)]
            } else {
                [basis(1), basis(0)]
            };
            return Eigh {
                values,
                vectors,
                degenerate: false,
            };
        }

        let vectors = [eigenvector(a, b, c, values[0]), eigenvector(a, b, c, values[1])];
        Eigh {
            values,
            vectors,
            degenerate: false,
        }
    }
}

fn basis(i: usize) -> Vec2 {
    let mut v = [Complex64::ZERO; 2];
    v[i] = Complex64::ONE;
    v
}

/// Normalized eigenvector of `[[a, c], [conj(c), b]]` for eigenvalue `mu`,
/// picking the better conditioned of the two algebraic forms.
fn eigenvector(a: f64, b: f64, c: Complex64, mu: f64) -> Vec2 {
    let v1: Vec2 = [c, Complex64::new(mu - a, 0.0)];
    let v2: Vec2 = [Complex64::new(mu - b, 0.0), c.conj()];
    let (n1, n2) = (norm(&v1), norm(&v2));
    let (v, n) = if n1 >= n2 { (v1, n1) } else { (v2, n2) };
    scale(&v, Complex64::new(1.0 / n, 0.0))
}

impl std::ops::Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let mut out = self;
        for (row, r2) in out.e.iter_mut().zip(rhs.e.iter()) {
            for (x, y) in row.iter_mut().zip(r2.iter()) {
                *x += y;
            }
        }
        out
    }
}

impl std::ops::Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        let mut out = self;
        for (row, r2) in out.e.iter_mut().zip(rhs.e.iter()) {
            for (x, y) in row.iter_mut().zip(r2.iter()) {
                *x -= y;
            }
        }
        out
    }
}

impl std::ops::Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let mut out = Mat2::zero();
        for i in 0..2 {
            for j in 0..2 {
                out.e[i][j] = self.e[i][0] * rhs.e[0][j] + self.e[i][1] * rhs.e[1][j];
            }
        }
        out
    }
}
