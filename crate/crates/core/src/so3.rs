//! Rotation group SO(3) and its Lie algebra so(3).
//!
//! Rotations are stored as full 3×3 matrices (row-major) so that frame
//! vectors are plain column reads. Lie-algebra elements are stored by their
//! coefficient vector ω, standing for the skew matrix `[ω]×` with
//! `[ω]× v = ω × v`.

use crate::error::{invalid, Error, Result};

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

/// Below this angle the Rodrigues coefficients switch to their Taylor series.
const SMALL_ANGLE: f64 = 1e-4;

/// Tolerance used when validating a matrix handed to [`Rotation3::from_matrix`].
pub const ORTHONORMAL_TOL: f64 = 1e-8;

pub const E1: Vec3 = [1.0, 0.0, 0.0];
pub const E2: Vec3 = [0.0, 1.0, 0.0];
pub const E3: Vec3 = [0.0, 0.0, 1.0];

#[inline]
pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn add(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale(a: &Vec3, k: f64) -> Vec3 {
    [a[0] * k, a[1] * k, a[2] * k]
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Element of so(3) stored as the coefficient vector ω of `[ω]×`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewSym3 {
    omega: Vec3,
}

impl SkewSym3 {
    pub const ZERO: SkewSym3 = SkewSym3 { omega: [0.0; 3] };

    pub fn omega(&self) -> Vec3 {
        self.omega
    }

    /// Rotation angle `|ω|` of the exponential.
    pub fn angle(&self) -> f64 {
        norm(&self.omega)
    }

    /// The represented matrix. Antisymmetric exactly by construction.
    pub fn matrix(&self) -> Mat3 {
        let [x, y, z] = self.omega;
        [[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]]
    }

    /// `[ω]× v`, i.e. `ω × v`.
    pub fn apply(&self, v: &Vec3) -> Vec3 {
        cross(&self.omega, v)
    }

    pub fn scaled(&self, k: f64) -> SkewSym3 {
        SkewSym3 {
            omega: scale(&self.omega, k),
        }
    }
}

/// Hat map: builds the so(3) element whose action is `w ↦ v × w`.
pub fn hat(v: Vec3) -> Result<SkewSym3> {
    if !all_finite(&v) {
        return Err(invalid(format!("hat: non-finite coefficients {v:?}")));
    }
    Ok(SkewSym3 { omega: v })
}

/// Element of SO(3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation3 {
    m: Mat3,
}

impl Default for Rotation3 {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl Rotation3 {
    pub const IDENTITY: Rotation3 = Rotation3 {
        m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    /// Validates orthonormality and orientation to [`ORTHONORMAL_TOL`].
    pub fn from_matrix(m: Mat3) -> Result<Self> {
        if !all_finite(m.as_flattened()) {
            return Err(invalid("rotation matrix has non-finite entries"));
        }
        let r = Rotation3 { m };
        let defect = r.orthonormality_defect();
        if defect > ORTHONORMAL_TOL {
            return Err(invalid(format!(
                "matrix is not orthonormal: |MᵀM − I|_F = {defect:e}"
            )));
        }
        let det = r.determinant();
        if (det - 1.0).abs() > ORTHONORMAL_TOL {
            return Err(invalid(format!("matrix has determinant {det}, expected +1")));
        }
        Ok(r)
    }

    /// Wraps a matrix without checking it. Intended for tests that need a
    /// slightly perturbed input for [`reorthonormalize`].
    pub fn from_matrix_unchecked(m: Mat3) -> Self {
        Rotation3 { m }
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.m
    }

    pub fn column(&self, j: usize) -> Vec3 {
        [self.m[0][j], self.m[1][j], self.m[2][j]]
    }

    pub fn transpose(&self) -> Rotation3 {
        let m = &self.m;
        Rotation3 {
            m: [
                [m[0][0], m[1][0], m[2][0]],
                [m[0][1], m[1][1], m[2][1]],
                [m[0][2], m[1][2], m[2][2]],
            ],
        }
    }

    /// Inverse of a rotation is its transpose.
    pub fn inverse(&self) -> Rotation3 {
        self.transpose()
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Frobenius norm of `MᵀM − I`.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let mut g = 0.0;
                for k in 0..3 {
                    g += self.m[k][i] * self.m[k][j];
                }
                let d = g - if i == j { 1.0 } else { 0.0 };
                acc += d * d;
            }
        }
        acc.sqrt()
    }

    /// Largest absolute entrywise difference to `other`.
    pub fn max_abs_diff(&self, other: &Rotation3) -> f64 {
        self.m
            .as_flattened()
            .iter()
            .zip(other.m.as_flattened())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Matrix exponential of a skew matrix via the Rodrigues closed form
/// `I + (sin θ/θ)[ω]× + ((1 − cos θ)/θ²)[ω]×²`, θ = |ω|.
pub fn exp_rodrigues(s: &SkewSym3) -> Rotation3 {
    let w = s.omega;
    let theta2 = dot(&w, &w);
    let theta = theta2.sqrt();
    let (a, b) = if theta < SMALL_ANGLE {
        (
            1.0 - theta2 / 6.0 + theta2 * theta2 / 120.0,
            0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0,
        )
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / theta2)
    };
    // [ω]×² = ωωᵀ − θ² I
    let [x, y, z] = w;
    let m = [
        [
            1.0 + b * (x * x - theta2),
            -a * z + b * x * y,
            a * y + b * x * z,
        ],
        [
            a * z + b * x * y,
            1.0 + b * (y * y - theta2),
            -a * x + b * y * z,
        ],
        [
            -a * y + b * x * z,
            a * x + b * y * z,
            1.0 + b * (z * z - theta2),
        ],
    ];
    Rotation3 { m }
}

/// Rotation by the angle with the given cosine and sine about a unit axis.
/// Same result as [`exp_rodrigues`] of `angle · u`, without recomputing the
/// trigonometric factors; the caller guarantees `|u| = 1`.
#[inline]
pub fn rotation_about_unit_axis(u: &Vec3, cos: f64, sin: f64) -> Rotation3 {
    let [x, y, z] = *u;
    let b = 1.0 - cos;
    let m = [
        [cos + b * x * x, -sin * z + b * x * y, sin * y + b * x * z],
        [sin * z + b * x * y, cos + b * y * y, -sin * x + b * y * z],
        [-sin * y + b * x * z, sin * x + b * y * z, cos + b * z * z],
    ];
    Rotation3 { m }
}

/// Matrix product `a · b`.
#[inline]
pub fn compose(a: &Rotation3, b: &Rotation3) -> Rotation3 {
    let (x, y) = (&a.m, &b.m);
    let mut m = [[0.0; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, out) in row.iter_mut().enumerate() {
            *out = x[i][0] * y[0][j] + x[i][1] * y[1][j] + x[i][2] * y[2][j];
        }
    }
    Rotation3 { m }
}

#[inline]
pub fn apply(r: &Rotation3, v: &Vec3) -> Vec3 {
    let m = &r.m;
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

/// Restores orthonormality with modified Gram–Schmidt on the columns.
///
/// Fails on rank-deficient input or when the orthonormalized frame is
/// left-handed.
pub fn reorthonormalize(r: &Rotation3) -> Result<Rotation3> {
    if !all_finite(r.m.as_flattened()) {
        return Err(Error::NumericFailure("non-finite matrix".into()));
    }
    let mut cols = [r.column(0), r.column(1), r.column(2)];
    for j in 0..3 {
        for i in 0..j {
            let p = dot(&cols[i], &cols[j]);
            cols[j] = sub(&cols[j], &scale(&cols[i], p));
        }
        let n = norm(&cols[j]);
        if n < 1e-12 {
            return Err(Error::NumericFailure(format!(
                "rank-deficient matrix (column {j} collapsed)"
            )));
        }
        cols[j] = scale(&cols[j], 1.0 / n);
    }
    let out = Rotation3 {
        m: [
            [cols[0][0], cols[1][0], cols[2][0]],
            [cols[0][1], cols[1][1], cols[2][1]],
            [cols[0][2], cols[1][2], cols[2][2]],
        ],
    };
    if out.determinant() <= 0.0 {
        return Err(Error::NumericFailure("reflection, not a rotation".into()));
    }
    Ok(out)
}

/// Unit direction vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVec3(Vec3);

impl UnitVec3 {
    pub const TOL: f64 = 1e-10;

    pub const E3: UnitVec3 = UnitVec3(E3);

    /// Accepts `v` only if `|v|` is within [`Self::TOL`] of 1.
    pub fn new(v: Vec3) -> Result<Self> {
        let n = norm(&v);
        if !n.is_finite() || (n - 1.0).abs() > Self::TOL {
            return Err(invalid(format!("not a unit vector: |v| = {n}")));
        }
        Ok(UnitVec3(v))
    }

    pub fn normalize(v: Vec3) -> Result<Self> {
        let n = norm(&v);
        if !n.is_finite() || n == 0.0 {
            return Err(invalid("cannot normalize zero or non-finite vector"));
        }
        Ok(UnitVec3(scale(&v, 1.0 / n)))
    }

    pub fn get(&self) -> Vec3 {
        self.0
    }
}

impl From<UnitVec3> for Vec3 {
    fn from(u: UnitVec3) -> Vec3 {
        u.0
    }
}
