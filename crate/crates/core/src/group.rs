//! The cyclic azimuthal rotation group and its 2-D latent counterpart.
//!
//! The 3-D group acts on object coordinates through rotations about the
//! z-axis by multiples of `2π/K`. The latent group acts on the 2-D pose
//! vector through the corresponding planar rotations. Both share the same
//! [`GroupParams`], which makes the map `g_k -> p_k` a homomorphism.

use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// 2×2 row-major matrix.
pub type Mat2 = [[f64; 2]; 2];

/// Order of the cyclic group. The angular step is always derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GroupParams {
    order: usize,
}

impl GroupParams {
    pub const DEFAULT_ORDER: usize = 36;

    pub fn new(order: usize) -> Result<Self> {
        if order < 2 {
            return Err(Error::InvalidParam(format!(
                "group order must be at least 2, got {order}"
            )));
        }
        Ok(Self { order })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Angular step in radians, `2π / K`.
    pub fn delta_theta(&self) -> f64 {
        TAU / self.order as f64
    }

    /// Reduce any integer power to its representative in `0..K`.
    pub fn reduce(&self, k: i64) -> usize {
        k.rem_euclid(self.order as i64) as usize
    }

    /// Angle of the k-th group element, `k·Δθ` with k reduced mod K.
    pub fn angle_of(&self, k: i64) -> f64 {
        self.reduce(k) as f64 * self.delta_theta()
    }
}

impl Default for GroupParams {
    fn default() -> Self {
        Self {
            order: Self::DEFAULT_ORDER,
        }
    }
}

/// A rotation about the z-axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation3([[f64; 3]; 3]);

impl Rotation3 {
    pub fn matrix(&self) -> &[[f64; 3]; 3] {
        &self.0
    }

    pub fn apply(&self, v: [f64; 3]) -> [f64; 3] {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    pub fn compose(&self, other: &Rotation3) -> Rotation3 {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|l| self.0[i][l] * other.0[l][j]).sum();
            }
        }
        Rotation3(out)
    }
}

/// `R_z(theta)`. Finite angles outside `[0, 2π)` are reduced first.
pub fn make_generator_3d(theta: f64) -> Result<Rotation3> {
    if !theta.is_finite() {
        return Err(Error::InvalidParam(format!("rotation angle {theta} is not finite")));
    }
    let (s, c) = theta.rem_euclid(TAU).sin_cos();
    Ok(Rotation3([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]))
}

pub fn rotation2(theta: f64) -> Mat2 {
    let (s, c) = theta.sin_cos();
    [[c, -s], [s, c]]
}

pub fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

pub fn mat2_apply(m: &Mat2, v: [f64; 2]) -> [f64; 2] {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

/// `mᵀ·v`; for a rotation this is the inverse action.
pub fn mat2_apply_transpose(m: &Mat2, v: [f64; 2]) -> [f64; 2] {
    [
        m[0][0] * v[0] + m[1][0] * v[1],
        m[0][1] * v[0] + m[1][1] * v[1],
    ]
}

/// Generator `p` of the latent pose group, with all K powers tabulated.
///
/// Powers are looked up from exact-angle rotations `R(k·Δθ)` instead of being
/// accumulated by repeated multiplication, so `p^K` is the identity to
/// rounding error regardless of K.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentGenerator {
    group: GroupParams,
    table: Vec<Mat2>,
}

impl LatentGenerator {
    pub fn new(group: GroupParams) -> Self {
        let table = (0..group.order())
            .map(|k| rotation2(k as f64 * group.delta_theta()))
            .collect();
        Self { group, table }
    }

    pub fn group(&self) -> GroupParams {
        self.group
    }

    /// The generator itself, the rotation by Δθ.
    pub fn matrix(&self) -> &Mat2 {
        &self.table[1]
    }

    /// `p^k` for any integer k, negative powers being inverses.
    pub fn power(&self, k: i64) -> &Mat2 {
        &self.table[self.group.reduce(k)]
    }

    pub fn table(&self) -> &[Mat2] {
        &self.table
    }

    pub fn apply_power(&self, k: i64, v: [f64; 2]) -> [f64; 2] {
        mat2_apply(self.power(k), v)
    }
}

/// Same as `LatentGenerator::new`.
pub fn make_latent_generator(group: GroupParams) -> LatentGenerator {
    LatentGenerator::new(group)
}

/// Same as [`LatentGenerator::apply_power`].
pub fn apply_power(p: &LatentGenerator, k: i64, v: [f64; 2]) -> [f64; 2] {
    p.apply_power(k, v)
}

/// The discrete pose set `{0, Δθ, …, (K−1)Δθ}`.
pub fn pose_set(group: GroupParams) -> Vec<f64> {
    (0..group.order())
        .map(|k| k as f64 * group.delta_theta())
        .collect()
}

/// Number of generator steps taking pose `theta1` to `theta2`.
///
/// Angles are snapped to the nearest grid step; a difference more than a
/// quarter step from the grid is rejected.
pub fn angle_steps(theta1: f64, theta2: f64, group: GroupParams) -> Result<usize> {
    if !theta1.is_finite() || !theta2.is_finite() {
        return Err(Error::InvalidParam("angles must be finite".into()));
    }
    let steps = (theta2 - theta1).rem_euclid(TAU) / group.delta_theta();
    let nearest = steps.round();
    if (steps - nearest).abs() > 0.25 {
        return Err(Error::GridMismatch { steps });
    }
    Ok(nearest as usize % group.order())
}
