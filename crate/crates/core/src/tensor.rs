//! Small-tensor algebra in two dimensions.
//!
//! Symmetric 2x2 tensors are stored in Voigt order `(11, 22, 12)`. Strains
//! carry engineering shear (`[e11, e22, 2 e12]`), stresses do not
//! (`[s11, s22, s12]`), so that `stress . strain` is the full double
//! contraction. A fourth-order tensor `T` with minor symmetries is stored as
//! the 3x3 matrix `M[a][b] = T_{ij mn}` with `a ~ (ij)`, `b ~ (mn)`; with this
//! convention `s_b = sum_a M[a][b] e_a` is the stress `T_{ijmn} e_ij`.

use nalgebra::{Matrix2, Matrix3, SymmetricEigen, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index pairs `(i, j)` of the three Voigt slots.
pub const VOIGT_PAIRS: [(usize, usize); 3] = [(0, 0), (1, 1), (0, 1)];

/// Engineering strain of the unit load `sym(e^i (x) e^j)` for Voigt slot `a`.
pub fn unit_strain(a: usize) -> Vector3<f64> {
    let mut e = Vector3::zeros();
    e[a] = 1.0;
    e
}

/// Engineering Voigt form of `sym(u (x) v)`.
pub fn sym_dyad(u: Vector2<f64>, v: Vector2<f64>) -> Vector3<f64> {
    Vector3::new(u[0] * v[0], u[1] * v[1], u[0] * v[1] + u[1] * v[0])
}

/// Full contraction `s : t` of two stresses in Voigt form.
pub fn stress_dot(s: &Vector3<f64>, t: &Vector3<f64>) -> f64 {
    s[0] * t[0] + s[1] * t[1] + 2.0 * s[2] * t[2]
}

/// Isotropic Lamé pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lame {
    pub lambda: f64,
    pub mu: f64,
}

impl Lame {
    pub fn new(lambda: f64, mu: f64) -> Self {
        Lame { lambda, mu }
    }

    pub fn validate(&self, what: &str) -> Result<()> {
        if !(self.mu > 0.0 && self.lambda >= 0.0 && self.mu.is_finite() && self.lambda.is_finite()) {
            return Err(Error::NonEllipticTensor(format!(
                "{what}: need mu > 0 and lambda >= 0, got lambda = {}, mu = {}",
                self.lambda, self.mu
            )));
        }
        Ok(())
    }

    pub fn voigt(&self) -> Voigt4 {
        isotropic(self.lambda, self.mu)
    }
}

/// Electrostriction pair: `C_ijkh = alpha d_ij d_kh + beta (d_ik d_jh + d_ih d_jk)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Electrostriction {
    pub alpha: f64,
    pub beta: f64,
}

impl Electrostriction {
    pub const ZERO: Electrostriction = Electrostriction { alpha: 0.0, beta: 0.0 };

    pub fn new(alpha: f64, beta: f64) -> Self {
        Electrostriction { alpha, beta }
    }

    pub fn voigt(&self) -> Voigt4 {
        isotropic(self.alpha, self.beta)
    }
}

fn isotropic(lambda: f64, mu: f64) -> Voigt4 {
    Voigt4(Matrix3::new(lambda + 2.0 * mu, lambda, 0.0, lambda, lambda + 2.0 * mu, 0.0, 0.0, 0.0, mu))
}

/// Fourth-order tensor with minor symmetries, see the module docs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Voigt4(pub Matrix3<f64>);

impl Voigt4 {
    pub fn zero() -> Self {
        Voigt4(Matrix3::zeros())
    }

    /// Component `T_{ijmn}` with zero-based indices.
    pub fn component(&self, i: usize, j: usize, m: usize, n: usize) -> f64 {
        self.0[(slot(i, j), slot(m, n))]
    }

    /// Stress `T : e` for an engineering strain `e`.
    pub fn stress(&self, strain: &Vector3<f64>) -> Vector3<f64> {
        self.0.transpose() * strain
    }

    /// Quadratic form `T : e : e`.
    pub fn energy(&self, strain: &Vector3<f64>) -> f64 {
        strain.dot(&(self.0 * strain))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Voigt4(self.0 * s)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Largest `|T_ijmn - T_mnij|`.
    pub fn major_asymmetry(&self) -> f64 {
        (self.0 - self.0.transpose()).iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Smallest eigenvalue of the symmetric part of the Voigt matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        let sym = (self.0 + self.0.transpose()) * 0.5;
        SymmetricEigen::new(sym).eigenvalues.min()
    }

    pub fn as_rows(&self) -> [[f64; 3]; 3] {
        let m = &self.0;
        [[m[(0, 0)], m[(0, 1)], m[(0, 2)]], [m[(1, 0)], m[(1, 1)], m[(1, 2)]], [m[(2, 0)], m[(2, 1)], m[(2, 2)]]]
    }
}

impl std::ops::Add for Voigt4 {
    type Output = Voigt4;
    fn add(self, rhs: Voigt4) -> Voigt4 {
        Voigt4(self.0 + rhs.0)
    }
}

impl std::ops::Sub for Voigt4 {
    type Output = Voigt4;
    fn sub(self, rhs: Voigt4) -> Voigt4 {
        Voigt4(self.0 - rhs.0)
    }
}

fn slot(i: usize, j: usize) -> usize {
    if i == j {
        i
    } else {
        2
    }
}

/// Checks that a 2x2 coefficient is symmetric positive definite.
pub fn check_spd(a: &Matrix2<f64>, what: &str) -> Result<()> {
    let asym = (a[(0, 1)] - a[(1, 0)]).abs();
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !a.iter().all(|v| v.is_finite()) || asym > 1e-12 * scale.max(1.0) {
        return Err(Error::NonSpdCoefficient(format!("{what} is not symmetric")));
    }
    let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
    if !(a[(0, 0)] > 0.0 && det > 0.0) {
        return Err(Error::NonSpdCoefficient(format!("{what} is not positive definite")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isotropic_components() {
        let b = Lame::new(2.0, 3.0).voigt();
        assert_eq!(b.component(0, 0, 0, 0), 8.0);
        assert_eq!(b.component(0, 0, 1, 1), 2.0);
        assert_eq!(b.component(0, 1, 0, 1), 3.0);
        assert_eq!(b.component(1, 0, 0, 1), 3.0);
        assert_eq!(b.component(0, 1, 1, 1), 0.0);
    }

    #[test]
    fn energy_matches_full_contraction() {
        // B:e:e via explicit index sums
        let (l, m) = (1.3, 0.7);
        let b = Lame::new(l, m).voigt();
        let e = [[0.3, -0.2], [-0.2, 1.1]];
        let d = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
        let mut full = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for h in 0..2 {
                        let c = l * d(i, j) * d(k, h) + m * (d(i, k) * d(j, h) + d(i, h) * d(j, k));
                        full += c * e[i][j] * e[k][h];
                    }
                }
            }
        }
        let eng = Vector3::new(e[0][0], e[1][1], 2.0 * e[0][1]);
        assert!((b.energy(&eng) - full).abs() < 1e-12);
        let s = b.stress(&eng);
        let s12 = 2.0 * m * e[0][1];
        assert!((s[2] - s12).abs() < 1e-12);
        assert!((stress_dot(&s, &eng.component_mul(&Vector3::new(1.0, 1.0, 0.5))) - full).abs() < 1e-12);
    }

    #[test]
    fn sym_dyad_is_engineering_strain() {
        let u = Vector2::new(1.0, 2.0);
        let v = Vector2::new(-3.0, 0.5);
        let s = sym_dyad(u, v);
        assert_eq!(s, Vector3::new(-3.0, 1.0, 0.5 - 6.0));
        assert_eq!(sym_dyad(v, u), s);
    }

    #[test]
    fn spd_check() {
        assert!(check_spd(&Matrix2::new(2.0, 0.5, 0.5, 1.0), "a").is_ok());
        assert!(check_spd(&Matrix2::new(1.0, 2.0, 2.0, 1.0), "a").is_err());
        assert!(check_spd(&Matrix2::new(1.0, 0.1, 0.0, 1.0), "a").is_err());
        assert!(Lame::new(0.0, 1.0).validate("B").is_ok());
        assert!(Lame::new(1.0, 0.0).validate("B").is_err());
        assert!(Lame::new(-1.0, 1.0).validate("B").is_err());
    }
}
