//! Effective tensors assembled from the cell correctors.
//!
//! `a_hom` and `B_hom` are computed twice, once as a corrector energy and
//! once as a flux/stress average against the uncorrected load, and the two
//! must agree at the Galerkin solution. `C_hom` comes in two readings and
//! `R_hom`, `T_hom` in two integration domains; both variants are always kept
//! and the configured one is exposed through the accessors.

use nalgebra::{Matrix2, Matrix3};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cell::{CorrectorSet, PhaseCoefficients};
use crate::error::{Error, Result};
use crate::fem::element::ElementPoint;
use crate::fem::field::FeField;
use crate::mesh::{Phase, PhaseMap};
use crate::tensor::{stress_dot, unit_strain, Voigt4};

/// Gauss order of the cell averages (exact for every integrand used here).
pub const TENSOR_ORDER: usize = 3;
/// Allowed gap between the energy and averaging forms.
pub const FORM_AGREEMENT: f64 = 1e-8;
/// Allowed major asymmetry of symmetric effective tensors.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum CHomMode {
    /// Electrostriction stress tested against the corrected unit strains.
    #[default]
    WeakFormConsistent,
    /// Double contraction of the electrostriction stresses with each other.
    StressProduct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum TensorDomain {
    #[default]
    InclusionOnly,
    FullCell,
}

/// Energy-form value and its averaging-form companion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormPair<T> {
    pub energy: T,
    pub averaging: T,
}

impl FormPair<Matrix2<f64>> {
    pub fn discrepancy(&self) -> f64 {
        (self.energy - self.averaging).abs().max()
    }
}

impl FormPair<Voigt4> {
    pub fn discrepancy(&self) -> f64 {
        (self.energy - self.averaging).max_abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModePair {
    pub weak_form: Voigt4,
    pub stress_product: Voigt4,
}

impl ModePair {
    pub fn get(&self, mode: CHomMode) -> Voigt4 {
        match mode {
            CHomMode::WeakFormConsistent => self.weak_form,
            CHomMode::StressProduct => self.stress_product,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainPair {
    pub inclusion_only: Voigt4,
    pub full_cell: Voigt4,
}

impl DomainPair {
    pub fn get(&self, domain: TensorDomain) -> Voigt4 {
        match domain {
            TensorDomain::InclusionOnly => self.inclusion_only,
            TensorDomain::FullCell => self.full_cell,
        }
    }

    pub fn gap(&self) -> f64 {
        (self.full_cell - self.inclusion_only).max_abs()
    }
}

/// All effective tensors of one cell configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveTensors {
    pub a_hom: FormPair<Matrix2<f64>>,
    pub b_hom: FormPair<Voigt4>,
    pub c_hom: ModePair,
    pub r_hom: DomainPair,
    pub t_hom: DomainPair,
    pub c_mode: CHomMode,
    pub domain: TensorDomain,
}

impl EffectiveTensors {
    /// Assembles every tensor and enforces the symmetry, definiteness and
    /// form-agreement invariants.
    pub fn assemble(
        set: &CorrectorSet,
        coeffs: &PhaseCoefficients,
        c_mode: CHomMode,
        domain: TensorDomain,
    ) -> Result<Self> {
        let t = EffectiveTensors {
            a_hom: assemble_a_hom(set, coeffs)?,
            b_hom: assemble_b_hom(set, coeffs)?,
            c_hom: ModePair {
                weak_form: assemble_c_hom(set, coeffs, CHomMode::WeakFormConsistent),
                stress_product: assemble_c_hom(set, coeffs, CHomMode::StressProduct),
            },
            r_hom: DomainPair {
                inclusion_only: assemble_r_hom(set, coeffs, TensorDomain::InclusionOnly),
                full_cell: assemble_r_hom(set, coeffs, TensorDomain::FullCell),
            },
            t_hom: DomainPair {
                inclusion_only: assemble_t_hom(set, coeffs, TensorDomain::InclusionOnly),
                full_cell: assemble_t_hom(set, coeffs, TensorDomain::FullCell),
            },
            c_mode,
            domain,
        };
        for (name, m) in [("R_hom", t.r()), ("T_hom", t.t())] {
            let asym = m.major_asymmetry();
            if asym > SYMMETRY_TOLERANCE * m.max_abs().max(1.0) {
                return Err(Error::BoundsViolation(format!("{name} major asymmetry {asym:e}")));
            }
        }
        Ok(t)
    }

    /// Tensors given directly, for macro problems with prescribed data.
    pub fn from_constants(a: Matrix2<f64>, b: Voigt4, c: Voigt4, r: Voigt4, t: Voigt4) -> Self {
        EffectiveTensors {
            a_hom: FormPair { energy: a, averaging: a },
            b_hom: FormPair { energy: b, averaging: b },
            c_hom: ModePair { weak_form: c, stress_product: c },
            r_hom: DomainPair { inclusion_only: r, full_cell: r },
            t_hom: DomainPair { inclusion_only: t, full_cell: t },
            c_mode: CHomMode::default(),
            domain: TensorDomain::default(),
        }
    }

    pub fn a(&self) -> Matrix2<f64> {
        self.a_hom.energy
    }

    pub fn b(&self) -> Voigt4 {
        self.b_hom.energy
    }

    pub fn c(&self) -> Voigt4 {
        self.c_hom.get(self.c_mode)
    }

    pub fn r(&self) -> Voigt4 {
        self.r_hom.get(self.domain)
    }

    pub fn t(&self) -> Voigt4 {
        self.t_hom.get(self.domain)
    }

    /// Machine-readable form used by the reports.
    pub fn to_json(&self) -> Value {
        let m2 = |m: &Matrix2<f64>| json!([[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]);
        let v4 = |m: &Voigt4| json!(m.as_rows());
        json!({
            "voigtOrder": ["11", "22", "12"],
            "aHom": {
                "energyForm": m2(&self.a_hom.energy),
                "averagingForm": m2(&self.a_hom.averaging),
                "provenance": "energyForm",
            },
            "bHom": {
                "energyForm": v4(&self.b_hom.energy),
                "averagingForm": v4(&self.b_hom.averaging),
                "provenance": "energyForm",
            },
            "cHom": {
                "weakFormConsistent": v4(&self.c_hom.weak_form),
                "stressProduct": v4(&self.c_hom.stress_product),
                "mode": self.c_mode,
            },
            "rHom": {
                "inclusionOnly": v4(&self.r_hom.inclusion_only),
                "fullCell": v4(&self.r_hom.full_cell),
                "integrationDomain": self.domain,
            },
            "tHom": {
                "inclusionOnly": v4(&self.t_hom.inclusion_only),
                "fullCell": v4(&self.t_hom.full_cell),
                "integrationDomain": self.domain,
            },
        })
    }
}

fn cell_integral(set: &CorrectorSet, mut f: impl FnMut(usize, &ElementPoint) -> f64) -> f64 {
    FeField::zeros(set.mesh().clone(), 1).integrate_with(TENSOR_ORDER, |e, p, _| f(e, p))
}

fn voigt_integral(set: &CorrectorSet, mut f: impl FnMut(usize, usize, usize, &ElementPoint) -> f64) -> Voigt4 {
    let mut m = Matrix3::zeros();
    for a in 0..3 {
        for b in 0..3 {
            m[(a, b)] = cell_integral(set, |e, p| f(a, b, e, p));
        }
    }
    Voigt4(m)
}

/// `(a_hom)_ij = int a g_i . g_j` with `g_i = e^i + grad chi^i`, together
/// with the averaging form `int (a g_i)_j`.
pub fn assemble_a_hom(set: &CorrectorSet, coeffs: &PhaseCoefficients) -> Result<FormPair<Matrix2<f64>>> {
    let mesh = set.mesh().clone();
    let mut energy = Matrix2::zeros();
    let mut averaging = Matrix2::zeros();
    for i in 0..2 {
        for j in 0..2 {
            energy[(i, j)] = cell_integral(set, |e, p| {
                (coeffs.a.get(mesh.phase(e)) * set.corrected_gradient(i, e, p)).dot(&set.corrected_gradient(j, e, p))
            });
            averaging[(i, j)] =
                cell_integral(set, |e, p| (coeffs.a.get(mesh.phase(e)) * set.corrected_gradient(i, e, p))[j]);
        }
    }
    let pair = FormPair { energy, averaging };
    let asym = (energy - energy.transpose()).abs().max();
    if asym > SYMMETRY_TOLERANCE * energy.abs().max().max(1.0) {
        return Err(Error::BoundsViolation(format!("a_hom asymmetry {asym:e}")));
    }
    crate::tensor::check_spd(&energy, "a_hom").map_err(|e| Error::BoundsViolation(e.to_string()))?;
    if pair.discrepancy() > FORM_AGREEMENT {
        return Err(Error::BoundsViolation(format!(
            "a_hom energy and averaging forms differ by {:e}",
            pair.discrepancy()
        )));
    }
    Ok(pair)
}

/// `B_hom = int B : D(y_j e^i - V^{ij}) : D(y_n e^m - V^{mn})`, together with
/// the averaging form against `sym(e^m (x) e^n)`.
pub fn assemble_b_hom(set: &CorrectorSet, coeffs: &PhaseCoefficients) -> Result<FormPair<Voigt4>> {
    let mesh = set.mesh().clone();
    let b = coeffs.b_voigt();
    let energy = voigt_integral(set, |x, y, e, p| {
        b.get(mesh.phase(e)).stress(&set.v_strain(x, e, p)).dot(&set.v_strain(y, e, p))
    });
    let averaging =
        voigt_integral(set, |x, y, e, p| b.get(mesh.phase(e)).stress(&set.v_strain(x, e, p)).dot(&unit_strain(y)));
    let pair = FormPair { energy, averaging };
    let asym = energy.major_asymmetry();
    if asym > SYMMETRY_TOLERANCE * energy.max_abs().max(1.0) {
        return Err(Error::BoundsViolation(format!("B_hom major asymmetry {asym:e}")));
    }
    if energy.min_eigenvalue() <= 0.0 {
        return Err(Error::BoundsViolation("B_hom is not positive definite".into()));
    }
    if pair.discrepancy() > FORM_AGREEMENT {
        return Err(Error::BoundsViolation(format!(
            "B_hom energy and averaging forms differ by {:e}",
            pair.discrepancy()
        )));
    }
    Ok(pair)
}

/// Effective electrostriction tensor in either reading. Row `a` holds the
/// response to the field dyad of slot `a`, so the macroscopic stress is
/// `C_hom^T g` for the engineering dyad `g`.
pub fn assemble_c_hom(set: &CorrectorSet, coeffs: &PhaseCoefficients, mode: CHomMode) -> Voigt4 {
    match mode {
        CHomMode::WeakFormConsistent => {
            voigt_integral(set, |x, y, e, p| set.electro_stress(x, e, p, coeffs).dot(&set.v_strain(y, e, p)))
        }
        CHomMode::StressProduct => voigt_integral(set, |x, y, e, p| {
            stress_dot(&set.electro_stress(x, e, p, coeffs), &set.electro_stress(y, e, p, coeffs))
        }),
    }
}

fn r_weight(set: &CorrectorSet, e: usize, domain: TensorDomain) -> bool {
    domain == TensorDomain::FullCell || set.mesh().phase(e) == Phase::Inclusion
}

/// `R_hom = int R : D(y_j e^i - W^{ij}) : D(y_n e^m - W^{mn})` over the
/// chosen domain.
pub fn assemble_r_hom(set: &CorrectorSet, coeffs: &PhaseCoefficients, domain: TensorDomain) -> Voigt4 {
    let r = coeffs.r.voigt();
    voigt_integral(set, |x, y, e, p| {
        if r_weight(set, e, domain) {
            r.stress(&set.w_strain(x, e, p)).dot(&set.w_strain(y, e, p))
        } else {
            0.0
        }
    })
}

/// `T_hom = int R : D(y_j e^i - V^{ij}) : D(y_n e^m - V^{mn})` over the
/// chosen domain.
pub fn assemble_t_hom(set: &CorrectorSet, coeffs: &PhaseCoefficients, domain: TensorDomain) -> Voigt4 {
    let r = coeffs.r.voigt();
    voigt_integral(set, |x, y, e, p| {
        if r_weight(set, e, domain) {
            r.stress(&set.v_strain(x, e, p)).dot(&set.v_strain(y, e, p))
        } else {
            0.0
        }
    })
}

/// Arithmetic (Voigt) and harmonic (Reuss) bound of one scalar quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bounds {
    pub reuss: f64,
    pub voigt: f64,
}

impl Bounds {
    pub fn contains(&self, x: f64) -> bool {
        self.reuss <= x && x <= self.voigt
    }

    pub fn contains_strictly(&self, x: f64) -> bool {
        self.reuss < x && x < self.voigt
    }
}

/// Bounds on the diagonal of `a_hom` and on the Voigt diagonal of `B_hom`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundSet {
    pub a: [Bounds; 2],
    pub b: [Bounds; 3],
}

impl BoundSet {
    pub fn check(&self, t: &EffectiveTensors) -> bool {
        let tol = 1e-12;
        let a = t.a();
        let b = t.b().0;
        (0..2).all(|i| a[(i, i)] >= self.a[i].reuss - tol && a[(i, i)] <= self.a[i].voigt + tol)
            && (0..3).all(|k| b[(k, k)] >= self.b[k].reuss - tol && b[(k, k)] <= self.b[k].voigt + tol)
    }
}

/// Voigt and Reuss averages for the inclusion volume fraction `fraction`.
///
/// The Reuss bound is the inverse of the averaged inverse (compliance), and
/// the entries compared are the diagonal ones of the resulting matrices.
pub fn voigt_reuss_bounds(coeffs: &PhaseCoefficients, fraction: f64) -> Result<BoundSet> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::validation("fraction", "must lie in [0, 1]"));
    }
    let (ts, tf) = (fraction, 1.0 - fraction);
    let mix2 = |m: &PhaseMap<Matrix2<f64>>| -> Result<(Matrix2<f64>, Matrix2<f64>)> {
        let inv = |x: &Matrix2<f64>| x.try_inverse().ok_or_else(|| Error::NonSpdCoefficient("singular a".into()));
        let voigt = m.matrix * tf + m.inclusion * ts;
        let reuss = inv(&(inv(&m.matrix)? * tf + inv(&m.inclusion)? * ts))?;
        Ok((reuss, voigt))
    };
    let (ar, av) = mix2(&coeffs.a)?;
    let b = coeffs.b_voigt();
    let inv3 = |x: &Matrix3<f64>| x.try_inverse().ok_or_else(|| Error::NonEllipticTensor("singular B".into()));
    let bv = b.matrix.0 * tf + b.inclusion.0 * ts;
    let br = inv3(&(inv3(&b.matrix.0)? * tf + inv3(&b.inclusion.0)? * ts))?;
    Ok(BoundSet {
        a: [0, 1].map(|i| Bounds { reuss: ar[(i, i)], voigt: av[(i, i)] }),
        b: [0, 1, 2].map(|k| Bounds { reuss: br[(k, k)], voigt: bv[(k, k)] }),
    })
}
