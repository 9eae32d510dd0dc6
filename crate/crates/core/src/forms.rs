//! Quadratic, alternating-bilinear, symmetric-bilinear and
//! hermitian-sesquilinear forms, their standard models on V(N,q), isotropy
//! tests, polarization and perp.
//!
//! Quadratic forms are stored as diagonal square coefficients plus a strictly
//! upper-triangular cross-term gram, because the x -> x^2 coefficients are not
//! recoverable from the bilinear part in characteristic 2.

use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::gf::Field;
use crate::linalg::{Matrix, Subspace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormKind {
    Quadratic,
    AlternatingBilinear,
    SymmetricBilinear,
    Hermitian,
}

/// The six classical polar space families of rank n.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PolarFamily {
    /// Q+(2n-1,q) on V(2n,q), parameters (q,1)
    HyperbolicQ,
    /// Q(2n,q) on V(2n+1,q), parameters (q,q)
    ParabolicQ,
    /// Q-(2n+1,q) on V(2n+2,q), parameters (q,q^2)
    EllipticQ,
    /// W(2n-1,q) on V(2n,q), parameters (q,q)
    Symplectic,
    /// H(2n-1,q^2) on V(2n,q^2), parameters (q^2,q)
    HermitianOdd,
    /// H(2n,q^2) on V(2n+1,q^2), parameters (q^2,q^3)
    HermitianEven,
}

impl PolarFamily {
    pub const ALL: [PolarFamily; 6] = [
        PolarFamily::HyperbolicQ,
        PolarFamily::ParabolicQ,
        PolarFamily::EllipticQ,
        PolarFamily::Symplectic,
        PolarFamily::HermitianOdd,
        PolarFamily::HermitianEven,
    ];

    /// Ambient vector-space dimension for rank n.
    pub fn ambient_dim(&self, n: u32) -> usize {
        match self {
            PolarFamily::HyperbolicQ | PolarFamily::Symplectic | PolarFamily::HermitianOdd => {
                2 * n as usize
            }
            PolarFamily::ParabolicQ | PolarFamily::HermitianEven => 2 * n as usize + 1,
            PolarFamily::EllipticQ => 2 * n as usize + 2,
        }
    }

    pub fn is_hermitian(&self) -> bool {
        matches!(self, PolarFamily::HermitianOdd | PolarFamily::HermitianEven)
    }

    /// Short tag used by the CLI and serialized tables.
    pub fn tag(&self) -> &'static str {
        match self {
            PolarFamily::HyperbolicQ => "Q+",
            PolarFamily::ParabolicQ => "Q",
            PolarFamily::EllipticQ => "Q-",
            PolarFamily::Symplectic => "W",
            PolarFamily::HermitianOdd => "Hodd",
            PolarFamily::HermitianEven => "Heven",
        }
    }

    /// The exponent e with t = q^e, as a display string ("1/2" and "3/2" for
    /// the hermitian rows).
    pub fn e_display(&self) -> &'static str {
        match self {
            PolarFamily::HyperbolicQ => "0",
            PolarFamily::ParabolicQ => "1",
            PolarFamily::EllipticQ => "2",
            PolarFamily::Symplectic => "1",
            PolarFamily::HermitianOdd => "1/2",
            PolarFamily::HermitianEven => "3/2",
        }
    }

    /// Classical notation such as "W(3,2)" or "H(4,4)" for rank n over base q.
    pub fn notation(&self, n: u32, base_q: u64) -> String {
        match self {
            PolarFamily::HyperbolicQ => format!("Q+({},{})", 2 * n - 1, base_q),
            PolarFamily::ParabolicQ => format!("Q({},{})", 2 * n, base_q),
            PolarFamily::EllipticQ => format!("Q-({},{})", 2 * n + 1, base_q),
            PolarFamily::Symplectic => format!("W({},{})", 2 * n - 1, base_q),
            PolarFamily::HermitianOdd => format!("H({},{})", 2 * n - 1, base_q * base_q),
            PolarFamily::HermitianEven => format!("H({},{})", 2 * n, base_q * base_q),
        }
    }
}

impl fmt::Display for PolarFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl std::str::FromStr for PolarFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<PolarFamily> {
        match s.to_ascii_lowercase().as_str() {
            "q+" | "qplus" | "hyperbolic" => Ok(PolarFamily::HyperbolicQ),
            "q" | "parabolic" => Ok(PolarFamily::ParabolicQ),
            "q-" | "qminus" | "elliptic" => Ok(PolarFamily::EllipticQ),
            "w" | "symplectic" => Ok(PolarFamily::Symplectic),
            "hodd" | "hermitian-odd" => Ok(PolarFamily::HermitianOdd),
            "heven" | "hermitian-even" => Ok(PolarFamily::HermitianEven),
            other => Err(Error::InvalidInput(format!(
                "unknown polar family '{other}' (expected Q+, Q, Q-, W, Hodd or Heven)"
            ))),
        }
    }
}

/// A form on V(ambient_dim, q).
///
/// For bilinear and sesquilinear kinds the gram matrix is the full matrix of
/// the form; for the quadratic kind the gram holds the strictly upper cross
/// terms and `quad_coeffs` the diagonal square coefficients.
#[derive(Clone, PartialEq, Eq)]
pub struct FormSpec {
    kind: FormKind,
    field: Field,
    ambient_dim: usize,
    gram: Matrix,
    quad_coeffs: Vec<u32>,
    conj_exponent: u32,
}

impl fmt::Debug for FormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "FormSpec {:?} on V({},{})",
            self.kind,
            self.ambient_dim,
            self.field.order()
        )
    }
}

impl FormSpec {
    pub fn quadratic(field: Field, quad_coeffs: Vec<u32>, gram: Matrix) -> Result<FormSpec> {
        let n = quad_coeffs.len();
        if gram.rows() != n || gram.cols() != n {
            return Err(Error::DimensionMismatch("gram must be N x N".into()));
        }
        if gram.field() != &field {
            return Err(Error::MixedFields);
        }
        for i in 0..n {
            for j in 0..=i {
                if gram.get(i, j) != 0 {
                    return Err(Error::InvalidForm(
                        "quadratic cross terms must be strictly upper triangular".into(),
                    ));
                }
            }
        }
        if quad_coeffs.iter().any(|&c| c >= field.order()) {
            return Err(Error::InvalidForm("quadratic coefficient out of range".into()));
        }
        Ok(FormSpec {
            kind: FormKind::Quadratic,
            field,
            ambient_dim: n,
            gram,
            quad_coeffs,
            conj_exponent: 0,
        })
    }

    pub fn alternating(field: Field, gram: Matrix) -> Result<FormSpec> {
        let form = Self::alternating_unchecked(field, gram)?;
        let n = form.ambient_dim;
        for i in 0..n {
            if form.gram.get(i, i) != 0 {
                return Err(Error::InvalidForm("alternating gram must have zero diagonal".into()));
            }
            for j in 0..n {
                if form.gram.get(i, j) != form.field.neg(form.gram.get(j, i)) {
                    return Err(Error::InvalidForm("alternating gram must be skew".into()));
                }
            }
        }
        if !form.gram.is_invertible() {
            return Err(Error::InvalidForm("alternating gram must be nondegenerate".into()));
        }
        Ok(form)
    }

    /// Skips the skew/nondegeneracy validation; used by `polarize`, whose
    /// output in the even-characteristic parabolic case has a radical.
    fn alternating_unchecked(field: Field, gram: Matrix) -> Result<FormSpec> {
        if gram.rows() != gram.cols() {
            return Err(Error::DimensionMismatch("gram must be square".into()));
        }
        if gram.field() != &field {
            return Err(Error::MixedFields);
        }
        Ok(FormSpec {
            kind: FormKind::AlternatingBilinear,
            ambient_dim: gram.rows(),
            field,
            gram,
            quad_coeffs: Vec::new(),
            conj_exponent: 0,
        })
    }

    pub fn symmetric(field: Field, gram: Matrix) -> Result<FormSpec> {
        let form = Self::symmetric_unchecked(field, gram)?;
        if form.gram != form.gram.transpose() {
            return Err(Error::InvalidForm("symmetric gram must equal its transpose".into()));
        }
        if !form.gram.is_invertible() {
            return Err(Error::InvalidForm("symmetric gram must be nondegenerate".into()));
        }
        Ok(form)
    }

    fn symmetric_unchecked(field: Field, gram: Matrix) -> Result<FormSpec> {
        if gram.rows() != gram.cols() {
            return Err(Error::DimensionMismatch("gram must be square".into()));
        }
        if gram.field() != &field {
            return Err(Error::MixedFields);
        }
        Ok(FormSpec {
            kind: FormKind::SymmetricBilinear,
            ambient_dim: gram.rows(),
            field,
            gram,
            quad_coeffs: Vec::new(),
            conj_exponent: 0,
        })
    }

    pub fn hermitian(field: Field, gram: Matrix) -> Result<FormSpec> {
        if field.k() % 2 != 0 {
            return Err(Error::IncompatibleField(
                "hermitian forms need an even extension degree".into(),
            ));
        }
        if gram.rows() != gram.cols() {
            return Err(Error::DimensionMismatch("gram must be square".into()));
        }
        if gram.field() != &field {
            return Err(Error::MixedFields);
        }
        let sigma = field.k() / 2;
        if gram.conjugate(sigma as i64).transpose() != gram {
            return Err(Error::InvalidForm("hermitian gram must be conjugate-symmetric".into()));
        }
        if !gram.is_invertible() {
            return Err(Error::InvalidForm("hermitian gram must be nondegenerate".into()));
        }
        Ok(FormSpec {
            kind: FormKind::Hermitian,
            ambient_dim: gram.rows(),
            field,
            gram,
            quad_coeffs: Vec::new(),
            conj_exponent: sigma,
        })
    }

    /// The nondegenerate dot product sum x_i y_i, the default reference form
    /// for matrix adjoints.
    pub fn dot_product(field: Field, n: usize) -> FormSpec {
        let gram = Matrix::identity(field.clone(), n);
        FormSpec::symmetric(field, gram).expect("identity gram is symmetric and invertible")
    }

    /// The frozen standard model of the given family at rank n over `field`
    /// (the ambient field; hermitian rows take the field of order q^2).
    pub fn standard(family: PolarFamily, n: u32, field: Field) -> Result<FormSpec> {
        if n < 1 {
            return Err(Error::InvalidInput("rank must be >= 1".into()));
        }
        let dim = family.ambient_dim(n);
        let nn = n as usize;
        match family {
            PolarFamily::HyperbolicQ => {
                let mut gram = Matrix::zero(field.clone(), dim, dim);
                for i in 0..nn {
                    gram.set(2 * i, 2 * i + 1, 1);
                }
                FormSpec::quadratic(field, vec![0; dim], gram)
            }
            PolarFamily::ParabolicQ => {
                let mut gram = Matrix::zero(field.clone(), dim, dim);
                let mut quad = vec![0; dim];
                quad[0] = 1;
                for i in 0..nn {
                    gram.set(2 * i + 1, 2 * i + 2, 1);
                }
                FormSpec::quadratic(field, quad, gram)
            }
            PolarFamily::EllipticQ => {
                // f(x0,x1) is the norm form of the degree-2 extension defined
                // by the smallest irreducible quadratic y^2 + a y + b:
                // f = x0^2 - a x0 x1 + b x1^2, anisotropic by irreducibility.
                let (b, a) = smallest_irreducible_quadratic(&field);
                let mut gram = Matrix::zero(field.clone(), dim, dim);
                let mut quad = vec![0; dim];
                quad[0] = 1;
                quad[1] = b;
                gram.set(0, 1, field.neg(a));
                for i in 1..=nn {
                    gram.set(2 * i, 2 * i + 1, 1);
                }
                FormSpec::quadratic(field, quad, gram)
            }
            PolarFamily::Symplectic => {
                let mut gram = Matrix::zero(field.clone(), dim, dim);
                for i in 0..nn {
                    gram.set(2 * i, 2 * i + 1, 1);
                    gram.set(2 * i + 1, 2 * i, field.neg(1));
                }
                FormSpec::alternating(field, gram)
            }
            PolarFamily::HermitianOdd | PolarFamily::HermitianEven => {
                let gram = Matrix::identity(field.clone(), dim);
                FormSpec::hermitian(field, gram)
            }
        }
    }

    pub fn kind(&self) -> FormKind {
        self.kind
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn gram(&self) -> &Matrix {
        &self.gram
    }

    pub fn quad_coeffs(&self) -> &[u32] {
        &self.quad_coeffs
    }

    pub fn conj_exponent(&self) -> u32 {
        self.conj_exponent
    }

    fn check_vector(&self, v: &[u32]) -> Result<()> {
        if v.len() != self.ambient_dim {
            return Err(Error::DimensionMismatch(format!(
                "vector length {} vs ambient {}",
                v.len(),
                self.ambient_dim
            )));
        }
        Ok(())
    }

    /// Q(v) = sum quad[i] v_i^2 + sum_{i<j} gram[i][j] v_i v_j.
    pub fn eval_quadratic(&self, v: &[u32]) -> Result<u32> {
        if self.kind != FormKind::Quadratic {
            return Err(Error::KindMismatch("eval_quadratic requires a quadratic form".into()));
        }
        self.check_vector(v)?;
        let f = &self.field;
        let mut acc = 0u32;
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0 {
                continue;
            }
            acc = f.add(acc, f.mul(self.quad_coeffs[i], f.mul(vi, vi)));
            for (j, &vj) in v.iter().enumerate().skip(i + 1) {
                if vj == 0 {
                    continue;
                }
                let g = self.gram.get(i, j);
                if g != 0 {
                    acc = f.add(acc, f.mul(g, f.mul(vi, vj)));
                }
            }
        }
        Ok(acc)
    }

    /// B(u,v) = u^T gram conj(v); conjugation acts on the second argument for
    /// hermitian forms and is the identity otherwise.
    pub fn eval_bilinear(&self, u: &[u32], v: &[u32]) -> Result<u32> {
        if self.kind == FormKind::Quadratic {
            return Err(Error::KindMismatch(
                "eval_bilinear requires a bilinear or sesquilinear form; polarize first".into(),
            ));
        }
        self.check_vector(u)?;
        self.check_vector(v)?;
        let f = &self.field;
        let sigma = self.conj_exponent as i64;
        let mut acc = 0u32;
        for (i, &ui) in u.iter().enumerate() {
            if ui == 0 {
                continue;
            }
            for (j, &vj) in v.iter().enumerate() {
                if vj == 0 {
                    continue;
                }
                let g = self.gram.get(i, j);
                if g != 0 {
                    let vj = if sigma == 0 { vj } else { f.frobenius(vj, sigma) };
                    acc = f.add(acc, f.mul(ui, f.mul(g, vj)));
                }
            }
        }
        Ok(acc)
    }

    /// The polarization B(u,v) = Q(u+v) - Q(u) - Q(v) of a quadratic form,
    /// evaluated pointwise.
    pub(crate) fn polar_eval(&self, u: &[u32], v: &[u32]) -> Result<u32> {
        let f = self.field.clone();
        let sum: Vec<u32> = u.iter().zip(v).map(|(&a, &b)| f.add(a, b)).collect();
        let q_sum = self.eval_quadratic(&sum)?;
        let q_u = self.eval_quadratic(u)?;
        let q_v = self.eval_quadratic(v)?;
        Ok(f.sub(f.sub(q_sum, q_u), q_v))
    }

    /// The associated bilinear form of a quadratic form: alternating in
    /// characteristic 2, symmetric (possibly with nonzero diagonal) in odd
    /// characteristic. The result may be degenerate (even-characteristic
    /// parabolic), in which case `perp` rejects it.
    pub fn polarize(&self) -> Result<FormSpec> {
        if self.kind != FormKind::Quadratic {
            return Err(Error::KindMismatch("polarize requires a quadratic form".into()));
        }
        let f = &self.field;
        let n = self.ambient_dim;
        let mut gram = Matrix::zero(f.clone(), n, n);
        for i in 0..n {
            // B(e_i, e_i) = Q(2 e_i) - 2 Q(e_i) = 2 Q(e_i)
            let two = f.add(1, 1);
            gram.set(i, i, f.mul(two, self.quad_coeffs[i]));
            for j in (i + 1)..n {
                let c = self.gram.get(i, j);
                gram.set(i, j, c);
                gram.set(j, i, c);
            }
        }
        if f.characteristic_two() {
            FormSpec::alternating_unchecked(f.clone(), gram)
        } else {
            FormSpec::symmetric_unchecked(f.clone(), gram)
        }
    }

    /// The gram of the reflexive companion used for perp: the form itself for
    /// bilinear kinds, the polarization for quadratics.
    fn companion_gram(&self) -> Result<Matrix> {
        match self.kind {
            FormKind::Quadratic => Ok(self.polarize()?.gram),
            _ => Ok(self.gram.clone()),
        }
    }

    /// Whether the reflexive companion is nondegenerate.
    pub fn polarity_nondegenerate(&self) -> bool {
        self.companion_gram().map_or(false, |g| g.is_invertible())
    }

    /// True iff the form vanishes identically on S: for a quadratic form,
    /// Q(b_i) = 0 on every basis vector and the polarization vanishes on all
    /// basis pairs; for the other kinds the (sesqui)linear form vanishes on
    /// all basis pairs.
    pub fn is_totally_isotropic(&self, s: &Subspace) -> Result<bool> {
        if s.ambient_dim() != self.ambient_dim {
            return Err(Error::DimensionMismatch(format!(
                "subspace ambient {} vs form ambient {}",
                s.ambient_dim(),
                self.ambient_dim
            )));
        }
        if s.field() != &self.field {
            return Err(Error::MixedFields);
        }
        let rows: Vec<&[u32]> = s.basis_rows().collect();
        match self.kind {
            FormKind::Quadratic => {
                for (i, u) in rows.iter().enumerate() {
                    if self.eval_quadratic(u)? != 0 {
                        return Ok(false);
                    }
                    for v in rows.iter().skip(i + 1) {
                        if self.polar_eval(u, v)? != 0 {
                            return Ok(false);
                        }
                    }
                }
                Ok(true)
            }
            FormKind::AlternatingBilinear => {
                for (i, u) in rows.iter().enumerate() {
                    for v in rows.iter().skip(i + 1) {
                        if self.eval_bilinear(u, v)? != 0 {
                            return Ok(false);
                        }
                    }
                }
                Ok(true)
            }
            FormKind::SymmetricBilinear | FormKind::Hermitian => {
                for (i, u) in rows.iter().enumerate() {
                    for v in rows.iter().skip(i) {
                        if self.eval_bilinear(u, v)? != 0 {
                            return Ok(false);
                        }
                    }
                }
                Ok(true)
            }
        }
    }

    /// perp(S) = {v : B(v,s) = 0 for all s in S} for the nondegenerate
    /// reflexive companion B of this form.
    pub fn perp(&self, s: &Subspace) -> Result<Subspace> {
        if s.ambient_dim() != self.ambient_dim {
            return Err(Error::DimensionMismatch(format!(
                "subspace ambient {} vs form ambient {}",
                s.ambient_dim(),
                self.ambient_dim
            )));
        }
        if s.field() != &self.field {
            return Err(Error::MixedFields);
        }
        let gram = self.companion_gram()?;
        if !gram.is_invertible() {
            return Err(Error::DegeneratePolarity);
        }
        // B(v,s) = v . G . conj(s)^T, so the constraint matrix has rows
        // conj(s) G^T and perp(S) is its right kernel.
        let constraints = s
            .basis()
            .conjugate(self.conj_exponent as i64)
            .mat_mul(&gram.transpose())?;
        Ok(constraints.kernel())
    }
}

/// Smallest monic irreducible quadratic y^2 + a y + b over the field, in
/// packed (b + q*a) scan order; returned as (b, a). Degree-2 irreducibility
/// is equivalent to having no root.
fn smallest_irreducible_quadratic(field: &Field) -> (u32, u32) {
    let q = field.order();
    for packed in 0..(q as u64 * q as u64) {
        let b = (packed % q as u64) as u32;
        let a = (packed / q as u64) as u32;
        let has_root = (0..q).any(|r| {
            let val = field.add(field.add(field.mul(r, r), field.mul(a, r)), b);
            val == 0
        });
        if !has_root {
            return (b, a);
        }
    }
    unreachable!("irreducible quadratics exist over every finite field")
}

// External interface:
// {"kind": str, "field": FieldRef, "ambient_dim": N, "gram": [[...]],
//  "quad_coeffs": [...], "conj_exponent": int}
#[derive(Serialize, Deserialize)]
struct FormRepr {
    kind: FormKind,
    field: Field,
    ambient_dim: usize,
    gram: Vec<Vec<u32>>,
    quad_coeffs: Vec<u32>,
    conj_exponent: u32,
}

impl Serialize for FormSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FormRepr {
            kind: self.kind,
            field: self.field.clone(),
            ambient_dim: self.ambient_dim,
            gram: (0..self.gram.rows()).map(|r| self.gram.row(r).to_vec()).collect(),
            quad_coeffs: self.quad_coeffs.clone(),
            conj_exponent: self.conj_exponent,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FormSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<FormSpec, D::Error> {
        let r = FormRepr::deserialize(d)?;
        let gram = Matrix::from_rows(r.field.clone(), r.gram).map_err(D::Error::custom)?;
        if gram.rows() != r.ambient_dim {
            return Err(D::Error::custom("gram does not match ambient_dim"));
        }
        let form = match r.kind {
            FormKind::Quadratic => FormSpec::quadratic(r.field, r.quad_coeffs, gram),
            FormKind::AlternatingBilinear => FormSpec::alternating(r.field, gram),
            FormKind::SymmetricBilinear => FormSpec::symmetric(r.field, gram),
            FormKind::Hermitian => FormSpec::hermitian(r.field, gram),
        }
        .map_err(D::Error::custom)?;
        if form.conj_exponent != r.conj_exponent {
            return Err(D::Error::custom("conj_exponent inconsistent with kind and field"));
        }
        Ok(form)
    }
}
