//! The classical polar spaces of rank n with integer parameters (s,t),
//! enumeration of their generators (maximal totally isotropic subspaces), and
//! dual polar graph distance.
//!
//! Parameters are stored as the exact integer pair (s,t) rather than (q,e):
//! the hermitian rows have fractional e, and every downstream formula only
//! needs t = q^e as an integer.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{FormKind, FormSpec, PolarFamily};
use crate::gf::{prime_power, Field};
use crate::linalg::Subspace;

/// Default cap on the number of generators an enumeration will materialize.
pub const DEFAULT_GENERATOR_CAP: u128 = 1_000_000;

/// A classical polar space of rank n, with its frozen standard form.
#[derive(Clone, Debug)]
pub struct PolarSpace {
    family: PolarFamily,
    rank: u32,
    base_q: u64,
    s: u64,
    t: u64,
    field: Field,
    form: FormSpec,
    ambient_dim: usize,
}

/// Compact serializable description of a polar space instance.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct SpaceDescriptor {
    pub family: String,
    pub rank: u32,
    pub base_q: u64,
    pub s: u64,
    pub t: u64,
    pub ambient_dim: usize,
    pub notation: String,
}

/// Assembles the polar space of the given family and rank over base order q
/// (for hermitian families the ambient field has order q^2).
pub fn polar_space(family: PolarFamily, n: u32, base_q: u64) -> Result<PolarSpace> {
    if n < 1 {
        return Err(Error::InvalidInput("rank must be >= 1".into()));
    }
    prime_power(base_q)?;
    let (field_order, s, t) = match family {
        PolarFamily::HyperbolicQ => (base_q, base_q, 1),
        PolarFamily::ParabolicQ => (base_q, base_q, base_q),
        PolarFamily::EllipticQ => (base_q, base_q, base_q * base_q),
        PolarFamily::Symplectic => (base_q, base_q, base_q),
        PolarFamily::HermitianOdd => (base_q * base_q, base_q * base_q, base_q),
        PolarFamily::HermitianEven => (base_q * base_q, base_q * base_q, base_q * base_q * base_q),
    };
    let field = Field::of_order(field_order)?;
    let form = FormSpec::standard(family, n, field.clone())?;
    Ok(PolarSpace {
        family,
        rank: n,
        base_q,
        s,
        t,
        ambient_dim: form.ambient_dim(),
        field,
        form,
    })
}

impl PolarSpace {
    pub fn family(&self) -> PolarFamily {
        self.family
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn base_q(&self) -> u64 {
        self.base_q
    }

    pub fn s(&self) -> u64 {
        self.s
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn form(&self) -> &FormSpec {
        &self.form
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn notation(&self) -> String {
        self.family.notation(self.rank, self.base_q)
    }

    pub fn descriptor(&self) -> SpaceDescriptor {
        SpaceDescriptor {
            family: self.family.tag().to_string(),
            rank: self.rank,
            base_q: self.base_q,
            s: self.s,
            t: self.t,
            ambient_dim: self.ambient_dim,
            notation: self.notation(),
        }
    }

    /// Classical generator count: prod_{i=0}^{n-1} (t s^i + 1).
    pub fn generator_count(&self) -> u128 {
        let mut acc: u128 = 1;
        let mut power: u128 = 1;
        for _ in 0..self.rank {
            acc *= self.t as u128 * power + 1;
            power *= self.s as u128;
        }
        acc
    }

    fn vector_is_isotropic(&self, v: &[u32]) -> bool {
        match self.form.kind() {
            FormKind::Quadratic => self.form.eval_quadratic(v).expect("ambient vector") == 0,
            FormKind::Hermitian => self.form.eval_bilinear(v, v).expect("ambient vector") == 0,
            // alternating forms vanish on the diagonal
            _ => true,
        }
    }

    /// Vectors orthogonal to all of U under the reflexive companion of the
    /// space's form (the polarization for quadratic kinds; a radical, if any,
    /// stays inside the result, which is what extension needs).
    fn orthogonal_constraint_space(&self, u: &Subspace) -> Subspace {
        if u.dim() == 0 {
            return Subspace::full(self.field.clone(), self.ambient_dim);
        }
        let gram = match self.form.kind() {
            FormKind::Quadratic => self.form.polarize().expect("quadratic").gram().clone(),
            _ => self.form.gram().clone(),
        };
        let constraints = u
            .basis()
            .conjugate(self.form.conj_exponent() as i64)
            .mat_mul(&gram.transpose())
            .expect("dimensions agree");
        constraints.kernel()
    }

    /// All totally isotropic subspaces of the given dimension, canonically
    /// sorted, by level-by-level extension with deduplication.
    pub fn enumerate_totally_isotropic(&self, dim: u32) -> Result<Vec<Subspace>> {
        self.enumerate_totally_isotropic_capped(dim, DEFAULT_GENERATOR_CAP)
    }

    pub fn enumerate_totally_isotropic_capped(
        &self,
        dim: u32,
        cap: u128,
    ) -> Result<Vec<Subspace>> {
        if dim > self.rank {
            return Err(Error::InvalidInput(format!(
                "no totally isotropic subspace of dimension {dim} exists at rank {}",
                self.rank
            )));
        }
        if dim == self.rank && self.generator_count() > cap {
            return Err(Error::EnumerationTooLarge {
                size: self.generator_count(),
                cap,
            });
        }
        let mut level: Vec<Subspace> = vec![Subspace::zero(self.field.clone(), self.ambient_dim)];
        for _ in 0..dim {
            let mut next: BTreeSet<Subspace> = BTreeSet::new();
            for u in &level {
                let constraint = self.orthogonal_constraint_space(u);
                for v in constraint.vectors()? {
                    if v.iter().all(|&x| x == 0)
                        || !self.vector_is_isotropic(&v)
                        || u.contains(&v)?
                    {
                        continue;
                    }
                    let mut rows: Vec<Vec<u32>> = u.basis_rows().map(|r| r.to_vec()).collect();
                    rows.push(v);
                    next.insert(Subspace::span(self.field.clone(), self.ambient_dim, &rows)?);
                    if next.len() as u128 > cap {
                        return Err(Error::EnumerationTooLarge {
                            size: next.len() as u128,
                            cap,
                        });
                    }
                }
            }
            level = next.into_iter().collect();
        }
        Ok(level)
    }

    /// Exact, duplicate-free, canonically sorted enumeration of the
    /// generators (rank-dimensional totally isotropic subspaces).
    pub fn enumerate_generators(&self) -> Result<GeneratorSet> {
        self.enumerate_generators_capped(DEFAULT_GENERATOR_CAP)
    }

    pub fn enumerate_generators_capped(&self, cap: u128) -> Result<GeneratorSet> {
        let generators = self.enumerate_totally_isotropic_capped(self.rank, cap)?;
        debug_assert_eq!(generators.len() as u128, self.generator_count());
        Ok(GeneratorSet {
            space: self.clone(),
            generators,
        })
    }

    /// Whether S is a generator of this space.
    pub fn is_generator(&self, s: &Subspace) -> bool {
        s.field() == &self.field
            && s.ambient_dim() == self.ambient_dim
            && s.dim() == self.rank as usize
            && self.form.is_totally_isotropic(s).unwrap_or(false)
    }

    /// Dual polar graph distance d(S,T) = rank - dim(S cap T).
    pub fn dual_polar_distance(&self, s: &Subspace, t: &Subspace) -> Result<u32> {
        if !self.is_generator(s) || !self.is_generator(t) {
            return Err(Error::NotAGenerator);
        }
        let meet = s.intersect(t)?;
        Ok(self.rank - meet.dim() as u32)
    }
}

/// The full generator list of a polar space, canonically sorted.
#[derive(Clone, Debug)]
pub struct GeneratorSet {
    space: PolarSpace,
    generators: Vec<Subspace>,
}

impl GeneratorSet {
    pub fn space(&self) -> &PolarSpace {
        &self.space
    }

    pub fn generators(&self) -> &[Subspace] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }
}
