//! Free modules of finite rank over the truncated ring with semilinear
//! `phi`, `gamma`, `tau`, and their flattening to `Z/p^N`-linear matrices.
//!
//! A vector is a column of coordinates `v`; an operator with matrix `P` over a
//! ring endomorphism `s` acts by `v -> P s(v)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::coeffs::{binom_padic_row, PadicScalar, PrimeContext};
use crate::error::{Error, Result};
use crate::gamma_action::{default_tau_cap, delta_op, tau_power, GroupElement};
use crate::homology::linalg::ModMatrix;
use crate::phi_psi::{phi_generators, psi, psi_window};
use crate::series::{SeriesContext, TruncatedSeries};

/// Square matrix over `R`, row-major.
pub type SeriesMatrix = Vec<Vec<TruncatedSeries>>;

pub fn identity_matrix(sctx: SeriesContext, r: usize) -> SeriesMatrix {
    (0..r)
        .map(|i| (0..r).map(|j| TruncatedSeries::constant(sctx, (i == j) as i128)).collect())
        .collect()
}

pub fn mat_vec(m: &SeriesMatrix, v: &[TruncatedSeries]) -> Vec<TruncatedSeries> {
    m.iter()
        .map(|row| {
            row.iter().zip(v).fold(TruncatedSeries::zero(v[0].sctx()), |acc, (a, b)| &acc + &(a * b))
        })
        .collect()
}

pub fn mat_mul(a: &SeriesMatrix, b: &SeriesMatrix) -> SeriesMatrix {
    let r = b.len();
    let sctx = a[0][0].sctx();
    a.iter()
        .map(|row| {
            (0..r)
                .map(|j| {
                    row.iter()
                        .enumerate()
                        .fold(TruncatedSeries::zero(sctx), |acc, (k, x)| &acc + &(x * &b[k][j]))
                })
                .collect()
        })
        .collect()
}

pub fn mat_map(m: &SeriesMatrix, f: impl Fn(&TruncatedSeries) -> Result<TruncatedSeries>) -> Result<SeriesMatrix> {
    m.iter().map(|row| row.iter().map(&f).collect()).collect()
}

/// Inverse over the local ring `R` by Gauss-Jordan with unit pivots.
pub fn mat_inverse(m: &SeriesMatrix) -> Result<SeriesMatrix> {
    let r = m.len();
    let sctx = m[0][0].sctx();
    let ctx = sctx.ctx();
    let mut a = m.clone();
    let mut inv = identity_matrix(sctx, r);
    for k in 0..r {
        let pivot = (k..r).find(|&i| ctx.is_unit(a[i][k].constant_term())).ok_or(Error::NonUnit)?;
        a.swap(k, pivot);
        inv.swap(k, pivot);
        let u = a[k][k].unit_inverse()?;
        a[k] = a[k].iter().map(|x| x * &u).collect();
        inv[k] = inv[k].iter().map(|x| x * &u).collect();
        for i in 0..r {
            if i == k || a[i][k].is_zero() {
                continue;
            }
            let f = a[i][k].clone();
            let (ak, ik) = (a[k].clone(), inv[k].clone());
            a[i] = a[i].iter().zip(&ak).map(|(x, y)| x - &(&f * y)).collect();
            inv[i] = inv[i].iter().zip(&ik).map(|(x, y)| x - &(&f * y)).collect();
        }
    }
    Ok(inv)
}

/// A ring endomorphism of `R` given by the images of `X` and `Y`.
#[derive(Debug, Clone)]
pub struct RingEndo {
    gx: TruncatedSeries,
    gy: TruncatedSeries,
}

impl RingEndo {
    pub fn new(gx: TruncatedSeries, gy: TruncatedSeries) -> Self {
        Self { gx, gy }
    }

    pub fn apply(&self, f: &TruncatedSeries) -> Result<TruncatedSeries> {
        f.substitute(&self.gx, &self.gy)
    }
}

#[derive(Debug, Clone)]
pub struct SemilinearModule {
    sctx: SeriesContext,
    rank: usize,
    p_phi: SeriesMatrix,
    p_gamma: SeriesMatrix,
    p_tau: SeriesMatrix,
    chi: PadicScalar,
    p_phi_inv: Option<SeriesMatrix>,
    phi_endo: RingEndo,
    gamma_endo: RingEndo,
    tau_endo: RingEndo,
}

impl SemilinearModule {
    /// Assemble a module without validating the operator relations.
    pub fn new(
        sctx: SeriesContext,
        p_phi: SeriesMatrix,
        p_gamma: SeriesMatrix,
        p_tau: SeriesMatrix,
        chi: PadicScalar,
    ) -> Result<Self> {
        let rank = p_phi.len();
        if rank == 0 {
            return Err(Error::InvalidModule("rank must be at least 1".into()));
        }
        for (name, m) in [("P_phi", &p_phi), ("P_gamma", &p_gamma), ("P_tau", &p_tau)] {
            if m.len() != rank || m.iter().any(|row| row.len() != rank) {
                return Err(Error::InvalidModule(format!("{name} is not {rank}x{rank}")));
            }
            if m.iter().flatten().any(|x| x.sctx() != sctx) {
                return Err(Error::ContextMismatch);
            }
        }
        let (px, py) = phi_generators(sctx);
        let (gx, gy) = GroupElement::gamma(chi.clone())?.generator_images(sctx)?;
        let tx = &TruncatedSeries::x(sctx) * &TruncatedSeries::w(sctx);
        let p_phi_inv = mat_inverse(&p_phi).ok();
        Ok(Self {
            sctx,
            rank,
            p_phi,
            p_gamma,
            p_tau,
            chi,
            p_phi_inv,
            phi_endo: RingEndo::new(px, py),
            gamma_endo: RingEndo::new(gx, gy),
            tau_endo: RingEndo::new(tx, TruncatedSeries::y(sctx)),
        })
    }

    /// The free module of rank `rank` with all operator matrices the identity.
    pub fn trivial(sctx: SeriesContext, rank: usize, chi: PadicScalar) -> Result<Self> {
        let id = identity_matrix(sctx, rank);
        Self::new(sctx, id.clone(), id.clone(), id, chi)
    }

    pub fn sctx(&self) -> SeriesContext {
        self.sctx
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn chi(&self) -> &PadicScalar {
        &self.chi
    }

    pub fn p_phi(&self) -> &SeriesMatrix {
        &self.p_phi
    }

    pub fn p_gamma(&self) -> &SeriesMatrix {
        &self.p_gamma
    }

    pub fn p_tau(&self) -> &SeriesMatrix {
        &self.p_tau
    }

    /// Dimension over `Z/p^N` of the flattened module.
    pub fn flat_dim(&self) -> usize {
        self.rank * self.sctx.dim()
    }

    fn semilinear(&self, p: &SeriesMatrix, s: &RingEndo, v: &[TruncatedSeries]) -> Result<Vec<TruncatedSeries>> {
        let sv: Vec<TruncatedSeries> = v.iter().map(|x| s.apply(x)).collect::<Result<_>>()?;
        Ok(mat_vec(p, &sv))
    }

    pub fn phi_d(&self, v: &[TruncatedSeries]) -> Result<Vec<TruncatedSeries>> {
        self.semilinear(&self.p_phi, &self.phi_endo, v)
    }

    pub fn gamma_d(&self, v: &[TruncatedSeries]) -> Result<Vec<TruncatedSeries>> {
        self.semilinear(&self.p_gamma, &self.gamma_endo, v)
    }

    pub fn tau_d(&self, v: &[TruncatedSeries]) -> Result<Vec<TruncatedSeries>> {
        self.semilinear(&self.p_tau, &self.tau_endo, v)
    }

    pub fn tau_cap(&self) -> usize {
        default_tau_cap(&self.sctx, self.rank)
    }

    pub fn tau_c_d(&self, v: &[TruncatedSeries]) -> Result<Vec<TruncatedSeries>> {
        tau_power(&self.chi, &v.to_vec(), |w: &Vec<TruncatedSeries>| self.tau_d(w), self.tau_cap())
    }

    pub fn delta_d(&self, v: &[TruncatedSeries]) -> Result<Vec<TruncatedSeries>> {
        delta_op(&self.chi, &v.to_vec(), |w: &Vec<TruncatedSeries>| self.tau_d(w), self.tau_cap())
    }

    /// `psi_D(v) = psi(P_phi^{-1} v)` coordinatewise, on canonical representatives.
    pub fn psi_d(&self, v: &[TruncatedSeries]) -> Result<Vec<TruncatedSeries>> {
        let inv = self.p_phi_inv.as_ref().ok_or_else(|| Error::InvalidModule("P_phi is not invertible".into()))?;
        Ok(mat_vec(inv, v).iter().map(psi).collect())
    }

    /// The standard basis vector `e_k`.
    pub fn basis_vector(&self, k: usize) -> Vec<TruncatedSeries> {
        (0..self.rank).map(|i| TruncatedSeries::constant(self.sctx, (i == k) as i128)).collect()
    }

    /// Checks the module axioms; see [`ValidationReport`].
    ///
    /// The three relations are between semilinear maps with the same twist on
    /// `R`, so agreement on the basis `e_k` implies agreement everywhere.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        report.push("P_phi invertible", self.p_phi_inv.is_some(), None);
        let ctx = self.sctx.ctx();
        let mut unipotent = true;
        let mut witness = None;
        for (i, row) in self.p_tau.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                let d = x - &TruncatedSeries::constant(self.sctx, (i == j) as i128);
                for k in 0..self.sctx.mx() {
                    if d.coeff(k, 0) % ctx.p() != 0 {
                        unipotent = false;
                        witness.get_or_insert_with(|| format!("P_tau[{i}][{j}] has X^{k} coefficient {}", d.coeff(k, 0)));
                    }
                }
            }
        }
        report.push("P_tau = I mod (p, Y)", unipotent, witness);
        let mut nilpotent = true;
        let mut witness = None;
        for k in 0..self.rank {
            let e = self.basis_vector(k);
            if let Err(err) = self.tau_c_d(&e) {
                nilpotent = false;
                witness.get_or_insert_with(|| format!("e_{k}: {err}"));
            }
        }
        report.push("tau_D - 1 nilpotent", nilpotent, witness);
        if !(nilpotent && report.passed()) {
            return report;
        }
        let mut rel = |name: &str, lhs: &dyn Fn(&[TruncatedSeries]) -> Result<Vec<TruncatedSeries>>,
                       rhs: &dyn Fn(&[TruncatedSeries]) -> Result<Vec<TruncatedSeries>>| {
            let mut ok = true;
            let mut witness = None;
            for k in 0..self.rank {
                let e = self.basis_vector(k);
                match (lhs(&e), rhs(&e)) {
                    (Ok(a), Ok(b)) if a == b => {}
                    (Ok(_), Ok(_)) => {
                        ok = false;
                        witness.get_or_insert_with(|| format!("differs on e_{k}"));
                    }
                    (Err(err), _) | (_, Err(err)) => {
                        ok = false;
                        witness.get_or_insert_with(|| format!("e_{k}: {err}"));
                    }
                }
            }
            report.push(name, ok, witness);
        };
        rel("phi gamma = gamma phi", &|v| self.phi_d(&self.gamma_d(v)?), &|v| self.gamma_d(&self.phi_d(v)?));
        rel("phi tau = tau phi", &|v| self.phi_d(&self.tau_d(v)?), &|v| self.tau_d(&self.phi_d(v)?));
        rel("gamma tau = tau^c gamma", &|v| self.gamma_d(&self.tau_d(v)?), &|v| self.tau_c_d(&self.gamma_d(v)?));
        report
    }

    /// Flattened index of `X^i Y^j e_k`.
    pub fn flat_index(&self, k: usize, i: usize, j: usize) -> usize {
        k * self.sctx.dim() + self.sctx.index(i, j)
    }

    pub fn flatten_vector(&self, v: &[TruncatedSeries]) -> Vec<u64> {
        v.iter().flat_map(|x| x.coeffs().iter().copied()).collect()
    }

    pub fn unflatten_vector(&self, v: &[u64]) -> Vec<TruncatedSeries> {
        let d = self.sctx.dim();
        (0..self.rank)
            .map(|k| TruncatedSeries::from_coeffs(self.sctx, v[k * d..(k + 1) * d].to_vec()).expect("length"))
            .collect()
    }

    /// Matrix of a semilinear operator: column `(k, m)` is `P s(m) e_k = s(m) P[:, k]`.
    fn flatten_semilinear(&self, p: &SeriesMatrix, s: &RingEndo) -> Result<ModMatrix> {
        let sctx = self.sctx;
        let mut images = Vec::with_capacity(sctx.dim());
        for i in 0..sctx.mx() {
            for j in 0..sctx.my() {
                images.push(s.apply(&TruncatedSeries::monomial(sctx, i, j, 1))?);
            }
        }
        let mut cols = Vec::with_capacity(self.flat_dim());
        for k in 0..self.rank {
            for img in &images {
                let v: Vec<TruncatedSeries> = (0..self.rank).map(|l| img * &p[l][k]).collect();
                cols.push(self.flatten_vector(&v));
            }
        }
        Ok(ModMatrix::from_columns(sctx.ctx(), self.flat_dim(), &cols))
    }

    /// Flattened matrices of all module operators.
    pub fn operator_matrices(&self) -> Result<OperatorMatrices> {
        let ctx = self.sctx.ctx();
        let d = self.flat_dim();
        let phi = self.flatten_semilinear(&self.p_phi, &self.phi_endo)?;
        let gamma = self.flatten_semilinear(&self.p_gamma, &self.gamma_endo)?;
        let tau = self.flatten_semilinear(&self.p_tau, &self.tau_endo)?;
        let id = ModMatrix::identity(ctx, d);
        let nil = tau.sub(&id)?;
        let cap = self.tau_cap();
        let mut powers = vec![id.clone()];
        while !powers.last().unwrap().is_zero() {
            if powers.len() > cap {
                return Err(Error::NonNilpotentTau { cap });
            }
            let next = powers.last().unwrap().mul(&nil)?;
            powers.push(next);
        }
        powers.pop();
        let coeffs = binom_padic_row(&self.chi, powers.len() + 1, &ctx)?;
        let mut tau_c = ModMatrix::zeros(ctx, d, d);
        let mut delta = ModMatrix::zeros(ctx, d, d);
        for (k, pk) in powers.iter().enumerate() {
            tau_c = tau_c.add(&pk.scale(coeffs[k]))?;
            delta = delta.add(&pk.scale(coeffs[k + 1]))?;
        }
        let psi = match &self.p_phi_inv {
            Some(inv) => {
                let mut cols = Vec::with_capacity(d);
                for k in 0..self.rank {
                    for idx in 0..self.sctx.dim() {
                        let mut e = vec![TruncatedSeries::zero(self.sctx); self.rank];
                        e[k] = TruncatedSeries::monomial(self.sctx, idx / self.sctx.my(), idx % self.sctx.my(), 1);
                        let v: Vec<TruncatedSeries> = mat_vec(inv, &e).iter().map(psi).collect();
                        cols.push(self.flatten_vector(&v));
                    }
                }
                ModMatrix::from_columns(ctx, d, &cols)
            }
            None => return Err(Error::InvalidModule("P_phi is not invertible".into())),
        };
        Ok(OperatorMatrices { id, phi, gamma, tau, tau_c, delta, psi, window_rows: self.window_rows() })
    }

    /// Flattened coordinates inside the `psi` window.
    pub fn window_rows(&self) -> Vec<usize> {
        let (wx, wy) = psi_window(&self.sctx);
        self.rows_where(|i, j| i < wx && j < wy)
    }

    /// Flattened coordinates of monomials with both degrees at most `guard`.
    pub fn guard_rows(&self, guard: usize) -> Vec<usize> {
        self.rows_where(|i, j| i <= guard && j <= guard)
    }

    fn rows_where(&self, keep: impl Fn(usize, usize) -> bool) -> Vec<usize> {
        let mut out = Vec::new();
        for k in 0..self.rank {
            for i in 0..self.sctx.mx() {
                for j in 0..self.sctx.my() {
                    if keep(i, j) {
                        out.push(self.flat_index(k, i, j));
                    }
                }
            }
        }
        out
    }

    /// The same module in the basis given by the columns of `b`:
    /// each `P` becomes `B^{-1} P s(B)`.
    pub fn base_change(&self, b: &SeriesMatrix) -> Result<Self> {
        let b_inv = mat_inverse(b)?;
        let twist = |p: &SeriesMatrix, s: &RingEndo| -> Result<SeriesMatrix> {
            Ok(mat_mul(&b_inv, &mat_mul(p, &mat_map(b, |x| s.apply(x))?)))
        };
        Self::new(
            self.sctx,
            twist(&self.p_phi, &self.phi_endo)?,
            twist(&self.p_gamma, &self.gamma_endo)?,
            twist(&self.p_tau, &self.tau_endo)?,
            self.chi.clone(),
        )
    }

    /// A random module satisfying all axioms: constant commuting `phi`, `gamma`
    /// matrices and trivial `tau`, moved by a random change of basis over `R`.
    pub fn random_valid<R: Rng + ?Sized>(rng: &mut R, sctx: SeriesContext, rank: usize, chi: PadicScalar) -> Result<Self> {
        let ctx = sctx.ctx();
        let m = ctx.modulus();
        let constant = |rng: &mut R| -> SeriesMatrix {
            (0..rank)
                .map(|_| (0..rank).map(|_| TruncatedSeries::constant(sctx, rng.gen_range(0..m) as i128)).collect())
                .collect()
        };
        let a_phi = loop {
            let a = constant(rng);
            if mat_inverse(&a).is_ok() {
                break a;
            }
        };
        let a_gamma = loop {
            let u = TruncatedSeries::constant(sctx, rng.gen_range(0..m) as i128);
            let v = TruncatedSeries::constant(sctx, rng.gen_range(0..m) as i128);
            let g: SeriesMatrix = a_phi
                .iter()
                .enumerate()
                .map(|(i, row)| row.iter().enumerate().map(|(j, x)| &(&v * x) + &u.scale((i == j) as u64)).collect())
                .collect();
            if mat_inverse(&g).is_ok() {
                break g;
            }
        };
        let base = Self::new(sctx, a_phi, a_gamma, identity_matrix(sctx, rank), chi)?;
        let b = loop {
            let b: SeriesMatrix = (0..rank)
                .map(|_| (0..rank).map(|_| TruncatedSeries::random(rng, sctx, sctx.mx(), sctx.my())).collect())
                .collect();
            if mat_inverse(&b).is_ok() {
                break b;
            }
        };
        base.base_change(&b)
    }

    pub fn to_spec(&self) -> ModuleSpec {
        let render = |m: &SeriesMatrix| m.iter().map(|row| row.iter().map(|x| x.render()).collect()).collect();
        ModuleSpec {
            p: self.sctx.p(),
            n: self.sctx.ctx().n(),
            mx: self.sctx.mx(),
            my: self.sctx.my(),
            rank: self.rank,
            chi: ChiSpec { value: self.chi.value().to_string(), precision: self.chi.precision() },
            p_phi: render(&self.p_phi),
            p_gamma: render(&self.p_gamma),
            p_tau: render(&self.p_tau),
        }
    }

    /// Parse a spec and validate the resulting module.
    pub fn from_spec(spec: &ModuleSpec) -> Result<Self> {
        let sctx = SeriesContext::new(PrimeContext::new(spec.p, spec.n)?, spec.mx, spec.my)?;
        let value: num_bigint::BigInt = spec
            .chi
            .value
            .trim()
            .parse()
            .map_err(|_| Error::Parse { position: 0, message: format!("bad chi value {:?}", spec.chi.value) })?;
        let chi = PadicScalar::new(spec.p, value, spec.chi.precision)?;
        let parse = |m: &Vec<Vec<String>>| -> Result<SeriesMatrix> {
            m.iter().map(|row| row.iter().map(|s| TruncatedSeries::parse(sctx, s)).collect()).collect()
        };
        let module = Self::new(sctx, parse(&spec.p_phi)?, parse(&spec.p_gamma)?, parse(&spec.p_tau)?, chi)?;
        if module.rank != spec.rank {
            return Err(Error::InvalidModule(format!("rank {} does not match matrices of size {}", spec.rank, module.rank)));
        }
        let report = module.validate();
        if !report.passed() {
            return Err(Error::InvalidModule(report.summary()));
        }
        Ok(module)
    }
}

/// Flattened operators on `D`, each a `dim x dim` matrix over `Z/p^N`.
#[derive(Debug, Clone)]
pub struct OperatorMatrices {
    pub id: ModMatrix,
    pub phi: ModMatrix,
    pub gamma: ModMatrix,
    pub tau: ModMatrix,
    pub tau_c: ModMatrix,
    pub delta: ModMatrix,
    /// `psi_D` on canonical representatives, before projection to the window.
    pub psi: ModMatrix,
    /// Coordinates kept by the projection to the `psi` window.
    pub window_rows: Vec<usize>,
}

impl OperatorMatrices {
    pub fn dim(&self) -> usize {
        self.id.rows()
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl ValidationReport {
    fn push(&mut self, name: &str, passed: bool, witness: Option<String>) {
        self.checks.push(Check { name: name.to_string(), passed, witness });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn summary(&self) -> String {
        let failed: Vec<String> = self
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| match &c.witness {
                Some(w) => format!("{} ({w})", c.name),
                None => c.name.clone(),
            })
            .collect();
        if failed.is_empty() {
            "all checks passed".into()
        } else {
            format!("failed: {}", failed.join("; "))
        }
    }
}

/// Structured module format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleSpec {
    pub p: u64,
    #[serde(rename = "N")]
    pub n: u32,
    #[serde(rename = "Mx")]
    pub mx: usize,
    #[serde(rename = "My")]
    pub my: usize,
    pub rank: usize,
    pub chi: ChiSpec,
    #[serde(rename = "P_phi")]
    pub p_phi: Vec<Vec<String>>,
    #[serde(rename = "P_gamma")]
    pub p_gamma: Vec<Vec<String>>,
    #[serde(rename = "P_tau")]
    pub p_tau: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChiSpec {
    pub value: String,
    pub precision: u32,
}
