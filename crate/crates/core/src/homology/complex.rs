//! The three-operator Koszul cube of a module, its lateral and vertical kernel
//! subcomplexes with their inclusions, the `psi`-complex with the comparison
//! map `Phi`, and cohomology over `Z/p^N`.
//!
//! Slot orders: degree 1 is `(gamma, phi, tau)`, degree 2 is
//! `(phi tau, gamma tau, gamma phi)`. The differentials are
//!
//! ```text
//! g0 = [gamma - 1; 1 - phi; tau - 1]
//! g1 = [[0, 1 - tau, 1 - phi], [1 - tau^c, 0, gamma - delta], [phi - 1, gamma - 1, 0]]
//! g2 = [gamma - delta, phi - 1, tau^c - 1]
//! ```

use serde::Serialize;

use crate::coeffs::PrimeContext;
use crate::error::{Error, Result};
use crate::homology::linalg::{quotient_invariants, ModMatrix};
use crate::homology::module::{OperatorMatrices, SemilinearModule};

/// A cochain complex `C^0 -> C^1 -> C^2 -> C^3` of free `Z/p^N`-modules,
/// optionally cut down to the subcomplex `ker E_i` in each degree.
#[derive(Debug, Clone)]
pub struct KoszulComplex {
    ctx: PrimeContext,
    dims: [usize; 4],
    diffs: [ModMatrix; 3],
    constraints: Option<[ModMatrix; 4]>,
}

impl KoszulComplex {
    pub fn new(ctx: PrimeContext, dims: [usize; 4], diffs: [ModMatrix; 3]) -> Result<Self> {
        for (i, d) in diffs.iter().enumerate() {
            if d.rows() != dims[i + 1] || d.cols() != dims[i] {
                return Err(Error::Dimension(format!("differential {i} has the wrong shape")));
            }
        }
        Ok(Self { ctx, dims, diffs, constraints: None })
    }

    /// Restrict to `ker E_i` in each degree; checks that the differentials
    /// preserve the kernels.
    pub fn restricted(&self, constraints: [ModMatrix; 4]) -> Result<Self> {
        for (i, e) in constraints.iter().enumerate() {
            if e.cols() != self.dims[i] {
                return Err(Error::Dimension(format!("constraint {i} has the wrong shape")));
            }
        }
        let out = Self { constraints: Some(constraints), ..self.clone() };
        for i in 0..3 {
            let image = out.diffs[i].mul(&out.domain_generators(i))?;
            if !out.constraint(i + 1).map_or(Ok(true), |e| e.mul(&image).map(|m| m.is_zero()))? {
                return Err(Error::RestrictionFailure { degree: i });
            }
        }
        Ok(out)
    }

    pub fn ctx(&self) -> PrimeContext {
        self.ctx
    }

    pub fn dims(&self) -> [usize; 4] {
        self.dims
    }

    pub fn differential(&self, i: usize) -> &ModMatrix {
        &self.diffs[i]
    }

    pub fn constraint(&self, i: usize) -> Option<&ModMatrix> {
        self.constraints.as_ref().map(|c| &c[i])
    }

    /// Generators of the degree-`i` term as columns (the identity when unrestricted).
    pub fn domain_generators(&self, i: usize) -> ModMatrix {
        match self.constraint(i) {
            Some(e) => e.kernel().generators,
            None => ModMatrix::identity(self.ctx, self.dims[i]),
        }
    }

    /// `d_{i+1} d_i = 0` on the degree-`i` term.
    pub fn check_d2(&self) -> Result<()> {
        self.check_d2_on_rows(None)
    }

    /// `d_{i+1} d_i = 0` after keeping only the listed output coordinates.
    pub fn check_d2_on_rows(&self, keep: Option<&[Vec<usize>; 4]>) -> Result<()> {
        for i in 0..2 {
            let g = self.domain_generators(i);
            let dd = self.diffs[i + 1].mul(&self.diffs[i].mul(&g)?)?;
            let dd = match keep {
                Some(k) => dd.select_rows(&k[i + 2]),
                None => dd,
            };
            if !dd.is_zero() {
                return Err(Error::NotAComplex { degree: i });
            }
        }
        Ok(())
    }

    /// Elementary-divisor exponents of `H^i` as `⊕ Z/p^{e}`.
    pub fn cohomology(&self, degree: usize) -> Result<Vec<u32>> {
        if degree > 3 {
            return Err(Error::Dimension(format!("degree {degree} out of range")));
        }
        let ctx = self.ctx;
        let out_map = if degree < 3 {
            self.diffs[degree].clone()
        } else {
            ModMatrix::zeros(ctx, 0, self.dims[3])
        };
        let cycles_map = match self.constraint(degree) {
            Some(e) => ModMatrix::vstack(&[&out_map, e])?,
            None => out_map,
        };
        let cycles = cycles_map.kernel();
        let boundaries = if degree == 0 {
            ModMatrix::zeros(ctx, self.dims[0], 0)
        } else {
            self.diffs[degree - 1].mul(&self.domain_generators(degree - 1))?
        };
        if !cycles_map.mul(&boundaries)?.is_zero() {
            return Err(Error::NotAComplex { degree: degree.saturating_sub(1) });
        }
        let rel_cols: Vec<Vec<u64>> =
            (0..boundaries.cols()).map(|j| cycles.coordinates(&boundaries.column(j))).collect();
        let relations = ModMatrix::from_columns(ctx, cycles.len(), &rel_cols);
        quotient_invariants(ctx, &cycles.orders, &relations)
    }
}

/// Degreewise maps between two complexes.
#[derive(Debug, Clone)]
pub struct ChainMap {
    pub maps: [ModMatrix; 4],
}

impl ChainMap {
    /// `d' F_i = F_{i+1} d` on the generators of the source, optionally
    /// comparing only the listed target coordinates.
    pub fn check_chain_law(
        &self,
        source: &KoszulComplex,
        target: &KoszulComplex,
        keep: Option<&[Vec<usize>; 4]>,
    ) -> Result<bool> {
        for i in 0..3 {
            let g = source.domain_generators(i);
            let lhs = target.differential(i).mul(&self.maps[i].mul(&g)?)?;
            let rhs = self.maps[i + 1].mul(&source.differential(i).mul(&g)?)?;
            let diff = lhs.sub(&rhs)?;
            let diff = match keep {
                Some(k) => diff.select_rows(&k[i + 1]),
                None => diff,
            };
            if !diff.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Injective on the terms of the source.
    pub fn is_injective(&self, source: &KoszulComplex) -> Result<bool> {
        for i in 0..4 {
            let stacked = match source.constraint(i) {
                Some(e) => ModMatrix::vstack(&[&self.maps[i], e])?,
                None => self.maps[i].clone(),
            };
            if stacked.cols() > 0 && !stacked.kernel().is_empty() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// The cube of a validated module together with its flattened operators.
#[derive(Debug, Clone)]
pub struct Cube {
    pub ops: OperatorMatrices,
    pub complex: KoszulComplex,
    rank: usize,
}

fn sub(a: &ModMatrix, b: &ModMatrix) -> ModMatrix {
    a.sub(b).expect("operator shapes agree")
}

/// The cube built from operators, with `frob` in the place of `phi`.
fn cube_from(ops: &OperatorMatrices, frob: &ModMatrix) -> Result<KoszulComplex> {
    let ctx = ops.id.ctx();
    let d = ops.dim();
    let id = &ops.id;
    let g_1 = sub(&ops.gamma, id);
    let one_f = sub(id, frob);
    let t_1 = sub(&ops.tau, id);
    let one_t = sub(id, &ops.tau);
    let one_tc = sub(id, &ops.tau_c);
    let g_delta = sub(&ops.gamma, &ops.delta);
    let f_1 = sub(frob, id);
    let tc_1 = sub(&ops.tau_c, id);
    let g0 = ModMatrix::block(ctx, &[d, d, d], &[d], &[vec![Some(&g_1)], vec![Some(&one_f)], vec![Some(&t_1)]])?;
    let g1 = ModMatrix::block(
        ctx,
        &[d, d, d],
        &[d, d, d],
        &[
            vec![None, Some(&one_t), Some(&one_f)],
            vec![Some(&one_tc), None, Some(&g_delta)],
            vec![Some(&f_1), Some(&g_1), None],
        ],
    )?;
    let g2 = ModMatrix::block(ctx, &[d], &[d, d, d], &[vec![Some(&g_delta), Some(&f_1), Some(&tc_1)]])?;
    KoszulComplex::new(ctx, [d, 3 * d, 3 * d, d], [g0, g1, g2])
}

/// Builds the cube; the module must pass validation.
pub fn build_cube(module: &SemilinearModule) -> Result<Cube> {
    let report = module.validate();
    if !report.passed() {
        return Err(Error::InvalidModule(report.summary()));
    }
    let ops = module.operator_matrices()?;
    let complex = cube_from(&ops, &ops.phi)?;
    Ok(Cube { ops, complex, rank: module.rank() })
}

impl Cube {
    pub fn rank(&self) -> usize {
        self.rank
    }

    fn zero_constraint(&self, cols: usize) -> ModMatrix {
        ModMatrix::zeros(self.ops.id.ctx(), 0, cols)
    }

    /// `[D, D ⊕ D, D, 0]` with `E` cutting each copy of `D` down to a kernel.
    fn kernel_shape(
        &self,
        d0: ModMatrix,
        d1: ModMatrix,
        constraints: [ModMatrix; 3],
    ) -> Result<KoszulComplex> {
        let ctx = self.ops.id.ctx();
        let d = self.ops.dim();
        let d2 = ModMatrix::zeros(ctx, 0, d);
        let [e0, e1, e2] = constraints;
        KoszulComplex::new(ctx, [d, 2 * d, d, 0], [d0, d1, d2])?.restricted([e0, e1, e2, self.zero_constraint(0)])
    }

    /// Herr-shaped complex on `ker(tau - 1)`: coordinates `(gamma, phi)` in degree 1.
    pub fn lateral_kernel_complex(&self) -> Result<KoszulComplex> {
        let o = &self.ops;
        let ctx = o.id.ctx();
        let d = o.dim();
        let g_1 = sub(&o.gamma, &o.id);
        let one_f = sub(&o.id, &o.phi);
        let f_1 = sub(&o.phi, &o.id);
        let t_1 = sub(&o.tau, &o.id);
        let f0 = ModMatrix::block(ctx, &[d, d], &[d], &[vec![Some(&g_1)], vec![Some(&one_f)]])?;
        let f1 = ModMatrix::block(ctx, &[d], &[d, d], &[vec![Some(&f_1), Some(&g_1)]])?;
        let e1 = ModMatrix::block(ctx, &[d, d], &[d, d], &[vec![Some(&t_1), None], vec![None, Some(&t_1)]])?;
        self.kernel_shape(f0, f1, [t_1.clone(), e1, t_1])
    }

    /// Complex on `ker(gamma - 1)`, `ker(gamma - delta)`: coordinates `(phi, tau)` in degree 1.
    pub fn vertical_kernel_complex(&self) -> Result<KoszulComplex> {
        let o = &self.ops;
        let ctx = o.id.ctx();
        let d = o.dim();
        let g_1 = sub(&o.gamma, &o.id);
        let g_delta = sub(&o.gamma, &o.delta);
        let one_f = sub(&o.id, &o.phi);
        let one_t = sub(&o.id, &o.tau);
        let t_1 = sub(&o.tau, &o.id);
        let d0 = ModMatrix::block(ctx, &[d, d], &[d], &[vec![Some(&one_f)], vec![Some(&t_1)]])?;
        let d1 = ModMatrix::block(ctx, &[d], &[d, d], &[vec![Some(&one_t), Some(&one_f)]])?;
        let e1 = ModMatrix::block(ctx, &[d, d], &[d, d], &[vec![Some(&g_1), None], vec![None, Some(&g_delta)]])?;
        self.kernel_shape(d0, d1, [g_1, e1, g_delta])
    }

    /// The `psi`-complex: the cube with `psi` in place of `phi`.
    pub fn psi_complex(&self) -> Result<KoszulComplex> {
        cube_from(&self.ops, &self.ops.psi)
    }

    /// Coordinates of each degree of the cube that lie in the `psi` window.
    pub fn window_rows(&self) -> [Vec<usize>; 4] {
        let d = self.ops.dim();
        let w = &self.ops.window_rows;
        let copies = |n: usize| -> Vec<usize> { (0..n).flat_map(|c| w.iter().map(move |&r| c * d + r)).collect() };
        [copies(1), copies(3), copies(3), copies(1)]
    }

    /// `Phi`: identity, `diag(1, -psi, 1)`, `diag(-psi, 1, -psi)`, `-psi`.
    pub fn phi_map(&self) -> Result<ChainMap> {
        let o = &self.ops;
        let ctx = o.id.ctx();
        let d = o.dim();
        let mpsi = o.psi.neg();
        let id = &o.id;
        let diag3 = |a: &ModMatrix, b: &ModMatrix, c: &ModMatrix| {
            ModMatrix::block(
                ctx,
                &[d, d, d],
                &[d, d, d],
                &[vec![Some(a), None, None], vec![None, Some(b), None], vec![None, None, Some(c)]],
            )
        };
        Ok(ChainMap { maps: [id.clone(), diag3(id, &mpsi, id)?, diag3(&mpsi, id, &mpsi)?, mpsi.clone()] })
    }

    /// `psi_D phi_D = 1` after projection to the window: the section
    /// `-phi_D` in each `psi` slot shows that `Phi` is onto the window.
    pub fn phi_map_onto_window(&self) -> Result<bool> {
        let o = &self.ops;
        let back = o.psi.mul(&o.phi)?.select_rows(&o.window_rows);
        Ok(back == o.id.select_rows(&o.window_rows))
    }

    /// Inclusion of the lateral (`which = PInfinity`) or vertical (`Infinity`)
    /// kernel complex into the cube.
    pub fn iota(&self, which: Iota) -> Result<(KoszulComplex, ChainMap)> {
        let ctx = self.ops.id.ctx();
        let d = self.ops.dim();
        let id = &self.ops.id;
        let z = |r: usize, c: usize| ModMatrix::zeros(ctx, r, c);
        let (sub, m1, m2) = match which {
            Iota::PInfinity => {
                let m1 = ModMatrix::block(ctx, &[d, d, d], &[d, d], &[vec![Some(id), None], vec![None, Some(id)], vec![None, None]])?;
                let m2 = ModMatrix::block(ctx, &[d, d, d], &[d], &[vec![None], vec![None], vec![Some(id)]])?;
                (self.lateral_kernel_complex()?, m1, m2)
            }
            Iota::Infinity => {
                let m1 = ModMatrix::block(ctx, &[d, d, d], &[d, d], &[vec![None, None], vec![Some(id), None], vec![None, Some(id)]])?;
                let m2 = ModMatrix::block(ctx, &[d, d, d], &[d], &[vec![Some(id)], vec![None], vec![None]])?;
                (self.vertical_kernel_complex()?, m1, m2)
            }
        };
        Ok((sub, ChainMap { maps: [id.clone(), m1, m2, z(d, 0)] }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Iota {
    PInfinity,
    Infinity,
}

/// Outcome of the `(C0)` check.
#[derive(Debug, Clone, Serialize)]
pub struct C0Report {
    pub guard: usize,
    /// Exponents of the triple kernel restricted to the guard window; empty means zero.
    pub guarded_kernel: Vec<u32>,
    /// Exponents of the triple kernel on the whole truncated module.
    pub full_kernel: Vec<u32>,
    pub gamma_kernel: Vec<u32>,
    pub tau_kernel: Vec<u32>,
}

impl C0Report {
    pub fn passed(&self) -> bool {
        self.guarded_kernel.is_empty()
    }
}

/// `D^{psi=0, gamma=1, tau=1}`, with `psi = 0` read in the `psi` window.
pub fn condition_c0_check(module: &SemilinearModule, guard: usize) -> Result<C0Report> {
    let report = module.validate();
    if !report.passed() {
        return Err(Error::InvalidModule(report.summary()));
    }
    let o = module.operator_matrices()?;
    let psi_w = o.psi.select_rows(&o.window_rows);
    let g_1 = sub(&o.gamma, &o.id);
    let t_1 = sub(&o.tau, &o.id);
    let triple = ModMatrix::vstack(&[&psi_w, &g_1, &t_1])?;
    let cols = module.guard_rows(guard);
    Ok(C0Report {
        guard,
        guarded_kernel: triple.select_columns(&cols).kernel().orders,
        full_kernel: triple.kernel().orders,
        gamma_kernel: g_1.kernel().orders,
        tau_kernel: t_1.kernel().orders,
    })
}
