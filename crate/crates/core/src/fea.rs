//! Linear-elastic analysis of pin-jointed trusses by the direct stiffness method.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::model::{dot, Bar, TrussLayout, Vec3};

/// Standard gravity, m/s².
pub const STANDARD_GRAVITY: f64 = 9.80665;

/// A pivot below this fraction of the largest diagonal entry marks the system singular.
pub const PIVOT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialSpec {
    /// Young's modulus, Pa.
    pub youngs_modulus: f64,
    /// kg/m³.
    pub density: f64,
    /// m/s².
    pub gravity: f64,
    pub include_self_weight: bool,
}

impl MaterialSpec {
    pub fn new(youngs_modulus: f64, density: f64, include_self_weight: bool) -> Self {
        Self {
            youngs_modulus,
            density,
            gravity: STANDARD_GRAVITY,
            include_self_weight,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisResult {
    /// Per-node displacement, m.
    pub displacements: Vec<Vec3>,
    /// Per-bar axial stress, Pa. Positive is tension.
    pub axial_stress: Vec<f64>,
    /// Per-bar `max(0, -σ)`, Pa.
    pub compressive_stress: Vec<f64>,
    /// Per-bar Euler buckling stress `π²EI/(z·l²)`, Pa.
    pub buckling_limit: Vec<f64>,
    /// Per-bar `l/√(I/z)`.
    pub slenderness: Vec<f64>,
    pub solvable: bool,
}

impl AnalysisResult {
    /// Largest displacement component over all nodes.
    pub fn max_displacement(&self) -> f64 {
        self.displacements
            .iter()
            .flat_map(|d| d.iter())
            .fold(0.0, |m, c| m.max(c.abs()))
    }
}

/// Dense symmetric matrix in row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] += v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Lower-triangular Cholesky factor, or `None` if a pivot falls below the tolerance.
    pub fn cholesky(&self) -> Option<Cholesky> {
        let n = self.n;
        let max_diag = (0..n).map(|i| self.get(i, i)).fold(0.0, f64::max);
        if n > 0 && max_diag <= 0.0 {
            return None;
        }
        let threshold = PIVOT_TOLERANCE * max_diag;
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = self.get(j, j);
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if !(d > threshold) {
                return None;
            }
            let d = d.sqrt();
            l[j * n + j] = d;
            for i in (j + 1)..n {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / d;
            }
        }
        Some(Cholesky { n, l })
    }
}

#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[i * n + k] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= self.l[k * n + i] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        y
    }
}

/// Maps node degrees of freedom to rows of the reduced (support-free) system.
#[derive(Debug, Clone)]
pub struct DofMap {
    dim: usize,
    index: Vec<Option<usize>>,
    free: usize,
}

impl DofMap {
    pub fn new(layout: &TrussLayout) -> Self {
        let dim = layout.dim().count();
        let mut index = Vec::with_capacity(layout.node_count() * dim);
        let mut free = 0;
        for node in layout.nodes() {
            for _ in 0..dim {
                if node.is_support {
                    index.push(None);
                } else {
                    index.push(Some(free));
                    free += 1;
                }
            }
        }
        Self { dim, index, free }
    }

    pub fn free_count(&self) -> usize {
        self.free
    }

    pub fn dof(&self, node: usize, axis: usize) -> Option<usize> {
        self.index[node * self.dim + axis]
    }
}

fn unit_and_length(layout: &TrussLayout, bar: usize) -> (Vec3, f64) {
    let v = layout.bar_vector(bar);
    let l = dot(&v, &v).sqrt();
    if l > 0.0 {
        ([v[0] / l, v[1] / l, v[2] / l], l)
    } else {
        ([0.0; 3], 0.0)
    }
}

/// Reduced stiffness matrix over free degrees of freedom. Zero-length bars are skipped.
pub fn reduced_stiffness(layout: &TrussLayout, material: &MaterialSpec, dofs: &DofMap) -> SymMatrix {
    let dim = layout.dim().count();
    let mut k = SymMatrix::zeros(dofs.free_count());
    for (i, bar) in layout.bars().iter().enumerate() {
        let (e, l) = unit_and_length(layout, i);
        if l <= 0.0 {
            continue;
        }
        let axial = material.youngs_modulus * bar.section.area() / l;
        let ends = [(bar.u, 1.0), (bar.v, -1.0)];
        for &(na, sa) in &ends {
            for &(nb, sb) in &ends {
                for a in 0..dim {
                    let Some(ra) = dofs.dof(na, a) else { continue };
                    for b in 0..dim {
                        let Some(rb) = dofs.dof(nb, b) else { continue };
                        k.add(ra, rb, sa * sb * axial * e[a] * e[b]);
                    }
                }
            }
        }
    }
    k
}

/// Lumped self-weight: each bar sends half its weight to each endpoint, downward along
/// the vertical axis. Returns zero loads when self-weight is disabled.
pub fn self_weight_loads(layout: &TrussLayout, material: &MaterialSpec) -> Vec<Vec3> {
    let mut loads = vec![[0.0; 3]; layout.node_count()];
    if !material.include_self_weight {
        return loads;
    }
    let axis = layout.dim().vertical_axis();
    for (i, bar) in layout.bars().iter().enumerate() {
        let weight = material.density * bar.section.area() * layout.bar_length(i) * material.gravity;
        loads[bar.u][axis] -= weight / 2.0;
        loads[bar.v][axis] -= weight / 2.0;
    }
    loads
}

/// External plus self-weight nodal loads.
pub fn total_loads(layout: &TrussLayout, material: &MaterialSpec) -> Vec<Vec3> {
    let mut loads = self_weight_loads(layout, material);
    for (load, node) in loads.iter_mut().zip(layout.nodes()) {
        for a in 0..3 {
            load[a] += node.load[a];
        }
    }
    loads
}

/// Euler buckling stress `π²EI/(z·l²)` of a bar of length `length`.
pub fn buckling_limit(bar: &Bar, length: f64, material: &MaterialSpec) -> f64 {
    let z = bar.section.area();
    PI * PI * material.youngs_modulus * bar.section.moment_of_inertia() / (z * length * length)
}

/// Slenderness ratio `l/√(I/z)`.
pub fn slenderness(bar: &Bar, length: f64) -> f64 {
    length / (bar.section.moment_of_inertia() / bar.section.area()).sqrt()
}

/// Maxwell counting: bars plus restrained DOFs must cover all node DOFs.
pub fn maxwell_count_ok(layout: &TrussLayout) -> bool {
    let dim = layout.dim().count();
    layout.bar_count() + dim * layout.support_count() >= dim * layout.node_count()
}

/// Whether the reduced stiffness matrix is positive definite.
pub fn stiffness_positive_definite(layout: &TrussLayout, material: &MaterialSpec) -> bool {
    let dofs = DofMap::new(layout);
    if layout.bars().iter().enumerate().any(|(i, _)| layout.bar_length(i) <= 0.0) {
        return false;
    }
    reduced_stiffness(layout, material, &dofs).cholesky().is_some()
}

/// Displacements for an explicit load vector (one entry per node), or `None` if singular.
pub fn solve_displacements(layout: &TrussLayout, material: &MaterialSpec, loads: &[Vec3]) -> Option<Vec<Vec3>> {
    let dim = layout.dim().count();
    if layout.bars().iter().enumerate().any(|(i, _)| layout.bar_length(i) <= 0.0) {
        return None;
    }
    let dofs = DofMap::new(layout);
    let k = reduced_stiffness(layout, material, &dofs);
    let chol = k.cholesky()?;
    let mut f = vec![0.0; dofs.free_count()];
    for (node, load) in loads.iter().enumerate() {
        for a in 0..dim {
            if let Some(r) = dofs.dof(node, a) {
                f[r] += load[a];
            }
        }
    }
    let d = chol.solve(&f);
    let mut out = vec![[0.0; 3]; layout.node_count()];
    for (node, disp) in out.iter_mut().enumerate() {
        for a in 0..dim {
            if let Some(r) = dofs.dof(node, a) {
                disp[a] = d[r];
            }
        }
    }
    Some(out)
}

/// Assembles and solves `K_ff·d = f` and derives member stresses and stability measures.
///
/// A singular or indefinite reduced system yields `solvable = false` with zero stresses.
pub fn assemble_and_solve(layout: &TrussLayout, material: &MaterialSpec) -> AnalysisResult {
    let loads = total_loads(layout, material);
    let lengths: Vec<f64> = (0..layout.bar_count()).map(|i| layout.bar_length(i)).collect();
    let buckling = layout
        .bars()
        .iter()
        .zip(&lengths)
        .map(|(bar, &l)| buckling_limit(bar, l, material))
        .collect();
    let lambda = layout
        .bars()
        .iter()
        .zip(&lengths)
        .map(|(bar, &l)| slenderness(bar, l))
        .collect();
    let Some(displacements) = solve_displacements(layout, material, &loads) else {
        return AnalysisResult {
            displacements: vec![[0.0; 3]; layout.node_count()],
            axial_stress: vec![0.0; layout.bar_count()],
            compressive_stress: vec![0.0; layout.bar_count()],
            buckling_limit: buckling,
            slenderness: lambda,
            solvable: false,
        };
    };
    let axial_stress: Vec<f64> = layout
        .bars()
        .iter()
        .enumerate()
        .map(|(i, bar)| {
            let (e, l) = unit_and_length(layout, i);
            let du = &displacements[bar.u];
            let dv = &displacements[bar.v];
            let elongation = dot(&e, &[dv[0] - du[0], dv[1] - du[1], dv[2] - du[2]]);
            material.youngs_modulus / l * elongation
        })
        .collect();
    let compressive_stress = axial_stress.iter().map(|s| (-s).max(0.0)).collect();
    AnalysisResult {
        displacements,
        axial_stress,
        compressive_stress,
        buckling_limit: buckling,
        slenderness: lambda,
        solvable: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CrossSection, Dim, NodeSpec};

    fn support(p: Vec3) -> NodeSpec {
        NodeSpec {
            position: p,
            is_support: true,
            load: [0.0; 3],
            is_fixed: true,
        }
    }

    fn loaded(p: Vec3, load: Vec3) -> NodeSpec {
        NodeSpec {
            position: p,
            is_support: false,
            load,
            is_fixed: true,
        }
    }

    fn steel() -> MaterialSpec {
        MaterialSpec::new(200e9, 7850.0, false)
    }

    #[test]
    fn axial_rod_closed_form() {
        // node 1 is pinned transversally by a second, perpendicular support bar
        let (p, l, a) = (1.0e4, 2.0, 1e-4);
        let layout = TrussLayout::new(
            Dim::Two,
            vec![
                support([0.0, 0.0, 0.0]),
                loaded([l, 0.0, 0.0], [p, 0.0, 0.0]),
                support([l, -1.0, 0.0]),
            ],
            vec![Bar::new(0, 1, CrossSection::flat(a)), Bar::new(2, 1, CrossSection::flat(a))],
        )
        .unwrap();
        let r = assemble_and_solve(&layout, &steel());
        assert!(r.solvable);
        let tip = p * l / (200e9 * a);
        assert!((r.displacements[1][0] - tip).abs() < 1e-12 * tip.max(1.0) + 1e-15);
        assert!((r.axial_stress[0] - p / a).abs() < 1e-6 * p / a);
        assert!(r.axial_stress[1].abs() < 1e-6);
    }

    #[test]
    fn symmetric_two_bar_statics() {
        let (p, a, h) = (1.0e5, 1e-3, 1.0);
        let layout = TrussLayout::new(
            Dim::Two,
            vec![
                support([-h, 0.0, 0.0]),
                support([h, 0.0, 0.0]),
                loaded([0.0, h, 0.0], [0.0, -p, 0.0]),
            ],
            vec![Bar::new(0, 2, CrossSection::flat(a)), Bar::new(1, 2, CrossSection::flat(a))],
        )
        .unwrap();
        let mat = steel();
        let r = assemble_and_solve(&layout, &mat);
        // method of joints: each member carries P/√2 in compression
        let force = p / 2f64.sqrt();
        for s in &r.axial_stress {
            assert!((s + force / a).abs() < 1e-6 * force / a, "{s}");
        }
        assert_eq!(r.compressive_stress[0], -r.axial_stress[0]);
        // apex drops by F·L/(EA) / cos45°
        let len = 2f64.sqrt() * h;
        let shortening = force * len / (mat.youngs_modulus * a);
        let expected = shortening * 2f64.sqrt();
        assert!((r.displacements[2][1] + expected).abs() < 1e-9 * expected);
        assert!(r.displacements[2][0].abs() < 1e-15);
    }

    #[test]
    fn zero_load_gives_zero_response() {
        let layout = TrussLayout::new(
            Dim::Two,
            vec![support([0.0; 3]), support([2.0, 0.0, 0.0]), loaded([1.0, 1.0, 0.0], [0.0; 3])],
            vec![Bar::new(0, 2, CrossSection::flat(1e-3)), Bar::new(1, 2, CrossSection::flat(1e-3))],
        )
        .unwrap();
        let r = assemble_and_solve(&layout, &steel());
        assert!(r.solvable);
        assert!(r.displacements.iter().all(|d| d == &[0.0; 3]));
        assert!(r.axial_stress.iter().all(|s| *s == 0.0));
    }

    #[test]
    fn collinear_chain_is_unsolvable() {
        let layout = TrussLayout::new(
            Dim::Two,
            vec![support([0.0; 3]), loaded([1.0, 0.0, 0.0], [0.0, -1.0, 0.0])],
            vec![Bar::new(0, 1, CrossSection::flat(1e-3))],
        )
        .unwrap();
        let r = assemble_and_solve(&layout, &steel());
        assert!(!r.solvable);
        assert!(!stiffness_positive_definite(&layout, &steel()));
    }

    #[test]
    fn self_weight_lumping() {
        let mut mat = steel();
        mat.include_self_weight = true;
        let empty = TrussLayout::from_nodes(Dim::Two, vec![support([0.0; 3])]).unwrap();
        assert_eq!(self_weight_loads(&empty, &mat), vec![[0.0; 3]]);
        let layout = TrussLayout::new(
            Dim::Three,
            vec![support([0.0; 3]), loaded([3.0, 0.0, 4.0], [0.0; 3])],
            vec![Bar::new(0, 1, CrossSection::tube(0.04, 0.0015))],
        )
        .unwrap();
        let m = layout.mass(mat.density);
        let loads = self_weight_loads(&layout, &mat);
        for l in &loads {
            assert!((l[2] + m * mat.gravity / 2.0).abs() < 1e-9);
            assert_eq!((l[0], l[1]), (0.0, 0.0));
        }
    }

    #[test]
    fn buckling_and_slenderness_of_catalog_tubes() {
        let mat = MaterialSpec::new(193e9, 8000.0, true);
        let tube = Bar::new(0, 1, CrossSection::tube(0.040, 0.0015));
        let b = buckling_limit(&tube, 1.0, &mat);
        // I = 33 666 mm⁴, z = 181.43 mm² (independent hand computation)
        assert!((b / 1e6 - 353.46).abs() < 0.01, "{}", b / 1e6);
        assert!((buckling_limit(&tube, 2.0, &mat) - b / 4.0).abs() < 1e-6 * b);

        let small = Bar::new(0, 1, CrossSection::tube(0.025, 0.0015));
        let lam = slenderness(&small, 1.0);
        assert!((lam - 120.1).abs() < 0.05, "{lam}");
        assert!((slenderness(&small, 2.5) - 2.5 * lam).abs() < 1e-9);

        // solid-circle convention for flat sections: b = πEz/(4l²)
        let flat = Bar::new(0, 1, CrossSection::flat(0.002));
        let b2 = buckling_limit(&flat, 3.0, &mat);
        assert!((b2 - PI * mat.youngs_modulus * 0.002 / (4.0 * 9.0)).abs() < 1e-6 * b2);
    }

    #[test]
    fn cholesky_solves_spd_system() {
        let mut m = SymMatrix::zeros(3);
        let vals = [[4.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 2.0]];
        for i in 0..3 {
            for j in 0..3 {
                m.add(i, j, vals[i][j]);
            }
        }
        let b = [1.0, -2.0, 0.5];
        let x = m.cholesky().unwrap().solve(&b);
        let back = m.mul_vec(&x);
        for i in 0..3 {
            assert!((back[i] - b[i]).abs() < 1e-12);
        }
    }
}
