//! Structured quadrilateral meshes of the unit cell and of the macroscopic
//! domain, phase labelling and periodic node identification.
//!
//! Nodes are numbered row by row: node `(i, j)` (column `i`, row `j`) has
//! index `i + j * (n + 1)`. Element `(i, j)` has index `i + j * n` and its
//! corners are listed counter-clockwise starting at the lower-left node.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible number of cells per side.
pub const MIN_CELLS: usize = 4;

/// Material phase of an element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Phase {
    /// The ambient material, `Y_f`.
    Matrix,
    /// The inserted particles, `Y_s`.
    Inclusion,
}

impl Phase {
    pub const ALL: [Phase; 2] = [Phase::Matrix, Phase::Inclusion];

    pub fn index(self) -> usize {
        match self {
            Phase::Matrix => 0,
            Phase::Inclusion => 1,
        }
    }
}

/// A value attached to each of the two phases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseMap<T> {
    pub matrix: T,
    pub inclusion: T,
}

impl<T> PhaseMap<T> {
    pub fn new(matrix: T, inclusion: T) -> Self {
        PhaseMap { matrix, inclusion }
    }

    pub fn get(&self, phase: Phase) -> &T {
        match phase {
            Phase::Matrix => &self.matrix,
            Phase::Inclusion => &self.inclusion,
        }
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> PhaseMap<U> {
        PhaseMap { matrix: f(&self.matrix), inclusion: f(&self.inclusion) }
    }
}

impl<T: Clone> PhaseMap<T> {
    pub fn uniform(value: T) -> Self {
        PhaseMap { matrix: value.clone(), inclusion: value }
    }
}

/// Microstructure of the periodicity cell `Y = [0,1]^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum UnitCellGeometry {
    /// Disk of the given radius centred at `(1/2, 1/2)`.
    #[serde(rename_all = "camelCase")]
    DiskInclusion { radius: f64 },
    /// Layers normal to `e1`: the inclusion occupies `y1 < layer_fraction`.
    #[serde(rename_all = "camelCase")]
    Laminate { layer_fraction: f64 },
    /// Pixel description, `grid[row][col]` with row 0 at `y2 = 0`; `true`
    /// marks the inclusion.
    #[serde(rename_all = "camelCase")]
    IndicatorGrid { grid: Vec<Vec<bool>> },
}

impl UnitCellGeometry {
    pub fn disk(radius: f64) -> Self {
        UnitCellGeometry::DiskInclusion { radius }
    }

    pub fn laminate(layer_fraction: f64) -> Self {
        UnitCellGeometry::Laminate { layer_fraction }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            UnitCellGeometry::DiskInclusion { radius } => {
                if !(*radius > 0.0 && *radius < 0.5) {
                    return Err(Error::InvalidGeometry(format!("disk radius {radius} outside (0, 0.5)")));
                }
            }
            UnitCellGeometry::Laminate { layer_fraction } => {
                if !(*layer_fraction > 0.0 && *layer_fraction < 1.0) {
                    return Err(Error::InvalidGeometry(format!("layer fraction {layer_fraction} outside (0, 1)")));
                }
            }
            UnitCellGeometry::IndicatorGrid { grid } => {
                let rows = grid.len();
                if rows == 0 || grid[0].is_empty() {
                    return Err(Error::InvalidGeometry("indicator grid is empty".into()));
                }
                let cols = grid[0].len();
                if grid.iter().any(|r| r.len() != cols) {
                    return Err(Error::InvalidGeometry("indicator grid is ragged".into()));
                }
                let any_true = grid.iter().flatten().any(|&b| b);
                let any_false = grid.iter().flatten().any(|&b| !b);
                if !(any_true && any_false) {
                    return Err(Error::InvalidGeometry(
                        "indicator grid needs at least one inclusion and one matrix pixel".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Whether the point `y` of the unit cell lies in the inclusion `Y_s`.
    pub fn contains(&self, y: [f64; 2]) -> bool {
        match self {
            UnitCellGeometry::DiskInclusion { radius } => {
                let dx = y[0] - 0.5;
                let dy = y[1] - 0.5;
                dx * dx + dy * dy < radius * radius
            }
            UnitCellGeometry::Laminate { layer_fraction } => y[0] < *layer_fraction,
            UnitCellGeometry::IndicatorGrid { grid } => {
                let rows = grid.len();
                let cols = grid[0].len();
                let col = ((y[0] * cols as f64).floor() as usize).min(cols - 1);
                let row = ((y[1] * rows as f64).floor() as usize).min(rows - 1);
                grid[row][col]
            }
        }
    }

    /// Exact measure of `Y_s`.
    pub fn inclusion_fraction(&self) -> f64 {
        match self {
            UnitCellGeometry::DiskInclusion { radius } => std::f64::consts::PI * radius * radius,
            UnitCellGeometry::Laminate { layer_fraction } => *layer_fraction,
            UnitCellGeometry::IndicatorGrid { grid } => {
                let total = grid.iter().map(Vec::len).sum::<usize>();
                let inside = grid.iter().flatten().filter(|&&b| b).count();
                inside as f64 / total as f64
            }
        }
    }
}

/// Uniform `n x n` grid of axis-aligned square Q1 elements.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredMesh {
    n: usize,
    origin: [f64; 2],
    length: f64,
    h: f64,
    nodes: Vec<[f64; 2]>,
    elements: Vec<[usize; 4]>,
    phases: Vec<Phase>,
}

impl StructuredMesh {
    /// Builds the grid over `origin + [0, length]^2` and labels every element
    /// with `phase_of(centroid)`.
    pub fn new(
        origin: [f64; 2],
        length: f64,
        n: usize,
        mut phase_of: impl FnMut(usize, usize, [f64; 2]) -> Phase,
    ) -> Result<Self> {
        if n < MIN_CELLS {
            return Err(Error::MeshTooCoarse { n, min: MIN_CELLS });
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidGeometry(format!("edge length {length} must be positive")));
        }
        let h = length / n as f64;
        let coord = |k: usize| {
            if k == n {
                length
            } else {
                k as f64 * h
            }
        };
        let mut nodes = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                nodes.push([origin[0] + coord(i), origin[1] + coord(j)]);
            }
        }
        let mut elements = Vec::with_capacity(n * n);
        let mut phases = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                let ll = i + j * (n + 1);
                elements.push([ll, ll + 1, ll + n + 2, ll + n + 1]);
                let c = [origin[0] + (i as f64 + 0.5) * h, origin[1] + (j as f64 + 0.5) * h];
                phases.push(phase_of(i, j, c));
            }
        }
        Ok(StructuredMesh { n, origin, length, h, nodes, elements, phases })
    }

    pub fn cells_per_side(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub fn edge_length(&self) -> f64 {
        self.length
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn elements(&self) -> &[[usize; 4]] {
        &self.elements
    }

    pub fn phases(&self) -> &[Phase] {
        &self.phases
    }

    pub fn phase(&self, element: usize) -> Phase {
        self.phases[element]
    }

    pub fn node(&self, i: usize, j: usize) -> usize {
        i + j * (self.n + 1)
    }

    /// Lower-left corner of an element.
    pub fn element_origin(&self, element: usize) -> [f64; 2] {
        self.nodes[self.elements[element][0]]
    }

    pub fn element_area(&self) -> f64 {
        self.h * self.h
    }

    pub fn is_boundary_node(&self, node: usize) -> bool {
        let n = self.n;
        let (i, j) = (node % (n + 1), node / (n + 1));
        i == 0 || j == 0 || i == n || j == n
    }

    pub fn boundary_nodes(&self) -> Vec<usize> {
        (0..self.node_count()).filter(|&k| self.is_boundary_node(k)).collect()
    }

    /// Total area of the elements carrying `phase`.
    pub fn phase_area(&self, phase: Phase) -> f64 {
        self.phases.iter().filter(|&&p| p == phase).count() as f64 * self.element_area()
    }

    pub fn total_area(&self) -> f64 {
        self.element_count() as f64 * self.element_area()
    }

    pub fn is_unit_cell(&self) -> bool {
        self.origin == [0.0, 0.0] && self.length == 1.0
    }

    /// Locates the element containing `x` and the reference coordinates of
    /// `x` inside it (in `[-1, 1]^2`). Points outside are clamped.
    pub fn locate(&self, x: [f64; 2]) -> (usize, [f64; 2]) {
        let n = self.n;
        let mut idx = [0usize; 2];
        let mut xi = [0.0; 2];
        for d in 0..2 {
            let t = (x[d] - self.origin[d]) / self.h;
            let k = (t.floor().max(0.0) as usize).min(n - 1);
            idx[d] = k;
            xi[d] = (2.0 * (t - k as f64) - 1.0).clamp(-1.0, 1.0);
        }
        (idx[0] + idx[1] * n, xi)
    }

    /// Mesh with identical node layout and different phase labels.
    pub fn with_phases(&self, phases: Vec<Phase>) -> Result<Self> {
        if phases.len() != self.element_count() {
            return Err(Error::MeshMismatch);
        }
        Ok(StructuredMesh { phases, ..self.clone() })
    }

    pub fn same_layout(&self, other: &StructuredMesh) -> bool {
        self.n == other.n && self.origin == other.origin && self.length == other.length
    }
}

/// Meshes the unit cell and labels elements by the centroid rule.
pub fn build_unit_cell_mesh(geometry: &UnitCellGeometry, n: usize) -> Result<StructuredMesh> {
    geometry.validate()?;
    StructuredMesh::new(
        [0.0, 0.0],
        1.0,
        n,
        |_, _, c| {
            if geometry.contains(c) {
                Phase::Inclusion
            } else {
                Phase::Matrix
            }
        },
    )
}

/// Meshes `[0, edge_length]^2`; every element is labelled `Matrix`.
pub fn build_macro_mesh(edge_length: f64, n: usize) -> Result<StructuredMesh> {
    StructuredMesh::new([0.0, 0.0], edge_length, n, |_, _, _| Phase::Matrix)
}

/// Identification of opposite faces of a unit-cell mesh.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodicMap {
    master_of: Vec<usize>,
    reduced_index: Vec<usize>,
    reduced_count: usize,
    interior_count: usize,
}

impl PeriodicMap {
    /// Master node of every node; masters map to themselves.
    pub fn master_of(&self) -> &[usize] {
        &self.master_of
    }

    pub fn master(&self, node: usize) -> usize {
        self.master_of[node]
    }

    pub fn is_master(&self, node: usize) -> bool {
        self.master_of[node] == node
    }

    /// Index of the node's periodic class in `0..reduced_count()`.
    pub fn reduced_index(&self, node: usize) -> usize {
        self.reduced_index[node]
    }

    pub fn reduced_count(&self) -> usize {
        self.reduced_count
    }

    pub fn interior_count(&self) -> usize {
        self.interior_count
    }

    /// Slave-to-master pairs.
    pub fn slaves(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.master_of.iter().enumerate().filter(|(s, m)| s != *m).map(|(s, &m)| (s, m))
    }
}

/// Maps nodes on the right and top faces to their images on the left and
/// bottom faces; all four corners end up on node 0.
pub fn build_periodic_map(mesh: &StructuredMesh) -> Result<PeriodicMap> {
    if !mesh.is_unit_cell() {
        return Err(Error::NonUnitCell);
    }
    let n = mesh.cells_per_side();
    let mut master_of = Vec::with_capacity(mesh.node_count());
    for j in 0..=n {
        for i in 0..=n {
            master_of.push(mesh.node(i % n, j % n));
        }
    }
    let mut reduced_index = vec![usize::MAX; master_of.len()];
    let mut reduced_count = 0;
    for node in 0..master_of.len() {
        if master_of[node] == node {
            reduced_index[node] = reduced_count;
            reduced_count += 1;
        }
    }
    for node in 0..master_of.len() {
        reduced_index[node] = reduced_index[master_of[node]];
    }
    let interior_count = (0..mesh.node_count()).filter(|&k| !mesh.is_boundary_node(k)).count();
    Ok(PeriodicMap { master_of, reduced_index, reduced_count, interior_count })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_area_fraction_close_to_exact() {
        let mesh = build_unit_cell_mesh(&UnitCellGeometry::disk(0.25), 64).unwrap();
        // brute-force centroid count
        let mut count = 0;
        for j in 0..64 {
            for i in 0..64 {
                let x = (i as f64 + 0.5) / 64.0 - 0.5;
                let y = (j as f64 + 0.5) / 64.0 - 0.5;
                if x * x + y * y < 0.0625 {
                    count += 1;
                }
            }
        }
        let frac = mesh.phase_area(Phase::Inclusion);
        assert_eq!(frac, count as f64 / 4096.0);
        assert!((frac - 0.196_349_540_849_362_08).abs() < 2.0 / 64.0);
    }

    #[test]
    fn laminate_half_has_32_inclusion_elements() {
        let mesh = build_unit_cell_mesh(&UnitCellGeometry::laminate(0.5), 8).unwrap();
        let count = mesh.phases().iter().filter(|&&p| p == Phase::Inclusion).count();
        assert_eq!(count, 32);
        for (e, p) in mesh.phases().iter().enumerate() {
            assert_eq!(*p == Phase::Inclusion, e % 8 < 4);
        }
    }

    #[test]
    fn indicator_grid_copies_labels() {
        let mut grid = vec![vec![false; 8]; 8];
        grid[2][5] = true;
        let mesh = build_unit_cell_mesh(&UnitCellGeometry::IndicatorGrid { grid }, 8).unwrap();
        let inc: Vec<_> = (0..64).filter(|&e| mesh.phase(e) == Phase::Inclusion).collect();
        assert_eq!(inc, vec![5 + 2 * 8]);
    }

    #[test]
    fn geometry_errors() {
        assert!(matches!(build_unit_cell_mesh(&UnitCellGeometry::disk(0.6), 8), Err(Error::InvalidGeometry(_))));
        assert!(matches!(build_unit_cell_mesh(&UnitCellGeometry::laminate(1.0), 8), Err(Error::InvalidGeometry(_))));
        assert!(matches!(
            build_unit_cell_mesh(&UnitCellGeometry::IndicatorGrid { grid: vec![vec![true; 2]; 2] }, 8),
            Err(Error::InvalidGeometry(_))
        ));
        assert!(matches!(
            build_unit_cell_mesh(&UnitCellGeometry::disk(0.25), 3),
            Err(Error::MeshTooCoarse { n: 3, .. })
        ));
    }

    #[test]
    fn macro_mesh_counts_and_scaling() {
        let m = build_macro_mesh(1.0, 4).unwrap();
        assert_eq!(m.node_count(), 25);
        assert_eq!(m.element_count(), 16);
        assert_eq!(build_macro_mesh(1.0, 16).unwrap().spacing(), 0.0625);
        let m = build_macro_mesh(2.0, 8).unwrap();
        let max = m.nodes().iter().fold([0.0f64; 2], |a, p| [a[0].max(p[0]), a[1].max(p[1])]);
        assert_eq!(max, [2.0, 2.0]);
        assert_eq!(m.nodes()[0], [0.0, 0.0]);
        assert!(m.phases().iter().all(|&p| p == Phase::Matrix));
        assert!(matches!(build_macro_mesh(1.0, 2), Err(Error::MeshTooCoarse { .. })));
    }

    #[test]
    fn element_areas_sum_to_domain_area() {
        for (l, n) in [(1.0, 7), (2.5, 16), (0.3, 9)] {
            let m = build_macro_mesh(l, n).unwrap();
            let total: f64 = m
                .elements()
                .iter()
                .map(|e| {
                    let a = m.nodes()[e[0]];
                    let c = m.nodes()[e[2]];
                    assert!(c[0] > a[0] && c[1] > a[1]);
                    (c[0] - a[0]) * (c[1] - a[1])
                })
                .sum();
            assert!((total - l * l).abs() <= 1e-12 * l * l);
        }
    }

    #[test]
    fn periodic_map_reduces_to_n_squared() {
        let mesh = build_unit_cell_mesh(&UnitCellGeometry::disk(0.25), 4).unwrap();
        let map = build_periodic_map(&mesh).unwrap();
        assert_eq!(mesh.node_count(), 25);
        assert_eq!(map.reduced_count(), 16);
        let corners = [mesh.node(0, 0), mesh.node(4, 0), mesh.node(0, 4), mesh.node(4, 4)];
        assert!(corners.iter().all(|&c| map.master(c) == corners[0]));
    }

    #[test]
    fn periodic_map_corner_identification_small_grid() {
        // n = 2 is below the meshing minimum; build the grid directly.
        let mesh = StructuredMesh {
            n: 2,
            origin: [0.0, 0.0],
            length: 1.0,
            h: 0.5,
            nodes: (0..9).map(|k| [(k % 3) as f64 * 0.5, (k / 3) as f64 * 0.5]).collect(),
            elements: vec![],
            phases: vec![],
        };
        let map = build_periodic_map(&mesh).unwrap();
        for c in [0, 2, 6, 8] {
            assert_eq!(map.master(c), 0);
        }
        assert_eq!(map.reduced_count(), 4);
    }

    #[test]
    fn periodic_map_idempotent_and_interior_untouched() {
        let mesh = build_unit_cell_mesh(&UnitCellGeometry::disk(0.2), 8).unwrap();
        let map = build_periodic_map(&mesh).unwrap();
        for k in 0..mesh.node_count() {
            assert_eq!(map.master(map.master(k)), map.master(k));
            if !mesh.is_boundary_node(k) {
                assert_eq!(map.master(k), k);
            }
        }
        assert_eq!(map.interior_count(), 49);
    }

    #[test]
    fn periodic_map_rejects_macro_domain() {
        let mesh = build_macro_mesh(2.0, 8).unwrap();
        assert!(matches!(build_periodic_map(&mesh), Err(Error::NonUnitCell)));
    }

    #[test]
    fn area_fraction_error_shrinks_under_refinement() {
        for geom in [UnitCellGeometry::disk(0.25), UnitCellGeometry::laminate(0.3)] {
            let exact = geom.inclusion_fraction();
            let mut prev = f64::INFINITY;
            for n in [8, 16, 32, 64, 128] {
                let mesh = build_unit_cell_mesh(&geom, n).unwrap();
                let err = (mesh.phase_area(Phase::Inclusion) - exact).abs();
                assert!(err <= prev + 1e-15, "n={n}: {err} > {prev}");
                prev = err;
            }
        }
    }

    #[test]
    fn locate_finds_containing_element() {
        let mesh = build_macro_mesh(2.0, 8).unwrap();
        let (e, xi) = mesh.locate([0.3, 1.1]);
        assert_eq!(e, 1 + 4 * 8);
        assert!((xi[0] - (2.0 * (0.3 / 0.25 - 1.0) - 1.0)).abs() < 1e-12);
        assert!((xi[1] - (2.0 * (1.1 / 0.25 - 4.0) - 1.0)).abs() < 1e-12);
    }
}
