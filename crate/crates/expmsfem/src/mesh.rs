//! Two-level tensor-product meshes of the unit square.
//!
//! A coarse `nc x nc` quadrilateral mesh is refined `refine x refine`-fold
//! into the fine mesh that carries all assembly. Coarse objects (nodes,
//! edges, elements) index the multiscale skeleton; fine objects
//! (nodes, cells) index the Q1 space. Everything is lexicographically
//! ordered: x fastest, then y, which keeps all restricted systems banded.

use crate::error::{Error, Result};

/// Coarse mesh node, id = `ny * (nc + 1) + nx`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CoarseNodeId(pub usize);

/// Coarse edge; horizontal edges come first (row-major by (ny, nx)), then
/// vertical edges (row-major by (ny, nx)).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub usize);

/// Coarse element, id = `ey * nc + ex`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ElemId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Horizontal,
    Vertical,
}

/// Sides of the unit square in the fixed order bottom, right, top, left.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Bottom,
    Right,
    Top,
    Left,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Bottom, Side::Right, Side::Top, Side::Left];

    fn index(self) -> usize {
        match self {
            Side::Bottom => 0,
            Side::Right => 1,
            Side::Top => 2,
            Side::Left => 3,
        }
    }
}

/// Boundary condition attached to one side of the square.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcSide {
    Dirichlet,
    Neumann,
    Robin,
}

/// Supported boundary layouts. `Mixed` is the Helmholtz layout: Dirichlet
/// on the bottom, Neumann on the top, Robin on the left and right sides.
/// `AllNeumann` exists for interpolation and norm tests; solving with it
/// requires a zeroth-order term to stay invertible.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcLayout {
    AllDirichlet,
    AllNeumann,
    Mixed,
}

impl BcLayout {
    pub fn sides(self) -> [BcSide; 4] {
        match self {
            BcLayout::AllDirichlet => [BcSide::Dirichlet; 4],
            BcLayout::AllNeumann => [BcSide::Neumann; 4],
            BcLayout::Mixed => [
                BcSide::Dirichlet,
                BcSide::Robin,
                BcSide::Neumann,
                BcSide::Robin,
            ],
        }
    }

    pub fn has_robin(self) -> bool {
        self.sides().contains(&BcSide::Robin)
    }
}

/// One coarse edge with its lattice position and boundary status.
#[derive(Debug, Clone, Copy)]
pub struct CoarseEdge {
    pub orientation: Orientation,
    /// Lattice coordinates of the lower/left endpoint.
    pub nx: usize,
    pub ny: usize,
    /// Side of the square the edge lies in, when it does.
    pub on_side: Option<Side>,
}

impl CoarseEdge {
    pub fn is_interior(&self) -> bool {
        self.on_side.is_none()
    }
}

/// Half-open rectangle of fine cells `x0..x1` by `y0..y1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellRect {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl CellRect {
    pub fn nx(&self) -> usize {
        self.x1 - self.x0
    }

    pub fn ny(&self) -> usize {
        self.y1 - self.y0
    }

    pub fn n_cells(&self) -> usize {
        self.nx() * self.ny()
    }

    /// Number of fine nodes of the closed rectangle.
    pub fn n_nodes(&self) -> usize {
        (self.nx() + 1) * (self.ny() + 1)
    }

    pub fn contains_cell(&self, cx: usize, cy: usize) -> bool {
        cx >= self.x0 && cx < self.x1 && cy >= self.y0 && cy < self.y1
    }

    pub fn contains_node(&self, ix: usize, iy: usize) -> bool {
        ix >= self.x0 && ix <= self.x1 && iy >= self.y0 && iy <= self.y1
    }

    /// Local node index of the fine node `(ix, iy)` (must be inside).
    pub fn local_node(&self, ix: usize, iy: usize) -> usize {
        debug_assert!(self.contains_node(ix, iy));
        (iy - self.y0) * (self.nx() + 1) + (ix - self.x0)
    }

    /// Inverse of [`Self::local_node`].
    pub fn node_xy(&self, local: usize) -> (usize, usize) {
        let w = self.nx() + 1;
        (self.x0 + local % w, self.y0 + local / w)
    }

    /// True when `(ix, iy)` lies on the rectangle's perimeter.
    pub fn on_perimeter(&self, ix: usize, iy: usize) -> bool {
        debug_assert!(self.contains_node(ix, iy));
        ix == self.x0 || ix == self.x1 || iy == self.y0 || iy == self.y1
    }

    /// Cells common to both rectangles, if any.
    pub fn intersect(&self, other: &CellRect) -> Option<CellRect> {
        let r = CellRect {
            x0: self.x0.max(other.x0),
            y0: self.y0.max(other.y0),
            x1: self.x1.min(other.x1),
            y1: self.y1.min(other.y1),
        };
        (r.x0 < r.x1 && r.y0 < r.y1).then_some(r)
    }
}

/// Half-open rectangle of coarse elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoarseRect {
    pub ex0: usize,
    pub ey0: usize,
    pub ex1: usize,
    pub ey1: usize,
}

impl CoarseRect {
    pub fn to_fine(&self, refine: usize) -> CellRect {
        CellRect {
            x0: self.ex0 * refine,
            y0: self.ey0 * refine,
            x1: self.ex1 * refine,
            y1: self.ey1 * refine,
        }
    }

    pub fn n_elements(&self) -> usize {
        (self.ex1 - self.ex0) * (self.ey1 - self.ey0)
    }

    pub fn elements(&self, nc: usize) -> Vec<ElemId> {
        let mut out = Vec::with_capacity(self.n_elements());
        for ey in self.ey0..self.ey1 {
            for ex in self.ex0..self.ex1 {
                out.push(ElemId(ey * nc + ex));
            }
        }
        out
    }
}

/// Fine boundary segment on a Robin side, with the midpoint where the Robin
/// coefficient is sampled.
#[derive(Debug, Clone, Copy)]
pub struct RobinSegment {
    pub nodes: [usize; 2],
    pub midpoint: (f64, f64),
    /// The unique fine cell whose boundary contains the segment; used to
    /// assign segments to patch rectangles without double counting.
    pub cell: (usize, usize),
}

/// Classification of the fine boundary induced by a [`BcLayout`]: which
/// fine nodes are constrained (Dirichlet) and which sides carry Robin terms.
/// A corner node is Dirichlet as soon as either of its sides is.
#[derive(Debug, Clone)]
pub struct BoundaryMap {
    sides: [BcSide; 4],
    dirichlet_fine: Vec<bool>,
}

impl BoundaryMap {
    pub fn side(&self, s: Side) -> BcSide {
        self.sides[s.index()]
    }

    pub fn is_dirichlet(&self, fine_node: usize) -> bool {
        self.dirichlet_fine[fine_node]
    }

    pub fn robin_sides(&self) -> impl Iterator<Item = Side> + '_ {
        Side::ALL
            .into_iter()
            .filter(move |s| self.sides[s.index()] == BcSide::Robin)
    }
}

/// The two-level mesh. See the module doc for the indexing conventions.
#[derive(Debug)]
pub struct TwoLevelMesh {
    nc: usize,
    refine: usize,
    n_fine: usize,
    layout: BcLayout,
    oversample_layers: usize,
    edges: Vec<CoarseEdge>,
    boundary: BoundaryMap,
    active_edges: Vec<EdgeId>,
    edge_rank: Vec<Option<usize>>,
    active_nodes: Vec<CoarseNodeId>,
    node_rank: Vec<Option<usize>>,
}

/// Build a mesh with `nc x nc` coarse elements, each refined `refine`-fold,
/// under the given boundary layout. One oversampling layer by default.
pub fn build_mesh(nc: usize, refine: usize, layout: BcLayout) -> Result<TwoLevelMesh> {
    TwoLevelMesh::new(nc, refine, layout, 1)
}

impl TwoLevelMesh {
    pub fn new(
        nc: usize,
        refine: usize,
        layout: BcLayout,
        oversample_layers: usize,
    ) -> Result<TwoLevelMesh> {
        if nc < 2 || refine < 2 {
            return Err(Error::InvalidMeshSizes { nc, refine });
        }
        let n_fine = nc * refine;
        let sides = layout.sides();

        // Fine Dirichlet mask: a node is constrained when any side through
        // it is Dirichlet (corners count for both their sides).
        let mut dirichlet_fine = vec![false; (n_fine + 1) * (n_fine + 1)];
        for i in 0..=n_fine {
            for (side, node) in [
                (Side::Bottom, i),
                (Side::Top, n_fine * (n_fine + 1) + i),
                (Side::Left, i * (n_fine + 1)),
                (Side::Right, i * (n_fine + 1) + n_fine),
            ] {
                if sides[side.index()] == BcSide::Dirichlet {
                    dirichlet_fine[node] = true;
                }
            }
        }
        let boundary = BoundaryMap {
            sides,
            dirichlet_fine,
        };

        // Coarse edges: horizontal block first, then vertical.
        let mut edges = Vec::with_capacity(2 * nc * (nc + 1));
        for ny in 0..=nc {
            for nx in 0..nc {
                let on_side = match ny {
                    0 => Some(Side::Bottom),
                    _ if ny == nc => Some(Side::Top),
                    _ => None,
                };
                edges.push(CoarseEdge {
                    orientation: Orientation::Horizontal,
                    nx,
                    ny,
                    on_side,
                });
            }
        }
        for ny in 0..nc {
            for nx in 0..=nc {
                let on_side = match nx {
                    0 => Some(Side::Left),
                    _ if nx == nc => Some(Side::Right),
                    _ => None,
                };
                edges.push(CoarseEdge {
                    orientation: Orientation::Vertical,
                    nx,
                    ny,
                    on_side,
                });
            }
        }

        let active_edges: Vec<EdgeId> = edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.is_interior())
            .map(|(i, _)| EdgeId(i))
            .collect();
        let mut edge_rank = vec![None; edges.len()];
        for (r, e) in active_edges.iter().enumerate() {
            edge_rank[e.0] = Some(r);
        }

        let mut mesh = TwoLevelMesh {
            nc,
            refine,
            n_fine,
            layout,
            oversample_layers,
            edges,
            boundary,
            active_edges,
            edge_rank,
            active_nodes: Vec::new(),
            node_rank: Vec::new(),
        };

        // Active coarse nodes: endpoints of interior edges that are not
        // Dirichlet-constrained. Row-major order by construction.
        let mut is_endpoint = vec![false; (nc + 1) * (nc + 1)];
        for &e in &mesh.active_edges {
            for p in mesh.edge_endpoints(e) {
                is_endpoint[p.0] = true;
            }
        }
        let mut active_nodes = Vec::new();
        let mut node_rank = vec![None; (nc + 1) * (nc + 1)];
        for id in 0..(nc + 1) * (nc + 1) {
            let fine = mesh.coarse_node_fine(CoarseNodeId(id));
            if is_endpoint[id] && !mesh.boundary.is_dirichlet(fine) {
                node_rank[id] = Some(active_nodes.len());
                active_nodes.push(CoarseNodeId(id));
            }
        }
        mesh.active_nodes = active_nodes;
        mesh.node_rank = node_rank;
        Ok(mesh)
    }

    pub fn nc(&self) -> usize {
        self.nc
    }

    pub fn refine(&self) -> usize {
        self.refine
    }

    /// Fine cells per side of the square.
    pub fn n_fine(&self) -> usize {
        self.n_fine
    }

    pub fn layout(&self) -> BcLayout {
        self.layout
    }

    pub fn boundary(&self) -> &BoundaryMap {
        &self.boundary
    }

    /// Coarse mesh size `H = 1/nc`.
    pub fn coarse_h(&self) -> f64 {
        1.0 / self.nc as f64
    }

    /// Fine mesh size `h = 1/(nc * refine)`.
    pub fn fine_h(&self) -> f64 {
        1.0 / self.n_fine as f64
    }

    // ---- fine grid ----

    pub fn n_fine_nodes(&self) -> usize {
        (self.n_fine + 1) * (self.n_fine + 1)
    }

    pub fn fine_node(&self, ix: usize, iy: usize) -> usize {
        debug_assert!(ix <= self.n_fine && iy <= self.n_fine);
        iy * (self.n_fine + 1) + ix
    }

    pub fn fine_node_xy(&self, id: usize) -> (usize, usize) {
        (id % (self.n_fine + 1), id / (self.n_fine + 1))
    }

    pub fn fine_node_coords(&self, id: usize) -> (f64, f64) {
        let (ix, iy) = self.fine_node_xy(id);
        let h = self.fine_h();
        (ix as f64 * h, iy as f64 * h)
    }

    pub fn n_fine_cells(&self) -> usize {
        self.n_fine * self.n_fine
    }

    pub fn fine_cell(&self, cx: usize, cy: usize) -> usize {
        debug_assert!(cx < self.n_fine && cy < self.n_fine);
        cy * self.n_fine + cx
    }

    pub fn cell_center(&self, cx: usize, cy: usize) -> (f64, f64) {
        let h = self.fine_h();
        ((cx as f64 + 0.5) * h, (cy as f64 + 0.5) * h)
    }

    /// The whole fine grid as a cell rectangle.
    pub fn full_rect(&self) -> CellRect {
        CellRect {
            x0: 0,
            y0: 0,
            x1: self.n_fine,
            y1: self.n_fine,
        }
    }

    /// True for fine nodes on the boundary of the square.
    pub fn on_domain_boundary(&self, fine_node: usize) -> bool {
        let (ix, iy) = self.fine_node_xy(fine_node);
        ix == 0 || ix == self.n_fine || iy == 0 || iy == self.n_fine
    }

    // ---- coarse nodes ----

    pub fn n_coarse_nodes(&self) -> usize {
        (self.nc + 1) * (self.nc + 1)
    }

    pub fn coarse_node(&self, nx: usize, ny: usize) -> CoarseNodeId {
        debug_assert!(nx <= self.nc && ny <= self.nc);
        CoarseNodeId(ny * (self.nc + 1) + nx)
    }

    pub fn coarse_node_xy(&self, id: CoarseNodeId) -> (usize, usize) {
        (id.0 % (self.nc + 1), id.0 / (self.nc + 1))
    }

    /// Fine node underneath a coarse node.
    pub fn coarse_node_fine(&self, id: CoarseNodeId) -> usize {
        let (nx, ny) = self.coarse_node_xy(id);
        self.fine_node(nx * self.refine, ny * self.refine)
    }

    pub fn active_nodes(&self) -> &[CoarseNodeId] {
        &self.active_nodes
    }

    /// Rank of a coarse node among the active ones, if it is active.
    pub fn node_rank(&self, id: CoarseNodeId) -> Option<usize> {
        self.node_rank[id.0]
    }

    // ---- elements ----

    pub fn n_elements(&self) -> usize {
        self.nc * self.nc
    }

    pub fn element(&self, ex: usize, ey: usize) -> ElemId {
        debug_assert!(ex < self.nc && ey < self.nc);
        ElemId(ey * self.nc + ex)
    }

    pub fn element_xy(&self, id: ElemId) -> (usize, usize) {
        (id.0 % self.nc, id.0 / self.nc)
    }

    pub fn element_rect(&self, id: ElemId) -> CellRect {
        let (ex, ey) = self.element_xy(id);
        CoarseRect {
            ex0: ex,
            ey0: ey,
            ex1: ex + 1,
            ey1: ey + 1,
        }
        .to_fine(self.refine)
    }

    /// Corner nodes in the order (SW, SE, NE, NW).
    pub fn element_nodes(&self, id: ElemId) -> [CoarseNodeId; 4] {
        let (ex, ey) = self.element_xy(id);
        [
            self.coarse_node(ex, ey),
            self.coarse_node(ex + 1, ey),
            self.coarse_node(ex + 1, ey + 1),
            self.coarse_node(ex, ey + 1),
        ]
    }

    /// Edges in the order (bottom, right, top, left).
    pub fn element_edges(&self, id: ElemId) -> [EdgeId; 4] {
        let (ex, ey) = self.element_xy(id);
        [
            self.horizontal_edge(ex, ey),
            self.vertical_edge(ex + 1, ey),
            self.horizontal_edge(ex, ey + 1),
            self.vertical_edge(ex, ey),
        ]
    }

    // ---- edges ----

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn horizontal_edge(&self, nx: usize, ny: usize) -> EdgeId {
        debug_assert!(nx < self.nc && ny <= self.nc);
        EdgeId(ny * self.nc + nx)
    }

    pub fn vertical_edge(&self, nx: usize, ny: usize) -> EdgeId {
        debug_assert!(nx <= self.nc && ny < self.nc);
        EdgeId(self.nc * (self.nc + 1) + ny * (self.nc + 1) + nx)
    }

    pub fn edge(&self, id: EdgeId) -> Result<&CoarseEdge> {
        self.edges.get(id.0).ok_or(Error::EdgeOutOfRange {
            index: id.0,
            count: self.edges.len(),
        })
    }

    pub fn edge_endpoints(&self, id: EdgeId) -> [CoarseNodeId; 2] {
        let e = &self.edges[id.0];
        match e.orientation {
            Orientation::Horizontal => [
                self.coarse_node(e.nx, e.ny),
                self.coarse_node(e.nx + 1, e.ny),
            ],
            Orientation::Vertical => [
                self.coarse_node(e.nx, e.ny),
                self.coarse_node(e.nx, e.ny + 1),
            ],
        }
    }

    /// Elements whose closure contains the edge (two for interior edges,
    /// one for boundary edges).
    pub fn edge_elements(&self, id: EdgeId) -> Vec<ElemId> {
        let e = &self.edges[id.0];
        let mut out = Vec::with_capacity(2);
        match e.orientation {
            Orientation::Horizontal => {
                if e.ny > 0 {
                    out.push(self.element(e.nx, e.ny - 1));
                }
                if e.ny < self.nc {
                    out.push(self.element(e.nx, e.ny));
                }
            }
            Orientation::Vertical => {
                if e.nx > 0 {
                    out.push(self.element(e.nx - 1, e.ny));
                }
                if e.nx < self.nc {
                    out.push(self.element(e.nx, e.ny));
                }
            }
        }
        out
    }

    /// Interior edges incident to a coarse node, in ascending id order.
    pub fn node_interior_edges(&self, id: CoarseNodeId) -> Vec<EdgeId> {
        let (nx, ny) = self.coarse_node_xy(id);
        let mut out = Vec::with_capacity(4);
        if nx > 0 {
            out.push(self.horizontal_edge(nx - 1, ny));
        }
        if nx < self.nc {
            out.push(self.horizontal_edge(nx, ny));
        }
        if ny > 0 {
            out.push(self.vertical_edge(nx, ny - 1));
        }
        if ny < self.nc {
            out.push(self.vertical_edge(nx, ny));
        }
        out.retain(|&e| self.edges[e.0].is_interior());
        out.sort();
        out
    }

    /// Interior edges, ascending id (horizontal block before vertical).
    pub fn active_edges(&self) -> &[EdgeId] {
        &self.active_edges
    }

    /// Rank of an edge among the active ones, if interior.
    pub fn edge_rank(&self, id: EdgeId) -> Option<usize> {
        self.edge_rank[id.0]
    }

    /// Oversampling domain of an interior edge: the elements whose closure
    /// meets the edge, grown by `oversample_layers - 1` extra element rings
    /// and clipped to the square. Always a rectangle on tensor meshes.
    pub fn oversampling_domain(&self, id: EdgeId) -> Result<CoarseRect> {
        let e = *self.edge(id)?;
        if !e.is_interior() {
            return Err(Error::BoundaryEdge { index: id.0 });
        }
        let l = self.oversample_layers;
        let (nx, ny, nc) = (e.nx as isize, e.ny as isize, self.nc as isize);
        let l = l as isize;
        let (x0, x1, y0, y1) = match e.orientation {
            Orientation::Horizontal => (nx - l, nx + 1 + l, ny - l, ny + l),
            Orientation::Vertical => (nx - l, nx + l, ny - l, ny + 1 + l),
        };
        Ok(CoarseRect {
            ex0: x0.clamp(0, nc) as usize,
            ey0: y0.clamp(0, nc) as usize,
            ex1: x1.clamp(0, nc) as usize,
            ey1: y1.clamp(0, nc) as usize,
        })
    }

    /// Fine nodes along a coarse edge in ascending coordinate order
    /// (`refine + 1` of them), with the Dirichlet status of both endpoints.
    pub fn edge_trace_nodes(&self, id: EdgeId) -> Result<EdgeTrace> {
        let e = *self.edge(id)?;
        let r = self.refine;
        let mut fine_nodes = Vec::with_capacity(r + 1);
        match e.orientation {
            Orientation::Horizontal => {
                let iy = e.ny * r;
                for i in 0..=r {
                    fine_nodes.push(self.fine_node(e.nx * r + i, iy));
                }
            }
            Orientation::Vertical => {
                let ix = e.nx * r;
                for i in 0..=r {
                    fine_nodes.push(self.fine_node(ix, e.ny * r + i));
                }
            }
        }
        let endpoint_dirichlet = [
            self.boundary.is_dirichlet(fine_nodes[0]),
            self.boundary.is_dirichlet(fine_nodes[r]),
        ];
        Ok(EdgeTrace {
            fine_nodes,
            endpoint_dirichlet,
        })
    }

    /// Where a fine node sits on the coarse skeleton, if anywhere.
    pub fn skeleton_locate(&self, fine_node: usize) -> Option<SkelLoc> {
        let (ix, iy) = self.fine_node_xy(fine_node);
        let r = self.refine;
        match (ix % r == 0, iy % r == 0) {
            (true, true) => Some(SkelLoc::Node(self.coarse_node(ix / r, iy / r))),
            (false, true) => Some(SkelLoc::Edge(self.horizontal_edge(ix / r, iy / r), ix % r)),
            (true, false) => Some(SkelLoc::Edge(self.vertical_edge(ix / r, iy / r), iy % r)),
            (false, false) => None,
        }
    }

    /// Robin-side fine boundary segments whose carrying cell lies in `rect`.
    pub fn robin_segments_in(&self, rect: &CellRect) -> Vec<RobinSegment> {
        let mut out = Vec::new();
        if !self.layout.has_robin() {
            return out;
        }
        let n = self.n_fine;
        let h = self.fine_h();
        for side in self.boundary.robin_sides() {
            for i in 0..n {
                let (nodes, cell, midpoint) = match side {
                    Side::Bottom => (
                        [self.fine_node(i, 0), self.fine_node(i + 1, 0)],
                        (i, 0),
                        ((i as f64 + 0.5) * h, 0.0),
                    ),
                    Side::Top => (
                        [self.fine_node(i, n), self.fine_node(i + 1, n)],
                        (i, n - 1),
                        ((i as f64 + 0.5) * h, 1.0),
                    ),
                    Side::Left => (
                        [self.fine_node(0, i), self.fine_node(0, i + 1)],
                        (0, i),
                        (0.0, (i as f64 + 0.5) * h),
                    ),
                    Side::Right => (
                        [self.fine_node(n, i), self.fine_node(n, i + 1)],
                        (n - 1, i),
                        (1.0, (i as f64 + 0.5) * h),
                    ),
                };
                if rect.contains_cell(cell.0, cell.1) {
                    out.push(RobinSegment {
                        nodes,
                        midpoint,
                        cell,
                    });
                }
            }
        }
        out
    }
}

/// Position of a fine node on the coarse skeleton: a coarse node, or the
/// `k`-th interior node (1..refine) of a coarse edge counted from its
/// lower-coordinate end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkelLoc {
    Node(CoarseNodeId),
    Edge(EdgeId, usize),
}

/// Trace of a coarse edge on the fine grid.
#[derive(Debug, Clone)]
pub struct EdgeTrace {
    /// All `refine + 1` fine nodes along the edge, ascending coordinate.
    pub fine_nodes: Vec<usize>,
    /// Dirichlet status of the first and last node.
    pub endpoint_dirichlet: [bool; 2],
}

impl EdgeTrace {
    /// The `refine - 1` interior fine nodes.
    pub fn interior(&self) -> &[usize] {
        &self.fine_nodes[1..self.fine_nodes.len() - 1]
    }
}
