//! Periodic L x L grid, its staggered free Hamiltonian, the marked-vertex
//! oracle, and the attractive on-site nonlinearity.
//!
//! The free Hamiltonian acts on a vertex state |v> as
//!
//!   H0 |v> = (-1)^{v_x} (|v+e_x> - |v-e_x>) + (-1)^{v_x+v_y} (|v+e_y> - |v-e_y>)
//!
//! with all coordinates mod L. The alternating signs give a linear (Dirac-like)
//! dispersion instead of the quadratic one of the plain lattice Laplacian,
//! which is what makes spatial search on the 2D grid work at all. H0 is real
//! and symmetric, annihilates the uniform state, and commutes with
//! translations by two sites along either axis, so the grid splits into
//! (L/2)^2 cells of 2 x 2 vertices.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// State norm must stay this close to 1 on construction.
pub const NORM_TOL: f64 = 1e-9;

/// Side length and derived sizes of the periodic grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridSpec {
    side: usize,
}

impl GridSpec {
    /// `side` is L; it must be even (cells are 2 x 2) and at least 4 so the
    /// four neighbors of any vertex are distinct.
    pub fn new(side: usize) -> Result<Self> {
        if side < 4 || side % 2 != 0 {
            return Err(Error::GridSide { side });
        }
        Ok(GridSpec { side })
    }

    /// L
    pub fn side(self) -> usize {
        self.side
    }

    /// N = L^2
    pub fn n_vertices(self) -> usize {
        self.side * self.side
    }

    /// l = L/2
    pub fn cell_side(self) -> usize {
        self.side / 2
    }

    /// n = N/4
    pub fn n_cells(self) -> usize {
        self.cell_side() * self.cell_side()
    }

    /// Row-major index of a vertex, x major.
    pub fn index(self, v: VertexCoord) -> usize {
        debug_assert!(v.x < self.side && v.y < self.side);
        v.x * self.side + v.y
    }

    pub fn vertex_at(self, index: usize) -> VertexCoord {
        debug_assert!(index < self.n_vertices());
        VertexCoord {
            x: index / self.side,
            y: index % self.side,
        }
    }

    fn check_vertex(self, v: VertexCoord) -> Result<()> {
        if v.x >= self.side || v.y >= self.side {
            return Err(Error::VertexOutOfRange {
                x: v.x,
                y: v.y,
                side: self.side,
            });
        }
        Ok(())
    }
}

/// Grid for a given vertex count N = L^2; fails unless L is even and >= 4.
pub fn grid_for_vertex_count(n: usize) -> Result<GridSpec> {
    let side = (n as f64).sqrt().round() as usize;
    if side * side != n {
        return Err(Error::VertexCount { n });
    }
    GridSpec::new(side).map_err(|_| Error::VertexCount { n })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VertexCoord {
    pub x: usize,
    pub y: usize,
}

impl VertexCoord {
    pub fn new(x: usize, y: usize) -> Self {
        VertexCoord { x, y }
    }
}

/// Cell coordinates: cell position r in [0, L/2)^2 plus the offset sigma of
/// the vertex inside its 2 x 2 cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CellCoord {
    pub r: (usize, usize),
    pub sigma: (u8, u8),
}

/// Marked vertex given by its cell and in-cell offset alpha; the vertex
/// coordinates are v = 2r + alpha.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MarkedVertex {
    cell: (usize, usize),
    alpha: (u8, u8),
}

impl MarkedVertex {
    pub fn new(grid: GridSpec, cell: (usize, usize), alpha: (u8, u8)) -> Result<Self> {
        let l = grid.cell_side();
        if cell.0 >= l || cell.1 >= l {
            return Err(Error::CellOutOfRange {
                rx: cell.0,
                ry: cell.1,
                cell_side: l,
            });
        }
        if alpha.0 > 1 || alpha.1 > 1 {
            return Err(Error::CellOffsetOutOfRange {
                sx: alpha.0,
                sy: alpha.1,
            });
        }
        Ok(MarkedVertex { cell, alpha })
    }

    /// Center-most cell with offset (0, 0).
    pub fn centered(grid: GridSpec) -> Self {
        let mid = grid.cell_side() / 2;
        MarkedVertex {
            cell: (mid, mid),
            alpha: (0, 0),
        }
    }

    pub fn cell(self) -> (usize, usize) {
        self.cell
    }

    pub fn alpha(self) -> (u8, u8) {
        self.alpha
    }

    pub fn vertex(self) -> VertexCoord {
        VertexCoord {
            x: 2 * self.cell.0 + self.alpha.0 as usize,
            y: 2 * self.cell.1 + self.alpha.1 as usize,
        }
    }
}

pub fn vertex_to_cell(grid: GridSpec, v: VertexCoord) -> Result<CellCoord> {
    grid.check_vertex(v)?;
    Ok(CellCoord {
        r: (v.x / 2, v.y / 2),
        sigma: ((v.x % 2) as u8, (v.y % 2) as u8),
    })
}

pub fn cell_to_vertex(grid: GridSpec, c: CellCoord) -> Result<VertexCoord> {
    let l = grid.cell_side();
    if c.r.0 >= l || c.r.1 >= l {
        return Err(Error::CellOutOfRange {
            rx: c.r.0,
            ry: c.r.1,
            cell_side: l,
        });
    }
    if c.sigma.0 > 1 || c.sigma.1 > 1 {
        return Err(Error::CellOffsetOutOfRange {
            sx: c.sigma.0,
            sy: c.sigma.1,
        });
    }
    Ok(VertexCoord {
        x: 2 * c.r.0 + c.sigma.0 as usize,
        y: 2 * c.r.1 + c.sigma.1 as usize,
    })
}

/// Normalized amplitude vector over the vertices of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkerState {
    grid: GridSpec,
    amps: Vec<Complex64>,
}

impl WalkerState {
    /// Wraps raw amplitudes; the vector must have length N and unit norm
    /// within `NORM_TOL`.
    pub fn from_amplitudes(grid: GridSpec, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != grid.n_vertices() {
            return Err(Error::StateLength {
                expected: grid.n_vertices(),
                got: amps.len(),
            });
        }
        let norm_sq: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(WalkerState { grid, amps })
    }

    /// Basis state |v>.
    pub fn basis(grid: GridSpec, v: VertexCoord) -> Result<Self> {
        grid.check_vertex(v)?;
        let mut amps = vec![Complex64::ZERO; grid.n_vertices()];
        amps[grid.index(v)] = Complex64::ONE;
        Ok(WalkerState { grid, amps })
    }

    /// Uniform superposition over all N vertices.
    pub fn uniform(grid: GridSpec) -> Self {
        let n = grid.n_vertices();
        let amp = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
        WalkerState {
            grid,
            amps: vec![amp; n],
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, v: VertexCoord) -> Complex64 {
        self.amps[self.grid.index(v)]
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    /// <self|other>
    pub fn overlap(&self, other: &WalkerState) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub(crate) fn from_parts_unchecked(grid: GridSpec, amps: Vec<Complex64>) -> Self {
        WalkerState { grid, amps }
    }
}

#[inline]
fn wrap_inc(i: usize, side: usize) -> usize {
    if i + 1 == side {
        0
    } else {
        i + 1
    }
}

#[inline]
fn wrap_dec(i: usize, side: usize) -> usize {
    if i == 0 {
        side - 1
    } else {
        i - 1
    }
}

/// H0 applied to raw amplitudes, written into `out`. Gather form; identical
/// signs to the defining column form because H0 is symmetric for even L.
pub fn apply_free_into(grid: GridSpec, psi: &[Complex64], out: &mut [Complex64]) {
    let side = grid.side();
    assert_eq!(psi.len(), grid.n_vertices());
    assert_eq!(out.len(), psi.len());
    for x in 0..side {
        let xp = wrap_inc(x, side) * side;
        let xm = wrap_dec(x, side) * side;
        let row = x * side;
        let sign_x = if x % 2 == 0 { 1.0 } else { -1.0 };
        for y in 0..side {
            let yp = wrap_inc(y, side);
            let ym = wrap_dec(y, side);
            let sign_xy = if (x + y) % 2 == 0 { 1.0 } else { -1.0 };
            out[row + y] =
                (psi[xp + y] - psi[xm + y]) * sign_x + (psi[row + yp] - psi[row + ym]) * sign_xy;
        }
    }
}

/// H0 psi as a fresh amplitude vector.
pub fn apply_free(grid: GridSpec, psi: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::ZERO; psi.len()];
    apply_free_into(grid, psi, &mut out);
    out
}

/// Single component (H0 psi)_v without touching the rest of the vector.
pub(crate) fn free_component(grid: GridSpec, psi: &[Complex64], v: VertexCoord) -> Complex64 {
    let side = grid.side();
    let sign_x = if v.x % 2 == 0 { 1.0 } else { -1.0 };
    let sign_xy = if (v.x + v.y) % 2 == 0 { 1.0 } else { -1.0 };
    let xp = wrap_inc(v.x, side) * side;
    let xm = wrap_dec(v.x, side) * side;
    let row = v.x * side;
    (psi[xp + v.y] - psi[xm + v.y]) * sign_x
        + (psi[row + wrap_inc(v.y, side)] - psi[row + wrap_dec(v.y, side)]) * sign_xy
}

/// The four nonzero entries of the target state Gamma = H0|m>/2, as
/// (vertex index, amplitude) pairs. Always four distinct vertices for L >= 4.
pub(crate) fn target_support(grid: GridSpec, m: MarkedVertex) -> [(usize, f64); 4] {
    let side = grid.side();
    let v = m.vertex();
    let sign_x = if v.x % 2 == 0 { 0.5 } else { -0.5 };
    let sign_xy = if (v.x + v.y) % 2 == 0 { 0.5 } else { -0.5 };
    [
        (grid.index(VertexCoord::new(wrap_inc(v.x, side), v.y)), sign_x),
        (grid.index(VertexCoord::new(wrap_dec(v.x, side), v.y)), -sign_x),
        (grid.index(VertexCoord::new(v.x, wrap_inc(v.y, side))), sign_xy),
        (grid.index(VertexCoord::new(v.x, wrap_dec(v.y, side))), -sign_xy),
    ]
}

/// Oracle term H_or = -|m><m| H0 - H0 |m><m| applied to raw amplitudes:
///
///   H_or psi = -(H0 psi)_m |m> - 2 psi_m Gamma
///
/// Together with H0 it zeroes row and column m, disconnecting the marked
/// vertex from the walk.
pub fn apply_oracle(grid: GridSpec, m: MarkedVertex, psi: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(psi.len(), grid.n_vertices());
    let mut out = vec![Complex64::ZERO; psi.len()];
    let mv = m.vertex();
    let m_idx = grid.index(mv);
    out[m_idx] = -free_component(grid, psi, mv);
    let psi_m = psi[m_idx];
    for (idx, amp) in target_support(grid, m) {
        out[idx] -= psi_m * (2.0 * amp);
    }
    out
}

/// Search Hamiltonian H = H0 + H_or applied in one pass, written into `out`.
pub fn apply_search_into(
    grid: GridSpec,
    m: MarkedVertex,
    psi: &[Complex64],
    out: &mut [Complex64],
) {
    apply_free_into(grid, psi, out);
    let m_idx = grid.index(m.vertex());
    out[m_idx] = Complex64::ZERO;
    let psi_m = psi[m_idx];
    for (idx, amp) in target_support(grid, m) {
        out[idx] -= psi_m * (2.0 * amp);
    }
}

/// (H0 + H_or) psi as a fresh amplitude vector.
pub fn apply_search(grid: GridSpec, m: MarkedVertex, psi: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::ZERO; psi.len()];
    apply_search_into(grid, m, psi, &mut out);
    out
}

/// Attractive on-site nonlinearity: (H_nl psi)_v = -g |psi_v|^2 psi_v.
pub fn apply_nonlinear(g: f64, psi: &[Complex64]) -> Vec<Complex64> {
    psi.iter().map(|&z| z * (-g * z.norm_sqr())).collect()
}

/// Target state Gamma = H0|m>/2: four amplitudes of magnitude 1/2 on the
/// neighbors of m, signs from the staggering. Unit norm, orthogonal to |m>.
pub fn target_state(grid: GridSpec, m: MarkedVertex) -> WalkerState {
    let mut amps = vec![Complex64::ZERO; grid.n_vertices()];
    for (idx, amp) in target_support(grid, m) {
        amps[idx] = Complex64::new(amp, 0.0);
    }
    WalkerState { grid, amps }
}

/// Initial state s(alpha): amplitude 2/sqrt(N) on the N/4 vertices whose
/// in-cell offset is alpha. H0 s = 0 exactly, and <Gamma|s> = 0 because the
/// neighbors of m sit at different offsets than m itself.
pub fn initial_state(grid: GridSpec, alpha: (u8, u8)) -> Result<WalkerState> {
    if alpha.0 > 1 || alpha.1 > 1 {
        return Err(Error::CellOffsetOutOfRange {
            sx: alpha.0,
            sy: alpha.1,
        });
    }
    let side = grid.side();
    let n = grid.n_vertices();
    let amp = Complex64::new(2.0 / (n as f64).sqrt(), 0.0);
    let mut amps = vec![Complex64::ZERO; n];
    let mut x = alpha.0 as usize;
    while x < side {
        let row = x * side;
        let mut y = alpha.1 as usize;
        while y < side {
            amps[row + y] = amp;
            y += 2;
        }
        x += 2;
    }
    Ok(WalkerState { grid, amps })
}

/// Vertex indices carrying the initial state s(alpha), in index order.
pub(crate) fn initial_support(grid: GridSpec, alpha: (u8, u8)) -> Vec<usize> {
    let side = grid.side();
    let mut support = Vec::with_capacity(grid.n_cells());
    let mut x = alpha.0 as usize;
    while x < side {
        let mut y = alpha.1 as usize;
        while y < side {
            support.push(x * side + y);
            y += 2;
        }
        x += 2;
    }
    support
}
