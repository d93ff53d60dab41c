//! Lattice placement of users and servers and the Manhattan cost matrix.

use rand::Rng;

use crate::model::CostMatrix;

pub type Cell = (u32, u32);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeLayout {
    pub side: usize,
    pub user_pos: Vec<Cell>,
    pub server_pos: Vec<Cell>,
}

/// Places every user, then every server, in an independent uniform cell of a
/// `side x side` grid. Several entities may share a cell.
pub fn random_lattice_layout<R: Rng + ?Sized>(
    n_users: usize,
    n_servers: usize,
    side: usize,
    rng: &mut R,
) -> LatticeLayout {
    assert!(side >= 1, "lattice side must be positive");
    let side_u32 = side as u32;
    let mut cell = || (rng.random_range(0..side_u32), rng.random_range(0..side_u32));
    let user_pos = (0..n_users).map(|_| cell()).collect();
    let server_pos = (0..n_servers).map(|_| cell()).collect();
    LatticeLayout {
        side,
        user_pos,
        server_pos,
    }
}

pub fn manhattan(a: Cell, b: Cell) -> u32 {
    a.0.abs_diff(b.0) + a.1.abs_diff(b.1)
}

pub fn manhattan_cost_matrix(layout: &LatticeLayout) -> CostMatrix {
    let entries = layout
        .user_pos
        .iter()
        .flat_map(|&u| layout.server_pos.iter().map(move |&s| manhattan(u, s) as f64))
        .collect();
    CostMatrix::new(layout.user_pos.len(), layout.server_pos.len(), entries)
        .expect("manhattan distances are finite and nonnegative")
}
