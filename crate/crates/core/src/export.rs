//! Mesh and point-cloud export of sampled immersions.
//!
//! Two-dimensional charts get one quad per grid cell; other charts are
//! written as point clouds. OBJ keeps only the first three ambient
//! coordinates, PLY keeps all of them.

use std::fmt::Write;

use crate::grid::ChartGrid;

fn quads(grid: &ChartGrid) -> Vec<[usize; 4]> {
    if grid.dim() != 2 {
        return Vec::new();
    }
    let (rows, cols) = (grid.extents()[0], grid.extents()[1]);
    let mut out = Vec::with_capacity((rows - 1) * (cols - 1));
    for i in 0..rows - 1 {
        for j in 0..cols - 1 {
            let a = grid.index(&[i, j]);
            let b = grid.index(&[i + 1, j]);
            out.push([a, b, b + 1, a + 1]);
        }
    }
    out
}

pub fn to_obj(grid: &ChartGrid, ambient_dim: usize, positions: &[f64]) -> String {
    let mut out = String::new();
    if ambient_dim > 3 {
        let _ = writeln!(out, "# projected to the first 3 of {ambient_dim} coordinates");
    }
    for p in positions.chunks(ambient_dim) {
        let c = |i: usize| p.get(i).copied().unwrap_or(0.0);
        let _ = writeln!(out, "v {:.17e} {:.17e} {:.17e}", c(0), c(1), c(2));
    }
    for q in quads(grid) {
        let _ = writeln!(out, "f {} {} {} {}", q[0] + 1, q[1] + 1, q[2] + 1, q[3] + 1);
    }
    out
}

pub fn to_ply(grid: &ChartGrid, ambient_dim: usize, positions: &[f64]) -> String {
    let faces = quads(grid);
    let names: Vec<String> = match ambient_dim {
        3 => vec!["x".into(), "y".into(), "z".into()],
        4 => vec!["x".into(), "y".into(), "z".into(), "w".into()],
        d => (0..d).map(|i| format!("x{i}")).collect(),
    };
    let mut out = String::from("ply\nformat ascii 1.0\n");
    let _ = writeln!(out, "element vertex {}", positions.len() / ambient_dim);
    for name in &names {
        let _ = writeln!(out, "property double {name}");
    }
    let _ = writeln!(out, "element face {}", faces.len());
    out.push_str("property list uchar int vertex_indices\nend_header\n");
    for p in positions.chunks(ambient_dim) {
        let row: Vec<String> = p.iter().map(|x| format!("{x:.17e}")).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    for q in faces {
        let _ = writeln!(out, "4 {} {} {} {}", q[0], q[1], q[2], q[3]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn obj_has_vertices_and_quads() {
        let g = ChartGrid::new(vec![5, 6], vec![1.0, 1.0], vec![0.0, 0.0]).unwrap();
        let pos: Vec<f64> = (0..g.node_count()).flat_map(|i| g.point(i).into_iter().chain([0.0])).collect();
        let obj = to_obj(&g, 3, &pos);
        assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 30);
        assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 20);
        assert!(obj.contains("\nf 1 7 8 2\n"));
    }

    #[test]
    fn ply_keeps_every_coordinate() {
        let g = ChartGrid::new(vec![5, 5], vec![1.0, 1.0], vec![0.0, 0.0]).unwrap();
        let pos = vec![0.5; g.node_count() * 4];
        let ply = to_ply(&g, 4, &pos);
        assert!(ply.contains("property double w\n"));
        assert!(ply.contains("element face 16\n"));
        let body: Vec<&str> = ply.split("end_header\n").nth(1).unwrap().lines().collect();
        assert_eq!(body[0].split(' ').count(), 4);
    }
}
