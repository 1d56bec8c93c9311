//! SVG drawings of planar spaces.

use std::fmt::Write;

use crate::covering::KappaDecomposition;
use crate::error::{Error, Result};
use crate::space::Space;

const PALETTE: [&str; 10] =
    ["#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"];

/// Edges in grey and vertices colored by piece; vertices outside every piece are black.
pub fn render_svg(space: &Space, decomp: Option<&KappaDecomposition>) -> Result<String> {
    let coords = space.coords().ok_or_else(|| Error::InvalidArgument("space has no 2D coordinates".into()))?;
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in coords {
        x0 = x0.min(p[0]);
        y0 = y0.min(p[1]);
        x1 = x1.max(p[0]);
        y1 = y1.max(p[1]);
    }
    let size = 800.0;
    let pad = 10.0;
    let span = (x1 - x0).max(y1 - y0).max(1e-12);
    let scale = (size - 2.0 * pad) / span;
    let px = |p: [f64; 2]| (pad + (p[0] - x0) * scale, size - pad - (p[1] - y0) * scale);
    let mut color = vec!["#000000"; space.n()];
    if let Some(d) = decomp {
        for (k, piece) in d.pieces.iter().enumerate() {
            for &v in &piece.members {
                color[v] = PALETTE[k % PALETTE.len()];
            }
        }
    }
    let radius = (0.25 * space.resolution() * scale).clamp(0.5, 4.0);
    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#).unwrap();
    writeln!(s, r##"<g stroke="#cccccc" stroke-width="0.5">"##).unwrap();
    for &(u, v, _) in space.edges() {
        let (a, b) = (px(coords[u]), px(coords[v]));
        writeln!(s, r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#, a.0, a.1, b.0, b.1).unwrap();
    }
    writeln!(s, "</g>").unwrap();
    for (v, p) in coords.iter().enumerate() {
        let (x, y) = px(*p);
        writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="{radius:.2}" fill="{}"/>"#, color[v]).unwrap();
    }
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covering::kappa_decomposition;
    use crate::gallery::{generate, GallerySpec};

    #[test]
    fn grid_svg() {
        let g = generate(&GallerySpec::grid_quadrant(4)).unwrap();
        let d = kappa_decomposition(&g, 0, 2.0).unwrap();
        let svg = render_svg(&g, Some(&d)).unwrap();
        assert_eq!(svg.matches("<circle").count(), 25);
        assert_eq!(svg.matches("<line").count(), 40);
        assert!(svg.contains("#000000"));
    }

    #[test]
    fn needs_coordinates() {
        let s = Space::new(2, vec![(0, 1, 1.0)], vec![1.0, 1.0]).unwrap();
        assert!(render_svg(&s, None).is_err());
    }
}
