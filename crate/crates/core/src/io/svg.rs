use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::Trajectory;

use super::{Plane, PlotOptions};

const SIZE: f64 = 640.0;
const CENTER: f64 = SIZE / 2.0;
/// Pixels per Bloch unit when everything fits in the unit disc.
const SCALE: f64 = 270.0;

const LOBE_POSITIVE: &str = "#e7298a";
const LOBE_NEGATIVE: &str = "#1fb5c9";
const INITIAL: &str = "#2b50d6";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionSummary {
    pub plane: Plane,
    pub points: usize,
    pub initial_markers: usize,
    /// Largest in-plane radius of any plotted post-transient point.
    pub max_plane_radius: f64,
    /// Largest full Bloch norm of any plotted post-transient point.
    pub max_norm: f64,
}

fn px(scale: f64, u: f64, v: f64) -> (f64, f64) {
    (CENTER + scale * u, CENTER - scale * v)
}

/// SVG scatter of post-transient samples projected on `plane`, with the
/// unit circle drawn and each trajectory's initial condition marked.
/// Points are colored by the sign of the first in-plane coordinate. Clouds
/// that leave the unit disc are zoomed out so every point stays on canvas.
pub fn projection_svg(trajs: &[Trajectory], opts: &PlotOptions) -> Result<(String, ProjectionSummary)> {
    if trajs.is_empty() {
        return Err(Error::Validation("nothing to plot: no trajectories".to_string()));
    }
    let plane = opts.plane;
    let (hl, vl) = plane.labels();
    let mut points = Vec::new();
    let mut initial = Vec::new();
    let mut summary = ProjectionSummary {
        plane,
        points: 0,
        initial_markers: 0,
        max_plane_radius: 0.0,
        max_norm: 0.0,
    };
    for traj in trajs {
        let post: Vec<_> = traj.after(opts.transient).collect();
        let stride = post.len().div_ceil(opts.max_points_per_trajectory).max(1);
        for s in post.iter().step_by(stride) {
            let (u, v) = plane.project(s.r);
            points.push((u, v));
            summary.max_plane_radius = summary.max_plane_radius.max(u.hypot(v));
            summary.max_norm = summary.max_norm.max(s.norm);
        }
        initial.push(plane.project(traj.initial().r));
    }
    summary.points = points.len();
    summary.initial_markers = initial.len();
    if summary.points == 0 {
        return Err(Error::EmptyPlot {
            transient: opts.transient,
        });
    }

    let extent = initial
        .iter()
        .map(|&(u, v)| u.hypot(v))
        .fold(summary.max_plane_radius.max(1.0), f64::max);
    let scale = SCALE / extent;
    let mut cloud = String::new();
    for &(u, v) in &points {
        let (x, y) = px(scale, u, v);
        let color = if u >= 0.0 { LOBE_POSITIVE } else { LOBE_NEGATIVE };
        let _ = writeln!(cloud, r#"<circle cx="{x:.2}" cy="{y:.2}" r="1.2" fill="{color}"/>"#);
    }
    let mut markers = String::new();
    for &(u, v) in &initial {
        let (x, y) = px(scale, u, v);
        let _ = writeln!(
            markers,
            r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{INITIAL}" stroke="white" stroke-width="0.5"/>"#
        );
    }

    let title = match opts.recipe {
        Some(r) => format!("{r:?} {hl}{vl} projection"),
        None => format!("{hl}{vl} projection"),
    };
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(svg, "<title>{title}</title>");
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r##"<circle cx="{CENTER}" cy="{CENTER}" r="{scale:.2}" fill="none" stroke="#c9b400" stroke-width="1.5"/>"##
    );
    let (l, r) = (CENTER - scale, CENTER + scale);
    let _ = writeln!(
        svg,
        r##"<g stroke="#bbbbbb" stroke-width="0.5"><line x1="{l}" y1="{CENTER}" x2="{r}" y2="{CENTER}"/><line x1="{CENTER}" y1="{l}" x2="{CENTER}" y2="{r}"/></g>"##
    );
    let _ = writeln!(
        svg,
        r#"<g font-family="sans-serif" font-size="14"><text x="{}" y="{}">{hl}</text><text x="{}" y="{}">{vl}</text></g>"#,
        r + 8.0,
        CENTER + 5.0,
        CENTER - 4.0,
        l - 8.0
    );
    let _ = writeln!(svg, "<g>\n{cloud}</g>");
    let _ = writeln!(svg, "<g>\n{markers}</g>");
    svg.push_str("</svg>\n");
    Ok((svg, summary))
}

pub fn render_projection(trajs: &[Trajectory], path: &Path, opts: &PlotOptions) -> Result<ProjectionSummary> {
    let (svg, summary) = projection_svg(trajs, opts)?;
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))?;
    Ok(summary)
}
