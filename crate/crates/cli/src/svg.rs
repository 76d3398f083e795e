//! Self-contained SVG rendering of an instance and an optional plan.

use std::fmt::Write;

use thiserror::Error;

use skyroute_core::constraints::{coverage_radius_km, LinkParams};
use skyroute_core::instance::{DeliveryInstance, Frame, GeoPoint, Isc3Demands};
use skyroute_core::routing::RoutePlan;

pub const MIN_CANVAS_PX: u32 = 100;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f",
];

/// Km per degree of latitude, for drawing rings on geodetic scenes.
const KM_PER_DEG: f64 = 111.32;

#[derive(Debug, Clone, PartialEq)]
pub struct RenderSpec {
    /// Width and height of the square canvas.
    pub size_px: u32,
    pub stations: bool,
    pub depot: bool,
    pub trips: bool,
    /// Base-station rings at the radius where the rate falls to the
    /// minimum data rate.
    pub coverage: bool,
    pub no_fly_zones: bool,
    pub labels: bool,
}

impl Default for RenderSpec {
    fn default() -> Self {
        RenderSpec {
            size_px: 800,
            stations: true,
            depot: true,
            trips: true,
            coverage: true,
            no_fly_zones: true,
            labels: true,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum RenderError {
    #[error("canvas must be at least {MIN_CANVAS_PX} px (got {0})")]
    CanvasTooSmall(u32),
    #[error("plan references unknown station `{0}`")]
    UnknownStation(String),
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Maps scene coordinates onto the canvas, north up.
struct Viewport {
    min_x: f64,
    min_y: f64,
    scale: f64,
    margin: f64,
    size: f64,
    frame: Frame,
}

impl Viewport {
    fn fit(points: &[GeoPoint], size: u32, frame: Frame) -> Self {
        let (mut min_x, mut max_x, mut min_y, mut max_y) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for p in points {
            min_x = min_x.min(p.x);
            max_x = max_x.max(p.x);
            min_y = min_y.min(p.y);
            max_y = max_y.max(p.y);
        }
        let size = f64::from(size);
        let margin = size * 0.06;
        let span = (max_x - min_x).max(max_y - min_y);
        let span = if span > 0.0 { span } else { 1.0 };
        let scale = (size - 2.0 * margin) / span;
        // center the shorter axis
        let min_x = min_x - (span - (max_x - min_x)) / 2.0;
        let min_y = min_y - (span - (max_y - min_y)) / 2.0;
        Viewport { min_x, min_y, scale, margin, size, frame }
    }

    fn px(&self, p: &GeoPoint) -> (f64, f64) {
        (
            self.margin + (p.x - self.min_x) * self.scale,
            self.size - self.margin - (p.y - self.min_y) * self.scale,
        )
    }

    /// Horizontal and vertical pixel radii of a ground circle.
    fn radii(&self, center: &GeoPoint, r_km: f64) -> (f64, f64) {
        match self.frame {
            Frame::Planar => (r_km * self.scale, r_km * self.scale),
            Frame::Geodetic => {
                let ry = r_km / KM_PER_DEG;
                let rx = ry / center.y.to_radians().cos().max(1e-6);
                (rx * self.scale, ry * self.scale)
            }
        }
    }

    fn ring(&self, out: &mut String, center: &GeoPoint, r_km: f64, attrs: &str) {
        let (cx, cy) = self.px(center);
        let (rx, ry) = self.radii(center, r_km);
        if (rx - ry).abs() < 1e-9 {
            let _ = writeln!(out, r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="{rx:.2}" {attrs}/>"#);
        } else {
            let _ = writeln!(out, r#"<ellipse cx="{cx:.2}" cy="{cy:.2}" rx="{rx:.2}" ry="{ry:.2}" {attrs}/>"#);
        }
    }
}

/// Renders `instance` and, if given, one polyline per trip of `plan`.
pub fn render_svg(
    instance: &DeliveryInstance,
    plan: Option<&RoutePlan>,
    demands: &Isc3Demands,
    link: &LinkParams,
    spec: &RenderSpec,
) -> Result<String, RenderError> {
    if spec.size_px < MIN_CANVAS_PX {
        return Err(RenderError::CanvasTooSmall(spec.size_px));
    }
    let trips: Vec<Vec<GeoPoint>> = match plan {
        Some(plan) => plan
            .trips
            .iter()
            .map(|t| {
                let mut pts = vec![instance.depot];
                for id in &t.stations {
                    let i = instance.station_index(id).ok_or_else(|| RenderError::UnknownStation(id.clone()))?;
                    pts.push(instance.stations[i].location);
                }
                pts.push(instance.depot);
                Ok(pts)
            })
            .collect::<Result<_, _>>()?,
        None => Vec::new(),
    };

    let mut extent: Vec<GeoPoint> = vec![instance.depot];
    extent.extend(instance.stations.iter().map(|s| s.location));
    extent.extend(instance.base_stations.iter().map(|b| b.location));
    extent.extend(instance.no_fly_zones.iter().map(|z| z.center));
    let view = Viewport::fit(&extent, spec.size_px, instance.frame());
    let size = spec.size_px;

    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r##"<rect x="0" y="0" width="{size}" height="{size}" fill="#ffffff"/>"##);

    if spec.coverage {
        s.push_str("<g id=\"coverage\">\n");
        for bs in &instance.base_stations {
            let r = coverage_radius_km(bs, link, demands.min_data_rate);
            if r.is_finite() && r > 0.0 {
                view.ring(&mut s, &bs.location, r, r##"fill="#4e79a7" fill-opacity="0.06" stroke="#4e79a7" stroke-dasharray="4 3""##);
            }
            let (x, y) = view.px(&bs.location);
            let _ = writeln!(
                s,
                r##"<path d="M {:.2} {:.2} l 5 9 l -10 0 z" fill="#4e79a7"><title>{}</title></path>"##,
                x,
                y - 6.0,
                escape(&bs.id)
            );
        }
        s.push_str("</g>\n");
    }

    if spec.no_fly_zones {
        s.push_str("<g id=\"no-fly-zones\">\n");
        for z in &instance.no_fly_zones {
            view.ring(&mut s, &z.center, z.radius_km, r##"fill="#e15759" fill-opacity="0.25" stroke="#e15759""##);
        }
        s.push_str("</g>\n");
    }

    if spec.trips {
        s.push_str("<g id=\"trips\" fill=\"none\" stroke-width=\"2\" stroke-linejoin=\"round\">\n");
        for (k, pts) in trips.iter().enumerate() {
            let coords: Vec<String> = pts
                .iter()
                .map(|p| {
                    let (x, y) = view.px(p);
                    format!("{x:.2},{y:.2}")
                })
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline class="trip" data-trip="{}" stroke="{}" points="{}"/>"#,
                k,
                PALETTE[k % PALETTE.len()],
                coords.join(" ")
            );
        }
        s.push_str("</g>\n");
    }

    if spec.stations {
        s.push_str("<g id=\"stations\">\n");
        for st in &instance.stations {
            let (x, y) = view.px(&st.location);
            let _ = writeln!(
                s,
                r##"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="#333333"><title>{} (demand {})</title></circle>"##,
                escape(&st.id),
                st.demand
            );
            if spec.labels {
                let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, x + 6.0, y - 6.0, escape(&st.id));
            }
        }
        s.push_str("</g>\n");
    }

    if spec.depot {
        let (x, y) = view.px(&instance.depot);
        let _ = writeln!(
            s,
            r##"<g id="depot"><rect x="{:.2}" y="{:.2}" width="12" height="12" fill="#000000"><title>depot</title></rect></g>"##,
            x - 6.0,
            y - 6.0
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}
