use crate::error::{Error, Result};
use crate::raster::{text_width, Rgb, RgbImage, BLACK, GLYPH_H, GREY, WHITE};

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub color: Rgb,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

const MARGIN_LEFT: i64 = 70;
const MARGIN_RIGHT: i64 = 20;
const MARGIN_TOP: i64 = 40;
const MARGIN_BOTTOM: i64 = 50;

/// Step from {1, 2, 5}·10^k giving at most about `target` intervals.
fn nice_step(span: f64, target: usize) -> f64 {
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|&s| s >= raw).unwrap_or(10.0 * mag)
}

fn ticks(lo: f64, hi: f64, target: usize) -> (f64, f64, Vec<f64>) {
    let step = nice_step(hi - lo, target);
    let start = (lo / step).floor() * step;
    let end = (hi / step).ceil() * step;
    let n = ((end - start) / step).round() as usize;
    (start, end, (0..=n).map(|k| start + k as f64 * step).collect())
}

fn label(v: f64, step: f64) -> String {
    let decimals = if step >= 1.0 { 0 } else { (-step.log10().floor()) as usize };
    let s = format!("{v:.decimals$}");
    if s.starts_with("-") && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

/// Renders series as polylines over labelled axes with a legend.
pub fn render_line_chart(chart: &LineChart, width: usize, height: usize) -> Result<RgbImage> {
    let pts = chart.series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::Input(format!("non-finite point ({x}, {y}) in chart {:?}", chart.title)));
        }
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        return Err(Error::Input(format!("chart {:?} has no points", chart.title)));
    }
    if x1 - x0 < 1e-9 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-9 {
        y0 -= 1.0;
        y1 += 1.0;
    }
    let (x0, x1, xt) = ticks(x0, x1, 10);
    let (y0, y1, yt) = ticks(y0, y1, 6);

    let mut img = RgbImage::new(width, height, WHITE);
    let (pl, pr) = (MARGIN_LEFT, width as i64 - MARGIN_RIGHT);
    let (pt, pb) = (MARGIN_TOP, height as i64 - MARGIN_BOTTOM);
    let sx = |x: f64| pl + ((x - x0) / (x1 - x0) * (pr - pl) as f64).round() as i64;
    let sy = |y: f64| pb - ((y - y0) / (y1 - y0) * (pb - pt) as f64).round() as i64;

    let xstep = if xt.len() > 1 { xt[1] - xt[0] } else { 1.0 };
    let ystep = if yt.len() > 1 { yt[1] - yt[0] } else { 1.0 };
    for &v in &yt {
        let y = sy(v);
        img.line(pl, y, pr, y, GREY);
        let s = label(v, ystep);
        img.text(pl - 6 - text_width(&s, 1), y - GLYPH_H / 2, &s, 1, BLACK);
    }
    for &v in &xt {
        let x = sx(v);
        img.line(x, pb, x, pb + 4, BLACK);
        let s = label(v, xstep);
        img.text(x - text_width(&s, 1) / 2, pb + 8, &s, 1, BLACK);
    }
    img.line(pl, pt, pl, pb, BLACK);
    img.line(pl, pb, pr, pb, BLACK);

    img.text((width as i64 - text_width(&chart.title, 2)) / 2, 10, &chart.title, 2, BLACK);
    img.text((pl + pr - text_width(&chart.x_label, 1)) / 2, pb + 24, &chart.x_label, 1, BLACK);
    img.text_vertical(10, (pt + pb + text_width(&chart.y_label, 1)) / 2, &chart.y_label, 1, BLACK);

    for s in &chart.series {
        for w in s.points.windows(2) {
            img.thick_line(sx(w[0].0), sy(w[0].1), sx(w[1].0), sy(w[1].1), s.color);
        }
        if let [p] = s.points.as_slice() {
            img.disc(sx(p.0), sy(p.1), 2, s.color);
        }
    }
    let mut ly = pt + 4;
    for s in &chart.series {
        let lx = pr - text_width(&s.name, 1) - 30;
        img.fill_rect(lx, ly + 2, 20, 3, s.color);
        img.text(lx + 24, ly, &s.name, 1, BLACK);
        ly += GLYPH_H + 6;
    }
    Ok(img)
}
