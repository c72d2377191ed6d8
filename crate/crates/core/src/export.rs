//! CSV renderings of estimates and reports, numbers at 6 significant digits.

use crate::ellipse::EllipsePolygon;
use crate::numerics::SymMatrix;
use crate::outlier::OutlierReport;
use crate::pca::{Biplot, PcaModel};
use crate::scalar::Real;

pub const SIGNIFICANT_DIGITS: usize = 6;

/// Formats `x` with 6 significant digits in the style of C's `%g`.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let prec = SIGNIFICANT_DIGITS - 1;
    let sci = format!("{x:.prec$e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        let decimals = (prec as i32 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa.to_string()), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn num<T: Real>(x: T) -> String {
    fmt_sig(x.as_f64())
}

fn write_rows(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

/// Labelled square matrix; the corner cell holds `corner`.
pub fn matrix_csv<T: Real>(m: &SymMatrix<T>, labels: &[String], corner: &str) -> String {
    let header: Vec<String> = std::iter::once(corner.to_string()).chain(labels.iter().cloned()).collect();
    write_rows(
        &header,
        labels.iter().enumerate().map(|(i, l)| {
            std::iter::once(l.clone())
                .chain((0..m.dim()).map(|j| num(m[(i, j)])))
                .collect()
        }),
    )
}

pub fn location_csv<T: Real>(location: &[T], labels: &[String]) -> String {
    write_rows(
        &["variable".to_string(), "location".to_string()],
        labels.iter().zip(location).map(|(l, &v)| vec![l.clone(), num(v)]),
    )
}

pub fn report_csv<T: Real>(report: &OutlierReport<T>, row_header: &str) -> String {
    write_rows(
        &[row_header.to_string(), "distance_sq".into(), "distance".into(), "flag".into()],
        report.rows.iter().map(|r| {
            vec![
                r.row_id.clone(),
                num(r.distance_sq),
                num(r.distance_sq.max(T::zero()).sqrt()),
                r.flag.to_string(),
            ]
        }),
    )
}

/// Closed polygon, first vertex repeated last.
pub fn polygon_csv<T: Real>(poly: &EllipsePolygon<T>, x_label: &str, y_label: &str) -> String {
    write_rows(
        &[x_label.to_string(), y_label.to_string()],
        poly.closed().into_iter().map(|(x, y)| vec![num(x), num(y)]),
    )
}

fn pc_labels(p: usize) -> Vec<String> {
    (1..=p).map(|k| format!("PC{k}")).collect()
}

pub fn scores_csv<T: Real>(model: &PcaModel<T>, row_header: &str) -> String {
    let p = model.n_components();
    let header: Vec<String> = std::iter::once(row_header.to_string()).chain(pc_labels(p)).collect();
    write_rows(
        &header,
        model.row_ids.iter().enumerate().map(|(r, id)| {
            std::iter::once(id.clone())
                .chain((0..p).map(|k| num(model.scores[(r, k)])))
                .collect()
        }),
    )
}

pub fn loadings_csv<T: Real>(model: &PcaModel<T>) -> String {
    let p = model.n_components();
    let header: Vec<String> = std::iter::once("variable".to_string()).chain(pc_labels(p)).collect();
    write_rows(
        &header,
        model.col_ids.iter().enumerate().map(|(v, id)| {
            std::iter::once(id.clone())
                .chain((0..p).map(|k| num(model.loadings[(v, k)])))
                .collect()
        }),
    )
}

pub fn eigenvalues_csv<T: Real>(model: &PcaModel<T>) -> String {
    let frac = model.explained_fraction();
    write_rows(
        &["component".into(), "eigenvalue".into(), "fraction".into()],
        pc_labels(model.n_components())
            .into_iter()
            .zip(model.eigenvalues.iter().zip(frac))
            .map(|(l, (&v, f))| vec![l, num(v), num(f)]),
    )
}

pub fn biplot_csv<T: Real>(b: &Biplot<T>, row_header: &str) -> String {
    let (i, j) = b.components;
    let header = vec![
        "kind".to_string(),
        row_header.to_string(),
        format!("PC{}", i + 1),
        format!("PC{}", j + 1),
    ];
    let points = b.points.iter().map(|(id, x, y)| vec!["point".into(), id.clone(), num(*x), num(*y)]);
    let arrows = b.arrows.iter().map(|(id, x, y)| vec!["arrow".into(), id.clone(), num(*x), num(*y)]);
    write_rows(&header, points.chain(arrows))
}
