use robcov::ellipse::ellipse_form;
use robcov::export::{
    biplot_csv, eigenvalues_csv, fmt_sig, loadings_csv, location_csv, matrix_csv, polygon_csv, report_csv, scores_csv,
};
use robcov::{
    biplot_data, ellipse_points, fixture, impute_median, pca_fit, read_csv, screen, Data64, Ellipse64, Flag,
    ImputationRecord,
};
use serde::Serialize;

use crate::args::{CovArgs, EstimatorKind, Format, ImputeArgs, InputArgs, MhdArgs, PcaArgs, YoudenArgs};
use crate::error::{CliError, CliResult};
use crate::fit::{fit, EstimateJson};
use crate::svg::{Frame, Svg, PLOT_BOTTOM, PLOT_LEFT, PLOT_TOP};
use crate::write::OutDir;

const ROW_HEADER: &str = "Laboratory";

fn load(input: &InputArgs) -> CliResult<Data64> {
    let m: Data64 = match (&input.input, &input.fixture) {
        (Some(path), None) => read_csv(path, &input.na)?,
        (None, Some(name)) => fixture(name)?,
        _ => return Err(CliError::Usage("give either an input file or --fixture".into())),
    };
    if input.cols.is_empty() {
        return Ok(m);
    }
    let names: Vec<&str> = input.cols.iter().map(String::as_str).collect();
    Ok(m.select_columns_by_name(&names)?)
}

fn impute(m: &Data64) -> CliResult<(Data64, ImputationRecord<f64>)> {
    Ok(impute_median(m)?)
}

/// "95" for 0.95, "97.5" for 0.975.
fn percent(c: f64) -> String {
    fmt_sig(c * 100.0)
}

pub fn cov(args: &CovArgs) -> CliResult<OutDir> {
    let m = load(&args.input)?;
    let kind = args.est.estimator.unwrap_or(EstimatorKind::Rgk);
    let fitted = fit(&m, kind, &args.est)?;
    let e = &fitted.estimate;
    let labels = m.col_ids();
    let mut out = OutDir::create(&args.output.out)?;
    if args.output.wants(Format::Csv) {
        out.put("covariance.csv", &matrix_csv(&e.matrix, labels, "variable"))?;
        out.put("correlation.csv", &matrix_csv(&e.correlation_matrix()?, labels, "variable"))?;
        out.put("location.csv", &location_csv(&e.location, labels))?;
    }
    if args.output.wants(Format::Json) {
        out.put_json("cov.json", &fitted.to_json(labels))?;
    }
    println!("{}  n_used {}  positive_definite {}", e.estimator_tag, e.n_used, e.positive_definite);
    print!("{}", matrix_csv(&e.correlation_matrix()?, labels, "correlation"));
    Ok(out)
}

#[derive(Serialize)]
struct LevelJson {
    coverage: f64,
    t_sq: f64,
    area: f64,
    outside: Vec<String>,
}

#[derive(Serialize)]
struct PointJson<'a> {
    row_id: &'a str,
    x: f64,
    y: f64,
    distance_sq: f64,
    outside: Vec<bool>,
}

#[derive(Serialize)]
struct YoudenJson<'a> {
    estimate: EstimateJson<'a>,
    levels: Vec<LevelJson>,
    points: Vec<PointJson<'a>>,
}

pub fn youden(args: &YoudenArgs) -> CliResult<OutDir> {
    let m = load(&args.input)?;
    if m.ncols() != 2 {
        return Err(CliError::Usage(format!(
            "youden needs exactly two columns, found {}; select a pair with --cols A,B",
            m.ncols()
        )));
    }
    let kind = args.est.estimator.unwrap_or(EstimatorKind::Rgk);
    let fitted = fit(&m, kind, &args.est)?;
    let e = &fitted.estimate;
    let mut levels = args.coverage.clone();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let polygons: Vec<Ellipse64> = levels
        .iter()
        .map(|&c| ellipse_points(e, c, e.n_used, args.points))
        .collect::<robcov::Result<_>>()?;

    let x = m.to_matrix()?;
    let forms: Vec<f64> = (0..m.nrows())
        .map(|i| ellipse_form((x[(i, 0)], x[(i, 1)]), e))
        .collect::<robcov::Result<_>>()?;
    let outside = |k: usize| -> Vec<String> {
        (0..m.nrows())
            .filter(|&i| forms[i] > polygons[k].t_sq)
            .map(|i| m.row_ids()[i].clone())
            .collect()
    };

    let mut out = OutDir::create(&args.output.out)?;
    let (cx, cy) = (&m.col_ids()[0], &m.col_ids()[1]);
    if args.output.wants(Format::Csv) {
        for p in &polygons {
            out.put(&format!("ellipse_{}.csv", percent(p.coverage)), &polygon_csv(p, cx, cy))?;
        }
        out.put("location.csv", &location_csv(&e.location, m.col_ids()))?;
        out.put("youden_points.csv", &points_csv(&m, &forms, &polygons))?;
    }
    if args.output.wants(Format::Json) {
        let doc = YoudenJson {
            estimate: fitted.to_json(m.col_ids()),
            levels: polygons
                .iter()
                .enumerate()
                .map(|(k, p)| LevelJson {
                    coverage: p.coverage,
                    t_sq: p.t_sq,
                    area: p.area(),
                    outside: outside(k),
                })
                .collect(),
            points: (0..m.nrows())
                .map(|i| PointJson {
                    row_id: &m.row_ids()[i],
                    x: x[(i, 0)],
                    y: x[(i, 1)],
                    distance_sq: forms[i],
                    outside: polygons.iter().map(|p| forms[i] > p.t_sq).collect(),
                })
                .collect(),
        };
        out.put_json("youden.json", &doc)?;
    }
    if args.output.wants(Format::Svg) {
        let labelled = polygons.last().map(|_| outside(polygons.len() - 1)).unwrap_or_default();
        out.put("youden.svg", &youden_svg(&m, e, &polygons, &labelled))?;
    }

    println!("{}  n_used {}", e.estimator_tag, e.n_used);
    for (k, p) in polygons.iter().enumerate() {
        println!("{}% (T² {}): outside {}", percent(p.coverage), fmt_sig(p.t_sq), outside(k).join(", "));
    }
    Ok(out)
}

fn points_csv(m: &Data64, forms: &[f64], polygons: &[Ellipse64]) -> String {
    let x = m.to_matrix().expect("complete data");
    let mut s = format!("{ROW_HEADER},{},{},distance_sq", m.col_ids()[0], m.col_ids()[1]);
    for p in polygons {
        s.push_str(&format!(",outside_{}", percent(p.coverage)));
    }
    s.push('\n');
    for i in 0..m.nrows() {
        s.push_str(&format!("{},{},{},{}", m.row_ids()[i], fmt_sig(x[(i, 0)]), fmt_sig(x[(i, 1)]), fmt_sig(forms[i])));
        for p in polygons {
            s.push_str(if forms[i] > p.t_sq { ",true" } else { ",false" });
        }
        s.push('\n');
    }
    s
}

fn youden_svg(m: &Data64, e: &robcov::Estimate64, polygons: &[Ellipse64], labelled: &[String]) -> String {
    let x = m.to_matrix().expect("complete data");
    let data = (0..m.nrows()).map(|i| (x[(i, 0)], x[(i, 1)]));
    let ring = polygons.iter().flat_map(|p| p.points.iter().copied());
    let f = Frame::around(data.clone().chain(ring));
    let mut svg = Svg::new(&format!("Youden plot: {}", e.estimator_tag));
    svg.axes(&f, &m.col_ids()[0], &m.col_ids()[1]);
    let (x0, x1) = f.x_range();
    let (y0, y1) = f.y_range();
    let (cx, cy) = (e.location[0], e.location[1]);
    svg.line((f.px(x0), f.py(cy)), (f.px(x1), f.py(cy)), "#888", false);
    svg.line((f.px(cx), f.py(y0)), (f.px(cx), f.py(y1)), "#888", false);
    for (k, p) in polygons.iter().enumerate() {
        let pts: Vec<(f64, f64)> = p.points.iter().map(|&(a, b)| (f.px(a), f.py(b))).collect();
        svg.polygon(&pts, "#1f4e9c", k + 1 < polygons.len());
    }
    for (i, (a, b)) in data.enumerate() {
        svg.circle((f.px(a), f.py(b)), 3.0, "#222");
        if labelled.contains(&m.row_ids()[i]) {
            svg.text(f.px(a) + 5.0, f.py(b) - 5.0, &m.row_ids()[i], "start", 11.0);
        }
    }
    svg.finish()
}

#[derive(Serialize)]
struct ScreenRowJson<'a> {
    row_id: &'a str,
    distance_sq: f64,
    distance: f64,
    flag: Flag,
}

#[derive(Serialize)]
struct MhdJson<'a> {
    estimate: EstimateJson<'a>,
    crit95: f64,
    crit99: f64,
    rows: Vec<ScreenRowJson<'a>>,
    imputation: &'a ImputationRecord<f64>,
}

pub fn mhd(args: &MhdArgs) -> CliResult<OutDir> {
    let (m, record) = impute(&load(&args.input)?)?;
    let kind = args.est.estimator.unwrap_or(EstimatorKind::Ogk);
    let fitted = fit(&m, kind, &args.est)?;
    let report = screen(&m, &fitted.estimate)?;
    let mut out = OutDir::create(&args.output.out)?;
    if args.output.wants(Format::Csv) {
        out.put("mhd.csv", &report_csv(&report, ROW_HEADER))?;
    }
    if args.output.wants(Format::Json) {
        let doc = MhdJson {
            estimate: fitted.to_json(m.col_ids()),
            crit95: report.crit95,
            crit99: report.crit99,
            rows: report
                .rows
                .iter()
                .map(|r| ScreenRowJson {
                    row_id: &r.row_id,
                    distance_sq: r.distance_sq,
                    distance: r.distance_sq.max(0.0).sqrt(),
                    flag: r.flag,
                })
                .collect(),
            imputation: &record,
        };
        out.put_json("mhd.json", &doc)?;
    }
    if args.output.wants(Format::Svg) {
        out.put("mhd.svg", &mhd_svg(&report))?;
    }

    println!(
        "{}  imputed cells {}  crit95 {}  crit99 {}",
        report.estimator_tag,
        record.len(),
        fmt_sig(report.crit95),
        fmt_sig(report.crit99)
    );
    for r in report.rows.iter().filter(|r| r.flag > Flag::Inlier) {
        println!("{}  d² {}  d {}  {}", r.row_id, fmt_sig(r.distance_sq), fmt_sig(r.distance_sq.sqrt()), r.flag);
    }
    Ok(out)
}

fn mhd_svg(report: &robcov::Report64) -> String {
    let d: Vec<f64> = report.rows.iter().map(|r| r.distance_sq.max(0.0).sqrt()).collect();
    let (c95, c99) = (report.crit95.sqrt(), report.crit99.sqrt());
    let top = d.iter().copied().fold(c99, f64::max) * 1.05;
    let n = d.len().max(1);
    let f = Frame::around([(0.0, 0.0), (top, n as f64)]).with_x(0.0, top);
    let mut svg = Svg::new(&format!("Mahalanobis distances: {}", report.estimator_tag));
    svg.x_axis(&f, "distance");
    let step = (PLOT_BOTTOM - PLOT_TOP) / n as f64;
    for (k, (row, &v)) in report.rows.iter().zip(&d).enumerate() {
        let y = PLOT_TOP + step * (k as f64 + 0.5);
        let colour = match row.flag {
            Flag::Inlier => "#555",
            Flag::Warn95 => "#d08000",
            Flag::Action99 => "#b22222",
        };
        svg.line((f.px(0.0), y), (f.px(v), y), "#bbb", false);
        svg.circle((f.px(v), y), 3.0, colour);
        svg.text(PLOT_LEFT - 6.0, y + 4.0, &row.row_id, "end", 10.0);
    }
    svg.line((f.px(c95), PLOT_TOP), (f.px(c95), PLOT_BOTTOM), "#333", true);
    svg.line((f.px(c99), PLOT_TOP), (f.px(c99), PLOT_BOTTOM), "#333", false);
    svg.finish()
}

#[derive(Serialize)]
struct PcaJson<'a> {
    estimate: EstimateJson<'a>,
    use_correlation: bool,
    eigenvalues: &'a [f64],
    explained: Vec<f64>,
    center: &'a [f64],
    scale: &'a [f64],
    loadings: Vec<Vec<f64>>,
    scores: Vec<Vec<f64>>,
    score_norms: Vec<f64>,
    most_extreme: Vec<String>,
    imputation: &'a ImputationRecord<f64>,
}

pub fn pca(args: &PcaArgs) -> CliResult<OutDir> {
    let (m, record) = impute(&load(&args.input)?)?;
    if m.ncols() < 2 {
        return Err(CliError::Usage("pca needs at least two columns".into()));
    }
    let kind = args.est.estimator.unwrap_or(EstimatorKind::Mcd);
    let fitted = fit(&m, kind, &args.est)?;
    let model = pca_fit(&m, &fitted.estimate, !args.covariance)?;
    let biplot = biplot_data(&model, 0, 1)?;
    let norms = model.score_norms(0, 1)?;
    let mut order: Vec<usize> = (0..norms.len()).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]).then(a.cmp(&b)));
    let top: Vec<String> = order.iter().take(args.label_top).map(|&i| model.row_ids[i].clone()).collect();

    let mut out = OutDir::create(&args.output.out)?;
    if args.output.wants(Format::Csv) {
        out.put("pca_scores.csv", &scores_csv(&model, ROW_HEADER))?;
        out.put("pca_loadings.csv", &loadings_csv(&model))?;
        out.put("pca_eigenvalues.csv", &eigenvalues_csv(&model))?;
        out.put("pca_biplot.csv", &biplot_csv(&biplot, ROW_HEADER))?;
    }
    if args.output.wants(Format::Json) {
        let doc = PcaJson {
            estimate: fitted.to_json(m.col_ids()),
            use_correlation: !args.covariance,
            eigenvalues: &model.eigenvalues,
            explained: model.explained_fraction(),
            center: &model.center,
            scale: &model.scale,
            loadings: model.loadings.to_rows(),
            scores: model.scores.to_rows(),
            score_norms: norms.clone(),
            most_extreme: top.clone(),
            imputation: &record,
        };
        out.put_json("pca.json", &doc)?;
    }
    if args.output.wants(Format::Svg) {
        out.put("pca.svg", &biplot_svg(&biplot, &model.estimator_tag, &top))?;
    }

    println!("{}  imputed cells {}", model.estimator_tag, record.len());
    let eig: Vec<String> = model.eigenvalues.iter().map(|&v| fmt_sig(v)).collect();
    println!("eigenvalues {}", eig.join(" "));
    for &i in order.iter().take(args.label_top) {
        println!("{}  PC1-PC2 norm {}", model.row_ids[i], fmt_sig(norms[i]));
    }
    Ok(out)
}

fn biplot_svg(b: &robcov::Biplot<f64>, tag: &str, labelled: &[String]) -> String {
    let reach = b.points.iter().map(|(_, x, y)| x.hypot(*y)).fold(0.0, f64::max);
    let longest = b.arrows.iter().map(|(_, x, y)| x.hypot(*y)).fold(0.0, f64::max);
    let stretch = if longest > 0.0 && reach > 0.0 { 0.8 * reach / longest } else { 1.0 };
    let pts = b.points.iter().map(|(_, x, y)| (*x, *y));
    let tips = b.arrows.iter().map(|(_, x, y)| (x * stretch, y * stretch));
    let f = Frame::around(pts.chain(tips).chain([(0.0, 0.0)]));
    let (i, j) = b.components;
    let mut svg = Svg::new(&format!("PCA biplot: {tag} (arrows ×{})", fmt_sig(stretch)));
    svg.axes(&f, &format!("PC{}", i + 1), &format!("PC{}", j + 1));
    let (x0, x1) = f.x_range();
    let (y0, y1) = f.y_range();
    svg.line((f.px(x0), f.py(0.0)), (f.px(x1), f.py(0.0)), "#ccc", false);
    svg.line((f.px(0.0), f.py(y0)), (f.px(0.0), f.py(y1)), "#ccc", false);
    for (id, x, y) in &b.points {
        svg.circle((f.px(*x), f.py(*y)), 3.0, "#222");
        if labelled.contains(id) {
            svg.text(f.px(*x) + 5.0, f.py(*y) - 5.0, id, "start", 11.0);
        }
    }
    for (name, x, y) in &b.arrows {
        let tip = (f.px(x * stretch), f.py(y * stretch));
        svg.arrow((f.px(0.0), f.py(0.0)), tip, "#b22");
        svg.text(tip.0, tip.1 - 4.0, name, "middle", 11.0);
    }
    svg.finish()
}

#[derive(Serialize)]
struct ImputeJson<'a> {
    imputed_cells: usize,
    imputation: &'a ImputationRecord<f64>,
}

pub fn impute_cmd(args: &ImputeArgs) -> CliResult<OutDir> {
    let m = load(&args.input)?;
    let (done, record) = impute(&m)?;
    let mut out = OutDir::create(&args.output.out)?;
    if args.output.wants(Format::Csv) {
        out.put("imputed.csv", &done.to_csv_string(&args.input.na, ROW_HEADER))?;
    }
    if args.output.wants(Format::Json) {
        out.put_json(
            "imputation.json",
            &ImputeJson {
                imputed_cells: record.len(),
                imputation: &record,
            },
        )?;
    }
    println!("imputed cells {}", record.len());
    for c in &record.entries {
        println!("{}  {}  {}", c.row_id, c.col_id, fmt_sig(c.imputed_value));
    }
    Ok(out)
}
