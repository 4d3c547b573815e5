//! CSV tables and legacy ASCII VTK fields.

use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::{ErrorRow, Field, RunReport};

/// Column order of every results table.
pub const CSV_COLUMNS: [&str; 7] = [
    "scheme",
    "n",
    "h_mean",
    "tau",
    "Linf_error",
    "interior_max",
    "rate",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutputFormats {
    pub csv: bool,
    pub vtk: bool,
}

impl Default for OutputFormats {
    fn default() -> Self {
        OutputFormats {
            csv: true,
            vtk: true,
        }
    }
}

/// Missing values are written as empty cells.
pub fn write_csv<W: Write>(rows: &[ErrorRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(CSV_COLUMNS)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<ErrorRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header != CSV_COLUMNS {
        return Err(Error::InvalidInput(format!(
            "unexpected csv header {header:?}, expected {CSV_COLUMNS:?}"
        )));
    }
    Ok(rdr.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// Unstructured grid with point scalars `u` and, when present, `error`.
/// Quads are written as VTK_QUAD (9), other polygons as VTK_POLYGON (7).
pub fn write_vtk<W: Write>(field: &Field, out: W) -> Result<()> {
    let mesh = &field.mesh;
    if field.u.len() != mesh.num_points() {
        return Err(Error::InvalidInput(format!(
            "field `{}` has {} values for {} points",
            field.name,
            field.u.len(),
            mesh.num_points()
        )));
    }
    if let Some(e) = &field.error {
        if e.len() != mesh.num_points() {
            return Err(Error::InvalidInput(format!(
                "error field `{}` has wrong length",
                field.name
            )));
        }
    }
    let mut w = BufWriter::new(out);
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "{}", field.name)?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {} double", mesh.num_points())?;
    for p in mesh.points() {
        writeln!(w, "{:e} {:e} 0", p.x, p.y)?;
    }
    let size: usize = mesh.cells().iter().map(|c| c.len() + 1).sum();
    writeln!(w, "CELLS {} {size}", mesh.num_cells())?;
    for c in mesh.cells() {
        let ids: Vec<String> = c.iter().map(usize::to_string).collect();
        writeln!(w, "{} {}", c.len(), ids.join(" "))?;
    }
    writeln!(w, "CELL_TYPES {}", mesh.num_cells())?;
    for c in mesh.cells() {
        writeln!(w, "{}", if c.len() == 4 { 9 } else { 7 })?;
    }
    writeln!(w, "POINT_DATA {}", mesh.num_points())?;
    let mut scalars = |name: &str, values: &[f64]| -> std::io::Result<()> {
        writeln!(w, "SCALARS {name} double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for v in values {
            writeln!(w, "{v:e}")?;
        }
        Ok(())
    };
    scalars("u", &field.u)?;
    if let Some(e) = &field.error {
        scalars("error", e)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `<stem>.csv` and one `<field>.vtk` per field into `dir`, creating
/// it if needed. Returns the written paths.
pub fn write_outputs(
    report: &RunReport,
    dir: &Path,
    stem: &str,
    formats: OutputFormats,
) -> Result<Vec<PathBuf>> {
    if report.rows.is_empty() {
        return Err(Error::InvalidInput("no results to write".into()));
    }
    fs::create_dir_all(dir)
        .map_err(|e| Error::from(e).context(format!("creating {}", dir.display())))?;
    let mut written = Vec::new();
    if formats.csv {
        let path = dir.join(format!("{stem}.csv"));
        let f =
            File::create(&path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
        write_csv(&report.rows, f)?;
        written.push(path);
    }
    if formats.vtk {
        for field in &report.fields {
            let path = dir.join(format!("{}.vtk", field.name));
            let f = File::create(&path)
                .map_err(|e| Error::from(e).context(path.display().to_string()))?;
            write_vtk(field, f)?;
            written.push(path);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use crate::mesh::{make_structured_quad_mesh, Mesh, MeshMeta, Rect};
    use std::sync::Arc;

    fn rows() -> Vec<ErrorRow> {
        vec![
            ErrorRow {
                scheme: "vem:trace".into(),
                n: 10,
                h_mean: 0.1414213562373095,
                tau: Some(1.0),
                linf_error: Some(3.2e-3),
                interior_max: None,
                rate: None,
            },
            ErrorRow {
                scheme: "vem:trace".into(),
                n: 20,
                h_mean: 0.07071067811865475,
                tau: Some(1.0),
                linf_error: Some(8.1e-4),
                interior_max: Some(1.0 / 3.0),
                rate: Some(1.98),
            },
        ]
    }

    #[test]
    fn csv_round_trip() {
        let mut buf = Vec::new();
        write_csv(&rows(), &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("scheme,n,h_mean,tau,Linf_error,interior_max,rate\n"));
        assert!(text.lines().nth(1).unwrap().ends_with(",,"));
        assert_eq!(read_csv(buf.as_slice()).unwrap(), rows());
    }

    #[test]
    fn csv_rejects_other_schema() {
        let bad = "scheme,n\nx,1\n";
        assert!(read_csv(bad.as_bytes()).is_err());
    }

    #[test]
    fn vtk_layout() {
        let mesh = make_structured_quad_mesh(2, 1, Rect::UNIT).unwrap();
        let field = Field {
            name: "f".into(),
            mesh: Arc::new(mesh),
            u: vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0],
            error: Some(vec![0.5; 6]),
        };
        let mut buf = Vec::new();
        write_vtk(&field, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# vtk DataFile Version 3.0");
        assert_eq!(lines[3], "DATASET UNSTRUCTURED_GRID");
        assert_eq!(lines[4], "POINTS 6 double");
        assert_eq!(lines[11], "CELLS 2 10");
        assert_eq!(lines[14], "CELL_TYPES 2");
        assert_eq!(&lines[15..17], &["9", "9"]);
        assert_eq!(lines[17], "POINT_DATA 6");
        assert!(text.contains("SCALARS u double 1"));
        assert!(text.contains("SCALARS error double 1"));
    }

    #[test]
    fn vtk_polygon_cells() {
        let pts = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.5, 0.8),
            Point::new(0.5, 1.4),
            Point::new(-0.5, 0.8),
        ];
        let mesh = Mesh::new(
            pts,
            vec![vec![0, 1, 2, 3, 4]],
            vec![0, 1, 2, 3, 4],
            MeshMeta::default(),
        )
        .unwrap();
        let field = Field {
            name: "p".into(),
            mesh: Arc::new(mesh),
            u: vec![0.0; 5],
            error: None,
        };
        let mut buf = Vec::new();
        write_vtk(&field, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("CELL_TYPES 1\n7\n"));
        assert!(!text.contains("error"));
    }

    #[test]
    fn outputs_need_results() {
        let dir = tempfile::tempdir().unwrap();
        let err = write_outputs(
            &RunReport::default(),
            dir.path(),
            "x",
            OutputFormats::default(),
        )
        .unwrap_err();
        assert_eq!(err.category(), "invalid_input");
        let report = RunReport {
            rows: rows(),
            fields: vec![],
        };
        let written = write_outputs(
            &report,
            &dir.path().join("sub"),
            "table",
            OutputFormats::default(),
        )
        .unwrap();
        assert_eq!(written.len(), 1);
        assert!(written[0].ends_with("table.csv"));
    }
}
