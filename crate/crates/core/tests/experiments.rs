use std::fs;

use vemstab::experiments::{
    read_csv, run_hourglass, run_mms, write_csv, write_outputs, HourglassConfig, MmsConfig,
    OutputFormats,
};
use vemstab::{make_structured_quad_mesh, perturb_mesh, Execution, Mesh, Rect, Scheme, TauPolicy};

fn csv_bytes(rows: &[vemstab::experiments::ErrorRow]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).unwrap();
    buf
}

fn small_mms() -> MmsConfig {
    MmsConfig {
        sizes: vec![8, 16],
        perturb: 0.2,
        seed: 3,
        schemes: vec![
            Scheme::IsoFem { order: 2 },
            Scheme::Vem(TauPolicy::VemTrace),
            Scheme::Vem(TauPolicy::FemQuadrature { order: 2 }),
        ],
        ..MmsConfig::default()
    }
}

#[test]
fn mms_runs_are_bit_reproducible() {
    let config = small_mms();
    let a = run_mms(&config, Execution::Parallel).unwrap();
    let b = run_mms(&config, Execution::Parallel).unwrap();
    let c = run_mms(&config, Execution::Sequential).unwrap();
    assert_eq!(csv_bytes(&a.rows), csv_bytes(&b.rows));
    assert_eq!(csv_bytes(&a.rows), csv_bytes(&c.rows));
    assert_eq!(a.rows.len(), 6);
    for pair in a.rows.chunks(2) {
        assert_eq!(pair[0].scheme, pair[1].scheme);
        assert!(pair[0].rate.is_none());
        assert!(pair[1].rate.unwrap() > 1.0);
    }
}

#[test]
fn mms_uniform_rates_for_every_positive_policy() {
    let config = MmsConfig {
        sizes: vec![10, 20, 40],
        perturb: 0.0,
        schemes: vec![
            Scheme::Vem(TauPolicy::VemTrace),
            Scheme::Vem(TauPolicy::FemQuadrature { order: 2 }),
            Scheme::Vem(TauPolicy::RectangleClosed),
            Scheme::Vem(TauPolicy::Constant(2.0 / 3.0)),
        ],
        ..MmsConfig::default()
    };
    let report = run_mms(&config, Execution::Parallel).unwrap();
    for row in report.rows.iter().filter(|r| r.rate.is_some()) {
        let rate = row.rate.unwrap();
        assert!(
            (1.8..=2.2).contains(&rate),
            "{} n={} rate {rate}",
            row.scheme,
            row.n
        );
    }
}

#[test]
fn hourglass_table_and_reference() {
    let config = HourglassConfig {
        sizes: vec![10, 20],
        taus: vec![0.01, 2.0 / 3.0, 100.0],
        reference_size: 40,
        ..HourglassConfig::default()
    };
    let report = run_hourglass(&config, Execution::Parallel).unwrap();
    assert_eq!(report.rows.len(), 8);
    let find = |scheme: &str, n: usize| {
        report
            .rows
            .iter()
            .find(|r| r.scheme == scheme && r.n == n)
            .unwrap()
    };
    for n in [10, 20] {
        let fem = find("isofem", n);
        let vem = find("vem:const:0.6666666666666666", n);
        assert!((fem.interior_max.unwrap() - vem.interior_max.unwrap()).abs() < 1e-10);
        assert!(find("vem:const:0.01", n).interior_max.unwrap() > vem.interior_max.unwrap());
        assert!(fem.linf_error.unwrap() <= find("vem:const:0.01", n).linf_error.unwrap());
    }
    assert!(report.fields.iter().all(|f| f.error.is_some()));
}

#[test]
fn hourglass_rejects_bad_configs() {
    let odd = HourglassConfig {
        sizes: vec![15],
        reference_size: 0,
        ..HourglassConfig::default()
    };
    assert_eq!(
        run_hourglass(&odd, Execution::Parallel)
            .unwrap_err()
            .category(),
        "invalid_input"
    );
    let empty = HourglassConfig {
        taus: vec![],
        ..HourglassConfig::default()
    };
    assert!(run_hourglass(&empty, Execution::Parallel).is_err());
}

#[test]
fn outputs_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_mms(&small_mms(), Execution::Parallel).unwrap();
    let written = write_outputs(&report, dir.path(), "mms", OutputFormats::default()).unwrap();
    assert_eq!(written.len(), 1 + report.fields.len());
    let back = read_csv(fs::File::open(dir.path().join("mms.csv")).unwrap()).unwrap();
    assert_eq!(back, report.rows);

    let vtk = fs::read_to_string(dir.path().join("mms_isofem_n8.vtk")).unwrap();
    let lines: Vec<&str> = vtk.lines().collect();
    assert_eq!(lines[4], "POINTS 81 double");
    let types = lines.iter().position(|l| *l == "CELL_TYPES 64").unwrap();
    assert!(lines[types + 1..types + 65].iter().all(|l| *l == "9"));
    let u_at = lines
        .iter()
        .position(|l| *l == "SCALARS u double 1")
        .unwrap();
    let values: Vec<f64> = lines[u_at + 2..u_at + 83]
        .iter()
        .map(|l| l.parse().unwrap())
        .collect();
    assert_eq!(values, report.fields[0].u);
    assert!(vtk.contains("SCALARS error double 1"));

    let csv_only = OutputFormats {
        csv: true,
        vtk: false,
    };
    let other = tempfile::tempdir().unwrap();
    assert_eq!(
        write_outputs(&report, other.path(), "t", csv_only)
            .unwrap()
            .len(),
        1
    );
}

#[test]
fn mesh_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let m = perturb_mesh(
        &make_structured_quad_mesh(6, 4, Rect::UNIT).unwrap(),
        0.3,
        9,
    )
    .unwrap();
    let path = dir.path().join("mesh.json");
    m.write_json(&path).unwrap();
    let back = Mesh::read_json(&path).unwrap();
    assert_eq!(back, m);
    fs::write(
        &path,
        "{\"points\": [[0,0]], \"cells\": [[0,1,2]], \"boundary\": []}",
    )
    .unwrap();
    assert_eq!(
        Mesh::read_json(&path).unwrap_err().category(),
        "invalid_input"
    );
    fs::write(&path, "not json").unwrap();
    assert_eq!(Mesh::read_json(&path).unwrap_err().category(), "parse");
}
