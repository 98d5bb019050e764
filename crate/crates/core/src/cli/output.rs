use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::experiments::BasinGrid;

/// Writes `bytes` to `dir/name` through a temporary file in the same
/// directory and a rename, so readers never see a partial file.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(&path).map_err(|e| e.error)?;
    Ok(path)
}

pub fn json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("serializable report");
    v.push(b'\n');
    v
}

/// Real number with 17 significant digits.
pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV table with a header row; fields are pre-formatted strings.
pub struct Csv {
    writer: csv::Writer<Vec<u8>>,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header).expect("in-memory write");
        Self { writer }
    }

    pub fn row<I: IntoIterator<Item = String>>(&mut self, fields: I) {
        let fields: Vec<String> = fields.into_iter().collect();
        self.writer.write_record(&fields).expect("in-memory write");
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.writer.into_inner().expect("in-memory flush")
    }
}

/// Gray level of a basin label: unresolved cells are black (0), equilibrium
/// `E_n` is `255 − 35·n`, floored at 45.
pub fn gray_level(label: Option<usize>) -> u8 {
    match label {
        None => 0,
        Some(n) => 255u8.saturating_sub(35u8.saturating_mul(n.min(6) as u8)),
    }
}

/// Plain PGM (P2). The top row is the largest `x₂`, so the image reads like
/// a plot with `x₁` to the right and `x₂` upwards.
pub fn basin_pgm(grid: &BasinGrid<f64>) -> Vec<u8> {
    let (n1, n2) = grid.resolution;
    let mut s = format!(
        "P2\n# basin raster: unresolved=0, E_n=255-35n (min 45); x1 right, x2 up\n{n1} {n2}\n255\n"
    );
    for b in (0..n2).rev() {
        let row: Vec<String> = (0..n1)
            .map(|a| gray_level(grid.label(a, b)).to_string())
            .collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s.into_bytes()
}

pub fn basin_csv(grid: &BasinGrid<f64>) -> Vec<u8> {
    let mut csv = Csv::new(&["i1", "i2", "x1", "x2", "label"]);
    let (n1, n2) = grid.resolution;
    for b in 0..n2 {
        for a in 0..n1 {
            let c = grid.cell_center(a, b);
            let label = match grid.label(a, b) {
                Some(n) => format!("E{n}"),
                None => "unresolved".into(),
            };
            csv.row([a.to_string(), b.to_string(), real(c.n1), real(c.n2), label]);
        }
    }
    csv.into_bytes()
}
