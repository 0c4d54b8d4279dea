use std::io::{Read, Write};

use super::BenchRow;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "problem,variant,seed,generations,elapsed_ms,final_residual,converged,problem_hash";

fn csv_err(err: csv::Error) -> Error {
    match err.kind() {
        csv::ErrorKind::Io(_) => Error::Io(err.to_string()),
        _ => Error::Parse { line: err.position().map_or(0, |p| p.line() as usize), message: err.to_string() },
    }
}

/// Writes the header and one LF-terminated line per row. Reals use the
/// shortest representation that parses back to the same value.
pub fn write_csv<W: Write>(rows: &[BenchRow], sink: W) -> Result<()> {
    let mut writer =
        csv::WriterBuilder::new().has_headers(false).terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
    writer.write_record(CSV_HEADER.split(',')).map_err(csv_err)?;
    for row in rows {
        writer.serialize(row).map_err(csv_err)?;
    }
    writer.flush()?;
    Ok(())
}

/// Parses CSV produced by [`write_csv`]; the header must match exactly.
pub fn read_csv<R: Read>(source: R) -> Result<Vec<BenchRow>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(source);
    let header = reader.headers().map_err(csv_err)?;
    let found = header.iter().collect::<Vec<_>>().join(",");
    if found != CSV_HEADER {
        return Err(Error::Parse { line: 1, message: format!("unexpected header '{found}'") });
    }
    reader.deserialize().map(|r| r.map_err(csv_err)).collect()
}
