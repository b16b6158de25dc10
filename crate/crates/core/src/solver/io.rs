use std::fmt::Write as _;

use super::run::Record;
use super::state::{FieldState, FIELDS};
use super::Basis;
use crate::error::{Error, Result};
use crate::scalar::{Precision, Real};

pub const CSV_HEADER: &str = "step,tau,l2_error_p,energy";

/// Time series as CSV with 17 significant digits.
pub fn time_series_csv(records: &[Record]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e}",
            r.step, r.time, r.l2_error, r.energy
        )
        .unwrap();
    }
    out
}

const MAGIC: &str = "bbdg-checkpoint 1";

/// Text header (`key value` lines ending with `end`) followed by the
/// coefficients as little-endian floats.
pub fn write_checkpoint<T: Real>(state: &FieldState<T>) -> Vec<u8> {
    let header = format!(
        "{MAGIC}\ndegree {}\nnp {}\nelements {}\nbasis {}\nprecision {}\ntime {:.16e}\nend\n",
        state.degree,
        state.np,
        state.n_elements,
        state.basis.name(),
        T::PRECISION.name(),
        state.time
    );
    let mut out = header.into_bytes();
    out.reserve(state.data.len() * T::BYTES);
    for v in &state.data {
        v.write_le(&mut out);
    }
    out
}

pub fn read_checkpoint<T: Real>(bytes: &[u8]) -> Result<FieldState<T>> {
    let bad = |m: &str| Error::Parse(format!("checkpoint: {m}"));
    let mut pos = 0;
    let mut next_line = || -> Result<&str> {
        let rest = &bytes[pos..];
        let end = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| bad("truncated header"))?;
        pos += end + 1;
        std::str::from_utf8(&rest[..end]).map_err(|_| bad("header is not utf-8"))
    };
    if next_line()? != MAGIC {
        return Err(bad("missing magic line"));
    }
    let (mut degree, mut np, mut elements, mut basis, mut precision, mut time) =
        (None, None, None, None, None, None);
    loop {
        let line = next_line()?;
        if line == "end" {
            break;
        }
        let (key, value) = line.split_once(' ').ok_or_else(|| bad("malformed header line"))?;
        let num = |v: &str| v.parse::<usize>().map_err(|_| bad("bad integer"));
        match key {
            "degree" => degree = Some(num(value)?),
            "np" => np = Some(num(value)?),
            "elements" => elements = Some(num(value)?),
            "basis" => basis = Some(value.parse::<Basis>().map_err(|e| bad(&e))?),
            "precision" => precision = Some(value.parse::<Precision>().map_err(|e| bad(&e))?),
            "time" => time = Some(value.parse::<f64>().map_err(|_| bad("bad time"))?),
            _ => return Err(bad(&format!("unknown key '{key}'"))),
        }
    }
    let missing = |k: &str| bad(&format!("missing '{k}'"));
    let (degree, np, n_elements) = (
        degree.ok_or_else(|| missing("degree"))?,
        np.ok_or_else(|| missing("np"))?,
        elements.ok_or_else(|| missing("elements"))?,
    );
    let precision = precision.ok_or_else(|| missing("precision"))?;
    if precision != T::PRECISION {
        return Err(bad(&format!("stored precision is {}", precision.name())));
    }
    let len = FIELDS * np * n_elements;
    let body = &bytes[pos..];
    if body.len() != len * T::BYTES {
        return Err(Error::SizeMismatch {
            expected: len * T::BYTES,
            got: body.len(),
        });
    }
    Ok(FieldState {
        degree,
        np,
        n_elements,
        basis: basis.ok_or_else(|| missing("basis"))?,
        time: time.ok_or_else(|| missing("time"))?,
        data: body.chunks_exact(T::BYTES).map(T::read_le).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checkpoint_round_trip() {
        let mut s = FieldState::<f32>::zeros(2, 10, 3, Basis::Bernstein);
        s.time = 0.125;
        for (i, v) in s.data.iter_mut().enumerate() {
            *v = i as f32 * 0.5 - 3.0;
        }
        let bytes = write_checkpoint(&s);
        assert_eq!(read_checkpoint::<f32>(&bytes).unwrap(), s);
        assert!(read_checkpoint::<f64>(&bytes).is_err());
        assert!(read_checkpoint::<f32>(&bytes[..bytes.len() - 1]).is_err());
    }

    #[test]
    fn csv_format() {
        let csv = time_series_csv(&[Record {
            step: 3,
            time: 0.5,
            l2_error: 1e-3,
            energy: 0.125,
        }]);
        assert_eq!(
            csv,
            "step,tau,l2_error_p,energy\n3,5.0000000000000000e-1,1.0000000000000000e-3,1.2500000000000000e-1\n"
        );
    }
}
