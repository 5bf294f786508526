// SPDX-License-Identifier: Apache-2.0

//! Grid files: a self-describing CSV layout and a compact little-endian binary
//! layout. Both are documented in `docs/formats.md`.

use std::io::{BufRead, Read, Write};

use num_complex::Complex64;

use super::{FieldValue, GridField, TorusError, TorusLattice};

pub const CSV_MAGIC: &str = "# cmc-grid";
pub const BINARY_MAGIC: &[u8; 8] = b"CMCGRID\0";
pub const FORMAT_VERSION: u32 = 1;

fn fmt_err(msg: impl Into<String>) -> TorusError {
    TorusError::Format(msg.into())
}

/// Writes a field as CSV: two header comment lines, a column line, then one
/// row `i,j,s,t,c0,c1,…` per site.
pub fn write_csv<T: FieldValue>(field: &GridField<T>, mut w: impl Write) -> Result<(), TorusError> {
    let l = field.lattice();
    writeln!(w, "{CSV_MAGIC} v{FORMAT_VERSION}")?;
    writeln!(
        w,
        "# kind={} periodic={} n1={} n2={} gamma1={:e},{:e} gamma2={:e},{:e}",
        T::KIND,
        field.is_periodic(),
        l.n1,
        l.n2,
        l.gamma1.re,
        l.gamma1.im,
        l.gamma2.re,
        l.gamma2.im
    )?;
    let cols: Vec<String> = (0..T::COMPONENTS).map(|k| format!("c{k}")).collect();
    writeln!(w, "i,j,s,t,{}", cols.join(","))?;
    let (m1, m2) = field.dims();
    let mut comps = Vec::with_capacity(T::COMPONENTS);
    for i in 0..m1 {
        for j in 0..m2 {
            comps.clear();
            field.get(i, j).components(&mut comps);
            let s = i as f64 / l.n1 as f64;
            let t = j as f64 / l.n2 as f64;
            let vals: Vec<String> = comps.iter().map(|c| format!("{c:e}")).collect();
            writeln!(w, "{i},{j},{s:e},{t:e},{}", vals.join(","))?;
        }
    }
    Ok(())
}

struct Header {
    kind: String,
    periodic: bool,
    lattice: TorusLattice,
}

fn parse_complex(s: &str) -> Result<Complex64, TorusError> {
    let mut it = s.split(',');
    let re = it.next().and_then(|v| v.trim().parse().ok());
    let im = it.next().and_then(|v| v.trim().parse().ok());
    match (re, im) {
        (Some(re), Some(im)) => Ok(Complex64::new(re, im)),
        _ => Err(fmt_err(format!("bad complex value {s:?}"))),
    }
}

fn parse_header(line: &str) -> Result<Header, TorusError> {
    let body = line.strip_prefix('#').ok_or_else(|| fmt_err("missing header line"))?;
    let mut kind = None;
    let mut periodic = None;
    let (mut n1, mut n2, mut g1, mut g2) = (None, None, None, None);
    for tok in body.split_whitespace() {
        let (k, v) = tok.split_once('=').ok_or_else(|| fmt_err(format!("bad header token {tok:?}")))?;
        match k {
            "kind" => kind = Some(v.to_string()),
            "periodic" => periodic = v.parse().ok(),
            "n1" => n1 = v.parse().ok(),
            "n2" => n2 = v.parse().ok(),
            "gamma1" => g1 = Some(parse_complex(v)?),
            "gamma2" => g2 = Some(parse_complex(v)?),
            _ => return Err(fmt_err(format!("unknown header key {k:?}"))),
        }
    }
    match (kind, periodic, n1, n2, g1, g2) {
        (Some(kind), Some(periodic), Some(n1), Some(n2), Some(g1), Some(g2)) => {
            Ok(Header { kind, periodic, lattice: TorusLattice::new(g1, g2, n1, n2)? })
        }
        _ => Err(fmt_err("incomplete header")),
    }
}

/// Reads a CSV grid file written by [`write_csv`]. Rows may appear in any
/// order but every site must be present exactly once.
pub fn read_csv<T: FieldValue>(r: impl BufRead) -> Result<GridField<T>, TorusError> {
    let mut lines = r.lines();
    let mut next = || -> Result<String, TorusError> {
        lines.next().ok_or_else(|| fmt_err("unexpected end of file"))?.map_err(TorusError::from)
    };
    let magic = next()?;
    if !magic.starts_with(CSV_MAGIC) {
        return Err(fmt_err("not a grid file"));
    }
    let version: u32 =
        magic[CSV_MAGIC.len()..].trim().trim_start_matches('v').parse().map_err(|_| fmt_err("bad version"))?;
    if version != FORMAT_VERSION {
        return Err(fmt_err(format!("unsupported version {version}")));
    }
    let header = parse_header(&next()?)?;
    if header.kind != T::KIND {
        return Err(fmt_err(format!("file holds {} values, expected {}", header.kind, T::KIND)));
    }
    let _columns = next()?;
    let l = header.lattice;
    let (m1, m2) = if header.periodic { (l.n1, l.n2) } else { (l.n1 + 1, l.n2 + 1) };
    let mut values: Vec<Option<T>> = vec![None; m1 * m2];
    let mut buf = Vec::with_capacity(T::COMPONENTS);
    let mut line_no = 3;
    for line in lines {
        let line = line?;
        line_no += 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 + T::COMPONENTS {
            return Err(fmt_err(format!("line {line_no}: expected {} columns", 4 + T::COMPONENTS)));
        }
        let i: usize = fields[0].trim().parse().map_err(|_| fmt_err(format!("line {line_no}: bad i")))?;
        let j: usize = fields[1].trim().parse().map_err(|_| fmt_err(format!("line {line_no}: bad j")))?;
        if i >= m1 || j >= m2 {
            return Err(fmt_err(format!("line {line_no}: site ({i},{j}) outside grid")));
        }
        buf.clear();
        for f in &fields[4..] {
            let v: f64 = f.trim().parse().map_err(|_| fmt_err(format!("line {line_no}: bad number {f:?}")))?;
            buf.push(v);
        }
        let slot = &mut values[i * m2 + j];
        if slot.is_some() {
            return Err(fmt_err(format!("line {line_no}: duplicate site ({i},{j})")));
        }
        *slot = Some(T::from_components(&buf));
    }
    let values: Option<Vec<T>> = values.into_iter().collect();
    let values = values.ok_or_else(|| fmt_err("missing sites"))?;
    GridField::from_values(l, header.periodic, values)
}

fn kind_code(kind: &str) -> u8 {
    match kind {
        "real" => 1,
        "complex" => 2,
        "quaternion" => 3,
        "mat2" => 4,
        "mat4" => 5,
        _ => 0,
    }
}

/// Writes the binary layout: magic, version, kind code, periodic flag,
/// `n1`, `n2`, the two generators, then all components as `f64` little endian.
pub fn write_binary<T: FieldValue>(field: &GridField<T>, mut w: impl Write) -> Result<(), TorusError> {
    let l = field.lattice();
    w.write_all(BINARY_MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&[kind_code(T::KIND), field.is_periodic() as u8, 0, 0])?;
    w.write_all(&(l.n1 as u32).to_le_bytes())?;
    w.write_all(&(l.n2 as u32).to_le_bytes())?;
    for v in [l.gamma1.re, l.gamma1.im, l.gamma2.re, l.gamma2.im] {
        w.write_all(&v.to_le_bytes())?;
    }
    let mut comps = Vec::with_capacity(T::COMPONENTS);
    for v in field.values() {
        comps.clear();
        v.components(&mut comps);
        for c in &comps {
            w.write_all(&c.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_binary<T: FieldValue>(mut r: impl Read) -> Result<GridField<T>, TorusError> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != BINARY_MAGIC {
        return Err(fmt_err("not a binary grid file"));
    }
    let mut u32buf = [0u8; 4];
    r.read_exact(&mut u32buf)?;
    let version = u32::from_le_bytes(u32buf);
    if version != FORMAT_VERSION {
        return Err(fmt_err(format!("unsupported version {version}")));
    }
    let mut flags = [0u8; 4];
    r.read_exact(&mut flags)?;
    if flags[0] != kind_code(T::KIND) {
        return Err(fmt_err(format!("kind code {} does not match {}", flags[0], T::KIND)));
    }
    let periodic = flags[1] != 0;
    r.read_exact(&mut u32buf)?;
    let n1 = u32::from_le_bytes(u32buf) as usize;
    r.read_exact(&mut u32buf)?;
    let n2 = u32::from_le_bytes(u32buf) as usize;
    let mut f64buf = [0u8; 8];
    let mut g = [0.0; 4];
    for v in g.iter_mut() {
        r.read_exact(&mut f64buf)?;
        *v = f64::from_le_bytes(f64buf);
    }
    let l = TorusLattice::new(Complex64::new(g[0], g[1]), Complex64::new(g[2], g[3]), n1, n2)?;
    let sites = if periodic { n1 * n2 } else { (n1 + 1) * (n2 + 1) };
    let mut values = Vec::with_capacity(sites);
    let mut comps = vec![0.0; T::COMPONENTS];
    for _ in 0..sites {
        for c in comps.iter_mut() {
            r.read_exact(&mut f64buf)?;
            *c = f64::from_le_bytes(f64buf);
        }
        values.push(T::from_components(&comps));
    }
    GridField::from_values(l, periodic, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{ComplexMat2, Quaternion};

    #[test]
    fn csv_roundtrip_quaternion() {
        let l = TorusLattice::new(Complex64::new(1.5, 0.0), Complex64::new(0.2, 2.0), 8, 9).unwrap();
        let f = GridField::from_fn(l, |i, j| Quaternion::new(i as f64 * 0.1, -(j as f64), 1.0 / 3.0, 1e-300));
        let mut buf = Vec::new();
        write_csv(&f, &mut buf).unwrap();
        let g: GridField<Quaternion> = read_csv(buf.as_slice()).unwrap();
        assert_eq!(f, g);
        assert!(read_csv::<ComplexMat2>(buf.as_slice()).is_err());
    }

    #[test]
    fn binary_roundtrip_closed_matrix_field() {
        let l = TorusLattice::unit_square(8).unwrap();
        let f = GridField::from_fn_closed(l, |i, j| {
            ComplexMat2::from_fn(|a, b| Complex64::new((i + a) as f64, (j * b) as f64 - 0.5))
        });
        let mut buf = Vec::new();
        write_binary(&f, &mut buf).unwrap();
        let g: GridField<ComplexMat2> = read_binary(buf.as_slice()).unwrap();
        assert_eq!(f, g);
        assert!(read_binary::<ComplexMat2>(&buf[..buf.len() - 3]).is_err());
    }

    #[test]
    fn csv_rejects_missing_rows() {
        let l = TorusLattice::unit_square(8).unwrap();
        let f = GridField::constant(l, 1.0f64);
        let mut buf = Vec::new();
        write_csv(&f, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let truncated: String = text.lines().take(20).map(|l| format!("{l}\n")).collect();
        assert!(read_csv::<f64>(truncated.as_bytes()).is_err());
    }
}
