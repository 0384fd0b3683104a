//! Locale-independent CSV output with 17 significant digits.

use std::io::Write;

use crate::diagnostics::LedgerRow;

pub const ENERGY_HEADER: [&str; 7] =
    ["t", "kinetic", "elastic", "visc_accum", "reg_accum", "exchange", "balance_residual"];

/// `{:.16e}`: one leading digit plus sixteen decimals.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_table<W: Write>(
    mut w: W,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<f64>>,
) -> std::io::Result<()> {
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        let cells: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()
}

pub fn write_energy_csv<W: Write>(w: W, rows: &[LedgerRow]) -> std::io::Result<()> {
    write_table(
        w,
        &ENERGY_HEADER,
        rows.iter().map(|r| {
            vec![r.t, r.kinetic, r.elastic, r.visc_accum, r.reg_accum, r.exchange, r.balance_residual]
        }),
    )
}
