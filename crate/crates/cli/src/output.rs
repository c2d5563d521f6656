//! Deterministic CSV emission: fixed column order, fixed float format
//! (12 significant digits, scientific), empty fields for undefined values.

use std::io::{self, Write};

use crate::sweep::SweepRow;

pub const CSV_HEADER: &str = "loss_db,mu_prime_star,S_Z_mumu',E_Z_mumu',S_X_mumu',E_X_mumu',\
Y11_Z_true,Y11_Z_lower,Y11_X_true,Y11_X_lower,e11_X_true,e11_X_upper,R_3decoy,R_infinite,flags";

pub fn format_float(v: f64) -> String {
    format!("{v:.11e}")
}

fn format_opt(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

pub fn write_csv(rows: &[SweepRow], out: &mut impl Write) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            format_float(row.loss_db),
            format_float(row.mu_prime_star),
            format_float(row.s_z_signal),
            format_opt(row.e_z_signal),
            format_float(row.s_x_signal),
            format_opt(row.e_x_signal),
            format_float(row.y11_z_true),
            format_opt(row.y11_z_lower),
            format_float(row.y11_x_true),
            format_opt(row.y11_x_lower),
            format_opt(row.e11_x_true),
            format_opt(row.e11_x_upper),
            format_float(row.r_3decoy),
            format_float(row.r_infinite),
            row.flags,
        )?;
    }
    Ok(())
}

pub fn csv_string(rows: &[SweepRow]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("CSV is ASCII")
}
