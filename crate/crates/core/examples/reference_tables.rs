//! Optimal depths, weights and normalized variance profiles for K = 4..10.

use pairdesign::cli::{cmd_table1, cmd_table2};

fn main() -> pairdesign::Result<()> {
    println!("{}", cmd_table1(false)?);
    println!("{}", cmd_table2(false)?);
    Ok(())
}
