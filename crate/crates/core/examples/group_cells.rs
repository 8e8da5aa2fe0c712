// Per-cell grid records grouped into levels by count, top level capped.

use monotone_lrt::cli::io::{group_cells, read_cells, write_long};

fn main() -> Result<(), monotone_lrt::Error> {
    let cells = "cell,count,value
r1c1,0,0.81
r1c2,2,0.88
r1c3,0,0.79
r2c1,5,0.86
r2c2,1,0.84
r2c3,3,0.85
";
    let records = read_cells(cells.as_bytes())?;
    let grouped = group_cells(&records, Some(3));
    write_long(std::io::stdout().lock(), &grouped)?;
    Ok(())
}
