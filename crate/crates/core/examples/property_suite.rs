//! The bundled property checks, as run by `polycap check`.
use polycap::cli::property_suite;

fn main() -> polycap::Result<()> {
    let (_, checks) = property_suite(42)?;
    for c in checks {
        println!("{:<24} {}  {}", c.name, if c.passed { "pass" } else { "FAIL" }, c.detail);
    }
    Ok(())
}
