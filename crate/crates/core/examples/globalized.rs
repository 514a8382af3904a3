//! Two-layer ball read from the bundled data file, swept over the outer
//! budget.

use std::path::Path;

use wdro::globalized_value;
use wdro::io::read_globalized;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/globalized.json");
    for theta in [0.0, 0.1, 0.5, 2.0] {
        let inst = read_globalized(&path, Some(theta))?.instance;
        let r = globalized_value(&inst)?;
        println!("theta {theta:<4} value {:.12}  lambda* {:.6}  mu* {:.6}", r.value, r.lambda_star, r.mu_star);
    }
    Ok(())
}
