//! Run the reduced-resolution property suite and print its table.

use wrtkit::selftest::{self, SelftestOptions};

fn main() {
    let report = selftest::run(&SelftestOptions { seed: 1, corrupt_constant: false });
    print!("{}", report.table());
    if !report.passed {
        std::process::exit(2);
    }
}
