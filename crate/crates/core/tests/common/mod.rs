#![allow(dead_code)]

use std::path::Path;

use charflow::scenario::Scenario;

pub const STATIC: &str = r#"
[eos]
kind = "polytropic"
gamma = 2.0
kappa = 0.5
rho_ref = 0.0

[data]
v_star = 1.0
u_star = 0.5
r0 = 1.0
beta_plus = { kind = "constant", value = 2.0 }
alpha_minus = { kind = "constant", value = 2.0 }

[grid]
nu = 64
nv = 128
"#;

pub const SPHERICAL: &str = r#"
[eos]
kind = "polytropic"
gamma = 2.0
kappa = 0.5
rho_ref = 0.0

[geometry]
mode = "spherical"

[data]
v_star = 1.0
u_star = 0.5
r0 = 1.0
beta_plus = { kind = "sine", mean = 2.0, amplitude = 0.1 }
alpha_minus = { kind = "linear", value = 2.0, slope = 0.1 }

[grid]
nu = 8
nv = 32
h = 0.25

[output]
raster_nt = 32
raster_nr = 32
"#;

pub const INFLOW: &str = r#"
[eos]
kind = "polytropic"
gamma = 2.0
kappa = 0.5
rho_ref = 0.0

[data]
v_star = 1.0
u_star = 1.0
r0 = 1.0
epsilon_guard = 0.1
n_samples = 257
beta_plus = { kind = "constant", value = 2.0 }
alpha_minus = { kind = "constant", value = 2.0 }

[grid]
nu = 64
nv = 32
"#;

pub fn scenario(text: &str) -> Scenario {
    Scenario::from_toml(text, Path::new(".")).expect("scenario parses")
}

/// Replace one `key = value` line (first match) in a scenario text.
pub fn set(text: &str, key: &str, value: &str) -> String {
    let mut done = false;
    text.lines()
        .map(|l| {
            if !done && l.trim_start().starts_with(&format!("{key} =")) {
                done = true;
                format!("{key} = {value}")
            } else {
                l.to_string()
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
        + "\n"
}
