use crate::error::{Error, Result};

// Lanczos approximation, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos(x: f64) -> f64 {
    // valid for x >= 0.5
    let z = x - 1.0;
    let mut a = LANCZOS[0];
    let t = z + LANCZOS_G + 0.5;
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    (2.0 * std::f64::consts::PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * a
}

/// Euler Gamma on `(0, 4]`.
pub fn gamma_real(x: f64) -> Result<f64> {
    if !(x > 0.0 && x <= 4.0) {
        return Err(Error::Domain {
            value: x,
            domain: "(0, 4]",
        });
    }
    if x < 0.5 {
        Ok(lanczos(x + 1.0) / x)
    } else {
        Ok(lanczos(x))
    }
}

/// Gamma at the arguments `(m+2)/(m+1)` that appear in the crossing formulas.
pub(crate) fn gamma_ratio(m: u32) -> f64 {
    let x = (m as f64 + 2.0) / (m as f64 + 1.0);
    gamma_real(x).expect("(m+2)/(m+1) lies in (1, 2]")
}
