//! dB conversions. Everything inside the library is linear; dB only appears
//! in configuration files and on the command line.

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}
