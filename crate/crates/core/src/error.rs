use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("integration failed near t = {last_t}: {reason}")]
    Integration { last_t: f64, reason: String },

    #[error("criterion inapplicable: {0}")]
    Inapplicable(String),

    #[error("denominator vanished while evaluating the Weyl function at depth {depth}")]
    Denominator { depth: f64 },

    #[error("Weyl estimate too uncertain (radius {radius:e} vs Im m = {im:e}); try depth >= {required_depth}")]
    Uncertain {
        radius: f64,
        im: f64,
        required_depth: f64,
    },

    #[error("loss of positivity at r = {r}: I = {value:e}")]
    Positivity { r: f64, value: f64 },

    #[error("requested range [{lo}, {hi}] exceeds the available table [{table_lo}, {table_hi}]")]
    Range {
        lo: f64,
        hi: f64,
        table_lo: f64,
        table_hi: f64,
    },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
