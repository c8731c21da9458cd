use primlib::Error;

pub const INPUT: u8 = 2;
pub const PARAMS: u8 = 3;
pub const INFEASIBLE: u8 = 4;
pub const EMPTY_SELECTION: u8 = 5;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn input(message: impl Into<String>) -> Self {
        Self::new(INPUT, message)
    }

    pub fn params(message: impl Into<String>) -> Self {
        Self::new(PARAMS, message)
    }

    /// Prefixes the message with what was being done.
    pub fn context(mut self, what: impl std::fmt::Display) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidParameter(_) | Error::ConflictingConstraints { .. } | Error::TooFewDistinctRows { .. } => {
                PARAMS
            }
            Error::InfeasibleStretching { .. } | Error::EmptyCluster { .. } | Error::Singular => INFEASIBLE,
            _ => INPUT,
        };
        Self::new(code, e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::input(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::input(e.to_string())
    }
}

pub trait Context<T> {
    fn context(self, what: impl std::fmt::Display) -> Result<T, CliError>;
}

impl<T, E: Into<CliError>> Context<T> for Result<T, E> {
    fn context(self, what: impl std::fmt::Display) -> Result<T, CliError> {
        self.map_err(|e| e.into().context(what))
    }
}
