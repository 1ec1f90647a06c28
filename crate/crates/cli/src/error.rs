use std::path::PathBuf;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    pub const INTERNAL: u8 = 1;
    pub const ARGUMENT: u8 = 2;
    pub const DATA: u8 = 3;
    pub const NUMERIC: u8 = 4;
    pub const IO: u8 = 5;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("refusing to overwrite existing output {}; pass --force to replace it", .0.display())]
    Exists(PathBuf),
    #[error("config file {}: {detail}", path.display())]
    Config { path: PathBuf, detail: String },
    #[error(transparent)]
    Core(#[from] softrange::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use softrange::Error as E;
        match self {
            CliError::Usage(_) | CliError::Exists(_) | CliError::Config { .. } => exit::ARGUMENT,
            CliError::Core(e) => match e {
                E::Argument(_) => exit::ARGUMENT,
                E::Dimension { .. }
                | E::Schema(_)
                | E::Dataset(_)
                | E::Split(_)
                | E::Training(_)
                | E::Format { .. }
                | E::Version { .. } => exit::DATA,
                E::Numeric(_) => exit::NUMERIC,
                E::Io { .. } => exit::IO,
                _ => exit::INTERNAL,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;
    use softrange::Error as E;

    #[test]
    fn exit_codes_by_error_class() {
        let cases = [
            (CliError::Usage("x".into()), exit::ARGUMENT),
            (CliError::Exists("a".into()), exit::ARGUMENT),
            (E::Argument("x".into()).into(), exit::ARGUMENT),
            (E::dim("x", 1, 2).into(), exit::DATA),
            (E::Schema("x".into()).into(), exit::DATA),
            (E::Version { found: 2, supported: 1 }.into(), exit::DATA),
            (E::Numeric("nan".into()).into(), exit::NUMERIC),
            (E::io("p", std::io::Error::other("x")).into(), exit::IO),
        ];
        for (err, code) in cases {
            assert_eq!(err.exit_code(), code, "{err}");
        }
    }
}
