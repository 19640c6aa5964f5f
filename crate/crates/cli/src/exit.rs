use aimp_core::cas::remote::RemoteError;
use aimp_core::cas::CasError;
use aimp_core::dcat::HarvestError;
use aimp_core::passport::PassportError;
use aimp_core::pipeline::PipelineError;

pub const OK: u8 = 0;
pub const VERIFY: u8 = 1;
pub const CONFIG: u8 = 2;
pub const EXECUTION: u8 = 3;
pub const NETWORK: u8 = 4;
pub const INTERNAL: u8 = 5;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new(CONFIG, message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(INTERNAL, message)
    }
}

pub fn pipeline_code(e: &PipelineError) -> u8 {
    use PipelineError::*;
    match e {
        ExecutionFailed { .. } | MissingOut { .. } => EXECUTION,
        Io { .. } | Store(_) | Graph(_) => INTERNAL,
        _ => CONFIG,
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        Self::new(pipeline_code(&e), e.to_string())
    }
}

impl From<PassportError> for Failure {
    fn from(e: PassportError) -> Self {
        use PassportError::*;
        let code = match &e {
            SelfInconsistent { .. } => VERIFY,
            Pipeline(p) => pipeline_code(p),
            Io { .. } | Graph(_) | InvalidGraph(_) => INTERNAL,
            ManualIncomplete(_) | ManualSyntax(_) | IncompleteLock(_) | Load(_) | Training(_) => {
                CONFIG
            }
        };
        Self::new(code, e.to_string())
    }
}

impl From<HarvestError> for Failure {
    fn from(e: HarvestError) -> Self {
        let code = match &e {
            HarvestError::Network { .. } | HarvestError::HttpStatus { .. } => NETWORK,
            HarvestError::Syntax { .. } | HarvestError::Descriptor(_) => CONFIG,
        };
        Self::new(code, e.to_string())
    }
}

impl From<RemoteError> for Failure {
    fn from(e: RemoteError) -> Self {
        let code = match &e {
            RemoteError::Network(_)
            | RemoteError::Unauthorized(_)
            | RemoteError::HttpStatus { .. } => NETWORK,
            RemoteError::DigestMismatch { .. } => VERIFY,
            RemoteError::EmptyToken => CONFIG,
            RemoteError::Store(_) => INTERNAL,
        };
        Self::new(code, e.to_string())
    }
}

impl From<CasError> for Failure {
    fn from(e: CasError) -> Self {
        Self::internal(e.to_string())
    }
}
