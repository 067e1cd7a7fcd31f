pub mod cli;
pub mod error;
pub mod estimate;
pub mod eyd;
pub mod meanfield;
pub mod numeric;
pub mod oracle;
pub mod ramsey;
pub mod spectrum;
pub mod validate;
pub mod young;

pub use error::{Error, Result};
pub use spectrum::Spectrum;
pub use young::{BigCount, YoungDiagram};
