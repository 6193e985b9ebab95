use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("wavelength {lambda_um} um is outside the validity window [{min_um}, {max_um}] um")]
    OutOfWindow { lambda_um: f64, min_um: f64, max_um: f64 },

    #[error("dispersion formula gives n^2 = {n_squared} <= 1 at {lambda_um} um")]
    NonPhysical { lambda_um: f64, n_squared: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("partner frequency is not positive (pump {lambda0_um} um, signal {lambda1_um} um)")]
    NonPositiveFrequency { lambda0_um: f64, lambda1_um: f64 },

    #[error("no phase-matching root in the search window: {0}")]
    NoRootInWindow(String),

    #[error("extraordinary-index fixed point did not converge after {iterations} iterations")]
    FixedPointDivergence { iterations: usize },

    #[error("sweep produced no solvable grid point")]
    EmptySweep,

    #[error("negative radicand in detuned wavevector of mode {mode}")]
    NegativeRadicand { mode: u8 },

    #[error("Fresnel coefficient is indeterminate for mode {mode}")]
    DegenerateAngles { mode: u8 },

    #[error("coupling g1*g2*l^2 = {value} exceeds {limit}; the small-coupling regime does not hold")]
    StrongCoupling { value: f64, limit: f64 },

    #[error(
        "near-degenerate phase matching: |n1 sec(phi1) - n2 sec(phi2)| = {denominator:.3e} < {epsilon:.1e}; \
         the 1/l frequency-integral approximation does not apply here (l^-1/2 regime, not modelled)"
    )]
    NearDegeneratePhaseMatch { denominator: f64, epsilon: f64 },

    #[error("root finder did not converge: {0}")]
    RootNotConverged(String),

    #[error("quadrature did not reach tolerance (estimated error {estimate:.3e})")]
    QuadratureNotConverged { estimate: f64 },

    #[error("unknown crystal `{0}`")]
    UnknownCrystal(String),

    #[error("registry parse error at line {line}: {message}")]
    RegistryParse { line: usize, message: String },
}
