use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two vectors or matrices that must share a dimension do not.
    DimensionMismatch { expected: usize, found: usize },
    /// A lattice needs at least two sites.
    LatticeTooSmall(usize),
    /// Pair potential is not even under minimal image: `V(d) != V(M - d)`.
    OddPotential { displacement: usize, forward: f64, backward: f64 },
    /// A value that must be finite is NaN or infinite.
    NonFinite(&'static str),
    /// Time step must be strictly positive.
    NonPositiveStep(f64),
    /// Negative total time.
    NegativeTime(f64),
    /// Wavefunction that must be normalized is not.
    NotNormalized(f64),
    /// Operation would push amplitude above the occupation cutoff.
    Truncation { weight: f64, n_max: usize },
    /// Displacement too large for the cutoff; carries the smallest safe `N_max`.
    TailUnsafe { required: usize, n_max: usize },
    /// Particle number outside the sectors held by the basis.
    SectorOutOfRange { n: usize, n_min: usize, n_max: usize },
    /// The state carries weight outside the sector an operation requires.
    SectorMismatch { sector: usize, stray_weight: f64 },
    /// Operation needs the full Fock space starting at the vacuum.
    NotFullFock,
    /// Propagation requested for an operator not flagged Hermitian.
    NotHermitian,
    /// Observable matrix fails the Hermiticity check.
    ObservableNotHermitian(f64),
    /// Particle number below what the operation needs.
    TooFewParticles { needed: usize, found: usize },
    /// Requested time lies outside a stored trajectory or off its grid.
    TimeOutOfRange { t: f64, start: f64, end: f64 },
    /// Estimated memory exceeds the configured budget.
    Infeasible { bytes: u64, budget: u64 },
    /// A configuration value is invalid.
    InvalidParameter(&'static str),
    /// Krylov exponential failed to converge.
    KrylovBreakdown,
    /// Not enough data points for a fit.
    FitUnderdetermined,
    /// A density matrix fails Hermiticity, positivity or unit trace.
    DensityInvariant { what: &'static str, value: f64 },
    /// A Bogoliubov map violates `U†U - V†V = 1` or `U†V̄ - V†Ū = 0`.
    BogoliubovInvariant { what: &'static str, value: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::LatticeTooSmall(m) => write!(f, "lattice needs at least 2 sites, got {m}"),
            Error::OddPotential { displacement, forward, backward } => write!(
                f,
                "pair potential is not even at displacement {displacement}: V({displacement}) = {forward} but V(M-{displacement}) = {backward}"
            ),
            Error::NonFinite(what) => write!(f, "non-finite value in {what}"),
            Error::NonPositiveStep(dt) => write!(f, "time step must be positive, got {dt}"),
            Error::NegativeTime(t) => write!(f, "total time must be nonnegative, got {t}"),
            Error::NotNormalized(n) => write!(f, "wavefunction must be normalized, norm is {n}"),
            Error::Truncation { weight, n_max } => write!(
                f,
                "amplitude {weight:e} in the top sector N_max = {n_max} would be truncated"
            ),
            Error::TailUnsafe { required, n_max } => write!(
                f,
                "Weyl displacement unsafe for N_max = {n_max}; need N_max >= {required}"
            ),
            Error::SectorOutOfRange { n, n_min, n_max } => {
                write!(f, "sector {n} outside basis range {n_min}..={n_max}")
            }
            Error::SectorMismatch { sector, stray_weight } => write!(
                f,
                "state is not supported on sector {sector}: weight {stray_weight:e} elsewhere"
            ),
            Error::NotFullFock => write!(f, "operation requires a Fock basis starting at the vacuum"),
            Error::NotHermitian => write!(f, "operator is not flagged Hermitian"),
            Error::ObservableNotHermitian(dev) => {
                write!(f, "observable is not Hermitian (max deviation {dev:e})")
            }
            Error::TooFewParticles { needed, found } => {
                write!(f, "need at least {needed} particles, got {found}")
            }
            Error::TimeOutOfRange { t, start, end } => {
                write!(f, "time {t} is not a grid point in [{start}, {end}]")
            }
            Error::Infeasible { bytes, budget } => write!(
                f,
                "estimated memory {bytes} bytes exceeds budget {budget} bytes"
            ),
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            Error::KrylovBreakdown => write!(f, "Krylov exponential did not reach tolerance"),
            Error::FitUnderdetermined => write!(f, "not enough points for a fit"),
            Error::DensityInvariant { what, value } => {
                write!(f, "density matrix invariant violated: {what} ({value:e})")
            }
            Error::BogoliubovInvariant { what, value } => {
                write!(f, "Bogoliubov identity violated: {what} ({value:e})")
            }
        }
    }
}

impl core::error::Error for Error {}
