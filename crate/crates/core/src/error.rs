use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("spectrum is not simple: minimal eigenvalue gap {gap:e} below {threshold:e}")]
    DegenerateSpectrum { gap: f64, threshold: f64 },
    #[error("eigen iteration did not converge ({0})")]
    NonConvergent(String),
    #[error("matrix is singular to working tolerance")]
    Singular,
    #[error("corner entry {0:e} of an augmented matrix is not zero")]
    NonzeroCorner(f64),
    #[error("random draw produced a zero row of v after {0} attempts")]
    InfeasibleRow(usize),
    #[error("no quiver dictionary variant maps the point into the level set")]
    NoConventionFound,
    #[error("upper-left block is not regular semisimple")]
    DegenerateA,
    #[error("last-row entry {index} vanishes after diagonalization; point is outside g-hat-zero")]
    ZeroLastRowEntry { index: usize },
    #[error("augmented pair is not in normal form")]
    NotNormalized,
    #[error("augmented matrix is not strongly semisimple")]
    NotStronglySemisimple,
    #[error("commutator is not in tau-hat + m (residual {0:e})")]
    TauHatViolated(f64),
    #[error("reconstructed spectrum deviates from the requested eigenvalues by {0:e}")]
    EigenMismatch(f64),
    #[error("linear system for the m+ component is rank deficient")]
    MSystemSingular,
    #[error("corner of B-hat does not depend on mu-hat at this point")]
    DegenerateConstraint,
    #[error("A = B = 0: the diagonal subgroup has nothing to move")]
    ZeroPair,
    #[error("failed to recover eigenvalues from power sums")]
    RootFindingFailure,
    #[error("eigenvalue tracking is ambiguous at this step size")]
    BranchAmbiguity,
    #[error("search exhausted after {0} attempts")]
    SearchExhausted(usize),
    #[error("pull-back is not polynomial up to degree {0}")]
    NotNilpotent(usize),
    #[error("polynomial fit is ill-conditioned at degree {0}")]
    IllConditionedFit(usize),
    #[error("witness function has vanishing derivative here (|tr A-hat| = {0:e})")]
    WitnessFailsNonvanishing(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
