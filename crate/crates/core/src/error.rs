use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported dimension {got} (expected {expected})")]
    Dimension { got: usize, expected: &'static str },
    #[error("matrix entries must be finite")]
    NonFinite,
    #[error("matrix is not Hermitian (largest asymmetry {0:.3e})")]
    NotHermitian(f64),
    #[error("trace must equal 1 (deviation {0:.3e})")]
    TraceNotOne(f64),
    #[error("matrix is not positive semidefinite (smallest eigenvalue {0:.3e})")]
    NotPositive(f64),
    #[error("operator is not unitary (largest defect {0:.3e})")]
    NotUnitary(f64),
    #[error("ket is not normalized (deviation {0:.3e})")]
    NotNormalized(f64),
    #[error("diagonal of a coherence part must vanish")]
    NonzeroDiagonal,
    #[error("tensor product would leave the two-qubit workspace")]
    TensorTooLarge,
    #[error("basis index {0} out of range (expected 0 or 1)")]
    BasisIndex(u8),
    #[error("channel maps every basis state to a basis state; the witness is identically zero")]
    IncoherentChannel,
    #[error("probability {0} outside [0, 1]")]
    ProbabilityRange(f64),
    #[error("noise weights must satisfy p1 >= 0, p2 >= 0, p1 + p2 <= 1")]
    NoiseWeights,
    #[error("mixture needs nonnegative weights with a positive sum over same-size components")]
    BadMixture,
    #[error("cannot compose an empty operator sequence")]
    EmptyComposition,
    #[error("cannot correct a zero-probability branch")]
    ZeroProbabilityBranch,
    #[error("shots must be positive")]
    ZeroShots,
    #[error("grid step must lie in (0, 0.25]")]
    BadGridStep,
    #[error("need at least {needed} grid points")]
    TooFewPoints { needed: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
