use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Everything that can go wrong inside the model.
///
/// Validation failures are separated from numerical ones so front ends can map
/// them onto different exit codes.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter violates its documented range.
    InvalidParameter { name: &'static str, value: f64, reason: &'static str },
    /// The laser sits on a heavy-hole transition; the dispersive model does not apply.
    ResonantDrive { detuning: f64 },
    /// The laser sits on a light-hole transition.
    ResonantLightHole { detuning: f64 },
    /// The acceptance window catches (almost) no probability.
    NoAcceptance { p_succ: f64 },
    /// The adaptive integrator could not meet its tolerance.
    StepSizeUnderflow { t: f64, step: f64, error_norm: f64 },
    /// The integrator hit its step budget before reaching the end time.
    TooManySteps { t: f64, steps: usize, worst_error: f64 },
    /// No evaluated point of a search satisfied the acceptance floor.
    Infeasible { reason: &'static str },
}

impl Error {
    /// `true` for failures caused by bad input rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. } | Error::ResonantDrive { .. } | Error::ResonantLightHole { .. }
        )
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::ResonantDrive { .. } => "resonant_drive",
            Error::ResonantLightHole { .. } => "resonant_light_hole",
            Error::NoAcceptance { .. } => "no_acceptance",
            Error::StepSizeUnderflow { .. } => "step_size_underflow",
            Error::TooManySteps { .. } => "too_many_steps",
            Error::Infeasible { .. } => "infeasible",
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter { name, value, reason } => {
                write!(f, "invalid parameter {name} = {value}: {reason}")
            }
            Error::ResonantDrive { detuning } => {
                write!(f, "laser within {detuning:e} meV of a trion transition; dispersive model invalid")
            }
            Error::ResonantLightHole { detuning } => {
                write!(f, "laser within {detuning:e} meV of a light-hole transition")
            }
            Error::NoAcceptance { p_succ } => {
                write!(f, "measurement window accepts no outcomes (P_succ = {p_succ:e})")
            }
            Error::StepSizeUnderflow { t, step, error_norm } => {
                write!(f, "step size underflow at t = {t} (h = {step:e}, error norm {error_norm:e})")
            }
            Error::TooManySteps { t, steps, worst_error } => {
                write!(f, "step budget of {steps} exhausted at t = {t} (worst accepted error norm {worst_error:e})")
            }
            Error::Infeasible { reason } => write!(f, "infeasible search: {reason}"),
        }
    }
}

pub(crate) fn ensure(cond: bool, name: &'static str, value: f64, reason: &'static str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, value, reason })
    }
}
