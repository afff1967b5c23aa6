#include "rtfbeam/errors.hpp"

namespace rtfbeam {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::not_hermitian: return "NotHermitian";
    case ErrorCode::not_positive_semi_definite: return "NotPositiveSemiDefinite";
    case ErrorCode::degenerate_spectrum: return "DegenerateSpectrum";
    case ErrorCode::zero_matrix: return "ZeroMatrix";
    case ErrorCode::zero_vector: return "ZeroVector";
    case ErrorCode::collinear_vectors: return "CollinearVectors";
    case ErrorCode::signal_too_short: return "SignalTooShort";
    case ErrorCode::dimension_mismatch: return "DimensionMismatch";
    case ErrorCode::empty_range: return "EmptyRange";
    case ErrorCode::source_on_microphone: return "SourceOnMicrophone";
    case ErrorCode::invalid_schedule: return "InvalidSchedule";
    case ErrorCode::singular_noise_covariance: return "SingularNoiseCovariance";
    case ErrorCode::zero_reference_entry: return "ZeroReferenceEntry";
    case ErrorCode::insufficient_channels: return "InsufficientChannels";
    case ErrorCode::rank_deficient_blocking: return "RankDeficientBlocking";
    case ErrorCode::collinear_with_interferer: return "CollinearWithInterferer";
    case ErrorCode::collinear_constraints: return "CollinearConstraints";
    case ErrorCode::zero_power: return "ZeroPower";
    case ErrorCode::config_error: return "ConfigError";
    case ErrorCode::io_error: return "IoError";
  }
  return "UnknownError";
}

}  // namespace rtfbeam
