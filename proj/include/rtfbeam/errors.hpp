// Error taxonomy shared by all rtfbeam modules.
#pragma once

#include <stdexcept>
#include <string>

namespace rtfbeam {

enum class ErrorCode {
  // numerics
  not_hermitian,
  not_positive_semi_definite,
  degenerate_spectrum,
  zero_matrix,
  zero_vector,
  collinear_vectors,
  // stft
  signal_too_short,
  dimension_mismatch,
  empty_range,
  // scenario
  source_on_microphone,
  invalid_schedule,
  // estimators
  singular_noise_covariance,
  zero_reference_entry,
  insufficient_channels,
  rank_deficient_blocking,
  collinear_with_interferer,
  // beamformer
  collinear_constraints,
  // evaluation
  zero_power,
  // cli
  config_error,
  io_error,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rtfbeam
