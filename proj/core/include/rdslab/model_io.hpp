#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>

#include "rdslab/spectral_model.hpp"

namespace rdslab {

// Keys: n_modes, mu, beta, q_star, reg_shift, fd_calibrated_coupling,
// calibration_horizon (the last three optional). Unknown keys rejected.
SpectralModelConfig model_config_from_json(const nlohmann::json& j);
nlohmann::json model_config_to_json(const SpectralModelConfig& cfg);

// Provenance summary: configuration plus the derived spectral data
// (eigenvalues, drifts, omega_A, frac_norm, boundary coupling).
nlohmann::json model_summary_json(const SpectralModel& model);

SpectralModelConfig load_model_config(const std::string& path);
void save_json(const nlohmann::json& j, const std::string& path);

} // namespace rdslab
