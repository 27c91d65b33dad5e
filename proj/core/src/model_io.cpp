#include "rdslab/model_io.hpp"

#include <fstream>
#include <nlohmann/json.hpp>

#include "rdslab/errors.hpp"

namespace rdslab {

using nlohmann::json;

SpectralModelConfig model_config_from_json(const json& j) {
    if (!j.is_object()) throw config_error("model config: expected a JSON object");
    SpectralModelConfig cfg;
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "n_modes") cfg.n_modes = value.get<int>();
            else if (key == "mu") cfg.mu = value.get<double>();
            else if (key == "beta") cfg.beta = value.get<double>();
            else if (key == "q_star") cfg.q_star = value.get<double>();
            else if (key == "reg_shift") cfg.reg_shift = value.get<double>();
            else if (key == "fd_calibrated_coupling") cfg.fd_calibrated_coupling = value.get<bool>();
            else if (key == "calibration_horizon") cfg.calibration_horizon = value.get<double>();
            else throw config_error("model config: unknown key '" + key + "'");
        }
    } catch (const json::exception& e) {
        throw config_error(std::string("model config: ") + e.what());
    }
    return cfg;
}

json model_config_to_json(const SpectralModelConfig& cfg) {
    return json{{"n_modes", cfg.n_modes},
                {"mu", cfg.mu},
                {"beta", cfg.beta},
                {"q_star", cfg.q_star},
                {"reg_shift", cfg.reg_shift},
                {"fd_calibrated_coupling", cfg.fd_calibrated_coupling},
                {"calibration_horizon", cfg.calibration_horizon}};
}

json model_summary_json(const SpectralModel& model) {
    json j;
    j["config"] = model_config_to_json(model.config());
    j["p_star"] = model.p_star();
    j["omega_A"] = model.omega_A();
    j["frac_norm"] = model.frac_norm();
    j["eigenvalues"] = std::vector<double>(model.eigenvalues().data(),
                                           model.eigenvalues().data() + model.n_modes());
    std::vector<double> c0(model.n_modes()), cpi(model.n_modes());
    for (int k = 0; k < model.n_modes(); ++k) {
        c0[k] = model.boundary_coupling()(k, 0);
        cpi[k] = model.boundary_coupling()(k, 1);
    }
    j["boundary_coupling_x0"] = c0;
    j["boundary_coupling_xpi"] = cpi;
    return j;
}

SpectralModelConfig load_model_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw io_error("cannot open model config " + path);
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw config_error("model config " + path + ": " + e.what());
    }
    return model_config_from_json(j);
}

void save_json(const json& j, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw io_error("cannot open " + path + " for writing");
    os << j.dump(2) << '\n';
    if (!os) throw io_error("write failed for " + path);
}

} // namespace rdslab
