#pragma once

#include "ghzalign/spin_algebra.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace ghzalign {

/// Malformed or unreadable state file.
class StateFileError : public std::runtime_error {
public:
    explicit StateFileError(const std::string& what) : std::runtime_error(what) {}
};

/// Parses {"j": number, "amplitudes": [[re, im], ...]} with amplitudes ordered
/// m = j..-j. The norm must be within 1e-6 of one; the state is renormalized.
inline SpinState parse_state_json(const nlohmann::json& doc) {
    try {
        if (!doc.is_object() || !doc.contains("j") || !doc.contains("amplitudes"))
            throw StateFileError("state file: expected an object with keys \"j\" and \"amplitudes\"");
        if (!doc.at("j").is_number()) throw StateFileError("state file: \"j\" must be a number");
        const Spin spin = Spin::from_value(doc.at("j").get<double>());
        const auto& amps = doc.at("amplitudes");
        if (!amps.is_array()) throw StateFileError("state file: \"amplitudes\" must be an array");
        if (static_cast<Eigen::Index>(amps.size()) != spin.dim())
            throw StateFileError("state file: expected " + std::to_string(spin.dim()) + " amplitudes for j = " +
                                 std::to_string(spin.value()));
        CVector a(spin.dim());
        for (Eigen::Index i = 0; i < spin.dim(); ++i) {
            const auto& pair = amps[static_cast<std::size_t>(i)];
            if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number())
                throw StateFileError("state file: amplitude " + std::to_string(i) + " must be [re, im]");
            a(i) = Complex(pair[0].get<double>(), pair[1].get<double>());
        }
        if (std::abs(a.squaredNorm() - 1.0) > 1e-6)
            throw StateFileError("state file: amplitudes are not normalized (norm^2 = " +
                                 std::to_string(a.squaredNorm()) + ")");
        return SpinState::normalized(spin, a);
    } catch (const std::invalid_argument& e) {
        throw StateFileError(std::string("state file: ") + e.what());
    }
}

inline SpinState load_state_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw StateFileError("state file: cannot open " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw StateFileError(std::string("state file: invalid JSON: ") + e.what());
    }
    return parse_state_json(doc);
}

inline nlohmann::json state_to_json(const SpinState& state) {
    nlohmann::json amps = nlohmann::json::array();
    for (Eigen::Index i = 0; i < state.amplitudes.size(); ++i)
        amps.push_back({state.amplitudes(i).real(), state.amplitudes(i).imag()});
    return {{"j", state.spin.value()}, {"amplitudes", amps}};
}

} // namespace ghzalign
