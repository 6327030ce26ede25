#pragma once

#include <cmath>
#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hyperdisc {

/// Ordered set of discount factors gamma_0 = 0 < gamma_1 < ... < gamma_n =
/// gamma_max with gamma_i = (1 - b^i)^k. Index 0 is the immediate-reward
/// anchor; learned heads normally start at index 1.
struct GammaLadder {
    double gamma_max = 0.0;
    int n_gamma = 0;
    double k = 0.0;
    double b = 0.0;
    std::vector<double> gammas; // size n_gamma + 1

    std::size_t size() const { return gammas.size(); }

    std::string to_config_text() const {
        std::ostringstream os;
        os.precision(17);
        os << "gamma_max=" << gamma_max << "\nn_gamma=" << n_gamma << "\nk=" << k << "\n";
        return os.str();
    }

    std::string gammas_csv_row() const {
        std::ostringstream os;
        os.precision(17);
        for (std::size_t i = 0; i < gammas.size(); ++i) {
            if (i) os << ',';
            os << gammas[i];
        }
        return os.str();
    }
};

inline GammaLadder build_ladder(double gamma_max, int n_gamma, double k) {
    if (!(gamma_max > 0.0 && gamma_max < 1.0))
        throw std::invalid_argument("gamma_max must be in (0, 1)");
    if (n_gamma < 2) throw std::invalid_argument("n_gamma must be >= 2");
    if (!(k > 0.0)) throw std::invalid_argument("k must be > 0");

    // u = gamma_max^(1/k); small k with gamma_max near 1 underflows 1 - u
    const double u = std::exp(std::log(gamma_max) / k);
    if (!(1.0 - u >= 1e-300)) {
        std::ostringstream os;
        os << "1 - gamma_max^(1/k) underflows for gamma_max=" << gamma_max << ", k=" << k;
        throw std::invalid_argument(os.str());
    }

    GammaLadder ladder;
    ladder.gamma_max = gamma_max;
    ladder.n_gamma = n_gamma;
    ladder.k = k;
    ladder.b = std::exp(std::log(1.0 - u) / n_gamma);
    ladder.gammas.resize(static_cast<std::size_t>(n_gamma) + 1);
    for (int i = 0; i <= n_gamma; ++i) {
        ladder.gammas[static_cast<std::size_t>(i)] =
            std::pow(1.0 - std::pow(ladder.b, i), k);
    }
    ladder.gammas.front() = 0.0;
    if (std::fabs(ladder.gammas.back() - gamma_max) > 1e-9)
        throw std::runtime_error("ladder endpoint failed to reproduce gamma_max");
    ladder.gammas.back() = gamma_max; // pin the top rung exactly
    for (int i = 0; i < n_gamma; ++i) {
        if (!(ladder.gammas[static_cast<std::size_t>(i)] <
              ladder.gammas[static_cast<std::size_t>(i) + 1]))
            throw std::runtime_error("ladder gammas are not strictly increasing");
    }
    return ladder;
}

inline GammaLadder ladder_from_config_text(const std::string& text) {
    double gamma_max = 0.0, k = 0.0;
    int n_gamma = 0;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "gamma_max") gamma_max = std::stod(value);
        else if (key == "n_gamma") n_gamma = std::stoi(value);
        else if (key == "k") k = std::stod(value);
    }
    return build_ladder(gamma_max, n_gamma, k);
}

} // namespace hyperdisc
