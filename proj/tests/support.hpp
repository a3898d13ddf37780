// Shared helpers for the test programs.
#pragma once

#include "q3t/gluing_algebra.hpp"
#include "q3t/quantum_trace.hpp"
#include "q3t/scalar.hpp"
#include "q3t/triangulation.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <random>
#include <stdexcept>
#include <string>

namespace q3t_test {

inline std::string data_path(const std::string& name) { return std::string(Q3T_DATA_DIR) + "/" + name; }

inline nlohmann::json load_json(const std::string& name) {
    std::ifstream in(data_path(name));
    if (!in) throw std::runtime_error("missing fixture " + name);
    return nlohmann::json::parse(in);
}

inline const q3t::GluingAlgebra& fig8() {
    static const q3t::GluingAlgebra G(q3t::Triangulation::load(data_path("fig8.json")));
    return G;
}

inline q3t::Scalar random_scalar(std::mt19937_64& rng, int max_terms = 3) {
    std::uniform_int_distribution<int> nterms(0, max_terms);
    std::uniform_int_distribution<int> coeff(-5, 5);
    std::uniform_int_distribution<int> half(-6, 6);
    q3t::Scalar s;
    const int n = nterms(rng);
    for (int k = 0; k < n; ++k) s += q3t::Scalar(q3t::GaussianInt(coeff(rng), coeff(rng)), half(rng));
    return s;
}

// The regular hexagonal shape exp(i·pi/3).
inline std::complex<double> omega() { return {0.5, 0.86602540378443864676}; }

}  // namespace q3t_test
