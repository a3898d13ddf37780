// Numerical classical layer: shape parameters, gluing-equation solver,
// turn matrices, holonomy products and classical trace state sums.
#pragma once

#include "q3t/triangulation.hpp"

#include <Eigen/Dense>

#include <complex>
#include <string>
#include <utility>
#include <vector>

namespace q3t {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;

struct Shape {
    cplx z;
    [[nodiscard]] cplx zp() const { return (z - 1.0) / z; }
    [[nodiscard]] cplx zpp() const { return 1.0 / (1.0 - z); }
    [[nodiscard]] cplx of(Label l) const;
};

// Turn types in the order of the classical case list.
enum class TurnType3d { LEFT, RIGHT, U, ACROSS_LEFT, ACROSS_RIGHT, ACROSS_DOWN };
enum class TurnType2d { LEFT, RIGHT, U };

std::string to_string(TurnType3d t);
TurnType3d parse_turn3d(const std::string& s);  // throws std::invalid_argument

// Principal branch of (-Z)^{1/2}.
cplx sqrt_minus(cplx z);

Mat2 turn_matrix(TurnType3d t);
Mat2 s_matrix(cplx z);  // diag((-Z)^{1/2}, (-Z)^{-1/2}); throws for Z = 0

using Seq3d = std::vector<std::pair<cplx, TurnType3d>>;
Mat2 holonomy(const Seq3d& seq);
cplx trace_state_sum(const Seq3d& seq);

Mat2 turn_matrix_2d(TurnType2d t);
Mat2 s_matrix_2d(double x);  // diag(X^{1/2}, X^{-1/2}); requires X > 0
using Seq2d = std::vector<std::pair<double, TurnType2d>>;
Mat2 holonomy_2d(const Seq2d& seq);
cplx trace_state_sum_2d(const Seq2d& seq);

struct SolverOptions {
    int max_iterations = 100;
    double tolerance = 1e-12;
};

struct SolveResult {
    std::vector<Shape> shapes;
    std::vector<cplx> residuals;  // one per closed edge class, in edge-class order
    double max_residual = 0.0;
    int iterations = 0;
};

// log-form edge equations sum_i log Z_{e_i} - 2 pi i, one per closed edge class.
std::vector<cplx> gluing_residuals(const Triangulation& tri, const std::vector<Shape>& shapes);

// Damped Newton iteration with step halving on the log-form equations;
// redundant equations are handled through the normal equations.
// Throws std::invalid_argument for guesses with Im Z <= 0 and
// std::runtime_error on non-convergence or a degenerate Jacobian.
SolveResult solve_gluing(const Triangulation& tri, const std::vector<cplx>& guess,
                         const SolverOptions& opts = {});

}  // namespace q3t
