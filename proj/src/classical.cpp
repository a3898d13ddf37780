#include "q3t/classical.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace q3t {

namespace {
const cplx kI(0.0, 1.0);
}

cplx Shape::of(Label l) const {
    switch (l) {
        case Label::Z: return z;
        case Label::Zp: return zp();
        case Label::Zpp: return zpp();
    }
    return z;
}

std::string to_string(TurnType3d t) {
    switch (t) {
        case TurnType3d::LEFT: return "LEFT";
        case TurnType3d::RIGHT: return "RIGHT";
        case TurnType3d::U: return "U";
        case TurnType3d::ACROSS_LEFT: return "ACROSS_LEFT";
        case TurnType3d::ACROSS_RIGHT: return "ACROSS_RIGHT";
        case TurnType3d::ACROSS_DOWN: return "ACROSS_DOWN";
    }
    return "?";
}

TurnType3d parse_turn3d(const std::string& s) {
    for (auto t : {TurnType3d::LEFT, TurnType3d::RIGHT, TurnType3d::U, TurnType3d::ACROSS_LEFT,
                   TurnType3d::ACROSS_RIGHT, TurnType3d::ACROSS_DOWN})
        if (to_string(t) == s) return t;
    throw std::invalid_argument("unknown turn type '" + s + "'");
}

cplx sqrt_minus(cplx z) { return std::sqrt(-z); }

Mat2 turn_matrix(TurnType3d t) {
    Mat2 m;
    switch (t) {
        case TurnType3d::LEFT: m << 1.0, 1.0, 0.0, 1.0; break;
        case TurnType3d::RIGHT: m << 1.0, 0.0, 1.0, 1.0; break;
        case TurnType3d::U: m << 0.0, 1.0, -1.0, 0.0; break;
        case TurnType3d::ACROSS_LEFT: m << kI, kI, kI, 0.0; break;
        case TurnType3d::ACROSS_RIGHT: m << 0.0, kI, kI, kI; break;
        case TurnType3d::ACROSS_DOWN: m << -kI, 0.0, 0.0, kI; break;
    }
    return m;
}

Mat2 s_matrix(cplx z) {
    if (z == cplx(0.0, 0.0)) throw std::domain_error("S(Z): Z = 0 is singular");
    const cplx r = sqrt_minus(z);
    Mat2 m;
    m << r, 0.0, 0.0, 1.0 / r;
    return m;
}

Mat2 holonomy(const Seq3d& seq) {
    if (seq.empty()) throw std::invalid_argument("holonomy: empty sequence");
    Mat2 acc = Mat2::Identity();
    for (const auto& [z, t] : seq) acc = acc * s_matrix(z) * turn_matrix(t);
    return acc;
}

namespace {

// Sum over s in {+,-}^k of prod_i d_i(s_i) m_i(s_i, s_{i+1}), indices cyclic.
template <class DiagFn, class MatFn>
cplx state_sum(std::size_t k, DiagFn diag, MatFn mat) {
    cplx total(0.0, 0.0);
    const std::size_t count = std::size_t{1} << k;
    for (std::size_t bits = 0; bits < count; ++bits) {
        cplx term(1.0, 0.0);
        for (std::size_t i = 0; i < k && term != cplx(0.0, 0.0); ++i) {
            const int si = static_cast<int>((bits >> i) & 1U);
            const int sn = static_cast<int>((bits >> ((i + 1) % k)) & 1U);
            term *= diag(i, si) * mat(i, si, sn);
        }
        total += term;
    }
    return total;
}

}  // namespace

cplx trace_state_sum(const Seq3d& seq) {
    if (seq.empty()) throw std::invalid_argument("trace_state_sum: empty sequence");
    std::vector<Mat2> ms;
    std::vector<cplx> roots;
    for (const auto& [z, t] : seq) {
        ms.push_back(turn_matrix(t));
        roots.push_back(sqrt_minus(z));  // (-Z)^{1/2}; state - uses the inverse
    }
    return state_sum(
        seq.size(), [&](std::size_t i, int s) { return s == 0 ? roots[i] : 1.0 / roots[i]; },
        [&](std::size_t i, int a, int b) { return ms[i](a, b); });
}

Mat2 turn_matrix_2d(TurnType2d t) {
    switch (t) {
        case TurnType2d::LEFT: return turn_matrix(TurnType3d::LEFT);
        case TurnType2d::RIGHT: return turn_matrix(TurnType3d::RIGHT);
        case TurnType2d::U: return turn_matrix(TurnType3d::U);
    }
    return Mat2::Identity();
}

Mat2 s_matrix_2d(double x) {
    if (!(x > 0.0)) throw std::domain_error("S(X): shear parameter must be positive");
    const double r = std::sqrt(x);
    Mat2 m;
    m << r, 0.0, 0.0, 1.0 / r;
    return m;
}

Mat2 holonomy_2d(const Seq2d& seq) {
    if (seq.empty()) throw std::invalid_argument("holonomy_2d: empty sequence");
    Mat2 acc = Mat2::Identity();
    for (const auto& [x, t] : seq) acc = acc * s_matrix_2d(x) * turn_matrix_2d(t);
    return acc;
}

cplx trace_state_sum_2d(const Seq2d& seq) {
    if (seq.empty()) throw std::invalid_argument("trace_state_sum_2d: empty sequence");
    for (const auto& [x, t] : seq)
        if (!(x > 0.0)) throw std::domain_error("trace_state_sum_2d: shear parameter must be positive");
    return state_sum(
        seq.size(),
        [&](std::size_t i, int s) {
            const double r = std::sqrt(seq[i].first);
            return cplx(s == 0 ? r : 1.0 / r, 0.0);
        },
        [&](std::size_t i, int a, int b) { return turn_matrix_2d(seq[i].second)(a, b); });
}

// ---------------------------------------------------------------- gluing equations

namespace {

// d log(Z_label) / dz
cplx dlog(Label l, cplx z) {
    switch (l) {
        case Label::Z: return 1.0 / z;
        case Label::Zp: return 1.0 / (z * (z - 1.0));
        case Label::Zpp: return 1.0 / (1.0 - z);
    }
    return 0.0;
}

std::vector<int> closed_classes(const Triangulation& tri) {
    std::vector<int> out;
    for (std::size_t k = 0; k < tri.edge_classes().size(); ++k)
        if (tri.edge_classes()[k].closed) out.push_back(static_cast<int>(k));
    return out;
}

double max_abs(const std::vector<cplx>& r) {
    double m = 0.0;
    for (const auto& v : r) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace

std::vector<cplx> gluing_residuals(const Triangulation& tri, const std::vector<Shape>& shapes) {
    std::vector<cplx> r;
    for (int k : closed_classes(tri)) {
        cplx acc(0.0, -2.0 * std::numbers::pi);
        for (const auto& e : tri.edge_classes()[static_cast<std::size_t>(k)].members)
            acc += std::log(shapes[static_cast<std::size_t>(e.tetra)].of(e.label()));
        r.push_back(acc);
    }
    return r;
}

SolveResult solve_gluing(const Triangulation& tri, const std::vector<cplx>& guess,
                         const SolverOptions& opts) {
    const std::size_t n = tri.num_tetrahedra();
    if (guess.size() != n) throw std::invalid_argument("solve_gluing: one guess per tetrahedron required");
    for (const auto& g : guess)
        if (!(g.imag() > 0.0)) throw std::invalid_argument("solve_gluing: guess must have Im Z > 0");

    SolveResult res;
    for (const auto& g : guess) res.shapes.push_back({g});
    const auto classes = closed_classes(tri);
    res.residuals = gluing_residuals(tri, res.shapes);
    res.max_residual = max_abs(res.residuals);
    if (classes.empty()) return res;

    const std::size_t m = classes.size();
    auto norm = [](const std::vector<cplx>& r) {
        double s = 0.0;
        for (const auto& v : r) s += std::norm(v);
        return std::sqrt(s);
    };
    for (int it = 0; it < opts.max_iterations; ++it) {
        if (res.max_residual < opts.tolerance) return res;
        Eigen::MatrixXcd J = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
        Eigen::VectorXcd r(static_cast<Eigen::Index>(m));
        for (std::size_t row = 0; row < m; ++row) {
            r(static_cast<Eigen::Index>(row)) = res.residuals[row];
            for (const auto& e : tri.edge_classes()[static_cast<std::size_t>(classes[row])].members)
                J(static_cast<Eigen::Index>(row), e.tetra) +=
                    dlog(e.label(), res.shapes[static_cast<std::size_t>(e.tetra)].z);
        }
        const Eigen::MatrixXcd N = J.adjoint() * J;
        const Eigen::VectorXcd rhs = -(J.adjoint() * r);
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(N);
        if (cod.rank() == 0) throw std::runtime_error("solve_gluing: degenerate Jacobian");
        const Eigen::VectorXcd delta = cod.solve(rhs);

        // Step halving: accept the first step that decreases the residual norm
        // and keeps every shape in the upper half plane.
        const double before = norm(res.residuals);
        double t = 1.0;
        bool accepted = false;
        for (int half = 0; half < 40; ++half, t *= 0.5) {
            std::vector<Shape> trial = res.shapes;
            bool upper = true;
            for (std::size_t k = 0; k < n; ++k) {
                trial[k].z += t * delta(static_cast<Eigen::Index>(k));
                upper = upper && trial[k].z.imag() > 0.0;
            }
            if (!upper) continue;
            const auto rr = gluing_residuals(tri, trial);
            if (norm(rr) < before) {
                res.shapes = std::move(trial);
                res.residuals = rr;
                res.max_residual = max_abs(rr);
                accepted = true;
                break;
            }
        }
        res.iterations = it + 1;
        if (!accepted) {
            if (res.max_residual < 1e-10) return res;  // numerically stalled at convergence
            throw std::runtime_error("solve_gluing: line search failed to reduce the residual");
        }
    }
    if (res.max_residual < opts.tolerance) return res;
    throw std::runtime_error("solve_gluing: no convergence after " +
                             std::to_string(opts.max_iterations) + " iterations (residual " +
                             std::to_string(res.max_residual) + ")");
}

}  // namespace q3t
