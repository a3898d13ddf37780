// The 3d quantum trace of links presented through face suspensions.
//
// Level 1 (arc lists) is the ground-truth input format:
//   {"states": ["e1", ...],
//    "arcs": [{"kind": "T"|"B", "fs": "<suspension>", "cones": [g1, g2],
//              "states": ["+e1", "-e2"], "sign": 1}, ...],
//    "prefactor": [{"var": "e1", "coeff": -1}, ...],   // (-A^2)^{coeff·e1/2}
//    "const": "<scalar>"}                                // optional
// Cone entries are face-level generator names ("z'_S") or edge-cone names
// ("z'_NS", resolved inside "fs").  States are "+v", "-v", "v", "+" or "-".
//
// Level 2 (turn sequences) compiles to Level 1:
//   {"turns": [{"edge_cone": "z'_NS", "face": "S", "turn": "ACROSS_RIGHT"}, ...],
//    "cable": 1}
// Each entry names the edge cone the link crosses, the face suspension it
// enters, and the turn it makes inside that suspension before the next
// crossing.
#pragma once

#include "q3t/classical.hpp"
#include "q3t/gluing_algebra.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace q3t {

enum class ArcKind { T, B };

// A state expression: sign·var, or the literal `sign` when var < 0.
struct StateRef {
    int sign = 1;
    int var = -1;
    [[nodiscard]] int value(const std::vector<int>& assignment) const {
        return var < 0 ? sign : sign * assignment.at(static_cast<std::size_t>(var));
    }
};

struct Arc {
    ArcKind kind = ArcKind::T;
    int suspension = 0;
    std::array<std::size_t, 2> gens{};  // generator indices in the big torus
    std::array<StateRef, 2> states{};
    int sign = 1;
};

// (-A^2)^{coeff·s_var/2}
struct PrefactorTerm {
    int var = 0;
    std::int64_t coeff = 0;
};

struct LinkPresentation {
    std::vector<std::string> states;
    std::vector<Arc> arcs;
    std::vector<PrefactorTerm> prefactor;
    Scalar constant = Scalar::one();
};

LinkPresentation link_from_json(const GluingAlgebra& G, const nlohmann::json& j);
nlohmann::json link_to_json(const GluingAlgebra& G, const LinkPresentation& lp);

// A^{-(mu+nu)/2}[g1^mu g2^nu], or nullopt when the arc is bad.  Bad arcs:
// for g2 clockwise after g1 the state pair (-,+); for g2 counterclockwise
// after g1 the pair (+,-).  A U-turn (g1 = g2) vanishes for equal states and
// evaluates to -A^{-5/2} for (+,-) and A^{-1/2} for (-,+).
std::optional<Monomial> ev_T(const GluingAlgebra& G, const Arc& arc, int mu, int nu);
// (-i)^mu g1^mu g2^mu.  Throws std::invalid_argument if mu != nu.
Monomial ev_B(const GluingAlgebra& G, const Arc& arc, int mu, int nu);

struct Evaluation {
    TorusElement value;
    std::size_t nonzero_states = 0;
    std::size_t total_states = 0;
};

// Sum over all state assignments of prefactor × arc evaluations.  Within a
// face suspension T-arcs are multiplied in listed order, then B-arcs;
// suspensions are multiplied in index order.  Assignments with mismatched
// B-arc states contribute 0.  `jobs` threads share the enumeration.
Evaluation evaluate(const GluingAlgebra& G, const LinkPresentation& lp, unsigned jobs = 1);

struct Turn {
    EdgeConeId cone = 0;
    int suspension = 0;
    TurnType3d type = TurnType3d::LEFT;
};

struct TurnSequence {
    std::vector<Turn> turns;
    int cable = 1;
};

bool is_turn_sequence(const nlohmann::json& j);
TurnSequence turns_from_json(const Triangulation& tri, const nlohmann::json& j);
// Exit cone of turn i; throws std::invalid_argument if the turn leaves the
// suspension through a missing half.
EdgeConeId exit_cone(const Triangulation& tri, const Turn& t);
// Throws std::invalid_argument when consecutive turns do not connect.
LinkPresentation compile_turns(const GluingAlgebra& G, const TurnSequence& ts);

// (shape at each crossed cone, turn) for the classical layer.
Seq3d classical_sequence(const Triangulation& tri, const TurnSequence& ts, const std::vector<Shape>& shapes);
// tr(holonomy)^cable
cplx classical_trace(const Triangulation& tri, const TurnSequence& ts, const std::vector<Shape>& shapes);

// Script steps:
//   {"op": "rewrite", "relation": id, "side": "left"|"right", "term": m, "match": k}
//   {"op": "transport", "term": m, "to": m', "via": [ids]}
//   {"op": "expect", "value": expr}
// Terms are identified by their monomial; their coefficient is taken from
// the current element.  Expressions use the names accepted by GluingAlgebra::parse.
struct Reduction {
    TorusElement value;
    std::vector<RewriteCertificate> certificates;
};
// Throws std::runtime_error when a step fails (missing term, failed expect,
// certificate that does not replay).
Reduction reduce_with_script(const GluingAlgebra& G, const TorusElement& el, const nlohmann::json& script);

// A^{1/2} -> 1, x̂_e -> signs[e]·(-Z_e)^{1/2} (all + when signs is empty).
cplx classical_shadow(const GluingAlgebra& G, const TorusElement& el, const std::vector<Shape>& shapes,
                      const std::vector<int>& signs = {});

struct BranchMatch {
    std::vector<int> signs;
    cplx shadow;
    int overall_sign = 1;  // shadow ≈ overall_sign · target
    double residual = 0.0;
    std::size_t assignments_tried = 0;
};
// Exhaustive ± search over the edge cones occurring with an odd exponent.
// Returns the first assignment with |shadow ∓ target| < tol.  Throws
// std::invalid_argument if more than max_assignments would be needed.
std::optional<BranchMatch> branch_search(const GluingAlgebra& G, const TorusElement& el,
                                         const std::vector<Shape>& shapes, cplx target, double tol,
                                         std::size_t max_assignments = 4096);

// Multiplies by (-A^3)^k.
TorusElement apply_framing(const TorusElement& el, std::int64_t k);

}  // namespace q3t
