// The big quantum torus over all face suspensions of a triangulation,
// square-root quantized shape parameters x̂_e, the relation families V± / W±,
// the embedding ι of the quantum gluing module, and rewrite certificates.
//
// Generator convention: every face suspension carries one generator per edge
// cone on its boundary (3 per tetrahedron half).  Inside a half, with cones
// g0 -> g1 -> g2 clockwise viewed from that half's barycenter (labels
// Z -> Z' -> Z''),  g_k g_{k+1} = A g_{k+1} g_k.  Generators of different
// halves or different suspensions commute.
#pragma once

#include "q3t/classical.hpp"
#include "q3t/qtorus.hpp"
#include "q3t/triangulation.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace q3t {

enum class Side { Left, Right };
std::string to_string(Side s);

enum class RelationFamily { VMinus, VPlus, WMinus, WPlus, Derived };

struct RewriteCertificate {
    TorusElement before;
    TorusElement after;
    std::string relation_id;
    TorusElement relation;
    Side side = Side::Left;
    TorusElement cofactor;
};

struct Relation {
    std::string id;
    RelationFamily family = RelationFamily::VPlus;
    TorusElement element;
    // Side on which the relation may act: V+ on the left, V- on the right.
    Side side = Side::Left;
    // Commutes with every x̂ (triangle relations).
    bool central = false;
    // For derived relations: a certificate chain reducing `element` to 0.
    std::vector<RewriteCertificate> proof;
    // Set when the proof moves a central relation to its other side; such a
    // relation may then only be multiplied by x̂-expressible cofactors.
    bool needs_xhat_cofactor = false;
};

struct ClassicalReport {
    std::vector<double> edge_residuals;      // squared edge relations, per closed edge class
    std::vector<double> triangle_residuals;  // squared triangle relations, per vertex cone
    std::vector<double> three_term_residuals;  // per vertex cone
    [[nodiscard]] double max_residual() const;
};

class GluingAlgebra {
public:
    explicit GluingAlgebra(Triangulation tri);

    [[nodiscard]] const Triangulation& triangulation() const { return tri_; }
    [[nodiscard]] const QuantumTorus& torus() const { return torus_; }
    [[nodiscard]] const CommutationForm& form() const { return torus_.form(); }
    [[nodiscard]] std::size_t ngens() const { return torus_.ngens(); }

    // Generator index of the cone with label l in half h of suspension s.
    [[nodiscard]] std::size_t generator(int suspension, int half, Label l) const;
    // Generator index of edge cone c inside suspension s.
    [[nodiscard]] std::size_t generator_of_cone(int suspension, EdgeConeId c) const;

    // x̂_e as an exponent vector / element.
    [[nodiscard]] Exps xhat_exps(EdgeConeId c) const;
    [[nodiscard]] TorusElement xhat(EdgeConeId c, std::int64_t k = 1) const;
    // If every term is a product of x̂'s, the per-cone exponents of each term.
    [[nodiscard]] std::optional<std::vector<std::int64_t>> xhat_decompose(const Exps& u) const;
    [[nodiscard]] std::size_t num_cones() const { return 6 * tri_.num_tetrahedra(); }

    // ---- relations
    [[nodiscard]] TorusElement edge_relation(int edge_class) const;
    // (triangle, three-term) for the vertex cone; the three-term relation is
    // x̂_{Z''}^{-2} + x̂_Z^{2} + 1 with the cones at the vertex.
    [[nodiscard]] std::pair<TorusElement, TorusElement> vertex_relations(const VertexCone& vc) const;
    [[nodiscard]] const std::vector<Relation>& relations() const { return relations_; }
    [[nodiscard]] const Relation& relation(const std::string& id) const;  // throws if unknown
    [[nodiscard]] bool has_relation(const std::string& id) const;
    // Registers a relation proved by the given certificate chain.  The chain
    // must start at `element`, end at 0, and replay exactly.  Throws otherwise.
    const Relation& add_derived(const std::string& id, const TorusElement& element,
                                std::vector<RewriteCertificate> proof);

    // Relation ids.
    [[nodiscard]] std::string edge_relation_id(int edge_class) const;
    [[nodiscard]] std::string triangle_id(const VertexCone& vc) const;
    // Three-term relation whose x̂^{-2} factor sits on the cone labelled `lead`.
    [[nodiscard]] std::string three_term_id(const VertexCone& vc, Label lead) const;

    // ---- rewriting
    // after = before - relation·cofactor (left) or before - cofactor·relation (right).
    [[nodiscard]] std::pair<TorusElement, RewriteCertificate> apply_rewrite(
        const TorusElement& el, const Relation& rel, Side side, const TorusElement& cofactor) const;
    // Eliminates `term` (a monomial contained in el's support, any coefficient)
    // by matching it against the relation term `match_index` (map order).
    [[nodiscard]] std::pair<TorusElement, RewriteCertificate> eliminate(
        const TorusElement& el, const Relation& rel, Side side, const Monomial& term,
        std::size_t match_index) const;
    // Moves `term` to the exponent `target` using binomial relations (one
    // monomial plus a constant) from `via`.  Returns the certificate chain.
    [[nodiscard]] std::vector<RewriteCertificate> transport(const TorusElement& el, const Monomial& term,
                                                            const Exps& target,
                                                            const std::vector<std::string>& via) const;
    [[nodiscard]] bool verify(const RewriteCertificate& cert) const;
    [[nodiscard]] bool verify_chain(const std::vector<RewriteCertificate>& chain) const;

    // ---- quantum gluing module
    // Quantum torus on Ẑ_T, Ẑ'_T, Ẑ''_T (index 3T + label).
    [[nodiscard]] const QuantumTorus& qgm_torus() const { return qgm_; }
    // The bare edge used for X̂ of (tetra, label): the lexicographically
    // smaller vertex pair of the opposite pair.
    [[nodiscard]] EdgeConeId representative(int tetra, Label l) const;
    // X̂ = -x̂_rep^2
    [[nodiscard]] TorusElement qgm_generator(int tetra, Label l) const;
    [[nodiscard]] TorusElement iota(const TorusElement& qgm_element) const;
    // Inverse of ι on its image term by term; nullopt if a term is not ι of a monomial.
    [[nodiscard]] std::optional<TorusElement> iota_preimage(const TorusElement& el) const;
    [[nodiscard]] std::vector<TorusElement> w_minus() const;  // one per closed edge class
    [[nodiscard]] std::vector<std::pair<TorusElement, TorusElement>> w_plus() const;  // per tetra

    [[nodiscard]] bool check_even(const TorusElement& el) const;
    // True iff every term is a product of x̂'s.
    [[nodiscard]] bool is_xhat_expressible(const TorusElement& el) const;

    // ---- certificate chains
    // x̂_e^2 -> x̂_{opposite(e)}^2 using the four triangle relations of the tetrahedron.
    [[nodiscard]] std::vector<RewriteCertificate> opposite_edge_chain(EdgeConeId e) const;
    // Chains reducing the W relations (through ι) to 0.
    [[nodiscard]] std::vector<RewriteCertificate> certify_w_plus_triangle(int tetra) const;
    [[nodiscard]] std::vector<RewriteCertificate> certify_w_plus_three_term(int tetra) const;
    [[nodiscard]] std::vector<RewriteCertificate> certify_w_minus(int edge_class) const;

    // ---- numerics
    // Value of each generator when x̂_e ↦ sign_e·(-Z_e)^{1/2}; the two halves
    // of x̂_e are given the values (sign·root, 1).
    [[nodiscard]] std::vector<cplx> xhat_assignment(const std::vector<Shape>& shapes,
                                                    const std::vector<int>& signs) const;
    [[nodiscard]] cplx specialize_xhat(const TorusElement& el, const std::vector<Shape>& shapes,
                                       const std::vector<int>& signs) const;
    // Squared / branch-free classical specialization of the relation families.
    [[nodiscard]] ClassicalReport classical_check(const std::vector<Shape>& shapes) const;

    // ---- text
    // x̂ monomials "A·y'_NS·z'_NS^-1"; terms that are not x̂ products fall
    // back to face-level generator names.
    [[nodiscard]] std::string render_xhat(const TorusElement& el) const;
    // QGM grammar "2 + Y''·Z^-1 + Y''^-1·Z" if el is in ι's monomial image.
    [[nodiscard]] std::optional<std::string> render_qgm(const TorusElement& el) const;
    [[nodiscard]] std::string render(const TorusElement& el) const;  // QGM if possible, else x̂
    // Parses expressions over x̂ names ("z'_NS"), face-level generator names
    // ("z'_N") and QGM names ("Z''", mapped through ι).
    [[nodiscard]] TorusElement parse(const std::string& text) const;
    [[nodiscard]] std::string qgm_name(int tetra, Label l) const;

private:
    void build_form();
    void build_relations();
    void derive_rotations();
    const Relation& add_relation(Relation r);

    Triangulation tri_;
    QuantumTorus torus_;
    QuantumTorus qgm_;
    // gen_index_[s][h][label]
    std::vector<std::array<std::array<std::size_t, 3>, 2>> gen_index_;
    std::vector<Relation> relations_;
    std::map<std::string, std::size_t> relation_index_;
};

}  // namespace q3t
