#include "q3t/gluing_algebra.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cctype>
#include <numeric>
#include <set>
#include <stdexcept>

namespace q3t {

namespace {

std::string label_name(Label l) { return "Z" + label_primes(l); }

// Integer solution of sum_r n_r cols[r] = rhs, or nullopt if none exists.
// Unimodular column operations bring the matrix to column echelon form
// C·U = H; H·y = rhs is solved by forward substitution and n = U·y.
std::optional<std::vector<std::int64_t>> solve_integer(const std::vector<Exps>& cols, const Exps& rhs) {
    const std::size_t rows = rhs.size();
    const std::size_t m = cols.size();
    std::vector<std::vector<BigInt>> H(rows, std::vector<BigInt>(m));
    std::vector<std::vector<BigInt>> U(m, std::vector<BigInt>(m));
    for (std::size_t j = 0; j < m; ++j) {
        U[j][j] = 1;
        for (std::size_t i = 0; i < rows; ++i) H[i][j] = cols[j][i];
    }
    auto col_axpy = [&](std::size_t dst, std::size_t src, const BigInt& f) {  // col dst -= f·col src
        for (auto& row : H) row[dst] -= f * row[src];
        for (auto& row : U) row[dst] -= f * row[src];
    };
    auto col_swap = [&](std::size_t a, std::size_t b) {
        for (auto& row : H) std::swap(row[a], row[b]);
        for (auto& row : U) std::swap(row[a], row[b]);
    };
    std::vector<std::pair<std::size_t, std::size_t>> pivots;  // (row, column)
    std::size_t k = 0;
    for (std::size_t i = 0; i < rows && k < m; ++i) {
        // Euclid on the entries H[i][k..m).
        for (;;) {
            std::size_t best = m;
            for (std::size_t j = k; j < m; ++j)
                if (H[i][j] != 0 && (best == m || abs(H[i][j]) < abs(H[i][best]))) best = j;
            if (best == m) break;
            col_swap(k, best);
            bool done = true;
            for (std::size_t j = k + 1; j < m; ++j) {
                if (H[i][j] == 0) continue;
                col_axpy(j, k, H[i][j] / H[i][k]);
                if (H[i][j] != 0) done = false;
            }
            if (done) break;
        }
        if (H[i][k] != 0) pivots.emplace_back(i, k++);
    }
    std::vector<BigInt> y(m, 0);
    for (const auto& [i, c] : pivots) {
        BigInt r = rhs[i];
        for (std::size_t j = 0; j < c; ++j) r -= H[i][j] * y[j];
        if (r % H[i][c] != 0) return std::nullopt;
        y[c] = r / H[i][c];
    }
    for (std::size_t i = 0; i < rows; ++i) {
        BigInt r = rhs[i];
        for (std::size_t j = 0; j < m; ++j) r -= H[i][j] * y[j];
        if (r != 0) return std::nullopt;
    }
    std::vector<std::int64_t> n(m, 0);
    for (std::size_t r = 0; r < m; ++r) {
        BigInt v = 0;
        for (std::size_t j = 0; j < m; ++j) v += U[r][j] * y[j];
        n[r] = static_cast<std::int64_t>(v);
    }
    return n;
}

bool scalar_negative_single(const Scalar& c) {
    if (c.terms().size() != 1) return false;
    const auto& g = c.terms().begin()->second;
    return (g.im == 0 && g.re < 0) || (g.re == 0 && g.im < 0);
}

struct RenderedTerm {
    Scalar coeff;
    std::string mono;  // empty for constants
    std::vector<std::int64_t> key;
};

std::string join_terms(std::vector<RenderedTerm> terms) {
    if (terms.empty()) return "0";
    std::stable_sort(terms.begin(), terms.end(), [](const RenderedTerm& a, const RenderedTerm& b) {
        const bool ca = a.mono.empty(), cb = b.mono.empty();
        if (ca != cb) return ca;
        return a.key > b.key;
    });
    std::string out;
    bool first = true;
    for (const auto& t : terms) {
        const bool negative = scalar_negative_single(t.coeff);
        const Scalar mag = negative ? -t.coeff : t.coeff;
        std::string body;
        if (t.mono.empty()) {
            body = mag.to_string();
        } else if (mag == Scalar::one()) {
            body = t.mono;
        } else if (mag.terms().size() > 1) {
            body = "(" + mag.to_string() + ")·" + t.mono;
        } else {
            body = mag.to_string() + "·" + t.mono;
        }
        if (first) {
            out = negative ? "-" + body : body;
        } else {
            out += negative ? " - " : " + ";
            out += body;
        }
        first = false;
    }
    return out;
}

std::string power_suffix(std::int64_t k) { return k == 1 ? "" : "^" + std::to_string(k); }

}  // namespace

std::string to_string(Side s) { return s == Side::Left ? "left" : "right"; }

double ClassicalReport::max_residual() const {
    double m = 0.0;
    for (const auto* v : {&edge_residuals, &triangle_residuals, &three_term_residuals})
        for (double x : *v) m = std::max(m, x);
    return m;
}

// ---------------------------------------------------------------- construction

GluingAlgebra::GluingAlgebra(Triangulation tri) : tri_(std::move(tri)) {
    build_form();
    build_relations();
    derive_rotations();
}

void GluingAlgebra::build_form() {
    const auto& susp = tri_.suspensions();
    gen_index_.assign(susp.size(), {});
    std::vector<std::string> names;
    std::size_t next = 0;
    for (const auto& s : susp) {
        for (std::size_t h = 0; h < s.halves.size(); ++h) {
            const auto& half = s.halves[h];
            const auto& letter = tri_.tetrahedra()[static_cast<std::size_t>(half.tetra)].letter;
            const bool self_glued = s.halves.size() == 2 && s.halves[0].tetra == s.halves[1].tetra;
            for (int l = 0; l < 3; ++l) {
                gen_index_[static_cast<std::size_t>(s.id)][h][static_cast<std::size_t>(l)] = next++;
                std::string nm = letter + label_primes(static_cast<Label>(l)) + "_" + s.name;
                if (self_glued) nm += "#" + std::to_string(h);
                names.push_back(nm);
            }
        }
    }
    CommutationForm F(names.size());
    for (const auto& s : susp)
        for (std::size_t h = 0; h < s.halves.size(); ++h)
            for (std::size_t l = 0; l < 3; ++l)
                F.set(gen_index_[static_cast<std::size_t>(s.id)][h][l],
                      gen_index_[static_cast<std::size_t>(s.id)][h][(l + 1) % 3], 1);
    torus_ = QuantumTorus(std::move(F), std::move(names));

    // Name clashes between x̂ names, generator names and QGM names would make
    // parsing ambiguous.
    for (EdgeConeId c = 0; c < static_cast<EdgeConeId>(num_cones()); ++c)
        if (torus_.index_of(tri_.cone_name(c)))
            throw std::invalid_argument("name clash between an edge cone and a generator: " +
                                        tri_.cone_name(c));

    const std::size_t n = tri_.num_tetrahedra();
    CommutationForm Q(3 * n);
    std::vector<std::string> qnames;
    for (std::size_t t = 0; t < n; ++t) {
        for (int l = 0; l < 3; ++l) qnames.push_back(qgm_name(static_cast<int>(t), static_cast<Label>(l)));
        Q.set(3 * t + 0, 3 * t + 1, 4);
        Q.set(3 * t + 1, 3 * t + 2, 4);
        Q.set(3 * t + 2, 3 * t + 0, 4);
    }
    qgm_ = QuantumTorus(std::move(Q), std::move(qnames));
}

std::string GluingAlgebra::qgm_name(int tetra, Label l) const {
    std::string letter = tri_.tetrahedra().at(static_cast<std::size_t>(tetra)).letter;
    for (auto& ch : letter) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    return letter + label_primes(l);
}

std::size_t GluingAlgebra::generator(int suspension, int half, Label l) const {
    return gen_index_.at(static_cast<std::size_t>(suspension)).at(static_cast<std::size_t>(half)).at(
        static_cast<std::size_t>(l));
}

std::size_t GluingAlgebra::generator_of_cone(int suspension, EdgeConeId c) const {
    const auto& s = tri_.suspensions().at(static_cast<std::size_t>(suspension));
    for (std::size_t h = 0; h < s.halves.size(); ++h)
        for (std::size_t l = 0; l < 3; ++l)
            if (s.halves[h].cones[l] == c) return gen_index_[static_cast<std::size_t>(suspension)][h][l];
    throw std::invalid_argument("edge cone " + tri_.cone_name(c) + " is not on suspension " + s.name);
}

Exps GluingAlgebra::xhat_exps(EdgeConeId c) const {
    Exps u(ngens(), 0);
    const BareEdge e = cone_edge(c);
    for (const auto& [s, h] : tri_.suspensions_of_cone(c)) u[generator(s, h, e.label())] += 1;
    return u;
}

TorusElement GluingAlgebra::xhat(EdgeConeId c, std::int64_t k) const {
    return TorusElement::monomial(Scalar::one(), exps_scale(xhat_exps(c), k));
}

std::optional<std::vector<std::int64_t>> GluingAlgebra::xhat_decompose(const Exps& u) const {
    std::vector<std::int64_t> k(num_cones(), 0);
    Exps rebuilt(ngens(), 0);
    for (EdgeConeId c = 0; c < static_cast<EdgeConeId>(num_cones()); ++c) {
        const BareEdge e = cone_edge(c);
        const auto sh = tri_.suspensions_of_cone(c);
        const std::int64_t v = u[generator(sh[0].first, sh[0].second, e.label())];
        k[static_cast<std::size_t>(c)] = v;
        if (v != 0) rebuilt = exps_add(rebuilt, exps_scale(xhat_exps(c), v));
    }
    if (rebuilt != u) return std::nullopt;
    return k;
}

bool GluingAlgebra::is_xhat_expressible(const TorusElement& el) const {
    for (const auto& [u, c] : el.terms())
        if (!xhat_decompose(u)) return false;
    return true;
}

// ---------------------------------------------------------------- relations

TorusElement GluingAlgebra::edge_relation(int edge_class) const {
    const auto& ec = tri_.edge_classes().at(static_cast<std::size_t>(edge_class));
    Exps w(ngens(), 0);
    for (const auto& m : ec.members) w = exps_add(w, xhat_exps(cone_id(m)));
    const auto k = static_cast<std::int64_t>(ec.valence());
    // (-1)^{k/2} A^2 = i^k A^2
    const Scalar constant = Scalar::from_phase(k, 0) * Scalar::a_half(-2 * k) * Scalar::a_pow(2);
    return torus_.weyl(w) + torus_.constant(constant);
}

std::pair<TorusElement, TorusElement> GluingAlgebra::vertex_relations(const VertexCone& vc) const {
    const auto around = tri_.cones_around_vertex(vc);  // labels Z, Z', Z''
    Exps u(ngens(), 0);
    for (const auto& c : around) u = exps_add(u, xhat_exps(c.cone));
    TorusElement triangle = torus_.weyl(u) + torus_.constant(Scalar::a_pow(1));
    TorusElement three = xhat(around[2].cone, -2) + xhat(around[0].cone, 2) + torus_.one();
    return {triangle, three};
}

std::string GluingAlgebra::edge_relation_id(int edge_class) const {
    return "edge(" + std::to_string(edge_class) + ")";
}

std::string GluingAlgebra::triangle_id(const VertexCone& vc) const {
    return "tri(" + tri_.tetrahedra()[static_cast<std::size_t>(vc.tetra)].letter + "," +
           tri_.vertex_name(vc) + ")";
}

std::string GluingAlgebra::three_term_id(const VertexCone& vc, Label lead) const {
    return "three(" + tri_.tetrahedra()[static_cast<std::size_t>(vc.tetra)].letter + "," +
           tri_.vertex_name(vc) + "," + label_name(lead) + ")";
}

const Relation& GluingAlgebra::add_relation(Relation r) {
    if (relation_index_.count(r.id)) throw std::invalid_argument("duplicate relation id " + r.id);
    relation_index_[r.id] = relations_.size();
    relations_.push_back(std::move(r));
    return relations_.back();
}

void GluingAlgebra::build_relations() {
    for (std::size_t k = 0; k < tri_.edge_classes().size(); ++k) {
        if (!tri_.edge_classes()[k].closed) continue;
        Relation r;
        r.id = edge_relation_id(static_cast<int>(k));
        r.family = RelationFamily::VMinus;
        r.side = Side::Right;
        r.element = edge_relation(static_cast<int>(k));
        add_relation(std::move(r));
    }
    for (const auto& vc : tri_.vertex_cones()) {
        auto [triangle, three] = vertex_relations(vc);
        Relation t;
        t.id = triangle_id(vc);
        t.family = RelationFamily::VPlus;
        t.side = Side::Left;
        t.element = triangle;
        // Centrality is computed, not assumed.
        t.central = true;
        for (EdgeConeId c = 0; c < static_cast<EdgeConeId>(num_cones()); ++c)
            if (!torus_.commutator(triangle, xhat(c)).is_zero()) t.central = false;
        add_relation(std::move(t));
        Relation r;
        r.id = three_term_id(vc, Label::Zpp);
        r.family = RelationFamily::VPlus;
        r.side = Side::Left;
        r.element = three;
        add_relation(std::move(r));
    }
}

// The rotations x̂_{Z'}^{-2} + x̂_{Z''}^2 + 1 and x̂_Z^{-2} + x̂_{Z'}^2 + 1 are
// derived from the primitive one: with P_k = x̂_k^{-2} + x̂_{k+1}^2 + 1,
//   P_{k-1} - P_k·x̂_k^2 = x̂_{k-1}^{-2} - x̂_{k+1}^2 x̂_k^2,
// and the two remaining monomials agree modulo the (central) triangle relation.
void GluingAlgebra::derive_rotations() {
    for (const auto& vc : tri_.vertex_cones()) {
        const auto around = tri_.cones_around_vertex(vc);
        for (Label lead : {Label::Zp, Label::Z}) {
            const Label k = cw_next(lead);  // the already available rotation P_k
            const Label k1 = cw_next(k);
            const auto cone = [&](Label l) { return around[static_cast<std::size_t>(l)].cone; };
            const TorusElement target = xhat(cone(lead), -2) + xhat(cone(k), 2) + torus_.one();
            const Relation& pk = relation(three_term_id(vc, k));
            std::vector<RewriteCertificate> proof;
            auto [after, cert] = apply_rewrite(target, pk, Side::Left, xhat(cone(k), 2));
            proof.push_back(cert);
            const Exps lead_exps = exps_scale(xhat_exps(cone(lead)), -2);
            const Monomial moving{after.coefficient(lead_exps), lead_exps};
            const Exps dest = exps_add(exps_scale(xhat_exps(cone(k1)), 2), exps_scale(xhat_exps(cone(k)), 2));
            auto chain = transport(after, moving, dest, {triangle_id(vc)});
            proof.insert(proof.end(), chain.begin(), chain.end());
            add_derived(three_term_id(vc, lead), target, std::move(proof));
        }
    }
}

const Relation& GluingAlgebra::relation(const std::string& id) const {
    auto it = relation_index_.find(id);
    if (it == relation_index_.end()) throw std::invalid_argument("unknown relation '" + id + "'");
    return relations_[it->second];
}

bool GluingAlgebra::has_relation(const std::string& id) const { return relation_index_.count(id) > 0; }

const Relation& GluingAlgebra::add_derived(const std::string& id, const TorusElement& element,
                                           std::vector<RewriteCertificate> proof) {
    if (proof.empty()) throw std::invalid_argument("derived relation " + id + ": empty proof");
    if (!(proof.front().before == element))
        throw std::invalid_argument("derived relation " + id + ": proof does not start at the relation");
    if (!proof.back().after.is_zero())
        throw std::invalid_argument("derived relation " + id + ": proof does not end at 0 (ends at " +
                                    render_xhat(proof.back().after) + ")");
    if (!verify_chain(proof)) throw std::invalid_argument("derived relation " + id + ": proof does not replay");
    Relation r;
    r.id = id;
    r.family = RelationFamily::Derived;
    r.element = element;
    bool any_left = false, any_right = false;
    for (const auto& c : proof) {
        const Relation& used = relation(c.relation_id);
        (c.side == Side::Left ? any_left : any_right) = true;
        if (c.side != used.side || used.needs_xhat_cofactor) r.needs_xhat_cofactor = true;
    }
    if (any_left && any_right)
        throw std::invalid_argument("derived relation " + id + ": proof mixes left and right steps");
    r.side = any_right ? Side::Right : Side::Left;
    r.central = true;
    for (EdgeConeId c = 0; c < static_cast<EdgeConeId>(num_cones()); ++c)
        if (!torus_.commutator(element, xhat(c)).is_zero()) r.central = false;
    r.proof = std::move(proof);
    return add_relation(std::move(r));
}

// ---------------------------------------------------------------- rewriting

namespace {

bool side_allowed(const QuantumTorus& T, const Relation& rel, Side side, const TorusElement& cofactor,
                  bool xhat_ok) {
    if (rel.needs_xhat_cofactor && !xhat_ok) return false;
    if (side == rel.side) return true;
    // A relation may act on its other side only when it commutes with the
    // cofactor, in which case the product is literally a native-side product.
    return T.commutator(rel.element, cofactor).is_zero();
}

}  // namespace

std::pair<TorusElement, RewriteCertificate> GluingAlgebra::apply_rewrite(const TorusElement& el,
                                                                         const Relation& rel, Side side,
                                                                         const TorusElement& cofactor) const {
    if (!side_allowed(torus_, rel, side, cofactor, is_xhat_expressible(cofactor)))
        throw std::invalid_argument("sidedness violation: relation " + rel.id + " may not act on the " +
                                    to_string(side) + " with this cofactor");
    const TorusElement product =
        side == Side::Left ? torus_.mul(rel.element, cofactor) : torus_.mul(cofactor, rel.element);
    RewriteCertificate cert{el, el - product, rel.id, rel.element, side, cofactor};
    return {cert.after, cert};
}

std::pair<TorusElement, RewriteCertificate> GluingAlgebra::eliminate(const TorusElement& el,
                                                                     const Relation& rel, Side side,
                                                                     const Monomial& term,
                                                                     std::size_t match_index) const {
    if (match_index >= rel.element.terms().size())
        throw std::invalid_argument("eliminate: relation " + rel.id + " has no term " + std::to_string(match_index));
    auto it = rel.element.terms().begin();
    std::advance(it, static_cast<long>(match_index));
    const Monomial rj{it->second, it->first};
    const Monomial rj_inv = inverse(rj, form());
    const Monomial cof = side == Side::Left ? mul(rj_inv, term, form()) : mul(term, rj_inv, form());
    return apply_rewrite(el, rel, side, TorusElement(cof));
}

std::vector<RewriteCertificate> GluingAlgebra::transport(const TorusElement& el, const Monomial& term,
                                                         const Exps& target,
                                                         const std::vector<std::string>& via) const {
    struct Binomial {
        const Relation* rel;
        std::size_t const_index, mono_index;
        Exps u;
    };
    std::vector<Binomial> bs;
    std::vector<Exps> cols;
    for (const auto& id : via) {
        const Relation& r = relation(id);
        if (r.element.terms().size() != 2)
            throw std::invalid_argument("transport: relation " + id + " is not a binomial");
        std::size_t idx = 0, ci = 2, mi = 2;
        for (const auto& [u, c] : r.element.terms()) {
            (exps_is_zero(u) ? ci : mi) = idx;
            ++idx;
        }
        if (ci == 2 || mi == 2)
            throw std::invalid_argument("transport: relation " + id + " is not monomial + constant");
        auto it = r.element.terms().begin();
        std::advance(it, static_cast<long>(mi));
        bs.push_back({&r, ci, mi, it->first});
        cols.push_back(it->first);
    }
    const auto n = solve_integer(cols, exps_sub(target, term.exps));
    if (!n) throw std::invalid_argument("transport: target exponent not reachable with the given relations");

    std::vector<RewriteCertificate> chain;
    TorusElement cur = el;
    Monomial t = term;
    for (std::size_t r = 0; r < bs.size(); ++r) {
        const std::int64_t count = (*n)[r];
        for (std::int64_t s = 0; s < std::abs(count); ++s) {
            const Side side = bs[r].rel->side;
            // count > 0: match the constant (multiplies the term in);
            // count < 0: match the monomial (divides it out).
            auto [after, cert] = eliminate(cur, *bs[r].rel, side, t, count > 0 ? bs[r].const_index : bs[r].mono_index);
            // The product is t + (new monomial); the new term is its negative.
            const TorusElement product = cert.before - cert.after;
            TorusElement rest = product - TorusElement(t);
            if (!rest.is_monomial()) throw std::logic_error("transport: unexpected product shape");
            Monomial nt = rest.as_monomial();
            nt.coeff = -nt.coeff;
            t = nt;
            cur = after;
            chain.push_back(cert);
        }
    }
    if (t.exps != target) throw std::logic_error("transport: did not reach the target exponent");
    return chain;
}

bool GluingAlgebra::verify(const RewriteCertificate& cert) const {
    if (!has_relation(cert.relation_id)) return false;
    const Relation& rel = relation(cert.relation_id);
    if (!(rel.element == cert.relation)) return false;
    if (!side_allowed(torus_, rel, cert.side, cert.cofactor, is_xhat_expressible(cert.cofactor))) return false;
    const TorusElement product = cert.side == Side::Left ? torus_.mul(cert.relation, cert.cofactor)
                                                         : torus_.mul(cert.cofactor, cert.relation);
    return cert.before - cert.after == product;
}

bool GluingAlgebra::verify_chain(const std::vector<RewriteCertificate>& chain) const {
    for (std::size_t i = 0; i < chain.size(); ++i) {
        if (!verify(chain[i])) return false;
        if (i + 1 < chain.size() && !(chain[i].after == chain[i + 1].before)) return false;
    }
    return true;
}

// ---------------------------------------------------------------- QGM

EdgeConeId GluingAlgebra::representative(int tetra, Label l) const {
    // Edge indices enumerate vertex pairs lexicographically; the smaller
    // index of an opposite pair is the lexicographically smaller pair.
    for (int k = 0; k < 6; ++k) {
        const BareEdge e{tetra, k};
        if (e.label() == l) return cone_id(e);
    }
    throw std::logic_error("representative: no edge with this label");
}

TorusElement GluingAlgebra::qgm_generator(int tetra, Label l) const {
    return TorusElement::monomial(-Scalar::one(), exps_scale(xhat_exps(representative(tetra, l)), 2));
}

TorusElement GluingAlgebra::iota(const TorusElement& q) const {
    if (q.ngens() != qgm_.ngens()) throw std::invalid_argument("iota: element is not over the QGM torus");
    TorusElement out(ngens());
    for (const auto& [m, c] : q.terms()) {
        Monomial acc{c, Exps(ngens(), 0)};
        for (std::size_t g = 0; g < m.size(); ++g) {
            if (m[g] == 0) continue;
            const Monomial X = qgm_generator(static_cast<int>(g / 3), static_cast<Label>(g % 3)).as_monomial();
            acc = mul(acc, pow(X, m[g], form()), form());
        }
        out.add_term(acc.exps, acc.coeff);
    }
    return out;
}

std::optional<TorusElement> GluingAlgebra::iota_preimage(const TorusElement& el) const {
    TorusElement out(qgm_.ngens());
    for (const auto& [u, c] : el.terms()) {
        const auto k = xhat_decompose(u);
        if (!k) return std::nullopt;
        Exps m(qgm_.ngens(), 0);
        std::vector<bool> is_rep(num_cones(), false);
        for (std::size_t t = 0; t < tri_.num_tetrahedra(); ++t)
            for (int l = 0; l < 3; ++l) {
                const EdgeConeId r = representative(static_cast<int>(t), static_cast<Label>(l));
                is_rep[static_cast<std::size_t>(r)] = true;
                const std::int64_t e = (*k)[static_cast<std::size_t>(r)];
                if (e % 2 != 0) return std::nullopt;
                m[3 * t + static_cast<std::size_t>(l)] = e / 2;
            }
        for (std::size_t cone = 0; cone < num_cones(); ++cone)
            if (!is_rep[cone] && (*k)[cone] != 0) return std::nullopt;
        const TorusElement image = iota(TorusElement::monomial(Scalar::one(), m));
        const Monomial im = image.as_monomial();
        out.add_term(m, c * im.coeff.inverse());
    }
    return out;
}

std::vector<TorusElement> GluingAlgebra::w_minus() const {
    std::vector<TorusElement> out;
    for (const auto& ec : tri_.edge_classes()) {
        if (!ec.closed) continue;
        Exps m(qgm_.ngens(), 0);
        for (const auto& e : ec.members) m[3 * static_cast<std::size_t>(e.tetra) + static_cast<std::size_t>(e.label())] += 1;
        out.push_back(iota(qgm_.weyl(m) - qgm_.constant(Scalar::a_pow(4))));
    }
    return out;
}

std::vector<std::pair<TorusElement, TorusElement>> GluingAlgebra::w_plus() const {
    std::vector<std::pair<TorusElement, TorusElement>> out;
    for (std::size_t t = 0; t < tri_.num_tetrahedra(); ++t) {
        Exps m(qgm_.ngens(), 0);
        m[3 * t] = m[3 * t + 1] = m[3 * t + 2] = 1;
        const TorusElement triangle = qgm_.weyl(m) + qgm_.constant(Scalar::a_pow(2));
        const TorusElement three = qgm_.gen(3 * t + 2, -1) + qgm_.gen(3 * t) - qgm_.one();
        out.emplace_back(iota(triangle), iota(three));
    }
    return out;
}

bool GluingAlgebra::check_even(const TorusElement& el) const {
    for (const auto& [u, c] : el.terms()) {
        const auto k = xhat_decompose(u);
        if (!k) return false;
        for (auto e : *k)
            if (e % 2 != 0) return false;
    }
    return true;
}

// ---------------------------------------------------------------- certificate chains

std::vector<RewriteCertificate> GluingAlgebra::opposite_edge_chain(EdgeConeId e) const {
    const BareEdge be = cone_edge(e);
    std::vector<std::string> via;
    for (int v = 0; v < 4; ++v) via.push_back(triangle_id({be.tetra, v}));
    const TorusElement start = xhat(e, 2);
    return transport(start, start.as_monomial(), exps_scale(xhat_exps(cone_id(be.opposite())), 2), via);
}

std::vector<RewriteCertificate> GluingAlgebra::certify_w_plus_triangle(int tetra) const {
    // ι([ẐẐ'Ẑ''] + A^2) = c·x̂^2 x̂'^2 x̂''^2 + A^2 over the representatives, which
    // all sit at vertex 0; the monomial is moved to the constant by triangles.
    const TorusElement el = w_plus().at(static_cast<std::size_t>(tetra)).first;
    std::vector<std::string> via;
    for (int v = 0; v < 4; ++v) via.push_back(triangle_id({tetra, v}));
    for (const auto& [u, c] : el.terms()) {
        if (exps_is_zero(u)) continue;
        return transport(el, Monomial{c, u}, Exps(ngens(), 0), via);
    }
    return {};
}

std::vector<RewriteCertificate> GluingAlgebra::certify_w_plus_three_term(int tetra) const {
    // ι(Ẑ''^{-1} + Ẑ - 1) = -(x̂''^{-2} + x̂^2 + 1) at vertex 0: one left step.
    const TorusElement el = w_plus().at(static_cast<std::size_t>(tetra)).second;
    const VertexCone v0{tetra, 0};
    const Relation& three = relation(three_term_id(v0, Label::Zpp));
    auto [after, cert] = apply_rewrite(el, three, Side::Left, torus_.constant(-Scalar::one()));
    return {cert};
}

std::vector<RewriteCertificate> GluingAlgebra::certify_w_minus(int edge_class) const {
    // Move every representative square to the member edge it stands for, then
    // divide out the edge relation twice on the right.
    std::vector<std::size_t> closed;
    for (std::size_t k = 0; k < tri_.edge_classes().size(); ++k)
        if (tri_.edge_classes()[k].closed) closed.push_back(k);
    const auto pos = std::find(closed.begin(), closed.end(), static_cast<std::size_t>(edge_class));
    if (pos == closed.end()) throw std::invalid_argument("certify_w_minus: not a closed edge class");
    TorusElement cur = w_minus().at(static_cast<std::size_t>(pos - closed.begin()));
    const auto& ec = tri_.edge_classes()[static_cast<std::size_t>(edge_class)];
    Exps w(ngens(), 0);
    for (const auto& m : ec.members) w = exps_add(w, xhat_exps(cone_id(m)));
    std::vector<std::string> via;
    std::set<int> tets;
    for (const auto& m : ec.members) tets.insert(m.tetra);
    for (int t : tets)
        for (int v = 0; v < 4; ++v) via.push_back(triangle_id({t, v}));
    std::vector<RewriteCertificate> chain;
    for (const auto& [u, c] : cur.terms()) {
        if (exps_is_zero(u)) continue;
        chain = transport(cur, Monomial{c, u}, exps_scale(w, 2), via);
        cur = chain.back().after;
        break;
    }
    const Relation& E = relation(edge_relation_id(edge_class));
    const std::size_t mono_index = exps_is_zero(E.element.terms().begin()->first) ? 1 : 0;
    for (int round = 0; round < 2; ++round) {
        for (const auto& [u, c] : cur.terms()) {
            if (exps_is_zero(u)) continue;
            auto [after, cert] = eliminate(cur, E, Side::Right, Monomial{c, u}, mono_index);
            chain.push_back(cert);
            cur = after;
            break;
        }
    }
    return chain;
}

// ---------------------------------------------------------------- numerics

std::vector<cplx> GluingAlgebra::xhat_assignment(const std::vector<Shape>& shapes,
                                                 const std::vector<int>& signs) const {
    std::vector<cplx> vals(ngens(), cplx(1.0, 0.0));
    for (EdgeConeId c = 0; c < static_cast<EdgeConeId>(num_cones()); ++c) {
        const BareEdge e = cone_edge(c);
        const cplx root = sqrt_minus(shapes.at(static_cast<std::size_t>(e.tetra)).of(e.label()));
        const double sign = signs.empty() ? 1.0 : static_cast<double>(signs.at(static_cast<std::size_t>(c)));
        const auto sh = tri_.suspensions_of_cone(c);
        vals[generator(sh[0].first, sh[0].second, e.label())] = sign * root;
        vals[generator(sh[1].first, sh[1].second, e.label())] = 1.0;
    }
    return vals;
}

cplx GluingAlgebra::specialize_xhat(const TorusElement& el, const std::vector<Shape>& shapes,
                                    const std::vector<int>& signs) const {
    return specialize(el, form(), xhat_assignment(shapes, signs), cplx(1.0, 0.0));
}

ClassicalReport GluingAlgebra::classical_check(const std::vector<Shape>& shapes) const {
    ClassicalReport rep;
    const auto vals = xhat_assignment(shapes, {});
    for (const auto& rel : relations_) {
        if (rel.family == RelationFamily::VMinus) {
            // Square of the leading Weyl product against ((-1)^{k/2} A^2)^2 at A = 1.
            Exps w;
            Scalar constant;
            for (const auto& [u, c] : rel.element.terms()) {
                if (exps_is_zero(u)) {
                    constant = c;
                } else {
                    w = u;
                }
            }
            const cplx lhs = specialize(torus_.weyl(exps_scale(w, 2)), form(), vals, 1.0);
            const cplx rhs = (constant * constant).eval(1.0);
            rep.edge_residuals.push_back(std::abs(lhs - rhs));
        }
    }
    for (const auto& vc : tri_.vertex_cones()) {
        const auto [triangle, three] = vertex_relations(vc);
        for (const auto& [u, c] : triangle.terms()) {
            if (exps_is_zero(u)) continue;
            const cplx lhs = specialize(torus_.weyl(exps_scale(u, 2)), form(), vals, 1.0);
            rep.triangle_residuals.push_back(std::abs(lhs - 1.0));
        }
        rep.three_term_residuals.push_back(std::abs(specialize(three, form(), vals, 1.0)));
    }
    return rep;
}

// ---------------------------------------------------------------- text

std::string GluingAlgebra::render_xhat(const TorusElement& el) const {
    std::vector<RenderedTerm> terms;
    for (const auto& [u, c] : el.terms()) {
        const auto k = xhat_decompose(u);
        if (!k) return torus_.render(el);
        TorusElement prod = torus_.one();
        std::string mono;
        for (std::size_t cone = 0; cone < k->size(); ++cone) {
            const std::int64_t e = (*k)[cone];
            if (e == 0) continue;
            prod = torus_.mul(prod, xhat(static_cast<EdgeConeId>(cone), e));
            if (!mono.empty()) mono += "·";
            mono += tri_.cone_name(static_cast<EdgeConeId>(cone)) + power_suffix(e);
        }
        terms.push_back({c * prod.as_monomial().coeff.inverse(), mono, *k});
    }
    return join_terms(std::move(terms));
}

std::optional<std::string> GluingAlgebra::render_qgm(const TorusElement& el) const {
    const auto pre = iota_preimage(el);
    if (!pre) return std::nullopt;
    // Display order: names sorted alphabetically.  Generators of different
    // tetrahedra commute and a tetrahedron's own generators keep their
    // relative order, so the normal-ordered coefficient is unchanged.
    std::vector<std::size_t> order(qgm_.ngens());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return qgm_.names()[a] < qgm_.names()[b]; });
    std::vector<RenderedTerm> terms;
    for (const auto& [m, c] : pre->terms()) {
        std::string mono;
        std::vector<std::int64_t> key;
        for (std::size_t g : order) {
            key.push_back(m[g]);
            if (m[g] == 0) continue;
            if (!mono.empty()) mono += "·";
            mono += qgm_.names()[g] + power_suffix(m[g]);
        }
        terms.push_back({c, mono, key});
    }
    return join_terms(std::move(terms));
}

std::string GluingAlgebra::render(const TorusElement& el) const {
    if (auto q = render_qgm(el)) return *q;
    return render_xhat(el);
}

TorusElement GluingAlgebra::parse(const std::string& text) const {
    QuantumTorus::Resolver resolver = [this](std::string_view name) -> std::optional<TorusElement> {
        if (auto c = tri_.find_cone(std::string(name))) return xhat(*c);
        if (auto q = qgm_.index_of(name))
            return qgm_generator(static_cast<int>(*q / 3), static_cast<Label>(*q % 3));
        return std::nullopt;
    };
    return torus_.parse(text, resolver);
}

}  // namespace q3t
