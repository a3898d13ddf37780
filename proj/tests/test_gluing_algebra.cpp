#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"

#include <set>

using namespace q3t;
using q3t_test::fig8;
using q3t_test::omega;

namespace {

EdgeConeId cone(const std::string& name) {
    const auto c = fig8().triangulation().find_cone(name);
    REQUIRE(c.has_value());
    return *c;
}

std::vector<Shape> solved() { return {Shape{omega()}, Shape{omega()}}; }

// x̂_a x̂_b = A^{<a,b>} x̂_b x̂_a computed by torus multiplication.
std::int64_t xhat_exchange(const GluingAlgebra& G, EdgeConeId a, EdgeConeId b) {
    const auto ab = G.torus().mul(G.xhat(a), G.xhat(b));
    const auto ba = G.torus().mul(G.xhat(b), G.xhat(a));
    for (std::int64_t k = -4; k <= 4; ++k)
        if (ab == Scalar::a_pow(k) * ba) return k;
    FAIL("x̂ generators do not q-commute");
    return 0;
}

bool chain_moves(const std::vector<RewriteCertificate>& chain, const TorusElement& from, const TorusElement& to) {
    return !chain.empty() && chain.front().before == from && chain.back().after == to;
}

}  // namespace

TEST_CASE("generators and the commutation form") {
    const auto& G = fig8();
    CHECK(G.ngens() == 24);
    // 6 nonzero pairs per suspension: 3 per half, none across halves or suspensions
    CHECK(G.form().nonzero_pairs() == 24);
    for (const auto& s : G.triangulation().suspensions())
        for (int h = 0; h < 2; ++h)
            for (int l = 0; l < 3; ++l) {
                const auto g = G.generator(s.id, h, static_cast<Label>(l));
                const auto next = G.generator(s.id, h, cw_next(static_cast<Label>(l)));
                CHECK(G.form().at(g, next) == 1);
                CHECK(G.form().at(g, G.generator(s.id, 1 - h, static_cast<Label>(l))) == 0);
            }
    std::set<std::size_t> all;
    for (const auto& s : G.triangulation().suspensions())
        for (int h = 0; h < 2; ++h)
            for (int l = 0; l < 3; ++l) all.insert(G.generator(s.id, h, static_cast<Label>(l)));
    CHECK(all.size() == 24);
}

TEST_CASE("square-root shape parameters q-commute") {
    const auto& G = fig8();
    // consecutive labels in one tetrahedron: x̂_{e1} x̂_{e2} = A x̂_{e2} x̂_{e1}
    CHECK(xhat_exchange(G, cone("z_NE"), cone("z'_EW")) == 1);
    CHECK(xhat_exchange(G, cone("z'_EW"), cone("z''_NW")) == 1);
    CHECK(xhat_exchange(G, cone("y_NW"), cone("y'_EW")) == 1);
    // opposite edges and different tetrahedra commute
    CHECK(xhat_exchange(G, cone("z_NE"), cone("z_SW")) == 0);
    CHECK(xhat_exchange(G, cone("z_NE"), cone("y_NW")) == 0);
    for (EdgeConeId a = 0; a < 12; ++a) {
        CHECK(xhat_exchange(G, a, a) == 0);
        for (EdgeConeId b = 0; b < 12; ++b) CHECK(xhat_exchange(G, a, b) == -xhat_exchange(G, b, a));
    }
    const auto d = G.xhat_decompose(G.xhat_exps(cone("z'_NS")));
    REQUIRE(d.has_value());
    CHECK((*d)[static_cast<std::size_t>(cone("z'_NS"))] == 1);
}

TEST_CASE("edge relations") {
    const auto& G = fig8();
    for (int e = 0; e < 2; ++e) {
        const auto r = G.edge_relation(e);
        CHECK(r.terms().size() == 2);
        CHECK(r.coefficient(Exps(24, 0)) == -Scalar::a_pow(2));
        CHECK(G.relation(G.edge_relation_id(e)).family == RelationFamily::VMinus);
        CHECK(G.relation(G.edge_relation_id(e)).side == Side::Right);
    }
    const GluingAlgebra fold(Triangulation::from_json(nlohmann::json::parse(
        R"({"tetrahedra":[{"letter":"t","neighbors":[-1,-1,0,0],"gluings":["","","0132","0132"]}]})")));
    REQUIRE(fold.triangulation().edge_classes()[0].closed);
    CHECK(fold.edge_relation(0).coefficient(Exps(fold.ngens(), 0)) == Scalar::i() * Scalar::a_pow(2));
    const GluingAlgebra pillow(Triangulation::from_json(nlohmann::json::parse(R"({"tetrahedra":[
        {"letter":"t","neighbors":[-1,-1,1,1],"gluings":["","","1023","1023"]},
        {"letter":"u","neighbors":[-1,-1,0,0],"gluings":["","","1023","1023"]}]})")));
    REQUIRE(pillow.triangulation().edge_classes()[0].closed);
    CHECK(pillow.edge_relation(0).coefficient(Exps(pillow.ngens(), 0)) == -Scalar::a_pow(2));
}

TEST_CASE("triangle relations are central") {
    const auto& G = fig8();
    for (const auto& vc : G.triangulation().vertex_cones()) {
        const auto [tri, three] = G.vertex_relations(vc);
        CHECK(tri.coefficient(Exps(24, 0)) == Scalar::a_pow(1));
        CHECK(three.coefficient(Exps(24, 0)) == Scalar::one());
        CHECK(three.terms().size() == 3);
        for (EdgeConeId c = 0; c < 12; ++c) CHECK(G.torus().commutator(tri, G.xhat(c)).is_zero());
        CHECK(G.relation(G.triangle_id(vc)).central);
    }
    CHECK(G.has_relation("tri(z,E)"));
    CHECK(G.has_relation("three(z,E,Z')"));
    CHECK_FALSE(G.has_relation("tri(q,E)"));
    CHECK_THROWS((void)G.relation("tri(q,E)"));
}

TEST_CASE("rotated three-term relations are derived with replaying proofs") {
    const auto& G = fig8();
    int derived = 0;
    for (const auto& r : G.relations())
        if (r.family == RelationFamily::Derived) {
            ++derived;
            CHECK(G.verify_chain(r.proof));
            CHECK(r.proof.front().before == r.element);
            CHECK(r.proof.back().after.is_zero());
        }
    CHECK(derived == 16);
    CHECK(G.relation("three(z,E,Z')").element == G.parse("1 + z''_NW^2 + z'_NS^-2"));
    CHECK(G.relation("three(z,E,Z)").element == G.parse("1 + z'_NS^2 + z_SW^-2"));
}

TEST_CASE("opposite edges have equal squares") {
    const auto& G = fig8();
    for (EdgeConeId e = 0; e < 12; ++e) {
        const auto chain = G.opposite_edge_chain(e);
        const EdgeConeId opp = cone_id(cone_edge(e).opposite());
        CHECK(G.verify_chain(chain));
        CHECK(chain_moves(chain, G.xhat(e, 2), G.xhat(opp, 2)));
    }
}

TEST_CASE("quantum gluing module") {
    const auto& G = fig8();
    const auto& Q = G.qgm_torus();
    CHECK(Q.names() == std::vector<std::string>{"Z", "Z'", "Z''", "Y", "Y'", "Y''"});
    for (int t = 0; t < 2; ++t)
        for (int l = 0; l < 3; ++l) {
            const Label L = static_cast<Label>(l);
            const EdgeConeId r = G.representative(t, L);
            CHECK(cone_edge(r).tetra == t);
            CHECK(cone_edge(r).label() == L);
            CHECK(G.qgm_generator(t, L) == -G.xhat(r, 2));
            CHECK(G.iota(Q.gen(static_cast<std::size_t>(3 * t + l))) == G.qgm_generator(t, L));
        }
    // X̂ X̂' = A^4 X̂' X̂ inside a tetrahedron, commuting across tetrahedra
    const auto Z = G.qgm_generator(0, Label::Z), Zp = G.qgm_generator(0, Label::Zp);
    const auto Y = G.qgm_generator(1, Label::Z);
    CHECK(G.torus().mul(Z, Zp) == Scalar::a_pow(4) * G.torus().mul(Zp, Z));
    CHECK(G.torus().commutator(Z, Y).is_zero());
    // ι is multiplicative on monomials
    const auto m = Q.parse("Z^2*Y''^-1");
    CHECK(G.iota(m) == G.torus().mul(G.torus().pow(Z, 2), G.torus().pow(G.qgm_generator(1, Label::Zpp), -1)));
    const auto back = G.iota_preimage(G.iota(Q.parse("2 + Y''*Z^-1 + Y''^-1*Z")));
    REQUIRE(back.has_value());
    CHECK(*back == Q.parse("2 + Y''*Z^-1 + Y''^-1*Z"));
    CHECK_FALSE(G.iota_preimage(G.xhat(cone("z_NE"))).has_value());
    CHECK(G.render_qgm(G.iota(Q.parse("2 + Y''*Z^-1 + Y''^-1*Z"))) == std::optional<std::string>("2 + Y''·Z^-1 + Y''^-1·Z"));
}

TEST_CASE("W relations are certified") {
    const auto& G = fig8();
    CHECK(G.w_minus().size() == 2);
    CHECK(G.w_plus().size() == 2);
    for (int t = 0; t < 2; ++t) {
        const auto a = G.certify_w_plus_triangle(t);
        const auto b = G.certify_w_plus_three_term(t);
        CHECK(G.verify_chain(a));
        CHECK(G.verify_chain(b));
        CHECK(chain_moves(a, G.w_plus()[static_cast<std::size_t>(t)].first, TorusElement(24)));
        CHECK(chain_moves(b, G.w_plus()[static_cast<std::size_t>(t)].second, TorusElement(24)));
        for (const auto& c : a) CHECK(G.relation(c.relation_id).side == c.side);
    }
    for (int e = 0; e < 2; ++e) {
        const auto c = G.certify_w_minus(e);
        CHECK(G.verify_chain(c));
        CHECK(chain_moves(c, G.w_minus()[static_cast<std::size_t>(e)], TorusElement(24)));
    }
}

TEST_CASE("evenness") {
    const auto& G = fig8();
    CHECK(G.check_even(G.iota(G.qgm_torus().parse("Z*Y'^-3 + 5"))));
    CHECK_FALSE(G.check_even(G.xhat(cone("z_NE"))));
    CHECK_FALSE(G.check_even(G.torus().gen(0)));
    CHECK(G.is_xhat_expressible(G.xhat(cone("z_NE"))));
    CHECK_FALSE(G.is_xhat_expressible(G.torus().gen(0)));
}

TEST_CASE("rewriting respects sidedness") {
    const auto& G = fig8();
    const auto& edge = G.relation(G.edge_relation_id(0));
    const auto& three = G.relation("three(z,E,Z'')");
    // a cofactor that does not commute with the relation
    const auto cof = G.xhat(cone("z'_EW"));
    REQUIRE_FALSE(G.torus().commutator(three.element, cof).is_zero());
    CHECK_THROWS_AS((void)G.apply_rewrite(three.element, three, Side::Right, cof), std::invalid_argument);
    const auto [after, cert] = G.apply_rewrite(three.element, three, Side::Left, G.torus().one());
    CHECK(after.is_zero());
    CHECK(G.verify(cert));
    // the edge relation acts on the right
    const auto [after2, cert2] = G.apply_rewrite(edge.element, edge, Side::Right, G.torus().one());
    CHECK(after2.is_zero());
    CHECK(G.verify(cert2));
    // central relations act on either side
    const auto& tri = G.relation("tri(z,E)");
    CHECK_NOTHROW((void)G.apply_rewrite(tri.element, tri, Side::Right, cof));
    // a tampered certificate does not verify
    RewriteCertificate bad = cert;
    bad.after = G.torus().one();
    CHECK_FALSE(G.verify(bad));
    // a zero cofactor leaves the element unchanged
    const auto [same, cert3] = G.apply_rewrite(cof, three, Side::Left, TorusElement(24));
    CHECK(same == cof);
    CHECK(G.verify(cert3));
}

TEST_CASE("elimination and transport") {
    const auto& G = fig8();
    const auto el = G.parse("z'_NS y'_NS^-1 + 3");
    const auto& three = G.relation("three(z,E,Z')");
    const Monomial term = G.parse("z'_NS y'_NS^-1").as_monomial();
    const auto [after, cert] = G.eliminate(el, three, Side::Left, term, 0);
    CHECK(G.verify(cert));
    CHECK(after.coefficient(term.exps).is_zero());
    CHECK_THROWS_AS((void)G.eliminate(el, three, Side::Left, term, 7), std::invalid_argument);
    // transport z'_NS^-1 y'_NS to z_NE^2 y''_NE^-2 through triangle and edge relations
    std::vector<std::string> via;
    for (const auto& vc : G.triangulation().vertex_cones()) via.push_back(G.triangle_id(vc));
    via.push_back(G.edge_relation_id(0));
    via.push_back(G.edge_relation_id(1));
    const auto start = G.parse("z'_NS^-1 y'_NS");
    const auto chain = G.transport(start, start.as_monomial(), G.parse("z_NE^2 y''_NE^-2").as_monomial().exps, via);
    CHECK(G.verify_chain(chain));
    REQUIRE(chain.back().after.is_monomial());
    CHECK(chain.back().after.as_monomial().exps == G.parse("z_NE^2 y''_NE^-2").as_monomial().exps);
    CHECK_THROWS((void)G.transport(start, start.as_monomial(), G.parse("z_NE").as_monomial().exps, via));
    CHECK_THROWS_AS((void)G.transport(start, start.as_monomial(), start.as_monomial().exps, {"three(z,E,Z')"}),
                    std::invalid_argument);
}

TEST_CASE("derived relations must replay") {
    GluingAlgebra G(fig8().triangulation());
    const auto& three = G.relation("three(z,E,Z'')");
    const auto el = G.torus().mul(G.xhat(cone("z_NE"), 2), three.element);
    // left multiple of a V+ relation: one certificate reduces it to zero
    const auto [after, cert] = G.apply_rewrite(el, three, Side::Left, G.xhat(cone("z_NE"), 2));
    (void)after;
    CHECK_THROWS((void)G.add_derived("bogus", el, {cert}));
    const auto el2 = G.torus().mul(three.element, G.xhat(cone("z_NE"), 2));
    const auto [after2, cert2] = G.apply_rewrite(el2, three, Side::Left, G.xhat(cone("z_NE"), 2));
    REQUIRE(after2.is_zero());
    CHECK_NOTHROW(G.add_derived("mine", el2, {cert2}));
    CHECK(G.has_relation("mine"));
    CHECK_THROWS((void)G.add_derived("mine2", el2, {}));
}

TEST_CASE("classical specialization") {
    const auto& G = fig8();
    const auto report = G.classical_check(solved());
    CHECK(report.max_residual() < 1e-9);
    CHECK(report.edge_residuals.size() == 2);
    CHECK(report.triangle_residuals.size() == 8);
    std::vector<Shape> off = solved();
    off[0].z += 0.1;
    CHECK(G.classical_check(off).max_residual() > 1e-3);
    // Z ↦ ι(Ẑ) specializes to Z
    const auto v = G.specialize_xhat(G.qgm_generator(0, Label::Z), solved(), {});
    CHECK(std::abs(v - omega()) < 1e-12);
    const auto vp = G.specialize_xhat(G.qgm_generator(0, Label::Zp), solved(), {});
    CHECK(std::abs(vp - Shape{omega()}.zp()) < 1e-12);
}

TEST_CASE("parsing and rendering") {
    const auto& G = fig8();
    const auto x = G.parse("A*z'_NS*y'_NS^-1 + 2");
    CHECK(G.parse(G.render_xhat(x)) == x);
    CHECK(G.parse("Z") == G.qgm_generator(0, Label::Z));
    CHECK(G.render(G.parse("Z*Y''^-1")) == "Y''^-1·Z");
    CHECK_THROWS_AS((void)G.parse("w_NS"), std::invalid_argument);
    CHECK(G.qgm_name(1, Label::Zpp) == "Y''");
}
