#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"

using namespace q3t;
using nlohmann::json;
using q3t_test::fig8;
using q3t_test::load_json;
using q3t_test::omega;

namespace {

std::vector<Shape> solved() { return {Shape{omega()}, Shape{omega()}}; }

TorusElement evaluate_file(const std::string& name, unsigned jobs = 1) {
    return evaluate(fig8(), link_from_json(fig8(), load_json(name)), jobs).value;
}

Arc t_arc(int susp, int half, Label a, Label b) {
    const auto& G = fig8();
    Arc arc;
    arc.kind = ArcKind::T;
    arc.suspension = susp;
    arc.gens = {G.generator(susp, half, a), G.generator(susp, half, b)};
    return arc;
}

Arc b_arc(int susp, Label a, Label b) {
    const auto& G = fig8();
    Arc arc;
    arc.kind = ArcKind::B;
    arc.suspension = susp;
    arc.gens = {G.generator(susp, 0, a), G.generator(susp, 1, b)};
    return arc;
}

TorusElement as_element(const Monomial& m) { return TorusElement(m); }

}  // namespace

TEST_CASE("T-arc evaluation") {
    const auto& G = fig8();
    const auto& T = G.torus();
    // g2 clockwise after g1
    const Arc cw = t_arc(0, 0, Label::Z, Label::Zp);
    const auto g1 = T.gen(cw.gens[0]), g2 = T.gen(cw.gens[1]);
    CHECK_FALSE(ev_T(G, cw, -1, 1).has_value());
    REQUIRE(ev_T(G, cw, 1, 1).has_value());
    // A^{-1}[g1 g2] = A^{-1}·A^{-1/2}·g1 g2
    CHECK(as_element(*ev_T(G, cw, 1, 1)) == Scalar::a_half(-3) * T.mul(g1, g2));
    CHECK(as_element(*ev_T(G, cw, 1, -1)) == Scalar::one() * T.weyl(exps_sub(g1.terms().begin()->first,
                                                                              g2.terms().begin()->first)));
    CHECK(as_element(*ev_T(G, cw, -1, -1)) == Scalar::a_pow(1) * T.weyl(exps_scale(exps_add(g1.terms().begin()->first,
                                                                                            g2.terms().begin()->first), -1)));
    // g2 counterclockwise after g1
    const Arc ccw = t_arc(0, 0, Label::Zp, Label::Z);
    CHECK_FALSE(ev_T(G, ccw, 1, -1).has_value());
    CHECK(ev_T(G, ccw, -1, 1).has_value());
    CHECK(ev_T(G, ccw, 1, 1).has_value());
    // U-turns
    const Arc u = t_arc(0, 0, Label::Zpp, Label::Zpp);
    CHECK_FALSE(ev_T(G, u, 1, 1).has_value());
    CHECK_FALSE(ev_T(G, u, -1, -1).has_value());
    CHECK(as_element(*ev_T(G, u, 1, -1)) == T.constant(-Scalar::a_half(-5)));
    CHECK(as_element(*ev_T(G, u, -1, 1)) == T.constant(Scalar::a_half(-1)));
}

TEST_CASE("B-arc evaluation") {
    const auto& G = fig8();
    const auto& T = G.torus();
    const Arc b = b_arc(0, Label::Z, Label::Zp);
    const auto g1 = T.gen(b.gens[0]), g2 = T.gen(b.gens[1]);
    CHECK(as_element(ev_B(G, b, 1, 1)) == (-Scalar::i()) * T.mul(g1, g2));
    CHECK(as_element(ev_B(G, b, -1, -1)) == Scalar::i() * T.mul(T.pow(g1, -1), T.pow(g2, -1)));
    CHECK_THROWS_AS((void)ev_B(G, b, 1, -1), std::invalid_argument);
}

TEST_CASE("K_m^2 fixture") {
    const auto& G = fig8();
    const auto ev = evaluate(G, link_from_json(G, load_json("km2.json")));
    CHECK(ev.nonzero_states == 4);
    CHECK(ev.total_states == 16);
    CHECK(ev.value == G.iota(G.qgm_torus().parse("2 + Y''*Z^-1 + Y''^-1*Z")));
    CHECK(G.render(ev.value) == "2 + Y''·Z^-1 + Y''^-1·Z");
}

TEST_CASE("K_b fixture and reduction script") {
    const auto& G = fig8();
    const auto ev = evaluate(G, link_from_json(G, load_json("kb.json")));
    CHECK(ev.nonzero_states == 3);
    CHECK(ev.value == G.parse("A*z'_NS*y'_NS^-1 + A*z'_NS^-1*y'_NS + A*z'_NS^-1*y'_NS^-1"));
    const auto red = reduce_with_script(G, ev.value, load_json("kb_script.json"));
    CHECK(red.value == G.iota(G.qgm_torus().parse("A*(Z*Y''^-1 + Y)")));
    CHECK(G.verify_chain(red.certificates));
    CHECK(red.certificates.front().before == ev.value);
    CHECK(red.certificates.back().after == red.value);
    for (const auto& c : red.certificates) CHECK((G.relation(c.relation_id).side == c.side || G.relation(c.relation_id).central));
}

TEST_CASE("K_b^2 fixture and reduction script") {
    const auto& G = fig8();
    const auto ev = evaluate(G, link_from_json(G, load_json("kb2.json")));
    CHECK(ev.nonzero_states == 9);
    const auto red = reduce_with_script(G, ev.value, load_json("kb2_script.json"));
    CHECK(red.value == G.iota(G.qgm_torus().parse("A^4*(Z*Y''^-1 + Y)^2 + 1 - A^4")));
    CHECK(G.verify_chain(red.certificates));
}

TEST_CASE("the empty link evaluates to 1") {
    const auto& G = fig8();
    const auto lp = link_from_json(G, json::parse(R"({"states": [], "arcs": []})"));
    const auto ev = evaluate(G, lp);
    CHECK(ev.value == G.torus().one());
    CHECK(ev.total_states == 1);
}

TEST_CASE("turn sequences compile to the arc presentations") {
    const auto& G = fig8();
    for (const auto& [turns, arcs] : {std::pair{"km2_turns.json", "km2.json"}, std::pair{"kb_turns.json", "kb.json"},
                                      std::pair{"kb2_turns.json", "kb2.json"}}) {
        const auto tj = load_json(turns);
        CHECK(is_turn_sequence(tj));
        CHECK_FALSE(is_turn_sequence(load_json(arcs)));
        const auto lp = compile_turns(G, turns_from_json(G.triangulation(), tj));
        CHECK(evaluate(G, lp).value == evaluate_file(arcs));
    }
}

TEST_CASE("invariance under rotation of the turn sequence") {
    const auto& G = fig8();
    for (const char* name : {"km2_turns.json", "kb_turns.json", "kb2_turns.json"}) {
        auto ts = turns_from_json(G.triangulation(), load_json(name));
        const auto base = evaluate(G, compile_turns(G, ts)).value;
        std::rotate(ts.turns.begin(), ts.turns.begin() + 1, ts.turns.end());
        CHECK(evaluate(G, compile_turns(G, ts)).value == base);
    }
}

TEST_CASE("invariance under renaming and reordering state variables") {
    const auto& G = fig8();
    auto j = load_json("km2.json");
    std::string text = j.dump();
    for (const auto& [from, to] : {std::pair{"e1", "p"}, std::pair{"e2", "q"}, std::pair{"e3", "r"}, std::pair{"e4", "s"}}) {
        for (std::size_t pos = text.find(from); pos != std::string::npos; pos = text.find(from, pos))
            text.replace(pos, 2, to);
    }
    auto renamed = json::parse(text);
    renamed["states"] = json::array({"s", "r", "q", "p"});
    CHECK(evaluate(G, link_from_json(G, renamed)).value == evaluate_file("km2.json"));
    const auto lp = link_from_json(G, load_json("kb2.json"));
    CHECK(evaluate(G, link_from_json(G, link_to_json(G, lp))).value == evaluate(G, lp).value);
}

TEST_CASE("parallel evaluation agrees with serial evaluation") {
    for (const char* name : {"km2.json", "kb.json", "kb2.json"}) {
        const auto serial = evaluate_file(name, 1);
        CHECK(evaluate_file(name, 2) == serial);
        CHECK(evaluate_file(name, 3) == serial);
        CHECK(evaluate_file(name, 8) == serial);
    }
}

TEST_CASE("classical shadow matches the classical trace") {
    const auto& G = fig8();
    for (const auto& [turns, arcs] : {std::pair{"km2_turns.json", "km2.json"}, std::pair{"kb_turns.json", "kb.json"},
                                      std::pair{"kb2_turns.json", "kb2.json"}}) {
        const auto ts = turns_from_json(G.triangulation(), load_json(turns));
        const cplx target = classical_trace(G.triangulation(), ts, solved());
        const auto match = branch_search(G, evaluate_file(arcs), solved(), target, 1e-6);
        REQUIRE(match.has_value());
        CHECK(match->residual < 1e-6);
        CHECK(match->assignments_tried <= 4096);
        CHECK(std::abs(match->shadow - static_cast<double>(match->overall_sign) * target) < 1e-6);
    }
    // the QGM value of K_m^2 specializes directly: 2 + Z''/Z + Z/Z''
    const auto ev = evaluate_file("km2.json");
    const Shape z{omega()};
    CHECK(std::abs(classical_shadow(G, ev, solved()) - (2.0 + z.zpp() / z.z + z.z / z.zpp())) < 1e-9);
    CHECK_THROWS_AS((void)branch_search(G, evaluate_file("kb.json"), solved(), 0.0, 1e-6, 1), std::invalid_argument);
}

TEST_CASE("framing") {
    const auto& G = fig8();
    const auto x = evaluate_file("km2.json");
    CHECK(apply_framing(x, 1) == (-Scalar::a_pow(3)) * x);
    CHECK(apply_framing(apply_framing(x, 2), -2) == x);
    CHECK(apply_framing(x, 0) == x);
    (void)G;
}

TEST_CASE("input errors") {
    const auto& G = fig8();
    auto bad_link = [&](const char* text) { return link_from_json(G, json::parse(text)); };
    CHECK_THROWS_AS(bad_link(R"({"states":["e1"],"arcs":[{"kind":"X","fs":"N","cones":["z_N","z'_N"],"states":["e1","e1"]}]})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(bad_link(R"({"states":["e1"],"arcs":[{"kind":"T","fs":"Q","cones":["z_N","z'_N"],"states":["e1","e1"]}]})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(bad_link(R"({"states":["e1"],"arcs":[{"kind":"T","fs":"N","cones":["z_N","z'_N"],"states":["e1","e9"]}]})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(bad_link(R"({"states":["e1"],"arcs":[{"kind":"T","fs":"N","cones":["z_N","y_N"],"states":["e1","-e1"]}]})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(bad_link(R"({"states":["e1","e1"],"arcs":[]})"), std::invalid_argument);
    CHECK_THROWS_AS(bad_link(R"({"states":["e1"],"arcs":[{"kind":"T","fs":"N","cones":["z_S","z'_N"],"states":["e1","-e1"]}]})"),
                    std::invalid_argument);
    auto bad_turns = [&](const char* text) { return turns_from_json(G.triangulation(), json::parse(text)); };
    CHECK_THROWS_AS(bad_turns(R"({"turns":[{"edge_cone":"z'_NS","face":"S","turn":"SIDEWAYS"}]})"), std::invalid_argument);
    CHECK_THROWS_AS(bad_turns(R"({"turns":[{"edge_cone":"q_NS","face":"S","turn":"LEFT"}]})"), std::invalid_argument);
    CHECK_THROWS_AS(bad_turns(R"({"turns":[]})"), std::invalid_argument);
    CHECK_THROWS_AS(bad_turns(R"({"cable":0,"turns":[{"edge_cone":"z'_NS","face":"S","turn":"LEFT"}]})"),
                    std::invalid_argument);
    // a single LEFT turn cannot close up
    const auto open = bad_turns(R"({"turns":[{"edge_cone":"z'_NS","face":"S","turn":"LEFT"}]})");
    CHECK_THROWS_AS((void)compile_turns(G, open), std::invalid_argument);
    // scripts
    const auto kb = evaluate_file("kb.json");
    CHECK_THROWS_AS((void)reduce_with_script(G, kb, json::parse(R"([{"op":"expect","value":"Z"}])")), std::runtime_error);
    CHECK_THROWS_AS((void)reduce_with_script(G, kb, json::parse(R"([{"op":"jump"}])")), std::runtime_error);
    CHECK_THROWS_AS((void)reduce_with_script(G, kb, json::parse(
                        R"J([{"op":"rewrite","relation":"three(z,E,Z')","side":"left","term":"z_NE","match":0}])J")),
                    std::runtime_error);
}
