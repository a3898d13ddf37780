#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"

#include <algorithm>
#include <set>

using namespace q3t;
using nlohmann::json;

namespace {

const Triangulation& fig8() { return q3t_test::fig8().triangulation(); }

// One tetrahedron with faces 2 and 3 glued: edge 01 closes up with valence 1.
json one_tet_fold() {
    return json::parse(R"({"tetrahedra":[{"letter":"t","neighbors":[-1,-1,0,0],
                                         "gluings":["","","0132","0132"]}]})");
}

// Two tetrahedra glued along two faces: edge 01 closes up with valence 2.
json two_tet_pillow() {
    return json::parse(R"({"tetrahedra":[
        {"letter":"t","neighbors":[-1,-1,1,1],"gluings":["","","1023","1023"]},
        {"letter":"u","neighbors":[-1,-1,0,0],"gluings":["","","1023","1023"]}]})");
}

json single_tet() {
    return json::parse(R"({"tetrahedra":[{"letter":"t","neighbors":[-1,-1,-1,-1],
                                         "gluings":["","","",""]}]})");
}

}  // namespace

TEST_CASE("Perm4") {
    const Perm4 p = Perm4::parse("2310");
    CHECK(p[0] == 2);
    CHECK(p.str() == "2310");
    CHECK(p.inverse().str() == "3201");
    CHECK(p.is_odd());
    CHECK(Perm4::parse("1230").is_odd());
    CHECK_FALSE(Perm4::parse("0123").is_odd());
    CHECK(Perm4::parse("1032").inverse() == Perm4::parse("1032"));
    CHECK_THROWS_AS(Perm4::parse("0012"), std::invalid_argument);
    CHECK_THROWS_AS(Perm4::parse("012"), std::invalid_argument);
}

TEST_CASE("bare edges and labels") {
    CHECK(edge_index(0, 1) == 0);
    CHECK(edge_index(3, 2) == 5);
    CHECK(BareEdge{0, 0}.opposite() == BareEdge{0, 5});
    CHECK(BareEdge{0, 0}.label() == Label::Z);
    CHECK(BareEdge{0, 1}.label() == Label::Zp);
    CHECK(BareEdge{0, 2}.label() == Label::Zpp);
    CHECK(BareEdge{0, 3}.label() == Label::Zpp);
    CHECK(BareEdge{0, 4}.label() == Label::Zp);
    CHECK(BareEdge{0, 5}.label() == Label::Z);
    CHECK(cw_next(Label::Zpp) == Label::Z);
    CHECK(ccw_next(Label::Z) == Label::Zpp);
    CHECK(label_primes(Label::Zpp) == "''");
}

TEST_CASE("figure-8 combinatorics") {
    const auto& T = fig8();
    CHECK(T.num_tetrahedra() == 2);
    CHECK(T.num_boundary_faces() == 0);
    REQUIRE(T.edge_classes().size() == 2);
    std::size_t total = 0;
    for (const auto& ec : T.edge_classes()) {
        CHECK(ec.valence() == 6);
        CHECK(ec.closed);
        total += ec.valence();
    }
    CHECK(total == 6 * T.num_tetrahedra());
    REQUIRE(T.suspensions().size() == 4);
    std::set<std::string> names;
    for (const auto& s : T.suspensions()) {
        names.insert(s.name);
        CHECK(s.halves.size() == 2);
    }
    CHECK(names == std::set<std::string>{"N", "S", "E", "W"});
    CHECK(T.vertex_cones().size() == 8);
}

TEST_CASE("figure-8 names round-trip") {
    const auto& T = fig8();
    for (EdgeConeId c = 0; c < 12; ++c) {
        const auto name = T.cone_name(c);
        REQUIRE(T.find_cone(name).has_value());
        CHECK(*T.find_cone(name) == c);
    }
    CHECK(T.find_cone("z'_NS").has_value());
    CHECK(T.find_cone("y''_NE").has_value());
    CHECK_FALSE(T.find_cone("q_NS").has_value());
    CHECK(T.find_suspension("E").has_value());
    CHECK_FALSE(T.find_suspension("X").has_value());
    CHECK(T.find_tetra("y") == 1);
    const auto first = T.edge_classes()[0].members;
    std::vector<std::string> got;
    for (const auto& m : first) got.push_back(T.cone_name(cone_id(m)));
    CHECK(got == std::vector<std::string>{"z_NE", "y_SE", "z'_NS", "y_NW", "z_SW", "y'_NS"});
}

TEST_CASE("cones around edges follow the gluing") {
    const auto& T = fig8();
    for (std::size_t e = 0; e < T.edge_classes().size(); ++e) {
        const auto around = T.cones_around_edge(static_cast<int>(e));
        const auto& members = T.edge_classes()[e].members;
        REQUIRE(around.size() == members.size());
        for (std::size_t k = 0; k < around.size(); ++k) {
            CHECK(T.edge_class_of(cone_edge(around[k].cone)) == static_cast<int>(e));
            // the listed suspension touches this cone and the next one
            const auto next = around[(k + 1) % around.size()].cone;
            bool here = false, there = false;
            for (const auto& [s, h] : T.suspensions_of_cone(around[k].cone)) here = here || s == around[k].suspension;
            for (const auto& [s, h] : T.suspensions_of_cone(next)) there = there || s == around[k].suspension;
            CHECK(here);
            CHECK(there);
        }
    }
}

TEST_CASE("vertex cones rotate through the three labels clockwise") {
    const auto& T = fig8();
    for (const auto& vc : T.vertex_cones()) {
        const auto cones = T.cones_around_vertex(vc);
        std::set<int> vertices_seen;
        for (std::size_t k = 0; k < 3; ++k) {
            const BareEdge e = cone_edge(cones[k].cone);
            CHECK(e.tetra == vc.tetra);
            const auto vs = e.vertices();
            CHECK((vs[0] == vc.vertex || vs[1] == vc.vertex));
            vertices_seen.insert(vs[0] == vc.vertex ? vs[1] : vs[0]);
            CHECK(cone_edge(cones[(k + 1) % 3].cone).label() == cw_next(e.label()));
        }
        CHECK(vertices_seen.size() == 3);
    }
}

TEST_CASE("suspension halves and partners") {
    const auto& T = fig8();
    for (const auto& s : T.suspensions()) {
        for (int h = 0; h < 2; ++h) {
            const auto& half = s.halves[static_cast<std::size_t>(h)];
            CHECK(T.suspension_of(half.tetra, half.face) == std::make_pair(s.id, h));
            for (int l = 0; l < 3; ++l) {
                const Label p = s.partner[static_cast<std::size_t>(h)][static_cast<std::size_t>(l)];
                // partners lie over the same edge class
                const auto a = cone_edge(half.cones[static_cast<std::size_t>(l)]);
                const auto b = cone_edge(s.halves[static_cast<std::size_t>(1 - h)].cones[static_cast<std::size_t>(p)]);
                CHECK(T.edge_class_of(a) == T.edge_class_of(b));
                CHECK(s.partner[static_cast<std::size_t>(1 - h)][static_cast<std::size_t>(p)] == static_cast<Label>(l));
            }
        }
    }
}

TEST_CASE("small triangulations") {
    SUBCASE("single unglued tetrahedron") {
        const auto T = Triangulation::from_json(single_tet());
        CHECK(T.edge_classes().size() == 6);
        for (const auto& ec : T.edge_classes()) {
            CHECK(ec.valence() == 1);
            CHECK_FALSE(ec.closed);
        }
        CHECK(T.num_boundary_faces() == 4);
        CHECK(T.suspensions().size() == 4);
    }
    SUBCASE("folded tetrahedron has a closed valence-1 edge") {
        const auto T = Triangulation::from_json(one_tet_fold());
        int closed = 0;
        for (const auto& ec : T.edge_classes())
            if (ec.closed) {
                ++closed;
                CHECK(ec.valence() == 1);
            }
        CHECK(closed == 1);
        CHECK(T.num_boundary_faces() == 2);
    }
    SUBCASE("pillow has a closed valence-2 edge") {
        const auto T = Triangulation::from_json(two_tet_pillow());
        int closed = 0;
        for (const auto& ec : T.edge_classes())
            if (ec.closed) {
                ++closed;
                CHECK(ec.valence() == 2);
            }
        CHECK(closed == 1);
        CHECK(T.num_boundary_faces() == 4);
    }
}

TEST_CASE("invalid inputs are rejected") {
    auto bad = [](const char* text) { return Triangulation::from_json(json::parse(text)); };
    // even gluing permutation
    CHECK_THROWS_AS(bad(R"({"tetrahedra":[{"neighbors":[-1,-1,0,0],"gluings":["","","1032","1032"]}]})"),
                    std::invalid_argument);
    // a face glued to itself
    CHECK_THROWS_AS(bad(R"({"tetrahedra":[{"neighbors":[0,-1,-1,-1],"gluings":["0213","","",""]}]})"),
                    std::invalid_argument);
    // partner does not glue back
    CHECK_THROWS_AS(bad(R"({"tetrahedra":[{"neighbors":[-1,-1,0,-1],"gluings":["","","0132",""]}]})"),
                    std::invalid_argument);
    // neighbor out of range
    CHECK_THROWS_AS(bad(R"({"tetrahedra":[{"neighbors":[3,-1,-1,-1],"gluings":["0213","","",""]}]})"),
                    std::invalid_argument);
    // wrong arity, missing keys, empty lists, reserved and duplicate letters
    CHECK_THROWS_AS(bad(R"({"tetrahedra":[{"neighbors":[-1,-1,-1],"gluings":["","",""]}]})"), std::invalid_argument);
    CHECK_THROWS_AS(bad(R"({"tetrahedra":[{"gluings":["","","",""]}]})"), std::invalid_argument);
    CHECK_THROWS_AS(bad(R"({"tetrahedra":[]})"), std::invalid_argument);
    CHECK_THROWS_AS(bad(R"({"name":"x"})"), std::invalid_argument);
    CHECK_THROWS_AS(bad(R"({"tetrahedra":[{"letter":"A","neighbors":[-1,-1,-1,-1],"gluings":["","","",""]}]})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(bad(R"({"tetrahedra":[{"letter":"t","neighbors":[-1,-1,-1,-1],"gluings":["","","",""]},
                                          {"letter":"t","neighbors":[-1,-1,-1,-1],"gluings":["","","",""]}]})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(Triangulation::load("/nonexistent/triangulation.json"), std::invalid_argument);
}

TEST_CASE("summary json") {
    const auto j = fig8().summary_json();
    CHECK(j.is_object());
    CHECK_FALSE(j.dump().empty());
}
