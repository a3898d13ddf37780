// Combinatorial ideal triangulations: tetrahedra, face gluings, derived edge
// classes, face suspensions, edge cones, vertex cones and the shape labeling.
//
// Conventions
//  * Face i of a tetrahedron is the face opposite vertex i.
//  * Bare edges are indexed 0..5 as the vertex pairs 01,02,03,12,13,23;
//    opposite edges are (0,5), (1,4), (2,3).
//  * Every tetrahedron's vertex order (0,1,2,3) is positively oriented and
//    gluing permutations are odd.  The shape labeling is then
//    Z on 01/23, Z' on 02/13, Z'' on 03/12, and inside every face the edge
//    cones run Z -> Z' -> Z'' clockwise when viewed from the barycenter of
//    the tetrahedron owning them.  Around a vertex cone the same cyclic order
//    Z -> Z' -> Z'' is the clockwise order viewed from the ideal vertex.
#pragma once

#include <nlohmann/json.hpp>

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace q3t {

struct Perm4 {
    std::array<int, 4> p{0, 1, 2, 3};

    [[nodiscard]] int operator[](int i) const { return p[static_cast<std::size_t>(i)]; }
    [[nodiscard]] Perm4 inverse() const;
    [[nodiscard]] bool is_odd() const;
    [[nodiscard]] std::string str() const;
    static Perm4 parse(const std::string& s);  // "0213"
    friend bool operator==(const Perm4&, const Perm4&) = default;
};

enum class Label { Z = 0, Zp = 1, Zpp = 2 };

// "", "'", "''"
std::string label_primes(Label l);
// Clockwise successor Z -> Z' -> Z'' -> Z.
inline Label cw_next(Label l) { return static_cast<Label>((static_cast<int>(l) + 1) % 3); }
inline Label ccw_next(Label l) { return static_cast<Label>((static_cast<int>(l) + 2) % 3); }

struct Gluing {
    int neighbor = -1;
    Perm4 perm;
};

struct Tetra {
    int id = 0;
    std::string letter;
    std::array<std::optional<Gluing>, 4> gluings;  // nullopt = boundary face
};

// Bare edge helpers.
struct BareEdge {
    int tetra = 0;
    int index = 0;  // 0..5
    [[nodiscard]] std::array<int, 2> vertices() const;
    [[nodiscard]] BareEdge opposite() const { return {tetra, 5 - index}; }
    [[nodiscard]] Label label() const;
    // Faces (= opposite vertices) of the tetrahedron containing this edge.
    [[nodiscard]] std::array<int, 2> faces() const;
    friend bool operator==(const BareEdge&, const BareEdge&) = default;
    friend auto operator<=>(const BareEdge&, const BareEdge&) = default;
};
int edge_index(int a, int b);

// One edge cone per bare edge; id = 6·tetra + index.
using EdgeConeId = int;
inline EdgeConeId cone_id(const BareEdge& e) { return 6 * e.tetra + e.index; }
inline BareEdge cone_edge(EdgeConeId c) { return {c / 6, c % 6}; }

struct EdgeClass {
    std::vector<BareEdge> members;  // in gluing order around the edge
    bool closed = true;             // false when the orbit meets the boundary
    [[nodiscard]] std::size_t valence() const { return members.size(); }
};

struct SuspensionHalf {
    int tetra = 0;
    int face = 0;                          // face index in that tetrahedron
    std::array<EdgeConeId, 3> cones{};     // indexed by Label
    std::array<std::array<int, 2>, 3> face_edges{};  // vertex pairs, indexed by Label
};

struct FaceSuspension {
    int id = 0;
    std::string name;
    std::vector<SuspensionHalf> halves;  // 1 (boundary) or 2
    // partner[h][l] = label of the cone in the other half over the same face edge
    std::array<std::array<Label, 3>, 2> partner{};
    [[nodiscard]] bool boundary() const { return halves.size() == 1; }
};

struct VertexCone {
    int tetra = 0;
    int vertex = 0;
    friend bool operator==(const VertexCone&, const VertexCone&) = default;
};

struct ConeInSuspension {
    int suspension = 0;
    EdgeConeId cone = 0;
};

class Triangulation {
public:
    static Triangulation load(const std::string& path);
    static Triangulation from_json(const nlohmann::json& j);

    [[nodiscard]] const std::string& name() const { return name_; }
    [[nodiscard]] const std::vector<Tetra>& tetrahedra() const { return tets_; }
    [[nodiscard]] std::size_t num_tetrahedra() const { return tets_.size(); }
    [[nodiscard]] const std::vector<EdgeClass>& edge_classes() const { return edge_classes_; }
    [[nodiscard]] const std::vector<FaceSuspension>& suspensions() const { return suspensions_; }
    [[nodiscard]] std::size_t num_boundary_faces() const;
    [[nodiscard]] std::vector<VertexCone> vertex_cones() const;

    // Face suspension containing face `face` of tetrahedron `tetra`, and the half index.
    [[nodiscard]] std::pair<int, int> suspension_of(int tetra, int face) const;
    // Edge class index of a bare edge.
    [[nodiscard]] int edge_class_of(const BareEdge& e) const;
    // The two (suspension, half) pairs whose boundary contains the edge cone.
    [[nodiscard]] std::array<std::pair<int, int>, 2> suspensions_of_cone(EdgeConeId c) const;

    // Cyclic sequence around an edge class: member edge cones together with
    // the face suspension shared with the next member.
    [[nodiscard]] std::vector<ConeInSuspension> cones_around_edge(int edge_class) const;
    // The three edge cones at a vertex cone, clockwise viewed from the ideal
    // vertex, each paired with the face suspension it shares with the next.
    [[nodiscard]] std::array<ConeInSuspension, 3> cones_around_vertex(const VertexCone& vc) const;

    // Names.
    [[nodiscard]] std::string edge_name(const BareEdge& e) const;      // e.g. "NE"
    [[nodiscard]] std::string cone_name(EdgeConeId c) const;           // e.g. "z'_NS"
    [[nodiscard]] std::string vertex_name(const VertexCone& v) const;  // e.g. "E"
    [[nodiscard]] std::optional<EdgeConeId> find_cone(const std::string& name) const;
    [[nodiscard]] std::optional<int> find_suspension(const std::string& name) const;
    [[nodiscard]] std::optional<VertexCone> find_vertex_cone(const std::string& tetra_letter,
                                                             const std::string& vertex) const;
    [[nodiscard]] std::optional<int> find_tetra(const std::string& letter) const;

    [[nodiscard]] nlohmann::json summary_json() const;

private:
    void derive();
    void derive_suspensions();
    void derive_edge_classes();
    void derive_names();

    std::string name_;
    std::vector<Tetra> tets_;
    std::vector<std::array<std::string, 4>> face_names_;  // optional names per tetra face
    std::vector<std::string> face_class_order_;
    std::vector<EdgeClass> edge_classes_;
    std::vector<int> edge_class_of_;  // by cone id
    std::vector<FaceSuspension> suspensions_;
    std::vector<std::array<std::pair<int, int>, 4>> face_to_susp_;  // (suspension, half)
    std::vector<std::array<std::string, 6>> edge_names_;
    std::vector<std::array<std::string, 4>> vertex_names_;
};

}  // namespace q3t
