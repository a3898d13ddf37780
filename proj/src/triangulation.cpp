#include "q3t/triangulation.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

namespace q3t {

namespace {

constexpr std::array<std::array<int, 2>, 6> kEdgeVertices{
    {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
// Labels by edge index: 01/23 -> Z, 02/13 -> Z', 03/12 -> Z''.
constexpr std::array<Label, 6> kEdgeLabel{Label::Z, Label::Zp, Label::Zpp,
                                          Label::Zpp, Label::Zp, Label::Z};

[[noreturn]] void invalid(const std::string& why) {
    throw std::invalid_argument("triangulation: " + why);
}

int third_vertex(int a, int b, int c) {
    for (int v = 0; v < 4; ++v)
        if (v != a && v != b && v != c) return v;
    invalid("degenerate vertex triple");
}

}  // namespace

// ---------------------------------------------------------------- Perm4

Perm4 Perm4::inverse() const {
    Perm4 q;
    for (int i = 0; i < 4; ++i) q.p[static_cast<std::size_t>(p[static_cast<std::size_t>(i)])] = i;
    return q;
}

bool Perm4::is_odd() const {
    int inversions = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            if (p[static_cast<std::size_t>(i)] > p[static_cast<std::size_t>(j)]) ++inversions;
    return inversions % 2 == 1;
}

std::string Perm4::str() const {
    std::string s;
    for (int v : p) s += static_cast<char>('0' + v);
    return s;
}

Perm4 Perm4::parse(const std::string& s) {
    if (s.size() != 4) invalid("permutation '" + s + "' must have 4 digits");
    Perm4 q;
    std::array<bool, 4> seen{};
    for (std::size_t i = 0; i < 4; ++i) {
        const int v = s[i] - '0';
        if (v < 0 || v > 3 || seen[static_cast<std::size_t>(v)])
            invalid("permutation '" + s + "' is not a bijection of {0,1,2,3}");
        seen[static_cast<std::size_t>(v)] = true;
        q.p[i] = v;
    }
    return q;
}

std::string label_primes(Label l) {
    switch (l) {
        case Label::Z: return "";
        case Label::Zp: return "'";
        case Label::Zpp: return "''";
    }
    return "";
}

// ---------------------------------------------------------------- BareEdge

int edge_index(int a, int b) {
    if (a > b) std::swap(a, b);
    for (int k = 0; k < 6; ++k)
        if (kEdgeVertices[static_cast<std::size_t>(k)][0] == a &&
            kEdgeVertices[static_cast<std::size_t>(k)][1] == b)
            return k;
    invalid("not an edge: " + std::to_string(a) + std::to_string(b));
}

std::array<int, 2> BareEdge::vertices() const { return kEdgeVertices.at(static_cast<std::size_t>(index)); }

Label BareEdge::label() const { return kEdgeLabel.at(static_cast<std::size_t>(index)); }

std::array<int, 2> BareEdge::faces() const {
    return opposite().vertices();  // faces containing the edge are opposite the other two vertices
}

// ---------------------------------------------------------------- loading

Triangulation Triangulation::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) invalid("cannot open file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        invalid("malformed JSON in '" + path + "': " + e.what());
    }
    return from_json(j);
}

Triangulation Triangulation::from_json(const nlohmann::json& j) {
    Triangulation t;
    try {
        if (!j.is_object() || !j.contains("tetrahedra") || !j["tetrahedra"].is_array())
            invalid("missing 'tetrahedra' array");
        t.name_ = j.value("name", std::string("unnamed"));
        if (j.contains("face_classes")) t.face_class_order_ = j["face_classes"].get<std::vector<std::string>>();
        const auto& tj = j["tetrahedra"];
        const int n = static_cast<int>(tj.size());
        if (n == 0) invalid("no tetrahedra");
        t.tets_.resize(static_cast<std::size_t>(n));
        t.face_names_.resize(static_cast<std::size_t>(n));
        bool any_face_names = false;
        for (int k = 0; k < n; ++k) {
            const auto& e = tj[static_cast<std::size_t>(k)];
            Tetra& T = t.tets_[static_cast<std::size_t>(k)];
            T.id = k;
            T.letter = e.value("letter", "t" + std::to_string(k));
            const auto neighbors = e.at("neighbors").get<std::vector<int>>();
            const auto perms = e.at("gluings").get<std::vector<std::string>>();
            if (neighbors.size() != 4 || perms.size() != 4)
                invalid("tetrahedron " + std::to_string(k) + " needs 4 neighbors and 4 gluings");
            for (std::size_t f = 0; f < 4; ++f) {
                if (neighbors[f] < 0) continue;
                if (neighbors[f] >= n)
                    invalid("tetrahedron " + std::to_string(k) + " face " + std::to_string(f) +
                            ": neighbor out of range");
                T.gluings[f] = Gluing{neighbors[f], Perm4::parse(perms[f])};
            }
            if (e.contains("face_names")) {
                const auto names = e["face_names"].get<std::vector<std::string>>();
                if (names.size() != 4) invalid("face_names must have 4 entries");
                for (std::size_t f = 0; f < 4; ++f) t.face_names_[static_cast<std::size_t>(k)][f] = names[f];
                any_face_names = true;
            }
        }
        if (!any_face_names) t.face_names_.clear();
    } catch (const nlohmann::json::exception& e) {
        invalid(std::string("malformed document: ") + e.what());
    }
    t.derive();
    return t;
}

void Triangulation::derive() {
    // Gluing validation: involutive, orientation-consistent, no self-gluing of a face.
    for (const Tetra& T : tets_) {
        for (int f = 0; f < 4; ++f) {
            const auto& g = T.gluings[static_cast<std::size_t>(f)];
            if (!g) continue;
            const int other_face = g->perm[f];
            if (g->neighbor == T.id && other_face == f)
                invalid("face " + std::to_string(f) + " of tetrahedron " + std::to_string(T.id) +
                        " is glued to itself");
            const auto& back = tets_[static_cast<std::size_t>(g->neighbor)].gluings[static_cast<std::size_t>(other_face)];
            if (!back || back->neighbor != T.id || !(back->perm == g->perm.inverse()))
                invalid("non-involutive gluing at tetrahedron " + std::to_string(T.id) + " face " +
                        std::to_string(f) + " (face glued twice or partner mismatch)");
            if (!g->perm.is_odd())
                invalid("gluing permutation " + g->perm.str() + " at tetrahedron " +
                        std::to_string(T.id) + " face " + std::to_string(f) +
                        " is even; oriented input requires odd permutations");
        }
    }
    std::set<std::string> letters;
    for (const Tetra& T : tets_) {
        if (T.letter.empty() || T.letter == "A" || T.letter == "i" || T.letter == "a")
            invalid("tetrahedron letter '" + T.letter + "' is reserved or empty");
        if (!letters.insert(T.letter).second) invalid("duplicate tetrahedron letter " + T.letter);
    }
    derive_suspensions();
    derive_edge_classes();
    derive_names();
}

void Triangulation::derive_suspensions() {
    const std::size_t n = tets_.size();
    face_to_susp_.assign(n, {});
    std::vector<std::array<bool, 4>> seen(n, {false, false, false, false});
    std::vector<FaceSuspension> found;
    for (const Tetra& T : tets_) {
        for (int f = 0; f < 4; ++f) {
            if (seen[static_cast<std::size_t>(T.id)][static_cast<std::size_t>(f)]) continue;
            FaceSuspension s;
            auto make_half = [](int tetra, int face) {
                SuspensionHalf h;
                h.tetra = tetra;
                h.face = face;
                for (int k = 0; k < 6; ++k) {
                    const BareEdge e{tetra, k};
                    const auto vs = e.vertices();
                    if (vs[0] == face || vs[1] == face) continue;
                    const auto l = static_cast<std::size_t>(e.label());
                    h.cones[l] = cone_id(e);
                    h.face_edges[l] = vs;
                }
                return h;
            };
            s.halves.push_back(make_half(T.id, f));
            seen[static_cast<std::size_t>(T.id)][static_cast<std::size_t>(f)] = true;
            const auto& g = T.gluings[static_cast<std::size_t>(f)];
            if (g) {
                const int f2 = g->perm[f];
                s.halves.push_back(make_half(g->neighbor, f2));
                seen[static_cast<std::size_t>(g->neighbor)][static_cast<std::size_t>(f2)] = true;
                // Pair cones over the same face edge.
                for (int l = 0; l < 3; ++l) {
                    const auto vs = s.halves[0].face_edges[static_cast<std::size_t>(l)];
                    const BareEdge image{g->neighbor, edge_index(g->perm[vs[0]], g->perm[vs[1]])};
                    const Label l2 = image.label();
                    s.partner[0][static_cast<std::size_t>(l)] = l2;
                    s.partner[1][static_cast<std::size_t>(l2)] = static_cast<Label>(l);
                }
            }
            // Names from the file, checked for consistency across the gluing.
            if (!face_names_.empty()) {
                s.name = face_names_[static_cast<std::size_t>(T.id)][static_cast<std::size_t>(f)];
                if (g) {
                    const std::string& other =
                        face_names_[static_cast<std::size_t>(g->neighbor)][static_cast<std::size_t>(g->perm[f])];
                    if (other != s.name)
                        invalid("face names disagree across a gluing: '" + s.name + "' vs '" + other + "'");
                }
            }
            found.push_back(std::move(s));
        }
    }
    if (!face_class_order_.empty()) {
        std::map<std::string, std::size_t> rank;
        for (std::size_t k = 0; k < face_class_order_.size(); ++k) rank[face_class_order_[k]] = k;
        for (const auto& s : found)
            if (!rank.count(s.name)) invalid("face class '" + s.name + "' missing from face_classes");
        std::stable_sort(found.begin(), found.end(), [&](const FaceSuspension& a, const FaceSuspension& b) {
            return rank[a.name] < rank[b.name];
        });
    }
    std::set<std::string> names;
    for (std::size_t k = 0; k < found.size(); ++k) {
        found[k].id = static_cast<int>(k);
        if (found[k].name.empty()) found[k].name = "F" + std::to_string(k);
        if (!names.insert(found[k].name).second) invalid("duplicate face class name " + found[k].name);
        for (std::size_t h = 0; h < found[k].halves.size(); ++h) {
            const auto& half = found[k].halves[h];
            face_to_susp_[static_cast<std::size_t>(half.tetra)][static_cast<std::size_t>(half.face)] = {
                static_cast<int>(k), static_cast<int>(h)};
        }
    }
    suspensions_ = std::move(found);
}

void Triangulation::derive_edge_classes() {
    const std::size_t ncones = 6 * tets_.size();
    edge_class_of_.assign(ncones, -1);
    struct State {
        int tetra, a, b, exit;
    };
    auto step = [&](const State& s) -> std::optional<State> {
        const auto& g = tets_[static_cast<std::size_t>(s.tetra)].gluings[static_cast<std::size_t>(s.exit)];
        if (!g) return std::nullopt;
        const int a2 = g->perm[s.a], b2 = g->perm[s.b], arrive = g->perm[s.exit];
        return State{g->neighbor, a2, b2, third_vertex(a2, b2, arrive)};
    };
    for (std::size_t c = 0; c < ncones; ++c) {
        if (edge_class_of_[c] >= 0) continue;
        const BareEdge e0 = cone_edge(static_cast<EdgeConeId>(c));
        const auto vs = e0.vertices();
        const auto fs = e0.faces();
        const State start{e0.tetra, vs[0], vs[1], fs[1]};
        EdgeClass ec;
        std::vector<State> forward{start};
        bool closed = false;
        State cur = start;
        for (std::size_t guard = 0; guard <= ncones; ++guard) {
            auto nxt = step(cur);
            if (!nxt) break;
            if (nxt->tetra == start.tetra && edge_index(nxt->a, nxt->b) == e0.index) {
                if (nxt->a != start.a || nxt->exit != start.exit)
                    invalid("edge orbit of " + std::to_string(e0.tetra) + ":" +
                            std::to_string(e0.index) + " does not close consistently");
                closed = true;
                break;
            }
            forward.push_back(*nxt);
            cur = *nxt;
            if (guard == ncones) invalid("unclosed edge orbit");
        }
        std::vector<State> chain;
        if (closed) {
            chain = forward;
        } else {
            // Walk backwards through the other face to reach the other boundary end.
            std::vector<State> backward;
            State b{start.tetra, start.a, start.b, fs[0]};
            for (std::size_t guard = 0; guard <= ncones; ++guard) {
                auto nxt = step(b);
                if (!nxt) break;
                backward.push_back(*nxt);
                b = *nxt;
                if (guard == ncones) invalid("unclosed edge orbit");
            }
            // Reverse the backward walk so that every member's exit face points forward.
            for (auto it = backward.rbegin(); it != backward.rend(); ++it) {
                const int other = third_vertex(it->a, it->b, it->exit);
                chain.push_back(State{it->tetra, it->a, it->b, other});
            }
            chain.insert(chain.end(), forward.begin(), forward.end());
        }
        for (const State& s : chain) {
            const BareEdge e{s.tetra, edge_index(s.a, s.b)};
            if (edge_class_of_[static_cast<std::size_t>(cone_id(e))] >= 0)
                invalid("bare edge visited twice while tracing an edge orbit");
            edge_class_of_[static_cast<std::size_t>(cone_id(e))] = static_cast<int>(edge_classes_.size());
            ec.members.push_back(e);
        }
        ec.closed = closed;
        edge_classes_.push_back(std::move(ec));
    }
}

void Triangulation::derive_names() {
    const std::size_t n = tets_.size();
    edge_names_.assign(n, {});
    vertex_names_.assign(n, {});
    for (std::size_t t = 0; t < n; ++t) {
        std::set<std::string> used;
        bool ok = true;
        for (int k = 0; k < 6; ++k) {
            const auto fs = BareEdge{static_cast<int>(t), k}.faces();
            int s0 = face_to_susp_[t][static_cast<std::size_t>(fs[0])].first;
            int s1 = face_to_susp_[t][static_cast<std::size_t>(fs[1])].first;
            if (s0 > s1) std::swap(s0, s1);
            const std::string nm = suspensions_[static_cast<std::size_t>(s0)].name +
                                   suspensions_[static_cast<std::size_t>(s1)].name;
            edge_names_[t][static_cast<std::size_t>(k)] = nm;
            ok = ok && s0 != s1 && used.insert(nm).second;
        }
        if (!ok) {
            for (int k = 0; k < 6; ++k) {
                const auto vs = BareEdge{static_cast<int>(t), k}.vertices();
                edge_names_[t][static_cast<std::size_t>(k)] = "e" + std::to_string(vs[0]) + std::to_string(vs[1]);
            }
        }
        std::set<std::string> vused;
        bool vok = true;
        for (std::size_t v = 0; v < 4; ++v) {
            const std::string nm = suspensions_[static_cast<std::size_t>(face_to_susp_[t][v].first)].name;
            vertex_names_[t][v] = nm;
            vok = vok && vused.insert(nm).second;
        }
        if (!vok)
            for (std::size_t v = 0; v < 4; ++v) vertex_names_[t][v] = "v" + std::to_string(v);
    }
}

// ---------------------------------------------------------------- queries

std::size_t Triangulation::num_boundary_faces() const {
    std::size_t count = 0;
    for (const auto& s : suspensions_)
        if (s.boundary()) ++count;
    return count;
}

std::vector<VertexCone> Triangulation::vertex_cones() const {
    std::vector<VertexCone> out;
    for (const Tetra& T : tets_)
        for (int v = 0; v < 4; ++v) out.push_back({T.id, v});
    return out;
}

std::pair<int, int> Triangulation::suspension_of(int tetra, int face) const {
    return face_to_susp_.at(static_cast<std::size_t>(tetra)).at(static_cast<std::size_t>(face));
}

int Triangulation::edge_class_of(const BareEdge& e) const {
    return edge_class_of_.at(static_cast<std::size_t>(cone_id(e)));
}

std::array<std::pair<int, int>, 2> Triangulation::suspensions_of_cone(EdgeConeId c) const {
    const BareEdge e = cone_edge(c);
    const auto fs = e.faces();
    return {suspension_of(e.tetra, fs[0]), suspension_of(e.tetra, fs[1])};
}

std::vector<ConeInSuspension> Triangulation::cones_around_edge(int edge_class) const {
    const EdgeClass& ec = edge_classes_.at(static_cast<std::size_t>(edge_class));
    std::vector<ConeInSuspension> out;
    const std::size_t k = ec.members.size();
    for (std::size_t i = 0; i < k; ++i) {
        const BareEdge& e = ec.members[i];
        // The suspension shared with the next member: a face of e's tetrahedron
        // containing e whose gluing leads to the next member.
        const auto fs = e.faces();
        int chosen = suspension_of(e.tetra, fs[1]).first;
        if (i + 1 < k || ec.closed) {
            const BareEdge& nxt = ec.members[(i + 1) % k];
            for (int f : fs) {
                const auto& g = tets_[static_cast<std::size_t>(e.tetra)].gluings[static_cast<std::size_t>(f)];
                if (!g || g->neighbor != nxt.tetra) continue;
                const auto vs = e.vertices();
                if (edge_index(g->perm[vs[0]], g->perm[vs[1]]) == nxt.index) {
                    chosen = suspension_of(e.tetra, f).first;
                    break;
                }
            }
        } else {
            // Open chain end: the boundary face containing the edge.
            for (int f : fs)
                if (!tets_[static_cast<std::size_t>(e.tetra)].gluings[static_cast<std::size_t>(f)])
                    chosen = suspension_of(e.tetra, f).first;
        }
        out.push_back({chosen, cone_id(e)});
    }
    return out;
}

std::array<ConeInSuspension, 3> Triangulation::cones_around_vertex(const VertexCone& vc) const {
    std::array<BareEdge, 3> by_label{};
    std::array<int, 3> far{};  // other endpoint
    for (int w = 0; w < 4; ++w) {
        if (w == vc.vertex) continue;
        const BareEdge e{vc.tetra, edge_index(vc.vertex, w)};
        by_label[static_cast<std::size_t>(e.label())] = e;
        far[static_cast<std::size_t>(e.label())] = w;
    }
    std::array<ConeInSuspension, 3> out{};
    for (std::size_t l = 0; l < 3; ++l) {
        const int w1 = far[l], w2 = far[(l + 1) % 3];
        const int opposite = third_vertex(vc.vertex, w1, w2);
        out[l] = {suspension_of(vc.tetra, opposite).first, cone_id(by_label[l])};
    }
    return out;
}

std::string Triangulation::edge_name(const BareEdge& e) const {
    return edge_names_.at(static_cast<std::size_t>(e.tetra)).at(static_cast<std::size_t>(e.index));
}

std::string Triangulation::cone_name(EdgeConeId c) const {
    const BareEdge e = cone_edge(c);
    return tets_.at(static_cast<std::size_t>(e.tetra)).letter + label_primes(e.label()) + "_" + edge_name(e);
}

std::string Triangulation::vertex_name(const VertexCone& v) const {
    return vertex_names_.at(static_cast<std::size_t>(v.tetra)).at(static_cast<std::size_t>(v.vertex));
}

std::optional<EdgeConeId> Triangulation::find_cone(const std::string& name) const {
    for (EdgeConeId c = 0; c < static_cast<EdgeConeId>(6 * tets_.size()); ++c)
        if (cone_name(c) == name) return c;
    return std::nullopt;
}

std::optional<int> Triangulation::find_suspension(const std::string& name) const {
    for (const auto& s : suspensions_)
        if (s.name == name) return s.id;
    return std::nullopt;
}

std::optional<int> Triangulation::find_tetra(const std::string& letter) const {
    for (const auto& T : tets_)
        if (T.letter == letter) return T.id;
    return std::nullopt;
}

std::optional<VertexCone> Triangulation::find_vertex_cone(const std::string& tetra_letter,
                                                          const std::string& vertex) const {
    const auto t = find_tetra(tetra_letter);
    if (!t) return std::nullopt;
    for (int v = 0; v < 4; ++v)
        if (vertex_name({*t, v}) == vertex) return VertexCone{*t, v};
    return std::nullopt;
}

nlohmann::json Triangulation::summary_json() const {
    nlohmann::json j;
    j["name"] = name_;
    j["tetrahedra"] = tets_.size();
    j["face_suspensions"] = suspensions_.size();
    j["boundary_faces"] = num_boundary_faces();
    j["vertex_cones"] = 4 * tets_.size();
    nlohmann::json ecs = nlohmann::json::array();
    for (std::size_t k = 0; k < edge_classes_.size(); ++k) {
        nlohmann::json e;
        e["valence"] = edge_classes_[k].valence();
        e["closed"] = edge_classes_[k].closed;
        std::vector<std::string> members;
        for (const auto& m : edge_classes_[k].members) members.push_back(cone_name(cone_id(m)));
        e["members"] = members;
        ecs.push_back(e);
    }
    j["edge_classes"] = ecs;
    nlohmann::json fs = nlohmann::json::array();
    for (const auto& s : suspensions_) {
        nlohmann::json f;
        f["name"] = s.name;
        f["halves"] = s.halves.size();
        fs.push_back(f);
    }
    j["faces"] = fs;
    return j;
}

}  // namespace q3t
