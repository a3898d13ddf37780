#include "q3t/quantum_trace.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <thread>

namespace q3t {

namespace {

using nlohmann::json;

StateRef parse_state(const std::string& text, const std::map<std::string, int>& vars) {
    if (text.empty()) throw std::invalid_argument("empty state expression");
    StateRef r;
    std::string rest = text;
    if (rest[0] == '+' || rest[0] == '-') {
        r.sign = rest[0] == '-' ? -1 : 1;
        rest = rest.substr(1);
    }
    if (rest.empty()) return r;  // literal
    auto it = vars.find(rest);
    if (it == vars.end()) throw std::invalid_argument("unknown state variable '" + rest + "'");
    r.var = it->second;
    return r;
}

std::string state_text(const StateRef& s, const std::vector<std::string>& names) {
    std::string out = s.sign < 0 ? "-" : "+";
    if (s.var >= 0) out += names.at(static_cast<std::size_t>(s.var));
    return out;
}

// Half index of edge cone c inside suspension s.
int half_of(const Triangulation& tri, int s, EdgeConeId c) {
    const auto& susp = tri.suspensions().at(static_cast<std::size_t>(s));
    for (std::size_t h = 0; h < susp.halves.size(); ++h)
        for (EdgeConeId x : susp.halves[h].cones)
            if (x == c) return static_cast<int>(h);
    throw std::invalid_argument("edge cone " + tri.cone_name(c) + " does not bound face suspension " + susp.name);
}

// Suspension containing a generator, by scanning the registry.
int suspension_of_generator(const GluingAlgebra& G, std::size_t g) {
    const auto& susp = G.triangulation().suspensions();
    for (const auto& s : susp)
        for (std::size_t h = 0; h < s.halves.size(); ++h)
            for (int l = 0; l < 3; ++l)
                if (G.generator(s.id, static_cast<int>(h), static_cast<Label>(l)) == g) return s.id;
    throw std::logic_error("generator without suspension");
}

std::size_t resolve_generator(const GluingAlgebra& G, int s, const std::string& name) {
    if (auto g = G.torus().index_of(name)) {
        if (suspension_of_generator(G, *g) != s)
            throw std::invalid_argument("generator " + name + " is not on face suspension " +
                                        G.triangulation().suspensions()[static_cast<std::size_t>(s)].name);
        return *g;
    }
    if (auto c = G.triangulation().find_cone(name)) return G.generator_of_cone(s, *c);
    throw std::invalid_argument("unknown cone or generator '" + name + "'");
}

}  // namespace

// ---------------------------------------------------------------- Level-1 IO

LinkPresentation link_from_json(const GluingAlgebra& G, const json& j) {
    LinkPresentation lp;
    std::map<std::string, int> vars;
    for (const auto& v : j.value("states", json::array())) {
        const auto name = v.get<std::string>();
        if (name.empty() || name[0] == '+' || name[0] == '-')
            throw std::invalid_argument("invalid state variable name '" + name + "'");
        if (vars.count(name)) throw std::invalid_argument("duplicate state variable '" + name + "'");
        vars[name] = static_cast<int>(lp.states.size());
        lp.states.push_back(name);
    }
    std::vector<std::set<int>> uses(lp.states.size());
    for (const auto& a : j.value("arcs", json::array())) {
        Arc arc;
        const auto kind = a.at("kind").get<std::string>();
        if (kind == "T") {
            arc.kind = ArcKind::T;
        } else if (kind == "B") {
            arc.kind = ArcKind::B;
        } else {
            throw std::invalid_argument("arc kind must be T or B, got '" + kind + "'");
        }
        const auto fs = a.at("fs").get<std::string>();
        const auto s = G.triangulation().find_suspension(fs);
        if (!s) throw std::invalid_argument("unknown face suspension '" + fs + "'");
        arc.suspension = *s;
        const auto& cones = a.at("cones");
        const auto& states = a.at("states");
        if (cones.size() != 2 || states.size() != 2)
            throw std::invalid_argument("an arc needs exactly two cones and two states");
        for (std::size_t k = 0; k < 2; ++k) {
            arc.gens[k] = resolve_generator(G, arc.suspension, cones[k].get<std::string>());
            arc.states[k] = parse_state(states[k].get<std::string>(), vars);
            if (arc.states[k].var >= 0) uses[static_cast<std::size_t>(arc.states[k].var)].insert(arc.suspension);
        }
        arc.sign = a.value("sign", 1);
        if (arc.sign != 1 && arc.sign != -1) throw std::invalid_argument("arc sign must be 1 or -1");
        if (arc.kind == ArcKind::B) {
            const auto& F = G.form();
            if (arc.gens[0] == arc.gens[1] || F.at(arc.gens[0], arc.gens[1]) != 0 ||
                suspension_of_generator(G, arc.gens[0]) != suspension_of_generator(G, arc.gens[1]))
                throw std::invalid_argument("a B-arc must join the two halves of one face suspension");
        } else if (arc.gens[0] != arc.gens[1] && G.form().at(arc.gens[0], arc.gens[1]) == 0) {
            throw std::invalid_argument("a T-arc must join two cones of one tetrahedron half");
        }
        lp.arcs.push_back(arc);
    }
    // A state sits on an edge cone crossing shared by (at most) two suspensions.
    for (std::size_t v = 0; v < uses.size(); ++v)
        if (uses[v].empty() || uses[v].size() > 2)
            throw std::invalid_argument("state variable '" + lp.states[v] +
                                        "' must occur in the arcs of one or two face suspensions");
    for (const auto& p : j.value("prefactor", json::array())) {
        PrefactorTerm t;
        const auto name = p.at("var").get<std::string>();
        auto it = vars.find(name);
        if (it == vars.end()) throw std::invalid_argument("unknown prefactor variable '" + name + "'");
        t.var = it->second;
        t.coeff = p.at("coeff").get<std::int64_t>();
        lp.prefactor.push_back(t);
    }
    if (j.contains("const")) lp.constant = Scalar::parse(j.at("const").get<std::string>());
    return lp;
}

json link_to_json(const GluingAlgebra& G, const LinkPresentation& lp) {
    json j;
    j["states"] = lp.states;
    j["arcs"] = json::array();
    for (const auto& a : lp.arcs) {
        json ja;
        ja["kind"] = a.kind == ArcKind::T ? "T" : "B";
        ja["fs"] = G.triangulation().suspensions()[static_cast<std::size_t>(a.suspension)].name;
        ja["cones"] = {G.torus().names()[a.gens[0]], G.torus().names()[a.gens[1]]};
        ja["states"] = {state_text(a.states[0], lp.states), state_text(a.states[1], lp.states)};
        if (a.sign != 1) ja["sign"] = a.sign;
        j["arcs"].push_back(ja);
    }
    j["prefactor"] = json::array();
    for (const auto& p : lp.prefactor)
        j["prefactor"].push_back({{"var", lp.states[static_cast<std::size_t>(p.var)]}, {"coeff", p.coeff}});
    if (!(lp.constant == Scalar::one())) j["const"] = lp.constant.to_string();
    return j;
}

// ---------------------------------------------------------------- arc evaluation

std::optional<Monomial> ev_T(const GluingAlgebra& G, const Arc& arc, int mu, int nu) {
    const auto& F = G.form();
    const std::size_t g1 = arc.gens[0], g2 = arc.gens[1];
    const Exps zero(G.ngens(), 0);
    if (g1 == g2) {
        if (mu == nu) return std::nullopt;
        if (mu == 1) return Monomial{-Scalar::a_half(-5), zero};
        return Monomial{Scalar::a_half(-1), zero};
    }
    const std::int64_t f = F.at(g1, g2);
    if (f == 1) {
        if (mu == -1 && nu == 1) return std::nullopt;
    } else if (f == -1) {
        if (mu == 1 && nu == -1) return std::nullopt;
    } else {
        throw std::invalid_argument("a T-arc must join two cones of one tetrahedron half");
    }
    Exps u = zero;
    u[g1] += mu;
    u[g2] += nu;
    Monomial m = weyl_monomial(u, F);
    m.coeff = m.coeff * Scalar::a_half(-(mu + nu));
    return m;
}

Monomial ev_B(const GluingAlgebra& G, const Arc& arc, int mu, int nu) {
    if (mu != nu) throw std::invalid_argument("ev_B: the two states of a B-arc must agree");
    Exps u(G.ngens(), 0);
    u[arc.gens[0]] += mu;
    u[arc.gens[1]] += mu;
    // (-1)^{-mu/2} with (-1)^{1/2} = i
    const Scalar phase = mu == 1 ? -Scalar::i() : Scalar::i();
    return Monomial{phase, u};
}

// ---------------------------------------------------------------- state sum

Evaluation evaluate(const GluingAlgebra& G, const LinkPresentation& lp, unsigned jobs) {
    const std::size_t n = lp.states.size();
    if (n >= 40) throw std::invalid_argument("evaluate: too many state variables");
    // Multiplication order: suspension by suspension, T-arcs then B-arcs.
    std::vector<const Arc*> order;
    const std::size_t ns = G.triangulation().suspensions().size();
    for (std::size_t s = 0; s < ns; ++s)
        for (ArcKind kind : {ArcKind::T, ArcKind::B})
            for (const auto& a : lp.arcs)
                if (a.suspension == static_cast<int>(s) && a.kind == kind) order.push_back(&a);

    const std::uint64_t total = std::uint64_t{1} << n;
    const auto& F = G.form();
    auto run = [&](std::uint64_t begin, std::uint64_t end, TorusElement& acc, std::size_t& count) {
        std::vector<int> assignment(n);
        for (std::uint64_t bits = begin; bits < end; ++bits) {
            for (std::size_t k = 0; k < n; ++k) assignment[k] = ((bits >> k) & 1U) ? -1 : 1;
            Scalar pre = lp.constant;
            for (const auto& p : lp.prefactor)
                pre = pre * Scalar::from_phase(p.coeff * assignment[static_cast<std::size_t>(p.var)], 0);
            Monomial m{pre, Exps(G.ngens(), 0)};
            bool zero = false;
            for (const Arc* a : order) {
                const int mu = a->states[0].value(assignment), nu = a->states[1].value(assignment);
                std::optional<Monomial> e;
                if (a->kind == ArcKind::T) {
                    e = ev_T(G, *a, mu, nu);
                } else if (mu == nu) {
                    e = ev_B(G, *a, mu, nu);
                }
                if (!e) {
                    zero = true;
                    break;
                }
                if (a->sign < 0) e->coeff = -e->coeff;
                m = mul(m, *e, F);
            }
            if (zero) continue;
            ++count;
            acc.add_term(m.exps, m.coeff);
        }
    };

    Evaluation ev;
    ev.total_states = static_cast<std::size_t>(total);
    const unsigned threads = std::max(1U, std::min<unsigned>(jobs, static_cast<unsigned>(std::min<std::uint64_t>(total, 256))));
    std::vector<TorusElement> parts(threads, TorusElement(G.ngens()));
    std::vector<std::size_t> counts(threads, 0);
    if (threads == 1) {
        run(0, total, parts[0], counts[0]);
    } else {
        std::vector<std::thread> pool;
        const std::uint64_t chunk = (total + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            const std::uint64_t b = std::min<std::uint64_t>(total, t * chunk);
            const std::uint64_t e = std::min<std::uint64_t>(total, b + chunk);
            pool.emplace_back(run, b, e, std::ref(parts[t]), std::ref(counts[t]));
        }
        for (auto& th : pool) th.join();
    }
    ev.value = TorusElement(G.ngens());
    for (unsigned t = 0; t < threads; ++t) {
        ev.value += parts[t];
        ev.nonzero_states += counts[t];
    }
    return ev;
}

// ---------------------------------------------------------------- turn sequences

bool is_turn_sequence(const json& j) { return j.is_object() && j.contains("turns"); }

TurnSequence turns_from_json(const Triangulation& tri, const json& j) {
    TurnSequence ts;
    ts.cable = j.value("cable", 1);
    if (ts.cable < 1) throw std::invalid_argument("cable must be at least 1");
    for (const auto& t : j.at("turns")) {
        Turn turn;
        const auto cone = t.at("edge_cone").get<std::string>();
        const auto c = tri.find_cone(cone);
        if (!c) throw std::invalid_argument("unknown edge cone '" + cone + "'");
        turn.cone = *c;
        const auto face = t.at("face").get<std::string>();
        const auto s = tri.find_suspension(face);
        if (!s) throw std::invalid_argument("unknown face suspension '" + face + "'");
        turn.suspension = *s;
        half_of(tri, turn.suspension, turn.cone);  // validates incidence
        turn.type = parse_turn3d(t.at("turn").get<std::string>());
        ts.turns.push_back(turn);
    }
    if (ts.turns.empty()) throw std::invalid_argument("empty turn sequence");
    return ts;
}

namespace {

// The cone of the other half over the same face edge as (half h, label l).
EdgeConeId partner_cone(const FaceSuspension& s, int h, Label l) {
    if (s.halves.size() != 2) throw std::invalid_argument("face suspension " + s.name + " has a single half");
    const Label pl = s.partner[static_cast<std::size_t>(h)][static_cast<std::size_t>(l)];
    return s.halves[static_cast<std::size_t>(1 - h)].cones[static_cast<std::size_t>(pl)];
}

}  // namespace

EdgeConeId exit_cone(const Triangulation& tri, const Turn& t) {
    const auto& s = tri.suspensions().at(static_cast<std::size_t>(t.suspension));
    const int h = half_of(tri, t.suspension, t.cone);
    const Label l = cone_edge(t.cone).label();
    const auto& half = s.halves[static_cast<std::size_t>(h)];
    switch (t.type) {
        case TurnType3d::LEFT: return half.cones[static_cast<std::size_t>(cw_next(l))];
        case TurnType3d::RIGHT: return half.cones[static_cast<std::size_t>(ccw_next(l))];
        case TurnType3d::U: return t.cone;
        case TurnType3d::ACROSS_LEFT: return partner_cone(s, h, cw_next(l));
        case TurnType3d::ACROSS_RIGHT: return partner_cone(s, h, ccw_next(l));
        case TurnType3d::ACROSS_DOWN: return partner_cone(s, h, l);
    }
    throw std::logic_error("exit_cone: unknown turn");
}

LinkPresentation compile_turns(const GluingAlgebra& G, const TurnSequence& ts) {
    const auto& tri = G.triangulation();
    const std::size_t k = ts.turns.size();
    const int n = ts.cable;
    if (k == 0) throw std::invalid_argument("empty turn sequence");

    // Connectivity: each turn leaves through the cone the next one enters,
    // into the other face suspension of that cone.
    for (std::size_t i = 0; i < k; ++i) {
        const Turn& t = ts.turns[i];
        const Turn& next = ts.turns[(i + 1) % k];
        const EdgeConeId out = exit_cone(tri, t);
        if (out != next.cone)
            throw std::invalid_argument("turn " + std::to_string(i) + " exits through " + tri.cone_name(out) +
                                        " but the next crossing is " + tri.cone_name(next.cone));
        // The next crossing enters the other face suspension bounded by `out`.
        const auto sh = tri.suspensions_of_cone(out);
        const std::pair<int, int> here{t.suspension, half_of(tri, t.suspension, out)};
        const int other = sh[0] == here ? sh[1].first : sh[0].first;
        if (next.suspension != other)
            throw std::invalid_argument("turn " + std::to_string((i + 1) % k) + " must enter face suspension " +
                                        tri.suspensions()[static_cast<std::size_t>(other)].name);
    }

    LinkPresentation lp;
    auto var = [&](std::size_t crossing, int rank) {
        return static_cast<int>(crossing * static_cast<std::size_t>(n) + static_cast<std::size_t>(rank));
    };
    for (std::size_t i = 0; i < k; ++i)
        for (int r = 0; r < n; ++r)
            lp.states.push_back(n == 1 ? "e" + std::to_string(i + 1)
                                       : "e" + std::to_string(i + 1) + "_" + std::to_string(r + 1));

    for (std::size_t i = 0; i < k; ++i) {
        const Turn& t = ts.turns[i];
        const std::size_t j = (i + 1) % k;
        const auto& s = tri.suspensions()[static_cast<std::size_t>(t.suspension)];
        const int h = half_of(tri, t.suspension, t.cone);
        const Label l = cone_edge(t.cone).label();
        const std::size_t g_in = G.generator(t.suspension, h, l);
        std::vector<Arc> tarcs, barcs;
        for (int r = 0; r < n; ++r) {
            const bool reverse = t.type != TurnType3d::LEFT && t.type != TurnType3d::RIGHT;
            const int r_out = reverse ? n - 1 - r : r;
            const StateRef in{1, var(i, r)}, out{1, var(j, r_out)};
            Arc a;
            a.suspension = t.suspension;
            switch (t.type) {
                case TurnType3d::LEFT:
                case TurnType3d::RIGHT: {
                    const Label lo = t.type == TurnType3d::LEFT ? cw_next(l) : ccw_next(l);
                    a.kind = ArcKind::T;
                    a.gens = {g_in, G.generator(t.suspension, h, lo)};
                    a.states = {in, out};
                    tarcs.push_back(a);
                    break;
                }
                case TurnType3d::U: {
                    a.kind = ArcKind::T;
                    a.gens = {g_in, g_in};
                    a.states = {in, out};
                    tarcs.push_back(a);
                    break;
                }
                case TurnType3d::ACROSS_LEFT:
                case TurnType3d::ACROSS_RIGHT: {
                    const Label lg = t.type == TurnType3d::ACROSS_LEFT ? cw_next(l) : ccw_next(l);
                    const std::size_t g = G.generator(t.suspension, h, lg);
                    const Label pl = s.partner[static_cast<std::size_t>(h)][static_cast<std::size_t>(lg)];
                    const std::size_t gp = G.generator(t.suspension, 1 - h, pl);
                    a.kind = ArcKind::T;
                    a.gens = {g_in, g};
                    a.states = {in, StateRef{-1, out.var}};
                    tarcs.push_back(a);
                    Arc b;
                    b.kind = ArcKind::B;
                    b.suspension = t.suspension;
                    b.gens = {gp, g};
                    b.states = {out, out};
                    barcs.push_back(b);
                    lp.prefactor.push_back({out.var, -1});
                    break;
                }
                case TurnType3d::ACROSS_DOWN: {
                    const Label pl = s.partner[static_cast<std::size_t>(h)][static_cast<std::size_t>(l)];
                    a.kind = ArcKind::B;
                    a.gens = {G.generator(t.suspension, 1 - h, pl), g_in};
                    a.states = {in, out};
                    barcs.push_back(a);
                    break;
                }
            }
        }
        lp.arcs.insert(lp.arcs.end(), tarcs.begin(), tarcs.end());
        lp.arcs.insert(lp.arcs.end(), barcs.begin(), barcs.end());
    }
    return lp;
}

Seq3d classical_sequence(const Triangulation& tri, const TurnSequence& ts, const std::vector<Shape>& shapes) {
    (void)tri;
    Seq3d seq;
    for (const auto& t : ts.turns) {
        const BareEdge e = cone_edge(t.cone);
        seq.emplace_back(shapes.at(static_cast<std::size_t>(e.tetra)).of(e.label()), t.type);
    }
    return seq;
}

cplx classical_trace(const Triangulation& tri, const TurnSequence& ts, const std::vector<Shape>& shapes) {
    const Mat2 H = holonomy(classical_sequence(tri, ts, shapes));
    return std::pow(H.trace(), ts.cable);
}

// ---------------------------------------------------------------- scripted reduction

namespace {

Exps monomial_exps(const GluingAlgebra& G, const std::string& text) {
    const TorusElement m = G.parse(text);
    if (!m.is_monomial()) throw std::runtime_error("script: '" + text + "' is not a single monomial");
    return m.as_monomial().exps;
}

Monomial current_term(const GluingAlgebra& G, const TorusElement& cur, const std::string& text) {
    const Exps u = monomial_exps(G, text);
    const Scalar c = cur.coefficient(u);
    if (c.is_zero())
        throw std::runtime_error("script: term '" + text + "' does not occur in " + G.render_xhat(cur));
    return {c, u};
}

std::size_t match_index(const GluingAlgebra& G, const Relation& rel, const json& match) {
    if (match.is_number_integer()) return match.get<std::size_t>();
    const Exps u = monomial_exps(G, match.get<std::string>());
    std::size_t idx = 0;
    for (const auto& [v, c] : rel.element.terms()) {
        if (v == u) return idx;
        ++idx;
    }
    throw std::runtime_error("script: relation " + rel.id + " has no term " + match.get<std::string>());
}

}  // namespace

Reduction reduce_with_script(const GluingAlgebra& G, const TorusElement& el, const json& script) {
    Reduction red{el, {}};
    const json& steps = script.is_object() ? script.at("steps") : script;
    std::size_t index = 0;
    for (const auto& step : steps) {
        const auto op = step.at("op").get<std::string>();
        const std::string where = "script step " + std::to_string(index++) + " (" + op + "): ";
        try {
            if (op == "rewrite") {
                const Relation& rel = G.relation(step.at("relation").get<std::string>());
                const auto side_text = step.value("side", rel.side == Side::Left ? "left" : "right");
                if (side_text != "left" && side_text != "right")
                    throw std::runtime_error("side must be left or right");
                const Side side = side_text == "left" ? Side::Left : Side::Right;
                const Monomial term = current_term(G, red.value, step.at("term").get<std::string>());
                auto [after, cert] = G.eliminate(red.value, rel, side, term, match_index(G, rel, step.at("match")));
                if (!G.verify(cert)) throw std::runtime_error("certificate does not replay");
                red.value = after;
                red.certificates.push_back(cert);
            } else if (op == "transport") {
                const Monomial term = current_term(G, red.value, step.at("term").get<std::string>());
                const Exps target = monomial_exps(G, step.at("to").get<std::string>());
                const auto via = step.at("via").get<std::vector<std::string>>();
                auto chain = G.transport(red.value, term, target, via);
                if (!G.verify_chain(chain)) throw std::runtime_error("certificate chain does not replay");
                if (!chain.empty()) {
                    if (!(chain.front().before == red.value)) throw std::runtime_error("chain does not start here");
                    red.value = chain.back().after;
                }
                red.certificates.insert(red.certificates.end(), chain.begin(), chain.end());
            } else if (op == "expect") {
                const TorusElement expected = G.parse(step.at("value").get<std::string>());
                if (!(expected == red.value))
                    throw std::runtime_error("expected " + G.render_xhat(expected) + " but have " +
                                             G.render_xhat(red.value));
            } else {
                throw std::runtime_error("unknown op");
            }
        } catch (const std::exception& e) {
            throw std::runtime_error(where + e.what());
        }
    }
    return red;
}

// ---------------------------------------------------------------- classical shadow

cplx classical_shadow(const GluingAlgebra& G, const TorusElement& el, const std::vector<Shape>& shapes,
                      const std::vector<int>& signs) {
    return G.specialize_xhat(el, shapes, signs);
}

std::optional<BranchMatch> branch_search(const GluingAlgebra& G, const TorusElement& el,
                                         const std::vector<Shape>& shapes, cplx target, double tol,
                                         std::size_t max_assignments) {
    std::vector<bool> odd(G.num_cones(), false);
    for (const auto& [u, c] : el.terms()) {
        const auto k = G.xhat_decompose(u);
        if (!k) throw std::invalid_argument("branch_search: element is not a combination of x̂ monomials");
        for (std::size_t e = 0; e < k->size(); ++e)
            if ((*k)[e] % 2 != 0) odd[e] = true;
    }
    std::vector<std::size_t> free;
    for (std::size_t e = 0; e < odd.size(); ++e)
        if (odd[e]) free.push_back(e);
    if (free.size() >= 63 || (std::size_t{1} << free.size()) > max_assignments)
        throw std::invalid_argument("branch_search: " + std::to_string(free.size()) + " free signs exceed the limit");
    const std::size_t total = std::size_t{1} << free.size();
    for (std::size_t mask = 0; mask < total; ++mask) {
        std::vector<int> signs(G.num_cones(), 1);
        for (std::size_t b = 0; b < free.size(); ++b)
            if ((mask >> b) & 1U) signs[free[b]] = -1;
        const cplx v = classical_shadow(G, el, shapes, signs);
        for (int s : {1, -1}) {
            const double r = std::abs(v - static_cast<double>(s) * target);
            if (r < tol) return BranchMatch{signs, v, s, r, mask + 1};
        }
    }
    return std::nullopt;
}

TorusElement apply_framing(const TorusElement& el, std::int64_t k) {
    const Scalar f(GaussianInt(k % 2 == 0 ? 1 : -1), 6 * k);
    TorusElement out = el;
    out.scale(f);
    return out;
}

}  // namespace q3t
