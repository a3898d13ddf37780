// q3t: command-line front end.
//
//   q3t validate <tri.json>
//   q3t solve-shapes <tri.json> [--guess re,im ...]
//   q3t classical-trace <tri.json> <turns.json>
//   q3t relations <tri.json>
//   q3t check <tri.json> [--seed N]
//   q3t qtrace <tri.json> <link.json> [--script s.json] [--classical-check]
//                                     [--turns t.json] [--frame k] [--jobs N]
//
// Common flags: --output text|json.  Exit codes: 0 success, 1 computation
// failure or failed check, 2 usage error.

#include "q3t/classical.hpp"
#include "q3t/gluing_algebra.hpp"
#include "q3t/quantum_trace.hpp"
#include "q3t/triangulation.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace {

using nlohmann::json;
using namespace q3t;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

std::string fmt_double(double x, const char* spec = "%.10f") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, x == 0.0 ? 0.0 : x);  // no "-0"
    return buf;
}

std::string fmt_complex(cplx z) {
    const double im = z.imag();
    return fmt_double(z.real()) + (im < 0 ? " - " : " + ") + fmt_double(std::abs(im)) + "i";
}

std::string fmt_sci(double x) { return fmt_double(x, "%.3e"); }

json complex_json(cplx z) { return {{"re", z.real()}, {"im", z.imag()}}; }

std::vector<cplx> parse_guesses(const std::vector<std::string>& texts, std::size_t n) {
    std::vector<cplx> out;
    for (const auto& t : texts) {
        const auto comma = t.find(',');
        if (comma == std::string::npos) throw UsageError("--guess expects re,im");
        try {
            out.emplace_back(std::stod(t.substr(0, comma)), std::stod(t.substr(comma + 1)));
        } catch (const std::exception&) {
            throw UsageError("--guess expects re,im");
        }
    }
    if (out.empty()) out.assign(n, cplx(0.6, 0.7));
    if (out.size() == 1 && n > 1) out.assign(n, out[0]);
    if (out.size() != n) throw UsageError("--guess: one value per tetrahedron (or a single value)");
    return out;
}

struct Common {
    std::string output = "text";
    bool json() const { return output == "json"; }
};

void emit(const Common& c, const json& j, const std::string& text) {
    if (c.json()) {
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << text;
    }
}

// ---------------------------------------------------------------- subcommands

int cmd_validate(const Common& c, const std::string& tri_path) {
    const Triangulation tri = Triangulation::load(tri_path);
    json j = tri.summary_json();
    j["ok"] = true;
    std::ostringstream os;
    os << "triangulation " << tri.name() << "\n";
    for (std::size_t k = 0; k < tri.edge_classes().size(); ++k) {
        const auto& ec = tri.edge_classes()[k];
        os << "edge class " << k << " (valence " << ec.valence() << (ec.closed ? "" : ", open") << "):";
        for (const auto& e : ec.members) os << " " << tri.cone_name(cone_id(e));
        os << "\n";
    }
    for (const auto& s : tri.suspensions()) {
        os << "face suspension " << s.name << ":";
        for (const auto& h : s.halves)
            for (EdgeConeId cone : h.cones) os << " " << tri.cone_name(cone);
        os << "\n";
    }
    os << tri.num_tetrahedra() << " tetrahedra, " << tri.edge_classes().size() << " edge classes, "
       << tri.suspensions().size() << " face suspensions, OK\n";
    emit(c, j, os.str());
    return 0;
}

json shapes_json(const Triangulation& tri, const SolveResult& r) {
    json j;
    j["shapes"] = json::array();
    for (std::size_t t = 0; t < r.shapes.size(); ++t)
        j["shapes"].push_back({{"tetrahedron", tri.tetrahedra()[t].letter}, {"z", complex_json(r.shapes[t].z)}});
    j["residuals"] = json::array();
    for (const auto& v : r.residuals) j["residuals"].push_back(std::abs(v));
    j["max_residual"] = r.max_residual;
    j["iterations"] = r.iterations;
    return j;
}

std::string shapes_text(const Triangulation& tri, const SolveResult& r) {
    std::ostringstream os;
    for (std::size_t t = 0; t < r.shapes.size(); ++t)
        os << "Z[" << tri.tetrahedra()[t].letter << "] = " << fmt_complex(r.shapes[t].z) << "\n";
    for (std::size_t k = 0; k < r.residuals.size(); ++k)
        os << "residual[" << k << "] = " << fmt_sci(std::abs(r.residuals[k])) << "\n";
    os << "max residual = " << fmt_sci(r.max_residual) << "\n";
    os << "iterations = " << r.iterations << "\n";
    return os.str();
}

int cmd_solve(const Common& c, const std::string& tri_path, const std::vector<std::string>& guess) {
    const Triangulation tri = Triangulation::load(tri_path);
    const SolveResult r = solve_gluing(tri, parse_guesses(guess, tri.num_tetrahedra()));
    emit(c, shapes_json(tri, r), shapes_text(tri, r));
    return r.max_residual < 1e-10 ? 0 : 1;
}

int cmd_classical_trace(const Common& c, const std::string& tri_path, const std::string& turns_path,
                        const std::vector<std::string>& guess) {
    const Triangulation tri = Triangulation::load(tri_path);
    const TurnSequence ts = turns_from_json(tri, load_json(turns_path));
    const SolveResult r = solve_gluing(tri, parse_guesses(guess, tri.num_tetrahedra()));
    const Seq3d seq = classical_sequence(tri, ts, r.shapes);
    const cplx tr = holonomy(seq).trace();
    const cplx ss = trace_state_sum(seq);
    const cplx total = classical_trace(tri, ts, r.shapes);
    const double diff = std::abs(tr - ss);
    json j = shapes_json(tri, r);
    j["holonomy_trace"] = complex_json(tr);
    j["state_sum"] = complex_json(ss);
    j["state_sum_residual"] = diff;
    j["cable"] = ts.cable;
    j["cabled_trace"] = complex_json(total);
    std::ostringstream os;
    os << shapes_text(tri, r);
    os << "trace(holonomy) = " << fmt_complex(tr) << "\n";
    os << "state sum       = " << fmt_complex(ss) << "  (|difference| = " << fmt_sci(diff) << ")\n";
    if (ts.cable != 1) os << "trace^" << ts.cable << " = " << fmt_complex(total) << "\n";
    emit(c, j, os.str());
    return diff < 1e-9 && r.max_residual < 1e-10 ? 0 : 1;
}

const char* family_name(RelationFamily f) {
    switch (f) {
        case RelationFamily::VMinus: return "V-";
        case RelationFamily::VPlus: return "V+";
        case RelationFamily::WMinus: return "W-";
        case RelationFamily::WPlus: return "W+";
        case RelationFamily::Derived: return "V+ (derived)";
    }
    return "?";
}

int cmd_relations(const Common& c, const std::string& tri_path) {
    const GluingAlgebra G(Triangulation::load(tri_path));
    json j;
    j["relations"] = json::array();
    std::ostringstream os;
    for (const auto& r : G.relations()) {
        const std::string text = G.render_xhat(r.element);
        j["relations"].push_back({{"id", r.id},
                                  {"family", family_name(r.family)},
                                  {"side", to_string(r.side)},
                                  {"central", r.central},
                                  {"element", text},
                                  {"proof_steps", r.proof.size()}});
        os << family_name(r.family) << " " << r.id << " [" << to_string(r.side) << (r.central ? ", central" : "")
           << "]: " << text << "\n";
    }
    const auto wm = G.w_minus();
    j["w_minus"] = json::array();
    for (std::size_t k = 0; k < wm.size(); ++k) {
        const std::string text = G.render(wm[k]);
        j["w_minus"].push_back(text);
        os << "W- " << k << ": " << text << "\n";
    }
    const auto wp = G.w_plus();
    j["w_plus"] = json::array();
    for (std::size_t t = 0; t < wp.size(); ++t) {
        const std::string a = G.render(wp[t].first), b = G.render(wp[t].second);
        j["w_plus"].push_back({a, b});
        os << "W+ " << G.triangulation().tetrahedra()[t].letter << ": " << a << "\n";
        os << "W+ " << G.triangulation().tetrahedra()[t].letter << ": " << b << "\n";
    }
    emit(c, j, os.str());
    return 0;
}

int cmd_check(const Common& c, const std::string& tri_path, std::uint64_t seed, const std::vector<std::string>& guess) {
    const GluingAlgebra G(Triangulation::load(tri_path));
    const auto& tri = G.triangulation();
    json j;
    std::ostringstream os;
    bool ok = true;
    auto line = [&](const std::string& name, bool pass, const std::string& detail) {
        ok = ok && pass;
        j["checks"].push_back({{"name", name}, {"pass", pass}, {"detail", detail}});
        os << (pass ? "PASS " : "FAIL ") << name << (detail.empty() ? "" : ": " + detail) << "\n";
    };
    j["checks"] = json::array();

    const SolveResult sol = solve_gluing(tri, parse_guesses(guess, tri.num_tetrahedra()));
    line("gluing equations", sol.max_residual < 1e-10, "max residual " + fmt_sci(sol.max_residual));
    const ClassicalReport rep = G.classical_check(sol.shapes);
    line("squared classical specialization", rep.max_residual() < 1e-9, "max residual " + fmt_sci(rep.max_residual()));

    // The shape identities hold for any shapes; probe random ones.
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Shape> shapes;
        for (std::size_t t = 0; t < tri.num_tetrahedra(); ++t) shapes.push_back({cplx(dist(rng), 0.1 + std::abs(dist(rng)))});
        const ClassicalReport r = G.classical_check(shapes);
        for (double x : r.triangle_residuals) worst = std::max(worst, x);
        for (double x : r.three_term_residuals) worst = std::max(worst, x);
    }
    line("vertex relations at random shapes (seed " + std::to_string(seed) + ")", worst < 1e-9,
         "max residual " + fmt_sci(worst));

    std::size_t central = 0, triangles = 0;
    for (const auto& r : G.relations()) {
        if (r.family != RelationFamily::VPlus || r.element.terms().size() != 2) continue;
        ++triangles;
        bool xhat_central = true;
        for (EdgeConeId e = 0; e < static_cast<EdgeConeId>(G.num_cones()); ++e)
            xhat_central = xhat_central && G.torus().commutator(r.element, G.xhat(e)).is_zero();
        if (xhat_central) ++central;
    }
    line("triangle relations commute with every x̂", central == triangles,
         std::to_string(central) + " of " + std::to_string(triangles));

    std::size_t chains = 0, good = 0;
    for (EdgeConeId e = 0; e < static_cast<EdgeConeId>(G.num_cones()); ++e) {
        ++chains;
        const auto chain = G.opposite_edge_chain(e);
        const auto target = G.xhat(cone_id(cone_edge(e).opposite()), 2);
        if (G.verify_chain(chain) && chain.back().after == target) ++good;
    }
    line("opposite-edge square certificates", good == chains, std::to_string(good) + " of " + std::to_string(chains));

    std::size_t wgood = 0, wtotal = 0;
    for (std::size_t t = 0; t < tri.num_tetrahedra(); ++t) {
        for (const auto& chain : {G.certify_w_plus_triangle(static_cast<int>(t)),
                                  G.certify_w_plus_three_term(static_cast<int>(t))}) {
            ++wtotal;
            if (!chain.empty() && G.verify_chain(chain) && chain.back().after.is_zero()) ++wgood;
        }
    }
    for (std::size_t k = 0; k < tri.edge_classes().size(); ++k) {
        if (!tri.edge_classes()[k].closed) continue;
        ++wtotal;
        const auto chain = G.certify_w_minus(static_cast<int>(k));
        if (!chain.empty() && G.verify_chain(chain) && chain.back().after.is_zero()) ++wgood;
    }
    line("W relation certificates", wgood == wtotal, std::to_string(wgood) + " of " + std::to_string(wtotal));

    bool qgm_ok = true;
    const auto& Q = G.qgm_torus();
    for (std::size_t a = 0; a < Q.ngens(); ++a)
        for (std::size_t b = 0; b < Q.ngens(); ++b) {
            const auto Xa = G.iota(Q.gen(a)), Xb = G.iota(Q.gen(b));
            const auto lhs = G.torus().mul(Xa, Xb);
            const auto rhs = Scalar::a_pow(Q.form().at(a, b)) * G.torus().mul(Xb, Xa);
            qgm_ok = qgm_ok && lhs == rhs;
        }
    line("QGM commutation through iota", qgm_ok, "");

    j["ok"] = ok;
    emit(c, j, os.str());
    return ok ? 0 : 1;
}

int cmd_qtrace(const Common& c, const std::string& tri_path, const std::string& link_path,
               const std::string& script_path, bool classical_check, const std::string& turns_path,
               std::int64_t frame, unsigned jobs, const std::vector<std::string>& guess) {
    const GluingAlgebra G(Triangulation::load(tri_path));
    const auto& tri = G.triangulation();
    const json link = load_json(link_path);
    std::optional<TurnSequence> ts;
    LinkPresentation lp;
    if (is_turn_sequence(link)) {
        ts = turns_from_json(tri, link);
        lp = compile_turns(G, *ts);
    } else {
        lp = link_from_json(G, link);
    }
    if (!turns_path.empty()) ts = turns_from_json(tri, load_json(turns_path));
    if (classical_check && !ts)
        throw UsageError("--classical-check needs a turn sequence (Level-2 input or --turns)");

    const Evaluation ev = evaluate(G, lp, jobs);
    TorusElement result = ev.value;
    json j;
    j["nonzero_states"] = ev.nonzero_states;
    j["total_states"] = ev.total_states;
    j["raw"] = G.render(ev.value);
    std::ostringstream tail;
    tail << "nonzero states: " << ev.nonzero_states << " of " << ev.total_states << "\n";
    bool ok = true;
    if (!script_path.empty()) {
        const Reduction red = reduce_with_script(G, ev.value, load_json(script_path));
        const bool replay = G.verify_chain(red.certificates);
        ok = ok && replay;
        result = red.value;
        j["certificates"] = red.certificates.size();
        j["certificates_replay"] = replay;
        tail << "raw: " << G.render(ev.value) << "\n";
        tail << "certificates: " << red.certificates.size() << (replay ? " (all replay)" : " (REPLAY FAILED)") << "\n";
    }
    if (frame != 0) {
        result = apply_framing(result, frame);
        j["frame"] = frame;
        tail << "framing: (-A^3)^" << frame << "\n";
    }
    j["result"] = G.render(result);
    j["even"] = G.check_even(result);
    tail << "even: " << (G.check_even(result) ? "yes" : "no") << "\n";

    if (classical_check) {
        const SolveResult sol = solve_gluing(tri, parse_guesses(guess, tri.num_tetrahedra()));
        const cplx target = classical_trace(tri, *ts, sol.shapes);
        // Framing only changes the value by a sign at A = 1.
        const auto match = branch_search(G, result, sol.shapes, target, 1e-6);
        json cj;
        cj["classical_trace"] = complex_json(target);
        cj["match"] = match.has_value();
        tail << "classical trace: " << fmt_complex(target) << "\n";
        if (match) {
            cj["shadow"] = complex_json(match->shadow);
            cj["sign"] = match->overall_sign;
            cj["residual"] = match->residual;
            cj["assignments_tried"] = match->assignments_tried;
            tail << "classical shadow: " << fmt_complex(match->shadow) << " (sign " << (match->overall_sign > 0 ? "+" : "-")
                 << ", residual " << fmt_sci(match->residual) << ", " << match->assignments_tried
                 << " branch assignments tried)\n";
        } else {
            tail << "classical shadow: no branch assignment matches\n";
        }
        j["classical"] = cj;
        ok = ok && match.has_value();
    }
    j["ok"] = ok;
    emit(c, j, G.render(result) + "\n" + tail.str());
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum trace of links in ideally triangulated 3-manifolds"};
    app.require_subcommand(1);
    Common common;
    app.add_option("--output", common.output, "output format")
        ->check(CLI::IsMember({"text", "json"}))
        ->capture_default_str();
    std::uint64_t seed = 1;
    app.add_option("--seed", seed, "seed for randomized checks")->capture_default_str();
    std::vector<std::string> guess;

    std::string tri_path, second_path, script_path, turns_path;
    bool classical = false;
    std::int64_t frame = 0;
    unsigned jobs = 1;

    auto* validate = app.add_subcommand("validate", "load and validate a triangulation");
    validate->add_option("triangulation", tri_path)->required();

    auto* solve = app.add_subcommand("solve-shapes", "solve the gluing equations");
    solve->add_option("triangulation", tri_path)->required();
    solve->add_option("--guess", guess, "initial shape(s) re,im");

    auto* ctrace = app.add_subcommand("classical-trace", "classical trace of a turn sequence");
    ctrace->add_option("triangulation", tri_path)->required();
    ctrace->add_option("turns", second_path)->required();
    ctrace->add_option("--guess", guess, "initial shape(s) re,im");

    auto* relations = app.add_subcommand("relations", "dump the relation families");
    relations->add_option("triangulation", tri_path)->required();

    auto* check = app.add_subcommand("check", "classical, centrality and certificate checks");
    check->add_option("triangulation", tri_path)->required();
    check->add_option("--guess", guess, "initial shape(s) re,im");

    auto* qtrace = app.add_subcommand("qtrace", "quantum trace of a link");
    qtrace->add_option("triangulation", tri_path)->required();
    qtrace->add_option("link", second_path)->required();
    qtrace->add_option("--script", script_path, "reduction script");
    qtrace->add_flag("--classical-check", classical, "compare the classical shadow with the classical trace");
    qtrace->add_option("--turns", turns_path, "turn sequence for --classical-check with Level-1 input");
    qtrace->add_option("--frame", frame, "multiply by (-A^3)^k");
    qtrace->add_option("--jobs", jobs, "threads for the state sum")->check(CLI::Range(1U, 256U));
    qtrace->add_option("--guess", guess, "initial shape(s) re,im");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*validate) return cmd_validate(common, tri_path);
        if (*solve) return cmd_solve(common, tri_path, guess);
        if (*ctrace) return cmd_classical_trace(common, tri_path, second_path, guess);
        if (*relations) return cmd_relations(common, tri_path);
        if (*check) return cmd_check(common, tri_path, seed, guess);
        if (*qtrace)
            return cmd_qtrace(common, tri_path, second_path, script_path, classical, turns_path, frame, jobs, guess);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
