// Command-line front end: parses a family spec plus a subcommand, runs the
// corresponding library routines, and writes JSON/CSV/SVG to --out or stdout.
//
// Exit codes: 0 success, 2 usage error (usage text on stderr), 1 computational
// failure (error serialized as JSON on stderr).
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "trv/bones.hpp"
#include "trv/errors.hpp"
#include "trv/family.hpp"
#include "trv/io.hpp"
#include "trv/kneading.hpp"
#include "trv/lifting.hpp"
#include "trv/orbit.hpp"
#include "trv/scan.hpp"
#include "trv/transfer.hpp"

using nlohmann::ordered_json;

namespace {

struct options {
    std::string family_json;
    double c = 0.0;
    bool has_c = false;
    int q = 0;
    std::vector<double> bracket;
    std::vector<double> range;
    int grid = 400;
    int n = 0; // per-subcommand default resolved at run time
    int kmax = 0;
    double theta = 0.0;
    bool has_theta = false;
    double ell = 1.0;
    std::uint64_t seed = 0;
    int jobs = 1;
    std::string out;
    std::string format; // per-subcommand default resolved at run time
};

std::string with_final_newline(std::string s) {
    if (s.empty() || s.back() != '\n') s += '\n';
    return s;
}

ordered_json json_complex(trv::cplx z) { return ordered_json{z.real(), z.imag()}; }

std::string symbol_string(const trv::kneading_sequence& seq) {
    std::string s;
    s.reserve(seq.symbols.size());
    for (const int sym : seq.symbols) s += sym > 0 ? '+' : (sym < 0 ? '-' : '0');
    return s;
}

// ---------------------------------------------------------------------
// solve / orbit / certify / spectrum
// ---------------------------------------------------------------------

std::string run_solve(const trv::family_spec& spec, const options& opt) {
    if (opt.bracket.size() != 2)
        trv::fail(trv::errc::domain_error, "solve requires --bracket lo hi");
    const double c = trv::solve_superstable(spec, opt.q, opt.bracket[0], opt.bracket[1]);
    ordered_json j;
    j["q"] = opt.q;
    j["c"] = c;
    j["residual"] = trv::superstable_objective(spec, c, opt.q).first;
    return with_final_newline(j.dump());
}

ordered_json relations_json(const std::vector<trv::critical_relation>& rels) {
    ordered_json arr = ordered_json::array();
    for (const trv::critical_relation& r : rels) {
        ordered_json e;
        e["j"] = r.j;
        e["kind"] = r.periodic_to_critical ? "periodic_to_critical" : "preperiodic";
        e["q"] = r.q;
        if (r.periodic_to_critical)
            e["mu"] = r.mu;
        else
            e["l"] = r.l;
        e["near_parabolic"] = r.near_parabolic;
        arr.push_back(e);
    }
    return arr;
}

std::string run_orbit(const trv::family_spec& spec, const options& opt) {
    const int max_iter = opt.n > 0 ? opt.n : 400;
    const trv::marked_orbit orb = trv::critical_orbit(spec, {opt.c}, max_iter);
    const std::vector<trv::critical_relation> rels = trv::detect_relations(orb);
    ordered_json j;
    j["family"] = ordered_json::parse(spec.to_json());
    j["c"] = opt.c;
    ordered_json pts = ordered_json::array();
    for (const std::vector<double>& row : orb.pts) pts.push_back(row);
    j["points"] = pts;
    j["g_P"] = orb.gP;
    j["relations"] = relations_json(rels);
    return with_final_newline(j.dump());
}

std::string run_certify(const trv::family_spec& spec, const options& opt) {
    const trv::marked_orbit orb = trv::critical_orbit(spec, {opt.c}, 400);
    const std::vector<trv::critical_relation> rels = trv::detect_relations(orb);
    const trv::transversality_certificate cert = trv::certify(spec, {opt.c}, rels);
    return with_final_newline(cert.to_json());
}

std::string run_spectrum(const trv::family_spec& spec, const options& opt) {
    const trv::marked_orbit orb = trv::critical_orbit(spec, {opt.c}, 400);
    const std::vector<trv::critical_relation> rels = trv::detect_relations(orb);
    const trv::transfer_matrix A = trv::assemble_A(orb, rels);
    const std::vector<trv::cplx> eig = trv::spectrum(A);
    const std::vector<trv::cplx> poly = trv::det_poly(A);
    if (opt.format == "csv") {
        std::string csv = "re,im\n";
        for (const trv::cplx& z : eig)
            csv += trv::csv_row({trv::float17(z.real()), trv::float17(z.imag())});
        return csv;
    }
    double sr = 0.0;
    for (const trv::cplx& z : eig) sr = std::max(sr, std::abs(z));
    ordered_json j;
    j["c"] = opt.c;
    j["dim"] = A.dim;
    j["spectral_radius"] = sr;
    ordered_json ev = ordered_json::array();
    for (const trv::cplx& z : eig) ev.push_back(json_complex(z));
    j["eigenvalues"] = ev;
    ordered_json pc = ordered_json::array();
    for (const trv::cplx& z : poly) pc.push_back(json_complex(z));
    j["det_poly"] = pc;
    return with_final_newline(j.dump());
}

// ---------------------------------------------------------------------
// scan
// ---------------------------------------------------------------------

std::string bifurcation_svg(const trv::family_spec& spec, double lo, double hi,
                            int grid, int transient, int keep) {
    const int width = 800, height = 600;
    char buf[160];
    std::string out;
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" "
                  "height=\"%d\" viewBox=\"0 0 %d %d\">\n",
                  width, height, width, height);
    out += buf;
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\" stroke=\"black\"/>\n";
    const double margin = 40;
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.0f\" y1=\"%.0f\" x2=\"%.0f\" y2=\"%.0f\" "
                  "stroke=\"black\"/>\n",
                  margin, height - margin, width - margin, height - margin);
    out += buf;
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.0f\" y1=\"%.0f\" x2=\"%.0f\" y2=\"%.0f\" "
                  "stroke=\"black\"/>\n",
                  margin, margin, margin, height - margin);
    out += buf;
    if (!(lo < hi) || grid < 1) {
        out += "</svg>\n";
        return out;
    }

    const double x0 = trv::turning_point(spec);
    std::vector<std::pair<double, double>> cloud;
    cloud.reserve(static_cast<std::size_t>(grid) * static_cast<std::size_t>(keep));
    for (int i = 0; i < grid; ++i) {
        const double c = grid == 1 ? lo : lo + (hi - lo) * i / (grid - 1);
        double x = x0;
        bool alive = true;
        for (int k = 0; k < transient && alive; ++k) {
            x = trv::eval_real(spec, c, x);
            alive = std::isfinite(x) && std::abs(x) < 1e6;
        }
        for (int k = 0; k < keep && alive; ++k) {
            x = trv::eval_real(spec, c, x);
            alive = std::isfinite(x) && std::abs(x) < 1e6;
            if (alive) cloud.emplace_back(c, x);
        }
    }
    double y_lo = 0, y_hi = 1;
    if (!cloud.empty()) {
        y_lo = y_hi = cloud[0].second;
        for (const auto& p : cloud) {
            y_lo = std::min(y_lo, p.second);
            y_hi = std::max(y_hi, p.second);
        }
    }
    const double pad = 0.05 * (y_hi - y_lo) + 1e-12;
    y_lo -= pad;
    y_hi += pad;
    for (const auto& p : cloud) {
        const double px = margin + (p.first - lo) / (hi - lo) * (width - 2 * margin);
        const double py =
            height - margin - (p.second - y_lo) / (y_hi - y_lo) * (height - 2 * margin);
        std::snprintf(buf, sizeof buf, "<rect x=\"%.2f\" y=\"%.2f\" width=\"1\" "
                                       "height=\"1\" fill=\"black\"/>\n",
                      px, py);
        out += buf;
    }
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.0f\" y=\"%d\" font-size=\"12\">c: %.6g .. %.6g</text>\n",
                  margin, height - 12, lo, hi);
    out += buf;
    out += "</svg>\n";
    return out;
}

std::string run_scan(const trv::family_spec& spec, const options& opt) {
    if (opt.range.size() != 2)
        trv::fail(trv::errc::domain_error, "scan requires --range lo hi");
    const double lo = opt.range[0], hi = opt.range[1];
    const int n_sym = opt.n > 0 ? opt.n : 24;
    const int n_lap = opt.kmax > 0 ? opt.kmax : 12;

    if (opt.format == "svg") {
        const int keep = opt.n > 0 ? opt.n : 100;
        if (keep > 1000)
            trv::fail(trv::errc::domain_error, "scan svg keeps at most 1000 iterates");
        const int transient = opt.kmax > 0 ? opt.kmax : 200;
        return bifurcation_svg(spec, lo, hi, lo < hi ? opt.grid : 0, transient, keep);
    }

    const bool empty = !(lo < hi) || opt.grid < 2;
    if (opt.format == "json") {
        ordered_json j;
        j["grid"] = empty ? 0 : opt.grid;
        j["n"] = n_sym;
        ordered_json viol = ordered_json::array();
        ordered_json esc = ordered_json::array();
        ordered_json inc = ordered_json::array();
        if (!empty) {
            const trv::monotonicity_report rep =
                trv::monotonicity_scan_jobs(spec, lo, hi, opt.grid, n_sym, opt.jobs);
            for (const trv::scan_violation& v : rep.violations)
                viol.push_back(ordered_json{{"index", v.index},
                                            {"c_left", v.c_left},
                                            {"c_right", v.c_right}});
            for (const double c : rep.escaped) esc.push_back(c);
            for (const auto& p : rep.incomparable)
                inc.push_back(ordered_json{p.first, p.second});
        }
        j["violations"] = viol;
        j["escaped"] = esc;
        j["incomparable"] = inc;
        return with_final_newline(j.dump());
    }

    // CSV: one row per grid point with the kneading word, the lap count of
    // the n_lap-th iterate, and the entropy estimate.
    std::string csv = "# kneading_convention: " + trv::kneading_convention(spec) + "\n";
    csv += "c,kneading,lambda_n,entropy\n";
    if (empty) return csv;
    std::vector<std::string> rows(static_cast<std::size_t>(opt.grid));
    trv::parallel_for(rows.size(), opt.jobs, [&](std::size_t k) {
        const double c = lo + (hi - lo) * static_cast<double>(k) / (opt.grid - 1);
        try {
            const trv::kneading_sequence seq = trv::kneading(spec, c, n_sym);
            const trv::lap_table lap = trv::lap_numbers(spec, c, n_lap);
            rows[k] = trv::csv_row({trv::float17(c), symbol_string(seq),
                                    std::to_string(lap.laps.back()),
                                    trv::float17(lap.entropy_estimate)});
        } catch (const trv::error& e) {
            if (e.code() != trv::errc::escape) throw;
            rows[k] = trv::csv_row({trv::float17(c), "escaped", "0",
                                    trv::float17(std::numeric_limits<double>::quiet_NaN())});
        }
    });
    for (const std::string& r : rows) csv += r;
    return csv;
}

// ---------------------------------------------------------------------
// lift
// ---------------------------------------------------------------------

std::string run_lift(const trv::family_spec& spec, const options& opt) {
    const trv::marked_orbit orb = trv::critical_orbit(spec, {opt.c}, 400);
    const std::vector<trv::critical_relation> rels = trv::detect_relations(orb);
    const std::vector<trv::cplx> velocity(orb.gP.size(), trv::cplx{1.0, 0.0});
    const trv::motion seed = trv::make_motion(orb.gP, velocity, 0.4);
    const int k_max = opt.kmax > 0 ? opt.kmax : 40;
    const trv::lift_diagnostics diag =
        trv::iterate_lifts(spec, orb, rels, seed, k_max);

    if (opt.format == "csv") {
        std::string csv = "k,sup_norm,deviation,ratio\n";
        for (std::size_t k = 0; k < diag.deviation.size(); ++k) {
            const double ratio = k < diag.ratio.size()
                                     ? diag.ratio[k]
                                     : std::numeric_limits<double>::quiet_NaN();
            csv += trv::csv_row({std::to_string(k), trv::float17(diag.sup_norm[k]),
                                 trv::float17(diag.deviation[k]), trv::float17(ratio)});
        }
        return csv;
    }

    ordered_json j = ordered_json::parse(diag.to_json());
    if (opt.has_theta) {
        const int samples = opt.n > 0 ? opt.n : 10000;
        const trv::schwarz_report rep =
            trv::schwarz_sampling(opt.theta, samples, opt.seed);
        ordered_json s;
        s["theta"] = opt.theta;
        s["samples"] = samples;
        s["seed"] = opt.seed;
        s["checked"] = rep.checked;
        s["violations"] = rep.violations;
        s["a3_checked"] = rep.a3_checked;
        s["a3_violations"] = rep.a3_violations;
        j["schwarz"] = s;
    }
    return with_final_newline(j.dump());
}

// ---------------------------------------------------------------------
// bones
// ---------------------------------------------------------------------

// Merge the two marching directions from one seed into a single curve that
// runs from the end of the negative branch to the end of the positive one.
trv::bone_curve merge_traces(const trv::bone_curve& minus, const trv::bone_curve& plus) {
    trv::bone_curve out;
    out.q = plus.q;
    const std::size_t lm = minus.points.size();
    for (std::size_t k = lm; k-- > 1;) {
        out.points.push_back(minus.points[k]);
        out.tangents.push_back({-minus.tangents[k][0], -minus.tangents[k][1]});
    }
    for (std::size_t k = 0; k < plus.points.size(); ++k) {
        out.points.push_back(plus.points[k]);
        out.tangents.push_back(plus.tangents[k]);
    }
    auto remap_minus = [&](int idx) { return static_cast<int>(lm) - 1 - idx; };
    auto remap_plus = [&](int idx) { return static_cast<int>(lm) - 1 + idx; };
    for (const trv::bone_event& ev : minus.events)
        if (remap_minus(ev.index) >= 0)
            out.events.push_back({remap_minus(ev.index), ev.crossing, ev.i, ev.a, ev.b});
    for (const trv::bone_event& ev : plus.events)
        out.events.push_back({remap_plus(ev.index), ev.crossing, ev.i, ev.a, ev.b});
    for (const int k : minus.ordering_flips)
        if (k >= 1) out.ordering_flips.push_back(static_cast<int>(lm) - k);
    for (const int k : plus.ordering_flips)
        out.ordering_flips.push_back(static_cast<int>(lm) - 1 + k);
    std::sort(out.events.begin(), out.events.end(),
              [](const trv::bone_event& x, const trv::bone_event& y) {
                  return x.index < y.index;
              });
    std::sort(out.ordering_flips.begin(), out.ordering_flips.end());
    return out;
}

std::string run_bones(const trv::family_spec& spec, const options& opt) {
    if (spec.kind != trv::family_kind::cubic)
        trv::fail(trv::errc::domain_error, "bones requires the cubic family");
    if (opt.q < 1) trv::fail(trv::errc::domain_error, "bones requires --q >= 1");
    if (opt.range.size() != 2)
        trv::fail(trv::errc::domain_error,
                  "bones requires --range b_lo b_hi (seed window on the line a = c)");
    const int steps = opt.n > 0 ? opt.n : 200;
    const std::vector<double> seeds =
        trv::bone_seeds(opt.q, opt.c, opt.range[0], opt.range[1], opt.grid);
    if (seeds.empty())
        trv::fail(trv::errc::no_solution,
                  "bones: no curve intersects the seed window on a = " +
                      trv::float17(opt.c));

    std::vector<trv::bone_curve> curves;
    for (const double b : seeds) {
        const trv::bone_curve plus = trv::trace_bone(opt.q, {opt.c, b}, 0.01, steps);
        const trv::bone_curve minus = trv::trace_bone(opt.q, {opt.c, b}, -0.01, steps);
        trv::bone_curve merged = merge_traces(minus, plus);
        const std::vector<trv::bone_event> crossings =
            trv::detect_crossings(spec, merged);
        merged.events.insert(merged.events.end(), crossings.begin(), crossings.end());
        if (opt.kmax >= 4) {
            const trv::entropy_report rep = trv::entropy_along(spec, merged, opt.kmax);
            merged.lap_entropy = rep.entropy;
        }
        curves.push_back(std::move(merged));
    }

    if (opt.format == "svg") return trv::bone_svg(curves);
    if (opt.format == "csv") return trv::bone_csv(curves.front());

    ordered_json j;
    j["q"] = opt.q;
    ordered_json arr = ordered_json::array();
    for (std::size_t k = 0; k < curves.size(); ++k) {
        const trv::bone_curve& c = curves[k];
        double a_lo = c.points[0][0], a_hi = c.points[0][0];
        for (const trv::vec2& p : c.points) {
            a_lo = std::min(a_lo, p[0]);
            a_hi = std::max(a_hi, p[0]);
        }
        ordered_json e;
        e["seed_b"] = seeds[k];
        e["points"] = c.points.size();
        e["a_min"] = a_lo;
        e["a_max"] = a_hi;
        ordered_json evs = ordered_json::array();
        for (const trv::bone_event& ev : c.events)
            evs.push_back(ordered_json{{"index", ev.index},
                                       {"crossing", ev.crossing},
                                       {"i", ev.i},
                                       {"a", ev.a},
                                       {"b", ev.b}});
        e["events"] = evs;
        e["ordering_flips"] = c.ordering_flips;
        arr.push_back(e);
    }
    j["curves"] = arr;
    return with_final_newline(j.dump());
}

// ---------------------------------------------------------------------
// entropy
// ---------------------------------------------------------------------

std::string run_entropy(const trv::family_spec& spec, const options& opt) {
    const int n = opt.n > 0 ? opt.n : 16;
    if (opt.range.size() == 2) {
        const double lo = opt.range[0], hi = opt.range[1];
        std::string csv = "c,entropy\n";
        if (!(lo < hi) || opt.grid < 2) return csv;
        std::vector<std::string> rows(static_cast<std::size_t>(opt.grid));
        trv::parallel_for(rows.size(), opt.jobs, [&](std::size_t k) {
            const double c = lo + (hi - lo) * static_cast<double>(k) / (opt.grid - 1);
            try {
                const trv::lap_table lap = trv::lap_numbers(spec, c, n);
                rows[k] = trv::csv_row({trv::float17(c), trv::float17(lap.entropy_estimate)});
            } catch (const trv::error& e) {
                if (e.code() != trv::errc::escape) throw;
                rows[k] = trv::csv_row(
                    {trv::float17(c), trv::float17(std::numeric_limits<double>::quiet_NaN())});
            }
        });
        for (const std::string& r : rows) csv += r;
        return csv;
    }
    const trv::lap_table lap = trv::lap_numbers(spec, opt.c, n);
    if (opt.format == "csv") {
        std::string csv = "n,lambda_n\n";
        for (std::size_t k = 0; k < lap.laps.size(); ++k)
            csv += trv::csv_row({std::to_string(k + 1), std::to_string(lap.laps[k])});
        return csv;
    }
    ordered_json j;
    j["c"] = opt.c;
    j["n"] = n;
    j["laps"] = lap.laps;
    j["entropy"] = lap.entropy_estimate;
    j["fit_error"] = lap.fit_error;
    return with_final_newline(j.dump());
}

void emit(const options& opt, const std::string& content) {
    if (opt.out.empty()) {
        std::fputs(content.c_str(), stdout);
        return;
    }
    trv::write_text_file(opt.out, content);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"transfer-operator, kneading, and bones toolkit"};
    app.require_subcommand(1);
    options opt;

    const std::vector<std::string> subnames = {"solve",    "orbit", "certify",
                                               "spectrum", "scan",  "lift",
                                               "bones",    "entropy"};
    const std::vector<std::string> sub_help = {
        "solve a superstable parameter inside a bracket",
        "critical orbit and detected relations",
        "transversality certificate at a parameter",
        "transfer-operator spectrum at a parameter",
        "kneading/entropy scan over a parameter range",
        "iterated lift diagnostics (optionally with a sampling check)",
        "trace bones curves of the cubic family",
        "lap counts and entropy at a parameter or over a range"};
    std::vector<CLI::App*> subs;
    for (std::size_t k = 0; k < subnames.size(); ++k) {
        CLI::App* sub = app.add_subcommand(subnames[k], sub_help[k]);
        sub->add_option("--family", opt.family_json, "family spec as JSON")->required();
        sub->add_option("--c", opt.c, "parameter value")->each([&](const std::string&) {
            opt.has_c = true;
        });
        sub->add_option("--q", opt.q, "period / order");
        sub->add_option("--bracket", opt.bracket, "bracket lo hi")->expected(2);
        sub->add_option("--range", opt.range, "parameter range lo hi")->expected(2);
        sub->add_option("--grid", opt.grid, "grid points");
        sub->add_option("--n", opt.n, "iterate/sample count");
        sub->add_option("--kmax", opt.kmax, "iteration depth");
        sub->add_option("--theta", opt.theta, "sector half-angle")
            ->each([&](const std::string&) { opt.has_theta = true; });
        sub->add_option("--ell", opt.ell, "flatness order");
        sub->add_option("--seed", opt.seed, "RNG seed (default 0)");
        sub->add_option("--jobs", opt.jobs, "worker pool size (default 1)");
        sub->add_option("--out", opt.out, "output path (default stdout)");
        sub->add_option("--format", opt.format, "json|csv|svg")
            ->check(CLI::IsMember({"json", "csv", "svg"}));
        subs.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "%s\n\n%s", e.what(), app.help().c_str());
        return 2;
    }

    const std::string cmd = app.get_subcommands().front()->get_name();
    static const std::vector<std::pair<const char*, const char*>> defaults = {
        {"solve", "json"}, {"orbit", "json"},   {"certify", "json"},
        {"spectrum", "json"}, {"scan", "csv"},  {"lift", "json"},
        {"bones", "csv"},  {"entropy", "json"}};
    if (opt.format.empty())
        for (const auto& d : defaults)
            if (cmd == d.first) opt.format = d.second;

    try {
        const trv::family_spec spec = trv::family_spec::parse(opt.family_json);
        std::string content;
        if (cmd == "solve")
            content = run_solve(spec, opt);
        else if (cmd == "orbit")
            content = run_orbit(spec, opt);
        else if (cmd == "certify")
            content = run_certify(spec, opt);
        else if (cmd == "spectrum")
            content = run_spectrum(spec, opt);
        else if (cmd == "scan")
            content = run_scan(spec, opt);
        else if (cmd == "lift")
            content = run_lift(spec, opt);
        else if (cmd == "bones")
            content = run_bones(spec, opt);
        else
            content = run_entropy(spec, opt);
        emit(opt, content);
        return 0;
    } catch (const trv::error& e) {
        ordered_json err;
        err["error"] = trv::errc_name(e.code());
        err["message"] = e.what();
        std::fprintf(stderr, "%s\n", err.dump().c_str());
        return 1;
    } catch (const std::exception& e) {
        ordered_json err;
        err["error"] = "internal";
        err["message"] = e.what();
        std::fprintf(stderr, "%s\n", err.dump().c_str());
        return 1;
    }
}
