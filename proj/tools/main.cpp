#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "epchain/closed_form.hpp"
#include "epchain/dynamics.hpp"
#include "epchain/ep_scan.hpp"
#include "epchain/sweep.hpp"

using nlohmann::json;
using namespace epchain;

namespace {

struct OutputOpts {
    std::string format = "json";
    std::string path;  // empty = stdout
};

void emit(const json& doc, const OutputOpts& out) {
    if (out.path.empty()) {
        std::cout << doc.dump(2) << '\n';
        return;
    }
    std::ofstream os(out.path);
    if (!os) throw std::runtime_error("cannot open for writing: " + out.path);
    os << doc.dump(2) << '\n';
}

void emit_text(const std::string& text, const OutputOpts& out) {
    if (out.path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream os(out.path);
    if (!os) throw std::runtime_error("cannot open for writing: " + out.path);
    os << text;
}

json params_json(const ChainParams& p) {
    return json{{"v", p.v}, {"w", p.w}, {"g", p.g}, {"a", p.a}, {"n", p.n}};
}

json record_json(const EpRecord& r) {
    json j{{"g", r.g},
           {"a", r.a},
           {"energy_re", r.energy.real()},
           {"energy_im", r.energy.imag()},
           {"cluster_size", r.cluster_size},
           {"exponent", r.exponent},
           {"matched_order", r.matched_order},
           {"coalescence", r.coalescence},
           {"kind", to_string(r.kind)},
           {"refined", r.refined}};
    if (r.case_label) j["case"] = to_string(*r.case_label);
    return j;
}

std::string records_csv(const std::vector<EpRecord>& recs) {
    std::string out = "g,a,energy_re,energy_im,cluster_size,exponent,matched_order,coalescence,kind,case,refined\n";
    char buf[512];
    for (const auto& r : recs) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%d,%.17g,%d,%.17g,%s,%s,%d\n", r.g,
                      r.a, r.energy.real(), r.energy.imag(), r.cluster_size, r.exponent,
                      r.matched_order, r.coalescence, to_string(r.kind),
                      r.case_label ? to_string(*r.case_label) : "-", r.refined ? 1 : 0);
        out += buf;
    }
    return out;
}

/// Pre-scan for --config and load its JSON object; flags given on the
/// command line still override anything set here.
json load_config(int argc, char** argv) {
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") {
            std::ifstream is(argv[i + 1]);
            if (!is) throw std::runtime_error(std::string("cannot open config: ") + argv[i + 1]);
            return json::parse(is);
        }
    }
    return json::object();
}

template <typename T>
void from_config(const json& cfg, const char* key, T& value) {
    if (cfg.contains(key)) value = cfg.at(key).get<T>();
}

}  // namespace

int main(int argc, char** argv) {
    try {
        const json cfg = load_config(argc, argv);

        CLI::App app{"nonreciprocal graded-chain spectra, exceptional points, and sweeps"};
        app.require_subcommand(1);
        std::string config_path;
        app.add_option("--config", config_path, "JSON file with default option values");

        ChainParams p;
        from_config(cfg, "v", p.v);
        from_config(cfg, "w", p.w);
        from_config(cfg, "g", p.g);
        from_config(cfg, "a", p.a);
        from_config(cfg, "n", p.n);

        OutputOpts out;
        from_config(cfg, "format", out.format);
        from_config(cfg, "out", out.path);

        double g_min = -2.0, g_max = 2.0;
        int g_steps = 401;
        double a_min = 0.0, a_max = 1.0;
        int a_steps = 0;
        from_config(cfg, "g-min", g_min);
        from_config(cfg, "g-max", g_max);
        from_config(cfg, "g-steps", g_steps);
        from_config(cfg, "a-min", a_min);
        from_config(cfg, "a-max", a_max);
        from_config(cfg, "a-steps", a_steps);

        auto add_model = [&](CLI::App* sub) {
            sub->add_option("--v", p.v, "intracell base hopping");
            sub->add_option("--w", p.w, "intercell base hopping");
            sub->add_option("--g", p.g, "nonreciprocity");
            sub->add_option("--a", p.a, "hopping gradient per link");
            sub->add_option("--n", p.n, "number of sites");
        };
        auto add_output = [&](CLI::App* sub) {
            sub->add_option("--format", out.format, "csv or json")
                ->check(CLI::IsMember({"csv", "json"}));
            sub->add_option("--out", out.path, "output path (default: stdout)");
            sub->add_option("--config", config_path, "JSON file with default option values");
        };
        auto add_ranges = [&](CLI::App* sub, bool with_a) {
            sub->add_option("--g-min", g_min);
            sub->add_option("--g-max", g_max);
            sub->add_option("--g-steps", g_steps, "grid points over [g-min, g-max]");
            if (with_a) {
                sub->add_option("--a-min", a_min);
                sub->add_option("--a-max", a_max);
                sub->add_option("--a-steps", a_steps, "grid points over [a-min, a-max] (0 = 1D sweep)");
            }
        };

        auto* spectrum = app.add_subcommand("spectrum", "eigenvalues at one parameter point");
        add_model(spectrum);
        add_output(spectrum);

        auto* sweep = app.add_subcommand("sweep", "parameter sweep with sheet-tracked energies");
        add_model(sweep);
        add_output(sweep);
        add_ranges(sweep, true);
        bool no_annotate = false;
        sweep->add_flag("--no-annotate", no_annotate, "skip degeneracy annotations");

        auto* findeps = app.add_subcommand("find-eps", "locate spectral degeneracies along g or a");
        add_model(findeps);
        add_output(findeps);
        add_ranges(findeps, true);
        std::string scan_axis = "g";
        findeps->add_option("--axis", scan_axis, "scan axis")->check(CLI::IsMember({"g", "a"}));

        auto* classify = app.add_subcommand("classify", "closed-form case of a 4-site point");
        add_model(classify);
        add_output(classify);
        double classify_tol = 1e-8;
        classify->add_option("--tol", classify_tol, "classification tolerance");

        auto* order = app.add_subcommand("order", "splitting-exponent fit at a degeneracy");
        add_model(order);
        add_output(order);
        std::string order_axis = "g";
        double eps_min = 1e-9, eps_max = 1e-3;
        int points = 13;
        order->add_option("--axis", order_axis, "perturbation axis")->check(CLI::IsMember({"g", "a"}));
        order->add_option("--eps-min", eps_min);
        order->add_option("--eps-max", eps_max);
        order->add_option("--points", points);

        auto* evolve_cmd = app.add_subcommand("evolve", "time evolution and edge masses");
        add_model(evolve_cmd);
        add_output(evolve_cmd);
        double t_total = 100.0;
        int steps = 1000;
        bool renormalize = true;
        int edge_k = 2;
        std::string psi0 = "uniform";
        bool trace = false;
        evolve_cmd->add_option("--t-total", t_total);
        evolve_cmd->add_option("--steps", steps);
        evolve_cmd->add_flag("--renormalize,!--no-renormalize", renormalize, "renormalize each step");
        evolve_cmd->add_option("--k", edge_k, "edge width for edge-mass reporting");
        evolve_cmd->add_option("--psi0", psi0, "initial state: uniform or site:<index>");
        evolve_cmd->add_flag("--trace", trace, "emit per-step edge masses");

        auto* winding = app.add_subcommand("winding", "reciprocal-limit winding number");
        winding->add_option("--v", p.v, "intracell base hopping");
        winding->add_option("--w", p.w, "intercell base hopping");
        add_output(winding);
        int samples = 256;
        winding->add_option("--samples", samples, "Brillouin-zone sample count");

        app.parse(argc, argv);

        if (*spectrum) {
            const auto ev = eigenvalues(build_hamiltonian(p)).eigenvalues;
            if (out.format == "csv") {
                std::string text = "index,re,im\n";
                char buf[128];
                for (std::size_t i = 0; i < ev.size(); ++i) {
                    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", i, ev[i].real(), ev[i].imag());
                    text += buf;
                }
                emit_text(text, out);
            } else {
                json re = json::array(), im = json::array();
                for (const auto& e : ev) {
                    re.push_back(e.real());
                    im.push_back(e.imag());
                }
                emit(json{{"model", params_json(p)}, {"energies", {{"re", re}, {"im", im}}}}, out);
            }
        } else if (*sweep) {
            SweepGrid grid;
            if (a_steps >= 2) {
                grid = sweep_2d(p, AxisSpec{g_min, g_max, g_steps}, AxisSpec{a_min, a_max, a_steps},
                                !no_annotate);
            } else {
                grid = sweep_1d(p, ScanAxis::g, g_min, g_max, g_steps, !no_annotate);
            }
            const auto fmt = out.format == "csv" ? ExportFormat::csv : ExportFormat::json;
            if (out.path.empty()) {
                write_grid(grid, fmt, std::cout);
            } else {
                write_grid_file(grid, fmt, out.path);
            }
        } else if (*findeps) {
            ScanConfig sc;
            sc.axis = scan_axis == "a" ? ScanAxis::a : ScanAxis::g;
            if (sc.axis == ScanAxis::a && a_steps >= 2) {
                sc.min = a_min;
                sc.max = a_max;
                sc.samples = a_steps;
            } else {
                sc.min = g_min;
                sc.max = g_max;
                sc.samples = g_steps;
            }
            const auto recs = scan_for_eps(p, sc);
            if (out.format == "csv") {
                emit_text(records_csv(recs), out);
            } else {
                json arr = json::array();
                for (const auto& r : recs) arr.push_back(record_json(r));
                emit(json{{"model", params_json(p)},
                          {"axis", scan_axis},
                          {"range", {{"min", sc.min}, {"max", sc.max}, {"samples", sc.samples}}},
                          {"records", arr}},
                     out);
            }
        } else if (*classify) {
            const auto sc = coefficients(p);
            const auto loci = ep_loci(p);
            if (out.format == "csv") {
                char buf[256];
                std::snprintf(buf, sizeof buf, "case,A,B_sq,B_re,B_im\n%s,%.17g,%.17g,%.17g,%.17g\n",
                              to_string(classify_point(p, classify_tol)), sc.A, sc.B_sq,
                              sc.B.real(), sc.B.imag());
                emit_text(buf, out);
            } else {
                json iib = json::array();
                for (const auto& [la, lg] : loci.case_iib) iib.push_back(json{{"a", la}, {"g", lg}});
                emit(json{{"model", params_json(p)},
                          {"case", to_string(classify_point(p, classify_tol))},
                          {"A", sc.A},
                          {"B_sq", sc.B_sq},
                          {"B", {{"re", sc.B.real()}, {"im", sc.B.imag()}}},
                          {"type1_loci", loci.type1},
                          {"type2_loci", loci.type2},
                          {"case_iib_loci", iib}},
                     out);
            }
        } else if (*order) {
            const auto fit = order_estimate(p, order_axis == "a" ? ScanAxis::a : ScanAxis::g,
                                            eps_min, eps_max, points);
            if (out.format == "csv") {
                char buf[256];
                std::snprintf(buf, sizeof buf,
                              "axis,exponent,matched_order,cluster_size,points_used\n%s,%.17g,%d,%d,%d\n",
                              order_axis.c_str(), fit.exponent, fit.matched_order, fit.cluster_size,
                              fit.points_used);
                emit_text(buf, out);
            } else {
                emit(json{{"model", params_json(p)},
                          {"axis", order_axis},
                          {"exponent", fit.exponent},
                          {"matched_order", fit.matched_order},
                          {"cluster_size", fit.cluster_size},
                          {"points_used", fit.points_used}},
                     out);
            }
        } else if (*evolve_cmd) {
            StateVector psi;
            if (psi0 == "uniform") {
                psi = uniform_state(p.n);
            } else if (psi0.rfind("site:", 0) == 0) {
                psi = site_state(p.n, std::stoi(psi0.substr(5)));
            } else {
                throw std::runtime_error("unknown --psi0 (use uniform or site:<index>)");
            }
            const auto traj = evolve(p, psi, t_total, steps, renormalize);
            if (out.format == "csv") {
                std::string text = "step,edge_mass_left,edge_mass_right\n";
                char buf[128];
                for (std::size_t s = 0; s < traj.size(); ++s) {
                    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", s,
                                  edge_mass(traj[s], edge_k, Side::left),
                                  edge_mass(traj[s], edge_k, Side::right));
                    text += buf;
                }
                emit_text(text, out);
                return 0;
            }
            json doc{{"model", params_json(p)},
                     {"t_total", t_total},
                     {"steps", steps},
                     {"renormalize", renormalize}};
            const auto& last = traj.back();
            json re = json::array(), im = json::array();
            for (const auto& z : last.amplitudes) {
                re.push_back(z.real());
                im.push_back(z.imag());
            }
            doc["final_state"] = {{"re", re}, {"im", im}};
            doc["edge_mass_left"] = edge_mass(last, edge_k, Side::left);
            doc["edge_mass_right"] = edge_mass(last, edge_k, Side::right);
            doc["k"] = edge_k;
            if (trace) {
                json tl = json::array(), tr = json::array();
                for (const auto& st : traj) {
                    tl.push_back(edge_mass(st, edge_k, Side::left));
                    tr.push_back(edge_mass(st, edge_k, Side::right));
                }
                doc["edge_mass_left_trace"] = tl;
                doc["edge_mass_right_trace"] = tr;
            }
            emit(doc, out);
        } else if (*winding) {
            const auto res = winding_number(p.v, p.w, samples);
            if (out.format == "csv") {
                char buf[160];
                std::snprintf(buf, sizeof buf, "v,w,winding,samples,closure_defect\n%.17g,%.17g,%d,%d,%.17g\n",
                              p.v, p.w, res.winding, res.samples, res.closure_defect);
                emit_text(buf, out);
            } else {
                emit(json{{"v", p.v},
                          {"w", p.w},
                          {"winding", res.winding},
                          {"samples", res.samples},
                          {"closure_defect", res.closure_defect},
                          {"note",
                           "reports the accumulated angle of d(k) = (v + w cos k, w sin k); which "
                           "integer labels the nontrivial phase is a labeling convention left to "
                           "the caller"}},
                     out);
            }
        }
        return 0;
    } catch (const CLI::ParseError& e) {
        return CLI::App{}.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
