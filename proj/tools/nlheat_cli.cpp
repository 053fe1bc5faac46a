// nlheat command-line front end.
//
// exit status: 0 ok, 1 validation failure or numerical breakdown, 2 bad
// arguments / configuration / out-of-domain input.

#include "nlheat/acceptance.hpp"
#include "nlheat/heatkernel.hpp"
#include "nlheat/io.hpp"
#include "nlheat/ldp.hpp"
#include "nlheat/mcsim.hpp"
#include "nlheat/parallel.hpp"
#include "nlheat/regimes.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace nlheat;

namespace {

struct Common {
    unsigned workers = 0;
    std::string out;
};

std::string default_out() {
    const char* e = std::getenv("NLHEAT_OUT_DIR");
    return e && *e ? e : ".";
}

// --out is a directory unless it names a .csv/.json file
struct OutPaths {
    fs::path dir;
    std::string primary;  // empty = use the default name
};

OutPaths resolve_out(const std::string& out) {
    fs::path p(out.empty() ? default_out() : out);
    OutPaths o;
    auto ext = p.extension().string();
    if (ext == ".csv" || ext == ".json") {
        o.dir = p.has_parent_path() ? p.parent_path() : fs::path(".");
        o.primary = p.string();
    } else {
        o.dir = p;
    }
    fs::create_directories(o.dir);
    return o;
}

std::vector<double> parse_list(const std::string& s, const char* what) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        try {
            std::size_t pos = 0;
            v.push_back(std::stod(tok, &pos));
            if (pos != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ConfigError(std::string("cannot parse ") + what + " value '" + tok + "'");
        }
    }
    if (v.empty()) throw ConfigError(std::string("empty ") + what + " list");
    return v;
}

// path to a descriptor, inline JSON, or a shorthand family name
KernelFamily load_kernel(const std::string& spec, nlohmann::json* resolved = nullptr) {
    KernelFamily fam = KernelFamily::gaussian(1);
    if (spec == "gaussian") fam = KernelFamily::gaussian(1);
    else if (spec == "gaussian2") fam = KernelFamily::gaussian(2);
    else if (spec == "laplace") fam = KernelFamily::laplace();
    else if (spec == "tent") fam = KernelFamily::compact_support(1, 1.0, Profile::Tent);
    else if (!spec.empty() && spec.front() == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(spec);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("inline kernel JSON: ") + e.what());
        }
        fam = KernelFamily::from_json(j);
    } else {
        if (!fs::exists(spec)) throw ConfigError("kernel '" + spec + "' is neither a file, inline JSON nor a known name");
        fam = KernelFamily::from_json(read_json(spec), fs::path(spec).parent_path().string());
    }
    if (resolved) *resolved = fam.to_json();
    return fam;
}

class Manifest {
public:
    Manifest(std::string command, int argc, char** argv) {
        j_["command"] = std::move(command);
        std::vector<std::string> a(argv, argv + argc);
        j_["argv"] = a;
        j_["versions"] = build_info();
        j_["outputs"] = nlohmann::json::array();
    }
    nlohmann::json& config() { return j_["config"]; }
    void output(const std::string& p) { j_["outputs"].push_back(p); }
    void write(const fs::path& dir, unsigned workers) {
        j_["workers"] = workers;
        auto p = (dir / ("manifest_" + j_["command"].get<std::string>() + ".json")).string();
        write_json(j_, p);
        std::cerr << "manifest: " << p << "\n";
    }

private:
    nlohmann::json j_;
};

Lattice auto_lattice(const KernelFamily& fam, double t, std::size_t n, double L) {
    if (L <= 0.0) {
        L = 16.0;
        double need = 10.0 * std::sqrt(fam.sigma1() * std::max(t, 1.0)) + 8.0;
        while (L < need) L *= 2.0;
    }
    if (n == 0) n = fam.dimension() == 1 ? 4096 : 256;
    return Lattice::make(fam.dimension(), n, L);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nlheat: heat kernels of Af = a*f - f, large deviations, Monte Carlo"};
    app.require_subcommand(1);
    app.fallthrough();
    Common com;
    app.add_option("--workers", com.workers, "cap on worker threads (0 = all cores)");
    app.add_option("--out", com.out, "output directory or file (default $NLHEAT_OUT_DIR or .)");

    std::string kernel = "gaussian";
    auto add_kernel = [&](CLI::App* s) {
        s->add_option("--kernel", kernel, "descriptor path, inline JSON, or gaussian|gaussian2|laplace|tent");
    };

    auto* s_info = app.add_subcommand("kernel-info", "describe a kernel family");
    add_kernel(s_info);

    auto* s_hk = app.add_subcommand("heat-kernel", "v(x, t) on a lattice");
    add_kernel(s_hk);
    double hk_t = 1.0, hk_L = 0.0, hk_eps = 1e-12;
    std::size_t hk_n = 0;
    std::string hk_route = "both";
    bool hk_binary = false;
    s_hk->add_option("--t", hk_t, "time")->required();
    s_hk->add_option("--route", hk_route, "series|spectral|both")->check(CLI::IsMember({"series", "spectral", "both"}));
    s_hk->add_option("--n", hk_n, "points per axis (power of two)");
    s_hk->add_option("--L", hk_L, "half-width of the lattice box (default from sigma and t)");
    s_hk->add_option("--eps", hk_eps, "series truncation target");
    s_hk->add_flag("--binary", hk_binary, "also write the raw binary field");

    auto* s_rate = app.add_subcommand("rate-fn", "tabulate I and grad I along the first axis");
    add_kernel(s_rate);
    std::string rate_r;
    s_rate->add_option("--r", rate_r, "comma-separated |r| values")->required();

    auto* s_phi = app.add_subcommand("phi", "tabulate xi_r and Phi(r)");
    add_kernel(s_phi);
    std::string phi_r;
    bool phi_gauss = false;
    s_phi->add_option("--r", phi_r, "comma-separated r values")->required();
    s_phi->add_flag("--gaussian", phi_gauss, "closed Gaussian route (xi^2 ln xi = r^2/4)");

    auto* s_reg = app.add_subcommand("regimes", "regime diagram sweep over (|x|, t)");
    add_kernel(s_reg);
    std::string reg_t = "10,20,50,100", reg_x;
    double reg_band = 2.0;
    s_reg->add_option("--t", reg_t, "comma-separated times (> 1)");
    s_reg->add_option("--x", reg_x, "comma-separated |x| values (default: 48 log-spaced points up to 4 t_max)");
    s_reg->add_option("--band", reg_band, "region band constant");

    auto* s_sim = app.add_subcommand("simulate", "Monte Carlo of the jump process endpoint");
    std::string sim_cfg;
    double sim_t = -1.0;
    long sim_paths = -1;
    std::uint64_t sim_seed = 0;
    std::string sim_thr, sim_tilt;
    add_kernel(s_sim);
    s_sim->add_option("--config", sim_cfg, "simulation config JSON");
    s_sim->add_option("--t", sim_t, "time (overrides config)");
    s_sim->add_option("--paths", sim_paths, "number of paths (overrides config)");
    s_sim->add_option("--seed", sim_seed, "seed (overrides config)");
    s_sim->add_option("--thresholds", sim_thr, "tail thresholds; switches to the tail estimator");
    s_sim->add_option("--tilt", sim_tilt, "importance-sampling tilt, comma-separated");

    auto* s_val = app.add_subcommand("validate", "run the acceptance suite");
    std::string val_suite = "all", val_cfg, val_compare;
    std::uint64_t val_seed = 0;
    s_val->add_option("--suite", val_suite, "all|mass|routes|region_i|region_ii|region_iii|phi|rate|region_iv|chernoff|mc|repro");
    s_val->add_option("--config", val_cfg, "suite config JSON or a previous validate manifest");
    s_val->add_option("--compare", val_compare, "previous validation report; numbers must match bit for bit");
    s_val->add_option("--seed", val_seed, "seed (overrides config)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        set_max_workers(com.workers);
        if (*s_info) {
            Manifest man("kernel-info", argc, argv);
            auto out = resolve_out(com.out);
            nlohmann::json desc;
            auto fam = load_kernel(kernel, &desc);
            man.config() = {{"kernel", desc}};
            nlohmann::json j;
            j["name"] = fam.name();
            j["descriptor"] = desc;
            j["dimension"] = fam.dimension();
            j["tail_class"] = to_string(fam.tail_class());
            j["normalizer"] = fam.normalizer();
            j["sigma"] = fam.sigma1();
            j["c1"] = fam.c1();
            j["max_value"] = fam.max_value();
            j["support_radius"] = fam.bounded_support() ? nlohmann::json(fam.mu()) : nlohmann::json("inf");
            j["cumulant_domain_radius"] = std::isfinite(fam.gamma_bound()) ? nlohmann::json(fam.gamma_bound()) : nlohmann::json("inf");
            if (fam.tail_class() == TailClass::Gaussian || fam.tail_class() == TailClass::StretchedExp) {
                try {
                    auto cb = ChernoffBound::make(fam);
                    j["chernoff"] = {{"p", cb.p}, {"kappa", cb.kappa}, {"alpha", cb.alpha}};
                } catch (const Error&) {
                }
            }
            std::string path = out.primary.empty() ? (out.dir / "kernel_info.json").string() : out.primary;
            write_json(j, path);
            man.output(path);
            std::cout << j.dump(2) << "\n";
            man.write(out.dir, com.workers);
            return 0;
        }
        if (*s_hk) {
            Manifest man("heat-kernel", argc, argv);
            auto out = resolve_out(com.out);
            nlohmann::json desc;
            auto fam = load_kernel(kernel, &desc);
            auto lat = auto_lattice(fam, hk_t, hk_n, hk_L);
            lat.validate();  // fail fast
            man.config() = {{"kernel", desc}, {"t", hk_t}, {"route", hk_route}, {"lattice", {{"d", lat.d}, {"n", lat.n}, {"L", lat.L}}},
                            {"eps", hk_eps}};
            std::vector<HeatKernelResult> res;
            if (hk_route != "spectral") res.push_back(v_series(fam, lat, hk_t, hk_eps));
            if (hk_route != "series") res.push_back(v_spectral(fam, lat, hk_t));
            nlohmann::json summary;
            summary["t"] = hk_t;
            for (auto& r : res) {
                std::string name = "heat_kernel_" + to_string(r.route);
                auto p = (out.dir / (name + ".csv")).string();
                if (!out.primary.empty() && res.size() == 1) p = out.primary;
                r.write_csv(p);
                man.output(p);
                if (hk_binary) {
                    auto pb = (out.dir / (name + ".bin")).string();
                    write_binary(r.log_v, pb);
                    man.output(pb);
                }
                summary[to_string(r.route)] = {{"mass", r.mass()},
                                               {"mass_error", r.meta["mass_error"]},
                                               {"k_max", r.k_max},
                                               {"unresolved", r.unresolved},
                                               {"error_estimate", r.error_estimate},
                                               {"frames", r.frames.size()}};
            }
            if (res.size() == 2) {
                double md = 0.0;
                std::size_t cmp = 0;
                for (std::size_t i = 0; i < lat.size(); ++i) {
                    double a = res[0].log_v.values[i], b = res[1].log_v.values[i];
                    if (std::isfinite(a) && std::isfinite(b) && std::max(a, b) > -200.0) {
                        md = std::max(md, std::abs(a - b));
                        ++cmp;
                    }
                }
                summary["agreement"] = {{"max_abs_diff_ln_v", md}, {"points", cmp}, {"floor", -200.0}};
            }
            auto ps = (out.dir / "heat_kernel_summary.json").string();
            write_json(summary, ps);
            man.output(ps);
            std::cout << summary.dump(2) << "\n";
            man.write(out.dir, com.workers);
            return 0;
        }
        if (*s_rate) {
            Manifest man("rate-fn", argc, argv);
            auto out = resolve_out(com.out);
            nlohmann::json desc;
            auto fam = load_kernel(kernel, &desc);
            auto rs = parse_list(rate_r, "r");
            man.config() = {{"kernel", desc}, {"r", rs}};
            RateFunction rf(fam);
            std::string path = out.primary.empty() ? (out.dir / "rate.csv").string() : out.primary;
            CsvWriter csv(path, {"r", "I", "grad_I", "infinite", "boundary"});
            for (double r : rs) {
                Vec x = Vec::Zero(fam.dimension());
                x[0] = r;
                auto e = rf.evaluate(x);
                csv.cell(r).cell(e.value).cell(e.gradient.size() ? e.gradient[0] : std::nan(""));
                csv.cell((long long)e.infinite).cell((long long)e.boundary);
                csv.end_row();
            }
            man.output(path);
            man.write(out.dir, com.workers);
            return 0;
        }
        if (*s_phi) {
            Manifest man("phi", argc, argv);
            auto out = resolve_out(com.out);
            auto rs = parse_list(phi_r, "r");
            std::string path = out.primary.empty() ? (out.dir / "phi.csv").string() : out.primary;
            if (phi_gauss) {
                man.config() = {{"route", "gaussian_closed"}, {"r", rs}};
                CsvWriter csv(path, {"r", "xi_hat", "phi"});
                for (double r : rs) {
                    auto g = phi_gaussian(r);
                    csv.cell(r).cell(g.xi_hat).cell(g.phi);
                    csv.end_row();
                }
            } else {
                nlohmann::json desc;
                auto fam = load_kernel(kernel, &desc);
                man.config() = {{"route", "generic"}, {"kernel", desc}, {"r", rs}};
                PhiExponent pe(fam);
                CsvWriter csv(path, {"r", "xi", "phi", "residual"});
                for (double r : rs) {
                    auto e = pe.ray(r);
                    csv.cell(r).cell(e.xi).cell(e.phi).cell(e.residual);
                    csv.end_row();
                }
            }
            man.output(path);
            man.write(out.dir, com.workers);
            return 0;
        }
        if (*s_reg) {
            Manifest man("regimes", argc, argv);
            auto out = resolve_out(com.out);
            nlohmann::json desc;
            auto fam = load_kernel(kernel, &desc);
            auto ts = parse_list(reg_t, "t");
            for (double t : ts)
                if (!(t > 1.0)) throw ConfigError("regime sweep needs t > 1");
            std::vector<double> xs;
            if (reg_x.empty()) {
                double tmax = *std::max_element(ts.begin(), ts.end());
                for (int i = 0; i < 48; ++i) xs.push_back(std::pow(10.0, -0.5 + (std::log10(4.0 * tmax) + 0.5) * i / 47.0));
            } else {
                xs = parse_list(reg_x, "x");
            }
            man.config() = {{"kernel", desc}, {"t", ts}, {"x", xs}, {"band", reg_band}};
            auto rows = regime_sweep(fam, ts, xs, reg_band);
            std::string path = out.primary.empty() ? (out.dir / "regimes.csv").string() : out.primary;
            write_sweep_csv(rows, path);
            man.output(path);
            man.write(out.dir, com.workers);
            return 0;
        }
        if (*s_sim) {
            Manifest man("simulate", argc, argv);
            auto out = resolve_out(com.out);
            SimConfig cfg;
            if (!sim_cfg.empty()) {
                cfg = SimConfig::from_json(read_json(sim_cfg), fs::path(sim_cfg).parent_path().string());
                if (s_sim->count("--kernel")) cfg.family = load_kernel(kernel);
            } else {
                cfg.family = load_kernel(kernel);
            }
            if (sim_t >= 0.0) cfg.t = sim_t;
            if (sim_paths > 0) cfg.paths = sim_paths;
            if (s_sim->count("--seed")) cfg.seed = sim_seed;
            if (!sim_thr.empty()) {
                cfg.thresholds = parse_list(sim_thr, "threshold");
                cfg.estimator = EstimatorKind::Tail;
            }
            if (!sim_tilt.empty()) {
                auto g = parse_list(sim_tilt, "tilt");
                cfg.tilt = Eigen::Map<Vec>(g.data(), Eigen::Index(g.size()));
            }
            cfg.validate();
            man.config() = cfg.to_json();
            auto rep = cfg.estimator == EstimatorKind::Tail ? tilted_tail(cfg) : sample_paths(cfg);
            std::string path = out.primary.empty() ? (out.dir / "mc.csv").string() : out.primary;
            rep.write_csv(path);
            auto js = rep.to_json();
            auto ps = (out.dir / "mc_summary.json").string();
            write_json(js, ps);
            man.output(path);
            man.output(ps);
            std::cout << js.dump(2) << "\n";
            man.write(out.dir, com.workers);
            return 0;
        }
        if (*s_val) {
            Manifest man("validate", argc, argv);
            auto out = resolve_out(com.out);
            SuiteConfig cfg;
            if (!val_cfg.empty()) {
                auto j = read_json(val_cfg);
                if (j.contains("command") && j.contains("config")) {
                    if (j.value("command", std::string()) != "validate") throw ConfigError("manifest is not from validate");
                    if (!s_val->count("--suite")) val_suite = j["config"].value("suite", val_suite);
                    j = j["config"];
                }
                cfg = SuiteConfig::from_json(j);
            }
            if (s_val->count("--seed")) cfg.seed = val_seed;
            if (app.count("--workers")) cfg.workers = com.workers;
            auto mcfg = cfg.to_json();
            mcfg["suite"] = val_suite;
            man.config() = mcfg;
            auto rep = run_suite(val_suite, cfg);
            for (const auto& c : rep.criteria) std::cout << c.line() << "\n";
            auto j = rep.to_json();
            bool ok = rep.pass;
            if (!val_compare.empty()) {
                auto prev = read_json(val_compare);
                SuiteReport tmp = rep;
                nlohmann::ordered_json now = measured_numbers(tmp), before;
                for (auto& c : prev.at("criteria"))
                    for (auto& [k, v] : c.at("measured").items()) before[c.at("key").get<std::string>() + "." + k] = v;
                std::size_t diff = 0, seen = 0;
                for (auto& [k, v] : before.items()) {
                    if (k.rfind("repro.", 0) == 0) continue;
                    ++seen;
                    if (!now.contains(k) || now[k] != v) {
                        ++diff;
                        std::cout << "DIFF " << k << ": " << v << " -> " << (now.contains(k) ? now[k] : nlohmann::ordered_json()) << "\n";
                    }
                }
                j["compare"] = {{"against", val_compare}, {"numbers", seen}, {"differing", diff}};
                std::cout << (diff == 0 ? "PASS" : "FAIL") << " compare - " << seen - diff << "/" << seen
                          << " numbers bit-identical with " << val_compare << "\n";
                ok = ok && diff == 0;
            }
            std::string path = out.primary.empty() ? (out.dir / "validation_report.json").string() : out.primary;
            write_json(j, path);
            man.output(path);
            man.write(out.dir, cfg.workers);
            std::cout << (ok ? "validation passed" : "validation FAILED") << " -> " << path << "\n";
            return ok ? 0 : 1;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return 2;
    } catch (const ResourceError& e) {
        std::cerr << "resource limit: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
