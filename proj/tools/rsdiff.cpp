#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "rsdiff/autocorr.hpp"
#include "rsdiff/diffraction.hpp"
#include "rsdiff/entropy.hpp"
#include "rsdiff/geometry.hpp"
#include "rsdiff/occupation.hpp"
#include "rsdiff/substitution.hpp"
#include "rsdiff/verify.hpp"
#include "rsdiff/windows.hpp"

using namespace rsdiff;

namespace {

std::string g17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

RandomSubstitutionSpec spec_from_string(const std::string& text) {
    if (text.rfind("@", 0) == 0) { // @file: key-value config
        std::ifstream in(text.substr(1));
        if (!in) throw CLI::ValidationError("--spec", "cannot open config file");
        std::stringstream ss;
        ss << in.rdbuf();
        return parse_spec(ss.str());
    }
    return parse_spec(text);
}

Weights parse_weights(const std::vector<double>& w) {
    if (w.empty()) return {};
    if (w.size() != 4)
        throw CLI::ValidationError("--weights", "expected re_a,im_a,re_b,im_b");
    return {{w[0], w[1]}, {w[2], w[3]}};
}

std::ostream& open_out(std::ofstream& file, const std::string& path) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path);
    if (!file) throw CLI::ValidationError("--out", "cannot open output file");
    return file;
}

std::vector<double> make_grid(double k0, double k1, double step) {
    if (!(step > 0)) throw CLI::ValidationError("--step", "must be positive");
    std::vector<double> grid;
    for (double k = k0; k <= k1 + 1e-12; k += step) grid.push_back(k);
    return grid;
}

void cmd_generate(const std::string& spec_str, int level, uint64_t seed,
                  const std::string& out_path) {
    auto spec = spec_from_string(spec_str);
    std::string word = sample_patch_word(spec, level, seed);
    auto ps = realize(word, spec);
    std::ofstream file;
    write_pointset_csv(open_out(file, out_path), ps);
}

void cmd_spectrum(const std::string& spec_str, int bound, double cutoff,
                  const std::vector<double>& weights, double rho, double kmin, double kmax,
                  const std::string& out_path) {
    auto spec = spec_from_string(spec_str);
    Weights w = parse_weights(weights);
    auto sp = spectrum_enumerate(spec, bound, cutoff, w, rho, kmin, kmax);
    bool json_out = out_path.size() > 5 && out_path.substr(out_path.size() - 5) == ".json";
    std::ofstream file;
    std::ostream& os = open_out(file, out_path);
    if (json_out || out_path.empty() || out_path == "-") {
        nlohmann::json j;
        j["family"] = sp.family;
        j["params"] = sp.params;
        j["rho"] = sp.rho;
        j["weights"] = {sp.weights.ua.real(), sp.weights.ua.imag(), sp.weights.ub.real(),
                        sp.weights.ub.imag()};
        j["peaks"] = nlohmann::json::array();
        for (const auto& peak : sp.pure_point)
            j["peaks"].push_back(
                {{"k_float", peak.k}, {"k_index", peak.index.str()}, {"intensity", peak.intensity}});
        j["ac"] = {{"kind", sp.ac_kind}, {"truncation_tol", sp.ac_truncation_tol}};
        os << j.dump(2) << "\n";
    } else {
        os << "k_float,k_index,intensity\n";
        for (const auto& peak : sp.pure_point)
            os << g17(peak.k) << "," << peak.index.str() << "," << g17(peak.intensity) << "\n";
    }
}

void cmd_acdensity(const std::string& spec_str, double k0, double k1, double step,
                   const std::vector<double>& weights, double rho, const std::string& out_path) {
    auto spec = spec_from_string(spec_str);
    Weights w = parse_weights(weights);
    std::ofstream file;
    std::ostream& os = open_out(file, out_path);
    os << "k,phi\n";
    for (double k : make_grid(k0, k1, step))
        os << g17(k) << "," << g17(ac_density(spec, k, w, rho)) << "\n";
}

void cmd_mc(const std::string& spec_str, int level, size_t samples, uint64_t seed, double k0,
            double k1, double step, const std::vector<double>& weights,
            const std::string& out_path) {
    auto spec = spec_from_string(spec_str);
    Weights w = parse_weights(weights);
    auto grid = make_grid(k0, k1, step);
    auto stats = mc_sample(spec, level, grid, samples, seed, w);
    std::ofstream file;
    std::ostream& os = open_out(file, out_path);
    os << "k,mean_re,mean_im,var,bragg_est\n";
    for (size_t i = 0; i < grid.size(); ++i)
        os << g17(grid[i]) << "," << g17(stats.mean[i].real()) << "," << g17(stats.mean[i].imag())
           << "," << g17(stats.variance[i]) << "," << g17(stats.bragg_est[i]) << "\n";
}

void cmd_occupation(const std::string& spec_str, int level, const std::string& out_path) {
    auto spec = spec_from_string(spec_str);
    auto table = g_iterate(spec, level);
    std::ofstream file;
    std::ostream& os = open_out(file, out_path);
    if (spec.family == Family::PeriodDoubling) {
        os << "x,g_a,g_b,h_a,h_b\n";
        for (size_t x = 0; x < table.dyadic_a.size(); ++x) {
            double ga = table.dyadic_a[x];
            double ha = pd_a_limit(spec.probs[0], BigInt(static_cast<unsigned long>(x)));
            os << x << "," << g17(ga) << "," << g17(1 - ga) << "," << g17(ha) << ","
               << g17(1 - ha) << "\n";
        }
        return;
    }
    os << "x_float,x_u,x_v,g_a,g_b,h_a,h_b\n";
    for (const auto& [x, g] : table.values) {
        double xs = x.star().value();
        os << g17(x.value()) << "," << x.u().get_str() << "," << x.v().get_str() << ","
           << g17(g.first) << "," << g17(g.second) << "," << g17(h_eval(spec, xs, 'a')) << ","
           << g17(h_eval(spec, xs, 'b')) << "\n";
    }
}

void cmd_window(int m, double tol, size_t chaos_steps, std::optional<uint64_t> seed,
                const std::string& out_path) {
    if (chaos_steps > 0) {
        if (!seed) throw CLI::ValidationError("--seed", "required for --chaos");
        auto trace = chaos_game(m, {}, chaos_steps, *seed);
        std::ofstream file;
        std::ostream& os = open_out(file, out_path);
        os << "letter,y\n";
        for (const auto& [type, y] : trace.points) os << type << "," << g17(y) << "\n";
        return;
    }
    auto res = ifs_fixed_point(m, tol);
    auto print_iv = [&](const char* name, const IntervalUnion& u) {
        std::printf("%s = [%s, %s]  (exact: lo %s, hi %s)\n", name, g17(u.lo().value()).c_str(),
                    g17(u.hi().value()).c_str(), u.lo().str().c_str(), u.hi().str().c_str());
    };
    std::printf("converged after %d iterations\n", res.iterations);
    print_iv("W_a", res.wa);
    print_iv("W_b", res.wb);
}

void cmd_entropy(const std::string& family, bool exact, int estimate_n) {
    if (exact) {
        Family f;
        if (family == "fibonacci") f = Family::Fibonacci;
        else if (family == "perioddoubling") f = Family::PeriodDoubling;
        else throw CLI::ValidationError("--family", "exact entropy needs fibonacci|perioddoubling");
        std::printf("entropy_exact(%s) = %s\n", family.c_str(), g17(entropy_exact(f)).c_str());
        return;
    }
    auto spec = spec_from_string(family);
    auto [est, count] = entropy_estimate(spec, estimate_n);
    std::printf("entropy_estimate(n=%d) = %s  (|W_n| = %zu)\n", estimate_n, g17(est).c_str(),
                count);
}

void cmd_autocorr(const std::string& in_path, const std::string& spec_str, double maxz,
                  const std::vector<double>& window, bool letters, const std::string& out_path) {
    auto spec = spec_from_string(spec_str);
    std::ifstream in(in_path);
    if (!in) throw CLI::ValidationError("--in", "cannot open point-set csv");
    auto ps = read_pointset_csv(in, spec);

    WeightedComb comb;
    comb.points = ps.float_positions();
    comb.weights.assign(comb.points.size(), Complex{1.0, 0.0});
    if (window.size() == 2) {
        comb.window_lo = window[0];
        comb.window_hi = window[1];
    } else if (!comb.points.empty()) {
        comb.window_lo = comb.points.front();
        comb.window_hi = comb.points.back();
    }
    auto gamma = autocorrelation(comb, maxz);
    std::map<QuadNum, std::array<double, 4>> eta;
    if (letters) eta = pair_correlations(ps, maxz);

    std::ofstream file;
    std::ostream& os = open_out(file, out_path);
    os << "z,re,im,eta_aa,eta_ab,eta_ba,eta_bb\n";
    for (const auto& [z, v] : gamma) {
        std::array<double, 4> e{0, 0, 0, 0};
        if (letters) {
            for (const auto& [zq, ee] : eta)
                if (std::abs(zq.value() - z) < 1e-9) {
                    e = ee;
                    break;
                }
        }
        os << g17(z) << "," << g17(v.real()) << "," << g17(v.imag()) << "," << g17(e[0]) << ","
           << g17(e[1]) << "," << g17(e[2]) << "," << g17(e[3]) << "\n";
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"diffraction of locally randomised one-dimensional substitution tilings"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "sample a random inflation patch as a point set");
    std::string gen_spec = "fibonacci p=0.5", gen_out;
    int gen_level = 10;
    uint64_t gen_seed = 0;
    gen->add_option("--spec", gen_spec, "family spec, e.g. 'fibonacci p=0.5' or @config");
    gen->add_option("--level", gen_level, "inflation level");
    gen->add_option("--seed", gen_seed, "RNG seed")->required();
    gen->add_option("--out", gen_out, "output csv (default stdout)");

    // spectrum
    auto* spc = app.add_subcommand("spectrum", "enumerate the pure-point spectrum");
    std::string spc_spec = "fibonacci p=0.5", spc_out;
    int spc_bound = 8;
    double spc_cutoff = 1e-12, spc_rho = 0.0, spc_kmin = -4.0, spc_kmax = 4.0;
    std::vector<double> spc_w;
    spc->add_option("--spec", spc_spec, "family spec");
    spc->add_option("--height,--rmax", spc_bound, "index height (metallic) or max r (dyadic)");
    spc->add_option("--cutoff", spc_cutoff, "drop peaks below this intensity");
    spc->add_option("--weights", spc_w, "re_a,im_a,re_b,im_b")->delimiter(',');
    spc->add_option("--deform", spc_rho, "deformation parameter rho");
    spc->add_option("--kmin", spc_kmin, "window lower edge (metallic)");
    spc->add_option("--kmax", spc_kmax, "window upper edge (metallic)");
    spc->add_option("--out", spc_out, "output .json or .csv (default stdout json)");

    // acdensity
    auto* acd = app.add_subcommand("acdensity", "absolutely continuous density on a grid");
    std::string acd_spec = "fibonacci p=0.5", acd_out;
    double acd_k0 = 0.0, acd_k1 = 1.0, acd_step = 0.01, acd_rho = 0.0;
    std::vector<double> acd_w;
    acd->add_option("--spec", acd_spec, "family spec");
    acd->add_option("--k0", acd_k0, "grid start");
    acd->add_option("--k1", acd_k1, "grid end");
    acd->add_option("--step", acd_step, "grid step");
    acd->add_option("--weights", acd_w, "re_a,im_a,re_b,im_b")->delimiter(',');
    acd->add_option("--deform", acd_rho, "deformation parameter rho");
    acd->add_option("--out", acd_out, "output csv (default stdout)");

    // mc-diffract
    auto* mcd = app.add_subcommand("mc-diffract", "Monte Carlo exponential-sum statistics");
    std::string mcd_spec = "fibonacci p=0.5", mcd_out;
    int mcd_level = 12;
    size_t mcd_samples = 400;
    uint64_t mcd_seed = 0;
    double mcd_k0 = 0.0, mcd_k1 = 2.0, mcd_step = 0.05;
    std::vector<double> mcd_w;
    mcd->add_option("--spec", mcd_spec, "family spec");
    mcd->add_option("--level", mcd_level, "inflation level");
    mcd->add_option("--samples", mcd_samples, "number of independent patches");
    mcd->add_option("--seed", mcd_seed, "RNG seed")->required();
    mcd->add_option("--k0", mcd_k0, "grid start");
    mcd->add_option("--k1", mcd_k1, "grid end");
    mcd->add_option("--step", mcd_step, "grid step");
    mcd->add_option("--weights", mcd_w, "re_a,im_a,re_b,im_b")->delimiter(',');
    mcd->add_option("--out", mcd_out, "output csv (default stdout)");

    // occupation
    auto* occ = app.add_subcommand("occupation", "occupation probabilities and weight function");
    std::string occ_spec = "fibonacci p=0.5", occ_out;
    int occ_level = 8;
    occ->add_option("--spec", occ_spec, "family spec");
    occ->add_option("--level", occ_level, "iteration level");
    occ->add_option("--out", occ_out, "output csv (default stdout)");

    // window
    auto* win = app.add_subcommand("window", "covering-window IFS and chaos game");
    int win_m = 1;
    double win_tol = 1e-8;
    size_t win_chaos = 0;
    std::optional<uint64_t> win_seed;
    std::string win_out;
    win->add_option("--m", win_m, "noble means parameter");
    win->add_option("--tol", win_tol, "Hausdorff tolerance");
    win->add_option("--chaos", win_chaos, "emit a chaos-game trace of this many steps");
    win->add_option("--seed", win_seed, "RNG seed (required with --chaos)");
    win->add_option("--out", win_out, "trace csv (default stdout)");

    // entropy
    auto* ent = app.add_subcommand("entropy", "exact or empirical topological entropy");
    std::string ent_family = "fibonacci";
    bool ent_exact = false;
    int ent_estimate = 0;
    ent->add_option("--family", ent_family, "fibonacci|perioddoubling or a full spec");
    ent->add_flag("--exact", ent_exact, "closed-form/series value");
    ent->add_option("--estimate", ent_estimate, "legal-word estimate at length n");

    // autocorr
    auto* aco = app.add_subcommand("autocorr", "finite-patch autocorrelation");
    std::string aco_in, aco_spec = "fibonacci p=0.5", aco_out;
    double aco_maxz = 10.0;
    std::vector<double> aco_window;
    bool aco_letters = true;
    aco->add_option("--in", aco_in, "input point-set csv")->required();
    aco->add_option("--spec", aco_spec, "family spec (validates the point set)");
    aco->add_option("--maxz", aco_maxz, "largest difference to report");
    aco->add_option("--window", aco_window, "declared window lo,hi")->delimiter(',');
    aco->add_flag("--letters,!--no-letters", aco_letters, "emit per-letter pair correlations");
    aco->add_option("--out", aco_out, "output csv (default stdout)");

    // verify
    auto* ver = app.add_subcommand("verify", "run the acceptance suite");
    std::string ver_family;
    double ver_p = -1;
    ver->add_option("--family", ver_family, "restrict to one family");
    ver->add_option("--p", ver_p, "override the period doubling probability");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 2;
    }

    try {
        if (*gen) cmd_generate(gen_spec, gen_level, gen_seed, gen_out);
        if (*spc) cmd_spectrum(spc_spec, spc_bound, spc_cutoff, spc_w, spc_rho, spc_kmin, spc_kmax,
                               spc_out);
        if (*acd) cmd_acdensity(acd_spec, acd_k0, acd_k1, acd_step, acd_w, acd_rho, acd_out);
        if (*mcd) cmd_mc(mcd_spec, mcd_level, mcd_samples, mcd_seed, mcd_k0, mcd_k1, mcd_step,
                         mcd_w, mcd_out);
        if (*occ) cmd_occupation(occ_spec, occ_level, occ_out);
        if (*win) cmd_window(win_m, win_tol, win_chaos, win_seed, win_out);
        if (*ent) cmd_entropy(ent_family, ent_exact, ent_estimate);
        if (*aco) cmd_autocorr(aco_in, aco_spec, aco_maxz, aco_window, aco_letters, aco_out);
        if (*ver) {
            VerifyOptions opts;
            if (!ver_family.empty()) opts.family = ver_family;
            if (ver_p >= 0) opts.p_override = ver_p;
            bool ok = print_acceptance_report(run_acceptance(opts));
            return ok ? 0 : 1;
        }
    } catch (const GuardError& e) {
        std::fprintf(stderr, "guard tripped: %s\n", e.what());
        return 3;
    } catch (const CLI::ValidationError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
