// Command-line front end: each subcommand reads a JSON config, runs one
// pipeline from the library, and writes JSON/CSV artifacts.

#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "blockrg/cluster.hpp"
#include "blockrg/constrained.hpp"
#include "blockrg/counting.hpp"
#include "blockrg/errors.hpp"
#include "blockrg/io.hpp"
#include "blockrg/jacobian.hpp"
#include "blockrg/rg_map.hpp"
#include "blockrg/rng.hpp"

namespace {

using blockrg::json;

constexpr int kExitOk = 0;
constexpr int kExitSchema = 2;
constexpr int kExitCap = 3;
constexpr int kExitDivergent = 4;

blockrg::Lattice lattice_from_config(const json& cfg) {
    return blockrg::lattice_from_json(cfg.at("lattice"));
}

blockrg::Kernel kernel_from_config(const json& cfg) {
    blockrg::Kernel T;
    std::string k = cfg.at("kernel").at("kind").get<std::string>();
    if (k == "decimation") T.kind = blockrg::KernelKind::decimation;
    else if (k == "kadanoff") T.kind = blockrg::KernelKind::kadanoff;
    else if (k == "majority") T.kind = blockrg::KernelKind::majority;
    else if (k == "trivial") T.kind = blockrg::KernelKind::trivial;
    else throw blockrg::config_error("unknown kernel kind: " + k);
    if (cfg.at("kernel").contains("kappa"))
        T.kappa = cfg.at("kernel").at("kappa").get<double>();
    return T;
}

blockrg::Blocking blocking_from_config(const json& cfg, const blockrg::Lattice& lat,
                                       const blockrg::Kernel& T) {
    if (T.kind == blockrg::KernelKind::trivial) return blockrg::make_trivial_blocking();
    if (lat.spec().geometry == blockrg::Geometry::triangular_2d)
        return blockrg::make_triangle_blocking(lat);
    int b = cfg.value("b", 2);
    return blockrg::make_block_geometry(lat, b);
}

struct Common {
    std::string config_path;
    std::string out_path = "out.json";
    std::uint64_t seed = 1;
    int threads = 1;
    bool validate_only = false;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config_path, "JSON config file")->required();
    cmd->add_option("--out", c.out_path, "output path");
    cmd->add_option("--seed", c.seed, "RNG seed");
    cmd->add_option("--threads", c.threads, "worker threads");
    cmd->add_flag("--validate-only", c.validate_only, "check the config and exit");
}

int run_renormalize(const Common& c) {
    json cfg = blockrg::read_json(c.config_path);
    auto lat = lattice_from_config(cfg);
    auto J = blockrg::interaction_from_json(cfg.at("interaction"), lat);
    auto T = kernel_from_config(cfg);
    auto blocking = blocking_from_config(cfg, lat, T);
    if (c.validate_only) {
        std::cout << "config ok: " << lat.size() << " sites, " << blocking.n_blocks()
                  << " blocks\n";
        return kExitOk;
    }
    auto res = blockrg::renormalize(J, T, blocking, lat, {});
    json out = blockrg::interaction_to_json(res.j_prime, res.image);
    blockrg::write_text(c.out_path, out.dump(2) + "\n");
    std::cout << "wrote " << c.out_path << "\n";
    return kExitOk;
}

int run_flow(const Common& c) {
    json cfg = blockrg::read_json(c.config_path);
    auto lat = lattice_from_config(cfg);
    auto J = blockrg::interaction_from_json(cfg.at("interaction"), lat);
    auto T = kernel_from_config(cfg);
    int b = cfg.value("b", 2);
    int steps = cfg.value("steps", 3);
    double drop_tol = cfg.value("drop_tol", 0.0);
    if (c.validate_only) {
        std::cout << "config ok: " << steps << " steps from " << lat.size() << " sites\n";
        return kExitOk;
    }
    auto flow = blockrg::rg_flow(J, T, b, steps, lat, {}, drop_tol);
    json out = json::array();
    for (const auto& st : flow)
        out.push_back({{"interaction", blockrg::interaction_to_json(st.j, st.lattice)},
                       {"norm_proxy", st.norm_proxy},
                       {"truncation_residual", st.truncation_residual}});
    blockrg::write_text(c.out_path, out.dump(2) + "\n");
    std::cout << "wrote " << c.out_path << "\n";
    return kExitOk;
}

int run_jacobian(const Common& c) {
    json cfg = blockrg::read_json(c.config_path);
    auto lat = lattice_from_config(cfg);
    auto J = blockrg::interaction_from_json(cfg.at("interaction"), lat);
    auto T = kernel_from_config(cfg);
    auto blocking = blocking_from_config(cfg, lat, T);
    std::vector<blockrg::SiteSet> zs, ws;
    for (const auto& e : cfg.at("image_sets")) {
        blockrg::SiteSet Z;
        for (const auto& co : e) Z.push_back(blocking.image.index(co.get<blockrg::Coord>()));
        zs.push_back(blockrg::canonical(std::move(Z)));
    }
    for (const auto& e : cfg.at("source_sets")) {
        blockrg::SiteSet W;
        for (const auto& co : e) W.push_back(lat.index(co.get<blockrg::Coord>()));
        ws.push_back(blockrg::canonical(std::move(W)));
    }
    if (c.validate_only) {
        std::cout << "config ok: " << zs.size() << " x " << ws.size() << " entries\n";
        return kExitOk;
    }
    int b = cfg.value("b", 2);
    blockrg::BlockScheme scheme{b, cfg.value("L", 2), 3};
    auto m = blockrg::jacobian_matrix(J, T, blocking, lat, zs, ws, scheme, b, {});
    blockrg::write_text(c.out_path, blockrg::jacobian_to_csv(m, blocking.image, lat));
    std::cout << "wrote " << c.out_path << "\n";
    return kExitOk;
}

int run_band_scan(const Common& c) {
    json cfg = blockrg::read_json(c.config_path);
    blockrg::BandScanConfig bc;
    bc.width = cfg.value("width", 8);
    bc.height = cfg.value("height", 8);
    bc.beta = cfg.value("beta", 0.35);
    bc.b = cfg.value("b", 2);
    bc.threads = c.threads;
    if (c.validate_only) {
        std::cout << "config ok: " << bc.width << "x" << bc.height << " at beta " << bc.beta
                  << "\n";
        return kExitOk;
    }
    auto m = blockrg::band_scan_decimation_2d(bc);
    auto profile = blockrg::band_profile(m);
    json out = blockrg::band_profile_to_json(profile);
    blockrg::write_text(c.out_path, out.dump(2) + "\n");
    std::cout << "wrote " << c.out_path << "\n";
    return kExitOk;
}

int run_hypothesis(const Common& c) {
    json cfg = blockrg::read_json(c.config_path);
    std::vector<blockrg::HypothesisInstance> instances;
    int vid = 0;
    for (const auto& inst : cfg.at("instances")) {
        blockrg::HypothesisInstance h;
        h.lat = blockrg::lattice_from_json(inst.at("lattice"));
        h.J = blockrg::interaction_from_json(inst.at("interaction"), h.lat);
        h.kernel = kernel_from_config(inst);
        h.blocking = blocking_from_config(inst, h.lat, h.kernel);
        h.volume_id = std::to_string(vid++);
        h.tau_id = inst.value("tau_id", std::string("as-given"));
        instances.push_back(std::move(h));
    }
    blockrg::HypothesisOptions opt;
    opt.seed = c.seed;
    opt.sigma_prime_samples = cfg.value("sigma_prime_samples", 64);
    opt.beta_for_transfer = cfg.value("beta", 0.0);
    if (c.validate_only) {
        std::cout << "config ok: " << instances.size() << " instances\n";
        return kExitOk;
    }
    auto rep = blockrg::hypothesis_check(instances, opt);
    blockrg::write_text(c.out_path, blockrg::hypothesis_report_to_json(rep).dump(2) + "\n");
    blockrg::write_text(c.out_path + ".csv", blockrg::hypothesis_samples_to_csv(rep));
    std::cout << "wrote " << c.out_path << " (holds=" << (rep.holds ? "yes" : "no") << ")\n";
    return kExitOk;
}

int run_expand(const Common& c) {
    json cfg = blockrg::read_json(c.config_path);
    auto lat = lattice_from_config(cfg);
    auto J = blockrg::interaction_from_json(cfg.at("interaction"), lat);
    auto T = kernel_from_config(cfg);
    auto blocking = blocking_from_config(cfg, lat, T);
    blockrg::BlockScheme scheme{cfg.value("b", 2), cfg.value("L", 2), 3};
    blockrg::Config sp = cfg.value("sigma_prime", 0u);
    if (c.validate_only) {
        std::cout << "config ok: L=" << scheme.L << "\n";
        return kExitOk;
    }
    auto res = blockrg::iterated_block_sum(J, T, blocking, lat, scheme, sp);
    auto acts = blockrg::polymer_activities(res);
    auto w = blockrg::polymer_weights(res, acts, cfg.value("n_max", 12));
    double recon = blockrg::cluster_reconstruction(res, w);
    json out;
    out["direct_sum"] = res.direct_sum;
    out["reconstructed"] = recon;
    out["epsilon_L"] = blockrg::epsilon_L(acts);
    out["n_long_range"] = acts.size();
    out["n_polymers"] = w.supports.size();
    blockrg::write_text(c.out_path, out.dump(2) + "\n");
    std::cout << "wrote " << c.out_path << "\n";
    return kExitOk;
}

int run_kp_check(const Common& c) {
    json cfg = blockrg::read_json(c.config_path);
    auto lat = lattice_from_config(cfg);
    auto J = blockrg::interaction_from_json(cfg.at("interaction"), lat);
    auto T = kernel_from_config(cfg);
    auto blocking = blocking_from_config(cfg, lat, T);
    blockrg::BlockScheme scheme{cfg.value("b", 2), cfg.value("L", 2), 3};
    double M = cfg.value("M", 2.0);
    if (c.validate_only) {
        std::cout << "config ok: M=" << M << "\n";
        return kExitOk;
    }
    auto res = blockrg::iterated_block_sum(J, T, blocking, lat, scheme,
                                           cfg.value("sigma_prime", 0u));
    auto acts = blockrg::polymer_activities(res);
    auto w = blockrg::polymer_weights(res, acts, cfg.value("n_max", 12));
    auto rep = blockrg::kp_condition_check(w.supports, w.v, M, res.bar, scheme.a);
    json out;
    out["pass"] = rep.pass;
    json sites = json::array();
    for (const auto& s : rep.sites)
        sites.push_back({{"site", s.site}, {"lhs", s.lhs}, {"margin", s.margin},
                         {"pass", s.pass}});
    out["sites"] = sites;
    blockrg::write_text(c.out_path, out.dump(2) + "\n");
    std::cout << "wrote " << c.out_path << " (pass=" << (rep.pass ? "yes" : "no") << ")\n";
    return kExitOk;
}

int run_count(const Common& c) {
    json cfg = blockrg::read_json(c.config_path);
    blockrg::CountingParams prm;
    prm.p = cfg.value("p", 9);
    prm.r = mpq_class(cfg.value("r_num", 1), cfg.value("r_den", 1));
    prm.c_link = mpq_class(cfg.value("c_num", 1), cfg.value("c_den", 1));
    prm.M = mpq_class(cfg.value("M_num", 2), cfg.value("M_den", 1));
    prm.validate();
    int n_max = cfg.value("n_max", 12);
    if (c.validate_only) {
        std::cout << "config ok: p=" << prm.p << ", n_max=" << n_max << "\n";
        return kExitOk;
    }
    auto rec = blockrg::recursion_coeffs(prm, n_max);
    blockrg::write_text(c.out_path, blockrg::series_to_csv(rec));
    if (cfg.contains("epsilon")) {
        double eps = cfg.at("epsilon").get<double>();
        std::cout << "tail_sum(" << eps << ") = " << blockrg::tail_sum(prm, eps) << "\n";
    }
    std::cout << "wrote " << c.out_path << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"block-spin renormalization toolkit"};
    app.require_subcommand(1);

    Common c;
    std::string mode;
    for (const char* name : {"renormalize", "flow", "jacobian", "band-scan",
                             "hypothesis-check", "expand", "kp-check", "count"}) {
        auto* cmd = app.add_subcommand(name);
        add_common(cmd, c);
        cmd->callback([&mode, name] { mode = name; });
    }

    CLI11_PARSE(app, argc, argv);

    try {
        if (mode == "renormalize") return run_renormalize(c);
        if (mode == "flow") return run_flow(c);
        if (mode == "jacobian") return run_jacobian(c);
        if (mode == "band-scan") return run_band_scan(c);
        if (mode == "hypothesis-check") return run_hypothesis(c);
        if (mode == "expand") return run_expand(c);
        if (mode == "kp-check") return run_kp_check(c);
        if (mode == "count") return run_count(c);
    } catch (const blockrg::cap_exceeded& e) {
        std::cerr << "cap exceeded: " << e.what() << "\n";
        return kExitCap;
    } catch (const blockrg::divergent_expansion& e) {
        std::cerr << "divergent expansion: " << e.what() << "\n";
        return kExitDivergent;
    } catch (const blockrg::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitSchema;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitSchema;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
