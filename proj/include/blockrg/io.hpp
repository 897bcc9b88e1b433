#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "blockrg/constrained.hpp"
#include "blockrg/counting.hpp"
#include "blockrg/jacobian.hpp"
#include "blockrg/lattice.hpp"
#include "blockrg/spin.hpp"

namespace blockrg {

using nlohmann::json;

// Doubles are serialized via shortest round-trip formatting (nlohmann uses
// Grisu/ryu-style output), so load(save(x)) is bit exact.

inline std::string geometry_name(Geometry g) {
    switch (g) {
        case Geometry::square_1d: return "square_1d";
        case Geometry::square_2d: return "square_2d";
        case Geometry::triangular_2d: return "triangular_2d";
    }
    return "?";
}

inline Geometry geometry_from_name(const std::string& s) {
    if (s == "square_1d") return Geometry::square_1d;
    if (s == "square_2d") return Geometry::square_2d;
    if (s == "triangular_2d") return Geometry::triangular_2d;
    throw config_error("unknown geometry: " + s);
}

inline std::string boundary_name(Boundary b) {
    switch (b) {
        case Boundary::free_: return "free";
        case Boundary::periodic: return "periodic";
        case Boundary::fixed: return "fixed";
    }
    return "?";
}

inline Boundary boundary_from_name(const std::string& s) {
    if (s == "free") return Boundary::free_;
    if (s == "periodic") return Boundary::periodic;
    if (s == "fixed") return Boundary::fixed;
    throw config_error("unknown boundary: " + s);
}

inline json lattice_to_json(const Lattice& lat) {
    json j;
    j["geometry"] = geometry_name(lat.spec().geometry);
    j["extent"] = lat.spec().extent;
    j["boundary"] = boundary_name(lat.spec().boundary);
    if (!lat.spec().boundary_spins.empty()) {
        json bs = json::array();
        for (const auto& [c, s] : lat.spec().boundary_spins)
            bs.push_back({{"coord", c}, {"spin", s}});
        j["boundary_spins"] = bs;
    }
    return j;
}

inline Lattice lattice_from_json(const json& j) {
    LatticeSpec spec;
    spec.geometry = geometry_from_name(j.at("geometry").get<std::string>());
    spec.extent = j.at("extent").get<std::vector<int>>();
    spec.boundary = boundary_from_name(j.at("boundary").get<std::string>());
    if (j.contains("boundary_spins"))
        for (const auto& e : j.at("boundary_spins"))
            spec.boundary_spins[e.at("coord").get<Coord>()] = e.at("spin").get<int>();
    return build_lattice(spec);
}

// Couplings are keyed by the sorted list of site coordinates.
inline json interaction_to_json(const Interaction& J, const Lattice& lat) {
    json j;
    j["lattice"] = lattice_to_json(lat);
    json terms = json::array();
    for (const auto& [X, v] : J.couplings) {
        json sites = json::array();
        for (int s : X) sites.push_back(lat.coord(s));
        terms.push_back({{"sites", sites}, {"value", v}});
    }
    j["couplings"] = terms;
    return j;
}

inline Interaction interaction_from_json(const json& j, const Lattice& lat) {
    Interaction J;
    for (const auto& t : j.at("couplings")) {
        SiteSet X;
        for (const auto& c : t.at("sites")) X.push_back(lat.index(c.get<Coord>()));
        J.couplings[canonical(std::move(X))] += t.at("value").get<double>();
    }
    return J;
}

inline std::string sites_encoding(const SiteSet& X, const Lattice& lat) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < X.size(); ++i) {
        Coord c = lat.coord(X[i]);
        os << (i ? ";" : "") << "(" << c[0] << "," << c[1] << ")";
    }
    os << "]";
    return os.str();
}

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string jacobian_to_csv(const JacobianMatrix& m, const Lattice& image,
                                   const Lattice& lat) {
    std::ostringstream os;
    os << "Z_encoding,W_encoding,l_distance,value\n";
    for (const auto& e : m.entries)
        os << sites_encoding(e.Z, image) << "," << sites_encoding(e.W, lat) << ","
           << format_double(e.l_dist) << "," << format_double(e.value) << "\n";
    return os.str();
}

inline json band_profile_to_json(const BandProfile& p) {
    json j;
    j["bins"] = p.bins;
    j["alpha"] = p.alpha;
    j["lambda"] = p.lambda;
    j["intercept"] = p.intercept;
    j["residual"] = p.residual;
    j["reliable"] = p.reliable;
    return j;
}

inline json hypothesis_report_to_json(const HypothesisReport& r) {
    json j;
    j["m_hyp"] = r.m_hyp;
    j["c_hyp"] = r.c_hyp;
    j["holds"] = r.holds;
    json samples = json::array();
    for (const auto& s : r.samples)
        samples.push_back({{"volume_id", s.volume_id},
                           {"tau_id", s.tau_id},
                           {"sigma_prime_id", s.sigma_prime_id},
                           {"i", s.i},
                           {"j", s.j},
                           {"dist", s.dist},
                           {"corr", s.corr}});
    j["samples"] = samples;
    return j;
}

inline std::string hypothesis_samples_to_csv(const HypothesisReport& r) {
    std::ostringstream os;
    os << "volume_id,tau_id,sigma_prime_id,i,j,dist,corr\n";
    for (const auto& s : r.samples)
        os << s.volume_id << "," << s.tau_id << "," << s.sigma_prime_id << "," << s.i << ","
           << s.j << "," << format_double(s.dist) << "," << format_double(s.corr) << "\n";
    return os.str();
}

inline std::string series_to_csv(const SeriesCoeffs& s) {
    std::ostringstream os;
    os << "n,numerator,denominator,value\n";
    for (int n = 1; n <= s.size(); ++n)
        os << n << "," << s.coeff(n).get_num().get_str() << ","
           << s.coeff(n).get_den().get_str() << "," << format_double(s.coeff(n).get_d())
           << "\n";
    return os.str();
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw config_error("cannot open for writing: " + path);
    f << text;
}

inline json read_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw config_error("cannot open: " + path);
    return json::parse(f);
}

}  // namespace blockrg
