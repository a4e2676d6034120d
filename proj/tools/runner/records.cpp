#include "runner/records.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace symreeb::runner {

json to_json(const Vec4& v) { return json::array({v(0), v(1), v(2), v(3)}); }

json to_json(const IndexReport& r) {
    json j;
    j["mu_cz"] = r.mu_cz ? json(*r.mu_cz) : json(nullptr);
    j["mu_rs"] = r.mu_rs ? json(*r.mu_rs) : json(nullptr);
    j["alpha"] = r.alpha;
    j["p"] = r.p ? json(*r.p) : json(nullptr);
    j["rotation_number"] = r.rotation_number ? json(*r.rotation_number) : json(nullptr);
    j["residuals"] = r.residuals;
    return j;
}

json to_json(const SymmetryMatch& m) {
    return {{"label", m.label},
            {"anti_symplectic", m.anti_symplectic},
            {"shift", m.shift},
            {"residual", m.residual}};
}

json to_json(const OrbitRecord& o) {
    json j;
    j["period"] = o.period;
    j["energy"] = o.energy;
    j["x0"] = to_json(o.trajectory.states.front());
    j["sym_type"] = to_string(o.sym_type);
    j["kang_type"] = o.kang_type ? json(*o.kang_type) : json(nullptr);
    j["symmetry"] = json::array();
    for (const auto& m : o.symmetry) j["symmetry"].push_back(to_json(m));
    j["covering_number"] = o.covering_number;
    j["closure_residual"] = o.closure_residual;
    j["energy_drift"] = o.trajectory.energy_drift;
    j["chord"] = {{"start", o.start_involution},
                  {"end", o.end_involution},
                  {"fraction", to_string(o.fraction)},
                  {"time", o.chord_time},
                  {"copies", o.chord_copies},
                  {"endpoint_residual", o.endpoint_residual},
                  {"assembly_residual", o.assembly_residual},
                  {"newton_iterations", o.newton_iterations}};
    j["chart"] = o.chart;
    j["min_collision_distance"] = o.min_collision_distance;
    j["near_collision"] = o.near_collision;
    j["indices"] = json::object();
    for (const auto& [k, r] : o.indices) j["indices"][k] = to_json(r);
    j["index_errors"] = o.index_errors;
    return j;
}

json to_json(const ReturnSample& s) {
    return {{"point", {s.point(0), s.point(1)}},
            {"tau", s.tau},
            {"image", {s.image(0), s.image(1)}},
            {"half_image", {s.half_image(0), s.half_image(1)}},
            {"landing_residual", s.landing_residual},
            {"half_residual", s.half_residual},
            {"min_phase_rate", s.min_phase_rate}};
}

json to_json(const PredicateReport& p) {
    json j;
    j["simply_covered"] = to_string(p.simply_covered);
    j["self_linking_minus_one"] = to_string(p.self_linking_minus_one);
    j["cz_at_least_three"] = to_string(p.cz_at_least_three);
    j["rs_at_least_three_halves"] = to_string(p.rs_at_least_three_halves);
    j["symmetric"] = to_string(p.symmetric);
    j["doubly_symmetric"] = to_string(p.doubly_symmetric);
    j["mu_cz"] = p.mu_cz ? json(*p.mu_cz) : json(nullptr);
    j["mu_rs"] = p.mu_rs ? json(*p.mu_rs) : json(nullptr);
    j["sl"] = p.sl ? json(*p.sl) : json(nullptr);
    j["notes"] = p.notes;
    j["caveat"] = p.caveat;
    return j;
}

json to_json(const LinkingResult& l) {
    return {{"value", l.value}, {"raw", l.raw}, {"min_distance", l.min_distance}};
}

json to_json(const SelfLinkingResult& l) {
    return {{"value", l.value}, {"raw", l.raw}, {"scale", l.scale}, {"cover", l.cover}};
}

void CsvWriter::row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) os_ << ',';
        const std::string& f = fields[i];
        if (f.find_first_of(",\"\n") == std::string::npos) {
            os_ << f;
            continue;
        }
        os_ << '"';
        for (char c : f) {
            if (c == '"') os_ << '"';
            os_ << c;
        }
        os_ << '"';
    }
    os_ << '\n';
}

std::string num(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

std::string num(const std::optional<double>& v) { return v ? num(*v) : ""; }
std::string num(const std::optional<int>& v) { return v ? std::to_string(*v) : ""; }

void write_orbit_svg(std::ostream& os, const std::vector<OrbitRecord>& orbits) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& o : orbits)
        for (const auto& x : o.trajectory.states) {
            lo = std::min({lo, x(0), x(2)});
            hi = std::max({hi, x(0), x(2)});
        }
    if (!(hi > lo)) {
        lo = -1;
        hi = 1;
    }
    const double size = 480, pad = 20, scale = (size - 2 * pad) / (hi - lo);
    static const std::array<const char*, 6> colours = {"#1f77b4", "#d62728", "#2ca02c",
                                                       "#9467bd", "#ff7f0e", "#17becf"};
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"480\" viewBox=\"0 0 480 480\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << std::fixed << std::setprecision(2);
    for (std::size_t i = 0; i < orbits.size(); ++i) {
        os << "<polyline fill=\"none\" stroke=\"" << colours[i % colours.size()] << "\" points=\"";
        for (const auto& x : orbits[i].trajectory.states)
            os << pad + (x(0) - lo) * scale << ',' << size - pad - (x(2) - lo) * scale << ' ';
        os << "\"/>\n";
    }
    os << "</svg>\n";
}

std::string sha256_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ValidationError("cannot read '" + path + "' for hashing");
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    std::array<char, 1 << 15> buf;
    while (f) {
        f.read(buf.data(), buf.size());
        EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(f.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return os.str();
}

}  // namespace symreeb::runner
