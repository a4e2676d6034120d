#pragma once

#include "runner/config.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace symreeb::runner {

json to_json(const Vec4& v);
json to_json(const IndexReport& r);
json to_json(const SymmetryMatch& m);
/// Orbit summary without the sampled trajectory.
json to_json(const OrbitRecord& o);
json to_json(const ReturnSample& s);
json to_json(const PredicateReport& p);
json to_json(const LinkingResult& l);
json to_json(const SelfLinkingResult& l);

/// Minimal CSV writer: quotes fields containing separators or quotes.
class CsvWriter {
public:
    explicit CsvWriter(std::ostream& os) : os_(os) {}
    void row(const std::vector<std::string>& fields);

private:
    std::ostream& os_;
};

/// Round-trip formatting for doubles (17 significant digits).
std::string num(double v);
std::string num(const std::optional<double>& v);
std::string num(const std::optional<int>& v);

/// (q1, q2) projections of closed orbits as polylines.
void write_orbit_svg(std::ostream& os, const std::vector<OrbitRecord>& orbits);

std::string sha256_file(const std::string& path);

}  // namespace symreeb::runner
