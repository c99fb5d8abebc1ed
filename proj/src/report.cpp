#include "lenstp/report.hpp"

#include <cstdio>
#include <fstream>

#include "lenstp/errors.hpp"

namespace lenstp {

namespace {
Json point_json(const CVec& z) {
    Json out = Json::array();
    for (const Complex& c : z) out.push_back(Json::array({c.real(), c.imag()}));
    return out;
}
} // namespace

Json setting_json(const LensSetting& setting) {
    return Json{{"n", setting.n}, {"k", setting.k}, {"weights", setting.weights}};
}

Json records_json(const std::vector<TranslatedPointRecord>& records) {
    Json out = Json::array();
    for (const TranslatedPointRecord& r : records) {
        Json j{{"tau", r.tau},
               {"residual", r.residual},
               {"source", r.source == TranslatedPointRecord::Source::Direct ? "direct" : "genfun"},
               {"multiplicity", r.multiplicity},
               {"point", point_json(r.point)},
               {"orbit_rep", point_json(r.orbit_rep)}};
        if (r.source == TranslatedPointRecord::Source::GenFun) {
            j["critical_value"] = r.critical_value;
            j["closure_defect"] = r.closure_defect;
        }
        out.push_back(std::move(j));
    }
    return out;
}

Json clusters_json(const ShiftSpectrum& spectrum) {
    Json out = Json::array();
    for (const ShiftCluster& c : spectrum.clusters) {
        out.push_back(Json{{"center", c.center},
                           {"count", static_cast<int>(c.members.size())},
                           {"radius", c.radius},
                           {"distinct_orbits", c.distinct_orbits},
                           {"non_isolated", c.non_isolated},
                           {"members", c.members}});
    }
    return out;
}

Json verdict_json(const Verdict& v) {
    return Json{{"status", v.status == Verdict::Status::Pass ? "PASS" : "ATTENTION"},
                {"bound", v.bound},
                {"clusters", v.cluster_count},
                {"degenerate", v.degenerate},
                {"non_isolated_families", v.non_isolated_families},
                {"note", v.note}};
}

Json scan_diagnostics_json(const ScanDiagnostics& d) {
    return Json{{"total_starts", d.total_starts},
                {"converged", d.converged},
                {"non_converged", d.non_converged},
                {"dropped_residual", d.dropped_residual},
                {"records", d.records}};
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

Json provenance_json(const Json& canonical_config, std::uint64_t seed) {
    return Json{{"tool", "lenstp"},
                {"version", "0.1.0"},
                {"config_hash", fnv1a_hex(canonical_config.dump())},
                {"seed", seed}};
}

Json Report::to_json() const {
    return Json{{"setting", setting},       {"records", records},
                {"shift_clusters", shift_clusters}, {"verdict", verdict},
                {"diagnostics", diagnostics},       {"provenance", provenance}};
}

std::string Report::to_string() const { return to_json().dump(2) + "\n"; }

void Report::write_json(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write report to '" + path + "'");
    out << to_string();
}

namespace {
std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}
} // namespace

void Report::write_csv(const std::string& stem) const {
    {
        std::ofstream out(stem + "_records.csv", std::ios::binary);
        if (!out) throw ConfigError("cannot write CSV to '" + stem + "_records.csv'");
        out << "tau,residual,source,multiplicity";
        if (!records.empty()) {
            const std::size_t n = records[0]["point"].size();
            for (std::size_t j = 0; j < n; ++j)
                out << ",re" << j + 1 << ",im" << j + 1;
        }
        out << "\n";
        for (const Json& r : records) {
            out << format_double(r["tau"].get<double>()) << ","
                << format_double(r["residual"].get<double>()) << ","
                << r["source"].get<std::string>() << "," << r["multiplicity"].get<int>();
            for (const Json& c : r["point"])
                out << "," << format_double(c[0].get<double>()) << ","
                    << format_double(c[1].get<double>());
            out << "\n";
        }
    }
    {
        std::ofstream out(stem + "_clusters.csv", std::ios::binary);
        if (!out) throw ConfigError("cannot write CSV to '" + stem + "_clusters.csv'");
        out << "center,count,radius,distinct_orbits,non_isolated\n";
        for (const Json& c : shift_clusters) {
            out << format_double(c["center"].get<double>()) << "," << c["count"].get<int>() << ","
                << format_double(c["radius"].get<double>()) << ","
                << c["distinct_orbits"].get<int>() << ","
                << (c["non_isolated"].get<bool>() ? 1 : 0) << "\n";
        }
    }
}

} // namespace lenstp
