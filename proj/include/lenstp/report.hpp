#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "lenstp/solve.hpp"

namespace lenstp {

using Json = nlohmann::ordered_json;

/// Report with the stable top-level key contract:
/// setting, records, shift_clusters, verdict, diagnostics, provenance.
struct Report {
    Json setting = Json::object();
    Json records = Json::array();
    Json shift_clusters = Json::array();
    Json verdict = Json::object();
    Json diagnostics = Json::object();
    Json provenance = Json::object();

    Json to_json() const;
    std::string to_string() const;  // byte-stable serialization
    void write_json(const std::string& path) const;
    /// Emits <stem>_records.csv and <stem>_clusters.csv plot data.
    void write_csv(const std::string& stem) const;
};

Json setting_json(const LensSetting& setting);
Json records_json(const std::vector<TranslatedPointRecord>& records);
Json clusters_json(const ShiftSpectrum& spectrum);
Json verdict_json(const Verdict& verdict);
Json scan_diagnostics_json(const ScanDiagnostics& diag);

/// FNV-1a over the serialized bytes; stable across platforms.
std::string fnv1a_hex(const std::string& bytes);

Json provenance_json(const Json& canonical_config, std::uint64_t seed);

} // namespace lenstp
