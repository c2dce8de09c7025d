#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "embedgeo/corpus_stats.hpp"
#include "embedgeo/neighbors.hpp"
#include "embedgeo/probe.hpp"
#include "embedgeo/subspace.hpp"
#include "embedgeo/vocab.hpp"

namespace embedgeo {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kToolkitVersion = "0.1.0";

/// Hex SHA-256 of a file's bytes. IoError if unreadable.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_hex(std::string_view bytes);

/// Provenance record attached to every output file.
class RunManifest {
 public:
  explicit RunManifest(std::string command);

  void add_input(const std::string& role, const std::filesystem::path& path);
  void set_parameter(const std::string& name, Json value);
  void set_seed(const std::string& name, std::uint64_t seed);
  void set_threads(unsigned threads) { threads_ = threads; }

  /// Manifest JSON. wall_clock_seconds is the only field that varies
  /// between identical runs.
  Json to_json() const;

 private:
  std::string command_;
  Json inputs_ = Json::array();
  Json parameters_ = Json::object();
  Json seeds_ = Json::object();
  unsigned threads_ = 1;
  std::chrono::steady_clock::time_point start_;
};

Json to_json(const OverlapReport& report, bool by_category);
Json to_json(const SharedAlignment& alignment, const UnicodeCatalog& catalog = default_catalog());
Json to_json(const DiversityReport& report, const Vocabulary& vocab);
Json to_json(const BreakdownReport& report, const UnicodeCatalog& catalog = default_catalog());
Json to_json(const NeighborOverlapReport& report, const SharedAlignment& alignment);
Json to_json(const ProbeSummary& summary, const UnicodeCatalog& catalog = default_catalog());
Json to_json(const AngleSpectrum& spectrum, bool full_spectrum);
Json to_json(const FrequencyTable& table, const Vocabulary& vocab);
Json to_json(const BandedSample& sample);

/// Inverse of to_json(FrequencyTable); row order must match `vocab`.
FrequencyTable frequency_table_from_json(const Json& doc, std::size_t vocab_size);

/// Diversity CSV as written by the CLI: row,token,category,distinct,histogram.
void write_diversity_csv(const DiversityReport& report, const Vocabulary& vocab, const std::filesystem::path& path);
std::vector<DiversityPoint> read_diversity_csv(const std::filesystem::path& path);

/// Writes doc followed by a newline. IoError on failure.
void write_json(const Json& doc, const std::filesystem::path& path);
Json read_json(const std::filesystem::path& path);

}  // namespace embedgeo
