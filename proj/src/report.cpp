#include "embedgeo/report.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iterator>
#include <memory>
#include <numbers>
#include <sstream>

#include "embedgeo/error.hpp"
#include "embedgeo/format.hpp"

namespace embedgeo {
namespace {

struct DigestDeleter {
  void operator()(EVP_MD_CTX* ctx) const { EVP_MD_CTX_free(ctx); }
};

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
      throw Error(ErrorCode::InternalError, "SHA-256 initialization failed");
    }
  }
  void update(const void* data, std::size_t n) {
    if (EVP_DigestUpdate(ctx_.get(), data, n) != 1) throw Error(ErrorCode::InternalError, "SHA-256 update failed");
  }
  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_.get(), md.data(), &len) != 1) {
      throw Error(ErrorCode::InternalError, "SHA-256 finalization failed");
    }
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out.push_back(digits[md[i] >> 4]);
      out.push_back(digits[md[i] & 0xF]);
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, DigestDeleter> ctx_;
};

Json pct(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json overlap_row(const OverlapRow& r) {
  return Json{{"label", r.label},     {"size_a", r.size_a}, {"size_b", r.size_b}, {"shared", r.shared},
              {"pct_min", pct(r.pct_min)}, {"pct_a", pct(r.pct_a)}, {"pct_b", pct(r.pct_b)}};
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  Sha256 h;
  h.update(bytes.data(), bytes.size());
  return h.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  Sha256 h;
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  if (in.bad()) throw Error(ErrorCode::IoError, "error reading " + path.string());
  return h.hex();
}

RunManifest::RunManifest(std::string command) : command_(std::move(command)), start_(std::chrono::steady_clock::now()) {}

void RunManifest::add_input(const std::string& role, const std::filesystem::path& path) {
  inputs_.push_back(Json{{"role", role}, {"path", path.string()}, {"sha256", sha256_file(path)}});
}

void RunManifest::set_parameter(const std::string& name, Json value) { parameters_[name] = std::move(value); }

void RunManifest::set_seed(const std::string& name, std::uint64_t seed) { seeds_[name] = seed; }

Json RunManifest::to_json() const {
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start_;
  return Json{{"tool", "embedgeo"},
              {"toolkit_version", kToolkitVersion},
              {"command", command_},
              {"unicode_version", default_catalog().unicode_version()},
              {"inputs", inputs_},
              {"parameters", parameters_},
              {"seeds", seeds_},
              {"threads", threads_},
              {"wall_clock_seconds", elapsed.count()}};
}

Json to_json(const OverlapReport& report, bool by_category) {
  Json doc{{"model_a", report.model_a},
           {"model_b", report.model_b},
           {"plotted_basis", "pct_min"},
           {"total", overlap_row(report.total)},
           {"latin", overlap_row(report.latin)},
           {"non_latin", overlap_row(report.non_latin)}};
  if (by_category) {
    Json rows = Json::array();
    for (const auto& r : report.by_category) rows.push_back(overlap_row(r));
    doc["by_category"] = std::move(rows);
  }
  return doc;
}

Json to_json(const SharedAlignment& alignment, const UnicodeCatalog& catalog) {
  Json counts = Json::object();
  for (const auto& [c, n] : alignment.counts) counts[catalog.name(c)] = n;
  return Json{{"shared_tokens", alignment.size()}, {"counts_by_category", counts}};
}

Json to_json(const DiversityReport& report, const Vocabulary& vocab) {
  Json hist_total = Json::object();
  std::map<std::size_t, std::size_t> distribution;
  std::map<TokenCategory, std::pair<double, std::size_t>> by_query_category;
  for (const auto& s : report.stats) {
    ++distribution[s.distinct];
    auto& acc = by_query_category[vocab[s.query].category];
    acc.first += static_cast<double>(s.distinct);
    ++acc.second;
  }
  Json dist = Json::array();
  for (const auto& [d, n] : distribution) dist.push_back(Json{{"distinct", d}, {"tokens", n}});
  Json per_cat = Json::array();
  for (const auto& [c, acc] : by_query_category) {
    per_cat.push_back(Json{{"category", default_catalog().name(c)},
                           {"tokens", acc.second},
                           {"mean_distinct", acc.first / static_cast<double>(acc.second)}});
  }
  return Json{{"k", report.k},
              {"queries", report.stats.size()},
              {"mean_distinct", report.mean},
              {"skipped_zero_rows", report.skipped},
              {"distinct_histogram", dist},
              {"mean_by_query_category", per_cat}};
}

Json to_json(const BreakdownReport& report, const UnicodeCatalog& catalog) {
  Json columns = Json::array();
  for (TokenCategory c : report.columns) columns.push_back(catalog.name(c));
  Json rows = Json::array();
  for (const auto& r : report.rows) {
    rows.push_back(Json{{"category", catalog.name(r.category)}, {"tokens", r.tokens}, {"distribution", r.distribution}});
  }
  return Json{{"k", report.k}, {"columns", columns}, {"rows", rows}};
}

Json to_json(const NeighborOverlapReport& report, const SharedAlignment& alignment) {
  std::map<std::size_t, std::size_t> histogram;
  for (const auto& s : report.stats) ++histogram[s.common];
  Json hist = Json::array();
  for (const auto& [c, n] : histogram) hist.push_back(Json{{"common", c}, {"tokens", n}});
  Json skipped = Json::array();
  for (RowId r : report.skipped) skipped.push_back(alignment.entries[r].token);
  return Json{{"k", report.k},
              {"shared_tokens", alignment.size()},
              {"queries", report.stats.size()},
              {"mean_common", report.mean},
              {"common_histogram", hist},
              {"skipped_tokens", skipped}};
}

Json to_json(const ProbeSummary& summary, const UnicodeCatalog& catalog) {
  Json results = Json::array();
  for (const auto& r : summary.results) {
    results.push_back(Json{{"category", catalog.name(r.category)},
                           {"samples", r.samples},
                           {"fold_accuracy", r.fold_accuracy},
                           {"fold_sizes", r.fold_sizes},
                           {"mean_accuracy", r.mean_accuracy}});
  }
  Json skipped = Json::array();
  for (TokenCategory c : summary.skipped) skipped.push_back(catalog.name(c));
  return Json{{"results", results},
              {"skipped_categories", skipped},
              {"macro_accuracy", summary.macro_accuracy},
              {"pooled_accuracy", summary.pooled_accuracy}};
}

Json to_json(const AngleSpectrum& spectrum, bool full_spectrum) {
  Json doc{{"n_rows", spectrum.n_rows},
           {"d_a", spectrum.d_a},
           {"d_b", spectrum.d_b},
           {"sigma_1", spectrum.first()},
           {"smallest_angle_degrees", std::acos(spectrum.first()) * 180.0 / std::numbers::pi}};
  if (full_spectrum) {
    double mean = 0.0;
    for (double s : spectrum.sigma) mean += s;
    mean /= static_cast<double>(spectrum.sigma.size());
    Json degrees = Json::array();
    for (double s : spectrum.sigma) degrees.push_back(std::acos(s) * 180.0 / std::numbers::pi);
    doc["mean_sigma"] = mean;
    doc["sigma"] = spectrum.sigma;
    doc["angles_degrees"] = degrees;
  }
  return doc;
}

Json to_json(const FrequencyTable& table, const Vocabulary& vocab) {
  Json counts = Json::array();
  for (std::size_t i = 0; i < table.counts.size(); ++i) {
    counts.push_back(Json{{"row", i}, {"token", vocab[static_cast<RowId>(i)].key}, {"count", table.counts[i]}});
  }
  return Json{{"corpus", table.corpus},
              {"lines", table.lines},
              {"total", table.total},
              {"unk", table.unk},
              {"vocab_size", table.counts.size()},
              {"counts", counts}};
}

FrequencyTable frequency_table_from_json(const Json& doc, std::size_t vocab_size) {
  try {
    FrequencyTable t;
    t.corpus = doc.at("corpus").get<std::string>();
    t.lines = doc.at("lines").get<std::uint64_t>();
    t.total = doc.at("total").get<std::uint64_t>();
    t.unk = doc.at("unk").get<std::uint64_t>();
    const auto& counts = doc.at("counts");
    if (vocab_size != 0 && counts.size() != vocab_size) {
      throw Error(ErrorCode::SchemaError, "frequency table has " + std::to_string(counts.size()) +
                                              " rows, vocabulary has " + std::to_string(vocab_size));
    }
    t.counts.assign(counts.size(), 0);
    for (const auto& entry : counts) {
      const auto row = entry.at("row").get<std::size_t>();
      if (row >= t.counts.size()) throw Error(ErrorCode::SchemaError, "frequency row out of range");
      t.counts[row] = entry.at("count").get<std::uint64_t>();
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("frequency table: ") + e.what());
  }
}

Json to_json(const BandedSample& sample) {
  auto band = [](const FrequencyBand& b) {
    return Json{{"index", b.index},
                {"min_count", b.min_count},
                {"max_count", b.max_count},
                {"population", b.population},
                {"sampled", b.sampled.size()},
                {"mean_distinct", b.mean_distinct},
                {"rows", b.sampled}};
  };
  Json bands = Json::array();
  for (const auto& b : sample.bands) bands.push_back(band(b));
  return Json{{"statistic", "spearman"},
              {"spearman", sample.spearman},
              {"sampled", sample.sampled},
              {"per_band_sample", sample.per_band_sample},
              {"bands", bands},
              {"zero_band", band(sample.zero_band)}};
}

void write_diversity_csv(const DiversityReport& report, const Vocabulary& vocab, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  const auto& catalog = default_catalog();
  out << "row,token,category,distinct,histogram\n";
  for (const auto& s : report.stats) {
    const auto& rec = vocab[s.query];
    std::string hist;
    for (const auto& [c, n] : s.histogram) {
      if (!hist.empty()) hist.push_back(';');
      hist += catalog.name(c) + ":" + std::to_string(n);
    }
    out << s.query << ',' << csv_field(rec.key) << ',' << catalog.name(rec.category) << ',' << s.distinct << ','
        << hist << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

std::vector<DiversityPoint> read_diversity_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || !line.starts_with("row,")) {
    throw Error(ErrorCode::SchemaError, path.string() + ": missing diversity CSV header");
  }
  std::vector<DiversityPoint> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    // a quoted token may span lines
    while (std::count(line.begin(), line.end(), '"') % 2 == 1) {
      std::string more;
      if (!std::getline(in, more)) throw Error(ErrorCode::SchemaError, path.string() + ": unterminated quoted field");
      ++lineno;
      line += "\n" + more;
    }
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() < 4) throw Error(ErrorCode::SchemaError, path.string() + ":" + std::to_string(lineno) + ": too few fields");
    try {
      out.push_back({static_cast<RowId>(std::stoul(fields[0])), static_cast<std::size_t>(std::stoul(fields[3]))});
    } catch (const std::exception&) {
      throw Error(ErrorCode::SchemaError, path.string() + ":" + std::to_string(lineno) + ": bad number");
    }
  }
  return out;
}

void write_json(const Json& doc, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

}  // namespace embedgeo
