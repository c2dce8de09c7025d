// embedgeo: command-line front end for the embedding-geometry toolkit.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "embedgeo/corpus_stats.hpp"
#include "embedgeo/error.hpp"
#include "embedgeo/format.hpp"
#include "embedgeo/neighbors.hpp"
#include "embedgeo/npy.hpp"
#include "embedgeo/parallel.hpp"
#include "embedgeo/probe.hpp"
#include "embedgeo/report.hpp"
#include "embedgeo/subspace.hpp"
#include "embedgeo/vocab.hpp"

namespace fs = std::filesystem;
using namespace embedgeo;

namespace {

constexpr const char* kTieBreak = "distance_then_lowest_row";

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct Globals {
  int threads = 0;
  unsigned resolved = 1;
};

std::optional<TokenScheme> scheme_option(const std::string& name) {
  if (name.empty() || name == "auto") return std::nullopt;
  auto s = parse_scheme(name);
  if (!s) throw Error(ErrorCode::ArgumentError, "unknown tokenizer scheme '" + name + "'");
  return s;
}

std::vector<TokenCategory> parse_categories(const std::vector<std::string>& names) {
  std::vector<TokenCategory> out;
  for (const auto& n : names) {
    auto c = default_catalog().parse(n);
    if (!c) throw Error(ErrorCode::ArgumentError, "unknown category '" + n + "'");
    out.push_back(*c);
  }
  return out;
}

void check_rows(const EmbeddingMatrix& m, const Vocabulary& v, const std::string& what) {
  if (m.rows() != v.size()) {
    throw Error(ErrorCode::ShapeError, what + ": matrix has " + std::to_string(m.rows()) + " rows but vocabulary has " +
                                           std::to_string(v.size()) + " tokens");
  }
}

void write_sidecar(const RunManifest& manifest, const fs::path& out, Json summary = nullptr) {
  Json doc{{"manifest", manifest.to_json()}};
  if (!summary.is_null()) doc["summary"] = std::move(summary);
  write_json(doc, fs::path(out.string() + ".manifest.json"));
}

void write_report(const RunManifest& manifest, const fs::path& out, const Json& body) {
  Json doc{{"manifest", manifest.to_json()}};
  for (auto it = body.begin(); it != body.end(); ++it) doc[it.key()] = it.value();
  write_json(doc, out);
}

Json vocab_report(const Vocabulary& v) {
  Json collisions = Json::array();
  for (const auto& c : v.collisions()) collisions.push_back(Json{{"row", c.row}, {"first_row", c.first_row}, {"key", c.key}});
  return Json{{"model", v.model_name()},
              {"size", v.size()},
              {"scheme", to_string(v.scheme())},
              {"undecodable", v.undecodable_count()},
              {"collisions", collisions}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"embedgeo: geometry of language-model input embeddings"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--threads", g.threads, "Worker threads (default: EMBEDGEO_THREADS or all cores)");

  // categorize
  auto* categorize = app.add_subcommand("categorize", "Majority Unicode category per token (CSV token,category)");
  std::string cat_vocab, cat_scheme = "auto", cat_out;
  categorize->add_option("vocab", cat_vocab, "Vocabulary JSON")->required();
  categorize->add_option("--scheme", cat_scheme, "sentencepiece | byte_bpe | auto");
  categorize->add_option("--out", cat_out, "Output CSV (default stdout)");

  // overlap
  auto* overlap = app.add_subcommand("overlap", "Vocabulary overlap between two models");
  std::string ov_a, ov_b, ov_scheme_a = "auto", ov_scheme_b = "auto", ov_out;
  bool ov_by_cat = false;
  overlap->add_option("--vocab-a", ov_a)->required();
  overlap->add_option("--vocab-b", ov_b)->required();
  overlap->add_option("--scheme-a", ov_scheme_a);
  overlap->add_option("--scheme-b", ov_scheme_b);
  overlap->add_flag("--by-category", ov_by_cat, "Include one row per token category");
  overlap->add_option("--out", ov_out)->required();

  // knn
  auto* knn_cmd = app.add_subcommand("knn", "Nearest neighbors of given tokens");
  std::string kn_matrix, kn_vocab, kn_scheme = "auto", kn_out;
  std::vector<std::string> kn_tokens;
  std::vector<RowId> kn_ids;
  std::size_t kn_k = 20;
  knn_cmd->add_option("--matrix", kn_matrix)->required();
  knn_cmd->add_option("--vocab", kn_vocab)->required();
  knn_cmd->add_option("--scheme", kn_scheme);
  knn_cmd->add_option("--token", kn_tokens, "Query token (normalized form, repeatable)");
  knn_cmd->add_option("--id", kn_ids, "Query row id (repeatable)");
  knn_cmd->add_option("-k", kn_k, "Neighbors per query");
  knn_cmd->add_option("--out", kn_out, "Optional JSON output");

  // diversity
  auto* diversity = app.add_subcommand("diversity", "Distinct neighbor categories per token");
  std::string dv_matrix, dv_vocab, dv_scheme = "auto", dv_out;
  std::size_t dv_k = 50;
  double dv_sample = 1.0;
  std::uint64_t dv_seed = 17;
  diversity->add_option("--matrix", dv_matrix)->required();
  diversity->add_option("--vocab", dv_vocab)->required();
  diversity->add_option("--scheme", dv_scheme);
  diversity->add_option("-k", dv_k);
  diversity->add_option("--sample", dv_sample, "Fraction of tokens to query (seeded)");
  diversity->add_option("--seed", dv_seed);
  diversity->add_option("--out", dv_out, "Per-token CSV")->required();

  // breakdown
  auto* breakdown = app.add_subcommand("breakdown", "Neighbor-category distribution per query category");
  std::string bd_matrix, bd_vocab, bd_scheme = "auto", bd_out;
  std::vector<std::string> bd_categories;
  std::size_t bd_k = 50;
  breakdown->add_option("--matrix", bd_matrix)->required();
  breakdown->add_option("--vocab", bd_vocab)->required();
  breakdown->add_option("--scheme", bd_scheme);
  breakdown->add_option("--categories", bd_categories)->delimiter(',')->required();
  breakdown->add_option("-k", bd_k);
  breakdown->add_option("--out", bd_out)->required();

  // overlap-nn
  auto* overlap_nn = app.add_subcommand("overlap-nn", "Shared k-NN between two models over their shared vocabulary");
  std::string on_a, on_b, on_va, on_vb, on_scheme_a = "auto", on_scheme_b = "auto", on_out, on_per_token;
  std::vector<std::string> on_restrict;
  bool on_pairwise = false;
  std::size_t on_k = 100;
  overlap_nn->add_option("--a", on_a)->required();
  overlap_nn->add_option("--b", on_b)->required();
  overlap_nn->add_option("--vocab-a", on_va)->required();
  overlap_nn->add_option("--vocab-b", on_vb)->required();
  overlap_nn->add_option("--scheme-a", on_scheme_a);
  overlap_nn->add_option("--scheme-b", on_scheme_b);
  overlap_nn->add_option("--restrict", on_restrict, "Further vocabularies the shared set must occur in");
  overlap_nn->add_flag("--pairwise", on_pairwise, "Ignore --restrict and use the pairwise intersection");
  overlap_nn->add_option("-k", on_k);
  overlap_nn->add_option("--per-token", on_per_token, "Optional per-token CSV");
  overlap_nn->add_option("--out", on_out)->required();

  // probe
  auto* probe = app.add_subcommand("probe", "One-vs-rest logistic-regression probes per category");
  std::string pr_matrix, pr_vocab, pr_scheme = "auto", pr_out;
  std::vector<std::string> pr_categories;
  std::uint64_t pr_seed = 17;
  std::size_t pr_folds = 10;
  LogRegParams pr_params;
  probe->add_option("--matrix", pr_matrix)->required();
  probe->add_option("--vocab", pr_vocab)->required();
  probe->add_option("--scheme", pr_scheme);
  probe->add_option("--categories", pr_categories)->delimiter(',');
  probe->add_option("--seed", pr_seed);
  probe->add_option("--folds", pr_folds);
  probe->add_option("--l2", pr_params.l2);
  probe->add_option("--max-iter", pr_params.max_iter);
  probe->add_option("--tol", pr_params.tol);
  probe->add_option("--out", pr_out)->required();

  // angles
  auto* angles = app.add_subcommand("angles", "Canonical-angle similarity between two matrices");
  std::string an_a, an_b, an_va, an_vb, an_scheme_a = "auto", an_scheme_b = "auto", an_out;
  std::size_t an_random = 0;
  std::uint64_t an_seed = 17;
  bool an_full = false;
  angles->add_option("--a", an_a)->required();
  angles->add_option("--b", an_b);
  angles->add_option("--vocab-a", an_va);
  angles->add_option("--vocab-b", an_vb);
  angles->add_option("--scheme-a", an_scheme_a);
  angles->add_option("--scheme-b", an_scheme_b);
  angles->add_option("--random-baseline", an_random, "Also compare against a seeded Gaussian n x D matrix");
  angles->add_option("--seed", an_seed);
  angles->add_flag("--full-spectrum", an_full, "Emit every singular value");
  angles->add_option("--out", an_out)->required();

  // freq
  auto* freq = app.add_subcommand("freq", "Token frequencies from a corpus sample");
  std::string fq_corpus, fq_vocab, fq_scheme = "auto", fq_out;
  freq->add_option("--corpus", fq_corpus)->required();
  freq->add_option("--vocab", fq_vocab)->required();
  freq->add_option("--scheme", fq_scheme);
  freq->add_option("--out", fq_out)->required();

  // freq-div
  auto* freq_div = app.add_subcommand("freq-div", "Frequency bands vs neighbor diversity");
  std::string fd_freq, fd_div, fd_out;
  std::size_t fd_bands = 10, fd_per_band = 100;
  std::uint64_t fd_seed = 17;
  freq_div->add_option("--freq", fd_freq)->required();
  freq_div->add_option("--diversity", fd_div)->required();
  freq_div->add_option("--bands", fd_bands);
  freq_div->add_option("--per-band", fd_per_band);
  freq_div->add_option("--seed", fd_seed);
  freq_div->add_option("--out", fd_out)->required();

  // export-graph
  auto* export_graph = app.add_subcommand("export-graph", "k-NN edge list for external projection tools");
  std::string eg_matrix, eg_out;
  std::size_t eg_k = 15;
  double eg_sample = 1.0;
  std::uint64_t eg_seed = 17;
  export_graph->add_option("--matrix", eg_matrix)->required();
  export_graph->add_option("-k", eg_k);
  export_graph->add_option("--sample", eg_sample);
  export_graph->add_option("--seed", eg_seed);
  export_graph->add_option("--out", eg_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    g.resolved = resolve_threads(g.threads);
    KnnOptions knn_opts;
    knn_opts.threads = g.resolved;

    if (categorize->parsed()) {
      const Vocabulary v = load_vocab(cat_vocab, scheme_option(cat_scheme));
      std::ofstream file;
      if (!cat_out.empty()) {
        file.open(cat_out, std::ios::binary | std::ios::trunc);
        if (!file) throw Error(ErrorCode::IoError, "cannot open " + cat_out + " for writing");
      }
      std::ostream& out = cat_out.empty() ? std::cout : file;
      out << "token,category\n";
      for (const auto& r : v.records()) out << csv_field(r.key) << ',' << default_catalog().name(r.category) << '\n';
      if (!cat_out.empty()) {
        RunManifest m("categorize");
        m.add_input("vocab", cat_vocab);
        m.set_parameter("scheme", cat_scheme);
        m.set_threads(g.resolved);
        write_sidecar(m, cat_out, Json{{"vocab", vocab_report(v)}});
      }
    } else if (overlap->parsed()) {
      const Vocabulary a = load_vocab(ov_a, scheme_option(ov_scheme_a));
      const Vocabulary b = load_vocab(ov_b, scheme_option(ov_scheme_b));
      RunManifest m("overlap");
      m.add_input("vocab_a", ov_a);
      m.add_input("vocab_b", ov_b);
      m.set_parameter("by_category", ov_by_cat);
      m.set_threads(g.resolved);
      Json body = to_json(overlap_stats(a, b), ov_by_cat);
      body["vocab_a"] = vocab_report(a);
      body["vocab_b"] = vocab_report(b);
      write_report(m, ov_out, body);
    } else if (knn_cmd->parsed()) {
      const Vocabulary v = load_vocab(kn_vocab, scheme_option(kn_scheme));
      const EmbeddingMatrix mat = load_matrix(kn_matrix);
      check_rows(mat, v, "knn");
      std::vector<RowId> queries = kn_ids;
      for (const auto& t : kn_tokens) {
        auto id = v.find(t);
        if (!id) throw Error(ErrorCode::ArgumentError, "token '" + t + "' is not in the vocabulary");
        queries.push_back(*id);
      }
      if (queries.empty()) throw Error(ErrorCode::ArgumentError, "knn: give at least one --token or --id");
      const auto sets = knn(mat, queries, kn_k, knn_opts);
      Json results = Json::array();
      for (const auto& s : sets) {
        std::cout << "# " << v[s.query].key << " (" << default_catalog().name(v[s.query].category) << ")\n";
        Json neighbors = Json::array();
        for (std::size_t r = 0; r < s.neighbors.size(); ++r) {
          const auto& n = s.neighbors[r];
          const std::string cat = default_catalog().name(v[n.id].category);
          std::cout << (r + 1) << '\t' << v[n.id].key << '\t' << cat << '\t' << format_double(n.distance) << '\n';
          neighbors.push_back(Json{{"row", n.id}, {"token", v[n.id].key}, {"category", cat}, {"distance", n.distance}});
        }
        results.push_back(Json{{"query", s.query}, {"token", v[s.query].key}, {"neighbors", neighbors}});
      }
      if (!kn_out.empty()) {
        RunManifest m("knn");
        m.add_input("matrix", kn_matrix);
        m.add_input("vocab", kn_vocab);
        m.set_parameter("k", kn_k);
        m.set_parameter("tie_break", kTieBreak);
        m.set_threads(g.resolved);
        write_report(m, kn_out, Json{{"k", kn_k}, {"results", results}});
      }
    } else if (diversity->parsed()) {
      const Vocabulary v = load_vocab(dv_vocab, scheme_option(dv_scheme));
      const EmbeddingMatrix mat = load_matrix(dv_matrix);
      check_rows(mat, v, "diversity");
      std::vector<RowId> queries;
      if (dv_sample < 1.0) {
        const CosineIndex index(mat);
        for (RowId r : sample_rows(mat.rows(), dv_sample, dv_seed)) {
          if (!index.is_degenerate(r)) queries.push_back(r);
        }
      }
      const DiversityReport rep = neighbor_diversity(mat, v, dv_k, queries, knn_opts);
      write_diversity_csv(rep, v, dv_out);
      RunManifest m("diversity");
      m.add_input("matrix", dv_matrix);
      m.add_input("vocab", dv_vocab);
      m.set_parameter("k", dv_k);
      m.set_parameter("tie_break", kTieBreak);
      m.set_parameter("sample", dv_sample);
      m.set_seed("seed", dv_seed);
      m.set_threads(g.resolved);
      write_sidecar(m, dv_out, to_json(rep, v));
      std::cout << "mean distinct categories over " << rep.stats.size() << " tokens: " << format_double(rep.mean) << '\n';
    } else if (breakdown->parsed()) {
      const Vocabulary v = load_vocab(bd_vocab, scheme_option(bd_scheme));
      const EmbeddingMatrix mat = load_matrix(bd_matrix);
      check_rows(mat, v, "breakdown");
      const auto cats = parse_categories(bd_categories);
      RunManifest m("breakdown");
      m.add_input("matrix", bd_matrix);
      m.add_input("vocab", bd_vocab);
      m.set_parameter("k", bd_k);
      m.set_parameter("tie_break", kTieBreak);
      m.set_parameter("categories", bd_categories);
      m.set_threads(g.resolved);
      write_report(m, bd_out, to_json(neighbor_breakdown(mat, v, bd_k, cats, knn_opts)));
    } else if (overlap_nn->parsed()) {
      const Vocabulary va = load_vocab(on_va, scheme_option(on_scheme_a));
      const Vocabulary vb = load_vocab(on_vb, scheme_option(on_scheme_b));
      const EmbeddingMatrix ma = load_matrix(on_a);
      const EmbeddingMatrix mb = load_matrix(on_b);
      check_rows(ma, va, "overlap-nn (a)");
      check_rows(mb, vb, "overlap-nn (b)");
      RunManifest m("overlap-nn");
      m.add_input("matrix_a", on_a);
      m.add_input("matrix_b", on_b);
      m.add_input("vocab_a", on_va);
      m.add_input("vocab_b", on_vb);
      SharedAlignment shared = align(va, vb);
      if (!on_pairwise) {
        for (const auto& path : on_restrict) {
          shared = restrict_to(shared, load_vocab(path));
          m.add_input("restrict", path);
        }
      }
      m.set_parameter("k", on_k);
      m.set_parameter("tie_break", kTieBreak);
      m.set_parameter("intersection", on_pairwise || on_restrict.empty() ? "pairwise" : "restricted");
      m.set_threads(g.resolved);
      const auto rows_a = shared.rows_a(), rows_b = shared.rows_b();
      const NeighborOverlapReport rep =
          neighbor_overlap(submatrix(ma, rows_a), submatrix(mb, rows_b), shared, on_k, knn_opts);
      if (!on_per_token.empty()) {
        std::ofstream csv(on_per_token, std::ios::binary | std::ios::trunc);
        if (!csv) throw Error(ErrorCode::IoError, "cannot open " + on_per_token + " for writing");
        csv << "token,common\n";
        for (const auto& s : rep.stats) csv << csv_field(shared.entries[s.row].token) << ',' << s.common << '\n';
      }
      Json body = to_json(rep, shared);
      body["alignment"] = to_json(shared);
      write_report(m, on_out, body);
      std::cout << "mean shared neighbors: " << format_double(rep.mean) << " of " << on_k << '\n';
    } else if (probe->parsed()) {
      const Vocabulary v = load_vocab(pr_vocab, scheme_option(pr_scheme));
      const EmbeddingMatrix mat = load_matrix(pr_matrix);
      check_rows(mat, v, "probe");
      std::vector<TokenCategory> cats;
      if (pr_categories.empty()) {
        for (const auto& [c, n] : v.category_counts()) cats.push_back(c);
      } else {
        cats = parse_categories(pr_categories);
      }
      RunManifest m("probe");
      m.add_input("matrix", pr_matrix);
      m.add_input("vocab", pr_vocab);
      m.set_parameter("folds", pr_folds);
      m.set_parameter("l2", pr_params.l2);
      m.set_parameter("max_iter", pr_params.max_iter);
      m.set_parameter("tol", pr_params.tol);
      m.set_parameter("min_tokens", kMinProbeTokens);
      m.set_seed("seed", pr_seed);
      m.set_threads(g.resolved);
      const ProbeSummary summary = run_probes(v, mat, cats, pr_seed, pr_folds, pr_params, g.resolved);
      write_report(m, pr_out, to_json(summary));
      std::cout << "macro accuracy " << format_double(summary.macro_accuracy) << ", pooled "
                << format_double(summary.pooled_accuracy) << '\n';
    } else if (angles->parsed()) {
      if (an_b.empty() && an_random == 0) throw Error(ErrorCode::ArgumentError, "angles: give --b and/or --random-baseline");
      RunManifest m("angles");
      EmbeddingMatrix a = load_matrix(an_a);
      m.add_input("matrix_a", an_a);
      Json body = Json::object();
      std::optional<EmbeddingMatrix> b;
      if (!an_b.empty()) {
        b = load_matrix(an_b);
        m.add_input("matrix_b", an_b);
        if (!an_va.empty() || !an_vb.empty()) {
          if (an_va.empty() || an_vb.empty()) throw Error(ErrorCode::ArgumentError, "angles: give both --vocab-a and --vocab-b");
          const Vocabulary va = load_vocab(an_va, scheme_option(an_scheme_a));
          const Vocabulary vb = load_vocab(an_vb, scheme_option(an_scheme_b));
          m.add_input("vocab_a", an_va);
          m.add_input("vocab_b", an_vb);
          check_rows(a, va, "angles (a)");
          check_rows(*b, vb, "angles (b)");
          const SharedAlignment shared = align(va, vb);
          a = submatrix(a, shared.rows_a());
          b = submatrix(*b, shared.rows_b());
          body["alignment"] = to_json(shared);
        }
        const AngleSpectrum spec = canonical_angles(a, *b, g.resolved);
        body["spectrum"] = to_json(spec, an_full);
        std::cout << "sigma_1 = " << format_double(spec.first()) << '\n';
      }
      if (an_random > 0) {
        const EmbeddingMatrix r = random_baseline(a.rows(), an_random, an_seed);
        Json baseline{{"d", an_random}, {"a", to_json(canonical_angles(a, r, g.resolved), an_full)}};
        if (b) baseline["b"] = to_json(canonical_angles(*b, r, g.resolved), an_full);
        body["random_baseline"] = std::move(baseline);
        m.set_seed("seed", an_seed);
      }
      m.set_parameter("full_spectrum", an_full);
      m.set_parameter("random_baseline_d", an_random);
      m.set_threads(g.resolved);
      write_report(m, an_out, body);
    } else if (freq->parsed()) {
      const Vocabulary v = load_vocab(fq_vocab, scheme_option(fq_scheme));
      RunManifest m("freq");
      m.add_input("corpus", fq_corpus);
      m.add_input("vocab", fq_vocab);
      m.set_parameter("segmenter", "greedy_longest_match");
      m.set_threads(g.resolved);
      write_report(m, fq_out, to_json(count_frequencies(fs::path(fq_corpus), v, g.resolved), v));
    } else if (freq_div->parsed()) {
      const FrequencyTable table = frequency_table_from_json(read_json(fd_freq), 0);
      const auto points = read_diversity_csv(fd_div);
      RunManifest m("freq-div");
      m.add_input("freq", fd_freq);
      m.add_input("diversity", fd_div);
      m.set_parameter("bands", fd_bands);
      m.set_parameter("per_band", fd_per_band);
      m.set_seed("seed", fd_seed);
      m.set_threads(g.resolved);
      const BandedSample sample = frequency_diversity(table, points, fd_bands, fd_per_band, fd_seed);
      write_report(m, fd_out, to_json(sample));
      std::cout << "spearman rho = " << format_double(sample.spearman) << " over " << sample.sampled << " tokens\n";
    } else if (export_graph->parsed()) {
      const EmbeddingMatrix mat = load_matrix(eg_matrix);
      const CosineIndex index(mat);
      std::vector<RowId> queries;
      for (RowId r : eg_sample < 1.0 ? sample_rows(mat.rows(), eg_sample, eg_seed) : index.usable_rows()) {
        if (!index.is_degenerate(r)) queries.push_back(r);
      }
      export_neighbor_graph(index.search(queries, eg_k, knn_opts), fs::path(eg_out));
      RunManifest m("export-graph");
      m.add_input("matrix", eg_matrix);
      m.set_parameter("k", eg_k);
      m.set_parameter("tie_break", kTieBreak);
      m.set_parameter("sample", eg_sample);
      m.set_seed("seed", eg_seed);
      m.set_threads(g.resolved);
      write_sidecar(m, eg_out);
    }
  } catch (const Error& e) {
    std::cerr << "embedgeo: " << e.what() << '\n';
    return e.code() == ErrorCode::ArgumentError ? kExitUsage : kExitData;
  } catch (const std::exception& e) {
    std::cerr << "embedgeo: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}
