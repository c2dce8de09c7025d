#include <charconv>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "embedgeo/error.hpp"
#include "embedgeo/format.hpp"
#include "embedgeo/report.hpp"
#include "helpers.hpp"

using namespace embedgeo;
namespace fs = std::filesystem;

TEST_SUITE("reports") {
  TEST_CASE("sha256 known answers") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    auto p = fs::temp_directory_path() / "embedgeo_sha.txt";
    std::ofstream(p, std::ios::binary) << "abc";
    CHECK(sha256_file(p) == sha256_hex("abc"));
    fs::remove(p);
    CHECK_THROWS_AS(sha256_file("/nonexistent/x"), Error);
  }

  TEST_CASE("manifest carries digests, parameters, seeds and versions") {
    auto p = fs::temp_directory_path() / "embedgeo_manifest_in.txt";
    std::ofstream(p, std::ios::binary) << "abc";
    RunManifest m("probe");
    m.add_input("vocab", p);
    m.set_parameter("folds", 10);
    m.set_seed("seed", 17);
    m.set_threads(3);
    auto j = m.to_json();
    CHECK(j["tool"] == "embedgeo");
    CHECK(j["command"] == "probe");
    CHECK(j["unicode_version"] == "13.0.0");
    CHECK(j["toolkit_version"] == std::string(kToolkitVersion));
    CHECK(j["inputs"][0]["sha256"] == sha256_hex("abc"));
    CHECK(j["inputs"][0]["role"] == "vocab");
    CHECK(j["parameters"]["folds"] == 10);
    CHECK(j["seeds"]["seed"] == 17);
    CHECK(j["threads"] == 3);
    CHECK(j["wall_clock_seconds"].is_number());
    fs::remove(p);
  }

  TEST_CASE("format_double round-trips") {
    std::mt19937_64 gen(1);
    for (int i = 0; i < 1000; ++i) {
      const double v = std::ldexp(double(gen() % 1000000) - 500000.0, static_cast<int>(gen() % 80) - 40);
      const std::string s = format_double(v);
      double back = 0;
      std::from_chars(s.data(), s.data() + s.size(), back);
      REQUIRE(back == v);
    }
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(1.0) == "1");
  }

  TEST_CASE("csv_field quoting") {
    CHECK(csv_field("abc") == "abc");
    CHECK(csv_field("a,b") == "\"a,b\"");
    CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(csv_field("line\nbreak") == "\"line\nbreak\"");
  }

  TEST_CASE("diversity CSV round-trips awkward tokens") {
    auto v = Vocabulary::from_tokens({"a,b", "\"q\"", "x\ny", "▁d", "e"}, TokenScheme::sentencepiece, "v");
    DiversityReport rep;
    rep.k = 2;
    for (RowId r = 0; r < 5; ++r) rep.stats.push_back({r, 1 + r % 2, {{v[r].category, 2}}});
    auto p = fs::temp_directory_path() / "embedgeo_div.csv";
    write_diversity_csv(rep, v, p);
    auto back = read_diversity_csv(p);
    REQUIRE(back.size() == 5);
    for (RowId r = 0; r < 5; ++r) {
      CHECK(back[r].row == r);
      CHECK(back[r].distinct == 1 + r % 2);
    }
    fs::remove(p);
  }

  TEST_CASE("frequency table JSON round-trips") {
    auto v = Vocabulary::from_tokens({"▁a", "▁b", "c"}, TokenScheme::sentencepiece, "v");
    FrequencyTable t;
    t.corpus = "c.txt";
    t.counts = {5, 0, 7};
    t.unk = 2;
    t.total = 14;
    t.lines = 3;
    auto back = frequency_table_from_json(to_json(t, v), 3);
    CHECK(back.counts == t.counts);
    CHECK(back.unk == 2);
    CHECK(back.total == 14);
    CHECK(back.lines == 3);
    CHECK(back.corpus == "c.txt");
    CHECK_THROWS_AS(frequency_table_from_json(to_json(t, v), 4), Error);
    CHECK_THROWS_AS(frequency_table_from_json(Json{{"corpus", 1}}, 0), Error);
  }

  TEST_CASE("overlap JSON exposes all three bases and the plotted one") {
    auto a = Vocabulary::from_tokens({"a", "b"}, TokenScheme::sentencepiece, "A");
    auto b = Vocabulary::from_tokens({"a", "b", "c", "d"}, TokenScheme::sentencepiece, "B");
    auto j = to_json(overlap_stats(a, b), true);
    CHECK(j["plotted_basis"] == "pct_min");
    CHECK(j["total"]["pct_min"] == 100.0);
    CHECK(j["total"]["pct_b"] == 50.0);
    CHECK(j["non_latin"]["pct_min"].is_null());
    CHECK(j["by_category"].size() == 1);
    CHECK_FALSE(to_json(overlap_stats(a, b), false).contains("by_category"));
  }

  TEST_CASE("angle spectrum JSON") {
    AngleSpectrum s{{1.0, 0.5}, 10, 2, 3};
    auto brief = to_json(s, false);
    CHECK(brief["sigma_1"] == 1.0);
    CHECK(brief["smallest_angle_degrees"] == 0.0);
    CHECK_FALSE(brief.contains("sigma"));
    auto full = to_json(s, true);
    CHECK(full["sigma"].size() == 2);
    CHECK(full["mean_sigma"] == 0.75);
    CHECK(std::abs(full["angles_degrees"][1].get<double>() - 60.0) < 1e-12);
  }

  TEST_CASE("json io errors") {
    auto p = fs::temp_directory_path() / "embedgeo_bad.json";
    std::ofstream(p) << "{nope";
    CHECK_THROWS_AS(read_json(p), Error);
    fs::remove(p);
    CHECK_THROWS_AS(write_json(Json::object(), "/nonexistent/dir/out.json"), Error);
  }
}
