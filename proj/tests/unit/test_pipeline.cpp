#include <gtest/gtest.h>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "creditvote/errors.hpp"
#include "creditvote/pipeline/config.hpp"
#include "creditvote/pipeline/csv.hpp"
#include "creditvote/pipeline/manifest.hpp"
#include "creditvote/pipeline/stages.hpp"

using namespace creditvote;
using namespace creditvote::pipeline;
namespace fs = std::filesystem;

TEST(Csv, QuotedFieldsRoundTrip) {
  CsvWriter w({"a", "b"});
  w.field("x,y").field("he said \"hi\"").end_row();
  w.field(std::optional<double>{}).field(0.1).end_row();
  const auto t = CsvTable::parse(w.str());
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t.text(0, "a"), "x,y");
  EXPECT_EQ(t.text(0, "b"), "he said \"hi\"");
  EXPECT_FALSE(t.optional_real(1, "a"));
  EXPECT_EQ(t.real(1, "b"), 0.1);
}

TEST(Csv, RealsRoundTripExactly) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.027212121212121213}) EXPECT_EQ(std::stod(format_real(v)), v);
}

TEST(Csv, MissingColumnsNamed) {
  const auto t = CsvTable::parse("a,b\n1,2\n", "f.csv");
  try {
    t.require({"a", "c", "d"});
    FAIL();
  } catch (const DataError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("c, d"), std::string::npos) << what;
    EXPECT_NE(what.find("f.csv"), std::string::npos);
  }
}

TEST(Csv, BadValueCarriesFileAndLine) {
  const auto t = CsvTable::parse("a,b\n1,2\n3,oops\n", "f.csv");
  try {
    t.integer(1, "b");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("f.csv:3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(CsvTable::parse("a,b\n1\n"), DataError);
  EXPECT_THROW(CsvTable::parse("a\n\"open\n"), DataError);
}

TEST(Config, RoundTripAndUnknownKey) {
  PipelineConfig c;
  c.world.n_czs = 4;
  c.estimation_years = {2012, 2014};
  c.rd.pool_non_election_years = true;
  const auto j = to_json(c);
  EXPECT_EQ(to_json(config_from_json(j)), j);
  auto bad = j;
  bad["bandwith"] = 15;
  EXPECT_THROW(config_from_json(bad), ConfigError);
  auto inner = j;
  inner["world"]["n_cz"] = 3;
  EXPECT_THROW(config_from_json(inner), ConfigError);
}

TEST(Config, Validation) {
  PipelineConfig c;
  EXPECT_NO_THROW(c.validate());
  c.bandwidth = 7;
  EXPECT_THROW(c.validate(), ConfigError);
  c = PipelineConfig{};
  c.workers = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, YearList) {
  EXPECT_EQ(parse_year_list("2012,2014,2016"), (std::vector<int>{2012, 2014, 2016}));
  EXPECT_EQ(parse_year_list(" 2012 , 2014"), (std::vector<int>{2012, 2014}));
  EXPECT_THROW(parse_year_list("2012,x"), ConfigError);
  EXPECT_THROW(parse_year_list(""), ConfigError);
}

TEST(Stages, Names) {
  for (auto s : {Stage::Simulate, Stage::Crosswalk, Stage::Scan, Stage::Shares, Stage::Estimate, Stage::Report,
                 Stage::Pipeline, Stage::All})
    EXPECT_EQ(stage_from_string(to_string(s)), s);
  EXPECT_THROW(stage_from_string("plot"), ConfigError);
}

TEST(Manifest, Sha256KnownVectors) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / fmt::format("creditvote_test_{}_{}", ::getpid(), counter()++);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int n = 0;
    return n;
  }
};

int run_cli(const std::string& args) {
  const std::string cmd = fmt::format("\"{}\" {} > /dev/null 2>&1", CREDITVOTE_CLI, args);
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_config(const fs::path& dir, const std::string& out, int persons = 1500, int zones = 6) {
  nlohmann::json j{{"out", (dir / out).string()},
                   {"world", {{"n_czs", zones}, {"persons_per_cz", persons}, {"seed", 17}}}};
  const auto path = dir / (out + ".json");
  write_file(path, j.dump());
  return path;
}

std::map<std::string, std::string> data_hashes(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (!name.starts_with("manifest_")) out[name] = sha256_file(e.path());
  }
  return out;
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

}  // namespace

TEST(Manifest, HashesMatchFiles) {
  TempDir tmp;
  write_file(tmp.path / "a.txt", "abc");
  const auto m = write_manifest(tmp.path, "unit", nlohmann::json{{"k", 1}}, {tmp.path / "a.txt"}, {});
  const auto j = nlohmann::json::parse(read_file(m));
  EXPECT_EQ(j.dump().find("ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad") != std::string::npos,
            true);
  const auto again = read_file(write_manifest(tmp.path, "unit", nlohmann::json{{"k", 1}}, {tmp.path / "a.txt"}, {}));
  EXPECT_EQ(read_file(m), again);
}

TEST(Cli, FullRunWritesDocumentedFiles) {
  TempDir tmp;
  ASSERT_EQ(run_cli(fmt::format("--config {}", write_config(tmp.path, "run").string())), 0);
  const auto out = tmp.path / "run";
  EXPECT_EQ(first_line(out / "thresholds.csv"), "cz,year,cutoff,alpha,se,t,provenance,source_year");
  EXPECT_EQ(first_line(out / "shares.csv"), "cell_id,year,bw,share_tot,share_above,share_below,pop");
  EXPECT_EQ(first_line(out / "scan_skips.csv"), "cz,year,cutoff,reason,observations,detail");
  for (const auto* f : {"estimates.json", "report.txt", "report.csv", "manifest_report.json", "ccd_cells.csv",
                        "density_tests.csv", "share_summary.txt"})
    EXPECT_TRUE(fs::exists(out / f)) << f;

  // every hash in the estimate manifest matches the file on disk
  const auto m = nlohmann::json::parse(read_file(out / "manifest_estimate.json"));
  int checked = 0;
  for (const auto* section : {"inputs", "outputs"})
    for (const auto& [name, hash] : m.at(section).items()) {
      EXPECT_EQ(hash.get<std::string>(), sha256_file(out / name)) << name;
      ++checked;
    }
  EXPECT_GT(checked, 3);

  const auto est = nlohmann::json::parse(read_file(out / "estimates.json"));
  EXPECT_EQ(est.at("vote_models").size(), 4u);
  EXPECT_EQ(est.at("nominate_models").size(), 3u);
  const auto report = read_file(out / "report.txt");
  EXPECT_NE(report.find("Bandwidth sweep"), std::string::npos);
}

TEST(Cli, RerunAndWorkerCountGiveIdenticalOutputs) {
  TempDir tmp;
  const auto cfg = write_config(tmp.path, "run");
  ASSERT_EQ(run_cli(fmt::format("--config {}", cfg.string())), 0);
  const auto first = data_hashes(tmp.path / "run");
  const auto manifest = read_file(tmp.path / "run" / "manifest_scan.json");
  ASSERT_EQ(run_cli(fmt::format("--config {}", cfg.string())), 0);
  EXPECT_EQ(data_hashes(tmp.path / "run"), first);
  EXPECT_EQ(read_file(tmp.path / "run" / "manifest_scan.json"), manifest);
  ASSERT_EQ(run_cli(fmt::format("--config {} --workers 3 --out {}", cfg.string(), (tmp.path / "w3").string())), 0);
  EXPECT_EQ(data_hashes(tmp.path / "w3"), first);
}

TEST(Cli, ExitCodes) {
  TempDir tmp;
  const auto cfg = write_config(tmp.path, "run");
  EXPECT_EQ(run_cli(fmt::format("--config {} --stage estimate --out {}", cfg.string(),
                                (tmp.path / "empty").string())),
            3);
  write_file(tmp.path / "bad.json", "{\"wrld\": {}}");
  EXPECT_EQ(run_cli(fmt::format("--config {}", (tmp.path / "bad.json").string())), 2);
  write_file(tmp.path / "broken.json", "{ not json");
  EXPECT_EQ(run_cli(fmt::format("--config {}", (tmp.path / "broken.json").string())), 2);
  EXPECT_EQ(run_cli(fmt::format("--config {} --bandwidth 7", cfg.string())), 2);
  EXPECT_EQ(run_cli(fmt::format("--config {} --stage plot", cfg.string())), 2);
  EXPECT_EQ(run_cli("--no-such-flag"), 2);
}

TEST(Cli, YearRestriction) {
  TempDir tmp;
  const auto cfg = write_config(tmp.path, "run");
  ASSERT_EQ(run_cli(fmt::format("--config {}", cfg.string())), 0);
  // one year leaves nothing to identify cell effects against
  EXPECT_EQ(run_cli(fmt::format("--config {} --stage estimate --years 2012", cfg.string())), 4);
  ASSERT_EQ(run_cli(fmt::format("--config {} --stage estimate --years 2012,2014,2016", cfg.string())), 0);
  const auto est = nlohmann::json::parse(read_file(tmp.path / "run" / "estimates.json"));
  EXPECT_EQ(est.at("years").get<std::vector<int>>(), (std::vector<int>{2012, 2014, 2016}));
  for (const auto& m : est.at("vote_models"))
    EXPECT_EQ(m.at("years").get<std::vector<int>>(), (std::vector<int>{2012, 2014, 2016}));
}

TEST(Cli, TinyZonesProduceNoThresholds) {
  TempDir tmp;
  const auto cfg = write_config(tmp.path, "run", 60, 4);  // well under the per-zone-year minimum
  ASSERT_EQ(run_cli(fmt::format("--config {} --stage simulate", cfg.string())), 0);
  ASSERT_EQ(run_cli(fmt::format("--config {} --stage crosswalk", cfg.string())), 0);
  ASSERT_EQ(run_cli(fmt::format("--config {} --stage scan", cfg.string())), 0);
  const auto thresholds = CsvTable::read(tmp.path / "run" / "thresholds.csv");
  EXPECT_EQ(thresholds.size(), 0u);
  const auto skips = CsvTable::read(tmp.path / "run" / "scan_skips.csv");
  EXPECT_EQ(skips.size(), 4u * 7);
  for (std::size_t i = 0; i < skips.size(); ++i) EXPECT_EQ(skips.text(i, "reason"), "insufficient_observations");
}

TEST(Cli, ReportOnEmptyEstimates) {
  TempDir tmp;
  const auto cfg = write_config(tmp.path, "run");
  fs::create_directories(tmp.path / "run");
  write_file(tmp.path / "run" / "estimates.json",
             R"({"bandwidth": 15, "years": [], "vote_models": [], "nominate_models": [], "sweeps": {}})");
  ASSERT_EQ(run_cli(fmt::format("--config {} --stage report", cfg.string())), 0);
  const auto report = read_file(tmp.path / "run" / "report.txt");
  EXPECT_NE(report.find("Vote shares"), std::string::npos);
  EXPECT_EQ(CsvTable::read(tmp.path / "run" / "report.csv").size(), 0u);
}

TEST(Cli, OutOfRangeScoresDroppedAtIngestion) {
  TempDir tmp;
  const auto cfg = write_config(tmp.path, "run", 800, 3);
  ASSERT_EQ(run_cli(fmt::format("--config {} --stage simulate", cfg.string())), 0);
  {
    std::ofstream out(tmp.path / "run" / "credit_panel.csv", std::ios::app);
    out << "999999,2008,900,5000,ZZZZZ,01001,CZ001\n";
  }
  ASSERT_EQ(run_cli(fmt::format("--config {} --stage scan", cfg.string())), 0);
  const auto ex = CsvTable::read(tmp.path / "run" / "credit_exclusions.csv");
  ASSERT_EQ(ex.size(), 1u);
  EXPECT_EQ(ex.text(0, ex.header()[0]), "credit_score");
  EXPECT_EQ(ex.text(0, ex.header()[1]).substr(0, 9), "1 records");
}
