#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "support/case_study.hpp"

namespace {

using namespace wecharge;
namespace cs = wecharge::testkit::case_study;
namespace fs = std::filesystem;

struct CliRun {
  int exit_code = -1;
  std::string out;
};

CliRun wecharge_cli(const std::string& args) {
  const std::string cmd = std::string(WECHARGE_CLI_PATH) + " " + args + " 2>&1";
  CliRun r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string data(const char* name) { return cs::data_path(name).string(); }

class TempFile {
 public:
  explicit TempFile(const std::string& contents) {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("wecharge-cli-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + ".json");
    std::ofstream(path_) << contents;
  }
  ~TempFile() { fs::remove(path_); }
  std::string str() const { return path_.string(); }

 private:
  fs::path path_;
};

std::string match_args(const char* weights) {
  return std::string("match --lat 50.9307 --lon 5.3325 ") + weights + " --ev " +
         data("nissan_leaf_2018.json") + " --catalog " + data("case_study_catalog.json") +
         " --window 1791968400,1791975600";
}

TEST(CatalogLoad, RegistersFullCatalog) {
  const CliRun r = wecharge_cli("catalog load " + data("case_study_catalog.json"));
  EXPECT_EQ(r.exit_code, 0) << r.out;
  EXPECT_NE(r.out.find("registered 25 station(s), rejected 0"), std::string::npos) << r.out;
}

TEST(CatalogLoad, EmptyFileRegistersNothing) {
  const TempFile empty("");
  const CliRun r = wecharge_cli("catalog load " + empty.str());
  EXPECT_EQ(r.exit_code, 0) << r.out;
  EXPECT_NE(r.out.find("registered 0 station(s)"), std::string::npos) << r.out;
}

TEST(CatalogLoad, MalformedRecordIsReportedOthersLoad) {
  json catalog = json::parse(catalog::read_file(cs::data_path("case_study_catalog.json")));
  json& records = catalog.is_array() ? catalog : catalog["stations"];
  records[4]["location"]["lat"] = 123.0;
  const TempFile file(catalog.dump(2));
  const CliRun r = wecharge_cli("catalog load " + file.str());
  EXPECT_NE(r.exit_code, 0);
  EXPECT_NE(r.out.find("registered 24 station(s), rejected 1"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("record 4"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("InvalidStation"), std::string::npos) << r.out;
}

TEST(CatalogLoad, MissingFileFails) {
  EXPECT_NE(wecharge_cli("catalog load /nonexistent/catalog.json").exit_code, 0);
}

TEST(Match, EqualWeightsPickStationOne) {
  const CliRun r = wecharge_cli(match_args("--w-distance 0.25 --w-time 0.25 --w-wait 0.25 --w-cost 0.25"));
  EXPECT_EQ(r.exit_code, 0) << r.out;
  EXPECT_NE(r.out.find("best: station 1 "), std::string::npos) << r.out;
}

TEST(Match, DistanceAndWaitHeavyPickStationTwelve) {
  const CliRun r = wecharge_cli(match_args("--w-distance 0.4 --w-time 0.1 --w-wait 0.4 --w-cost 0.1"));
  EXPECT_EQ(r.exit_code, 0) << r.out;
  EXPECT_NE(r.out.find("best: station 12 "), std::string::npos) << r.out;
}

TEST(Match, ZeroWeightsIsUsageError) {
  const CliRun r = wecharge_cli(match_args("--w-distance 0 --w-time 0 --w-wait 0 --w-cost 0"));
  EXPECT_EQ(r.exit_code, 2) << r.out;
}

TEST(Match, MissingRequiredOptionIsUsageError) {
  EXPECT_EQ(wecharge_cli("match --lat 50 --lon 5").exit_code, 2);
}

TEST(Match, JsonOutputEqualsLibraryResult) {
  const CliRun r = wecharge_cli(match_args("--w-distance 0.4 --w-time 0.1 --w-wait 0.4 --w-cost 0.1") +
                             " --format json");
  ASSERT_EQ(r.exit_code, 0) << r.out;
  const MatchResult got = match_result_from_json(json::parse(r.out));
  EXPECT_EQ(got, match(cs::request(cs::kS2), cs::catalog_stations()));
}

TEST(Match, NoFeasibleStationListsExclusions) {
  json ev = json::parse(catalog::read_file(cs::data_path("nissan_leaf_2018.json")));
  ev["current_soc"] = 0.0;
  const TempFile file(ev.dump());
  const CliRun r = wecharge_cli("match --lat 50.9307 --lon 5.3325 --w-distance 1 --w-time 1 --w-wait 1 "
                             "--w-cost 1 --ev " + file.str() + " --catalog " +
                             data("case_study_catalog.json") + " --window 1791968400,1791975600");
  EXPECT_EQ(r.exit_code, 1) << r.out;
  EXPECT_NE(r.out.find("Unreachable"), std::string::npos) << r.out;
}

TEST(CaseStudy, BothScenarios) {
  const CliRun r = wecharge_cli("case-study");
  EXPECT_EQ(r.exit_code, 0) << r.out;
  EXPECT_NE(r.out.find("S1: rows 24"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("S2: rows 24"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("best id 1 "), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("best id 12 "), std::string::npos) << r.out;
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos) << r.out;
}

TEST(CaseStudy, SingleScenario) {
  const CliRun s1 = wecharge_cli("case-study --scenario s1");
  EXPECT_EQ(s1.exit_code, 0);
  EXPECT_NE(s1.out.find("S1: rows 24"), std::string::npos);
  EXPECT_EQ(s1.out.find("S2:"), std::string::npos);
  const CliRun s2 = wecharge_cli("case-study --scenario s2");
  EXPECT_EQ(s2.exit_code, 0);
  EXPECT_NE(s2.out.find("best id 12 "), std::string::npos) << s2.out;
  EXPECT_EQ(wecharge_cli("case-study --scenario s3").exit_code, 2);
}

TEST(CaseStudy, MissingFixtureIsExitTwo) {
  const CliRun r = wecharge_cli("case-study --fixture /nonexistent/table2.csv");
  EXPECT_EQ(r.exit_code, 2) << r.out;
  EXPECT_NE(r.out.find("FixtureMissing"), std::string::npos) << r.out;
}

}  // namespace
