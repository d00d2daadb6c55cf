#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rexkit/rexkit.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("rexkit_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome cli(const std::string& args, const std::string& env = "") {
  const auto err_file = fs::temp_directory_path() / "rexkit_cli_stderr.txt";
  const std::string cmd = env + " " + REXKIT_CLI + " " + args + " 2>" +
                          err_file.string();
  Outcome o;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return o;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) o.out.append(buf.data(), n);
  const int status = pclose(pipe);
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  o.err = slurp(err_file);
  return o;
}

}  // namespace

TEST(Cli, ExtractGolf) {
  const auto o = cli("extract --data fixture:golf --mode direct");
  EXPECT_EQ(o.code, 0) << o.err;
  EXPECT_NE(o.out.find("Outlook (A_1) = sunny and Humidity (A_3)"), std::string::npos);
  EXPECT_NE(o.out.find("Default Rule: play."), std::string::npos);
  EXPECT_NE(o.err.find("config: "), std::string::npos);
}

TEST(Cli, ExtractSeasonReportsFullAccuracy) {
  const auto o = cli("extract --data fixture:season --mode direct");
  EXPECT_EQ(o.code, 0) << o.err;
  EXPECT_NE(o.out.find("100.00 %"), std::string::npos);
}

TEST(Cli, MissingDataIsUsageError) {
  const auto o = cli("extract --mode direct");
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("--data"), std::string::npos);
}

TEST(Cli, UnknownFlagAndBadValues) {
  EXPECT_EQ(cli("extract --data fixture:golf --bogus").code, 1);
  EXPECT_EQ(cli("extract --data fixture:golf --mode neural").code, 1);
  EXPECT_EQ(cli("extract --data fixture:golf --seed abc").code, 1);
  EXPECT_EQ(cli("").code, 1);
  EXPECT_EQ(cli("frobnicate").code, 1);
  EXPECT_EQ(cli("extract --data fixture:chess").code, 1);
  EXPECT_EQ(cli("extract --data fixture:golf", "REXKIT_SEED=xyz").code, 1);
}

TEST(Cli, BadPathIsDataError) {
  EXPECT_EQ(cli("extract --data /nonexistent/x.csv").code, 2);
  EXPECT_EQ(cli("extract --data iris:/nonexistent/iris.data").code, 2);
  const auto dir = scratch("bad");
  std::ofstream(dir / "bad.csv") << "1,a\n2,b,c\n";
  EXPECT_EQ(cli("extract --data " + (dir / "bad.csv").string()).code, 2);
}

TEST(Cli, SeedFromEnvironmentIsEchoed) {
  const auto o = cli("extract --data fixture:golf", "REXKIT_SEED=77");
  EXPECT_EQ(o.code, 0);
  EXPECT_NE(o.err.find("\"seed\":77"), std::string::npos);
  const auto flag = cli("extract --data fixture:golf --seed 5", "REXKIT_SEED=77");
  EXPECT_NE(flag.err.find("\"seed\":5"), std::string::npos);
}

TEST(Cli, ExportedFixtureExtractsTheSameRules) {
  const auto dir = scratch("export");
  const auto csv = dir / "golf.csv";
  ASSERT_EQ(cli("export-fixture --name golf --out " + csv.string()).code, 0);
  const auto from_file = cli("extract --header --data " + csv.string());
  const auto builtin = cli("extract --data fixture:golf");
  EXPECT_EQ(from_file.code, 0) << from_file.err;
  // Rule lines agree; the report's dataset name differs.
  auto rules_of = [](const std::string& s) { return s.substr(0, s.find("Data Set")); };
  EXPECT_EQ(rules_of(from_file.out), rules_of(builtin.out));
}

TEST(Cli, ArtifactsAndEvalRoundTrip) {
  const auto dir = scratch("eval");
  const auto o = cli("extract --data fixture:season --out " + dir.string());
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_TRUE(fs::exists(dir / "config.json"));
  // Text printed on stdout equals the rendering of the saved JSON rule set.
  const auto j = nlohmann::json::parse(slurp(dir / "rules_final.json"));
  const auto rs = rexkit::rex::ruleset_from_json(j, rexkit::season_fixture().schema());
  EXPECT_EQ(o.out.rfind(rexkit::rex::render_text(rs), 0), 0u);

  const auto e = cli("eval --data fixture:season --rules " +
                     (dir / "rules_final.json").string() + " --format csv");
  EXPECT_EQ(e.code, 0) << e.err;
  EXPECT_NE(e.out.find("season,4,5,1,1,"), std::string::npos);
  EXPECT_EQ(cli("eval --data fixture:golf --rules " +
                (dir / "rules_final.json").string()).code, 2);
}

TEST(Cli, TrainWritesNetwork) {
  const auto dir = scratch("train");
  const auto o = cli("train --data fixture:golf --max-epochs 500 --out " + dir.string());
  EXPECT_EQ(o.code, 0) << o.err;
  EXPECT_NE(o.out.find("training accuracy"), std::string::npos);
  std::ifstream in(dir / "network.json");
  EXPECT_NO_THROW(rexkit::net::network_from_json(nlohmann::json::parse(in)));
}

TEST(Cli, ReproduceMissingFileStillCompletesOthers) {
  const auto dir = scratch("repro");
  const auto o = cli("reproduce --iris /nonexistent --out " + dir.string());
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.out.find("golf"), std::string::npos);
  EXPECT_NE(o.out.find("breast-cancer"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "season" / "rules_final.json"));
  EXPECT_FALSE(fs::exists(dir / "iris"));
}
