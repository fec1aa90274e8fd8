#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "sw/errors.hpp"
#include "sw/tensor_io.hpp"

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::current_path() / "cli_work" / info->name();
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }

  fs::path path(const std::string& name) const { return dir_ / name; }

  RunResult run(const std::string& args) const {
    const auto out = path("stdout.txt");
    const auto err = path("stderr.txt");
    const std::string cmd = std::string("\"") + SWHITEN_PATH + "\" " + args + " >\"" + out.string() + "\" 2>\"" +
                            err.string() + "\"";
    const int raw = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  fs::path write_input(const std::string& name, sw::Shape4 shape, std::uint64_t seed, double scale = 1.0) const {
    const auto p = path(name);
    sw::save_tensor_file(p, sw::to_record(sw::oracle::random_tensor(shape, seed, scale), sw::DType::F64));
    return p;
  }

  fs::path dir_;
};

TEST_F(Cli, GradcheckExitCodes) {
  const auto ok = run("gradcheck --seeds 1 --omega bw,iw --path eigen");
  EXPECT_EQ(ok.exit_code, 0) << ok.err;
  std::istringstream lines(ok.out);
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j["status"], "pass");
    ++count;
  }
  EXPECT_EQ(count, 5);
  EXPECT_EQ(run("gradcheck --seeds 1 --omega bw,iw --path eigen --tol 1e-14").exit_code, 1);
}

TEST_F(Cli, GradcheckFiltersByOmegaAndPath) {
  const auto r = run("gradcheck --seeds 2 --omega bw,iw --path newton");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j["path"], "newton");
    EXPECT_EQ(j["omega"], "bw,iw");
    ++count;
  }
  EXPECT_EQ(count, 10);
}

TEST_F(Cli, FreshCheckpointHasUniformWeights) {
  const auto in = write_input("x.swt", sw::Shape4{2, 16, 2, 2}, 4);
  const auto ck = path("fresh.ckpt");
  ASSERT_EQ(run("whiten --mode eval --omega bw,iw,bn --input " + in.string() + " --output " + path("y.swt").string() +
                " --checkpoint-out " + ck.string())
                .exit_code,
            0);
  const auto r = run("inspect --checkpoint " + ck.string());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["step_count"], 0);
  for (const char* key : {"omega_mean", "omega_cov"}) {
    ASSERT_EQ(j[key].size(), 3u);
    for (const auto& w : j[key]) EXPECT_EQ(w.get<double>(), 1.0 / 3.0);
  }
}

TEST_F(Cli, WhitenIsByteStable) {
  const auto in = write_input("x.swt", sw::Shape4{4, 16, 4, 4}, 3);
  ASSERT_EQ(run("whiten --input " + in.string() + " --output " + path("a.swt").string()).exit_code, 0);
  ASSERT_EQ(run("whiten --input " + in.string() + " --output " + path("b.swt").string()).exit_code, 0);
  EXPECT_EQ(slurp(path("a.swt")), slurp(path("b.swt")));
}

TEST_F(Cli, WhitenedOutputHasIdentityCovariance) {
  const auto in = write_input("x.swt", sw::Shape4{8, 8, 8, 8}, 5, 3.0);
  const auto r = run("whiten --omega bw --G 4 --input " + in.string() + " --output " + path("y.swt").string() +
                     " --stats " + path("cov.swt").string());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto cov = sw::load_tensor_file(path("cov.swt"));
  ASSERT_EQ(cov.dims, (std::vector<std::uint32_t>{2, 4, 4}));
  for (std::size_t g = 0; g < 2; ++g) {
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < 4; ++j) {
        EXPECT_NEAR(cov.values[(g * 4 + i) * 4 + j], i == j ? 1.0 : 0.0, 1e-3);
      }
    }
  }
}

TEST_F(Cli, EvalModeOnFreshStateIsNearIdentity) {
  const auto in = write_input("x.swt", sw::Shape4{2, 16, 3, 3}, 7);
  const auto r = run("whiten --mode eval --omega bw --input " + in.string() + " --output " + path("y.swt").string());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto x = sw::load_tensor_file(in);
  const auto y = sw::load_tensor_file(path("y.swt"));
  ASSERT_EQ(x.values.size(), y.values.size());
  const double scale = 1.0 / std::sqrt(1.0 + 1e-5);
  for (std::size_t i = 0; i < x.values.size(); ++i) EXPECT_NEAR(y.values[i], x.values[i] * scale, 1e-12);
}

TEST_F(Cli, TruncatedInputIsAFormatError) {
  const auto in = write_input("x.swt", sw::Shape4{2, 16, 2, 2}, 1);
  auto bytes = sw::read_file_bytes(in);
  bytes.resize(bytes.size() - 3);
  sw::write_file_bytes(in, bytes);
  const auto r = run("whiten --input " + in.string() + " --output " + path("y.swt").string());
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("FormatError"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(path("y.swt")));
}

TEST_F(Cli, MissingCheckpointIsAFileError) {
  const auto r = run("inspect --checkpoint " + path("none.ckpt").string());
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("FileError"), std::string::npos) << r.err;
}

TEST_F(Cli, BenchRejectsZeroRepetitions) {
  const auto r = run("bench --reps 0 --no-sweep --shape 2,16,2,2");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("ConfigError"), std::string::npos) << r.err;
}

TEST_F(Cli, BenchWritesCsv) {
  const auto r = run("bench --reps 10 --warmup 1 --shape 2,16,2,2 --sweep-shape 1,16,2,2");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line.rfind("kind,path,", 0), 0u);
  int bench = 0;
  int sweep = 0;
  while (std::getline(lines, line)) {
    bench += line.rfind("bench,", 0) == 0 ? 1 : 0;
    sweep += line.rfind("sweep,", 0) == 0 ? 1 : 0;
  }
  EXPECT_EQ(bench, 2);
  EXPECT_EQ(sweep, 8);
}

std::vector<double> split_doubles(const std::string& line) {
  std::vector<double> v;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) v.push_back(cell.empty() ? NAN : std::stod(cell));
  return v;
}

TEST_F(Cli, InspectMatchesLastLogRow) {
  const auto log = path("log.csv");
  const auto r = run("train-demo --steps 20 --style 1 --log " + log.string() + " --save-dir " + path("ck").string());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  std::istringstream lines(slurp(log));
  std::string header;
  std::string line;
  std::string last;
  std::getline(lines, header);
  while (std::getline(lines, line)) last = line;
  const auto row = split_doubles(last);
  ASSERT_EQ(row.size(), 10u);
  EXPECT_EQ(row[0], 20.0);
  for (std::size_t layer = 0; layer < 2; ++layer) {
    const auto ins = run("inspect --checkpoint " + path("ck/sw_layer" + std::to_string(layer) + ".ckpt").string());
    ASSERT_EQ(ins.exit_code, 0) << ins.err;
    const auto j = nlohmann::json::parse(ins.out);
    EXPECT_EQ(j["step_count"], 20);
    const std::size_t base = 2 + layer * 4;
    EXPECT_EQ(j["omega_mean"][0].get<double>(), row[base + 0]);
    EXPECT_EQ(j["omega_mean"][1].get<double>(), row[base + 1]);
    EXPECT_EQ(j["omega_cov"][0].get<double>(), row[base + 2]);
    EXPECT_EQ(j["omega_cov"][1].get<double>(), row[base + 3]);
  }
}

TEST_F(Cli, FlagsOverrideConfigFile) {
  {
    std::ofstream cfg(path("cfg.json"));
    cfg << R"({"G": 8, "omega": "bw,iw,bn", "eps": 0.001})";
  }
  const auto in = write_input("x.swt", sw::Shape4{2, 16, 2, 2}, 2);
  const auto r = run("whiten --config " + path("cfg.json").string() + " --G 4 --input " + in.string() +
                     " --output " + path("y.swt").string());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto at = r.err.find("effective config: ");
  ASSERT_NE(at, std::string::npos);
  const auto end = r.err.find('\n', at);
  const auto j = nlohmann::json::parse(r.err.substr(at + 18, end - at - 18));
  EXPECT_EQ(j["G"], 4);
  EXPECT_EQ(j["eps"], 0.001);
  EXPECT_EQ(j["omega"], nlohmann::json({"bw", "iw", "bn"}));
}

TEST_F(Cli, UnknownSubcommandFails) { EXPECT_NE(run("frobnicate").exit_code, 0); }

}  // namespace
