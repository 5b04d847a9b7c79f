#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "support.hpp"
#include "tieforge/cli/commands.hpp"
#include "tieforge/trainer/checkpoint.hpp"

using namespace tieforge;
using tieforge::testing::slurp;
using tieforge::testing::spit;
using tieforge::testing::TempDir;

namespace {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "tieforge");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> synth_args(const std::string& out, const std::string& seed = "3") {
  return {"synth", "--relations", "5", "--bags", "60", "--entity-pool", "60", "--rule", "1:2:1", "--exclude",
          "3:4", "--seed", seed, "--out", out};
}

std::vector<std::string> train_args(const std::string& data, const std::string& out) {
  return {"train", "--train", data + "/train.jsonl", "--relations", data + "/relations.tsv", "--word-dim", "4",
          "--pos-dim", "2", "--feature-maps", "6", "--max-distance", "5", "--batch-size", "10", "--epochs", "2",
          "--out", out};
}

std::vector<std::string> eval_args(const std::string& data, const std::string& ckpt, const std::string& out) {
  return {"eval", "--checkpoint", ckpt, "--test", data + "/test.jsonl", "--out", out};
}

std::vector<std::vector<std::string>> read_tsv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream cells_in(line);
    std::string cell;
    while (std::getline(cells_in, cell, '\t')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::size_t count_lines(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("invalid arguments exit with status 2") {
  TempDir dir("cli-invalid");
  const auto data = (dir / "data").string();
  auto bad_prob = synth_args(data);
  bad_prob[8] = "1:2:1.2";
  const auto r = run(bad_prob);
  CHECK(r.code == cli::kExitInvalid);
  CHECK(r.err.find("error:") != std::string::npos);
  CHECK_FALSE(std::filesystem::exists(dir / "data"));

  auto malformed = synth_args(data);
  malformed[8] = "1-2";
  CHECK(run(malformed).code == cli::kExitInvalid);
  auto contradictory = synth_args(data);
  contradictory[10] = "1:2";
  CHECK(run(contradictory).code == cli::kExitInvalid);

  CHECK(run({"synth", "--no-such-flag"}).code == cli::kExitInvalid);
  CHECK(run({}).code == cli::kExitInvalid);
  CHECK(run({"train", "--relations", "x"}).code == cli::kExitInvalid);
  CHECK(run({"train", "--train", "nope.jsonl", "--relations", "nope.tsv"}).code == cli::kExitInvalid);
  CHECK(run({"train", "--train", "a", "--relations", "b", "--activation", "sigmoid"}).code == cli::kExitInvalid);
  CHECK(run({"train", "--train", "a", "--relations", "b", "--kernel", "4"}).code == cli::kExitInvalid);

  const auto help = run({"--help"});
  CHECK(help.code == cli::kExitOk);
  CHECK(help.out.find("build-graph") != std::string::npos);
}

TEST_CASE("synth writes a deterministic corpus") {
  TempDir dir("cli-synth");
  const auto a = run(synth_args((dir / "a").string()));
  const auto b = run(synth_args((dir / "b").string()));
  const auto c = run(synth_args((dir / "c").string(), "4"));
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.find("train_bags=") != std::string::npos);
  for (const char* f : {cli::kTrainFile, cli::kTestFile, cli::kRelationsFile, cli::kTiesFile}) {
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }
  CHECK(slurp(dir / "a" / cli::kTrainFile) != slurp(dir / "c" / cli::kTrainFile));
  CHECK(slurp(dir / "a" / cli::kTiesFile) == "IMPLIES\trel_01\trel_02\t1\nEXCLUDES\trel_03\trel_04\n");
  CHECK(count_lines(slurp(dir / "a" / cli::kRelationsFile)) == 5);

  const auto echo = slurp(dir / "a" / cli::kEffectiveConfigFile);
  CHECK(echo.rfind("[synth]\n", 0) == 0);
  CHECK(echo.find("bags = 60\n") != std::string::npos);
  CHECK(echo.find("rule = [\"1:2:1\"]\n") != std::string::npos);
  CHECK(echo.find("entity-pool = 60\n") != std::string::npos);
}

TEST_CASE("build-graph dumps matrices that follow the threshold") {
  TempDir dir("cli-graph");
  const auto data = (dir / "data").string();
  REQUIRE(run(synth_args(data)).code == 0);
  std::size_t previous = SIZE_MAX;
  for (const char* theta : {"0.01", "0.18", "0.5", "0.99"}) {
    const auto out = (dir / (std::string("g") + theta)).string();
    const auto r = run({"build-graph", "--train", data + "/train.jsonl", "--relations", data + "/relations.tsv",
                        "--theta", theta, "--out", out});
    REQUIRE(r.code == 0);
    const auto pos = r.out.find("filtered_edges=");
    REQUIRE(pos != std::string::npos);
    const std::size_t edges = std::stoul(r.out.substr(pos + 15));
    CHECK(edges <= previous);
    previous = edges;

    const auto u = read_tsv(slurp(out + "/U.tsv"));
    REQUIRE(u.size() == 6);
    CHECK(u[0][0] == "relation");
    CHECK(u[4][0] == "rel_03");
    CHECK(u[4][5] == "1");
    CHECK(u[5][4] == "1");
    const auto m = read_tsv(slurp(out + "/M.tsv"));
    CHECK(m[4][5] == "0");
    // Rule 1→2 fires with certainty, so P̂(1,2) = 1 at any threshold.
    CHECK(read_tsv(slurp(out + "/P_hat.tsv"))[2][3] == "1");
    CHECK(read_tsv(slurp(out + "/N.tsv"))[0] == std::vector<std::string>{"relation", "count"});
  }
}

TEST_CASE("train and eval are byte-for-byte reproducible") {
  TempDir dir("cli-train");
  const auto data = (dir / "data").string();
  REQUIRE(run(synth_args(data)).code == 0);
  for (const char* run_dir : {"r1", "r2"}) {
    const auto t = run(train_args(data, (dir / run_dir).string()));
    INFO(t.err);
    REQUIRE(t.code == 0);
    CHECK(t.out.find("epochs=2\n") != std::string::npos);
  }
  CHECK(slurp(dir / "r1" / cli::kCheckpointFile) == slurp(dir / "r2" / cli::kCheckpointFile));
  CHECK(slurp(dir / "r1" / cli::kLossTraceFile) == slurp(dir / "r2" / cli::kLossTraceFile));
  CHECK(count_lines(slurp(dir / "r1" / cli::kLossTraceFile)) == 3);

  auto reseeded = train_args(data, (dir / "r3").string());
  reseeded.insert(reseeded.end(), {"--seed", "9"});
  REQUIRE(run(reseeded).code == 0);
  CHECK(slurp(dir / "r1" / cli::kCheckpointFile) != slurp(dir / "r3" / cli::kCheckpointFile));

  const auto ckpt = (dir / "r1" / cli::kCheckpointFile).string();
  auto e1 = eval_args(data, ckpt, (dir / "e1").string());
  e1.insert(e1.end(), {"--ties", data + "/ties.tsv", "--export-embeddings", "--relations", data + "/relations.tsv"});
  auto e2 = e1;
  e2[6] = (dir / "e2").string();
  const auto a = run(e1);
  const auto b = run(e2);
  INFO(a.err);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.find("auc=") != std::string::npos);
  CHECK(a.out.find("margin=") != std::string::npos);
  CHECK(slurp(dir / "e1" / cli::kPrCurveFile) == slurp(dir / "e2" / cli::kPrCurveFile));
  CHECK(slurp(dir / "e1" / cli::kReportFile).find("masked_cosine=") != std::string::npos);

  const auto projection = read_tsv(slurp(dir / "e1" / cli::kProjectionFile));
  REQUIRE(projection.size() == 5);
  CHECK(projection[0][0] == "NA");
  CHECK(projection[4][0] == "rel_04");
  CHECK(projection[4].size() == 3);
}

TEST_CASE("config files are overridden by flags and the echo replays the run") {
  TempDir dir("cli-config");
  const auto data = (dir / "data").string();
  REQUIRE(run(synth_args(data)).code == 0);
  spit(dir / "base.ini", "[train]\nepochs = 3\nlambda = 0.5\n");
  auto args = train_args(data, (dir / "r1").string());
  args.insert(args.begin(), {"--config", (dir / "base.ini").string()});
  const auto r = run(args);
  INFO(r.err);
  REQUIRE(r.code == 0);
  const auto echo = slurp(dir / "r1" / cli::kEffectiveConfigFile);
  CHECK(echo.rfind("[train]\n", 0) == 0);
  CHECK(echo.find("epochs = 2\n") != std::string::npos);
  CHECK(echo.find("lambda = 0.5\n") != std::string::npos);
  CHECK(echo.find("kernel = 3\n") != std::string::npos);
  CHECK(echo.find("graph-off = false\n") != std::string::npos);

  const auto replay =
      run({"--config", (dir / "r1" / cli::kEffectiveConfigFile).string(), "train", "--out", (dir / "r2").string()});
  INFO(replay.err);
  REQUIRE(replay.code == 0);
  CHECK(slurp(dir / "r1" / cli::kCheckpointFile) == slurp(dir / "r2" / cli::kCheckpointFile));
}

TEST_CASE("graph-off trains against the identity graph") {
  TempDir dir("cli-graph-off");
  const auto data = (dir / "data").string();
  REQUIRE(run(synth_args(data)).code == 0);
  auto args = train_args(data, (dir / "off").string());
  args.push_back("--graph-off");
  REQUIRE(run(args).code == 0);
  REQUIRE(run(train_args(data, (dir / "on").string())).code == 0);
  const auto off = trainer::load_checkpoint(dir / "off" / cli::kCheckpointFile);
  const auto on = trainer::load_checkpoint(dir / "on" / cli::kCheckpointFile);
  CHECK_FALSE(off.config.graph_enabled);
  CHECK(off.graph.edge_count() == 0);
  CHECK(on.graph.edge_count() > 0);
  CHECK(slurp(dir / "off" / cli::kEffectiveConfigFile).find("graph-off = true\n") != std::string::npos);
}

TEST_CASE("eval refuses mismatched or damaged checkpoints") {
  TempDir dir("cli-mismatch");
  const auto data = (dir / "data").string();
  REQUIRE(run(synth_args(data)).code == 0);
  REQUIRE(run(train_args(data, (dir / "r").string())).code == 0);
  const auto ckpt = (dir / "r" / cli::kCheckpointFile).string();

  auto other = synth_args((dir / "other").string());
  other[2] = "6";
  REQUIRE(run(other).code == 0);
  auto mismatch = eval_args(data, ckpt, (dir / "e").string());
  mismatch.insert(mismatch.end(), {"--relations", (dir / "other" / cli::kRelationsFile).string()});
  const auto r = run(mismatch);
  CHECK(r.code != 0);
  CHECK(r.err.find("k=5") != std::string::npos);

  spit(dir / "broken.ckpt", slurp(ckpt).substr(0, 100));
  CHECK(run(eval_args(data, (dir / "broken.ckpt").string(), (dir / "e").string())).code == cli::kExitFailure);
  CHECK(run(eval_args(data, (dir / "none.ckpt").string(), (dir / "e").string())).code == cli::kExitInvalid);
}

}  // TEST_SUITE
