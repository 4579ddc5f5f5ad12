#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "qclab/checkpoint.hpp"
#include "qclab/config.hpp"
#include "qclab/error.hpp"
#include "qclab/experiment.hpp"
#include "qclab/report_csv.hpp"

using namespace qclab;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = QCLAB_SOURCE_DIR;
const std::string kCli = QCLAB_CLI;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / name;
  fs::remove_all(p);
  return p;
}

int run(const std::string& args) {
  const int rc = std::system((kCli + " " + args + " 2>/dev/null").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("config parsing") {
  const Config c = Config::parse(
      "# comment\n"
      "seed = 12   # trailing comment\n"
      "\n"
      "model.depth=3\n"
      "train.learning_rate = 5e-3\n"
      "flag = yes\n"
      "list = a, b ,c\n"
      "path = data/x\n");
  CHECK(c.get_u64("seed") == 12);
  CHECK(c.get_u64("model.depth") == 3);
  CHECK(c.get_double("train.learning_rate") == 0.005);
  CHECK(c.get_bool("flag", false));
  CHECK(c.get_list("list") == std::vector<std::string>{"a", "b", "c"});
  CHECK(c.get_double("absent", 1.5) == 1.5);
  CHECK_FALSE(c.get_optional_double("absent").has_value());
  CHECK(c.get_path("path") == fs::path(".") / "data/x");
  CHECK_THROWS_AS(c.get_string("absent"), ConfigError);
  CHECK_THROWS_AS(c.get_double("list"), ConfigError);
  CHECK_THROWS_AS(c.get_u64("train.learning_rate"), ConfigError);
  CHECK_THROWS_AS(Config::parse("a = 1\na = 2\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("just words\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("x = -1\n").get_u64("x"), ConfigError);
  CHECK_THROWS_AS(Config::parse("x = nan\n").get_double("x"), ConfigError);
  CHECK(Config::parse("b = 2\na = 1\n").render() == "a = 1\nb = 2\n");
}

TEST_CASE("experiment config validation") {
  CHECK_THROWS_AS(Experiment::from_config(Config::parse("model.dpeth = 3\n"), "out"), ConfigError);
  CHECK_THROWS_AS(Experiment::from_config(Config::parse("train.epochs = 0\n"), "out"), ConfigError);
  CHECK_THROWS_AS(Experiment::from_config(Config::parse("attack.epsilon_step = 1\n"), "out"), ConfigError);
  CHECK_THROWS_AS(Experiment::from_config(Config::parse("task_a.source = tape\n"), "out"), ConfigError);
  CHECK_THROWS_AS(Experiment::from_config(Config::parse("model.architecture = qcnn\nmodel.n_qubits = 6\n"), "out"),
                  ConfigError);

  const Experiment e = Experiment::from_config(Config::parse("seed = 3\nthreads = 2\n"), "out", 99);
  CHECK(e.seed == 99);
  CHECK(e.config.get_u64("seed") == 99);
  CHECK(e.threads == 2);
  CHECK(e.train.epochs == 30);
  CHECK(e.continual.epochs == 20);
  CHECK(e.train.seed != e.continual.seed);

  ::setenv("QCLAB_THREADS", "3", 1);
  CHECK(Experiment::from_config(Config::parse(""), "out").threads == 3);
  CHECK(Experiment::from_config(Config::parse("threads = 1\n"), "out").threads == 1);
  ::setenv("QCLAB_THREADS", "many", 1);
  CHECK_THROWS_AS(Experiment::from_config(Config::parse(""), "out"), ConfigError);
  ::unsetenv("QCLAB_THREADS");
  CHECK(Experiment::from_config(Config::parse(""), "out").threads == 1);

  const Experiment q = Experiment::from_config(
      Config::parse("task_b.source = qdst\ntask_b.train = @out/x.qdst\ntask_b.test = /abs/y.qdst\n"), "runs/1");
  CHECK(q.task_b->train_cache == fs::path("runs/1") / "x.qdst");
  CHECK(q.task_b->test_cache == fs::path("/abs/y.qdst"));
}

TEST_CASE("checkpoint round trip is bit-exact") {
  const fs::path dir = fresh_dir("qclab_ckpt");
  fs::create_directories(dir);
  Checkpoint c;
  c.metadata = {{"architecture", "fully_connected"}, {"n_qubits", "3"}, {"depth", "2"},
                {"note", "unicode \xce\xbb = 750, a=b"}};
  std::mt19937_64 rng(1);
  c.theta = oracle::random_theta(18, rng);
  c.theta[0] = -0.0;
  c.theta[1] = std::numeric_limits<double>::denorm_min();
  c.theta[2] = std::numeric_limits<double>::quiet_NaN();
  save_checkpoint(c, dir / "a.qadv");
  const Checkpoint back = load_checkpoint(dir / "a.qadv");
  CHECK(back == c);
  CHECK_FALSE(back.fisher.has_value());
  CHECK(back.get("note") == "unicode \xce\xbb = 750, a=b");
  CHECK_FALSE(fs::exists(dir / "a.qadv.partial"));

  c.theta[2] = 0.5;
  c.fisher = FisherDiagonal{oracle::random_theta(18, rng), oracle::random_theta(18, rng), 3};
  save_checkpoint(c, dir / "b.qadv");
  CHECK(load_checkpoint(dir / "b.qadv") == c);
  CHECK(model_from_checkpoint(c).n_params() == 18);

  Checkpoint other = c;
  other.fisher->skipped = 4;
  CHECK_FALSE(other == c);

  const std::string bytes = slurp(dir / "b.qadv");
  auto write = [&](const std::string& name, const std::string& b) {
    std::ofstream(dir / name, std::ios::binary).write(b.data(), static_cast<std::streamsize>(b.size()));
    return dir / name;
  };
  std::string bad = bytes;
  bad[1] = 'X';
  CHECK_THROWS_AS(load_checkpoint(write("m.qadv", bad)), FormatError);
  CHECK_THROWS_AS(load_checkpoint(write("t.qadv", bytes.substr(0, bytes.size() - 9))), FormatError);
  CHECK_THROWS_AS(load_checkpoint(write("x.qadv", bytes + "x")), FormatError);
  CHECK_THROWS_AS(load_checkpoint(dir / "missing.qadv"), IoError);
  CHECK_THROWS_AS(save_checkpoint(c, dir / "no" / "such" / "dir.qadv"), IoError);

  Checkpoint bad_meta = c;
  bad_meta.metadata.emplace_back("multi", "line\nvalue");
  CHECK_THROWS_AS(save_checkpoint(bad_meta, dir / "c.qadv"), FormatError);
  Checkpoint wrong = c;
  wrong.theta.pop_back();
  CHECK_THROWS_AS(save_checkpoint(wrong, dir / "c.qadv"), DimensionMismatch);
  CHECK_FALSE(fs::exists(dir / "c.qadv"));
  fs::remove_all(dir);
}

TEST_CASE("report CSV layout") {
  ReportRow r;
  r.phase = "attack";
  r.step = 3;
  r.loss = 0.1;
  r.accuracy = 1.0 / 3.0;
  r.task_b_loss = 2.0;
  const std::string text = render_report({r});
  CHECK(text ==
        "phase,step,loss,accuracy,fidelity,task_a_accuracy,task_b_accuracy,task_a_fidelity,"
        "task_b_fidelity,task_a_loss,task_b_loss\n"
        "attack,3,0.10000000000000001,0.33333333333333331,,,,,,,2\n");
  const fs::path dir = fresh_dir("qclab_csv");
  fs::create_directories(dir);
  write_report(dir / "r.csv", {r, r});
  const auto rows = read_report(dir / "r.csv");
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].accuracy == r.accuracy);
  CHECK_FALSE(rows[1].fidelity.has_value());
  CHECK(rows[1].task_b_loss == 2.0);
  fs::remove_all(dir);
}

TEST_CASE("pipeline stages rerun to byte-identical artifacts") {
  const fs::path cfg = kSource / "configs" / "smoke.cfg";
  const fs::path a = fresh_dir("qclab_det_a"), b = fresh_dir("qclab_det_b");
  for (const fs::path& out : {a, b}) {
    for (const char* cmd : {"gen-spt", "train", "continual", "attack", "eval", "export-images"}) {
      CHECK_MESSAGE(run(std::string(cmd) + " --config " + cfg.string() + " --out " + out.string()) == 0, cmd);
    }
  }
  for (const char* f : {"spt_train.qdst", "spt_test.qdst", "spt_split.csv", "train.csv",
                        "continual.csv", "model_a.qadv", "model_merged.qadv", "attack.csv", "eval.csv",
                        "adversarial_a.qdst", "adversarial_b.qdst", "images/task_a_0_adversarial.pgm",
                        "train.cfg"}) {
    INFO(f);
    CHECK(slurp(a / f) == slurp(b / f));
  }
  // Row counts: baseline plus one row per iteration, one row per epoch.
  CHECK(read_report(a / "attack.csv").size() == 6);
  CHECK(read_report(a / "train.csv").size() == 3);
  CHECK(read_report(a / "continual.csv").size() == 3);

  // A different seed changes the result.
  const fs::path c = fresh_dir("qclab_det_c");
  CHECK(run("gen-spt --config " + cfg.string() + " --out " + c.string() + " --seed 8") == 0);
  CHECK(run("train --config " + cfg.string() + " --out " + c.string() + " --seed 8") == 0);
  CHECK(slurp(c / "train.csv") != slurp(a / "train.csv"));
  CHECK(Config::load(c / "train.cfg").get_u64("seed") == 8);

  for (const fs::path& p : {a, b, c}) fs::remove_all(p);
}

TEST_CASE("command errors exit nonzero without partial output") {
  const fs::path out = fresh_dir("qclab_err");
  const fs::path cfg = fs::temp_directory_path() / "qclab_err.cfg";
  std::ofstream(cfg) << "model.n_qubits = 8\nmodel.depth = 1\ntask_a.source = mnist\n"
                        "task_a.images = /nonexistent/images\ntask_a.labels = /nonexistent/labels\n";
  CHECK(run("train --config " + cfg.string() + " --out " + out.string()) != 0);
  CHECK_FALSE(fs::exists(out / "model_a.qadv"));
  CHECK(run("attack --config " + cfg.string() + " --out " + out.string()) != 0);
  CHECK(run("train --out " + out.string()) != 0);  // --config is required
  CHECK(run("fly --config " + cfg.string() + " --out " + out.string()) != 0);
  std::ofstream(cfg) << "bogus.key = 1\n";
  CHECK(run("eval --config " + cfg.string() + " --out " + out.string()) != 0);
  fs::remove_all(out);
  fs::remove(cfg);
}

TEST_CASE("zero-step attack config keeps every row at the baseline") {
  const fs::path out = fresh_dir("qclab_zero");
  Config c = Config::load(kSource / "configs" / "smoke.cfg");
  c.set("attack.epsilon_total", "0");
  const Experiment e = Experiment::from_config(c, out);
  cmd_gen_spt(e);
  cmd_train(e);
  cmd_continual(e, out / kModelA);
  const auto r = cmd_attack(e, out / kModelMerged);
  for (const auto& row : r.rows) {
    CHECK(row.accuracy == r.rows[0].accuracy);
    CHECK(row.loss == r.rows[0].loss);
    CHECK(*row.fidelity == doctest::Approx(1.0).epsilon(1e-14));
  }
  fs::remove_all(out);
}
