#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qclab/attack.hpp"
#include "qclab/checkpoint.hpp"
#include "qclab/config.hpp"
#include "qclab/continual.hpp"
#include "qclab/datasets.hpp"
#include "qclab/report_csv.hpp"
#include "qclab/training.hpp"

namespace qclab {

/// Where a task's samples come from.
///   mnist:    task.images, task.labels, task.digits = d0,d1
///   pgm_dirs: task.root, task.class0, task.class1
///   qdst:     task.train, task.test (a leading "@out/" means the output directory)
struct TaskSpec {
  std::string name;  // "task_a" or "task_b"
  std::string source;
  std::filesystem::path images, labels, root, train_cache, test_cache;
  std::pair<int, int> digits{1, 9};
  std::string class0, class1;
  std::size_t n_train_per_class = 500;
  std::size_t n_test_per_class = 100;
};

/// Everything one command needs, parsed and validated up front.
struct Experiment {
  Config config;
  std::filesystem::path out_dir;
  std::uint64_t seed = 0;
  unsigned threads = 1;

  Architecture arch = Architecture::FullyConnected;
  unsigned n_qubits = 12;
  unsigned depth = 20;

  std::optional<TaskSpec> task_a, task_b;
  TrainConfig train;      // first task
  TrainConfig continual;  // second task
  EwcConfig ewc;
  AttackConfig attack;
  bool attack_on_train = false;
  std::vector<std::size_t> export_indices{0, 1, 2, 3};
  SptConfig spt;
  bool spt_sweep = false;

  /// Unknown keys and out-of-range values raise ConfigError. `seed` overrides
  /// the config seed; the thread count falls back to QCLAB_THREADS, then 1.
  static Experiment from_config(Config config, std::filesystem::path out_dir,
                                std::optional<std::uint64_t> seed = std::nullopt);

  CircuitModel model() const;
  TrainTestSplit load(const TaskSpec& task) const;

  std::filesystem::path path(const std::string& file) const { return out_dir / file; }
};

// Output file names inside the output directory.
inline constexpr const char* kModelA = "model_a.qadv";
inline constexpr const char* kModelMerged = "model_merged.qadv";
inline constexpr const char* kTrainCsv = "train.csv";
inline constexpr const char* kContinualCsv = "continual.csv";
inline constexpr const char* kAttackCsv = "attack.csv";
inline constexpr const char* kEvalCsv = "eval.csv";
inline constexpr const char* kAdversarialA = "adversarial_a.qdst";
inline constexpr const char* kAdversarialB = "adversarial_b.qdst";
inline constexpr const char* kSptTrain = "spt_train.qdst";
inline constexpr const char* kSptTest = "spt_test.qdst";

struct TrainOutcome {
  Checkpoint checkpoint;
  TrainReport report;
  std::vector<ReportRow> rows;
  Evaluation test_a;
};

struct ContinualOutcome {
  Checkpoint checkpoint;
  TrainReport report;
  std::vector<ReportRow> rows;
  Evaluation test_a, test_b;
  double average_accuracy() const { return 0.5 * (test_a.accuracy + test_b.accuracy); }
};

struct AttackOutcome {
  AttackReport report;
  std::vector<ReportRow> rows;
  std::vector<std::filesystem::path> images;
};

struct EvalOutcome {
  std::optional<Evaluation> a, b;
  std::vector<ReportRow> rows;
};

// Each command writes its artifacts and a copy of the config (<command>.cfg)
// into the output directory. `log` receives progress lines when non-null.
TrainOutcome cmd_train(const Experiment& e, std::ostream* log = nullptr);
ContinualOutcome cmd_continual(const Experiment& e, const std::filesystem::path& checkpoint_a,
                               std::ostream* log = nullptr);
AttackOutcome cmd_attack(const Experiment& e, const std::filesystem::path& checkpoint,
                         std::ostream* log = nullptr);
SptDataset cmd_gen_spt(const Experiment& e, std::ostream* log = nullptr);
EvalOutcome cmd_eval(const Experiment& e, const std::filesystem::path& checkpoint,
                     std::ostream* log = nullptr);
/// Original/adversarial PGM pairs from the adversarial caches of a previous attack.
std::vector<std::filesystem::path> cmd_export_images(const Experiment& e,
                                                     std::ostream* log = nullptr);

}  // namespace qclab
