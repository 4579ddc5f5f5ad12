#include "qclab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <set>

#include <fmt/format.h>

#include "qclab/error.hpp"
#include "qclab/rng.hpp"

namespace qclab {

namespace fs = std::filesystem;

namespace {

const std::set<std::string> kTaskKeys = {"source", "images", "labels", "digits", "root", "class0",
                                         "class1", "train", "test", "n_train_per_class",
                                         "n_test_per_class"};
const std::set<std::string> kTrainKeys = {"learning_rate", "batch_size", "epochs",
                                          "adam_beta1", "adam_beta2", "adam_epsilon"};
const std::set<std::string> kAttackKeys = {"epsilon_total", "n_iterations", "epsilon_step",
                                           "domain", "recompute_gradient_each_iter", "dataset",
                                           "export_indices"};
const std::set<std::string> kSptKeys = {"n_sites", "lambda_min", "lambda_max", "lambda_step",
                                        "n_train_per_class", "n_test_per_class", "tolerance",
                                        "krylov_dim", "max_restarts", "sweep"};
const std::set<std::string> kModelKeys = {"architecture", "n_qubits", "depth"};

void check_keys(const Config& c) {
  for (const auto& [key, value] : c.entries()) {
    if (key == "seed" || key == "threads") continue;
    const auto dot = key.find('.');
    const std::string section = key.substr(0, dot);
    const std::string name = dot == std::string::npos ? "" : key.substr(dot + 1);
    const std::set<std::string>* allowed = nullptr;
    if (section == "task_a" || section == "task_b") allowed = &kTaskKeys;
    if (section == "train" || section == "continual") allowed = &kTrainKeys;
    if (section == "attack") allowed = &kAttackKeys;
    if (section == "spt") allowed = &kSptKeys;
    if (section == "model") allowed = &kModelKeys;
    if (section == "ewc" && name == "lambda") continue;
    if (allowed == nullptr || !allowed->count(name)) {
      throw ConfigError(c.origin() + ": unknown key '" + key + "'");
    }
  }
}

unsigned to_unsigned(std::uint64_t v, const std::string& key) {
  if (v > 1u << 20) throw ConfigError("'" + key + "' is out of range");
  return static_cast<unsigned>(v);
}

TrainConfig parse_train(const Config& c, const std::string& section, std::size_t default_epochs,
                        std::uint64_t seed, unsigned threads) {
  TrainConfig t;
  t.learning_rate = c.get_double(section + ".learning_rate", 0.005);
  t.batch_size = c.get_u64(section + ".batch_size", 100);
  t.epochs = c.get_u64(section + ".epochs", default_epochs);
  t.adam.beta1 = c.get_double(section + ".adam_beta1", 0.9);
  t.adam.beta2 = c.get_double(section + ".adam_beta2", 0.999);
  t.adam.epsilon = c.get_double(section + ".adam_epsilon", 1e-8);
  t.seed = derive_seed(seed, section);
  t.threads = threads;
  t.validate();
  return t;
}

TaskSpec parse_task(const Config& c, const std::string& name, const fs::path& out_dir) {
  TaskSpec t;
  t.name = name;
  auto key = [&](const char* k) { return name + "." + k; };
  auto path = [&](const char* k) {
    const std::string v = c.get_string(key(k));
    if (v.rfind("@out/", 0) == 0) return out_dir / v.substr(5);
    return c.get_path(key(k));
  };
  t.source = c.get_string(key("source"));
  if (t.source == "mnist") {
    t.images = path("images");
    t.labels = path("labels");
    const auto d = c.get_list(key("digits"), {"1", "9"});
    if (d.size() != 2) throw ConfigError("'" + key("digits") + "' needs two digits");
    t.digits = {std::stoi(d[0]), std::stoi(d[1])};
  } else if (t.source == "pgm_dirs") {
    t.root = path("root");
    t.class0 = c.get_string(key("class0"));
    t.class1 = c.get_string(key("class1"));
  } else if (t.source == "qdst") {
    t.train_cache = path("train");
    t.test_cache = path("test");
  } else {
    throw ConfigError("'" + key("source") + "' must be mnist, pgm_dirs or qdst");
  }
  t.n_train_per_class = c.get_u64(key("n_train_per_class"), 500);
  t.n_test_per_class = c.get_u64(key("n_test_per_class"), 100);
  return t;
}

std::string hex(std::uint64_t v) { return fmt::format("{:016x}", v); }
std::string num(double v) { return fmt::format("{:.17g}", v); }

void copy_config(const Experiment& e, const std::string& command) {
  fs::create_directories(e.out_dir);
  std::ofstream out(e.path(command + ".cfg"), std::ios::binary | std::ios::trunc);
  out << e.config.render();
  if (!out) throw IoError("cannot write config copy into " + e.out_dir.string());
}

void say(std::ostream* log, const std::string& line) {
  if (log) *log << line << '\n' << std::flush;
}

const TaskSpec& need(const std::optional<TaskSpec>& t, const char* name) {
  if (!t) throw ConfigError(std::string("this command needs a [") + name + "] section");
  return *t;
}

std::vector<std::pair<std::string, std::string>> base_metadata(const Experiment& e,
                                                               const CircuitModel& m,
                                                               const std::string& stage) {
  std::vector<std::pair<std::string, std::string>> md = {{"stage", stage}};
  for (auto& kv : m.describe()) md.push_back(std::move(kv));
  md.emplace_back("seed", std::to_string(e.seed));
  md.emplace_back("prng", std::string(kPrngContract));
  return md;
}

void add_dataset_metadata(std::vector<std::pair<std::string, std::string>>& md,
                          const std::string& prefix, const TrainTestSplit& s) {
  md.emplace_back(prefix + "_tag", s.train.task_tag);
  md.emplace_back(prefix + "_train_fingerprint", hex(fingerprint(s.train)));
  md.emplace_back(prefix + "_test_fingerprint", hex(fingerprint(s.test)));
}

void add_train_metadata(std::vector<std::pair<std::string, std::string>>& md,
                        const std::string& prefix, const TrainConfig& t, const TrainReport& r) {
  md.emplace_back(prefix + "_learning_rate", num(t.learning_rate));
  md.emplace_back(prefix + "_batch_size", std::to_string(t.batch_size));
  md.emplace_back(prefix + "_epochs", std::to_string(t.epochs));
  md.emplace_back(prefix + "_steps", std::to_string(r.steps));
  for (const auto& [k, v] : r.metadata) md.emplace_back(prefix + "_" + k, v);
}

void check_model_matches(const Experiment& e, const CircuitModel& m) {
  if (m.arch() != e.arch || m.n_qubits() != e.n_qubits || m.depth() != e.depth) {
    throw ConfigError("checkpoint model (" + to_string(m.arch()) + ", " +
                      std::to_string(m.n_qubits()) + " qubits, depth " + std::to_string(m.depth()) +
                      ") differs from the configured model");
  }
}

std::vector<ReportRow> epoch_rows(const std::string& phase, const TrainReport& r,
                                  const std::vector<Evaluation>* a,
                                  const std::vector<Evaluation>* b) {
  std::vector<ReportRow> rows;
  for (std::size_t k = 0; k < r.mean_loss.size(); ++k) {
    ReportRow row;
    row.phase = phase;
    row.step = k + 1;
    row.loss = r.mean_loss[k];
    row.accuracy = r.accuracy[k];
    row.fidelity = r.mean_true_class_probability[k];
    if (a) {
      row.task_a_accuracy = (*a)[k].accuracy;
      row.task_a_fidelity = (*a)[k].mean_true_class_probability;
      row.task_a_loss = (*a)[k].mean_loss;
    }
    if (b) {
      row.task_b_accuracy = (*b)[k].accuracy;
      row.task_b_fidelity = (*b)[k].mean_true_class_probability;
      row.task_b_loss = (*b)[k].mean_loss;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

const Dataset& attack_set(const Experiment& e, const TrainTestSplit& s) {
  return e.attack_on_train ? s.train : s.test;
}

}  // namespace

Experiment Experiment::from_config(Config config, fs::path out_dir,
                                   std::optional<std::uint64_t> seed) {
  check_keys(config);
  Experiment e;
  e.out_dir = std::move(out_dir);
  if (seed) config.set("seed", std::to_string(*seed));
  e.seed = config.get_u64("seed", 0);
  if (config.has("threads")) {
    e.threads = to_unsigned(config.get_u64("threads"), "threads");
  } else if (const char* env = std::getenv("QCLAB_THREADS"); env && *env) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (*end != '\0' || v > 1024) throw ConfigError("QCLAB_THREADS must be a small integer");
    e.threads = static_cast<unsigned>(v);
  }
  e.threads = std::max(1u, e.threads);

  e.arch = parse_architecture(config.get_string("model.architecture", "fully_connected"));
  e.n_qubits = to_unsigned(config.get_u64("model.n_qubits", 12), "model.n_qubits");
  e.depth = to_unsigned(config.get_u64("model.depth", 20), "model.depth");
  (void)e.model();  // validates the shape

  if (config.has("task_a.source")) e.task_a = parse_task(config, "task_a", e.out_dir);
  if (config.has("task_b.source")) e.task_b = parse_task(config, "task_b", e.out_dir);
  e.train = parse_train(config, "train", 30, e.seed, e.threads);
  e.continual = parse_train(config, "continual", 20, e.seed, e.threads);
  e.ewc.lambda_ewc = config.get_double("ewc.lambda", 0.0);
  e.ewc.validate();

  e.attack.epsilon_total = config.get_double("attack.epsilon_total", 0.02);
  e.attack.n_iterations = config.get_u64("attack.n_iterations", 30);
  e.attack.epsilon_step = config.get_optional_double("attack.epsilon_step");
  e.attack.domain = parse_domain(config.get_string("attack.domain", "amplitude"));
  e.attack.recompute_gradient_each_iter =
      config.get_bool("attack.recompute_gradient_each_iter", false);
  e.attack.threads = e.threads;
  e.attack.validate();
  const std::string which = config.get_string("attack.dataset", "test");
  if (which != "test" && which != "train") throw ConfigError("attack.dataset must be test or train");
  e.attack_on_train = which == "train";
  if (config.has("attack.export_indices")) {
    e.export_indices.clear();
    for (const auto& s : config.get_list("attack.export_indices")) e.export_indices.push_back(std::stoul(s));
  }

  e.spt.n_sites = to_unsigned(config.get_u64("spt.n_sites", 12), "spt.n_sites");
  e.spt.lambda_min = config.get_double("spt.lambda_min", 0.0);
  e.spt.lambda_max = config.get_double("spt.lambda_max", 2.0);
  e.spt.lambda_step = config.get_double("spt.lambda_step", 0.001);
  e.spt.split.n_train_per_class = config.get_u64("spt.n_train_per_class", 500);
  e.spt.split.n_test_per_class = config.get_u64("spt.n_test_per_class", 100);
  e.spt.split.seed = derive_seed(e.seed, "spt");
  e.spt.tolerance = config.get_double("spt.tolerance", 1e-10);
  e.spt.krylov_dim = config.get_u64("spt.krylov_dim", 160);
  e.spt.max_restarts = config.get_u64("spt.max_restarts", 200);
  e.spt.validate();
  e.spt_sweep = config.get_bool("spt.sweep", false);

  e.config = std::move(config);
  return e;
}

CircuitModel Experiment::model() const { return build_model(arch, n_qubits, depth); }

TrainTestSplit Experiment::load(const TaskSpec& t) const {
  const SplitSpec split{t.n_train_per_class, t.n_test_per_class, derive_seed(seed, t.name)};
  const auto side = static_cast<std::size_t>(std::lround(std::sqrt(std::ldexp(1.0, static_cast<int>(n_qubits)))));
  TrainTestSplit s;
  if (t.source == "mnist") {
    s = load_mnist_idx(t.images, t.labels, t.digits, split, side);
  } else if (t.source == "pgm_dirs") {
    s = load_grayscale_dir(t.root, t.class0, t.class1, split, side);
  } else {
    s.train = load_cache(t.train_cache);
    s.test = load_cache(t.test_cache);
  }
  if (s.train.n_qubits != n_qubits || s.test.n_qubits != n_qubits) {
    throw DimensionMismatch(t.name + " samples have " + std::to_string(s.train.n_qubits) +
                            " qubits, the model has " + std::to_string(n_qubits));
  }
  return s;
}

TrainOutcome cmd_train(const Experiment& e, std::ostream* log) {
  const TaskSpec& ta = need(e.task_a, "task_a");
  const CircuitModel m = e.model();
  say(log, "loading " + ta.name);
  const TrainTestSplit a = e.load(ta);
  say(log, fmt::format("training {} ({} parameters) on {} samples for {} epochs", to_string(e.arch),
                       m.n_params(), a.train.size(), e.train.epochs));
  const auto init = init_parameters(m.n_params(), derive_seed(e.seed, "init"));
  const Monitor mon[] = {{"task_a", &a.test}};
  TrainOutcome out;
  out.report = train(m, init, a.train, e.train, {}, mon);
  out.test_a = out.report.monitors.at("task_a").back();
  out.rows = epoch_rows("train", out.report, &out.report.monitors.at("task_a"), nullptr);

  out.checkpoint.metadata = base_metadata(e, m, "train");
  add_dataset_metadata(out.checkpoint.metadata, "task_a", a);
  add_train_metadata(out.checkpoint.metadata, "train", e.train, out.report);
  out.checkpoint.theta = out.report.theta;

  copy_config(e, "train");
  write_report(e.path(kTrainCsv), out.rows);
  save_checkpoint(out.checkpoint, e.path(kModelA));
  say(log, fmt::format("task A test accuracy {:.4f}", out.test_a.accuracy));
  return out;
}

ContinualOutcome cmd_continual(const Experiment& e, const fs::path& checkpoint_a,
                               std::ostream* log) {
  const TaskSpec& ta = need(e.task_a, "task_a");
  const TaskSpec& tb = need(e.task_b, "task_b");
  const Checkpoint in = load_checkpoint(checkpoint_a);
  const CircuitModel m = model_from_checkpoint(in);
  check_model_matches(e, m);
  say(log, "loading " + ta.name + " and " + tb.name);
  const TrainTestSplit a = e.load(ta);
  const TrainTestSplit b = e.load(tb);
  if (in.has("task_a_train_fingerprint") && in.get("task_a_train_fingerprint") != hex(fingerprint(a.train))) {
    throw ConfigError("task A data differs from the data the checkpoint was trained on");
  }

  say(log, "Fisher information on " + std::to_string(a.train.size()) + " task A samples");
  const FisherDiagonal fisher = fisher_information(m, in.theta, a.train, e.threads);
  say(log, fmt::format("continual training, lambda = {}, {} epochs", e.ewc.lambda_ewc, e.continual.epochs));
  const Monitor mon[] = {{"task_a", &a.test}, {"task_b", &b.test}};

  ContinualOutcome out;
  ReportRow start;
  start.phase = "continual";
  start.step = 0;
  const Evaluation a0 = evaluate(m, in.theta, a.test, e.threads);
  const Evaluation b0 = evaluate(m, in.theta, b.test, e.threads);
  start.task_a_accuracy = a0.accuracy;
  start.task_a_fidelity = a0.mean_true_class_probability;
  start.task_a_loss = a0.mean_loss;
  start.task_b_accuracy = b0.accuracy;
  start.task_b_fidelity = b0.mean_true_class_probability;
  start.task_b_loss = b0.mean_loss;
  out.rows.push_back(start);

  out.report = continual_train(m, in.theta, b.train, fisher, e.continual, e.ewc, mon);
  const auto& ma = out.report.monitors.at("task_a");
  const auto& mb = out.report.monitors.at("task_b");
  for (auto& r : epoch_rows("continual", out.report, &ma, &mb)) out.rows.push_back(std::move(r));
  out.test_a = ma.back();
  out.test_b = mb.back();

  auto& md = out.checkpoint.metadata;
  md = base_metadata(e, m, "continual");
  add_dataset_metadata(md, "task_a", a);
  add_dataset_metadata(md, "task_b", b);
  for (const auto& [k, v] : in.metadata) {
    if (k.rfind("train_", 0) == 0) md.emplace_back(k, v);
  }
  add_train_metadata(md, "continual", e.continual, out.report);
  md.emplace_back("fisher_dataset", "task_a train split at the task A parameters");
  out.checkpoint.theta = out.report.theta;
  out.checkpoint.fisher = fisher;

  copy_config(e, "continual");
  write_report(e.path(kContinualCsv), out.rows);
  save_checkpoint(out.checkpoint, e.path(kModelMerged));
  say(log, fmt::format("test accuracy: task A {:.4f}, task B {:.4f}, average {:.4f}",
                       out.test_a.accuracy, out.test_b.accuracy, out.average_accuracy()));
  return out;
}

AttackOutcome cmd_attack(const Experiment& e, const fs::path& checkpoint, std::ostream* log) {
  const TaskSpec& ta = need(e.task_a, "task_a");
  const TaskSpec& tb = need(e.task_b, "task_b");
  const Checkpoint c = load_checkpoint(checkpoint);
  const CircuitModel m = model_from_checkpoint(c);
  check_model_matches(e, m);
  const TrainTestSplit a = e.load(ta);
  const TrainTestSplit b = e.load(tb);
  say(log, fmt::format("qBIM: {} iterations, step {:.6g}, {} domain", e.attack.n_iterations,
                       e.attack.step(), to_string(e.attack.domain)));

  AttackOutcome out;
  out.report = universal_qbim(m, c.theta, attack_set(e, a), attack_set(e, b), e.attack);
  const AttackReport& r = out.report;
  for (std::size_t k = 0; k < r.overall.accuracy.size(); ++k) {
    ReportRow row;
    row.phase = "attack";
    row.step = k;
    row.loss = r.overall.mean_loss[k];
    row.accuracy = r.overall.accuracy[k];
    row.fidelity = r.overall.mean_fidelity[k];
    row.task_a_accuracy = r.task_a.accuracy[k];
    row.task_b_accuracy = r.task_b.accuracy[k];
    row.task_a_fidelity = r.task_a.mean_fidelity[k];
    row.task_b_fidelity = r.task_b.mean_fidelity[k];
    row.task_a_loss = r.task_a.mean_loss[k];
    row.task_b_loss = r.task_b.mean_loss[k];
    out.rows.push_back(std::move(row));
  }

  copy_config(e, "attack");
  write_report(e.path(kAttackCsv), out.rows);
  save_cache(r.adversarial_a, e.path(kAdversarialA));
  save_cache(r.adversarial_b, e.path(kAdversarialB));
  out.images = cmd_export_images(e, nullptr);
  say(log, fmt::format("accuracy {:.4f} -> {:.4f}, mean fidelity {:.4f}", r.overall.accuracy.front(),
                       r.overall.accuracy.back(), r.overall.mean_fidelity.back()));
  return out;
}

SptDataset cmd_gen_spt(const Experiment& e, std::ostream* log) {
  say(log, fmt::format("cluster-Ising ground states, {} sites, {} grid points", e.spt.n_sites,
                       e.spt.grid().size()));
  SptDataset d = generate_spt(e.spt);
  copy_config(e, "gen-spt");
  save_cache(d.split.train, e.path(kSptTrain));
  save_cache(d.split.test, e.path(kSptTest));
  {
    std::ofstream out(e.path("spt_split.csv"), std::ios::binary | std::ios::trunc);
    out << "split,index,lambda,label\n";
    for (std::size_t i = 0; i < d.train_lambdas.size(); ++i)
      out << fmt::format("train,{},{:.17g},{}\n", i, d.train_lambdas[i], d.split.train.labels[i]);
    for (std::size_t i = 0; i < d.test_lambdas.size(); ++i)
      out << fmt::format("test,{},{:.17g},{}\n", i, d.test_lambdas[i], d.split.test.labels[i]);
    if (!out) throw IoError("cannot write spt_split.csv");
  }
  if (e.spt_sweep) {
    say(log, "full sweep");
    const SptSweep s = spt_sweep(e.spt);
    std::ofstream out(e.path("spt_sweep.csv"), std::ios::binary | std::ios::trunc);
    out << "lambda,label,energy,residual\n";
    for (std::size_t i = 0; i < s.lambdas.size(); ++i)
      out << fmt::format("{:.17g},{},{:.17g},{:.17g}\n", s.lambdas[i], spt_label(s.lambdas[i]),
                         s.energies[i], s.residuals[i]);
    if (!out) throw IoError("cannot write spt_sweep.csv");
  }
  say(log, fmt::format("wrote {} train and {} test states", d.split.train.size(), d.split.test.size()));
  return d;
}

EvalOutcome cmd_eval(const Experiment& e, const fs::path& checkpoint, std::ostream* log) {
  const Checkpoint c = load_checkpoint(checkpoint);
  const CircuitModel m = model_from_checkpoint(c);
  check_model_matches(e, m);
  EvalOutcome out;
  ReportRow row;
  row.phase = "eval";
  std::vector<ClassProbabilities> probs;
  std::vector<std::uint8_t> labels;
  auto run = [&](const TaskSpec& t) {
    const Dataset test = e.load(t).test;
    const auto p = predict_all(m, c.theta, test.states, e.threads);
    probs.insert(probs.end(), p.begin(), p.end());
    labels.insert(labels.end(), test.labels.begin(), test.labels.end());
    return summarize(p, test.labels);
  };
  if (e.task_a) {
    out.a = run(*e.task_a);
    row.task_a_accuracy = out.a->accuracy;
    row.task_a_fidelity = out.a->mean_true_class_probability;
    row.task_a_loss = out.a->mean_loss;
  }
  if (e.task_b) {
    out.b = run(*e.task_b);
    row.task_b_accuracy = out.b->accuracy;
    row.task_b_fidelity = out.b->mean_true_class_probability;
    row.task_b_loss = out.b->mean_loss;
  }
  if (probs.empty()) throw ConfigError("eval needs task_a and/or task_b");
  const Evaluation all = summarize(probs, labels);
  row.loss = all.mean_loss;
  row.accuracy = all.accuracy;
  row.fidelity = all.mean_true_class_probability;
  out.rows.push_back(row);
  copy_config(e, "eval");
  write_report(e.path(kEvalCsv), out.rows);
  say(log, fmt::format("test accuracy {:.4f} over {} samples", all.accuracy, probs.size()));
  return out;
}

std::vector<fs::path> cmd_export_images(const Experiment& e, std::ostream* log) {
  std::vector<fs::path> written;
  const std::pair<const std::optional<TaskSpec>*, const char*> tasks[] = {
      {&e.task_a, kAdversarialA}, {&e.task_b, kAdversarialB}};
  for (const auto& [task, file] : tasks) {
    if (!*task) continue;
    const Dataset adv = load_cache(e.path(file));
    TrainTestSplit split = e.load(**task);
    const Dataset orig = std::move(e.attack_on_train ? split.train : split.test);
    std::vector<std::size_t> idx;
    for (std::size_t i : e.export_indices) {
      if (i < orig.size()) idx.push_back(i);
    }
    auto files = export_adversarial_pairs(orig, adv, idx, e.path("images"), (*task)->name);
    written.insert(written.end(), files.begin(), files.end());
  }
  say(log, fmt::format("wrote {} images", written.size()));
  return written;
}

}  // namespace qclab
