// impact_pipe: command-line driver for the head-impact event pipeline.
#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "impact/core/error.hpp"
#include "impact/core/text.hpp"
#include "impact/core/window.hpp"
#include "impact/core/version.hpp"
#include "impact/dataset/augment.hpp"
#include "impact/dataset/event_file.hpp"
#include "impact/dataset/package.hpp"
#include "impact/dataset/split.hpp"
#include "impact/eval/config.hpp"
#include "impact/eval/metrics.hpp"
#include "impact/eval/pipeline.hpp"
#include "impact/eval/report.hpp"
#include "impact/sim/device.hpp"
#include "impact/svm/features.hpp"

namespace fs = std::filesystem;
using namespace impact;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;
constexpr int kExitSolver = 4;

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string config_path;
  std::string out = "out";
  std::optional<std::string> timestamp;
  bool quiet = false;
};

struct Options {
  int n_true = -1, n_false = -1;
  std::string data, split, model, windows, test_ids;
  std::optional<std::size_t> test_true, test_false;
  std::optional<double> test_fraction;
  std::vector<std::string> inputs;
  bool reference = false;
  std::string label;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(what) {}
};

void note(const Globals& g, const std::string& msg) {
  if (!g.quiet) std::cerr << msg << '\n';
}

fs::path out_dir(const Globals& g) {
  fs::path dir(g.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

eval::PipelineConfig load_settings(const Globals& g) {
  eval::PipelineConfig cfg;
  if (!g.config_path.empty()) cfg = eval::load_config(g.config_path);
  if (g.seed) cfg.seed = *g.seed;
  cfg.validate();
  return cfg;
}

void write_run_block(const Globals& g, const eval::PipelineConfig& cfg, const std::string& command,
                     const std::vector<std::string>& argv) {
  std::string text = "# impact-pipe run\ncommand=" + command + "\nargs=";
  for (std::size_t i = 0; i < argv.size(); ++i) text += (i ? " " : "") + argv[i];
  text += "\nseed=" + std::to_string(cfg.seed);
  text += "\nconfig_hash=" + eval::config_hash(cfg);
  text += "\nversion=";
  text += kVersion;
  text += "\n[config]\n" + eval::format_config(cfg);
  dataset::write_text_file(out_dir(g) / ("run-" + command + ".txt"), text);
}

void require(const std::string& value, const std::string& flag) {
  if (value.empty()) throw UsageError(flag + " is required");
}

dataset::SplitSpec load_split(const Options& o) {
  require(o.split, "--split");
  return dataset::read_split_file(o.split);
}

int cmd_simulate(const Globals& g, const Options& o, eval::PipelineConfig& cfg) {
  if (o.n_true >= 0) cfg.n_true = o.n_true;
  if (o.n_false >= 0) cfg.n_false = o.n_false;
  const auto generated = sim::gen_dataset(cfg.n_true, cfg.n_false, cfg.seed, cfg.trigger);
  eval::DataSet data;
  for (const auto& e : generated) {
    data.events.push_back(e.event);
    data.labels.push_back(e.label);
  }
  eval::write_data_dir(data, out_dir(g));
  note(g, "wrote " + std::to_string(data.events.size()) + " event files and manifest.csv to " + g.out);
  return kExitOk;
}

int cmd_ingest(const Globals& g, const Options& o, eval::PipelineConfig& cfg) {
  require(o.data, "--data");
  const auto data = eval::load_data_dir(o.data, cfg.trigger);
  std::size_t n_true = 0;
  for (const auto& l : data.labels) n_true += l.value == EventClass::TrueImpact;
  for (const auto& e : data.events) (void)build_window(e, cfg.processing);
  const std::string summary = "events=" + std::to_string(data.events.size()) + "\ntrue_impact=" + std::to_string(n_true) +
                              "\nnon_contact=" + std::to_string(data.events.size() - n_true) + "\n";
  dataset::write_text_file(out_dir(g) / "ingest.txt", summary);
  std::cout << summary;
  return kExitOk;
}

int cmd_split(const Globals& g, const Options& o, eval::PipelineConfig& cfg) {
  require(o.data, "--data");
  const auto manifest = dataset::read_manifest_file(fs::path(o.data) / "manifest.csv");
  std::vector<dataset::SplitItem> items;
  for (const auto& r : manifest) items.push_back({r.event_id, r.label.value});
  dataset::SplitRequest req;
  req.augment_train = cfg.augment;
  if (!o.test_ids.empty()) {
    LineReader in(dataset::read_text_file(o.test_ids));
    while (auto line = in.next()) {
      if (!trim(*line).empty()) req.test_ids.emplace_back(trim(*line));
    }
  } else if (o.test_fraction) {
    req.test_fraction = o.test_fraction;
  } else {
    req.test_true = o.test_true.value_or(cfg.test_true);
    req.test_false = o.test_false.value_or(cfg.test_false);
  }
  const auto split = dataset::make_split(items, req, cfg.seed);
  dataset::write_split_file(split, out_dir(g) / "split.csv");
  note(g, "split: " + std::to_string(split.train_ids.size()) + " train, " + std::to_string(split.test_ids.size()) +
              " test -> " + (fs::path(g.out) / "split.csv").string());
  return kExitOk;
}

std::vector<LabeledWindow> load_windows(const Options& o, const eval::PipelineConfig& cfg,
                                        const dataset::SplitSpec& split) {
  require(o.data, "--data");
  return eval::make_windows(eval::load_data_dir(o.data, cfg.trigger), cfg.processing, &split);
}

int cmd_augment(const Globals& g, const Options& o, eval::PipelineConfig& cfg) {
  const auto split = load_split(o);
  const auto windows = load_windows(o, cfg, split);
  const auto train = eval::training_set(windows, split, cfg);
  dataset::write_windows_file(train, out_dir(g) / "train_windows.txt");
  note(g, "wrote " + std::to_string(train.size()) + " training windows");
  return kExitOk;
}

int cmd_train_mignet(const Globals& g, const Options& o, eval::PipelineConfig& cfg) {
  std::vector<LabeledWindow> train;
  if (!o.windows.empty()) {
    train = dataset::read_windows_file(o.windows);
  } else {
    const auto split = load_split(o);
    train = eval::training_set(load_windows(o, cfg, split), split, cfg);
  }
  note(g, "training on " + std::to_string(train.size()) + " windows");
  std::string log = "epoch,loss\n";
  const auto start = std::chrono::steady_clock::now();
  const auto model = eval::train_mignet(train, cfg, [&](std::size_t epoch, double loss) {
    log += std::to_string(epoch + 1) + "," + format_exact(loss) + "\n";
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    char buf[96];
    std::snprintf(buf, sizeof buf, "epoch %zu/%zu loss %.5f (%.1f s)", epoch + 1, cfg.training.epochs, loss, s);
    note(g, buf);
  });
  const fs::path dir = out_dir(g);
  mignet::save_model(model, dir / "mignet.model");
  dataset::write_text_file(dir / "train_log.csv", log);
  note(g, "saved " + (dir / "mignet.model").string());
  return kExitOk;
}

int cmd_train_svm(const Globals& g, const Options& o, eval::PipelineConfig& cfg) {
  const auto split = load_split(o);
  const auto train = eval::select_partition(load_windows(o, cfg, split), Partition::Train);
  note(g, "selecting features on " + std::to_string(train.size()) + " windows");
  const auto result = eval::train_svm_pipeline(train, cfg);
  std::string trace = "step,feature,name,cv_error\n";
  for (std::size_t i = 0; i < result.selection.trace.size(); ++i) {
    const auto& s = result.selection.trace[i];
    trace += std::to_string(i + 1) + "," + std::to_string(s.feature) + "," + svm::feature_names()[s.feature] + "," +
             format_exact(s.cv_error) + "\n";
  }
  trace += "# baseline_error=" + format_exact(result.selection.baseline_error) + "\n";
  const fs::path dir = out_dir(g);
  svm::save_svm(result.model, dir / "svm.model");
  dataset::write_text_file(dir / "selection.csv", trace);
  note(g, "selected " + std::to_string(result.selection.selected.size()) + " features; saved " +
              (dir / "svm.model").string());
  return kExitOk;
}

int cmd_sweep(const Globals& g, const Options& o, eval::PipelineConfig& cfg) {
  const auto split = load_split(o);
  const auto train = eval::select_partition(load_windows(o, cfg, split), Partition::Train);
  const auto result = eval::run_sweep(train, cfg, [&](const eval::SweepRow& r) {
    note(g, r.stage + ": " + r.descriptor + " -> " + format_exact(r.validation_accuracy));
  });
  dataset::write_text_file(out_dir(g) / "sweep.csv", eval::format_sweep(result));
  std::cout << "best " << result.best.descriptor() << '\n';
  return kExitOk;
}

int cmd_evaluate(const Globals& g, const Options& o, eval::PipelineConfig& cfg) {
  require(o.model, "--model");
  const auto split = load_split(o);
  const auto model = eval::load_any_model(o.model);
  const auto test = eval::select_partition(load_windows(o, cfg, split), Partition::Test);
  eval::ReportInfo info{o.label.empty() ? (model.kind == "mignet" ? "MiGNet" : "SVM") : o.label,
                        model.kind,
                        model.id,
                        cfg.seed,
                        eval::resolve_timestamp(g.timestamp),
                        kVersion};
  const auto report = eval::evaluate(test, eval::classifier_for(model, cfg), info, &split);
  eval::write_report_file(report, out_dir(g) / "report.txt");
  std::cout << eval::render_table(std::span<const eval::EvalReport>(&report, 1));
  return kExitOk;
}

int cmd_classify(const Globals& g, const Options& o, eval::PipelineConfig& cfg) {
  require(o.model, "--model");
  if (o.inputs.empty()) throw UsageError("give event files or directories to classify");
  const auto model = eval::load_any_model(o.model);
  std::vector<fs::path> files;
  for (const auto& in : o.inputs) {
    if (fs::is_directory(in)) {
      for (const auto& e : fs::directory_iterator(in)) {
        if (e.path().extension() == ".csv") files.push_back(e.path());
      }
    } else {
      files.emplace_back(in);
    }
  }
  std::sort(files.begin(), files.end());
  std::string out = "event_id,predicted,score,model_id\n";
  for (const auto& f : files) {
    const auto event = dataset::parse_event_file(f, cfg.trigger);
    LabeledWindow w{event.event_id, normalize(build_window(event, cfg.processing), cfg.processing), {}, Partition::Unassigned};
    const auto p = eval::predict_any(model, w, cfg);
    out += event.event_id + "," + std::string(class_name(p.label)) + "," + format_exact(p.score) + "," + model.id + "\n";
  }
  dataset::write_text_file(out_dir(g) / "predictions.csv", out);
  std::cout << out;
  return kExitOk;
}

int cmd_export(const Globals& g, const Options& o, eval::PipelineConfig& cfg) {
  require(o.data, "--data");
  const auto data = eval::load_data_dir(o.data, cfg.trigger);
  std::vector<std::optional<dataset::PredictionRecord>> predictions;
  dataset::ExportInfo info{"", kVersion};
  if (!o.model.empty()) {
    const auto model = eval::load_any_model(o.model);
    info.model_id = model.id;
    const auto windows = eval::make_windows(data, cfg.processing);
    for (const auto& w : windows) predictions.emplace_back(eval::predict_any(model, w, cfg));
  }
  const fs::path dir = out_dir(g) / "package";
  const auto manifest = dataset::export_package(data.events, data.labels, predictions, info, dir);
  note(g, "exported " + std::to_string(manifest.size()) + " events to " + dir.string());
  return kExitOk;
}

int cmd_report(const Globals& g, const Options& o, eval::PipelineConfig&) {
  std::string text;
  if (!o.inputs.empty()) {
    std::vector<eval::EvalReport> reports;
    for (const auto& in : o.inputs) reports.push_back(eval::read_report_file(in));
    text += eval::render_table(reports);
  }
  if (o.reference) {
    // Reference comparison rows and whether integer matrices can produce them.
    struct Row {
      const char* name;
      double sens, spec, acc, prec;
      std::uint64_t total;
      std::optional<std::uint64_t> positives;
    };
    const Row rows[] = {{"Test 1 - SVM", 86, 94, 91, 90, 165, 65},
                        {"Test 1 - MiGNet", 97, 90, 93, 86, 165, 65},
                        {"Test 2 - MiGNet (65/100)", 76, 99, 96, 86, 165, 65},
                        {"Test 2 - MiGNet (512, 65:100 ratio)", 76, 99, 96, 86, 512, 202},
                        {"Test 2 - MiGNet (512, any split)", 76, 99, 96, 86, 512, std::nullopt}};
    if (!text.empty()) text += "\n";
    text += "Reference rows (sensitivity/specificity/accuracy/precision %):\n";
    for (const auto& r : rows) {
      const auto c = eval::check_consistency(r.sens, r.spec, r.acc, r.prec, r.total, r.positives);
      char buf[256];
      if (c.consistent) {
        std::snprintf(buf, sizeof buf, "%-36s %g/%g/%g/%g  consistent (tp=%llu fn=%llu fp=%llu tn=%llu)\n", r.name,
                      r.sens, r.spec, r.acc, r.prec, static_cast<unsigned long long>(c.witness->tp),
                      static_cast<unsigned long long>(c.witness->fn), static_cast<unsigned long long>(c.witness->fp),
                      static_cast<unsigned long long>(c.witness->tn));
      } else {
        std::snprintf(buf, sizeof buf, "%-36s %g/%g/%g/%g  INCONSISTENT: no integer confusion matrix fits\n", r.name,
                      r.sens, r.spec, r.acc, r.prec);
      }
      text += buf;
    }
  }
  if (text.empty()) throw UsageError("give report files and/or --reference");
  dataset::write_text_file(out_dir(g) / "table.txt", text);
  std::cout << text;
  return kExitOk;
}

int exit_code_for(const Error& e) {
  switch (e.category()) {
    case ErrorCategory::Validation: return kExitValidation;
    case ErrorCategory::Io: return kExitIo;
    case ErrorCategory::Solver: return kExitSolver;
  }
  return kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"impact_pipe: simulate, train and evaluate head-impact event classifiers"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  Options o;
  app.add_option("--seed", g.seed, "Master seed (overrides the config file)");
  app.add_option("--config", g.config_path, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_option("--timestamp", g.timestamp, "Timestamp written into reports");
  app.add_flag("--quiet,-q", g.quiet, "No progress output");

  using Handler = int (*)(const Globals&, const Options&, eval::PipelineConfig&);
  std::vector<std::pair<CLI::App*, Handler>> commands;
  auto add = [&](const char* name, const char* help, Handler h) {
    auto* sub = app.add_subcommand(name, help);
    commands.emplace_back(sub, h);
    return sub;
  };

  auto* simulate = add("simulate", "Generate a labeled synthetic corpus (event files + manifest)", cmd_simulate);
  simulate->add_option("--true", o.n_true, "Number of true impacts");
  simulate->add_option("--false", o.n_false, "Number of non-contact events");

  auto* ingest = add("ingest", "Parse and validate a data directory", cmd_ingest);
  ingest->add_option("--data", o.data, "Data directory")->required();

  auto* split = add("split", "Stratified train/test split", cmd_split);
  split->add_option("--data", o.data, "Data directory")->required();
  split->add_option("--test-true", o.test_true, "Test impacts");
  split->add_option("--test-false", o.test_false, "Test non-contact events");
  split->add_option("--test-fraction", o.test_fraction, "Test fraction per class");
  split->add_option("--test-ids", o.test_ids, "File listing test event ids, one per line")->check(CLI::ExistingFile);

  auto* augment = add("augment", "Write the (augmented) training windows", cmd_augment);
  augment->add_option("--data", o.data, "Data directory")->required();
  augment->add_option("--split", o.split, "Split file")->required();

  auto* train_mignet = add("train-mignet", "Train the convolutional classifier", cmd_train_mignet);
  train_mignet->add_option("--data", o.data, "Data directory");
  train_mignet->add_option("--split", o.split, "Split file");
  train_mignet->add_option("--windows", o.windows, "Training windows from 'augment' instead of --data/--split");

  auto* train_svm = add("train-svm", "Feature selection + SVM baseline", cmd_train_svm);
  train_svm->add_option("--data", o.data, "Data directory")->required();
  train_svm->add_option("--split", o.split, "Split file")->required();

  auto* sweep = add("sweep", "Greedy search over layer counts and head type", cmd_sweep);
  sweep->add_option("--data", o.data, "Data directory")->required();
  sweep->add_option("--split", o.split, "Split file")->required();

  auto* evaluate = add("evaluate", "Score a saved model on the test split", cmd_evaluate);
  evaluate->add_option("--model", o.model, "Model file (mignet or svm)");
  evaluate->add_option("--data", o.data, "Data directory")->required();
  evaluate->add_option("--split", o.split, "Split file")->required();
  evaluate->add_option("--label", o.label, "Column heading in the report");

  auto* classify = add("classify", "Apply a saved model to event files", cmd_classify);
  classify->add_option("--model", o.model, "Model file");
  classify->add_option("inputs", o.inputs, "Event files or directories");

  auto* exp = add("export", "Write an export package with manifest", cmd_export);
  exp->add_option("--data", o.data, "Data directory")->required();
  exp->add_option("--model", o.model, "Optional model whose predictions go into the manifest");

  auto* report = add("report", "Render report files as a comparison table", cmd_report);
  report->add_option("inputs", o.inputs, "Report files");
  report->add_flag("--reference", o.reference, "Also check the reference comparison rows for consistency");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    for (const auto& [sub, handler] : commands) {
      if (!sub->parsed()) continue;
      auto cfg = load_settings(g);
      const int code = handler(g, o, cfg);
      write_run_block(g, cfg, sub->get_name(), args);
      return code;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n\n" << app.help();
    return kExitValidation;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
  return kExitValidation;
}
