// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
// Runtime budgets are part of each criterion.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "impact/core/error.hpp"
#include "impact/core/text.hpp"
#include "impact/dataset/augment.hpp"
#include "impact/dataset/event_file.hpp"
#include "impact/dataset/split.hpp"
#include "impact/eval/metrics.hpp"
#include "impact/eval/pipeline.hpp"
#include "impact/eval/report.hpp"
#include "impact/mignet/model.hpp"
#include "impact/sim/device.hpp"
#include "impact/svm/selection.hpp"
#include "impact/svm/svm.hpp"
#include "testkit.hpp"

using namespace impact;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

template <typename E, typename F>
bool throws(F&& f) {
  try {
    f();
  } catch (const E&) {
    return true;
  } catch (...) {
    return false;
  }
  return false;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("impact_acceptance_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

LabeledWindow labeled(const sim::LabeledEvent& e, Partition p) {
  return {e.event.event_id, normalize(build_window(e.event)), e.label, p};
}

// ---------------------------------------------------------------------------

Outcome metric_formulas() {
  Outcome o;
  struct Row {
    eval::ConfusionMatrix m;
    long long pct[4];
    double exact[4];
  };
  const Row rows[] = {
      {{56, 9, 6, 94}, {86, 94, 91, 90}, {56.0 / 65, 94.0 / 100, 150.0 / 165, 56.0 / 62}},
      {{63, 2, 10, 90}, {97, 90, 93, 86}, {63.0 / 65, 90.0 / 100, 153.0 / 165, 63.0 / 73}},
  };
  for (const auto& r : rows) {
    const auto m = eval::metrics(r.m);
    const std::optional<double> got[4] = {m.sensitivity, m.specificity, m.accuracy, m.precision};
    for (int i = 0; i < 4; ++i) {
      o.require(got[i].has_value() && *got[i] == r.exact[i], "metric " + std::to_string(i) + " not exact");
      o.require(eval::rounded_percent(got[i]) == r.pct[i], "metric " + std::to_string(i) + " rounds wrong");
    }
  }
  o.require(!eval::metrics({0, 0, 5, 5}).sensitivity.has_value(), "zero denominator must be undefined");
  if (o.pass) o.detail = "86/94/91/90 and 97/90/93/86 reproduced";
  return o;
}

Outcome gradients() {
  Outcome o;
  constexpr double kTol = 1e-4;
  double worst = 0.0, worst_abs = 0.0;
  std::size_t checked = 0;
  auto note = [&](double err, const std::string& where) {
    worst = std::max(worst, err);
    o.require(err < kTol, where + " rel error " + format_exact(err));
  };
  note(testkit::check_conv_layer_gradients({6, 20, 1, 3, 1, 7}, 1), "conv1d layer");
  note(testkit::check_conv_layer_gradients({6, 20, 3, 2, 3, 3}, 2), "conv2d layer");
  note(testkit::check_pooling_gradients(120, 4, 3), "pooling layer");
  for (EventClass c : {EventClass::TrueImpact, EventClass::NonContact}) {
    note(testkit::check_dense_loss_gradients(6, c, {1.2, 0.8}, 4), "dense+softmax+loss");
  }
  for (mignet::Head head : {mignet::Head::GlobalAveragePooling, mignet::Head::FlattenDense}) {
    auto arch = testkit::mini_architecture();
    arch.head = head;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto model = mignet::MiGNetModel::initialize(arch, seed, 1.0);
      const auto x = testkit::random_input(arch.rows * arch.cols, 100 + seed);
      const auto label = seed % 2 ? EventClass::TrueImpact : EventClass::NonContact;
      const auto r = testkit::check_model_gradients(model, x, label, {1.2, 0.8});
      checked += r.checked;
      worst_abs = std::max(worst_abs, r.max_abs_diff);
      note(r.max_rel_error, "model seed " + std::to_string(seed) + " at " + r.worst);
    }
  }
  if (o.pass) o.detail = std::to_string(checked) + " model gradients, worst rel error " + format_exact(worst) +
                         " (differences under 1e-9 count as exact), largest abs difference " + format_exact(worst_abs);
  return o;
}

Outcome end_to_end() {
  Outcome o;
  eval::PipelineConfig cfg;  // 423/600 events, 65/100 test, 6x augmentation, batch 32, 20 epochs, lr 0.01, momentum 0.9
  const auto generated = sim::gen_dataset(cfg.n_true, cfg.n_false, cfg.seed, cfg.trigger);
  eval::DataSet data;
  std::vector<dataset::SplitItem> items;
  for (const auto& e : generated) {
    data.events.push_back(e.event);
    data.labels.push_back(e.label);
    items.push_back({e.event.event_id, e.label.value});
  }
  dataset::SplitRequest req;
  req.test_true = cfg.test_true;
  req.test_false = cfg.test_false;
  const auto split = dataset::make_split(items, req, cfg.seed);
  const auto windows = eval::make_windows(data, cfg.processing, &split);
  const auto train = eval::training_set(windows, split, cfg);
  const auto test = eval::select_partition(windows, Partition::Test);
  const auto originals = eval::select_partition(windows, Partition::Train);
  std::size_t train_true = 0;
  for (const auto& w : originals) train_true += w.label.value == EventClass::TrueImpact;
  o.require(originals.size() == 858 && train_true == 358, "training originals are not 358/500");
  o.require(train.size() == 6 * 858, "augmented training set is not 6x");
  o.require(test.size() == 165, "test set is not 65/100");

  const auto model = eval::train_mignet(train, cfg);
  const eval::ReportInfo info{"MiGNet", "mignet", "acceptance", cfg.seed, "-", "-"};
  const auto net = eval::evaluate(
      test, [&](const LabeledWindow& w) { return mignet::predict(model, w.window, cfg.tie_rule).label; }, info, &split);
  const auto rule = eval::evaluate(
      test, [&](const LabeledWindow& w) { return cfg.rule.classify(w.window); }, info, &split);
  const double net_acc = *net.metrics.accuracy, rule_acc = *rule.metrics.accuracy;
  o.require(net_acc >= 0.95, "MiGNet accuracy " + fixed(100 * net_acc, 1) + "% < 95%");
  o.require(rule_acc >= 0.99, "rule accuracy " + fixed(100 * rule_acc, 1) + "% < 99%");
  const auto& m = net.matrix;
  o.detail = "MiGNet " + fixed(100 * net_acc, 1) + "% (tp=" + std::to_string(m.tp) + " fn=" + std::to_string(m.fn) +
             " fp=" + std::to_string(m.fp) + " tn=" + std::to_string(m.tn) + "), rule " + fixed(100 * rule_acc, 1) +
             "%" + (o.pass ? "" : "; " + o.detail);
  return o;
}

Outcome svm_correctness() {
  Outcome o;
  std::size_t instances = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
    const std::size_t n = 2 + seed % 7, d = 1 + seed % 4;
    const auto p = testkit::random_problem(n, d, seed);
    for (svm::KernelType k : {svm::KernelType::Linear, svm::KernelType::Rbf}) {
      for (double C : {0.05, 0.3, 1.0, 10.0, 1000.0}) {
        svm::SvmParams params;
        params.kernel = k;
        params.gamma = 0.1 + static_cast<double>(seed % 5) * 0.5;
        params.C = C;
        const auto smo = svm::solve_dual(p.x, p.y, params);
        const auto oracle = testkit::brute_force_dual(p.x, p.y, k, params.gamma, C);
        const double err = std::abs(smo.objective - oracle.objective);
        worst = std::max(worst, err);
        o.require(err < 1e-6, "seed " + std::to_string(seed) + " C " + format_exact(C) + " objective off by " +
                                  format_exact(err));
        ++instances;
      }
    }
  }

  // Two points: the hard-margin width equals their distance.
  svm::SvmParams hard;
  hard.kernel = svm::KernelType::Linear;
  hard.C = 1e4;
  double worst_margin = 0.0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    auto p = testkit::random_problem(2, 1 + seed % 3, seed);
    double dist2 = 0.0;
    for (std::size_t j = 0; j < p.x.cols; ++j) dist2 += std::pow(p.x.at(1, j) - p.x.at(0, j), 2);
    if (dist2 < 0.01) continue;
    const auto s = svm::solve_dual(p.x, p.y, hard);
    double w2 = 0.0;
    for (std::size_t j = 0; j < p.x.cols; ++j) {
      const double wj = s.alpha[0] * p.y[0] * p.x.at(0, j) + s.alpha[1] * p.y[1] * p.x.at(1, j);
      w2 += wj * wj;
    }
    const double err = std::abs(2.0 / std::sqrt(w2) - std::sqrt(dist2));
    worst_margin = std::max(worst_margin, err);
    o.require(err < 1e-3, "two-point margin off by " + format_exact(err));
  }

  int recovered = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto p = testkit::sfs_problem(60, seed);
    svm::SelectionConfig cfg;
    cfg.seed = seed;
    const auto r = svm::sequential_forward_selection(p.x, p.labels, cfg);
    const std::set<std::size_t> got(r.selected.begin(), r.selected.end());
    recovered += got == std::set<std::size_t>{testkit::SfsProblem::kInformativeA, testkit::SfsProblem::kInformativeB};
  }
  o.require(recovered >= 95, "selection recovered the pair in only " + std::to_string(recovered) + "/100 runs");
  const std::string summary = std::to_string(instances) + " oracle instances (worst " + format_exact(worst) +
                              "), margin worst " + format_exact(worst_margin) + ", selection " +
                              std::to_string(recovered) + "/100";
  o.detail = o.pass ? summary : o.detail + "; " + summary;
  return o;
}

Outcome trigger_semantics() {
  Outcome o;
  std::size_t events = 0, gated = 0;
  for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
    const auto r = testkit::check_trigger_properties(seed);
    o.require(r.failure.empty(), "stream " + std::to_string(seed) + ": " + r.failure);
    events += r.events;
    gated += r.gated_pulses;
  }
  o.require(events > 1000, "too few events to be meaningful");
  o.require(gated > 0, "no worn-gated pulses exercised");
  if (o.pass) o.detail = "1000 streams, " + std::to_string(events) + " events, " + std::to_string(gated) + " gated pulses";
  return o;
}

Outcome augmentation_contract() {
  Outcome o;
  std::vector<LabeledWindow> originals;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto ev = testkit::random_event(seed);
    const auto c = seed % 2 ? EventClass::TrueImpact : EventClass::NonContact;
    originals.push_back({ev.event_id, normalize(build_window(ev)), {c, LabelSource::Synthetic, ""}, Partition::Train});
  }
  std::size_t shifts = 0;
  for (const auto& w : originals) {
    for (int k = 1; k <= 5; ++k) {
      const auto a = dataset::augment_shift(w, k);
      ++shifts;
      o.require(a.id == w.id + "+s" + std::to_string(k), "augmented id");
      o.require(a.label.source == LabelSource::Augmented && a.label.parent_id == w.id, "augmented label");
      o.require(a.label.value == w.label.value && a.partition == Partition::Train, "class or partition changed");
      for (std::size_t r = 0; r < w.window.rows(); ++r) {
        const auto src = w.window.row(r);
        const auto dst = a.window.row(r);
        for (std::size_t c = 0; c < dst.size(); ++c) {
          const double want = c < static_cast<std::size_t>(k) ? 0.0 : src[c - static_cast<std::size_t>(k)];
          o.require(dst[c] == want, "shift " + std::to_string(k) + " row " + std::to_string(r) + " col " +
                                        std::to_string(c));
        }
      }
      o.require(throws<InvalidState>([&] { (void)dataset::augment_shift(a, 1); }), "augmenting a copy");
    }
    o.require(throws<InvalidParameter>([&] { (void)dataset::augment_shift(w, 0); }), "shift 0 accepted");
    o.require(throws<InvalidParameter>([&] { (void)dataset::augment_shift(w, 6); }), "shift 6 accepted");
  }
  const auto expanded = dataset::expand_training_set(originals);
  o.require(expanded.size() == 6 * originals.size(), "expansion is not 6x");
  for (std::size_t i = 0; i < originals.size() && i * 6 < expanded.size(); ++i) {
    o.require(expanded[6 * i] == originals[i], "original not kept in place");
  }

  // Contamination attempts.
  auto test_window = originals[0];
  test_window.partition = Partition::Test;
  o.require(throws<ContaminationError>([&] { (void)dataset::augment_shift(test_window, 2); }),
            "augmenting a test window");
  auto mixed = originals;
  mixed[3].partition = Partition::Test;
  o.require(throws<ContaminationError>([&] { (void)dataset::expand_training_set(mixed); }),
            "expanding a set holding a test window");
  dataset::SplitSpec split;
  split.test_ids = {originals[0].id};
  for (std::size_t i = 1; i < originals.size(); ++i) split.train_ids.push_back(originals[i].id);
  std::sort(split.train_ids.begin(), split.train_ids.end());
  std::vector<LabeledWindow> leaked{dataset::augment_shift(originals[0], 3)};
  o.require(throws<ContaminationError>([&] { dataset::apply_split(leaked, split); }),
            "split accepted an augmented copy of a test event");
  std::vector<LabeledWindow> eval_set{dataset::augment_shift(originals[0], 1)};
  eval_set[0].partition = Partition::Test;
  o.require(throws<ContaminationError>([&] {
              (void)eval::evaluate(eval_set, [](const LabeledWindow&) { return EventClass::TrueImpact; }, {});
            }),
            "evaluation accepted an augmented window");
  auto model = mignet::MiGNetModel::initialize(testkit::mini_architecture(), 1);
  o.require(throws<ContaminationError>([&] { (void)mignet::train(model, mixed, {}); }),
            "training accepted a test window");
  o.require(throws<ContaminationError>([&] { (void)eval::train_svm_pipeline(mixed, {}); }),
            "svm training accepted a test window");
  if (o.pass) o.detail = std::to_string(shifts) + " shifts checked column by column, 6 contamination attempts refused";
  return o;
}

int run_cli(const fs::path& dir, const std::string& args) {
  const std::string cmd = "cd '" + dir.string() + "' && SOURCE_DATE_EPOCH=1700000000 '" + IMPACT_PIPE_BIN +
                          "' -q --config run.cfg " + args + " >>cli.log 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> tree_contents(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root / "out")) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = dataset::read_text_file(e.path());
  }
  return out;
}

Outcome determinism() {
  Outcome o;
  TempDir tmp("determinism");
  const std::vector<std::string> steps = {
      "--out out/data simulate",
      "--out out ingest --data out/data",
      "--out out split --data out/data",
      "--out out augment --data out/data --split out/split.csv",
      "--out out train-mignet --windows out/train_windows.txt",
      "--out out train-svm --data out/data --split out/split.csv",
      "--out out/eval_mignet evaluate --model out/mignet.model --data out/data --split out/split.csv",
      "--out out/eval_svm evaluate --model out/svm.model --data out/data --split out/split.csv",
      "--out out classify --model out/mignet.model out/data/events",
      "--out out export --data out/data --model out/mignet.model",
      "--out out report out/eval_svm/report.txt out/eval_mignet/report.txt",
  };
  std::vector<std::map<std::string, std::string>> runs;
  for (const char* name : {"run1", "run2"}) {
    const fs::path dir = tmp.path / name;
    fs::create_directories(dir);
    std::ofstream(dir / "run.cfg") << "seed = 7\nn_true = 40\nn_false = 50\ntest_true = 8\ntest_false = 10\n"
                                      "epochs = 2\n";
    for (const auto& s : steps) {
      const int rc = run_cli(dir, s);
      o.require(rc == 0, std::string(name) + ": '" + s + "' exited " + std::to_string(rc));
    }
    runs.push_back(tree_contents(dir));
  }
  std::size_t models = 0, events = 0, reports = 0;
  for (const auto& [path, text] : runs[0]) {
    const auto it = runs[1].find(path);
    o.require(it != runs[1].end(), path + " missing from the second run");
    o.require(it == runs[1].end() || it->second == text, path + " differs between runs");
    models += path.ends_with(".model");
    events += path.starts_with("out/data/events/");
    reports += fs::path(path).filename() == "report.txt";
  }
  o.require(runs[0].size() == runs[1].size(), "runs wrote different file sets");
  o.require(models == 2 && reports == 2 && events == 90, "pipeline outputs incomplete: " + std::to_string(models) + " models, " + std::to_string(reports) + " reports, " + std::to_string(events) + " event files");
  if (o.pass) {
    o.detail = std::to_string(runs[0].size()) + " files identical (" + std::to_string(events) + " event files, " +
               std::to_string(models) + " models, " + std::to_string(reports) + " reports)";
  }
  return o;
}

Outcome format_round_trips() {
  Outcome o;
  TempDir tmp("formats");
  for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
    const auto ev = testkit::random_event(seed);
    const fs::path file = tmp.path / (ev.event_id + ".csv");
    dataset::write_event_file(ev, file);
    const auto back = dataset::parse_event_file(file);
    o.require(back == ev, "event " + std::to_string(seed) + " changed in a round trip");
    o.require(dataset::format_event(back) == dataset::read_text_file(file), "event text not stable");
  }
  std::size_t cases = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    for (const auto& c : testkit::malformed_corpus(testkit::random_event(5000 + seed))) {
      const auto got = testkit::classify_parse_failure(c.text);
      o.require(got == testkit::expected_error_name(c.expected),
                c.name + " gave " + got + ", expected " + testkit::expected_error_name(c.expected));
      ++cases;
    }
  }
  if (o.pass) o.detail = "1000 events round trip exactly, " + std::to_string(cases) + " malformed files classified";
  return o;
}

Outcome relative_speed() {
  Outcome o;
  eval::PipelineConfig cfg;
  cfg.training.epochs = 2;
  const auto generated = sim::gen_dataset(358, 500, cfg.seed, cfg.trigger);
  std::vector<LabeledWindow> originals;
  for (const auto& e : generated) originals.push_back(labeled(e, Partition::Train));
  const auto expanded = dataset::expand_training_set(originals);

  auto time_it = [](const std::function<void()>& f) {
    const auto t0 = Clock::now();
    f();
    return seconds_since(t0);
  };
  const double net_small = time_it([&] { (void)eval::train_mignet(originals, cfg); });
  const double net_large = time_it([&] { (void)eval::train_mignet(expanded, cfg); });
  const double svm_small = time_it([&] { (void)eval::train_svm_pipeline(originals, cfg); });
  const double svm_large = time_it([&] { (void)eval::train_svm_pipeline(expanded, cfg); });
  const double net_factor = net_large / net_small;
  const double svm_factor = svm_large / svm_small;
  o.require(net_factor < 8.0, "MiGNet time grew " + fixed(net_factor, 2) + "x");

  std::ostringstream bench;
  bench << "stage,windows,seconds\n"
        << "mignet_" << cfg.training.epochs << "_epochs," << originals.size() << "," << fixed(net_small, 3) << "\n"
        << "mignet_" << cfg.training.epochs << "_epochs," << expanded.size() << "," << fixed(net_large, 3) << "\n"
        << "selection_plus_svm," << originals.size() << "," << fixed(svm_small, 3) << "\n"
        << "selection_plus_svm," << expanded.size() << "," << fixed(svm_large, 3) << "\n"
        << "# mignet_growth=" << fixed(net_factor, 3) << " svm_growth=" << fixed(svm_factor, 3)
        << " svm_over_mignet=" << fixed(svm_factor / net_factor, 3) << "\n";
  dataset::write_text_file("acceptance_benchmark.csv", bench.str());
  const std::string summary = "MiGNet " + fixed(net_small, 1) + "s -> " + fixed(net_large, 1) + "s (" +
                              fixed(net_factor, 2) + "x), selection+SVM " + fixed(svm_small, 1) + "s -> " +
                              fixed(svm_large, 1) + "s (" + fixed(svm_factor, 2) + "x), ratio " +
                              fixed(svm_factor / net_factor, 2) + "; see acceptance_benchmark.csv";
  o.detail = o.pass ? summary : o.detail + "; " + summary;
  return o;
}

struct Criterion {
  const char* name;
  double budget_s;  // 0: no runtime bound
  Outcome (*run)();
};

}  // namespace

int main(int argc, char** argv) {
  const Criterion criteria[] = {
      {"metric-formulas", 1.0, metric_formulas},
      {"gradient-correctness", 60.0, gradients},
      {"end-to-end-learning", 600.0, end_to_end},
      {"svm-correctness", 120.0, svm_correctness},
      {"trigger-semantics", 60.0, trigger_semantics},
      {"augmentation-contract", 0.0, augmentation_contract},
      {"determinism", 0.0, determinism},
      {"format-round-trips", 0.0, format_round_trips},
      {"relative-speed", 0.0, relative_speed},
  };
  // Optional filter: run only the criteria named on the command line.
  const std::set<std::string> only(argv + 1, argv + argc);
  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.name)) continue;
    const auto t0 = Clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("unexpected exception: ") + e.what();
    }
    const double secs = seconds_since(t0);
    if (c.budget_s > 0.0 && secs >= c.budget_s) {
      out.detail += (out.detail.empty() ? "" : "; ") + std::string("over the ") + fixed(c.budget_s, 0) + " s budget";
      out.pass = false;
    }
    failures += !out.pass;
    std::cout << (out.pass ? "PASS " : "FAIL ") << c.name << " [" << fixed(secs, 2) << " s] " << out.detail
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
