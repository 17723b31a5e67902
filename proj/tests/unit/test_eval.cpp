#include <doctest.h>

#include <cstdlib>
#include <string>

#include "impact/core/error.hpp"
#include "impact/dataset/split.hpp"
#include "impact/eval/config.hpp"
#include "impact/eval/metrics.hpp"
#include "impact/eval/report.hpp"
#include "testkit.hpp"

using namespace impact;
using namespace impact::eval;

namespace {

LabeledWindow test_window(std::uint64_t seed, EventClass c) {
  const auto ev = testkit::random_event(seed);
  return {ev.event_id, normalize(build_window(ev)), {c, LabelSource::Synthetic, ""}, Partition::Test};
}

long long pct(const std::optional<double>& v) {
  REQUIRE(v.has_value());
  return *rounded_percent(v);
}

EvalReport sample_report() {
  EvalReport r;
  r.label = "MiGNet";
  r.model_kind = "mignet";
  r.model_id = "mignet-0123456789abcdef";
  r.dataset_id = "ds-fedcba9876543210";
  r.seed = 42;
  r.timestamp = "2024-01-01T00:00:00Z";
  r.version = "1.0.0";
  r.matrix = {63, 2, 10, 90};
  r.metrics = metrics(r.matrix);
  return r;
}

// Restores an environment variable on scope exit.
struct EnvGuard {
  std::string name;
  std::optional<std::string> old;
  explicit EnvGuard(std::string n) : name(std::move(n)) {
    if (const char* v = std::getenv(name.c_str())) old = v;
  }
  ~EnvGuard() {
    if (old) {
      setenv(name.c_str(), old->c_str(), 1);
    } else {
      unsetenv(name.c_str());
    }
  }
};

}  // namespace

TEST_CASE("metrics of the reference confusion matrices") {
  const auto svm = metrics({56, 9, 6, 94});
  CHECK(pct(svm.sensitivity) == 86);
  CHECK(pct(svm.specificity) == 94);
  CHECK(pct(svm.accuracy) == 91);
  CHECK(pct(svm.precision) == 90);

  const auto mig = metrics({63, 2, 10, 90});
  CHECK(pct(mig.sensitivity) == 97);
  CHECK(pct(mig.specificity) == 90);
  CHECK(pct(mig.accuracy) == 93);
  CHECK(pct(mig.precision) == 86);

  CHECK(*mig.sensitivity == doctest::Approx(63.0 / 65.0).epsilon(1e-15));
  CHECK(*mig.precision == doctest::Approx(63.0 / 73.0).epsilon(1e-15));
}

TEST_CASE("empty denominators leave metrics undefined") {
  const auto only_negatives = metrics({0, 0, 3, 7});
  CHECK_FALSE(only_negatives.sensitivity.has_value());
  CHECK(*only_negatives.precision == 0.0);
  CHECK_FALSE(metrics({0, 0, 0, 5}).precision.has_value());
  CHECK(*only_negatives.specificity == doctest::Approx(0.7));
  CHECK(*only_negatives.accuracy == doctest::Approx(0.7));

  const auto none = metrics({});
  CHECK_FALSE(none.sensitivity);
  CHECK_FALSE(none.specificity);
  CHECK_FALSE(none.accuracy);
  CHECK_FALSE(none.precision);
  CHECK_FALSE(rounded_percent(std::nullopt).has_value());
}

TEST_CASE("rounded_percent rounds halves up") {
  CHECK(*rounded_percent(0.125) == 13);
  CHECK(*rounded_percent(0.135) == 14);
  CHECK(*rounded_percent(0.0) == 0);
  CHECK(*rounded_percent(1.0) == 100);
  CHECK(*rounded_percent(0.8615) == 86);
  CHECK(*rounded_percent(0.995) == 100);
}

TEST_CASE("confusion matrix counting and metric ranges") {
  ConfusionMatrix m;
  m.add(EventClass::TrueImpact, EventClass::TrueImpact);
  m.add(EventClass::TrueImpact, EventClass::NonContact);
  m.add(EventClass::NonContact, EventClass::TrueImpact);
  m.add(EventClass::NonContact, EventClass::NonContact);
  m.add(EventClass::NonContact, EventClass::NonContact);
  CHECK(m == ConfusionMatrix{1, 1, 1, 2});
  CHECK(m.positives() == 2);
  CHECK(m.negatives() == 3);

  for (std::uint64_t tp = 0; tp <= 6; ++tp) {
    for (std::uint64_t fn = 0; fn <= 6; ++fn) {
      for (std::uint64_t fp = 0; fp <= 6; ++fp) {
        for (std::uint64_t tn = 0; tn <= 6; ++tn) {
          const auto r = metrics({tp, fn, fp, tn});
          for (const auto& v : {r.sensitivity, r.specificity, r.accuracy, r.precision}) {
            if (v) CHECK((*v >= 0.0 && *v <= 1.0));
          }
          if (r.accuracy && r.sensitivity && r.specificity) {
            // accuracy is a weighted mean of sensitivity and specificity
            CHECK(*r.accuracy >= std::min(*r.sensitivity, *r.specificity) - 1e-15);
            CHECK(*r.accuracy <= std::max(*r.sensitivity, *r.specificity) + 1e-15);
          }
        }
      }
    }
  }
}

TEST_CASE("reference rows against integer confusion matrices") {
  SUBCASE("first comparison is consistent at 165 events with 65 positives") {
    const auto svm = check_consistency(86, 94, 91, 90, 165, 65);
    CHECK(svm.consistent);
    const auto mig = check_consistency(97, 90, 93, 86, 165, 65);
    REQUIRE(mig.consistent);
    CHECK(mig.witness->total() == 165);
    CHECK(mig.witness->positives() == 65);
  }
  SUBCASE("second comparison") {
    CHECK_FALSE(check_consistency(76, 99, 96, 86, 165, 65).consistent);
    CHECK_FALSE(check_consistency(76, 99, 96, 86, 512, 202).consistent);
    const auto free = check_consistency(76, 99, 96, 86, 512);
    REQUIRE(free.consistent);
    const auto& w = *free.witness;
    CHECK(w.total() == 512);
    const auto m = metrics(w);
    CHECK(std::abs(*m.sensitivity * 100 - 76) <= 0.5);
    CHECK(std::abs(*m.specificity * 100 - 99) <= 0.5);
    CHECK(std::abs(*m.accuracy * 100 - 96) <= 0.5);
    CHECK(std::abs(*m.precision * 100 - 86) <= 0.5);
  }
  SUBCASE("a matrix's own rounded metrics are always consistent") {
    const ConfusionMatrix m{37, 12, 6, 457};
    const auto r = metrics(m);
    CHECK(check_consistency(100.0 * *r.sensitivity, 100.0 * *r.specificity, 100.0 * *r.accuracy,
                            100.0 * *r.precision, m.total(), m.positives())
              .consistent);
  }
}

TEST_CASE("report text round trip") {
  const auto r = sample_report();
  const auto text = format_report(r);
  CHECK(text.find("Sensitivity") != std::string::npos);
  CHECK(text.find("97%") != std::string::npos);
  CHECK(parse_report(text) == r);

  SUBCASE("undefined metrics survive") {
    auto u = r;
    u.matrix = {0, 0, 4, 6};
    u.metrics = metrics(u.matrix);
    const auto t = format_report(u);
    CHECK(t.find("undefined") != std::string::npos);
    CHECK(parse_report(t) == u);
  }
  SUBCASE("tampered metric") {
    std::string t = text;
    const auto at = t.find("tp=63");
    REQUIRE(at != std::string::npos);
    t.replace(at, 5, "tp=64");
    CHECK_THROWS_AS(parse_report(t), FormatError);
  }
  SUBCASE("missing key") {
    std::string t = text;
    const auto at = t.find("seed=");
    t.erase(at, t.find('\n', at) - at + 1);
    CHECK_THROWS_AS(parse_report(t), FormatError);
  }
  SUBCASE("not a report") { CHECK_THROWS_AS(parse_report("hello\n"), FormatError); }
  SUBCASE("line breaks in fields") {
    auto bad = r;
    bad.label = "a\nb";
    CHECK_THROWS_AS(format_report(bad), InvalidParameter);
  }
}

TEST_CASE("render_table lays reports side by side") {
  auto a = sample_report();
  auto b = sample_report();
  b.label = "SVM";
  b.matrix = {56, 9, 6, 94};
  b.metrics = metrics(b.matrix);
  const std::vector<EvalReport> both{b, a};
  const auto table = render_table(both);
  CHECK(table ==
        "Metric        SVM        MiGNet\n"
        "Dataset size  165        165\n"
        "Sensitivity   86%        97%\n"
        "Specificity   94%        90%\n"
        "Accuracy      91%        93%\n"
        "Precision     90%        86%\n");
}

TEST_CASE("evaluate counts predictions and refuses contaminated sets") {
  std::vector<LabeledWindow> set;
  for (std::uint64_t s = 0; s < 6; ++s) set.push_back(test_window(s, s % 2 ? EventClass::NonContact : EventClass::TrueImpact));
  ReportInfo info{"all-true", "rule", "rule-x", 1, "t", "v"};
  const Classifier always_true = [](const LabeledWindow&) { return EventClass::TrueImpact; };

  const auto r = evaluate(set, always_true, info);
  CHECK(r.matrix == ConfusionMatrix{3, 0, 3, 0});
  CHECK(r.dataset_id == dataset_id(set));
  CHECK(r.label == "all-true");

  SUBCASE("train window") {
    auto bad = set;
    bad[2].partition = Partition::Train;
    CHECK_THROWS_AS(evaluate(bad, always_true, info), ContaminationError);
  }
  SUBCASE("augmented window") {
    auto bad = set;
    bad[1].label.source = LabelSource::Augmented;
    bad[1].label.parent_id = bad[0].id;
    CHECK_THROWS_AS(evaluate(bad, always_true, info), ContaminationError);
  }
  SUBCASE("window missing from the split's test side") {
    dataset::SplitSpec split;
    for (std::size_t i = 1; i < set.size(); ++i) split.test_ids.push_back(set[i].id);
    std::sort(split.test_ids.begin(), split.test_ids.end());
    split.train_ids = {set[0].id};
    CHECK_THROWS_AS(evaluate(set, always_true, info, &split), ContaminationError);
    const std::vector<LabeledWindow> rest(set.begin() + 1, set.end());
    CHECK_NOTHROW(evaluate(rest, always_true, info, &split));
  }
  SUBCASE("empty") { CHECK_THROWS_AS(evaluate({}, always_true, info), InvalidParameter); }
}

TEST_CASE("dataset_id ignores order") {
  std::vector<LabeledWindow> set;
  for (std::uint64_t s = 10; s < 15; ++s) set.push_back(test_window(s, EventClass::TrueImpact));
  const auto id = dataset_id(set);
  CHECK(id.rfind("ds-", 0) == 0);
  CHECK(id.size() == 3 + 16);
  std::reverse(set.begin(), set.end());
  CHECK(dataset_id(set) == id);
  set.pop_back();
  CHECK(dataset_id(set) != id);
}

TEST_CASE("config text round trip and hash") {
  PipelineConfig cfg;
  const auto text = format_config(cfg);
  const auto back = parse_config(text);
  CHECK(format_config(back) == text);
  CHECK(config_hash(back) == config_hash(cfg));

  const auto hash = config_hash(cfg);
  CHECK(hash.size() == 16);
  CHECK(hash.find_first_not_of("0123456789abcdef") == std::string::npos);

  const auto tweaked = parse_config("# comment\nlr = 0.02\nconv1d = 8x7\nsvm_kernel = linear\n", cfg);
  CHECK(tweaked.training.lr == 0.02);
  CHECK(tweaked.architecture.conv1d.size() == 1);
  CHECK(tweaked.selection.svm.kernel == svm::KernelType::Linear);
  CHECK(config_hash(tweaked) != hash);
  CHECK(format_config(parse_config(format_config(tweaked))) == format_config(tweaked));

  CHECK_THROWS_AS(parse_config("no_such_key = 1\n"), InvalidParameter);
  CHECK_THROWS_AS(parse_config("lr = fast\n"), InvalidParameter);
  CHECK_THROWS_AS(parse_config("lr = -1\n"), InvalidParameter);
}

TEST_CASE("resolve_timestamp") {
  EnvGuard guard("SOURCE_DATE_EPOCH");
  CHECK(resolve_timestamp(std::string("fixed")) == "fixed");
  setenv("SOURCE_DATE_EPOCH", "0", 1);
  CHECK(resolve_timestamp(std::nullopt) == "1970-01-01T00:00:00Z");
  setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
  CHECK(resolve_timestamp(std::nullopt) == "2023-11-14T22:13:20Z");
  setenv("SOURCE_DATE_EPOCH", "soon", 1);
  CHECK_THROWS_AS(resolve_timestamp(std::nullopt), InvalidParameter);
  unsetenv("SOURCE_DATE_EPOCH");
  const auto now = resolve_timestamp(std::nullopt);
  CHECK(now.size() == 20);
  CHECK(now.back() == 'Z');
}
