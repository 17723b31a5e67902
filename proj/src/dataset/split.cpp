#include "impact/dataset/split.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "impact/core/error.hpp"
#include "impact/core/random.hpp"
#include "impact/core/text.hpp"
#include "impact/dataset/event_file.hpp"

namespace impact::dataset {

namespace {

bool contains_sorted(const std::vector<std::string>& ids, const std::string& id) {
  return std::binary_search(ids.begin(), ids.end(), id);
}

}  // namespace

void SplitSpec::validate() const {
  if (!std::is_sorted(train_ids.begin(), train_ids.end()) || !std::is_sorted(test_ids.begin(), test_ids.end())) {
    throw InvalidState("split ids must be sorted");
  }
  if (std::adjacent_find(train_ids.begin(), train_ids.end()) != train_ids.end() ||
      std::adjacent_find(test_ids.begin(), test_ids.end()) != test_ids.end()) {
    throw InvalidState("split lists an id twice");
  }
  std::vector<std::string> both;
  std::set_intersection(train_ids.begin(), train_ids.end(), test_ids.begin(), test_ids.end(), std::back_inserter(both));
  if (!both.empty()) throw InvalidState("id " + both.front() + " is on both sides of the split");
}

bool SplitSpec::is_test(const std::string& id) const { return contains_sorted(test_ids, id); }
bool SplitSpec::is_train(const std::string& id) const { return contains_sorted(train_ids, id); }

SplitSpec make_split(std::span<const SplitItem> items, const SplitRequest& request, std::uint64_t seed) {
  const int forms = (request.test_true || request.test_false ? 1 : 0) + (request.test_fraction ? 1 : 0) +
                    (request.test_ids.empty() ? 0 : 1);
  if (forms > 1) throw InvalidParameter("give test counts, a test fraction or explicit test ids, not several");

  std::vector<std::string> by_class[2];
  for (const auto& item : items) by_class[item.label == EventClass::TrueImpact ? 0 : 1].push_back(item.id);
  std::set<std::string> all;
  for (const auto& item : items) {
    if (!all.insert(item.id).second) throw InvalidState("duplicate event id " + item.id);
  }

  SplitSpec split;
  split.augment_train = request.augment_train;
  if (!request.test_ids.empty()) {
    std::set<std::string> test;
    for (const auto& id : request.test_ids) {
      if (!all.contains(id)) throw InvalidParameter("test id " + id + " is not in the dataset");
      test.insert(id);
    }
    for (const auto& id : all) (test.contains(id) ? split.test_ids : split.train_ids).push_back(id);
    split.validate();
    return split;
  }

  std::size_t want[2] = {0, 0};
  if (request.test_fraction) {
    const double f = *request.test_fraction;
    if (!(f >= 0.0 && f <= 1.0)) throw InvalidParameter("test fraction must lie in [0, 1]");
    for (int c = 0; c < 2; ++c) want[c] = static_cast<std::size_t>(std::llround(f * static_cast<double>(by_class[c].size())));
  } else {
    want[0] = request.test_true.value_or(0);
    want[1] = request.test_false.value_or(0);
  }

  for (int c = 0; c < 2; ++c) {
    auto& ids = by_class[c];
    if (want[c] > ids.size()) {
      throw InvalidParameter("requested " + std::to_string(want[c]) + " test " +
                             std::string(class_name(c == 0 ? EventClass::TrueImpact : EventClass::NonContact)) +
                             " events but only " + std::to_string(ids.size()) + " exist");
    }
    std::sort(ids.begin(), ids.end());
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
    rng.shuffle(ids);
    split.test_ids.insert(split.test_ids.end(), ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(want[c]));
    split.train_ids.insert(split.train_ids.end(), ids.begin() + static_cast<std::ptrdiff_t>(want[c]), ids.end());
  }
  std::sort(split.train_ids.begin(), split.train_ids.end());
  std::sort(split.test_ids.begin(), split.test_ids.end());
  split.validate();
  return split;
}

void apply_split(std::span<LabeledWindow> windows, const SplitSpec& split) {
  for (auto& w : windows) {
    if (w.label.source == LabelSource::Augmented) {
      if (split.is_test(w.id) || split.is_test(w.label.parent_id)) {
        throw ContaminationError("augmented window " + w.id + " derives from a test event");
      }
      w.partition = split.is_train(w.label.parent_id) ? Partition::Train : Partition::Unassigned;
      continue;
    }
    w.partition = split.is_test(w.id) ? Partition::Test : split.is_train(w.id) ? Partition::Train : Partition::Unassigned;
  }
}

std::string format_split(const SplitSpec& split) {
  split.validate();
  std::vector<std::pair<std::string, bool>> rows;
  for (const auto& id : split.train_ids) rows.emplace_back(id, false);
  for (const auto& id : split.test_ids) rows.emplace_back(id, true);
  std::sort(rows.begin(), rows.end());
  std::string out = "# schema=impact-pipe-split/1\n# augment_train=";
  out += split.augment_train ? "true\n" : "false\n";
  out += "event_id,partition\n";
  for (const auto& [id, test] : rows) {
    check_identifier(id, "event_id");
    out += id;
    out += test ? ",test\n" : ",train\n";
  }
  return out;
}

SplitSpec parse_split(std::string_view text) {
  LineReader in(text);
  auto line = in.next();
  if (!line || *line != "# schema=impact-pipe-split/1") throw SchemaError("not a split file");
  line = in.next();
  SplitSpec spec;
  if (line == std::optional<std::string_view>("# augment_train=true")) {
    spec.augment_train = true;
  } else if (line == std::optional<std::string_view>("# augment_train=false")) {
    spec.augment_train = false;
  } else {
    throw SchemaError("split file lacks '# augment_train=true|false'");
  }
  line = in.next();
  if (!line || *line != "event_id,partition") throw SchemaError("split file lacks the 'event_id,partition' header");
  std::size_t row = 0;
  while (auto l = in.next()) {
    if (l->empty()) continue;
    ++row;
    const auto f = split(*l, ',');
    if (f.size() != 2) throw StructuralError("split row " + std::to_string(row) + " needs 2 fields");
    if (f[1] == "test") {
      spec.test_ids.emplace_back(f[0]);
    } else if (f[1] == "train") {
      spec.train_ids.emplace_back(f[0]);
    } else {
      throw DataError("partition must be train or test", row);
    }
  }
  std::sort(spec.train_ids.begin(), spec.train_ids.end());
  std::sort(spec.test_ids.begin(), spec.test_ids.end());
  spec.validate();
  return spec;
}

void write_split_file(const SplitSpec& split, const std::filesystem::path& path) {
  write_text_file(path, format_split(split));
}

SplitSpec read_split_file(const std::filesystem::path& path) { return parse_split(read_text_file(path)); }

}  // namespace impact::dataset
