#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "impact/core/kinematics.hpp"
#include "impact/core/window.hpp"

namespace impact::dataset {

/// Train/test partition by event id. Ids are kept sorted.
struct SplitSpec {
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
  bool augment_train = true;

  /// Throws InvalidState when an id appears on both sides or twice.
  void validate() const;

  bool is_test(const std::string& id) const;
  bool is_train(const std::string& id) const;

  bool operator==(const SplitSpec&) const = default;
};

struct SplitItem {
  std::string id;
  EventClass label = EventClass::NonContact;
};

/// How many events of each class go to the test side. Exactly one of the
/// three forms is used: explicit ids, per-class counts, or a fraction.
struct SplitRequest {
  std::optional<std::size_t> test_true;
  std::optional<std::size_t> test_false;
  std::optional<double> test_fraction;
  std::vector<std::string> test_ids;
  bool augment_train = true;
};

/// Stratified, seeded split. Per class, items are ordered by id and then
/// shuffled with a seed derived from (seed, class), so the result does not
/// depend on input order. Throws InvalidParameter when a class has fewer
/// items than requested, an explicit id is unknown, or the request is
/// ambiguous; InvalidState on duplicate ids.
SplitSpec make_split(std::span<const SplitItem> items, const SplitRequest& request, std::uint64_t seed);

/// Sets each window's partition from the split; windows absent from both
/// sides become Unassigned. Throws ContaminationError for an augmented window
/// whose id (or parent) is on the test side.
void apply_split(std::span<LabeledWindow> windows, const SplitSpec& split);

/// Text form: "# schema=impact-pipe-split/1", "# augment_train=true|false",
/// then "event_id,partition" rows sorted by id.
std::string format_split(const SplitSpec& split);
SplitSpec parse_split(std::string_view text);
void write_split_file(const SplitSpec& split, const std::filesystem::path& path);
SplitSpec read_split_file(const std::filesystem::path& path);

}  // namespace impact::dataset
