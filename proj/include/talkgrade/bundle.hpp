#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "talkgrade/corpus.hpp"

namespace talkgrade {

/// Validated corpus as produced by `talkgrade ingest`: filtered talks, the
/// word vectors their tokens need, and (optionally) dependency trees.
struct CorpusBundle {
  static constexpr std::uint32_t kVersion = 1;

  std::vector<Talk> talks;
  WordVectors vectors{1};
  TreeMap trees;
  bool has_trees = false;

  /// Trees of one talk in sentence order. Throws if the talk has none.
  std::vector<const DepTree*> trees_for(const std::string& talk_id) const;

  void save(const std::filesystem::path& path) const;
  static CorpusBundle load(const std::filesystem::path& path);
};

struct DatasetSummary {
  std::size_t talks = 0;
  std::int64_t total_ratings = 0;
  std::int64_t min_ratings = 0;
  double mean_ratings = 0;
  std::size_t total_words = 0;
  std::size_t total_sentences = 0;
  std::size_t trees = 0;
  std::array<std::int64_t, kNumCategories> per_category{};

  std::string to_text() const;
};

DatasetSummary summarize(const CorpusBundle& bundle);

}  // namespace talkgrade
