#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "talkgrade/categories.hpp"

namespace talkgrade {

using Sentence = std::vector<std::string>;
using RatingCounts = std::array<std::int64_t, kNumCategories>;

struct Talk {
  std::string id;
  std::string title;
  std::string transcript;
  std::vector<Sentence> sentences;
  RatingCounts rating_counts{};
  std::int64_t total_views = 0;
  std::int64_t age_days = 0;
  std::vector<std::string> keywords;

  std::size_t word_count() const;
};

/// Reads one talk per line. Lines that are blank are skipped; every other
/// line must be a complete record or the whole load fails with the line
/// number in the message.
std::vector<Talk> load_talks(const std::filesystem::path& path);

/// Parses a single JSONL record. `line_no` is used only for diagnostics.
Talk parse_talk_record(std::string_view line, std::size_t line_no);

/// Keyword list that excludes performance talks from the rating corpus.
const std::vector<std::string>& default_banned_keywords();

inline constexpr std::size_t kDefaultMinWords = 450;
inline constexpr std::int64_t kDefaultMinAgeDays = 183;

std::vector<Talk> filter_talks(const std::vector<Talk>& talks, std::size_t min_words,
                               std::int64_t min_age_days,
                               const std::vector<std::string>& banned_keywords);

// Segmentation rule: a whitespace-delimited chunk whose trailing punctuation
// contains '.', '!' or '?' closes the sentence. Leading and trailing ASCII
// punctuation is split off one character per token; inner punctuation
// ("don't", "e-mail") stays in the word. Everything is lowercased.
std::vector<Sentence> split_sentences(std::string_view transcript);

class WordVectors {
 public:
  explicit WordVectors(int dim = 300);

  int dim() const { return dim_; }
  std::size_t size() const { return table_.size(); }
  bool contains(const std::string& token) const { return table_.count(token) > 0; }

  /// Absent tokens map to the shared zero vector.
  const Eigen::VectorXd& lookup(const std::string& token) const;

  /// Throws on wrong length or an existing token.
  void insert(std::string token, Eigen::VectorXd vec);

  /// Copy holding only the entries whose token is in `keep`.
  WordVectors restricted_to(const std::vector<std::string>& keep) const;

  /// Tokens in lexicographic order (stable for serialization).
  std::vector<std::string> sorted_tokens() const;

 private:
  int dim_;
  Eigen::VectorXd zero_;
  std::unordered_map<std::string, Eigen::VectorXd> table_;
};

WordVectors load_word_vectors(const std::filesystem::path& path, int dim);

struct DepNode {
  std::string token;
  std::string pos_tag;
  std::string dep_type;
  int parent = -1;  // -1 marks the root
  std::vector<int> children;
};

struct DepTree {
  std::vector<DepNode> nodes;
  int root = -1;

  std::size_t size() const { return nodes.size(); }

  /// Node indices with every child listed before its parent.
  std::vector<int> bottom_up_order() const;

  /// Throws if links are inconsistent or the nodes do not form one tree.
  void validate() const;
};

/// Builds a tree from per-token heads (1-based, 0 = root) after checking for
/// cycles and for exactly one root.
DepTree make_dep_tree(std::vector<DepNode> nodes, const std::vector<int>& heads);

using TreeKey = std::pair<std::string, int>;  // (talk id, sentence index)
using TreeMap = std::map<TreeKey, DepTree>;

TreeMap load_dep_trees(const std::filesystem::path& path);
TreeMap parse_dep_trees(std::string_view text);

class TagIndex {
 public:
  TagIndex() = default;
  explicit TagIndex(std::vector<std::string> sorted_unique);

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  std::optional<std::size_t> find(const std::string& tag) const;

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct Vocab {
  TagIndex pos_tags;
  TagIndex dep_types;
};

Vocab build_vocab(const TreeMap& trees);

}  // namespace talkgrade
