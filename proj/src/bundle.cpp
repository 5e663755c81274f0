#include "talkgrade/bundle.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <cereal/archives/portable_binary.hpp>
#include <cereal/types/array.hpp>
#include <cereal/types/string.hpp>
#include <cereal/types/vector.hpp>

#include "talkgrade/error.hpp"

namespace talkgrade {

template <class Archive>
void serialize(Archive& ar, Talk& t) {
  ar(t.id, t.title, t.transcript, t.sentences, t.rating_counts, t.total_views, t.age_days,
     t.keywords);
}

template <class Archive>
void serialize(Archive& ar, DepNode& n) {
  ar(n.token, n.pos_tag, n.dep_type, n.parent, n.children);
}

template <class Archive>
void serialize(Archive& ar, DepTree& t) {
  ar(t.nodes, t.root);
}

namespace {

constexpr char kMagic[] = "talkgrade-bundle";

}  // namespace

std::vector<const DepTree*> CorpusBundle::trees_for(const std::string& talk_id) const {
  std::vector<const DepTree*> out;
  for (auto it = trees.lower_bound({talk_id, 0}); it != trees.end() && it->first.first == talk_id; ++it)
    out.push_back(&it->second);
  if (out.empty()) throw Error("talk '" + talk_id + "' has no dependency trees");
  return out;
}

void CorpusBundle::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write bundle " + path.string());
  cereal::PortableBinaryOutputArchive ar(out);
  ar(std::string(kMagic), kVersion, talks, has_trees);

  auto tokens = vectors.sorted_tokens();
  std::vector<double> data;
  data.reserve(tokens.size() * static_cast<std::size_t>(vectors.dim()));
  for (const auto& tok : tokens) {
    const auto& v = vectors.lookup(tok);
    data.insert(data.end(), v.data(), v.data() + v.size());
  }
  ar(vectors.dim(), tokens, data);

  std::vector<std::string> ids;
  std::vector<int> sent;
  std::vector<DepTree> tree_list;
  for (const auto& [key, tree] : trees) {
    ids.push_back(key.first);
    sent.push_back(key.second);
    tree_list.push_back(tree);
  }
  ar(ids, sent, tree_list);
  if (!out) throw Error("failed writing bundle " + path.string());
}

CorpusBundle CorpusBundle::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open bundle " + path.string());
  CorpusBundle b;
  try {
    cereal::PortableBinaryInputArchive ar(in);
    std::string magic;
    std::uint32_t version = 0;
    ar(magic);
    if (magic != kMagic) throw Error("not a corpus bundle: " + path.string());
    ar(version);
    if (version != kVersion) throw Error("unsupported bundle version " + std::to_string(version));
    ar(b.talks, b.has_trees);

    int dim = 0;
    std::vector<std::string> tokens;
    std::vector<double> data;
    ar(dim, tokens, data);
    if (dim <= 0 || data.size() != tokens.size() * static_cast<std::size_t>(dim))
      throw Error("corrupt word-vector section in bundle");
    b.vectors = WordVectors(dim);
    for (std::size_t i = 0; i < tokens.size(); ++i)
      b.vectors.insert(tokens[i], Eigen::Map<const Eigen::VectorXd>(data.data() + i * dim, dim));

    std::vector<std::string> ids;
    std::vector<int> sent;
    std::vector<DepTree> tree_list;
    ar(ids, sent, tree_list);
    if (ids.size() != sent.size() || ids.size() != tree_list.size())
      throw Error("corrupt tree section in bundle");
    for (std::size_t i = 0; i < ids.size(); ++i) {
      tree_list[i].validate();
      b.trees.emplace(TreeKey{ids[i], sent[i]}, std::move(tree_list[i]));
    }
  } catch (const cereal::Exception& e) {
    throw Error("corrupt bundle " + path.string() + ": " + e.what());
  }
  return b;
}

DatasetSummary summarize(const CorpusBundle& bundle) {
  DatasetSummary s;
  s.talks = bundle.talks.size();
  s.trees = bundle.trees.size();
  bool first = true;
  for (const auto& t : bundle.talks) {
    std::int64_t sum = 0;
    for (std::size_t c = 0; c < kNumCategories; ++c) {
      s.per_category[c] += t.rating_counts[c];
      sum += t.rating_counts[c];
    }
    s.total_ratings += sum;
    s.min_ratings = first ? sum : std::min(s.min_ratings, sum);
    first = false;
    s.total_words += t.word_count();
    s.total_sentences += t.sentences.size();
  }
  s.mean_ratings = s.talks ? static_cast<double>(s.total_ratings) / static_cast<double>(s.talks) : 0.0;
  return s;
}

std::string DatasetSummary::to_text() const {
  std::ostringstream os;
  char buf[160];
  os << "Dataset properties\n";
  auto row = [&](const char* k, const std::string& v) {
    std::snprintf(buf, sizeof buf, "  %-26s %s\n", k, v.c_str());
    os << buf;
  };
  row("Number of talks", std::to_string(talks));
  row("Total number of ratings", std::to_string(total_ratings));
  std::snprintf(buf, sizeof buf, "%.1f", mean_ratings);
  row("Average ratings per talk", buf);
  row("Minimum ratings per talk", std::to_string(min_ratings));
  row("Total word count", std::to_string(total_words));
  row("Total sentence count", std::to_string(total_sentences));
  row("Dependency trees", std::to_string(trees));

  os << "\nCounts per rating category\n";
  std::int64_t peak = 1;
  for (auto c : per_category) peak = std::max(peak, c);
  for (std::size_t c = 0; c < kNumCategories; ++c) {
    int bar = static_cast<int>(40.0 * static_cast<double>(per_category[c]) / static_cast<double>(peak) + 0.5);
    std::snprintf(buf, sizeof buf, "  %-14s %12lld  ", std::string(kCategoryNames[c]).c_str(),
                  static_cast<long long>(per_category[c]));
    os << buf << std::string(static_cast<std::size_t>(bar), '#') << '\n';
  }
  return os.str();
}

}  // namespace talkgrade
