#include "talkgrade/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "talkgrade/error.hpp"

namespace talkgrade {

namespace {

using json = nlohmann::json;

std::string at_line(std::size_t line_no) { return " (line " + std::to_string(line_no) + ")"; }

const json& required(const json& obj, const char* field, std::size_t line_no) {
  auto it = obj.find(field);
  if (it == obj.end())
    throw Error(std::string("missing required field '") + field + "'" + at_line(line_no));
  return *it;
}

std::int64_t non_negative(const json& v, const std::string& what, std::size_t line_no) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
    throw Error(what + " must be a non-negative integer" + at_line(line_no));
  return v.get<std::int64_t>();
}

RatingCounts parse_ratings(const json& v, std::size_t line_no) {
  RatingCounts counts{};
  if (v.is_array()) {
    if (v.size() != kNumCategories)
      throw Error("expected 14 rating counts, got " + std::to_string(v.size()) + at_line(line_no));
    for (std::size_t i = 0; i < kNumCategories; ++i)
      counts[i] = non_negative(v[i], "rating count", line_no);
    return counts;
  }
  if (!v.is_object()) throw Error("field 'ratings' must be an object" + at_line(line_no));
  if (v.size() != kNumCategories)
    throw Error("expected 14 rating counts, got " + std::to_string(v.size()) + at_line(line_no));
  std::array<bool, kNumCategories> seen{};
  for (auto it = v.begin(); it != v.end(); ++it) {
    auto idx = category_index(it.key());
    if (!idx) throw Error("unknown rating category '" + it.key() + "'" + at_line(line_no));
    seen[*idx] = true;
    counts[*idx] = non_negative(it.value(), "rating '" + it.key() + "'", line_no);
  }
  for (std::size_t i = 0; i < kNumCategories; ++i)
    if (!seen[i])
      throw Error("missing rating category '" + std::string(kCategoryNames[i]) + "'" +
                  at_line(line_no));
  return counts;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !is_space(s[j])) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

std::size_t Talk::word_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.size();
  return n;
}

Talk parse_talk_record(std::string_view line, std::size_t line_no) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw Error("malformed JSON" + at_line(line_no) + ": " + e.what());
  }
  if (!obj.is_object()) throw Error("record is not a JSON object" + at_line(line_no));

  Talk t;
  try {
    t.id = required(obj, "id", line_no).get<std::string>();
    t.title = required(obj, "title", line_no).get<std::string>();
    t.transcript = required(obj, "transcript", line_no).get<std::string>();
    t.keywords = required(obj, "keywords", line_no).get<std::vector<std::string>>();
  } catch (const json::type_error& e) {
    throw Error("wrong field type" + at_line(line_no) + ": " + e.what());
  }
  t.rating_counts = parse_ratings(required(obj, "ratings", line_no), line_no);
  t.total_views = non_negative(required(obj, "views", line_no), "views", line_no);
  t.age_days = non_negative(required(obj, "age_days", line_no), "age_days", line_no);

  try {
    t.sentences = split_sentences(t.transcript);
  } catch (const Error&) {
    // Empty transcripts load fine; filter_talks removes them.
  }
  return t;
}

std::vector<Talk> load_talks(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open talks file " + path.string());
  std::vector<Talk> talks;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (std::all_of(line.begin(), line.end(), is_space)) continue;
    talks.push_back(parse_talk_record(line, line_no));
  }
  return talks;
}

const std::vector<std::string>& default_banned_keywords() {
  static const std::vector<std::string> kBanned = {"live music", "dance", "music",
                                                   "performance", "entertainment"};
  return kBanned;
}

std::vector<Talk> filter_talks(const std::vector<Talk>& talks, std::size_t min_words,
                               std::int64_t min_age_days,
                               const std::vector<std::string>& banned_keywords) {
  std::set<std::string> banned;
  for (const auto& k : banned_keywords) banned.insert(lower(k));

  std::vector<Talk> kept;
  for (const auto& t : talks) {
    if (t.word_count() < min_words || t.age_days < min_age_days) continue;
    bool hit = std::any_of(t.keywords.begin(), t.keywords.end(),
                           [&](const std::string& k) { return banned.count(lower(k)) > 0; });
    if (!hit) kept.push_back(t);
  }
  return kept;
}

std::vector<Sentence> split_sentences(std::string_view transcript) {
  std::vector<Sentence> sentences;
  Sentence current;
  for (std::string_view chunk : split_ws(transcript)) {
    std::size_t b = 0, e = chunk.size();
    while (b < e && is_punct(chunk[b])) ++b;
    while (e > b && is_punct(chunk[e - 1])) --e;
    if (b == e) b = e = 0;  // all punctuation: treat as trailing so it can close a sentence
    for (std::size_t i = 0; i < b; ++i) current.emplace_back(1, chunk[i]);
    if (e > b) current.push_back(lower(chunk.substr(b, e - b)));
    bool closes = false;
    for (std::size_t i = std::max(b, e); i < chunk.size(); ++i) {
      current.emplace_back(1, chunk[i]);
      closes = closes || chunk[i] == '.' || chunk[i] == '!' || chunk[i] == '?';
    }
    if (closes) sentences.push_back(std::move(current)), current.clear();
  }
  if (!current.empty()) sentences.push_back(std::move(current));
  if (sentences.empty()) throw Error("empty transcript");
  return sentences;
}

// ---------------------------------------------------------------------------

WordVectors::WordVectors(int dim) : dim_(dim), zero_(Eigen::VectorXd::Zero(dim)) {
  if (dim <= 0) throw Error("word-vector dimension must be positive");
}

const Eigen::VectorXd& WordVectors::lookup(const std::string& token) const {
  auto it = table_.find(token);
  return it == table_.end() ? zero_ : it->second;
}

void WordVectors::insert(std::string token, Eigen::VectorXd vec) {
  if (vec.size() != dim_)
    throw Error("word vector for '" + token + "' has length " + std::to_string(vec.size()) +
                ", expected " + std::to_string(dim_));
  auto [it, fresh] = table_.emplace(std::move(token), std::move(vec));
  if (!fresh) throw Error("duplicate token '" + it->first + "'");
}

WordVectors WordVectors::restricted_to(const std::vector<std::string>& keep) const {
  WordVectors out(dim_);
  for (const auto& tok : keep) {
    auto it = table_.find(tok);
    if (it != table_.end() && !out.contains(tok)) out.table_.emplace(tok, it->second);
  }
  return out;
}

std::vector<std::string> WordVectors::sorted_tokens() const {
  std::vector<std::string> toks;
  toks.reserve(table_.size());
  for (const auto& [k, v] : table_) toks.push_back(k);
  std::sort(toks.begin(), toks.end());
  return toks;
}

WordVectors load_word_vectors(const std::filesystem::path& path, int dim) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open word-vector file " + path.string());
  WordVectors wv(dim);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = split_ws(line);
    if (fields.empty()) continue;
    std::size_t got = fields.size() - 1;
    if (got != static_cast<std::size_t>(dim))
      throw Error("expected " + std::to_string(dim) + " values, got " + std::to_string(got) +
                  at_line(line_no));
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) {
      auto f = fields[i + 1];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v[i]);
      if (ec != std::errc() || ptr != f.data() + f.size())
        throw Error("bad number '" + std::string(f) + "'" + at_line(line_no));
    }
    try {
      wv.insert(std::string(fields[0]), std::move(v));
    } catch (const Error& e) {
      throw Error(e.what() + at_line(line_no));
    }
  }
  return wv;
}

// ---------------------------------------------------------------------------

std::vector<int> DepTree::bottom_up_order() const {
  std::vector<int> order;
  order.reserve(nodes.size());
  if (root < 0) return order;
  // Reverse of a pre-order walk visits every child before its parent.
  std::vector<int> stack{root};
  while (!stack.empty()) {
    int n = stack.back();
    stack.pop_back();
    order.push_back(n);
    for (int c : nodes[n].children) stack.push_back(c);
  }
  std::reverse(order.begin(), order.end());
  return order;
}

void DepTree::validate() const {
  const int n = static_cast<int>(nodes.size());
  if (n == 0) throw Error("empty dependency tree");
  int roots = 0;
  for (int i = 0; i < n; ++i) {
    const auto& node = nodes[i];
    if (node.parent < 0) {
      ++roots;
      if (i != root) throw Error("root index does not match parentless node");
    } else {
      if (node.parent >= n) throw Error("parent index out of range");
      const auto& sib = nodes[node.parent].children;
      if (std::count(sib.begin(), sib.end(), i) != 1)
        throw Error("parent/child links are inconsistent");
    }
    for (int c : node.children)
      if (c < 0 || c >= n || nodes[c].parent != i)
        throw Error("parent/child links are inconsistent");
  }
  if (roots != 1) throw Error("root count != 1");
  if (static_cast<int>(bottom_up_order().size()) != n)
    throw Error("dependency tree is not connected");
}

DepTree make_dep_tree(std::vector<DepNode> nodes, const std::vector<int>& heads) {
  const int n = static_cast<int>(nodes.size());
  if (n == 0) throw Error("empty dependency tree");
  if (static_cast<int>(heads.size()) != n) throw Error("head count does not match token count");
  for (int h : heads)
    if (h < 0 || h > n) throw Error("HEAD " + std::to_string(h) + " out of range");

  for (int i = 0; i < n; ++i) {
    int cur = i, steps = 0;
    while (heads[cur] != 0) {
      cur = heads[cur] - 1;
      if (++steps > n) throw Error("cyclic dependency");
    }
  }
  if (std::count(heads.begin(), heads.end(), 0) != 1) throw Error("root count != 1");

  DepTree tree;
  tree.nodes = std::move(nodes);
  for (int i = 0; i < n; ++i) {
    tree.nodes[i].children.clear();
    tree.nodes[i].parent = heads[i] - 1;
  }
  for (int i = 0; i < n; ++i) {
    if (heads[i] == 0)
      tree.root = i;
    else
      tree.nodes[heads[i] - 1].children.push_back(i);
  }
  return tree;
}

namespace {

std::vector<std::string_view> split_columns(std::string_view line) {
  if (line.find('\t') == std::string_view::npos) return split_ws(line);
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    cols.push_back(line.substr(start, tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return cols;
}

std::optional<std::string> comment_value(std::string_view line, std::string_view key) {
  // "# key = value"
  auto body = line.substr(1);
  auto eq = body.find('=');
  if (eq == std::string_view::npos) return std::nullopt;
  auto trim = [](std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
  };
  if (trim(body.substr(0, eq)) != key) return std::nullopt;
  return std::string(trim(body.substr(eq + 1)));
}

struct PendingBlock {
  std::optional<std::string> talk_id;
  std::optional<std::string> sent_id;
  std::vector<DepNode> nodes;
  std::vector<int> heads;
  std::size_t first_line = 0;

  bool empty() const { return nodes.empty() && !talk_id && !sent_id; }
};

}  // namespace

TreeMap parse_dep_trees(std::string_view text) {
  TreeMap trees;
  PendingBlock block;
  std::size_t line_no = 0;

  auto flush = [&]() {
    if (block.empty()) return;
    std::string where = " in block starting" + at_line(block.first_line);
    if (!block.talk_id) throw Error("missing '# talk_id' comment" + where);
    if (!block.sent_id) throw Error("missing '# sent_id' comment" + where);
    int sent = 0;
    auto& s = *block.sent_id;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), sent);
    if (ec != std::errc() || ptr != s.data() + s.size() || sent < 0)
      throw Error("sent_id must be a non-negative integer" + where);
    DepTree tree;
    try {
      tree = make_dep_tree(std::move(block.nodes), block.heads);
    } catch (const Error& e) {
      throw Error(e.what() + where);
    }
    TreeKey key{*block.talk_id, sent};
    if (trees.count(key)) throw Error("duplicate sentence key" + where);
    trees.emplace(std::move(key), std::move(tree));
    block = PendingBlock{};
  };

  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (std::all_of(line.begin(), line.end(), is_space)) {
      flush();
      continue;
    }
    if (block.empty()) block.first_line = line_no;
    if (line.front() == '#') {
      if (auto v = comment_value(line, "talk_id")) block.talk_id = v;
      if (auto v = comment_value(line, "sent_id")) block.sent_id = v;
      continue;
    }

    auto cols = split_columns(line);
    std::size_t form = 1, upos, head, deprel;
    if (cols.size() >= 10) {
      upos = 3, head = 6, deprel = 7;
    } else if (cols.size() == 5) {
      upos = 2, head = 3, deprel = 4;
    } else {
      throw Error("expected 10 (or 5) columns, got " + std::to_string(cols.size()) +
                  at_line(line_no));
    }
    // Multiword ranges ("3-4") and empty nodes ("5.1") carry no tree edge.
    if (cols[0].find_first_of("-.") != std::string_view::npos) continue;

    int id = 0, h = 0;
    auto parse_int = [&](std::string_view f, int& out, const char* what) {
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), out);
      if (ec != std::errc() || ptr != f.data() + f.size())
        throw Error(std::string("bad ") + what + " '" + std::string(f) + "'" + at_line(line_no));
    };
    parse_int(cols[0], id, "ID");
    parse_int(cols[head], h, "HEAD");
    if (id != static_cast<int>(block.nodes.size()) + 1)
      throw Error("token IDs must be consecutive from 1" + at_line(line_no));
    block.nodes.push_back(DepNode{lower(cols[form]), std::string(cols[upos]),
                                  std::string(cols[deprel]), -1, {}});
    block.heads.push_back(h);
  }
  flush();
  return trees;
}

TreeMap load_dep_trees(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open tree file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_dep_trees(ss.str());
}

// ---------------------------------------------------------------------------

TagIndex::TagIndex(std::vector<std::string> sorted_unique) : names_(std::move(sorted_unique)) {
  for (std::size_t i = 0; i < names_.size(); ++i) index_.emplace(names_[i], i);
}

std::optional<std::size_t> TagIndex::find(const std::string& tag) const {
  auto it = index_.find(tag);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Vocab build_vocab(const TreeMap& trees) {
  std::set<std::string> pos, dep;
  for (const auto& [key, tree] : trees)
    for (const auto& n : tree.nodes) {
      pos.insert(n.pos_tag);
      dep.insert(n.dep_type);
    }
  return Vocab{TagIndex({pos.begin(), pos.end()}), TagIndex({dep.begin(), dep.end()})};
}

}  // namespace talkgrade
