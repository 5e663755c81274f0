#include "talkgrade/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "talkgrade/error.hpp"

namespace talkgrade {

namespace {

std::string shape_of(const Eigen::MatrixXd& m) {
  return "(" + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ")";
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') return false;
  return true;
}

std::string join(const std::vector<std::string>& xs) {
  std::string out;
  for (const auto& x : xs) {
    if (!out.empty()) out += ' ';
    out += x;
  }
  return out;
}

std::vector<std::string> split_spaces(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

}  // namespace

void Checkpoint::set_meta(const std::string& key, std::string value) {
  if (!valid_name(key)) throw Error("invalid checkpoint meta key '" + key + "'");
  if (value.find('\n') != std::string::npos) throw Error("checkpoint meta values must be one line");
  meta_[key] = std::move(value);
}

const std::string& Checkpoint::meta(const std::string& key) const {
  auto it = meta_.find(key);
  if (it == meta_.end()) throw Error("checkpoint has no meta entry '" + key + "'");
  return it->second;
}

void Checkpoint::add_tensor(const std::string& name, Eigen::MatrixXd value) {
  if (!valid_name(name)) throw Error("invalid tensor name '" + name + "'");
  if (has_tensor(name)) throw Error("duplicate tensor '" + name + "'");
  tensors_.emplace_back(name, std::move(value));
}

bool Checkpoint::has_tensor(const std::string& name) const {
  for (const auto& [n, m] : tensors_)
    if (n == name) return true;
  return false;
}

const Eigen::MatrixXd& Checkpoint::tensor(const std::string& name) const {
  for (const auto& [n, m] : tensors_)
    if (n == name) return m;
  throw Error("checkpoint has no tensor '" + name + "'");
}

std::string Checkpoint::serialize() const {
  std::ostringstream os;
  os << "talkgrade-checkpoint " << kVersion << '\n';
  for (const auto& [k, v] : meta_) os << "meta " << k << ' ' << v << '\n';
  char buf[64];
  for (const auto& [name, m] : tensors_) {
    os << "tensor " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        std::snprintf(buf, sizeof buf, "%a", m(r, c));
        if (c) os << ' ';
        os << buf;
      }
      os << '\n';
    }
  }
  os << "end\n";
  return os.str();
}

Checkpoint Checkpoint::parse(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw Error("checkpoint line " + std::to_string(line_no) + ": " + what);
  };
  auto next = [&]() {
    if (!std::getline(is, line)) fail("unexpected end of file");
    ++line_no;
  };

  next();
  {
    auto head = split_spaces(line);
    if (head.size() != 2 || head[0] != "talkgrade-checkpoint") fail("not a checkpoint file");
    if (head[1] != std::to_string(kVersion)) fail("unsupported checkpoint version " + head[1]);
  }
  Checkpoint ck;
  bool ended = false;
  while (!ended) {
    next();
    if (line == "end") {
      ended = true;
    } else if (line.rfind("meta ", 0) == 0) {
      auto rest = line.substr(5);
      auto sp = rest.find(' ');
      std::string key = rest.substr(0, sp);
      std::string value = sp == std::string::npos ? "" : rest.substr(sp + 1);
      ck.set_meta(key, value);
    } else if (line.rfind("tensor ", 0) == 0) {
      auto f = split_spaces(line);
      if (f.size() != 4) fail("malformed tensor header");
      long rows = std::strtol(f[2].c_str(), nullptr, 10);
      long cols = std::strtol(f[3].c_str(), nullptr, 10);
      if (rows < 0 || cols < 0) fail("negative tensor shape");
      Eigen::MatrixXd m(rows, cols);
      for (long r = 0; r < rows; ++r) {
        next();
        auto vals = split_spaces(line);
        if (static_cast<long>(vals.size()) != cols)
          fail("tensor '" + f[1] + "' row has " + std::to_string(vals.size()) + " values, expected " +
               std::to_string(cols));
        for (long c = 0; c < cols; ++c) {
          char* endp = nullptr;
          m(r, c) = std::strtod(vals[c].c_str(), &endp);
          if (endp == vals[c].c_str() || *endp != '\0') fail("bad number '" + vals[c] + "'");
        }
      }
      ck.add_tensor(f[1], std::move(m));
    } else {
      fail("unrecognized line");
    }
  }
  return ck;
}

void Checkpoint::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  out << serialize();
  if (!out) throw Error("failed writing checkpoint " + path.string());
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

// ---------------------------------------------------------------------------

Checkpoint to_checkpoint(const NeuralModel& model) {
  Checkpoint ck;
  const CellParams& cell = model.cell();
  ck.set_meta("model", to_string(model.kind()));
  ck.set_meta("hidden_dim", std::to_string(cell.hidden_dim));
  ck.set_meta("input_dim", std::to_string(cell.input_dim));
  if (const auto* tree = dynamic_cast<const DepTreeModel*>(&model)) {
    ck.set_meta("pos_dim", std::to_string(tree->embeddings().pos.cols()));
    ck.set_meta("dep_dim", std::to_string(tree->embeddings().dep.cols()));
    ck.set_meta("pos_tags", join(tree->vocab().pos_tags.names()));
    ck.set_meta("dep_types", join(tree->vocab().dep_types.names()));
    ck.set_meta("word_dim", std::to_string(cell.input_dim - tree->embeddings().pos.cols() -
                                           tree->embeddings().dep.cols()));
  } else {
    ck.set_meta("word_dim", std::to_string(cell.input_dim));
  }
  for (const Tensor* t : model.parameters()) ck.add_tensor(t->name, t->value);
  return ck;
}

void load_into(NeuralModel& model, const Checkpoint& ckpt) {
  if (ckpt.has_meta("model") && ckpt.meta("model") != to_string(model.kind()))
    throw Error("checkpoint holds a '" + ckpt.meta("model") + "' model, expected '" +
                to_string(model.kind()) + "'");
  auto params = model.parameters();
  // Validate everything before touching the model.
  for (Tensor* t : params) {
    const Eigen::MatrixXd& m = ckpt.tensor(t->name);
    if (m.rows() != t->rows() || m.cols() != t->cols())
      throw Error("shape mismatch for tensor '" + t->name + "': checkpoint " + shape_of(m) +
                  " vs model " + shape_of(t->value));
  }
  for (Tensor* t : params) {
    t->value = ckpt.tensor(t->name);
    t->zero_grad();
  }
}

ArchitectureSpec architecture_of(const Checkpoint& ckpt) {
  auto num = [&](const char* key, int fallback) {
    return ckpt.has_meta(key) ? std::stoi(ckpt.meta(key)) : fallback;
  };
  ArchitectureSpec a;
  a.word_dim = num("word_dim", a.word_dim);
  a.hidden_dim = num("hidden_dim", a.hidden_dim);
  a.pos_dim = num("pos_dim", 0);
  a.dep_dim = num("dep_dim", 0);
  return a;
}

Vocab vocab_of(const Checkpoint& ckpt) {
  return Vocab{TagIndex(split_spaces(ckpt.has_meta("pos_tags") ? ckpt.meta("pos_tags") : "")),
               TagIndex(split_spaces(ckpt.has_meta("dep_types") ? ckpt.meta("dep_types") : ""))};
}

}  // namespace talkgrade
