#include "talkgrade/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "talkgrade/error.hpp"

namespace talkgrade {

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw Error("config: bad value '" + value + "' for '" + key + "'");
  return out;
}

// Shortest text that parses back to the same double.
std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

void apply_setting(TrainConfig& cfg, const std::string& key, const std::string& value) {
  auto d = [&] { return parse_number<double>(key, value); };
  auto i = [&] { return parse_number<int>(key, value); };
  if (key == "optimizer") cfg.optimizer = parse_optimizer(value);
  else if (key == "learning_rate") cfg.learning_rate = d();
  else if (key == "batch_size") cfg.batch_size = i();
  else if (key == "epochs") cfg.epochs = i();
  else if (key == "weight_drop_p") cfg.weight_drop_p = d();
  else if (key == "fc_dropout_p") cfg.fc_dropout_p = d();
  else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "dev_fraction") cfg.dev_fraction = d();
  else if (key == "test_n") cfg.test_n = i();
  else if (key == "hidden_dim") cfg.hidden_dim = i();
  else if (key == "pos_dim") cfg.pos_dim = i();
  else if (key == "dep_dim") cfg.dep_dim = i();
  else if (key == "weight_decay") cfg.weight_decay = d();
  else if (key == "patience") cfg.patience = i();
  else if (key == "min_delta") cfg.min_delta = d();
  else if (key == "svm_c") cfg.svm_c = d();
  else if (key == "lasso_c") cfg.lasso_c = d();
  else if (key == "threads") cfg.threads = i();
  else throw Error("config: unknown key '" + key + "'");
}

void apply_assignment(TrainConfig& cfg, std::string_view assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw Error("config: expected key=value, got '" + std::string(assignment) + "'");
  apply_setting(cfg, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

TrainConfig parse_config(std::string_view text, TrainConfig base) {
  std::istringstream is{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    try {
      apply_assignment(base, line);
    } catch (const Error& e) {
      throw Error(std::string(e.what()) + " (line " + std::to_string(line_no) + ")");
    }
  }
  return base;
}

TrainConfig load_config(const std::filesystem::path& path, TrainConfig base) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

std::string config_to_text(const TrainConfig& c) {
  std::ostringstream os;
  os << "optimizer = " << to_string(c.optimizer) << '\n'
     << "learning_rate = " << fmt(c.learning_rate) << '\n'
     << "batch_size = " << c.batch_size << '\n'
     << "epochs = " << c.epochs << '\n'
     << "weight_drop_p = " << fmt(c.weight_drop_p) << '\n'
     << "fc_dropout_p = " << fmt(c.fc_dropout_p) << '\n'
     << "seed = " << c.seed << '\n'
     << "dev_fraction = " << fmt(c.dev_fraction) << '\n'
     << "test_n = " << c.test_n << '\n'
     << "hidden_dim = " << c.hidden_dim << '\n'
     << "pos_dim = " << c.pos_dim << '\n'
     << "dep_dim = " << c.dep_dim << '\n'
     << "weight_decay = " << fmt(c.weight_decay) << '\n'
     << "patience = " << c.patience << '\n'
     << "min_delta = " << fmt(c.min_delta) << '\n'
     << "svm_c = " << fmt(c.svm_c) << '\n'
     << "lasso_c = " << fmt(c.lasso_c) << '\n'
     << "threads = " << c.threads << '\n';
  return os.str();
}

}  // namespace talkgrade
