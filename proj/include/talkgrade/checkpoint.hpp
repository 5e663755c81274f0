#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "talkgrade/models.hpp"

namespace talkgrade {

// Textual tensor container. Layout:
//
//   talkgrade-checkpoint 1
//   meta <key> <value to end of line>
//   tensor <name> <rows> <cols>
//   <one line per row, values in C99 hex-float notation>
//   end
//
// Hex floats make save/load bit-exact.
class Checkpoint {
 public:
  static constexpr int kVersion = 1;

  void set_meta(const std::string& key, std::string value);
  const std::string& meta(const std::string& key) const;
  bool has_meta(const std::string& key) const { return meta_.count(key) > 0; }
  const std::map<std::string, std::string>& all_meta() const { return meta_; }

  void add_tensor(const std::string& name, Eigen::MatrixXd value);
  const Eigen::MatrixXd& tensor(const std::string& name) const;
  bool has_tensor(const std::string& name) const;
  const std::vector<std::pair<std::string, Eigen::MatrixXd>>& tensors() const { return tensors_; }

  std::string serialize() const;
  static Checkpoint parse(const std::string& text);

  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);

 private:
  std::map<std::string, std::string> meta_;
  std::vector<std::pair<std::string, Eigen::MatrixXd>> tensors_;
};

/// Writes every parameter of `model` plus the architecture metadata.
Checkpoint to_checkpoint(const NeuralModel& model);

/// Copies tensors into `model`, rejecting missing names and shape mismatches.
void load_into(NeuralModel& model, const Checkpoint& ckpt);

/// Architecture stored in a neural checkpoint.
ArchitectureSpec architecture_of(const Checkpoint& ckpt);
Vocab vocab_of(const Checkpoint& ckpt);

}  // namespace talkgrade
