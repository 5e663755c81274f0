#include "talkgrade/categories.hpp"

namespace talkgrade {

std::optional<std::size_t> category_index(std::string_view name) {
  for (std::size_t i = 0; i < kNumCategories; ++i)
    if (kCategoryNames[i] == name) return i;
  return std::nullopt;
}

}  // namespace talkgrade
