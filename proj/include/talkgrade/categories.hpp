#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace talkgrade {

inline constexpr std::size_t kNumCategories = 14;

// Fixed label order used by every vector of ratings, labels and metrics.
inline constexpr std::array<std::string_view, kNumCategories> kCategoryNames = {
    "Beautiful", "Confusing",    "Courageous", "Fascinating", "Funny",
    "Informative", "Ingenious",  "Inspiring",  "Jaw-Dropping", "Long-winded",
    "Obnoxious", "OK",           "Persuasive", "Unconvincing"};

std::optional<std::size_t> category_index(std::string_view name);

}  // namespace talkgrade
