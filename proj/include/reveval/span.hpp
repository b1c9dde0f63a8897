#pragma once

#include <cstddef>

namespace reveval {

// Half-open byte interval.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool is_point() const { return begin == end; }
  bool operator==(const Span&) const = default;
};

}  // namespace reveval
