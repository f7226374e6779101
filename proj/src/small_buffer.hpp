#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace gm::detail {

/// Fixed-size scratch vector with inline storage for small state counts.
template <std::size_t Inline = 8>
class SmallBuffer {
 public:
  explicit SmallBuffer(std::size_t n) : size_(n) {
    if (n > Inline) heap_.resize(n);
  }
  SmallBuffer(const SmallBuffer&) = delete;
  SmallBuffer& operator=(const SmallBuffer&) = delete;

  double* data() noexcept { return size_ > Inline ? heap_.data() : inline_.data(); }
  const double* data() const noexcept { return size_ > Inline ? heap_.data() : inline_.data(); }
  std::size_t size() const noexcept { return size_; }
  double& operator[](std::size_t i) noexcept { return data()[i]; }
  double operator[](std::size_t i) const noexcept { return data()[i]; }
  double* begin() noexcept { return data(); }
  double* end() noexcept { return data() + size_; }

  operator std::span<double>() noexcept { return {data(), size_}; }
  operator std::span<const double>() const noexcept { return {data(), size_}; }

 private:
  std::size_t size_;
  std::array<double, Inline> inline_{};
  std::vector<double> heap_;
};

}  // namespace gm::detail
