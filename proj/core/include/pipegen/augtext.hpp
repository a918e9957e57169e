#pragma once

#include <atomic>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pipegen/value.hpp"

namespace pipegen {

// A text-like value backed by an array of typed components instead of
// characters. Concatenation appends components; the character form is only
// produced (and memoized) when materialize() is called, so exporters that
// build record strings out of primitives never pay for the text encoding.
//
// Components live in a flat, type-tagged byte arena, so concat is a single
// buffer append and no per-part allocations happen.
class AugText {
 public:
  using Part = std::variant<int32_t, int64_t, double, bool, std::string_view>;

  AugText() = default;
  AugText(const AugText& other);
  AugText(AugText&& other) noexcept;
  AugText& operator=(const AugText& other);
  AugText& operator=(AugText&& other) noexcept;
  ~AugText();

  static AugText from_value(int32_t v);
  static AugText from_value(int64_t v);
  static AugText from_value(double v);
  static AugText from_value(bool v);
  static AugText from_value(std::string_view text);
  static AugText from_value(const char* text) { return from_value(std::string_view(text)); }
  static AugText from_value(const std::string& text) { return from_value(std::string_view(text)); }
  static AugText from_value(const Value& v);

  static AugText concat(const AugText& a, const AugText& b);
  AugText& append(const AugText& other);
  AugText& append_value(const Value& v);

  // Empties the value while keeping the arena's capacity, so a loop can
  // build one record per iteration without reallocating.
  void clear();

  size_t part_count() const { return part_count_; }
  bool empty() const { return part_count_ == 0; }

  // Visits each component in order; F receives a Part.
  template <typename F>
  void for_each_part(F&& f) const;

  // Canonical character form; computed once and cached.
  const std::string& materialize() const;
  bool is_materialized() const { return memo_.load(std::memory_order_acquire) != nullptr; }

  // Numeric conversions. A single matching primitive part short-circuits
  // without producing any text; anything else parses the materialized form.
  // Throws NonNumericText when the content is not exactly one number.
  int64_t parse_int() const;
  double parse_float() const;

  // Splits on a single-character delimiter. Components that are exactly the
  // delimiter act as boundaries and the segments keep their unmaterialized
  // parts; inputs where the delimiter could hide inside a component fall
  // back to splitting the materialized text.
  std::vector<AugText> split(char delim) const;

  size_t arena_size() const { return arena_.size(); }

 private:
  void push_tag(TypeCode tag) { arena_.push_back(static_cast<uint8_t>(tag)); }
  void push_fixed(const void* data, size_t n);
  void push_text(std::string_view text);
  AugText slice_parts(size_t begin_offset, size_t end_offset, size_t parts) const;
  void reset_memo();

  std::vector<uint8_t> arena_;
  size_t part_count_ = 0;
  mutable std::atomic<const std::string*> memo_{nullptr};
};

inline AugText operator+(const AugText& a, const AugText& b) { return AugText::concat(a, b); }

template <typename F>
void AugText::for_each_part(F&& f) const {
  size_t pos = 0;
  const auto* data = arena_.data();
  for (size_t p = 0; p < part_count_; ++p) {
    const auto tag = static_cast<TypeCode>(data[pos++]);
    switch (tag) {
      case TypeCode::Int32: {
        int32_t v;
        __builtin_memcpy(&v, data + pos, 4);
        pos += 4;
        f(Part(v));
        break;
      }
      case TypeCode::Int64: {
        int64_t v;
        __builtin_memcpy(&v, data + pos, 8);
        pos += 8;
        f(Part(v));
        break;
      }
      case TypeCode::Float64: {
        double v;
        __builtin_memcpy(&v, data + pos, 8);
        pos += 8;
        f(Part(v));
        break;
      }
      case TypeCode::Bool: {
        f(Part(data[pos++] != 0));
        break;
      }
      case TypeCode::Text: {
        uint32_t n;
        __builtin_memcpy(&n, data + pos, 4);
        pos += 4;
        f(Part(std::string_view(reinterpret_cast<const char*>(data + pos), n)));
        pos += n;
        break;
      }
    }
  }
}

}  // namespace pipegen
