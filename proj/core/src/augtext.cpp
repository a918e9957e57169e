#include "pipegen/augtext.hpp"

#include <charconv>
#include <cstring>

#include "pipegen/error.hpp"

namespace pipegen {

namespace {

// Characters that can appear in the canonical rendering of each primitive
// type. Used to decide whether a delimiter could hide inside a component,
// which would make the component-level split disagree with a split of the
// materialized text.
bool rendering_may_contain(const AugText::Part& part, char c) {
  struct Visitor {
    char c;
    bool operator()(int32_t) const { return (c >= '0' && c <= '9') || c == '-'; }
    bool operator()(int64_t) const { return (c >= '0' && c <= '9') || c == '-'; }
    bool operator()(double) const {
      return (c >= '0' && c <= '9') || c == '-' || c == '+' || c == '.' || c == 'e' ||
             c == 'n' || c == 'a' || c == 'i' || c == 'f';
    }
    bool operator()(bool) const { return std::string_view("truefals").find(c) != std::string_view::npos; }
    bool operator()(std::string_view s) const { return s.find(c) != std::string_view::npos; }
  };
  return std::visit(Visitor{c}, part);
}

}  // namespace

AugText::AugText(const AugText& other)
    : arena_(other.arena_), part_count_(other.part_count_) {
  if (const std::string* m = other.memo_.load(std::memory_order_acquire)) {
    memo_.store(new std::string(*m), std::memory_order_release);
  }
}

AugText::AugText(AugText&& other) noexcept
    : arena_(std::move(other.arena_)), part_count_(other.part_count_) {
  memo_.store(other.memo_.exchange(nullptr, std::memory_order_acq_rel), std::memory_order_release);
  other.part_count_ = 0;
}

AugText& AugText::operator=(const AugText& other) {
  if (this == &other) return *this;
  arena_ = other.arena_;
  part_count_ = other.part_count_;
  reset_memo();
  if (const std::string* m = other.memo_.load(std::memory_order_acquire)) {
    memo_.store(new std::string(*m), std::memory_order_release);
  }
  return *this;
}

AugText& AugText::operator=(AugText&& other) noexcept {
  if (this == &other) return *this;
  arena_ = std::move(other.arena_);
  part_count_ = other.part_count_;
  other.part_count_ = 0;
  reset_memo();
  memo_.store(other.memo_.exchange(nullptr, std::memory_order_acq_rel), std::memory_order_release);
  return *this;
}

AugText::~AugText() { reset_memo(); }

void AugText::reset_memo() {
  // Appends vastly outnumber materializations; skip the read-modify-write
  // when there is no memo to drop.
  if (memo_.load(std::memory_order_relaxed) == nullptr) return;
  delete memo_.exchange(nullptr, std::memory_order_acq_rel);
}

void AugText::clear() {
  reset_memo();
  arena_.clear();
  part_count_ = 0;
}

void AugText::push_fixed(const void* data, size_t n) {
  if (n == 0) return;
  const size_t old = arena_.size();
  arena_.resize(old + n);
  std::memcpy(arena_.data() + old, data, n);
}

void AugText::push_text(std::string_view text) {
  uint32_t n = static_cast<uint32_t>(text.size());
  push_fixed(&n, 4);
  push_fixed(text.data(), text.size());
}

AugText AugText::from_value(int32_t v) {
  AugText t;
  t.push_tag(TypeCode::Int32);
  t.push_fixed(&v, 4);
  t.part_count_ = 1;
  return t;
}

AugText AugText::from_value(int64_t v) {
  AugText t;
  t.push_tag(TypeCode::Int64);
  t.push_fixed(&v, 8);
  t.part_count_ = 1;
  return t;
}

AugText AugText::from_value(double v) {
  AugText t;
  t.push_tag(TypeCode::Float64);
  t.push_fixed(&v, 8);
  t.part_count_ = 1;
  return t;
}

AugText AugText::from_value(bool v) {
  AugText t;
  t.push_tag(TypeCode::Bool);
  t.arena_.push_back(v ? 1 : 0);
  t.part_count_ = 1;
  return t;
}

AugText AugText::from_value(std::string_view text) {
  AugText t;
  if (text.empty()) return t;  // empty text contributes no component
  t.push_tag(TypeCode::Text);
  t.push_text(text);
  t.part_count_ = 1;
  return t;
}

AugText AugText::from_value(const Value& v) {
  return std::visit(
      [](const auto& x) {
        if constexpr (std::is_same_v<std::decay_t<decltype(x)>, std::string>) {
          return from_value(std::string_view(x));
        } else {
          return from_value(x);
        }
      },
      v);
}

AugText AugText::concat(const AugText& a, const AugText& b) {
  AugText out(a);
  out.append(b);
  return out;
}

AugText& AugText::append(const AugText& other) {
  if (other.part_count_ == 0) return *this;
  reset_memo();
  if (this == &other) {
    // Self-append: duplicate the arena without aliasing the growing buffer.
    const std::vector<uint8_t> copy(arena_);
    push_fixed(copy.data(), copy.size());
    part_count_ *= 2;
    return *this;
  }
  push_fixed(other.arena_.data(), other.arena_.size());
  part_count_ += other.part_count_;
  return *this;
}

AugText& AugText::append_value(const Value& v) {
  // Pushes straight into this arena; routing through from_value would cost a
  // temporary heap buffer per appended value. Tag and payload go in as one
  // append so the arena grows once per part.
  reset_memo();
  std::visit(
      [this](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, int32_t>) {
          uint8_t buf[5] = {static_cast<uint8_t>(TypeCode::Int32)};
          __builtin_memcpy(buf + 1, &x, 4);
          push_fixed(buf, sizeof(buf));
        } else if constexpr (std::is_same_v<T, int64_t>) {
          uint8_t buf[9] = {static_cast<uint8_t>(TypeCode::Int64)};
          __builtin_memcpy(buf + 1, &x, 8);
          push_fixed(buf, sizeof(buf));
        } else if constexpr (std::is_same_v<T, double>) {
          uint8_t buf[9] = {static_cast<uint8_t>(TypeCode::Float64)};
          __builtin_memcpy(buf + 1, &x, 8);
          push_fixed(buf, sizeof(buf));
        } else if constexpr (std::is_same_v<T, bool>) {
          const uint8_t buf[2] = {static_cast<uint8_t>(TypeCode::Bool), x ? uint8_t{1} : uint8_t{0}};
          push_fixed(buf, sizeof(buf));
        } else {
          push_tag(TypeCode::Text);
          push_text(x);
        }
      },
      v);
  ++part_count_;
  return *this;
}

const std::string& AugText::materialize() const {
  if (const std::string* m = memo_.load(std::memory_order_acquire)) return *m;
  std::string text;
  for_each_part([&text](const Part& part) {
    std::visit([&text](const auto& v) {
      using T = std::decay_t<decltype(v)>;
      if constexpr (std::is_same_v<T, std::string_view>) {
        text.append(v);
      } else {
        text += render_value(Value(v));
      }
    }, part);
  });
  auto* fresh = new std::string(std::move(text));
  const std::string* expected = nullptr;
  if (memo_.compare_exchange_strong(expected, fresh, std::memory_order_acq_rel,
                                    std::memory_order_acquire)) {
    return *fresh;
  }
  delete fresh;  // another thread won the race
  return *expected;
}

int64_t AugText::parse_int() const {
  if (part_count_ == 1) {
    int64_t out = 0;
    bool hit = false;
    for_each_part([&](const Part& part) {
      if (const auto* v32 = std::get_if<int32_t>(&part)) {
        out = *v32;
        hit = true;
      } else if (const auto* v64 = std::get_if<int64_t>(&part)) {
        out = *v64;
        hit = true;
      }
    });
    if (hit) return out;
  }
  const std::string& text = materialize();
  int64_t out = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc() || end != text.data() + text.size() || text.empty()) {
    raise(ErrorCode::NonNumericText, "cannot parse \"" + text + "\" as an integer");
  }
  return out;
}

double AugText::parse_float() const {
  if (part_count_ == 1) {
    double out = 0;
    bool hit = false;
    for_each_part([&](const Part& part) {
      if (const auto* v = std::get_if<double>(&part)) {
        out = *v;
        hit = true;
      }
    });
    if (hit) return out;
  }
  const std::string& text = materialize();
  double out = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc() || end != text.data() + text.size() || text.empty()) {
    raise(ErrorCode::NonNumericText, "cannot parse \"" + text + "\" as a number");
  }
  return out;
}

AugText AugText::slice_parts(size_t begin_offset, size_t end_offset, size_t parts) const {
  AugText out;
  out.arena_.assign(arena_.begin() + begin_offset, arena_.begin() + end_offset);
  out.part_count_ = parts;
  return out;
}

std::vector<AugText> AugText::split(char delim) const {
  // First pass: find the delimiter components and make sure no other
  // component could contain the delimiter once rendered.
  struct Boundary {
    size_t offset;      // arena offset of the delimiter component
    size_t end_offset;  // arena offset just past it
    size_t part_index;
  };
  std::vector<Boundary> boundaries;
  bool fallback = false;
  size_t offset = 0;
  size_t index = 0;
  for_each_part([&](const Part& part) {
    size_t begin = offset;
    size_t size = 1;  // tag byte
    std::visit([&size](const auto& v) {
      using T = std::decay_t<decltype(v)>;
      if constexpr (std::is_same_v<T, int32_t>) size += 4;
      else if constexpr (std::is_same_v<T, int64_t>) size += 8;
      else if constexpr (std::is_same_v<T, double>) size += 8;
      else if constexpr (std::is_same_v<T, bool>) size += 1;
      else size += 4 + v.size();
    }, part);
    offset += size;
    const auto* text = std::get_if<std::string_view>(&part);
    if (text && text->size() == 1 && (*text)[0] == delim) {
      boundaries.push_back({begin, offset, index});
    } else if (rendering_may_contain(part, delim)) {
      fallback = true;
    }
    ++index;
  });

  if (fallback) {
    // The delimiter may be buried inside a component; split the character
    // form instead so the result matches a plain string split.
    const std::string& text = materialize();
    std::vector<AugText> out;
    size_t start = 0;
    while (true) {
      size_t pos = text.find(delim, start);
      if (pos == std::string::npos) {
        out.push_back(from_value(std::string_view(text).substr(start)));
        break;
      }
      out.push_back(from_value(std::string_view(text).substr(start, pos - start)));
      start = pos + 1;
    }
    return out;
  }

  std::vector<AugText> out;
  out.reserve(boundaries.size() + 1);
  size_t seg_offset = 0;
  size_t seg_first_part = 0;
  for (const Boundary& b : boundaries) {
    out.push_back(slice_parts(seg_offset, b.offset, b.part_index - seg_first_part));
    seg_offset = b.end_offset;
    seg_first_part = b.part_index + 1;
  }
  out.push_back(slice_parts(seg_offset, arena_.size(), part_count_ - seg_first_part));
  return out;
}

}  // namespace pipegen
